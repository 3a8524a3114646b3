fn main() {
    std::process::exit(fadekit_cli_main());
}

fn fadekit_cli_main() -> i32 {
    eprintln!("CLI not wired up yet");
    2
}
