//! Derivative-free minimization helpers for the MLE fitter: a standard
//! Nelder-Mead simplex and a bisection solver for monotone 1-D likelihood
//! equations. Both are deterministic.

pub struct NelderMead {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
}

pub struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            rel_tol: 1e-8,
            max_iter: 400,
            initial_step: 0.25,
        }
    }
}

impl NelderMead {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> NmOutcome {
        let dim = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            iterations += 1;
            // order ascending by objective
            let mut idx: Vec<usize> = (0..=dim).collect();
            idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
            let best = idx[0];
            let worst = idx[dim];
            let second_worst = idx[dim - 1];

            let spread = values[worst] - values[best];
            if spread.abs() <= self.rel_tol * (values[best].abs() + 1e-12) {
                converged = true;
                break;
            }

            // centroid of all but the worst
            let mut centroid = vec![0.0; dim];
            for &i in idx.iter().take(dim) {
                for (c, s) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += s / dim as f64;
                }
            }

            let lerp = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = lerp(1.0);
            let fr = f(&reflected);
            if fr < values[best] {
                let expanded = lerp(2.0);
                let fe = f(&expanded);
                if fe < fr {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
            } else if fr < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = fr;
            } else {
                let contracted = if fr < values[worst] { lerp(0.5) } else { lerp(-0.5) };
                let fc = f(&contracted);
                if fc < values[worst].min(fr) {
                    simplex[worst] = contracted;
                    values[worst] = fc;
                } else {
                    // shrink toward the best vertex
                    let best_point = simplex[best].clone();
                    for i in 0..=dim {
                        if i == best {
                            continue;
                        }
                        for (s, b) in simplex[i].iter_mut().zip(&best_point) {
                            *s = b + 0.5 * (*s - b);
                        }
                        values[i] = f(&simplex[i]);
                    }
                }
            }
        }

        let mut best = 0;
        for i in 1..=dim {
            if values[i] < values[best] {
                best = i;
            }
        }
        NmOutcome {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            converged,
        }
    }
}

/// Solve f(x) = 0 for a strictly decreasing f on [lo, hi] by bisection in
/// log space. Returns the midpoint after `iters` halvings.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    debug_assert!(lo > 0.0 && hi > lo);
    let mut a = lo.ln();
    let mut b = hi.ln();
    for _ in 0..iters {
        let mid = 0.5 * (a + b);
        if f(mid.exp()) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    (0.5 * (a + b)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let nm = NelderMead::default();
        let out = nm.minimize(
            |x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0,
            &[0.0, 0.0],
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.5).abs() < 1e-4, "x0 = {}", out.x[0]);
        assert!((out.x[1] + 0.5).abs() < 1e-4, "x1 = {}", out.x[1]);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let nm = NelderMead {
            max_iter: 4000,
            ..Default::default()
        };
        let out = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2) + 1.0,
            &[-1.2, 1.0],
        );
        assert!((out.x[0] - 1.0).abs() < 1e-3);
        assert!((out.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bisection_solves_log_equation() {
        // ln x = 1  ->  x = e
        let x = bisect_decreasing(|x| 1.0 - x.ln(), 1e-6, 1e6, 80);
        assert!((x - std::f64::consts::E).abs() < 1e-9);
    }
}
