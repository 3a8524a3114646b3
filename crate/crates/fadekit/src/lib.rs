//! Amplitude-fading statistics toolkit.
//!
//! The crate models the envelope of multipath radio channels with eight
//! fading families (Rayleigh, Rician, Nakagami-m, Weibull, Gamma, K,
//! Fisher-Snedecor F, Generalized-K), fits them to tap-amplitude data by
//! maximum likelihood, scores the fits with EDF goodness-of-fit statistics
//! (Kolmogorov-Smirnov, Anderson-Darling) and a kernel-density
//! Kullback-Leibler divergence, and extracts tap ensembles from GSM-style
//! training bursts by frequency-domain deconvolution.

pub mod density;
pub mod error;
pub mod fading;
pub mod fit;
pub mod gof;
pub mod gsm;
pub mod quad;
pub mod special;

mod optim;

pub use error::{Error, Result};
pub use fading::{FadingModel, Family, SampleSet};
