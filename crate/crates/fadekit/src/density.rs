//! Kernel density estimation with the Epanechnikov kernel and MISE-optimal
//! bandwidth, plus Kullback-Leibler divergence between a density estimate
//! and a candidate closed-form density, scored as -20 log10(KLD).
//!
//! The kernel is the sqrt(5)-scaled Epanechnikov, which has unit second
//! moment (k2 = 1), so the bandwidth formula needs no moment correction.
//! The unknown curvature integral of the target density is filled by a
//! normal-reference pilot with scale min(sd, IQR/1.349).

use crate::error::{Error, Result};
use crate::fading::SampleSet;
use crate::quad;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::f64::consts::PI;

const SQRT5: f64 = 2.236_067_977_499_789_8;

/// Kernel tag; only the Epanechnikov kernel ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Epanechnikov,
}

/// Epanechnikov kernel on [-sqrt(5), sqrt(5)]:
/// K(t) = 3/(4 sqrt(5)) (1 - t^2/5), zero outside.
pub fn epanechnikov(t: f64) -> f64 {
    if t.abs() > SQRT5 {
        0.0
    } else {
        3.0 / (4.0 * SQRT5) * (1.0 - t * t / 5.0).max(0.0)
    }
}

/// MISE-optimal bandwidth
/// h = k2^{-2/5} {int K^2}^{1/5} {int f''^2}^{-1/5} n^{-1/5}
/// with the curvature integral taken from the normal-reference pilot.
pub fn optimal_bandwidth(data: &SampleSet) -> Result<f64> {
    if data.len() < 20 {
        return Err(Error::DegenerateData(format!(
            "bandwidth selection requires >= 20 samples, have {}",
            data.len()
        )));
    }
    let sorted = data.sorted();
    let n = sorted.len() as f64;
    let mean = data.mean();
    let sd = (data.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    if !(scale > 0.0) {
        return Err(Error::DegenerateData(
            "bandwidth selection requires positive spread".into(),
        ));
    }
    // k2 = 1 for this kernel normalization
    let int_k2 = 3.0 / (5.0 * SQRT5);
    let curvature = 3.0 / (8.0 * PI.sqrt() * scale.powi(5));
    Ok(int_k2.powf(0.2) * curvature.powf(-0.2) * n.powf(-0.2))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// A fixed-bandwidth kernel density estimate over the sample values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDensity {
    /// Sample values, ascending.
    centers: Vec<f64>,
    pub bandwidth: f64,
    pub kernel: Kernel,
}

impl KernelDensity {
    pub fn new(data: &SampleSet, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelDensity {
            centers: data.sorted(),
            bandwidth,
            kernel: Kernel::Epanechnikov,
        })
    }

    /// Build with the MISE-optimal bandwidth for the data.
    pub fn with_optimal_bandwidth(data: &SampleSet) -> Result<Self> {
        let h = optimal_bandwidth(data)?;
        Self::new(data, h)
    }

    /// The estimate f-hat(x) = (1/nh) sum K((x - X_i)/h).
    pub fn evaluate(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let lo = x - SQRT5 * h;
        let hi = x + SQRT5 * h;
        let start = self.centers.partition_point(|c| *c < lo);
        let mut sum = 0.0;
        for c in &self.centers[start..] {
            if *c > hi {
                break;
            }
            sum += epanechnikov((x - c) / h);
        }
        sum / (self.centers.len() as f64 * h)
    }

    /// Hull of nonzero density: [min - sqrt(5) h, max + sqrt(5) h].
    pub fn support(&self) -> (f64, f64) {
        (
            self.centers.first().unwrap() - SQRT5 * self.bandwidth,
            self.centers.last().unwrap() + SQRT5 * self.bandwidth,
        )
    }

    /// Evenly spaced (x, f-hat(x)) pairs across an interval.
    pub fn curve(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                (x, self.evaluate(x))
            })
            .collect()
    }
}

/// Kullback-Leibler divergence with its numeric caveat flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Kld {
    pub value: f64,
    /// q underflowed somewhere on the support and was floored at 1e-300.
    pub q_floored: bool,
}

const Q_FLOOR: f64 = 1e-300;

/// KL divergence int p ln(p/q) over the support interval, adaptive
/// quadrature at absolute tolerance 1e-8, natural logarithm.
///
/// Errors with a support mismatch if p carries >= 1e-6 of mass on the region
/// where q underflows.
pub fn kld<P, Q>(p: P, q: Q, support: (f64, f64)) -> Result<Kld>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "empty KLD support [{lo}, {hi}]"
        )));
    }
    let floored = Cell::new(false);
    let value = quad::integrate(
        |x| {
            let pv = p(x);
            if pv <= 0.0 {
                return 0.0;
            }
            let mut qv = q(x);
            if qv < Q_FLOOR {
                floored.set(true);
                qv = Q_FLOOR;
            }
            pv * (pv / qv).ln()
        },
        lo,
        hi,
        1e-8,
    );
    if floored.get() {
        let bad_mass = quad::integrate(
            |x| {
                let pv = p(x);
                if pv > 0.0 && q(x) < Q_FLOOR {
                    pv
                } else {
                    0.0
                }
            },
            lo,
            hi,
            1e-9,
        );
        if bad_mass >= 1e-6 {
            return Err(Error::SupportMismatch(format!(
                "p carries {bad_mass:.3e} mass where q vanishes"
            )));
        }
    }
    Ok(Kld {
        value,
        q_floored: floored.get(),
    })
}

/// Decibel-like fit score -20 log10(KLD); larger is better. Exactly zero
/// divergence reports +infinity.
pub fn kld_score(kld_value: f64) -> Result<f64> {
    if kld_value < 0.0 || kld_value.is_nan() {
        return Err(Error::Domain(format!(
            "kld_score requires a non-negative divergence, got {kld_value}"
        )));
    }
    if kld_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-20.0 * kld_value.log10())
}
