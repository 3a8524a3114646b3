//! The eight amplitude-fading distribution families: evaluation, sampling,
//! moments, and structural reductions.
//!
//! Composite families are built the way they arise physically:
//! K is Rayleigh multipath over gamma-distributed local power, F is Nakagami
//! multipath over inverse-Nakagami RMS power, and Generalized-K (KG) is
//! Nakagami multipath over gamma-distributed mean power. Sampling draws the
//! mixing variable first and the conditional envelope second.

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{
    bessel_i0e, gamma_fn, inc_gamma_p, ln_beta, ln_bessel_k, ln_gamma_unchecked, marcum_q1,
};
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Family tag for the eight supported distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Rayleigh,
    Rician,
    Nakagami,
    Weibull,
    Gamma,
    K,
    F,
    Kg,
}

impl Family {
    /// All families in the fixed report row order.
    pub const TABLE_ORDER: [Family; 8] = [
        Family::Weibull,
        Family::Rician,
        Family::Rayleigh,
        Family::Nakagami,
        Family::Gamma,
        Family::K,
        Family::F,
        Family::Kg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Rayleigh => "Rayleigh",
            Family::Rician => "Rician",
            Family::Nakagami => "Nakagami",
            Family::Weibull => "Weibull",
            Family::Gamma => "Gamma",
            Family::K => "K",
            Family::F => "F",
            Family::Kg => "KG",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(Family::Rayleigh),
            "rician" => Ok(Family::Rician),
            "nakagami" => Ok(Family::Nakagami),
            "weibull" => Ok(Family::Weibull),
            "gamma" => Ok(Family::Gamma),
            "k" => Ok(Family::K),
            "f" => Ok(Family::F),
            "kg" => Ok(Family::Kg),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

/// One amplitude-fading distribution with its parameter set.
///
/// All parameters are strictly positive. `Nakagami` and `F` additionally
/// require m >= 1/2. For `F`, m_s <= 1 means the mean envelope power is
/// infinite; that is flagged by [`FadingModel::has_finite_mean_power`], not
/// rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FadingModel {
    Rayleigh { sigma: f64 },
    Rician { nu_los: f64, sigma: f64 },
    Nakagami { m: f64, omega: f64 },
    Weibull { shape: f64, scale: f64 },
    Gamma { shape: f64, scale: f64 },
    K { nu: f64, c: f64 },
    F { m: f64, m_s: f64, omega: f64 },
    Kg { m: f64, k: f64, omega: f64 },
}

impl FadingModel {
    pub fn family(&self) -> Family {
        match self {
            FadingModel::Rayleigh { .. } => Family::Rayleigh,
            FadingModel::Rician { .. } => Family::Rician,
            FadingModel::Nakagami { .. } => Family::Nakagami,
            FadingModel::Weibull { .. } => Family::Weibull,
            FadingModel::Gamma { .. } => Family::Gamma,
            FadingModel::K { .. } => Family::K,
            FadingModel::F { .. } => Family::F,
            FadingModel::Kg { .. } => Family::Kg,
        }
    }

    /// Parameter values in declaration order (used by the fitter).
    pub(crate) fn params(&self) -> Vec<f64> {
        match *self {
            FadingModel::Rayleigh { sigma } => vec![sigma],
            FadingModel::Rician { nu_los, sigma } => vec![nu_los, sigma],
            FadingModel::Nakagami { m, omega } => vec![m, omega],
            FadingModel::Weibull { shape, scale } => vec![shape, scale],
            FadingModel::Gamma { shape, scale } => vec![shape, scale],
            FadingModel::K { nu, c } => vec![nu, c],
            FadingModel::F { m, m_s, omega } => vec![m, m_s, omega],
            FadingModel::Kg { m, k, omega } => vec![m, k, omega],
        }
    }

    pub(crate) fn from_params(family: Family, p: &[f64]) -> FadingModel {
        match family {
            Family::Rayleigh => FadingModel::Rayleigh { sigma: p[0] },
            Family::Rician => FadingModel::Rician {
                nu_los: p[0],
                sigma: p[1],
            },
            Family::Nakagami => FadingModel::Nakagami {
                m: p[0],
                omega: p[1],
            },
            Family::Weibull => FadingModel::Weibull {
                shape: p[0],
                scale: p[1],
            },
            Family::Gamma => FadingModel::Gamma {
                shape: p[0],
                scale: p[1],
            },
            Family::K => FadingModel::K { nu: p[0], c: p[1] },
            Family::F => FadingModel::F {
                m: p[0],
                m_s: p[1],
                omega: p[2],
            },
            Family::Kg => FadingModel::Kg {
                m: p[0],
                k: p[1],
                omega: p[2],
            },
        }
    }

    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let ps = self.params();
        if !ps.iter().all(|p| p.is_finite() && *p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: all parameters must be finite and strictly positive, got {ps:?}",
                self.family()
            )));
        }
        match *self {
            FadingModel::Nakagami { m, .. } if m < 0.5 => Err(Error::InvalidParameter(format!(
                "Nakagami requires m >= 0.5, got {m}"
            ))),
            FadingModel::F { m, .. } if m < 0.5 => Err(Error::InvalidParameter(format!(
                "F requires m >= 0.5, got {m}"
            ))),
            _ => Ok(()),
        }
    }

    /// False only for F with m_s <= 1, where E[X^2] diverges.
    pub fn has_finite_mean_power(&self) -> bool {
        match *self {
            FadingModel::F { m_s, .. } => m_s > 1.0,
            _ => true,
        }
    }

    /// Natural log of the density at x > 0 (parameters assumed valid).
    pub(crate) fn ln_pdf(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match *self {
            FadingModel::Rayleigh { sigma } => {
                x.ln() - 2.0 * sigma.ln() - x * x / (2.0 * sigma * sigma)
            }
            FadingModel::Rician { nu_los, sigma } => {
                let s2 = sigma * sigma;
                let d = x - nu_los;
                x.ln() - s2.ln() - d * d / (2.0 * s2) + bessel_i0e(x * nu_los / s2).ln()
            }
            FadingModel::Nakagami { m, omega } => {
                std::f64::consts::LN_2 + m * (m / omega).ln() - ln_gamma_unchecked(m)
                    + (2.0 * m - 1.0) * x.ln()
                    - m * x * x / omega
            }
            FadingModel::Weibull { shape, scale } => {
                let t = x / scale;
                (shape / scale).ln() + (shape - 1.0) * t.ln() - t.powf(shape)
            }
            FadingModel::Gamma { shape, scale } => {
                -ln_gamma_unchecked(shape) - shape * scale.ln() + (shape - 1.0) * x.ln()
                    - x / scale
            }
            FadingModel::K { nu, c } => {
                std::f64::consts::LN_2 + (nu + 1.0) * c.ln() - nu * std::f64::consts::LN_2
                    - ln_gamma_unchecked(nu)
                    + nu * x.ln()
                    + ln_bessel_k(nu - 1.0, c * x)
            }
            FadingModel::F { m, m_s, omega } => {
                let so = m_s * omega;
                std::f64::consts::LN_2 + m * m.ln() + m_s * so.ln() - ln_beta(m, m_s)
                    + (2.0 * m - 1.0) * x.ln()
                    - (m + m_s) * (m * x * x + so).ln()
            }
            FadingModel::Kg { m, k, omega } => {
                let beta = k + m - 1.0;
                let alpha = k - m;
                let arg = 2.0 * (m * k / omega).sqrt() * x;
                (4.0f64).ln() + 0.5 * (beta + 1.0) * (m * k / omega).ln()
                    - ln_gamma_unchecked(m)
                    - ln_gamma_unchecked(k)
                    + beta * x.ln()
                    + ln_bessel_k(alpha, arg)
            }
        }
    }

    /// Density value at exactly x = 0 (continuous limit; infinite-density
    /// sentinel where the formula diverges with shape < 1/2 or 1).
    fn pdf_at_zero(&self) -> f64 {
        match *self {
            FadingModel::Rayleigh { .. } | FadingModel::Rician { .. } => 0.0,
            FadingModel::Nakagami { m, omega } => {
                if m > 0.5 {
                    0.0
                } else {
                    // m == 0.5 exactly: half-normal head
                    (2.0 / (std::f64::consts::PI * omega)).sqrt()
                }
            }
            FadingModel::Weibull { shape, scale } => match shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                _ => f64::INFINITY,
            },
            FadingModel::Gamma { shape, scale } => match shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0 / scale,
                _ => f64::INFINITY,
            },
            FadingModel::K { nu, c } => match nu.partial_cmp(&0.5) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => c, // K with nu = 1/2 is Exponential(c)
                _ => f64::INFINITY,
            },
            FadingModel::F { m, m_s, omega } => {
                if m > 0.5 {
                    0.0
                } else {
                    // m == 0.5 exactly: sqrt(2 / (m_s omega)) / B(1/2, m_s)
                    (2.0 / (m_s * omega)).sqrt() / ln_beta(0.5, m_s).exp()
                }
            }
            FadingModel::Kg { m, k, omega } => {
                let p = m.min(k);
                if p > 0.5 {
                    0.0
                } else if (m - k).abs() < 1e-12 {
                    // alpha = 0 brings a log divergence
                    f64::INFINITY
                } else if p < 0.5 {
                    f64::INFINITY
                } else {
                    2.0 * (m * k / omega).powf(p)
                        * (ln_gamma_unchecked((k - m).abs())
                            - ln_gamma_unchecked(m)
                            - ln_gamma_unchecked(k))
                        .exp()
                }
            }
        }
    }

    /// Probability density at x >= 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(format!("pdf requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(self.pdf_at_zero());
        }
        let v = self.ln_pdf(x).exp();
        Ok(if v.is_nan() { 0.0 } else { v })
    }

    /// Cumulative distribution at x. Closed forms for Rayleigh, Rician,
    /// Nakagami, Weibull and Gamma; adaptive quadrature of the density
    /// (absolute tolerance 1e-10) for K, F and KG.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("cdf requires x >= 0, got {x}")));
        }
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            FadingModel::Rayleigh { sigma } => -(-x * x / (2.0 * sigma * sigma)).exp_m1(),
            FadingModel::Rician { nu_los, sigma } => {
                (1.0 - marcum_q1(nu_los / sigma, x / sigma)).clamp(0.0, 1.0)
            }
            FadingModel::Nakagami { m, omega } => inc_gamma_p(m, m * x * x / omega),
            FadingModel::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
            FadingModel::Gamma { shape, scale } => inc_gamma_p(shape, x / scale),
            _ => self.cdf_quadrature(0.0, x).clamp(0.0, 1.0),
        }
    }

    /// Integrated density over (lo, hi] for the quadrature-backed families.
    /// A quartic map absorbs the power-law behaviour of the density at 0.
    fn cdf_quadrature(&self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo >= 0.0 && hi >= lo);
        if hi == lo {
            return 0.0;
        }
        if lo == 0.0 {
            // x = hi * u^4 starts the integral analytically at the origin
            quad::integrate(
                |u| {
                    let x = hi * u * u * u * u;
                    if x <= 0.0 {
                        return 0.0;
                    }
                    let v = self.ln_pdf(x).exp();
                    if v.is_finite() {
                        v * 4.0 * hi * u * u * u
                    } else {
                        0.0
                    }
                },
                0.0,
                1.0,
                1e-10,
            )
        } else {
            quad::integrate(|x| self.ln_pdf(x).exp(), lo, hi, 1e-10)
        }
    }

    /// CDF at every point of an ascending slice, sharing work between
    /// neighbouring points. Used by the EDF statistics.
    pub(crate) fn cdf_sorted(&self, sorted: &[f64]) -> Vec<f64> {
        match self {
            FadingModel::K { .. } | FadingModel::F { .. } | FadingModel::Kg { .. } => {
                let mut out = Vec::with_capacity(sorted.len());
                let mut acc = 0.0;
                let mut prev = 0.0;
                for &x in sorted {
                    debug_assert!(x >= prev);
                    if x > prev {
                        acc += if prev == 0.0 {
                            self.cdf_quadrature(0.0, x)
                        } else {
                            quad::integrate(|t| self.ln_pdf(t).exp(), prev, x, 1e-12)
                        };
                        prev = x;
                    }
                    out.push(acc.clamp(0.0, 1.0));
                }
                out
            }
            _ => sorted.iter().map(|&x| self.cdf_unchecked(x)).collect(),
        }
    }

    /// Draw one envelope value. Composite families draw their mixing
    /// variable first, then the conditional envelope.
    pub(crate) fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingModel::Rayleigh { sigma } => {
                let u: f64 = rng.gen();
                sigma * (-2.0 * (1.0 - u).ln()).sqrt()
            }
            FadingModel::Rician { nu_los, sigma } => {
                let n1: f64 = StandardNormal.sample(rng);
                let n2: f64 = StandardNormal.sample(rng);
                let i = nu_los + sigma * n1;
                let q = sigma * n2;
                (i * i + q * q).sqrt()
            }
            FadingModel::Nakagami { m, omega } => {
                let g = GammaDist::new(m, omega / m).expect("validated");
                g.sample(rng).sqrt()
            }
            FadingModel::Weibull { shape, scale } => {
                let u: f64 = rng.gen();
                scale * (-(1.0 - u).ln()).powf(1.0 / shape)
            }
            FadingModel::Gamma { shape, scale } => {
                GammaDist::new(shape, scale).expect("validated").sample(rng)
            }
            FadingModel::K { nu, c } => {
                // local power W ~ Gamma(nu, 4/c^2); X | W ~ Rayleigh, E[X^2|W] = W
                let w = GammaDist::new(nu, 4.0 / (c * c))
                    .expect("validated")
                    .sample(rng);
                let u: f64 = rng.gen();
                (-w * (1.0 - u).ln()).sqrt()
            }
            FadingModel::F { m, m_s, omega } => {
                // A^-2 ~ Gamma(m_s, 1/m_s); X | A ~ Nakagami(m, A^2 omega)
                let inv_a2 = GammaDist::new(m_s, 1.0 / m_s)
                    .expect("validated")
                    .sample(rng);
                let a2 = 1.0 / inv_a2;
                let g = GammaDist::new(m, a2 * omega / m).expect("validated");
                g.sample(rng).sqrt()
            }
            FadingModel::Kg { m, k, omega } => {
                // mean power W ~ Gamma(k, omega/k); X | W ~ Nakagami(m, W)
                let w = GammaDist::new(k, omega / k)
                    .expect("validated")
                    .sample(rng);
                let g = GammaDist::new(m, w / m).expect("validated");
                g.sample(rng).sqrt()
            }
        }
    }

    /// Draw n values into a [`SampleSet`]; deterministic for a given rng state.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<SampleSet> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample requires n >= 1".into()));
        }
        let values = (0..n).map(|_| self.sample_one(rng)).collect();
        SampleSet::new(values, format!("synthetic {}", self.family()))
    }

    /// Raw moment E[X^order], closed form via gamma/beta functions.
    pub fn moment(&self, order: u32) -> Result<f64> {
        self.validate()?;
        if order == 0 {
            return Ok(1.0);
        }
        let n = order as f64;
        let h = n / 2.0;
        Ok(match *self {
            FadingModel::Rayleigh { sigma } => {
                sigma.powf(n) * 2.0f64.powf(h) * gamma_fn(1.0 + h)?
            }
            FadingModel::Rician { nu_los, sigma } => rician_moment(nu_los, sigma, order),
            FadingModel::Nakagami { m, omega } => {
                (ln_gamma_unchecked(m + h) - ln_gamma_unchecked(m)).exp() * (omega / m).powf(h)
            }
            FadingModel::Weibull { shape, scale } => scale.powf(n) * gamma_fn(1.0 + n / shape)?,
            FadingModel::Gamma { shape, scale } => {
                scale.powf(n) * (ln_gamma_unchecked(shape + n) - ln_gamma_unchecked(shape)).exp()
            }
            FadingModel::K { nu, c } => {
                (2.0 / c).powf(n)
                    * gamma_fn(h + 1.0)?
                    * (ln_gamma_unchecked(h + nu) - ln_gamma_unchecked(nu)).exp()
            }
            FadingModel::F { m, m_s, omega } => {
                if m_s <= h {
                    return Err(Error::NonexistentMoment(format!(
                        "F moment of order {order} requires m_s > {h}, got m_s = {m_s}"
                    )));
                }
                (m_s * omega / m).powf(h) * (ln_beta(m + h, m_s - h) - ln_beta(m, m_s)).exp()
            }
            FadingModel::Kg { m, k, omega } => {
                (omega / (m * k)).powf(h)
                    * (ln_gamma_unchecked(m + h) - ln_gamma_unchecked(m) + ln_gamma_unchecked(k + h)
                        - ln_gamma_unchecked(k))
                    .exp()
            }
        })
    }

    /// Render as a one-line text record, e.g. `K nu=0.7793 c=0.901`.
    pub fn to_record(&self) -> String {
        match *self {
            FadingModel::Rayleigh { sigma } => format!("Rayleigh sigma={sigma}"),
            FadingModel::Rician { nu_los, sigma } => {
                format!("Rician nu_los={nu_los} sigma={sigma}")
            }
            FadingModel::Nakagami { m, omega } => format!("Nakagami m={m} omega={omega}"),
            FadingModel::Weibull { shape, scale } => format!("Weibull shape={shape} scale={scale}"),
            FadingModel::Gamma { shape, scale } => format!("Gamma shape={shape} scale={scale}"),
            FadingModel::K { nu, c } => format!("K nu={nu} c={c}"),
            FadingModel::F { m, m_s, omega } => format!("F m={m} m_s={m_s} omega={omega}"),
            FadingModel::Kg { m, k, omega } => format!("KG m={m} k={k} omega={omega}"),
        }
    }

    /// Parse the text record produced by [`FadingModel::to_record`].
    pub fn parse_record(s: &str) -> Result<FadingModel> {
        let mut parts = s.split_whitespace();
        let family: Family = parts
            .next()
            .ok_or_else(|| Error::Parse("empty model record".into()))?
            .parse()?;
        let mut kv = std::collections::BTreeMap::new();
        for p in parts {
            let (key, value) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{p}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad numeric value in `{p}`")))?;
            kv.insert(key.to_string(), value);
        }
        let get = |key: &str| -> Result<f64> {
            kv.get(key)
                .copied()
                .ok_or_else(|| Error::Parse(format!("{family} record missing `{key}`")))
        };
        let model = match family {
            Family::Rayleigh => FadingModel::Rayleigh { sigma: get("sigma")? },
            Family::Rician => FadingModel::Rician {
                nu_los: get("nu_los")?,
                sigma: get("sigma")?,
            },
            Family::Nakagami => FadingModel::Nakagami {
                m: get("m")?,
                omega: get("omega")?,
            },
            Family::Weibull => FadingModel::Weibull {
                shape: get("shape")?,
                scale: get("scale")?,
            },
            Family::Gamma => FadingModel::Gamma {
                shape: get("shape")?,
                scale: get("scale")?,
            },
            Family::K => FadingModel::K {
                nu: get("nu")?,
                c: get("c")?,
            },
            Family::F => FadingModel::F {
                m: get("m")?,
                m_s: get("m_s")?,
                omega: get("omega")?,
            },
            Family::Kg => FadingModel::Kg {
                m: get("m")?,
                k: get("k")?,
                omega: get("omega")?,
            },
        };
        model.validate()?;
        Ok(model)
    }
}

/// Even Rician moments through the Laguerre recurrence; odd ones by
/// quadrature against the density.
fn rician_moment(nu_los: f64, sigma: f64, order: u32) -> f64 {
    let s2 = sigma * sigma;
    if order % 2 == 0 {
        let j = (order / 2) as usize;
        // E[X^2j] = (2 sigma^2)^j j! L_j(-nu^2 / (2 sigma^2))
        let z = -nu_los * nu_los / (2.0 * s2);
        let mut l_prev = 1.0;
        let mut l = 1.0 - z;
        if j == 0 {
            return 1.0;
        }
        for kk in 1..j {
            let kf = kk as f64;
            let l_next = ((2.0 * kf + 1.0 - z) * l - kf * l_prev) / (kf + 1.0);
            l_prev = l;
            l = l_next;
        }
        let mut fact = 1.0;
        for i in 1..=j {
            fact *= i as f64;
        }
        (2.0 * s2).powi(j as i32) * fact * l
    } else {
        let model = FadingModel::Rician { nu_los, sigma };
        let hi = nu_los + 40.0 * sigma;
        quad::integrate(
            |x| {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powi(order as i32) * model.ln_pdf(x).exp()
                }
            },
            0.0,
            hi,
            1e-12 * hi.powi(order as i32),
        )
    }
}

/// Result of [`reduce_kg`].
#[derive(Debug, Clone)]
pub enum KgReduction {
    /// Exact reparameterization (KG with m = 1 is a K distribution).
    Exact(FadingModel),
    /// Limiting model plus the sup-norm pdf discrepancy on the check grid.
    Approximate { model: FadingModel, sup_norm_gap: f64 },
}

/// Structural reductions of the Generalized-K family: m = 1 collapses to K
/// exactly; k -> infinity approaches Nakagami(m, omega).
pub fn reduce_kg(model: &FadingModel, target: Family) -> Result<KgReduction> {
    model.validate()?;
    let FadingModel::Kg { m, k, omega } = *model else {
        return Err(Error::NotReducible(format!(
            "reduce_kg requires a KG model, got {}",
            model.family()
        )));
    };
    match target {
        Family::K => {
            if (m - 1.0).abs() > 1e-12 {
                return Err(Error::NotReducible(format!(
                    "KG reduces to K only at m = 1, got m = {m}"
                )));
            }
            Ok(KgReduction::Exact(FadingModel::K {
                nu: k,
                c: 2.0 * (k / omega).sqrt(),
            }))
        }
        Family::Nakagami => {
            let nakagami = FadingModel::Nakagami { m, omega };
            let hi = 8.0 * omega.sqrt();
            let mut gap: f64 = 0.0;
            let steps = 400;
            for i in 1..=steps {
                let x = hi * i as f64 / steps as f64;
                let d = (model.ln_pdf(x).exp() - nakagami.ln_pdf(x).exp()).abs();
                gap = gap.max(d);
            }
            Ok(KgReduction::Approximate {
                model: nakagami,
                sup_norm_gap: gap,
            })
        }
        other => Err(Error::NotReducible(format!(
            "no KG reduction toward {other}"
        ))),
    }
}

/// Ordered, non-negative envelope amplitudes with provenance metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    values: Vec<f64>,
    pub label: String,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "SampleSet requires at least one value".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "SampleSet values must be finite and >= 0, got {bad}"
            )));
        }
        Ok(SampleSet {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite by construction"));
        v
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Mean of x^k.
    pub fn raw_moment(&self, k: u32) -> f64 {
        self.values.iter().map(|x| x.powi(k as i32)).sum::<f64>() / self.values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rayleigh_pdf_value() {
        let m = FadingModel::Rayleigh { sigma: 1.0 };
        let got = m.pdf(1.0).unwrap();
        assert!((got - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn pdf_zero_sentinels() {
        assert_eq!(
            FadingModel::Gamma { shape: 0.7, scale: 1.0 }.pdf(0.0).unwrap(),
            f64::INFINITY
        );
        assert_eq!(
            FadingModel::Weibull { shape: 1.0, scale: 2.0 }.pdf(0.0).unwrap(),
            0.5
        );
        assert_eq!(FadingModel::K { nu: 0.5, c: 3.0 }.pdf(0.0).unwrap(), 3.0);
        assert_eq!(FadingModel::K { nu: 0.3, c: 1.0 }.pdf(0.0).unwrap(), f64::INFINITY);
        assert_eq!(FadingModel::Rayleigh { sigma: 2.0 }.pdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn pdf_rejects_bad_inputs() {
        let m = FadingModel::Rayleigh { sigma: 1.0 };
        assert!(m.pdf(-0.1).is_err());
        assert!(FadingModel::Rayleigh { sigma: 0.0 }.pdf(1.0).is_err());
        assert!(FadingModel::Nakagami { m: 0.3, omega: 1.0 }.validate().is_err());
        assert!(FadingModel::F { m: 0.4, m_s: 2.0, omega: 1.0 }.validate().is_err());
    }

    #[test]
    fn f_mean_power_flag() {
        assert!(!FadingModel::F { m: 1.0, m_s: 0.9, omega: 1.0 }.has_finite_mean_power());
        assert!(FadingModel::F { m: 1.0, m_s: 1.5, omega: 1.0 }.has_finite_mean_power());
    }

    #[test]
    fn rayleigh_cdf_total_mass() {
        let m = FadingModel::Rayleigh { sigma: 1.0 };
        assert!((m.cdf(40.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn weibull_cdf_median() {
        let scale = 2.0f64.sqrt();
        let m = FadingModel::Weibull { shape: 2.0, scale };
        let x = scale * (2.0f64.ln()).sqrt();
        assert!((m.cdf(x).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn k_cdf_against_halved_tolerance() {
        // self-validating quadrature: the same integral at a much tighter
        // tolerance must agree within the looser one
        let m = FadingModel::K { nu: 2.0, c: 1.0 };
        let a = m.cdf(3.0).unwrap();
        let b = quad::integrate(|x| m.ln_pdf(x).exp(), 1e-12, 3.0, 1e-13);
        assert!((a - b).abs() < 1e-9, "cdf {a} vs refined {b}");
    }

    #[test]
    fn cdf_monotone_k() {
        let m = FadingModel::K { nu: 0.7793, c: 0.901 };
        let mut prev = 0.0;
        for i in 1..=40 {
            let x = i as f64 * 0.5;
            let v = m.cdf(x).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn cdf_sorted_matches_pointwise() {
        let m = FadingModel::F { m: 1.5, m_s: 2.5, omega: 1.0 };
        let xs: Vec<f64> = (1..=30).map(|i| i as f64 * 0.21).collect();
        let batch = m.cdf_sorted(&xs);
        for (x, b) in xs.iter().zip(&batch) {
            let direct = m.cdf(*x).unwrap();
            assert!((direct - b).abs() < 1e-8, "at {x}: {direct} vs {b}");
        }
    }

    #[test]
    fn rician_cdf_consistent_with_quadrature() {
        let m = FadingModel::Rician { nu_los: 1.4, sigma: 0.8 };
        for &x in &[0.3, 1.0, 2.2, 4.0] {
            let direct = m.cdf(x).unwrap();
            let byquad = quad::integrate(|t| m.ln_pdf(t).exp(), 1e-14, x, 1e-11);
            assert!((direct - byquad).abs() < 1e-9, "x={x}: {direct} vs {byquad}");
        }
    }

    #[test]
    fn moments_simple_identities() {
        let ray = FadingModel::Rayleigh { sigma: 1.5 };
        assert!((ray.moment(2).unwrap() - 4.5).abs() < 1e-12);
        let nak = FadingModel::Nakagami { m: 2.0, omega: 3.0 };
        assert!((nak.moment(2).unwrap() - 3.0).abs() < 1e-12);
        let kg = FadingModel::Kg { m: 1.0, k: 2.0, omega: 2.0 };
        assert!((kg.moment(2).unwrap() - 2.0).abs() < 1e-12);
        // F second moment under the printed normalization: m_s omega / (m_s - 1)
        let f = FadingModel::F { m: 2.0, m_s: 3.0, omega: 2.0 };
        assert!((f.moment(2).unwrap() - 3.0).abs() < 1e-12);
        assert!(f.moment(6).is_err());
        // Rician even moment: E[X^2] = nu^2 + 2 sigma^2
        let ric = FadingModel::Rician { nu_los: 2.0, sigma: 0.5 };
        assert!((ric.moment(2).unwrap() - 4.5).abs() < 1e-12);
        assert!((ric.moment(4).unwrap() - (16.0 + 8.0 * 0.25 * 4.0 + 8.0 * 0.0625)).abs() < 1e-9);
    }

    #[test]
    fn k_moment_matches_quadrature() {
        let m = FadingModel::K { nu: 3.0, c: 2.0 };
        let closed = m.moment(2).unwrap();
        let byquad = quad::integrate(|x| x * x * m.ln_pdf(x).exp(), 1e-12, 60.0, 1e-10);
        assert!(
            ((closed - byquad) / closed).abs() < 1e-8,
            "closed {closed} vs quad {byquad}"
        );
        // E[X^2] = 4 nu / c^2
        assert!((closed - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_second_moment() {
        let m = FadingModel::Rayleigh { sigma: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = m.sample(1_000_000, &mut rng).unwrap();
        let m2 = s.raw_moment(2);
        assert!((m2 - 2.0).abs() < 0.01, "E[X^2] = {m2}");
    }

    #[test]
    fn sampling_deterministic() {
        let m = FadingModel::Kg { m: 1.5, k: 2.0, omega: 1.0 };
        let a = m.sample(64, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = m.sample(64, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn reduce_kg_exact_to_k() {
        let kg = FadingModel::Kg { m: 1.0, k: 1.5, omega: 1.0 };
        let KgReduction::Exact(k_model) = reduce_kg(&kg, Family::K).unwrap() else {
            panic!("expected exact reduction");
        };
        for i in 1..=100 {
            let x = 0.01 + (10.0 - 0.01) * i as f64 / 100.0;
            let a = kg.pdf(x).unwrap();
            let b = k_model.pdf(x).unwrap();
            assert!(((a - b) / b).abs() < 1e-9, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn reduce_kg_not_reducible() {
        let kg = FadingModel::Kg { m: 2.0, k: 1.0, omega: 1.0 };
        assert!(matches!(
            reduce_kg(&kg, Family::K),
            Err(Error::NotReducible(_))
        ));
    }

    #[test]
    fn reduce_kg_to_nakagami_limit() {
        let kg = FadingModel::Kg { m: 2.0, k: 1e4, omega: 1.0 };
        let KgReduction::Approximate { model, sup_norm_gap } =
            reduce_kg(&kg, Family::Nakagami).unwrap()
        else {
            panic!("expected approximate reduction");
        };
        assert_eq!(model, FadingModel::Nakagami { m: 2.0, omega: 1.0 });
        assert!(sup_norm_gap <= 1e-3, "gap {sup_norm_gap}");
    }

    #[test]
    fn record_round_trip() {
        let models = [
            FadingModel::Rayleigh { sigma: 1.25 },
            FadingModel::Rician { nu_los: 2.0, sigma: 0.7 },
            FadingModel::K { nu: 0.7793, c: 0.901 },
            FadingModel::F { m: 1.0, m_s: 1.2, omega: 1.0 },
            FadingModel::Kg { m: 1.5, k: 2.5, omega: 0.9 },
        ];
        for m in models {
            let rec = m.to_record();
            let parsed = FadingModel::parse_record(&rec).unwrap();
            assert_eq!(m, parsed, "record `{rec}`");
        }
        assert_eq!(
            FadingModel::K { nu: 0.7793, c: 0.901 }.to_record(),
            "K nu=0.7793 c=0.901"
        );
        assert!(FadingModel::parse_record("K nu=1").is_err());
        assert!(FadingModel::parse_record("Bogus a=1").is_err());
    }

    #[test]
    fn sample_set_invariants() {
        assert!(SampleSet::new(vec![], "x").is_err());
        assert!(SampleSet::new(vec![1.0, -0.5], "x").is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN], "x").is_err());
        let s = SampleSet::new(vec![3.0, 1.0, 2.0], "x").unwrap();
        assert_eq!(s.sorted(), vec![1.0, 2.0, 3.0]);
    }
}
