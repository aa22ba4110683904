//! Gaussian perturbation sampling and the quasi-symmetric mirror transform.
//!
//! The search distribution is stored as per-dimension mean and standard
//! deviation. The median absolute deviation `phi = 0.67449 * sigma` is
//! derived on demand; it is the scale across which perturbations are
//! mirrored so that a sample inside the median deviation is mapped outside
//! of it and vice versa, while the overall sampling distribution stays
//! (nearly) Gaussian.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, PgpeError, Result};

/// Ratio between the median absolute deviation and the standard deviation
/// of a normal distribution.
pub const MEDIAN_DEVIATION_RATIO: f64 = 0.67449;

/// Coefficients of the mirror approximation.
pub const MIRROR_C1: f64 = -0.06655;
pub const MIRROR_C2: f64 = -0.9706;
pub const MIRROR_C3: f64 = 0.124;

/// Lower clamp on `|eps| / phi` inside [`mirror`]; keeps the a > 0 branch finite.
pub const MIRROR_EPS_FLOOR: f64 = 1e-12;

/// Independent per-dimension Gaussian search distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl Hypothesis {
    /// Builds a hypothesis. `sigma` entries must be finite and non-negative;
    /// updates keep them above the configured floor.
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(PgpeError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if mu.len() != sigma.len() {
            return Err(PgpeError::DimensionMismatch {
                expected: mu.len(),
                found: sigma.len(),
            });
        }
        if let Some(&s) = sigma.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(domain("sigma", s, "finite and >= 0"));
        }
        Ok(Self { mu, sigma })
    }

    /// Same standard deviation in every dimension.
    pub fn isotropic(mu: Vec<f64>, sigma: f64) -> Result<Self> {
        let d = mu.len();
        Self::new(mu, vec![sigma; d])
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Median absolute deviation per dimension.
    pub fn phi(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .map(|&s| s * MEDIAN_DEVIATION_RATIO)
            .collect()
    }

    pub fn mean_sigma(&self) -> f64 {
        self.sigma.iter().sum::<f64>() / self.sigma.len() as f64
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.mu, &mut self.sigma)
    }

    /// `mu + sign * eps`, component-wise.
    pub fn offset(&self, eps: &[f64], sign: f64) -> Vec<f64> {
        self.mu
            .iter()
            .zip(eps)
            .map(|(m, e)| m + sign * e)
            .collect()
    }
}

/// A perturbation drawn around the current mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub eps: Vec<f64>,
}

impl Perturbation {
    pub fn dim(&self) -> usize {
        self.eps.len()
    }
}

/// Rewards of the four super-symmetric samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadRewards {
    /// Reward of `mu + eps`.
    pub pp: f64,
    /// Reward of `mu - eps`.
    pub mp: f64,
    /// Reward of `mu + eps*`.
    pub pm: f64,
    /// Reward of `mu - eps*`.
    pub mm: f64,
}

impl QuadRewards {
    /// Mean reward of the original symmetric pair.
    pub fn original_mean(&self) -> f64 {
        (self.pp + self.mp) / 2.0
    }

    /// Mean reward of the mirrored symmetric pair.
    pub fn mirrored_mean(&self) -> f64 {
        (self.pm + self.mm) / 2.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.pp, self.mp, self.pm, self.mm]
    }
}

/// One super-symmetric sample set: a perturbation, its mirror across the
/// median deviation, and the four parameter vectors built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleQuad {
    pub eps: Vec<f64>,
    pub eps_star: Vec<f64>,
    pub theta_pp: Vec<f64>,
    pub theta_mp: Vec<f64>,
    pub theta_pm: Vec<f64>,
    pub theta_mm: Vec<f64>,
    pub rewards: Option<QuadRewards>,
}

impl SampleQuad {
    /// Builds the quad for an already drawn perturbation.
    pub fn from_perturbation(hypothesis: &Hypothesis, eps: Perturbation) -> Result<Self> {
        if eps.dim() != hypothesis.dim() {
            return Err(PgpeError::DimensionMismatch {
                expected: hypothesis.dim(),
                found: eps.dim(),
            });
        }
        let eps_star = mirror_perturbation(hypothesis, &eps.eps)?;
        Ok(Self {
            theta_pp: hypothesis.offset(&eps.eps, 1.0),
            theta_mp: hypothesis.offset(&eps.eps, -1.0),
            theta_pm: hypothesis.offset(&eps_star, 1.0),
            theta_mm: hypothesis.offset(&eps_star, -1.0),
            eps: eps.eps,
            eps_star,
            rewards: None,
        })
    }

    /// Evaluates all four samples in the order `pp, mp, pm, mm`.
    pub fn evaluate<F: FnMut(&[f64]) -> f64>(&mut self, mut reward: F) -> QuadRewards {
        let r = QuadRewards {
            pp: reward(&self.theta_pp),
            mp: reward(&self.theta_mp),
            pm: reward(&self.theta_pm),
            mm: reward(&self.theta_mm),
        };
        self.rewards = Some(r);
        r
    }
}

/// `phi = 0.67449 * sigma`.
pub fn median_from_std(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(domain("sigma", sigma, ">= 0"));
    }
    Ok(sigma * MEDIAN_DEVIATION_RATIO)
}

/// Inverse of [`median_from_std`].
pub fn std_from_median(phi: f64) -> Result<f64> {
    if !(phi >= 0.0) {
        return Err(domain("phi", phi, ">= 0"));
    }
    Ok(phi / MEDIAN_DEVIATION_RATIO)
}

/// Draws `eps ~ N(0, sigma_i^2)` independently per dimension.
///
/// Equivalent to drawing from the normal distribution with median deviation
/// `phi_i`; the two parametrizations describe the same law.
pub fn draw_perturbation<R: Rng + ?Sized>(rng: &mut R, hypothesis: &Hypothesis) -> Perturbation {
    let eps = hypothesis
        .sigma()
        .iter()
        .map(|&s| {
            let z: f64 = rng.sample(StandardNormal);
            if s == 0.0 {
                0.0
            } else {
                s * z
            }
        })
        .collect();
    Perturbation { eps }
}

/// Maps `eps` to the other side of the median deviation `phi`.
///
/// Sign is preserved (`sign(0) = +1`); `|eps| < phi` maps above `phi` and
/// `|eps| > phi` maps below it, with `|eps| = phi` as fixed point.
pub fn mirror(eps: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(domain("phi", phi, "finite and > 0"));
    }
    if eps.is_nan() {
        return Err(domain("eps", eps, "not NaN"));
    }
    let sign = if eps < 0.0 { -1.0 } else { 1.0 };
    let magnitude = eps.abs().max(MIRROR_EPS_FLOOR * phi);
    let a = (phi - magnitude) / phi;
    Ok(sign * phi * mirror_factor(a))
}

/// `eps* / (sign(eps) * phi)` as a function of `a = (phi - |eps|) / phi`.
fn mirror_factor(a: f64) -> f64 {
    if a > 0.0 {
        a.exp() / (1.0 - a * a * a).powf(MIRROR_C3 * a)
    } else {
        let t = -a;
        (MIRROR_C1 * log_ratio(t) + MIRROR_C2 * t).exp()
    }
}

/// `(t^3 - t) / ln t` with its removable singularities filled in.
fn log_ratio(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let delta = t - 1.0;
    if delta.abs() < 1e-6 {
        // Taylor expansion around t = 1.
        return 2.0 + 4.0 * delta;
    }
    t * (t * t - 1.0) / delta.ln_1p()
}

/// Mirrors every component of `eps` using the hypothesis' median deviation.
/// Components with `sigma_i = 0` mirror to 0; non-finite components (from a
/// diverged run) pass through unchanged.
pub fn mirror_perturbation(hypothesis: &Hypothesis, eps: &[f64]) -> Result<Vec<f64>> {
    hypothesis
        .sigma()
        .iter()
        .zip(eps)
        .map(|(&s, &e)| {
            let phi = s * MEDIAN_DEVIATION_RATIO;
            if s == 0.0 {
                Ok(0.0)
            } else if !(e.is_finite() && phi.is_finite()) {
                Ok(e)
            } else {
                mirror(e, phi)
            }
        })
        .collect()
}

/// Draws a perturbation and builds its super-symmetric sample set.
pub fn make_quad<R: Rng + ?Sized>(rng: &mut R, hypothesis: &Hypothesis) -> SampleQuad {
    let eps = draw_perturbation(rng, hypothesis);
    SampleQuad::from_perturbation(hypothesis, eps)
        .expect("perturbation drawn from the hypothesis has matching dimension and finite entries")
}
