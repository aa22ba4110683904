//! Gradient estimators, baselines and the per-update state transitions of
//! every algorithm variant.
//!
//! All update functions return an [`UpdateReport`] holding the proposed
//! changes to `mu` and `sigma`; [`apply_update`] turns a report into the
//! next hypothesis. Step sizes follow the `alpha_i = alpha * sigma_i^2`
//! convention, so the `1 / sigma^2` of the eligibility cancels in the
//! `mu` updates.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, PgpeError, Result};
use crate::sampling::{draw_perturbation, Hypothesis, Perturbation, QuadRewards, SampleQuad};

/// Default lower bound applied to every `sigma_i` after an update.
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-10;

/// Default rate of the decaying-average baseline.
pub const DEFAULT_BASELINE_GAMMA: f64 = 0.1;

/// Algorithm variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// One sample per update compared against a baseline.
    #[serde(rename = "PGPE")]
    Pgpe,
    /// Symmetric pair `mu +- eps`.
    #[serde(rename = "SyS")]
    Sys,
    /// Symmetric pair plus its mirrored pair; baseline free.
    #[serde(rename = "SupSyS")]
    SupSys,
    /// Two independent symmetric pairs averaged.
    #[serde(rename = "PGPE4smp")]
    Pgpe4smp,
    /// Escalates single sample -> pair -> quad while rewards stay below the baseline.
    #[serde(rename = "SupIf")]
    SupIf,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Pgpe,
        Variant::Sys,
        Variant::SupSys,
        Variant::Pgpe4smp,
        Variant::SupIf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Pgpe => "PGPE",
            Variant::Sys => "SyS",
            Variant::SupSys => "SupSyS",
            Variant::Pgpe4smp => "PGPE4smp",
            Variant::SupIf => "SupIf",
        }
    }

    /// Largest number of evaluations a single update may consume.
    pub fn max_evaluations_per_update(self) -> u64 {
        match self {
            Variant::Pgpe => 1,
            Variant::Sys => 2,
            Variant::SupSys | Variant::Pgpe4smp | Variant::SupIf => 4,
        }
    }

    /// Whether the variant reads a baseline at all.
    pub fn uses_baseline(self) -> bool {
        !matches!(self, Variant::SupSys)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = PgpeError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| PgpeError::Config {
                key: "variant".into(),
                message: format!("unknown variant `{s}` (expected one of PGPE, SyS, SupSyS, PGPE4smp, SupIf)"),
            })
    }
}

fn default_sigma_floor() -> f64 {
    DEFAULT_SIGMA_FLOOR
}

/// Step sizes and variant selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaParams {
    pub variant: Variant,
    pub alpha_mu: f64,
    pub alpha_sigma: f64,
    #[serde(default = "default_sigma_floor")]
    pub sigma_floor: f64,
}

impl MetaParams {
    pub fn new(variant: Variant, alpha_mu: f64, alpha_sigma: f64) -> Result<Self> {
        let meta = Self {
            alpha_mu,
            alpha_sigma,
            variant,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn with_sigma_floor(mut self, sigma_floor: f64) -> Result<Self> {
        self.sigma_floor = sigma_floor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(domain(name, v, "finite and > 0"))
            }
        };
        positive("alpha_mu", self.alpha_mu)?;
        positive("alpha_sigma", self.alpha_sigma)?;
        positive("sigma_floor", self.sigma_floor)
    }
}

/// Which running estimate a [`BaselineState`] maintains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BaselineKind {
    /// `b <- gamma r + (1 - gamma) b`
    Decaying { gamma: f64 },
    /// Mean of the last `window` rewards.
    Moving { window: usize },
    /// Running estimate of `E[r |grad log p|^2] / E[|grad log p|^2]`.
    Optimal,
}

impl Default for BaselineKind {
    fn default() -> Self {
        BaselineKind::Decaying {
            gamma: DEFAULT_BASELINE_GAMMA,
        }
    }
}

impl BaselineKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineKind::Decaying { gamma } if !(gamma > 0.0 && gamma <= 1.0) => {
                Err(domain("gamma", gamma, "in (0, 1]"))
            }
            BaselineKind::Moving { window: 0 } => Err(domain("window", 0.0, ">= 1")),
            _ => Ok(()),
        }
    }
}

/// Reference reward compared against sampled rewards.
///
/// Starts uninitialized; the first observed reward becomes the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    kind: BaselineKind,
    value: Option<f64>,
    history: VecDeque<f64>,
    accum_num: f64,
    accum_den: f64,
    reward_sum: f64,
    reward_count: u64,
    fell_back: bool,
}

impl BaselineState {
    pub fn new(kind: BaselineKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            value: None,
            history: VecDeque::new(),
            accum_num: 0.0,
            accum_den: 0.0,
            reward_sum: 0.0,
            reward_count: 0,
            fell_back: false,
        })
    }

    /// A baseline whose current value is already `b`.
    pub fn with_value(kind: BaselineKind, b: f64) -> Result<Self> {
        let mut state = Self::new(kind)?;
        state.value = Some(b);
        Ok(state)
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    /// Current baseline, `None` before the first observation.
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    /// Number of buffered rewards (moving average only).
    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// True when the optimal baseline had no eligibility mass and used the
    /// plain running mean instead.
    pub fn fell_back(&self) -> bool {
        self.fell_back
    }

    /// Folds one reward into the estimate.
    ///
    /// `eligibility_sq_norm` is `|grad_rho log p(theta)|^2` of the sample the
    /// reward belongs to; only the optimal baseline reads it.
    pub fn step(&mut self, r: f64, eligibility_sq_norm: f64) {
        self.reward_sum += r;
        self.reward_count += 1;
        let next = match self.kind {
            BaselineKind::Decaying { gamma } => match self.value {
                Some(b) => gamma * r + (1.0 - gamma) * b,
                None => r,
            },
            BaselineKind::Moving { window } => {
                if self.history.len() == window {
                    self.history.pop_front();
                }
                self.history.push_back(r);
                self.history.iter().sum::<f64>() / self.history.len() as f64
            }
            BaselineKind::Optimal => {
                self.accum_num += r * eligibility_sq_norm;
                self.accum_den += eligibility_sq_norm;
                if self.accum_den > 0.0 {
                    self.fell_back = false;
                    self.accum_num / self.accum_den
                } else {
                    self.fell_back = true;
                    self.reward_sum / self.reward_count as f64
                }
            }
        };
        self.value = Some(next);
    }
}

/// Free-function form of [`BaselineState::step`].
pub fn baseline_step(mut state: BaselineState, r: f64, eligibility_sq_norm: f64) -> BaselineState {
    state.step(r, eligibility_sq_norm);
    state
}

/// Which estimator a SupIf step ended up using.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Single,
    Sys,
    SupSys,
}

/// Proposed change to the hypothesis produced by one update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    pub delta_mu: Vec<f64>,
    pub delta_sigma: Vec<f64>,
    pub evaluations_used: u32,
    pub rewards_seen: Vec<f64>,
    /// Set by SupIf steps only.
    pub branch: Option<Branch>,
}

impl UpdateReport {
    fn zero(dim: usize, evaluations_used: u32, rewards_seen: Vec<f64>) -> Self {
        Self {
            delta_mu: vec![0.0; dim],
            delta_sigma: vec![0.0; dim],
            evaluations_used,
            rewards_seen,
            branch: None,
        }
    }

    pub fn mean_reward(&self) -> f64 {
        self.rewards_seen.iter().sum::<f64>() / self.rewards_seen.len() as f64
    }

    pub fn best_reward(&self) -> f64 {
        self.rewards_seen
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Symmetric sample pair `mu +- eps` with its two rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPair {
    pub eps: Perturbation,
    pub r_plus: f64,
    pub r_minus: f64,
}

/// Gradient of `log N(theta; mu, sigma^2)` with respect to `(mu, sigma)`.
pub fn eligibility(theta: f64, mu: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(domain("sigma", sigma, "> 0"));
    }
    let d = theta - mu;
    let s2 = sigma * sigma;
    Ok((d / s2, (d * d - s2) / (s2 * sigma)))
}

/// `|grad_rho log p(mu + eps)|^2` summed over all dimensions.
pub fn eligibility_sq_norm(hyp: &Hypothesis, eps: &[f64]) -> Result<f64> {
    hyp.sigma().iter().zip(eps).try_fold(0.0, |acc, (&s, &e)| {
        let (gm, gs) = eligibility(e, 0.0, s)?;
        Ok(acc + gm * gm + gs * gs)
    })
}

fn check_dim(hyp: &Hypothesis, found: usize) -> Result<()> {
    if hyp.dim() != found {
        return Err(PgpeError::DimensionMismatch {
            expected: hyp.dim(),
            found,
        });
    }
    Ok(())
}

fn check_sigma(hyp: &Hypothesis) -> Result<()> {
    match hyp.sigma().iter().find(|&&s| !(s > 0.0)) {
        Some(&s) => Err(domain("sigma", s, "> 0")),
        None => Ok(()),
    }
}

/// `(eps^2 - sigma^2) / sigma`, the sigma eligibility scaled by `sigma^2`.
fn sigma_direction(eps: f64, sigma: f64) -> f64 {
    (eps * eps - sigma * sigma) / sigma
}

fn single_deltas(hyp: &Hypothesis, eps: &[f64], advantage: f64, meta: &MetaParams) -> (Vec<f64>, Vec<f64>) {
    let delta_mu = eps.iter().map(|e| meta.alpha_mu * advantage * e).collect();
    let delta_sigma = eps
        .iter()
        .zip(hyp.sigma())
        .map(|(&e, &s)| meta.alpha_sigma * advantage * sigma_direction(e, s))
        .collect();
    (delta_mu, delta_sigma)
}

fn sys_deltas(
    hyp: &Hypothesis,
    eps: &[f64],
    r_plus: f64,
    r_minus: f64,
    baseline: Option<f64>,
    meta: &MetaParams,
) -> (Vec<f64>, Vec<f64>) {
    let half_diff = (r_plus - r_minus) / 2.0;
    let delta_mu = eps.iter().map(|e| meta.alpha_mu * e * half_diff).collect();
    let delta_sigma = match baseline {
        Some(b) => {
            let advantage = (r_plus + r_minus) / 2.0 - b;
            eps.iter()
                .zip(hyp.sigma())
                .map(|(&e, &s)| meta.alpha_sigma * advantage * sigma_direction(e, s))
                .collect()
        }
        None => vec![0.0; eps.len()],
    };
    (delta_mu, delta_sigma)
}

fn supsys_deltas(hyp: &Hypothesis, eps: &[f64], eps_star: &[f64], r: &QuadRewards, meta: &MetaParams) -> (Vec<f64>, Vec<f64>) {
    let diff = r.pp - r.mp;
    let diff_star = r.pm - r.mm;
    let delta_mu = eps
        .iter()
        .zip(eps_star)
        .map(|(e, es)| meta.alpha_mu * (e * diff + es * diff_star) / 2.0)
        .collect();
    let pair_diff = r.original_mean() - r.mirrored_mean();
    let delta_sigma = eps
        .iter()
        .zip(hyp.sigma())
        .map(|(&e, &s)| meta.alpha_sigma * sigma_direction(e, s) * pair_diff / 2.0)
        .collect();
    (delta_mu, delta_sigma)
}

/// Single-sample update against the baseline, which then absorbs `r`.
///
/// With an uninitialized baseline no step is taken; `r` only seeds it.
pub fn pgpe_update(
    hyp: &Hypothesis,
    theta: &[f64],
    r: f64,
    baseline: &mut BaselineState,
    meta: &MetaParams,
) -> Result<UpdateReport> {
    check_dim(hyp, theta.len())?;
    check_sigma(hyp)?;
    let eps: Vec<f64> = theta.iter().zip(hyp.mu()).map(|(t, m)| t - m).collect();
    let mut report = UpdateReport::zero(hyp.dim(), 1, vec![r]);
    if let Some(b) = baseline.value() {
        let (dm, ds) = single_deltas(hyp, &eps, r - b, meta);
        report.delta_mu = dm;
        report.delta_sigma = ds;
    }
    baseline.step(r, eligibility_sq_norm(hyp, &eps)?);
    Ok(report)
}

/// Symmetric-pair update. The sigma part compares the pair's mean reward to
/// the baseline before the baseline absorbs that mean.
pub fn sys_update(
    hyp: &Hypothesis,
    eps: &Perturbation,
    r_plus: f64,
    r_minus: f64,
    baseline: &mut BaselineState,
    meta: &MetaParams,
) -> Result<UpdateReport> {
    check_dim(hyp, eps.dim())?;
    check_sigma(hyp)?;
    let (delta_mu, delta_sigma) = sys_deltas(hyp, &eps.eps, r_plus, r_minus, baseline.value(), meta);
    baseline.step((r_plus + r_minus) / 2.0, eligibility_sq_norm(hyp, &eps.eps)?);
    Ok(UpdateReport {
        delta_mu,
        delta_sigma,
        evaluations_used: 2,
        rewards_seen: vec![r_plus, r_minus],
        branch: None,
    })
}

/// Baseline-free update from a fully evaluated super-symmetric quad.
///
/// `mu` moves along both symmetric pairs; `sigma` moves according to which
/// pair, original or mirrored, earned the larger mean reward. The sigma
/// eligibility uses the original perturbation.
pub fn supsys_update(hyp: &Hypothesis, quad: &SampleQuad, meta: &MetaParams) -> Result<UpdateReport> {
    let rewards = quad.rewards.ok_or(PgpeError::MissingRewards)?;
    check_dim(hyp, quad.eps.len())?;
    check_dim(hyp, quad.eps_star.len())?;
    check_sigma(hyp)?;
    let (delta_mu, delta_sigma) = supsys_deltas(hyp, &quad.eps, &quad.eps_star, &rewards, meta);
    Ok(UpdateReport {
        delta_mu,
        delta_sigma,
        evaluations_used: 4,
        rewards_seen: rewards.as_array().to_vec(),
        branch: None,
    })
}

/// Average of two symmetric-pair updates sharing one baseline value; the
/// baseline then absorbs the mean of all four rewards once.
pub fn pgpe4smp_update(
    hyp: &Hypothesis,
    pair1: &SymmetricPair,
    pair2: &SymmetricPair,
    baseline: &mut BaselineState,
    meta: &MetaParams,
) -> Result<UpdateReport> {
    check_dim(hyp, pair1.eps.dim())?;
    check_dim(hyp, pair2.eps.dim())?;
    check_sigma(hyp)?;
    let b = baseline.value();
    let (mu1, s1) = sys_deltas(hyp, &pair1.eps.eps, pair1.r_plus, pair1.r_minus, b, meta);
    let (mu2, s2) = sys_deltas(hyp, &pair2.eps.eps, pair2.r_plus, pair2.r_minus, b, meta);
    let average = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect() };
    let rewards = vec![pair1.r_plus, pair1.r_minus, pair2.r_plus, pair2.r_minus];
    let mean = rewards.iter().sum::<f64>() / 4.0;
    let norm = (eligibility_sq_norm(hyp, &pair1.eps.eps)? + eligibility_sq_norm(hyp, &pair2.eps.eps)?) / 2.0;
    baseline.step(mean, norm);
    Ok(UpdateReport {
        delta_mu: average(mu1, mu2),
        delta_sigma: average(s1, s2),
        evaluations_used: 4,
        rewards_seen: rewards,
        branch: None,
    })
}

/// Conditional step: one sample if it beats the baseline, otherwise its
/// symmetric partner, otherwise the full mirrored quad.
///
/// The baseline absorbs the mean of every reward observed in the step.
/// Sampling consumes the random source exactly like [`crate::sampling::make_quad`].
pub fn supif_step<R, F>(
    hyp: &Hypothesis,
    rng: &mut R,
    mut reward: F,
    baseline: &mut BaselineState,
    meta: &MetaParams,
) -> Result<UpdateReport>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> f64,
{
    check_sigma(hyp)?;
    let eps = draw_perturbation(rng, hyp);
    let norm = eligibility_sq_norm(hyp, &eps.eps)?;
    let theta_pp = hyp.offset(&eps.eps, 1.0);
    let r1 = reward(&theta_pp);

    let Some(b) = baseline.value() else {
        baseline.step(r1, norm);
        let mut report = UpdateReport::zero(hyp.dim(), 1, vec![r1]);
        report.branch = Some(Branch::Single);
        return Ok(report);
    };

    if r1 > b {
        let (delta_mu, delta_sigma) = single_deltas(hyp, &eps.eps, r1 - b, meta);
        baseline.step(r1, norm);
        return Ok(UpdateReport {
            delta_mu,
            delta_sigma,
            evaluations_used: 1,
            rewards_seen: vec![r1],
            branch: Some(Branch::Single),
        });
    }

    let theta_mp = hyp.offset(&eps.eps, -1.0);
    let r2 = reward(&theta_mp);
    if (r1 + r2) / 2.0 > b {
        let (delta_mu, delta_sigma) = sys_deltas(hyp, &eps.eps, r1, r2, Some(b), meta);
        baseline.step((r1 + r2) / 2.0, norm);
        return Ok(UpdateReport {
            delta_mu,
            delta_sigma,
            evaluations_used: 2,
            rewards_seen: vec![r1, r2],
            branch: Some(Branch::Sys),
        });
    }

    let quad = SampleQuad::from_perturbation(hyp, eps)?;
    let rewards = QuadRewards {
        pp: r1,
        mp: r2,
        pm: reward(&quad.theta_pm),
        mm: reward(&quad.theta_mm),
    };
    let (delta_mu, delta_sigma) = supsys_deltas(hyp, &quad.eps, &quad.eps_star, &rewards, meta);
    let all = rewards.as_array();
    baseline.step(all.iter().sum::<f64>() / 4.0, norm);
    Ok(UpdateReport {
        delta_mu,
        delta_sigma,
        evaluations_used: 4,
        rewards_seen: all.to_vec(),
        branch: Some(Branch::SupSys),
    })
}

/// `mu <- mu + delta_mu`, `sigma <- max(sigma + delta_sigma, sigma_floor)`.
pub fn apply_update(hyp: &Hypothesis, report: &UpdateReport, meta: &MetaParams) -> Result<Hypothesis> {
    let mut next = hyp.clone();
    apply_update_in_place(&mut next, report, meta)?;
    Ok(next)
}

pub(crate) fn apply_update_in_place(hyp: &mut Hypothesis, report: &UpdateReport, meta: &MetaParams) -> Result<()> {
    check_dim(hyp, report.delta_mu.len())?;
    check_dim(hyp, report.delta_sigma.len())?;
    let floor = meta.sigma_floor;
    let (mu, sigma) = hyp.parts_mut();
    for (m, d) in mu.iter_mut().zip(&report.delta_mu) {
        *m += d;
    }
    for (s, d) in sigma.iter_mut().zip(&report.delta_sigma) {
        let next = *s + d;
        // NaN falls to the floor as well.
        *s = if next > floor { next } else { floor };
    }
    Ok(())
}
