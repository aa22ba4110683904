//! Stateful driver that runs one variant's update loop.

use rand::Rng;

use crate::error::Result;
use crate::sampling::{draw_perturbation, make_quad, Hypothesis};
use crate::update::{
    apply_update_in_place, pgpe4smp_update, pgpe_update, supif_step, supsys_update, sys_update, BaselineKind,
    BaselineState, MetaParams, SymmetricPair, UpdateReport, Variant,
};

/// Search distribution plus the running state one variant needs.
#[derive(Debug, Clone)]
pub struct Optimizer {
    hypothesis: Hypothesis,
    baseline: BaselineState,
    meta: MetaParams,
    updates: u64,
    evaluations: u64,
}

impl Optimizer {
    pub fn new(hypothesis: Hypothesis, meta: MetaParams, baseline: BaselineKind) -> Result<Self> {
        meta.validate()?;
        Ok(Self {
            hypothesis,
            baseline: BaselineState::new(baseline)?,
            meta,
            updates: 0,
            evaluations: 0,
        })
    }

    pub fn hypothesis(&self) -> &Hypothesis {
        &self.hypothesis
    }

    pub fn baseline(&self) -> &BaselineState {
        &self.baseline
    }

    pub fn meta(&self) -> &MetaParams {
        &self.meta
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Evaluations consumed by all steps so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Samples, evaluates and applies one update of the configured variant.
    pub fn step<R, F>(&mut self, rng: &mut R, mut reward: F) -> Result<UpdateReport>
    where
        R: Rng + ?Sized,
        F: FnMut(&[f64]) -> f64,
    {
        let hyp = &self.hypothesis;
        let meta = &self.meta;
        let report = match meta.variant {
            Variant::Pgpe => {
                let eps = draw_perturbation(rng, hyp);
                let theta = hyp.offset(&eps.eps, 1.0);
                let r = reward(&theta);
                pgpe_update(hyp, &theta, r, &mut self.baseline, meta)?
            }
            Variant::Sys => {
                let pair = sample_pair(rng, hyp, &mut reward);
                sys_update(hyp, &pair.eps, pair.r_plus, pair.r_minus, &mut self.baseline, meta)?
            }
            Variant::SupSys => {
                let mut quad = make_quad(rng, hyp);
                quad.evaluate(&mut reward);
                supsys_update(hyp, &quad, meta)?
            }
            Variant::Pgpe4smp => {
                let first = sample_pair(rng, hyp, &mut reward);
                let second = sample_pair(rng, hyp, &mut reward);
                pgpe4smp_update(hyp, &first, &second, &mut self.baseline, meta)?
            }
            Variant::SupIf => supif_step(hyp, rng, &mut reward, &mut self.baseline, meta)?,
        };
        apply_update_in_place(&mut self.hypothesis, &report, &self.meta)?;
        self.updates += 1;
        self.evaluations += u64::from(report.evaluations_used);
        Ok(report)
    }
}

fn sample_pair<R, F>(rng: &mut R, hyp: &Hypothesis, reward: &mut F) -> SymmetricPair
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> f64,
{
    let eps = draw_perturbation(rng, hyp);
    let r_plus = reward(&hyp.offset(&eps.eps, 1.0));
    let r_minus = reward(&hyp.offset(&eps.eps, -1.0));
    SymmetricPair { eps, r_plus, r_minus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Objective, ObjectiveSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn evaluation_counts_match_objective_counter() {
        for variant in Variant::ALL {
            let hyp = Hypothesis::isotropic(vec![1.0; 5], 1.0).unwrap();
            let meta = MetaParams::new(variant, 0.05, 0.02).unwrap();
            let mut opt = Optimizer::new(hyp, meta, BaselineKind::default()).unwrap();
            let mut obj = ObjectiveSpec::new(Objective::Rastrigin, 5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let mut used = 0u64;
            for _ in 0..200 {
                let rep = opt.step(&mut rng, |t| obj.reward(t)).unwrap();
                used += u64::from(rep.evaluations_used);
                assert_eq!(used, obj.evaluations());
                assert!(opt.hypothesis().sigma().iter().all(|&s| s >= meta.sigma_floor));
            }
            if variant != Variant::SupIf {
                assert_eq!(used, 200 * variant.max_evaluations_per_update());
            }
            assert_eq!(opt.evaluations(), used);
        }
    }

    #[test]
    fn sphere_converges() {
        let hyp = Hypothesis::isotropic(vec![1.0, -1.0], 1.0).unwrap();
        let meta = MetaParams::new(Variant::SupSys, 0.1, 0.1).unwrap();
        let mut opt = Optimizer::new(hyp, meta, BaselineKind::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            opt.step(&mut rng, |t| Objective::Sphere.reward(t)).unwrap();
        }
        assert!(Objective::Sphere.value(opt.hypothesis().mu()) < 1e-2);
    }
}
