//! Two mixtures whose supports pair up into K mutually orthogonal planes
//! (Jordan basis); each plane is an independent two-state filter.

use std::f64::consts::FRAC_PI_2;

use super::{named, note, StrategyKind, StrategyResult};
use crate::error::{Error, Result};
use crate::filtering::{two_state_e2_weight, FilterCurve};
use crate::gram::validate_gram;
use crate::linalg::{c, projector, CMat};
use crate::optics::{self, ensemble_inputs, StagePlan, SubStage};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet};

/// States 1…K form the first mixture and K+1…2K the second; state i only
/// overlaps state K+i, with ⟨Ψ_i|Ψ_{K+i}⟩ = cos θ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanSpec {
    pub thetas: Vec<f64>,
    /// η_1…η_K then η_{K+1}…η_{2K}.
    pub priors: Vec<f64>,
}

impl JordanSpec {
    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for &t in &self.thetas {
            if !(t > 0.0 && t <= FRAC_PI_2) {
                return Err(Error::InvalidTheta(t));
            }
        }
        if self.priors.len() != 2 * self.k() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.k(),
                got: self.priors.len(),
            });
        }
        Ok(())
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        self.validate()?;
        let k = self.k();
        let mut g = CMat::identity(2 * k, 2 * k);
        for (i, &t) in self.thetas.iter().enumerate() {
            g[(i, k + i)] = c(t.cos(), 0.0);
            g[(k + i, i)] = c(t.cos(), 0.0);
        }
        let groups = (0..2 * k).map(|i| if i < k { 1 } else { 2 }).collect();
        Ensemble::new(validate_gram(g)?, self.priors.clone(), groups)
    }

    fn curve(&self, i: usize) -> FilterCurve {
        FilterCurve::two_state(self.priors[i], self.priors[self.k() + i], self.thetas[i].cos())
    }
}

pub fn jordan_design_at(spec: &JordanSpec, omegas: &[f64]) -> Result<StrategyResult> {
    build(spec, omegas, vec![])
}

/// Optimal design: each plane at its own two-state optimum.
pub fn jordan_design(spec: &JordanSpec) -> Result<StrategyResult> {
    spec.validate()?;
    let opts: Vec<_> = (0..spec.k()).map(|i| spec.curve(i).optimum()).collect();
    let omegas: Vec<f64> = opts.iter().map(|o| o.omega()).collect();
    let notes = opts
        .iter()
        .enumerate()
        .map(|(i, o)| note(&format!("subspace {}", i + 1), o.regime))
        .collect();
    build(spec, &omegas, notes)
}

fn build(spec: &JordanSpec, omegas: &[f64], notes: Vec<String>) -> Result<StrategyResult> {
    let ens = spec.ensemble()?;
    let k = spec.k();
    if omegas.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: omegas.len(),
        });
    }
    if let Some(&w) = omegas.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidOmega(w));
    }
    let n = 2 * k;
    let mut e1 = CMat::zeros(n, n);
    let mut e2 = CMat::zeros(n, n);
    let mut stage_failures = vec![0.0];
    for i in 0..k {
        let s2 = omegas[i].sin().powi(2);
        e1 += projector(&ens.dtr.reciprocal(i)) * c(s2, 0.0);
        e2 += projector(&ens.dtr.reciprocal(k + i)) * c(two_state_e2_weight(omegas[i], spec.thetas[i].cos()), 0.0);
        stage_failures.push(spec.curve(i).eval(omegas[i]));
    }
    let e0 = CMat::identity(n, n) - &e1 - &e2;
    let povms = PovmSet::from_elements(vec![
        PovmElement {
            label: Outcome::GroupIdentify(1),
            matrix: e1,
        },
        PovmElement {
            label: Outcome::GroupIdentify(2),
            matrix: e2,
        },
        PovmElement {
            label: Outcome::Fail,
            matrix: e0,
        },
    ]);
    let plan = StagePlan {
        n_signal: n,
        inputs: ensemble_inputs(&ens),
        substages: (0..k)
            .map(|i| SubStage {
                target: i,
                detector_rail: i,
                cascade: vec![k + i],
                omega: omegas[i],
                label: Outcome::GroupIdentify(1),
            })
            .collect(),
        final_ports: (0..k).map(|i| (k + i, Outcome::GroupIdentify(2))).collect(),
        background_rails: vec![],
    };
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::Jordan,
        params: named(omegas),
        f_opt: stage_failures.iter().sum(),
        stage_failures,
        povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}
