//! Composite strategies built by chaining filtering stages.

use crate::error::{Error, Result};
use crate::filtering::{self, Regime};
use crate::linalg::CMat;
use crate::optics::{self, OpticalNetwork, StagePlan};
use crate::povm::{frame_change, Ensemble, Outcome, PovmSet};

mod background;
mod coherent;
mod jordan;
mod mixture;
mod pipeline;
mod three_state;

pub use background::{background_filter, background_optimal, BackgroundReduction};
pub use coherent::{bb84_analytic, bb84_curve, bb84_ensemble, coherent_overlap, Bb84Point, CoherentSpec};
pub use jordan::{jordan_design, jordan_design_at, JordanSpec};
pub use mixture::{four_state_mixture_design, four_state_mixture_optimal, MixtureCoefficients};
pub use pipeline::{composed_pipeline, pipeline_design, StageSpec};
pub use three_state::{
    symmetric_three_state, symmetric_three_state_ensemble, three_state_design, three_state_optimal, three_state_stage2_optimum,
    SymmetricOptimum, ThreeStateCoefficients,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Filter,
    TwoState,
    Background,
    Jordan,
    ThreeState,
    FourMixture,
    Pipeline,
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StrategyKind::Filter => "filter",
            StrategyKind::TwoState => "two-state",
            StrategyKind::Background => "background",
            StrategyKind::Jordan => "jordan",
            StrategyKind::ThreeState => "three-state",
            StrategyKind::FourMixture => "four-mixture",
            StrategyKind::Pipeline => "pipeline",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub kind: StrategyKind,
    /// Named angles, in stage order.
    pub params: Vec<(String, f64)>,
    /// Failure probability at `params`.
    pub f_opt: f64,
    /// Failure split by stage; index 0 is the background term.
    pub stage_failures: Vec<f64>,
    /// POVM in the caller's DTR frame.
    pub povms: PovmSet,
    pub regime_notes: Vec<String>,
    pub plan: StagePlan,
    pub network: OpticalNetwork,
    /// Unitary taking the network's signal-rail frame to the caller's DTR
    /// frame, when the strategy reordered the states; `None` means identity.
    pub network_frame: Option<CMat>,
}

impl StrategyResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|p| p.1)
    }

    /// POVM realised by a network of this strategy, expressed in the caller's frame.
    pub fn povms_from_network(&self, net: &OpticalNetwork) -> PovmSet {
        let p = optics::extract_povms(net);
        match &self.network_frame {
            Some(w) => p.transformed(w),
            None => p,
        }
    }
}

fn named(omegas: &[f64]) -> Vec<(String, f64)> {
    omegas.iter().enumerate().map(|(i, &w)| (format!("omega{}", i + 1), w)).collect()
}

fn note(stage: &str, regime: Regime) -> String {
    format!("{stage}: regime {regime}")
}

fn require_n(ens: &Ensemble, n: usize) -> Result<()> {
    if ens.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ens.n() });
    }
    Ok(())
}

/// Filtering of state 1 from the rest as a strategy, at `omega` or at the optimum.
pub fn filter_strategy(ens: &Ensemble, omega: Option<f64>) -> Result<StrategyResult> {
    let (design, notes) = match omega {
        Some(w) => (filtering::filter_povms(ens, w)?, vec![]),
        None => {
            let r = filtering::optimal_filter(ens)?;
            (r.design, vec![note("stage 1", r.regime)])
        }
    };
    let plan = optics::filter_plan(ens, design.omega, Outcome::GroupIdentify(1), Outcome::GroupIdentify(2))?;
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::Filter,
        params: named(&[design.omega]),
        f_opt: design.failure,
        stage_failures: vec![0.0, design.failure],
        povms: design.povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}

/// Two pure states, at `omega` or at the optimum.
pub fn two_state_strategy(ens: &Ensemble, omega: Option<f64>) -> Result<StrategyResult> {
    let (design, notes) = match omega {
        Some(w) => (filtering::two_state_design(ens, w)?, vec![]),
        None => {
            let r = filtering::two_state_optimal(ens)?;
            (r.design, vec![note("stage 1", r.regime)])
        }
    };
    let plan = optics::filter_plan(ens, design.omega, Outcome::Identify(0), Outcome::Identify(1))?;
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::TwoState,
        params: named(&[design.omega]),
        f_opt: design.failure,
        stage_failures: vec![0.0, design.failure],
        povms: design.povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}

fn is_identity(order: &[usize]) -> bool {
    order.iter().enumerate().all(|(i, &o)| i == o)
}

/// Re-expresses a result computed on `ens.permuted(order)` in the frame and
/// state indexing of `ens`.
fn map_back(mut r: StrategyResult, perm: &Ensemble, ens: &Ensemble, order: &[usize]) -> Result<StrategyResult> {
    if is_identity(order) {
        return Ok(r);
    }
    let relabel = |o: Outcome| match o {
        Outcome::Identify(i) => Outcome::Identify(order[i]),
        other => other,
    };
    let w = frame_change(perm, ens, order);
    let mut povms = r.povms.transformed(&w);
    for e in &mut povms.elements {
        e.label = relabel(e.label);
    }
    r.povms = PovmSet::from_elements(povms.elements);
    let mut inputs = r.plan.inputs.clone();
    for (i, &o) in order.iter().enumerate() {
        inputs[o] = r.plan.inputs[i].clone();
    }
    r.plan.inputs = inputs;
    for s in &mut r.plan.substages {
        s.target = order[s.target];
        s.label = relabel(s.label);
    }
    for p in &mut r.plan.final_ports {
        p.1 = relabel(p.1);
    }
    r.network = optics::synthesize(&r.plan)?;
    r.network_frame = Some(w);
    Ok(r)
}
