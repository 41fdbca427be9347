//! Generic chain of filtering stages. Each stage detects a block of target
//! states with one outcome; states left after the last stage share the final
//! detector, and background states go straight to failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{map_back, named, StrategyKind, StrategyResult};
use crate::error::{Error, Result};
use crate::optics::{self, ensemble_inputs};
use crate::optimizer::{minimize, ScanSpec};
use crate::povm::{failure_probability, Ensemble, Outcome};

const SWEEPS: usize = 3;
const LINE_POINTS: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    /// 0-based indices of the states this stage identifies.
    pub target: Vec<usize>,
    /// 0-based indices of states no detector may fire on.
    pub background: Vec<usize>,
}

impl StageSpec {
    pub fn state(i: usize) -> Self {
        StageSpec {
            target: vec![i],
            background: vec![],
        }
    }

    pub fn states(target: Vec<usize>) -> Self {
        StageSpec {
            target,
            background: vec![],
        }
    }

    pub fn with_background(mut self, background: Vec<usize>) -> Self {
        self.background = background;
        self
    }
}

struct Layout {
    order: Vec<usize>,
    blocks: Vec<(Vec<usize>, Outcome)>,
    rest: Option<(Vec<usize>, Outcome)>,
    background: Vec<usize>,
    n_omegas: usize,
}

fn label_for(ens: &Ensemble, states: &[usize]) -> Result<Outcome> {
    let g = ens.groups[states[0]];
    if states.iter().any(|&i| ens.groups[i] != g) {
        return Err(Error::InconsistentStaging(format!("states {states:?} do not share a group")));
    }
    if states.len() == 1 && ens.members(g).len() == 1 {
        Ok(Outcome::Identify(states[0]))
    } else {
        Ok(Outcome::GroupIdentify(g))
    }
}

fn layout(ens: &Ensemble, stages: &[StageSpec]) -> Result<Layout> {
    let n = ens.n();
    if stages.is_empty() {
        return Err(Error::InconsistentStaging("no stages".into()));
    }
    let mut used = vec![false; n];
    let claim = |i: usize, used: &mut Vec<bool>| -> Result<()> {
        if i >= n {
            return Err(Error::InconsistentStaging(format!("state {} does not exist", i + 1)));
        }
        if used[i] {
            return Err(Error::InconsistentStaging(format!("state {} is already consumed", i + 1)));
        }
        used[i] = true;
        Ok(())
    };
    let mut background: Vec<usize> = Vec::new();
    for s in stages {
        for &b in &s.background {
            if !background.contains(&b) {
                background.push(b);
            }
        }
    }
    background.sort_unstable();
    for &b in &background {
        claim(b, &mut used)?;
    }
    let mut order = Vec::new();
    let mut targets = Vec::new();
    for s in stages {
        if s.target.is_empty() {
            return Err(Error::InconsistentStaging("stage without a target".into()));
        }
        for &i in &s.target {
            claim(i, &mut used)?;
        }
        let label = label_for(ens, &s.target)?;
        let positions: Vec<usize> = (order.len()..order.len() + s.target.len()).collect();
        order.extend(&s.target);
        targets.push((positions, label));
    }
    let n_omegas = order.len();
    let rest_states: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
    let rest = if rest_states.is_empty() {
        None
    } else {
        let label = label_for(ens, &rest_states)?;
        let positions = (order.len()..order.len() + rest_states.len()).collect();
        order.extend(&rest_states);
        Some((positions, label))
    };
    let bg_positions = (order.len()..n).collect();
    order.extend(&background);
    let relabel = |o: Outcome| match o {
        Outcome::Identify(i) => Outcome::Identify(order.iter().position(|&k| k == i).unwrap()),
        other => other,
    };
    let blocks = targets.into_iter().map(|(p, l)| (p, relabel(l))).collect();
    let rest = rest.map(|(p, l)| (p, relabel(l)));
    Ok(Layout {
        order,
        blocks,
        rest,
        background: bg_positions,
        n_omegas,
    })
}

fn design_in(perm: &Ensemble, lay: &Layout, omegas: &[f64], notes: Vec<String>) -> Result<StrategyResult> {
    let plan = optics::staged_plan(ensemble_inputs(perm), &lay.blocks, lay.rest.clone(), &lay.background, omegas)?;
    let network = optics::synthesize(&plan)?;
    let povms = optics::extract_povms(&network);
    let stage_failures = optics::stage_failures(&network, &perm.priors);
    Ok(StrategyResult {
        kind: StrategyKind::Pipeline,
        params: named(omegas),
        f_opt: failure_probability(&povms, perm),
        stage_failures,
        povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}

fn network_failure(perm: &Ensemble, lay: &Layout, omegas: &[f64]) -> f64 {
    match optics::staged_plan(ensemble_inputs(perm), &lay.blocks, lay.rest.clone(), &lay.background, omegas)
        .and_then(|p| optics::synthesize(&p))
    {
        Ok(net) => optics::stage_failures(&net, &perm.priors).iter().sum(),
        Err(_) => f64::NAN,
    }
}

/// Pipeline at fixed angles, one per target state in stage order.
pub fn pipeline_design(ens: &Ensemble, stages: &[StageSpec], omegas: &[f64]) -> Result<StrategyResult> {
    let lay = layout(ens, stages)?;
    if omegas.len() != lay.n_omegas {
        return Err(Error::DimensionMismatch {
            expected: lay.n_omegas,
            got: omegas.len(),
        });
    }
    let perm = ens.permuted(&lay.order)?;
    map_back(design_in(&perm, &lay, omegas, vec![])?, &perm, ens, &lay.order)
}

/// Pipeline with angles chosen by coordinate descent from π/4: each sweep
/// scans every angle over [0, π/2] with the others fixed, then refines it.
pub fn composed_pipeline(ens: &Ensemble, stages: &[StageSpec]) -> Result<StrategyResult> {
    let lay = layout(ens, stages)?;
    let perm = ens.permuted(&lay.order)?;
    let mut omegas = vec![FRAC_PI_4; lay.n_omegas];
    let mut best = network_failure(&perm, &lay, &omegas);
    for _ in 0..SWEEPS {
        for k in 0..omegas.len() {
            let base = omegas.clone();
            let spec = ScanSpec::new(vec![(0.0, FRAC_PI_2)], |p: &[f64]| {
                let mut w = base.clone();
                w[k] = p[0];
                network_failure(&perm, &lay, &w)
            })
            .with_points(LINE_POINTS);
            let (p, f) = minimize(&spec)?;
            if f < best {
                omegas[k] = p[0];
                best = f;
            }
        }
    }
    let notes = (1..=omegas.len()).map(|s| format!("stage {s}: scanned")).collect();
    map_back(design_in(&perm, &lay, &omegas, notes)?, &perm, ens, &lay.order)
}
