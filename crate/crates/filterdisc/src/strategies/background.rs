//! Filtering two states in the presence of a background state that both
//! detectors must ignore.

use num_complex::Complex64;

use super::{map_back, named, note, require_n, StrategyKind, StrategyResult};
use crate::error::{Error, Result};
use crate::filtering::{two_state_e2_weight, two_state_optimum, FilterCurve};
use crate::linalg::{c, projector, CMat, CVec, ZERO};
use crate::optics::{self, ensemble_inputs};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet};

/// The two-state problem left in span{e1, e2} once the background is removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundReduction {
    /// o′12 = (o12 − o13 o32)/sqrt((1−|o31|²)(1−|o32|²))
    pub overlap: Complex64,
    /// η′_j = η_j(1 − |o3j|²)
    pub eta: [f64; 2],
    /// Σ_j η_j|o3j|² + η3, lost to the background port regardless of ω.
    pub constant: f64,
}

impl BackgroundReduction {
    pub fn of(ens: &Ensemble) -> Self {
        let o = |i: usize, j: usize| ens.gram.get(i, j);
        let (a, b) = (1.0 - o(2, 0).norm_sqr(), 1.0 - o(2, 1).norm_sqr());
        let overlap = (o(0, 1) - o(0, 2) * o(2, 1)) / (a * b).sqrt();
        let eta = [ens.priors[0] * a, ens.priors[1] * b];
        let constant = ens.priors[0] * o(2, 0).norm_sqr() + ens.priors[1] * o(2, 1).norm_sqr() + ens.priors[2];
        BackgroundReduction { overlap, eta, constant }
    }

    pub fn curve(&self) -> FilterCurve {
        FilterCurve::two_state(self.eta[0], self.eta[1], self.overlap.norm())
    }
}

/// Puts the background last; returns the order and the reordered ensemble.
fn canonical(ens: &Ensemble, background: usize) -> Result<(Vec<usize>, Ensemble)> {
    require_n(ens, 3)?;
    if background >= 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: background + 1,
        });
    }
    let mut order: Vec<usize> = (0..3).filter(|&i| i != background).collect();
    order.push(background);
    let perm = ens.permuted(&order)?;
    Ok((order, perm))
}

fn design(ens: &Ensemble, omega: f64, notes: Vec<String>) -> Result<StrategyResult> {
    if !omega.is_finite() {
        return Err(Error::InvalidOmega(omega));
    }
    let n = 3;
    let red = BackgroundReduction::of(ens);
    let cm = &ens.dtr.c;
    let s2 = omega.sin().powi(2);
    let e1v = ens.dtr.reciprocal(0);
    let e3v = CVec::from_vec(vec![ZERO, ZERO, c(1.0, 0.0)]);
    let id_1 = projector(&e1v) * c(s2, 0.0);
    let norm12 = (1.0 - cm[(0, 2)].norm_sqr()).sqrt();
    let (a, b) = (cm[(0, 0)] / norm12, cm[(0, 1)] / norm12);
    let recip2 = CVec::from_vec(vec![-b.conj(), a, ZERO]);
    let id_2 = projector(&recip2) * c(two_state_e2_weight(omega, red.overlap.norm()), 0.0);
    let fail_bg = projector(&e3v);
    let keep = CMat::identity(n, n) - &fail_bg - &id_1;
    let v = &keep * ens.state(0);
    let x = ens.state(0).dotc(&v).re;
    let fail_1 = if x > 1e-300 {
        projector(&v) * c(1.0 / x, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    let povms = PovmSet::from_elements(vec![
        PovmElement {
            label: Outcome::Identify(0),
            matrix: id_1,
        },
        PovmElement {
            label: Outcome::Identify(1),
            matrix: id_2,
        },
        PovmElement {
            label: Outcome::Fail,
            matrix: fail_1 + fail_bg,
        },
    ]);
    let f1 = red.curve().eval(omega);
    let plan = optics::staged_plan(
        ensemble_inputs(ens),
        &[(vec![0], Outcome::Identify(0))],
        Some((vec![1], Outcome::Identify(1))),
        &[2],
        &[omega],
    )?;
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::Background,
        params: named(&[omega]),
        f_opt: f1 + red.constant,
        stage_failures: vec![red.constant, f1],
        povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}

/// Background filtering at a fixed angle; `background` is the 0-based index
/// of the state both detectors must ignore.
pub fn background_filter(ens: &Ensemble, background: usize, omega: f64) -> Result<StrategyResult> {
    let (order, perm) = canonical(ens, background)?;
    map_back(design(&perm, omega, vec![])?, &perm, ens, &order)
}

pub fn background_optimal(ens: &Ensemble, background: usize) -> Result<StrategyResult> {
    let (order, perm) = canonical(ens, background)?;
    let red = BackgroundReduction::of(&perm);
    let opt = two_state_optimum(red.eta[0], red.eta[1], red.overlap.norm());
    let notes = vec![note("subspace filter", opt.regime), format!("background constant {}", red.constant)];
    map_back(design(&perm, opt.omega(), notes)?, &perm, ens, &order)
}
