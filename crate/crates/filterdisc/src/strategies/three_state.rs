//! Successive filtering of three pure states: filter |Ψ1⟩, then filter the
//! residue of |Ψ2⟩ from that of |Ψ3⟩.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{named, note, require_n, StrategyKind, StrategyResult};
use crate::error::{Error, Result};
use crate::filtering::{two_state_optimum, CurveOptimum, FilterCurve, Regime};
use crate::gram::validate_gram;
use crate::linalg::{c, projector, real_matrix, CMat};
use crate::optics::{self, ensemble_inputs};
use crate::optimizer::{minimize, ScanSpec};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet};

const RESIDUE_EPS: f64 = 1e-15;

/// Closed-form failure coefficients of the two stages.
#[derive(Debug, Clone, Copy)]
pub struct ThreeStateCoefficients {
    pub eta: [f64; 3],
    pub o12: Complex64,
    pub o13: Complex64,
    pub o23: Complex64,
    pub stage1: FilterCurve,
}

/// What stage 2 sees after stage 1 at a given ω1.
#[derive(Debug, Clone, Copy)]
pub struct Residue {
    /// ⟨F1|Ψ2⟩, ⟨F1|Ψ3⟩
    pub f21: Complex64,
    pub f31: Complex64,
    /// η′_k = η_k(1 − |f_k1|²)
    pub eta2: f64,
    pub eta3: f64,
    /// o′23 = (o23 − f21* f31)/sqrt((1−|f21|²)(1−|f31|²))
    pub o23: Complex64,
}

impl ThreeStateCoefficients {
    pub fn of(ens: &Ensemble) -> Self {
        let eta = [ens.priors[0], ens.priors[1], ens.priors[2]];
        ThreeStateCoefficients {
            eta,
            o12: ens.gram.get(0, 1),
            o13: ens.gram.get(0, 2),
            o23: ens.gram.get(1, 2),
            stage1: FilterCurve::of_ensemble(ens),
        }
    }

    pub fn residue(&self, omega1: f64) -> Residue {
        let x = 1.0 - self.stage1.t_sq * omega1.sin().powi(2);
        // |o1k|² ≤ x, so both vanish together
        let (f21, f31) = if x > 1e-300 {
            (self.o12 / x.sqrt(), self.o13 / x.sqrt())
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        };
        let (r2, r3) = (1.0 - f21.norm_sqr(), 1.0 - f31.norm_sqr());
        let o23 = if r2 > RESIDUE_EPS && r3 > RESIDUE_EPS {
            (self.o23 - f21.conj() * f31) / (r2 * r3).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        };
        Residue {
            f21,
            f31,
            eta2: self.eta[1] * r2.max(0.0),
            eta3: self.eta[2] * r3.max(0.0),
            o23,
        }
    }

    pub fn stage2_curve(&self, omega1: f64) -> FilterCurve {
        let r = self.residue(omega1);
        FilterCurve::two_state(r.eta2, r.eta3, r.o23.norm())
    }

    /// (F1, F2) at (ω1, ω2).
    pub fn eval(&self, omega1: f64, omega2: f64) -> (f64, f64) {
        (self.stage1.eval(omega1), self.stage2_curve(omega1).eval(omega2))
    }
}

/// Best stage-2 angle for a given ω1. When η2 = η3 and |f21| = |f31| the
/// optimum is 2η|o23 − f21* f31|.
pub fn three_state_stage2_optimum(ens: &Ensemble, omega1: f64) -> Result<CurveOptimum> {
    require_n(ens, 3)?;
    let k = ThreeStateCoefficients::of(ens);
    let r = k.residue(omega1);
    let general = two_state_optimum(r.eta2, r.eta3, r.o23.norm());
    let special = (k.eta[1] - k.eta[2]).abs() <= 1e-12 && (r.f21.norm() - r.f31.norm()).abs() <= 1e-12;
    if special {
        let value = 2.0 * k.eta[1] * (k.o23 - r.f21.conj() * r.f31).norm();
        return Ok(CurveOptimum {
            regime: Regime::B,
            sin_sq: general.sin_sq,
            value,
        });
    }
    Ok(general)
}

pub fn three_state_design(ens: &Ensemble, omega1: f64, omega2: f64) -> Result<StrategyResult> {
    build(ens, omega1, omega2, vec![])
}

fn build(ens: &Ensemble, omega1: f64, omega2: f64, notes: Vec<String>) -> Result<StrategyResult> {
    require_n(ens, 3)?;
    for w in [omega1, omega2] {
        if !w.is_finite() {
            return Err(Error::InvalidOmega(w));
        }
    }
    let n = 3;
    let k = ThreeStateCoefficients::of(ens);
    let t1 = ens.dtr.t[0];
    let (s1, c1) = omega1.sin_cos();
    let s2 = omega2.sin();
    let r1 = ens.dtr.reciprocal(0);
    let r2 = ens.dtr.reciprocal(1);
    let id1 = projector(&r1) * c(s1 * s1, 0.0);
    // |D2⟩ᵉ has weight cos²ω1 sin²ω2/(cos²ω1 + sin²ω1|o⊥12|²) along |Ψ⊥2⟩
    let op12 = ens.dtr.reconstructed_recip_gram()[(0, 1)].norm_sqr();
    let den = c1 * c1 + s1 * s1 * op12;
    let w2 = if den > 0.0 { c1 * c1 / den } else { 1.0 } * s2 * s2;
    let id2 = projector(&r2) * c(w2, 0.0);
    let x1 = 1.0 - t1 * t1 * s1 * s1;
    let f1 = if x1 > 1e-300 {
        let v = ens.state(0) - &r1 * c(t1 * s1 * s1, 0.0);
        projector(&v) * c(1.0 / x1, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    let m2 = CMat::identity(n, n) - &id1 - &id2 - &f1;
    let u = &m2 * ens.state(1);
    let y = ens.state(1).dotc(&u).re;
    let f2 = if y > 1e-300 {
        projector(&u) * c(1.0 / y, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    let id3 = &m2 - &f2;
    let povms = PovmSet::from_elements(vec![
        PovmElement {
            label: Outcome::Identify(0),
            matrix: id1,
        },
        PovmElement {
            label: Outcome::Identify(1),
            matrix: id2,
        },
        PovmElement {
            label: Outcome::Identify(2),
            matrix: id3,
        },
        PovmElement {
            label: Outcome::Fail,
            matrix: f1 + f2,
        },
    ]);
    let (fa, fb) = k.eval(omega1, omega2);
    let plan = optics::staged_plan(
        ensemble_inputs(ens),
        &[(vec![0], Outcome::Identify(0)), (vec![1], Outcome::Identify(1))],
        Some((vec![2], Outcome::Identify(2))),
        &[],
        &[omega1, omega2],
    )?;
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::ThreeState,
        params: named(&[omega1, omega2]),
        f_opt: fa + fb,
        stage_failures: vec![0.0, fa, fb],
        povms,
        regime_notes: notes,
        plan,
        network,
        network_frame: None,
    })
}

/// Optimum of F1 + F2 by a `points`² grid scan over [0, π/2]² and refinement.
pub fn three_state_optimal(ens: &Ensemble, points: usize) -> Result<StrategyResult> {
    require_n(ens, 3)?;
    let k = ThreeStateCoefficients::of(ens);
    let spec = ScanSpec::new(vec![(0.0, FRAC_PI_2), (0.0, FRAC_PI_2)], move |p: &[f64]| {
        let (a, b) = k.eval(p[0], p[1]);
        a + b
    })
    .with_points(points);
    let (p, _) = minimize(&spec)?;
    let stage2 = two_state_optimum(k.residue(p[0]).eta2, k.residue(p[0]).eta3, k.residue(p[0]).o23.norm());
    build(
        ens,
        p[0],
        p[1],
        vec!["stage 1: scanned".to_string(), note("stage 2", stage2.regime)],
    )
}

/// Analytic optimum for ⟨Ψ1|Ψ2⟩ = ⟨Ψ1|Ψ3⟩ = s1, ⟨Ψ2|Ψ3⟩ = s2, equal priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricOptimum {
    /// 1 when s1 ≥ 2 s2, else 2.
    pub branch: u8,
    pub sin_sq_omega1: f64,
    pub f_opt: f64,
    /// (2/3)(2 s1 − s2)
    pub branch1_value: f64,
    /// (1/3)(s1²/s2 + 2 s2)
    pub branch2_value: f64,
}

pub fn symmetric_three_state_ensemble(s1: f64, s2: f64) -> Result<Ensemble> {
    let g = validate_gram(real_matrix(3, 3, &[1.0, s1, s1, s1, 1.0, s2, s1, s2, 1.0]))?;
    Ensemble::pure_states(g, vec![1.0 / 3.0; 3])
}

pub fn symmetric_three_state(s1: f64, s2: f64) -> Result<SymmetricOptimum> {
    if !(s1 > 0.0 && s1 * s1 < s2 && s2 < 1.0) {
        return Err(Error::InvalidRange(format!("need 0 < s1, s1^2 < s2 < 1 (s1 = {s1}, s2 = {s2})")));
    }
    let t1_sq = 1.0 - 2.0 * s1 * s1 / (1.0 + s2);
    let branch1_value = 2.0 / 3.0 * (2.0 * s1 - s2);
    let branch2_value = (s1 * s1 / s2 + 2.0 * s2) / 3.0;
    if s1 >= 2.0 * s2 {
        Ok(SymmetricOptimum {
            branch: 1,
            sin_sq_omega1: (1.0 - 2.0 * s1) / t1_sq,
            f_opt: branch1_value,
            branch1_value,
            branch2_value,
        })
    } else {
        Ok(SymmetricOptimum {
            branch: 2,
            sin_sq_omega1: (1.0 - s1 * s1 / s2) / t1_sq,
            f_opt: branch2_value,
            branch1_value,
            branch2_value,
        })
    }
}
