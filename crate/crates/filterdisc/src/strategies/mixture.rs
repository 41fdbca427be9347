//! Two mixtures of two pure states each, discriminated by two filtering
//! sub-stages on the first group.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{map_back, named, require_n, StrategyKind, StrategyResult};
use crate::error::{Error, Result};
use crate::linalg::{c, projector, CMat, CVec};
use crate::optics::{self, ensemble_inputs};
use crate::optimizer::{minimize, ScanSpec};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet, BACKGROUND_GROUP};

const RESIDUE_EPS: f64 = 1e-15;

/// Closed-form coefficients of F(ω₁, ω₂) = F₁ + F₂ for an ensemble whose
/// first group is states 1, 2 and second group is states 3, 4.
#[derive(Debug, Clone, Copy)]
pub struct MixtureCoefficients {
    eta: [f64; 4],
    o: [[Complex64; 4]; 4],
    c11: Complex64,
    c12: Complex64,
    c22: Complex64,
}

impl MixtureCoefficients {
    pub fn new(ens: &Ensemble) -> Self {
        let mut o = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in o.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = ens.gram.get(i, j);
            }
        }
        let cm = &ens.dtr.c;
        MixtureCoefficients {
            eta: [ens.priors[0], ens.priors[1], ens.priors[2], ens.priors[3]],
            o,
            c11: cm[(0, 0)],
            c12: cm[(0, 1)],
            c22: cm[(1, 1)],
        }
    }

    /// (F₁, F₂) at (ω₁, ω₂).
    pub fn eval(&self, omega1: f64, omega2: f64) -> (f64, f64) {
        let (eta, o) = (&self.eta, &self.o);
        let s1 = omega1.sin().powi(2);
        let s2 = omega2.sin().powi(2);
        let x1 = 1.0 - self.c22.norm_sqr() * s1;
        if x1 <= RESIDUE_EPS {
            // ψ₂ fully detected: stage 1 has no failure port traffic
            let r1 = 1.0 - self.c12.norm_sqr() * s1;
            return (0.0, self.stage2(r1, self.c11, [Complex64::new(0.0, 0.0); 4], s2));
        }
        let sx = x1.sqrt();
        let f11 = (o[1][0] - self.c22.conj() * self.c12 * s1) / sx;
        let fk = [f11, Complex64::new(sx, 0.0), o[1][2] / sx, o[1][3] / sx];
        let d11 = self.c12.norm_sqr() * s1;
        let f1 = eta[1] * x1 + eta[0] * f11.norm_sqr() + eta[2] * fk[2].norm_sqr() + eta[3] * fk[3].norm_sqr();
        let r1 = 1.0 - f11.norm_sqr() - d11;
        (f1, self.stage2(r1, self.c11, fk, s2))
    }

    fn stage2(&self, r1: f64, c11: Complex64, fk: [Complex64; 4], s2: f64) -> f64 {
        if r1 <= RESIDUE_EPS {
            return 0.0;
        }
        let (eta, o) = (&self.eta, &self.o);
        let cp_sq = c11.norm_sqr() / r1;
        let x2 = 1.0 - cp_sq * s2;
        let mut f = eta[0] * r1 * x2.max(0.0);
        for k in 2..4 {
            let rk = 1.0 - fk[k].norm_sqr();
            if rk <= RESIDUE_EPS {
                continue;
            }
            let num = (o[0][k] - fk[0].conj() * fk[k]).norm_sqr() / (r1 * rk);
            if x2 > 1e-300 {
                f += eta[k] * rk * num / x2;
            }
        }
        f
    }
}

/// Order putting the group of state 1 first, and the two group ids.
fn canonical(ens: &Ensemble) -> Result<(Vec<usize>, usize, usize)> {
    require_n(ens, 4)?;
    let ids = ens.group_ids();
    if ens.groups.contains(&BACKGROUND_GROUP) || ids.len() != 2 || ids.iter().any(|&g| ens.members(g).len() != 2) {
        return Err(Error::GroupingError("four-mixture needs two groups of two states".into()));
    }
    let (g1, g2) = (ids[0], ids[1]);
    let mut order = ens.members(g1);
    order.extend(ens.members(g2));
    Ok((order, g1, g2))
}

fn build(ens: &Ensemble, g1: usize, g2: usize, omega1: f64, omega2: f64, notes: Vec<String>) -> Result<StrategyResult> {
    for w in [omega1, omega2] {
        if !w.is_finite() {
            return Err(Error::InvalidOmega(w));
        }
    }
    let n = 4;
    let (s1, s2) = (omega1.sin().powi(2), omega2.sin().powi(2));
    let e2_axis = CVec::from_fn(n, |i, _| if i == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let e1_axis = CVec::from_fn(n, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let d1 = projector(&e2_axis) * c(s1, 0.0);
    let d2 = projector(&e1_axis) * c(s2, 0.0);
    let psi2 = ens.state(1);
    let v1 = &psi2 - &d1 * &psi2;
    let x1 = psi2.dotc(&v1).re;
    let fail1 = if x1 > RESIDUE_EPS {
        projector(&v1) * c(1.0 / x1, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    let m = CMat::identity(n, n) - &d1 - &d2 - &fail1;
    let psi1 = ens.state(0);
    let u = &m * &psi1;
    let y = psi1.dotc(&u).re;
    let fail2 = if y > RESIDUE_EPS {
        projector(&u) * c(1.0 / y, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    let rest = &m - &fail2;
    let povms = PovmSet::from_elements(vec![
        PovmElement {
            label: Outcome::GroupIdentify(g1),
            matrix: d1 + d2,
        },
        PovmElement {
            label: Outcome::GroupIdentify(g2),
            matrix: rest,
        },
        PovmElement {
            label: Outcome::Fail,
            matrix: fail1 + fail2,
        },
    ]);
    let (fa, fb) = MixtureCoefficients::new(ens).eval(omega1, omega2);
    let plan = optics::staged_plan(
        ensemble_inputs(ens),
        &[(vec![0, 1], Outcome::GroupIdentify(g1))],
        Some((vec![2, 3], Outcome::GroupIdentify(g2))),
        &[],
        &[omega1, omega2],
    )?;
    let network = optics::synthesize(&plan)?;
    Ok(StrategyResult {
        kind: StrategyKind::FourMixture,
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

/// Two-mixture design at (ω₁, ω₂): ω₁ drives the detector on rail e₂ and ω₂
/// the one on rail e₁, after the states are ordered with the group of state
/// 1 first.
pub fn four_state_mixture_design(ens: &Ensemble, omega1: f64, omega2: f64) -> Result<StrategyResult> {
    let (order, g1, g2) = canonical(ens)?;
    let perm = ens.permuted(&order)?;
    map_back(build(&perm, g1, g2, omega1, omega2, vec![])?, &perm, ens, &order)
}

/// Scanned optimum over [0, π/2]² on a `points`² grid with refinement.
pub fn four_state_mixture_optimal(ens: &Ensemble, points: usize) -> Result<StrategyResult> {
    let (order, g1, g2) = canonical(ens)?;
    let perm = ens.permuted(&order)?;
    let (p, _) = scan_mixture(&perm, points)?;
    map_back(
        build(&perm, g1, g2, p[0], p[1], vec!["stages 1-2: scanned".to_string()])?,
        &perm,
        ens,
        &order,
    )
}

/// Scan of F₁ + F₂ for an ensemble already in canonical order.
pub(crate) fn scan_mixture(ens: &Ensemble, points: usize) -> Result<(Vec<f64>, f64)> {
    let k = MixtureCoefficients::new(ens);
    let spec = ScanSpec::new(vec![(0.0, FRAC_PI_2), (0.0, FRAC_PI_2)], move |p: &[f64]| {
        let (a, b) = k.eval(p[0], p[1]);
        a + b
    })
    .with_points(points);
    minimize(&spec)
}
