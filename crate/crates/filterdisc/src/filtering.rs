//! Filtering: deciding unambiguously whether the input is |Ψ_1⟩ or one of
//! |Ψ_2⟩…|Ψ_N⟩, as a one-parameter family of POVMs indexed by a beam-splitter
//! angle ω.

use crate::error::{Error, Result};
use crate::linalg::{c, projector, CMat};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Optimum on the ω = 0 boundary: never identify state 1.
    A,
    /// Interior stationary point.
    B,
    /// Optimum on the ω = π/2 boundary.
    C,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::A => "A (omega = 0)",
            Regime::B => "B (interior)",
            Regime::C => "C (omega = pi/2)",
        };
        f.write_str(s)
    }
}

/// Failure curve of a filtering stage, F = η₁x + B/x with x = 1 − t²sin²ω.
///
/// `eta1` is the prior of the filtered state, `leak` is B = Σ_k η_k|o_1k|²
/// and `t_sq` is the squared reciprocal norm of the filtered state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterCurve {
    pub eta1: f64,
    pub leak: f64,
    pub t_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveOptimum {
    pub regime: Regime,
    pub sin_sq: f64,
    pub value: f64,
}

impl CurveOptimum {
    pub fn omega(&self) -> f64 {
        self.sin_sq.clamp(0.0, 1.0).sqrt().asin()
    }
}

impl FilterCurve {
    /// Curve for filtering state 0 of `ens` from all the others.
    pub fn of_ensemble(ens: &Ensemble) -> Self {
        let leak = (1..ens.n()).map(|k| ens.priors[k] * ens.gram.get(0, k).norm_sqr()).sum();
        FilterCurve {
            eta1: ens.priors[0],
            leak,
            t_sq: ens.dtr.t[0] * ens.dtr.t[0],
        }
    }

    /// Two-state curve for priors (η₁, η₂) and overlap modulus |o|.
    pub fn two_state(eta1: f64, eta2: f64, overlap: f64) -> Self {
        FilterCurve {
            eta1,
            leak: eta2 * overlap * overlap,
            t_sq: 1.0 - overlap * overlap,
        }
    }

    pub fn eval_sin_sq(&self, sin_sq: f64) -> f64 {
        let x = 1.0 - self.t_sq * sin_sq;
        if self.leak == 0.0 {
            self.eta1 * x
        } else if x > 0.0 {
            self.eta1 * x + self.leak / x
        } else {
            f64::INFINITY
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let s = omega.sin();
        self.eval_sin_sq(s * s)
    }

    pub fn optimum(&self) -> CurveOptimum {
        let s = if self.eta1 > 0.0 {
            (self.leak / self.eta1).sqrt()
        } else {
            f64::INFINITY
        };
        let floor = 1.0 - self.t_sq;
        if s > 1.0 {
            CurveOptimum {
                regime: Regime::A,
                sin_sq: 0.0,
                value: self.eta1 + self.leak,
            }
        } else if s >= floor {
            let sin_sq = if self.t_sq > 0.0 {
                ((1.0 - s) / self.t_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            CurveOptimum {
                regime: Regime::B,
                sin_sq,
                value: 2.0 * (self.eta1 * self.leak).sqrt(),
            }
        } else {
            CurveOptimum {
                regime: Regime::C,
                sin_sq: 1.0,
                value: self.eta1 * floor + self.leak / floor,
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterDesign {
    pub omega: f64,
    pub povms: PovmSet,
    pub failure: f64,
}

#[derive(Debug, Clone)]
pub struct RegimeResult {
    pub regime: Regime,
    pub omega_opt: f64,
    pub f_opt: f64,
    pub design: FilterDesign,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidOmega(omega))
    }
}

/// E₁ = sin²ω|Ψ⊥₁⟩⟨Ψ⊥₁| and E₀ = |F⟩⟨F| with
/// |F⟩ = (|Ψ₁⟩ − t₁sin²ω|Ψ⊥₁⟩)/sqrt(1 − t₁²sin²ω).
fn identify_and_fail(ens: &Ensemble, omega: f64) -> (CMat, CMat) {
    let n = ens.n();
    let s2 = omega.sin().powi(2);
    let t1 = ens.dtr.t[0];
    let r1 = ens.dtr.reciprocal(0);
    let e1 = projector(&r1) * c(s2, 0.0);
    let x = 1.0 - t1 * t1 * s2;
    let e0 = if x > 1e-300 {
        let v = ens.state(0) - &r1 * c(t1 * s2, 0.0);
        projector(&v) * c(1.0 / x, 0.0)
    } else {
        CMat::zeros(n, n)
    };
    (e1, e0)
}

pub fn filter_povms(ens: &Ensemble, omega: f64) -> Result<FilterDesign> {
    check_omega(omega)?;
    let n = ens.n();
    let (e1, e0) = identify_and_fail(ens, omega);
    let e2 = CMat::identity(n, n) - &e1 - &e0;
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
    Ok(FilterDesign {
        omega,
        povms,
        failure: FilterCurve::of_ensemble(ens).eval(omega),
    })
}

/// Closed-form failure of filtering state 1 at angle ω.
pub fn failure_curve(ens: &Ensemble, omega: f64) -> f64 {
    FilterCurve::of_ensemble(ens).eval(omega)
}

pub fn optimal_filter(ens: &Ensemble) -> Result<RegimeResult> {
    let opt = FilterCurve::of_ensemble(ens).optimum();
    let omega = opt.omega();
    Ok(RegimeResult {
        regime: opt.regime,
        omega_opt: omega,
        f_opt: opt.value,
        design: filter_povms(ens, omega)?,
    })
}

fn require_two(ens: &Ensemble) -> Result<()> {
    if ens.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: ens.n() });
    }
    Ok(())
}

/// Weight of |Ψ⊥₂⟩⟨Ψ⊥₂| in E₂ for the two-state filter.
pub fn two_state_e2_weight(omega: f64, overlap_abs: f64) -> f64 {
    let (s, co) = omega.sin_cos();
    let den = co * co + s * s * overlap_abs * overlap_abs;
    if den > 0.0 {
        co * co / den
    } else {
        1.0
    }
}

pub fn two_state_design(ens: &Ensemble, omega: f64) -> Result<FilterDesign> {
    require_two(ens)?;
    check_omega(omega)?;
    let o = ens.gram.get(0, 1).norm();
    let (e1, e0) = identify_and_fail(ens, omega);
    let e2 = projector(&ens.dtr.reciprocal(1)) * c(two_state_e2_weight(omega, o), 0.0);
    let povms = PovmSet::from_elements(vec![
        PovmElement {
            label: Outcome::Identify(0),
            matrix: e1,
        },
        PovmElement {
            label: Outcome::Identify(1),
            matrix: e2,
        },
        PovmElement {
            label: Outcome::Fail,
            matrix: e0,
        },
    ]);
    let failure = FilterCurve::two_state(ens.priors[0], ens.priors[1], o).eval(omega);
    Ok(FilterDesign { omega, povms, failure })
}

pub fn two_state_optimum(eta1: f64, eta2: f64, overlap_abs: f64) -> CurveOptimum {
    FilterCurve::two_state(eta1, eta2, overlap_abs).optimum()
}

pub fn two_state_optimal(ens: &Ensemble) -> Result<RegimeResult> {
    require_two(ens)?;
    let opt = two_state_optimum(ens.priors[0], ens.priors[1], ens.gram.get(0, 1).norm());
    let omega = opt.omega();
    Ok(RegimeResult {
        regime: opt.regime,
        omega_opt: omega,
        f_opt: opt.value,
        design: two_state_design(ens, omega)?,
    })
}
