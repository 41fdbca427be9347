//! Measurement operators, ensembles, and the checks every discrimination
//! strategy must pass.

use std::fmt;

use crate::dtr::{build_dtr, DtrBasis};
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::{hermitian_eigenvalues, hermiticity_residual, max_abs, CMat, CVec};

pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const ZERO_CONDITION_TOL: f64 = 1e-10;

/// Group id reserved for background states, which no detector may fire on.
pub const BACKGROUND_GROUP: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// Conclusive identification of a single state (0-based index).
    Identify(usize),
    /// Conclusive identification of a group of states.
    GroupIdentify(usize),
    Fail,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Identify(i) => write!(f, "identify-{}", i + 1),
            Outcome::GroupIdentify(g) => write!(f, "group-{g}"),
            Outcome::Fail => write!(f, "fail"),
        }
    }
}

impl std::str::FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownLabel(s.to_string());
        if s == "fail" {
            return Ok(Outcome::Fail);
        }
        if let Some(rest) = s.strip_prefix("identify-") {
            let i: usize = rest.parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            return Ok(Outcome::Identify(i - 1));
        }
        if let Some(rest) = s.strip_prefix("group-") {
            return rest.parse().map(Outcome::GroupIdentify).map_err(|_| bad());
        }
        Err(bad())
    }
}

#[derive(Debug, Clone)]
pub struct PovmElement {
    pub label: Outcome,
    pub matrix: CMat,
}

#[derive(Debug, Clone, Default)]
pub struct PovmSet {
    pub elements: Vec<PovmElement>,
}

impl PovmSet {
    /// Builds a set, summing elements that share a label and sorting by label.
    pub fn from_elements(elements: Vec<PovmElement>) -> Self {
        let mut merged: Vec<PovmElement> = Vec::new();
        for e in elements {
            match merged.iter_mut().find(|m| m.label == e.label) {
                Some(m) => m.matrix += e.matrix,
                None => merged.push(e),
            }
        }
        merged.sort_by_key(|e| e.label);
        PovmSet { elements: merged }
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map(|e| e.matrix.nrows()).unwrap_or(0)
    }

    pub fn get(&self, label: Outcome) -> Option<&CMat> {
        self.elements.iter().find(|e| e.label == label).map(|e| &e.matrix)
    }

    pub fn labels(&self) -> Vec<Outcome> {
        self.elements.iter().map(|e| e.label).collect()
    }

    /// Applies the change of frame E ↦ W E W†.
    pub fn transformed(&self, w: &CMat) -> Self {
        PovmSet {
            elements: self
                .elements
                .iter()
                .map(|e| PovmElement {
                    label: e.label,
                    matrix: w * &e.matrix * w.adjoint(),
                })
                .collect(),
        }
    }

    /// Largest entrywise difference between matching labels; infinite if the label sets differ.
    pub fn max_difference(&self, other: &PovmSet) -> f64 {
        if self.labels() != other.labels() {
            return f64::INFINITY;
        }
        self.elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| max_abs(&(&a.matrix - &b.matrix)))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub priors: Vec<f64>,
    pub groups: Vec<usize>,
    pub gram: GramMatrix,
    pub dtr: DtrBasis,
}

impl Ensemble {
    pub fn new(gram: GramMatrix, priors: Vec<f64>, groups: Vec<usize>) -> Result<Self> {
        let n = gram.n();
        if priors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: priors.len(),
            });
        }
        if groups.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: groups.len(),
            });
        }
        if priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidPriors("priors must be finite and non-negative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors(format!("priors sum to {total}, not 1")));
        }
        let dtr = build_dtr(&gram)?;
        Ok(Ensemble { priors, groups, gram, dtr })
    }

    /// Every state in its own group, group ids 1..=n.
    pub fn pure_states(gram: GramMatrix, priors: Vec<f64>) -> Result<Self> {
        let n = gram.n();
        Self::new(gram, priors, (1..=n).collect())
    }

    pub fn n(&self) -> usize {
        self.gram.n()
    }

    pub fn state(&self, i: usize) -> CVec {
        self.dtr.state(i)
    }

    /// Density operator ρ = Σ η_j |Ψ_j⟩⟨Ψ_j| in the {e_j} frame.
    pub fn density(&self) -> CMat {
        let n = self.n();
        let mut rho = CMat::zeros(n, n);
        for j in 0..n {
            let s = self.state(j);
            rho += (&s * s.adjoint()) * num_complex::Complex64::new(self.priors[j], 0.0);
        }
        rho
    }

    /// Ensemble with states reordered: new state i is old state order[i].
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            self.gram.permuted(order),
            order.iter().map(|&i| self.priors[i]).collect(),
            order.iter().map(|&i| self.groups[i]).collect(),
        )
    }

    /// Distinct non-background group ids in order of first appearance.
    pub fn group_ids(&self) -> Vec<usize> {
        let mut ids = Vec::new();
        for &g in &self.groups {
            if g != BACKGROUND_GROUP && !ids.contains(&g) {
                ids.push(g);
            }
        }
        ids
    }

    pub fn members(&self, g: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.groups[i] == g).collect()
    }
}

/// Unitary W with W·(coordinates in `from`'s frame) = coordinates in `to`'s
/// frame, where state `order[i]` of `to` is state i of `from`.
pub fn frame_change(from: &Ensemble, to: &Ensemble, order: &[usize]) -> CMat {
    let n = to.n();
    let src = CMat::from_fn(n, n, |a, i| from.dtr.c[(i, a)]);
    let dst = CMat::from_fn(n, n, |a, i| to.dtr.c[(order[i], a)]);
    dst * src.try_inverse().expect("state coordinates are linearly independent")
}

#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub completeness_residual: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
    /// Largest eigenvalue of the sum of all conclusive elements (diagnostic only).
    pub max_detection_eigenvalue: f64,
    pub passed: bool,
}

pub fn verify_povm(s: &PovmSet) -> Result<ValidityReport> {
    let n = s.dim();
    let mut total = CMat::zeros(n, n);
    let mut detect = CMat::zeros(n, n);
    let mut min_ev = f64::INFINITY;
    let mut herm = 0.0_f64;
    for e in &s.elements {
        if e.matrix.nrows() != n || e.matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: e.matrix.nrows(),
            });
        }
        total += &e.matrix;
        if e.label != Outcome::Fail {
            detect += &e.matrix;
        }
        herm = herm.max(hermiticity_residual(&e.matrix));
        min_ev = min_ev.min(hermitian_eigenvalues(&e.matrix)[0]);
    }
    let completeness_residual = max_abs(&(total - CMat::identity(n, n)));
    let max_detection_eigenvalue = hermitian_eigenvalues(&detect).last().copied().unwrap_or(0.0);
    let passed = completeness_residual <= COMPLETENESS_TOL && min_ev >= POSITIVITY_TOL && herm <= HERMITIAN_TOL;
    Ok(ValidityReport {
        completeness_residual,
        min_eigenvalue: min_ev,
        hermiticity_residual: herm,
        max_detection_eigenvalue,
        passed,
    })
}

#[derive(Debug, Clone)]
pub struct ZeroReport {
    /// Per conclusive element: largest ‖E ψ_k‖ over excluded states k.
    pub residuals: Vec<(Outcome, f64)>,
    pub max_residual: f64,
    pub passed: bool,
}

pub fn zero_conditions(s: &PovmSet, ens: &Ensemble) -> Result<ZeroReport> {
    let n = ens.n();
    let states: Vec<CVec> = (0..n).map(|k| ens.state(k)).collect();
    let mut residuals = Vec::new();
    for e in &s.elements {
        let excluded: Vec<usize> = match e.label {
            Outcome::Fail => continue,
            Outcome::Identify(i) => {
                if i >= n {
                    return Err(Error::UnknownLabel(e.label.to_string()));
                }
                (0..n).filter(|&k| k != i).collect()
            }
            Outcome::GroupIdentify(g) => {
                if g == BACKGROUND_GROUP || !ens.groups.contains(&g) {
                    return Err(Error::UnknownLabel(e.label.to_string()));
                }
                (0..n).filter(|&k| ens.groups[k] != g).collect()
            }
        };
        let r = excluded.iter().map(|&k| (&e.matrix * &states[k]).norm()).fold(0.0, f64::max);
        residuals.push((e.label, r));
    }
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ZeroReport {
        residuals,
        max_residual,
        passed: max_residual <= ZERO_CONDITION_TOL,
    })
}

fn expectation(m: &CMat, ens: &Ensemble) -> f64 {
    (0..ens.n())
        .map(|j| {
            let s = ens.state(j);
            ens.priors[j] * s.dotc(&(m * &s)).re
        })
        .sum()
}

/// F = Σ_j η_j ⟨Ψ_j|E_0|Ψ_j⟩.
pub fn failure_probability(s: &PovmSet, ens: &Ensemble) -> f64 {
    s.elements
        .iter()
        .filter(|e| e.label == Outcome::Fail)
        .map(|e| expectation(&e.matrix, ens))
        .sum()
}

pub fn success_probability(s: &PovmSet, ens: &Ensemble) -> f64 {
    s.elements
        .iter()
        .filter(|e| e.label != Outcome::Fail)
        .map(|e| expectation(&e.matrix, ens))
        .sum()
}

/// Probability of each element for input state j.
pub fn outcome_probabilities(s: &PovmSet, ens: &Ensemble, j: usize) -> Vec<(Outcome, f64)> {
    let psi = ens.state(j);
    s.elements.iter().map(|e| (e.label, psi.dotc(&(&e.matrix * &psi)).re)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    fn proj(n: usize, k: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(k, k)] = crate::linalg::ONE;
        m
    }

    #[test]
    fn identity_alone_is_valid() {
        let s = PovmSet::from_elements(vec![PovmElement {
            label: Outcome::Fail,
            matrix: CMat::identity(3, 3),
        }]);
        assert!(verify_povm(&s).unwrap().passed);
    }

    #[test]
    fn projective_measurement_is_valid() {
        let s = PovmSet::from_elements(vec![
            PovmElement {
                label: Outcome::Identify(0),
                matrix: proj(2, 0),
            },
            PovmElement {
                label: Outcome::Identify(1),
                matrix: proj(2, 1),
            },
        ]);
        assert!(verify_povm(&s).unwrap().passed);
    }

    #[test]
    fn scaled_projector_fails() {
        let s = PovmSet::from_elements(vec![
            PovmElement {
                label: Outcome::Identify(0),
                matrix: proj(2, 0) * crate::linalg::c(1.5, 0.0),
            },
            PovmElement {
                label: Outcome::Identify(1),
                matrix: proj(2, 1),
            },
        ]);
        assert!(!verify_povm(&s).unwrap().passed);
        let s2 = PovmSet::from_elements(vec![
            PovmElement {
                label: Outcome::Identify(0),
                matrix: proj(2, 0) * crate::linalg::c(1.5, 0.0),
            },
            PovmElement {
                label: Outcome::Fail,
                matrix: proj(2, 0) * crate::linalg::c(-0.5, 0.0) + proj(2, 1),
            },
        ]);
        assert!(!verify_povm(&s2).unwrap().passed);
    }

    #[test]
    fn dimension_mismatch() {
        let s = PovmSet {
            elements: vec![
                PovmElement {
                    label: Outcome::Fail,
                    matrix: CMat::identity(2, 2),
                },
                PovmElement {
                    label: Outcome::Identify(0),
                    matrix: CMat::identity(3, 3),
                },
            ],
        };
        assert!(matches!(verify_povm(&s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reciprocal_projector_annihilates_other_states() {
        let g = crate::gram::validate_gram(real_matrix(3, 3, &[1.0, 0.3, 0.2, 0.3, 1.0, 0.5, 0.2, 0.5, 1.0])).unwrap();
        let ens = Ensemble::pure_states(g, vec![0.2, 0.3, 0.5]).unwrap();
        let r = ens.dtr.reciprocal(0);
        let s = PovmSet::from_elements(vec![
            PovmElement {
                label: Outcome::Identify(0),
                matrix: &r * r.adjoint(),
            },
            PovmElement {
                label: Outcome::Fail,
                matrix: CMat::identity(3, 3) - &r * r.adjoint(),
            },
        ]);
        let z = zero_conditions(&s, &ens).unwrap();
        assert!(z.passed && z.max_residual < 1e-14);
        assert!(matches!(
            zero_conditions(
                &PovmSet::from_elements(vec![PovmElement {
                    label: Outcome::Identify(7),
                    matrix: CMat::identity(3, 3)
                }]),
                &ens
            ),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn failure_extremes() {
        let g = crate::gram::validate_gram(real_matrix(2, 2, &[1.0, 0.6, 0.6, 1.0])).unwrap();
        let ens = Ensemble::pure_states(g, vec![0.5, 0.5]).unwrap();
        let all_fail = PovmSet::from_elements(vec![PovmElement {
            label: Outcome::Fail,
            matrix: CMat::identity(2, 2),
        }]);
        assert!((failure_probability(&all_fail, &ens) - 1.0).abs() < 1e-14);
        let none = PovmSet::from_elements(vec![PovmElement {
            label: Outcome::Fail,
            matrix: CMat::zeros(2, 2),
        }]);
        assert_eq!(failure_probability(&none, &ens), 0.0);
    }

    #[test]
    fn outcome_label_text_round_trip() {
        for o in [Outcome::Identify(0), Outcome::Identify(4), Outcome::GroupIdentify(2), Outcome::Fail] {
            assert_eq!(o.to_string().parse::<Outcome>().unwrap(), o);
        }
    }
}
