//! Overlap (Gram) matrices and the algebra of reciprocal states.
//!
//! For linearly independent |Ψ_1⟩…|Ψ_n⟩ with overlaps o_ij = ⟨Ψ_i|Ψ_j⟩ the
//! reciprocal state |Ψ⊥_j⟩ is the unit vector in their span orthogonal to
//! every |Ψ_k⟩, k ≠ j, with phase chosen so that t_j = ⟨Ψ⊥_j|Ψ_j⟩ > 0.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, CMat, ONE};

const HERMITIAN_TOL: f64 = 1e-12;
const DIAGONAL_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue is this times n.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMat,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> num_complex::Complex64 {
        self.entries[(i, j)]
    }

    pub fn identity(n: usize) -> Self {
        GramMatrix {
            entries: CMat::identity(n, n),
        }
    }

    /// Reorders the states: entry (i, j) of the result is o_{order[i], order[j]}.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = order.len();
        GramMatrix {
            entries: CMat::from_fn(n, n, |i, j| self.entries[(order[i], order[j])]),
        }
    }

    fn from_trusted(mut entries: CMat) -> Self {
        for i in 0..entries.nrows() {
            entries[(i, i)] = ONE;
        }
        GramMatrix { entries }
    }
}

pub fn validate_gram(raw: CMat) -> Result<GramMatrix> {
    let (rows, cols) = raw.shape();
    if rows != cols || rows < 2 {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    for i in 0..n {
        for j in 0..n {
            let z = raw[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::OverlapOutOfRange {
                    i: i + 1,
                    j: j + 1,
                    value: f64::NAN,
                });
            }
        }
    }
    for i in 0..n {
        if (raw[(i, i)] - ONE).norm() > DIAGONAL_TOL {
            return Err(Error::NonUnitDiagonal { i: i + 1 });
        }
        for j in (i + 1)..n {
            if (raw[(i, j)] - raw[(j, i)].conj()).norm() > HERMITIAN_TOL {
                return Err(Error::NotHermitian { i: i + 1, j: j + 1 });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let value = raw[(i, j)].norm();
            if value >= 1.0 {
                return Err(Error::OverlapOutOfRange { i: i + 1, j: j + 1, value });
            }
        }
    }
    let min_ev = min_eigenvalue(&raw);
    if min_ev <= POSITIVITY_TOL * n as f64 {
        return Err(Error::LinearlyDependent { min_eigenvalue: min_ev });
    }
    Ok(GramMatrix { entries: raw })
}

/// Adjugate A = det(O)·O⁻¹ and det(O), both from a Cholesky factorisation.
pub fn adjugate_det(o: &GramMatrix) -> (CMat, f64) {
    let chol = Cholesky::new(o.entries.clone()).expect("validated Gram matrix is positive definite");
    let det: f64 = chol.l_dirty().diagonal().iter().map(|l| l.norm_sqr()).product();
    let inv = chol.inverse();
    let mut a = inv * num_complex::Complex64::new(det, 0.0);
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    (a, det)
}

pub fn determinant(o: &GramMatrix) -> f64 {
    adjugate_det(o).1
}

/// t_j = sqrt(det O / a_jj).
pub fn reciprocal_norms(o: &GramMatrix) -> Vec<f64> {
    let (a, det) = adjugate_det(o);
    (0..o.n()).map(|j| (det / a[(j, j)].re).sqrt().min(1.0)).collect()
}

/// O⊥ with o⊥_ij = a_ij / sqrt(a_ii a_jj).
pub fn reciprocal_gram(o: &GramMatrix) -> GramMatrix {
    let (a, _) = adjugate_det(o);
    let n = o.n();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re.sqrt()).collect();
    GramMatrix::from_trusted(CMat::from_fn(n, n, |i, j| a[(i, j)] / (d[i] * d[j])))
}

#[derive(Debug, Clone)]
pub struct GramDerived {
    pub adjugate: CMat,
    pub determinant: f64,
    pub t: Vec<f64>,
    pub recip_gram: GramMatrix,
}

pub fn derive(o: &GramMatrix) -> GramDerived {
    let (adjugate, determinant) = adjugate_det(o);
    GramDerived {
        t: reciprocal_norms(o),
        recip_gram: reciprocal_gram(o),
        adjugate,
        determinant,
    }
}

/// R = Õ·diag(1/t), mapping reciprocal states to states: |Ψ_j⟩ = Σ_k R_jk |Ψ⊥_k⟩.
pub fn r_matrix(o: &GramMatrix) -> CMat {
    let t = reciprocal_norms(o);
    let n = o.n();
    CMat::from_fn(n, n, |j, k| o.entries[(k, j)] / t[k])
}

/// R⁻¹ = diag(t)·Ã/det(O): |Ψ⊥_j⟩ = Σ_k (R⁻¹)_jk |Ψ_k⟩.
pub fn r_inverse(o: &GramMatrix) -> CMat {
    let (a, det) = adjugate_det(o);
    let t = reciprocal_norms(o);
    let n = o.n();
    CMat::from_fn(n, n, |j, k| a[(k, j)] * (t[j] / det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real_matrix};

    #[test]
    fn accepts_identity_and_real_overlap() {
        assert!(validate_gram(CMat::identity(2, 2)).is_ok());
        assert!(validate_gram(real_matrix(2, 2, &[1.0, 0.5, 0.5, 1.0])).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            validate_gram(real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0])),
            Err(Error::OverlapOutOfRange { .. })
        ));
        assert!(matches!(
            validate_gram(real_matrix(2, 2, &[1.0, 0.5, 0.4, 1.0])),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            validate_gram(real_matrix(2, 2, &[1.1, 0.5, 0.5, 1.0])),
            Err(Error::NonUnitDiagonal { .. })
        ));
        assert!(matches!(validate_gram(real_matrix(1, 1, &[1.0])), Err(Error::NotSquare { .. })));
        // pairwise fine, jointly dependent: three coplanar real unit vectors
        let s = 0.5;
        let dep = real_matrix(3, 3, &[1.0, s, -s, s, 1.0, s, -s, s, 1.0]);
        assert!(matches!(validate_gram(dep), Err(Error::LinearlyDependent { .. })));
    }

    #[test]
    fn two_by_two_adjugate() {
        let o = validate_gram(real_matrix(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let (a, det) = adjugate_det(&o);
        assert!((det - 0.75).abs() < 1e-14);
        assert!(max_abs_diff(&a, &real_matrix(2, 2, &[1.0, -0.5, -0.5, 1.0])) < 1e-14);
        let t = reciprocal_norms(&o);
        assert!((t[0] - 0.75f64.sqrt()).abs() < 1e-14 && (t[1] - 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_values() {
        let o = validate_gram(real_matrix(3, 3, &[1.0, 0.3, 0.3, 0.3, 1.0, 0.5, 0.3, 0.5, 1.0])).unwrap();
        assert!((determinant(&o) - 0.66).abs() < 1e-14);
        assert!((reciprocal_norms(&o)[0] - (0.66f64 / 0.75).sqrt()).abs() < 1e-14);
        assert!((reciprocal_norms(&o)[0] - 0.938083).abs() < 1e-6);
    }

    #[test]
    fn identity_is_self_reciprocal() {
        let o = GramMatrix::identity(4);
        assert_eq!(reciprocal_norms(&o), vec![1.0; 4]);
        assert!(max_abs_diff(reciprocal_gram(&o).entries(), &CMat::identity(4, 4)) < 1e-15);
        let (a, det) = adjugate_det(&o);
        assert!((det - 1.0).abs() < 1e-15 && max_abs_diff(&a, &CMat::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn reciprocal_gram_two_states() {
        let o = validate_gram(real_matrix(2, 2, &[1.0, 0.6, 0.6, 1.0])).unwrap();
        let op = reciprocal_gram(&o);
        assert!(max_abs_diff(op.entries(), &real_matrix(2, 2, &[1.0, -0.6, -0.6, 1.0])) < 1e-14);
    }
}
