//! Double-triangle representation.
//!
//! An orthonormal basis {e_j} in which the reciprocal states have a
//! lower-triangular coefficient matrix C⊥ and the states themselves an
//! upper-triangular matrix C. Rows hold ket coefficients, c_ij = ⟨e_j|Ψ_i⟩,
//! so ⟨Ψ_i|Ψ_j⟩ = Σ_m conj(c_im) c_jm.

use crate::error::{Error, Result};
use crate::gram::{reciprocal_gram, reciprocal_norms, GramMatrix};
use crate::linalg::{CMat, CVec, ZERO};

const BREAKDOWN_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DtrBasis {
    pub n: usize,
    /// Lower triangular, rows = |Ψ⊥_i⟩ in {e_j}.
    pub c_perp: CMat,
    /// E = (C⊥)⁻¹, rows = |e_j⟩ in the reciprocal-state frame.
    pub e_mat: CMat,
    /// Upper triangular, rows = |Ψ_i⟩ in {e_j}.
    pub c: CMat,
    pub t: Vec<f64>,
}

pub fn build_dtr(o: &GramMatrix) -> Result<DtrBasis> {
    let n = o.n();
    let op = reciprocal_gram(o);
    let t = reciprocal_norms(o);
    let mut cp = CMat::zeros(n, n);
    for i in 0..n {
        for m in 0..i {
            let mut acc = op.get(m, i);
            for l in 0..m {
                acc -= cp[(m, l)].conj() * cp[(i, l)];
            }
            cp[(i, m)] = acc / cp[(m, m)];
        }
        let used: f64 = (0..i).map(|l| cp[(i, l)].norm_sqr()).sum();
        let d2 = 1.0 - used;
        if !(d2 > 0.0) || d2.sqrt() < BREAKDOWN_TOL {
            return Err(Error::NumericalBreakdown {
                index: i + 1,
                value: d2.max(0.0).sqrt(),
            });
        }
        cp[(i, i)] = num_complex::Complex64::new(d2.sqrt(), 0.0);
    }
    let e_mat = lower_triangular_inverse(&cp);
    // c_ij = ⟨e_j|Ψ_i⟩ = t_i conj(E_ji); exactly upper triangular because E is lower.
    let mut c = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            c[(i, j)] = e_mat[(j, i)].conj() * t[i];
        }
    }
    Ok(DtrBasis {
        n,
        c_perp: cp,
        e_mat,
        c,
        t,
    })
}

fn lower_triangular_inverse(l: &CMat) -> CMat {
    let n = l.nrows();
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        inv[(col, col)] = l[(col, col)].inv();
        for i in (col + 1)..n {
            let mut acc = ZERO;
            for k in col..i {
                acc += l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = -acc / l[(i, i)];
        }
    }
    inv
}

impl DtrBasis {
    /// |Ψ_i⟩ as a column vector over {e_j}.
    pub fn state(&self, i: usize) -> CVec {
        self.c.row(i).transpose()
    }

    /// |Ψ⊥_i⟩ as a column vector over {e_j}.
    pub fn reciprocal(&self, i: usize) -> CVec {
        self.c_perp.row(i).transpose()
    }

    /// Gram matrix rebuilt from the rows of C: ⟨Ψ_i|Ψ_j⟩.
    pub fn reconstructed_gram(&self) -> CMat {
        self.c.conjugate() * self.c.transpose()
    }

    pub fn reconstructed_recip_gram(&self) -> CMat {
        self.c_perp.conjugate() * self.c_perp.transpose()
    }
}

pub fn state_vectors(b: &DtrBasis) -> (Vec<CVec>, Vec<CVec>) {
    ((0..b.n).map(|i| b.state(i)).collect(), (0..b.n).map(|i| b.reciprocal(i)).collect())
}
