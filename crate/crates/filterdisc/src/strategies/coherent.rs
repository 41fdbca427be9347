//! Coherent-state BB84 mixtures: {|α⟩, |−α⟩} against {|iα⟩, |−iα⟩}.

use num_complex::Complex64;

use super::mixture::scan_mixture;
use crate::error::{Error, Result};
use crate::gram::validate_gram;
use crate::linalg::CMat;
use crate::povm::Ensemble;

/// ⟨α|β⟩ = exp(conj(α)β − (|α|² + |β|²)/2)
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (alpha.conj() * beta - (alpha.norm_sqr() + beta.norm_sqr()) / 2.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    /// Mean photon number μ = |α|².
    pub mu: f64,
}

impl CoherentSpec {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidRange(format!("mean photon number must be positive, got {mu}")));
        }
        Ok(CoherentSpec { mu })
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        let a = self.mu.sqrt();
        [
            Complex64::new(a, 0.0),
            Complex64::new(-a, 0.0),
            Complex64::new(0.0, a),
            Complex64::new(0.0, -a),
        ]
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        let amps = self.amplitudes();
        let g = validate_gram(CMat::from_fn(4, 4, |i, j| coherent_overlap(amps[i], amps[j])))?;
        Ensemble::new(g, vec![0.25; 4], vec![1, 1, 2, 2])
    }
}

pub fn bb84_ensemble(mu: f64) -> Result<Ensemble> {
    CoherentSpec::new(mu)?.ensemble()
}

/// Optimal failure probability e^{−μ}(|cos μ| + |sin μ|).
pub fn bb84_analytic(mu: f64) -> f64 {
    (-mu).exp() * (mu.cos().abs() + mu.sin().abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bb84Point {
    pub mu: f64,
    pub f_scanned: f64,
    pub f_analytic: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl Bb84Point {
    pub fn relative_gap(&self) -> f64 {
        (self.f_scanned - self.f_analytic) / self.f_analytic
    }
}

/// Scanned two-mixture optimum against the analytic value at each μ.
pub fn bb84_curve(grid: &[f64], points: usize) -> Result<Vec<Bb84Point>> {
    grid.iter()
        .map(|&mu| {
            let ens = bb84_ensemble(mu)?;
            let (p, f) = scan_mixture(&ens, points)?;
            Ok(Bb84Point {
                mu,
                f_scanned: f,
                f_analytic: bb84_analytic(mu),
                omega1: p[0],
                omega2: p[1],
            })
        })
        .collect()
}
