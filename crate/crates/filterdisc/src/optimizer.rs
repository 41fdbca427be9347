//! Deterministic low-dimensional minimisation: a dense grid scan followed by
//! golden-section refinement (coordinate-wise in two dimensions).

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-7;
const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_SWEEPS: usize = 400;

pub struct ScanSpec<F> {
    pub ranges: Vec<(f64, f64)>,
    pub coarse_points: Vec<usize>,
    pub refine_tol: f64,
    pub objective: F,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub params: Vec<f64>,
    pub value: f64,
    /// Objective values in row-major order (first axis slowest).
    pub samples: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScanSpec<F> {
    pub fn new(ranges: Vec<(f64, f64)>, objective: F) -> Self {
        let coarse_points = vec![DEFAULT_POINTS; ranges.len()];
        ScanSpec {
            ranges,
            coarse_points,
            refine_tol: DEFAULT_TOL,
            objective,
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.coarse_points = vec![points; self.ranges.len()];
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        let d = self.ranges.len();
        if d == 0 || d > 2 || self.coarse_points.len() != d {
            return Err(Error::InvalidRange(format!("scan supports 1 or 2 dimensions, got {d}")));
        }
        for (&(lo, hi), &n) in self.ranges.iter().zip(&self.coarse_points) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidRange(format!("[{lo}, {hi}]")));
            }
            if n < 8 {
                return Err(Error::InvalidRange(format!("{n} grid points is below the minimum of 8")));
            }
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::InvalidRange(format!("refine tolerance {}", self.refine_tol)));
        }
        Ok(())
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.ranges[axis];
        if i + 1 == self.coarse_points[axis] {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (self.coarse_points[axis] - 1) as f64
        }
    }

    fn step(&self, axis: usize) -> f64 {
        let (lo, hi) = self.ranges[axis];
        (hi - lo) / (self.coarse_points[axis] - 1) as f64
    }

    fn point(&self, k: usize) -> Vec<f64> {
        match self.ranges.len() {
            1 => vec![self.coord(0, k)],
            _ => {
                let m = self.coarse_points[1];
                vec![self.coord(0, k / m), self.coord(1, k % m)]
            }
        }
    }
}

pub fn scan<F: Fn(&[f64]) -> f64 + Sync>(spec: &ScanSpec<F>) -> Result<ScanResult> {
    spec.validate()?;
    let total: usize = spec.coarse_points.iter().product();
    let samples: Vec<f64> = (0..total).into_par_iter().map(|k| (spec.objective)(&spec.point(k))).collect();
    let mut best = 0;
    for (k, v) in samples.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective(spec.point(k)));
        }
        if *v < samples[best] {
            best = k;
        }
    }
    Ok(ScanResult {
        params: spec.point(best),
        value: samples[best],
        samples,
    })
}

/// Golden-section search of `f` on [a, b]; returns the best point seen.
fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fd < fc { (d, fd) } else { (c, fc) };
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    if fm < best.1 {
        best = (mid, fm);
    }
    best
}

pub fn refine<F: Fn(&[f64]) -> f64 + Sync>(spec: &ScanSpec<F>, start: &[f64]) -> Result<(Vec<f64>, f64)> {
    spec.validate()?;
    if start.len() != spec.ranges.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.ranges.len(),
            got: start.len(),
        });
    }
    let tol = spec.refine_tol;
    let mut p = start.to_vec();
    let mut fp = (spec.objective)(&p);
    if !fp.is_finite() {
        return Err(Error::NonFiniteObjective(p));
    }
    let dims = p.len();
    let mut half: Vec<f64> = (0..dims).map(|a| spec.step(a)).collect();

    let line = |p: &Vec<f64>, fp: f64, axis: usize, h: f64| -> (Vec<f64>, f64) {
        let (lo, hi) = spec.ranges[axis];
        let a = (p[axis] - h).max(lo);
        let b = (p[axis] + h).min(hi);
        let g = |x: f64| {
            let mut q = p.clone();
            q[axis] = x;
            let v = (spec.objective)(&q);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };
        let (x, fx) = golden(&g, a, b, tol);
        if fx < fp {
            let mut q = p.clone();
            q[axis] = x;
            (q, fx)
        } else {
            (p.clone(), fp)
        }
    };

    for _ in 0..MAX_SWEEPS {
        let prev = p.clone();
        for axis in 0..dims {
            let (q, fq) = line(&p, fp, axis, half[axis]);
            p = q;
            fp = fq;
        }
        // pattern move along the last sweep's displacement
        let trial: Vec<f64> = (0..dims)
            .map(|a| (2.0 * p[a] - prev[a]).clamp(spec.ranges[a].0, spec.ranges[a].1))
            .collect();
        let ft = if dims > 1 { (spec.objective)(&trial) } else { f64::INFINITY };
        if ft.is_finite() && ft < fp {
            p = trial;
            fp = ft;
        }
        let moved: Vec<f64> = (0..dims).map(|a| (p[a] - prev[a]).abs()).collect();
        if moved.iter().all(|&m| m < 0.5 * tol) {
            break;
        }
        for a in 0..dims {
            let (lo, hi) = spec.ranges[a];
            half[a] = (4.0 * moved[a]).clamp(8.0 * tol, hi - lo);
        }
    }
    Ok((p, fp))
}

/// Scan followed by refinement from the best grid point.
pub fn minimize<F: Fn(&[f64]) -> f64 + Sync>(spec: &ScanSpec<F>) -> Result<(Vec<f64>, f64)> {
    let s = scan(spec)?;
    refine(spec, &s.params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn scan_sin_squared() {
        let spec = ScanSpec::new(vec![(0.0, PI)], |p: &[f64]| p[0].sin().powi(2));
        let r = scan(&spec).unwrap();
        assert_eq!(r.params, vec![0.0]);
        assert!(r.value.abs() < 1e-30);
        assert_eq!(r.samples.len(), 512);
    }

    #[test]
    fn constant_objective_returns_lower_corner() {
        let spec = ScanSpec::new(vec![(0.5, 1.0), (-2.0, 3.0)], |_: &[f64]| 1.0).with_points(16);
        assert_eq!(scan(&spec).unwrap().params, vec![0.5, -2.0]);
        let flat = ScanSpec::new(vec![(0.0, 2.0)], |_: &[f64]| 3.0);
        assert_eq!(refine(&flat, &[1.3]).unwrap().0, vec![1.3]);
    }

    #[test]
    fn quadratic_refinement() {
        let spec = ScanSpec::new(vec![(0.0, 2.0)], |p: &[f64]| (p[0] - 1.0).powi(2));
        let (p, v) = refine(&spec, &[0.9]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-7 && v <= 0.01, "{p:?}");
        let (p2, _) = minimize(&spec).unwrap();
        assert!((p2[0] - 1.0).abs() < 1e-7, "{p2:?}");
    }

    #[test]
    fn two_dimensional_valley() {
        let f = |p: &[f64]| (p[0] - 0.3).powi(2) + 10.0 * (p[1] - p[0] - 0.1).powi(2);
        let spec = ScanSpec::new(vec![(0.0, 1.0), (0.0, 1.0)], f).with_points(64);
        let (p, v) = minimize(&spec).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-6 && (p[1] - 0.4).abs() < 1e-6 && v < 1e-12, "{p:?}");
    }

    #[test]
    fn errors() {
        let nan = ScanSpec::new(vec![(0.0, 1.0)], |p: &[f64]| if p[0] > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(scan(&nan), Err(Error::NonFiniteObjective(_))));
        let few = ScanSpec::new(vec![(0.0, 1.0)], |_: &[f64]| 0.0).with_points(4);
        assert!(matches!(scan(&few), Err(Error::InvalidRange(_))));
        let empty = ScanSpec::new(vec![(1.0, 1.0)], |_: &[f64]| 0.0);
        assert!(matches!(scan(&empty), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn deterministic() {
        let f = |p: &[f64]| (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + 0.1 * p[0];
        let spec = ScanSpec::new(vec![(0.0, 3.0), (0.0, 3.0)], f).with_points(100);
        let a = minimize(&spec).unwrap();
        let b = minimize(&spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}
