#![allow(dead_code)]

use filterdisc::gram::{validate_gram, GramMatrix};
use filterdisc::linalg::{c, CMat, CVec};
use filterdisc::optics::unitarity_residual;
use filterdisc::povm::{failure_probability, verify_povm, zero_conditions, Ensemble};
use filterdisc::strategies::StrategyResult;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gram matrix of n random unit vectors in C^n, kept away from dependence.
pub fn random_gram(rng: &mut ChaCha8Rng, n: usize, real: bool) -> GramMatrix {
    loop {
        let vs: Vec<CVec> = (0..n)
            .map(|_| {
                let v = CVec::from_fn(n, |_, _| {
                    let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
                    c(rng.random_range(-1.0..1.0), im)
                });
                let norm = v.norm();
                v / c(norm, 0.0)
            })
            .collect();
        let mut g = CMat::from_fn(n, n, |i, j| vs[i].dotc(&vs[j]));
        for i in 0..n {
            g[(i, i)] = c(1.0, 0.0);
        }
        if let Ok(g) = validate_gram(g) {
            if filterdisc::linalg::min_eigenvalue(g.entries()) > 1e-3 {
                return g;
            }
        }
    }
}

pub fn random_priors(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn real_gram(n: usize, rows: &[f64]) -> GramMatrix {
    validate_gram(filterdisc::linalg::real_matrix(n, n, rows)).unwrap()
}

/// Validity, zero conditions, reported F, additivity and network agreement.
pub fn check_result(r: &StrategyResult, ens: &Ensemble, tol: f64) {
    let v = verify_povm(&r.povms).unwrap();
    assert!(v.completeness_residual <= tol, "completeness {}", v.completeness_residual);
    assert!(v.min_eigenvalue >= -tol, "min eigenvalue {}", v.min_eigenvalue);
    let z = zero_conditions(&r.povms, ens).unwrap();
    assert!(z.max_residual <= tol, "zero condition {}", z.max_residual);
    let f = failure_probability(&r.povms, ens);
    assert!((f - r.f_opt).abs() <= tol, "reported {} vs povm {}", r.f_opt, f);
    let sum: f64 = r.stage_failures.iter().sum();
    assert!((sum - r.f_opt).abs() <= 1e-12, "stage sum {} vs {}", sum, r.f_opt);
    assert!(unitarity_residual(&r.network) <= 1e-12);
    let from_net = r.povms_from_network(&r.network);
    let d = from_net.max_difference(&r.povms);
    assert!(d <= tol, "network povm differs by {d}");
}

/// Largest deviation over the reciprocal-basis identities, each checked
/// against plain matrix inversion or explicit vectors.
pub fn algebra_residual(o: &GramMatrix) -> f64 {
    use filterdisc::dtr::build_dtr;
    use filterdisc::gram::{derive, r_inverse, r_matrix, reciprocal_gram};
    use filterdisc::linalg::max_abs_diff;
    let n = o.n();
    let inv = o.entries().clone().try_inverse().unwrap();
    let d = derive(o);
    let mut worst = 0.0_f64;
    // t_j = 1/sqrt((O⁻¹)_jj) and o⊥_ij = (O⁻¹)_ij / sqrt((O⁻¹)_ii (O⁻¹)_jj)
    for j in 0..n {
        worst = worst.max((d.t[j] - 1.0 / inv[(j, j)].re.sqrt()).abs());
        for i in 0..n {
            let direct = inv[(i, j)] / (inv[(i, i)].re * inv[(j, j)].re).sqrt();
            worst = worst.max((d.recip_gram.get(i, j) - direct).norm());
        }
    }
    worst = worst.max((d.determinant - o.entries().determinant().re).abs());
    // double reciprocity
    worst = worst.max(max_abs_diff(reciprocal_gram(&d.recip_gram).entries(), o.entries()));
    let b = build_dtr(o).unwrap();
    worst = worst.max(max_abs_diff(&b.reconstructed_gram(), o.entries()));
    worst = worst.max(max_abs_diff(&b.reconstructed_recip_gram(), d.recip_gram.entries()));
    // ⟨Ψ⊥_j|Ψ_k⟩ = t_j δ_jk
    for j in 0..n {
        for k in 0..n {
            let expect = if j == k { d.t[j] } else { 0.0 };
            worst = worst.max((b.reciprocal(j).dotc(&b.state(k)) - c(expect, 0.0)).norm());
        }
    }
    // R Ψ⊥ = Ψ and R⁻¹ Ψ = Ψ⊥, row by row
    let (r, ri) = (r_matrix(o), r_inverse(o));
    worst = worst.max(max_abs_diff(&(&r * &ri), &CMat::identity(n, n)));
    for j in 0..n {
        let mut psi = CVec::zeros(n);
        let mut perp = CVec::zeros(n);
        for k in 0..n {
            psi += b.reciprocal(k) * r[(j, k)];
            perp += b.state(k) * ri[(j, k)];
        }
        worst = worst.max((psi - b.state(j)).norm()).max((perp - b.reciprocal(j)).norm());
    }
    worst
}

/// Largest deviation between the engine and the written-out small-N formulas.
pub fn closed_form_residual(o: &GramMatrix) -> f64 {
    use filterdisc::gram::derive;
    let d = derive(o);
    let g = |i: usize, j: usize| o.get(i - 1, j - 1);
    let mut worst = 0.0_f64;
    match o.n() {
        2 => {
            let det = 1.0 - g(1, 2).norm_sqr();
            worst = worst.max((d.determinant - det).abs());
            worst = worst.max((d.t[0] - det.sqrt()).abs()).max((d.t[1] - det.sqrt()).abs());
            worst = worst.max((d.recip_gram.get(0, 1) + g(1, 2)).norm());
            worst = worst.max((d.recip_gram.get(1, 0) + g(2, 1)).norm());
        }
        3 => {
            let a = [
                [
                    c(1.0 - g(2, 3).norm_sqr(), 0.0),
                    g(1, 3) * g(3, 2) - g(1, 2),
                    g(1, 2) * g(2, 3) - g(1, 3),
                ],
                [
                    g(2, 3) * g(3, 1) - g(2, 1),
                    c(1.0 - g(1, 3).norm_sqr(), 0.0),
                    g(2, 1) * g(1, 3) - g(2, 3),
                ],
                [
                    g(3, 2) * g(2, 1) - g(3, 1),
                    g(3, 1) * g(1, 2) - g(3, 2),
                    c(1.0 - g(1, 2).norm_sqr(), 0.0),
                ],
            ];
            let det = (c(1.0 - g(1, 2).norm_sqr() - g(1, 3).norm_sqr() - g(2, 3).norm_sqr(), 0.0)
                + g(1, 2) * g(2, 3) * g(3, 1)
                + g(2, 1) * g(1, 3) * g(3, 2))
            .re;
            worst = worst.max((d.determinant - det).abs());
            for i in 0..3 {
                worst = worst.max((d.t[i] - (det / a[i][i].re).sqrt()).abs());
                for j in 0..3 {
                    worst = worst.max((d.adjugate[(i, j)] - a[i][j]).norm());
                    let perp = a[i][j] / (a[i][i].re * a[j][j].re).sqrt();
                    worst = worst.max((d.recip_gram.get(i, j) - perp).norm());
                }
            }
        }
        _ => unreachable!("written-out formulas exist for N = 2, 3"),
    }
    worst
}

/// Grid scan plus refinement of a one-angle failure curve over [0, π/2].
pub fn scan_1d(f: impl Fn(f64) -> f64 + Sync) -> (f64, f64) {
    use filterdisc::optimizer::{minimize, ScanSpec};
    let spec = ScanSpec::new(vec![(0.0, std::f64::consts::FRAC_PI_2)], |p: &[f64]| f(p[0]));
    let (p, v) = minimize(&spec).unwrap();
    (p[0], v)
}

pub fn two_state_ensemble(eta1: f64, overlap: f64, phase: f64) -> Ensemble {
    let z = num_complex::Complex64::from_polar(overlap, phase);
    let g = validate_gram(CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => z,
        (1, 0) => z.conj(),
        _ => c(1.0, 0.0),
    }))
    .unwrap();
    Ensemble::pure_states(g, vec![eta1, 1.0 - eta1]).unwrap()
}
