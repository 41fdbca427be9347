//! JSON design reports and the simulation table.

use filterdisc::gram::{derive, GramMatrix};
use filterdisc::linalg::CMat;
use filterdisc::optics::{self, McCounts};
use filterdisc::povm::{failure_probability, verify_povm, zero_conditions, Ensemble, Outcome, PovmSet};
use filterdisc::strategies::StrategyResult;
use filterdisc::textfmt::{round12, sig12};
use filterdisc::Result;
use serde::Serialize;

pub const NETWORK_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-12;

/// Complex matrix as rows of `[re, im]` pairs.
type JsonMat = Vec<Vec<[f64; 2]>>;

fn mat(m: &CMat) -> JsonMat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [round12(m[(i, j)].re), round12(m[(i, j)].im)]).collect())
        .collect()
}

#[derive(Debug, Serialize)]
pub struct GramReport {
    pub matrix: JsonMat,
    pub determinant: f64,
    pub t: Vec<f64>,
    pub reciprocal_gram: JsonMat,
}

#[derive(Debug, Serialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct PovmReport {
    pub label: String,
    /// Matrix over the DTR basis {e_j}.
    pub matrix: JsonMat,
    /// K with E = Σ K_ij |Ψ⊥_i⟩⟨Ψ⊥_j|.
    pub reciprocal_coefficients: JsonMat,
}

#[derive(Debug, Serialize)]
pub struct Validity {
    pub completeness_residual: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
    pub max_detection_eigenvalue: f64,
    pub zero_condition_residual: f64,
    pub network_povm_difference: f64,
    pub unitarity_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub strategy: String,
    pub n: usize,
    pub gram: GramReport,
    pub regimes: Vec<String>,
    pub params: Vec<Param>,
    pub f_opt: f64,
    pub stage_failures: Vec<f64>,
    pub povms: Vec<PovmReport>,
    pub validity: Validity,
}

#[derive(Debug, Serialize)]
pub struct ResidualReport {
    pub strategy: String,
    pub f_opt: f64,
    pub validity: Validity,
}

fn gram_report(g: &GramMatrix) -> GramReport {
    let d = derive(g);
    GramReport {
        matrix: mat(g.entries()),
        determinant: round12(d.determinant),
        t: d.t.iter().map(|&x| round12(x)).collect(),
        reciprocal_gram: mat(d.recip_gram.entries()),
    }
}

/// B⁻¹ M B⁻† where the columns of B are the reciprocal states over {e_j}.
fn reciprocal_coefficients(m: &CMat, ens: &Ensemble) -> CMat {
    let b_inv = ens.dtr.c_perp.transpose().try_inverse().expect("reciprocal states are a basis");
    &b_inv * m * b_inv.adjoint()
}

pub fn validity(ens: &Ensemble, r: &StrategyResult) -> Result<Validity> {
    let v = verify_povm(&r.povms)?;
    let z = zero_conditions(&r.povms, ens)?;
    let net_diff = r.povms_from_network(&r.network).max_difference(&r.povms);
    let unitarity = optics::unitarity_residual(&r.network);
    Ok(Validity {
        completeness_residual: round12(v.completeness_residual),
        min_eigenvalue: round12(v.min_eigenvalue),
        hermiticity_residual: round12(v.hermiticity_residual),
        max_detection_eigenvalue: round12(v.max_detection_eigenvalue),
        zero_condition_residual: round12(z.max_residual),
        network_povm_difference: round12(net_diff),
        unitarity_residual: round12(unitarity),
        passed: v.passed && z.passed && net_diff <= NETWORK_TOL && unitarity <= UNITARITY_TOL,
    })
}

pub fn design_report(strategy: &str, ens: &Ensemble, r: &StrategyResult) -> Result<Report> {
    Ok(Report {
        strategy: strategy.to_string(),
        n: ens.n(),
        gram: gram_report(&ens.gram),
        regimes: r.regime_notes.clone(),
        params: r
            .params
            .iter()
            .map(|(name, value)| Param {
                name: name.clone(),
                value: round12(*value),
            })
            .collect(),
        f_opt: round12(r.f_opt),
        stage_failures: r.stage_failures.iter().map(|&x| round12(x)).collect(),
        povms: r
            .povms
            .elements
            .iter()
            .map(|e| PovmReport {
                label: e.label.to_string(),
                matrix: mat(&e.matrix),
                reciprocal_coefficients: mat(&reciprocal_coefficients(&e.matrix, ens)),
            })
            .collect(),
        validity: validity(ens, r)?,
    })
}

/// Rebuilds a POVM set from report entries.
pub fn povms_from_json(povms: &[serde_json::Value]) -> Option<PovmSet> {
    use filterdisc::linalg::c;
    use filterdisc::povm::PovmElement;
    let elements = povms
        .iter()
        .map(|p| {
            let label: Outcome = p["label"].as_str()?.parse().ok()?;
            let rows = p["matrix"].as_array()?;
            let n = rows.len();
            let mut m = CMat::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, z) in row.as_array()?.iter().enumerate() {
                    m[(i, j)] = c(z[0].as_f64()?, z[1].as_f64()?);
                }
            }
            Some(PovmElement { label, matrix: m })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(PovmSet::from_elements(elements))
}

/// Recomputes F from serialized POVMs; used to guard against report drift.
pub fn failure_from_report(json: &serde_json::Value, ens: &Ensemble) -> Option<f64> {
    let set = povms_from_json(json["povms"].as_array()?)?;
    Some(failure_probability(&set, ens))
}

/// One row per state and outcome: counts, empirical and analytic
/// probabilities, and the binomial z-score of the difference.
pub fn simulation_table(mc: &McCounts, r: &StrategyResult) -> String {
    let mut out = String::from("state\toutcome\tcount\tempirical\tanalytic\tz\n");
    if mc.shots == 0 {
        return out;
    }
    let table = optics::outcome_table(&r.network);
    let labels = optics::port_labels(&r.network);
    for (j, row) in mc.counts.iter().enumerate() {
        let n_j: u64 = row.iter().sum();
        for (k, &count) in row.iter().enumerate() {
            let label = mc.labels[k];
            let li = labels.iter().position(|l| *l == label).expect("labels come from the same network");
            let p = if table[j][li] < optics::MC_ZERO { 0.0 } else { table[j][li] };
            let empirical = if n_j == 0 { 0.0 } else { count as f64 / n_j as f64 };
            let sd = (p * (1.0 - p) / n_j.max(1) as f64).sqrt();
            let z = if sd > 0.0 { (empirical - p) / sd } else { 0.0 };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                j + 1,
                label,
                count,
                sig12(empirical),
                sig12(p),
                sig12(z)
            ));
        }
    }
    out
}
