use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use filterdisc::optics::{extract_povms, from_layout, layout_frame};
use filterdisc_cli::{problem, report};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filterdisc"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TWO_STATE: &str = "strategy = \"two-state\"\npriors = [0.5, 0.5]\ngram = [[1, 0.6], [0.6, 1]]\n";

const THREE_STATE: &str = r#"
strategy = "three-state"
priors = [0.4, 0.35, 0.25]
gram = [[1, [0.3, 0.1], 0.2], [[0.3, -0.1], 1, 0.25], [0.2, 0.25, 1]]
points = 64
"#;

const MIXTURE: &str = r#"
strategy = "four-mixture"
priors = [0.25, 0.25, 0.25, 0.25]
gram = [[1, 0.2, 0.3, 0.1], [0.2, 1, 0.15, 0.25], [0.3, 0.15, 1, 0.2], [0.1, 0.25, 0.2, 1]]
groups = [1, 2, 1, 2]
points = 64
"#;

fn design_json(dir: &TempDir, text: &str) -> serde_json::Value {
    let p = write(dir, "p.toml", text);
    let out = dir.path().join("report.json");
    let o = run(&["design", path(&p), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn two_state_report() {
    let dir = TempDir::new().unwrap();
    let r = design_json(&dir, TWO_STATE);
    assert!((r["f_opt"].as_f64().unwrap() - 0.6).abs() < 1e-10);
    assert!(r["regimes"][0].as_str().unwrap().contains("interior"));
    assert!((r["gram"]["determinant"].as_f64().unwrap() - 0.64).abs() < 1e-12);
    assert!((r["gram"]["t"][0].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert_eq!(r["validity"]["passed"], true);
    let labels: Vec<&str> = r["povms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["identify-1", "identify-2", "fail"]);
}

#[test]
fn reciprocal_coefficients_rebuild_elements() {
    // E = Σ K_ij |Ψ⊥_i⟩⟨Ψ⊥_j|; for two states E_1 ∝ |Ψ⊥_1⟩⟨Ψ⊥_1| so K is diagonal-only in (1,1)
    let dir = TempDir::new().unwrap();
    let r = design_json(&dir, TWO_STATE);
    let k = &r["povms"][0]["reciprocal_coefficients"];
    assert!(k[0][0][0].as_f64().unwrap() > 0.0);
    for (i, j) in [(0, 1), (1, 0), (1, 1)] {
        assert!(k[i][j][0].as_f64().unwrap().abs() < 1e-10 && k[i][j][1].as_f64().unwrap().abs() < 1e-10);
    }
}

#[test]
fn orthogonal_states_never_fail() {
    let dir = TempDir::new().unwrap();
    let text = "strategy = \"filter\"\npriors = [0.2, 0.3, 0.5]\nstates = [[1, 0, 0], [0, 1, 0], [0, 0, [0, 1]]]\n";
    let r = design_json(&dir, text);
    assert!(r["f_opt"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn unit_overlap_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "p.toml",
        "strategy = \"two-state\"\npriors = [0.5, 0.5]\ngram = [[1, 1], [1, 1]]\n",
    );
    let o = run(&["design", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p.toml:3:") && err.contains("not below 1"), "{err}");
}

#[test]
fn input_errors_are_line_anchored() {
    let cases = [
        ("strategy = \"two-state\"\npriors = [0.5, 0.5]\ncolour = 1\n", ":3:"),
        (
            "strategy = \"two-state\"\npriors = [0.5, 0.4]\ngram = [[1, 0.5], [0.5, 1]]\n",
            ":2:",
        ),
        ("strategy = \"warp\"\npriors = [0.5, 0.5]\ngram = [[1, 0.5], [0.5, 1]]\n", ":1:"),
        (
            "strategy = \"two-state\"\npriors = [0.5, 0.5]\nstates = [[1, 0], [0.6, 0.6]]\n",
            ":3:",
        ),
        (
            "strategy = \"two-state\"\npriors = [0.5, 0.5]\ngram = [[1, 0.5], [0.5, 1]]\nstates = [[1, 0], [0, 1]]\n",
            ":3:",
        ),
    ];
    let dir = TempDir::new().unwrap();
    for (text, anchor) in cases {
        let p = write(&dir, "p.toml", text);
        let o = run(&["design", path(&p)]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(anchor), "{text} -> {err}");
    }
}

#[test]
fn priors_close_to_one_are_renormalized() {
    let text = "strategy = \"two-state\"\npriors = [0.5000004, 0.5]\ngram = [[1, 0.6], [0.6, 1]]\n";
    let p = problem::parse(text).unwrap();
    assert!((p.ensemble.priors.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn states_and_gram_give_the_same_design() {
    let s = 0.6f64;
    let states = format!(
        "strategy = \"two-state\"\npriors = [0.3, 0.7]\nstates = [[1, 0], [{s}, {}]]\n",
        (1.0 - s * s).sqrt()
    );
    let gram = "strategy = \"two-state\"\npriors = [0.3, 0.7]\ngram = [[1, 0.6], [0.6, 1]]\n";
    let a = problem::parse(&states).unwrap();
    let b = problem::parse(gram).unwrap();
    assert!((a.result.f_opt - b.result.f_opt).abs() < 1e-12);
    assert!(a.result.povms.max_difference(&b.result.povms) < 1e-10);
}

#[test]
fn report_f_matches_serialized_povms() {
    let texts = [
        TWO_STATE,
        THREE_STATE,
        MIXTURE,
        "strategy = \"jordan\"\nthetas = [0.7, 1.1]\npriors = [0.3, 0.2, 0.25, 0.25]\n",
        "strategy = \"background\"\npriors = [0.5, 0.3, 0.2]\ngram = [[1, 0.4, 0.3], [0.4, 1, 0.2], [0.3, 0.2, 1]]\nbackground = 3\n",
        "strategy = \"pipeline\"\npriors = [0.3, 0.3, 0.4]\ngram = [[1, 0.4, 0.3], [0.4, 1, 0.2], [0.3, 0.2, 1]]\n\n[[stages]]\ntarget = [1]\n\n[[stages]]\ntarget = [2]\n",
        "strategy = \"bb84\"\nmu = 1.0\npoints = 64\n",
    ];
    let dir = TempDir::new().unwrap();
    for text in texts {
        let r = design_json(&dir, text);
        let p = problem::parse(text).unwrap();
        let f = report::failure_from_report(&r, &p.ensemble).unwrap();
        assert!((f - r["f_opt"].as_f64().unwrap()).abs() < 1e-10, "{text}");
        let total: f64 = r["stage_failures"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((total - r["f_opt"].as_f64().unwrap()).abs() < 1e-10, "{text}");
    }
}

#[test]
fn emitted_network_reproduces_report_povms() {
    let dir = TempDir::new().unwrap();
    for text in [TWO_STATE, THREE_STATE, MIXTURE] {
        let r = design_json(&dir, text);
        let p = write(&dir, "p.toml", text);
        let out = dir.path().join("net.tsv");
        assert!(run(&["emit-network", path(&p), "--out", path(&out)]).status.success());
        let layout = std::fs::read_to_string(&out).unwrap();
        let net = from_layout(&layout).unwrap();
        let mut povms = extract_povms(&net);
        if let Some(w) = layout_frame(&layout).unwrap() {
            povms = povms.transformed(&w);
        }
        let reported = report::povms_from_json(r["povms"].as_array().unwrap()).unwrap();
        assert!(povms.max_difference(&reported) < 1e-10, "{text}");
    }
}

#[test]
fn filter_layout_structure() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "p.toml",
        "strategy = \"filter\"\npriors = [0.5, 0.5]\ngram = [[1, 0.5], [0.5, 1]]\n",
    );
    let o = run(&["emit-network", path(&p)]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("\tBS\t")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("port\t")).count(), 3);
}

#[test]
fn simulate_is_deterministic_and_within_band() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.toml", TWO_STATE);
    let a = run(&["simulate", path(&p), "--shots", "100000", "--seed", "7"]);
    let b = run(&["simulate", path(&p), "--shots", "100000", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let (mut fails, mut shots) = (0u64, 0u64);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        let count: u64 = f[2].parse().unwrap();
        shots += count;
        if f[1] == "fail" {
            fails += count;
        }
        let z: f64 = f[5].parse().unwrap();
        assert!(z.abs() < 5.0, "{line}");
    }
    assert_eq!(shots, 100000);
    let emp = fails as f64 / shots as f64;
    let sd = (0.6 * 0.4 / shots as f64).sqrt();
    assert!((emp - 0.6).abs() < 4.0 * sd);
}

#[test]
fn zero_shots_prints_header_only() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.toml", TWO_STATE);
    let o = run(&["simulate", path(&p), "--shots", "0"]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "state\toutcome\tcount\tempirical\tanalytic\tz\n"
    );
}

#[test]
fn verify_reports_residuals() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.toml", THREE_STATE);
    let o = run(&["verify", path(&p)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["validity"]["passed"], true);
    assert!(v.get("povms").is_none());
}

#[test]
fn bb84_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bb84.tsv");
    let half_pi = std::f64::consts::FRAC_PI_2.to_string();
    let o = run(&[
        "bb84",
        "--mu-min",
        "0.05",
        "--mu-max",
        &half_pi,
        "--points",
        "2",
        "--grid",
        "128",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!((rows[0][2] - 0.998).abs() < 1e-3);
    assert!((rows[1][2] - 0.207880).abs() < 1e-6);
    for r in &rows {
        assert!(r[1] >= r[2] - 1e-6);
    }
}

#[test]
fn bb84_rejects_bad_range() {
    for (lo, hi) in [("0", "1"), ("2", "1"), ("-1", "1")] {
        let o = run(&["bb84", &format!("--mu-min={lo}"), &format!("--mu-max={hi}"), "--points", "3"]);
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains("invalid range"));
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["design"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["design", "/nonexistent/p.toml"]).status.code(), Some(1));
}
