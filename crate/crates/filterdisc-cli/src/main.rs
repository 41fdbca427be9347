use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use filterdisc::optics;
use filterdisc::strategies::bb84_curve;
use filterdisc::textfmt::sig12;

use filterdisc_cli::{problem, report};

#[derive(Parser)]
#[command(name = "filterdisc", version, about = "Unambiguous state discrimination by successive filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a strategy and write a JSON report.
    Design {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design a strategy and report only its validity residuals.
    Verify {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo detector counts against the analytic probabilities.
    Simulate {
        problem: PathBuf,
        #[arg(long)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the interferometer layout of the designed strategy.
    EmitNetwork {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scanned versus analytic failure for BB84 coherent states.
    Bb84 {
        #[arg(long)]
        mu_min: f64,
        #[arg(long)]
        mu_max: f64,
        #[arg(long)]
        points: usize,
        /// Scan grid points per angle.
        #[arg(long, default_value_t = problem::DEFAULT_POINTS)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Validity(String),
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = out else {
        print!("{text}");
        return Ok(());
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn load(path: &Path) -> Result<problem::Problem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    problem::parse(&text).map_err(|e| Failure::Input(e.display(&path.display().to_string())))
}

fn json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn engine(e: filterdisc::Error) -> Failure {
    Failure::Input(e.to_string())
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Design { problem, out } => {
            let p = load(&problem)?;
            let rep = report::design_report(p.strategy.name(), &p.ensemble, &p.result).map_err(engine)?;
            write_output(out.as_deref(), &json(&rep))?;
            if !rep.validity.passed {
                return Err(Failure::Validity("design failed validity checks".into()));
            }
        }
        Command::Verify { problem, out } => {
            let p = load(&problem)?;
            let validity = report::validity(&p.ensemble, &p.result).map_err(engine)?;
            let passed = validity.passed;
            let rep = report::ResidualReport {
                strategy: p.strategy.name().to_string(),
                f_opt: filterdisc::textfmt::round12(p.result.f_opt),
                validity,
            };
            write_output(out.as_deref(), &json(&rep))?;
            if !passed {
                return Err(Failure::Validity("design failed validity checks".into()));
            }
        }
        Command::Simulate { problem, shots, seed, out } => {
            let p = load(&problem)?;
            let mc = optics::monte_carlo(&p.result.network, &p.ensemble, shots, seed);
            write_output(out.as_deref(), &report::simulation_table(&mc, &p.result))?;
        }
        Command::EmitNetwork { problem, out } => {
            let p = load(&problem)?;
            let layout = optics::to_layout_in_frame(&p.result.network, p.result.network_frame.as_ref());
            write_output(out.as_deref(), &layout)?;
        }
        Command::Bb84 {
            mu_min,
            mu_max,
            points,
            grid,
            out,
        } => {
            if !(mu_min > 0.0 && mu_min < mu_max && mu_max.is_finite()) {
                return Err(engine(filterdisc::Error::InvalidRange(format!(
                    "need 0 < mu-min < mu-max, got {mu_min}, {mu_max}"
                ))));
            }
            if points == 0 || grid < 2 {
                return Err(engine(filterdisc::Error::InvalidRange(
                    "points must be positive and grid at least 2".into(),
                )));
            }
            let mus: Vec<f64> = if points == 1 {
                vec![mu_min]
            } else {
                (0..points)
                    .map(|i| mu_min + (mu_max - mu_min) * i as f64 / (points - 1) as f64)
                    .collect()
            };
            let curve = bb84_curve(&mus, grid).map_err(engine)?;
            let mut text = String::from("mu\tf_scanned\tf_analytic\tgap\tomega1\tomega2\n");
            for pt in &curve {
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    sig12(pt.mu),
                    sig12(pt.f_scanned),
                    sig12(pt.f_analytic),
                    sig12(pt.relative_gap()),
                    sig12(pt.omega1),
                    sig12(pt.omega2)
                ));
            }
            write_output(out.as_deref(), &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
