//! Problem files: TOML with the states or their Gram matrix, priors and the
//! strategy to run. Complex numbers are written as `[re, im]` or a bare real.

use filterdisc::gram::validate_gram;
use filterdisc::linalg::{c, CMat, CVec};
use filterdisc::povm::Ensemble;
use filterdisc::strategies::{self as st, JordanSpec, StageSpec, StrategyResult};
use filterdisc::Error;
use num_complex::Complex64;
use serde::Deserialize;

pub const DEFAULT_POINTS: usize = 512;
const PRIOR_RENORM_TOL: f64 = 1e-6;
const STATE_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Cplx {
    Real(f64),
    Pair([f64; 2]),
}

impl Cplx {
    fn value(self) -> Complex64 {
        match self {
            Cplx::Real(x) => c(x, 0.0),
            Cplx::Pair([re, im]) => c(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFile {
    /// 1-based state indices.
    pub target: Vec<usize>,
    #[serde(default)]
    pub background: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub strategy: String,
    pub priors: Option<Vec<f64>>,
    pub states: Option<Vec<Vec<Cplx>>>,
    pub gram: Option<Vec<Vec<Cplx>>>,
    pub groups: Option<Vec<usize>>,
    /// Fixed angles; the strategy is optimized when absent.
    pub omega: Option<Vec<f64>>,
    /// 1-based index of the background state.
    pub background: Option<usize>,
    pub thetas: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub stages: Option<Vec<StageFile>>,
    /// Grid points per axis for scanned strategies.
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Filter,
    TwoState,
    Background,
    Jordan,
    ThreeState,
    FourMixture,
    Pipeline,
    Bb84,
}

impl Strategy {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "filter" => Strategy::Filter,
            "two-state" => Strategy::TwoState,
            "background" => Strategy::Background,
            "jordan" => Strategy::Jordan,
            "three-state" => Strategy::ThreeState,
            "four-mixture" => Strategy::FourMixture,
            "pipeline" => Strategy::Pipeline,
            "bb84" => Strategy::Bb84,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Filter => "filter",
            Strategy::TwoState => "two-state",
            Strategy::Background => "background",
            Strategy::Jordan => "jordan",
            Strategy::ThreeState => "three-state",
            Strategy::FourMixture => "four-mixture",
            Strategy::Pipeline => "pipeline",
            Strategy::Bb84 => "bb84",
        }
    }
}

/// Input error with the line of the offending key when it can be found.
#[derive(Debug)]
pub struct InputError {
    pub line: Option<usize>,
    pub message: String,
}

impl InputError {
    pub fn display(&self, path: &str) -> String {
        match self.line {
            Some(l) => format!("{path}:{l}: {}", self.message),
            None => format!("{path}: {}", self.message),
        }
    }
}

pub struct Problem {
    pub strategy: Strategy,
    pub ensemble: Ensemble,
    pub result: StrategyResult,
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> InputError {
        InputError {
            line: line_of(self.text, key),
            message: message.into(),
        }
    }

    /// Attaches an engine error to the key it most likely came from.
    fn engine(&self, e: Error, state_key: &str) -> InputError {
        let key = match &e {
            Error::NotSquare { .. }
            | Error::NotHermitian { .. }
            | Error::NonUnitDiagonal { .. }
            | Error::OverlapOutOfRange { .. }
            | Error::LinearlyDependent { .. }
            | Error::NumericalBreakdown { .. } => state_key,
            Error::InvalidPriors(_) => "priors",
            Error::InvalidTheta(_) => "thetas",
            Error::GroupingError(_) => "groups",
            Error::InconsistentStaging(_) => "stages",
            Error::InvalidOmega(_) => "omega",
            Error::InvalidRange(_) => "mu",
            _ => "strategy",
        };
        self.err(key, e.to_string())
    }
}

fn gram_from_states(ctx: &Ctx, states: &[Vec<Cplx>]) -> Result<CMat, InputError> {
    let dim = states.first().map(|s| s.len()).unwrap_or(0);
    if dim == 0 || states.iter().any(|s| s.len() != dim) {
        return Err(ctx.err("states", "states must be non-empty vectors of one common dimension"));
    }
    let mut vs = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let v = CVec::from_iterator(dim, s.iter().map(|z| z.value()));
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(ctx.err("states", format!("state {} has norm {norm}, expected 1", i + 1)));
        }
        vs.push(v / c(norm, 0.0));
    }
    let n = vs.len();
    let mut g = CMat::from_fn(n, n, |i, j| vs[i].dotc(&vs[j]));
    for i in 0..n {
        g[(i, i)] = c(1.0, 0.0);
    }
    Ok(g)
}

fn priors(ctx: &Ctx, raw: Option<&Vec<f64>>, n: usize) -> Result<Vec<f64>, InputError> {
    let p = raw.ok_or_else(|| ctx.err("strategy", "missing priors"))?;
    if p.len() != n {
        return Err(ctx.err("priors", format!("priors has {} entries, expected {n}", p.len())));
    }
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(ctx.err("priors", "priors must be finite and non-negative"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PRIOR_RENORM_TOL {
        return Err(ctx.err("priors", format!("priors sum to {total}, not 1")));
    }
    Ok(p.iter().map(|x| x / total).collect())
}

fn to_zero_based(ctx: &Ctx, key: &str, idx: &[usize], n: usize) -> Result<Vec<usize>, InputError> {
    idx.iter()
        .map(|&i| {
            if i >= 1 && i <= n {
                Ok(i - 1)
            } else {
                Err(ctx.err(key, format!("state index {i} is outside 1..={n}")))
            }
        })
        .collect()
}

fn angles(ctx: &Ctx, omega: &Option<Vec<f64>>, expected: usize) -> Result<Option<Vec<f64>>, InputError> {
    match omega {
        None => Ok(None),
        Some(w) if w.len() == expected => Ok(Some(w.clone())),
        Some(w) => Err(ctx.err("omega", format!("omega has {} entries, expected {expected}", w.len()))),
    }
}

pub fn parse(text: &str) -> Result<Problem, InputError> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        InputError {
            line,
            message: e.message().to_string(),
        }
    })?;
    build(text, file)
}

fn build(text: &str, f: ProblemFile) -> Result<Problem, InputError> {
    let ctx = Ctx { text };
    let strategy = Strategy::parse(&f.strategy).ok_or_else(|| ctx.err("strategy", format!("unknown strategy '{}'", f.strategy)))?;
    let points = f.points.unwrap_or(DEFAULT_POINTS);
    if points < 2 {
        return Err(ctx.err("points", "points must be at least 2"));
    }
    let engine = |e: Error| ctx.engine(e, if f.states.is_some() { "states" } else { "gram" });
    let uses_states = !matches!(strategy, Strategy::Jordan | Strategy::Bb84);
    if uses_states {
        match (&f.states, &f.gram) {
            (Some(_), Some(_)) => return Err(ctx.err("gram", "give either states or gram, not both")),
            (None, None) => return Err(ctx.err("strategy", "missing states or gram")),
            _ => {}
        }
    } else if f.states.is_some() || f.gram.is_some() {
        let key = if f.states.is_some() { "states" } else { "gram" };
        return Err(ctx.err(
            key,
            format!("{} problems are defined by their parameters, not by states", strategy.name()),
        ));
    }
    let ensemble_with = |groups: Vec<usize>| -> Result<Ensemble, InputError> {
        let raw = match (&f.states, &f.gram) {
            (Some(s), _) => gram_from_states(&ctx, s)?,
            (_, Some(g)) => {
                let n = g.len();
                if g.iter().any(|row| row.len() != n) {
                    return Err(ctx.err("gram", "gram must be a square list of rows"));
                }
                CMat::from_fn(n, n, |i, j| g[i][j].value())
            }
            _ => unreachable!(),
        };
        let gram = validate_gram(raw).map_err(engine)?;
        let n = gram.n();
        let priors = priors(&ctx, f.priors.as_ref(), n)?;
        let groups = match &f.groups {
            Some(g) if g.len() != n => return Err(ctx.err("groups", format!("groups has {} entries, expected {n}", g.len()))),
            Some(g) => g.clone(),
            None => groups,
        };
        Ensemble::new(gram, priors, groups).map_err(engine)
    };
    let n_states = match (&f.states, &f.gram) {
        (Some(s), _) => s.len(),
        (_, Some(g)) => g.len(),
        _ => 0,
    };
    let pure: Vec<usize> = (1..=n_states).collect();
    let (ensemble, result) = match strategy {
        Strategy::Filter => {
            let ens = ensemble_with((0..n_states).map(|i| if i == 0 { 1 } else { 2 }).collect())?;
            let w = angles(&ctx, &f.omega, 1)?;
            let r = st::filter_strategy(&ens, w.map(|w| w[0])).map_err(engine)?;
            (ens, r)
        }
        Strategy::TwoState => {
            let ens = ensemble_with(pure)?;
            let w = angles(&ctx, &f.omega, 1)?;
            let r = st::two_state_strategy(&ens, w.map(|w| w[0])).map_err(engine)?;
            (ens, r)
        }
        Strategy::Background => {
            let ens = ensemble_with(pure)?;
            let b = f
                .background
                .ok_or_else(|| ctx.err("strategy", "background strategy needs `background`"))?;
            let b = to_zero_based(&ctx, "background", &[b], ens.n())?[0];
            let r = match angles(&ctx, &f.omega, 1)? {
                Some(w) => st::background_filter(&ens, b, w[0]),
                None => st::background_optimal(&ens, b),
            }
            .map_err(engine)?;
            (ens, r)
        }
        Strategy::Jordan => {
            let thetas = f
                .thetas
                .clone()
                .ok_or_else(|| ctx.err("strategy", "jordan strategy needs `thetas`"))?;
            let k = thetas.len();
            let spec = JordanSpec {
                thetas,
                priors: priors(&ctx, f.priors.as_ref(), 2 * k)?,
            };
            let ens = spec.ensemble().map_err(engine)?;
            let r = match angles(&ctx, &f.omega, k)? {
                Some(w) => st::jordan_design_at(&spec, &w),
                None => st::jordan_design(&spec),
            }
            .map_err(engine)?;
            (ens, r)
        }
        Strategy::ThreeState => {
            let ens = ensemble_with(pure)?;
            let r = match angles(&ctx, &f.omega, 2)? {
                Some(w) => st::three_state_design(&ens, w[0], w[1]),
                None => st::three_state_optimal(&ens, points),
            }
            .map_err(engine)?;
            (ens, r)
        }
        Strategy::FourMixture => {
            let ens = ensemble_with((0..n_states).map(|i| if 2 * i < n_states { 1 } else { 2 }).collect())?;
            let r = match angles(&ctx, &f.omega, 2)? {
                Some(w) => st::four_state_mixture_design(&ens, w[0], w[1]),
                None => st::four_state_mixture_optimal(&ens, points),
            }
            .map_err(engine)?;
            (ens, r)
        }
        Strategy::Pipeline => {
            let ens = ensemble_with(pure)?;
            let stages_raw = f
                .stages
                .as_ref()
                .ok_or_else(|| ctx.err("strategy", "pipeline strategy needs `stages`"))?;
            let stages = stages_raw
                .iter()
                .map(|s| {
                    Ok(StageSpec {
                        target: to_zero_based(&ctx, "stages", &s.target, ens.n())?,
                        background: to_zero_based(&ctx, "stages", &s.background, ens.n())?,
                    })
                })
                .collect::<Result<Vec<_>, InputError>>()?;
            let n_angles: usize = stages.iter().map(|s| s.target.len()).sum();
            let r = match angles(&ctx, &f.omega, n_angles)? {
                Some(w) => st::pipeline_design(&ens, &stages, &w),
                None => st::composed_pipeline(&ens, &stages),
            }
            .map_err(engine)?;
            (ens, r)
        }
        Strategy::Bb84 => {
            let mu = f.mu.ok_or_else(|| ctx.err("strategy", "bb84 strategy needs `mu`"))?;
            if f.priors.is_some() || f.groups.is_some() {
                return Err(ctx.err(
                    if f.priors.is_some() { "priors" } else { "groups" },
                    "bb84 problems fix priors to 1/4 and groups to {1,2}/{3,4}",
                ));
            }
            let ens = st::bb84_ensemble(mu).map_err(engine)?;
            let r = match angles(&ctx, &f.omega, 2)? {
                Some(w) => st::four_state_mixture_design(&ens, w[0], w[1]),
                None => st::four_state_mixture_optimal(&ens, points),
            }
            .map_err(engine)?;
            (ens, r)
        }
    };
    Ok(Problem {
        strategy,
        ensemble,
        result,
    })
}
