//! One-photon interferometers: four-port beam splitters and phase shifters on
//! rails, synthesised stage by stage from filtering parameters.
//!
//! Rail indices 0..n_signal are the DTR basis vectors e_1…e_n, the rest are
//! ancilla (vacuum) rails v_1…v_M. Elements act in place: a beam splitter on
//! (l, u) leaves its r output on rail l and its d output on rail u.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, max_abs, CMat, CVec, ZERO};
use crate::povm::{Ensemble, Outcome, PovmElement, PovmSet};
use crate::textfmt::sig12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    BeamSplitter { omega: f64, rail_l: usize, rail_u: usize },
    PhaseShifter { phi: f64, rail: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalElement {
    pub kind: ElementKind,
    pub stage: usize,
    /// Set when the nulling angle was undefined and ω = π/2 was emitted.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Detector(Outcome),
    /// Failure port of the given stage; stage 0 collects background rails.
    Failure(usize),
}

impl Port {
    pub fn outcome(&self) -> Outcome {
        match self {
            Port::Detector(o) => *o,
            Port::Failure(_) => Outcome::Fail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpticalNetwork {
    pub n_signal: usize,
    pub n_ancilla: usize,
    pub elements: Vec<OpticalElement>,
    /// Port assignment of every output rail, indexed by rail.
    pub ports: Vec<Port>,
    /// Input amplitudes of each state on the signal rails.
    pub inputs: Vec<CVec>,
}

/// [[−sin ω, cos ω], [cos ω, sin ω]]: r = −l sin ω + u cos ω, d = l cos ω + u sin ω.
pub fn bs_unitary(omega: f64) -> [[f64; 2]; 2] {
    let (s, co) = omega.sin_cos();
    [[-s, co], [co, s]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nulling {
    pub omega: f64,
    /// Phase applied to the l rail so its amplitude becomes real positive.
    pub phase_l: f64,
    pub phase_u: f64,
}

/// Angle that sends all of (c_l, c_u) to the d output once both phases are removed.
pub fn nulling_angle(c_l: Complex64, c_u: Complex64) -> Result<Nulling> {
    let (al, au) = (c_l.norm(), c_u.norm());
    if al == 0.0 && au == 0.0 {
        return Err(Error::ZeroInput);
    }
    let phase = |z: Complex64| if z.norm() > 0.0 { -z.arg() } else { 0.0 };
    Ok(Nulling {
        omega: au.atan2(al),
        phase_l: phase(c_l),
        phase_u: phase(c_u),
    })
}

impl OpticalNetwork {
    pub fn n_rails(&self) -> usize {
        self.n_signal + self.n_ancilla
    }

    pub fn rail_name(&self, r: usize) -> String {
        rail_name(self.n_signal, r)
    }

    /// Identity network with one detector per signal rail.
    pub fn identity(inputs: Vec<CVec>, labels: Vec<Outcome>) -> Self {
        let n = labels.len();
        OpticalNetwork {
            n_signal: n,
            n_ancilla: 0,
            elements: vec![],
            ports: labels.into_iter().map(Port::Detector).collect(),
            inputs,
        }
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::BeamSplitter { .. }))
            .count()
    }

    pub fn stages(&self) -> usize {
        self.elements.iter().map(|e| e.stage).max().unwrap_or(0)
    }
}

fn rail_name(n_signal: usize, r: usize) -> String {
    if r < n_signal {
        format!("e{}", r + 1)
    } else {
        format!("v{}", r - n_signal + 1)
    }
}

fn apply(el: &OpticalElement, amps: &mut [Complex64]) {
    match el.kind {
        ElementKind::BeamSplitter { omega, rail_l, rail_u } => {
            let (s, co) = omega.sin_cos();
            let (l, u) = (amps[rail_l], amps[rail_u]);
            amps[rail_l] = -l * s + u * co;
            amps[rail_u] = l * co + u * s;
        }
        ElementKind::PhaseShifter { phi, rail } => {
            amps[rail] *= Complex64::from_polar(1.0, phi);
        }
    }
}

fn run(elements: &[OpticalElement], n_rails: usize, input: &[Complex64]) -> Vec<Complex64> {
    let mut amps = vec![ZERO; n_rails];
    amps[..input.len()].copy_from_slice(input);
    for el in elements {
        apply(el, &mut amps);
    }
    amps
}

/// Output amplitudes for an arbitrary input on the signal rails.
pub fn propagate_amplitudes(net: &OpticalNetwork, input: &CVec) -> CVec {
    CVec::from_vec(run(&net.elements, net.n_rails(), input.as_slice()))
}

/// Output amplitudes, indexed by rail, for input state `j`.
pub fn propagate(net: &OpticalNetwork, j: usize) -> CVec {
    propagate_amplitudes(net, &net.inputs[j])
}

/// Dense transfer matrix T with out = T·in.
pub fn transfer_matrix(net: &OpticalNetwork) -> CMat {
    let m = net.n_rails();
    let mut t = CMat::identity(m, m);
    for col in 0..m {
        let mut e = vec![ZERO; m];
        e[col] = c(1.0, 0.0);
        let out = run(&net.elements, m, &e);
        for row in 0..m {
            t[(row, col)] = out[row];
        }
    }
    t
}

pub fn unitarity_residual(net: &OpticalNetwork) -> f64 {
    let t = transfer_matrix(net);
    let m = t.nrows();
    max_abs(&(t.adjoint() * &t - CMat::identity(m, m)))
}

/// POVM realised by the network: each output port pulled back onto the signal
/// rails, (E_P)_ab = conj(T_Pa) T_Pb, summed over ports sharing a label.
pub fn extract_povms(net: &OpticalNetwork) -> PovmSet {
    let t = transfer_matrix(net);
    let n = net.n_signal;
    let elements = net
        .ports
        .iter()
        .enumerate()
        .map(|(r, port)| {
            let matrix = CMat::from_fn(n, n, |a, b| t[(r, a)].conj() * t[(r, b)]);
            PovmElement {
                label: port.outcome(),
                matrix,
            }
        })
        .collect();
    PovmSet::from_elements(elements)
}

/// One filtering sub-stage: a fresh ancilla, a beam splitter that sends part
/// of the target's amplitude on `detector_rail` to a detector, and a cascade
/// that nulls the target's amplitude on every rail in `cascade`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubStage {
    pub target: usize,
    pub detector_rail: usize,
    pub cascade: Vec<usize>,
    pub omega: f64,
    pub label: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    pub n_signal: usize,
    pub inputs: Vec<CVec>,
    pub substages: Vec<SubStage>,
    /// Signal rails still live after the last stage and their detector labels.
    pub final_ports: Vec<(usize, Outcome)>,
    /// Rails spanned only by background states, routed straight to failure.
    pub background_rails: Vec<usize>,
}

const DEGENERATE_NORM: f64 = 1e-14;
const PHASE_EPS: f64 = 1e-15;

pub fn synthesize(plan: &StagePlan) -> Result<OpticalNetwork> {
    let n = plan.n_signal;
    let m = n + plan.substages.len();
    let mut elements: Vec<OpticalElement> = Vec::new();
    let mut ports: Vec<Option<Port>> = vec![None; m];
    let assign = |ports: &mut Vec<Option<Port>>, r: usize, p: Port| -> Result<()> {
        if r >= n && p != Port::Failure(r - n + 1) {
            return Err(Error::InvalidNetwork(format!("rail {} is not a signal rail", r + 1)));
        }
        match ports[r] {
            Some(_) => Err(Error::InvalidNetwork(format!("rail {} assigned twice", rail_name(n, r)))),
            None => {
                ports[r] = Some(p);
                Ok(())
            }
        }
    };
    for &r in &plan.background_rails {
        assign(&mut ports, r, Port::Failure(0))?;
    }
    for (s, sub) in plan.substages.iter().enumerate() {
        let stage = s + 1;
        let v = n + s;
        if !sub.omega.is_finite() {
            return Err(Error::InvalidOmega(sub.omega));
        }
        if sub.target >= plan.inputs.len() || sub.detector_rail >= n {
            return Err(Error::InvalidNetwork(format!("stage {stage} references a missing state or rail")));
        }
        if ports[sub.detector_rail].is_some() || sub.cascade.iter().any(|&r| r >= n || ports[r].is_some()) {
            return Err(Error::InvalidNetwork(format!("stage {stage} uses a rail that already ended")));
        }
        let amps = run(&elements, m, plan.inputs[sub.target].as_slice());
        let a = amps[sub.detector_rail];
        if a.norm() > 0.0 && a.arg().abs() > PHASE_EPS {
            elements.push(OpticalElement {
                kind: ElementKind::PhaseShifter {
                    phi: -a.arg(),
                    rail: sub.detector_rail,
                },
                stage,
                degenerate: false,
            });
        }
        elements.push(OpticalElement {
            kind: ElementKind::BeamSplitter {
                omega: sub.omega,
                rail_l: sub.detector_rail,
                rail_u: v,
            },
            stage,
            degenerate: false,
        });
        assign(&mut ports, sub.detector_rail, Port::Detector(sub.label))?;
        let mut running = a.norm() * sub.omega.cos();
        for &r in &sub.cascade {
            let cl = amps[r];
            if cl.norm() > 0.0 && cl.arg().abs() > PHASE_EPS {
                elements.push(OpticalElement {
                    kind: ElementKind::PhaseShifter { phi: -cl.arg(), rail: r },
                    stage,
                    degenerate: false,
                });
            }
            let total = cl.norm().hypot(running);
            if total < DEGENERATE_NORM {
                elements.push(OpticalElement {
                    kind: ElementKind::BeamSplitter {
                        omega: FRAC_PI_2,
                        rail_l: r,
                        rail_u: v,
                    },
                    stage,
                    degenerate: true,
                });
                continue;
            }
            // running is real but negative when cos ω < 0; a signed angle still nulls rail r
            let omega = running.atan2(cl.norm());
            elements.push(OpticalElement {
                kind: ElementKind::BeamSplitter {
                    omega,
                    rail_l: r,
                    rail_u: v,
                },
                stage,
                degenerate: false,
            });
            running = total;
        }
        assign(&mut ports, v, Port::Failure(stage))?;
    }
    for &(r, label) in &plan.final_ports {
        assign(&mut ports, r, Port::Detector(label))?;
    }
    let ports = ports
        .into_iter()
        .enumerate()
        .map(|(r, p)| p.ok_or_else(|| Error::InvalidNetwork(format!("rail {} has no port", rail_name(n, r)))))
        .collect::<Result<Vec<_>>>()?;
    Ok(OpticalNetwork {
        n_signal: n,
        n_ancilla: plan.substages.len(),
        elements,
        ports,
        inputs: plan.inputs.clone(),
    })
}

/// Plan for the DTR-ordered staging used by every strategy: each block is a
/// run of consecutive rails sharing an outcome, processed last rail first;
/// later non-background rails form the cascade of each sub-stage.
pub fn staged_plan(
    inputs: Vec<CVec>,
    blocks: &[(Vec<usize>, Outcome)],
    rest: Option<(Vec<usize>, Outcome)>,
    background: &[usize],
    omegas: &[f64],
) -> Result<StagePlan> {
    let n = inputs.first().map(|v| v.len()).unwrap_or(0);
    let mut live: Vec<usize> = (0..n).filter(|r| !background.contains(r)).collect();
    let mut substages = Vec::new();
    let mut k = 0;
    for (positions, label) in blocks {
        for &p in positions.iter().rev() {
            let omega = *omegas.get(k).ok_or(Error::DimensionMismatch {
                expected: k + 1,
                got: omegas.len(),
            })?;
            k += 1;
            live.retain(|&r| r != p);
            let cascade = live.iter().copied().filter(|&r| r > p).collect();
            substages.push(SubStage {
                target: p,
                detector_rail: p,
                cascade,
                omega,
                label: *label,
            });
        }
    }
    if k != omegas.len() {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: omegas.len(),
        });
    }
    let final_ports = match rest {
        Some((rails, label)) => rails.into_iter().map(|r| (r, label)).collect(),
        None => vec![],
    };
    Ok(StagePlan {
        n_signal: n,
        inputs,
        substages,
        final_ports,
        background_rails: background.to_vec(),
    })
}

/// Single-stage network filtering state 1 from states 2…N.
pub fn synthesize_filter_network(ens: &Ensemble, omega: f64) -> Result<OpticalNetwork> {
    synthesize(&filter_plan(ens, omega, Outcome::GroupIdentify(1), Outcome::GroupIdentify(2))?)
}

pub(crate) fn filter_plan(ens: &Ensemble, omega: f64, first: Outcome, rest: Outcome) -> Result<StagePlan> {
    let n = ens.n();
    staged_plan(
        ensemble_inputs(ens),
        &[(vec![0], first)],
        Some(((1..n).collect(), rest)),
        &[],
        &[omega],
    )
}

pub fn ensemble_inputs(ens: &Ensemble) -> Vec<CVec> {
    (0..ens.n()).map(|j| ens.state(j)).collect()
}

/// Network of a strategy result, rebuilt from its stage plan.
pub fn synthesize_staged_network(result: &crate::strategies::StrategyResult) -> Result<OpticalNetwork> {
    synthesize(&result.plan)
}

/// Probability of each output rail for input state j.
pub fn port_probabilities(net: &OpticalNetwork, j: usize) -> Vec<f64> {
    propagate(net, j).iter().map(|z| z.norm_sqr()).collect()
}

/// Distinct outcome labels of the network's ports, sorted.
pub fn port_labels(net: &OpticalNetwork) -> Vec<Outcome> {
    let mut labels: Vec<Outcome> = net.ports.iter().map(|p| p.outcome()).collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Analytic probability of each label (in `port_labels` order) per input state.
pub fn outcome_table(net: &OpticalNetwork) -> Vec<Vec<f64>> {
    let labels = port_labels(net);
    (0..net.inputs.len())
        .map(|j| {
            let probs = port_probabilities(net, j);
            let mut row = vec![0.0; labels.len()];
            for (r, p) in probs.iter().enumerate() {
                let k = labels.iter().position(|l| *l == net.ports[r].outcome()).unwrap();
                row[k] += p;
            }
            row
        })
        .collect()
}

/// Failure probability contributed by each stage's failure port(s),
/// indexed by stage (0 = background).
pub fn stage_failures(net: &OpticalNetwork, priors: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.stages() + 1];
    for (j, &eta) in priors.iter().enumerate() {
        for (r, p) in port_probabilities(net, j).iter().enumerate() {
            if let Port::Failure(s) = net.ports[r] {
                out[s] += eta * p;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct McCounts {
    pub labels: Vec<Outcome>,
    /// counts[state][label]
    pub counts: Vec<Vec<u64>>,
    pub shots: u64,
}

/// Shots per random stream; chunk k draws from stream k of the master seed.
pub const MC_CHUNK: u64 = 8192;
/// Port probabilities below this are exact zeros (forbidden outcomes).
pub const MC_ZERO: f64 = 1e-20;

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

fn inverse_cdf(cum: &[f64], probs: &[f64], u: f64) -> usize {
    let total = *cum.last().unwrap();
    let u = u * total;
    for (i, &c) in cum.iter().enumerate() {
        if u < c && probs[i] > 0.0 {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Draws a state by prior, then an output port by |amplitude|², and tallies
/// labels. Deterministic for a given seed regardless of thread count.
pub fn monte_carlo(net: &OpticalNetwork, ens: &Ensemble, shots: u64, seed: u64) -> McCounts {
    let labels = port_labels(net);
    let label_of: Vec<usize> = net
        .ports
        .iter()
        .map(|p| labels.iter().position(|l| *l == p.outcome()).unwrap())
        .collect();
    let port_p: Vec<Vec<f64>> = (0..ens.n())
        .map(|j| {
            port_probabilities(net, j)
                .into_iter()
                .map(|p| if p < MC_ZERO { 0.0 } else { p })
                .collect()
        })
        .collect();
    let port_c: Vec<Vec<f64>> = port_p.iter().map(|p| cumulative(p)).collect();
    let prior_p: Vec<f64> = ens.priors.clone();
    let prior_c = cumulative(&prior_p);
    let n_chunks = shots.div_ceil(MC_CHUNK);
    let zero = vec![vec![0u64; labels.len()]; ens.n()];
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_CHUNK.min(shots - k * MC_CHUNK);
            let mut local = vec![vec![0u64; labels.len()]; ens.n()];
            for _ in 0..len {
                let j = inverse_cdf(&prior_c, &prior_p, rng.random::<f64>());
                let r = inverse_cdf(&port_c[j], &port_p[j], rng.random::<f64>());
                local[j][label_of[r]] += 1;
            }
            local
        })
        .reduce(
            || zero.clone(),
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(&b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    McCounts { labels, counts, shots }
}

/// Text layout: a `rails` header, one tab-separated line per element
/// (stage, kind, rails, angle, phase[, degenerate]) and one line per port.
pub fn to_layout(net: &OpticalNetwork) -> String {
    let mut out = String::new();
    out.push_str("# stage\tkind\trails\tangle\tphase\n");
    out.push_str(&format!("rails\t{}\t{}\n", net.n_signal, net.n_ancilla));
    for el in &net.elements {
        let line = match el.kind {
            ElementKind::BeamSplitter { omega, rail_l, rail_u } => {
                format!(
                    "{}\tBS\t{},{}\t{}\t0",
                    el.stage,
                    net.rail_name(rail_l),
                    net.rail_name(rail_u),
                    sig12(omega)
                )
            }
            ElementKind::PhaseShifter { phi, rail } => format!("{}\tPS\t{}\t0\t{}", el.stage, net.rail_name(rail), sig12(phi)),
        };
        out.push_str(&line);
        if el.degenerate {
            out.push_str("\tdegenerate");
        }
        out.push('\n');
    }
    for (r, p) in net.ports.iter().enumerate() {
        let label = match p {
            Port::Detector(o) => o.to_string(),
            Port::Failure(s) => format!("fail:{s}"),
        };
        out.push_str(&format!("port\t{}\t{}\n", net.rail_name(r), label));
    }
    out
}

/// Layout followed by `frame` rows (one per signal rail, `re,im` entries)
/// giving the unitary from the rail basis to the caller's basis.
pub fn to_layout_in_frame(net: &OpticalNetwork, frame: Option<&CMat>) -> String {
    let mut out = to_layout(net);
    if let Some(w) = frame {
        for i in 0..w.nrows() {
            let row: Vec<String> = (0..w.ncols())
                .map(|j| format!("{},{}", sig12(w[(i, j)].re), sig12(w[(i, j)].im)))
                .collect();
            out.push_str(&format!("frame\t{}\t{}\n", i + 1, row.join("\t")));
        }
    }
    out
}

/// The `frame` rows of a layout, if any.
pub fn layout_frame(text: &str) -> Result<Option<CMat>> {
    let mut rows: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.trim_end().split('\t').collect();
        if f[0] != "frame" {
            continue;
        }
        let bad = || Error::InvalidNetwork(format!("line {}: bad frame row", i + 1));
        let r: usize = f.get(1).and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        let entries = f[2..]
            .iter()
            .map(|e| {
                let (a, b) = e.split_once(',').ok_or_else(bad)?;
                Ok(c(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((r, entries));
    }
    if rows.is_empty() {
        return Ok(None);
    }
    let n = rows.len();
    if rows.iter().enumerate().any(|(i, (r, e))| *r != i + 1 || e.len() != n) {
        return Err(Error::InvalidNetwork("frame must be square with rows in order".into()));
    }
    Ok(Some(CMat::from_fn(n, n, |i, j| rows[i].1[j])))
}

/// Parses a layout written by [`to_layout`]; `frame` rows are skipped. The
/// result carries no input states.
pub fn from_layout(text: &str) -> Result<OpticalNetwork> {
    let bad = |line: usize, msg: &str| Error::InvalidNetwork(format!("line {line}: {msg}"));
    let mut dims: Option<(usize, usize)> = None;
    let mut elements = Vec::new();
    let mut ports: Vec<Option<Port>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') || line.starts_with("frame\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, &format!("bad number '{s}'")));
        if f[0] == "rails" {
            if f.len() != 3 {
                return Err(bad(ln, "expected: rails <signal> <ancilla>"));
            }
            let a = f[1].parse().map_err(|_| bad(ln, "bad rail count"))?;
            let b = f[2].parse().map_err(|_| bad(ln, "bad rail count"))?;
            dims = Some((a, b));
            ports = vec![None; a + b];
            continue;
        }
        let (ns, na) = dims.ok_or_else(|| bad(ln, "rails header must come first"))?;
        let rail = |s: &str| -> Result<usize> {
            let (kind, idx) = match (s.get(..1), s.get(1..)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(bad(ln, &format!("bad rail '{s}'"))),
            };
            let k: usize = idx.parse().map_err(|_| bad(ln, &format!("bad rail '{s}'")))?;
            match kind {
                "e" if k >= 1 && k <= ns => Ok(k - 1),
                "v" if k >= 1 && k <= na => Ok(ns + k - 1),
                _ => Err(bad(ln, &format!("bad rail '{s}'"))),
            }
        };
        if f[0] == "port" {
            if f.len() != 3 {
                return Err(bad(ln, "expected: port <rail> <label>"));
            }
            let r = rail(f[1])?;
            let p = match f[2].strip_prefix("fail:") {
                Some(s) => Port::Failure(s.parse().map_err(|_| bad(ln, "bad failure stage"))?),
                None => Port::Detector(f[2].parse().map_err(|_| bad(ln, &format!("bad label '{}'", f[2])))?),
            };
            ports[r] = Some(p);
            continue;
        }
        if f.len() < 5 {
            return Err(bad(ln, "expected: stage kind rails angle phase"));
        }
        let stage: usize = f[0].parse().map_err(|_| bad(ln, "bad stage"))?;
        let degenerate = f.get(5) == Some(&"degenerate");
        let kind = match f[1] {
            "BS" => {
                let (a, b) = f[2].split_once(',').ok_or_else(|| bad(ln, "beam splitter needs two rails"))?;
                let (rail_l, rail_u) = (rail(a)?, rail(b)?);
                if rail_l == rail_u {
                    return Err(bad(ln, "beam splitter rails must differ"));
                }
                ElementKind::BeamSplitter {
                    omega: num(f[3])?,
                    rail_l,
                    rail_u,
                }
            }
            "PS" => ElementKind::PhaseShifter {
                phi: num(f[4])?,
                rail: rail(f[2])?,
            },
            k => return Err(bad(ln, &format!("unknown element kind '{k}'"))),
        };
        elements.push(OpticalElement { kind, stage, degenerate });
    }
    let (n_signal, n_ancilla) = dims.ok_or_else(|| Error::InvalidNetwork("missing rails header".into()))?;
    let ports = ports
        .into_iter()
        .enumerate()
        .map(|(r, p)| p.ok_or_else(|| Error::InvalidNetwork(format!("rail {} has no port", rail_name(n_signal, r)))))
        .collect::<Result<Vec<_>>>()?;
    Ok(OpticalNetwork {
        n_signal,
        n_ancilla,
        elements,
        ports,
        inputs: vec![],
    })
}
