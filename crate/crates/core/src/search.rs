//! End-to-end searches: optimal step counts, walk runs, the retry rule,
//! extra-edge detection and the classical adjacency-list baseline.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::scenario::{Scenario, ScenarioParams};
use crate::spectral::{perturbative_prediction, wrap_phase};
use crate::walk::{
    build_step_operator, edge_probabilities, evolve, make_initial_state, trial_rng, DirectedEdgeState,
    EdgeDistribution, InitialStateKind, MeasurementSampler, Outcome, StateSpace, StateVector, StepOperator,
};

/// Hidden mass below which the retry rule skips the collapse.
const NEGLIGIBLE_MASS: f64 = 1e-12;

/// `p_success` at or above which a single run is counted as enough.
pub const SINGLE_RUN_THRESHOLD: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: u64,
    pub p_target: f64,
    pub p_hidden: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub scenario: Scenario,
    pub n_star: u64,
    pub target_edges: BTreeSet<Edge>,
    pub p_target: f64,
    pub p_hidden: f64,
    /// End-to-end success: `p_target`, plus for the star with a loop the
    /// hidden mass converted by one retry step.
    pub p_success: f64,
    pub predicted_p_target: Option<f64>,
    pub predicted_p_hidden: Option<f64>,
    pub theta: Option<f64>,
    pub series: Option<Vec<SeriesPoint>>,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub result: SearchResult,
    pub state: StateVector,
    pub distribution: EdgeDistribution,
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// Overrides the optimal step count.
    pub steps: Option<u64>,
    /// Overrides the scenario's initial state.
    pub initial: Option<InitialStateKind>,
    /// Records `(n, p_target, p_hidden)` for every `n <= steps`.
    pub record_series: bool,
}

fn is_pi(phi: f64) -> bool {
    (wrap_phase(phi).abs() - PI).abs() < 1e-9
}

/// `round(pi / (2 theta))`; for two stars twice the rounded `U^2` count.
pub fn optimal_steps(p: &ScenarioParams) -> Result<u64> {
    let pred = perturbative_prediction(p)?;
    let half = (FRAC_PI_2 / pred.theta).round() as u64;
    Ok(match p {
        ScenarioParams::TwoStars { .. } => 2 * half,
        _ => half,
    })
}

/// Predicted `(p_target, p_hidden)` at the optimal step count.
pub fn predicted_probabilities(g: &Graph, p: &ScenarioParams) -> Option<(f64, f64)> {
    match *p {
        ScenarioParams::StarLoop { .. } => Some((2.0 / 3.0, 1.0 / 3.0)),
        ScenarioParams::StarDummyLoops { phi, .. } if is_pi(phi) => Some((1.0, 0.0)),
        ScenarioParams::StarDummyLoops { .. } => None,
        ScenarioParams::StarClique { m, .. } => {
            let d = 2.0 * m as f64 - 1.0;
            Some(((d - 1.0) / d, 1.0 / d))
        }
        ScenarioParams::TwoStars { .. } => Some((1.0, 0.0)),
        ScenarioParams::BipartiteExtraEdge { n2, .. } => Some(bipartite_prediction(n2)),
        ScenarioParams::BipartiteDetect { n1, n2 } => {
            if g.has_edge(Edge::new(1u32, 2u32)) {
                Some(bipartite_prediction(n2))
            } else {
                // Without the extra edge the antisymmetric state is an
                // eigenvector and the target mass stays at its initial value.
                Some((2.0 / n1 as f64, 0.0))
            }
        }
    }
}

fn bipartite_prediction(n2: usize) -> (f64, f64) {
    let d = n2 as f64 + 2.0;
    (2.0 / d, n2 as f64 / d)
}

struct Prepared {
    op: StepOperator,
    initial: StateVector,
    targets: Vec<Edge>,
}

fn prepare(g: &Graph, p: &ScenarioParams, initial: Option<&InitialStateKind>) -> Result<Prepared> {
    p.check_graph(g)?;
    let op = build_step_operator(g)?;
    let kind = initial.cloned().unwrap_or_else(|| p.initial_state_kind());
    let initial = make_initial_state(g, op.space(), &kind)?;
    Ok(Prepared { op, initial, targets: p.target_edges() })
}

pub fn run_search(g: &Graph, p: &ScenarioParams) -> Result<SearchOutcome> {
    run_search_with(g, p, &SearchOptions::default())
}

pub fn run_search_with(g: &Graph, p: &ScenarioParams, opts: &SearchOptions) -> Result<SearchOutcome> {
    let prep = prepare(g, p, opts.initial.as_ref())?;
    let theta = perturbative_prediction(p).ok().map(|pr| pr.theta);
    let n_star = match opts.steps {
        Some(n) => n,
        None => {
            if let ScenarioParams::StarDummyLoops { phi, .. } = *p {
                if !is_pi(phi) {
                    perturbative_prediction(p)?;
                    return Err(Error::Unsupported(format!(
                        "no initial state is specified for the dummy-loop search at phi = {phi}; pass explicit steps"
                    )));
                }
            }
            optimal_steps(p)?
        }
    };

    let mut series = opts.record_series.then(Vec::new);
    let state = if let Some(series) = series.as_mut() {
        let mut s = prep.initial.clone();
        for n in 0..=n_star {
            if n > 0 {
                s = prep.op.apply(&s)?;
            }
            let d = edge_probabilities(g, prep.op.space(), &s);
            series.push(SeriesPoint { n, p_target: d.mass_on(&prep.targets), p_hidden: d.not_found });
        }
        s
    } else {
        evolve(&prep.op, &prep.initial, n_star)?
    };

    let distribution = edge_probabilities(g, prep.op.space(), &state);
    let p_target = distribution.mass_on(&prep.targets);
    let p_hidden = distribution.not_found;
    let p_success = match p {
        ScenarioParams::StarLoop { .. } => {
            let retry = retry_with(g, &prep.op, &prep.targets, &state)?;
            p_target + p_hidden * retry.p_target
        }
        _ => p_target,
    };
    let predicted = predicted_probabilities(g, p);
    let result = SearchResult {
        scenario: p.scenario(),
        n_star,
        target_edges: prep.targets.iter().copied().collect(),
        p_target,
        p_hidden,
        p_success,
        predicted_p_target: predicted.map(|x| x.0),
        predicted_p_hidden: predicted.map(|x| x.1),
        theta,
        series,
    };
    Ok(SearchOutcome { result, state, distribution })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetryOutcome {
    /// Whether the state was conditioned on the not-found outcome first.
    pub collapsed: bool,
    pub p_target: f64,
    pub p_hidden: f64,
    #[serde(skip)]
    pub state: StateVector,
}

/// One more step after a not-found measurement: the state is projected
/// onto the hidden edges, renormalized and advanced once. When the hidden
/// mass is negligible the state is advanced as is.
pub fn retry_step(g: &Graph, p: &ScenarioParams, s: &StateVector) -> Result<RetryOutcome> {
    if p.scenario() != Scenario::StarLoop {
        return Err(Error::ScenarioMismatch(format!("the retry rule applies to star-loop only, got {}", p.scenario())));
    }
    p.check_graph(g)?;
    let op = build_step_operator(g)?;
    retry_with(g, &op, &p.target_edges(), s)
}

fn retry_with(g: &Graph, op: &StepOperator, targets: &[Edge], s: &StateVector) -> Result<RetryOutcome> {
    let space = op.space();
    if s.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: s.dim() });
    }
    let mut hidden = s.clone();
    for (i, st) in space.states().iter().enumerate() {
        if !g.is_hidden(st.edge()) {
            hidden.amplitudes_mut()[i] = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    let collapsed = hidden.norm_sqr() > NEGLIGIBLE_MASS;
    let start = if collapsed { hidden.normalized()? } else { s.clone() };
    let state = op.apply(&start)?;
    let d = edge_probabilities(g, space, &state);
    Ok(RetryOutcome { collapsed, p_target: d.mass_on(targets), p_hidden: d.not_found, state })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scan {
    pub series: Vec<SeriesPoint>,
    /// Step maximizing `p_target + p_hidden` (smallest on ties).
    pub argmax: u64,
    pub n_star: Option<u64>,
}

pub fn scan_success(g: &Graph, p: &ScenarioParams, n_max: u64) -> Result<Scan> {
    scan_success_with(g, p, n_max, None)
}

pub fn scan_success_with(g: &Graph, p: &ScenarioParams, n_max: u64, initial: Option<&InitialStateKind>) -> Result<Scan> {
    if n_max < 1 {
        return Err(Error::InvalidParameter { field: "n_max", reason: "must be at least 1".into() });
    }
    let opts = SearchOptions { steps: Some(n_max), initial: initial.cloned(), record_series: true };
    let series = run_search_with(g, p, &opts)?.result.series.unwrap_or_default();
    let mut argmax = 0;
    let mut best = f64::NEG_INFINITY;
    for pt in &series {
        let v = pt.p_target + pt.p_hidden;
        if v > best + 1e-12 {
            best = v;
            argmax = pt.n;
        }
    }
    Ok(Scan { series, argmax, n_star: optimal_steps(p).ok() })
}

/// Mass on directed states satisfying `keep`.
pub fn directed_mass(space: &StateSpace, s: &StateVector, keep: impl Fn(&DirectedEdgeState) -> bool) -> f64 {
    space.states().iter().zip(s.amplitudes()).filter(|(st, _)| keep(st)).map(|(_, a)| a.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub present: bool,
    /// `1` when a not-found outcome was seen; otherwise the probability that
    /// an existing extra edge would have shown up at least once.
    pub confidence: f64,
    pub repetitions: u32,
    pub not_found_outcomes: u32,
    /// Per-run not-found probability of this graph.
    pub p_not_found: f64,
}

fn check_detect(p: &ScenarioParams) -> Result<(usize, usize)> {
    match *p {
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => Ok((n1, n2)),
        _ => Err(Error::ScenarioMismatch(format!("extra-edge detection needs a bipartite scenario, got {}", p.scenario()))),
    }
}

struct DetectRun {
    sampler: MeasurementSampler,
    p_not_found: f64,
    miss_if_present: f64,
}

fn detect_run(g: &Graph, p: &ScenarioParams) -> Result<DetectRun> {
    let (n1, n2) = check_detect(p)?;
    let as_detect = ScenarioParams::BipartiteDetect { n1, n2 };
    let prep = prepare(g, &as_detect, None)?;
    let s = evolve(&prep.op, &prep.initial, optimal_steps(&as_detect)?)?;
    let d = edge_probabilities(g, prep.op.space(), &s);
    let (_, hidden) = bipartite_prediction(n2);
    Ok(DetectRun { sampler: MeasurementSampler::new(g, &d), p_not_found: d.not_found, miss_if_present: 1.0 - hidden })
}

fn detect_sampled(run: &DetectRun, repetitions: u32, rng: &mut impl rand::Rng) -> Detection {
    let not_found = (0..repetitions).filter(|_| run.sampler.sample(rng) == Outcome::NotFound).count() as u32;
    let present = not_found > 0;
    let confidence = if present { 1.0 } else { 1.0 - run.miss_if_present.powi(repetitions as i32) };
    Detection { present, confidence, repetitions, not_found_outcomes: not_found, p_not_found: run.p_not_found }
}

/// Runs the walk `n_star` steps and measures `repetitions` times; any
/// not-found outcome proves the extra edge exists.
pub fn detect_extra_edge(g: &Graph, p: &ScenarioParams, repetitions: u32, seed: u64) -> Result<Detection> {
    let run = detect_run(g, p)?;
    Ok(detect_sampled(&run, repetitions, &mut trial_rng(seed, 0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionStats {
    pub trials: u64,
    pub flagged: u64,
    pub frequency: f64,
    pub repetitions: u32,
    pub p_not_found: f64,
}

/// Repeats [`detect_extra_edge`] over independent seeded trials.
pub fn detect_trials(g: &Graph, p: &ScenarioParams, repetitions: u32, trials: u64, seed: u64) -> Result<DetectionStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter { field: "trials", reason: "must be at least 1".into() });
    }
    let run = detect_run(g, p)?;
    let flagged = (0..trials)
        .into_par_iter()
        .filter(|&t| detect_sampled(&run, repetitions, &mut trial_rng(seed, t)).present)
        .count() as u64;
    Ok(DetectionStats { trials, flagged, frequency: flagged as f64 / trials as f64, repetitions, p_not_found: run.p_not_found })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Baseline {
    /// Entries in the region of the adjacency list that is scanned.
    pub scanned_entries: u64,
    /// Entries that certify the anomaly.
    pub certifying_entries: u64,
    pub certifying: String,
    /// Total entries of the full adjacency list.
    pub list_entries: u64,
    pub probes_expected: f64,
    pub probes_observed_mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Total adjacency-list entries; a loop is listed once.
pub fn adjacency_list_entries(g: &Graph) -> u64 {
    g.vertices().map(|v| g.neighbors(v).len() as u64).sum()
}

/// Scanned and certifying entry counts for the uniform random probing model.
fn probing_model(g: &Graph, p: &ScenarioParams) -> (u64, u64, &'static str) {
    match *p {
        ScenarioParams::StarLoop { n } => (n as u64 + 1, 1, "self-entry in an external vertex's list"),
        ScenarioParams::StarDummyLoops { n, .. } => (n as u64, 1, "loop with the dummy reflection"),
        ScenarioParams::StarClique { n, m } => {
            let k = (m * (m - 1)) as u64;
            (n as u64 + k, k, "external-external entry")
        }
        ScenarioParams::TwoStars { n } => (n as u64 + 1, 1, "external vertex listed by both centers"),
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            let k = if g.has_edge(Edge::new(1u32, 2u32)) { 2 } else { 0 };
            ((n1 * n2) as u64 + k, k, "entry inside the first vertex set")
        }
    }
}

/// `(T + 1) / (K + 1)` probes to hit one of `K` marked entries among `T` in a
/// uniformly random order; a full scan of `T` when nothing is marked.
pub fn expected_probes(total: u64, marked: u64) -> f64 {
    if marked == 0 {
        total as f64
    } else {
        (total as f64 + 1.0) / (marked as f64 + 1.0)
    }
}

pub fn classical_baseline(g: &Graph, p: &ScenarioParams, trials: u64, seed: u64) -> Result<Baseline> {
    if trials == 0 {
        return Err(Error::InvalidParameter { field: "trials", reason: "must be at least 1".into() });
    }
    p.check_graph(g)?;
    let (total, marked, certifying) = probing_model(g, p);
    let probes: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            if marked == 0 {
                return total as f64;
            }
            let mut rng = trial_rng(seed, t);
            let first = index::sample(&mut rng, total as usize, marked as usize).iter().min().unwrap_or(0);
            (first + 1) as f64
        })
        .collect();
    let mean = probes.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        probes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    Ok(Baseline {
        scanned_entries: total,
        certifying_entries: marked,
        certifying: certifying.to_string(),
        list_entries: adjacency_list_entries(g),
        probes_expected: expected_probes(total, marked),
        probes_observed_mean: mean,
        std_error: (var / trials as f64).sqrt(),
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub n_star: u64,
    pub p_success: f64,
    pub repetitions: u64,
    pub quantum_steps_total: u64,
    pub classical_probes: f64,
    pub ratio: f64,
    pub list_entries: u64,
    pub ratio_to_list: f64,
    /// Bipartite only: `sqrt(n2 / n1)`.
    pub reference_ratio: Option<f64>,
}

/// Expected runs: one when a run almost always succeeds, else `ceil(1/p)`.
pub fn expected_repetitions(p_success: f64) -> u64 {
    if p_success >= SINGLE_RUN_THRESHOLD {
        1
    } else if p_success <= 0.0 {
        u64::MAX
    } else {
        (1.0 / p_success).ceil() as u64
    }
}

pub fn speedup_report(q: &SearchResult, b: &Baseline, p: &ScenarioParams) -> Result<SpeedupReport> {
    if q.scenario != p.scenario() {
        return Err(Error::ScenarioMismatch(format!("search result is for {}, params for {}", q.scenario, p.scenario())));
    }
    let repetitions = expected_repetitions(q.p_success);
    let quantum_steps_total = q.n_star.saturating_mul(repetitions);
    let reference_ratio = match *p {
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            Some((n2 as f64 / n1 as f64).sqrt())
        }
        _ => None,
    };
    Ok(SpeedupReport {
        n_star: q.n_star,
        p_success: q.p_success,
        repetitions,
        quantum_steps_total,
        classical_probes: b.probes_expected,
        ratio: quantum_steps_total as f64 / b.probes_expected,
        list_entries: b.list_entries,
        ratio_to_list: quantum_steps_total as f64 / b.list_entries as f64,
        reference_ratio,
    })
}
