mod args;
mod docs;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qwalk_core::adjacency::{parse_adjacency_list, write_adjacency_list};
use qwalk_core::search::{
    classical_baseline, detect_extra_edge, detect_trials, retry_step, run_search_with, scan_success_with,
    speedup_report, SearchOptions,
};
use qwalk_core::spectral::{
    characteristic_poly, eigensystem, perturbative_prediction, prediction_operator, verify_prediction,
};
use qwalk_core::subspace::reduced_matrix_closed_form;
use qwalk_core::verify::verify;
use qwalk_core::{Error, Graph, ScenarioParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    BaselineArgs, BuildArgs, Cli, Command, DetectArgs, GraphInput, ScanArgs, SearchArgs, SpectrumArgs, VerifyArgs,
};
use crate::output::{json_text, round_sig, write_text};

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
    Csv(csv::Error),
    Verification(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Csv(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::ScenarioMismatch(_)) => 3,
            Failure::Core(Error::NotInvariant { .. } | Error::PredictionMismatch { .. } | Error::Convergence { .. }) => 4,
            Failure::Verification(_) => 4,
            Failure::Core(_) | Failure::Io { .. } | Failure::Csv(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io { path, source } => format!("{}: {source}", path.display()),
            Failure::Csv(e) => format!("csv: {e}"),
            Failure::Verification(failed) => format!("verification failed: {}", failed.join("; ")),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |source| Failure::Io { path: path.to_path_buf(), source }
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    write_text(path, text).map_err(|source| Failure::Io { path: path.map_or_else(|| "<stdout>".into(), Path::to_path_buf), source })
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("output types serialize")
}

/// Tags `body` with the schema key first.
fn with_schema(schema: &str, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(schema));
    if let Value::Object(m) = body {
        out.extend(m);
    }
    Value::Object(out)
}

fn load_graph(input: &GraphInput, p: &ScenarioParams) -> CliResult<Graph> {
    match &input.graph {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(parse_adjacency_list(&text)?)
        }
        None => Ok(p.build()?),
    }
}

fn set_jobs(jobs: Option<usize>) -> CliResult {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidParameter { field: "jobs", reason: "must be at least 1".into() }.into());
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(())
}

fn cmd_build(a: &BuildArgs) -> CliResult {
    let p = a.scenario.single()?;
    emit(a.output.as_deref(), &write_adjacency_list(&p.build()?))
}

fn search_json(g: &Graph, p: &ScenarioParams, a: &SearchArgs) -> CliResult<Value> {
    let opts = SearchOptions { steps: a.steps, initial: a.initial.kind(), record_series: false };
    let out = run_search_with(g, p, &opts)?;
    let r = &out.result;
    let distribution: Vec<Value> = out
        .distribution
        .probabilities
        .iter()
        .map(|(e, prob)| json!({"edge": e, "p": prob, "hidden": g.is_hidden(*e)}))
        .collect();
    let retry = match p {
        ScenarioParams::StarLoop { .. } => Some(to_value(&retry_step(g, p, &out.state)?)),
        _ => None,
    };
    let steps = a.steps.unwrap_or(r.n_star);
    let n_star = qwalk_core::search::optimal_steps(p).ok();
    Ok(with_schema(
        "qwalk.search/1",
        json!({
            "params": p,
            "steps": steps,
            "n_star": n_star,
            "theta": r.theta,
            "p_target": r.p_target,
            "p_hidden": r.p_hidden,
            "p_success": r.p_success,
            "predicted_p_target": r.predicted_p_target,
            "predicted_p_hidden": r.predicted_p_hidden,
            "target_edges": r.target_edges,
            "retry": retry,
            "distribution": distribution,
        }),
    ))
}

fn sweep_json(runs: Vec<Value>) -> Value {
    with_schema("qwalk.sweep/1", json!({ "runs": runs }))
}

fn cmd_search(a: &SearchArgs) -> CliResult {
    set_jobs(a.jobs)?;
    let sweep = a.scenario.sweep()?;
    let value = if sweep.len() == 1 {
        let p = sweep[0];
        search_json(&load_graph(&a.input, &p)?, &p, a)?
    } else {
        if a.input.graph.is_some() {
            return Err(Error::InvalidParameter { field: "graph", reason: "a sweep builds its own graphs".into() }.into());
        }
        let runs = sweep.par_iter().map(|p| search_json(&p.build()?, p, a)).collect::<CliResult<Vec<_>>>()?;
        sweep_json(runs)
    };
    emit(a.output.as_deref(), &json_text(value))
}

fn cmd_scan(a: &ScanArgs) -> CliResult {
    let p = a.scenario.single()?;
    let g = load_graph(&a.input, &p)?;
    let scan = scan_success_with(&g, &p, a.n_max, a.initial.kind().as_ref())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "p_target", "p_hidden"])?;
    for pt in &scan.series {
        w.write_record([pt.n.to_string(), round_sig(pt.p_target).to_string(), round_sig(pt.p_hidden).to_string()])?;
    }
    let csv_bytes = w.into_inner().map_err(|e| Failure::Io { path: "<csv>".into(), source: e.into_error() })?;
    let best = scan.series.iter().find(|pt| pt.n == scan.argmax).copied();
    let summary = json_text(with_schema(
        "qwalk.scan/1",
        json!({
            "params": p,
            "n_max": a.n_max,
            "rows": scan.series.len(),
            "argmax": scan.argmax,
            "max_p_target": best.map(|b| b.p_target),
            "max_p_hidden": best.map(|b| b.p_hidden),
            "n_star": scan.n_star,
        }),
    ));
    let csv_text = String::from_utf8(csv_bytes).expect("csv output is utf-8");
    match &a.output {
        Some(path) => {
            emit(Some(path), &csv_text)?;
            emit(None, &summary)
        }
        None => {
            emit(None, &csv_text)?;
            eprint!("{summary}");
            Ok(())
        }
    }
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let p = a.scenario.single()?;
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(Error::InvalidParameter { field: "tol", reason: format!("must be positive, got {}", a.tol) }.into());
    }
    let g = load_graph(&a.input, &p)?;
    let report = verify(&g, &p, a.tol)?;
    let failing: Vec<&str> = report.failing().iter().map(|c| c.name).collect();
    let mut value = to_value(&report);
    value["failing"] = json!(failing);
    emit(a.output.as_deref(), &json_text(value))?;
    if report.passed {
        Ok(())
    } else {
        let named = report
            .failing()
            .iter()
            .map(|c| match (&c.detail, c.value, c.tolerance) {
                (Some(d), _, _) => format!("{}: {d}", c.name),
                (None, Some(v), Some(t)) => format!("{}: {v:.3e} > {t:.3e}", c.name),
                _ => c.name.to_string(),
            })
            .collect();
        Err(Failure::Verification(named))
    }
}

fn cmd_detect(a: &DetectArgs) -> CliResult {
    set_jobs(a.jobs)?;
    let p = a.scenario.single()?;
    let g = load_graph(&a.input, &p)?;
    let body = if a.trials <= 1 {
        to_value(&detect_extra_edge(&g, &p, a.repetitions, a.seed)?)
    } else {
        to_value(&detect_trials(&g, &p, a.repetitions, a.trials, a.seed)?)
    };
    let mut value = with_schema("qwalk.detect/1", json!({ "params": p }));
    if let (Value::Object(out), Value::Object(extra)) = (&mut value, body) {
        out.extend(extra);
    }
    emit(a.output.as_deref(), &json_text(value))
}

fn cmd_baseline(a: &BaselineArgs) -> CliResult {
    set_jobs(a.jobs)?;
    let p = a.scenario.single()?;
    let g = load_graph(&a.input, &p)?;
    let classical = classical_baseline(&g, &p, a.trials, a.seed)?;
    let quantum = run_search_with(&g, &p, &SearchOptions::default())?.result;
    let speedup = speedup_report(&quantum, &classical, &p)?;
    let value = with_schema(
        "qwalk.baseline/1",
        json!({
            "params": p,
            "classical": classical,
            "quantum": {"n_star": quantum.n_star, "p_success": quantum.p_success},
            "speedup": speedup,
        }),
    );
    emit(a.output.as_deref(), &json_text(value))
}

fn spectrum_json(p: &ScenarioParams) -> CliResult<Value> {
    let us = reduced_matrix_closed_form(p)?;
    let poly = characteristic_poly(&us);
    let eigen: Vec<Value> = eigensystem(&us)?
        .iter()
        .map(|e| json!({"value": e.value, "phase": e.value.arg(), "vector": to_value(e)["vector"]}))
        .collect();
    let (prediction, prediction_error, degeneracy_error) = match perturbative_prediction(p) {
        Ok(pred) => {
            let err = verify_prediction(&prediction_operator(p)?, &pred).map(|r| r.eigenvalue_error).ok();
            (Some(pred), err, None)
        }
        Err(e @ Error::NoDegeneratePair { .. }) => (None, None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    Ok(with_schema(
        "qwalk.spectrum/1",
        json!({
            "params": p,
            "labels": us.labels,
            "char_poly": poly.coefficients,
            "eigenvalues": eigen,
            "prediction": prediction,
            "prediction_error": prediction_error,
            "degeneracy_error": degeneracy_error,
        }),
    ))
}

fn cmd_spectrum(a: &SpectrumArgs) -> CliResult {
    set_jobs(a.jobs)?;
    let sweep = a.scenario.sweep()?;
    let value = if sweep.len() == 1 {
        spectrum_json(&sweep[0])?
    } else {
        sweep_json(sweep.par_iter().map(spectrum_json).collect::<CliResult<Vec<_>>>()?)
    };
    emit(a.output.as_deref(), &json_text(value))
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Search(a) => cmd_search(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qwalk: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
