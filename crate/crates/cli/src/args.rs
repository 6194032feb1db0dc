use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk_core::walk::InitialStateKind;
use qwalk_core::{Error, ScenarioParams};

use crate::docs;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Scattering quantum walks and structural anomaly search")]
#[command(after_long_help = docs::EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the adjacency list of a scenario graph.
    Build(BuildArgs),
    /// Run the search for the optimal (or given) number of steps.
    #[command(after_long_help = docs::SEARCH)]
    Search(SearchArgs),
    /// Success probabilities for every step up to --n-max, as CSV.
    #[command(after_long_help = docs::SCAN)]
    Scan(ScanArgs),
    /// Check unitarity, invariance, closed forms and spectral predictions.
    #[command(after_long_help = docs::VERIFY)]
    Verify(VerifyArgs),
    /// Decide whether a complete bipartite graph carries the extra edge.
    #[command(after_long_help = docs::DETECT)]
    Detect(DetectArgs),
    /// Classical adjacency-list probing cost and the quantum speedup.
    #[command(after_long_help = docs::BASELINE)]
    Baseline(BaselineArgs),
    /// Eigenvalues of the reduced operator and the perturbative prediction.
    #[command(after_long_help = docs::SPECTRUM)]
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    StarLoop,
    DummyLoops,
    StarClique,
    TwoStars,
    Bipartite,
    BipartiteDetect,
}

#[derive(Clone, Debug, Args)]
pub struct ScenarioFlags {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Number of spokes (star scenarios). A comma-separated list runs a sweep
    /// where the command supports it.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Clique size (star-clique).
    #[arg(long)]
    pub m: Option<usize>,
    /// First vertex set size (bipartite). Accepts a list like --n.
    #[arg(long, value_delimiter = ',')]
    pub n1: Vec<usize>,
    /// Second vertex set size (bipartite).
    #[arg(long)]
    pub n2: Option<usize>,
    /// Dummy-loop phase in radians; `pi`, `-pi/3`, `2pi/3` are accepted.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_phase, default_value = "pi")]
    pub phi: f64,
}

#[derive(Clone, Debug, Args)]
pub struct GraphInput {
    /// Read the graph from an adjacency-list file instead of building it.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    /// The scenario's own initial state.
    Default,
    /// Antisymmetric uniform superposition over accessible edges.
    Antisymmetric,
    /// Uniform superposition over all directed states, loops included.
    UniformWithLoops,
    /// Two stars: star A minus star B over all states.
    TwoStarSigned,
    /// Two stars: states leaving center A minus states leaving center B.
    TwoStarOutgoing,
}

impl InitialArg {
    pub fn kind(self) -> Option<InitialStateKind> {
        match self {
            InitialArg::Default => None,
            InitialArg::Antisymmetric => Some(InitialStateKind::AntisymmetricUniform),
            InitialArg::UniformWithLoops => Some(InitialStateKind::UniformAllWithLoops),
            InitialArg::TwoStarSigned => Some(InitialStateKind::TwoStarSigned),
            InitialArg::TwoStarOutgoing => Some(InitialStateKind::TwoStarOutgoingSigned),
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub input: GraphInput,
    /// Number of steps (default: the optimal count).
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum, default_value = "default")]
    pub initial: InitialArg,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub input: GraphInput,
    /// Last step of the series.
    #[arg(long)]
    pub n_max: u64,
    #[arg(long, value_enum, default_value = "default")]
    pub initial: InitialArg,
    /// CSV output file; the JSON summary then goes to stdout. Without it the
    /// CSV goes to stdout and the summary to stderr.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub input: GraphInput,
    /// Tolerance for the exact checks.
    #[arg(long, env = "QWALK_TOL", default_value_t = qwalk_core::verify::DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub input: GraphInput,
    /// Measurements per decision.
    #[arg(long, default_value_t = 10)]
    pub repetitions: u32,
    /// Independent decisions; more than one reports the flagged frequency.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[command(flatten)]
    pub input: GraphInput,
    /// Monte Carlo trials of the classical probing.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub scenario: ScenarioFlags,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}

fn required<T: Copy>(v: Option<T>, field: &'static str, scenario: &str) -> Result<T, Error> {
    v.ok_or_else(|| invalid(field, &format!("required for {scenario}")))
}

impl ScenarioFlags {
    /// Sizes of the sweep axis: `--n` for stars, `--n1` for bipartite graphs.
    fn sizes(&self) -> Result<&[usize], Error> {
        let (field, sizes) = match self.scenario {
            ScenarioArg::Bipartite | ScenarioArg::BipartiteDetect => ("n1", &self.n1),
            _ => ("n", &self.n),
        };
        if sizes.is_empty() {
            return Err(invalid(field, &format!("required for {}", self.name())));
        }
        Ok(sizes)
    }

    fn name(&self) -> String {
        self.scenario.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    fn params_for(&self, size: usize) -> Result<ScenarioParams, Error> {
        let name = self.name();
        let p = match self.scenario {
            ScenarioArg::StarLoop => ScenarioParams::StarLoop { n: size },
            ScenarioArg::DummyLoops => ScenarioParams::StarDummyLoops { n: size, phi: self.phi },
            ScenarioArg::StarClique => ScenarioParams::StarClique { n: size, m: required(self.m, "m", &name)? },
            ScenarioArg::TwoStars => ScenarioParams::TwoStars { n: size },
            ScenarioArg::Bipartite => ScenarioParams::BipartiteExtraEdge { n1: size, n2: required(self.n2, "n2", &name)? },
            ScenarioArg::BipartiteDetect => ScenarioParams::BipartiteDetect { n1: size, n2: required(self.n2, "n2", &name)? },
        };
        p.validate()?;
        Ok(p)
    }

    /// All parameter sets of the sweep, validated.
    pub fn sweep(&self) -> Result<Vec<ScenarioParams>, Error> {
        self.sizes()?.iter().map(|&s| self.params_for(s)).collect()
    }

    /// The single parameter set; a list of sizes is rejected.
    pub fn single(&self) -> Result<ScenarioParams, Error> {
        let sizes = self.sizes()?;
        if sizes.len() != 1 {
            let field = if matches!(self.scenario, ScenarioArg::Bipartite | ScenarioArg::BipartiteDetect) { "n1" } else { "n" };
            return Err(invalid(field, "this command takes a single size"));
        }
        self.params_for(sizes[0])
    }
}

/// Parses a phase given as a number or as a rational multiple of pi.
pub fn parse_phase(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("`{s}` is not a phase (try 3.14159, pi, -pi/3 or 2pi/3)");
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(&t)),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let coef = match num.strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*') {
        "" => 1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(sign * coef * PI / den)
}
