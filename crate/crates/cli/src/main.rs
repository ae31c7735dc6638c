mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "kmtrade", version, about = "Coreset summarization and computation-statistics tradeoffs for k-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a Gaussian-mixture dataset with Dirichlet component weights.
    Gen(GenArgs),
    /// Sweep an (n, s) grid for one summarization procedure.
    Sweep(SweepArgs),
    /// Extract Pareto frontiers from sweep output.
    Pareto(ParetoArgs),
    /// Run the tradeoff navigation algorithm on a dataset.
    Tram(TramArgs),
    /// Evaluate the analytic tradeoff model.
    Analytic(AnalyticArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct Output {
    /// Output CSV path.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Run manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k_true: usize,
    #[arg(long, default_value_t = 0.0)]
    pub box_lo: f64,
    #[arg(long, default_value_t = 100.0)]
    pub box_hi: f64,
    /// Isotropic per-coordinate variance.
    #[arg(long, default_value_t = 5.0)]
    pub sigma2: f64,
    /// Dirichlet concentration of the mixture weights.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground-truth means and weights [default: <out stem>.truth.csv].
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct Input {
    /// Dataset CSV, one point per row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Treat the first row as a header.
    #[arg(long)]
    pub has_header: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcedureArg {
    Uniform,
    Coreset,
}

#[derive(Args, Debug, Serialize)]
pub struct SolverArgs {
    /// Number of centers.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum)]
    pub procedure: ProcedureArg,
    /// Comma-separated, strictly ascending data sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_values: Vec<usize>,
    /// Comma-separated, strictly ascending summary sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub s_values: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub repeats: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 2)]
    pub bicriteria_factor: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent cells [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Run cells one at a time for clean timing.
    #[arg(long, conflicts_with = "jobs")]
    pub timing_strict: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["eps", "n"])))]
pub struct ParetoArgs {
    /// Sweep CSV files; records are grouped by procedure.
    #[arg(long = "lambda", required = true)]
    pub lambdas: Vec<PathBuf>,
    /// Data-time frontier at this target risk.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Risk-time frontier at this data size.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 0.2 {
        Ok(v)
    } else {
        Err(format!("delta must satisfy 0 < delta < 1/5, got {v}"))
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TramArgs {
    #[command(flatten)]
    pub input: Input,
    /// Target risk.
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1, value_parser = parse_delta)]
    pub delta: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Initial truncation size [default: from a pilot solve].
    #[arg(long)]
    pub m0: Option<usize>,
    /// Initial summary size [default: from a pilot solve].
    #[arg(long)]
    pub s0: Option<usize>,
    /// m0 = c_m * eps_ref / eps when m0 is not given.
    #[arg(long, default_value_t = 1000.0)]
    pub c_m: f64,
    /// s0 = c_s * eps_ref / eps when s0 is not given.
    #[arg(long, default_value_t = 100.0)]
    pub c_s: f64,
    #[arg(long, default_value_t = 1000)]
    pub pilot_size: usize,
    /// Support radius [default: largest point norm].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Solver exponent; sets the summary growth to 2^(1/beta) [default: 1/log2(1.5)].
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub gamma_m: f64,
    #[arg(long, default_value_t = 0.2)]
    pub validation_fraction: f64,
    #[arg(long, default_value_t = 2)]
    pub bicriteria_factor: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Final centers CSV [default: <out stem>.centers.csv].
    #[arg(long)]
    pub centers: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    DataTime,
    RiskTime,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Log,
    Linear,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyticArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Range start [default: 100 for data-time, 20 for risk-time].
    #[arg(long)]
    pub from: Option<f64>,
    /// Range end [default: 1e6 for data-time, 1500 for risk-time].
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Range spacing [default: log for data-time, linear for risk-time].
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Data size for risk-time curves.
    #[arg(long, default_value_t = 2000)]
    pub n: u64,
    /// Target risk for data-time curves.
    #[arg(long, default_value_t = 300.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 192.0)]
    pub sigma_bar: f64,
    #[arg(long, default_value_t = 100.0)]
    pub alpha_init: f64,
    #[arg(long, default_value_t = 100.0)]
    pub alpha_samp: f64,
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 5.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Drop sigma_bar from the estimation bound.
    #[arg(long)]
    pub no_sigma: bool,
    #[command(flatten)]
    pub output: Output,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Sweep(_) => "sweep",
            Command::Pareto(_) => "pareto",
            Command::Tram(_) => "tram",
            Command::Analytic(_) => "analytic",
        }
    }

    fn output(&self) -> &Output {
        match self {
            Command::Gen(a) => &a.output,
            Command::Sweep(a) => &a.output,
            Command::Pareto(a) => &a.output,
            Command::Tram(a) => &a.output,
            Command::Analytic(a) => &a.output,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Gen(a) => Some(a.seed),
            Command::Sweep(a) => Some(a.seed),
            Command::Tram(a) => Some(a.seed),
            Command::Pareto(_) | Command::Analytic(_) => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = &cli.command;
    let mut manifest = RunManifest::start(cmd.name(), serde_json::to_value(cmd).unwrap_or_default(), cmd.seed());
    let result = match cmd {
        Command::Gen(a) => commands::gen(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Pareto(a) => commands::pareto(a),
        Command::Tram(a) => commands::tram(a),
        Command::Analytic(a) => commands::analytic(a),
    };
    let out = cmd.output();
    let manifest_path = out.manifest.clone().unwrap_or_else(|| manifest::default_path(&out.out));
    let code = match &result {
        Ok(outputs) => {
            manifest.outputs = outputs.clone();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.error = Some(e.to_string());
            ExitCode::from(1)
        }
    };
    if let Err(e) = manifest.finish(&manifest_path) {
        eprintln!("error: writing manifest {}: {e}", manifest_path.display());
        return ExitCode::from(1);
    }
    code
}
