//! `hdinfer` command-line front end: significance tests on CSV data, simulation
//! scenarios and design diagnostics.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdinfer::inference::DEFAULT_XI;
use hdinfer::report::{design_diagnostics, run_test, TestConfig};
use hdinfer::simlab::{projection_bias_histogram, run_scenario, Model, ScenarioConfig};

use input::InputError;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "hdinfer", version, about = "Bias-corrected Ridge significance testing for p >> n")]
struct Cli {
    /// Worker threads; falls back to HDINFER_THREADS, then to all cores.
    /// Results do not depend on this value.
    #[arg(long, global = true, env = "HDINFER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single and group p-values with familywise error control.
    Test(TestArgs),
    /// Replicated synthetic experiment with an (M1) or (M2) design.
    Simulate(SimulateArgs),
    /// Projection, variance and detection diagnostics of a design.
    DesignDiag(DiagArgs),
}

/// A penalty given on the command line, where "auto" picks the default.
#[derive(Debug, Clone, Copy)]
struct Penalty(Option<f64>);

fn parse_lambda(s: &str) -> Result<Penalty, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Penalty(None));
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Penalty(Some(v))),
        _ => Err(format!("expected \"auto\" or a positive number, got {s:?}")),
    }
}

#[derive(Args, Debug)]
struct TestArgs {
    /// Design matrix CSV (rows are observations).
    #[arg(long)]
    x: PathBuf,
    /// Response CSV with one column.
    #[arg(long)]
    y: PathBuf,
    /// Groups JSON: [{"label": "...", "indices": [1-based, ...]}].
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Ridge penalty, or "auto" for 1/n.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    ridge_lambda: Penalty,
    /// Scaled-Lasso penalty, or "auto" for 2 sqrt(log p / n).
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda0: Penalty,
    #[arg(long, default_value_t = DEFAULT_XI)]
    xi: f64,
    #[arg(long, default_value_t = 0.0)]
    zeta: f64,
    #[arg(long, default_value_t = 10_000)]
    mc_draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    s0: usize,
    /// Size of the active coefficients.
    #[arg(long)]
    b: f64,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Equicorrelation (default 0 for m1, 0.8 for m2).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    mc_draws: usize,
    /// Test the groups {1..g} and {p-g+1..p}.
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    ridge_lambda: Penalty,
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda0: Penalty,
    #[arg(long, default_value_t = DEFAULT_XI)]
    xi: f64,
    #[arg(long, default_value_t = 0.0)]
    zeta: f64,
    /// Output path for the JSON report (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a CSV histogram of the standardized projection bias.
    #[arg(long)]
    bias_histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModelArg {
    M1,
    M2,
}

#[derive(Args, Debug)]
struct DiagArgs {
    #[arg(long)]
    x: PathBuf,
    /// Ridge penalty, or "auto" for 1/n.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    ridge_lambda: Penalty,
    /// Noise level used for the detection bounds.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Sparsity used for the detection bounds.
    #[arg(long, default_value_t = 1)]
    s0_bound: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn cmd_test(a: TestArgs) -> anyhow::Result<()> {
    let x = input::read_matrix(&a.x)?;
    let y = input::read_response(&a.y)?;
    if y.len() != x.nrows() {
        return Err(InputError(format!(
            "response has {} rows but the design has {}",
            y.len(),
            x.nrows()
        ))
        .into());
    }
    let groups = match &a.groups {
        Some(path) => input::read_groups(path, x.ncols())?,
        None => Vec::new(),
    };
    let cfg = TestConfig {
        alpha: a.alpha,
        ridge_lambda: a.ridge_lambda.0,
        lambda0: a.lambda0.0,
        xi: a.xi,
        zeta: a.zeta,
        mc_draws: a.mc_draws,
        seed: a.seed,
    };
    let report = run_test(&x, &y, &groups, &cfg)?;
    let mut out = output::sink(a.out.as_deref())?;
    match a.format {
        Format::Json => output::write_json(&mut out, &report),
        Format::Csv => output::write_test_csv(&mut out, &report),
    }
}

fn cmd_simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let model = match a.model {
        ModelArg::M1 => Model::M1,
        ModelArg::M2 => Model::M2,
    };
    let mut cfg = ScenarioConfig::new(model, a.n, a.p, a.s0, a.b);
    if let Some(rho) = a.rho {
        cfg.rho = rho;
    }
    cfg.sigma = a.sigma;
    cfg.reps = a.reps;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.mc_draws = a.mc_draws;
    cfg.group_size = a.group_size;
    cfg.ridge_lambda = a.ridge_lambda.0;
    cfg.lambda0 = a.lambda0.0;
    cfg.xi = a.xi;
    cfg.zeta = a.zeta;
    cfg.validate()?;

    let report = run_scenario(&cfg)?;
    if let Some(path) = &a.bias_histogram {
        let hist = projection_bias_histogram(&cfg, a.bins)?;
        std::fs::write(path, hist.histogram.to_csv())?;
    }
    let mut out = output::sink(a.out.as_deref())?;
    output::write_json(&mut out, &report)
}

fn cmd_design_diag(a: DiagArgs) -> anyhow::Result<()> {
    let x = input::read_matrix(&a.x)?;
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return Err(InputError(format!("sigma must be positive, got {}", a.sigma)).into());
    }
    let diag = design_diagnostics(&x, a.ridge_lambda.0, a.sigma, a.s0_bound)?;
    let mut out = output::sink(a.out.as_deref())?;
    match a.format {
        Format::Json => output::write_json(&mut out, &diag),
        Format::Csv => output::write_diag_csv(&mut out, &diag),
    }
}

/// 2 for unusable input or configuration, 3 for failures inside the pipeline.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<hdinfer::Error>() {
        Some(
            hdinfer::Error::DimensionMismatch(_)
            | hdinfer::Error::InvalidArgument(_)
            | hdinfer::Error::NonFinite { .. }
            | hdinfer::Error::EmptyGroup,
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::DesignDiag(a) => cmd_design_diag(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
