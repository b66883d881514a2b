mod commands;
mod config;
mod error;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Split-step solver for the nonlocal Fowler equation.
///
/// Exit codes: 0 success, 2 configuration error, 3 runtime error (blow-up,
/// CFL violation, failed study cells, I/O), 4 study hit the spatial-error
/// floor. Study parallelism is capped by FOWLER_SPLIT_THREADS (0 = serial).
#[derive(Parser)]
#[command(name = "fowler-split", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial profile and write its trajectory.
    Simulate(RunArgs),
    /// Measure temporal convergence orders of the splitting schemes.
    Converge(RunArgs),
    /// Evaluate the linear symbols and growth rates.
    Symbol(SymbolArgs),
}

/// Every flag overrides the value read from `--config`.
#[derive(Args)]
struct RunArgs {
    /// Flat key = value file, or a JSON sidecar from a previous run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid nodes (power of two, at least 16).
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    length: Option<String>,
    /// Burgers viscosity share; the linear flow gets 1 - epsilon.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "a-i")]
    a_i: Option<String>,
    #[arg(long = "b-i")]
    b_i: Option<String>,
    /// lie_xy, lie_yx, strang_xyx or strang_yxy.
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated schemes for `converge`.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    #[arg(long = "capture-every")]
    capture_every: Option<String>,
    /// bump_single, bump_double, bump_asym, gaussian or sine.
    #[arg(long)]
    init: Option<String>,
    /// Comma-separated initial data for `converge`.
    #[arg(long)]
    inits: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    width: Option<String>,
    #[arg(long = "cfl-safety")]
    cfl_safety: Option<String>,
    /// Burgers substep policy for `converge`: aligned or cfl.
    #[arg(long)]
    substeps: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("n", &self.n),
            ("length", &self.length),
            ("epsilon", &self.epsilon),
            ("lambda", &self.lambda),
            ("a_i", &self.a_i),
            ("b_i", &self.b_i),
            ("scheme", &self.scheme),
            ("schemes", &self.schemes),
            ("dt", &self.dt),
            ("t_final", &self.t_final),
            ("capture_every", &self.capture_every),
            ("init", &self.init),
            ("inits", &self.inits),
            ("amplitude", &self.amplitude),
            ("width", &self.width),
            ("cfl_safety", &self.cfl_safety),
            ("substeps", &self.substeps),
            ("out", &self.out),
            ("format", &self.format),
            ("seed", &self.seed),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        Ok(config)
    }
}

#[derive(Args)]
struct SymbolArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Linear-flow viscosity share, `1 - epsilon`; `--eta 1` is allowed.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "a-i")]
    a_i: Option<String>,
    #[arg(long = "b-i")]
    b_i: Option<String>,
    /// Comma-separated frequencies.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    xi: Vec<f64>,
    /// Evenly spaced frequencies, `start:stop:count`.
    #[arg(long = "xi-range", allow_hyphen_values = true)]
    xi_range: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SymbolArgs {
    fn run(&self) -> Result<(), CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let (Some(eps), Some(eta)) = (&self.epsilon, &self.eta) {
            return Err(CliError::Config(format!(
                "give either --epsilon ({eps}) or --eta ({eta}), not both"
            )));
        }
        for (key, value) in [
            ("epsilon", &self.epsilon),
            ("eta", &self.eta),
            ("lambda", &self.lambda),
            ("a_i", &self.a_i),
            ("b_i", &self.b_i),
        ] {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        let mut xis = self.xi.clone();
        if let Some(range) = &self.xi_range {
            xis.extend(commands::parse_range(range)?);
        }
        if xis.is_empty() {
            xis = vec![0.0, 1.0];
        }
        commands::symbol(&config, &xis, self.out.as_deref())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => args.resolve().and_then(|c| commands::simulate(&c)),
        Command::Converge(args) => args.resolve().and_then(|c| commands::converge(&c)),
        Command::Symbol(args) => args.run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("fowler-split: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
