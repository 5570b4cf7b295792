//! Command-line driver: energy sweeps, family sweeps, table inversion,
//! exact-vs-semiclassical comparison, and randomized bound scans.
//!
//! Exit codes: 0 success, 1 bound violation found by `scan`, 2 configuration
//! error, 3 numerical failure.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    PositivePower,
    NegativePower,
}

#[derive(Parser, Debug)]
#[command(
    name = "wkbound",
    version,
    about = "Semiclassical uncertainty products for 1D bound states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Particle mass m.
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Reduced Planck constant ħ.
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Potential as inline JSON (`{...}`) or a path to a JSON file.
    #[arg(long)]
    potential: String,
    /// Lowest energy of the sweep.
    #[arg(long)]
    emin: f64,
    /// Highest energy of the sweep.
    #[arg(long)]
    emax: f64,
    /// Number of energies.
    #[arg(long)]
    n_energies: usize,
    /// Use logarithmic spacing (requires positive emin).
    #[arg(long)]
    log_grid: bool,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Power-law family to sweep.
    #[arg(long, value_enum)]
    family: SweepFamily,
    /// Comma-separated alpha values.
    #[arg(long)]
    alpha_grid: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct InvertArgs {
    /// Input I(E) table CSV.
    #[arg(long)]
    input: std::path::PathBuf,
    /// Optional reference potential; records the reconstruction residual.
    #[arg(long)]
    potential: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Potential as inline JSON or a file path.
    #[arg(long)]
    potential: String,
    /// Highest state label to compare.
    #[arg(long, default_value_t = 50)]
    n_states: usize,
    /// Labels N >= n_min enter the summary maximum.
    #[arg(long, default_value_t = 20)]
    n_min: usize,
    /// Interior grid points of the eigensolver.
    #[arg(long, default_value_t = wkbound::oracle::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Dump eigenpairs to a long-format CSV (N,E,x,psi).
    #[arg(long)]
    dump_states: Option<std::path::PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Number of random profiles.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// RNG seed; identical seeds give byte-identical reports.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate (E, I, J, K, N, U) for a potential over an energy grid.
    Analyze(AnalyzeArgs),
    /// Compare closed-form and numerical U(alpha) for a power-law family.
    Sweep(SweepArgs),
    /// Reconstruct the accessible length from a sampled I(E) table.
    Invert(InvertArgs),
    /// Compare exact eigensolver uncertainties with the semiclassical ratio.
    Verify(VerifyArgs),
    /// Random-profile scan of the bounds pi/(2*sqrt(3)) <= U <= 1.
    Scan(ScanArgs),
}

fn init_threads() -> Result<(), CliError> {
    match std::env::var("WKBOUND_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Config(format!(
                    "WKBOUND_THREADS must be a positive integer, got '{raw}'"
                ))
            })?;
            if n == 0 {
                return Err(CliError::Config(
                    "WKBOUND_THREADS must be a positive integer".into(),
                ));
            }
            #[cfg(feature = "parallel")]
            {
                // Ignore 'already built': tests may call twice in-process.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("{e}");
        return ExitCode::from(e.code());
    }
    let outcome = match cli.command {
        Command::Analyze(args) => commands::analyze(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Invert(args) => commands::invert(args),
        Command::Verify(args) => commands::verify(args),
        Command::Scan(args) => commands::scan(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
