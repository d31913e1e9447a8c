use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wshift::cli::{self, AnalyzeOptions, ClassifyOptions, OracleOptions, Outcome};

#[derive(Parser)]
#[command(name = "wshift", version, about = "Spectral pictures and certificates for weighted shift operators")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radii, spectra, point evaluations and classes of a shift
    Analyze {
        spec: PathBuf,
        /// Index window for the radius estimates
        #[arg(long, default_value_t = wshift::radii::DEFAULT_WINDOW)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory receiving one boundary CSV per region
        #[arg(long)]
        boundary_samples: Option<PathBuf>,
        /// Samples per boundary circle
        #[arg(long, default_value_t = cli::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Normality, hyponormality and the moment certificate
    Classify {
        spec: PathBuf,
        #[arg(long, default_value_t = cli::DEFAULT_HANKEL_ORDER)]
        hankel_order: usize,
        #[arg(long, default_value_t = wshift::momentclass::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncation probes at a point or over a polar grid
    Oracle {
        spec: PathBuf,
        /// Probe point as RE,IM
        #[arg(long, value_parser = cli::parse_lambda, allow_hyphen_values = true)]
        lambda: Option<num_complex::Complex64>,
        #[arg(long, default_value_t = cli::DEFAULT_DIM)]
        dim: usize,
        /// Polar grid as RxT
        #[arg(long, value_parser = cli::parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the factorial-run shift with r1 < r2
    Counterexample {
        #[arg(long)]
        factorial_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduces the reference values
    VerifyPaper,
}

fn main() -> ExitCode {
    let outcome: Outcome = match Args::parse().command {
        Command::Analyze { spec, n_max, out, boundary_samples, samples } => {
            cli::cmd_analyze(&spec, &AnalyzeOptions { n_max, out, boundary_samples, samples })
        }
        Command::Classify { spec, hankel_order, tol, out } => {
            cli::cmd_classify(&spec, &ClassifyOptions { hankel_order, tol, out })
        }
        Command::Oracle { spec, lambda, dim, grid, out } => {
            cli::cmd_oracle(&spec, &OracleOptions { lambda, dim, grid, out })
        }
        Command::Counterexample { factorial_max, out } => cli::cmd_counterexample(factorial_max, out.as_deref()),
        Command::VerifyPaper => cli::cmd_verify_paper(),
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
