mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "specflow", version, about = "Eigenvalue flow of rank-one perturbations A + tau u v*")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal polynomial, p_uv, q0, frozen eigenvalues, critical points and
    /// definability verdicts.
    Portrait { file: PathBuf },
    /// Track eigenvalues along the ray tau = t e^{i theta}.
    Trace {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 400)]
        steps: usize,
    },
    /// Track eigenvalues once around |tau| = t and report the monodromy.
    Circle {
        file: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 400)]
        steps: usize,
    },
    /// Extract the level curves |Q(z)| = 1/t.
    Levelset {
        file: PathBuf,
        #[arg(long)]
        t: f64,
        /// x0,x1,y0,y1
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 400)]
        res: usize,
    },
    /// Compare large-|tau| eigenvalues with their asymptotic expansions.
    Asymptotics {
        file: PathBuf,
        /// Moduli of tau; defaults to five decades above the validity bound.
        #[arg(long, value_delimiter = ',')]
        tau_grid: Option<Vec<f64>>,
        /// Direction of the grid in the tau plane.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        theta: f64,
    },
    /// Check the spectral symmetries of a structured system.
    CheckStructured {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1,
              default_value = "-1000,-10,-1,1,10,1000")]
        tau_samples: Vec<f64>,
    },
    /// Predict how many eigenvalues diverge when one entry of a nonnegative
    /// matrix grows.
    CheckNonneg {
        file: PathBuf,
        /// 1-based row,column of the perturbed entry.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        edge: Vec<usize>,
        #[arg(long, default_value_t = 1e8)]
        tau: f64,
    },
    /// Run all invariant suites; exit code 2 if any fails.
    Verify { file: PathBuf },
}

fn configure_threads() {
    if let Some(n) = std::env::var("SPECFLOW_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match commands::run(cli.command, &cli.out) {
        Ok(outcome) => {
            for p in &outcome.written {
                eprintln!("wrote {}", p.display());
            }
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
