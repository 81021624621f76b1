//! `nlsv`: run NLS simulations from a config file and check the identities
//! their solutions must satisfy.
//!
//! Exit status: 0 success, 1 an identity failed verification, 2 bad config
//! or input, 3 the run aborted (blow-up or non-finite values).

mod commands;
mod config;
mod error;
mod fieldfile;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;
use crate::error::{CliError, Status};

/// Default output directory for `run`, overridable by `--out`.
const OUTPUT_DIR_ENV: &str = "NLSV_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "nlsv", version, about = "Pseudospectral NLS runs with conservation and virial-identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct OverrideArgs {
    /// Replace the config's time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Replace the config's final time.
    #[arg(long)]
    t_end: Option<f64>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Self { dt: a.dt, t_end: a.t_end }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Strang,
    Rk4,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve, write diagnostics, residuals and a report.
    Run {
        config: PathBuf,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "nlsv-output")]
        out: PathBuf,
        /// Also write a gnuplot script for the outputs.
        #[arg(long)]
        plot: bool,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Evolve and print the identity table; exit 1 if any row fails.
    Verify {
        config: PathBuf,
        /// Also write the full output bundle here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Fit the temporal convergence order over a ladder of step sizes.
    Convergence {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [4e-3, 2e-3, 1e-3])]
        dts: Vec<f64>,
        #[arg(long, value_enum)]
        integrator: Option<IntegratorArg>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Evaluate the negative-energy blow-up criterion and run until abort.
    Blowup {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Write a gnuplot script for a diagnostics CSV.
    Plot {
        diagnostics: PathBuf,
        /// Residual CSV; defaults to residuals.csv next to the diagnostics.
        #[arg(long)]
        residuals: Option<PathBuf>,
        /// Script path; defaults to plot.gp next to the diagnostics.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Run { config, out, plot, overrides } => commands::run(&config, &out, overrides.into(), plot),
        Command::Verify { config, out, overrides } => commands::verify_cmd(&config, out.as_deref(), overrides.into()),
        Command::Convergence { config, dts, integrator, t_end } => {
            let integrator = integrator.map(|i| match i {
                IntegratorArg::Strang => nlsv::Integrator::Strang,
                IntegratorArg::Rk4 => nlsv::Integrator::Rk4,
            });
            commands::convergence(&config, &dts, integrator, Overrides { dt: None, t_end })
        }
        Command::Blowup { config, out, overrides } => commands::blowup(&config, out.as_deref(), overrides.into()),
        Command::Plot { diagnostics, residuals, output } => {
            commands::plot(&diagnostics, residuals.as_deref(), output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("nlsv: {e}");
            e.status().into()
        }
    }
}
