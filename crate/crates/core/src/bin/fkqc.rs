use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fkqc::cli::{cmd_efficiency, cmd_run, EXIT_FAILURE};
use fkqc::config::{parse_config, parse_lambdas, parse_tolerances, RunConfig};
use fkqc::mesh::RefinementFactor;

#[derive(Parser)]
#[command(version, about = "Goal-oriented adaptive quasicontinuum runs for a Frenkel-Kontorova chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive loop and write trace.csv, mesh_<iter>.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tau_gl: Option<f64>,
        /// Integer >= 2 or `inf`.
        #[arg(long)]
        lambda: Option<RefinementFactor>,
        #[arg(long, value_parser = ["on", "off"])]
        oracle: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimator and mesh efficiency across refinement factors.
    Efficiency {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated stopping tolerances defining the meshes.
        #[arg(long, value_parser = parse_tolerances)]
        tolerances: Option<std::vec::Vec<f64>>,
        /// Comma-separated factors, e.g. `2,4,8,inf`.
        #[arg(long, value_parser = parse_lambdas)]
        lambdas: Option<std::vec::Vec<RefinementFactor>>,
        /// Tolerance of the per-factor runs.
        #[arg(long)]
        sweep_tau_gl: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> fkqc::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| fkqc::Error::Io {
        path: path.clone(),
        source,
    })?;
    parse_config(&text)
}

fn execute(command: Command) -> fkqc::Result<i32> {
    match command {
        Command::Run {
            config,
            tau_gl,
            lambda,
            oracle,
            out,
        } => {
            let mut c = load(&config)?;
            if let Some(t) = tau_gl {
                c.adapt.tau_gl = t;
            }
            if let Some(l) = lambda {
                c.adapt.factor = l;
            }
            if let Some(o) = oracle {
                c.oracle = o == "on";
            }
            if let Some(o) = out {
                c.out = o;
            }
            c.adapt.validate()?;
            let outcome = cmd_run(&c)?;
            let last = outcome.trace.final_record();
            eprintln!(
                "{} after {} iterations: dof {}, eta {:e}",
                if outcome.trace.converged { "converged" } else { "not converged" },
                outcome.trace.iterations(),
                last.dof,
                last.eta
            );
            Ok(outcome.exit_code)
        }
        Command::Efficiency {
            config,
            tolerances,
            lambdas,
            sweep_tau_gl,
            out,
        } => {
            let mut c = load(&config)?;
            if let Some(t) = tolerances {
                c.tolerances = t;
            }
            if let Some(l) = lambdas {
                c.lambdas = l;
            }
            if let Some(t) = sweep_tau_gl {
                c.sweep_tau_gl = t;
            }
            if let Some(o) = out {
                c.out = o;
            }
            let (_, code) = cmd_efficiency(&c)?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
