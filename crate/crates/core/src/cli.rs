//! The `run` and `efficiency` commands behind the `fkqc` binary.

use std::fs;
use std::path::Path;

use crate::adapt::{run, AdaptConfig, AdaptTrace, QcProblem};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mesh::RefinementFactor;
use crate::oracle::Oracle;
use crate::output::{efficiency_csv, mesh_csv, mesh_efficiency_csv, summary_json, trace_csv, EfficiencyRow};

/// Process exit codes.
pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn problem(config: &RunConfig) -> Result<QcProblem> {
    QcProblem::new(config.params, config.partition()?, config.boundary)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub trace: AdaptTrace,
    pub exit_code: i32,
}

/// Runs the adaptive loop and writes `trace.csv`, `mesh_<iter>.csv` and
/// `summary.json` to `config.out`.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome> {
    let problem = problem(config)?;
    let oracle = if config.oracle { Some(Oracle::new(&problem)?) } else { None };
    let trace = run(&problem, problem.initial_mesh()?, &config.adapt, oracle.as_ref())?;

    prepare(&config.out)?;
    if config.formats.csv {
        write(&config.out, "trace.csv", &trace_csv(&trace))?;
        for r in &trace.records {
            write(&config.out, &format!("mesh_{}.csv", r.iteration), &mesh_csv(r))?;
        }
    }
    if config.formats.json {
        write(&config.out, "summary.json", &summary_json(&trace, config))?;
    }
    let exit_code = if trace.converged { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED };
    Ok(RunOutcome { trace, exit_code })
}

#[derive(Debug)]
pub struct EfficiencyStudy {
    /// Runs stopped at each tolerance; their final meshes are the study meshes.
    pub mesh_runs: Vec<AdaptTrace>,
    /// Every (mesh, factor) pair, ordered by mesh then factor.
    pub rows: Vec<EfficiencyRow>,
    /// One full run per factor at `sweep_tau_gl`.
    pub sweeps: Vec<(RefinementFactor, AdaptTrace)>,
}

impl EfficiencyStudy {
    pub fn all_converged(&self) -> bool {
        self.mesh_runs.iter().chain(self.sweeps.iter().map(|(_, t)| t)).all(|t| t.converged)
    }
}

/// Runs `jobs` on scoped threads and returns the results in input order.
fn parallel<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|job| s.spawn(|| f(job))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Builds the meshes of the study by running to each tolerance with the
/// configured factor, re-estimates each with every factor in `lambdas`, and
/// runs the loop once per factor to `sweep_tau_gl`.
pub fn efficiency_study(config: &RunConfig) -> Result<EfficiencyStudy> {
    let problem = problem(config)?;
    let oracle = Oracle::new(&problem)?;
    let initial = problem.initial_mesh()?;

    let mesh_runs = parallel(&config.tolerances, |&tau_gl| {
        let adapt = AdaptConfig { tau_gl, ..config.adapt };
        run(&problem, initial.clone(), &adapt, Some(&oracle))
    })?;

    let mut rows = Vec::new();
    for (k, trace) in mesh_runs.iter().enumerate() {
        let state = problem.solve_qc(trace.final_mesh())?;
        let exact = oracle.exact_error(&state)?.value.abs();
        let reports = parallel(&config.lambdas, |&factor| problem.estimate(&state, factor))?;
        for (&lambda, report) in config.lambdas.iter().zip(reports) {
            rows.push(EfficiencyRow {
                mesh_id: k + 1,
                lambda,
                eta: report.eta,
                sum_eta_qc: report.sum_eta_qc(),
                exact_error: exact,
            });
        }
    }

    let sweeps = parallel(&config.lambdas, |&factor| {
        let adapt = AdaptConfig {
            tau_gl: config.sweep_tau_gl,
            factor,
            ..config.adapt
        };
        Ok((factor, run(&problem, initial.clone(), &adapt, Some(&oracle))?))
    })?;

    Ok(EfficiencyStudy {
        mesh_runs,
        rows,
        sweeps,
    })
}

/// Writes `efficiency.csv` and `mesh_efficiency.csv` to `config.out`.
pub fn cmd_efficiency(config: &RunConfig) -> Result<(EfficiencyStudy, i32)> {
    let study = efficiency_study(config)?;
    prepare(&config.out)?;
    write(&config.out, "efficiency.csv", &efficiency_csv(&study.rows))?;
    write(&config.out, "mesh_efficiency.csv", &mesh_efficiency_csv(&study.sweeps))?;
    let code = if study.all_converged() { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED };
    Ok((study, code))
}
