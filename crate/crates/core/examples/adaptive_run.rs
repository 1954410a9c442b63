//! Adaptive coarsening of the dislocation chain down to a goal tolerance.
//!
//! `cargo run --release --example adaptive_run [tau_gl]`

use fkqc::adapt::{run, AdaptConfig, QcProblem};
use fkqc::model::ModelParams;
use fkqc::oracle::Oracle;

fn main() -> fkqc::Result<()> {
    let tau_gl = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("tau_gl must be a number"))
        .unwrap_or(1e-5);
    let problem = QcProblem::dislocation(ModelParams::dislocation_experiment())?;
    let oracle = Oracle::new(&problem)?;
    let trace = run(&problem, problem.initial_mesh()?, &AdaptConfig::new(tau_gl), Some(&oracle))?;

    println!("{:>4} {:>5} {:>6} {:>6} {:>14} {:>14} {:>14}", "it", "dof", "min_nu", "max_nu", "|eta|", "sum eta_qc", "|Q(e)|");
    for r in &trace.records {
        let nu = |v: Option<usize>| v.map_or("-".to_string(), |n| n.to_string());
        println!(
            "{:>4} {:>5} {:>6} {:>6} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.iteration,
            r.dof,
            nu(r.min_nu),
            nu(r.max_nu),
            r.eta.abs(),
            r.sum_eta_qc,
            r.exact_error.map_or(f64::NAN, |e| e.value.abs()),
        );
    }
    println!("converged: {}", trace.converged);
    Ok(())
}
