//! Modeling and coarsening errors of the final adaptive mesh, measured
//! against the full atomistic and atomistic-continuum solutions.

use fkqc::adapt::{run, AdaptConfig, QcProblem};
use fkqc::model::ModelParams;
use fkqc::oracle::Oracle;

fn main() -> fkqc::Result<()> {
    let problem = QcProblem::dislocation(ModelParams::dislocation_experiment())?;
    let oracle = Oracle::new(&problem)?;
    let (qa, qac) = oracle.goal_values();
    println!("Q(y^a) = {qa:.12}, Q(y^ac) = {qac:.12}");

    let trace = run(&problem, problem.initial_mesh()?, &AdaptConfig::new(1e-5), None)?;
    let state = problem.solve_qc(trace.final_mesh())?;
    let report = oracle.report(&state)?;
    let error = oracle.exact_error(&state)?;
    println!("final mesh: {} repatoms", trace.final_mesh().len());
    println!("modeling error   |Q(e^a-ac)|  = {:.6e}", report.modeling_error);
    println!("coarsening error |Q(e^ac-qc)| = {:.6e}", report.coarsening_error);
    println!("total error      |Q(e^a-qc)|  = {:.6e} <= {:.6e}", report.total_error, report.triangle_bound);
    println!(
        "dual identity: q.e = {:e}, g.R = {:e} (relative mismatch {:e})",
        error.value,
        error.dual_weighted,
        error.relative_mismatch()
    );
    Ok(())
}
