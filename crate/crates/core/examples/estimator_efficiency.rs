//! How close the estimate comes to the true goal error on three meshes, for
//! several partial-refinement factors.
//!
//! The meshes are those reached with `Λ = 2` at tolerances 1e-1, 1e-3 and
//! 1e-5; each is then re-estimated with `Λ = 2, 4, 8, ∞`.

use fkqc::cli::efficiency_study;
use fkqc::config::RunConfig;

fn main() -> fkqc::Result<()> {
    let config = RunConfig::default();
    let study = efficiency_study(&config)?;
    println!("{:>4} {:>6} {:>13} {:>13} {:>13} {:>9} {:>9}", "mesh", "lambda", "|Q(e)|", "|eta|", "sum eta_qc", "ratio", "ratio_sum");
    for r in &study.rows {
        println!(
            "{:>4} {:>6} {:>13.6e} {:>13.6e} {:>13.6e} {:>9.6} {:>9.6}",
            r.mesh_id,
            r.lambda.to_string(),
            r.exact_error,
            r.eta.abs(),
            r.sum_eta_qc,
            r.ratio_eta(),
            r.ratio_sum()
        );
    }
    Ok(())
}
