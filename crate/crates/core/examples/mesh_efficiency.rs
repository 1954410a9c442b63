//! Degrees of freedom against goal error for each partial-refinement factor.
//!
//! `cargo run --release --example mesh_efficiency [tau_gl]`

use fkqc::adapt::{run, AdaptConfig, QcProblem};
use fkqc::mesh::RefinementFactor;
use fkqc::model::ModelParams;
use fkqc::oracle::Oracle;

fn main() -> fkqc::Result<()> {
    let tau_gl = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("tau_gl must be a number"))
        .unwrap_or(4e-10);
    let problem = QcProblem::dislocation(ModelParams::dislocation_experiment())?;
    let oracle = Oracle::new(&problem)?;
    let factors = [
        RefinementFactor::Finite(2),
        RefinementFactor::Finite(4),
        RefinementFactor::Finite(8),
        RefinementFactor::Infinite,
    ];
    let traces = factors
        .iter()
        .map(|&factor| {
            let config = AdaptConfig {
                factor,
                ..AdaptConfig::new(tau_gl)
            };
            run(&problem, problem.initial_mesh()?, &config, Some(&oracle))
        })
        .collect::<fkqc::Result<Vec<_>>>()?;

    print!("{:>3}", "it");
    for f in &factors {
        print!(" | {:>4} {:>10} {:>10}", format!("L={f}"), "|Q(e)|", "|eta|");
    }
    println!();
    let rows = traces.iter().map(|t| t.iterations()).max().unwrap_or(0);
    for i in 0..rows {
        print!("{:>3}", i + 1);
        for t in &traces {
            match t.records.get(i) {
                Some(r) => print!(
                    " | {:>4} {:>10.3e} {:>10.3e}",
                    r.dof,
                    r.exact_error.map_or(f64::NAN, |e| e.value.abs()),
                    r.eta.abs()
                ),
                None => print!(" | {:>26}", ""),
            }
        }
        println!();
    }
    let same = traces[1..]
        .windows(2)
        .all(|w| w[0].records.iter().map(|r| &r.mesh).eq(w[1].records.iter().map(|r| &r.mesh)));
    println!("meshes for L=4, 8, inf identical at every iteration: {same}");
    Ok(())
}
