//! Splitting qc intervals into the finer pc intervals used for the dual.

use fkqc::adapt::initial_mesh;
use fkqc::mesh::{partial_refine, subdivide_interval, RefinementFactor};
use fkqc::model::Partition;

fn main() -> fkqc::Result<()> {
    let cases: [(usize, RefinementFactor); 6] = [
        (2048, RefinementFactor::Finite(2)),
        (5, RefinementFactor::Finite(2)),
        (3, RefinementFactor::Finite(4)),
        (1, RefinementFactor::Finite(8)),
        (10, RefinementFactor::Finite(4)),
        (6, RefinementFactor::Infinite),
    ];
    for (nu, factor) in cases {
        println!("nu = {nu:>4}, lambda = {factor:>3}: {:?}", subdivide_interval(nu, factor));
    }

    let mesh = initial_mesh(&Partition::block(40, -1, 2)?)?;
    for factor in [RefinementFactor::Finite(2), RefinementFactor::Finite(8)] {
        let pair = partial_refine(&mesh, factor)?;
        println!("lambda = {factor}: {} qc repatoms -> {} pc repatoms", mesh.len(), pair.fine().len());
        println!("  pc: {}", pair.fine());
    }
    Ok(())
}
