//! Site energies of the chain and the quadratic form they assemble into.

use fkqc::model::{assemble_quadratic, atom_energy_atomistic, atom_energy_continuum, energy_ac, AtomVector, ModelParams, Partition};

fn main() -> fkqc::Result<()> {
    let params = ModelParams::new(0.1, 2.0, 1.0, 1.0, 8)?;
    let partition = Partition::block(8, -1, 2)?;
    println!("k12 = k1 + 4 k2 = {}", params.k12());

    let wells = AtomVector::from_fn(8, |i| params.well(i));
    println!("wells: {:?}", wells.as_slice());
    for i in [-3, 0, 1, 4] {
        let a = atom_energy_atomistic(&params, &wells, i)?;
        let c = atom_energy_continuum(&params, &wells, i)?;
        println!("atom {i:>2}: atomistic {:.4} continuum {:.4}", a.total(), c.total());
    }
    println!("E^ac(wells) = {}", energy_ac(&params, &partition, &wells)?);

    let quad = assemble_quadratic(&params, &partition)?;
    let h = quad.hessian().matrix();
    println!("Hessian {}x{}, half bandwidth {}", h.nrows(), h.ncols(), h.half_bandwidth());
    for i in [-3, 0] {
        let row: Vec<String> = h.row(params.slot(i)).map(|(j, v)| format!("{}:{v}", params.atom_at(j))).collect();
        println!("row of atom {i:>2}: {}", row.join(" "));
    }
    let y = wells.as_slice();
    println!(
        "bond-wise value {} vs expanded quadratic {}",
        quad.value_at(y)?,
        quad.expanded_value(y)?
    );
    Ok(())
}
