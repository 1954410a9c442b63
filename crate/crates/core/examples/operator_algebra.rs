//! Interpolation, restriction and boundary operators on a short chain, and
//! the identities that tie them together.

use fkqc::mesh::{build_boundary, build_interp_aq, build_interp_ap, build_interp_pq, build_restriction_qp, partial_refine, Mesh, RefinementFactor};
use fkqc::operator::Level;

fn main() -> fkqc::Result<()> {
    let m = 16;
    let qc = Mesh::new(Level::Quasicontinuum, m, vec![-15, -14, -9, -3, -2, -1, 0, 1, 2, 3, 4, 10, 15, 16])?;
    let pair = partial_refine(&qc, RefinementFactor::Finite(2))?;
    println!("qc: {}", pair.coarse());
    println!("pc: {}", pair.fine());
    println!("mu: {:?}", pair.anchor());

    let i_aq = build_interp_aq(&qc);
    let i_ap = build_interp_ap(&pair);
    let i_pq = build_interp_pq(&pair);
    let r_qp = build_restriction_qp(&pair);
    for (name, op) in [("I^aq", &i_aq), ("I^ap", &i_ap), ("I^pq", &i_pq)] {
        let worst = op.matrix().row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        println!("{name}: {} -> {}, max |row sum - 1| = {worst:e}", op.domain(), op.codomain());
    }

    let composed = i_ap.compose(&i_pq)?;
    println!("max |I^ap I^pq - I^aq| = {:e}", composed.matrix().max_abs_diff(i_aq.matrix()));

    let rp = r_qp.compose(&i_pq)?;
    let id = fkqc::sparse::CsrMatrix::identity(qc.len());
    println!("R^qp I^pq is the identity: {}", rp.matrix().max_abs_diff(&id) == 0.0);

    let ja = build_boundary(Level::Atomistic, 2 * m);
    let jq = build_boundary(Level::Quasicontinuum, qc.len());
    let ij = i_aq.compose(&jq)?;
    let projected = ja.compose(&ja.transpose())?.compose(&ij)?;
    println!("J^a J^aT I^aq J^q = I^aq J^q: {}", projected.matrix().max_abs_diff(ij.matrix()) == 0.0);

    // composing in the wrong order is a type error caught at run time
    match i_pq.compose(&i_ap) {
        Err(e) => println!("I^pq I^ap rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
