//! Cross-checks against independent dense computations on short chains.

use fkqc::adapt::{initial_mesh, QcProblem};
use fkqc::assembly::{assemble_system, reduced_matrix, solve, SystemKind};
use fkqc::estimator::{
    coarse_dual_estimate, dislocation_goal, estimate, galerkin_defect, residual_ac, solve_pc_dual, PcOperators,
};
use fkqc::mesh::{
    build_interp_aq, partial_refine, well_lifting, BoundaryValues, Mesh, NestedMeshPair, RefinementFactor,
};
use fkqc::model::{assemble_quadratic, energy_ac, AtomVector, ModelParams, Partition};
use fkqc::operator::{Level, SpaceTaggedOperator};
use fkqc::oracle::{solve_full, FullLevel, Oracle};
use rand::{Rng, SeedableRng};

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

fn params(m: usize) -> ModelParams {
    ModelParams::new(0.1, 2.0, 1.0, 1.0, m).unwrap()
}

fn problem(m: usize) -> QcProblem {
    QcProblem::dislocation(params(m)).unwrap()
}

#[test]
fn nearest_neighbour_chain_matches_dense_solve() {
    let p = ModelParams::new(0.1, 2.0, 0.0, 1.0, 8).unwrap();
    let bc = BoundaryValues::in_wells(&p);
    let sol = solve_full(FullLevel::Atomistic, &p, &Partition::all_atomistic(8), &bc).unwrap();
    let y = sol.lifted().unwrap();

    // equilibrium of interior atom i: k1 (2 y_i - y_{i-1} - y_{i+1}) + k0 (y_i - w_i) = 0
    let n = 12;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    let fixed = [bc.l1, bc.l2, bc.r2, bc.r1];
    let pos = |slot: usize| -> Option<usize> { (2..14).contains(&slot).then(|| slot - 2) };
    for slot in 2..14 {
        let r = slot - 2;
        a[r][r] = 2.0 * p.k1() + p.k0();
        b[r] = p.k0() * p.well(p.atom_at(slot));
        for nb in [slot - 1, slot + 1] {
            match pos(nb) {
                Some(c) => a[r][c] -= p.k1(),
                None => {
                    let v = match nb {
                        1 => fixed[1],
                        14 => fixed[2],
                        _ => unreachable!(),
                    };
                    b[r] += p.k1() * v;
                }
            }
        }
    }
    let x = dense_solve(a, b);
    for (k, v) in x.iter().enumerate() {
        assert!((v - y[k + 2]).abs() < 1e-12, "atom slot {}: {v} vs {}", k + 2, y[k + 2]);
    }
}

#[test]
fn reduced_matrix_matches_dense_triple_product() {
    let p = params(16);
    let quad = assemble_quadratic(&p, &Partition::block(16, -1, 2).unwrap()).unwrap();
    let mesh = Mesh::new(Level::Quasicontinuum, 16, vec![-15, -14, -9, -3, -2, -1, 0, 1, 2, 3, 4, 10, 15, 16]).unwrap();
    let interp = build_interp_aq(&mesh);
    let reduced = reduced_matrix(&quad, &interp).unwrap().matrix().to_dense();

    let i_dense = interp.matrix().to_dense();
    // drop the two outer columns on each side
    let nq = mesh.len();
    let ij: Vec<Vec<f64>> = i_dense.iter().map(|row| row[2..nq - 2].to_vec()).collect();
    let h = quad.hessian().matrix().to_dense();
    let expected = dense_mul(&transpose(&ij), &dense_mul(&h, &ij));
    for (r, e) in reduced.iter().zip(&expected) {
        for (a, b) in r.iter().zip(e) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }
}

#[test]
fn banded_solve_matches_dense_solve() {
    let p = params(16);
    let quad = assemble_quadratic(&p, &Partition::block(16, -1, 2).unwrap()).unwrap();
    let mesh = Mesh::fully_refined(Level::Quasicontinuum, 16);
    let lifting = well_lifting(&p, &BoundaryValues::in_wells(&p), &mesh);
    let system = assemble_system(
        SystemKind::AtomisticContinuum,
        &quad,
        &SpaceTaggedOperator::identity(p.atom_space()),
        &lifting.atoms,
    )
    .unwrap();
    let x = solve(&system).unwrap().interior;
    let y = dense_solve(system.matrix.matrix().to_dense(), system.rhs.clone());
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn full_solution_minimizes_the_site_energy_sum() {
    let p = params(16);
    let part = Partition::block(16, -1, 2).unwrap();
    let sol = solve_full(FullLevel::AtomisticContinuum, &p, &part, &BoundaryValues::in_wells(&p)).unwrap();
    let y = sol.lifted().unwrap().to_vec();
    let e0 = energy_ac(&p, &part, &AtomVector::from_vec(16, y.clone()).unwrap()).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..50 {
        let mut z = y.clone();
        for v in &mut z[2..30] {
            *v += rng.gen_range(-1e-3..1e-3);
        }
        let e = energy_ac(&p, &part, &AtomVector::from_vec(16, z).unwrap()).unwrap();
        assert!(e > e0);
    }
}

#[test]
fn continuum_and_atomistic_solutions_differ() {
    let p = params(8);
    let bc = BoundaryValues::in_wells(&p);
    let a = solve_full(FullLevel::Atomistic, &p, &Partition::all_atomistic(8), &bc).unwrap();
    let c = solve_full(FullLevel::AtomisticContinuum, &p, &Partition::all_continuum(8), &bc).unwrap();
    let diff = a
        .lifted()
        .unwrap()
        .iter()
        .zip(c.lifted().unwrap())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff > 1e-3, "max difference {diff}");
}

#[test]
fn residual_of_exact_and_zero_vectors() {
    let pr = problem(16);
    let oracle = Oracle::new(&pr).unwrap();
    let system = oracle.system_ac();
    let zero = residual_ac(system, &vec![0.0; system.dim()]).unwrap();
    assert_eq!(zero, system.rhs);
    let exact = residual_ac(system, &oracle.atomistic_continuum().interior).unwrap();
    let scale = system.rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(exact.iter().all(|r| r.abs() < 1e-12 * scale));
}

/// Meshes visited on the way to full refinement, in order.
fn mesh_sequence(m: usize) -> Vec<Mesh> {
    let mut mesh = initial_mesh(&Partition::block(m, -1, 2).unwrap()).unwrap();
    let mut meshes = vec![mesh.clone()];
    while let Some(j) = mesh.intervals().iter().position(|&nu| nu >= 2) {
        let big: Vec<usize> = mesh
            .intervals()
            .iter()
            .enumerate()
            .filter(|&(k, &nu)| nu >= 2 && (k == j || nu > 3))
            .map(|(k, _)| k)
            .collect();
        mesh = mesh.bisect(&big).unwrap();
        meshes.push(mesh.clone());
    }
    meshes
}

#[test]
fn galerkin_orthogonality_on_short_chains() {
    let pr = problem(24);
    let oracle = Oracle::new(&pr).unwrap();
    let scale = oracle.system_ac().rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for mesh in mesh_sequence(24) {
        let state = pr.solve_qc(&mesh).unwrap();
        let d = galerkin_defect(&state.interp_aq, &state.residual).unwrap();
        assert!(d.iter().all(|v| v.abs() <= 1e-10 * scale), "{mesh}");
    }
}

#[test]
fn fully_refined_mesh_has_no_coarsening_error() {
    let pr = problem(16);
    let oracle = Oracle::new(&pr).unwrap();
    let state = pr.solve_qc(&Mesh::fully_refined(Level::Quasicontinuum, 16)).unwrap();
    let report = oracle.report(&state).unwrap();
    assert!(report.coarsening_error < 1e-13);
    assert!((report.triangle_bound - report.modeling_error).abs() < 1e-13);
}

#[test]
fn triangle_inequality_and_dual_identity_on_every_mesh() {
    let pr = problem(32);
    let oracle = Oracle::new(&pr).unwrap();
    for mesh in mesh_sequence(32) {
        let state = pr.solve_qc(&mesh).unwrap();
        let r = oracle.report(&state).unwrap();
        assert!(r.total_error <= r.triangle_bound + 1e-12);
        let e = oracle.exact_error(&state).unwrap();
        // rounding in positions of order M bounds the absolute agreement
        assert!((e.value - e.dual_weighted).abs() <= 1e-10 * e.value.abs() + 1e-14, "{mesh}: {e:?}");
    }
}

#[test]
fn infinite_factor_estimate_is_exact() {
    let pr = problem(40);
    let oracle = Oracle::new(&pr).unwrap();
    for mesh in mesh_sequence(40) {
        let state = pr.solve_qc(&mesh).unwrap();
        let exact = oracle.exact_error(&state).unwrap().value;
        let report = pr.estimate(&state, RefinementFactor::Infinite).unwrap();
        assert!(
            (report.eta - exact).abs() <= 1e-9 * exact.abs() + 1e-15,
            "{mesh}: eta {} exact {exact}",
            report.eta
        );
    }
}

#[test]
fn unrefined_dual_gives_zero_estimate() {
    let pr = problem(32);
    let mesh = initial_mesh(pr.partition()).unwrap();
    let state = pr.solve_qc(&mesh).unwrap();

    let pair = NestedMeshPair::new(mesh.clone(), mesh.clone()).unwrap();
    let ops = PcOperators::new(&pair);
    let dual = solve_pc_dual(pr.quadratic(), pr.goal(), &ops).unwrap();
    let report = estimate(&pair, dual, &state.residual, &ops).unwrap();
    assert!(report.eta.abs() < 1e-14, "eta = {}", report.eta);

    let coarse = coarse_dual_estimate(pr.quadratic(), pr.goal(), &state.interp_aq, &state.residual).unwrap();
    assert!(coarse.abs() < 1e-14, "{coarse}");

    let refined = pr.estimate(&state, RefinementFactor::Finite(2)).unwrap();
    assert!(refined.eta.abs() > 1e-6);
}

#[test]
fn estimator_splittings() {
    let pr = problem(64);
    let mesh = mesh_sequence(64)[3].clone();
    let state = pr.solve_qc(&mesh).unwrap();
    for factor in [2, 3, 8].map(|l| RefinementFactor::finite(l).unwrap()) {
        let pair = partial_refine(&mesh, factor).unwrap();
        let report = pr.estimate(&state, factor).unwrap();
        let sum: f64 = report.eta_pc.iter().sum();
        assert!((sum - report.eta).abs() <= 1e-12 * report.eta.abs());
        for &mu in pair.anchor() {
            assert_eq!(report.eta_pc[mu], 0.0);
        }
        assert_eq!(report.eta_qc.len(), mesh.len() - 1);
        assert!(report.eta_qc.iter().all(|&v| v >= 0.0));
        for (nu, eta) in mesh.intervals().iter().zip(&report.eta_qc) {
            if *nu == 1 {
                assert_eq!(*eta, 0.0);
            }
        }
    }
}

#[test]
fn weight_shift_by_qc_interpolant_leaves_estimate_unchanged() {
    let pr = problem(48);
    let mesh = mesh_sequence(48)[2].clone();
    let state = pr.solve_qc(&mesh).unwrap();
    let pair = partial_refine(&mesh, RefinementFactor::Finite(4)).unwrap();
    let ops = PcOperators::new(&pair);
    let report = pr.estimate(&state, RefinementFactor::Finite(4)).unwrap();
    let restricted = ops.restrict_residual(&state.residual).unwrap();
    let g = &report.dual_pc.interior;
    let base_weight: Vec<f64> = g.iter().zip(ops.qc_interpolant(g).unwrap()).map(|(a, b)| a - b).collect();

    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..10 {
        let z: Vec<f64> = (0..mesh.len() - 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jq = fkqc::mesh::build_boundary(Level::Quasicontinuum, mesh.len());
        let shift = ops.boundary_p.transpose().apply(&ops.interp_pq.apply(&jq.apply(&z).unwrap()).unwrap()).unwrap();
        let eta: f64 = base_weight
            .iter()
            .zip(&shift)
            .zip(&restricted)
            .map(|((w, s), r)| (w + s) * r)
            .sum();
        assert!((eta - report.eta).abs() <= 1e-10 * report.eta.abs() + 1e-14);
    }
}

#[test]
fn goal_of_lattice_and_constant() {
    let goal = dislocation_goal(16).unwrap();
    let lattice: Vec<f64> = (-15..=16).map(|i| i as f64 * 0.75).collect();
    assert_eq!(goal.value_on_atoms(&lattice).unwrap(), 0.75);
    assert_eq!(goal.value_on_atoms(&[2.0; 32]).unwrap(), 0.0);
}
