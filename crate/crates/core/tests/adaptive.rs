use std::sync::OnceLock;

use fkqc::adapt::{mark, run, AdaptConfig, QcProblem};
use fkqc::mesh::RefinementFactor;
use fkqc::model::ModelParams;
use fkqc::oracle::Oracle;

fn setup() -> &'static (QcProblem, Oracle) {
    static SETUP: OnceLock<(QcProblem, Oracle)> = OnceLock::new();
    SETUP.get_or_init(|| {
        let problem = QcProblem::dislocation(ModelParams::dislocation_experiment()).unwrap();
        let oracle = Oracle::new(&problem).unwrap();
        (problem, oracle)
    })
}

#[test]
fn initial_mesh_has_two_large_elements() {
    let (problem, _) = setup();
    let mesh = problem.initial_mesh().unwrap();
    assert_eq!(mesh.len(), 12);
    let nus = mesh.intervals();
    // interval j = -4 and j = 4 in symmetric numbering
    assert_eq!(nus[1], 2048);
    assert_eq!(nus[9], 2048);
    assert_eq!(nus.iter().filter(|&&n| n == 1).count(), 9);
}

#[test]
fn first_marking_selects_both_large_elements() {
    let (problem, _) = setup();
    let mesh = problem.initial_mesh().unwrap();
    let state = problem.solve_qc(&mesh).unwrap();
    let report = problem.estimate(&state, RefinementFactor::Finite(2)).unwrap();
    let marked = mark(&report, 10.0, &mesh);
    assert_eq!(marked, vec![1, 9]);
    assert_eq!(mesh.bisect(&marked).unwrap().len(), 14);
}

#[test]
fn loose_tolerance_stops_immediately() {
    let (problem, oracle) = setup();
    let trace = run(problem, problem.initial_mesh().unwrap(), &AdaptConfig::new(1e-1), Some(oracle)).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.iterations(), 1);
    assert_eq!(trace.final_mesh(), &problem.initial_mesh().unwrap());
}

#[test]
fn refinement_is_monotone_and_error_decreases() {
    let (problem, oracle) = setup();
    let trace = run(problem, problem.initial_mesh().unwrap(), &AdaptConfig::new(1e-8), Some(oracle)).unwrap();
    assert!(trace.converged);
    for w in trace.records.windows(2) {
        assert!(w[1].dof > w[0].dof);
        let coarse = w[0].mesh.repatoms();
        assert!(coarse.iter().all(|l| w[1].mesh.repatoms().contains(l)));
        let (a, b) = (w[0].exact_error.unwrap().value.abs(), w[1].exact_error.unwrap().value.abs());
        assert!(b <= a, "iteration {}: {b:e} > {a:e}", w[1].iteration);
    }
}

#[test]
fn terminates_before_full_refinement() {
    let (problem, _) = setup();
    for factor in [RefinementFactor::Finite(2), RefinementFactor::Infinite] {
        let config = AdaptConfig {
            factor,
            ..AdaptConfig::new(1e-10)
        };
        let trace = run(problem, problem.initial_mesh().unwrap(), &config, None).unwrap();
        assert!(trace.converged);
        assert!(trace.final_record().dof < 200, "{}", trace.final_record().dof);
        assert!(trace.final_record().eta.abs() <= 1e-10);
    }
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let (problem, _) = setup();
    let config = AdaptConfig {
        max_iterations: 3,
        ..AdaptConfig::new(1e-12)
    };
    let trace = run(problem, problem.initial_mesh().unwrap(), &config, None).unwrap();
    assert!(!trace.converged);
    assert_eq!(trace.iterations(), 3);
}

#[test]
fn runs_are_deterministic() {
    let (problem, _) = setup();
    let a = run(problem, problem.initial_mesh().unwrap(), &AdaptConfig::new(1e-6), None).unwrap();
    let b = run(problem, problem.initial_mesh().unwrap(), &AdaptConfig::new(1e-6), None).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.mesh, y.mesh);
        assert_eq!(x.eta.to_bits(), y.eta.to_bits());
        assert_eq!(x.eta_qc, y.eta_qc);
    }
}
