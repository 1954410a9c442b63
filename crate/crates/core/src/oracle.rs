//! Ground truth at full resolution: the atomistic and atomistic-continuum
//! minimizers, the ac dual, and the exact goal errors derived from them.

use crate::adapt::{QcProblem, QcState};
use crate::assembly::{assemble_dual, assemble_system, solve, LinearSystem, Solution, SystemKind};
use crate::error::Result;
use crate::estimator::{exact_goal_error, GoalError, GoalFunctional};
use crate::mesh::{build_boundary, well_lifting, BoundaryValues, Mesh};
use crate::model::{assemble_quadratic, ModelParams, Partition, QuadraticEnergy};
use crate::operator::{Level, SpaceTaggedOperator};

/// Which full-resolution energy to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullLevel {
    Atomistic,
    AtomisticContinuum,
}

/// Minimizes the full energy with the clamped atoms fixed. The returned
/// solution carries the positions of all atoms in `lifted`.
pub fn solve_full(
    level: FullLevel,
    params: &ModelParams,
    partition: &Partition,
    boundary: &BoundaryValues,
) -> Result<Solution> {
    let (partition, kind) = match level {
        FullLevel::Atomistic => (Partition::all_atomistic(params.half_length()), SystemKind::Atomistic),
        FullLevel::AtomisticContinuum => (*partition, SystemKind::AtomisticContinuum),
    };
    let quad = assemble_quadratic(params, &partition)?;
    Ok(solve_with(kind, &quad, params, boundary)?.0)
}

fn solve_with(
    kind: SystemKind,
    quad: &QuadraticEnergy,
    params: &ModelParams,
    boundary: &BoundaryValues,
) -> Result<(Solution, LinearSystem)> {
    let full = Mesh::fully_refined(Level::Quasicontinuum, params.half_length());
    let lifting = well_lifting(params, boundary, &full);
    let identity = SpaceTaggedOperator::identity(params.atom_space());
    let system = assemble_system(kind, quad, &identity, &lifting.atoms)?;
    let ja = build_boundary(Level::Atomistic, params.n_atoms());
    let solution = solve(&system)?.lift(&ja, &lifting.atoms)?;
    Ok((solution, system))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    /// `|Q(y^a - y^{ac})|`.
    pub modeling_error: f64,
    /// `|Q(y^{ac} - y^{qc})|`.
    pub coarsening_error: f64,
    pub triangle_bound: f64,
    /// `|Q(y^a - y^{qc})|`.
    pub total_error: f64,
}

/// Full-resolution solves for one problem, computed once and reused for
/// every qc mesh.
#[derive(Debug, Clone)]
pub struct Oracle {
    atomistic: Solution,
    ac: Solution,
    system_ac: LinearSystem,
    dual_ac: Solution,
    goal: GoalFunctional,
    goal_a: f64,
    goal_ac: f64,
}

impl Oracle {
    pub fn new(problem: &QcProblem) -> Result<Self> {
        let params = problem.params();
        let (atomistic, ac) = std::thread::scope(|s| {
            let a = s.spawn(|| solve_full(FullLevel::Atomistic, params, problem.partition(), problem.boundary()));
            let ac = solve_with(SystemKind::AtomisticContinuum, problem.quadratic(), params, problem.boundary());
            (a.join().expect("atomistic solve panicked"), ac)
        });
        let (atomistic, (ac, system_ac)) = (atomistic?, ac?);
        let identity = SpaceTaggedOperator::identity(params.atom_space());
        let dual_system = assemble_dual(
            SystemKind::AtomisticContinuumDual,
            problem.quadratic(),
            &identity,
            &problem.goal().on_atoms(),
        )?;
        let dual_ac = solve(&dual_system)?;
        let goal = problem.goal();
        let goal_a = goal.value_on_atoms(atomistic.lifted().expect("lifted"))?;
        let goal_ac = goal.value_on_atoms(ac.lifted().expect("lifted"))?;
        Ok(Oracle {
            atomistic,
            ac,
            system_ac,
            dual_ac,
            goal: goal.clone(),
            goal_a,
            goal_ac,
        })
    }

    pub fn atomistic(&self) -> &Solution {
        &self.atomistic
    }

    pub fn atomistic_continuum(&self) -> &Solution {
        &self.ac
    }

    pub fn system_ac(&self) -> &LinearSystem {
        &self.system_ac
    }

    pub fn dual_ac(&self) -> &Solution {
        &self.dual_ac
    }

    /// `Q(y^a)` and `Q(y^{ac})`.
    pub fn goal_values(&self) -> (f64, f64) {
        (self.goal_a, self.goal_ac)
    }

    /// Signed `Q(e^{ac-qc})` with its dual-identity cross-check.
    pub fn exact_error(&self, state: &QcState) -> Result<GoalError> {
        exact_goal_error(
            &self.goal,
            self.ac.lifted().expect("lifted"),
            &state.positions,
            &self.dual_ac.interior,
            &state.residual,
        )
    }

    pub fn report(&self, state: &QcState) -> Result<OracleReport> {
        let coarsening = self.exact_error(state)?.value.abs();
        let modeling = (self.goal_a - self.goal_ac).abs();
        let total = (self.goal_a - self.goal.value_on_atoms(&state.positions)?).abs();
        Ok(OracleReport {
            modeling_error: modeling,
            coarsening_error: coarsening,
            triangle_bound: modeling + coarsening,
            total_error: total,
        })
    }
}
