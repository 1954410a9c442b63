//! The adaptive coarsening loop: solve on the qc mesh, refine partially, solve
//! the dual there, estimate, then stop or bisect the marked intervals.

use crate::assembly::{assemble_system, solve, Solution, SystemKind};
use crate::error::{Error, Result};
use crate::estimator::{
    dislocation_goal, estimate, galerkin_defect, solve_pc_dual, EstimatorReport, GoalError, GoalFunctional,
    PcOperators,
};
use crate::mesh::{build_boundary, build_interp_aq, partial_refine, well_lifting, BoundaryValues, BoundaryVectors, Mesh, RefinementFactor};
use crate::model::{assemble_quadratic, AtomIndex, ModelParams, Partition, QuadraticEnergy};
use crate::operator::{Level, SpaceTaggedOperator};
use crate::oracle::Oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    pub tau_gl: f64,
    pub tau_fac: f64,
    pub factor: RefinementFactor,
    pub max_iterations: usize,
}

impl AdaptConfig {
    pub fn new(tau_gl: f64) -> Self {
        AdaptConfig {
            tau_gl,
            ..AdaptConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_gl > 0.0 && self.tau_gl.is_finite()) {
            return Err(Error::InvalidAdaptConfig(format!("tau_gl must be positive, got {}", self.tau_gl)));
        }
        if !(self.tau_fac > 1.0 && self.tau_fac.is_finite()) {
            return Err(Error::InvalidAdaptConfig(format!("tau_fac must exceed 1, got {}", self.tau_fac)));
        }
        if let RefinementFactor::Finite(l) = self.factor {
            if l < 2 {
                return Err(Error::InvalidRefinementFactor(l));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidAdaptConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            tau_gl: 1e-5,
            tau_fac: 10.0,
            factor: RefinementFactor::Finite(2),
            max_iterations: 100,
        }
    }
}

/// Maximally coarsened mesh: the two clamped atoms at each end, the
/// atomistic block and two padding atoms on either side of it.
pub fn initial_mesh(partition: &Partition) -> Result<Mesh> {
    let m = partition.half_length() as AtomIndex;
    let (lo, hi) = partition
        .atomistic_block()
        .ok_or_else(|| Error::InvalidAdaptConfig("partition has no atomistic block".into()))?;
    if lo - 2 < -m + 3 || hi + 2 > m - 2 {
        return Err(Error::InvalidAdaptConfig(format!(
            "atomistic block {lo}..{hi} leaves no room for padding in a chain of half-length {m}"
        )));
    }
    let mut reps = vec![-m + 1, -m + 2];
    reps.extend(lo - 2..=hi + 2);
    reps.extend([m - 1, m]);
    Mesh::new(Level::Quasicontinuum, m as usize, reps)
}

/// Whether each interval lies in the part of the continuum region that can
/// be coarsened, away from the clamped ends and the padded atomistic block.
pub fn coarsenable_intervals(mesh: &Mesh, partition: &Partition) -> Vec<bool> {
    let m = mesh.half_length() as AtomIndex;
    let (lo, hi) = partition.atomistic_block().unwrap_or((1, 0));
    mesh.repatoms()
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            (a >= -m + 2 && b <= lo - 2) || (a >= hi + 2 && b < m)
        })
        .collect()
}

/// Intervals with `η^{qc}_j ≥ max η^{qc} / τ_fac` that can still be bisected.
pub fn mark(report: &EstimatorReport, tau_fac: f64, mesh: &Mesh) -> Vec<usize> {
    let max = report.max_eta_qc();
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = max / tau_fac;
    mesh.intervals()
        .iter()
        .zip(&report.eta_qc)
        .enumerate()
        .filter(|(_, (&nu, &eta))| nu >= 2 && eta >= threshold)
        .map(|(j, _)| j)
        .collect()
}

/// A chain, its partition, the clamped end positions and the goal.
#[derive(Debug, Clone)]
pub struct QcProblem {
    params: ModelParams,
    partition: Partition,
    boundary: BoundaryValues,
    quad: QuadraticEnergy,
    goal: GoalFunctional,
}

/// A qc solve mapped back onto the atoms.
#[derive(Debug, Clone)]
pub struct QcState {
    pub mesh: Mesh,
    pub interp_aq: SpaceTaggedOperator,
    pub lifting: BoundaryVectors,
    /// Interior unknowns and the lifted nodal values.
    pub solution: Solution,
    /// `I^{aq}` applied to the lifted solution.
    pub positions: Vec<f64>,
    /// `R^{ac}` of the qc solution on the interior atoms.
    pub residual: Vec<f64>,
}

impl QcProblem {
    pub fn new(params: ModelParams, partition: Partition, boundary: BoundaryValues) -> Result<Self> {
        if partition.half_length() != params.half_length() {
            return Err(Error::InvalidPartition(format!(
                "partition is for half-length {}, chain has {}",
                partition.half_length(),
                params.half_length()
            )));
        }
        let quad = assemble_quadratic(&params, &partition)?;
        let goal = dislocation_goal(params.half_length())?;
        Ok(QcProblem {
            params,
            partition,
            boundary,
            quad,
            goal,
        })
    }

    /// The dislocation setup: atoms `-1..=2` atomistic, clamped atoms in their wells.
    pub fn dislocation(params: ModelParams) -> Result<Self> {
        let partition = Partition::block(params.half_length(), -1, 2)?;
        let boundary = BoundaryValues::in_wells(&params);
        QcProblem::new(params, partition, boundary)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn boundary(&self) -> &BoundaryValues {
        &self.boundary
    }

    pub fn quadratic(&self) -> &QuadraticEnergy {
        &self.quad
    }

    pub fn goal(&self) -> &GoalFunctional {
        &self.goal
    }

    pub fn initial_mesh(&self) -> Result<Mesh> {
        initial_mesh(&self.partition)
    }

    /// Solves the primal qc system on `mesh`.
    pub fn solve_qc(&self, mesh: &Mesh) -> Result<QcState> {
        if mesh.half_length() != self.params.half_length() {
            return Err(Error::InvalidMesh(format!(
                "mesh is for half-length {}, chain has {}",
                mesh.half_length(),
                self.params.half_length()
            )));
        }
        let interp_aq = build_interp_aq(mesh);
        let lifting = well_lifting(&self.params, &self.boundary, mesh);
        let system = assemble_system(SystemKind::Quasicontinuum, &self.quad, &interp_aq, &lifting.atoms)?;
        let jq = build_boundary(Level::Quasicontinuum, mesh.len());
        let solution = solve(&system)?.lift(&jq, &lifting.mesh)?;

        let correction = interp_aq.apply(&jq.apply(&solution.interior)?)?;
        let positions: Vec<f64> = lifting.atoms.iter().zip(&correction).map(|(a, b)| a + b).collect();
        let grad = self.quad.gradient_at(&positions)?;
        let residual = grad[2..grad.len() - 2].iter().map(|g| -g).collect();
        Ok(QcState {
            mesh: mesh.clone(),
            interp_aq,
            lifting,
            solution,
            positions,
            residual,
        })
    }

    /// Partially refines the mesh, solves the pc dual and evaluates `η`.
    pub fn estimate(&self, state: &QcState, factor: RefinementFactor) -> Result<EstimatorReport> {
        let pair = partial_refine(&state.mesh, factor)?;
        let ops = PcOperators::new(&pair);
        let dual = solve_pc_dual(&self.quad, &self.goal, &ops)?;
        estimate(&pair, dual, &state.residual, &ops)
    }
}

/// One row of the adaptive trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mesh: Mesh,
    /// `2N`, the number of repatoms.
    pub dof: usize,
    /// Smallest and largest coarsenable interval, if any remain.
    pub min_nu: Option<usize>,
    pub max_nu: Option<usize>,
    pub eta: f64,
    pub sum_eta_qc: f64,
    pub eta_qc: Vec<f64>,
    /// `‖J^{qT} I^{aqT} J^a R^{ac}‖_∞` of the qc solution.
    pub galerkin_defect: f64,
    /// Present when an oracle was supplied.
    pub exact_error: Option<GoalError>,
}

#[derive(Debug, Clone)]
pub struct AdaptTrace {
    pub config: AdaptConfig,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl AdaptTrace {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("a trace has at least one record")
    }

    pub fn final_mesh(&self) -> &Mesh {
        &self.final_record().mesh
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

/// Runs the loop from `mesh`. With an oracle every row also carries the exact
/// goal error, cross-checked through the dual identity.
pub fn run(problem: &QcProblem, mesh: Mesh, config: &AdaptConfig, oracle: Option<&Oracle>) -> Result<AdaptTrace> {
    config.validate()?;
    let mut mesh = mesh;
    let mut records = Vec::new();
    for iteration in 1..=config.max_iterations {
        let state = problem.solve_qc(&mesh)?;
        let report = problem.estimate(&state, config.factor)?;

        let coarsenable = coarsenable_intervals(&mesh, problem.partition());
        let sizes: Vec<usize> = mesh
            .intervals()
            .into_iter()
            .zip(&coarsenable)
            .filter(|(_, &c)| c)
            .map(|(nu, _)| nu)
            .collect();
        let defect = galerkin_defect(&state.interp_aq, &state.residual)?
            .iter()
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        let exact_error = oracle.map(|o| o.exact_error(&state)).transpose()?;

        let converged = report.eta.abs() <= config.tau_gl;
        let marked = if converged {
            Vec::new()
        } else {
            mark(&report, config.tau_fac, &mesh)
        };
        records.push(IterationRecord {
            iteration,
            dof: mesh.len(),
            min_nu: sizes.iter().copied().min(),
            max_nu: sizes.iter().copied().max(),
            eta: report.eta,
            sum_eta_qc: report.sum_eta_qc(),
            eta_qc: report.eta_qc,
            galerkin_defect: defect,
            exact_error,
            mesh: mesh.clone(),
        });
        if converged {
            return Ok(AdaptTrace {
                config: *config,
                records,
                converged: true,
            });
        }
        if marked.is_empty() || iteration == config.max_iterations {
            break;
        }
        mesh = mesh.bisect(&marked)?;
    }
    Ok(AdaptTrace {
        config: *config,
        records,
        converged: false,
    })
}
