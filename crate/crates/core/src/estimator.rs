//! Goal functional, dual problems and the dual-weighted residual estimator.
//!
//! The coarsening error in a linear goal `Q(y) = qᵀ y` equals the ac residual
//! of the qc solution weighted by the ac dual solution. The estimator replaces
//! that dual by one computed on a partially refined (pc) mesh, after removing
//! its qc interpolant: weighting by anything that lives on the qc mesh would
//! give exactly zero because the qc residual is Galerkin orthogonal to it.

use crate::assembly::{assemble_dual, solve, LinearSystem, Solution, SystemKind};
use crate::error::{Error, Result};
use crate::mesh::{build_boundary, build_interp_ap, build_interp_pq, build_restriction_qp, NestedMeshPair};
use crate::model::{AtomIndex, QuadraticEnergy};
use crate::operator::{Level, SpaceTaggedOperator};

/// Relative agreement demanded between the direct goal error and its
/// dual-weighted residual form.
pub const DUAL_IDENTITY_TOLERANCE: f64 = 1e-10;

/// Absolute floor for that comparison; positions near the goal atoms are of
/// order one, so this is a few ulps.
const DUAL_IDENTITY_FLOOR: f64 = 1e-14;

/// A linear goal `Q(y) = qᵀ y` on the interior atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalFunctional {
    half_length: usize,
    q: Vec<f64>,
}

impl GoalFunctional {
    /// `q` indexed over the interior atoms `-M+3..=M-2`.
    pub fn new(half_length: usize, q: Vec<f64>) -> Result<Self> {
        if q.len() + 4 != 2 * half_length {
            return Err(Error::LengthMismatch {
                expected: 2 * half_length - 4,
                found: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("goal vector must be finite".into()));
        }
        Ok(GoalFunctional { half_length, q })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `Q` on an interior vector (an element of `V^a_0`).
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.q.len() {
            return Err(Error::LengthMismatch {
                expected: self.q.len(),
                found: y.len(),
            });
        }
        Ok(self.q.iter().zip(y).map(|(a, b)| a * b).sum())
    }

    /// `Q` on a full atom vector, ignoring the clamped atoms.
    pub fn value_on_atoms(&self, y: &[f64]) -> Result<f64> {
        if y.len() != 2 * self.half_length {
            return Err(Error::LengthMismatch {
                expected: 2 * self.half_length,
                found: y.len(),
            });
        }
        self.value(&y[2..y.len() - 2])
    }

    /// `J^a q`.
    pub fn on_atoms(&self) -> Vec<f64> {
        let mut full = vec![0.0; 2 * self.half_length];
        full[2..2 * self.half_length - 2].copy_from_slice(&self.q);
        full
    }
}

/// `Q(y) = y_1 - y_0`, the width of the dislocation core.
pub fn dislocation_goal(half_length: usize) -> Result<GoalFunctional> {
    if half_length < 4 {
        return Err(Error::InvalidParams(format!(
            "chain half-length must be at least 4, got {half_length}"
        )));
    }
    let m = half_length as i64;
    // interior slot of atom i is i + M - 3
    let slot = |i: AtomIndex| (i + m - 3) as usize;
    let mut q = vec![0.0; 2 * half_length - 4];
    q[slot(0)] = -1.0;
    q[slot(1)] = 1.0;
    GoalFunctional::new(half_length, q)
}

/// `R^{ac}(y) = f^{ac} - M^{ac} y`.
pub fn residual_ac(system_ac: &LinearSystem, y: &[f64]) -> Result<Vec<f64>> {
    system_ac.residual(y)
}

/// `J^{aT} I J x`: an interior solution on a mesh, interpolated to the
/// interior atoms.
pub fn interpolate_interior(interp: &SpaceTaggedOperator, interior: &[f64]) -> Result<Vec<f64>> {
    let level = interp.domain();
    let atoms = interp.codomain();
    let j = build_boundary(level.level, level.dim);
    let full = interp.apply(&j.apply(interior)?)?;
    build_boundary(Level::Atomistic, atoms.dim).transpose().apply(&full)
}

/// `J^{qT} I^{aqT} J^a r`; vanishes for the ac residual of a qc solution.
pub fn galerkin_defect(interp_aq: &SpaceTaggedOperator, residual: &[f64]) -> Result<Vec<f64>> {
    let atoms = interp_aq.codomain();
    let full = build_boundary(Level::Atomistic, atoms.dim).apply(residual)?;
    let back = interp_aq.transpose().apply(&full)?;
    let level = interp_aq.domain();
    build_boundary(level.level, level.dim).transpose().apply(&back)
}

/// The exact coarsening error together with its dual-weighted form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalError {
    /// `qᵀ (y^{ac} - J^{aT} I^{aq} J^q y^{qc})`.
    pub value: f64,
    /// `g^{acT} R^{ac}(J^{aT} I^{aq} J^q y^{qc})`.
    pub dual_weighted: f64,
}

impl GoalError {
    pub fn relative_mismatch(&self) -> f64 {
        let scale = self.value.abs().max(self.dual_weighted.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.value - self.dual_weighted).abs() / scale
        }
    }
}

/// Exact goal error from the ac and qc positions on all atoms, cross-checked
/// against the dual identity with the ac dual solution `dual_ac` and the ac
/// residual of the qc solution.
pub fn exact_goal_error(
    goal: &GoalFunctional,
    ac_positions: &[f64],
    qc_positions: &[f64],
    dual_ac: &[f64],
    residual: &[f64],
) -> Result<GoalError> {
    if ac_positions.len() != qc_positions.len() {
        return Err(Error::LengthMismatch {
            expected: ac_positions.len(),
            found: qc_positions.len(),
        });
    }
    if dual_ac.len() != residual.len() {
        return Err(Error::LengthMismatch {
            expected: dual_ac.len(),
            found: residual.len(),
        });
    }
    let value = goal.value_on_atoms(ac_positions)? - goal.value_on_atoms(qc_positions)?;
    let dual_weighted: f64 = dual_ac.iter().zip(residual).map(|(g, r)| g * r).sum();
    let tol = DUAL_IDENTITY_TOLERANCE * value.abs().max(dual_weighted.abs()) + DUAL_IDENTITY_FLOOR;
    if (value - dual_weighted).abs() > tol {
        return Err(Error::DualIdentityMismatch {
            direct: value,
            dual: dual_weighted,
        });
    }
    Ok(GoalError {
        value,
        dual_weighted,
    })
}

/// The operators connecting a nested qc/pc pair with the atom level.
#[derive(Debug, Clone)]
pub struct PcOperators {
    pub interp_ap: SpaceTaggedOperator,
    pub interp_pq: SpaceTaggedOperator,
    pub restrict_qp: SpaceTaggedOperator,
    pub boundary_p: SpaceTaggedOperator,
    pub boundary_a: SpaceTaggedOperator,
}

impl PcOperators {
    pub fn new(pair: &NestedMeshPair) -> Self {
        let interp_ap = build_interp_ap(pair);
        let boundary_a = build_boundary(Level::Atomistic, interp_ap.codomain().dim);
        PcOperators {
            boundary_p: build_boundary(Level::PartialContinuum, pair.fine().len()),
            interp_pq: build_interp_pq(pair),
            restrict_qp: build_restriction_qp(pair),
            interp_ap,
            boundary_a,
        }
    }

    /// `J^{pT} I^{pq} R^{qp} J^p g`: the qc interpolant of a pc interior vector.
    pub fn qc_interpolant(&self, g: &[f64]) -> Result<Vec<f64>> {
        let full = self.boundary_p.apply(g)?;
        let coarse = self.restrict_qp.apply(&full)?;
        let back = self.interp_pq.apply(&coarse)?;
        self.boundary_p.transpose().apply(&back)
    }

    /// `J^{pT} I^{apT} J^a r` for an interior atom vector.
    pub fn restrict_residual(&self, r: &[f64]) -> Result<Vec<f64>> {
        let full = self.boundary_a.apply(r)?;
        let pc = self.interp_ap.transpose().apply(&full)?;
        self.boundary_p.transpose().apply(&pc)
    }
}

/// Solves `M^{pc} g = J^{pT} I^{apT} J^a q`.
pub fn solve_pc_dual(quad: &QuadraticEnergy, goal: &GoalFunctional, ops: &PcOperators) -> Result<Solution> {
    let system = assemble_dual(SystemKind::PartialContinuumDual, quad, &ops.interp_ap, &goal.on_atoms())?;
    solve(&system)
}

/// Solves `M^{qc} g = J^{qT} I^{aqT} J^a q` and returns the estimate obtained by
/// weighting the residual with the interpolated qc dual. Galerkin
/// orthogonality makes this zero up to rounding, which is why the estimator
/// uses the pc level instead.
pub fn coarse_dual_estimate(
    quad: &QuadraticEnergy,
    goal: &GoalFunctional,
    interp_aq: &SpaceTaggedOperator,
    residual: &[f64],
) -> Result<f64> {
    let system = assemble_dual(SystemKind::QuasicontinuumDual, quad, interp_aq, &goal.on_atoms())?;
    let g = solve(&system)?;
    let weight = interpolate_interior(interp_aq, &g.interior)?;
    Ok(weight.iter().zip(residual).map(|(a, b)| a * b).sum())
}

/// Global estimate and its splittings.
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    /// Signed estimate `η`.
    pub eta: f64,
    /// `η^{pc}_j̄` for every pc repatom (zero at the four clamped ones).
    pub eta_pc: Vec<f64>,
    /// `η^{qc}_j = |Σ η^{pc}|` over the pc repatoms strictly inside qc interval `j`.
    pub eta_qc: Vec<f64>,
    pub dual_pc: Solution,
}

impl EstimatorReport {
    pub fn sum_eta_qc(&self) -> f64 {
        self.eta_qc.iter().sum()
    }

    pub fn max_eta_qc(&self) -> f64 {
        self.eta_qc.iter().copied().fold(0.0, f64::max)
    }
}

/// Evaluates `η` from the pc dual solution and the ac residual of the qc
/// solution (`residual = R^{ac}(J^{aT} I^{aq} J^q y^{qc})`).
pub fn estimate(
    pair: &NestedMeshPair,
    dual_pc: Solution,
    residual: &[f64],
    ops: &PcOperators,
) -> Result<EstimatorReport> {
    let g = &dual_pc.interior;
    let interpolant = ops.qc_interpolant(g)?;
    let weight: Vec<f64> = g.iter().zip(&interpolant).map(|(a, b)| a - b).collect();
    let restricted = ops.restrict_residual(residual)?;

    let n_fine = pair.fine().len();
    let mut eta_pc = vec![0.0; n_fine];
    for (k, (w, r)) in weight.iter().zip(&restricted).enumerate() {
        eta_pc[k + 2] = w * r;
    }
    let eta = eta_pc.iter().sum();

    let mu = pair.anchor();
    let eta_qc = mu
        .windows(2)
        .map(|w| eta_pc[w[0] + 1..w[1]].iter().sum::<f64>().abs())
        .collect();

    Ok(EstimatorReport {
        eta,
        eta_pc,
        eta_qc,
        dual_pc,
    })
}
