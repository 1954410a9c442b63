//! Restricted linear systems for the a, ac, qc and pc levels.
//!
//! Every system has the form `Jᵀ Iᵀ H I J x = b`, where `I` maps the level's
//! nodal space to all atoms (the identity for the a and ac levels) and `J`
//! drops the four clamped slots. Primal right-hand sides are
//! `-Jᵀ Iᵀ ∇E(y_bc)`, the affine gradient evaluated at the boundary lifting.

use crate::banded::BandedCholesky;
use crate::error::{Error, Result};
use crate::mesh::build_boundary;
use crate::model::QuadraticEnergy;
use crate::operator::SpaceTaggedOperator;

/// Relative residual every accepted solve must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Atomistic,
    AtomisticContinuum,
    Quasicontinuum,
    AtomisticContinuumDual,
    QuasicontinuumDual,
    PartialContinuumDual,
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub kind: SystemKind,
    pub matrix: SpaceTaggedOperator,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Same matrix, new right-hand side.
    pub fn with_rhs(&self, kind: SystemKind, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: rhs.len(),
            });
        }
        Ok(LinearSystem {
            kind,
            matrix: self.matrix.clone(),
            rhs,
        })
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.matrix.apply(x)?;
        Ok(self.rhs.iter().zip(ax).map(|(b, a)| b - a).collect())
    }
}

/// Boundary operator `J` matching the nodal space of `interp`.
pub fn boundary_for(interp: &SpaceTaggedOperator) -> SpaceTaggedOperator {
    let domain = interp.domain();
    build_boundary(domain.level, domain.dim)
}

/// `Jᵀ Iᵀ H I J`.
pub fn reduced_matrix(quad: &QuadraticEnergy, interp: &SpaceTaggedOperator) -> Result<SpaceTaggedOperator> {
    let basis = interp.compose(&boundary_for(interp))?;
    let matrix = quad.hessian().congruence(&basis)?;
    debug_assert!(is_symmetric(&matrix));
    Ok(matrix)
}

fn is_symmetric(op: &SpaceTaggedOperator) -> bool {
    let m = op.matrix();
    let scale = (0..m.nrows())
        .flat_map(|i| m.row(i).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max);
    m.is_symmetric(1e-14 * scale.max(1.0))
}

/// `Jᵀ Iᵀ v` for a vector `v` on all atoms.
pub fn restrict_to_level(interp: &SpaceTaggedOperator, v: &[f64]) -> Result<Vec<f64>> {
    let basis = interp.compose(&boundary_for(interp))?;
    basis.transpose().apply(v)
}

/// Primal system with the boundary lifting `bc_atoms = I y_bc`.
pub fn assemble_system(
    kind: SystemKind,
    quad: &QuadraticEnergy,
    interp: &SpaceTaggedOperator,
    bc_atoms: &[f64],
) -> Result<LinearSystem> {
    let matrix = reduced_matrix(quad, interp)?;
    let grad = quad.gradient_at(bc_atoms)?;
    let rhs = restrict_to_level(interp, &grad)?
        .into_iter()
        .map(|v| -v)
        .collect();
    Ok(LinearSystem { kind, matrix, rhs })
}

/// Dual system `Jᵀ Iᵀ H I J g = Jᵀ Iᵀ goal` for a goal vector on all atoms.
pub fn assemble_dual(
    kind: SystemKind,
    quad: &QuadraticEnergy,
    interp: &SpaceTaggedOperator,
    goal_atoms: &[f64],
) -> Result<LinearSystem> {
    let matrix = reduced_matrix(quad, interp)?;
    let rhs = restrict_to_level(interp, goal_atoms)?;
    Ok(LinearSystem { kind, matrix, rhs })
}

/// Interior solution, optionally lifted to the level's full space.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub interior: Vec<f64>,
    pub lifted: Option<Vec<f64>>,
}

impl Solution {
    /// `J x + y_bc`.
    pub fn lift(mut self, boundary: &SpaceTaggedOperator, bc: &[f64]) -> Result<Self> {
        self.lifted = Some(lift(&self.interior, boundary, bc)?);
        Ok(self)
    }

    pub fn lifted(&self) -> Option<&[f64]> {
        self.lifted.as_deref()
    }
}

pub fn lift(interior: &[f64], boundary: &SpaceTaggedOperator, bc: &[f64]) -> Result<Vec<f64>> {
    let mut full = boundary.apply(interior)?;
    if bc.len() != full.len() {
        return Err(Error::LengthMismatch {
            expected: full.len(),
            found: bc.len(),
        });
    }
    for (f, b) in full.iter_mut().zip(bc) {
        *f += b;
    }
    Ok(full)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Direct banded Cholesky solve; rejects results whose relative residual
/// exceeds [`RESIDUAL_TOLERANCE`].
pub fn solve(system: &LinearSystem) -> Result<Solution> {
    let factor = BandedCholesky::factor(system.matrix.matrix())?;
    let x = factor.solve(&system.rhs)?;
    let r = norm2(&system.residual(&x)?);
    let b = norm2(&system.rhs);
    let relative = if b > 0.0 { r / b } else { r };
    if relative > RESIDUAL_TOLERANCE {
        return Err(Error::ResidualTooLarge(relative));
    }
    Ok(Solution {
        interior: x,
        lifted: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{boundary_vectors, interpolation_to_atoms, BoundaryValues, Mesh};
    use crate::model::{assemble_quadratic, ModelParams, Partition};
    use crate::operator::{Level, SpaceDim};
    use crate::sparse::CsrMatrix;

    #[test]
    fn identity_system() {
        let space = SpaceDim::interior(Level::Atomistic, 3);
        let system = LinearSystem {
            kind: SystemKind::Atomistic,
            matrix: SpaceTaggedOperator::new(space, space, CsrMatrix::identity(3)),
            rhs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(solve(&system).unwrap().interior, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_interior_lifts_to_boundary() {
        let j = build_boundary(Level::Atomistic, 6);
        let bc = [1.0, 2.0, 0.0, 0.0, 3.0, 4.0];
        assert_eq!(lift(&[0.0, 0.0], &j, &bc).unwrap(), bc.to_vec());
    }

    #[test]
    fn fully_refined_qc_matches_ac() {
        let p = ModelParams::new(0.1, 2.0, 1.0, 1.0, 8).unwrap();
        let part = Partition::block(8, -1, 2).unwrap();
        let quad = assemble_quadratic(&p, &part).unwrap();
        let mesh = Mesh::fully_refined(Level::Quasicontinuum, 8);
        let bc = boundary_vectors(&BoundaryValues::in_wells(&p), &mesh);
        let qc = assemble_system(SystemKind::Quasicontinuum, &quad, &interpolation_to_atoms(&mesh), &bc.atoms).unwrap();
        let ac = assemble_system(
            SystemKind::AtomisticContinuum,
            &quad,
            &SpaceTaggedOperator::identity(p.atom_space()),
            &bc.atoms,
        )
        .unwrap();
        assert_eq!(qc.matrix.matrix(), ac.matrix.matrix());
        assert_eq!(qc.rhs, ac.rhs);
    }

    #[test]
    fn solves_are_bitwise_deterministic() {
        let p = ModelParams::new(0.1, 2.0, 1.0, 1.0, 16).unwrap();
        let quad = assemble_quadratic(&p, &Partition::all_atomistic(16)).unwrap();
        let id = SpaceTaggedOperator::identity(p.atom_space());
        let bc = boundary_vectors(&BoundaryValues::in_wells(&p), &Mesh::fully_refined(Level::Quasicontinuum, 16));
        let sys = assemble_system(SystemKind::Atomistic, &quad, &id, &bc.atoms).unwrap();
        assert_eq!(solve(&sys).unwrap(), solve(&sys).unwrap());
    }
}
