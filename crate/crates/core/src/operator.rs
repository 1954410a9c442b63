//! Linear maps between the atomistic, partial-continuum and quasicontinuum
//! vector spaces, tagged so that every composition is dimension-checked.

use std::fmt;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Refinement level of a vector space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Every atom carries a degree of freedom.
    Atomistic,
    /// Intermediate refinement used for the dual problem.
    PartialContinuum,
    /// The coarse repatom mesh.
    Quasicontinuum,
}

impl Level {
    fn symbol(self) -> &'static str {
        match self {
            Level::Atomistic => "a",
            Level::PartialContinuum => "p",
            Level::Quasicontinuum => "q",
        }
    }
}

/// One of `V^a`, `V^a_0`, `V^p`, `V^p_0`, `V^q`, `V^q_0`, together with its
/// dimension. `interior` marks the spaces without the four clamped slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDim {
    pub level: Level,
    pub interior: bool,
    pub dim: usize,
}

impl SpaceDim {
    pub fn full(level: Level, dim: usize) -> Self {
        SpaceDim {
            level,
            interior: false,
            dim,
        }
    }

    pub fn interior(level: Level, dim: usize) -> Self {
        SpaceDim {
            level,
            interior: true,
            dim,
        }
    }
}

impl fmt::Display for SpaceDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = if self.interior { "_0" } else { "" };
        write!(f, "V^{}{}[{}]", self.level.symbol(), sub, self.dim)
    }
}

/// A sparse linear map `domain -> codomain`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTaggedOperator {
    domain: SpaceDim,
    codomain: SpaceDim,
    matrix: CsrMatrix,
}

impl SpaceTaggedOperator {
    pub fn new(domain: SpaceDim, codomain: SpaceDim, matrix: CsrMatrix) -> Self {
        assert_eq!(matrix.nrows(), codomain.dim, "row count must match {codomain}");
        assert_eq!(matrix.ncols(), domain.dim, "column count must match {domain}");
        SpaceTaggedOperator {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn identity(space: SpaceDim) -> Self {
        Self::new(space, space, CsrMatrix::identity(space.dim))
    }

    pub fn domain(&self) -> SpaceDim {
        self.domain
    }

    pub fn codomain(&self) -> SpaceDim {
        self.codomain
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn transpose(&self) -> Self {
        SpaceTaggedOperator {
            domain: self.codomain,
            codomain: self.domain,
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ inner`; fails unless `inner` lands in the domain of `self`.
    pub fn compose(&self, inner: &SpaceTaggedOperator) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(Error::SpaceMismatch {
                expected: self.domain,
                found: inner.codomain,
            });
        }
        Ok(SpaceTaggedOperator {
            domain: inner.domain,
            codomain: self.codomain,
            matrix: self.matrix.matmul(&inner.matrix),
        })
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.domain.dim {
            return Err(Error::LengthMismatch {
                expected: self.domain.dim,
                found: x.len(),
            });
        }
        Ok(self.matrix.matvec(x))
    }

    /// `Bᵀ A B` for a symmetric `A = self`.
    pub fn congruence(&self, basis: &SpaceTaggedOperator) -> Result<Self> {
        basis.transpose().compose(&self.compose(basis)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_composition_is_rejected() {
        let a = SpaceTaggedOperator::identity(SpaceDim::full(Level::Atomistic, 4));
        let q = SpaceTaggedOperator::identity(SpaceDim::full(Level::Quasicontinuum, 4));
        assert!(matches!(a.compose(&q), Err(Error::SpaceMismatch { .. })));
        assert!(a.compose(&a).is_ok());
    }

    #[test]
    fn apply_checks_length() {
        let a = SpaceTaggedOperator::identity(SpaceDim::interior(Level::Atomistic, 3));
        assert!(a.apply(&[1.0, 2.0]).is_err());
        assert_eq!(a.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn display_names_the_space() {
        assert_eq!(
            SpaceDim::interior(Level::PartialContinuum, 8).to_string(),
            "V^p_0[8]"
        );
    }
}
