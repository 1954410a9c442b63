//! The generalized Frenkel-Kontorova chain.
//!
//! Atoms are indexed `-M+1..=M`. Each atom owns an elastic energy built from
//! half of each nearest-neighbour (NN) and next-nearest-neighbour (NNN) bond it
//! participates in, plus a quadratic misfit well. Atoms with index `i <= 0`
//! sit in the well at `(i-1)·a0`, atoms with `i >= 1` in the well at `i·a0`;
//! the shift of one lattice spacing across the origin is the dislocation.
//!
//! The continuum energy of an atom replaces the NN/NNN pair by a single NN
//! bond of stiffness `k12 = k1 + 4·k2`, which agrees with the atomistic energy
//! under locally uniform strain.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::operator::{Level, SpaceDim, SpaceTaggedOperator};
use crate::sparse::CsrMatrix;

/// Atom index on the chain, ranging over `-M+1..=M`.
pub type AtomIndex = i64;

/// Physical constants and chain size.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelParams {
    k0: f64,
    k1: f64,
    k2: f64,
    a0: f64,
    half_length: usize,
}

impl ModelParams {
    pub fn new(k0: f64, k1: f64, k2: f64, a0: f64, half_length: usize) -> Result<Self> {
        if ![k0, k1, k2, a0].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("moduli and lattice constant must be finite".into()));
        }
        if k0 <= 0.0 {
            return Err(Error::InvalidParams(format!("k0 must be positive, got {k0}")));
        }
        if k1 + 2.0 * k2 <= 2.0 * k2.abs() {
            return Err(Error::InvalidParams(format!(
                "coercivity requires k1 + 2 k2 > 2 |k2| (k1 = {k1}, k2 = {k2})"
            )));
        }
        if half_length < 4 {
            return Err(Error::InvalidParams(format!(
                "chain half-length must be at least 4, got {half_length}"
            )));
        }
        Ok(ModelParams {
            k0,
            k1,
            k2,
            a0,
            half_length,
        })
    }

    /// The parameters of the dislocation experiment: `k0 = 0.1`, `k1 = 2`,
    /// `k2 = 1`, `a0 = 1`, `M = 2053` (4106 atoms).
    pub fn dislocation_experiment() -> Self {
        Self::new(0.1, 2.0, 1.0, 1.0, 2053).expect("reference parameters are coercive")
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Continuum modulus `k1 + 4·k2`.
    pub fn k12(&self) -> f64 {
        self.k1 + 4.0 * self.k2
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// `M`; the chain holds `2M` atoms.
    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn n_atoms(&self) -> usize {
        2 * self.half_length
    }

    pub fn first_atom(&self) -> AtomIndex {
        1 - self.half_length as i64
    }

    pub fn last_atom(&self) -> AtomIndex {
        self.half_length as i64
    }

    pub fn contains(&self, i: AtomIndex) -> bool {
        (self.first_atom()..=self.last_atom()).contains(&i)
    }

    /// Storage slot of atom `i`.
    pub fn slot(&self, i: AtomIndex) -> usize {
        debug_assert!(self.contains(i));
        (i - self.first_atom()) as usize
    }

    pub fn atom_at(&self, slot: usize) -> AtomIndex {
        self.first_atom() + slot as i64
    }

    pub(crate) fn check_index(&self, i: AtomIndex) -> Result<()> {
        if self.contains(i) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                first: self.first_atom(),
                last: self.last_atom(),
            })
        }
    }

    /// Centre of the misfit well of atom `i`.
    pub fn well(&self, i: AtomIndex) -> f64 {
        if i <= 0 {
            (i - 1) as f64 * self.a0
        } else {
            i as f64 * self.a0
        }
    }

    pub fn atom_space(&self) -> SpaceDim {
        SpaceDim::full(Level::Atomistic, self.n_atoms())
    }

    pub fn atom_interior_space(&self) -> SpaceDim {
        SpaceDim::interior(Level::Atomistic, self.n_atoms() - 4)
    }
}

/// Per-atom choice between the atomistic and the continuum energy.
///
/// Only a single contiguous atomistic block is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    half_length: usize,
    atomistic: Option<(AtomIndex, AtomIndex)>,
}

impl Partition {
    pub fn all_atomistic(half_length: usize) -> Self {
        let m = half_length as i64;
        Partition {
            half_length,
            atomistic: Some((1 - m, m)),
        }
    }

    pub fn all_continuum(half_length: usize) -> Self {
        Partition {
            half_length,
            atomistic: None,
        }
    }

    /// Atoms `first..=last` atomistic, everything else continuum.
    pub fn block(half_length: usize, first: AtomIndex, last: AtomIndex) -> Result<Self> {
        let m = half_length as i64;
        if first > last {
            return Err(Error::InvalidPartition(format!(
                "atomistic block {first}..={last} is empty"
            )));
        }
        if first < 1 - m || last > m {
            return Err(Error::InvalidPartition(format!(
                "atomistic block {first}..={last} leaves the chain {}..={m}",
                1 - m
            )));
        }
        Ok(Partition {
            half_length,
            atomistic: Some((first, last)),
        })
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    /// Bounds of the atomistic block, if any.
    pub fn atomistic_block(&self) -> Option<(AtomIndex, AtomIndex)> {
        self.atomistic
    }

    pub fn is_atomistic(&self, i: AtomIndex) -> bool {
        self.atomistic.is_some_and(|(lo, hi)| lo <= i && i <= hi)
    }
}

/// Positions of all atoms, stored at slot `i + M - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomVector {
    half_length: usize,
    values: Vec<f64>,
}

impl AtomVector {
    pub fn zeros(half_length: usize) -> Self {
        AtomVector {
            half_length,
            values: vec![0.0; 2 * half_length],
        }
    }

    pub fn from_fn(half_length: usize, mut f: impl FnMut(AtomIndex) -> f64) -> Self {
        let first = 1 - half_length as i64;
        AtomVector {
            half_length,
            values: (0..2 * half_length).map(|s| f(first + s as i64)).collect(),
        }
    }

    pub fn from_vec(half_length: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * half_length {
            return Err(Error::LengthMismatch {
                expected: 2 * half_length,
                found: values.len(),
            });
        }
        Ok(AtomVector {
            half_length,
            values,
        })
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn get(&self, i: AtomIndex) -> Option<f64> {
        let slot = i + self.half_length as i64 - 1;
        if (0..self.values.len() as i64).contains(&slot) {
            Some(self.values[slot as usize])
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Index<AtomIndex> for AtomVector {
    type Output = f64;

    fn index(&self, i: AtomIndex) -> &f64 {
        let slot = i + self.half_length as i64 - 1;
        &self.values[usize::try_from(slot).expect("atom index below chain start")]
    }
}

/// How bonds that reach past either end of the chain are treated.
///
/// Every such bond touches only the two clamped atoms at that end, so the
/// restricted systems do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ChainEnds {
    /// Bonds to atoms outside the chain are omitted.
    #[default]
    Drop,
    /// Missing atoms are replaced by fixed phantom atoms at the given position.
    Phantom(f64),
}

/// Elastic and misfit parts of one atom's energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEnergy {
    pub elastic: f64,
    pub misfit: f64,
}

impl AtomEnergy {
    pub fn total(&self) -> f64 {
        self.elastic + self.misfit
    }
}

/// A bond `¼·stiffness·(y_right - y_left - rest)²` owned by one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bond {
    left: AtomIndex,
    right: AtomIndex,
    stiffness: f64,
    rest: f64,
}

fn bonds(params: &ModelParams, i: AtomIndex, atomistic: bool) -> impl Iterator<Item = Bond> {
    let a0 = params.a0;
    let (nn, nnn) = if atomistic {
        (params.k1, Some(params.k2))
    } else {
        (params.k12(), None)
    };
    let nn_bonds = [
        Bond { left: i - 1, right: i, stiffness: nn, rest: a0 },
        Bond { left: i, right: i + 1, stiffness: nn, rest: a0 },
    ];
    let nnn_bonds = nnn.into_iter().flat_map(move |k2| {
        [
            Bond { left: i - 2, right: i, stiffness: k2, rest: 2.0 * a0 },
            Bond { left: i, right: i + 2, stiffness: k2, rest: 2.0 * a0 },
        ]
    });
    nn_bonds.into_iter().chain(nnn_bonds)
}

fn elastic_energy(
    params: &ModelParams,
    y: &AtomVector,
    i: AtomIndex,
    atomistic: bool,
    ends: ChainEnds,
) -> f64 {
    let position = |k: AtomIndex| match (y.get(k), ends) {
        (Some(v), _) => Some(v),
        (None, ChainEnds::Phantom(p)) => Some(p),
        (None, ChainEnds::Drop) => None,
    };
    bonds(params, i, atomistic)
        .filter_map(|b| {
            let (l, r) = (position(b.left)?, position(b.right)?);
            let stretch = r - l - b.rest;
            Some(0.25 * b.stiffness * stretch * stretch)
        })
        .sum()
}

fn misfit_energy(params: &ModelParams, y: &AtomVector, i: AtomIndex) -> f64 {
    let d = y[i] - params.well(i);
    0.5 * params.k0 * d * d
}

fn check_vector(params: &ModelParams, y: &AtomVector) -> Result<()> {
    if y.as_slice().len() != params.n_atoms() {
        return Err(Error::LengthMismatch {
            expected: params.n_atoms(),
            found: y.as_slice().len(),
        });
    }
    Ok(())
}

/// Atomistic energy `E^a_i` of atom `i`, with bonds past the chain ends dropped.
pub fn atom_energy_atomistic(params: &ModelParams, y: &AtomVector, i: AtomIndex) -> Result<AtomEnergy> {
    check_vector(params, y)?;
    params.check_index(i)?;
    Ok(AtomEnergy {
        elastic: elastic_energy(params, y, i, true, ChainEnds::Drop),
        misfit: misfit_energy(params, y, i),
    })
}

/// Continuum energy `E^c_i` of atom `i`.
pub fn atom_energy_continuum(params: &ModelParams, y: &AtomVector, i: AtomIndex) -> Result<AtomEnergy> {
    check_vector(params, y)?;
    params.check_index(i)?;
    Ok(AtomEnergy {
        elastic: elastic_energy(params, y, i, false, ChainEnds::Drop),
        misfit: misfit_energy(params, y, i),
    })
}

/// Atomistic-continuum energy by direct summation over atoms.
pub fn energy_ac(params: &ModelParams, partition: &Partition, y: &AtomVector) -> Result<f64> {
    energy_ac_with(params, partition, y, ChainEnds::Drop)
}

pub fn energy_ac_with(
    params: &ModelParams,
    partition: &Partition,
    y: &AtomVector,
    ends: ChainEnds,
) -> Result<f64> {
    check_vector(params, y)?;
    check_partition(params, partition)?;
    Ok((params.first_atom()..=params.last_atom())
        .map(|i| {
            elastic_energy(params, y, i, partition.is_atomistic(i), ends) + misfit_energy(params, y, i)
        })
        .sum())
}

fn check_partition(params: &ModelParams, partition: &Partition) -> Result<()> {
    if partition.half_length != params.half_length {
        return Err(Error::InvalidPartition(format!(
            "partition is for M = {}, model has M = {}",
            partition.half_length, params.half_length
        )));
    }
    Ok(())
}

/// One end of a spring: a chain atom (by slot) or a fixed phantom position.
#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    Atom(usize),
    Fixed(f64),
}

/// `¼·stiffness·(y_right - y_left - rest)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Spring {
    left: End,
    right: End,
    stiffness: f64,
    rest: f64,
}

/// `½·k0·(y_slot - centre)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Well {
    slot: usize,
    centre: f64,
}

/// The quadratic energy `E^{ac}` (or `E^a`) on the full atom space.
///
/// Holds the assembled Hessian `H` together with the spring and well terms it
/// came from. Gradients and values are evaluated term by term in stretch
/// form, which keeps them accurate when positions are large; the expanded
/// form `constant + linear·y + ½ yᵀ H y` is available through
/// [`QuadraticEnergy::expanded_value`].
#[derive(Debug, Clone)]
pub struct QuadraticEnergy {
    hessian: SpaceTaggedOperator,
    linear: Vec<f64>,
    constant: f64,
    k0: f64,
    springs: Vec<Spring>,
    wells: Vec<Well>,
}

impl QuadraticEnergy {
    pub fn hessian(&self) -> &SpaceTaggedOperator {
        &self.hessian
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// `∇E(0)`.
    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// `E(0)`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        Ok(())
    }

    fn stretch(&self, s: &Spring, y: &[f64]) -> f64 {
        let at = |e: End| match e {
            End::Atom(k) => y[k],
            End::Fixed(p) => p,
        };
        at(s.right) - at(s.left) - s.rest
    }

    /// `∇E(y)`, which equals `H y + ∇E(0)`.
    pub fn gradient_at(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y)?;
        let mut g = vec![0.0; y.len()];
        for s in &self.springs {
            let f = 0.5 * s.stiffness * self.stretch(s, y);
            if let End::Atom(r) = s.right {
                g[r] += f;
            }
            if let End::Atom(l) = s.left {
                g[l] -= f;
            }
        }
        for w in &self.wells {
            g[w.slot] += self.k0 * (y[w.slot] - w.centre);
        }
        Ok(g)
    }

    pub fn value_at(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y)?;
        let elastic: f64 = self
            .springs
            .iter()
            .map(|s| {
                let d = self.stretch(s, y);
                0.25 * s.stiffness * d * d
            })
            .sum();
        let misfit: f64 = self
            .wells
            .iter()
            .map(|w| {
                let d = y[w.slot] - w.centre;
                0.5 * self.k0 * d * d
            })
            .sum();
        Ok(elastic + misfit)
    }

    /// `E(0) + ∇E(0)·y + ½ yᵀ H y` from the assembled Hessian.
    pub fn expanded_value(&self, y: &[f64]) -> Result<f64> {
        let hy = self.hessian.apply(y)?;
        let quad: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
        let lin: f64 = y.iter().zip(&self.linear).map(|(a, b)| a * b).sum();
        Ok(self.constant + lin + 0.5 * quad)
    }
}

/// Assembles `E^{ac}` for the given partition; an all-atomistic partition
/// gives `E^a`. Bonds past the chain ends are dropped.
pub fn assemble_quadratic(params: &ModelParams, partition: &Partition) -> Result<QuadraticEnergy> {
    assemble_quadratic_with(params, partition, ChainEnds::Drop)
}

pub fn assemble_quadratic_with(
    params: &ModelParams,
    partition: &Partition,
    ends: ChainEnds,
) -> Result<QuadraticEnergy> {
    check_partition(params, partition)?;
    let end = |i: AtomIndex| {
        if params.contains(i) {
            Some(End::Atom(params.slot(i)))
        } else {
            match ends {
                ChainEnds::Drop => None,
                ChainEnds::Phantom(p) => Some(End::Fixed(p)),
            }
        }
    };

    let mut springs = Vec::with_capacity(6 * params.n_atoms());
    let mut wells = Vec::with_capacity(params.n_atoms());
    for i in params.first_atom()..=params.last_atom() {
        for b in bonds(params, i, partition.is_atomistic(i)) {
            if let (Some(left), Some(right)) = (end(b.left), end(b.right)) {
                springs.push(Spring {
                    left,
                    right,
                    stiffness: b.stiffness,
                    rest: b.rest,
                });
            }
        }
        wells.push(Well {
            slot: params.slot(i),
            centre: params.well(i),
        });
    }

    let n = params.n_atoms();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); n];
    let mut linear = vec![0.0; n];
    let mut constant = 0.0;
    for s in &springs {
        let h = 0.5 * s.stiffness;
        // expand ¼k (y_r - y_l - d)² with fixed ends folded into the offset
        let mut offset = -s.rest;
        if let End::Fixed(p) = s.right {
            offset += p;
        }
        if let End::Fixed(p) = s.left {
            offset -= p;
        }
        match (s.left, s.right) {
            (End::Atom(l), End::Atom(r)) => {
                rows[l].push((l, h));
                rows[l].push((r, -h));
                rows[r].push((r, h));
                rows[r].push((l, -h));
                linear[r] += h * offset;
                linear[l] -= h * offset;
            }
            (End::Fixed(_), End::Atom(r)) => {
                rows[r].push((r, h));
                linear[r] += h * offset;
            }
            (End::Atom(l), End::Fixed(_)) => {
                rows[l].push((l, h));
                linear[l] -= h * offset;
            }
            (End::Fixed(_), End::Fixed(_)) => {}
        }
        constant += 0.25 * s.stiffness * offset * offset;
    }
    for w in &wells {
        rows[w.slot].push((w.slot, params.k0));
        linear[w.slot] -= params.k0 * w.centre;
        constant += 0.5 * params.k0 * w.centre * w.centre;
    }

    let space = params.atom_space();
    Ok(QuadraticEnergy {
        hessian: SpaceTaggedOperator::new(space, space, CsrMatrix::from_rows(n, rows)),
        linear,
        constant,
        k0: params.k0,
        springs,
        wells,
    })
}
