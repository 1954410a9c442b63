//! Repatom meshes and the operators that connect them.
//!
//! A mesh is a strictly increasing list of atom indices ("repatoms") whose
//! first two and last two entries are the clamped atoms at the chain ends.
//! Non-repatom positions are reconstructed by piecewise linear interpolation.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AtomIndex, ModelParams};
use crate::operator::{Level, SpaceDim, SpaceTaggedOperator};
use crate::sparse::CsrMatrix;

/// Repatoms at one refinement level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mesh {
    level: Level,
    half_length: usize,
    repatoms: Vec<AtomIndex>,
}

impl Mesh {
    pub fn new(level: Level, half_length: usize, repatoms: Vec<AtomIndex>) -> Result<Self> {
        let m = half_length as i64;
        if level == Level::Atomistic {
            return Err(Error::InvalidMesh("a repatom mesh is qc or pc level".into()));
        }
        if repatoms.len() < 4 {
            return Err(Error::InvalidMesh(format!(
                "need at least 4 repatoms, got {}",
                repatoms.len()
            )));
        }
        let n = repatoms.len();
        if repatoms[..2] != [1 - m, 2 - m] || repatoms[n - 2..] != [m - 1, m] {
            return Err(Error::InvalidMesh(format!(
                "repatoms must start with {}, {} and end with {}, {}",
                1 - m,
                2 - m,
                m - 1,
                m
            )));
        }
        if let Some(w) = repatoms.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMesh(format!(
                "repatoms not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Mesh {
            level,
            half_length,
            repatoms,
        })
    }

    /// Every atom is a repatom.
    pub fn fully_refined(level: Level, half_length: usize) -> Self {
        let m = half_length as i64;
        Mesh {
            level,
            half_length,
            repatoms: (1 - m..=m).collect(),
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn repatoms(&self) -> &[AtomIndex] {
        &self.repatoms
    }

    /// Number of repatoms, `2N`.
    pub fn len(&self) -> usize {
        self.repatoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repatoms.is_empty()
    }

    /// Interval sizes `ν_j = ℓ_{j+1} - ℓ_j`.
    pub fn intervals(&self) -> Vec<usize> {
        self.repatoms
            .windows(2)
            .map(|w| (w[1] - w[0]) as usize)
            .collect()
    }

    pub fn space(&self) -> SpaceDim {
        SpaceDim::full(self.level, self.len())
    }

    pub fn interior_space(&self) -> SpaceDim {
        SpaceDim::interior(self.level, self.len() - 4)
    }

    /// Inserts a repatom at `ℓ_j + ⌊ν_j/2⌋` in every marked interval.
    pub fn bisect(&self, marked: &[usize]) -> Result<Mesh> {
        let nus = self.intervals();
        let mut split = vec![false; nus.len()];
        for &j in marked {
            let nu = *nus.get(j).ok_or_else(|| {
                Error::InvalidMesh(format!("interval {j} does not exist ({} intervals)", nus.len()))
            })?;
            if nu < 2 {
                return Err(Error::CannotRefine { interval: j, nu });
            }
            split[j] = true;
        }
        let mut repatoms = Vec::with_capacity(self.len() + marked.len());
        for (j, &l) in self.repatoms.iter().enumerate() {
            repatoms.push(l);
            if split.get(j).copied().unwrap_or(false) {
                repatoms.push(l + (nus[j] / 2) as i64);
            }
        }
        Mesh::new(self.level, self.half_length, repatoms)
    }
}

impl fmt::Display for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mesh with {} repatoms, intervals {:?}", self.level, self.len(), self.intervals())
    }
}

/// Number of equal parts each qc interval is split into for the dual problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefinementFactor {
    Finite(u32),
    /// Every interval is refined down to single atoms.
    Infinite,
}

impl RefinementFactor {
    pub fn finite(lambda: u32) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::InvalidRefinementFactor(lambda));
        }
        Ok(RefinementFactor::Finite(lambda))
    }

    fn step(self, nu: usize) -> f64 {
        match self {
            RefinementFactor::Finite(l) => (nu as f64 / l as f64).max(1.0),
            RefinementFactor::Infinite => 1.0,
        }
    }
}

impl fmt::Display for RefinementFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementFactor::Finite(l) => write!(f, "{l}"),
            RefinementFactor::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for RefinementFactor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(RefinementFactor::Infinite);
        }
        let l: u32 = s
            .parse()
            .map_err(|_| format!("expected an integer >= 2 or `inf`, got `{s}`"))?;
        RefinementFactor::finite(l).map_err(|e| e.to_string())
    }
}

impl serde::Serialize for RefinementFactor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RefinementFactor::Finite(l) => s.serialize_u32(*l),
            RefinementFactor::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Subinterval sizes for one qc interval of size `nu`.
///
/// Walks a real-valued cursor forward in steps of `max(1, nu/Λ)` and rounds
/// each step with `⌊x + ½⌋`; the sizes always sum to `nu`.
pub fn subdivide_interval(nu: usize, factor: RefinementFactor) -> Vec<usize> {
    let omega = factor.step(nu);
    let target = nu as f64;
    let mut cursor = 0.0_f64;
    let mut covered = 0usize;
    let mut parts = Vec::new();
    while covered < nu {
        cursor = (cursor + omega).min(target);
        let part = (cursor - covered as f64 + 0.5).floor() as usize;
        covered += part;
        parts.push(part);
    }
    parts
}

/// A qc mesh together with a nested pc mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedMeshPair {
    coarse: Mesh,
    fine: Mesh,
    anchor: Vec<usize>,
}

impl NestedMeshPair {
    pub fn new(coarse: Mesh, fine: Mesh) -> Result<Self> {
        if coarse.half_length != fine.half_length {
            return Err(Error::InvalidMesh("meshes are on different chains".into()));
        }
        let mut anchor = Vec::with_capacity(coarse.len());
        let mut k = 0;
        for &l in &coarse.repatoms {
            while k < fine.len() && fine.repatoms[k] < l {
                k += 1;
            }
            if k == fine.len() || fine.repatoms[k] != l {
                return Err(Error::NonNested(l));
            }
            anchor.push(k);
        }
        Ok(NestedMeshPair {
            coarse: Mesh {
                level: Level::Quasicontinuum,
                ..coarse
            },
            fine: Mesh {
                level: Level::PartialContinuum,
                ..fine
            },
            anchor,
        })
    }

    pub fn coarse(&self) -> &Mesh {
        &self.coarse
    }

    pub fn fine(&self) -> &Mesh {
        &self.fine
    }

    /// `μ_j`: position of coarse repatom `j` in the fine mesh.
    pub fn anchor(&self) -> &[usize] {
        &self.anchor
    }
}

/// Builds the pc mesh by splitting every qc interval into `Λ` near-equal parts.
pub fn partial_refine(mesh: &Mesh, factor: RefinementFactor) -> Result<NestedMeshPair> {
    if let RefinementFactor::Finite(l) = factor {
        RefinementFactor::finite(l)?;
    }
    let mut fine = Vec::with_capacity(mesh.len());
    fine.push(mesh.repatoms[0]);
    for (w, nu) in mesh.repatoms.windows(2).zip(mesh.intervals()) {
        let mut l = w[0];
        for part in subdivide_interval(nu, factor) {
            l += part as i64;
            fine.push(l);
        }
        debug_assert_eq!(l, w[1]);
    }
    let fine = Mesh::new(Level::PartialContinuum, mesh.half_length, fine)?;
    NestedMeshPair::new(mesh.clone(), fine)
}

/// Piecewise linear interpolation from a repatom mesh to all atoms
/// (`I^{aq}` for a qc mesh, `I^{ap}` for a pc mesh).
pub fn interpolation_to_atoms(mesh: &Mesh) -> SpaceTaggedOperator {
    let m = mesh.half_length as i64;
    let n_atoms = 2 * mesh.half_length;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_atoms];
    let last = mesh.len() - 1;
    for (j, (w, nu)) in mesh.repatoms.windows(2).zip(mesh.intervals()).enumerate() {
        let nu_f = nu as f64;
        // the right endpoint belongs to the next interval, except at the chain end
        let upper = if j + 1 == last { nu } else { nu - 1 };
        for k in 0..=upper {
            let row = &mut rows[(w[0] + k as i64 + m - 1) as usize];
            if k < nu {
                row.push((j, (nu - k) as f64 / nu_f));
            }
            if k > 0 {
                row.push((j + 1, k as f64 / nu_f));
            }
        }
    }
    SpaceTaggedOperator::new(
        mesh.space(),
        SpaceDim::full(Level::Atomistic, n_atoms),
        CsrMatrix::from_rows(mesh.len(), rows),
    )
}

pub fn build_interp_aq(mesh: &Mesh) -> SpaceTaggedOperator {
    interpolation_to_atoms(mesh)
}

pub fn build_interp_ap(pair: &NestedMeshPair) -> SpaceTaggedOperator {
    interpolation_to_atoms(&pair.fine)
}

/// `I^{pq}`: evaluates qc nodal data at the pc repatoms.
pub fn build_interp_pq(pair: &NestedMeshPair) -> SpaceTaggedOperator {
    let coarse = &pair.coarse.repatoms;
    let fine = &pair.fine.repatoms;
    let mu = &pair.anchor;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fine.len()];
    for j in 0..coarse.len() - 1 {
        let nu = coarse[j + 1] - coarse[j];
        let nu_f = nu as f64;
        let upper = if j + 2 == coarse.len() {
            mu[j + 1] - mu[j]
        } else {
            mu[j + 1] - mu[j] - 1
        };
        for k in 0..=upper {
            let offset = fine[mu[j] + k] - fine[mu[j]];
            let row = &mut rows[mu[j] + k];
            if offset < nu {
                row.push((j, (nu - offset) as f64 / nu_f));
            }
            if offset > 0 {
                row.push((j + 1, offset as f64 / nu_f));
            }
        }
    }
    SpaceTaggedOperator::new(
        pair.coarse.space(),
        pair.fine.space(),
        CsrMatrix::from_rows(coarse.len(), rows),
    )
}

/// `R^{qp}`: picks the pc values sitting at qc repatoms.
pub fn build_restriction_qp(pair: &NestedMeshPair) -> SpaceTaggedOperator {
    let triplets: Vec<_> = pair
        .anchor
        .iter()
        .enumerate()
        .map(|(j, &mu)| (j, mu, 1.0))
        .collect();
    SpaceTaggedOperator::new(
        pair.fine.space(),
        pair.coarse.space(),
        CsrMatrix::from_triplets(pair.coarse.len(), pair.fine.len(), &triplets),
    )
}

/// `J`: extends an interior vector by zeros in the first two and last two slots.
pub fn build_boundary(level: Level, size: usize) -> SpaceTaggedOperator {
    assert!(size >= 4, "boundary operator needs at least 4 slots");
    let triplets: Vec<_> = (0..size - 4).map(|k| (k + 2, k, 1.0)).collect();
    SpaceTaggedOperator::new(
        SpaceDim::interior(level, size - 4),
        SpaceDim::full(level, size),
        CsrMatrix::from_triplets(size, size - 4, &triplets),
    )
}

/// Prescribed positions of the two clamped atoms at each end.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundaryValues {
    pub l1: f64,
    pub l2: f64,
    pub r2: f64,
    pub r1: f64,
}

impl BoundaryValues {
    /// Each clamped atom sits in its own misfit well: `-M, -M+1, M-1, M`.
    pub fn in_wells(params: &ModelParams) -> Self {
        let first = params.first_atom();
        let last = params.last_atom();
        BoundaryValues {
            l1: params.well(first),
            l2: params.well(first + 1),
            r2: params.well(last - 1),
            r1: params.well(last),
        }
    }

    pub fn zero() -> Self {
        BoundaryValues {
            l1: 0.0,
            l2: 0.0,
            r2: 0.0,
            r1: 0.0,
        }
    }
}

/// The boundary lifting on a mesh and its interpolation to all atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVectors {
    /// Boundary values in the four clamped slots of the mesh space, zero elsewhere.
    pub mesh: Vec<f64>,
    /// `I · mesh`.
    pub atoms: Vec<f64>,
}

pub fn boundary_vectors(values: &BoundaryValues, mesh: &Mesh) -> BoundaryVectors {
    let n = mesh.len();
    let mut on_mesh = vec![0.0; n];
    on_mesh[0] = values.l1;
    on_mesh[1] = values.l2;
    on_mesh[n - 2] = values.r2;
    on_mesh[n - 1] = values.r1;
    let atoms = interpolation_to_atoms(mesh)
        .apply(&on_mesh)
        .expect("mesh-sized vector");
    BoundaryVectors {
        mesh: on_mesh,
        atoms,
    }
}

/// A boundary lifting whose interior repatoms sit at their misfit wells.
///
/// Any lifting that carries the boundary values in the clamped slots yields
/// the same minimizer; this one keeps the unknowns small, so positions near
/// the dislocation stay accurate to full precision even for long chains. On
/// intervals whose endpoints both rest in wells on the same side of the
/// dislocation the interpolated atoms are set to their wells exactly.
pub fn well_lifting(params: &ModelParams, values: &BoundaryValues, mesh: &Mesh) -> BoundaryVectors {
    let reps = &mesh.repatoms;
    let n = reps.len();
    let mut on_mesh: Vec<f64> = reps.iter().map(|&l| params.well(l)).collect();
    on_mesh[0] = values.l1;
    on_mesh[1] = values.l2;
    on_mesh[n - 2] = values.r2;
    on_mesh[n - 1] = values.r1;
    let mut atoms = interpolation_to_atoms(mesh)
        .apply(&on_mesh)
        .expect("mesh-sized vector");
    for j in 0..n - 1 {
        let (a, b) = (reps[j], reps[j + 1]);
        let in_wells = on_mesh[j] == params.well(a) && on_mesh[j + 1] == params.well(b);
        if in_wells && (b <= 0 || a >= 1) {
            for i in a..=b {
                atoms[params.slot(i)] = params.well(i);
            }
        }
    }
    BoundaryVectors {
        mesh: on_mesh,
        atoms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qc(m: usize, reps: Vec<i64>) -> Mesh {
        Mesh::new(Level::Quasicontinuum, m, reps).unwrap()
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh::new(Level::Quasicontinuum, 8, vec![-7, -6, 7, 8]).is_ok());
        assert!(Mesh::new(Level::Quasicontinuum, 8, vec![-7, -5, 7, 8]).is_err());
        assert!(Mesh::new(Level::Quasicontinuum, 8, vec![-7, -6, 0, 0, 7, 8]).is_err());
        assert!(Mesh::new(Level::Atomistic, 8, vec![-7, -6, 7, 8]).is_err());
        let mesh = qc(8, vec![-7, -6, 0, 7, 8]);
        assert_eq!(mesh.intervals(), vec![1, 6, 7, 1]);
        assert_eq!(mesh.intervals().iter().sum::<usize>(), 15);
    }

    #[test]
    fn fully_refined_interpolation_is_identity() {
        let mesh = Mesh::fully_refined(Level::Quasicontinuum, 6);
        let i = interpolation_to_atoms(&mesh);
        assert_eq!(i.matrix(), &CsrMatrix::identity(12));
    }

    #[test]
    fn midpoint_interpolation() {
        let mesh = qc(4, vec![-3, -2, 0, 2, 3, 4]);
        let i = interpolation_to_atoms(&mesh);
        // atom 1 sits in slot 4, between repatoms 0 (index 2) and 2 (index 3)
        assert_eq!(i.matrix().get(4, 2), 0.5);
        assert_eq!(i.matrix().get(4, 3), 0.5);
    }

    #[test]
    fn bisection() {
        let mesh = qc(8, vec![-7, -6, -1, 7, 8]);
        let refined = mesh.bisect(&[2]).unwrap();
        assert_eq!(refined.repatoms(), &[-7, -6, -1, 3, 7, 8]);
        let odd = qc(8, vec![-7, -6, -1, 4, 7, 8]).bisect(&[2]).unwrap();
        assert_eq!(odd.intervals(), vec![1, 5, 2, 3, 3, 1]);
        assert!(matches!(mesh.bisect(&[0]), Err(Error::CannotRefine { interval: 0, nu: 1 })));
        assert!(mesh.bisect(&[9]).is_err());
    }

    #[test]
    fn bisect_large_interval() {
        let mut reps = vec![-2052, -2051, -3];
        reps.extend([2052, 2053]);
        let mesh = Mesh::new(Level::Quasicontinuum, 2053, {
            let mut r = reps.clone();
            r.insert(3, 2045);
            r
        })
        .unwrap();
        assert_eq!(mesh.intervals()[1], 2048);
        let refined = mesh.bisect(&[1]).unwrap();
        assert_eq!(&refined.intervals()[1..3], &[1024, 1024]);
    }

    #[test]
    fn subdivision_traces() {
        let two = RefinementFactor::Finite(2);
        assert_eq!(subdivide_interval(2048, two), vec![1024, 1024]);
        assert_eq!(subdivide_interval(5, two), vec![3, 2]);
        assert_eq!(subdivide_interval(3, RefinementFactor::Finite(4)), vec![1, 1, 1]);
        assert_eq!(subdivide_interval(1, two), vec![1]);
        assert_eq!(subdivide_interval(4, RefinementFactor::Infinite), vec![1; 4]);
    }

    #[test]
    fn refinement_factor_parsing() {
        assert_eq!("inf".parse::<RefinementFactor>().unwrap(), RefinementFactor::Infinite);
        assert_eq!("8".parse::<RefinementFactor>().unwrap(), RefinementFactor::Finite(8));
        assert!("1".parse::<RefinementFactor>().is_err());
        assert!("two".parse::<RefinementFactor>().is_err());
        assert!(partial_refine(&Mesh::fully_refined(Level::Quasicontinuum, 4), RefinementFactor::Finite(1)).is_err());
    }

    #[test]
    fn identity_pair_operators() {
        let mesh = qc(8, vec![-7, -6, -2, 3, 7, 8]);
        let pair = NestedMeshPair::new(mesh.clone(), mesh.clone()).unwrap();
        assert_eq!(build_interp_pq(&pair).matrix(), &CsrMatrix::identity(6));
        assert_eq!(build_restriction_qp(&pair).matrix(), &CsrMatrix::identity(6));
    }

    #[test]
    fn pq_midpoint_row() {
        let coarse = qc(8, vec![-7, -6, 0, 4, 7, 8]);
        let fine = Mesh::new(Level::PartialContinuum, 8, vec![-7, -6, 0, 2, 4, 7, 8]).unwrap();
        let pair = NestedMeshPair::new(coarse, fine).unwrap();
        let ipq = build_interp_pq(&pair);
        assert_eq!(ipq.matrix().get(3, 2), 0.5);
        assert_eq!(ipq.matrix().get(3, 3), 0.5);
        assert_eq!(pair.anchor(), &[0, 1, 2, 4, 5, 6]);
    }

    #[test]
    fn non_nested_pair_is_rejected() {
        let coarse = qc(8, vec![-7, -6, 0, 7, 8]);
        let fine = Mesh::new(Level::PartialContinuum, 8, vec![-7, -6, 1, 7, 8]).unwrap();
        assert!(matches!(NestedMeshPair::new(coarse, fine), Err(Error::NonNested(0))));
    }

    #[test]
    fn boundary_operator() {
        let j = build_boundary(Level::Quasicontinuum, 7);
        let v = j.apply(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        let jtj = j.transpose().compose(&j).unwrap();
        assert_eq!(jtj.matrix(), &CsrMatrix::identity(3));
    }

    #[test]
    fn zero_boundary_values() {
        let mesh = qc(8, vec![-7, -6, 0, 7, 8]);
        let bv = boundary_vectors(&BoundaryValues::zero(), &mesh);
        assert!(bv.mesh.iter().chain(&bv.atoms).all(|&v| v == 0.0));
    }

    #[test]
    fn fully_refined_boundary_lift_is_embedding() {
        let p = ModelParams::new(0.1, 2.0, 1.0, 1.0, 6).unwrap();
        let mesh = Mesh::fully_refined(Level::Quasicontinuum, 6);
        let bv = boundary_vectors(&BoundaryValues::in_wells(&p), &mesh);
        assert_eq!(bv.atoms, bv.mesh);
        assert_eq!(&bv.mesh[..2], &[-6.0, -5.0]);
        assert_eq!(&bv.mesh[10..], &[5.0, 6.0]);
    }
}
