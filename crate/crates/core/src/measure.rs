//! Sparse dyadic measures and sets on the grid 2^-m·ℤ.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{log2_sum_exp2, pairwise_sum};

/// Largest supported grid level. Indices are `i64` and positions are computed in `f64`.
pub const MAX_LEVEL: u32 = 52;

/// Tolerance on the total mass supplied to constructors before renormalization.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Atomic probability measure on 2^-level·ℤ. Atom `k` sits at `k·2^-level`.
///
/// Indices are strictly increasing, masses strictly positive and summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DyadicMeasure {
    level: u32,
    idx: Vec<i64>,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    level: u32,
    atoms: Vec<(i64, f64)>,
}

impl TryFrom<MeasureRepr> for DyadicMeasure {
    type Error = Error;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        DyadicMeasure::from_atoms(r.level, r.atoms)
    }
}

impl From<DyadicMeasure> for MeasureRepr {
    fn from(m: DyadicMeasure) -> Self {
        MeasureRepr {
            level: m.level,
            atoms: m.idx.into_iter().zip(m.mass).collect(),
        }
    }
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(invalid(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

impl DyadicMeasure {
    /// Builds a measure from unsorted atoms. Duplicate indices are merged and the
    /// result is renormalized to total mass 1. Zero masses are dropped.
    pub fn from_atoms(level: u32, atoms: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        check_level(level)?;
        let mut atoms: Vec<(i64, f64)> = atoms.into_iter().collect();
        for &(_, w) in &atoms {
            if !w.is_finite() || w < 0.0 {
                return Err(invalid(format!(
                    "atom mass {w} is not a finite non-negative number"
                )));
            }
        }
        atoms.sort_by_key(|a| a.0);
        let mut idx = Vec::with_capacity(atoms.len());
        let mut mass: Vec<f64> = Vec::with_capacity(atoms.len());
        for (k, w) in atoms {
            if w == 0.0 {
                continue;
            }
            if idx.last() == Some(&k) {
                *mass.last_mut().unwrap() += w;
            } else {
                idx.push(k);
                mass.push(w);
            }
        }
        Self::from_sorted(level, idx, mass)
    }

    /// Builds from strictly increasing indices and positive masses, renormalizing.
    pub(crate) fn from_sorted(level: u32, idx: Vec<i64>, mut mass: Vec<f64>) -> Result<Self> {
        check_level(level)?;
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(idx.len(), mass.len());
        if idx.is_empty() {
            return Err(invalid("measure has no atoms"));
        }
        let total = pairwise_sum(&mass);
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid(format!("total mass {total} cannot be normalized")));
        }
        if total != 1.0 {
            for w in &mut mass {
                *w /= total;
            }
        }
        Ok(DyadicMeasure { level, idx, mass })
    }

    /// Like [`DyadicMeasure::from_atoms`] but rejects inputs whose total mass is not
    /// within [`MASS_TOLERANCE`] of 1.
    pub fn from_probability_atoms(
        level: u32,
        atoms: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self> {
        let atoms: Vec<(i64, f64)> = atoms.into_iter().collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("total mass {total} differs from 1")));
        }
        Self::from_atoms(level, atoms)
    }

    pub fn dirac(level: u32, index: i64) -> Result<Self> {
        Self::from_sorted(level, vec![index], vec![1.0])
    }

    /// Uniform measure on indices `lo..hi`.
    pub fn uniform(level: u32, lo: i64, hi: i64) -> Result<Self> {
        if hi <= lo {
            return Err(invalid("empty index range"));
        }
        let n = (hi - lo) as usize;
        let w = 1.0 / n as f64;
        Self::from_sorted(level, (lo..hi).collect(), vec![w; n])
    }

    /// Uniform measure on a dyadic set.
    pub fn uniform_on(set: &DyadicSet) -> Result<Self> {
        let n = set.len();
        if n == 0 {
            return Err(invalid("empty set"));
        }
        Self::from_sorted(set.level(), set.indices().to_vec(), vec![1.0 / n as f64; n])
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn indices(&self) -> &[i64] {
        &self.idx
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.idx.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn cell_size(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn min_index(&self) -> i64 {
        self.idx[0]
    }

    pub fn max_index(&self) -> i64 {
        *self.idx.last().unwrap()
    }

    /// Diameter of the atom positions.
    pub fn diameter(&self) -> f64 {
        (self.max_index() - self.min_index()) as f64 * self.cell_size()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.mass)
    }

    pub fn support(&self) -> DyadicSet {
        DyadicSet {
            level: self.level,
            idx: self.idx.clone(),
        }
    }

    /// Mass of the atom at `index`, zero when absent.
    pub fn mass_at(&self, index: i64) -> f64 {
        match self.idx.binary_search(&index) {
            Ok(i) => self.mass[i],
            Err(_) => 0.0,
        }
    }

    /// Collapses each level-`target` cell to its left endpoint.
    pub fn discretize(&self, target: u32) -> Result<Self> {
        if target > self.level {
            return Err(invalid(format!(
                "target level {target} exceeds measure level {}",
                self.level
            )));
        }
        let shift = self.level - target;
        if shift == 0 {
            return Ok(self.clone());
        }
        let mut idx = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        let mut start = 0;
        while start < self.idx.len() {
            let cell = self.idx[start] >> shift;
            let mut end = start + 1;
            while end < self.idx.len() && self.idx[end] >> shift == cell {
                end += 1;
            }
            idx.push(cell);
            mass.push(pairwise_sum(&self.mass[start..end]));
            start = end;
        }
        Self::from_sorted(target, idx, mass)
    }

    /// Same measure on a finer grid (indices scaled by 2^(target-level)).
    pub fn refine(&self, target: u32) -> Result<Self> {
        if target < self.level {
            return Err(invalid("refine target below current level"));
        }
        check_level(target)?;
        let shift = target - self.level;
        let idx = self.idx.iter().map(|&k| k << shift).collect();
        Ok(DyadicMeasure {
            level: target,
            idx,
            mass: self.mass.clone(),
        })
    }

    /// Translates by `shift` grid cells.
    pub fn translate(&self, shift: i64) -> Self {
        DyadicMeasure {
            level: self.level,
            idx: self.idx.iter().map(|&k| k + shift).collect(),
            mass: self.mass.clone(),
        }
    }

    /// Pushforward under x ↦ -x, followed by the left-endpoint convention (the atom
    /// at k moves to -k).
    pub fn reflect(&self) -> Self {
        let mut atoms: Vec<(i64, f64)> = self.atoms().map(|(k, w)| (-k, w)).collect();
        atoms.reverse();
        DyadicMeasure {
            level: self.level,
            idx: atoms.iter().map(|a| a.0).collect(),
            mass: atoms.iter().map(|a| a.1).collect(),
        }
    }

    /// log2 Σ mass^q.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        check_q(q)?;
        let mut ts: Vec<f64> = self.mass.iter().map(|w| q * w.log2()).collect();
        Ok(log2_sum_exp2(&mut ts))
    }

    /// Largest atom mass.
    pub fn linf_norm(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::max)
    }

    /// log2 of the q-th power of the L^q norm of the piecewise constant density,
    /// i.e. `level·(q-1) + lq_norm`.
    pub fn density_lq_norm(&self, q: f64) -> Result<f64> {
        Ok(self.lq_norm(q)? + self.level as f64 * (q - 1.0))
    }

    /// Translates the support to start at 0 and rescales by 2^-k, with k ≥ 0 the
    /// least integer placing it inside [0, 1). Indices are unchanged and the level
    /// grows by k, so exponents of the result lie in [0, 1].
    pub fn normalized(&self) -> Self {
        let k = excess_levels(self.max_index() - self.min_index() + 1, self.level);
        let mut t = self.translate(-self.min_index());
        t.level = (self.level + k).min(MAX_LEVEL);
        t
    }
}

/// Number of levels a support spanning `cells` cells at `level` must be coarsened
/// by to fit in a unit interval.
pub(crate) fn excess_levels(cells: i64, level: u32) -> u32 {
    let bits = 64 - ((cells.max(1) - 1) as u64).leading_zeros();
    bits.saturating_sub(level)
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(invalid(format!("q must be a finite number > 1, got {q}")));
    }
    Ok(())
}

/// Sparse set of grid cells at a fixed level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SetRepr")]
pub struct DyadicSet {
    level: u32,
    #[serde(rename = "indices")]
    idx: Vec<i64>,
}

#[derive(Deserialize)]
struct SetRepr {
    level: u32,
    indices: Vec<i64>,
}

impl TryFrom<SetRepr> for DyadicSet {
    type Error = Error;
    fn try_from(r: SetRepr) -> Result<Self> {
        DyadicSet::new(r.level, r.indices)
    }
}

impl DyadicSet {
    pub fn new(level: u32, indices: impl IntoIterator<Item = i64>) -> Result<Self> {
        check_level(level)?;
        let mut idx: Vec<i64> = indices.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        Ok(DyadicSet { level, idx })
    }

    /// All cells `lo..hi`.
    pub fn range(level: u32, lo: i64, hi: i64) -> Result<Self> {
        check_level(level)?;
        Ok(DyadicSet {
            level,
            idx: (lo..hi).collect(),
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn indices(&self) -> &[i64] {
        &self.idx
    }

    pub fn contains(&self, k: i64) -> bool {
        self.idx.binary_search(&k).is_ok()
    }

    pub fn cell_size(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Diameter of the grid points (left endpoints).
    pub fn diameter(&self) -> f64 {
        match (self.idx.first(), self.idx.last()) {
            (Some(a), Some(b)) => (b - a) as f64 * self.cell_size(),
            _ => 0.0,
        }
    }

    /// Cells of the coarser grid meeting the set.
    pub fn discretize(&self, target: u32) -> Result<Self> {
        if target > self.level {
            return Err(invalid("target level exceeds set level"));
        }
        let shift = self.level - target;
        let mut idx: Vec<i64> = self.idx.iter().map(|&k| k >> shift).collect();
        idx.dedup();
        Ok(DyadicSet { level: target, idx })
    }

    pub fn translate(&self, shift: i64) -> Self {
        DyadicSet {
            level: self.level,
            idx: self.idx.iter().map(|&k| k + shift).collect(),
        }
    }

    /// Translates to start at 0 and rescales into [0, 1) (see
    /// [`DyadicMeasure::normalized`]).
    pub fn normalized(&self) -> Self {
        if self.idx.is_empty() {
            return self.clone();
        }
        let lo = self.idx[0];
        let k = excess_levels(self.idx[self.idx.len() - 1] - lo + 1, self.level);
        let mut t = self.translate(-lo);
        t.level = (self.level + k).min(MAX_LEVEL);
        t
    }
}

/// μ^(target): see [`DyadicMeasure::discretize`].
pub fn discretize(mu: &DyadicMeasure, target_level: u32) -> Result<DyadicMeasure> {
    mu.discretize(target_level)
}

/// log2 Σ μ(x)^q.
pub fn lq_norm(mu: &DyadicMeasure, q: f64) -> Result<f64> {
    mu.lq_norm(q)
}

pub fn linf_norm(mu: &DyadicMeasure) -> f64 {
    mu.linf_norm()
}

pub fn density_lq_norm(mu: &DyadicMeasure, q: f64) -> Result<f64> {
    mu.density_lq_norm(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_merges_sorts_and_normalizes() {
        let mu = DyadicMeasure::from_atoms(3, [(5, 1.0), (-2, 2.0), (5, 1.0)]).unwrap();
        assert_eq!(mu.indices(), &[-2, 5]);
        assert_eq!(mu.masses(), &[0.5, 0.5]);
        assert!(DyadicMeasure::from_atoms(3, [(0, -1.0)]).is_err());
        assert!(DyadicMeasure::from_atoms(3, []).is_err());
        assert!(DyadicMeasure::from_probability_atoms(3, [(0, 0.5)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mu = DyadicMeasure::from_atoms(4, [(1, 0.25), (3, 0.75)]).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"level":4,"atoms":[[1,0.25],[3,0.75]]}"#);
        let back: DyadicMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<DyadicMeasure>(r#"{"level":4,"atoms":[]}"#).is_err());
    }

    #[test]
    fn discretize_examples() {
        let d = DyadicMeasure::dirac(20, 0).unwrap().discretize(5).unwrap();
        assert_eq!(d.level(), 5);
        assert_eq!(d.indices(), &[0]);
        let u = DyadicMeasure::uniform(10, 0, 1024)
            .unwrap()
            .discretize(5)
            .unwrap();
        assert_eq!(u.len(), 32);
        assert!(u.masses().iter().all(|&w| (w - 1.0 / 32.0).abs() < 1e-15));
        assert!(u.discretize(6).is_err());
    }

    #[test]
    fn discretize_floors_negative_indices() {
        let mu = DyadicMeasure::from_atoms(2, [(-1, 1.0), (-4, 1.0), (3, 2.0)]).unwrap();
        let c = mu.discretize(0).unwrap();
        assert_eq!(c.indices(), &[-1, 0]);
        assert_eq!(c.masses(), &[0.5, 0.5]);
    }

    #[test]
    fn norm_examples() {
        let u = DyadicMeasure::uniform(10, 0, 1024).unwrap();
        assert!((u.lq_norm(2.0).unwrap() + 10.0).abs() < 1e-12);
        let d = DyadicMeasure::dirac(7, 3).unwrap();
        for q in [1.5, 2.0, 8.0] {
            assert_eq!(d.lq_norm(q).unwrap(), 0.0);
        }
        let two = DyadicMeasure::uniform(1, 0, 2).unwrap();
        assert!((two.lq_norm(2.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(two.lq_norm(1.0).is_err());
        assert!(two.lq_norm(0.5).is_err());
        assert_eq!(d.linf_norm(), 1.0);
        assert_eq!(u.linf_norm(), 1.0 / 1024.0);
    }

    #[test]
    fn density_examples() {
        let u = DyadicMeasure::uniform(12, 0, 4096).unwrap();
        for q in [1.5, 2.0, 4.0] {
            assert!(u.density_lq_norm(q).unwrap().abs() < 1e-9);
        }
        let d = DyadicMeasure::dirac(9, 0).unwrap();
        assert_eq!(d.density_lq_norm(2.0).unwrap(), 9.0);
    }

    #[test]
    fn lq_norm_survives_underflow() {
        let n = 1 << 12;
        let mu = DyadicMeasure::uniform(30, 0, n).unwrap();
        let v = mu.lq_norm(8.0).unwrap();
        assert!((v - (-12.0 * 7.0)).abs() < 1e-9);
    }

    #[test]
    fn normalized_fits_unit_interval() {
        let mu = DyadicMeasure::uniform(4, -3, 20).unwrap();
        let n = mu.normalized();
        assert_eq!(n.level(), 5);
        assert_eq!(n.min_index(), 0);
        assert!(n.max_index() < 32);
        let small = DyadicMeasure::uniform(4, 5, 9).unwrap().normalized();
        assert_eq!(small.level(), 4);
        assert_eq!(small.indices(), &[0, 1, 2, 3]);
        assert_eq!(excess_levels(16, 4), 0);
        assert_eq!(excess_levels(17, 4), 1);
        assert_eq!(excess_levels(1, 0), 0);
    }

    #[test]
    fn set_basics() {
        let s = DyadicSet::new(3, [4, 1, 4, 7]).unwrap();
        assert_eq!(s.indices(), &[1, 4, 7]);
        assert_eq!(s.discretize(1).unwrap().indices(), &[0, 1]);
        assert!((s.diameter() - 6.0 / 8.0).abs() < 1e-15);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"level":3,"indices":[1,4,7]}"#);
    }
}
