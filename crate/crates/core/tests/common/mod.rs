//! Seeded random inputs shared by the integration tests.
#![allow(dead_code)]

use lqdim::generators::{AffineMap, IfsSpec, MeasureSpec};
use lqdim::{DyadicMeasure, DyadicSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to `max_atoms` atoms at `level`, spread over a random window of the grid.
pub fn sparse_measure(rng: &mut ChaCha8Rng, level: u32, max_atoms: usize) -> DyadicMeasure {
    let cells = 1i64 << level;
    let n = rng.gen_range(1..=max_atoms.min(cells as usize));
    let width = rng.gen_range((n as i64).max(1)..=cells);
    let start = rng.gen_range(0..=cells - width);
    let atoms: Vec<(i64, f64)> = (0..n)
        .map(|_| (start + rng.gen_range(0..width), rng.gen_range(1e-3..1.0)))
        .collect();
    DyadicMeasure::from_atoms(level, atoms).unwrap()
}

pub fn sparse_set(rng: &mut ChaCha8Rng, level: u32, max_cells: usize) -> DyadicSet {
    sparse_measure(rng, level, max_cells).support()
}

/// Two- or three-map IFS on [0, 1] with positive ratios and disjoint first-level
/// pieces, random weights.
pub fn random_ifs(rng: &mut ChaCha8Rng) -> MeasureSpec {
    let k = rng.gen_range(2..=3);
    let ratios: Vec<f64> = (0..k)
        .map(|_| rng.gen_range(0.15..0.9 / k as f64))
        .collect();
    let free = 1.0 - ratios.iter().sum::<f64>();
    // split the free length into k−1 gaps
    let mut cuts: Vec<f64> = (0..k - 2).map(|_| rng.gen_range(0.0..free)).collect();
    cuts.push(0.0);
    cuts.push(free);
    cuts.sort_by(f64::total_cmp);
    let mut maps = Vec::new();
    let mut x = 0.0;
    for i in 0..k {
        maps.push(AffineMap {
            ratio: ratios[i],
            shift: x,
        });
        if i + 1 < k {
            x += ratios[i] + (cuts[i + 1] - cuts[i]);
        }
    }
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    MeasureSpec::Ifs(IfsSpec {
        maps,
        weights: weights.iter().map(|w| w / total).collect(),
    })
}

/// μ ∗ ν by the quadratic double loop, accumulating μ index ascending.
pub fn oracle_convolution(mu: &DyadicMeasure, nu: &DyadicMeasure) -> DyadicMeasure {
    let mut acc = std::collections::BTreeMap::new();
    for (i, a) in mu.atoms() {
        for (j, b) in nu.atoms() {
            *acc.entry(i + j).or_insert(0.0) += a * b;
        }
    }
    DyadicMeasure::from_atoms(mu.level(), acc).unwrap()
}
