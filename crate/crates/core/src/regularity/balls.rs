//! Ball masses on discretized measures.
//!
//! Balls are half-open intervals [x - r, x + r) over atom positions, with x and r
//! in grid units. At an aligned center this is exactly the union of the cells
//! whose left endpoints it contains.

use crate::measure::DyadicMeasure;

const DIRECT_SUM_LIMIT: usize = 64;

/// Prefix sums for O(log n) ball masses.
pub struct BallIndex<'a> {
    idx: &'a [i64],
    mass: &'a [f64],
    prefix: Vec<f64>,
}

impl<'a> BallIndex<'a> {
    pub fn new(mu: &'a DyadicMeasure) -> Self {
        let mut prefix = Vec::with_capacity(mu.len() + 1);
        let (mut s, mut c) = (0.0f64, 0.0f64);
        prefix.push(0.0);
        for &w in mu.masses() {
            // compensated running sum
            let y = w - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
            prefix.push(s);
        }
        BallIndex {
            idx: mu.indices(),
            mass: mu.masses(),
            prefix,
        }
    }

    /// Atom positions `i0..i1` with index in [lo, hi) (real grid units).
    pub fn range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let first = lo.ceil();
        let last_excl = hi.ceil();
        let i0 = self.idx.partition_point(|&k| (k as f64) < first);
        let i1 = self.idx.partition_point(|&k| (k as f64) < last_excl);
        (i0, i1.max(i0))
    }

    pub fn range_mass(&self, i0: usize, i1: usize) -> f64 {
        if i1 <= i0 {
            0.0
        } else if i1 - i0 <= DIRECT_SUM_LIMIT {
            self.mass[i0..i1].iter().sum()
        } else {
            self.prefix[i1] - self.prefix[i0]
        }
    }

    /// μ([c - r, c + r)) with c and r in grid units.
    pub fn ball(&self, c: f64, r: f64) -> f64 {
        let (i0, i1) = self.range(c - r, c + r);
        self.range_mass(i0, i1)
    }

    /// True if every atom lies in [c - r, c + r).
    pub fn swallows(&self, c: f64, r: f64) -> bool {
        let lo = self.idx[0] as f64;
        let hi = self.idx[self.idx.len() - 1] as f64;
        lo >= c - r && hi < c + r
    }
}

/// Dyadic radii 2^j (grid units) for j = j_min.. while 2^j ≤ max.
pub fn dyadic_radii(j_min: i32, max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = j_min;
    while (j as f64).exp2() <= max {
        out.push((j as f64).exp2());
        j += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_balls() {
        let mu = DyadicMeasure::uniform(4, 0, 16).unwrap();
        let b = BallIndex::new(&mu);
        assert_eq!(b.ball(5.0, 1.0), 2.0 / 16.0);
        assert_eq!(b.ball(0.0, 4.0), 4.0 / 16.0);
        assert_eq!(b.ball(5.5, 0.5), 1.0 / 16.0);
        assert_eq!(b.ball(5.5, 0.25), 0.0);
        assert!((b.ball(8.0, 100.0) - 1.0).abs() < 1e-15);
        assert!(b.swallows(8.0, 8.5));
        assert!(!b.swallows(8.0, 7.5));
    }

    #[test]
    fn radii() {
        assert_eq!(dyadic_radii(0, 5.0), vec![1.0, 2.0, 4.0]);
        assert_eq!(dyadic_radii(-1, 1.0), vec![0.5, 1.0]);
    }
}
