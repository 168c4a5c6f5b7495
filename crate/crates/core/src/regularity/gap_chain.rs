//! Mass decay across a chain of nested cells.
//!
//! For a measure that is (2^N, γ)-uniformly perfect, a level-(s+1)D cell I inside
//! the middle half of a level-sD cell J with spt ⊄ J satisfies
//! ν(I) ≤ 2^{−γ⌊(D−1)/N⌋} ν(J).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::DyadicMeasure;

const REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapChainPair {
    /// Level and index of J.
    pub outer_level: u32,
    pub outer: i64,
    /// Index of I at level outer_level + D.
    pub inner: i64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapChainReport {
    pub bound: f64,
    pub pairs_checked: u64,
    /// Largest ν(I)/ν(J) seen.
    pub worst: Option<GapChainPair>,
    pub violations: u64,
}

impl GapChainReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks every pair with (s+1)D ≤ level. `n_exp` is N in the (2^N, γ) hypothesis.
pub fn check_gap_chain(
    mu: &DyadicMeasure,
    n_exp: u32,
    gamma: f64,
    d: u32,
) -> Result<GapChainReport> {
    if n_exp == 0 || d == 0 {
        return Err(invalid("N and D must be positive"));
    }
    let m = mu.level();
    let bound = (-gamma * ((d - 1) / n_exp) as f64).exp2();
    let mut report = GapChainReport {
        bound,
        pairs_checked: 0,
        worst: None,
        violations: 0,
    };
    let idx = mu.indices();
    let w = mu.masses();
    let mut s = 0;
    while (s + 1) * d <= m {
        let outer_shift = m - s * d;
        let inner_shift = m - (s + 1) * d;
        // J's middle half, in level-(s+1)D cells: [j·2^D + 2^D/4, j·2^D + 3·2^D/4)
        let quarter = (1i64 << d) as f64 / 4.0;
        let mut start = 0;
        while start < idx.len() {
            let j = idx[start] >> outer_shift;
            let mut end = start;
            while end < idx.len() && idx[end] >> outer_shift == j {
                end += 1;
            }
            if end - start < idx.len() {
                let mass_j: f64 = w[start..end].iter().sum();
                let base = (j << d) as f64;
                let mut a = start;
                while a < end {
                    let i = idx[a] >> inner_shift;
                    let mut b = a;
                    while b < end && idx[b] >> inner_shift == i {
                        b += 1;
                    }
                    let rel = i as f64 - base;
                    if rel >= quarter && rel + 1.0 <= 3.0 * quarter {
                        let ratio = w[a..b].iter().sum::<f64>() / mass_j;
                        report.pairs_checked += 1;
                        if ratio > bound * (1.0 + REL_TOL) {
                            report.violations += 1;
                        }
                        if report.worst.map_or(true, |p| ratio > p.ratio) {
                            report.worst = Some(GapChainPair {
                                outer_level: s * d,
                                outer: j,
                                inner: i,
                                ratio,
                            });
                        }
                    }
                    a = b;
                }
            }
            start = end;
        }
        s += 1;
    }
    Ok(report)
}
