//! Lower dimension of a dyadic set from minimal covering counts.
//!
//! W(s) is the smallest number of level-(m−a) cells meeting A ∩ B(x, 2^{a+s})
//! over x ∈ A and a ≥ 0 with 2^{a+s} at most the diameter (all in grid cells).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DyadicSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerDimEstimate {
    pub t: f64,
    /// min_s W(s)·2^{−ts}.
    pub c_t: f64,
    /// (s, W(s)) for s = 1..s_max.
    pub profile: Vec<(u32, u64)>,
}

/// W(s) for s = 1..=floor(log2 diam).
pub fn covering_profile(set: &DyadicSet) -> Vec<(u32, u64)> {
    let idx = set.indices();
    if idx.len() < 2 {
        return Vec::new();
    }
    let diam = (idx[idx.len() - 1] - idx[0]) as u64;
    let s_max = 63 - diam.leading_zeros();
    let mut out = Vec::new();
    let mut flags = vec![0u64; idx.len() + 1];
    let mut best = vec![u64::MAX; s_max as usize + 1];
    for a in 0..s_max {
        // flags[i+1] = number of i' ≤ i starting a new level-(m−a) cell
        for i in 0..idx.len() {
            let new_cell = i == 0 || (idx[i] >> a) != (idx[i - 1] >> a);
            flags[i + 1] = flags[i] + new_cell as u64;
        }
        for s in 1..=(s_max - a) {
            let r = 1i64 << (a + s);
            let (mut i0, mut i1) = (0usize, 0usize);
            let mut w_min = u64::MAX;
            for &x in idx {
                while idx[i0] < x - r {
                    i0 += 1;
                }
                while i1 < idx.len() && idx[i1] < x + r {
                    i1 += 1;
                }
                let count = 1 + flags[i1] - flags[i0 + 1];
                w_min = w_min.min(count);
            }
            best[s as usize] = best[s as usize].min(w_min);
        }
    }
    for s in 1..=s_max {
        out.push((s, best[s as usize]));
    }
    out
}

/// t is the smallest growth rate (log2 W(s+Δ) − log2 W(s))/Δ with Δ = ⌈s_max/2⌉,
/// clamped to [0,1]. A plateau of W across half the scale range, as produced by
/// an isolated point, gives t = 0.
pub fn estimate_lower_dimension(set: &DyadicSet) -> Result<LowerDimEstimate> {
    if set.is_empty() {
        return Err(Error::DegenerateInput("empty set".into()));
    }
    let profile = covering_profile(set);
    if profile.len() < 2 {
        return Ok(LowerDimEstimate {
            t: 0.0,
            c_t: 1.0,
            profile,
        });
    }
    let logs: Vec<f64> = profile.iter().map(|&(_, w)| (w as f64).log2()).collect();
    let delta = profile.len().div_ceil(2);
    let mut t = f64::INFINITY;
    for i in 0..profile.len() - delta {
        t = t.min((logs[i + delta] - logs[i]) / delta as f64);
    }
    let t = t.clamp(0.0, 1.0);
    let c_t = profile
        .iter()
        .map(|&(s, w)| w as f64 * (-(t * s as f64)).exp2())
        .fold(f64::INFINITY, f64::min);
    Ok(LowerDimEstimate { t, c_t, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_set, MeasureSpec};

    fn brute_w(set: &DyadicSet, s: u32) -> u64 {
        let idx = set.indices();
        let diam = idx[idx.len() - 1] - idx[0];
        let mut best = u64::MAX;
        let mut a = 0;
        while (1i64 << (a + s)) <= diam {
            let r = 1i64 << (a + s);
            for &x in idx {
                let mut cells: Vec<i64> = idx
                    .iter()
                    .filter(|&&k| k >= x - r && k < x + r)
                    .map(|&k| k >> a)
                    .collect();
                cells.dedup();
                best = best.min(cells.len() as u64);
            }
            a += 1;
        }
        best
    }

    #[test]
    fn profile_matches_brute_force() {
        let s = generate_set(&MeasureSpec::middle_thirds(), 10).unwrap();
        for (sc, w) in covering_profile(&s) {
            assert_eq!(w, brute_w(&s, sc), "s={sc}");
        }
        let odd = DyadicSet::new(7, [-5, -4, 0, 3, 9, 10, 11, 40, 41, 90]).unwrap();
        for (sc, w) in covering_profile(&odd) {
            assert_eq!(w, brute_w(&odd, sc), "s={sc}");
        }
    }

    #[test]
    fn interval_has_dimension_one() {
        let s = DyadicSet::range(14, 0, 1 << 14).unwrap();
        let e = estimate_lower_dimension(&s).unwrap();
        assert!((e.t - 1.0).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn middle_thirds() {
        let s = generate_set(&MeasureSpec::middle_thirds(), 20).unwrap();
        let e = estimate_lower_dimension(&s).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        assert!((e.t - d).abs() < 0.05, "{e:?}");
        assert!(e.c_t > 0.0);
    }

    #[test]
    fn isolated_point_and_singleton() {
        let s = DyadicSet::new(12, (0..64).chain([1024])).unwrap();
        assert_eq!(estimate_lower_dimension(&s).unwrap().t, 0.0);
        let one = DyadicSet::new(12, [5]).unwrap();
        assert_eq!(estimate_lower_dimension(&one).unwrap().t, 0.0);
    }
}
