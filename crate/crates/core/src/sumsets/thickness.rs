//! Thickness through the maximal-gap derivation.
//!
//! A compact set is given as sorted disjoint closed intervals. Each bridge is
//! split at its largest gap (leftmost on ties) until the bridges are single
//! intervals, and τ is the smallest ratio min(|I₀|, |I₁|)/|O| over the splits.
//! The maximal-gap derivation is the Cartesian tree of the gap lengths.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::exact;
use crate::error::{invalid, Result};
use crate::generators::{construction_intervals, MeasureSpec};
use crate::measure::DyadicSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub bridge: (f64, f64),
    pub gap: (f64, f64),
    pub left: (f64, f64),
    pub right: (f64, f64),
    #[serde(with = "extended")]
    pub tau: f64,
}

/// The root bridge and every split, in depth-first order (root split first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationTree {
    pub root: (f64, f64),
    pub splits: Vec<Split>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    /// ∞ (serialized as "inf") iff there is no gap.
    #[serde(with = "extended")]
    pub tau: f64,
    pub derivation: DerivationTree,
    /// Level of the input approximation, if it came from a grid.
    pub resolution: Option<u32>,
    /// Gaps narrower than the resolution are invisible, so τ of the true set
    /// may be smaller.
    pub upper_bound_only: bool,
    pub largest_gap: f64,
    pub smallest_bridge: f64,
    /// Computed in rational arithmetic from the generator parameters.
    #[serde(default)]
    pub exact: bool,
}

mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Sorts, closes gaps shorter than `floor`, and merges overlapping intervals.
fn merge(mut iv: Vec<(f64, f64)>, floor: f64) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (lo, hi) in iv {
        match out.last_mut() {
            Some(last) if lo - last.1 < floor || lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Interval endpoint type: f64, or i128 numerators over a common denominator.
trait Coord: Copy + PartialOrd {
    fn minus(self, o: Self) -> Self;
    fn real(self) -> f64;
}

impl Coord for f64 {
    fn minus(self, o: f64) -> f64 {
        self - o
    }
    fn real(self) -> f64 {
        self
    }
}

impl Coord for i128 {
    fn minus(self, o: i128) -> i128 {
        self - o
    }
    fn real(self) -> f64 {
        self as f64
    }
}

/// Derivation over merged intervals in some unit; `scale` converts to ℝ.
fn derive<T: Coord>(iv: &[(T, T)], scale: f64) -> (f64, DerivationTree) {
    let n = iv.len();
    let at = |x: T| x.real() * scale;
    let root = (at(iv[0].0), at(iv[n - 1].1));
    let gaps: Vec<T> = iv.windows(2).map(|w| w[1].0.minus(w[0].1)).collect();
    if gaps.is_empty() {
        return (
            f64::INFINITY,
            DerivationTree {
                root,
                splits: Vec::new(),
            },
        );
    }
    // Cartesian tree of gaps: max at the root, leftmost on ties
    let g = gaps.len();
    let mut left = vec![usize::MAX; g];
    let mut right = vec![usize::MAX; g];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..g {
        let mut last = usize::MAX;
        while let Some(&top) = stack.last() {
            if gaps[top] < gaps[i] {
                last = stack.pop().unwrap();
            } else {
                break;
            }
        }
        left[i] = last;
        if let Some(&top) = stack.last() {
            right[top] = i;
        }
        stack.push(i);
    }
    let mut tau = f64::INFINITY;
    let mut splits = Vec::with_capacity(g);
    // (gap node, first interval, last interval) of the bridge it splits
    let mut work = vec![(stack[0], 0usize, n - 1)];
    while let Some((k, a, b)) = work.pop() {
        let l_len = iv[k].1.minus(iv[a].0);
        let r_len = iv[b].1.minus(iv[k + 1].0);
        let short = if l_len < r_len { l_len } else { r_len };
        let t = short.real() / gaps[k].real();
        tau = tau.min(t);
        splits.push(Split {
            bridge: (at(iv[a].0), at(iv[b].1)),
            gap: (at(iv[k].1), at(iv[k + 1].0)),
            left: (at(iv[a].0), at(iv[k].1)),
            right: (at(iv[k + 1].0), at(iv[b].1)),
            tau: t,
        });
        if right[k] != usize::MAX {
            work.push((right[k], k + 1, b));
        }
        if left[k] != usize::MAX {
            work.push((left[k], a, k));
        }
    }
    (tau, DerivationTree { root, splits })
}

fn report<T: Coord>(iv: &[(T, T)], scale: f64, resolution: Option<u32>) -> ThicknessReport {
    let (tau, derivation) = derive(iv, scale);
    let largest_gap = iv
        .windows(2)
        .map(|w| w[1].0.minus(w[0].1).real())
        .fold(0.0, f64::max)
        * scale;
    let smallest_bridge = iv
        .iter()
        .map(|&(a, b)| b.minus(a).real())
        .fold(f64::INFINITY, f64::min)
        * scale;
    ThicknessReport {
        tau,
        derivation,
        resolution,
        upper_bound_only: resolution.is_some(),
        largest_gap,
        smallest_bridge,
        exact: false,
    }
}

/// Thickness of a dyadic set read as the points k·2^-m. Runs of consecutive
/// indices are closed intervals [a, b]·2^-m, and one-cell spacings are not gaps.
/// An isolated cell is a bridge of length zero, so it gives τ = 0.
pub fn derive_thickness(set: &DyadicSet) -> Result<ThicknessReport> {
    if set.is_empty() {
        return Err(invalid("empty set"));
    }
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for &k in set.indices() {
        let k = k as f64;
        match runs.last_mut() {
            Some(last) if k == last.1 + 1.0 => last.1 = k,
            _ => runs.push((k, k)),
        }
    }
    Ok(report(&runs, set.cell_size(), Some(set.level())))
}

/// Thickness of a union of closed intervals. Gaps shorter than `floor` are
/// closed before deriving.
pub fn derive_thickness_intervals(intervals: &[(f64, f64)], floor: f64) -> Result<ThicknessReport> {
    if intervals.is_empty() {
        return Err(invalid("no intervals"));
    }
    if intervals
        .iter()
        .any(|&(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
    {
        return Err(invalid("intervals must be finite with lo ≤ hi"));
    }
    let iv = merge(intervals.to_vec(), floor);
    Ok(report(&iv, 1.0, None))
}

/// Thickness of the level-m construction intervals of a generated set, with
/// gaps below 2^-m closed. IFS specs with short rational parameters are handled
/// exactly; everything else goes through floating point.
pub fn spec_thickness(spec: &MeasureSpec, level: u32) -> Result<ThicknessReport> {
    spec.validate("spec")?;
    if let MeasureSpec::Ifs(s) = spec {
        if let Some((iv, den)) = exact::ifs_intervals(s, level) {
            // gap floor 2^-level in units of 1/den
            let floor = (den as f64 * (-(level as f64)).exp2()).ceil() as i128;
            let mut merged: Vec<(i128, i128)> = Vec::with_capacity(iv.len());
            for (a, b) in iv {
                match merged.last_mut() {
                    Some(last) if a - last.1 < floor => last.1 = last.1.max(b),
                    _ => merged.push((a, b)),
                }
            }
            let mut r = report(&merged, 1.0 / den as f64, Some(level));
            r.exact = true;
            return Ok(r);
        }
    }
    let iv = construction_intervals(spec, level)?;
    let mut r = derive_thickness_intervals(&iv, (-(level as f64)).exp2())?;
    r.resolution = Some(level);
    r.upper_bound_only = true;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::generate_set;

    #[test]
    fn middle_thirds_is_exactly_one() {
        for m in [12, 15, 18] {
            let r = spec_thickness(&MeasureSpec::middle_thirds(), m).unwrap();
            assert_eq!(r.tau, 1.0, "level {m}");
            assert!(r.exact);
        }
    }

    #[test]
    fn interval_and_isolated_point() {
        let full = DyadicSet::range(10, 0, 1024).unwrap();
        let r = derive_thickness(&full).unwrap();
        assert_eq!(r.tau, f64::INFINITY);
        assert!(serde_json::to_string(&r)
            .unwrap()
            .contains("\"tau\":\"inf\""));
        let iso = DyadicSet::new(10, (0..100).chain([300])).unwrap();
        assert_eq!(derive_thickness(&iso).unwrap().tau, 0.0);
    }

    #[test]
    fn hand_computed_derivation() {
        // [0,3] gap 2 [5,6] gap 4 [10,14]: root split at the gap of 4
        let r = derive_thickness_intervals(&[(0.0, 3.0), (5.0, 6.0), (10.0, 14.0)], 0.0).unwrap();
        assert_eq!(r.derivation.splits[0].gap, (6.0, 10.0));
        assert_eq!(r.derivation.splits[0].tau, 1.0);
        assert_eq!(r.derivation.splits[1].gap, (3.0, 5.0));
        assert_eq!(r.tau, 0.5);
        assert_eq!(r.derivation.splits.len(), 2);
    }

    #[test]
    fn ties_split_leftmost() {
        let r = derive_thickness_intervals(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)], 0.0).unwrap();
        assert_eq!(r.derivation.splits[0].gap, (1.0, 2.0));
    }

    #[test]
    fn grid_set_of_middle_thirds_is_positive() {
        // the points model sees the cells of C at level 16 as runs with
        // one-cell ends, which halves the bridge lengths near the gaps
        let s = generate_set(&MeasureSpec::middle_thirds(), 16).unwrap();
        let r = derive_thickness(&s).unwrap();
        assert!(r.tau > 0.0 && r.tau <= 1.0, "{}", r.tau);
        assert!(r.upper_bound_only);
    }

    #[test]
    fn tau_round_trips() {
        let r = derive_thickness(&DyadicSet::range(4, 0, 16).unwrap()).unwrap();
        let back: ThicknessReport =
            serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
