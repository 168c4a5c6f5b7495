//! Branching structure of dyadic sets: (D, ℓ, R_s)-uniformity, greedy
//! uniformization, saturation and the scale set 𝒮.
//!
//! A set at level m = D·ℓ is (D, ℓ, R_s)-uniform when every level-sD cell meeting
//! it has exactly R_s level-(s+1)D subcells meeting it, for s = 0..ℓ.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{check_q, DyadicMeasure, DyadicSet};

/// What uniformization tries to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Number of leaves.
    Count,
    /// Σ μ(leaf)^q.
    LqNorm { q: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformTree {
    pub d: u32,
    pub ell: u32,
    /// Number of level-0 cells meeting the leaves.
    pub roots: u64,
    /// R_s for s = 0..ℓ.
    pub branching: Vec<u64>,
    pub leaves: DyadicSet,
}

impl UniformTree {
    pub fn level(&self) -> u32 {
        self.d * self.ell
    }

    /// roots · Π R_s.
    pub fn leaf_count(&self) -> u64 {
        self.branching.iter().product::<u64>() * self.roots
    }
}

fn check_shape(level: u32, d: u32, ell: u32) -> Result<()> {
    if d == 0 || ell == 0 {
        return Err(invalid("D and ell must be at least 1"));
    }
    if d > 62 {
        return Err(invalid(format!("D = {d} is too large")));
    }
    if d.checked_mul(ell) != Some(level) {
        return Err(invalid(format!("level {level} is not D·ell = {d}·{ell}")));
    }
    Ok(())
}

/// Children counts per level-sD cell, in cell order, for s = 0..ℓ.
fn profile_of(idx: &[i64], m: u32, d: u32, ell: u32) -> Vec<Vec<u64>> {
    (0..ell)
        .map(|s| {
            let (ps, cs) = (m - s * d, m - (s + 1) * d);
            let mut out = Vec::new();
            let mut prev: Option<(i64, i64)> = None;
            for &k in idx {
                let (p, c) = (k >> ps, k >> cs);
                match prev {
                    Some((pp, pc)) if pp == p => {
                        if pc != c {
                            *out.last_mut().unwrap() += 1;
                        }
                    }
                    _ => out.push(1),
                }
                prev = Some((p, c));
            }
            out
        })
        .collect()
}

/// For each s, the number of level-(s+1)D subcells meeting the set inside each
/// level-sD cell meeting it, listed left to right.
pub fn branching_profile(set: &DyadicSet, d: u32, ell: u32) -> Result<Vec<Vec<u64>>> {
    check_shape(set.level(), d, ell)?;
    Ok(profile_of(set.indices(), set.level(), d, ell))
}

/// The branching sequence if every level has a single child count.
pub fn is_uniform(set: &DyadicSet, d: u32, ell: u32) -> Result<Option<Vec<u64>>> {
    let profile = branching_profile(set, d, ell)?;
    let mut r = Vec::with_capacity(profile.len());
    for counts in profile {
        match counts.first() {
            Some(&c) if counts.iter().all(|&x| x == c) => r.push(c),
            Some(_) => return Ok(None),
            None => return Ok(None),
        }
    }
    Ok(Some(r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Uniformized {
    pub tree: UniformTree,
    /// μ restricted to the leaves, renormalized.
    pub measure: DyadicMeasure,
    /// Kept leaves over support size.
    pub leaf_retention: f64,
    /// Kept objective weight over the input's total weight.
    pub weight_retention: f64,
    /// μ mass on the kept leaves.
    pub mass_retained: f64,
}

/// Greedy fine-to-coarse uniformization.
///
/// At each level, starting from s = ℓ − 1, the level-sD cells are bucketed by
/// ⌊log2 R⌋ and the class with the most objective weight is kept. Every kept cell
/// is trimmed to the smallest child count r* in its class (r* ≥ 2^j), keeping its
/// heaviest children with ties to the left. Finer levels are already uniform when
/// a level is processed, and dropping whole subtrees keeps them so. Each level
/// keeps at least 1/(2(D+1)) of the current weight, so the result keeps at least
/// (2(D+1))^{−ℓ} of the input weight.
pub fn uniformize(
    mu: &DyadicMeasure,
    d: u32,
    ell: u32,
    objective: Objective,
) -> Result<Uniformized> {
    let m = mu.level();
    check_shape(m, d, ell)?;
    if mu.is_empty() {
        return Err(invalid("measure has no atoms"));
    }
    let weight_of = |w: f64| -> f64 {
        match objective {
            Objective::Count => 1.0,
            Objective::LqNorm { q } => w.powf(q),
        }
    };
    if let Objective::LqNorm { q } = objective {
        check_q(q)?;
    }
    let mut keep: Vec<usize> = (0..mu.len()).collect();
    let idx = mu.indices();
    let wts: Vec<f64> = mu.masses().iter().map(|&w| weight_of(w)).collect();
    let total_weight: f64 = wts.iter().sum();
    let mut branching = Vec::with_capacity(ell as usize);

    for s in (0..ell).rev() {
        let (ps, cs) = (m - s * d, m - (s + 1) * d);
        // parent groups: (start, end) into keep; children: (start, end, weight)
        let mut parents: Vec<(usize, usize, Vec<(usize, usize, f64)>)> = Vec::new();
        let mut a = 0;
        while a < keep.len() {
            let p = idx[keep[a]] >> ps;
            let mut b = a;
            let mut kids = Vec::new();
            while b < keep.len() && idx[keep[b]] >> ps == p {
                let c = idx[keep[b]] >> cs;
                let start = b;
                let mut w = 0.0;
                while b < keep.len() && idx[keep[b]] >> cs == c {
                    w += wts[keep[b]];
                    b += 1;
                }
                kids.push((start, b, w));
            }
            parents.push((a, b, kids));
            a = b;
        }
        let class_of = |r: usize| (usize::BITS - 1 - r.leading_zeros()) as usize;
        let mut class_weight = vec![0.0f64; d as usize + 1];
        for (_, _, kids) in &parents {
            class_weight[class_of(kids.len())] += kids.iter().map(|k| k.2).sum::<f64>();
        }
        // heaviest class, ties to the larger branching
        let mut best = 0;
        for j in 0..class_weight.len() {
            if class_weight[j] >= class_weight[best] {
                best = j;
            }
        }
        let r_star = parents
            .iter()
            .map(|p| p.2.len())
            .filter(|&r| class_of(r) == best)
            .min()
            .expect("chosen class is nonempty");
        let mut next = Vec::with_capacity(keep.len());
        for (_, _, kids) in &parents {
            if class_of(kids.len()) != best {
                continue;
            }
            let mut order: Vec<usize> = (0..kids.len()).collect();
            order.sort_by(|&x, &y| kids[y].2.total_cmp(&kids[x].2).then(x.cmp(&y)));
            let mut chosen: Vec<usize> = order[..r_star].to_vec();
            chosen.sort_unstable();
            for c in chosen {
                next.extend_from_slice(&keep[kids[c].0..kids[c].1]);
            }
        }
        keep = next;
        branching.push(r_star as u64);
    }
    branching.reverse();

    let leaves = DyadicSet::new(m, keep.iter().map(|&i| idx[i]))?;
    let mut roots = 0u64;
    let mut last = None;
    for &k in leaves.indices() {
        if last != Some(k >> m) {
            roots += 1;
            last = Some(k >> m);
        }
    }
    let kept_weight: f64 = keep.iter().map(|&i| wts[i]).sum();
    let mass_retained: f64 = keep.iter().map(|&i| mu.masses()[i]).sum();
    let measure = DyadicMeasure::from_atoms(m, keep.iter().map(|&i| (idx[i], mu.masses()[i])))?;
    Ok(Uniformized {
        leaf_retention: keep.len() as f64 / mu.len() as f64,
        weight_retention: kept_weight / total_weight,
        mass_retained,
        measure,
        tree: UniformTree {
            d,
            ell,
            roots,
            branching,
            leaves,
        },
    })
}

/// (2(D+1))^{−ℓ}.
pub fn retention_bound(d: u32, ell: u32) -> f64 {
    (2.0 * (d as f64 + 1.0)).powi(-(ell as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationLevel {
    pub s: u32,
    pub passed: bool,
    /// Points outside the middle half of their level-sD cell.
    pub failures: u64,
}

/// For s = 0..ℓ, whether every point (leaf cell midpoint) lies in the closed
/// middle half [a + L/4, a + 3L/4] of its level-sD cell [a, a + L).
pub fn saturation_check(set: &DyadicSet, d: u32, ell: u32) -> Result<Vec<SaturationLevel>> {
    let m = set.level();
    check_shape(m, d, ell)?;
    Ok((0..ell)
        .map(|s| {
            let shift = m - s * d;
            // doubled coordinates keep midpoints and quarter points integral
            let len2 = 1i128 << (shift + 1);
            let failures = set
                .indices()
                .iter()
                .filter(|&&k| {
                    let a2 = ((k >> shift) as i128) << (shift + 1);
                    let x2 = 2 * k as i128 + 1;
                    !(4 * (x2 - a2) >= len2 && 4 * (x2 - a2) <= 3 * len2)
                })
                .count() as u64;
            SaturationLevel {
                s,
                passed: failures == 0,
                failures,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    pub delta: f64,
    /// 𝒮 = {s : R_s ≥ 2^{(1−δ)D}}.
    pub scales: Vec<u32>,
    /// D·|𝒮|.
    pub d_size: f64,
}

/// Both sides of log2 ‖ν‖_q^{−q′} − mδ ≤ D|𝒮| ≤ log2 ‖μ‖_q^{−q′} + mδ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBracket {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn branching_scale_set(tree: &UniformTree, delta: f64) -> Result<ScaleSet> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    let threshold = ((1.0 - delta) * tree.d as f64).exp2();
    let scales: Vec<u32> = tree
        .branching
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r as f64 >= threshold)
        .map(|(s, _)| s as u32)
        .collect();
    Ok(ScaleSet {
        delta,
        d_size: (tree.d as usize * scales.len()) as f64,
        scales,
    })
}

impl ScaleSet {
    /// `lq_mu` and `lq_nu` are log2 ‖·‖_q^q at level m.
    pub fn bracket(&self, lq_mu: f64, lq_nu: f64, q: f64, m: u32) -> Result<ScaleBracket> {
        check_q(q)?;
        let slack = m as f64 * self.delta;
        let lower = -lq_nu / (q - 1.0) - slack;
        let upper = -lq_mu / (q - 1.0) + slack;
        Ok(ScaleBracket {
            lower,
            middle: self.d_size,
            upper,
            holds: lower <= self.d_size && self.d_size <= upper,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, generate_set, MeasureSpec};

    /// Best weight over all uniform subsets, by recursion over every branching
    /// sequence.
    pub(crate) fn oracle_best(idx: &[i64], wts: &[f64], m: u32, d: u32, ell: u32) -> f64 {
        fn best(idx: &[i64], wts: &[f64], m: u32, d: u32, s: u32, seq: &[u64]) -> f64 {
            if s as usize == seq.len() {
                return wts.iter().sum();
            }
            let cs = m - (s + 1) * d;
            let mut vals = Vec::new();
            let mut a = 0;
            while a < idx.len() {
                let c = idx[a] >> cs;
                let mut b = a;
                while b < idx.len() && idx[b] >> cs == c {
                    b += 1;
                }
                vals.push(best(&idx[a..b], &wts[a..b], m, d, s + 1, seq));
                a = b;
            }
            let r = seq[s as usize] as usize;
            if vals.len() < r {
                return f64::NEG_INFINITY;
            }
            vals.sort_by(|x, y| y.total_cmp(x));
            vals[..r].iter().sum()
        }
        let mut top = f64::NEG_INFINITY;
        let choices = 1u64 << d;
        let count = choices.pow(ell);
        for code in 0..count {
            let seq: Vec<u64> = (0..ell)
                .map(|s| (code / choices.pow(s)) % choices + 1)
                .collect();
            let mut total = 0.0;
            let mut a = 0;
            while a < idx.len() {
                let root = idx[a] >> m;
                let mut b = a;
                while b < idx.len() && idx[b] >> m == root {
                    b += 1;
                }
                total += best(&idx[a..b], &wts[a..b], m, d, 0, &seq);
                a = b;
            }
            top = top.max(total);
        }
        top
    }

    #[test]
    fn profile_of_full_grid_and_singleton() {
        let full = DyadicSet::range(6, 0, 64).unwrap();
        assert_eq!(is_uniform(&full, 2, 3).unwrap(), Some(vec![4, 4, 4]));
        let one = DyadicSet::new(6, [37]).unwrap();
        assert_eq!(is_uniform(&one, 3, 2).unwrap(), Some(vec![1, 1]));
        assert!(branching_profile(&full, 4, 2).is_err());
    }

    #[test]
    fn middle_thirds_profile_matches_enumeration() {
        let set = generate_set(&MeasureSpec::middle_thirds(), 12).unwrap();
        let p = branching_profile(&set, 3, 4).unwrap();
        for s in 0..4u32 {
            let (ps, cs) = (12 - 3 * s, 12 - 3 * (s + 1));
            let mut parents: Vec<i64> = set.indices().iter().map(|k| k >> ps).collect();
            parents.dedup();
            let expect: Vec<u64> = parents
                .iter()
                .map(|&j| {
                    let mut kids: Vec<i64> = set
                        .indices()
                        .iter()
                        .filter(|&&k| k >> ps == j)
                        .map(|k| k >> cs)
                        .collect();
                    kids.dedup();
                    kids.len() as u64
                })
                .collect();
            assert_eq!(p[s as usize], expect);
            let mut next: Vec<i64> = set.indices().iter().map(|k| k >> cs).collect();
            next.dedup();
            assert_eq!(p[s as usize].iter().sum::<u64>(), next.len() as u64);
        }
    }

    #[test]
    fn uniform_input_is_a_fixed_point() {
        let set = DyadicSet::new(6, [0, 1, 4, 5, 32, 33, 36, 37]).unwrap();
        assert!(is_uniform(&set, 2, 3).unwrap().is_some());
        let mu = DyadicMeasure::uniform_on(&set).unwrap();
        let u = uniformize(&mu, 2, 3, Objective::Count).unwrap();
        assert_eq!(u.tree.leaves, set);
        assert_eq!(u.leaf_retention, 1.0);
    }

    #[test]
    fn full_grid_minus_one_point() {
        let set = DyadicSet::new(6, (0..64).filter(|&k| k != 13)).unwrap();
        let mu = DyadicMeasure::uniform_on(&set).unwrap();
        let u = uniformize(&mu, 2, 3, Objective::Count).unwrap();
        assert_eq!(
            is_uniform(&u.tree.leaves, 2, 3).unwrap(),
            Some(u.tree.branching.clone())
        );
        assert_eq!(u.tree.leaf_count(), u.tree.leaves.len() as u64);
        let kept = u.tree.leaves.len() as f64;
        let ones = vec![1.0; set.len()];
        let best = oracle_best(set.indices(), &ones, 6, 2, 3);
        assert!(kept <= best);
        assert!(kept >= retention_bound(2, 3) * 63.0);
    }

    #[test]
    fn middle_thirds_uniformizes() {
        let mu = generate(&MeasureSpec::middle_thirds(), 12).unwrap();
        for obj in [Objective::Count, Objective::LqNorm { q: 2.0 }] {
            let u = uniformize(&mu, 3, 4, obj).unwrap();
            assert!(is_uniform(&u.tree.leaves, 3, 4).unwrap().is_some());
            assert!(u.weight_retention >= retention_bound(3, 4));
        }
    }

    #[test]
    fn saturation() {
        // D=2, ell=2: cells 5, 6, 9, 10 sit in the middle half at both levels
        let good = DyadicSet::new(4, [5, 6, 9, 10]).unwrap();
        assert!(saturation_check(&good, 2, 2)
            .unwrap()
            .iter()
            .all(|l| l.passed));
        let edge = DyadicSet::new(4, [4]).unwrap();
        let r = saturation_check(&edge, 2, 2).unwrap();
        assert!(r[0].passed && !r[1].passed);
        for shift in [-3i64, -1, 1, 2, 7] {
            let t = good.translate(shift);
            let r = saturation_check(&t, 2, 2).unwrap();
            for s in 0..2u32 {
                let cell = 1i64 << (4 - 2 * s);
                let brute = t.indices().iter().all(|&k| {
                    let rel = (k.rem_euclid(cell)) as f64 + 0.5;
                    rel >= cell as f64 / 4.0 && rel <= 3.0 * cell as f64 / 4.0
                });
                assert_eq!(r[s as usize].passed, brute, "shift {shift} s {s}");
            }
        }
    }

    #[test]
    fn scale_sets() {
        let full = UniformTree {
            d: 3,
            ell: 4,
            roots: 1,
            branching: vec![8; 4],
            leaves: DyadicSet::range(12, 0, 4096).unwrap(),
        };
        assert_eq!(
            branching_scale_set(&full, 0.1).unwrap().scales,
            vec![0, 1, 2, 3]
        );
        let thin = UniformTree {
            branching: vec![1; 4],
            leaves: DyadicSet::new(12, [0]).unwrap(),
            ..full.clone()
        };
        assert!(branching_scale_set(&thin, 0.1).unwrap().scales.is_empty());
        let b = branching_scale_set(&full, 0.1)
            .unwrap()
            .bracket(-12.0, -12.0, 2.0, 12)
            .unwrap();
        assert_eq!(b.middle, 12.0);
        assert!(b.holds);
        assert!(branching_scale_set(&full, 1.0).is_err());
    }
}
