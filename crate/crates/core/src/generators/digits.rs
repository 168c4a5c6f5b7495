//! Measures defined by forcing binary digits to zero.
//!
//! Digit d is the coefficient of 2^-d. The measure at level m is uniform over all
//! points whose forced digits up to m vanish.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::DyadicMeasure;

/// Largest number of free digits materialized (2^26 atoms).
pub const MAX_FREE_DIGITS: u32 = 26;

/// Block start sequence n_1 < n_2 < ⋯ for E = ∪_j [n_j, 2 n_j].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sequence", rename_all = "snake_case")]
pub enum BlockRule {
    /// n_j = j!
    Factorial,
    /// n_j = base^(j(j-1)/2): 1, base, base^3, base^6, …
    Tower {
        base: u64,
    },
    Explicit {
        values: Vec<u64>,
    },
}

impl BlockRule {
    /// n_j for j ≥ 1, saturating at `u64::MAX`; `None` past the end of an explicit list.
    pub fn value(&self, j: u32) -> Option<u64> {
        match self {
            BlockRule::Factorial => Some(
                (1..=j as u64)
                    .try_fold(1u64, |a, b| a.checked_mul(b))
                    .unwrap_or(u64::MAX),
            ),
            BlockRule::Tower { base } => {
                let e = (j as u64) * (j as u64 - 1) / 2;
                let e = u32::try_from(e).unwrap_or(u32::MAX);
                Some(base.checked_pow(e).unwrap_or(u64::MAX))
            }
            BlockRule::Explicit { values } => values.get(j as usize - 1).copied(),
        }
    }

    /// The starts n_j that are ≤ `limit`.
    pub fn starts_up_to(&self, limit: u64) -> Result<Vec<u64>> {
        let mut out: Vec<u64> = Vec::new();
        for j in 1.. {
            let Some(n) = self.value(j) else { break };
            if let Some(&prev) = out.last() {
                if n <= prev {
                    return Err(invalid(format!(
                        "block starts not strictly increasing: n_{j} = {n} ≤ {prev}"
                    )));
                }
            }
            if n > limit {
                break;
            }
            out.push(n);
        }
        Ok(out)
    }
}

/// The set E of forced-zero digit positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DigitSet {
    /// No forced digits (Lebesgue).
    Empty,
    /// Every digit forced (Dirac at 0).
    All,
    Digits {
        digits: Vec<u32>,
    },
    /// E = ∪_j [n_j, 2 n_j].
    Blocks {
        blocks: BlockRule,
    },
}

impl DigitSet {
    /// Membership flags for digits 1..=m (index 0 unused).
    pub fn forced_up_to(&self, m: u32) -> Result<Vec<bool>> {
        let mut forced = vec![false; m as usize + 1];
        match self {
            DigitSet::Empty => {}
            DigitSet::All => forced.iter_mut().for_each(|f| *f = true),
            DigitSet::Digits { digits } => {
                for &d in digits {
                    if d >= 1 && d <= m {
                        forced[d as usize] = true;
                    }
                }
            }
            DigitSet::Blocks { blocks } => {
                for n in blocks.starts_up_to(m as u64)? {
                    let end = (2 * n).min(m as u64);
                    for d in n..=end {
                        forced[d as usize] = true;
                    }
                }
            }
        }
        Ok(forced)
    }

    /// Free digit positions in 1..=m.
    pub fn free_digits(&self, m: u32) -> Result<Vec<u32>> {
        let forced = self.forced_up_to(m)?;
        Ok((1..=m).filter(|&d| !forced[d as usize]).collect())
    }

    /// f(m): number of free digits ≤ m.
    pub fn free_count(&self, m: u32) -> Result<u32> {
        Ok(self.free_digits(m)?.len() as u32)
    }
}

/// Uniform measure on the 2^f(m) level-m points with the free digits of `set`.
pub fn generate_digit_pattern(set: &DigitSet, level: u32) -> Result<DyadicMeasure> {
    let free = set.free_digits(level)?;
    if free.len() as u32 > MAX_FREE_DIGITS {
        return Err(Error::ResourceLimit(format!(
            "{} free digits at level {level} exceed the cap of {MAX_FREE_DIGITS}",
            free.len()
        )));
    }
    let weights: Vec<i64> = free.iter().map(|&d| 1i64 << (level - d)).collect();
    let n = 1usize << free.len();
    let mut idx = Vec::with_capacity(n);
    for bits in 0..n {
        let mut k = 0i64;
        for (b, w) in weights.iter().enumerate() {
            if bits >> b & 1 == 1 {
                k += w;
            }
        }
        idx.push(k);
    }
    idx.sort_unstable();
    DyadicMeasure::from_sorted(level, idx, vec![1.0 / n as f64; n])
}

/// The block counterexample for an arbitrary strictly increasing rule j ↦ n_j.
pub fn generate_digit_blocks(block_rule: impl Fn(u32) -> u64, level: u32) -> Result<DyadicMeasure> {
    let mut values = Vec::new();
    for j in 1.. {
        let n = block_rule(j);
        if let Some(&prev) = values.last() {
            if n <= prev {
                return Err(invalid("block rule must be strictly increasing"));
            }
        }
        values.push(n);
        if n > level as u64 {
            break;
        }
    }
    let set = DigitSet::Blocks {
        blocks: BlockRule::Explicit { values },
    };
    generate_digit_pattern(&set, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial() -> DigitSet {
        DigitSet::Blocks {
            blocks: BlockRule::Factorial,
        }
    }

    #[test]
    fn block_values() {
        assert_eq!(BlockRule::Factorial.value(4), Some(24));
        let t = BlockRule::Tower { base: 16 };
        assert_eq!(
            (1..=3).map(|j| t.value(j).unwrap()).collect::<Vec<_>>(),
            vec![1, 16, 4096]
        );
        assert_eq!(t.value(30), Some(u64::MAX));
        assert_eq!(
            BlockRule::Factorial.starts_up_to(30).unwrap(),
            vec![1, 2, 6, 24]
        );
        let bad = BlockRule::Explicit { values: vec![3, 3] };
        assert!(bad.starts_up_to(10).is_err());
    }

    #[test]
    fn factorial_blocks_at_twelve() {
        // E ∩ [1,12] = [1,2] ∪ [2,4] ∪ [6,12]: digits 1,2,3,4,6,…,12 forced, 5 free.
        let set = factorial();
        assert_eq!(set.free_digits(12).unwrap(), vec![5]);
        let mu = generate_digit_pattern(&set, 12).unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.indices(), &[0, 1 << 7]);
    }

    #[test]
    fn empty_and_full_patterns() {
        let leb = generate_digit_pattern(&DigitSet::Empty, 8).unwrap();
        assert_eq!(leb.len(), 256);
        let d = generate_digit_pattern(&DigitSet::All, 8).unwrap();
        assert_eq!(d.indices(), &[0]);
        let explicit = DigitSet::Digits { digits: vec![1, 3] };
        let mu = generate_digit_pattern(&explicit, 3).unwrap();
        assert_eq!(mu.indices(), &[0, 2]);
    }

    #[test]
    fn below_first_block_is_uniform() {
        let mu = generate_digit_blocks(|j| 10 * j as u64, 6).unwrap();
        assert_eq!(mu.len(), 64);
    }

    #[test]
    fn closure_rule_matches_enum() {
        let f = |j: u32| (1..=j as u64).product::<u64>();
        let a = generate_digit_blocks(f, 20).unwrap();
        let b = generate_digit_pattern(&factorial(), 20).unwrap();
        assert_eq!(a, b);
        assert!(generate_digit_blocks(|_| 5, 20).is_err());
    }

    #[test]
    fn resource_cap() {
        assert!(matches!(
            generate_digit_pattern(&DigitSet::Empty, 30),
            Err(Error::ResourceLimit(_))
        ));
    }
}
