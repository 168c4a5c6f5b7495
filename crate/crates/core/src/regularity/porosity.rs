//! Dyadic porosity: every level-n cell meeting A contains an empty level-(n+k) subcell.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::DyadicSet;

/// A level-n cell all of whose level-(n+k) subcells meet the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PorosityWitness {
    pub level: u32,
    pub cell: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorosityCheck {
    pub passed: bool,
    pub witness: Option<PorosityWitness>,
}

/// Scans every level n from 0 to level − k.
pub fn check_dyadic_porosity(set: &DyadicSet, k: u32) -> Result<PorosityCheck> {
    let m = set.level();
    if k == 0 || k >= m {
        return Err(invalid(format!(
            "porosity needs 1 ≤ k < level, got k={k}, level={m}"
        )));
    }
    let full = 1u64 << k;
    for n in 0..=m - k {
        let parent_shift = m - n;
        let child_shift = m - n - k;
        let mut parent = None;
        let mut last_child = None;
        let mut children = 0u64;
        for &i in set.indices() {
            let p = i >> parent_shift;
            let c = i >> child_shift;
            if parent != Some(p) {
                parent = Some(p);
                children = 0;
                last_child = None;
            }
            if last_child != Some(c) {
                last_child = Some(c);
                children += 1;
                if children == full {
                    return Ok(PorosityCheck {
                        passed: false,
                        witness: Some(PorosityWitness { level: n, cell: p }),
                    });
                }
            }
        }
    }
    Ok(PorosityCheck {
        passed: true,
        witness: None,
    })
}

/// Smallest k in 1..level passing the check.
pub fn fit_porosity(set: &DyadicSet) -> Result<Option<u32>> {
    for k in 1..set.level() {
        if check_dyadic_porosity(set, k)?.passed {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_set, MeasureSpec};

    #[test]
    fn full_set_fails_every_k() {
        let s = DyadicSet::range(8, 0, 256).unwrap();
        for k in 1..8 {
            let c = check_dyadic_porosity(&s, k).unwrap();
            assert!(!c.passed);
            assert_eq!(c.witness.unwrap().level, 0);
        }
        assert_eq!(fit_porosity(&s).unwrap(), None);
    }

    #[test]
    fn middle_thirds_needs_k3() {
        // 1/4 and 3/4 lie in the Cantor set, so all four quarters of [0,1) meet it
        for m in [12, 18] {
            let s = generate_set(&MeasureSpec::middle_thirds(), m).unwrap();
            let c = check_dyadic_porosity(&s, 2).unwrap();
            assert_eq!(c.witness, Some(PorosityWitness { level: 0, cell: 0 }));
            assert!(check_dyadic_porosity(&s, 3).unwrap().passed);
        }
    }

    #[test]
    fn singleton_and_bad_k() {
        let s = DyadicSet::new(6, [17]).unwrap();
        assert!(check_dyadic_porosity(&s, 1).unwrap().passed);
        assert!(check_dyadic_porosity(&s, 0).is_err());
        assert!(check_dyadic_porosity(&s, 6).is_err());
    }

    #[test]
    fn negative_indices_group_correctly() {
        // cells -2, -1 fill the level-(m-1) cell [-2,0)
        let s = DyadicSet::new(4, [-2, -1, 4]).unwrap();
        let c = check_dyadic_porosity(&s, 1).unwrap();
        assert_eq!(c.witness, Some(PorosityWitness { level: 3, cell: -1 }));
    }
}
