//! Uniform perfectness of measures and sets.

use serde::{Deserialize, Serialize};

use super::balls::{dyadic_radii, BallIndex};
use crate::error::{invalid, Error, Result};
use crate::measure::{DyadicMeasure, DyadicSet};

pub const DEFAULT_N_GRID: [f64; 11] = [
    3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 64.0, 128.0, 256.0,
];
pub const DEFAULT_GAMMA_GRID: [f64; 6] = [1.0, 0.75, 0.5, 0.25, 0.1, 0.05];
pub const DEFAULT_K_GRID: [f64; 10] = [1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0, 64.0, 128.0];

const REL_TOL: f64 = 1e-12;

/// A ball pair violating μ(B(x, Nr)) ≥ 2^γ μ(B(x, r)). Positions are in ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpWitness {
    pub center: f64,
    pub radius: f64,
    pub inner_mass: f64,
    pub outer_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpCheck {
    pub passed: bool,
    pub witness: Option<UpWitness>,
    /// Number of (center, radius) pairs evaluated.
    pub checked: u64,
}

fn check_params(mu: &DyadicMeasure, n: f64, gamma: f64) -> Result<()> {
    if mu.diameter() <= 0.0 {
        return Err(Error::DegenerateInput(
            "support has zero diameter; uniform perfectness is vacuous".into(),
        ));
    }
    if !(n > 1.0) || !n.is_finite() {
        return Err(invalid(format!("N must be > 1, got {n}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma must lie in (0,1], got {gamma}")));
    }
    if n * mu.cell_size() >= mu.diameter() {
        return Err(invalid(format!(
            "N·2^-m = {} is not below the diameter {}",
            n * mu.cell_size(),
            mu.diameter()
        )));
    }
    Ok(())
}

fn sweep(
    mu: &DyadicMeasure,
    n: f64,
    gamma: f64,
    centers: impl Iterator<Item = f64>,
    min_radius_exp: i32,
) -> UpCheck {
    let b = BallIndex::new(mu);
    let diam_cells = (mu.max_index() - mu.min_index()) as f64;
    let radii = dyadic_radii(min_radius_exp, diam_cells);
    let factor = gamma.exp2();
    let h = mu.cell_size();
    let mut checked = 0;
    for c in centers {
        for &r in &radii {
            if b.swallows(c, n * r) {
                break;
            }
            checked += 1;
            let inner = b.ball(c, r);
            let outer = b.ball(c, n * r);
            if outer < factor * inner * (1.0 - REL_TOL) {
                return UpCheck {
                    passed: false,
                    witness: Some(UpWitness {
                        center: c * h,
                        radius: r * h,
                        inner_mass: inner,
                        outer_mass: outer,
                    }),
                    checked,
                };
            }
        }
    }
    UpCheck {
        passed: true,
        witness: None,
        checked,
    }
}

/// Checks μ(B(x, Nr)) ≥ 2^γ μ(B(x, r)) for every support atom x and dyadic
/// r ∈ [2^-m, diam], skipping pairs where B(x, Nr) contains the support.
pub fn check_uniformly_perfect(mu: &DyadicMeasure, n: f64, gamma: f64) -> Result<UpCheck> {
    check_params(mu, n, gamma)?;
    Ok(sweep(
        mu,
        n,
        gamma,
        mu.indices().iter().map(|&k| k as f64),
        0,
    ))
}

/// As [`check_uniformly_perfect`] but with centers at every half-grid point from
/// one diameter left of the support to one diameter right of it, and radii from
/// half a cell.
pub fn check_uniformly_perfect_all_centers(
    mu: &DyadicMeasure,
    n: f64,
    gamma: f64,
) -> Result<UpCheck> {
    check_params(mu, n, gamma)?;
    let d = mu.max_index() - mu.min_index() + 1;
    let lo = 2 * (mu.min_index() - d);
    let hi = 2 * (mu.max_index() + d);
    Ok(sweep(mu, n, gamma, (lo..=hi).map(|c2| c2 as f64 / 2.0), -1))
}

/// Smallest N on the grid (ties: largest γ) passing the support-centered check.
/// Grid values with N·2^-m ≥ diam are skipped.
pub fn fit_uniform_perfectness(
    mu: &DyadicMeasure,
    n_grid: &[f64],
    gamma_grid: &[f64],
) -> Result<Option<(f64, f64)>> {
    if mu.diameter() <= 0.0 {
        return Err(Error::DegenerateInput("support has zero diameter".into()));
    }
    let mut ns = n_grid.to_vec();
    ns.sort_by(f64::total_cmp);
    let mut gs = gamma_grid.to_vec();
    gs.sort_by(|a, b| b.total_cmp(a));
    for &n in &ns {
        if n * mu.cell_size() >= mu.diameter() {
            continue;
        }
        for &g in &gs {
            if check_uniformly_perfect(mu, n, g)?.passed {
                return Ok(Some((n, g)));
            }
        }
    }
    Ok(None)
}

/// Violation of the set condition: no point of A in B(x, Kr) \ B(x, r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetUpWitness {
    pub center: f64,
    pub radius: f64,
}

/// Checks that x ∈ A and A ⊄ B(x, Kr) imply A ∩ (B(x, Kr) \ B(x, r)) ≠ ∅, for
/// support points x and dyadic r ∈ [2^-m, diam].
pub fn check_uniformly_perfect_set(set: &DyadicSet, k: f64) -> Result<Option<SetUpWitness>> {
    if set.diameter() <= 0.0 {
        return Err(Error::DegenerateInput("set has zero diameter".into()));
    }
    if !(k > 1.0) {
        return Err(invalid("K must be > 1"));
    }
    let idx = set.indices();
    let (lo, hi) = (idx[0] as f64, idx[idx.len() - 1] as f64);
    let radii = dyadic_radii(0, hi - lo);
    let count = |a: f64, b: f64| -> usize {
        let i0 = idx.partition_point(|&v| (v as f64) < a.ceil());
        let i1 = idx.partition_point(|&v| (v as f64) < b.ceil());
        i1.saturating_sub(i0)
    };
    for &x in idx {
        let x = x as f64;
        for &r in &radii {
            if lo >= x - k * r && hi < x + k * r {
                break;
            }
            let annulus = count(x - k * r, x - r) + count(x + r, x + k * r);
            if annulus == 0 {
                let h = set.cell_size();
                return Ok(Some(SetUpWitness {
                    center: x * h,
                    radius: r * h,
                }));
            }
        }
    }
    Ok(None)
}

/// Smallest K on the grid passing [`check_uniformly_perfect_set`].
pub fn fit_set_uniform_perfectness(set: &DyadicSet, k_grid: &[f64]) -> Result<Option<f64>> {
    let mut ks = k_grid.to_vec();
    ks.sort_by(f64::total_cmp);
    for k in ks {
        if check_uniformly_perfect_set(set, k)?.is_none() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(mu: &DyadicMeasure, n: f64, gamma: f64) -> bool {
        // direct summation over atoms, no prefix sums
        let ball = |c: f64, r: f64| -> f64 {
            mu.atoms()
                .filter(|&(k, _)| (k as f64) >= c - r && (k as f64) < c + r)
                .map(|a| a.1)
                .sum()
        };
        let (lo, hi) = (mu.min_index() as f64, mu.max_index() as f64);
        for &x in mu.indices() {
            let x = x as f64;
            let mut r = 1.0;
            while r <= hi - lo {
                if !(lo >= x - n * r && hi < x + n * r)
                    && ball(x, n * r) < gamma.exp2() * ball(x, r) * (1.0 - 1e-12)
                {
                    return false;
                }
                r *= 2.0;
            }
        }
        true
    }

    #[test]
    fn lebesgue_passes_n3_gamma1() {
        let mu = DyadicMeasure::uniform(10, 0, 1024).unwrap();
        assert!(check_uniformly_perfect(&mu, 3.0, 1.0).unwrap().passed);
        assert!(brute_force(&mu, 3.0, 1.0));
        assert_eq!(
            fit_uniform_perfectness(&mu, &DEFAULT_N_GRID, &DEFAULT_GAMMA_GRID).unwrap(),
            Some((3.0, 1.0))
        );
    }

    #[test]
    fn dirac_is_degenerate() {
        let d = DyadicMeasure::dirac(8, 3).unwrap();
        assert!(matches!(
            check_uniformly_perfect(&d, 3.0, 1.0),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            fit_uniform_perfectness(&d, &DEFAULT_N_GRID, &DEFAULT_GAMMA_GRID),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn isolated_atom_gives_witness() {
        let mut atoms: Vec<(i64, f64)> = (960..1024).map(|k| (k, 1.0)).collect();
        atoms.push((0, 1.0));
        let mu = DyadicMeasure::from_atoms(10, atoms).unwrap();
        let c = check_uniformly_perfect(&mu, 4.0, 0.5).unwrap();
        assert!(!c.passed);
        let w = c.witness.unwrap();
        assert_eq!(w.center, 0.0);
        assert_eq!(w.inner_mass, w.outer_mass);
        assert!(!brute_force(&mu, 4.0, 0.5));
    }

    #[test]
    fn two_atoms_fit_reports_none() {
        let mu = DyadicMeasure::from_atoms(4, [(0, 1.0), (16, 1.0)]).unwrap();
        assert_eq!(
            fit_uniform_perfectness(&mu, &DEFAULT_N_GRID, &DEFAULT_GAMMA_GRID).unwrap(),
            None
        );
    }

    #[test]
    fn parameter_checks() {
        let mu = DyadicMeasure::uniform(4, 0, 16).unwrap();
        assert!(check_uniformly_perfect(&mu, 1.0, 1.0).is_err());
        assert!(check_uniformly_perfect(&mu, 3.0, 0.0).is_err());
        assert!(check_uniformly_perfect(&mu, 3.0, 1.5).is_err());
        assert!(check_uniformly_perfect(&mu, 16.0, 1.0).is_err());
    }

    #[test]
    fn agrees_with_brute_force_on_small_instances() {
        let specs: Vec<Vec<(i64, f64)>> = vec![
            vec![
                (0, 1.0),
                (1, 2.0),
                (5, 1.0),
                (6, 3.0),
                (20, 1.0),
                (21, 1.0),
                (40, 0.5),
            ],
            (0..50)
                .filter(|k| k % 3 != 1)
                .map(|k| (k, 1.0 + (k % 5) as f64))
                .collect(),
            vec![
                (0, 1.0),
                (2, 1.0),
                (8, 1.0),
                (10, 1.0),
                (32, 1.0),
                (34, 1.0),
                (40, 1.0),
                (42, 1.0),
            ],
        ];
        for atoms in specs {
            let mu = DyadicMeasure::from_atoms(6, atoms).unwrap();
            for n in [3.0, 4.0, 8.0] {
                for g in [1.0, 0.5, 0.1] {
                    assert_eq!(
                        check_uniformly_perfect(&mu, n, g).unwrap().passed,
                        brute_force(&mu, n, g)
                    );
                }
            }
        }
    }

    #[test]
    fn set_condition() {
        let full = DyadicSet::range(6, 0, 64).unwrap();
        assert!(check_uniformly_perfect_set(&full, 2.0).unwrap().is_none());
        let gap = DyadicSet::new(6, [0].into_iter().chain(32..40)).unwrap();
        let w = check_uniformly_perfect_set(&gap, 3.0).unwrap().unwrap();
        assert_eq!(w.center, 0.0);
        assert_eq!(
            fit_set_uniform_perfectness(&full, &DEFAULT_K_GRID).unwrap(),
            Some(2.0)
        );
    }
}
