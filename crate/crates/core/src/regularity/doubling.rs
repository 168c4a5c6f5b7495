//! Doubling at support points: μ(B(x, 2r)) ≤ C μ(B(x, r)).

use serde::{Deserialize, Serialize};

use super::balls::{dyadic_radii, BallIndex};
use crate::error::{invalid, Result};
use crate::measure::DyadicMeasure;

const REL_TOL: f64 = 1e-12;

/// Radii below this many grid cells are not swept. At one or two cells the ratio
/// is dominated by light atoms that catch only the edge of a construction piece.
pub const DOUBLING_CUTOFF: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingWitness {
    pub center: f64,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub passed: bool,
    pub witness: Option<DoublingWitness>,
}

/// Largest μ(B(x,2r))/μ(B(x,r)) over support atoms x and dyadic r from
/// `min_cells` grid cells up to the diameter, with its witness.
pub fn doubling_ratio(mu: &DyadicMeasure, min_cells: f64) -> Option<DoublingWitness> {
    let b = BallIndex::new(mu);
    let diam = (mu.max_index() - mu.min_index()) as f64;
    let j0 = min_cells.max(1.0).log2().ceil() as i32;
    let radii = dyadic_radii(j0, diam.max(1.0));
    let h = mu.cell_size();
    let mut worst: Option<DoublingWitness> = None;
    for &k in mu.indices() {
        let x = k as f64;
        for &r in &radii {
            let ratio = b.ball(x, 2.0 * r) / b.ball(x, r);
            if worst.map_or(true, |w| ratio > w.ratio) {
                worst = Some(DoublingWitness {
                    center: x * h,
                    radius: r * h,
                    ratio,
                });
            }
            if b.swallows(x, r) {
                break;
            }
        }
    }
    worst
}

/// Sweeps support atoms and dyadic radii from [`DOUBLING_CUTOFF`] cells to the
/// diameter.
pub fn check_doubling(mu: &DyadicMeasure, constant: f64) -> Result<DoublingCheck> {
    check_doubling_from(mu, constant, DOUBLING_CUTOFF)
}

/// As [`check_doubling`] with radii starting at `min_cells` grid cells.
pub fn check_doubling_from(
    mu: &DyadicMeasure,
    constant: f64,
    min_cells: f64,
) -> Result<DoublingCheck> {
    if !(constant >= 1.0) {
        return Err(invalid(format!(
            "doubling constant must be ≥ 1, got {constant}"
        )));
    }
    match doubling_ratio(mu, min_cells) {
        Some(w) if w.ratio > constant * (1.0 + REL_TOL) => Ok(DoublingCheck {
            passed: false,
            witness: Some(w),
        }),
        _ => Ok(DoublingCheck {
            passed: true,
            witness: None,
        }),
    }
}

/// The smallest constant passing [`check_doubling`], i.e. the largest swept ratio.
pub fn doubling_constant(mu: &DyadicMeasure) -> f64 {
    doubling_ratio(mu, DOUBLING_CUTOFF).map_or(1.0, |w| w.ratio.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, MeasureSpec};

    #[test]
    fn lebesgue_is_2_doubling() {
        let mu = DyadicMeasure::uniform(12, 0, 4096).unwrap();
        assert!(check_doubling(&mu, 2.0).unwrap().passed);
        assert!((doubling_constant(&mu) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn middle_thirds_is_4_doubling() {
        let mu = generate(&MeasureSpec::middle_thirds(), 16).unwrap();
        let c = doubling_constant(&mu);
        assert!(c <= 4.0 + 1e-9, "{c}");
        assert!(check_doubling(&mu, 4.0).unwrap().passed);
    }

    #[test]
    fn lopsided_clusters_fail() {
        let mut atoms: Vec<(i64, f64)> = (0..16).map(|k| (k, 1.0)).collect();
        atoms.extend((16..32).map(|k| (k, 100.0)));
        let mu = DyadicMeasure::from_atoms(8, atoms).unwrap();
        let c = check_doubling(&mu, 2.0).unwrap();
        assert!(!c.passed);
        assert!(c.witness.unwrap().ratio > 2.0);
    }

    #[test]
    fn cutoff_hides_edge_atoms() {
        let mu = generate(&MeasureSpec::middle_thirds(), 14).unwrap();
        assert!(!check_doubling_from(&mu, 4.0, 1.0).unwrap().passed);
    }
}
