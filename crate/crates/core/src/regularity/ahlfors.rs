//! Ahlfors regularity: C^{-1} r^α ≤ μ(B(x, r)) ≤ C r^α at support points.

use serde::{Deserialize, Serialize};

use super::balls::BallIndex;
use crate::error::{invalid, Error, Result};
use crate::measure::DyadicMeasure;

/// Radii at or below this many grid cells are not swept.
pub const K_CUTOFF: f64 = 16.0;

pub const ALPHA_GRID_STEP: f64 = 0.001;

const LOG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsWitness {
    pub center: f64,
    pub radius: f64,
    pub mass: f64,
    /// True if the upper bound C r^α failed, false for the lower bound.
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsCheck {
    pub passed: bool,
    pub witness: Option<AhlforsWitness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsFit {
    pub constant: f64,
    pub alpha: f64,
    /// Half the spread of log2 μ(B(x,r)) − α log2 r over the sweep.
    pub residual: f64,
}

/// Radii 2^j cells with 16 < 2^j and 2^j·2^-m < 1.
fn sweep_radii(mu: &DyadicMeasure) -> Result<Vec<i32>> {
    let m = mu.level() as i32;
    let js: Vec<i32> = (0..m).filter(|&j| (j as f64).exp2() > K_CUTOFF).collect();
    if js.is_empty() {
        return Err(invalid(format!(
            "level {m} leaves no radius in ({K_CUTOFF}·2^-m, 1)"
        )));
    }
    Ok(js)
}

/// Per radius exponent j (in cells): log2 r and the min and max of log2 ball mass.
fn extremes(mu: &DyadicMeasure) -> Result<Vec<(f64, f64, f64)>> {
    let js = sweep_radii(mu)?;
    let b = BallIndex::new(mu);
    let m = mu.level() as f64;
    Ok(js
        .into_iter()
        .map(|j| {
            let r = (j as f64).exp2();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &k in mu.indices() {
                let y = b.ball(k as f64, r).log2();
                lo = lo.min(y);
                hi = hi.max(y);
            }
            (j as f64 - m, lo, hi)
        })
        .collect())
}

pub fn check_ahlfors(mu: &DyadicMeasure, constant: f64, alpha: f64) -> Result<AhlforsCheck> {
    if !(constant >= 1.0) || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!(
            "need C ≥ 1 and α ∈ (0,1], got C={constant}, α={alpha}"
        )));
    }
    let js = sweep_radii(mu)?;
    let b = BallIndex::new(mu);
    let m = mu.level() as f64;
    let h = mu.cell_size();
    let log_c = constant.log2();
    for j in js {
        let r = (j as f64).exp2();
        let log_r = j as f64 - m;
        for &k in mu.indices() {
            let mass = b.ball(k as f64, r);
            let dev = mass.log2() - alpha * log_r;
            if dev.abs() > log_c + LOG_TOL {
                return Ok(AhlforsCheck {
                    passed: false,
                    witness: Some(AhlforsWitness {
                        center: k as f64 * h,
                        radius: r * h,
                        mass,
                        upper: dev > 0.0,
                    }),
                });
            }
        }
    }
    Ok(AhlforsCheck {
        passed: true,
        witness: None,
    })
}

/// α on a 0.001 grid minimizing the spread of log2 μ(B(x,r)) − α log2 r; C is
/// the smallest constant that makes the check pass at that α.
pub fn fit_ahlfors(mu: &DyadicMeasure) -> Result<AhlforsFit> {
    if mu.diameter() <= 0.0 {
        return Err(Error::DegenerateInput("support has zero diameter".into()));
    }
    let ext = extremes(mu)?;
    let bounds = |alpha: f64| {
        let hi = ext
            .iter()
            .map(|&(x, _, y)| y - alpha * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = ext
            .iter()
            .map(|&(x, y, _)| y - alpha * x)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    };
    let steps = (1.0 / ALPHA_GRID_STEP).round() as usize;
    let mut best = (f64::INFINITY, 1.0);
    for i in 1..=steps {
        let alpha = i as f64 * ALPHA_GRID_STEP;
        let (lo, hi) = bounds(alpha);
        if hi - lo < best.0 {
            best = (hi - lo, alpha);
        }
    }
    let alpha = best.1;
    let (lo, hi) = bounds(alpha);
    Ok(AhlforsFit {
        constant: hi.max(-lo).max(0.0).exp2(),
        alpha,
        residual: (hi - lo) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, MeasureSpec};

    #[test]
    fn lebesgue_fit() {
        let mu = DyadicMeasure::uniform(14, 0, 1 << 14).unwrap();
        let f = fit_ahlfors(&mu).unwrap();
        assert_eq!(f.alpha, 1.0);
        assert!(f.constant <= 2.0 + 1e-9, "{f:?}");
        assert!(check_ahlfors(&mu, 2.0, 1.0).unwrap().passed);
        assert!(!check_ahlfors(&mu, 1.5, 1.0).unwrap().passed);
    }

    #[test]
    fn quarter_cantor_fit() {
        let mu = generate(&MeasureSpec::central_cantor(0.25), 22).unwrap();
        let f = fit_ahlfors(&mu).unwrap();
        assert!((f.alpha - 0.5).abs() < 0.03, "{f:?}");
        assert!(
            check_ahlfors(&mu, f.constant * (1.0 + 1e-12), f.alpha)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let mu = DyadicMeasure::uniform(4, 0, 16).unwrap();
        assert!(check_ahlfors(&mu, 2.0, 1.0).is_err());
        assert!(fit_ahlfors(&mu).is_err());
    }

    #[test]
    fn witness_reports_side() {
        let mu = DyadicMeasure::uniform(12, 0, 4096).unwrap();
        let w = check_ahlfors(&mu, 1.0, 0.5).unwrap().witness.unwrap();
        assert!(!w.upper);
    }
}
