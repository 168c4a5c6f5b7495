//! Conversions between uniform perfectness, lower dimension and thickness, and
//! Astels' sum criterion.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn check_k(k: f64) -> Result<()> {
    if !(k > 1.0) || !k.is_finite() {
        return Err(invalid(format!("K must be a finite number > 1, got {k}")));
    }
    Ok(())
}

/// Lower-dimension bound (log2(2K) + 1)^{-1} for a K-uniformly perfect set.
pub fn up_to_lowerdim(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(1.0 / ((2.0 * k).log2() + 1.0))
}

/// Uniform perfectness constant K = (2/c_t)^{1/t} from lower dimension t with
/// constant c_t.
pub fn lowerdim_to_up(t: f64, c_t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid(format!("t must lie in (0,1], got {t}")));
    }
    if !(c_t > 0.0) || !c_t.is_finite() {
        return Err(invalid(format!("c_t must be positive, got {c_t}")));
    }
    Ok((2.0 / c_t).powf(1.0 / t))
}

/// Thickness bound τ ≥ 1/K.
pub fn up_to_thickness(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(1.0 / k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessToUp {
    /// 1 + 2/τ.
    pub k: f64,
    /// The condition τ > 2/(K−1) is strict, so every K above `k` works and `k`
    /// itself does not.
    pub strict: bool,
}

/// Uniform perfectness from thickness: any K > 1 + 2/τ.
pub fn thickness_to_up(tau: f64) -> Result<ThicknessToUp> {
    if !(tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(ThicknessToUp {
        k: 1.0 + 2.0 / tau,
        strict: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AstelsReport {
    /// Σ τ/(τ+1), with τ = ∞ contributing 1.
    pub sum: f64,
    pub passed: bool,
    /// Largest gap ≤ smallest bridge diameter across the sets; `None` without
    /// interval data.
    pub side_condition: Option<bool>,
    /// The side condition holds or fails only within 1e-12 relative slack.
    pub borderline: bool,
}

fn astels_sum(taus: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &t in taus {
        if !(t >= 0.0) {
            return Err(invalid(format!("thickness must be ≥ 0, got {t}")));
        }
        sum += if t.is_infinite() { 1.0 } else { t / (t + 1.0) };
    }
    Ok(sum)
}

pub fn astels_check(taus: &[f64]) -> Result<AstelsReport> {
    let sum = astels_sum(taus)?;
    Ok(AstelsReport {
        sum,
        passed: sum >= 1.0,
        side_condition: None,
        borderline: false,
    })
}

/// As [`astels_check`], also comparing the largest gap of any set with the
/// smallest bridge diameter of any set, both read from cell approximations.
pub fn astels_check_with_intervals(
    taus: &[f64],
    largest_gaps: &[f64],
    smallest_bridges: &[f64],
) -> Result<AstelsReport> {
    let mut r = astels_check(taus)?;
    let gap = largest_gaps.iter().copied().fold(0.0, f64::max);
    let bridge = smallest_bridges
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    r.side_condition = Some(gap <= bridge);
    r.borderline = bridge.is_finite() && (gap - bridge).abs() <= 1e-12 * gap.max(bridge);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert_eq!(up_to_lowerdim(2.0).unwrap(), 1.0 / 3.0);
        assert_eq!(up_to_thickness(2.0).unwrap(), 0.5);
        assert_eq!(lowerdim_to_up(0.5, 0.5).unwrap(), 16.0);
        assert_eq!(thickness_to_up(1.0).unwrap().k, 3.0);
        assert!(up_to_lowerdim(1.0).is_err());
        assert!(lowerdim_to_up(0.0, 1.0).is_err());
        assert!(thickness_to_up(0.0).is_err());
    }

    #[test]
    fn astels_examples() {
        let r = astels_check(&[1.0, 1.0]).unwrap();
        assert_eq!(r.sum, 1.0);
        assert!(r.passed);
        let r = astels_check(&[1.0 / 3.0]).unwrap();
        assert_eq!(r.sum, 0.25);
        assert!(!r.passed);
        assert!(astels_check(&[f64::INFINITY]).unwrap().passed);
        assert!(astels_check(&[-1.0]).is_err());
        let r = astels_check_with_intervals(&[1.0, 1.0], &[1.0 / 3.0], &[1.0 / 3.0]).unwrap();
        assert_eq!(r.side_condition, Some(true));
        assert!(r.borderline);
    }
}
