//! Closed-form conversions between regularity constants.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform perfectness constant N = 2(2^γ C²)^{1/α} + 1 of an Ahlfors
/// α-regular measure with constant C.
pub fn ahlfors_to_up_constants(constant: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !(constant >= 1.0) || !constant.is_finite() {
        return Err(invalid(format!("C must be ≥ 1, got {constant}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma must lie in (0,1], got {gamma}")));
    }
    Ok(2.0 * (gamma.exp2() * constant * constant).powf(1.0 / alpha) + 1.0)
}

/// Dyadic porosity k = ⌈(3 + 2 log2 C)/(1 − α)⌉ of the support of an Ahlfors
/// α-regular measure with constant C.
pub fn ahlfors_porosity_k(constant: f64, alpha: f64) -> Result<u32> {
    if !(constant >= 1.0) || !constant.is_finite() {
        return Err(invalid(format!("C must be ≥ 1, got {constant}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let k = ((3.0 + 2.0 * constant.log2()) / (1.0 - alpha)).ceil();
    if k > u32::MAX as f64 {
        return Err(invalid("porosity constant overflows"));
    }
    Ok(k as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingUpConstants {
    pub n: f64,
    pub m: u32,
    pub gamma: f64,
}

/// For a C-doubling measure with K-uniformly perfect support:
/// N = 2K + 1, M = ⌈log2(N + 1)⌉, γ = log2(1 + C^{−M}).
pub fn doubling_up_constants(doubling: f64, k: f64) -> Result<DoublingUpConstants> {
    if !(doubling >= 1.0) || !doubling.is_finite() {
        return Err(invalid(format!(
            "doubling constant must be ≥ 1, got {doubling}"
        )));
    }
    if !(k > 1.0) || !k.is_finite() {
        return Err(invalid(format!("K must be > 1, got {k}")));
    }
    let n = 2.0 * k + 1.0;
    let m = (n + 1.0).log2().ceil() as u32;
    let gamma = (1.0 + doubling.powi(-(m as i32))).log2();
    Ok(DoublingUpConstants { n, m, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert_eq!(ahlfors_to_up_constants(1.0, 0.5, 1.0).unwrap(), 9.0);
        assert_eq!(ahlfors_to_up_constants(1.0, 1.0, 1.0).unwrap(), 5.0);
        assert_eq!(ahlfors_porosity_k(1.0, 0.5).unwrap(), 6);
        assert_eq!(ahlfors_porosity_k(2.0, 0.5).unwrap(), 10);
        let d = doubling_up_constants(2.0, 2.0).unwrap();
        assert_eq!((d.n, d.m), (5.0, 3));
        assert_eq!(d.gamma, (9.0f64 / 8.0).log2());
        assert_eq!(doubling_up_constants(1.0, 7.0).unwrap().gamma, 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(ahlfors_to_up_constants(0.5, 0.5, 1.0).is_err());
        assert!(ahlfors_to_up_constants(1.0, 0.0, 1.0).is_err());
        assert!(ahlfors_to_up_constants(1.0, 0.5, 0.0).is_err());
        assert!(ahlfors_porosity_k(1.0, 1.0).is_err());
        assert!(doubling_up_constants(2.0, 1.0).is_err());
        assert!(doubling_up_constants(0.9, 2.0).is_err());
    }
}
