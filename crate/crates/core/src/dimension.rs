//! Finite-scale L^q and L^∞ dimension estimates.
//!
//! Every exponent is computed on the normalized measure (support translated to
//! start at 0 and coarsened to fit in [0, 1)), so values lie in [0, 1].

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::generators::{generate_levels, MeasureSpec};
use crate::measure::{check_q, DyadicMeasure, DyadicSet};
use crate::numeric::ls_slope;

/// Default number of trailing scales in the slope fit.
pub const DEFAULT_WINDOW: usize = 4;

/// Order of a norm: finite q > 1 or ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QOrder {
    Finite(f64),
    Infinity,
}

impl QOrder {
    pub fn finite(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(QOrder::Finite(q))
    }

    /// q' = q/(q-1); 1 for q = ∞.
    pub fn dual(&self) -> f64 {
        match *self {
            QOrder::Finite(q) => q / (q - 1.0),
            QOrder::Infinity => 1.0,
        }
    }
}

impl std::fmt::Display for QOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QOrder::Finite(q) => write!(f, "{q}"),
            QOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for QOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QOrder::Finite(q) => s.serialize_f64(*q),
            QOrder::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for QOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => QOrder::finite(q).map_err(serde::de::Error::custom),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") => {
                Ok(QOrder::Infinity)
            }
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unknown q `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleValue {
    pub m: u32,
    pub value: f64,
}

/// Per-scale exponents with two summary readings. The sequence is the primary
/// output; neither summary is a limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub q: QOrder,
    /// q' = q/(q-1).
    pub dual_exponent: f64,
    pub per_scale: Vec<ScaleValue>,
    /// Value at the largest m.
    #[serde(rename = "point")]
    pub point_estimate: f64,
    /// Least-squares slope over the trailing window.
    #[serde(rename = "slope")]
    pub slope_estimate: f64,
    pub window: usize,
}

impl DimensionEstimate {
    pub fn value_at(&self, m: u32) -> Option<f64> {
        self.per_scale.iter().find(|s| s.m == m).map(|s| s.value)
    }
}

/// One scale of a series: nominal level, exponent, and the (x, y) pair whose
/// slope the window fit uses.
pub(crate) struct SeriesPoint {
    pub m: u32,
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

pub(crate) fn assemble(
    q: QOrder,
    points: Vec<SeriesPoint>,
    window: usize,
) -> Result<DimensionEstimate> {
    if points.is_empty() {
        return Err(invalid("no scales"));
    }
    if points.windows(2).any(|w| w[0].m >= w[1].m) {
        return Err(invalid("levels must be strictly increasing"));
    }
    let window = window.max(1);
    let tail = &points[points.len().saturating_sub(window)..];
    let xs: Vec<f64> = tail.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.y).collect();
    let point = points.last().unwrap().value;
    let slope = ls_slope(&xs, &ys).unwrap_or(point);
    Ok(DimensionEstimate {
        q,
        dual_exponent: q.dual(),
        per_scale: points
            .iter()
            .map(|p| ScaleValue {
                m: p.m,
                value: p.value,
            })
            .collect(),
        point_estimate: point,
        slope_estimate: slope,
        window,
    })
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// (value, x, y) for one measure: x = (q-1)·level, y = -log2‖ν‖_q^q of the
/// normalized measure ν.
fn lq_point(mu: &DyadicMeasure, q: f64) -> Result<(f64, f64, f64)> {
    let nu = mu.normalized();
    let m = nu.level() as f64;
    let y = -nu.lq_norm(q)?;
    let x = (q - 1.0) * m;
    let value = if m == 0.0 { 0.0 } else { clamp_unit(y / x) };
    Ok((value, x, y))
}

fn linf_point(mu: &DyadicMeasure) -> (f64, f64, f64) {
    let nu = mu.normalized();
    let m = nu.level() as f64;
    let y = -nu.linf_norm().log2();
    let value = if m == 0.0 { 0.0 } else { clamp_unit(y / m) };
    (value, m, y)
}

/// Normalized L^q exponent -log2‖ν‖_q^q / ((q-1)·level) of the normalized measure.
pub fn lq_exponent(mu: &DyadicMeasure, q: f64) -> Result<f64> {
    Ok(lq_point(mu, q)?.0)
}

/// -log2 max ν(x) / level of the normalized measure.
pub fn linf_exponent(mu: &DyadicMeasure) -> f64 {
    linf_point(mu).0
}

pub fn exponent(mu: &DyadicMeasure, q: QOrder) -> Result<f64> {
    match q {
        QOrder::Finite(q) => lq_exponent(mu, q),
        QOrder::Infinity => Ok(linf_exponent(mu)),
    }
}

/// Estimate from already discretized measures, one per scale, in increasing level.
pub fn estimate_from_measures(
    measures: &[DyadicMeasure],
    q: QOrder,
    window: usize,
) -> Result<DimensionEstimate> {
    let mut points = Vec::with_capacity(measures.len());
    for mu in measures {
        let (value, x, y) = match q {
            QOrder::Finite(q) => lq_point(mu, q)?,
            QOrder::Infinity => linf_point(mu),
        };
        points.push(SeriesPoint {
            m: mu.level(),
            value,
            x,
            y,
        });
    }
    assemble(q, points, window)
}

/// Box-counting exponent log2 N / level of normalized sets, one per scale.
pub fn box_estimate_from_sets(sets: &[DyadicSet], window: usize) -> Result<DimensionEstimate> {
    let mut points = Vec::with_capacity(sets.len());
    for s in sets {
        if s.is_empty() {
            return Err(invalid("empty set"));
        }
        let n = s.normalized();
        let m = n.level() as f64;
        let y = (n.len() as f64).log2();
        let value = if m == 0.0 { 0.0 } else { clamp_unit(y / m) };
        points.push(SeriesPoint {
            m: s.level(),
            value,
            x: m,
            y,
        });
    }
    let mut est = assemble(QOrder::Infinity, points, window)?;
    est.dual_exponent = 1.0;
    Ok(est)
}

/// L^q dimension estimate of a generated measure across `levels`.
pub fn lq_dimension_estimate(
    spec: &MeasureSpec,
    q: f64,
    levels: &[u32],
) -> Result<DimensionEstimate> {
    check_q(q)?;
    let measures = generate_levels(spec, levels)?;
    estimate_from_measures(&measures, QOrder::Finite(q), DEFAULT_WINDOW)
}

/// L^∞ dimension estimate (Frostman exponent at the grid resolution) across `levels`.
pub fn linf_dimension_estimate(spec: &MeasureSpec, levels: &[u32]) -> Result<DimensionEstimate> {
    let measures = generate_levels(spec, levels)?;
    estimate_from_measures(&measures, QOrder::Infinity, DEFAULT_WINDOW)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_order_serde() {
        assert_eq!(serde_json::to_string(&QOrder::Finite(2.0)).unwrap(), "2.0");
        assert_eq!(serde_json::to_string(&QOrder::Infinity).unwrap(), "\"inf\"");
        let q: QOrder = serde_json::from_str("\"Infinity\"").unwrap();
        assert_eq!(q, QOrder::Infinity);
        assert!(serde_json::from_str::<QOrder>("1.0").is_err());
        assert_eq!(QOrder::Finite(2.0).dual(), 2.0);
    }

    #[test]
    fn lebesgue_and_dirac_exponents() {
        let leb = DyadicMeasure::uniform(10, 0, 1024).unwrap();
        let dirac = DyadicMeasure::dirac(10, 7).unwrap();
        for q in [1.5, 2.0, 4.0] {
            assert!((lq_exponent(&leb, q).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(lq_exponent(&dirac, q).unwrap(), 0.0);
        }
        assert_eq!(linf_exponent(&leb), 1.0);
        assert_eq!(linf_exponent(&dirac), 0.0);
    }

    #[test]
    fn normalization_removes_translation_and_scale() {
        let a = DyadicMeasure::uniform(8, 0, 256).unwrap();
        let b = DyadicMeasure::uniform(8, -256, 256).unwrap();
        assert_eq!(lq_exponent(&a, 2.0).unwrap(), lq_exponent(&b, 2.0).unwrap());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let measures: Vec<DyadicMeasure> = (4..=9)
            .map(|m| DyadicMeasure::uniform(m, 0, 1 << (m / 2)).unwrap())
            .collect();
        let est = estimate_from_measures(&measures, QOrder::Finite(2.0), 4).unwrap();
        assert_eq!(est.per_scale.len(), 6);
        assert_eq!(est.per_scale[0].m, 4);
        assert!((est.point_estimate - 4.0 / 9.0).abs() < 1e-12);
        assert!(est.slope_estimate > 0.3 && est.slope_estimate < 0.7);
        assert!(estimate_from_measures(&measures[..0], QOrder::Infinity, 4).is_err());
    }

    #[test]
    fn levels_must_increase() {
        let a = DyadicMeasure::uniform(5, 0, 3).unwrap();
        assert!(estimate_from_measures(&[a.clone(), a], QOrder::Infinity, 4).is_err());
    }
}
