use serde::{Deserialize, Serialize};

use super::pieces::{deposit, Piece};
use crate::error::{spec_invalid, Result};
use crate::measure::DyadicMeasure;

/// x ↦ ratio·x + shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub ratio: f64,
    pub shift: f64,
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.ratio * x + self.shift
    }

    pub fn fixed_point(&self) -> f64 {
        self.shift / (1.0 - self.ratio)
    }
}

/// Self-similar measure of an affine IFS with probability weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    pub maps: Vec<AffineMap>,
    pub weights: Vec<f64>,
}

impl IfsSpec {
    /// Equal weights.
    pub fn uniform(maps: Vec<AffineMap>) -> Self {
        let w = 1.0 / maps.len() as f64;
        let weights = vec![w; maps.len()];
        IfsSpec { maps, weights }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.maps.is_empty() {
            return Err(spec_invalid(format!("{path}.maps"), "ifs", "no maps"));
        }
        if self.weights.len() != self.maps.len() {
            return Err(spec_invalid(
                format!("{path}.weights"),
                "ifs",
                format!(
                    "{} weights for {} maps",
                    self.weights.len(),
                    self.maps.len()
                ),
            ));
        }
        for (i, f) in self.maps.iter().enumerate() {
            if !(f.ratio.abs() > 0.0 && f.ratio.abs() < 1.0) || !f.ratio.is_finite() {
                return Err(spec_invalid(
                    format!("{path}.maps[{i}].ratio"),
                    "ifs contraction",
                    format!("|ratio| = {} is not in (0,1)", f.ratio.abs()),
                ));
            }
            if !f.shift.is_finite() {
                return Err(spec_invalid(
                    format!("{path}.maps[{i}].shift"),
                    "ifs",
                    "shift not finite",
                ));
            }
        }
        for (i, &p) in self.weights.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(spec_invalid(
                    format!("{path}.weights[{i}]"),
                    "ifs weights",
                    format!("weight {p} is not positive"),
                ));
            }
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(spec_invalid(
                format!("{path}.weights"),
                "ifs weights",
                format!("weights sum to {total}, not 1"),
            ));
        }
        Ok(())
    }

    /// Convex hull of the attractor.
    pub fn hull(&self) -> (f64, f64) {
        let fps = self.maps.iter().map(|f| f.fixed_point());
        let mut lo = fps.clone().fold(f64::INFINITY, f64::min);
        let mut hi = fps.fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..10_000 {
            let mut nlo = lo;
            let mut nhi = hi;
            for f in &self.maps {
                let (a, b) = (f.apply(lo), f.apply(hi));
                nlo = nlo.min(a.min(b));
                nhi = nhi.max(a.max(b));
            }
            if nlo == lo && nhi == hi {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        (lo, hi)
    }

    /// If this is a two-map central Cantor construction with equal ratios and
    /// weights, returns the ratio.
    pub fn central_cantor_ratio(&self) -> Option<f64> {
        if self.maps.len() != 2 {
            return None;
        }
        let (f, g) = (self.maps[0], self.maps[1]);
        let equal_weights = (self.weights[0] - 0.5).abs() < 1e-12;
        if f.ratio != g.ratio || f.ratio <= 0.0 || f.ratio >= 0.5 || !equal_weights {
            return None;
        }
        let (lo, hi) = self.hull();
        let left_ok = (f.apply(lo) - lo).abs().min((g.apply(lo) - lo).abs()) < 1e-12;
        let right_ok = (f.apply(hi) - hi).abs().min((g.apply(hi) - hi).abs()) < 1e-12;
        (left_ok && right_ok).then_some(f.ratio)
    }
}

#[derive(Clone, Copy)]
struct Affine {
    scale: f64,
    offset: f64,
}

/// Pieces f_w(hull) for the words w of the subdivision, as closed intervals.
pub(crate) fn pieces_at(spec: &IfsSpec, level: u32) -> Vec<(f64, f64)> {
    let (a, b) = spec.hull();
    let h = (-(level as f64)).exp2();
    let mut out = Vec::new();
    let mut stack = vec![Affine {
        scale: 1.0,
        offset: 0.0,
    }];
    while let Some(g) = stack.pop() {
        let (x, y) = (g.scale * a + g.offset, g.scale * b + g.offset);
        let (lo, hi) = (x.min(y), x.max(y));
        if hi - lo <= h {
            out.push((lo, hi));
            continue;
        }
        for f in spec.maps.iter().rev() {
            stack.push(Affine {
                scale: g.scale * f.ratio,
                offset: g.scale * f.shift + g.offset,
            });
        }
    }
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}

pub(crate) fn generate_ifs(spec: &IfsSpec, level: u32) -> Result<DyadicMeasure> {
    spec.validate("ifs")?;
    let (a, b) = spec.hull();
    let root = Piece {
        lo: a,
        hi: b,
        mass: 1.0,
        depth: 0,
        state: Affine {
            scale: 1.0,
            offset: 0.0,
        },
    };
    deposit(root, level, |p| {
        let g = p.state;
        spec.maps
            .iter()
            .zip(&spec.weights)
            .map(|(f, &w)| {
                let s = Affine {
                    scale: g.scale * f.ratio,
                    offset: g.scale * f.shift + g.offset,
                };
                let (x, y) = (s.scale * a + s.offset, s.scale * b + s.offset);
                Piece {
                    lo: x.min(y),
                    hi: x.max(y),
                    mass: p.mass * w,
                    depth: p.depth + 1,
                    state: s,
                }
            })
            .collect()
    })
}
