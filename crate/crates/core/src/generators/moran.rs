//! Moran constructions: nested intervals indexed by finite words, with weights.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pieces::{deposit, Piece};
use crate::error::{spec_invalid, Error, Result};
use crate::measure::DyadicMeasure;

const EPS: f64 = 1e-12;

/// Cap on the number of words enumerated during validation.
const MAX_CHECK_WORDS: usize = 1 << 16;

/// A child of a construction interval, in absolute coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoranChild {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

/// A programmatic Moran construction.
pub trait MoranRule {
    /// The root interval E_∅.
    fn root(&self) -> (f64, f64);
    /// Children of the interval [lo, hi] indexed by `word`.
    fn children(&self, word: &[usize], lo: f64, hi: f64) -> Vec<MoranChild>;
}

/// Declared constants of a construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranBounds {
    pub p_lower: f64,
    pub p_upper: f64,
    pub beta: f64,
    pub alpha_lower: f64,
    pub rho: f64,
    /// Word length up to which the conditions are checked by enumeration.
    #[serde(default = "default_check_depth")]
    pub check_depth: usize,
}

fn default_check_depth() -> usize {
    6
}

/// One child in a relative layout: the sub-interval [lo, hi] of the unit parent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutChild {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

/// Depth-periodic construction: the layout used at depth d is `layouts[d % len]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranSpec {
    #[serde(default = "unit_root")]
    pub root: (f64, f64),
    pub layouts: Vec<Vec<LayoutChild>>,
    #[serde(flatten)]
    pub bounds: MoranBounds,
}

fn unit_root() -> (f64, f64) {
    (0.0, 1.0)
}

impl MoranRule for MoranSpec {
    fn root(&self) -> (f64, f64) {
        self.root
    }

    fn children(&self, word: &[usize], lo: f64, hi: f64) -> Vec<MoranChild> {
        let layout = &self.layouts[word.len() % self.layouts.len()];
        let w = hi - lo;
        layout
            .iter()
            .map(|c| MoranChild {
                lo: lo + c.lo * w,
                hi: lo + c.hi * w,
                weight: c.weight,
            })
            .collect()
    }
}

/// Observed constants and the values after the ρ = 1 normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranDiagnostics {
    pub observed_beta: f64,
    pub observed_alpha_lower: f64,
    pub observed_rho: f64,
    /// β ρ^-2 with the declared constants.
    pub normalized_beta: f64,
    /// α̲ ρ with the declared constants.
    pub normalized_alpha_lower: f64,
}

struct Node {
    word: Vec<usize>,
    lo: f64,
    hi: f64,
}

fn enumerate(rule: &dyn MoranRule, depth: usize) -> Vec<Vec<Node>> {
    let (lo, hi) = rule.root();
    let mut levels = vec![vec![Node {
        word: vec![],
        lo,
        hi,
    }]];
    let mut count = 1;
    for _ in 0..depth {
        let mut next = Vec::new();
        for n in levels.last().unwrap() {
            for (i, c) in rule.children(&n.word, n.lo, n.hi).into_iter().enumerate() {
                let mut word = n.word.clone();
                word.push(i);
                next.push(Node {
                    word,
                    lo: c.lo,
                    hi: c.hi,
                });
            }
        }
        count += next.len();
        levels.push(next);
        if count > MAX_CHECK_WORDS {
            break;
        }
    }
    levels
}

fn word_path(word: &[usize]) -> String {
    let w: Vec<String> = word.iter().map(|i| i.to_string()).collect();
    format!("[{}]", w.join(","))
}

/// Checks M1–M5 and the weight conditions up to `bounds.check_depth`.
pub fn validate_moran(
    rule: &dyn MoranRule,
    bounds: &MoranBounds,
    path: &str,
) -> Result<MoranDiagnostics> {
    let b = bounds;
    if !(b.p_lower > 0.0 && b.p_lower <= b.p_upper && b.p_upper <= 1.0) {
        return Err(spec_invalid(
            format!("{path}.p_lower"),
            "weights",
            "need 0 < p_* ≤ p^* ≤ 1",
        ));
    }
    if !(b.beta >= 1.0) {
        return Err(spec_invalid(format!("{path}.beta"), "M3", "β must be ≥ 1"));
    }
    if !(b.alpha_lower > 0.0 && b.alpha_lower < 1.0) {
        return Err(spec_invalid(
            format!("{path}.alpha_lower"),
            "M4",
            "α̲ must lie in (0,1)",
        ));
    }
    if !(b.rho > 0.0) {
        return Err(spec_invalid(
            format!("{path}.rho"),
            "M5",
            "ρ must be positive",
        ));
    }
    let (rlo, rhi) = rule.root();
    if !(rhi > rlo) {
        return Err(spec_invalid(
            format!("{path}.root"),
            "M2",
            "root interval is degenerate",
        ));
    }
    let depth = b.check_depth.max(2);
    let levels = enumerate(rule, depth);
    let mut observed_alpha = f64::INFINITY;
    for level in &levels[..levels.len() - 1] {
        for n in level {
            let kids = rule.children(&n.word, n.lo, n.hi);
            let wp = format!("{path}{}", word_path(&n.word));
            if kids.is_empty() {
                return Err(spec_invalid(wp, "M2", "interval has no children"));
            }
            let mut total = 0.0;
            for (i, c) in kids.iter().enumerate() {
                let cp = format!("{wp}.children[{i}]");
                if !(c.lo >= n.lo - EPS && c.hi <= n.hi + EPS && c.lo <= c.hi) {
                    return Err(spec_invalid(
                        cp,
                        "M1",
                        format!(
                            "child [{}, {}] not contained in parent [{}, {}]",
                            c.lo, c.hi, n.lo, n.hi
                        ),
                    ));
                }
                let ratio = (c.hi - c.lo) / (n.hi - n.lo);
                if !(ratio < 1.0 - EPS) {
                    return Err(spec_invalid(
                        cp,
                        "M2",
                        format!("diameter ratio {ratio} does not shrink"),
                    ));
                }
                if ratio < b.alpha_lower - EPS {
                    return Err(spec_invalid(
                        cp,
                        "M4",
                        format!("diameter ratio {ratio} below α̲ = {}", b.alpha_lower),
                    ));
                }
                observed_alpha = observed_alpha.min(ratio);
                if !(c.weight >= b.p_lower - EPS && c.weight <= b.p_upper + EPS) {
                    return Err(spec_invalid(
                        cp,
                        "weights",
                        format!(
                            "weight {} outside [p_*, p^*] = [{}, {}]",
                            c.weight, b.p_lower, b.p_upper
                        ),
                    ));
                }
                total += c.weight;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(spec_invalid(
                    wp,
                    "weights",
                    format!("sibling weights sum to {total}"),
                ));
            }
        }
    }

    // M3: diam(E_ij) ≤ β diam(E_i) diam(E_j), over all splits of enumerated words.
    let diam: HashMap<&[usize], f64> = levels
        .iter()
        .flatten()
        .map(|n| (n.word.as_slice(), n.hi - n.lo))
        .collect();
    let mut observed_beta: f64 = 1.0;
    for level in &levels[1..] {
        for n in level {
            let d = n.hi - n.lo;
            for split in 1..n.word.len() {
                let (i, j) = n.word.split_at(split);
                let (Some(&di), Some(&dj)) = (diam.get(i), diam.get(j)) else {
                    continue;
                };
                if di * dj <= 0.0 {
                    continue;
                }
                let need = d / (di * dj);
                observed_beta = observed_beta.max(need);
                if need > b.beta * (1.0 + 1e-9) {
                    return Err(spec_invalid(
                        format!("{path}{}", word_path(&n.word)),
                        "M3",
                        format!("needs β ≥ {need}, declared {}", b.beta),
                    ));
                }
            }
        }
    }

    // M5: every piece two levels down holds a limit point, so the limit set inside
    // E_i spans at least (largest left end) − (smallest right end) of those pieces.
    let mut observed_rho = f64::INFINITY;
    for (k, level) in levels.iter().enumerate() {
        let Some(below) = levels.get(k + 2) else {
            break;
        };
        for n in level {
            let sub: Vec<&Node> = below
                .iter()
                .filter(|m| m.word.starts_with(&n.word))
                .collect();
            if sub.is_empty() {
                continue;
            }
            let max_lo = sub.iter().map(|m| m.lo).fold(f64::NEG_INFINITY, f64::max);
            let min_hi = sub.iter().map(|m| m.hi).fold(f64::INFINITY, f64::min);
            let spread = max_lo - min_hi;
            let rel = spread.max(0.0) / (n.hi - n.lo);
            observed_rho = observed_rho.min(rel);
            if rel < b.rho - 1e-9 {
                return Err(spec_invalid(
                    format!("{path}{}", word_path(&n.word)),
                    "M5",
                    format!(
                        "limit points span only {rel} of the diameter, declared ρ = {}",
                        b.rho
                    ),
                ));
            }
        }
    }
    Ok(MoranDiagnostics {
        observed_beta,
        observed_alpha_lower: observed_alpha,
        observed_rho,
        normalized_beta: b.beta / (b.rho * b.rho),
        normalized_alpha_lower: b.alpha_lower * b.rho,
    })
}

impl MoranSpec {
    pub fn validate(&self, path: &str) -> Result<MoranDiagnostics> {
        if self.layouts.is_empty() || self.layouts.iter().any(|l| l.is_empty()) {
            return Err(spec_invalid(
                format!("{path}.layouts"),
                "M2",
                "empty layout",
            ));
        }
        for (d, l) in self.layouts.iter().enumerate() {
            for (i, c) in l.iter().enumerate() {
                if !(c.lo >= 0.0 && c.hi <= 1.0 && c.lo <= c.hi) {
                    return Err(spec_invalid(
                        format!("{path}.layouts[{d}][{i}]"),
                        "M1",
                        format!("relative child [{}, {}] not inside [0, 1]", c.lo, c.hi),
                    ));
                }
            }
        }
        validate_moran(self, &self.bounds, path)
    }

    /// Relative convex hull of the limit set inside a unit interval, per phase.
    pub fn limit_hulls(&self) -> Vec<(f64, f64)> {
        let n = self.layouts.len();
        let mut hulls = vec![(0.0, 1.0); n];
        for _ in 0..2000 {
            let mut next = hulls.clone();
            for p in 0..n {
                let (cl, ch) = hulls[(p + 1) % n];
                let lo = self.layouts[p]
                    .iter()
                    .map(|c| c.lo + (c.hi - c.lo) * cl)
                    .fold(f64::INFINITY, f64::min);
                let hi = self.layouts[p]
                    .iter()
                    .map(|c| c.lo + (c.hi - c.lo) * ch)
                    .fold(f64::NEG_INFINITY, f64::max);
                next[p] = (lo, hi);
            }
            if next == hulls {
                break;
            }
            hulls = next;
        }
        hulls
    }
}

/// Generates the construction measure of a programmatic rule at `level`.
pub fn generate_moran(
    rule: &dyn MoranRule,
    bounds: &MoranBounds,
    level: u32,
) -> Result<DyadicMeasure> {
    validate_moran(rule, bounds, "moran")?;
    generate_unchecked(rule, level)
}

pub(crate) fn generate_unchecked(rule: &dyn MoranRule, level: u32) -> Result<DyadicMeasure> {
    let (lo, hi) = rule.root();
    let root = Piece {
        lo,
        hi,
        mass: 1.0,
        depth: 0,
        state: Vec::<usize>::new(),
    };
    deposit(root, level, |p| {
        rule.children(&p.state, p.lo, p.hi)
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let mut word = p.state.clone();
                word.push(i);
                Piece {
                    lo: c.lo,
                    hi: c.hi,
                    mass: p.mass * c.weight,
                    depth: p.depth + 1,
                    state: word,
                }
            })
            .collect()
    })
    .map_err(|e| match e {
        Error::ResourceLimit(m) => Error::ResourceLimit(format!("moran: {m}")),
        other => other,
    })
}

/// Construction intervals at the depth where every piece has diameter ≤ 2^-level.
pub(crate) fn pieces_at(rule: &dyn MoranRule, level: u32) -> Vec<(f64, f64)> {
    let h = (-(level as f64)).exp2();
    let (lo, hi) = rule.root();
    let mut out = Vec::new();
    let mut stack = vec![(Vec::<usize>::new(), lo, hi)];
    while let Some((w, lo, hi)) = stack.pop() {
        if hi - lo <= h {
            out.push((lo, hi));
            continue;
        }
        for (i, c) in rule.children(&w, lo, hi).into_iter().enumerate() {
            let mut word = w.clone();
            word.push(i);
            stack.push((word, c.lo, c.hi));
        }
    }
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}
