//! Declarative measure constructions, generated as dyadic measures at any level.

mod digits;
mod ifs;
mod moran;
mod pieces;

use serde::{Deserialize, Serialize};

pub use digits::{
    generate_digit_blocks, generate_digit_pattern, BlockRule, DigitSet, MAX_FREE_DIGITS,
};
pub use ifs::{AffineMap, IfsSpec};
pub use moran::{
    generate_moran, validate_moran, LayoutChild, MoranBounds, MoranChild, MoranDiagnostics,
    MoranRule, MoranSpec,
};
pub use pieces::{MAX_PIECES, STRADDLE_MASS_FLOOR};

use crate::error::{invalid, spec_invalid, Result};
use crate::measure::{DyadicMeasure, DyadicSet};

/// Tag-discriminated measure construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Lebesgue measure on [0, 1).
    Lebesgue,
    /// Unit mass at `at`.
    Dirac {
        #[serde(default)]
        at: f64,
    },
    Ifs(IfsSpec),
    Moran(MoranSpec),
    DigitPattern {
        forced_zero: DigitSet,
    },
    /// Literal atoms at a fixed level.
    Explicit(DyadicMeasure),
}

impl MeasureSpec {
    /// Cantor–Lebesgue measure of the middle-thirds set.
    pub fn middle_thirds() -> Self {
        Self::central_cantor(1.0 / 3.0)
    }

    /// Two maps of ratio `ratio` fixing 0 and 1, equal weights.
    pub fn central_cantor(ratio: f64) -> Self {
        MeasureSpec::Ifs(IfsSpec::uniform(vec![
            AffineMap { ratio, shift: 0.0 },
            AffineMap {
                ratio,
                shift: 1.0 - ratio,
            },
        ]))
    }

    /// Central Cantor measure on [-1/2, 1/2], symmetric about 0.
    pub fn symmetric_central_cantor(ratio: f64) -> Self {
        let t = 0.5 - ratio / 2.0;
        MeasureSpec::Ifs(IfsSpec::uniform(vec![
            AffineMap { ratio, shift: -t },
            AffineMap { ratio, shift: t },
        ]))
    }

    /// Sparse-digit measure with E = ∪_j [n_j, 2 n_j].
    pub fn digit_blocks(blocks: BlockRule) -> Self {
        MeasureSpec::DigitPattern {
            forced_zero: DigitSet::Blocks { blocks },
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        match self {
            MeasureSpec::Lebesgue | MeasureSpec::Explicit(_) => Ok(()),
            MeasureSpec::Dirac { at } => {
                if at.is_finite() {
                    Ok(())
                } else {
                    Err(spec_invalid(
                        format!("{path}.at"),
                        "dirac",
                        "position not finite",
                    ))
                }
            }
            MeasureSpec::Ifs(s) => s.validate(path),
            MeasureSpec::Moran(s) => s.validate(path).map(|_| ()),
            MeasureSpec::DigitPattern { forced_zero } => match forced_zero {
                DigitSet::Blocks { blocks } => blocks.starts_up_to(64).map(|_| ()).map_err(|e| {
                    spec_invalid(
                        format!("{path}.forced_zero.blocks"),
                        "digit pattern",
                        e.to_string(),
                    )
                }),
                DigitSet::Digits { digits } if digits.contains(&0) => Err(spec_invalid(
                    format!("{path}.forced_zero.digits"),
                    "digit pattern",
                    "digit positions start at 1",
                )),
                _ => Ok(()),
            },
        }
    }

    /// If this is a two-map equal-weight central Cantor construction, its ratio.
    pub fn central_cantor_ratio(&self) -> Option<f64> {
        match self {
            MeasureSpec::Ifs(s) => s.central_cantor_ratio(),
            _ => None,
        }
    }

    /// True when the construction is invariant under x ↦ -x.
    pub fn is_symmetric_about_zero(&self) -> bool {
        match self {
            MeasureSpec::Dirac { at } => *at == 0.0,
            MeasureSpec::Ifs(s) => {
                let (lo, hi) = s.hull();
                s.central_cantor_ratio().is_some() && (lo + hi).abs() < 1e-12
            }
            _ => false,
        }
    }
}

/// μ^(level) for the measure described by `spec`.
pub fn generate(spec: &MeasureSpec, level: u32) -> Result<DyadicMeasure> {
    spec.validate("spec")?;
    match spec {
        MeasureSpec::Lebesgue => DyadicMeasure::uniform(level, 0, 1i64 << level),
        MeasureSpec::Dirac { at } => {
            DyadicMeasure::dirac(level, (at * (level as f64).exp2()).floor() as i64)
        }
        MeasureSpec::Ifs(s) => ifs::generate_ifs(s, level),
        MeasureSpec::Moran(s) => moran::generate_unchecked(s, level),
        MeasureSpec::DigitPattern { forced_zero } => generate_digit_pattern(forced_zero, level),
        MeasureSpec::Explicit(mu) => {
            if level <= mu.level() {
                mu.discretize(level)
            } else {
                mu.refine(level)
            }
        }
    }
}

/// Generates at the largest requested level and discretizes down, returning one
/// measure per level in the given (strictly increasing) order.
pub fn generate_levels(spec: &MeasureSpec, levels: &[u32]) -> Result<Vec<DyadicMeasure>> {
    if levels.is_empty() {
        return Err(invalid("no levels requested"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("levels must be strictly increasing"));
    }
    let top = generate(spec, *levels.last().unwrap())?;
    levels.iter().map(|&m| top.discretize(m)).collect()
}

/// Ahlfors-regular central Cantor example and its regularity constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsExample {
    pub alpha: f64,
    pub ratio: f64,
    /// C with C^-1 r^α ≤ μ(B(x, r)) ≤ C r^α for x in the support and 0 < r ≤ 1.
    pub constant: f64,
}

impl AhlforsExample {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let ratio = (-1.0 / alpha).exp2();
        Ok(AhlforsExample {
            alpha,
            ratio,
            constant: central_cantor_ahlfors_constant(ratio),
        })
    }

    pub fn spec(&self) -> MeasureSpec {
        MeasureSpec::central_cantor(self.ratio)
    }

    pub fn symmetric_spec(&self) -> MeasureSpec {
        MeasureSpec::symmetric_central_cantor(self.ratio)
    }
}

/// Ahlfors constant of the equal-weight central Cantor measure with ratio ρ < 1/2
/// and α = log 2 / log(1/ρ). A ball of radius r ≥ the gap between level-k
/// siblings covers both; the bound is 2^(s+1) with s the number of extra levels
/// needed before that gap (relative size 1-2ρ) exceeds the piece size.
pub fn central_cantor_ahlfors_constant(ratio: f64) -> f64 {
    let gap = 1.0 - 2.0 * ratio;
    let s = ((1.0 / gap).ln() / (1.0 / ratio).ln() - 1.0)
        .ceil()
        .max(0.0);
    (s + 1.0).exp2()
}

/// The α-regular central Cantor measure on [0, 1] at `level`.
pub fn generate_ahlfors_example(alpha: f64, level: u32) -> Result<(DyadicMeasure, AhlforsExample)> {
    let ex = AhlforsExample::new(alpha)?;
    Ok((generate(&ex.spec(), level)?, ex))
}

/// Closed construction intervals of diameter ≤ 2^-level, sorted, with overlaps
/// merged. Non-geometric specs fall back to the union of occupied cells.
pub fn construction_intervals(spec: &MeasureSpec, level: u32) -> Result<Vec<(f64, f64)>> {
    spec.validate("spec")?;
    let raw = match spec {
        MeasureSpec::Ifs(s) => ifs::pieces_at(s, level),
        MeasureSpec::Moran(s) => moran::pieces_at(s, level),
        MeasureSpec::Lebesgue => vec![(0.0, 1.0)],
        MeasureSpec::Dirac { at } => vec![(*at, *at)],
        _ => {
            let mu = generate(spec, level)?;
            let h = mu.cell_size();
            mu.indices()
                .iter()
                .map(|&k| (k as f64 * h, (k + 1) as f64 * h))
                .collect()
        }
    };
    Ok(merge_intervals(raw))
}

fn merge_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Support of the generated measure as a dyadic set.
pub fn generate_set(spec: &MeasureSpec, level: u32) -> Result<DyadicSet> {
    Ok(generate(spec, level)?.support())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_round_trip() {
        let specs = vec![
            MeasureSpec::Lebesgue,
            MeasureSpec::Dirac { at: 0.25 },
            MeasureSpec::middle_thirds(),
            MeasureSpec::digit_blocks(BlockRule::Tower { base: 16 }),
            MeasureSpec::Explicit(DyadicMeasure::from_atoms(3, [(0, 1.0), (5, 1.0)]).unwrap()),
        ];
        for s in specs {
            let j = serde_json::to_string(&s).unwrap();
            let back: MeasureSpec = serde_json::from_str(&j).unwrap();
            assert_eq!(back, s, "{j}");
        }
        let j = r#"{"kind":"ifs","maps":[{"ratio":0.5,"shift":0}],"weights":[1]}"#;
        assert!(matches!(
            serde_json::from_str::<MeasureSpec>(j).unwrap(),
            MeasureSpec::Ifs(_)
        ));
        let j = r#"{"kind":"digit_pattern","forced_zero":{"rule":"blocks","blocks":{"sequence":"factorial"}}}"#;
        assert!(serde_json::from_str::<MeasureSpec>(j).is_ok());
    }

    #[test]
    fn simple_generators() {
        let leb = generate(&MeasureSpec::Lebesgue, 6).unwrap();
        assert_eq!(leb.len(), 64);
        let d = generate(&MeasureSpec::Dirac { at: 0.5 }, 4).unwrap();
        assert_eq!(d.indices(), &[8]);
        let e = MeasureSpec::Explicit(DyadicMeasure::from_atoms(2, [(1, 1.0), (3, 1.0)]).unwrap());
        assert_eq!(generate(&e, 4).unwrap().indices(), &[4, 12]);
        assert_eq!(generate(&e, 1).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn digit_pattern_extremes() {
        let empty = MeasureSpec::DigitPattern {
            forced_zero: DigitSet::Empty,
        };
        assert_eq!(
            generate(&empty, 7).unwrap(),
            generate(&MeasureSpec::Lebesgue, 7).unwrap()
        );
        let all = MeasureSpec::DigitPattern {
            forced_zero: DigitSet::All,
        };
        assert_eq!(
            generate(&all, 7).unwrap(),
            DyadicMeasure::dirac(7, 0).unwrap()
        );
    }

    #[test]
    fn ahlfors_examples() {
        let ex = AhlforsExample::new(0.5).unwrap();
        assert_eq!(ex.ratio, 0.25);
        assert_eq!(ex.constant, 2.0);
        let ex = AhlforsExample::new(3f64.ln().recip() * 2f64.ln()).unwrap();
        assert!((ex.ratio - 1.0 / 3.0).abs() < 1e-15);
        assert!(AhlforsExample::new(1.0).is_err());
        assert!(AhlforsExample::new(0.0).is_err());
        // ratio 0.45 leaves a gap of 0.1, smaller than several generations of pieces
        assert_eq!(central_cantor_ahlfors_constant(0.45), 8.0);
    }

    #[test]
    fn symmetric_spec_detection() {
        assert!(MeasureSpec::symmetric_central_cantor(0.25).is_symmetric_about_zero());
        assert!(!MeasureSpec::central_cantor(0.25).is_symmetric_about_zero());
        assert!(!MeasureSpec::Lebesgue.is_symmetric_about_zero());
        let mu = generate(&MeasureSpec::symmetric_central_cantor(0.25), 8).unwrap();
        assert_eq!(mu.min_index(), -128);
        assert_eq!(mu.max_index(), -mu.min_index() - 1);
    }

    #[test]
    fn levels_generated_top_down() {
        let ms = generate_levels(&MeasureSpec::middle_thirds(), &[4, 8, 12]).unwrap();
        assert_eq!(ms.len(), 3);
        assert_eq!(ms[0].level(), 4);
        assert!(generate_levels(&MeasureSpec::Lebesgue, &[5, 4]).is_err());
    }

    #[test]
    fn intervals_merge() {
        assert_eq!(
            merge_intervals(vec![(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)]),
            vec![(0.0, 1.5), (2.0, 3.0)]
        );
        let iv = construction_intervals(&MeasureSpec::middle_thirds(), 4).unwrap();
        assert_eq!(iv.len(), 8);
    }
}
