//! Sumsets of dyadic sets, box counting, thickness and interval detection.

mod conversions;
mod exact;
mod thickness;

use serde::{Deserialize, Serialize};

pub use conversions::{
    astels_check, astels_check_with_intervals, lowerdim_to_up, thickness_to_up, up_to_lowerdim,
    up_to_thickness, AstelsReport, ThicknessToUp,
};
pub use thickness::{
    derive_thickness, derive_thickness_intervals, spec_thickness, DerivationTree, Split,
    ThicknessReport,
};

use crate::convolve::default_max_work;
use crate::dimension::{box_estimate_from_sets, DimensionEstimate, DEFAULT_WINDOW};
use crate::error::{invalid, Error, Result};
use crate::generators::{generate_set, MeasureSpec};
use crate::measure::DyadicSet;

/// How cell sums are turned into cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumsetMode {
    /// Index sums plus the next cell: [i, i+1) + [j, j+1) ⊂ [i+j, i+j+2), so the
    /// result covers every cell meeting the true sumset of the cell unions.
    #[default]
    Padded,
    /// Index sums only, i.e. the sumset of the left endpoints.
    Points,
}

/// Largest output bitmap, in 64-bit words (128 MiB).
const MAX_BITMAP_WORDS: u64 = 1 << 24;

/// Padded sumset with the default work cap.
pub fn sumset(a: &DyadicSet, b: &DyadicSet) -> Result<DyadicSet> {
    sumset_with(a, b, SumsetMode::Padded, default_max_work())
}

/// Sumset on a shared level. Work is |smaller| × (occupied 64-cell words of the
/// larger), and exceeding `max_work` is a resource-limit error.
pub fn sumset_with(
    a: &DyadicSet,
    b: &DyadicSet,
    mode: SumsetMode,
    max_work: u64,
) -> Result<DyadicSet> {
    if a.level() != b.level() {
        return Err(invalid(format!(
            "level mismatch: {} vs {}",
            a.level(),
            b.level()
        )));
    }
    let level = a.level();
    if a.is_empty() || b.is_empty() {
        return DyadicSet::new(level, std::iter::empty());
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let (s_idx, l_idx) = (small.indices(), large.indices());
    let (s_min, l_min) = (s_idx[0], l_idx[0]);
    let span =
        (s_idx[s_idx.len() - 1] - s_min) as u64 + (l_idx[l_idx.len() - 1] - l_min) as u64 + 2;
    let words_out = span / 64 + 2;
    if words_out > MAX_BITMAP_WORDS {
        return Err(Error::ResourceLimit(format!(
            "sumset span of {span} cells exceeds the bitmap limit"
        )));
    }
    // occupied words of the larger set, relative to its minimum
    let mut l_words: Vec<(u64, u64)> = Vec::new();
    for &k in l_idx {
        let r = (k - l_min) as u64;
        let (w, bit) = (r >> 6, 1u64 << (r & 63));
        match l_words.last_mut() {
            Some(last) if last.0 == w => last.1 |= bit,
            _ => l_words.push((w, bit)),
        }
    }
    let work = s_idx.len() as u64 * l_words.len() as u64;
    if work > max_work {
        return Err(Error::ResourceLimit(format!(
            "sumset needs {work} word operations, cap is {max_work}"
        )));
    }
    let mut out = vec![0u64; words_out as usize];
    for &s in s_idx {
        let off = (s - s_min) as u64;
        let (ow, ob) = (off >> 6, off & 63);
        for &(w, bits) in &l_words {
            let t = (w + ow) as usize;
            out[t] |= bits << ob;
            if ob != 0 {
                out[t + 1] |= bits >> (64 - ob);
            }
        }
    }
    if mode == SumsetMode::Padded {
        let mut carry = 0u64;
        for w in out.iter_mut() {
            let next = *w >> 63;
            *w |= (*w << 1) | carry;
            carry = next;
        }
    }
    let base = s_min + l_min;
    let mut indices = Vec::new();
    for (i, &w) in out.iter().enumerate() {
        let mut bits = w;
        while bits != 0 {
            let t = bits.trailing_zeros() as i64;
            indices.push(base + 64 * i as i64 + t);
            bits &= bits - 1;
        }
    }
    DyadicSet::new(level, indices)
}

/// n-fold padded sumset nA (n ≥ 1).
pub fn nfold_sumset(a: &DyadicSet, n: usize, max_work: u64) -> Result<DyadicSet> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut acc = a.clone();
    for _ in 1..n {
        acc = sumset_with(&acc, a, SumsetMode::Padded, max_work)?;
    }
    Ok(acc)
}

/// True iff every cell between the smallest and largest index is present.
pub fn interval_detect(set: &DyadicSet) -> bool {
    match (set.indices().first(), set.indices().last()) {
        (Some(&lo), Some(&hi)) => (hi - lo + 1) as usize == set.len(),
        _ => false,
    }
}

/// Box-counting exponent log2 N_m(A)/m of the generated support at each level.
pub fn box_dimension_estimate(spec: &MeasureSpec, levels: &[u32]) -> Result<DimensionEstimate> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("levels must be strictly increasing"));
    }
    let sets = levels
        .iter()
        .map(|&m| generate_set(spec, m))
        .collect::<Result<Vec<_>>>()?;
    box_estimate_from_sets(&sets, DEFAULT_WINDOW)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfoldRow {
    pub n: usize,
    pub level: u32,
    /// N_m(nA).
    pub count: usize,
    pub box_exponent: f64,
    pub is_interval: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NfoldReport {
    pub level: u32,
    pub rows: Vec<NfoldRow>,
    /// Smallest n whose sumset is a full run of cells.
    pub first_interval: Option<usize>,
    /// Thickness of the construction intervals, when available.
    pub thickness: Option<f64>,
    /// Smallest n with n·τ/(τ+1) ≥ 1.
    pub astels_n: Option<usize>,
}

/// nA for n = 1..=n_max at one level, stopping at the first interval.
pub fn nfold_sumset_experiment(
    spec: &MeasureSpec,
    n_max: usize,
    level: u32,
    max_work: u64,
) -> Result<NfoldReport> {
    if n_max < 1 {
        return Err(invalid("n_max must be at least 1"));
    }
    let a = generate_set(spec, level)?;
    let mut rows = Vec::new();
    let mut first_interval = None;
    let mut acc = a.clone();
    for n in 1..=n_max {
        if n > 1 {
            acc = sumset_with(&acc, &a, SumsetMode::Padded, max_work)?;
        }
        let is_interval = interval_detect(&acc);
        let est = box_estimate_from_sets(std::slice::from_ref(&acc), 1)?;
        rows.push(NfoldRow {
            n,
            level,
            count: acc.len(),
            box_exponent: est.per_scale[0].value,
            is_interval,
        });
        if is_interval {
            first_interval = Some(n);
            break;
        }
    }
    let thickness = spec_thickness(spec, level).ok().map(|r| r.tau);
    // same summation order as astels_check on n copies of τ
    let astels_n = thickness.filter(|&t| t > 0.0).and_then(|tau| {
        let term = if tau.is_infinite() {
            1.0
        } else {
            tau / (tau + 1.0)
        };
        let mut sum = 0.0;
        (1..=1usize << 20).find(|_| {
            sum += term;
            sum >= 1.0
        })
    });
    Ok(NfoldReport {
        level,
        rows,
        first_interval,
        thickness,
        astels_n,
    })
}
