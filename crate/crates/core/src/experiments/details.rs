//! Experiment-specific report sections.

use serde::{Deserialize, Serialize};

use super::report::SumsetCsvRow;
use crate::dimension::{DimensionEstimate, QOrder, ScaleValue};
use crate::regularity::{RegularityReport, UpPair};
use crate::sumsets::NfoldReport;
use crate::uniformity::SaturationLevel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Details {
    Improvement(ImprovementDetails),
    Repeated(RepeatedDetails),
    PorousDual(PorousDualDetails),
    InftyJump(InftyJumpDetails),
    Regularity(RegularityDetails),
    Sumset(SumsetDetails),
    Uniformize(UniformizeDetails),
}

/// Exponents of μ, ν and μ∗ν at one q across the levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSeries {
    pub q: QOrder,
    pub mu: DimensionEstimate,
    pub nu: DimensionEstimate,
    pub conv: DimensionEstimate,
    /// exponent(μ∗ν, m) − exponent(μ, m).
    pub improvement: Vec<ScaleValue>,
    /// The improvement at the largest level. Never a limit.
    pub improvement_top: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementDetails {
    /// (N, γ) fitted to ν at `up_level`.
    pub nu_uniform_perfect: Option<UpPair>,
    pub up_level: u32,
    pub series: Vec<ConvolutionSeries>,
    /// False when a precondition fails; the numbers are then descriptive only.
    pub improvement_claimed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedSeries {
    pub q: QOrder,
    /// Exponent of the n-fold convolution at the top level, n = 1..n_max.
    pub exponents: Vec<f64>,
    /// Window slope of the n-fold convolution across the levels, which drops
    /// the O(1/m) offset the per-scale values carry.
    pub slopes: Vec<f64>,
    /// Each step gains more than the tolerance until the value reaches 1.
    pub strictly_increasing: bool,
    /// No step loses more than the tolerance.
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedDetails {
    pub n_max: usize,
    pub tolerance: f64,
    pub factors_uniform_perfect: Vec<Option<UpPair>>,
    pub series: Vec<RepeatedSeries>,
    /// L^∞ exponent (Frostman proxy) of the n-fold convolution at the top level.
    pub frostman: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorousDualDetails {
    pub porosity_k: u32,
    /// L^p exponent of ν at the top level.
    pub nu_lp_exponent: f64,
    pub series: Vec<ConvolutionSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCheck {
    pub j: u32,
    pub radius: f64,
    /// (μ∗μ)(B(0, r)).
    pub mass: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InftyJumpDetails {
    pub ratio: f64,
    pub alpha: f64,
    /// Ahlfors constant C of μ.
    pub constant: f64,
    /// Swept r = 2^-j at the top level against C^-3 2^-2α r^α.
    pub stall_checks: Vec<BallCheck>,
    pub stall_bound_holds: bool,
    /// Slope of −log2 (μ∗μ)(B(0, r)) against log2(1/r) over the sweep.
    pub near_zero_proxy: f64,
    /// near_zero_proxy ≤ α + 0.05.
    pub two_fold_stall: bool,
    /// L^∞ exponents of μ, μ∗μ, μ∗μ∗μ across the levels.
    pub frostman: [DimensionEstimate; 3],
    /// Three-fold minus two-fold L^∞ exponent at the top level.
    pub jump: f64,
    /// ‖μ∗μ∗μ‖∞ ≤ ‖μ∗μ‖∞ read through the exponents at every level.
    pub young_ordering_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityDetails {
    pub report: RegularityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSumRow {
    pub level: u32,
    pub f1: f64,
    pub f2: f64,
    pub sum: f64,
    /// sum − f1.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsetDetails {
    /// n-fold runs of `mu`, one per level, when `nu` is absent.
    pub nfold: Vec<NfoldReport>,
    /// F1 + F2 box exponents, when `nu` is present.
    pub pair: Vec<PairSumRow>,
    pub min_gain: Option<f64>,
    pub csv_rows: Vec<SumsetCsvRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformizeDetails {
    pub level: u32,
    pub d: u32,
    pub ell: u32,
    pub roots: u64,
    pub branching: Vec<u64>,
    pub input_leaves: usize,
    pub output_leaves: u64,
    pub leaf_retention: f64,
    pub weight_retention: f64,
    pub mass_retained: f64,
    pub retention_bound: f64,
    /// The output passes is_uniform with the same branching.
    pub verified_uniform: bool,
    pub saturation: Vec<SaturationLevel>,
}
