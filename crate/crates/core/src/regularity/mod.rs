//! Regularity diagnostics on discretized measures.
//!
//! Balls are half-open intervals [x − r, x + r) over atom positions. Centers are
//! support atoms and radii are dyadic multiples of the grid size unless a check
//! says otherwise.

mod balls;

pub mod ahlfors;
pub mod constants;
pub mod doubling;
pub mod gap_chain;
pub mod lower_dim;
pub mod porosity;
pub mod uniform_perfect;

use serde::{Deserialize, Serialize};

pub use ahlfors::{check_ahlfors, fit_ahlfors, AhlforsCheck, AhlforsFit, K_CUTOFF};
pub use constants::{
    ahlfors_porosity_k, ahlfors_to_up_constants, doubling_up_constants, DoublingUpConstants,
};
pub use doubling::{check_doubling, check_doubling_from, doubling_constant, DoublingCheck};
pub use gap_chain::{check_gap_chain, GapChainReport};
pub use lower_dim::{covering_profile, estimate_lower_dimension, LowerDimEstimate};
pub use porosity::{check_dyadic_porosity, fit_porosity, PorosityCheck};
pub use uniform_perfect::{
    check_uniformly_perfect, check_uniformly_perfect_all_centers, check_uniformly_perfect_set,
    fit_set_uniform_perfectness, fit_uniform_perfectness, UpCheck, DEFAULT_GAMMA_GRID,
    DEFAULT_K_GRID, DEFAULT_N_GRID,
};

use crate::error::{Error, Result};
use crate::measure::DyadicMeasure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularityOptions {
    pub n_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// An (N, γ) pair to check in addition to the fit.
    pub requested: Option<(f64, f64)>,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            n_grid: DEFAULT_N_GRID.to_vec(),
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            requested: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpPair {
    pub n: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestedUp {
    pub n: f64,
    pub gamma: f64,
    pub check: UpCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub level: u32,
    pub diameter: f64,
    pub uniform_perfect: Option<UpPair>,
    pub requested_uniform_perfect: Option<RequestedUp>,
    pub ahlfors: Option<AhlforsFit>,
    pub doubling_constant: Option<f64>,
    pub porosity_k: Option<u32>,
    pub lower_dim: LowerDimEstimate,
}

/// Runs every fit. Zero-diameter supports are rejected; an Ahlfors sweep with
/// no admissible radius is reported as `None`.
pub fn regularity_report(mu: &DyadicMeasure, opts: &RegularityOptions) -> Result<RegularityReport> {
    if mu.diameter() <= 0.0 {
        return Err(Error::DegenerateInput("support has zero diameter".into()));
    }
    let uniform_perfect = fit_uniform_perfectness(mu, &opts.n_grid, &opts.gamma_grid)?
        .map(|(n, gamma)| UpPair { n, gamma });
    let requested_uniform_perfect = match opts.requested {
        Some((n, gamma)) => Some(RequestedUp {
            n,
            gamma,
            check: check_uniformly_perfect(mu, n, gamma)?,
        }),
        None => None,
    };
    let ahlfors = match fit_ahlfors(mu) {
        Ok(f) => Some(f),
        Err(Error::InvalidArgument(_)) => None,
        Err(e) => return Err(e),
    };
    let support = mu.support();
    let porosity_k = if support.level() >= 2 {
        fit_porosity(&support)?
    } else {
        None
    };
    Ok(RegularityReport {
        level: mu.level(),
        diameter: mu.diameter(),
        uniform_perfect,
        requested_uniform_perfect,
        ahlfors,
        doubling_constant: Some(doubling_constant(mu)),
        porosity_k,
        lower_dim: estimate_lower_dimension(&support)?,
    })
}
