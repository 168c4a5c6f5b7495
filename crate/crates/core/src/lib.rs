//! Dyadic discretizations of compactly supported probability measures on the line.
//!
//! The crate computes discrete L^q norms and dimension estimates, convolutions,
//! regularity diagnostics (uniform perfectness, Ahlfors regularity, doubling,
//! porosity, lower dimension), uniform tree structures, and sumset and thickness
//! experiments.
//!
//! ```
//! use lqdim::{convolve, generate, lq_exponent, MeasureSpec};
//!
//! let mu = generate(&MeasureSpec::middle_thirds(), 14).unwrap();
//! let nu = convolve(&mu, &mu).unwrap();
//! assert!(lq_exponent(&nu, 2.0).unwrap() > lq_exponent(&mu, 2.0).unwrap());
//! ```

pub mod convolve;
pub mod dimension;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod measure;
pub mod numeric;
pub mod regularity;
pub mod sumsets;
pub mod uniformity;

pub use convolve::{convolve, convolve_with, ConvolutionMethod, ConvolveOptions};
pub use dimension::{
    estimate_from_measures, exponent, linf_dimension_estimate, linf_exponent,
    lq_dimension_estimate, lq_exponent, DimensionEstimate, QOrder, ScaleValue,
};
pub use error::{Error, Result};
pub use generators::{generate, generate_ahlfors_example, generate_digit_blocks, MeasureSpec};
pub use measure::{density_lq_norm, discretize, linf_norm, lq_norm, DyadicMeasure, DyadicSet};
