//! Robust linear least-squares regression by soft truncation.
//!
//! The crate provides
//!
//! * the soft truncation function and the truncated criterion comparing two
//!   coefficient vectors ([`truncation`]);
//! * ordinary and ridge least squares, a soft-truncated mean, and the
//!   iterative min-max truncated estimator with its truncation-scale
//!   search ([`estimators`]);
//! * Gram spectra, effective ridge dimension and kurtosis-type coefficient
//!   estimates and bounds ([`moments`]);
//! * synthetic designs with exactly computable excess risk ([`synthetic`]).
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod moments;
pub mod scalar;
pub mod synthetic;
pub mod truncation;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use estimators::{
    least_squares_fit, minmax_truncated_fit, ridge_fit, robust_mean, select_alpha_and_fit,
    AlphaGrid, FitResult, IterationRecord, Refinement, Step, DEFAULT_ETA_RANKS,
};
pub use moments::{
    bounded_design_bounds, density_ratio_rescale, effective_dimension, empirical_coefficients,
    gaussian_design_coeffs, gram_matrix, independent_design_chi_bound, theoretical_alpha,
    CoefficientSet, GramSpectrum,
};
pub use scalar::Real;
pub use synthetic::{
    build_oracle, excess_risk, generate_dataset, sample_noise, stream_rng, DesignKind,
    DesignOracle, NoiseKind, NoiseSpec, DEFAULT_NOISE_SIGMA, DEFAULT_TAIL_EXPONENT,
};
pub use truncation::{criterion, influence_score, penalized_risk_subset, psi, TruncationParams};

pub type Dataset64 = Dataset<f64>;
pub type FitResult64 = FitResult<f64>;
pub type TruncationParams64 = TruncationParams<f64>;
pub type AlphaGrid64 = AlphaGrid<f64>;
pub type CoefficientSet64 = CoefficientSet<f64>;
pub type GramSpectrum64 = GramSpectrum<f64>;
pub type DesignOracle64 = DesignOracle<f64>;

pub type Dataset32 = Dataset<f32>;
pub type FitResult32 = FitResult<f32>;
