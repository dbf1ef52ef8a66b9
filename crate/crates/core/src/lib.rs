//! Random Fourier features for kernel derivatives.
//!
//! A shift-invariant kernel k(x, y) = h(x - y) with spectral density p(w)
//! satisfies, for multi-indices p and q,
//!
//! ```text
//! d^p_x d^q_y k(x, y) = E_w [ w^(p+q) (-1)^|q| cos(pi |p+q| / 2 + w.(x - y)) ]
//! ```
//!
//! so the derivative is estimable by the same Monte-Carlo device as the
//! kernel itself: draw m frequencies, average. This crate provides
//!
//! - [`spectral`]: product spectral measures (Gaussian and generalized
//!   Gaussian marginals), their absolute moments, frequency sampling, and
//!   moment-growth certification for the deviation bound's Bernstein
//!   condition;
//! - [`features`]: the 2m-dimensional feature maps whose inner products
//!   reproduce the estimator, and the estimator itself;
//! - [`oracle`]: exact derivatives via closed forms (Gaussian) or adaptive
//!   quadrature (general marginals), plus finite differences as an
//!   independent check;
//! - [`bounds`]: the finite-sample uniform error bound and its constants;
//! - [`harness`]: grid sup-error measurement, convergence-rate and diameter
//!   studies, bound validation, and reproducible persistence.
//!
//! ```
//! use rffd::{FeatureMap, GridSpec, KernelOracle, MultiIndex, SpectralMeasure};
//!
//! let measure = SpectralMeasure::gaussian(1.0, 1)?;
//! let sample = measure.sample(4000, 7);
//! let p = MultiIndex::new(vec![1]);
//! let q = MultiIndex::new(vec![1]);
//!
//! // Feature maps at x and y approximate the mixed derivative.
//! let phi_x = FeatureMap::new(&sample, p.clone())?.phi(&[0.3])?;
//! let phi_y = FeatureMap::new(&sample, q.clone())?.phi(&[-0.4])?;
//! let approx = phi_x.dot(&phi_y);
//!
//! let exact = KernelOracle::new(measure).exact_derivative(&p, &q, &[0.3], &[-0.4])?;
//! assert!((approx - exact).abs() < 0.1);
//! # Ok::<(), rffd::Error>(())
//! ```

// Published quadrature/inverse-CDF coefficient tables and frozen reference
// values are transcribed with all of their source digits, which can exceed
// f64 round-trip length.
#![allow(clippy::excessive_precision)]

pub mod bounds;
mod error;
pub mod features;
pub mod harness;
pub mod oracle;
mod quadrature;
mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use features::{
    approx_derivative, approx_derivative_at_difference, approx_gram, FeatureMap, PhaseDerivative,
};
pub use harness::{
    diameter_study, load_json, rate_study, save_json, sup_error, validate_bound, DiameterStudy,
    DiameterStudyConfig, ErrorStudy, GridSpec, RateStudyConfig, ValidationConfig,
    ValidationRecord,
};
pub use oracle::{KernelOracle, Method};
pub use spectral::{
    appendix_k, BernsteinReport, CertifiedK, FrequencySample, Marginal, MultiIndex,
    SpectralMeasure, Verdict,
};

/// Version stamp embedded in every persisted study record; bumped on any
/// field change so stale files fail loudly instead of deserializing wrong.
pub const SCHEMA_VERSION: u32 = 1;
