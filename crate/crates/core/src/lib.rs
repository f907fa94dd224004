//! Secure-randomness analysis for a Gaussian-noise quantum source read out
//! through a saturating analog-to-digital converter.
//!
//! The measured voltage is modeled as quantum noise of unit amplitude plus
//! independent Gaussian classical noise and a fixed offset; an adversary is
//! assumed to know the classical noise exactly. This crate quantifies the
//! min-entropy of the digitized codes under that model, finds the converter
//! range that maximizes it, and provides the processing pipeline that turns
//! raw captures into near-uniform output bits.
//!
//! All analog quantities are in quantum units (the quantum noise amplitude
//! is 1) unless a name says otherwise; [`pipeline::calibrate`] converts raw
//! code-unit statistics into these units.
//!
//! # Quick example
//!
//! ```
//! use qrng_entropy::{optimized_report, ExcursionBound, NoiseModel};
//!
//! let model = NoiseModel::from_qcnr_db(10.0)?;
//! let bound = ExcursionBound::new(10.0, 0.0)?;
//! let report = optimized_report(&model, 8, &bound)?;
//! assert!(report.h_min_worst > 5.0);
//! assert!(report.h_min_avg > report.h_min_worst);
//! assert!(report.optimal_r_worst.is_some());
//! # Ok::<(), qrng_entropy::Error>(())
//! ```

pub mod adc_model;
pub mod entropy;
pub mod error;
pub mod noise_model;
pub mod numerics;
pub mod pipeline;
pub mod range_optimizer;
mod serde_ext;

pub use adc_model::{
    discretize_conditional, discretize_marginal, max_conditional_prob, AdcConfig,
    DiscreteDistribution,
};
pub use entropy::{
    guess_prob_average, min_entropy_average, min_entropy_unconditional, min_entropy_worst_case,
    nyquist_rate, photon_entropy_ceiling, EntropyReport, ExcursionBound,
};
pub use error::{Error, Result};
pub use noise_model::{qcnr_to_sigma_e, sigma_e_to_qcnr, NoiseModel};
pub use range_optimizer::{
    optimize_r_average, optimize_r_worst_case, optimized_report, solve_crossovers,
    OptimizationResult,
};
