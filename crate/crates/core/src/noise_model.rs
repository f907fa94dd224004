//! Continuous signal model for a Gaussian quantum noise source with additive
//! Gaussian classical noise and a constant dc offset.
//!
//! Everything is expressed in quantum-noise units: the quantum component has
//! unit standard deviation, so the measured signal is M = Q + E + Delta with
//! Q ~ N(0, 1) and E ~ N(0, sigma_e^2). The classical noise strength may be
//! zero (a noiseless source) or infinite (a classical-noise-dominated source);
//! both extremes are representable states, not errors.

use crate::error::{Error, Result};
use crate::numerics::std_normal_pdf;

/// Converts a quantum-to-classical noise ratio in dB into the classical noise
/// standard deviation in quantum-noise units. `+inf` dB maps to 0 and
/// `-inf` dB maps to `+inf`.
pub fn qcnr_to_sigma_e(qcnr_db: f64) -> f64 {
    10f64.powf(-qcnr_db / 20.0)
}

/// Converts a classical noise standard deviation (quantum-noise units) into
/// the quantum-to-classical noise ratio in dB. 0 maps to `+inf` dB and
/// `+inf` maps to `-inf` dB.
pub fn sigma_e_to_qcnr(sigma_e: f64) -> f64 {
    -20.0 * sigma_e.log10()
}

/// Gaussian source model in quantum-noise units (sigma_q = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_e: f64,
    delta_offset: f64,
}

impl NoiseModel {
    /// Builds a model from the classical noise standard deviation, which must
    /// be non-negative and may be `+inf`.
    pub fn from_sigma_e(sigma_e: f64) -> Result<Self> {
        if sigma_e.is_nan() || sigma_e < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "classical noise sigma must be >= 0 (got {sigma_e})"
            )));
        }
        Ok(Self { sigma_e, delta_offset: 0.0 })
    }

    /// Builds a model from the quantum-to-classical noise ratio in dB, which
    /// may be `+inf` (no classical noise) or `-inf` (classical noise only).
    pub fn from_qcnr_db(qcnr_db: f64) -> Result<Self> {
        if qcnr_db.is_nan() {
            return Err(Error::InvalidConfig("QCNR must not be NaN".into()));
        }
        Self::from_sigma_e(qcnr_to_sigma_e(qcnr_db))
    }

    /// Returns the model with the dc offset set to `delta` (quantum-noise
    /// units). The offset must be finite.
    pub fn with_offset(mut self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidConfig(format!("dc offset must be finite (got {delta})")));
        }
        self.delta_offset = delta;
        Ok(self)
    }

    pub fn sigma_e(&self) -> f64 {
        self.sigma_e
    }

    pub fn delta_offset(&self) -> f64 {
        self.delta_offset
    }

    /// Quantum-to-classical noise ratio in dB.
    pub fn qcnr_db(&self) -> f64 {
        sigma_e_to_qcnr(self.sigma_e)
    }

    /// Standard deviation of the total measured signal, sqrt(1 + sigma_e^2).
    pub fn sigma_m(&self) -> f64 {
        if self.sigma_e.is_infinite() {
            f64::INFINITY
        } else {
            (1.0 + self.sigma_e * self.sigma_e).sqrt()
        }
    }

    /// True when the classical noise swamps the quantum signal entirely.
    pub fn has_infinite_classical_noise(&self) -> bool {
        self.sigma_e.is_infinite()
    }

    /// Density of the total measured signal M = Q + E + Delta at `m`.
    ///
    /// Errors with a degenerate-model report when the classical noise is
    /// infinite, since no finite density exists there.
    pub fn measurement_pdf(&self, m: f64) -> Result<f64> {
        if self.has_infinite_classical_noise() {
            return Err(Error::DegenerateModel(
                "infinite classical noise admits no measurement density".into(),
            ));
        }
        let sm = self.sigma_m();
        Ok(std_normal_pdf((m - self.delta_offset) / sm) / sm)
    }

    /// Density of the measured signal at `m` conditioned on the classical
    /// noise taking the value `e`: a unit-width Gaussian centred on
    /// `e + delta_offset`.
    pub fn conditional_pdf(&self, m: f64, e: f64) -> f64 {
        std_normal_pdf(m - e - self.delta_offset)
    }
}
