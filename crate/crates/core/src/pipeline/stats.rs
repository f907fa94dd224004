//! Sanity checks on extracted bit streams.
//!
//! These are coarse health tests, not a certification suite: a monobit
//! frequency test, a byte-value chi-square test, and serial autocorrelation
//! out to lag 100. All thresholds sit at the 0.001 significance level, with
//! the autocorrelation family Bonferroni-corrected so a healthy stream fails
//! any single check with probability about 1e-3.

use crate::error::{Error, Result};
use crate::pipeline::extract::BitString;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Fewest bits the checks accept; below this the asymptotics are unreliable.
pub const MIN_BITS: usize = 10_000;

/// Two-sided normal critical value at significance 0.001.
pub const MONOBIT_Z_CRITICAL: f64 = 3.2905;

/// Smallest acceptable chi-square p-value for the byte histogram.
pub const CHI_SQUARE_P_MIN: f64 = 0.001;

/// Largest lag examined by the autocorrelation scan.
pub const MAX_LAG: usize = 100;

/// Two-sided normal critical value at 0.001 Bonferroni-split over
/// [`MAX_LAG`] lags (0.00001 per lag).
pub const LAG_FAMILY_Z_CRITICAL: f64 = 4.4172;

/// One lag of the serial autocorrelation scan. `flagged` marks lags that
/// would fail at the single-test threshold; the family verdict in
/// [`UniformityReport`] uses the Bonferroni-corrected one.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    pub coefficient: f64,
    pub z_score: f64,
    pub flagged: bool,
}

/// Outcome of all stream checks. `pass` is the conjunction of the three
/// verdict fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub bit_count: usize,
    pub ones_fraction: f64,
    pub monobit_z: f64,
    pub monobit_pass: bool,
    pub chi_square_stat: f64,
    pub chi_square_p: f64,
    pub chi_square_pass: bool,
    pub lag_correlations: Vec<LagCorrelation>,
    pub max_abs_lag_z: f64,
    pub autocorrelation_pass: bool,
    pub pass: bool,
}

/// Runs the monobit, byte chi-square, and autocorrelation checks over a bit
/// stream of at least [`MIN_BITS`] bits.
pub fn uniformity_checks(bits: &BitString) -> Result<UniformityReport> {
    let n = bits.len();
    if n < MIN_BITS {
        return Err(Error::InvalidConfig(format!(
            "uniformity checks need at least {MIN_BITS} bits (got {n})"
        )));
    }
    let ones = bits.count_ones();
    if ones == 0 || ones == n {
        return Err(Error::ConstantInput);
    }
    let p_hat = ones as f64 / n as f64;

    let monobit_z = (2.0 * ones as f64 - n as f64) / (n as f64).sqrt();
    let monobit_pass = monobit_z.abs() <= MONOBIT_Z_CRITICAL;

    let (chi_square_stat, chi_square_p) = byte_chi_square(bits);
    let chi_square_pass = chi_square_p >= CHI_SQUARE_P_MIN;

    let mut lag_correlations = Vec::with_capacity(MAX_LAG);
    let mut max_abs_lag_z = 0.0f64;
    for lag in 1..=MAX_LAG {
        let pairs = (n - lag) as f64;
        let both = bits.overlap_ones(lag) as f64;
        let lead = bits.count_ones_range(0, n - lag) as f64;
        let trail = bits.count_ones_range(lag, n - lag) as f64;
        let covariance = both - p_hat * (lead + trail) + pairs * p_hat * p_hat;
        let coefficient = covariance / (pairs * p_hat * (1.0 - p_hat));
        let z_score = coefficient * pairs.sqrt();
        max_abs_lag_z = max_abs_lag_z.max(z_score.abs());
        lag_correlations.push(LagCorrelation {
            lag,
            coefficient,
            z_score,
            flagged: z_score.abs() > MONOBIT_Z_CRITICAL,
        });
    }
    let autocorrelation_pass = max_abs_lag_z <= LAG_FAMILY_Z_CRITICAL;

    Ok(UniformityReport {
        bit_count: n,
        ones_fraction: p_hat,
        monobit_z,
        monobit_pass,
        chi_square_stat,
        chi_square_p,
        chi_square_pass,
        pass: monobit_pass && chi_square_pass && autocorrelation_pass,
        lag_correlations,
        max_abs_lag_z,
        autocorrelation_pass,
    })
}

/// Chi-square over the 256 byte values of every complete byte in the stream.
fn byte_chi_square(bits: &BitString) -> (f64, f64) {
    let bytes = bits.to_bytes();
    let whole = bits.len() / 8;
    let mut counts = [0u64; 256];
    for &b in &bytes[..whole] {
        counts[b as usize] += 1;
    }
    let expected = whole as f64 / 256.0;
    let stat: f64 =
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new(255.0).expect("static degrees of freedom");
    let p = 1.0 - dist.cdf(stat);
    (stat, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_bits(n: usize, seed: u64) -> BitString {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut bits = BitString::with_capacity(n);
        let mut left = n;
        while left > 0 {
            let take = left.min(64);
            bits.push_bits(rng.random::<u64>(), take as u32);
            left -= take;
        }
        bits
    }

    #[test]
    fn a_good_stream_passes_everything() {
        let report = uniformity_checks(&random_bits(200_000, 42)).unwrap();
        assert!(report.monobit_pass, "z = {}", report.monobit_z);
        assert!(report.chi_square_pass, "p = {}", report.chi_square_p);
        assert!(report.autocorrelation_pass, "max |z| = {}", report.max_abs_lag_z);
        assert!(report.pass);
        assert_eq!(report.lag_correlations.len(), MAX_LAG);
        assert!((report.ones_fraction - 0.5).abs() < 0.01);
    }

    #[test]
    fn biased_bits_fail_the_monobit_test() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut bits = BitString::with_capacity(50_000);
        for _ in 0..50_000 {
            bits.push(rng.random::<f64>() < 0.6);
        }
        let report = uniformity_checks(&bits).unwrap();
        assert!(!report.monobit_pass);
        assert!(!report.pass);
    }

    #[test]
    fn alternating_bits_fail_the_autocorrelation_scan() {
        let mut bits = BitString::with_capacity(20_000);
        for i in 0..20_000 {
            bits.push(i % 2 == 0);
        }
        let report = uniformity_checks(&bits).unwrap();
        assert!(report.monobit_pass);
        assert!(!report.autocorrelation_pass);
        assert!(!report.pass);
        // Lag 1 correlation of a strict alternation is exactly -1.
        assert!((report.lag_correlations[0].coefficient + 1.0).abs() < 1e-12);
        assert!(report.lag_correlations[0].flagged);
    }

    #[test]
    fn a_repeating_byte_fails_the_chi_square_test() {
        // 0xAA is half ones, so the monobit test is blind to it.
        let bits = BitString::from_bytes(&vec![0xAAu8; 4_000], 32_000);
        let report = uniformity_checks(&bits).unwrap();
        assert!(report.monobit_pass);
        assert!(!report.chi_square_pass);
        assert!(!report.pass);
    }

    #[test]
    fn constant_streams_are_rejected() {
        let bits = BitString::zeros(20_000);
        assert!(matches!(uniformity_checks(&bits).unwrap_err(), Error::ConstantInput));
    }

    #[test]
    fn short_streams_are_rejected() {
        let bits = random_bits(MIN_BITS - 1, 1);
        assert!(matches!(uniformity_checks(&bits).unwrap_err(), Error::InvalidConfig(_)));
    }
}
