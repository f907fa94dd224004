//! End-to-end processing: acquire (simulate or ingest), calibrate, condition,
//! extract, and check digitized samples.
//!
//! The stages compose around [`SampleBlock`], a stream of signed converter
//! codes tagged with the geometry that produced them. Code units and quantum
//! units meet in [`calibrate`]: raw captures carry statistics in code units,
//! and the fitted [`NoiseModel`] rescales them so the quantum amplitude is 1.

pub mod extract;
pub mod io;
pub mod stats;

pub use extract::{
    extract, BitString, ExtractionOutput, ExtractorConfig, ExtractorKind, SizingMode,
};
pub use io::{
    read_raw_samples, seed_fingerprint, sha256_hex, write_raw_samples, RunManifest,
    SampleDescriptor,
};
pub use stats::{uniformity_checks, LagCorrelation, UniformityReport};

use crate::adc_model::AdcConfig;
use crate::error::{Error, Result};
use crate::noise_model::NoiseModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Where a sample stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Simulated,
    Ingested,
}

/// A stream of converter codes plus the geometry that produced them.
#[derive(Debug, Clone)]
pub struct SampleBlock {
    pub samples: Vec<i32>,
    pub adc: AdcConfig,
    pub provenance: Provenance,
    pub calibration: Option<CalibrationRecord>,
}

/// Statistics fitted from a signal-on plus quantum-blocked capture pair.
/// The `_code` fields are in converter code units (one code = one bin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub mean_code: f64,
    pub sigma_m_code: f64,
    pub sigma_e_code: f64,
    pub sigma_q_code: f64,
    /// Quantum-to-classical noise ratio in dB; infinite when the blocked
    /// capture shows no variance at all.
    #[serde(with = "crate::serde_ext::ext_real")]
    pub qcnr_db: f64,
    /// Fitted mean offset in quantum units.
    pub delta_offset: f64,
    pub samples_signal_on: u64,
    pub samples_blocked: u64,
}

/// A fitted noise model together with the raw statistics behind it and any
/// data-quality warnings raised while fitting.
#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub model: NoiseModel,
    pub record: CalibrationRecord,
    pub warnings: Vec<String>,
}

/// Fewest samples per capture before calibration warns about statistical
/// resolution.
pub const MIN_CALIBRATION_SAMPLES: usize = 10_000;

/// Saturated-code fraction above which calibration warns about clipping.
pub const SATURATION_WARN_FRACTION: f64 = 0.01;

fn normal_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Draws `count` digitized measurements of the full signal (quantum plus
/// classical noise plus offset) through the converter. Deterministic in
/// `seed` across platforms.
pub fn simulate_samples(
    model: &NoiseModel,
    adc: &AdcConfig,
    count: usize,
    seed: u64,
) -> Result<SampleBlock> {
    if model.has_infinite_classical_noise() {
        return Err(Error::DegenerateModel(
            "cannot draw samples with infinite classical noise".into(),
        ));
    }
    let mut rng = normal_rng(seed);
    let sigma_e = model.sigma_e();
    let delta = model.delta_offset();
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let q: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        samples.push(adc.digitize(delta + q + sigma_e * e));
    }
    Ok(SampleBlock {
        samples,
        adc: *adc,
        provenance: Provenance::Simulated,
        calibration: None,
    })
}

/// Draws `count` digitized measurements with the quantum signal blocked:
/// classical noise plus offset only. Pairs with [`simulate_samples`] to
/// exercise [`calibrate`].
pub fn simulate_blocked_samples(
    model: &NoiseModel,
    adc: &AdcConfig,
    count: usize,
    seed: u64,
) -> Result<SampleBlock> {
    if model.has_infinite_classical_noise() {
        return Err(Error::DegenerateModel(
            "cannot draw samples with infinite classical noise".into(),
        ));
    }
    let mut rng = normal_rng(seed);
    let sigma_e = model.sigma_e();
    let delta = model.delta_offset();
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let e: f64 = rng.sample(StandardNormal);
        samples.push(adc.digitize(delta + sigma_e * e));
    }
    Ok(SampleBlock {
        samples,
        adc: *adc,
        provenance: Provenance::Simulated,
        calibration: None,
    })
}

fn mean_and_population_variance(samples: &[i32]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&s| s as f64).sum::<f64>() / n;
    let var = samples.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn saturated_fraction(samples: &[i32], adc: &AdcConfig) -> f64 {
    let hits = samples
        .iter()
        .filter(|&&s| s == adc.min_code() || s == adc.max_code())
        .count();
    hits as f64 / samples.len() as f64
}

/// Fits a noise model from a signal-on capture and a quantum-blocked capture
/// taken with the same converter settings.
///
/// The signal-on variance estimates the total noise power and the blocked
/// variance the classical part; their difference is the quantum power, which
/// sets the code-to-quantum-unit scale. Captures whose variances leave no
/// quantum excess are rejected with [`Error::NoQuantumClearance`].
pub fn calibrate(
    signal_on: &[i32],
    blocked: &[i32],
    adc: &AdcConfig,
) -> Result<CalibrationOutcome> {
    if signal_on.len() < 2 || blocked.len() < 2 {
        return Err(Error::InvalidConfig(
            "calibration needs at least two samples in each capture".into(),
        ));
    }
    let (mean_on, var_on) = mean_and_population_variance(signal_on);
    let (_, var_blocked) = mean_and_population_variance(blocked);
    if var_on <= var_blocked {
        return Err(Error::NoQuantumClearance { signal_on: var_on, blocked: var_blocked });
    }
    let sigma_q_code = (var_on - var_blocked).sqrt();
    let sigma_e_code = var_blocked.sqrt();
    let sigma_e = sigma_e_code / sigma_q_code;
    let delta_offset = mean_on / sigma_q_code;
    let model = NoiseModel::from_sigma_e(sigma_e)?.with_offset(delta_offset)?;

    let mut warnings = Vec::new();
    if signal_on.len() < MIN_CALIBRATION_SAMPLES {
        warnings.push(format!(
            "signal-on capture has {} samples; variance estimates are unreliable below {}",
            signal_on.len(),
            MIN_CALIBRATION_SAMPLES
        ));
    }
    if blocked.len() < MIN_CALIBRATION_SAMPLES {
        warnings.push(format!(
            "blocked capture has {} samples; variance estimates are unreliable below {}",
            blocked.len(),
            MIN_CALIBRATION_SAMPLES
        ));
    }
    let saturated = saturated_fraction(signal_on, adc);
    if saturated > SATURATION_WARN_FRACTION {
        warnings.push(format!(
            "{:.2}% of signal-on samples sit in a saturated end bin; variance estimates are \
             biased toward a narrower signal",
            100.0 * saturated
        ));
    }

    let record = CalibrationRecord {
        mean_code: mean_on,
        sigma_m_code: var_on.sqrt(),
        sigma_e_code,
        sigma_q_code,
        qcnr_db: model.qcnr_db(),
        delta_offset,
        samples_signal_on: signal_on.len() as u64,
        samples_blocked: blocked.len() as u64,
    };
    Ok(CalibrationOutcome { model, record, warnings })
}

/// Drops the `n - keep_bits` most significant bits of every code, keeping the
/// low `keep_bits` as a narrower two's-complement code.
///
/// The surviving bits describe a converter with the same bin width and
/// proportionally smaller range, which is what the returned block advertises.
/// Calibration metadata describes the pre-discard capture and is not carried
/// over.
pub fn discard_msbs(block: &SampleBlock, keep_bits: u32) -> Result<SampleBlock> {
    let n_bits = block.adc.n_bits();
    if keep_bits == 0 || keep_bits > n_bits {
        return Err(Error::InvalidConfig(format!(
            "keep_bits must lie in [1, {n_bits}] (got {keep_bits})"
        )));
    }
    let adc = AdcConfig::new(
        keep_bits,
        block.adc.bin_width() * f64::from(1u32 << (keep_bits - 1)),
    )?;
    if keep_bits == n_bits {
        return Ok(SampleBlock {
            samples: block.samples.clone(),
            adc,
            provenance: block.provenance,
            calibration: None,
        });
    }
    let mask = (1u32 << keep_bits) - 1;
    let sign_bit = 1u32 << (keep_bits - 1);
    let samples = block
        .samples
        .iter()
        .map(|&s| {
            let u = s as u32 & mask;
            if u & sign_bit != 0 { (u | !mask) as i32 } else { u as i32 }
        })
        .collect();
    Ok(SampleBlock { samples, adc, provenance: block.provenance, calibration: None })
}

/// Min-entropy credited to a sample after discarding its high bits: the
/// discarded bits are assumed to leak entirely, and the result is clamped to
/// what `keep_bits` bits can hold.
pub fn entropy_after_discard(h_min: f64, n_bits: u32, keep_bits: u32) -> f64 {
    debug_assert!(keep_bits >= 1 && keep_bits <= n_bits);
    (h_min - f64::from(n_bits - keep_bits)).clamp(0.0, f64::from(keep_bits))
}

/// Serial autocorrelation of a code stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Autocorrelation {
    /// Coefficients for lags 1 through `coefficients.len()`.
    pub coefficients: Vec<f64>,
    /// Approximate standard deviation of each coefficient under
    /// independence: `1/sqrt(N)`.
    pub reference_sigma: f64,
}

/// Sample autocorrelation `r_k` of the codes for lags 1 through `max_lag`,
/// normalized by the population variance.
pub fn autocorrelation(samples: &[i32], max_lag: usize) -> Result<Autocorrelation> {
    let n = samples.len();
    if max_lag == 0 || max_lag >= n {
        return Err(Error::InvalidConfig(format!(
            "max_lag must lie in [1, {}] (got {max_lag})",
            n.saturating_sub(1)
        )));
    }
    let (mean, var) = mean_and_population_variance(samples);
    if var == 0.0 {
        return Err(Error::ConstantInput);
    }
    let centered: Vec<f64> = samples.iter().map(|&s| s as f64 - mean).collect();
    let coefficients = (1..=max_lag)
        .map(|k| {
            let cross: f64 =
                centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
            cross / ((n - k) as f64 * var)
        })
        .collect();
    Ok(Autocorrelation { coefficients, reference_sigma: 1.0 / (n as f64).sqrt() })
}

/// Extractable bits under the leftover hash lemma: `floor(t - 2*log2(1/eps))`
/// output bits are within trace distance `eps` of uniform given `t` bits of
/// block min-entropy, floored at zero.
pub fn lhl_output_length(block_entropy_bits: f64, epsilon: f64) -> Result<usize> {
    if !block_entropy_bits.is_finite() || block_entropy_bits < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "block entropy must be finite and >= 0 (got {block_entropy_bits})"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1) (got {epsilon})")));
    }
    let length = (block_entropy_bits + 2.0 * epsilon.log2()).floor();
    Ok(if length > 0.0 { length as usize } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulation_is_deterministic_in_the_seed() {
        let model = NoiseModel::from_qcnr_db(10.0).unwrap();
        let adc = AdcConfig::new(8, 4.0).unwrap();
        let a = simulate_samples(&model, &adc, 500, 7).unwrap();
        let b = simulate_samples(&model, &adc, 500, 7).unwrap();
        let c = simulate_samples(&model, &adc, 500, 8).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.provenance, Provenance::Simulated);
    }

    #[test]
    fn simulated_codes_stay_in_range_and_track_the_offset() {
        let model =
            NoiseModel::from_qcnr_db(10.0).unwrap().with_offset(0.3).unwrap();
        let adc = AdcConfig::new(8, 4.0).unwrap();
        let block = simulate_samples(&model, &adc, 100_000, 11).unwrap();
        assert!(block
            .samples
            .iter()
            .all(|&s| s >= adc.min_code() && s <= adc.max_code()));
        let mean =
            block.samples.iter().map(|&s| s as f64).sum::<f64>() / block.samples.len() as f64;
        let expected = 0.3 / adc.bin_width();
        let tolerance = 5.0 * (model.sigma_m() / adc.bin_width()) / (100_000f64).sqrt();
        assert!((mean - expected).abs() < tolerance, "mean {mean} vs {expected}");
    }

    #[test]
    fn blocked_simulation_carries_only_classical_noise() {
        let model = NoiseModel::from_sigma_e(0.5).unwrap();
        let adc = AdcConfig::new(12, 4.0).unwrap();
        let block = simulate_blocked_samples(&model, &adc, 200_000, 3).unwrap();
        let (_, var) = mean_and_population_variance(&block.samples);
        let expected = (0.5 / adc.bin_width()).powi(2);
        assert!((var / expected - 1.0).abs() < 0.02, "var {var} vs {expected}");
    }

    #[test]
    fn infinite_classical_noise_cannot_be_simulated() {
        let model = NoiseModel::from_sigma_e(f64::INFINITY).unwrap();
        let adc = AdcConfig::new(8, 4.0).unwrap();
        assert!(matches!(
            simulate_samples(&model, &adc, 10, 0).unwrap_err(),
            Error::DegenerateModel(_)
        ));
        assert!(simulate_blocked_samples(&model, &adc, 10, 0).is_err());
    }

    #[test]
    fn calibration_recovers_the_simulated_model() {
        let truth =
            NoiseModel::from_qcnr_db(13.52).unwrap().with_offset(0.1).unwrap();
        let adc = AdcConfig::new(16, 4.32).unwrap();
        let on = simulate_samples(&truth, &adc, 1_000_000, 21).unwrap();
        let blocked = simulate_blocked_samples(&truth, &adc, 1_000_000, 22).unwrap();
        let outcome = calibrate(&on.samples, &blocked.samples, &adc).unwrap();
        assert!(outcome.warnings.is_empty(), "{:?}", outcome.warnings);
        assert!(
            (outcome.model.qcnr_db() - 13.52).abs() < 0.05,
            "qcnr {}",
            outcome.model.qcnr_db()
        );
        assert!(
            (outcome.model.delta_offset() - 0.1).abs() < 0.01,
            "offset {}",
            outcome.model.delta_offset()
        );
        let expected_sigma_q = 1.0 / adc.bin_width();
        assert!((outcome.record.sigma_q_code / expected_sigma_q - 1.0).abs() < 0.01);
        assert_eq!(outcome.record.samples_signal_on, 1_000_000);
    }

    #[test]
    fn captures_without_quantum_excess_are_rejected() {
        // Blocked capture wider than signal-on: no quantum power to fit.
        let on: Vec<i32> = (0..1000).map(|i| i % 2).collect();
        let blocked: Vec<i32> = (0..1000).map(|i| if i % 2 == 0 { 5 } else { -5 }).collect();
        let adc = AdcConfig::new(8, 4.0).unwrap();
        match calibrate(&on, &blocked, &adc).unwrap_err() {
            Error::NoQuantumClearance { signal_on, blocked } => {
                assert!(signal_on < blocked);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn thin_and_clipped_captures_raise_warnings() {
        let adc = AdcConfig::new(8, 4.0).unwrap();
        let mut on: Vec<i32> = Vec::new();
        for _ in 0..50 {
            on.extend_from_slice(&[adc.max_code(), adc.min_code(), 0, 0]);
        }
        let blocked: Vec<i32> = (0..200).map(|i| i % 2).collect();
        let outcome = calibrate(&on, &blocked, &adc).unwrap();
        assert_eq!(outcome.warnings.len(), 3, "{:?}", outcome.warnings);
        assert!(outcome.warnings.iter().any(|w| w.contains("saturated")));
    }

    #[test]
    fn msb_discard_masks_and_sign_extends() {
        let adc = AdcConfig::new(16, 4.32).unwrap();
        let block = SampleBlock {
            samples: vec![-4095, -1, 2047, 0, -2048],
            adc,
            provenance: Provenance::Ingested,
            calibration: None,
        };
        let kept = discard_msbs(&block, 12).unwrap();
        // -4095 is 0xF001; its low 12 bits are 0x001.
        assert_eq!(kept.samples, vec![1, -1, 2047, 0, -2048]);
        assert_eq!(kept.adc.n_bits(), 12);
        assert!((kept.adc.bin_width() - adc.bin_width()).abs() < 1e-15);
        assert!((kept.adc.range_r() - adc.bin_width() * 2048.0).abs() < 1e-12);
        assert_eq!(kept.provenance, Provenance::Ingested);
    }

    #[test]
    fn keeping_every_bit_is_a_no_op_on_the_codes() {
        let adc = AdcConfig::new(8, 2.0).unwrap();
        let block = SampleBlock {
            samples: vec![-128, -7, 0, 127],
            adc,
            provenance: Provenance::Simulated,
            calibration: None,
        };
        let kept = discard_msbs(&block, 8).unwrap();
        assert_eq!(kept.samples, block.samples);
        assert_eq!(kept.adc, adc);
    }

    #[test]
    fn msb_discard_validates_the_kept_width() {
        let adc = AdcConfig::new(8, 2.0).unwrap();
        let block =
            SampleBlock { samples: vec![0], adc, provenance: Provenance::Simulated, calibration: None };
        assert!(discard_msbs(&block, 0).is_err());
        assert!(discard_msbs(&block, 9).is_err());
    }

    #[test]
    fn discarded_bits_are_debited_from_the_entropy_budget() {
        assert!((entropy_after_discard(13.6, 16, 12) - 9.6).abs() < 1e-12);
        // Ceiling: no more credit than the kept width.
        assert_eq!(entropy_after_discard(16.0, 16, 12), 12.0);
        // Floor: never negative.
        assert_eq!(entropy_after_discard(3.0, 16, 12), 0.0);
    }

    #[test]
    fn alternating_codes_have_lag_one_autocorrelation_minus_one() {
        let samples: Vec<i32> = (0..1000).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let ac = autocorrelation(&samples, 4).unwrap();
        assert!((ac.coefficients[0] + 1.0).abs() < 1e-12);
        assert!((ac.coefficients[1] - 1.0).abs() < 1e-12);
        assert!((ac.reference_sigma - (1000f64).sqrt().recip()).abs() < 1e-15);
    }

    #[test]
    fn independent_codes_have_small_autocorrelation() {
        let model = NoiseModel::from_qcnr_db(10.0).unwrap();
        let adc = AdcConfig::new(12, 4.0).unwrap();
        let block = simulate_samples(&model, &adc, 100_000, 31).unwrap();
        let ac = autocorrelation(&block.samples, 50).unwrap();
        for (i, r) in ac.coefficients.iter().enumerate() {
            assert!(r.abs() < 5.0 * ac.reference_sigma, "lag {} r {r}", i + 1);
        }
    }

    #[test]
    fn degenerate_autocorrelation_inputs_are_rejected() {
        assert!(matches!(
            autocorrelation(&[3; 100], 5).unwrap_err(),
            Error::ConstantInput
        ));
        assert!(autocorrelation(&[1, 2, 3], 3).is_err());
        assert!(autocorrelation(&[1, 2, 3], 0).is_err());
    }

    #[test]
    fn leftover_hash_lengths_match_hand_computations() {
        assert_eq!(lhl_output_length(128.0, 2f64.powi(-32)).unwrap(), 64);
        assert_eq!(lhl_output_length(2457.6, 2f64.powi(-64)).unwrap(), 2329);
        assert_eq!(lhl_output_length(100.0, 2f64.powi(-64)).unwrap(), 0);
        assert_eq!(lhl_output_length(0.0, 0.5).unwrap(), 0);
        assert!(lhl_output_length(f64::INFINITY, 0.5).is_err());
        assert!(lhl_output_length(-1.0, 0.5).is_err());
        assert!(lhl_output_length(10.0, 0.0).is_err());
        assert!(lhl_output_length(10.0, 1.0).is_err());
    }

    #[test]
    fn longer_blocks_never_extract_fewer_bits() {
        let eps = 2f64.powi(-64);
        let mut last = 0;
        for t in [130.0, 200.0, 500.0, 1000.0, 2457.6] {
            let len = lhl_output_length(t, eps).unwrap();
            assert!(len >= last);
            last = len;
        }
    }
}
