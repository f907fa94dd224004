//! Saturating n-bit quantizer acting on the continuous signal model.
//!
//! The converter spans `[-R, R)` with 2^n bins of width `delta = R / 2^(n-1)`
//! and signed output codes `i` in `[-2^(n-1), 2^(n-1) - 1]`, bin centres at
//! `delta * i`. The two end bins absorb the saturated tails: the lowest bin
//! covers everything below `-R + delta/2` and the highest everything above
//! `R - 3*delta/2`, so out-of-range inputs clamp instead of erroring.

use crate::error::{Error, Result};
use crate::noise_model::NoiseModel;
use crate::numerics::{erf, std_normal_cdf, std_normal_upper_tail};

use std::f64::consts::SQRT_2;
use std::io::Write;

/// Largest supported converter depth; distributions stay explicit (2^n bins).
pub const MAX_BITS: u32 = 24;

/// Geometry of a saturating ADC: resolution and full-scale range in
/// quantum-noise units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    n_bits: u32,
    range_r: f64,
}

impl AdcConfig {
    pub fn new(n_bits: u32, range_r: f64) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&n_bits) {
            return Err(Error::InvalidConfig(format!(
                "adc resolution must be 1..={MAX_BITS} bits (got {n_bits})"
            )));
        }
        if !range_r.is_finite() || range_r <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "adc range must be finite and positive (got {range_r})"
            )));
        }
        Ok(Self { n_bits, range_r })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn range_r(&self) -> f64 {
        self.range_r
    }

    /// Bin width `delta = R / 2^(n-1)`.
    pub fn bin_width(&self) -> f64 {
        self.range_r / (1u64 << (self.n_bits - 1)) as f64
    }

    pub fn bin_count(&self) -> usize {
        1usize << self.n_bits
    }

    pub fn min_code(&self) -> i32 {
        -(1i32 << (self.n_bits - 1))
    }

    pub fn max_code(&self) -> i32 {
        (1i32 << (self.n_bits - 1)) - 1
    }

    /// Centre of bin `i`, at `delta * i`.
    pub fn bin_center(&self, code: i32) -> f64 {
        self.bin_width() * code as f64
    }

    /// Lower edge of the acceptance interval: below `-R + delta/2` every
    /// input lands in the lowest code.
    pub fn lower_acceptance(&self) -> f64 {
        -self.range_r + 0.5 * self.bin_width()
    }

    /// Upper edge of the acceptance interval: above `R - 3*delta/2` every
    /// input lands in the highest code.
    pub fn upper_acceptance(&self) -> f64 {
        self.range_r - 1.5 * self.bin_width()
    }

    /// Bin edges `[lo, hi)` of code `i`; the end bins extend to infinity.
    pub fn bin_edges(&self, code: i32) -> (f64, f64) {
        let delta = self.bin_width();
        let lo = if code == self.min_code() {
            f64::NEG_INFINITY
        } else {
            self.bin_center(code) - 0.5 * delta
        };
        let hi = if code == self.max_code() {
            f64::INFINITY
        } else {
            self.bin_center(code) + 0.5 * delta
        };
        (lo, hi)
    }

    /// Quantizes a finite measurement: round to the nearest bin centre, then
    /// clamp into the code range (saturation, never an error).
    pub fn digitize(&self, m: f64) -> i32 {
        let raw = (m / self.bin_width() + 0.5).floor();
        if raw <= self.min_code() as f64 {
            self.min_code()
        } else if raw >= self.max_code() as f64 {
            self.max_code()
        } else {
            raw as i32
        }
    }
}

/// Probability mass over the 2^n output codes of an [`AdcConfig`].
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    config: AdcConfig,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    fn new(config: AdcConfig, probabilities: Vec<f64>) -> Self {
        debug_assert_eq!(probabilities.len(), config.bin_count());
        Self { config, probabilities }
    }

    pub fn config(&self) -> &AdcConfig {
        &self.config
    }

    /// Probabilities indexed from the lowest code upward.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, code: i32) -> f64 {
        self.probabilities[(code - self.config.min_code()) as usize]
    }

    pub fn max_probability(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Iterates `(code, bin_center, probability)` from the lowest code up.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64, f64)> + '_ {
        let min = self.config.min_code();
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(idx, &p)| {
                let code = min + idx as i32;
                (code, self.config.bin_center(code), p)
            })
    }

    /// Writes `bin_center,probability` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_center,probability")?;
        for (_, center, p) in self.iter() {
            writeln!(w, "{center},{p:e}")?;
        }
        Ok(())
    }
}

/// Gaussian mass on the standardized interval `(a, b)`, evaluated from the
/// smaller tail so far-out bins keep relative accuracy; underflows clamp to 0.
fn gauss_bin_mass(a: f64, b: f64) -> f64 {
    let mass = if a + b > 0.0 {
        std_normal_upper_tail(a) - std_normal_upper_tail(b)
    } else {
        std_normal_cdf(b) - std_normal_cdf(a)
    };
    mass.max(0.0)
}

fn discretize(adc: &AdcConfig, mean: f64, sd: f64) -> DiscreteDistribution {
    let mut probabilities = Vec::with_capacity(adc.bin_count());
    for code in adc.min_code()..=adc.max_code() {
        let (lo, hi) = adc.bin_edges(code);
        let a = if lo == f64::NEG_INFINITY { f64::NEG_INFINITY } else { (lo - mean) / sd };
        let b = if hi == f64::INFINITY { f64::INFINITY } else { (hi - mean) / sd };
        probabilities.push(gauss_bin_mass(a, b));
    }
    DiscreteDistribution::new(*adc, probabilities)
}

/// Output distribution of the converter over the marginal measurement
/// distribution N(delta_offset, sigma_m^2). Infinite classical noise has no
/// distribution to discretize.
pub fn discretize_marginal(model: &NoiseModel, adc: &AdcConfig) -> Result<DiscreteDistribution> {
    if model.has_infinite_classical_noise() {
        return Err(Error::DegenerateModel(
            "infinite classical noise has no marginal distribution".into(),
        ));
    }
    Ok(discretize(adc, model.delta_offset(), model.sigma_m()))
}

/// Output distribution conditioned on the classical noise value `e`: the
/// unit-width Gaussian centred on `e + delta_offset`, pushed through the
/// binning. `e` must be finite.
pub fn discretize_conditional(
    model: &NoiseModel,
    adc: &AdcConfig,
    e: f64,
) -> Result<DiscreteDistribution> {
    if !e.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "conditional noise value must be finite (got {e})"
        )));
    }
    Ok(discretize(adc, e + model.delta_offset(), 1.0))
}

/// Mass of the lowest code when the unit-width signal is centred at total
/// shift `s` from zero: the left saturation branch.
pub(crate) fn branch_left(adc: &AdcConfig, s: f64) -> f64 {
    std_normal_upper_tail(s - adc.lower_acceptance())
}

/// Upper bound on any non-saturated bin's mass: a bin of width `delta`
/// centred exactly on the signal.
pub(crate) fn branch_interior(adc: &AdcConfig) -> f64 {
    erf(adc.bin_width() / (2.0 * SQRT_2))
}

/// Mass of the highest code when the unit-width signal is centred at total
/// shift `s`: the right saturation branch.
pub(crate) fn branch_right(adc: &AdcConfig, s: f64) -> f64 {
    std_normal_upper_tail(adc.upper_acceptance() - s)
}

/// Largest single-code probability available to an observer who knows the
/// total signal displacement `e_shifted` (classical noise plus offset).
///
/// Evaluated in closed form as the maximum of the two saturation branches and
/// the aligned-interior bound. The interior term upper-bounds every
/// non-saturated bin, so for very coarse converters (where no interior bin
/// can actually dominate) the result is conservative: it never understates
/// the guessing probability. `e_shifted` may be infinite, giving mass 1 in a
/// saturated code.
pub fn max_conditional_prob(adc: &AdcConfig, e_shifted: f64) -> f64 {
    branch_left(adc, e_shifted)
        .max(branch_interior(adc))
        .max(branch_right(adc, e_shifted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantum_only() -> NoiseModel {
        NoiseModel::from_sigma_e(0.0).unwrap()
    }

    #[test]
    fn geometry_matches_the_definitions() {
        let adc = AdcConfig::new(8, 2.93).unwrap();
        assert_eq!(adc.bin_count(), 256);
        assert_eq!(adc.min_code(), -128);
        assert_eq!(adc.max_code(), 127);
        assert!((adc.bin_width() - 2.93 / 128.0).abs() < 1e-18);
        assert!((adc.lower_acceptance() + 2.93 - 0.5 * adc.bin_width()).abs() < 1e-15);
        assert!((adc.upper_acceptance() - 2.93 + 1.5 * adc.bin_width()).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_inputs_saturate() {
        let adc = AdcConfig::new(4, 1.0).unwrap();
        assert_eq!(adc.digitize(-50.0), adc.min_code());
        assert_eq!(adc.digitize(50.0), adc.max_code());
        assert_eq!(adc.digitize(0.0), 0);
        let delta = adc.bin_width();
        assert_eq!(adc.digitize(0.49 * delta), 0);
        assert_eq!(adc.digitize(0.51 * delta), 1);
        assert_eq!(adc.digitize(-0.51 * delta), -1);
    }

    #[test]
    fn resolution_bounds_are_enforced() {
        assert!(AdcConfig::new(0, 1.0).is_err());
        assert!(AdcConfig::new(25, 1.0).is_err());
        assert!(AdcConfig::new(8, 0.0).is_err());
        assert!(AdcConfig::new(8, -1.0).is_err());
        assert!(AdcConfig::new(8, f64::INFINITY).is_err());
    }

    #[test]
    fn one_bit_converter_splits_at_minus_half_range() {
        // With n = 1 the two bins meet at -R/2, so a quantum-only signal puts
        // Phi(-1/2) in the low code and 1 - Phi(-1/2) in the high code.
        let adc = AdcConfig::new(1, 1.0).unwrap();
        let dist = discretize_marginal(&quantum_only(), &adc).unwrap();
        assert_eq!(dist.probabilities().len(), 2);
        assert!((dist.probability(-1) - 0.308_537_538_725_986_9).abs() < 1e-15);
        assert!((dist.probability(0) - 0.691_462_461_274_013_1).abs() < 1e-15);
        assert_eq!(adc.digitize(-0.51), -1);
        assert_eq!(adc.digitize(-0.49), 0);
    }

    #[test]
    fn marginal_distribution_is_normalized() {
        for &(n, r, q, d) in
            &[(1, 1.0, 10.0, 0.0), (4, 2.5, 0.0, 0.3), (8, 2.93, 10.0, -0.02), (12, 4.0, 20.0, 0.0)]
        {
            let model = NoiseModel::from_qcnr_db(q).unwrap().with_offset(d).unwrap();
            let adc = AdcConfig::new(n, r).unwrap();
            let dist = discretize_marginal(&model, &adc).unwrap();
            assert!((dist.total_mass() - 1.0).abs() < 1e-10, "n={n} r={r}");
            assert!(dist.probabilities().iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn infinite_classical_noise_has_no_marginal_distribution() {
        let model = NoiseModel::from_qcnr_db(f64::NEG_INFINITY).unwrap();
        let adc = AdcConfig::new(8, 2.93).unwrap();
        assert!(matches!(discretize_marginal(&model, &adc), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn centered_marginal_mirrors_interior_bins() {
        let model = NoiseModel::from_qcnr_db(10.0).unwrap();
        let adc = AdcConfig::new(8, 2.5).unwrap();
        let dist = discretize_marginal(&model, &adc).unwrap();
        // Pairs (i, -i) with both bins interior; the end bins are handled by
        // the strip identity below.
        for code in 1..adc.max_code() {
            let (a, b) = (dist.probability(code), dist.probability(-code));
            assert!((a - b).abs() < 1e-15, "code {code}: {a} vs {b}");
        }
        // The highest code's mirror image is the lowest code plus the strip
        // one bin wide that the asymmetric clipping moves across zero.
        let delta = adc.bin_width();
        let sm = model.sigma_m();
        let strip = gauss_bin_mass((adc.range_r() - 1.5 * delta) / sm, (adc.range_r() - 0.5 * delta) / sm);
        let lhs = dist.probability(adc.max_code());
        let rhs = dist.probability(adc.min_code()) + strip;
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn conditional_shifts_with_the_noise_value() {
        let model = NoiseModel::from_sigma_e(0.3).unwrap().with_offset(0.1).unwrap();
        let adc = AdcConfig::new(8, 3.0).unwrap();
        let dist = discretize_conditional(&model, &adc, 0.4).unwrap();
        assert!((dist.total_mass() - 1.0).abs() < 1e-10);
        // Mass centred on e + delta_offset: the modal bin is the one whose
        // centre is nearest 0.5.
        let modal = dist
            .iter()
            .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
            .unwrap();
        assert_eq!(modal.0, adc.digitize(0.5));
        assert!(discretize_conditional(&model, &adc, f64::INFINITY).is_err());
    }

    #[test]
    fn branch_expressions_match_the_end_bins() {
        let model = NoiseModel::from_sigma_e(0.25).unwrap();
        let adc = AdcConfig::new(6, 2.0).unwrap();
        for &e in &[-1.5, -0.3, 0.0, 0.8, 2.5] {
            let dist = discretize_conditional(&model, &adc, e).unwrap();
            let s = e + model.delta_offset();
            assert!((dist.probability(adc.min_code()) - branch_left(&adc, s)).abs() < 1e-15);
            assert!((dist.probability(adc.max_code()) - branch_right(&adc, s)).abs() < 1e-15);
            // The aligned-interior expression bounds every interior bin.
            let interior_max = dist
                .iter()
                .filter(|(c, _, _)| *c != adc.min_code() && *c != adc.max_code())
                .map(|(_, _, p)| p)
                .fold(0.0, f64::max);
            assert!(interior_max <= branch_interior(&adc) + 1e-15);
        }
    }

    #[test]
    fn max_conditional_prob_grows_away_from_the_acceptance_midpoint() {
        let adc = AdcConfig::new(8, 2.93).unwrap();
        let mid = -0.5 * adc.bin_width();
        let mut prev_up = 0.0;
        let mut prev_down = 0.0;
        for step in 1..200 {
            let t = adc.bin_width() * step as f64 * 0.25;
            let up = max_conditional_prob(&adc, mid + t);
            let down = max_conditional_prob(&adc, mid - t);
            assert!(up >= prev_up - 1e-15);
            assert!(down >= prev_down - 1e-15);
            prev_up = up;
            prev_down = down;
        }
        assert_eq!(max_conditional_prob(&adc, f64::INFINITY), 1.0);
        assert_eq!(max_conditional_prob(&adc, f64::NEG_INFINITY), 1.0);
    }

    #[test]
    fn far_tail_bins_clamp_to_zero() {
        let model = quantum_only();
        let adc = AdcConfig::new(16, 80.0).unwrap();
        let dist = discretize_marginal(&model, &adc).unwrap();
        assert_eq!(dist.probability(adc.min_code()), 0.0);
        assert_eq!(dist.probability(adc.max_code()), 0.0);
        assert!(dist.probabilities().iter().all(|&p| p >= 0.0));
        assert!((dist.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_export_round_trips_header_and_rows() {
        let adc = AdcConfig::new(2, 1.0).unwrap();
        let dist = discretize_marginal(&quantum_only(), &adc).unwrap();
        let mut buf = Vec::new();
        dist.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("bin_center,probability"));
        assert_eq!(lines.count(), 4);
    }
}
