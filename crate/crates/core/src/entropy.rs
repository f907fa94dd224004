//! Min-entropy figures for the digitized source: unconditional, worst-case
//! conditional under a bounded noise excursion, and average conditional, plus
//! the physical information ceiling and throughput helpers.
//!
//! All figures are per sample, in bits. Conditioning is on an observer who
//! knows the classical noise value exactly; the quantum contribution stays
//! unit-width, so the observer's best guess for a given total displacement
//! `s` is the largest single bin of the unit-width Gaussian centred at `s`,
//! which is always a saturation branch or the interior bin nearest `s`.

use crate::adc_model::{branch_left, branch_right, max_conditional_prob, AdcConfig};
use crate::error::{Error, Result};
use crate::noise_model::NoiseModel;
use crate::numerics::{integrate, std_normal_cdf, std_normal_pdf, std_normal_upper_tail};
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

/// How many classical-noise standard deviations the average-case quadrature
/// covers; the remainder is bounded by the Gaussian tail, below 4e-33.
const TAIL_SIGMAS: f64 = 12.0;

/// Excursion allowance for the worst-case figure: the classical noise is
/// assumed confined to `|e| <= k_sigma * sigma_e` and the dc offset to
/// `|delta| <= delta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionBound {
    k_sigma: f64,
    delta_max: f64,
}

impl ExcursionBound {
    /// `k_sigma` must be non-negative and may be `+inf` (an unbounded
    /// excursion); `delta_max` must be non-negative and finite.
    pub fn new(k_sigma: f64, delta_max: f64) -> Result<Self> {
        if k_sigma.is_nan() || k_sigma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "excursion multiple must be >= 0 (got {k_sigma})"
            )));
        }
        if !delta_max.is_finite() || delta_max < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "offset excursion must be finite and >= 0 (got {delta_max})"
            )));
        }
        Ok(Self { k_sigma, delta_max })
    }

    pub fn k_sigma(&self) -> f64 {
        self.k_sigma
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// Largest total displacement `|e + delta|` the bound admits for the
    /// given model. Infinite when the bound cannot confine the noise.
    pub fn max_shift(&self, model: &NoiseModel) -> f64 {
        let e_max = if model.sigma_e() == 0.0 { 0.0 } else { self.k_sigma * model.sigma_e() };
        e_max + self.delta_max
    }
}

/// Largest single-bin mass of a Gaussian N(mean, sd^2) pushed through the
/// converter, in closed form: the best interior bin is the one whose centre
/// lies nearest the mean, and the two end bins take the saturated tails.
pub(crate) fn max_marginal_prob(adc: &AdcConfig, mean: f64, sd: f64) -> f64 {
    let delta = adc.bin_width();
    let p_low = std_normal_cdf((adc.lower_acceptance() - mean) / sd);
    let p_high = std_normal_upper_tail((adc.upper_acceptance() - mean) / sd);
    let mut best = p_low.max(p_high);
    let lo_interior = adc.min_code() + 1;
    let hi_interior = adc.max_code() - 1;
    if lo_interior <= hi_interior {
        let nearest = (mean / delta).round();
        let nearest = nearest.clamp(lo_interior as f64, hi_interior as f64) as i32;
        for code in nearest.saturating_sub(1)..=nearest.saturating_add(1) {
            if code < lo_interior || code > hi_interior {
                continue;
            }
            let c = adc.bin_center(code);
            let a = (c - 0.5 * delta - mean) / sd;
            let b = (c + 0.5 * delta - mean) / sd;
            let mass = if a + b > 0.0 {
                std_normal_upper_tail(a) - std_normal_upper_tail(b)
            } else {
                std_normal_cdf(b) - std_normal_cdf(a)
            };
            best = best.max(mass.max(0.0));
        }
    }
    best
}

/// Min-entropy of the converter output against an observer who knows only
/// the model: `-log2` of the largest bin of the marginal distribution.
pub fn min_entropy_unconditional(model: &NoiseModel, adc: &AdcConfig) -> f64 {
    -max_marginal_prob(adc, model.delta_offset(), model.sigma_m()).log2()
}

/// Min-entropy against an observer who knows the classical noise exactly,
/// minimized over every noise value the excursion bound admits.
///
/// Infinite classical noise, or an infinite excursion multiple with nonzero
/// classical noise, leaves the observer a certain guess: exactly 0 bits.
pub fn min_entropy_worst_case(model: &NoiseModel, adc: &AdcConfig, bound: &ExcursionBound) -> f64 {
    if model.has_infinite_classical_noise() {
        return 0.0;
    }
    let s_max = bound.max_shift(model);
    if s_max.is_infinite() {
        return 0.0;
    }
    // The guessing probability grows with distance from the acceptance
    // midpoint -delta/2 < 0, so over [-s_max, s_max] the positive end always
    // dominates; both ends are evaluated anyway.
    let p = max_conditional_prob(adc, s_max).max(max_conditional_prob(adc, -s_max));
    -p.log2()
}

fn piecewise_integral<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    breakpoint: f64,
    abs_tol: f64,
) -> Result<f64> {
    if breakpoint > lo && breakpoint < hi {
        let a = integrate(f, lo, breakpoint, 0.5 * abs_tol)?;
        let b = integrate(f, breakpoint, hi, 0.5 * abs_tol)?;
        Ok(a.value + b.value)
    } else {
        Ok(integrate(f, lo, hi, abs_tol)?.value)
    }
}

/// Average guessing probability over the classical noise distribution: the
/// expectation over the noise of the largest single bin of the conditional
/// distribution at that noise value.
///
/// Below the lower crossover the left saturation branch is the exact maximum
/// and above the upper crossover the right branch is, so the two tails
/// integrate a single branch each. Between the crossovers the integrand is
/// the largest of both branches and the nearest interior bin, with quadrature
/// panels split wherever the nearest bin changes so every panel is smooth.
///
/// Zero classical noise collapses to the marginal's largest bin; infinite
/// classical noise gives a certain guess (probability 1).
pub fn guess_prob_average(model: &NoiseModel, adc: &AdcConfig) -> Result<f64> {
    let sigma = model.sigma_e();
    if sigma == 0.0 {
        return Ok(max_marginal_prob(adc, model.delta_offset(), 1.0));
    }
    if sigma.is_infinite() {
        return Ok(1.0);
    }
    let offset = model.delta_offset();
    let density = move |s: f64| std_normal_pdf((s - offset) / sigma) / sigma;
    let lo = offset - TAIL_SIGMAS * sigma;
    let hi = offset + TAIL_SIGMAS * sigma;

    if adc.bin_count() <= 2 {
        // No interior bins: the maximum is whichever saturation branch is
        // larger, and the branches cross once at the shared bin edge.
        let f = |s: f64| density(s) * branch_left(adc, s).max(branch_right(adc, s));
        let m = (-0.5 * adc.bin_width()).clamp(lo, hi);
        let left = piecewise_integral(&f, lo, m, offset, 0.5e-12)?;
        let right = piecewise_integral(&f, m, hi, offset, 0.5e-12)?;
        return Ok((left + right).clamp(f64::MIN_POSITIVE, 1.0));
    }

    let (e1, e2) = crate::range_optimizer::solve_crossovers(model, adc)?;
    let mut p = 0.0;
    if e1 > lo {
        let upper = e1.min(hi);
        p += piecewise_integral(&|s| density(s) * branch_left(adc, s), lo, upper, offset, 0.25e-12)?;
    }
    if e2 < hi {
        let lower = e2.max(lo);
        p +=
            piecewise_integral(&|s| density(s) * branch_right(adc, s), lower, hi, offset, 0.25e-12)?;
    }
    let a = e1.max(lo);
    let b = e2.min(hi);
    if a < b {
        p += interior_region_integral(adc, &density, a, b, offset, 0.5e-12)?;
    }
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Integral of `density(s) * max_marginal_prob(adc, s, 1)` over `[a, b]`,
/// panelized so the switch points between nearest interior bins (the bin
/// boundaries, shifted half a width) and the density centre land on panel
/// edges rather than inside a panel.
fn interior_region_integral<F: Fn(f64) -> f64>(
    adc: &AdcConfig,
    density: &F,
    a: f64,
    b: f64,
    offset: f64,
    abs_tol: f64,
) -> Result<f64> {
    let delta = adc.bin_width();
    let k_start = (a / delta - 0.5).ceil() as i64;
    let k_end = (b / delta - 0.5).floor() as i64;
    let mut cuts: Vec<f64> = (k_start..=k_end).map(|k| delta * (k as f64 + 0.5)).collect();
    cuts.push(offset);
    cuts.retain(|&s| s > a && s < b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    edges.dedup();

    let panels = edges.len() - 1;
    let tol = (abs_tol / panels as f64).max(1e-16);
    let f = |s: f64| density(s) * max_marginal_prob(adc, s, 1.0);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        total += integrate(f, pair[0], pair[1], tol)?.value;
    }
    Ok(total)
}

/// Average conditional min-entropy: `-log2` of [`guess_prob_average`].
pub fn min_entropy_average(model: &NoiseModel, adc: &AdcConfig) -> Result<f64> {
    Ok(-guess_prob_average(model, adc)?.log2())
}

/// Information ceiling of a coherent detector measuring a field with the
/// given mean photon number: half the log of the shot-noise phase-space
/// volume, `0.5 * log2(2 * pi * n_photons)`.
pub fn photon_entropy_ceiling(mean_photon_number: f64) -> Result<f64> {
    if !mean_photon_number.is_finite() || mean_photon_number <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "mean photon number must be positive and finite (got {mean_photon_number})"
        )));
    }
    Ok(0.5 * (2.0 * PI * mean_photon_number).log2())
}

/// Randomness throughput of a detector of the given analog bandwidth sampled
/// at the Nyquist rate, in bits per second.
pub fn nyquist_rate(bandwidth_hz: f64, bits_per_sample: f64) -> f64 {
    2.0 * bandwidth_hz * bits_per_sample
}

/// Per-sample entropy figures at a worst-case and an average-case operating
/// range, with enough of the model echoed back for artifacts to stand alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    pub n_bits: u32,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub qcnr_db: f64,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub sigma_e: f64,
    pub delta_offset: f64,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub k_sigma: f64,
    pub delta_max: f64,
    pub h_min_unconditional: f64,
    pub h_min_worst: f64,
    pub h_min_avg: f64,
    /// Range the worst-case figure is quoted at; absent when no finite
    /// optimum exists (infinite noise or an unbounded excursion).
    pub optimal_r_worst: Option<f64>,
    /// Range the average figure is quoted at; absent only for infinite noise.
    pub optimal_r_avg: Option<f64>,
    pub h_per_bit_worst: f64,
    pub h_per_bit_avg: f64,
    /// Crossover displacements where the saturation branches overtake the
    /// interior bound, at the average-case range; absent when the average
    /// path needs no quadrature (zero or infinite classical noise).
    pub crossover_e1: Option<f64>,
    pub crossover_e2: Option<f64>,
}

impl EntropyReport {
    /// Evaluates every figure at one fixed converter range.
    pub fn at_fixed_r(model: &NoiseModel, adc: &AdcConfig, bound: &ExcursionBound) -> Result<Self> {
        let h_unc = min_entropy_unconditional(model, adc);
        let h_worst = min_entropy_worst_case(model, adc, bound);
        let h_avg = if model.has_infinite_classical_noise() {
            0.0
        } else {
            min_entropy_average(model, adc)?
        };
        let crossovers = if model.sigma_e() > 0.0 && model.sigma_e().is_finite() {
            Some(crate::range_optimizer::solve_crossovers(model, adc)?)
        } else {
            None
        };
        let n = adc.n_bits();
        Ok(Self {
            n_bits: n,
            qcnr_db: model.qcnr_db(),
            sigma_e: model.sigma_e(),
            delta_offset: model.delta_offset(),
            k_sigma: bound.k_sigma(),
            delta_max: bound.delta_max(),
            h_min_unconditional: h_unc,
            h_min_worst: h_worst,
            h_min_avg: h_avg,
            optimal_r_worst: Some(adc.range_r()),
            optimal_r_avg: Some(adc.range_r()),
            h_per_bit_worst: h_worst / n as f64,
            h_per_bit_avg: h_avg / n as f64,
            crossover_e1: crossovers.map(|c| c.0),
            crossover_e2: crossovers.map(|c| c.1),
        })
    }

    pub const CSV_HEADER: &'static str = "n_bits,qcnr_db,sigma_e,delta_offset,k_sigma,delta_max,\
h_min_unconditional,h_min_worst,h_min_avg,optimal_r_worst,optimal_r_avg,\
h_per_bit_worst,h_per_bit_avg,crossover_e1,crossover_e2";

    /// One CSV row in [`Self::CSV_HEADER`] order; absent values are empty
    /// cells and infinities print as `inf` / `-inf`.
    pub fn to_csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n_bits,
            self.qcnr_db,
            self.sigma_e,
            self.delta_offset,
            self.k_sigma,
            self.delta_max,
            self.h_min_unconditional,
            self.h_min_worst,
            self.h_min_avg,
            opt(self.optimal_r_worst),
            opt(self.optimal_r_avg),
            self.h_per_bit_worst,
            self.h_per_bit_avg,
            opt(self.crossover_e1),
            opt(self.crossover_e2),
        )
    }
}
