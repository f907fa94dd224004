//! Chooses the converter full-scale range that maximizes the extractable
//! entropy, for both the worst-case and the average-case figures.
//!
//! The worst-case optimum is a root-finding problem: entropy peaks where the
//! dominant saturation branch and the aligned-interior bound cross, so the
//! optimizer bisects on their difference. The average-case objective is
//! smooth and unimodal in the range, so a coarse scan brackets the peak and a
//! golden-section search refines it.

use crate::adc_model::{branch_interior, branch_right, AdcConfig};
use crate::entropy::{min_entropy_average, min_entropy_unconditional, min_entropy_worst_case, EntropyReport, ExcursionBound};
use crate::error::{Error, Result};
use crate::noise_model::NoiseModel;
use crate::numerics::{bisect, golden_section_max};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

/// Outcome of a range optimization.
///
/// `residual` is the quantity the stopping rule controlled: the branch
/// mismatch `|c1 - c2|` at the returned range for the worst-case root solve,
/// and the entropy drop to the probe points `optimal_r * (1 ± 1e-4)` for the
/// average-case maximization (non-negative when the returned range is a true
/// local peak).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub optimal_r: f64,
    pub achieved_entropy: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// Range that maximizes the worst-case min-entropy: the root of
/// `branch_right(s_max; R) = branch_interior(R)`.
///
/// Degenerate models (infinite classical noise, or an unbounded excursion
/// over nonzero noise) have zero entropy at every range and no optimum.
/// A 1-bit converter has no interior bins, the branches never cross, and the
/// bracket search fails with the attempted endpoints.
pub fn optimize_r_worst_case(
    model: &NoiseModel,
    n_bits: u32,
    bound: &ExcursionBound,
) -> Result<OptimizationResult> {
    AdcConfig::new(n_bits, 1.0)?;
    if model.has_infinite_classical_noise() || bound.max_shift(model).is_infinite() {
        return Err(Error::DegenerateModel(
            "worst-case entropy is zero at every range; no optimum exists".into(),
        ));
    }
    let s_max = bound.max_shift(model);
    let gap = |r: f64| {
        let adc = AdcConfig::new(n_bits, r).expect("positive range");
        branch_right(&adc, s_max) - branch_interior(&adc)
    };
    let lo = 1e-3;
    let mut hi = (2.0 * s_max + 4.0).max(4.0);
    let mut doublings = 0u32;
    while gap(hi) >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if hi > 1e9 {
            return Err(Error::BracketFailure { lo, hi, f_lo: gap(lo), f_hi: gap(hi) });
        }
    }
    let root = bisect(gap, lo, hi, 1e-12, 300)?;
    let adc = AdcConfig::new(n_bits, root.x)?;
    Ok(OptimizationResult {
        optimal_r: root.x,
        achieved_entropy: min_entropy_worst_case(model, &adc, bound),
        residual: root.f_x.abs(),
        iterations: root.iterations + doublings,
    })
}

/// Total displacements where the saturation branches overtake the
/// aligned-interior bound, each located by bisection to 1e-10.
///
/// The two saturation branches mirror about the acceptance midpoint
/// `-delta/2`, so `e1 + e2 = -delta`. When the converter is so coarse that a
/// saturation branch dominates everywhere, both crossovers degenerate to the
/// midpoint itself. Defined for models with nonzero classical noise.
pub fn solve_crossovers(model: &NoiseModel, adc: &AdcConfig) -> Result<(f64, f64)> {
    if model.sigma_e() == 0.0 {
        return Err(Error::InvalidConfig(
            "crossovers are defined only for nonzero classical noise".into(),
        ));
    }
    let delta = adc.bin_width();
    let mid = -0.5 * delta;
    let c2 = branch_interior(adc);
    let at_mid = branch_right(adc, mid);
    if at_mid >= c2 {
        return Ok((mid, mid));
    }
    let far = adc.range_r() + 45.0;
    let right = bisect(|s| branch_right(adc, s) - c2, mid, far, 1e-10, 300)?;
    let left = bisect(|s| crate::adc_model::branch_left(adc, s) - c2, -far, mid, 1e-10, 300)?;
    Ok((left.x, right.x))
}

const SCAN_STEP: f64 = 0.5;

fn scan_trace(grid: &[(f64, f64)]) -> String {
    grid.iter().map(|(r, h)| format!("R = {r:.4}, h = {h:.6}")).collect::<Vec<_>>().join("\n")
}

/// Range that maximizes the average conditional min-entropy.
///
/// A coarse scan over ranges brackets the peak, then a golden-section search
/// narrows it to 1e-4 in range. When the scan peaks at an endpoint it widens
/// once and retries; a second endpoint peak means the objective is not
/// unimodal on any reasonable window, and the error carries the scan trace.
pub fn optimize_r_average(model: &NoiseModel, n_bits: u32) -> Result<OptimizationResult> {
    AdcConfig::new(n_bits, 1.0)?;
    if model.has_infinite_classical_noise() {
        return Err(Error::DegenerateModel(
            "average entropy is zero at every range; no optimum exists".into(),
        ));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |r: f64| -> f64 {
        let result = AdcConfig::new(n_bits, r).and_then(|adc| min_entropy_average(model, &adc));
        match result {
            Ok(h) => h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };
    let scan_to = (5.0 * model.sigma_e() + model.delta_offset().abs() + 8.0).max(10.0);
    let mut widened = false;
    let mut lo = SCAN_STEP;
    let mut step = SCAN_STEP;
    let mut hi = scan_to;
    let (grid, best) = loop {
        let mut grid = Vec::new();
        let mut r = lo;
        while r <= hi + 1e-9 {
            grid.push((r, objective(r)));
            r += step;
        }
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let best = grid
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .expect("non-empty scan");
        if best > 0 && best + 1 < grid.len() {
            break (grid, best);
        }
        if widened {
            return Err(Error::ScanFailure { trace: scan_trace(&grid) });
        }
        widened = true;
        lo = 0.5 * SCAN_STEP;
        step = 0.5 * SCAN_STEP;
        hi *= 2.0;
    };
    let peak = golden_section_max(objective, grid[best - 1].0, grid[best + 1].0, 1e-5);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let probe = 1e-4 * peak.x;
    let drop_up = peak.value - objective(peak.x + probe);
    let drop_down = peak.value - objective(peak.x - probe);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    Ok(OptimizationResult {
        optimal_r: peak.x,
        achieved_entropy: peak.value,
        residual: drop_up.min(drop_down),
        iterations: peak.iterations + grid.len() as u32,
    })
}

/// Full report with each figure quoted at its own optimal range: the
/// worst-case figure at the worst-case optimum, the average and unconditional
/// figures (and the crossovers) at the average optimum.
pub fn optimized_report(
    model: &NoiseModel,
    n_bits: u32,
    bound: &ExcursionBound,
) -> Result<EntropyReport> {
    AdcConfig::new(n_bits, 1.0)?;
    let n = n_bits as f64;
    if model.has_infinite_classical_noise() {
        return Ok(EntropyReport {
            n_bits,
            qcnr_db: model.qcnr_db(),
            sigma_e: model.sigma_e(),
            delta_offset: model.delta_offset(),
            k_sigma: bound.k_sigma(),
            delta_max: bound.delta_max(),
            h_min_unconditional: 1.0,
            h_min_worst: 0.0,
            h_min_avg: 0.0,
            optimal_r_worst: None,
            optimal_r_avg: None,
            h_per_bit_worst: 0.0,
            h_per_bit_avg: 0.0,
            crossover_e1: None,
            crossover_e2: None,
        });
    }
    let worst = if bound.max_shift(model).is_infinite() {
        None
    } else {
        Some(optimize_r_worst_case(model, n_bits, bound)?)
    };
    let avg = optimize_r_average(model, n_bits)?;
    let avg_adc = AdcConfig::new(n_bits, avg.optimal_r)?;
    let crossovers = if model.sigma_e() > 0.0 {
        Some(solve_crossovers(model, &avg_adc)?)
    } else {
        None
    };
    Ok(EntropyReport {
        n_bits,
        qcnr_db: model.qcnr_db(),
        sigma_e: model.sigma_e(),
        delta_offset: model.delta_offset(),
        k_sigma: bound.k_sigma(),
        delta_max: bound.delta_max(),
        h_min_unconditional: min_entropy_unconditional(model, &avg_adc),
        h_min_worst: worst.as_ref().map_or(0.0, |w| w.achieved_entropy),
        h_min_avg: avg.achieved_entropy,
        optimal_r_worst: worst.as_ref().map(|w| w.optimal_r),
        optimal_r_avg: Some(avg.optimal_r),
        h_per_bit_worst: worst.as_ref().map_or(0.0, |w| w.achieved_entropy / n),
        h_per_bit_avg: avg.achieved_entropy / n,
        crossover_e1: crossovers.map(|c| c.0),
        crossover_e2: crossovers.map(|c| c.1),
    })
}
