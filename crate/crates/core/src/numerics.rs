//! Scalar quadrature, root bracketing, and line-search primitives used by the
//! entropy and optimizer modules, plus standard-normal helpers in the erfc
//! form that stays accurate far into the tails.

use crate::error::{Error, Result};

pub use statrs::function::erf::{erf, erf_inv, erfc};

use std::f64::consts::{PI, SQRT_2};

/// Density of the standard normal distribution.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Lower tail P(Z <= x) of the standard normal distribution.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail P(Z > x) of the standard normal distribution.
pub fn std_normal_upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Result of an adaptive quadrature: the integral and its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` with adaptive Simpson panels and Richardson
/// error control. Fails with the achieved estimate when the depth limit is
/// reached before `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0 });
    }
    if a.is_nan() || b.is_nan() || a > b || !abs_tol.is_finite() || abs_tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "integrate requires a < b and abs_tol > 0 (got a = {a}, b = {b}, abs_tol = {abs_tol})"
        )));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let q = adapt(&f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH);
    if q.error_estimate <= abs_tol {
        Ok(q)
    } else {
        Err(Error::QuadratureNonConvergence { achieved: q.error_estimate, requested: abs_tol })
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Quadrature {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole) / 15.0;
    let err_abs = err.abs();
    if err_abs <= tol || err_abs.is_nan() || depth == 0 {
        return Quadrature {
            value: left + right + err,
            error_estimate: if err_abs.is_nan() { f64::INFINITY } else { err_abs },
        };
    }
    let half = 0.5 * tol;
    let l = adapt(f, a, m, fa, flm, fm, left, half, depth - 1);
    let r = adapt(f, m, b, fm, frm, fb, right, half, depth - 1);
    Quadrature { value: l.value + r.value, error_estimate: l.error_estimate + r.error_estimate }
}

/// Result of a bracketing root solve.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub f_x: f64,
    pub iterations: u32,
}

/// Bisection on `[lo, hi]`, which must bracket a sign change. Stops when the
/// bracket width drops below `x_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64, max_iter: u32) -> Result<Root> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(Root { x: lo, f_x: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, f_x: 0.0, iterations: 0 });
    }
    let cross = f_lo * f_hi;
    if cross.is_nan() || cross >= 0.0 {
        return Err(Error::BracketFailure { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    let mut x = 0.5 * (lo + hi);
    let mut f_x = f(x);
    while hi - lo > x_tol && iterations < max_iter {
        if f_x == 0.0 {
            break;
        }
        if f_lo * f_x < 0.0 {
            hi = x;
        } else {
            lo = x;
            f_lo = f_x;
        }
        x = 0.5 * (lo + hi);
        f_x = f(x);
        iterations += 1;
    }
    Ok(Root { x, f_x, iterations })
}

/// Result of a golden-section maximization.
#[derive(Debug, Clone, Copy)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub iterations: u32,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns once the bracket width drops below `x_tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64) -> Maximum {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > x_tol && iterations < 200 {
        // Ties keep the left interval, so ambiguous peaks resolve toward
        // smaller arguments.
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    Maximum { x, value: f(x), iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass_integrates_to_one() {
        let q = integrate(std_normal_pdf, -8.0, 8.0, 1e-12).unwrap();
        assert!((q.value - (1.0 - 2.0 * std_normal_upper_tail(8.0))).abs() < 1e-12);
    }

    #[test]
    fn polynomial_is_integrated_exactly() {
        let q = integrate(|x| x * x, 0.0, 1.0, 1e-14).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn integrable_singularity_reports_non_convergence() {
        let err = integrate(|x| 1.0 / (x - 0.3).abs().sqrt(), 0.0, 1.0, 1e-12).unwrap_err();
        match err {
            crate::error::Error::QuadratureNonConvergence { achieved, requested } => {
                assert!(achieved > requested);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn bisect_finds_cosine_root() {
        let r = bisect(f64::cos, 1.0, 2.0, 1e-12, 200).unwrap();
        assert!((r.x - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_unbracketed_interval() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10, 100).is_err());
    }

    #[test]
    fn golden_section_locates_parabola_peak() {
        let m = golden_section_max(|x| -(x - 1.7) * (x - 1.7), 0.0, 5.0, 1e-10);
        assert!((m.x - 1.7).abs() < 1e-8);
    }

    #[test]
    fn cdf_and_upper_tail_are_complementary() {
        for &x in &[-5.0, -1.0, 0.0, 0.3, 2.0, 7.5] {
            assert!((std_normal_cdf(x) + std_normal_upper_tail(x) - 1.0).abs() < 1e-15);
        }
    }
}
