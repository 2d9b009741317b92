//! Modified Bessel functions and the complementary error function.
//!
//! Everything works in scaled or log form so that large arguments (high SNR
//! Rice densities, sharp von Mises kernels) never overflow.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use crate::error::{domain, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Below this argument the Bessel power series is used, above it the
/// Hankel asymptotic expansion.
const BESSEL_SERIES_LIMIT: f64 = 25.0;

/// Below this argument `erfc` comes from the erf power series, above it from
/// the continued fraction.
const ERFC_SERIES_LIMIT: f64 = 2.5;

fn check_bessel_arg(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("Bessel argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// `I₀(x)·e^{-x}` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    check_bessel_arg(x)?;
    Ok(i0e(x))
}

/// `I₁(x)·e^{-x}` for `x >= 0`.
pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    check_bessel_arg(x)?;
    Ok(i1e(x))
}

/// `ln I₀(x)` without overflow.
pub fn ln_bessel_i0(x: f64) -> Result<f64> {
    check_bessel_arg(x)?;
    Ok(ln_i0(x))
}

/// `I₁(x)/I₀(x)`, the mean resultant length of a von Mises law with
/// concentration `x`.
pub fn bessel_ratio(x: f64) -> Result<f64> {
    check_bessel_arg(x)?;
    Ok(i1_over_i0(x))
}

pub(crate) fn i0e(x: f64) -> f64 {
    if x <= BESSEL_SERIES_LIMIT {
        // I0 = sum (x²/4)^k / (k!)²
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        hankel_scaled(0.0, x)
    }
}

pub(crate) fn i1e(x: f64) -> f64 {
    if x <= BESSEL_SERIES_LIMIT {
        // I1 = sum (x/2)^{2k+1} / (k! (k+1)!)
        let q = 0.25 * x * x;
        let mut term = 0.5 * x;
        let mut sum = term;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * (k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        hankel_scaled(1.0, x)
    }
}

pub(crate) fn ln_i0(x: f64) -> f64 {
    x + i0e(x).ln()
}

pub(crate) fn i1_over_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    i1e(x) / i0e(x)
}

/// Large-argument expansion `I_ν(x) e^{-x} ~ (2πx)^{-1/2} Σ (-1)^k a_k(ν) / x^k`.
fn hankel_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Ratios `I_n(κ)/I₀(κ)` for `n = 0..=n_max`, i.e. the trigonometric
/// moments of a zero-mean von Mises law.
///
/// Uses backward recurrence on `r_n = I_n/I_{n-1}`, started far enough out
/// that the unknown starting value has decayed below double precision.
pub fn bessel_ratio_sequence(kappa: f64, n_max: usize) -> Result<Vec<f64>> {
    check_bessel_arg(kappa)?;
    let mut out = vec![0.0; n_max + 1];
    out[0] = 1.0;
    if kappa == 0.0 || n_max == 0 {
        return Ok(out);
    }
    let n = n_max as f64;
    let start = ((n * n + 40.0 * kappa).sqrt() + 20.0).ceil() as usize;
    let start = start.max(n_max + 20);
    let mut ratios = vec![0.0; n_max + 1];
    let mut r = 0.0;
    for k in (1..=start).rev() {
        r = 1.0 / (2.0 * k as f64 / kappa + r);
        if k <= n_max {
            ratios[k] = r;
        }
    }
    let mut acc = 1.0;
    for k in 1..=n_max {
        acc *= ratios[k];
        out[k] = acc;
    }
    Ok(out)
}

fn check_finite_or_inf(x: f64) -> Result<()> {
    if x.is_nan() {
        return Err(domain("argument is NaN"));
    }
    Ok(())
}

/// Complementary error function.
pub fn erfc(x: f64) -> Result<f64> {
    check_finite_or_inf(x)?;
    Ok(erfc_raw(x))
}

/// Error function.
pub fn erf(x: f64) -> Result<f64> {
    check_finite_or_inf(x)?;
    Ok(1.0 - erfc_raw(x))
}

/// Scaled complementary error function `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> Result<f64> {
    check_finite_or_inf(x)?;
    Ok(erfcx_raw(x))
}

/// `ln erfc(x)`, accurate far into the tail where `erfc` underflows.
pub fn ln_erfc(x: f64) -> Result<f64> {
    check_finite_or_inf(x)?;
    Ok(ln_erfc_raw(x))
}

/// Inverse of [`erfc`] on `(0, 2)`.
pub fn erfc_inv(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) {
        return Err(domain(format!(
            "erfc_inv argument must lie in (0, 2), got {q}"
        )));
    }
    if q > 1.0 {
        return Ok(-erfc_inv_upper(2.0 - q));
    }
    Ok(erfc_inv_upper(q))
}

/// Solves `erfc(x) = q` for `q ∈ (0, 1]`, i.e. `x >= 0`, by safeguarded
/// Newton iteration on `ln erfc`.
fn erfc_inv_upper(q: f64) -> f64 {
    if q == 1.0 {
        return 0.0;
    }
    let target = q.ln();
    let (mut lo, mut hi) = (0.0_f64, 30.0_f64);
    let mut x = (-target).sqrt().min(29.0) * 0.9;
    for _ in 0..100 {
        let g = ln_erfc_raw(x) - target;
        // ln erfc is decreasing in x
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = -FRAC_2_SQRT_PI / erfcx_raw(x);
        let mut next = x - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

pub(crate) fn erfc_raw(x: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 0.0 } else { 2.0 };
    }
    if x < 0.0 {
        return 2.0 - erfc_raw(-x);
    }
    if x < ERFC_SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

pub(crate) fn erfcx_raw(x: f64) -> f64 {
    if x >= ERFC_SERIES_LIMIT {
        erfcx_cf(x)
    } else {
        (x * x).exp() * erfc_raw(x)
    }
}

pub(crate) fn ln_erfc_raw(x: f64) -> f64 {
    if x >= ERFC_SERIES_LIMIT {
        -x * x + erfcx_cf(x).ln()
    } else {
        erfc_raw(x).ln()
    }
}

/// `erf(x) = 2/√π e^{-x²} Σ 2ⁿ x^{2n+1} / (1·3···(2n+1))`; every term is
/// positive so there is no cancellation for moderate `x`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 1.0;
    while term > 1e-17 * sum {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        n += 1.0;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Continued fraction `√π erfcx(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`
/// evaluated with the modified Lentz method; valid for `x > 0`.
fn erfcx_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (SQRT_PI * f)
}
