//! Channel models and the conditional densities of the output in polar
//! coordinates.
//!
//! The baseline channel is `Y = X + N` with `N` circular complex Gaussian,
//! variance `σn²` per real dimension. Optional impairments: a phase rotation
//! `e^{jΘ}` of the signal (phase noise), or a spectral loss that keeps only
//! the coherent part `e^{-σ²/2} X` after filtering.

use crate::dirstats::CircularDistribution;
use crate::error::{config, domain, Result};
use crate::numerics::{erfc_raw, erfcx_raw, i0e, AngularGrid};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Signal-to-noise ratio `P / (2σn²)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr {
    linear: f64,
}

impl Snr {
    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(domain(format!(
                "SNR must be positive and finite, got {linear}"
            )));
        }
        Ok(Self { linear })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(domain(format!("SNR in dB must be finite, got {db}")));
        }
        Self::from_linear(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.linear
    }

    pub fn db(self) -> f64 {
        10.0 * self.linear.log10()
    }
}

/// Noise and impairment parameters of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// Additive noise variance per real dimension, `σn²`.
    pub noise_variance_per_dim: f64,
    /// Phase rotation applied to the transmitted symbol.
    pub phase_noise: Option<CircularDistribution>,
    /// Variance `σ²` of the phase noise whose incoherent part is filtered out.
    pub spectral_loss_sigma2: Option<f64>,
}

impl ChannelSpec {
    /// Plain AWGN channel.
    pub fn awgn(noise_variance_per_dim: f64) -> Result<Self> {
        let c = Self {
            noise_variance_per_dim,
            phase_noise: None,
            spectral_loss_sigma2: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_phase_noise(mut self, pn: CircularDistribution) -> Result<Self> {
        self.phase_noise = Some(pn);
        self.validate()?;
        Ok(self)
    }

    pub fn with_spectral_loss(mut self, sigma2: f64) -> Result<Self> {
        self.spectral_loss_sigma2 = Some(sigma2);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.noise_variance_per_dim;
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain(format!(
                "noise variance must be positive and finite, got {v}"
            )));
        }
        if let Some(pn) = &self.phase_noise {
            pn.validate()?;
        }
        if let Some(s2) = self.spectral_loss_sigma2 {
            if !(s2 >= 0.0) || !s2.is_finite() {
                return Err(domain(format!(
                    "spectral loss variance must be >= 0, got {s2}"
                )));
            }
            if self.phase_noise.is_some() {
                return Err(config(
                    "phase noise and spectral loss are alternative models; set only one",
                ));
            }
        }
        Ok(())
    }

    /// Amplitude factor applied to the symbol before the additive noise.
    pub fn amplitude_gain(&self) -> f64 {
        self.spectral_loss_sigma2
            .map_or(1.0, |s2| (-0.5 * s2).exp())
    }

    /// SNR of an input with average power `power`.
    pub fn snr_for_power(&self, power: f64) -> Result<Snr> {
        Snr::from_linear(power / (2.0 * self.noise_variance_per_dim))
    }

    /// Input power that yields `snr` on this channel.
    pub fn power_for_snr(&self, snr: Snr) -> f64 {
        2.0 * self.noise_variance_per_dim * snr.linear()
    }
}

fn check_noise(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(domain(format!(
            "noise variance must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_amplitude(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(domain(format!("{name} must be >= 0 and finite, got {v}")));
    }
    Ok(())
}

/// Rayleigh density of `|Y|` when `E|Y|² = total_power`.
pub fn rayleigh_pdf(y: f64, total_power: f64) -> Result<f64> {
    check_amplitude("amplitude", y)?;
    if !(total_power > 0.0) || !total_power.is_finite() {
        return Err(domain(format!(
            "total power must be positive, got {total_power}"
        )));
    }
    Ok(2.0 * y / total_power * (-y * y / total_power).exp())
}

/// `ln p(|Y| = y | |X| = x)`, the log Rice density.
pub fn rice_log_pdf(y: f64, x: f64, noise_var: f64) -> Result<f64> {
    check_amplitude("output amplitude", y)?;
    check_amplitude("input amplitude", x)?;
    check_noise(noise_var)?;
    Ok(rice_log_pdf_raw(y, x, noise_var))
}

pub(crate) fn rice_log_pdf_raw(y: f64, x: f64, noise_var: f64) -> f64 {
    if y <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let d = y - x;
    (y / noise_var).ln() - d * d / (2.0 * noise_var) + i0e(x * y / noise_var).ln()
}

/// Phase density of `Y = x + N` for real `x >= 0`, i.e. the density of the
/// output phase relative to the input phase.
pub fn awgn_phase_pdf(theta: f64, x: f64, noise_var: f64) -> Result<f64> {
    Ok(awgn_phase_log_pdf(theta, x, noise_var)?.exp())
}

/// Logarithm of [`awgn_phase_pdf`], accurate where the density underflows.
pub fn awgn_phase_log_pdf(theta: f64, x: f64, noise_var: f64) -> Result<f64> {
    check_amplitude("input amplitude", x)?;
    check_noise(noise_var)?;
    if !theta.is_finite() {
        return Err(domain(format!("angle must be finite, got {theta}")));
    }
    Ok(awgn_phase_log_pdf_raw(
        theta.cos(),
        theta.sin(),
        x / (2.0 * noise_var).sqrt(),
    ))
}

/// Log phase density in terms of `cos θ`, `sin θ` and `a = x/√(2σn²)`:
/// `p = e^{-a²}/(2π) + a cosθ/(2√π) e^{-a² sin²θ} erfc(-a cosθ)`.
pub(crate) fn awgn_phase_log_pdf_raw(c: f64, s: f64, a: f64) -> f64 {
    let a2 = a * a;
    if a == 0.0 {
        return -LN_2PI;
    }
    if c >= 0.0 {
        let t1 = -LN_2PI - a2;
        if c == 0.0 {
            return t1;
        }
        let t2 = (a * c / (2.0 * SQRT_PI)).ln() - a2 * s * s + erfc_raw(-a * c).ln();
        let (hi, lo) = if t1 > t2 { (t1, t2) } else { (t2, t1) };
        hi + (lo - hi).exp().ln_1p()
    } else {
        // p = e^{-a²}/(2π) · (1 - √π z erfcx(z)), z = a|cos θ|
        let z = -a * c;
        -a2 - LN_2PI + one_minus_sqrt_pi_z_erfcx(z).ln()
    }
}

/// `1 - √π z erfcx(z)`, which tends to `1/(2z²)` and cancels badly for
/// large `z` unless expanded asymptotically.
fn one_minus_sqrt_pi_z_erfcx(z: f64) -> f64 {
    if z < 8.0 {
        return (1.0 - SQRT_PI * z * erfcx_raw(z)).max(f64::MIN_POSITIVE);
    }
    let u = 1.0 / (2.0 * z * z);
    let mut term = u;
    let mut sum = u;
    for n in 2..40 {
        term *= -((2 * n - 1) as f64) * u;
        sum += term;
        if term.abs() < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Density of the output phase relative to the input phase for input
/// amplitude `x`, on an `n`-point grid, including the channel's phase noise
/// or spectral loss.
pub fn conditional_phase_grid(x: f64, channel: &ChannelSpec, n: usize) -> Result<AngularGrid> {
    check_amplitude("input amplitude", x)?;
    channel.validate()?;
    let a = channel.amplitude_gain() * x / (2.0 * channel.noise_variance_per_dim).sqrt();
    let awgn = AngularGrid::from_fn(n, |t| awgn_phase_log_pdf_raw(t.cos(), t.sin(), a).exp())?
        .normalized()?;
    match &channel.phase_noise {
        None => Ok(awgn),
        Some(pn) => awgn.filtered(&pn.fourier_kernel(n)?)?.normalized(),
    }
}

/// SNR after spectral loss removes the incoherent fraction `1 - e^{-σ²}` of
/// the signal power.
pub fn effective_snr_with_spectral_loss(snr: Snr, sigma2: f64) -> Result<Snr> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(domain(format!(
            "spectral loss variance must be >= 0, got {sigma2}"
        )));
    }
    Snr::from_linear(snr.linear() * (-sigma2).exp())
}
