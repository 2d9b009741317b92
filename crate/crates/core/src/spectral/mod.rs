//! Spectral loss from fast phase noise, its simulation, and the resulting
//! fiber capacity model.
//!
//! Phase noise that varies from sample to sample spreads part of the signal
//! power outside the signal band. After filtering, only the coherent part
//! `e^{-σ²/2} x` survives, so the effective SNR drops by `e^{-σ²}`.

mod fiber;
mod simulate;

pub use fiber::{
    count_local_maxima, dbm_to_watts, fiber_capacity_curve, optimal_launch_power, watts_to_dbm,
    FiberModelSpec, FiberPoint, DEMO_NOISE_VARIANCE_PER_DIM,
};
pub use simulate::{simulate_spectral_loss, SpectralLossConfig, SpectralLossReport};

use crate::channels::Snr;

/// Autocorrelation of `e^{jΘ_k}` for i.i.d. Gaussian phase noise of
/// standard deviation `sigma`: one at lag zero, `e^{-σ²}` elsewhere.
pub fn phase_noise_acf(sigma: f64, lag: i64) -> f64 {
    if lag == 0 {
        1.0
    } else {
        (-sigma * sigma).exp()
    }
}

/// Fraction of the signal power that stays coherent, `e^{-σ²}`.
pub fn coherent_power_fraction(sigma: f64) -> f64 {
    (-sigma * sigma).exp()
}

/// Gaussian-input capacity in bits after spectral loss with phase-noise
/// variance `sigma2`: `log₂(1 + SNR e^{-σ²})`.
pub fn spectral_loss_capacity(snr: Snr, sigma2: f64) -> f64 {
    (1.0 + snr.linear() * (-sigma2).exp()).log2()
}
