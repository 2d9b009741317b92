//! High-SNR closed forms, all in bits.

use std::f64::consts::{E, PI};

use crate::channels::Snr;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Offset `c` in `I(|X|;|Y|) ≈ ½ log₂ SNR - c` for a Gaussian input:
/// `½ log₂ π - (1 + γ)/(2 ln 2) + 1 ≈ 0.688`.
pub fn gaussian_amplitude_offset() -> f64 {
    0.5 * PI.log2() - (1.0 + EULER_GAMMA) / (2.0 * std::f64::consts::LN_2) + 1.0
}

/// Amplitude term of a Gaussian input at high SNR.
pub fn gaussian_amplitude_asymptote(snr: Snr) -> f64 {
    0.5 * snr.linear().log2() - gaussian_amplitude_offset()
}

/// Phase term of a Gaussian input at high SNR; together with the amplitude
/// asymptote it sums to `log₂ SNR`.
pub fn gaussian_phase_asymptote(snr: Snr) -> f64 {
    0.5 * snr.linear().log2() + gaussian_amplitude_offset()
}

/// Phase information of a single ring (continuous PSK) at high SNR:
/// `½ log₂(4π SNR / e)`.
pub fn psk_phase_asymptote(snr: Snr) -> f64 {
    0.5 * (4.0 * PI * snr.linear() / E).log2()
}

/// Capacity of the noncoherent channel at high SNR: `½ log₂ SNR - ½`.
pub fn noncoherent_asymptote(snr: Snr) -> f64 {
    0.5 * snr.linear().log2() - 0.5
}

/// Amplitude term of a half-Gaussian amplitude input at high SNR; equal to
/// the noncoherent asymptote.
pub fn half_gaussian_amplitude_asymptote(snr: Snr) -> f64 {
    noncoherent_asymptote(snr)
}
