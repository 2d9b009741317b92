//! The four-term polar decomposition of `I(X; Y)`.
//!
//! Inputs with uniform phase independent of amplitude are reduced to
//! one-dimensional integrals per input amplitude; finite constellations are
//! evaluated on a two-dimensional polar output grid ([`JointDensityGrid`]).
//! [`direct_mi`] computes the total without the polar split as a check.

mod amplitude;
mod asymptotes;
mod circular;
mod direct;
mod discrete;

use rayon::prelude::*;

pub use asymptotes::{
    gaussian_amplitude_asymptote, gaussian_amplitude_offset, gaussian_phase_asymptote,
    half_gaussian_amplitude_asymptote, noncoherent_asymptote, psk_phase_asymptote,
};
pub use direct::MonteCarloEstimate;
pub use discrete::{GridPoint, JointDensityGrid};

use crate::channels::{ChannelSpec, Snr};
use crate::error::{config, Error, Result};
use crate::inputs::{InputKind, InputSpec};
use crate::numerics::QuadratureSpec;
use crate::LOG2_E;

use amplitude::AmplitudeDist;

/// Terms in nats, internal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Terms {
    pub amplitude: f64,
    pub phase: f64,
    pub mixed1: f64,
    pub mixed2: f64,
}

/// The four information terms, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResult {
    pub snr: Snr,
    /// `I(|X|; |Y|)`.
    pub amplitude: f64,
    /// `I(∠X; ∠Y | |X|)`.
    pub phase: f64,
    /// `I(|X|; ∠Y | |Y|)`.
    pub mixed1: f64,
    /// `I(∠X; |Y| | |X|, ∠Y)`.
    pub mixed2: f64,
    /// `I(X; Y)` computed without the polar split, when requested.
    pub direct: Option<f64>,
}

impl DecompositionResult {
    /// Sum of the four terms, which equals `I(X; Y)` by the chain rule.
    pub fn sum(&self) -> f64 {
        self.amplitude + self.phase + self.mixed1 + self.mixed2
    }
}

fn validate(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<()> {
    quad.validate()?;
    channel.validate()?;
    let expected = channel.power_for_snr(snr);
    if (input.power - expected).abs() > 1e-9 * expected.max(input.power) {
        return Err(config(format!(
            "input power {} does not give SNR {} dB with noise variance {} (needs power {})",
            input.power,
            snr.db(),
            channel.noise_variance_per_dim,
            expected
        )));
    }
    Ok(())
}

fn terms(
    input: &InputSpec,
    channel: &ChannelSpec,
    quad: &QuadratureSpec,
    with_mixed: bool,
) -> Result<Terms> {
    let v = channel.noise_variance_per_dim;
    match &input.kind {
        InputKind::Discrete { .. } => discrete::discrete_terms(input, channel, quad, with_mixed),
        _ => {
            let amp = AmplitudeDist::from_input(input, channel.amplitude_gain())
                .expect("continuous-phase input");
            circular::circular_terms(&amp, v, channel.phase_noise.as_ref(), quad, with_mixed)
        }
    }
}

fn to_result(t: Terms, snr: Snr, direct: Option<f64>) -> DecompositionResult {
    DecompositionResult {
        snr,
        amplitude: t.amplitude * LOG2_E,
        phase: t.phase * LOG2_E,
        mixed1: t.mixed1 * LOG2_E,
        mixed2: t.mixed2 * LOG2_E,
        direct,
    }
}

/// The four terms for `input` on `channel`. The input power must match
/// `snr` on this channel, i.e. `P = 2σn² · SNR`.
pub fn decompose(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<DecompositionResult> {
    validate(input, channel, snr, quad)?;
    Ok(to_result(terms(input, channel, quad, true)?, snr, None))
}

/// [`decompose`] plus the directly computed total in
/// [`DecompositionResult::direct`].
pub fn decompose_with_direct(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<DecompositionResult> {
    validate(input, channel, snr, quad)?;
    let t = terms(input, channel, quad, true)?;
    let d = direct::direct_nats(input, channel, quad)? * LOG2_E;
    Ok(to_result(t, snr, Some(d)))
}

/// Amplitude and phase terms only, in bits, skipping the (expensive)
/// mixed terms.
pub fn amplitude_phase_terms(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    validate(input, channel, snr, quad)?;
    let t = terms(input, channel, quad, false)?;
    Ok((t.amplitude * LOG2_E, t.phase * LOG2_E))
}

/// `I(X; Y)` in bits without the polar split: Gauss–Hermite quadrature for
/// finite constellations, the radial output entropy for circular inputs, and
/// an explicit phase-noise average when phase noise is present.
pub fn direct_mi(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<f64> {
    validate(input, channel, snr, quad)?;
    Ok(direct::direct_nats(input, channel, quad)? * LOG2_E)
}

/// Monte Carlo estimate of `I(X; Y)` using `quad.mc_samples` draws.
pub fn monte_carlo_mi(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr: Snr,
    quad: &QuadratureSpec,
) -> Result<MonteCarloEstimate> {
    validate(input, channel, snr, quad)?;
    let (m, se) = direct::monte_carlo_nats(input, channel, quad)?;
    Ok(MonteCarloEstimate {
        bits: m * LOG2_E,
        std_error: se * LOG2_E,
    })
}

/// Decomposes `input`, rescaled to each SNR of the grid, on `channel`.
/// Grid points are evaluated in parallel; results keep the grid order.
pub fn sweep(
    input: &InputSpec,
    channel: &ChannelSpec,
    snr_grid: &[Snr],
    quad: &QuadratureSpec,
    with_direct: bool,
) -> Result<Vec<DecompositionResult>> {
    snr_grid
        .par_iter()
        .map(|&snr| {
            let x = input.with_power(channel.power_for_snr(snr))?;
            if with_direct {
                decompose_with_direct(&x, channel, snr, quad)
            } else {
                decompose(&x, channel, snr, quad)
            }
            .map_err(|e| Error::AtSnr {
                snr_db: snr.db(),
                source: Box::new(e),
            })
        })
        .collect()
}
