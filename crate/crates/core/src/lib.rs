//! Amplitude/phase decomposition of mutual information over complex AWGN
//! channels, optionally with phase noise or spectral loss.
//!
//! With `X` the channel input and `Y` the output, the total information
//! `I(X;Y)` splits into four non-negative terms:
//!
//! * amplitude: `I(|X|; |Y|)`
//! * phase: `I(∠X; ∠Y | |X|)`
//! * mixed I: `I(|X|; ∠Y | |Y|)`
//! * mixed II: `I(∠X; |Y| | |X|, ∠Y)`
//!
//! The modules build up from special functions ([`numerics`]) and circular
//! statistics ([`dirstats`]) to channel densities ([`channels`]), input
//! distributions ([`inputs`]), the decomposition itself ([`decomp`]) and the
//! spectral-loss / fiber models ([`spectral`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod decomp;
pub mod dirstats;
mod error;
pub mod inputs;
pub mod numerics;
pub mod spectral;

pub use error::{Error, Result};

/// Bits per nat.
pub(crate) const LOG2_E: f64 = std::f64::consts::LOG2_E;
