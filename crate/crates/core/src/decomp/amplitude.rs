//! Amplitude laws of the continuous circular inputs and the output-amplitude
//! marginal they induce.

use std::f64::consts::PI;

use crate::channels::rice_log_pdf_raw;
use crate::error::{Error, Result};
use crate::inputs::{InputKind, InputSpec};
use crate::numerics::{erfc_inv, gauss_legendre, UnionGrid};

/// Gauss–Legendre nodes used for expectations over a continuous amplitude.
pub(crate) const AMPLITUDE_NODES: usize = 128;

/// Probability left beyond the last amplitude considered.
const TAIL_PROB: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AmplitudeLaw {
    /// `|X|` of a circular Gaussian with `E|X|² = power`.
    Rayleigh { power: f64 },
    /// `|Z|` with `Z ~ N(0, power)`.
    HalfNormal { power: f64 },
}

impl AmplitudeLaw {
    pub(crate) fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Rayleigh { power } => 2.0 * x / power * (-x * x / power).exp(),
            Self::HalfNormal { power } => {
                (2.0 / (PI * power)).sqrt() * (-0.5 * x * x / power).exp()
            }
        }
    }

    /// Inverse CDF on `(0, 1)`.
    pub(crate) fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Rayleigh { power } => (-power * (-u).ln_1p()).sqrt(),
            Self::HalfNormal { power } => {
                (2.0 * power).sqrt() * erfc_inv(1.0 - u).expect("u in (0, 1)")
            }
        }
    }

    pub(crate) fn power(&self) -> f64 {
        match *self {
            Self::Rayleigh { power } | Self::HalfNormal { power } => power,
        }
    }

    pub(crate) fn upper(&self) -> f64 {
        self.quantile(1.0 - TAIL_PROB)
    }

    /// Expectation nodes: Gauss–Legendre in probability space, mapped
    /// through the quantile function.
    pub(crate) fn nodes(&self) -> Vec<(f64, f64)> {
        gauss_legendre(AMPLITUDE_NODES, 0.0, 1.0)
            .into_iter()
            .map(|(u, w)| (self.quantile(u), w))
            .collect()
    }
}

/// Amplitude side of a circularly symmetric input after any channel gain.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum AmplitudeDist {
    Law(AmplitudeLaw),
    /// Finite set of `(radius, probability)` rings.
    Levels(Vec<(f64, f64)>),
}

impl AmplitudeDist {
    /// `None` for discrete constellations, which are not circularly
    /// symmetric.
    pub(crate) fn from_input(input: &InputSpec, gain: f64) -> Option<Self> {
        let g2 = gain * gain;
        match &input.kind {
            InputKind::GaussianComplex => Some(Self::Law(AmplitudeLaw::Rayleigh {
                power: input.power * g2,
            })),
            InputKind::HalfGaussianAmplitude => Some(Self::Law(AmplitudeLaw::HalfNormal {
                power: input.power * g2,
            })),
            InputKind::Rings { radii, probs } => Some(Self::Levels(
                radii
                    .iter()
                    .zip(probs)
                    .map(|(r, p)| (r * gain, *p))
                    .collect(),
            )),
            InputKind::Discrete { .. } => None,
        }
    }

    /// Expectation nodes `(x, weight)` over the input amplitude.
    pub(crate) fn nodes(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Law(l) => l.nodes(),
            Self::Levels(v) => v.iter().copied().filter(|(_, p)| *p > 0.0).collect(),
        }
    }
}

/// Density of `|Y|` on a quadrature grid.
#[derive(Debug, Clone)]
pub(crate) struct RadialMarginal {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub density: Vec<f64>,
}

impl RadialMarginal {
    pub(crate) fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    /// Differential entropy in nats.
    pub(crate) fn entropy(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, w)| -w * p * p.ln())
            .sum()
    }

    pub(crate) fn check_mass(&self, what: &str) -> Result<()> {
        let m = self.mass();
        if (m - 1.0).abs() > 1e-6 {
            return Err(Error::Truncation(format!("{what} integrates to {m}")));
        }
        Ok(())
    }
}

/// Output-amplitude marginal `p(y) = ∫ p_X(x) Rice(y | x) dx`.
///
/// For a continuous law the convolution uses the trapezoid rule on a fine
/// input grid, restricted to the band where the Rice kernel is non-negligible.
pub(crate) fn radial_marginal(
    amp: &AmplitudeDist,
    noise_var: f64,
    truncation_sigmas: f64,
    amp_points: usize,
) -> RadialMarginal {
    let sd = noise_var.sqrt();
    match amp {
        AmplitudeDist::Levels(levels) => {
            let windows: Vec<(f64, f64)> = levels
                .iter()
                .map(|(r, _)| {
                    (
                        (r - truncation_sigmas * sd).max(0.0),
                        r + truncation_sigmas * sd,
                    )
                })
                .collect();
            let grid = UnionGrid::new(&windows, 8 * amp_points);
            let density = grid
                .nodes
                .iter()
                .map(|&y| {
                    levels
                        .iter()
                        .map(|(r, p)| {
                            let lp = rice_log_pdf_raw(y, *r, noise_var);
                            if lp > -745.0 {
                                p * lp.exp()
                            } else {
                                0.0
                            }
                        })
                        .sum()
                })
                .collect();
            RadialMarginal {
                nodes: grid.nodes,
                weights: grid.weights,
                density,
            }
        }
        AmplitudeDist::Law(law) => {
            let y_max = truncation_sigmas * (law.power() + 2.0 * noise_var).sqrt();
            let ny = ((y_max / (0.25 * sd)).ceil() as usize).max(4 * amp_points);
            let y = UnionGrid::new(&[(0.0, y_max)], ny);
            let x_max = law.upper();
            let nx = ((x_max / (0.25 * sd)).ceil() as usize).max(2048);
            let x = UnionGrid::new(&[(0.0, x_max)], nx);
            let px: Vec<f64> = x
                .nodes
                .iter()
                .zip(&x.weights)
                .map(|(&t, &w)| w * law.pdf(t))
                .collect();
            let band = 10.0 * sd;
            let density = y
                .nodes
                .iter()
                .map(|&yi| {
                    let lo = x.nodes.partition_point(|&t| t < yi - band);
                    let hi = x.nodes.partition_point(|&t| t <= yi + band);
                    (lo..hi)
                        .map(|j| {
                            let lp = rice_log_pdf_raw(yi, x.nodes[j], noise_var);
                            if lp > -745.0 {
                                px[j] * lp.exp()
                            } else {
                                0.0
                            }
                        })
                        .sum()
                })
                .collect();
            RadialMarginal {
                nodes: y.nodes,
                weights: y.weights,
                density,
            }
        }
    }
}
