//! Total mutual information computed without the polar split, as an
//! independent check on the four-term decomposition.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::amplitude::{radial_marginal, AmplitudeDist, AmplitudeLaw};
use crate::channels::{rice_log_pdf_raw, ChannelSpec};
use crate::dirstats::{wrap_angle, CircularDistribution};
use crate::error::Result;
use crate::inputs::{InputKind, InputSpec};
use crate::numerics::{gauss_hermite, gauss_legendre, QuadratureSpec};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const HERMITE_NODES: usize = 32;
const HERMITE_NODES_PN: usize = 12;
const PN_ANGLE_NODES: usize = 32;
const PN_AMPLITUDE_NODES: usize = 32;

/// `I(X; Y)` in nats for a prepared input on a validated channel.
pub(crate) fn direct_nats(
    input: &InputSpec,
    channel: &ChannelSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let gain = channel.amplitude_gain();
    let v = channel.noise_variance_per_dim;
    match (&input.kind, &channel.phase_noise) {
        (InputKind::Discrete { points, probs }, None) => {
            let pts: Vec<Complex64> = points.iter().map(|x| x * gain).collect();
            Ok(discrete_awgn(&pts, probs, v))
        }
        (InputKind::Discrete { points, probs }, Some(pn)) => {
            let kernel = PhaseKernel::new(pn, v);
            Ok(discrete_phase_noise(points, probs, &kernel))
        }
        (_, pn) => {
            let amp = AmplitudeDist::from_input(input, gain).expect("circular input");
            let h_y = output_entropy_radial(&amp, v, quad);
            let h_y_given_x = match pn {
                None => (2.0 * PI * std::f64::consts::E * v).ln(),
                Some(pn) => conditional_entropy_phase_noise(&amp, &PhaseKernel::new(pn, v)),
            };
            Ok(h_y - h_y_given_x)
        }
    }
}

/// Finite constellation on AWGN: Gauss–Hermite over the noise of
/// `-E ln Σ_j p_j exp(-(|x_i - x_j + n|² - |n|²) / 2σn²)`.
fn discrete_awgn(points: &[Complex64], probs: &[f64], v: f64) -> f64 {
    let gh = gauss_hermite(HERMITE_NODES);
    let s = (2.0 * v).sqrt();
    let mut total = 0.0;
    let mut terms = vec![0.0; points.len()];
    for (&xi, &pi) in points.iter().zip(probs) {
        if pi == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for &(u, wu) in &gh {
            for &(t, wt) in &gh {
                let n = Complex64::new(s * u, s * t);
                let n2 = n.norm_sqr();
                let mut mx = f64::NEG_INFINITY;
                for (j, (&xj, &pj)) in points.iter().zip(probs).enumerate() {
                    terms[j] = if pj > 0.0 {
                        pj.ln() - ((xi - xj + n).norm_sqr() - n2) / (2.0 * v)
                    } else {
                        f64::NEG_INFINITY
                    };
                    mx = mx.max(terms[j]);
                }
                let lse = mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln();
                acc += wu * wt * lse;
            }
        }
        total -= pi * acc / PI;
    }
    total
}

/// Output entropy `h(Y)` of a circularly symmetric output from its radial
/// marginal: `h(Y) = h(|Y|) + ln 2π + E ln |Y|`.
///
/// The marginal is built here with composite Gauss–Legendre rules, separately
/// from the midpoint/trapezoid construction used by the decomposition.
fn output_entropy_radial(amp: &AmplitudeDist, v: f64, quad: &QuadratureSpec) -> f64 {
    let sd = v.sqrt();
    let order = 8;
    let t = quad.amp_truncation_sigmas;
    let panels = |a: f64, b: f64, width: f64| -> Vec<(f64, f64)> {
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n)
            .flat_map(|i| gauss_legendre(order, a + i as f64 * h, a + (i + 1) as f64 * h))
            .collect()
    };
    let (y_nodes, density): (Vec<(f64, f64)>, Vec<f64>) = match amp {
        AmplitudeDist::Levels(levels) => {
            let mut windows: Vec<(f64, f64)> = levels
                .iter()
                .map(|(r, _)| ((r - t * sd).max(0.0), r + t * sd))
                .collect();
            windows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (a, b) in windows {
                match merged.last_mut() {
                    Some(last) if a <= last.1 => last.1 = last.1.max(b),
                    _ => merged.push((a, b)),
                }
            }
            let nodes: Vec<(f64, f64)> = merged
                .iter()
                .flat_map(|&(a, b)| panels(a, b, 0.5 * sd))
                .collect();
            let dens = nodes
                .iter()
                .map(|&(y, _)| {
                    levels
                        .iter()
                        .map(|&(r, p)| p * rice_log_pdf_raw(y, r, v).exp())
                        .sum()
                })
                .collect();
            (nodes, dens)
        }
        AmplitudeDist::Law(law) => {
            let y_max = t * (law.power() + 2.0 * v).sqrt();
            let y_nodes = panels(0.0, y_max, (0.5 * sd).min(y_max / 512.0));
            let x_max = law.upper();
            let x_nodes = panels(0.0, x_max, (0.5 * sd).min(x_max / 256.0));
            let px: Vec<f64> = x_nodes.iter().map(|&(x, w)| w * law.pdf(x)).collect();
            let band = 10.0 * sd;
            let dens = y_nodes
                .iter()
                .map(|&(y, _)| {
                    let lo = x_nodes.partition_point(|&(x, _)| x < y - band);
                    let hi = x_nodes.partition_point(|&(x, _)| x <= y + band);
                    (lo..hi)
                        .map(|j| {
                            let lp = rice_log_pdf_raw(y, x_nodes[j].0, v);
                            if lp > -745.0 {
                                px[j] * lp.exp()
                            } else {
                                0.0
                            }
                        })
                        .sum()
                })
                .collect();
            (y_nodes, dens)
        }
    };
    let mut h = 0.0;
    let mut mean_log = 0.0;
    for (&(y, w), &p) in y_nodes.iter().zip(&density) {
        if p > 0.0 {
            h -= w * p * p.ln();
            mean_log += w * p * y.ln();
        }
    }
    h + LN_2PI + mean_log
}

/// Evaluates `p(y | x)` for `Y = x e^{jΘ} + N` by integrating the phase
/// noise against the von Mises-shaped Gaussian kernel.
struct PhaseKernel {
    v: f64,
    /// Phase-noise density tabulated on a fine periodic grid.
    table: Vec<f64>,
    angles: Vec<(f64, f64)>,
}

const PN_TABLE: usize = 1 << 14;

impl PhaseKernel {
    fn new(pn: &CircularDistribution, v: f64) -> Self {
        let step = 2.0 * PI / PN_TABLE as f64;
        let mut table: Vec<f64> = (0..PN_TABLE)
            .map(|k| pn.pdf_unchecked(-PI + k as f64 * step))
            .collect();
        table.push(table[0]);
        let angles = {
            let grid = pn
                .to_grid(PN_ANGLE_NODES.next_power_of_two().max(64))
                .expect("valid grid");
            let step = grid.step();
            let mut v: Vec<(f64, f64)> = (0..grid.len())
                .map(|k| (grid.angle(k), grid.values()[k] * step))
                .filter(|(_, w)| *w > 0.0)
                .collect();
            let total: f64 = v.iter().map(|p| p.1).sum();
            v.iter_mut().for_each(|p| p.1 /= total);
            v
        };
        Self { v, table, angles }
    }

    fn pn_pdf(&self, t: f64) -> f64 {
        let s = (wrap_angle(t) + PI) / (2.0 * PI) * PN_TABLE as f64;
        let i = (s.floor() as usize).min(PN_TABLE - 1);
        let f = s - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }

    /// `ln p(y | x)` for a real non-negative `x` rotated by `phase`.
    fn ln_density(&self, y: Complex64, radius: f64, phase: f64) -> f64 {
        self.ln_density_above(y, radius, phase, f64::NEG_INFINITY)
    }

    /// As [`Self::ln_density`], but returns `-∞` without integrating when
    /// the result is certainly below `floor`.
    fn ln_density_above(&self, y: Complex64, radius: f64, phase: f64, floor: f64) -> f64 {
        let rho = y.norm();
        let psi = y.arg() - phase;
        let d = rho - radius;
        let base = -(2.0 * PI * self.v).ln() - d * d / (2.0 * self.v);
        // the phase integral is at most one
        if base < floor {
            return f64::NEG_INFINITY;
        }
        let kappa = radius * rho / self.v;
        let j = if kappa < 50.0 {
            let n = if kappa < 8.0 { 64 } else { 128 };
            let h = 2.0 * PI / n as f64;
            (0..n)
                .map(|k| {
                    let t = -PI + k as f64 * h;
                    self.pn_pdf(t) * (kappa * ((psi - t).cos() - 1.0)).exp()
                })
                .sum::<f64>()
                * h
        } else {
            let half = 12.0 / kappa.sqrt();
            let n = 96;
            let h = 2.0 * half / n as f64;
            (0..=n)
                .map(|k| {
                    let t = psi - half + k as f64 * h;
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    w * self.pn_pdf(t) * (kappa * ((psi - t).cos() - 1.0)).exp()
                })
                .sum::<f64>()
                * h
        };
        base + j.max(1e-300).ln()
    }
}

/// `h(Y | X)` for a circular input under phase noise, averaging over the
/// input amplitude, the phase-noise angle and the additive noise.
fn conditional_entropy_phase_noise(amp: &AmplitudeDist, kernel: &PhaseKernel) -> f64 {
    let nodes = match amp {
        AmplitudeDist::Law(law) => coarse_nodes(law),
        AmplitudeDist::Levels(_) => amp.nodes(),
    };
    let gh = gauss_hermite(HERMITE_NODES_PN);
    let s = (2.0 * kernel.v).sqrt();
    let mut h = 0.0;
    for &(x, wx) in &nodes {
        let mut acc = 0.0;
        for &(theta, wt) in &kernel.angles {
            let sig = Complex64::from_polar(x, theta);
            for &(u, wu) in &gh {
                for &(t, wv) in &gh {
                    let y = sig + Complex64::new(s * u, s * t);
                    acc += wt * wu * wv / PI * kernel.ln_density(y, x, 0.0);
                }
            }
        }
        h -= wx * acc;
    }
    h
}

fn coarse_nodes(law: &AmplitudeLaw) -> Vec<(f64, f64)> {
    gauss_legendre(PN_AMPLITUDE_NODES, 0.0, 1.0)
        .into_iter()
        .map(|(u, w)| (law.quantile(u), w))
        .collect()
}

fn discrete_phase_noise(points: &[Complex64], probs: &[f64], kernel: &PhaseKernel) -> f64 {
    let gh = gauss_hermite(HERMITE_NODES_PN);
    let s = (2.0 * kernel.v).sqrt();
    let polar: Vec<(f64, f64)> = points.iter().map(|x| (x.norm(), x.arg())).collect();
    let mut total = 0.0;
    for (i, &(ri, ai)) in polar.iter().enumerate() {
        if probs[i] == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for &(theta, wt) in &kernel.angles {
            let sig = Complex64::from_polar(ri, ai + theta);
            for &(u, wu) in &gh {
                for &(t, wv) in &gh {
                    let y = sig + Complex64::new(s * u, s * t);
                    let own = kernel.ln_density(y, ri, ai);
                    let floor = own - 40.0;
                    let mix = log_mixture(&polar, probs, |r, a| {
                        kernel.ln_density_above(y, r, a, floor)
                    });
                    acc += wt * wu * wv / PI * (own - mix);
                }
            }
        }
        total += probs[i] * acc;
    }
    total
}

fn log_mixture(polar: &[(f64, f64)], probs: &[f64], lnp: impl Fn(f64, f64) -> f64) -> f64 {
    let terms: Vec<f64> = polar
        .iter()
        .zip(probs)
        .map(|(&(r, a), &p)| {
            if p > 0.0 {
                p.ln() + lnp(r, a)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
}

/// Monte Carlo estimate of `I(X; Y)` in bits with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub bits: f64,
    pub std_error: f64,
}

/// Sample-average estimate `E[ln p(Y|X) - ln p(Y)]`, reproducible from the
/// quadrature seed. Independent of both the decomposition and the
/// quadrature route of the direct computation.
pub(crate) fn monte_carlo_nats(
    input: &InputSpec,
    channel: &ChannelSpec,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let gain = channel.amplitude_gain();
    let v = channel.noise_variance_per_dim;
    let n = quad.mc_samples;
    let xs = input.sample(n, quad.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(quad.seed ^ 0x9E37_79B9_7F4A_7C15);
    let kernel = channel
        .phase_noise
        .as_ref()
        .map(|pn| PhaseKernel::new(pn, v));
    let sd = v.sqrt();

    let ln_cond = |y: Complex64, x: Complex64, floor: f64| -> f64 {
        match &kernel {
            None => -(2.0 * PI * v).ln() - (y - x).norm_sqr() / (2.0 * v),
            Some(k) => k.ln_density_above(y, x.norm(), x.arg(), floor),
        }
    };

    let discrete = match &input.kind {
        InputKind::Discrete { points, probs } => Some((
            points
                .iter()
                .map(|x| ((x * gain).norm(), x.arg()))
                .collect::<Vec<(f64, f64)>>(),
            probs.clone(),
        )),
        _ => None,
    };
    let radial = if discrete.is_none() {
        let amp = AmplitudeDist::from_input(input, gain).expect("circular input");
        Some(radial_marginal(
            &amp,
            v,
            quad.amp_truncation_sigmas,
            quad.amp_points,
        ))
    } else {
        None
    };

    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for x in xs {
        let x = x * gain;
        let rot = match &channel.phase_noise {
            Some(pn) => Complex64::from_polar(1.0, pn.sample(&mut rng)),
            None => Complex64::new(1.0, 0.0),
        };
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let y = x * rot + Complex64::new(sd * nr, sd * ni);
        let own = ln_cond(y, x, f64::NEG_INFINITY);
        let marg = match (&discrete, &radial) {
            (Some((polar, probs)), _) => log_mixture(polar, probs, |r, a| {
                ln_cond(y, Complex64::from_polar(r, a), own - 40.0)
            }),
            (None, Some(m)) => {
                let rho = y.norm();
                interp_log_density(m, rho) - (2.0 * PI * rho).ln()
            }
            _ => unreachable!(),
        };
        let s = own - marg;
        sum += s;
        sum2 += s * s;
    }
    let mean = sum / n as f64;
    let var = (sum2 / n as f64 - mean * mean).max(0.0);
    Ok((mean, (var / n as f64).sqrt()))
}

/// Linear interpolation of `ln p` between the nodes of a radial marginal.
fn interp_log_density(m: &super::amplitude::RadialMarginal, y: f64) -> f64 {
    let lp = |i: usize| m.density[i].max(1e-300).ln();
    let j = m.nodes.partition_point(|&t| t < y);
    if j == 0 {
        return lp(0);
    }
    if j == m.nodes.len() {
        return lp(j - 1);
    }
    let (a, b) = (m.nodes[j - 1], m.nodes[j]);
    let f = (y - a) / (b - a);
    lp(j - 1) * (1.0 - f) + lp(j) * f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre;

    /// BPSK on complex AWGN reduces to the real channel along the signal
    /// axis: `I = ln 2 - E ln(1 + e^{-2aY/σ²})` with `Y ~ N(a, σ²)`.
    fn bpsk_oracle(a: f64, v: f64) -> f64 {
        let s = v.sqrt();
        let (lo, hi) = (a - 12.0 * s, a + 12.0 * s);
        let h = (hi - lo) / 200.0;
        let e: f64 = (0..200)
            .flat_map(|i| gauss_legendre(10, lo + i as f64 * h, lo + (i + 1) as f64 * h))
            .map(|(y, w)| {
                let pdf = (-(y - a) * (y - a) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
                let z = -2.0 * a * y / v;
                let soft = if z > 30.0 {
                    z + (-z).exp().ln_1p()
                } else {
                    z.exp().ln_1p()
                };
                w * pdf * soft
            })
            .sum();
        std::f64::consts::LN_2 - e
    }

    #[test]
    fn bpsk_matches_real_channel_oracle() {
        let pts = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        // 32 Hermite nodes peak at about 1e-5 nats near 7 dB, where the
        // soft decision is sharpest relative to the node spacing
        for v in [2.0, 0.5, 0.1, 0.01] {
            let got = discrete_awgn(&pts, &[0.5, 0.5], v);
            let expect = bpsk_oracle(1.0, v);
            assert!((got - expect).abs() < 2e-5, "σ² {v}: {got} vs {expect}");
        }
    }

    #[test]
    fn gaussian_output_entropy_is_exact() {
        let amp = AmplitudeDist::Law(AmplitudeLaw::Rayleigh { power: 20.0 });
        let h = output_entropy_radial(&amp, 0.5, &QuadratureSpec::default());
        let expect = (PI * std::f64::consts::E * 21.0).ln();
        assert!((h - expect).abs() < 1e-7, "{h} vs {expect}");
    }

    #[test]
    fn weak_phase_noise_barely_changes_the_total() {
        let quad = QuadratureSpec::default();
        let input = InputSpec::psk(4, 4.0).unwrap();
        let clean = ChannelSpec::awgn(0.5).unwrap();
        let noisy = clean
            .clone()
            .with_phase_noise(CircularDistribution::wrapped_gaussian(0.0, 0.01).unwrap())
            .unwrap();
        let a = direct_nats(&input, &clean, &quad).unwrap();
        let b = direct_nats(&input, &noisy, &quad).unwrap();
        // agreement to the accuracy of the coarser phase-noise quadrature
        assert!((a - b).abs() < 2e-4, "{a} vs {b}");
    }

    #[test]
    fn uniform_phase_noise_leaves_only_amplitude() {
        // a single ring carries nothing once the phase is fully random
        let quad = QuadratureSpec::default();
        let ch = ChannelSpec::awgn(0.5)
            .unwrap()
            .with_phase_noise(CircularDistribution::Uniform)
            .unwrap();
        let ring = InputSpec::psk(8, 10.0).unwrap();
        assert!(direct_nats(&ring, &ch, &quad).unwrap().abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_agrees_with_gaussian_capacity() {
        let quad = QuadratureSpec {
            mc_samples: 100_000,
            ..Default::default()
        };
        let ch = ChannelSpec::awgn(0.5).unwrap();
        let g = InputSpec::gaussian(10.0).unwrap();
        let (m, se) = monte_carlo_nats(&g, &ch, &quad).unwrap();
        let exact = 11f64.ln();
        assert!((m - exact).abs() < 4.0 * se, "{m} ± {se} vs {exact}");
        assert_eq!(monte_carlo_nats(&g, &ch, &quad).unwrap(), (m, se));
    }
}
