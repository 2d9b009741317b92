//! Decomposition for inputs with uniform phase independent of amplitude
//! (Gaussian, half-Gaussian amplitude, rings).
//!
//! For such inputs the output phase is uniform given both amplitudes, so the
//! first mixed term vanishes, and everything else reduces to one-dimensional
//! integrals per input amplitude `x`:
//!
//! * phase: `ln 2π - E h(ψ | x)` with `ψ` the output phase relative to the
//!   input phase;
//! * second mixed term: `E[h(ψ | x) - h(ψ | x, |Y|)]`, where given both
//!   amplitudes `ψ` is von Mises with concentration `x|Y|/σn²` (convolved
//!   with the phase noise, if any).

use std::f64::consts::PI;

use super::amplitude::{radial_marginal, AmplitudeDist};
use super::Terms;
use crate::channels::{awgn_phase_log_pdf_raw, rice_log_pdf_raw};
use crate::dirstats::{von_mises_entropy, CircularDistribution};
use crate::error::{Error, Result};
use crate::numerics::{
    bessel_ratio_sequence, density_from_coefficients, AngularGrid, QuadratureSpec, UnionGrid,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const ROW_TABLE_POINTS: usize = 512;
const MAX_PHASE_POINTS: usize = 1 << 20;

/// Entropy of the output phase given both amplitudes, as a function of the
/// von Mises concentration `κ = x y / σn²`.
enum RowEntropy {
    VonMises,
    /// Tabulated on a uniform grid in `s = ln(1 + κ)`.
    Table {
        step: f64,
        values: Vec<f64>,
    },
}

impl RowEntropy {
    fn new(pn: Option<&CircularDistribution>, kappa_max: f64, base_points: usize) -> Result<Self> {
        let Some(pn) = pn else {
            return Ok(Self::VonMises);
        };
        let rho = pn.moments().resultant_length;
        let pn_var = if rho > 0.0 {
            -2.0 * rho.ln()
        } else {
            f64::INFINITY
        };
        let narrowest = (1.0 / kappa_max.max(1e-12) + pn_var).sqrt();
        let n = grid_size_for_width(narrowest, base_points);
        let kernel = pn.fourier_kernel(n)?;
        let s_max = kappa_max.max(1.0).ln_1p();
        let step = s_max / (ROW_TABLE_POINTS - 1) as f64;
        let mut values = Vec::with_capacity(ROW_TABLE_POINTS);
        for i in 0..ROW_TABLE_POINTS {
            let kappa = (i as f64 * step).exp_m1();
            let vm = bessel_ratio_sequence(kappa, n / 2)?;
            let coeffs: Vec<_> = kernel
                .iter()
                .enumerate()
                .map(|(j, k)| {
                    k * vm[crate::numerics::signed_frequency(j, n).unsigned_abs() as usize]
                })
                .collect();
            values.push(density_from_coefficients(&coeffs).entropy());
        }
        Ok(Self::Table { step, values })
    }

    fn eval(&self, kappa: f64) -> f64 {
        match self {
            Self::VonMises => von_mises_entropy(kappa),
            Self::Table { step, values } => {
                let s = kappa.ln_1p() / step;
                let last = values.len() - 1;
                if s >= last as f64 {
                    return values[last];
                }
                let i = s.floor() as usize;
                let t = s - i as f64;
                let at = |k: isize| values[k.clamp(0, last as isize) as usize];
                let (p0, p1, p2, p3) = (
                    at(i as isize - 1),
                    at(i as isize),
                    at(i as isize + 1),
                    at(i as isize + 2),
                );
                // Catmull–Rom
                p1 + 0.5
                    * t
                    * (p2 - p0
                        + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
                            + t * (3.0 * (p1 - p2) + p3 - p0)))
            }
        }
    }
}

/// Grid size resolving a peak of the given angular width by at least two
/// points per width.
pub(crate) fn grid_size_for_width(width: f64, base: usize) -> usize {
    if !(width > 0.0) || !width.is_finite() {
        return base;
    }
    let need = (4.0 * PI / width).ceil() as usize;
    base.max(need.next_power_of_two()).min(MAX_PHASE_POINTS)
}

/// Relative output-phase density for input amplitude `x`.
pub(crate) fn relative_phase_grid(
    x: f64,
    noise_var: f64,
    pn: Option<&CircularDistribution>,
    base_points: usize,
) -> Result<AngularGrid> {
    let n = if x > 0.0 {
        grid_size_for_width(noise_var.sqrt() / x, base_points)
    } else {
        base_points
    };
    let a = x / (2.0 * noise_var).sqrt();
    let g = AngularGrid::from_fn(n, |t| awgn_phase_log_pdf_raw(t.cos(), t.sin(), a).exp())?
        .normalized()?;
    match pn {
        None => Ok(g),
        Some(pn) => g.filtered(&pn.fourier_kernel(n)?)?.normalized(),
    }
}

struct RiceWindow {
    mass: f64,
    entropy: f64,
    row_entropy: f64,
}

/// Composite Gauss–Legendre quadrature of the Rice density over `x ± T σn`,
/// returning its mass, entropy and the Rice-weighted average of the phase
/// row entropy.
fn rice_window(
    x: f64,
    noise_var: f64,
    quad: &QuadratureSpec,
    row: Option<&RowEntropy>,
) -> RiceWindow {
    let span = quad.amp_truncation_sigmas * noise_var.sqrt();
    let grid = UnionGrid::new(&[((x - span).max(0.0), x + span)], quad.amp_points);
    let mut out = RiceWindow {
        mass: 0.0,
        entropy: 0.0,
        row_entropy: 0.0,
    };
    for (&y, &h) in grid.nodes.iter().zip(&grid.weights) {
        let lp = rice_log_pdf_raw(y, x, noise_var);
        if lp < -745.0 {
            continue;
        }
        let p = lp.exp() * h;
        out.mass += p;
        out.entropy -= p * lp;
        if let Some(r) = row {
            out.row_entropy += p * r.eval(x * y / noise_var);
        }
    }
    out
}

fn check_window(x: f64, w: &RiceWindow) -> Result<()> {
    if (w.mass - 1.0).abs() > 1e-6 {
        return Err(Error::Truncation(format!(
            "Rice density for input amplitude {x} keeps mass {} inside its window",
            w.mass
        )));
    }
    Ok(())
}

/// All four terms in nats. With `with_mixed = false` the second mixed term
/// is skipped and reported as zero.
pub(crate) fn circular_terms(
    amp: &AmplitudeDist,
    noise_var: f64,
    pn: Option<&CircularDistribution>,
    quad: &QuadratureSpec,
    with_mixed: bool,
) -> Result<Terms> {
    let nodes = amp.nodes();
    let marginal = radial_marginal(amp, noise_var, quad.amp_truncation_sigmas, quad.amp_points);
    marginal.check_mass("output amplitude density")?;

    let row = if with_mixed {
        let span = quad.amp_truncation_sigmas * noise_var.sqrt();
        let kappa_max = nodes
            .iter()
            .map(|(x, _)| x * (x + span) / noise_var)
            .fold(0.0, f64::max);
        Some(RowEntropy::new(pn, kappa_max, quad.phase_points)?)
    } else {
        None
    };

    let mut rice_entropy = 0.0;
    let mut phase_entropy = 0.0;
    let mut mixed2 = 0.0;
    for &(x, w) in &nodes {
        let win = rice_window(x, noise_var, quad, row.as_ref());
        check_window(x, &win)?;
        rice_entropy += w * win.entropy;
        let h_phase = relative_phase_grid(x, noise_var, pn, quad.phase_points)?.entropy();
        phase_entropy += w * h_phase;
        if row.is_some() {
            mixed2 += w * (h_phase - win.row_entropy);
        }
    }

    let amplitude = match amp {
        AmplitudeDist::Law(_) => marginal.entropy() - rice_entropy,
        AmplitudeDist::Levels(levels) => {
            // relative-entropy form avoids differencing two large entropies
            let mut acc = 0.0;
            for &(r, p) in levels {
                for ((y, wy), py) in marginal
                    .nodes
                    .iter()
                    .zip(&marginal.weights)
                    .zip(&marginal.density)
                {
                    let lp = rice_log_pdf_raw(*y, r, noise_var);
                    if lp > -745.0 && *py > 0.0 {
                        acc += p * wy * lp.exp() * (lp - py.ln());
                    }
                }
            }
            acc
        }
    };

    Ok(Terms {
        amplitude,
        phase: LN_2PI - phase_entropy,
        mixed1: 0.0,
        mixed2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre;

    #[test]
    fn grid_sizes_are_powers_of_two_within_bounds() {
        assert_eq!(grid_size_for_width(10.0, 256), 256);
        assert_eq!(grid_size_for_width(f64::NAN, 256), 256);
        let n = grid_size_for_width(1e-3, 256);
        assert!(n.is_power_of_two() && n as f64 >= 4.0 * PI / 1e-3);
        assert_eq!(grid_size_for_width(1e-12, 256), MAX_PHASE_POINTS);
    }

    /// Entropy of von Mises(κ) convolved with a wrapped Gaussian, by direct
    /// quadrature of the convolution integral at each output angle.
    fn convolved_entropy(kappa: f64, sigma: f64) -> f64 {
        let vm = CircularDistribution::von_mises(0.0, kappa).unwrap();
        let wg = CircularDistribution::wrapped_gaussian(0.0, sigma).unwrap();
        let nodes: Vec<(f64, f64)> = (0..64)
            .flat_map(|i| {
                let lo = -PI + i as f64 * PI / 32.0;
                gauss_legendre(12, lo, lo + PI / 32.0)
            })
            .collect();
        let n = 512;
        let step = 2.0 * PI / n as f64;
        -(0..n)
            .map(|k| {
                let t = -PI + k as f64 * step;
                let p: f64 = nodes
                    .iter()
                    .map(|(f, w)| w * vm.pdf(*f).unwrap() * wg.pdf(t - f).unwrap())
                    .sum();
                p * p.ln() * step
            })
            .sum::<f64>()
    }

    #[test]
    fn row_table_matches_direct_convolution() {
        let wg = CircularDistribution::wrapped_gaussian(0.0, 0.4).unwrap();
        let row = RowEntropy::new(Some(&wg), 1e3, 1024).unwrap();
        for kappa in [0.05, 0.7, 3.3, 41.0, 400.0] {
            let expect = convolved_entropy(kappa, 0.4);
            assert!((row.eval(kappa) - expect).abs() < 1e-5, "κ {kappa}");
        }
        // without phase noise the rows are plain von Mises
        let plain = RowEntropy::new(None, 1e3, 1024).unwrap();
        assert_eq!(plain.eval(2.0), von_mises_entropy(2.0));
    }

    #[test]
    fn uniform_phase_noise_rows_are_uniform() {
        let row = RowEntropy::new(Some(&CircularDistribution::Uniform), 100.0, 256).unwrap();
        for kappa in [0.0, 1.0, 50.0] {
            assert!((row.eval(kappa) - LN_2PI).abs() < 1e-10);
        }
    }

    #[test]
    fn relative_phase_density_is_normalized() {
        let g = relative_phase_grid(0.0, 0.5, None, 256).unwrap();
        assert!((g.entropy() - LN_2PI).abs() < 1e-12);
        let g = relative_phase_grid(30.0, 0.5, None, 256).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-12);
        assert_eq!(g.len(), 1024);
        // high amplitude: the phase is nearly Gaussian with variance σn²/x²
        let approx = 0.5 * (2.0 * PI * std::f64::consts::E * 0.5 / 900.0).ln();
        assert!((g.entropy() - approx).abs() < 1e-3);
    }

    #[test]
    fn rice_window_captures_the_density() {
        let quad = QuadratureSpec::default();
        for x in [0.0, 0.3, 5.0, 300.0] {
            let w = rice_window(x, 0.5, &quad, None);
            assert!((w.mass - 1.0).abs() < 1e-9, "x {x}: {}", w.mass);
        }
        // far from the origin the Rice law is Gaussian with variance σn²
        let w = rice_window(300.0, 0.5, &quad, None);
        let gauss = 0.5 * (2.0 * PI * std::f64::consts::E * 0.5).ln();
        assert!((w.entropy - gauss).abs() < 1e-5);
    }
}
