//! Decomposition of finite constellations on a discretized polar output
//! grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::amplitude::{radial_marginal, AmplitudeDist};
use super::circular::grid_size_for_width;
use super::Terms;
use crate::channels::{awgn_phase_log_pdf_raw, rice_log_pdf_raw, ChannelSpec};
use crate::dirstats::CircularDistribution;
use crate::error::{Error, Result};
use crate::inputs::{InputKind, InputSpec};
use crate::numerics::{fft_forward, fft_inverse, AngularGrid, QuadratureSpec, UnionGrid};

/// Largest phase grid the two-dimensional engine will allocate.
const MAX_JOINT_PHASE_POINTS: usize = 1 << 14;
const MASS_TOL: f64 = 1e-6;

/// One constellation point as seen by the joint grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub radius: f64,
    pub phase: f64,
    pub prob: f64,
    pub level: usize,
}

/// Conditional output densities `p(|y|, ∠y | x_i)` of a finite constellation
/// on a polar grid: composite Gauss–Legendre nodes in amplitude (a union of
/// windows around each input amplitude) times a uniform phase grid.
///
/// Densities are generated on demand, one input point at a time, so memory
/// stays at a few grid-sized buffers regardless of constellation size.
#[derive(Debug, Clone)]
pub struct JointDensityGrid {
    amp: UnionGrid,
    phase_points: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    noise_var: f64,
    phase_noise: Option<CircularDistribution>,
    pn_kernel: Option<Vec<Complex64>>,
    points: Vec<GridPoint>,
    /// `(radius, probability, member indices)` per amplitude level.
    levels: Vec<(f64, f64, Vec<usize>)>,
}

impl JointDensityGrid {
    /// Builds the grid for a discrete input. Continuous-phase inputs are
    /// handled by a radial reduction instead and are rejected here.
    pub fn build(input: &InputSpec, channel: &ChannelSpec, quad: &QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        channel.validate()?;
        if !matches!(input.kind, InputKind::Discrete { .. }) {
            return Err(Error::Unsupported(
                "joint grid needs a discrete constellation".into(),
            ));
        }
        let gain = channel.amplitude_gain();
        let structure = input.polar_structure()?;
        let mut points = Vec::new();
        let mut levels = Vec::new();
        for (l, level) in structure.levels.iter().enumerate() {
            let phases = level.phases.as_ref().expect("discrete levels carry phases");
            let mut members = Vec::with_capacity(phases.len());
            for &(phase, q) in phases {
                members.push(points.len());
                points.push(GridPoint {
                    radius: level.radius * gain,
                    phase,
                    prob: q * level.prob,
                    level: l,
                });
            }
            levels.push((level.radius * gain, level.prob, members));
        }

        let sd = channel.noise_variance_per_dim.sqrt();
        let span = quad.amp_truncation_sigmas * sd;
        let windows: Vec<(f64, f64)> = levels
            .iter()
            .map(|(r, _, _)| ((r - span).max(0.0), r + span))
            .collect();
        let amp = UnionGrid::new(&windows, quad.amp_points);

        let pn_spread = match &channel.phase_noise {
            Some(pn) => {
                let rho = pn.moments().resultant_length;
                if rho > 0.0 {
                    -2.0 * rho.ln()
                } else {
                    f64::INFINITY
                }
            }
            None => 0.0,
        };
        let r_min = levels
            .iter()
            .map(|l| l.0)
            .filter(|&r| r > 0.0)
            .fold(f64::INFINITY, f64::min);
        let width = ((sd / r_min).powi(2) + pn_spread).sqrt();
        let phase_points =
            grid_size_for_width(width, quad.phase_points).min(MAX_JOINT_PHASE_POINTS);
        let step = 2.0 * PI / phase_points as f64;
        let angles: Vec<f64> = (0..phase_points).map(|k| -PI + k as f64 * step).collect();
        let pn_kernel = match &channel.phase_noise {
            Some(pn) => Some(pn.fourier_kernel(phase_points)?),
            None => None,
        };
        Ok(Self {
            amp,
            phase_points,
            cos: angles.iter().map(|t| t.cos()).collect(),
            sin: angles.iter().map(|t| t.sin()).collect(),
            noise_var: channel.noise_variance_per_dim,
            phase_noise: channel.phase_noise.clone(),
            pn_kernel,
            points,
            levels,
        })
    }

    pub fn amplitude_nodes(&self) -> &[f64] {
        &self.amp.nodes
    }

    pub fn amplitude_weights(&self) -> &[f64] {
        &self.amp.weights
    }

    pub fn phase_points(&self) -> usize {
        self.phase_points
    }

    pub fn phase_step(&self) -> f64 {
        2.0 * PI / self.phase_points as f64
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    /// Number of cells, amplitude-major.
    pub fn cells(&self) -> usize {
        self.amp.len() * self.phase_points
    }

    /// Fills `out` (amplitude-major, length [`Self::cells`]) with the
    /// conditional density of point `i`, Jacobian included, and returns its
    /// integral over the grid.
    pub fn conditional(&self, i: usize, out: &mut [f64]) -> f64 {
        let np = self.phase_points;
        let pt = self.points[i];
        let (cphi, sphi) = (pt.phase.cos(), pt.phase.sin());
        let v = self.noise_var;
        let step = self.phase_step();
        let mut buf = vec![Complex64::new(0.0, 0.0); if self.pn_kernel.is_some() { np } else { 0 }];
        let mut mass = 0.0;
        for (a, (&y, &wy)) in self.amp.nodes.iter().zip(&self.amp.weights).enumerate() {
            let row = &mut out[a * np..(a + 1) * np];
            let d = y - pt.radius;
            let base = (y / (2.0 * PI * v)).ln() - d * d / (2.0 * v);
            if base < -745.0 {
                row.fill(0.0);
                continue;
            }
            let kappa = pt.radius * y / v;
            for ((r, c), s) in row.iter_mut().zip(&self.cos).zip(&self.sin) {
                *r = (base - kappa * (1.0 - (c * cphi + s * sphi))).exp();
            }
            if let Some(kernel) = &self.pn_kernel {
                for (b, &r) in buf.iter_mut().zip(row.iter()) {
                    *b = Complex64::new(r, 0.0);
                }
                fft_forward(&mut buf);
                for (b, k) in buf.iter_mut().zip(kernel) {
                    *b *= k;
                }
                fft_inverse(&mut buf);
                for (r, b) in row.iter_mut().zip(&buf) {
                    *r = b.re.max(0.0);
                }
            }
            mass += row.iter().sum::<f64>() * step * wy;
        }
        mass
    }
}

/// Entropy-free log ratio with floors so empty cells contribute nothing.
#[inline]
fn ln_floor(x: f64) -> f64 {
    x.max(1e-300).ln()
}

/// Amplitude term as a relative entropy over the 1-D Rice mixture.
fn amplitude_term(grid: &JointDensityGrid, quad: &QuadratureSpec) -> Result<f64> {
    let levels: Vec<(f64, f64)> = grid.levels.iter().map(|(r, p, _)| (*r, *p)).collect();
    if levels.len() == 1 {
        return Ok(0.0);
    }
    let amp = AmplitudeDist::Levels(levels.clone());
    let m = radial_marginal(
        &amp,
        grid.noise_var,
        quad.amp_truncation_sigmas,
        quad.amp_points,
    );
    m.check_mass("output amplitude density")?;
    let mut acc = 0.0;
    for &(r, p) in &levels {
        for ((y, wy), py) in m.nodes.iter().zip(&m.weights).zip(&m.density) {
            let lp = rice_log_pdf_raw(*y, r, grid.noise_var);
            if lp > -745.0 && *py > 0.0 {
                acc += p * wy * lp.exp() * (lp - py.ln());
            }
        }
    }
    Ok(acc)
}

/// Phase term from the one-dimensional phase densities of each point:
/// `Σ_levels P(r) Σ_i q_i D(p(ψ | x_i) ‖ p(ψ | r))`.
fn phase_term(grid: &JointDensityGrid, quad: &QuadratureSpec) -> Result<f64> {
    let sd = grid.noise_var.sqrt();
    let mut total = 0.0;
    for (radius, prob, members) in &grid.levels {
        if members.len() < 2 || *radius == 0.0 {
            continue;
        }
        let n = grid_size_for_width(sd / radius, quad.phase_points);
        let a = radius / (2.0 * grid.noise_var).sqrt();
        let kernel = match &grid.phase_noise {
            Some(pn) => Some(pn.fourier_kernel(n)?),
            None => None,
        };
        let mut dens = Vec::with_capacity(members.len());
        for &i in members {
            let phi = grid.points[i].phase;
            let mut g = AngularGrid::from_fn(n, |t| {
                let d = t - phi;
                awgn_phase_log_pdf_raw(d.cos(), d.sin(), a).exp()
            })?
            .normalized()?;
            if let Some(k) = &kernel {
                g = g.filtered(k)?.normalized()?;
            }
            dens.push((grid.points[i].prob / prob, g));
        }
        let mut mix = vec![0.0; n];
        for (q, g) in &dens {
            for (m, v) in mix.iter_mut().zip(g.values()) {
                *m += q * v;
            }
        }
        // the mixture is bounded below by q·g; cells below the floor carry
        // no measurable mass and would only risk underflow
        let mut level_term = 0.0;
        for (q, g) in &dens {
            let d: f64 = g
                .values()
                .iter()
                .zip(&mix)
                .filter(|(v, _)| **v > 1e-300)
                .map(|(v, m)| v * (v.ln() - m.max(q * v).ln()))
                .sum();
            level_term += q * d * g.step();
        }
        total += prob * level_term;
    }
    Ok(total)
}

fn check_mass(i: usize, mass: f64) -> Result<()> {
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Truncation(format!(
            "conditional density of constellation point {i} has grid mass {mass}"
        )));
    }
    Ok(())
}

/// The two mixed terms from the joint grid.
///
/// Pass one accumulates the output density and the amplitude and phase
/// marginals; pass two regenerates each level's density to evaluate
/// `I(|X|; ∠Y | |Y|)` and each point's density for `I(∠X; |Y| | |X|, ∠Y)`.
fn mixed_terms(grid: &JointDensityGrid) -> Result<(f64, f64)> {
    let na = grid.amp.len();
    let np = grid.phase_points;
    let step = grid.phase_step();
    let cells = grid.cells();
    let multi_level = grid.levels.len() > 1;
    let any_shared = grid.levels.iter().any(|l| l.2.len() > 1);
    if !multi_level && !any_shared {
        return Ok((0.0, 0.0));
    }

    let mut f = vec![0.0; cells];
    let mut p_y = vec![0.0; cells];
    let mut amp_given_level = vec![vec![0.0; na]; grid.levels.len()];
    let mut phase_given_point = vec![Vec::new(); grid.points.len()];
    for (i, pt) in grid.points.iter().enumerate() {
        check_mass(i, grid.conditional(i, &mut f))?;
        let q = pt.prob / grid.levels[pt.level].1;
        let mut pp = vec![0.0; np];
        for a in 0..na {
            let row = &f[a * np..(a + 1) * np];
            let wy = grid.amp.weights[a];
            let mut row_mass = 0.0;
            for (k, &v) in row.iter().enumerate() {
                p_y[a * np + k] += pt.prob * v;
                pp[k] += v * wy;
                row_mass += v;
            }
            amp_given_level[pt.level][a] += q * row_mass * step;
        }
        phase_given_point[i] = pp;
    }
    let amp_marginal: Vec<f64> = (0..na)
        .map(|a| {
            grid.levels
                .iter()
                .zip(&amp_given_level)
                .map(|(l, m)| l.1 * m[a])
                .sum()
        })
        .collect();

    let mut mixed1 = 0.0;
    let mut mixed2 = 0.0;
    let mut g = vec![0.0; cells];
    for (l, (_, level_prob, members)) in grid.levels.iter().enumerate() {
        let shared = members.len() > 1;
        if !multi_level && !shared {
            continue;
        }
        g.fill(0.0);
        for &i in members {
            grid.conditional(i, &mut f);
            let q = grid.points[i].prob / level_prob;
            for (gc, fc) in g.iter_mut().zip(&f) {
                *gc += q * fc;
            }
        }
        if multi_level {
            let mut acc = 0.0;
            for a in 0..na {
                let ratio = amp_marginal[a] / amp_given_level[l][a].max(1e-300);
                let mut row_acc = 0.0;
                for k in 0..np {
                    let gv = g[a * np + k];
                    if gv > 0.0 {
                        row_acc += gv * ln_floor(gv * ratio / p_y[a * np + k].max(1e-300));
                    }
                }
                acc += row_acc * grid.amp.weights[a];
            }
            mixed1 += level_prob * acc * step;
        }
        if shared {
            let mut level_phase = vec![0.0; np];
            for &i in members {
                let q = grid.points[i].prob / level_prob;
                for (lp, pp) in level_phase.iter_mut().zip(&phase_given_point[i]) {
                    *lp += q * pp;
                }
            }
            for &i in members {
                grid.conditional(i, &mut f);
                let pp = &phase_given_point[i];
                let mut acc = 0.0;
                for a in 0..na {
                    let mut row_acc = 0.0;
                    for k in 0..np {
                        let fv = f[a * np + k];
                        if fv > 0.0 {
                            let num = fv * level_phase[k];
                            let den = (pp[k] * g[a * np + k]).max(1e-300);
                            row_acc += fv * ln_floor(num / den);
                        }
                    }
                    acc += row_acc * grid.amp.weights[a];
                }
                mixed2 += grid.points[i].prob * acc * step;
            }
        }
    }
    Ok((mixed1, mixed2))
}

/// All four terms in nats for a finite constellation.
pub(crate) fn discrete_terms(
    input: &InputSpec,
    channel: &ChannelSpec,
    quad: &QuadratureSpec,
    with_mixed: bool,
) -> Result<Terms> {
    let grid = JointDensityGrid::build(input, channel, quad)?;
    let amplitude = amplitude_term(&grid, quad)?;
    let phase = phase_term(&grid, quad)?;
    let (mixed1, mixed2) = if with_mixed {
        mixed_terms(&grid)?
    } else {
        (0.0, 0.0)
    };
    Ok(Terms {
        amplitude,
        phase,
        mixed1,
        mixed2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bessel_i0_scaled, gauss_legendre};

    fn channel() -> ChannelSpec {
        ChannelSpec::awgn(0.5).unwrap()
    }

    #[test]
    fn conditionals_carry_unit_mass() {
        let quad = QuadratureSpec::default();
        let qam = InputSpec::qam(16, 10.0).unwrap();
        let grid = JointDensityGrid::build(&qam, &channel(), &quad).unwrap();
        let mut buf = vec![0.0; grid.cells()];
        for i in 0..grid.points().len() {
            assert!((grid.conditional(i, &mut buf) - 1.0).abs() < 1e-8);
        }
        let noisy = channel()
            .with_phase_noise(CircularDistribution::von_mises(0.0, 4.0).unwrap())
            .unwrap();
        let grid = JointDensityGrid::build(&qam, &noisy, &quad).unwrap();
        let mut buf = vec![0.0; grid.cells()];
        assert!((grid.conditional(3, &mut buf) - 1.0).abs() < 1e-8);
        assert!(buf.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn rejects_continuous_inputs() {
        let g = InputSpec::gaussian(1.0).unwrap();
        let e = JointDensityGrid::build(&g, &channel(), &QuadratureSpec::default());
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }

    /// `I(|X|; |Y|)` for on-off keying by plain composite quadrature of the
    /// two Rice densities, with the Bessel factor evaluated directly.
    fn ook_amplitude_oracle(power: f64, v: f64) -> f64 {
        let r = (2.0 * power).sqrt();
        let rice = |y: f64, x: f64| {
            y / v * (-(y - x) * (y - x) / (2.0 * v)).exp() * bessel_i0_scaled(x * y / v).unwrap()
        };
        let hi = r + 12.0 * v.sqrt();
        (0..400)
            .flat_map(|i| gauss_legendre(8, hi * i as f64 / 400.0, hi * (i + 1) as f64 / 400.0))
            .map(|(y, w)| {
                let (p0, p1) = (rice(y, 0.0), rice(y, r));
                let m = 0.5 * (p0 + p1);
                let term = |p: f64| if p > 0.0 { p * (p / m).ln() } else { 0.0 };
                w * 0.5 * (term(p0) + term(p1))
            })
            .sum()
    }

    #[test]
    fn ook_amplitude_term_matches_oracle() {
        let quad = QuadratureSpec::default();
        for power in [0.5, 3.0, 20.0] {
            let ook = InputSpec::ook(power).unwrap();
            let t = discrete_terms(&ook, &channel(), &quad, false).unwrap();
            let expect = ook_amplitude_oracle(power, 0.5);
            assert!(
                (t.amplitude - expect).abs() < 1e-8,
                "P {power}: {} vs {expect}",
                t.amplitude
            );
            assert_eq!(t.phase, 0.0);
        }
    }

    #[test]
    fn single_level_constellations_have_no_amplitude_information() {
        let quad = QuadratureSpec::default();
        let psk = InputSpec::psk(8, 5.0).unwrap();
        let t = discrete_terms(&psk, &channel(), &quad, true).unwrap();
        assert_eq!(t.amplitude, 0.0);
        assert_eq!(t.mixed1, 0.0);
        assert!(t.phase > 0.0 && t.mixed2 > 0.0);
    }

    #[test]
    fn bpsk_phase_term_saturates_at_one_bit() {
        let quad = QuadratureSpec::default();
        let bpsk = InputSpec::psk(2, 1e4).unwrap();
        let t = discrete_terms(&bpsk, &channel(), &quad, false).unwrap();
        assert!((t.phase - std::f64::consts::LN_2).abs() < 1e-9);
    }
}
