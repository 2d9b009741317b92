//! Densities sampled on a uniform grid over the circle, and FFT-based
//! circular convolution.
//!
//! Grid point `k` sits at `θ_k = -π + kΔ` with `Δ = 2π/N`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT `X[n] = Σ x[k] e^{-2πi nk/N}`.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse DFT including the `1/N` factor.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Signed frequency of DFT bin `i` in a length-`n` transform.
pub(crate) fn signed_frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// A non-negative density sampled on `N` equally spaced angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    values: Vec<f64>,
}

impl AngularGrid {
    /// Wraps sampled density values. `N` must be a power of two (at least 2)
    /// and every value finite and non-negative.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_len(values.len())?;
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(domain(format!(
                "density values must be finite and >= 0, found {v}"
            )));
        }
        Ok(Self { values })
    }

    /// Samples `f` at every grid angle.
    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        check_len(n)?;
        let step = 2.0 * PI / n as f64;
        Self::new((0..n).map(|k| f(-PI + k as f64 * step)).collect())
    }

    /// The uniform density `1/2π`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(Self {
            values: vec![1.0 / (2.0 * PI); n],
        })
    }

    /// Internal constructor for FFT output: tiny negative round-off is
    /// clipped to zero.
    pub(crate) fn from_clamped(mut values: Vec<f64>) -> Self {
        for v in values.iter_mut() {
            if *v < 0.0 || !v.is_finite() {
                *v = 0.0;
            }
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing `Δ = 2π/N`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// Angle of grid point `k`.
    pub fn angle(&self, k: usize) -> f64 {
        -PI + k as f64 * self.step()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `Σ p_k Δ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    /// Rescales so the density integrates to one.
    pub fn normalize(&mut self) -> Result<()> {
        let mass = self.integral();
        if !(mass > 0.0) {
            return Err(domain("cannot normalize a density with zero mass"));
        }
        let s = 1.0 / mass;
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Differential entropy `-Σ p ln p Δ` in nats.
    pub fn entropy(&self) -> f64 {
        let h: f64 = self
            .values
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        h * self.step()
    }

    /// Trigonometric moment `E[e^{inΘ}] ≈ Σ p_k e^{inθ_k} Δ`.
    pub fn trigonometric_moment(&self, order: i64) -> Complex64 {
        let step = self.step();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &p) in self.values.iter().enumerate() {
            acc += p * Complex64::from_polar(1.0, order as f64 * self.angle(k));
        }
        acc * step
    }

    /// Raw DFT of the samples.
    pub(crate) fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft_forward(&mut buf);
        buf
    }

    /// Fourier coefficients `∫ p(θ) e^{-inθ} dθ` in DFT bin order, the form
    /// expected by [`AngularGrid::filtered`].
    pub fn fourier_coefficients(&self) -> Vec<Complex64> {
        let n = self.len();
        let step = self.step();
        self.spectrum()
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let sign = if signed_frequency(i, n) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                v * (sign * step)
            })
            .collect()
    }

    /// Circular convolution with a kernel given by its Fourier coefficients
    /// `k̂_n` (see [`AngularGrid::fourier_coefficients`]).
    pub fn filtered(&self, kernel: &[Complex64]) -> Result<Self> {
        if kernel.len() != self.len() {
            return Err(Error::SizeMismatch {
                left: self.len(),
                right: kernel.len(),
            });
        }
        let mut buf = self.spectrum();
        for (b, k) in buf.iter_mut().zip(kernel) {
            *b *= k;
        }
        fft_inverse(&mut buf);
        Ok(Self::from_clamped(buf.into_iter().map(|c| c.re).collect()))
    }
}

/// Density whose Fourier coefficients `∫ p(θ) e^{-inθ} dθ` are given in DFT
/// bin order.
pub(crate) fn density_from_coefficients(coeffs: &[Complex64]) -> AngularGrid {
    let n = coeffs.len();
    let scale = n as f64 / (2.0 * PI);
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if signed_frequency(i, n) % 2 == 0 {
                *c
            } else {
                -*c
            }
        })
        .collect();
    fft_inverse(&mut buf);
    AngularGrid::from_clamped(buf.into_iter().map(|c| c.re * scale).collect())
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(domain(format!(
            "angular grid size must be a power of two >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Circular convolution `(a ⊛ b)(θ) = ∫ a(t) b(θ - t) dt` of two densities on
/// the same grid, computed by FFT.
pub fn circular_convolve(a: &AngularGrid, b: &AngularGrid) -> Result<AngularGrid> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    a.filtered(&b.fourier_coefficients())
}

/// Convolution with a zero-mean wrapped Gaussian of standard deviation
/// `sigma`, applied exactly in the Fourier domain (`k̂_n = e^{-σ²n²/2}`).
pub fn convolve_with_wrapped_gaussian(a: &AngularGrid, sigma: f64) -> Result<AngularGrid> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(format!(
            "wrapped Gaussian sigma must be >= 0, got {sigma}"
        )));
    }
    let n = a.len();
    let kernel: Vec<Complex64> = (0..n)
        .map(|i| {
            let f = signed_frequency(i, n) as f64;
            Complex64::new((-0.5 * sigma * sigma * f * f).exp(), 0.0)
        })
        .collect();
    a.filtered(&kernel)
}

/// Relative entropy `D(q‖p) = Σ q ln(q/p) Δ` of two densities on the same
/// grid, in nats. Infinite if `q` puts mass where `p` has none.
pub fn kl_divergence(q: &AngularGrid, p: &AngularGrid) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::SizeMismatch {
            left: q.len(),
            right: p.len(),
        });
    }
    let mut acc = 0.0;
    for (&qi, &pi) in q.values().iter().zip(p.values()) {
        if qi > 0.0 {
            if pi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += qi * (qi / pi).ln();
        }
    }
    Ok(acc * q.step())
}
