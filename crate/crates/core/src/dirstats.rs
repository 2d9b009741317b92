//! Circular probability laws used as phase-noise models, with their
//! trigonometric moments, entropies and relative entropies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::numerics::{
    bessel_ratio_sequence, erfc_raw, gauss_legendre, i0e, i1_over_i0, kl_divergence,
    signed_frequency, AngularGrid,
};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Wraps an angle to `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        -PI
    } else {
        t
    }
}

/// A probability law on the circle.
#[derive(Debug, Clone, PartialEq)]
pub enum CircularDistribution {
    /// Gaussian with standard deviation `sigma` wrapped onto the circle.
    WrappedGaussian {
        mu: f64,
        sigma: f64,
    },
    /// Density proportional to `exp(κ cos(θ - μ))`.
    VonMises {
        mu: f64,
        kappa: f64,
    },
    /// Gaussian restricted to one period `[μ - π, μ + π)` and renormalized.
    TruncatedGaussian {
        mu: f64,
        sigma: f64,
    },
    Uniform,
    /// Arbitrary density given on an angular grid.
    Sampled(AngularGrid),
}

/// Summary statistics derived from the first trigonometric moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularMoments {
    pub mean_direction: f64,
    pub resultant_length: f64,
    pub circular_variance: f64,
    pub circular_std: f64,
}

fn check_location(mu: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(domain(format!("location must be finite, got {mu}")));
    }
    Ok(())
}

fn check_scale(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(domain(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

impl CircularDistribution {
    pub fn wrapped_gaussian(mu: f64, sigma: f64) -> Result<Self> {
        check_location(mu)?;
        check_scale(sigma)?;
        Ok(Self::WrappedGaussian { mu, sigma })
    }

    pub fn von_mises(mu: f64, kappa: f64) -> Result<Self> {
        check_location(mu)?;
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(domain(format!(
                "kappa must be >= 0 and finite, got {kappa}"
            )));
        }
        Ok(Self::VonMises { mu, kappa })
    }

    pub fn truncated_gaussian(mu: f64, sigma: f64) -> Result<Self> {
        check_location(mu)?;
        check_scale(sigma)?;
        Ok(Self::TruncatedGaussian { mu, sigma })
    }

    pub fn sampled(grid: AngularGrid) -> Result<Self> {
        let mass = grid.integral();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(domain(format!(
                "sampled density integrates to {mass}, not 1"
            )));
        }
        Ok(Self::Sampled(grid))
    }

    /// Re-checks parameters; useful when the enum was built directly.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::WrappedGaussian { mu, sigma } => Self::wrapped_gaussian(*mu, *sigma).map(|_| ()),
            Self::VonMises { mu, kappa } => Self::von_mises(*mu, *kappa).map(|_| ()),
            Self::TruncatedGaussian { mu, sigma } => {
                Self::truncated_gaussian(*mu, *sigma).map(|_| ())
            }
            Self::Uniform => Ok(()),
            Self::Sampled(g) => Self::sampled(g.clone()).map(|_| ()),
        }
    }

    /// Density at `theta`.
    pub fn pdf(&self, theta: f64) -> Result<f64> {
        self.validate()?;
        if !theta.is_finite() {
            return Err(domain(format!("angle must be finite, got {theta}")));
        }
        Ok(self.pdf_unchecked(theta))
    }

    pub(crate) fn pdf_unchecked(&self, theta: f64) -> f64 {
        match *self {
            Self::WrappedGaussian { mu, sigma } => {
                wrapped_gaussian_pdf(wrap_angle(theta - mu), sigma)
            }
            Self::VonMises { mu, kappa } => {
                ((kappa * ((theta - mu).cos() - 1.0)).exp()) / (2.0 * PI * i0e(kappa))
            }
            Self::TruncatedGaussian { mu, sigma } => {
                let d = wrap_angle(theta - mu);
                truncated_gaussian_normalizer_raw(sigma) * (-0.5 * d * d / (sigma * sigma)).exp()
                    / ((2.0 * PI).sqrt() * sigma)
            }
            Self::Uniform => 1.0 / (2.0 * PI),
            Self::Sampled(ref g) => {
                let n = g.len();
                let idx = ((wrap_angle(theta) + PI) / g.step()).round() as usize % n;
                g.values()[idx]
            }
        }
    }

    /// `E[e^{i·order·Θ}]`.
    pub fn trigonometric_moment(&self, order: i64) -> Complex64 {
        if order == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let n = order as f64;
        match *self {
            Self::WrappedGaussian { mu, sigma } => {
                Complex64::from_polar((-0.5 * n * n * sigma * sigma).exp(), n * mu)
            }
            Self::VonMises { mu, kappa } => {
                let k = order.unsigned_abs() as usize;
                let rho = bessel_ratio_sequence(kappa, k).map(|s| s[k]).unwrap_or(0.0);
                Complex64::from_polar(rho, n * mu)
            }
            Self::TruncatedGaussian { mu, sigma } => {
                let lambda = truncated_gaussian_normalizer_raw(sigma);
                let c = 1.0 / ((2.0 * PI).sqrt() * sigma);
                let re = composite_legendre(-PI, PI, 32, 32, |d| {
                    (n * d).cos() * (-0.5 * d * d / (sigma * sigma)).exp()
                });
                Complex64::from_polar(lambda * c * re, n * mu)
            }
            Self::Uniform => Complex64::new(0.0, 0.0),
            Self::Sampled(ref g) => g.trigonometric_moment(order),
        }
    }

    pub fn moments(&self) -> CircularMoments {
        let m = self.trigonometric_moment(1);
        let rho = m.norm().min(1.0);
        CircularMoments {
            mean_direction: if rho > 0.0 { m.arg() } else { 0.0 },
            resultant_length: rho,
            circular_variance: 1.0 - rho,
            circular_std: if rho > 0.0 {
                (-2.0 * rho.ln()).sqrt()
            } else {
                f64::INFINITY
            },
        }
    }

    /// Differential entropy in nats.
    pub fn entropy(&self) -> f64 {
        match *self {
            Self::Uniform => LN_2PI,
            Self::VonMises { kappa, .. } => von_mises_entropy(kappa),
            Self::TruncatedGaussian { sigma, .. } => {
                let lambda = truncated_gaussian_normalizer_raw(sigma);
                let msd = truncated_gaussian_mean_square(sigma);
                0.5 * (2.0 * PI * sigma * sigma / (lambda * lambda)).ln()
                    + msd / (2.0 * sigma * sigma)
            }
            Self::WrappedGaussian { sigma, .. } => {
                if sigma < 0.1 {
                    // images at ±2π contribute below e^{-490}
                    0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).ln()
                } else {
                    let n = 8192;
                    let step = 2.0 * PI / n as f64;
                    -(0..n)
                        .map(|k| {
                            let p = wrapped_gaussian_pdf(-PI + k as f64 * step, sigma);
                            if p > 0.0 {
                                p * p.ln()
                            } else {
                                0.0
                            }
                        })
                        .sum::<f64>()
                        * step
                }
            }
            Self::Sampled(ref g) => g.entropy(),
        }
    }

    /// `E[d²]` with `d` the deviation from the location, wrapped to
    /// `[-π, π)`. For sampled densities the deviation is taken from zero.
    pub fn mean_square_deviation(&self) -> f64 {
        match *self {
            Self::TruncatedGaussian { sigma, .. } => truncated_gaussian_mean_square(sigma),
            Self::Uniform => PI * PI / 3.0,
            Self::Sampled(ref g) => {
                g.values()
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        let t = g.angle(k);
                        p * t * t
                    })
                    .sum::<f64>()
                    * g.step()
            }
            _ => {
                let centred = match *self {
                    Self::WrappedGaussian { sigma, .. } => Self::WrappedGaussian { mu: 0.0, sigma },
                    Self::VonMises { kappa, .. } => Self::VonMises { mu: 0.0, kappa },
                    _ => unreachable!(),
                };
                composite_legendre(-PI, PI, 64, 32, |d| d * d * centred.pdf_unchecked(d))
            }
        }
    }

    /// The density sampled on an `n`-point grid.
    pub fn to_grid(&self, n: usize) -> Result<AngularGrid> {
        if let Self::Sampled(g) = self {
            if g.len() != n {
                return Err(Error::SizeMismatch {
                    left: g.len(),
                    right: n,
                });
            }
            return Ok(g.clone());
        }
        AngularGrid::from_fn(n, |t| self.pdf_unchecked(t))
    }

    /// Fourier coefficients `∫ p(θ) e^{-ikθ} dθ` in DFT bin order for an
    /// `n`-point grid; the kernel form accepted by [`AngularGrid::filtered`].
    pub fn fourier_kernel(&self, n: usize) -> Result<Vec<Complex64>> {
        match *self {
            Self::TruncatedGaussian { .. } | Self::Sampled(_) => {
                Ok(self.to_grid(n)?.fourier_coefficients())
            }
            Self::VonMises { mu, kappa } => {
                let rho = bessel_ratio_sequence(kappa, n / 2)?;
                Ok((0..n)
                    .map(|i| {
                        let f = signed_frequency(i, n);
                        Complex64::from_polar(rho[f.unsigned_abs() as usize], -(f as f64) * mu)
                    })
                    .collect())
            }
            _ => Ok((0..n)
                .map(|i| self.trigonometric_moment(signed_frequency(i, n)).conj())
                .collect()),
        }
    }

    /// Draws one angle in `[-π, π)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::WrappedGaussian { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                wrap_angle(mu + sigma * z)
            }
            Self::VonMises { mu, kappa } => wrap_angle(mu + sample_von_mises(kappa, rng)),
            Self::TruncatedGaussian { mu, sigma } => {
                let normal = Normal::new(0.0, sigma).expect("validated sigma");
                loop {
                    let d: f64 = normal.sample(rng);
                    if (-PI..PI).contains(&d) {
                        return wrap_angle(mu + d);
                    }
                }
            }
            Self::Uniform => rng.gen_range(-PI..PI),
            Self::Sampled(ref g) => {
                let u: f64 = rng.gen::<f64>() * g.integral();
                let mut acc = 0.0;
                for (k, p) in g.values().iter().enumerate() {
                    acc += p * g.step();
                    if acc >= u {
                        return wrap_angle(g.angle(k) + (rng.gen::<f64>() - 0.5) * g.step());
                    }
                }
                g.angle(g.len() - 1)
            }
        }
    }
}

fn wrapped_gaussian_pdf(d: f64, sigma: f64) -> f64 {
    if sigma > 1.5 {
        // wide law: the Fourier series converges within a handful of terms
        let mut sum = 0.5;
        for n in 1.. {
            let c = (-0.5 * (n * n) as f64 * sigma * sigma).exp();
            if c < 1e-18 {
                break;
            }
            sum += c * (n as f64 * d).cos();
        }
        return sum / PI;
    }
    // images farther than 6σ from the evaluation point are negligible
    let k_max = (6.0 * sigma / (2.0 * PI)).ceil() as i64 + 2;
    let c = 1.0 / ((2.0 * PI).sqrt() * sigma);
    (-k_max..=k_max)
        .map(|k| {
            let t = d + 2.0 * PI * k as f64;
            (-0.5 * t * t / (sigma * sigma)).exp()
        })
        .sum::<f64>()
        * c
}

/// `h = ln(2π I₀(κ)) - κ I₁(κ)/I₀(κ)` in nats.
pub(crate) fn von_mises_entropy(kappa: f64) -> f64 {
    LN_2PI + i0e(kappa).ln() + kappa * (1.0 - i1_over_i0(kappa))
}

/// Best–Fisher rejection sampler for a zero-mean von Mises angle.
fn sample_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return rng.gen_range(-PI..PI);
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.gen();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.gen();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen();
            let t = f.clamp(-1.0, 1.0).acos();
            return if u3 > 0.5 { t } else { -t };
        }
    }
}

fn truncated_gaussian_normalizer_raw(sigma: f64) -> f64 {
    let mass = 1.0 - erfc_raw(PI / (sigma * std::f64::consts::SQRT_2));
    1.0 / mass
}

fn truncated_gaussian_mean_square(sigma: f64) -> f64 {
    let alpha = PI / sigma;
    let mass = 1.0 - erfc_raw(alpha / std::f64::consts::SQRT_2);
    let phi = (-0.5 * alpha * alpha).exp() / (2.0 * PI).sqrt();
    sigma * sigma * (1.0 - 2.0 * alpha * phi / mass)
}

/// The factor `λ` that renormalizes a Gaussian of standard deviation `sigma`
/// restricted to `[-π, π)`.
pub fn truncated_gaussian_normalizer(sigma: f64) -> Result<f64> {
    check_scale(sigma)?;
    Ok(truncated_gaussian_normalizer_raw(sigma))
}

/// Von Mises concentration whose mean resultant length equals `rho`.
pub fn von_mises_kappa_for_resultant(rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(domain(format!(
            "resultant length must lie in [0, 1), got {rho}"
        )));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    // A(κ) = I₁/I₀ is increasing; bisect on ln κ
    let (mut lo, mut hi) = (-30.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if i1_over_i0(mid.exp()) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Truncated-Gaussian scale whose mean square deviation equals `msd`,
/// which must lie in `(0, π²/3)`.
pub fn truncated_gaussian_sigma_for_mean_square(msd: f64) -> Result<f64> {
    if !(msd > 0.0 && msd < PI * PI / 3.0) {
        return Err(domain(format!(
            "mean square deviation must lie in (0, π²/3), got {msd}"
        )));
    }
    let (mut lo, mut hi) = (-20.0_f64, 20.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_gaussian_mean_square(mid.exp()) < msd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `D(candidate ‖ reference)` in nats on an `n`-point grid. When the
/// reference is the maximum-entropy law for a constraint that the candidate
/// meets with equality, this equals `h(reference) - h(candidate) >= 0`.
pub fn max_entropy_check(
    candidate: &CircularDistribution,
    reference: &CircularDistribution,
    n: usize,
) -> Result<f64> {
    kl_divergence(&candidate.to_grid(n)?, &reference.to_grid(n)?)
}

fn composite_legendre(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            gauss_legendre(order, lo, lo + h)
                .iter()
                .map(|(x, w)| w * f(*x))
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quadrature_entropy(d: &CircularDistribution) -> f64 {
        composite_legendre(-PI, PI, 64, 32, |t| {
            let p = d.pdf_unchecked(t);
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
    }

    #[test]
    fn wrapped_gaussian_reference_density() {
        let d = CircularDistribution::wrapped_gaussian(0.0, 0.5).unwrap();
        assert!((d.pdf(0.0).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-9);
        let wide = CircularDistribution::wrapped_gaussian(0.0, 50.0).unwrap();
        assert!((wide.pdf(1.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn wrapped_gaussian_resultant() {
        for &s in &[0.25, 0.5, 1.0, 2.0] {
            let d = CircularDistribution::wrapped_gaussian(0.3, s).unwrap();
            let r = d.moments().resultant_length;
            assert!((r - (-s * s / 2.0_f64).exp()).abs() < 1e-12);
            // cross-check the analytic moment against quadrature of the pdf
            let q = composite_legendre(-PI, PI, 64, 32, |t| (t - 0.3).cos() * d.pdf_unchecked(t));
            assert!((q - r).abs() < 1e-12);
        }
    }

    #[test]
    fn von_mises_circular_variance() {
        let d = CircularDistribution::von_mises(0.0, 1.0).unwrap();
        assert!((d.moments().circular_variance - 0.553_6).abs() < 1e-4);
        let u = CircularDistribution::von_mises(0.0, 0.0).unwrap();
        assert!((u.pdf(2.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_entropies_match_quadrature() {
        for &k in &[0.1, 1.0, 2.0, 5.0, 20.0] {
            let d = CircularDistribution::von_mises(0.4, k).unwrap();
            assert!(
                (d.entropy() - quadrature_entropy(&d)).abs() < 1e-8,
                "kappa {k}"
            );
        }
        for &s in &[0.2, 0.8, 1.5, 4.0] {
            let d = CircularDistribution::truncated_gaussian(0.0, s).unwrap();
            assert!(
                (d.entropy() - quadrature_entropy(&d)).abs() < 1e-8,
                "sigma {s}"
            );
            let w = CircularDistribution::wrapped_gaussian(0.0, s).unwrap();
            assert!(
                (w.entropy() - quadrature_entropy(&w)).abs() < 1e-8,
                "sigma {s}"
            );
        }
        assert!((CircularDistribution::Uniform.entropy() - (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn truncated_gaussian_normalizer_limits() {
        assert!((truncated_gaussian_normalizer(0.1).unwrap() - 1.0).abs() < 1e-15);
        // very wide: density flattens to 1/(2π)
        let s = 1e3;
        let lambda = truncated_gaussian_normalizer(s).unwrap();
        assert!((lambda / ((2.0 * PI).sqrt() * s) - 1.0 / (2.0 * PI)).abs() < 1e-6);
        assert!(truncated_gaussian_normalizer(0.0).is_err());
    }

    #[test]
    fn trig_moments_match_grid() {
        let cases = [
            CircularDistribution::von_mises(1.0, 3.0).unwrap(),
            CircularDistribution::truncated_gaussian(-0.5, 1.2).unwrap(),
            CircularDistribution::wrapped_gaussian(2.0, 0.7).unwrap(),
        ];
        for d in &cases {
            let g = d.to_grid(2048).unwrap();
            // the truncated law has a kink at ±π, so the grid sum is only
            // second-order accurate there
            let tol = if matches!(d, CircularDistribution::TruncatedGaussian { .. }) {
                1e-6
            } else {
                1e-9
            };
            for n in 1..4 {
                assert!((d.trigonometric_moment(n) - g.trigonometric_moment(n)).norm() < tol);
            }
        }
    }

    #[test]
    fn fourier_kernel_convolution_matches_grid() {
        let n = 256;
        let a = CircularDistribution::von_mises(0.5, 4.0)
            .unwrap()
            .to_grid(n)
            .unwrap();
        for d in [
            CircularDistribution::von_mises(-1.0, 2.0).unwrap(),
            CircularDistribution::wrapped_gaussian(0.7, 0.4).unwrap(),
            CircularDistribution::truncated_gaussian(0.2, 0.9).unwrap(),
        ] {
            let via_kernel = a.filtered(&d.fourier_kernel(n).unwrap()).unwrap();
            let via_grid = crate::numerics::circular_convolve(&a, &d.to_grid(n).unwrap()).unwrap();
            for (x, y) in via_kernel.values().iter().zip(via_grid.values()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn von_mises_is_max_entropy_for_its_resultant() {
        let d = CircularDistribution::wrapped_gaussian(0.0, 0.9).unwrap();
        let kappa = von_mises_kappa_for_resultant(d.moments().resultant_length).unwrap();
        let vm = CircularDistribution::von_mises(0.0, kappa).unwrap();
        let kl = max_entropy_check(&d, &vm, 4096).unwrap();
        assert!(kl > 0.0);
        assert!((kl - (vm.entropy() - d.entropy())).abs() < 1e-9);
    }

    #[test]
    fn samplers_reproduce_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [
            CircularDistribution::von_mises(0.3, 2.5).unwrap(),
            CircularDistribution::von_mises(0.0, 400.0).unwrap(),
            CircularDistribution::wrapped_gaussian(-1.0, 0.8).unwrap(),
            CircularDistribution::truncated_gaussian(2.0, 1.5).unwrap(),
        ] {
            let n = 200_000;
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in 0..n {
                acc += Complex64::from_polar(1.0, d.sample(&mut rng));
            }
            let est = acc / n as f64;
            assert!((est - d.trigonometric_moment(1)).norm() < 0.01, "{d:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn wrap_angle_in_range(t in -100.0f64..100.0) {
            let w = wrap_angle(t);
            proptest::prop_assert!((-PI..PI).contains(&w));
            proptest::prop_assert!(((t - w) / (2.0 * PI) - ((t - w) / (2.0 * PI)).round()).abs() < 1e-9);
        }

        #[test]
        fn densities_integrate_to_one(mu in -3.0f64..3.0, s in 0.05f64..5.0) {
            for d in [
                CircularDistribution::wrapped_gaussian(mu, s).unwrap(),
                CircularDistribution::von_mises(mu, 1.0 / (s * s)).unwrap(),
                CircularDistribution::truncated_gaussian(mu, s).unwrap(),
            ] {
                // one period starting at the truncation point avoids the kink
                let m = composite_legendre(mu - PI, mu + PI, 64, 32, |t| d.pdf_unchecked(t));
                proptest::prop_assert!((m - 1.0).abs() < 1e-8);
            }
        }
    }
}
