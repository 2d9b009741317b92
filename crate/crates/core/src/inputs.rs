//! Channel input distributions: continuous circular laws, ring
//! constellations with uniform phase, and discrete constellations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};

/// Shape of an input distribution; the scale is set by [`InputSpec::power`].
#[derive(Debug, Clone, PartialEq)]
pub enum InputKind {
    /// Circular complex Gaussian.
    GaussianComplex,
    /// Half-Gaussian amplitude with uniform independent phase.
    HalfGaussianAmplitude,
    /// Equiprobable-or-weighted rings with uniform phase on each ring.
    Rings { radii: Vec<f64>, probs: Vec<f64> },
    /// Finite constellation.
    Discrete {
        points: Vec<Complex64>,
        probs: Vec<f64>,
    },
}

/// An input distribution together with its average power `E|X|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub kind: InputKind,
    pub power: f64,
}

/// One distinct amplitude of an input and the phases that share it.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeLevel {
    pub radius: f64,
    pub prob: f64,
    /// `(phase, conditional probability)` pairs, or `None` when the phase is
    /// continuous and uniform.
    pub phases: Option<Vec<(f64, f64)>>,
}

/// Amplitude levels of an input with their conditional phase laws.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarStructure {
    pub levels: Vec<AmplitudeLevel>,
}

impl PolarStructure {
    /// `H(|X|)` in bits.
    pub fn amplitude_entropy_bits(&self) -> f64 {
        entropy_bits(self.levels.iter().map(|l| l.prob))
    }

    /// `H(∠X | |X|)` in bits; infinite when some ring has continuous phase.
    pub fn phase_entropy_given_amplitude_bits(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| match &l.phases {
                None => f64::INFINITY,
                Some(ph) => l.prob * entropy_bits(ph.iter().map(|p| p.1)),
            })
            .sum()
    }
}

fn entropy_bits(probs: impl Iterator<Item = f64>) -> f64 {
    probs.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(domain(format!(
            "input power must be positive and finite, got {power}"
        )));
    }
    Ok(())
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(domain("probabilities must be finite and non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(domain(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

impl InputSpec {
    pub fn gaussian(power: f64) -> Result<Self> {
        check_power(power)?;
        Ok(Self {
            kind: InputKind::GaussianComplex,
            power,
        })
    }

    pub fn half_gaussian(power: f64) -> Result<Self> {
        check_power(power)?;
        Ok(Self {
            kind: InputKind::HalfGaussianAmplitude,
            power,
        })
    }

    /// `count` equiprobable rings with radii proportional to `1..=count`.
    pub fn rings(count: usize, power: f64) -> Result<Self> {
        if count == 0 {
            return Err(domain("ring count must be >= 1"));
        }
        let radii: Vec<f64> = (1..=count).map(|i| i as f64).collect();
        let probs = vec![1.0 / count as f64; count];
        Self::rings_with(radii, probs, power)
    }

    /// Rings with explicit radii (rescaled to the power) and probabilities.
    pub fn rings_with(radii: Vec<f64>, probs: Vec<f64>, power: f64) -> Result<Self> {
        check_power(power)?;
        if radii.is_empty() || radii.len() != probs.len() {
            return Err(Error::SizeMismatch {
                left: radii.len(),
                right: probs.len(),
            });
        }
        if radii.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(domain("ring radii must be finite and non-negative"));
        }
        check_probs(&probs)?;
        let raw: f64 = radii.iter().zip(&probs).map(|(r, p)| p * r * r).sum();
        if !(raw > 0.0) {
            return Err(domain("rings carry no power"));
        }
        let s = (power / raw).sqrt();
        let radii = radii.into_iter().map(|r| r * s).collect();
        Ok(Self {
            kind: InputKind::Rings { radii, probs },
            power,
        })
    }

    /// Arbitrary constellation, rescaled to the requested power.
    pub fn discrete(points: Vec<Complex64>, probs: Vec<f64>, power: f64) -> Result<Self> {
        check_power(power)?;
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::SizeMismatch {
                left: points.len(),
                right: probs.len(),
            });
        }
        if points
            .iter()
            .any(|p| !p.re.is_finite() || !p.im.is_finite())
        {
            return Err(domain("constellation points must be finite"));
        }
        check_probs(&probs)?;
        let raw: f64 = points
            .iter()
            .zip(&probs)
            .map(|(x, p)| p * x.norm_sqr())
            .sum();
        if !(raw > 0.0) {
            return Err(domain("constellation carries no power"));
        }
        let s = (power / raw).sqrt();
        let points = points.into_iter().map(|x| x * s).collect();
        Ok(Self {
            kind: InputKind::Discrete { points, probs },
            power,
        })
    }

    fn equiprobable(points: Vec<Complex64>, power: f64) -> Result<Self> {
        let n = points.len();
        Self::discrete(points, vec![1.0 / n as f64; n], power)
    }

    /// On-off keying: `0` and `√(2P)` with equal probability.
    pub fn ook(power: f64) -> Result<Self> {
        Self::equiprobable(
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            power,
        )
    }

    /// `m` equally spaced phases on one circle, starting at phase zero.
    pub fn psk(m: usize, power: f64) -> Result<Self> {
        if m < 2 {
            return Err(domain(format!("PSK order must be >= 2, got {m}")));
        }
        let pts = (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64));
        Self::equiprobable(pts.collect(), power)
    }

    /// `a` rings of `m`-PSK with radii proportional to `1..=a`. With
    /// `offset`, every other ring is rotated by half a phase step.
    pub fn ask_psk(a: usize, m: usize, power: f64, offset: bool) -> Result<Self> {
        if a == 0 || m == 0 {
            return Err(domain(format!("ASK/PSK needs a, m >= 1, got {a}, {m}")));
        }
        let mut pts = Vec::with_capacity(a * m);
        for i in 0..a {
            let rot = if offset && i % 2 == 1 {
                PI / m as f64
            } else {
                0.0
            };
            for k in 0..m {
                let phase = 2.0 * PI * k as f64 / m as f64 + rot;
                pts.push(Complex64::from_polar((i + 1) as f64, phase));
            }
        }
        Self::equiprobable(pts, power)
    }

    /// Square QAM for even powers of two; 32-, 128- and 512-QAM use the
    /// cross shape (smallest square grid with its four corners removed).
    pub fn qam(m: usize, power: f64) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() {
            return Err(domain(format!(
                "QAM order must be a power of two >= 4, got {m}"
            )));
        }
        let bits = m.trailing_zeros();
        let (side, corner) = if bits.is_multiple_of(2) {
            (1usize << (bits / 2), 0usize)
        } else if m >= 32 {
            // remove four corner squares of size c×c from a side×side grid:
            // side² - 4c² = m with side = 6c
            let c = ((m / 32) as f64).sqrt() as usize;
            (6 * c, c)
        } else {
            return Err(domain("8-QAM is not a supported QAM order"));
        };
        let coord = |i: usize| 2.0 * i as f64 - side as f64 + 1.0;
        let limit = (side - 2 * corner) as f64 - 1.0 + 1e-9;
        let mut pts = Vec::with_capacity(m);
        for i in 0..side {
            for q in 0..side {
                let (re, im) = (coord(i), coord(q));
                if corner > 0 && re.abs() > limit && im.abs() > limit {
                    continue;
                }
                pts.push(Complex64::new(re, im));
            }
        }
        debug_assert_eq!(pts.len(), m);
        Self::equiprobable(pts, power)
    }

    /// Same shape at a different average power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        check_power(power)?;
        let s = (power / self.power).sqrt();
        let kind = match &self.kind {
            InputKind::Rings { radii, probs } => InputKind::Rings {
                radii: radii.iter().map(|r| r * s).collect(),
                probs: probs.clone(),
            },
            InputKind::Discrete { points, probs } => InputKind::Discrete {
                points: points.iter().map(|x| x * s).collect(),
                probs: probs.clone(),
            },
            k => k.clone(),
        };
        Ok(Self { kind, power })
    }

    /// Rotates every point of a discrete constellation; other kinds are
    /// rotation invariant and returned unchanged.
    pub fn rotated(&self, angle: f64) -> Self {
        let mut out = self.clone();
        if let InputKind::Discrete { points, .. } = &mut out.kind {
            let r = Complex64::from_polar(1.0, angle);
            points.iter_mut().for_each(|x| *x *= r);
        }
        out
    }

    /// True for laws whose phase is uniform and independent of amplitude.
    pub fn has_continuous_uniform_phase(&self) -> bool {
        !matches!(self.kind, InputKind::Discrete { .. })
    }

    /// Groups the input by amplitude. Points whose radii differ by less than
    /// `1e-9·√P` share a level.
    pub fn polar_structure(&self) -> Result<PolarStructure> {
        match &self.kind {
            InputKind::GaussianComplex | InputKind::HalfGaussianAmplitude => {
                Err(Error::Unsupported(
                    "continuous amplitude laws have no finite polar structure".into(),
                ))
            }
            InputKind::Rings { radii, probs } => {
                let mut levels: Vec<AmplitudeLevel> = radii
                    .iter()
                    .zip(probs)
                    .map(|(&radius, &prob)| AmplitudeLevel {
                        radius,
                        prob,
                        phases: None,
                    })
                    .collect();
                levels.sort_by(|a, b| a.radius.total_cmp(&b.radius));
                Ok(PolarStructure { levels })
            }
            InputKind::Discrete { points, probs } => {
                let tol = 1e-9 * self.power.sqrt();
                let mut order: Vec<usize> = (0..points.len()).collect();
                order.sort_by(|&i, &j| points[i].norm().total_cmp(&points[j].norm()));
                let mut levels: Vec<AmplitudeLevel> = Vec::new();
                let mut members: Vec<Vec<usize>> = Vec::new();
                for i in order {
                    let r = points[i].norm();
                    match levels.last() {
                        Some(l) if (r - l.radius).abs() <= tol => {
                            members.last_mut().unwrap().push(i)
                        }
                        _ => {
                            levels.push(AmplitudeLevel {
                                radius: r,
                                prob: 0.0,
                                phases: None,
                            });
                            members.push(vec![i]);
                        }
                    }
                }
                for (level, idx) in levels.iter_mut().zip(&members) {
                    let total: f64 = idx.iter().map(|&i| probs[i]).sum();
                    level.prob = total;
                    level.radius = idx
                        .iter()
                        .map(|&i| probs[i] * points[i].norm())
                        .sum::<f64>()
                        / total.max(f64::MIN_POSITIVE);
                    let phases = idx
                        .iter()
                        .filter(|&&i| probs[i] > 0.0)
                        .map(|&i| (points[i].arg(), probs[i] / total))
                        .collect();
                    level.phases = Some(phases);
                }
                levels.retain(|l| l.prob > 0.0);
                Ok(PolarStructure { levels })
            }
        }
    }

    /// `n` independent draws, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.power;
        match &self.kind {
            InputKind::GaussianComplex => {
                let s = (p / 2.0).sqrt();
                (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect()
            }
            InputKind::HalfGaussianAmplitude => {
                let s = p.sqrt();
                (0..n)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        Complex64::from_polar(s * z.abs(), rng.gen_range(-PI..PI))
                    })
                    .collect()
            }
            InputKind::Rings { radii, probs } => {
                let pick = WeightedIndex::new(probs).expect("validated probabilities");
                (0..n)
                    .map(|_| {
                        Complex64::from_polar(radii[pick.sample(&mut rng)], rng.gen_range(-PI..PI))
                    })
                    .collect()
            }
            InputKind::Discrete { points, probs } => {
                let pick = WeightedIndex::new(probs).expect("validated probabilities");
                (0..n).map(|_| points[pick.sample(&mut rng)]).collect()
            }
        }
    }

    /// `re im prob` lines for a discrete constellation.
    pub fn constellation_text(&self) -> Result<String> {
        match &self.kind {
            InputKind::Discrete { points, probs } => {
                let mut s = String::new();
                for (x, p) in points.iter().zip(probs) {
                    s.push_str(&format!("{:.9} {:.9} {:.9}\n", x.re, x.im, p));
                }
                Ok(s)
            }
            _ => Err(Error::Unsupported(
                "only discrete constellations can be listed".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_power(x: &InputSpec) -> f64 {
        match &x.kind {
            InputKind::Discrete { points, probs } => points
                .iter()
                .zip(probs)
                .map(|(x, p)| p * x.norm_sqr())
                .sum(),
            InputKind::Rings { radii, probs } => {
                radii.iter().zip(probs).map(|(r, p)| p * r * r).sum()
            }
            _ => x.power,
        }
    }

    #[test]
    fn qam16_polar_structure() {
        let q = InputSpec::qam(16, 1.0).unwrap();
        let s = q.polar_structure().unwrap();
        assert_eq!(s.levels.len(), 3);
        let counts: Vec<usize> = s
            .levels
            .iter()
            .map(|l| l.phases.as_ref().unwrap().len())
            .collect();
        assert_eq!(counts, vec![4, 8, 4]);
        assert!((s.amplitude_entropy_bits() - 1.5).abs() < 1e-12);
        assert!((s.phase_entropy_given_amplitude_bits() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn qam_sizes_and_power() {
        for m in [4, 16, 32, 64, 128, 256, 512, 1024] {
            let q = InputSpec::qam(m, 2.5).unwrap();
            match &q.kind {
                InputKind::Discrete { points, .. } => assert_eq!(points.len(), m),
                _ => unreachable!(),
            }
            assert!((mean_power(&q) - 2.5).abs() < 1e-12);
        }
        assert!(InputSpec::qam(8, 1.0).is_err());
        assert!(InputSpec::qam(12, 1.0).is_err());
    }

    #[test]
    fn psk_and_ook() {
        let p = InputSpec::psk(8, 1.0).unwrap();
        let s = p.polar_structure().unwrap();
        assert_eq!(s.levels.len(), 1);
        assert!((s.levels[0].radius - 1.0).abs() < 1e-12);
        assert!((s.phase_entropy_given_amplitude_bits() - 3.0).abs() < 1e-12);
        let o = InputSpec::ook(1.0).unwrap();
        let s = o.polar_structure().unwrap();
        assert_eq!(s.levels.len(), 2);
        assert!((s.levels[1].radius - 2f64.sqrt()).abs() < 1e-12);
        assert!(InputSpec::psk(1, 1.0).is_err());
    }

    #[test]
    fn ask_psk_offset_keeps_amplitudes() {
        let a = InputSpec::ask_psk(4, 8, 1.0, false)
            .unwrap()
            .polar_structure()
            .unwrap();
        let b = InputSpec::ask_psk(4, 8, 1.0, true)
            .unwrap()
            .polar_structure()
            .unwrap();
        assert_eq!(a.levels.len(), 4);
        for (x, y) in a.levels.iter().zip(&b.levels) {
            assert!((x.radius - y.radius).abs() < 1e-12);
            assert!((x.prob - y.prob).abs() < 1e-12);
        }
        assert!((a.amplitude_entropy_bits() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rings_structure() {
        let r = InputSpec::rings(4, 1.0).unwrap();
        let s = r.polar_structure().unwrap();
        assert_eq!(s.levels.len(), 4);
        assert!((s.amplitude_entropy_bits() - 2.0).abs() < 1e-12);
        assert!(s.phase_entropy_given_amplitude_bits().is_infinite());
        assert!((mean_power(&r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_structure_unsupported() {
        let g = InputSpec::gaussian(1.0).unwrap();
        assert!(matches!(g.polar_structure(), Err(Error::Unsupported(_))));
        assert!(InputSpec::gaussian(-1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = InputSpec::gaussian(2.0).unwrap();
        assert_eq!(g.sample(10, 3), g.sample(10, 3));
        assert_ne!(g.sample(10, 3), g.sample(10, 4));
        let xs = g.sample(200_000, 1);
        let p: f64 = xs.iter().map(|x| x.norm_sqr()).sum::<f64>() / xs.len() as f64;
        assert!((p - 2.0).abs() < 0.02);
    }

    #[test]
    fn half_gaussian_amplitude_ks() {
        // Kolmogorov–Smirnov against the half-normal CDF erf(r/√(2P))
        let power = 1.7;
        let mut r: Vec<f64> = InputSpec::half_gaussian(power)
            .unwrap()
            .sample(20_000, 11)
            .iter()
            .map(|x| x.norm())
            .collect();
        r.sort_by(f64::total_cmp);
        let n = r.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &ri) in r.iter().enumerate() {
            let f = crate::numerics::erf(ri / (2.0 * power).sqrt()).unwrap();
            d = d
                .max((f - i as f64 / n).abs())
                .max(((i + 1) as f64 / n - f).abs());
        }
        assert!(d * n.sqrt() < 1.628, "KS statistic {}", d * n.sqrt());
    }

    #[test]
    fn constellation_text_lines() {
        let t = InputSpec::psk(4, 1.0)
            .unwrap()
            .constellation_text()
            .unwrap();
        assert_eq!(t.lines().count(), 4);
        assert!(t
            .lines()
            .next()
            .unwrap()
            .starts_with("1.000000000 0.000000000 0.250000000"));
        assert!(InputSpec::rings(2, 1.0)
            .unwrap()
            .constellation_text()
            .is_err());
    }

    proptest::proptest! {
        #[test]
        fn factories_hit_power(p in 1e-6f64..1e3, m in 2usize..64, rings in 1usize..20) {
            for x in [
                InputSpec::psk(m, p).unwrap(),
                InputSpec::ask_psk(3, m, p, true).unwrap(),
                InputSpec::rings(rings, p).unwrap(),
                InputSpec::ook(p).unwrap(),
            ] {
                proptest::prop_assert!((mean_power(&x) / p - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn rotation_preserves_structure(angle in -3.0f64..3.0) {
            let q = InputSpec::qam(64, 1.0).unwrap();
            let a = q.polar_structure().unwrap();
            let b = q.rotated(angle).polar_structure().unwrap();
            proptest::prop_assert_eq!(a.levels.len(), b.levels.len());
            proptest::prop_assert!((a.amplitude_entropy_bits() - b.amplitude_entropy_bits()).abs() < 1e-12);
        }
    }
}
