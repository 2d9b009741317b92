use rayon::prelude::*;

use crate::channels::ChannelSpec;
use crate::decomp::amplitude_phase_terms;
use crate::error::{domain, Result};
use crate::inputs::InputSpec;
use crate::numerics::QuadratureSpec;

/// Default additive noise for the fiber demo: `2σn² = 10 µW` (−20 dBm).
/// A demonstration value that puts the capacity peak in a readable range,
/// not a measured link parameter.
pub const DEMO_NOISE_VARIANCE_PER_DIM: f64 = 5e-6;

/// Fiber model: phase-noise variance `σ² = c P²` grows with launch power,
/// with spectral loss and ring input.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberModelSpec {
    /// Nonlinearity coefficient in W⁻².
    pub c: f64,
    pub noise_variance_per_dim: f64,
    pub rings: usize,
    /// Launch powers in watts, positive and increasing.
    pub power_w: Vec<f64>,
}

impl FiberModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(domain(format!(
                "nonlinearity coefficient must be > 0, got {}",
                self.c
            )));
        }
        if !(self.noise_variance_per_dim > 0.0) || !self.noise_variance_per_dim.is_finite() {
            return Err(domain("noise variance must be > 0"));
        }
        if self.rings == 0 {
            return Err(domain("ring count must be >= 1"));
        }
        if self.power_w.is_empty()
            || self.power_w.iter().any(|p| !(*p > 0.0) || !p.is_finite())
            || self.power_w.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(domain(
                "power grid must be nonempty, positive and increasing",
            ));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// One point of the capacity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPoint {
    pub power_w: f64,
    pub power_dbm: f64,
    /// `10 log₁₀(P e^{-cP²} / 2σn²)`.
    pub eff_snr_db: f64,
    /// Amplitude plus phase information of the ring input, bits.
    pub cap_bits: f64,
}

/// Launch power maximizing `P e^{-cP²}`, in watts: `1/√(2c)`.
pub fn optimal_launch_power(c: f64) -> f64 {
    1.0 / (2.0 * c).sqrt()
}

/// Capacity estimate `I(|X|;|Y|) + I(∠X;∠Y | |X|)` of a ring input versus
/// launch power. The mixed terms are small next to these two and are left
/// out.
pub fn fiber_capacity_curve(
    spec: &FiberModelSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<FiberPoint>> {
    spec.validate()?;
    let base = ChannelSpec::awgn(spec.noise_variance_per_dim)?;
    spec.power_w
        .par_iter()
        .map(|&p| {
            let sigma2 = spec.c * p * p;
            let channel = base.clone().with_spectral_loss(sigma2)?;
            let snr = channel.snr_for_power(p)?;
            let input = InputSpec::rings(spec.rings, p)?;
            let (a, ph) = amplitude_phase_terms(&input, &channel, snr, quad)?;
            let eff = snr.linear() * (-sigma2).exp();
            Ok(FiberPoint {
                power_w: p,
                power_dbm: watts_to_dbm(p),
                eff_snr_db: 10.0 * eff.log10(),
                cap_bits: a + ph,
            })
        })
        .collect()
}

/// Number of strict interior local maxima plus maxima at either end.
pub fn count_local_maxima(values: &[f64]) -> usize {
    let n = values.len();
    if n < 2 {
        return n;
    }
    let mut count = 0;
    if values[0] > values[1] {
        count += 1;
    }
    if values[n - 1] > values[n - 2] {
        count += 1;
    }
    count
        + values
            .windows(3)
            .filter(|w| w[1] > w[0] && w[1] >= w[2])
            .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_power_reference() {
        let p = optimal_launch_power(1.1e5);
        assert!((p - 2.132e-3).abs() < 1e-6);
        assert!((10.0 * (p / 1e-3).log10() - 3.29).abs() < 0.01);
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0, 2.0, 1.0]), 2);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 2.0, 1.0]), 1);
    }

    #[test]
    fn small_curve_peaks_near_optimum() {
        let spec = FiberModelSpec {
            c: 1.1e5,
            noise_variance_per_dim: DEMO_NOISE_VARIANCE_PER_DIM,
            rings: 4,
            power_w: [-5.0, 0.0, 3.0, 6.0, 9.0].map(dbm_to_watts).to_vec(),
        };
        let quad = QuadratureSpec {
            phase_points: 1024,
            amp_points: 128,
            ..Default::default()
        };
        let pts = fiber_capacity_curve(&spec, &quad).unwrap();
        let caps: Vec<f64> = pts.iter().map(|p| p.cap_bits).collect();
        assert_eq!(count_local_maxima(&caps), 1);
        let best = pts
            .iter()
            .max_by(|a, b| a.cap_bits.total_cmp(&b.cap_bits))
            .unwrap();
        assert!((best.power_dbm - 3.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_capacity_is_unimodal_in_power() {
        use crate::channels::Snr;
        use crate::spectral::spectral_loss_capacity;
        let c = 1.1e5;
        let caps: Vec<f64> = (0..=80)
            .map(|i| dbm_to_watts(-10.0 + 0.25 * i as f64))
            .map(|p| {
                let snr = Snr::from_linear(p / (2.0 * DEMO_NOISE_VARIANCE_PER_DIM)).unwrap();
                spectral_loss_capacity(snr, c * p * p)
            })
            .collect();
        assert_eq!(count_local_maxima(&caps), 1);
    }

    #[test]
    fn vanishing_noise_keeps_every_ring_distinguishable() {
        // with almost no additive noise the rings stay resolvable at any
        // power short of total attenuation, so the amplitude term is log₂ R
        let spec = FiberModelSpec {
            c: 1.1e5,
            noise_variance_per_dim: 1e-14,
            rings: 4,
            power_w: vec![1e-4, 2e-3, 5e-3],
        };
        let quad = QuadratureSpec {
            phase_points: 1024,
            amp_points: 128,
            ..Default::default()
        };
        for p in fiber_capacity_curve(&spec, &quad).unwrap() {
            assert!(p.cap_bits > 2.0 - 1e-3, "{p:?}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let good = FiberModelSpec {
            c: 1.0,
            noise_variance_per_dim: 1.0,
            rings: 2,
            power_w: vec![1.0, 2.0],
        };
        assert!(good.validate().is_ok());
        assert!(FiberModelSpec {
            c: 0.0,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(FiberModelSpec {
            rings: 0,
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(FiberModelSpec {
            power_w: vec![2.0, 1.0],
            ..good.clone()
        }
        .validate()
        .is_err());
        assert!(FiberModelSpec {
            power_w: vec![],
            ..good
        }
        .validate()
        .is_err());
    }
}
