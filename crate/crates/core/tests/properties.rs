use num_complex::Complex64;
use polar_mi::channels::{ChannelSpec, Snr};
use polar_mi::decomp::{decompose, decompose_with_direct, direct_mi};
use polar_mi::dirstats::CircularDistribution;
use polar_mi::inputs::InputSpec;
use polar_mi::numerics::QuadratureSpec;
use polar_mi::spectral::{simulate_spectral_loss, SpectralLossConfig};
use proptest::prelude::*;

fn awgn() -> ChannelSpec {
    ChannelSpec::awgn(0.5).unwrap()
}

fn constellation() -> impl Strategy<Value = (Vec<Complex64>, Vec<f64>)> {
    prop::collection::vec(((0.1f64..2.0), (-3.1f64..3.1), (0.1f64..1.0)), 2..6).prop_map(|v| {
        let pts = v
            .iter()
            .map(|&(r, t, _)| Complex64::from_polar(r, t))
            .collect();
        let total: f64 = v.iter().map(|x| x.2).sum();
        let probs = v.iter().map(|x| x.2 / total).collect();
        (pts, probs)
    })
}

fn input_at(pts: Vec<Complex64>, probs: Vec<f64>, snr: Snr) -> InputSpec {
    InputSpec::discrete(pts, probs, awgn().power_for_snr(snr)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn four_terms_sum_to_the_total((pts, probs) in constellation(), snr_db in 0.0f64..15.0) {
        let snr = Snr::from_db(snr_db).unwrap();
        let x = input_at(pts, probs, snr);
        let r = decompose_with_direct(&x, &awgn(), snr, &QuadratureSpec::default()).unwrap();
        for t in [r.amplitude, r.phase, r.mixed1, r.mixed2] {
            prop_assert!(t > -1e-9);
        }
        prop_assert!((r.sum() - r.direct.unwrap()).abs() < 5e-3, "{r:?}");
    }

    #[test]
    fn rotation_leaves_terms_unchanged(m in 2usize..12, angle in -3.0f64..3.0, snr_db in 0.0f64..20.0) {
        let snr = Snr::from_db(snr_db).unwrap();
        let quad = QuadratureSpec { amp_points: 128, phase_points: 1024, ..Default::default() };
        let x = InputSpec::psk(m, awgn().power_for_snr(snr)).unwrap();
        let a = decompose(&x, &awgn(), snr, &quad).unwrap();
        let b = decompose(&x.rotated(angle), &awgn(), snr, &quad).unwrap();
        prop_assert!((a.phase - b.phase).abs() < 1e-6 && (a.mixed2 - b.mixed2).abs() < 1e-6);
    }

    #[test]
    fn phase_noise_never_adds_information(m in 2usize..9, kappa in 0.5f64..50.0, snr_db in 0.0f64..15.0) {
        let snr = Snr::from_db(snr_db).unwrap();
        let quad = QuadratureSpec::default();
        let x = InputSpec::psk(m, awgn().power_for_snr(snr)).unwrap();
        let noisy = awgn().with_phase_noise(CircularDistribution::von_mises(0.0, kappa).unwrap()).unwrap();
        let clean = direct_mi(&x, &awgn(), snr, &quad).unwrap();
        let degraded = direct_mi(&x, &noisy, snr, &quad).unwrap();
        prop_assert!(degraded <= clean + 3e-4, "{degraded} vs {clean}");
    }

    #[test]
    fn measured_attenuation_is_a_fraction(sigma in 0.05f64..2.5, seed in 0u64..1000) {
        let r = simulate_spectral_loss(&SpectralLossConfig::new(sigma, 4, 4096, seed)).unwrap();
        prop_assert!(r.measured_amp_attenuation > 0.0 && r.measured_amp_attenuation <= 1.0);
        prop_assert!(r.residual_phase_std >= 0.0);
        prop_assert!((r.output_power / r.input_power - 1.0).abs() < 1e-9);
    }
}
