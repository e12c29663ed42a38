use proptest::prelude::*;

use timeloc::disorder::{envelope, realization, DriveSpec};
use timeloc::effmodel::{build_matrix, EffectiveModelSpec, PlaneWaveBasis};
use timeloc::floquet::{build_floquet, circular_distance, fold, FloquetBasisWindow, FloquetSpec};
use timeloc::lattice::{lattice_xi, TightBindingChain};
use timeloc::linalg::hermiticity_defect;
use timeloc::localization::moving_average;
use timeloc::num::wrap_angle;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folding_lands_in_interval(x in -1e5f64..1e5, e_ref in -100f64..100.0, omega in 0.5f64..500.0) {
        let y = fold(x, e_ref, omega);
        prop_assert!(y >= e_ref && y < e_ref + omega);
        prop_assert!(circular_distance(x, y, omega) < 1e-9 * x.abs().max(omega));
    }

    #[test]
    fn folding_is_periodic(x in -1e4f64..1e4, omega in 0.5f64..300.0, shift in -20i32..20) {
        let a = fold(x, 0.0, omega);
        let b = fold(x + shift as f64 * omega, 0.0, omega);
        prop_assert!(circular_distance(a, b, omega) < 1e-9 * omega.max(x.abs()));
    }

    #[test]
    fn wrapped_angles_stay_on_the_ring(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
        prop_assert!(((x - w) / std::f64::consts::TAU - ((x - w) / std::f64::consts::TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn effective_magnitudes_follow_the_envelope(k0 in 1.0f64..30.0, seed in any::<u64>()) {
        let (_, c) = realization(&DriveSpec::new(k0, seed), 0).unwrap();
        for (k, ck) in c.c.iter() {
            let expected = if k == 0 { 0.0 } else { envelope::<f64>(k, k0) };
            prop_assert!((ck.norm() - expected).abs() <= 1e-12 * expected.max(1e-300));
        }
    }

    #[test]
    fn effective_matrix_is_hermitian(k0 in 1.0f64..6.0, v in -20f64..20.0, lambda in 0f64..50.0, s in 1u32..6, seed in any::<u64>(), beta in 0f64..1.0) {
        let (_, c) = realization(&DriveSpec::new(k0, seed), 0).unwrap();
        let spec = EffectiveModelSpec::new(c, v, 10.0, 0.0).with_lattice(lambda, s).with_offset(beta);
        let h = build_matrix(&spec, &PlaneWaveBasis::centered(15, beta)).unwrap();
        prop_assert_eq!(hermiticity_defect(&h.matrix), 0.0);
    }

    #[test]
    fn floquet_matrix_is_hermitian(k0 in 1.0f64..3.0, v in -10f64..10.0, lambda in 0f64..10.0, s in 1u32..4, seed in any::<u64>(), omega in 5f64..80.0) {
        let (drive, _) = realization(&DriveSpec::new(k0, seed), 0).unwrap();
        let spec = FloquetSpec::new(drive, v, omega, 0.3).with_lattice(lambda, s);
        let w = FloquetBasisWindow::resonant(omega, 0.3, 6);
        let h = build_floquet(&spec, &w).unwrap();
        prop_assert_eq!(hermiticity_defect(&h), 0.0);
    }

    #[test]
    fn lattice_length_scales_inverse_square(j in 0.1f64..100.0, v in 0.1f64..50.0, s in 1u32..500) {
        let a = lattice_xi(j, s, v).unwrap();
        let b = lattice_xi(j, s, 2.0 * v).unwrap();
        prop_assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn chain_trace_is_onsite_sum(eps in prop::collection::vec(-5f64..5.0, 3..40), j in 0.1f64..3.0) {
        let chain = TightBindingChain::new(j, eps.clone()).unwrap();
        let m = chain.matrix();
        let trace: f64 = (0..eps.len()).map(|i| m[(i, i)]).sum();
        prop_assert_eq!(trace, eps.iter().sum::<f64>());
    }

    #[test]
    fn periodic_average_preserves_total(xs in prop::collection::vec(0f64..10.0, 5..200), half in 0usize..6) {
        let ys = moving_average(&xs, half, true);
        let a: f64 = xs.iter().sum();
        let b: f64 = ys.iter().sum();
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
}
