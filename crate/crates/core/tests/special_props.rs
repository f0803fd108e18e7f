use grokklab_core::special::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lambert_residual(z in -0.3678f64..1e8) {
        let w = lambert_w0(z).unwrap();
        prop_assert!(w >= -1.0);
        let r = w * w.exp() - z;
        prop_assert!(r.abs() <= 1e-12 * z.abs().max(1e-3), "z={z} w={w} r={r}");
    }

    #[test]
    fn gamma_q_at_unit_order(z in 0.0f64..700.0) {
        let q = reg_upper_gamma(1.0, z).unwrap();
        let e = (-z).exp();
        prop_assert!((q - e).abs() <= 1e-13 * e.max(1e-300) + 1e-300, "z={z} {q} {e}");
    }

    #[test]
    fn gamma_q_half_order_is_erfc(z in 0.0f64..600.0) {
        let q = reg_upper_gamma(0.5, z).unwrap();
        let e = erfc(z.sqrt());
        prop_assert!((q - e).abs() <= 1e-12 * e + 1e-300);
    }

    #[test]
    fn gamma_q_decreasing(a in 0.5f64..400.0, z in 0.0f64..500.0, dz in 1e-3f64..5.0) {
        let q0 = reg_upper_gamma(a, z).unwrap();
        let q1 = reg_upper_gamma(a, z + dz).unwrap();
        prop_assert!((0.0..=1.0).contains(&q0));
        prop_assert!(q1 <= q0 * (1.0 + 1e-13));
    }

    #[test]
    fn erf_monotone_and_complementary(x in -8.0f64..8.0, dx in 1e-4f64..1.0) {
        prop_assert!(erf(x + dx) >= erf(x));
        prop_assert!((erf(x) + erfc(x) - 1.0).abs() < 2e-16 * 4.0);
        prop_assert!((erf(-x) + erf(x)).abs() < 1e-16);
    }

    #[test]
    fn hyp0f1_scaled_consistent(z in 0.0f64..600.0) {
        let plain = reg_hyp0f1(2.0, z).unwrap();
        let scaled = reg_hyp0f1_scaled(2.0, z).unwrap();
        prop_assert!((scaled / (plain * (-2.0 * z.sqrt()).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyp0f1_increasing(z in 0.0f64..1e5, dz in 1e-3f64..10.0) {
        prop_assert!(reg_hyp0f1_scaled(2.0, z).unwrap() > 0.0);
        prop_assert!(reg_hyp0f1(2.0, z + dz).unwrap() > reg_hyp0f1(2.0, z).unwrap());
    }
}
