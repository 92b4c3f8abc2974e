use gbcd_core::denoise::{max_log_llrs, pme_exact, pme_piecewise, LlrParams, PlmTable};
use gbcd_core::{Complex64, Constellation};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8, 16])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn table_matches_formula(side in side(), rho in 0.2f64..8.0, beta in 0.1f64..2.0, x in -40.0f64..40.0) {
        let t = PlmTable::pme(rho, beta, side, 1.0).unwrap();
        let direct = pme_piecewise(x, rho, beta, side * side);
        prop_assert!((t.eval(x) - direct).abs() <= 1e-9);
    }

    #[test]
    fn piecewise_pme_is_odd_and_monotone(side in side(), rho in 0.2f64..8.0, beta in 0.1f64..2.0, x in 0.0f64..20.0, dx in 0.0f64..2.0) {
        let t = PlmTable::pme(rho, beta, side, 1.0).unwrap();
        prop_assert!((t.eval(-x) + t.eval(x)).abs() <= 1e-12);
        prop_assert!(t.eval(x + dx) >= t.eval(x) - 1e-12);
        prop_assert!(t.eval(-x - dx) <= t.eval(-x) + 1e-12);
    }

    #[test]
    fn exact_pme_is_odd_and_monotone(q in prop::sample::select(vec![4usize, 16, 64, 256]), omega in 0.5f64..50.0, x in 0.0f64..2.0, dx in 0.0f64..0.5) {
        let c = Constellation::new(q).unwrap();
        let pam = c.pam_points();
        let f = |v: f64| pme_exact(v, omega, 1.0, pam);
        prop_assert!((f(-x) + f(x)).abs() <= 1e-12);
        prop_assert!(f(x + dx) >= f(x) - 1e-12);
    }

    #[test]
    fn llr_axis_antisymmetry(q in prop::sample::select(vec![4usize, 16, 64, 256]), re in -1.5f64..1.5, im in -1.5f64..1.5, mu in 0.2f64..1.0, xi in 0.05f64..1.0) {
        // Negating one axis flips that axis's sign bit and leaves the
        // magnitude bits unchanged.
        let c = Constellation::new(q).unwrap();
        let half = c.bits_per_axis();
        let params = LlrParams::from_gains(vec![mu], 1.0);
        let params = LlrParams { xi: vec![xi], ..params };
        let a = max_log_llrs(&[Complex64::new(re, im)], &params, &c);
        let b = max_log_llrs(&[Complex64::new(-re, im)], &params, &c);
        prop_assert!((a[0] + b[0]).abs() <= 1e-9 * (1.0 + a[0].abs()));
        for j in 1..half {
            prop_assert!((a[j] - b[j]).abs() <= 1e-9 * (1.0 + a[j].abs()));
        }
        for j in half..2 * half {
            prop_assert!((a[j] - b[j]).abs() <= 1e-12 * (1.0 + a[j].abs()));
        }
    }
}
