use proptest::prelude::*;
use sae_core::potentials::Potential;

fn any_potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.2f64..3.0, 1.05f64..6.0).prop_map(|(a, p)| Potential::power_law(a, p).unwrap()),
        (0.2f64..4.0, 1u32..5).prop_map(|(b, n)| Potential::qes(b, n).unwrap()),
        (0.2f64..3.0, 0.2f64..3.0).prop_map(|(a1, nu)| Potential::cosh_kar(a1, nu).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_potential(pot in any_potential(), x in -8.0f64..8.0) {
        prop_assert_eq!(pot.value(x), pot.value(-x));
        prop_assert_eq!(pot.derivative(x), -pot.derivative(-x));
    }

    #[test]
    fn decays_beyond_growth_scale(pot in any_potential(), t in 0.0f64..1.0) {
        let x1 = pot.growth_bound().x1.max(pot.v_max_location());
        let x = x1 + 0.5 + 4.0 * t;
        prop_assert!(pot.value(x + 0.01) < pot.value(x));
    }

    #[test]
    fn flight_time_is_additive(pot in any_potential(), x1 in 0.0f64..1.5, gap in 0.1f64..2.0) {
        let e = pot.v_max() + 1.0;
        let x2 = x1 + gap;
        let t1 = pot.flight_time(e, x1).unwrap();
        let t2 = pot.flight_time(e, x2).unwrap();
        prop_assert!(t2 < t1);
        let pot2 = pot;
        let middle = sae_core::numerics::integrate(
            |x: f64| 1.0 / (2.0 * (e - pot2.value(x))).sqrt(),
            x1,
            x2,
            &sae_core::numerics::QuadratureSpec::with_tolerances(1e-13, 1e-12),
        ).unwrap();
        prop_assert!((t1 - t2 - middle).abs() <= 1e-8 * t1.max(1.0), "{} vs {}", t1 - t2, middle);
    }

    #[test]
    fn coshkar_nu1_is_shifted_qes(b in 0.2f64..4.0, x in -6.0f64..6.0) {
        let kk = Potential::cosh_kar(0.25 * b * b, 1.0).unwrap();
        let qes = Potential::qes(b, 1).unwrap();
        let diff = kk.value(x) - (qes.value(x) - 0.25 * b * b);
        prop_assert!(diff.abs() <= 1e-12 * kk.value(x).abs().max(1.0));
    }

    #[test]
    fn json_round_trip(pot in any_potential()) {
        let text = serde_json::to_string(&pot).unwrap();
        let back: Potential = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(pot, back);
    }
}
