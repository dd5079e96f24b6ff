use proptest::prelude::*;
use sae_core::potentials::Potential;
use sae_core::wkb::{coefficients, wkb_alpha_theta, wkb_phase, wkb_phase_closed_form};
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficient_identity(p in 1.05f64..20.0) {
        let k = coefficients(p).unwrap();
        prop_assert!((k.c - k.b * (PI / (2.0 * p)).cos()).abs() <= 1e-10);
        prop_assert!(k.a > 0.0 && k.b > 0.0 && k.c > 0.0);
    }

    #[test]
    fn phase_is_monotone(which in 0usize..3, e in -10.0f64..10.0, de in 0.01f64..2.0) {
        let pot = [
            Potential::power_law(1.0, 2.0).unwrap(),
            Potential::qes(2.0, 2).unwrap(),
            Potential::cosh_kar(1.0, 1.5).unwrap(),
        ][which];
        prop_assert!(wkb_phase(&pot, e + de).unwrap() >= wkb_phase(&pot, e).unwrap());
    }

    #[test]
    fn phase_quadrature_matches_closed_form(a in 0.5f64..2.0, p in 1.3f64..4.0, e in -10.0f64..10.0) {
        let pot = Potential::power_law(a, p).unwrap();
        let quad = wkb_phase(&pot, e).unwrap();
        let closed = wkb_phase_closed_form(a, p, e).unwrap();
        prop_assert!((quad - closed).abs() <= 1e-8 * closed.abs().max(1.0), "{quad} vs {closed}");
    }

    #[test]
    fn alpha_in_range(e in -10.0f64..10.0) {
        let (alpha, theta) = wkb_alpha_theta(&Potential::power_law(1.0, 2.0).unwrap(), e).unwrap();
        prop_assert!((0.0..=PI / 2.0).contains(&alpha));
        prop_assert_eq!(theta, 0.0);
    }
}

#[test]
fn a_equals_c_at_p2() {
    let k = coefficients(2.0).unwrap();
    assert!((k.a - k.c).abs() <= 1e-10);
}

// The two leading-order α branches approach 0 and π/2 at the barrier top,
// so they cannot agree within 0.05 there.
#[test]
#[ignore = "below- and above-barrier estimates have different limits at V_max"]
fn alpha_continuous_across_barrier_top() {
    let pot = Potential::power_law(1.0, 2.0).unwrap();
    let below = wkb_alpha_theta(&pot, -1e-3).unwrap().0;
    let above = wkb_alpha_theta(&pot, 1e-3).unwrap().0;
    assert!((below - above).abs() <= 0.05, "{below} vs {above}");
}
