use num_complex::Complex64;
use proptest::prelude::*;
use sae_core::potentials::Potential;
use sae_core::scattering::{
    extract_alpha_theta, parity_phase_at, parity_phase_numeric, solve_scattering, Parity, ScatteringAmplitudes,
    SolverConfig,
};
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_theta_round_trip(alpha in 0.0f64..(PI / 2.0), theta in -3.0f64..3.0) {
        let t = Complex64::from_polar(alpha.cos(), theta);
        let r = Complex64::new(0.0, -1.0) * Complex64::from_polar(alpha.sin(), theta);
        let amps = ScatteringAmplitudes { energy: 0.0, r, t, x_max: 1.0, residual_unitarity: 0.0 };
        let at = extract_alpha_theta(&amps, 1e-6).unwrap();
        prop_assert!((at.alpha - alpha).abs() < 1e-7);
        if alpha < PI / 2.0 - 1e-6 {
            prop_assert!((at.theta - theta).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unitarity(which in 0usize..3, e in -6.0f64..8.0) {
        let pot = [
            Potential::power_law(1.0, 2.0).unwrap(),
            Potential::qes(2.0, 2).unwrap(),
            Potential::cosh_kar(1.0, 1.0).unwrap(),
        ][which];
        let amps = solve_scattering(&pot, e, &SolverConfig::default()).unwrap();
        prop_assert!(amps.flux_residual() <= 1e-6, "{}", amps.flux_residual());
        prop_assert!(amps.phase_residual() <= 1e-6, "{}", amps.phase_residual());
    }

    #[test]
    fn phase_independent_of_truncation(e in -6.0f64..8.0, odd in any::<bool>()) {
        let pot = Potential::power_law(1.0, 2.0).unwrap();
        let cfg = SolverConfig::default();
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let a = parity_phase_numeric(&pot, e, parity, &cfg).unwrap();
        let b = parity_phase_at(&pot, e, parity, 2.0 * a.x_max, &cfg).unwrap();
        prop_assert!((a.delta - b.delta).abs() < 1e-4);
    }
}

#[test]
fn parity_difference_matches_scattering_alpha() {
    let pot = Potential::power_law(1.0, 2.0).unwrap();
    let cfg = SolverConfig::default();
    for e in [-4.0, -1.0, 0.5, 1.3765, 3.0, 5.9558] {
        let at = extract_alpha_theta(&solve_scattering(&pot, e, &cfg).unwrap(), 1e-6).unwrap();
        let even = parity_phase_numeric(&pot, e, Parity::Even, &cfg).unwrap().delta;
        let odd = parity_phase_numeric(&pot, e, Parity::Odd, &cfg).unwrap().delta;
        let signed = sae_core::scattering::wrap_half_pi(odd - even);
        assert!((signed - at.signed_alpha).abs() < 0.02, "E={e}: {signed} vs {}", at.signed_alpha);
        let off_axis = at.phase_mismatch.min(PI - at.phase_mismatch);
        assert!(off_axis < 0.01 || at.alpha < 1e-3, "E={e}: {}", at.phase_mismatch);
    }
}
