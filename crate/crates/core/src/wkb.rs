//! Leading-order semiclassical estimates: the WKB phase, the tunneling
//! exponent, above-barrier reflection from complex turning points and the
//! total-transmission energies of the power law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::quadrature::kronrod21;
use crate::numerics::{find_root, gamma_fn, integrate, QuadratureSpec, TailSubstitution};
use crate::potentials::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbCoefficients {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTriple {
    pub energy: f64,
    pub phi: f64,
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingData {
    pub energy: f64,
    pub beta: f64,
    pub complex_turning_points: Vec<Complex64>,
    pub gammas: Vec<Complex64>,
}

fn check_p(op: &'static str, p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("p must exceed 1, got {p}")))
    }
}

/// `A(p)`, `B(p)`, `C(p)` from their Gamma-function closed forms.
pub fn coefficients(p: f64) -> Result<WkbCoefficients> {
    check_p("coefficients", p)?;
    let inv = 0.5 / p;
    let sqrt_pi = PI.sqrt();
    let g_mid = gamma_fn(1.5 - inv)?;
    let a = p * sqrt_pi * g_mid / ((p - 1.0) * (p + 1.0) * gamma_fn(1.0 - inv)?);
    let b = p * gamma_fn(inv)? * g_mid / ((p - 1.0) * (p + 1.0) * sqrt_pi);
    let c = sqrt_pi * gamma_fn(1.0 + inv)? / (2.0 * gamma_fn(1.5 + inv)?);
    Ok(WkbCoefficients { p, a, b, c })
}

/// An algebraic tail map matched to integrands decaying like `x^{-p}`,
/// rounded so that the map exponent is an integer.
pub(crate) fn power_tail(p: f64) -> TailSubstitution {
    let k = (1.0 / (p - 1.0)).ceil();
    TailSubstitution::Algebraic { decay: 1.0 + 1.0 / k }
}

/// The same three constants by direct quadrature of their defining integrals.
pub fn coefficients_by_quadrature(p: f64) -> Result<WkbCoefficients> {
    check_p("coefficients_by_quadrature", p)?;
    let spec = QuadratureSpec::with_tolerances(1e-13, 1e-13).with_tail(power_tail(p));
    // ∫₁^∞ (ξ^p − √(ξ^{2p} − 1)) + ∫₀¹ ξ^p
    let a = integrate(
        |t: f64| {
            let tp = t.powf(p);
            1.0 / (tp + (tp * tp - 1.0).max(0.0).sqrt())
        },
        1.0,
        f64::INFINITY,
        &spec,
    )? + 1.0 / (p + 1.0);
    let b = integrate(
        |z: f64| {
            let zp = z.powf(p);
            1.0 / ((1.0 + zp * zp).sqrt() + zp)
        },
        0.0,
        f64::INFINITY,
        &spec,
    )?;
    let c = integrate(|t: f64| (1.0 - t.powf(2.0 * p)).max(0.0).sqrt(), 0.0, 1.0, &spec)?;
    Ok(WkbCoefficients { p, a, b, c })
}

/// Reference point of the phase: the turning point below the barrier, the
/// origin otherwise.
pub fn reference_point(pot: &Potential, energy: f64) -> f64 {
    if energy < pot.v_max() {
        pot.turning_point(energy).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// `φ(E) = ∫_{x₀}^∞ (√(E−V) − √(−V)) dx − ∫₀^{x₀} √(−V) dx` by quadrature.
pub fn wkb_phase(pot: &Potential, energy: f64) -> Result<f64> {
    if !energy.is_finite() {
        return Err(Error::domain("wkb_phase", "energy must be finite"));
    }
    if energy == 0.0 && pot.v_max() <= 0.0 {
        return Ok(0.0);
    }
    let x0 = reference_point(pot, energy);
    let tail = match *pot {
        Potential::PowerLaw { p, .. } => power_tail(p),
        _ => TailSubstitution::Reciprocal,
    };
    let spec = QuadratureSpec::with_tolerances(1e-12, 1e-12).with_tail(tail);
    // The difference of square roots is rewritten without cancellation.
    let outer = integrate(
        |x: f64| {
            let v = pot.value(x);
            energy / ((energy - v).max(0.0).sqrt() + (-v).max(0.0).sqrt())
        },
        x0,
        f64::INFINITY,
        &spec,
    )?;
    Ok(outer - pot.sqrt_neg_v_integral(x0)?)
}

/// Closed-form phase of the power law.
pub fn wkb_phase_closed_form(a: f64, p: f64, energy: f64) -> Result<f64> {
    let k = coefficients(p)?;
    let expo = 0.5 * (1.0 / p + 1.0);
    let scale = a.powf(-1.0 / p);
    Ok(if energy < 0.0 {
        -scale * (-energy).powf(expo) * k.a
    } else {
        scale * energy.powf(expo) * k.b
    })
}

/// `β = ∫ √(V − E) dx` over the forbidden region on `x > 0`.
pub fn tunneling_beta(pot: &Potential, energy: f64) -> Result<f64> {
    let vmax = pot.v_max();
    if !(energy < vmax) {
        return Err(Error::domain(
            "tunneling_beta",
            format!("E = {energy} is not below the barrier top {vmax}"),
        ));
    }
    let x0 = pot.turning_point(energy)?;
    // When the origin is classically allowed the barrier starts at an inner
    // turning point between the origin and the barrier top.
    let xm = pot.v_max_location();
    let x_in = if pot.value(0.0) < energy && xm > 0.0 {
        find_root(|x| pot.value(x) - energy, 0.0, xm, 1e-14)?
    } else {
        0.0
    };
    let spec = QuadratureSpec::with_tolerances(1e-13, 1e-12);
    integrate(|x| (pot.value(x) - energy).max(0.0).sqrt(), x_in, x0, &spec)
}

/// Leading-order `(α, θ)`.
///
/// Below the barrier `α = arccos(e^{−2β})`. Above it the power law uses the
/// closed two-root formula and the exponential families sum the
/// contributions of the complex turning points nearest the real axis. `θ`
/// is zero at this order.
pub fn wkb_alpha_theta(pot: &Potential, energy: f64) -> Result<(f64, f64)> {
    if !energy.is_finite() {
        return Err(Error::domain("wkb_alpha_theta", "energy must be finite"));
    }
    if energy < pot.v_max() {
        let beta = tunneling_beta(pot, energy)?;
        return Ok(((-2.0 * beta).exp().acos(), 0.0));
    }
    match *pot {
        Potential::PowerLaw { a, p } => Ok((power_alpha_above(a, p, energy)?, 0.0)),
        _ => {
            let data = tunneling_data(pot, energy)?;
            let r: Complex64 = data
                .gammas
                .iter()
                .map(|g| Complex64::new(0.0, -PI / 3.0) * (Complex64::i() * 2.0 * g).exp())
                .sum();
            Ok((r.norm().min(PI / 2.0), 0.0))
        }
    }
}

fn power_alpha_above(a: f64, p: f64, energy: f64) -> Result<f64> {
    let k = coefficients(p)?;
    let g = a.powf(-1.0 / p) * energy.powf(0.5 * (1.0 / p + 1.0)) * k.c;
    let c = PI / (2.0 * p);
    let alpha = (2.0 * PI / 3.0) * (2.0 * g * c.cos()).cos().abs() * (-2.0 * g * c.sin()).exp();
    Ok(alpha.clamp(0.0, PI / 2.0))
}

/// `(E, φ, α, θ)` from the semiclassical estimates alone.
pub fn phase_triple(pot: &Potential, energy: f64) -> Result<PhaseTriple> {
    let phi = match *pot {
        Potential::PowerLaw { a, p } => wkb_phase_closed_form(a, p, energy)?,
        _ => wkb_phase(pot, energy)?,
    };
    let (alpha, theta) = wkb_alpha_theta(pot, energy)?;
    Ok(PhaseTriple {
        energy,
        phi,
        alpha,
        theta,
    })
}

/// `E_n = [(2n+1)π a^{1/p} / (4 C(p) cos(π/2p))]^{2p/(p+1)}` for `n < count`.
pub fn total_transmission_energies(a: f64, p: f64, count: usize) -> Result<Vec<f64>> {
    check_p("total_transmission_energies", p)?;
    if !(a > 0.0) || count < 1 {
        return Err(Error::domain("total_transmission_energies", "need a > 0 and count ≥ 1"));
    }
    let k = coefficients(p)?;
    let denom = 4.0 * k.c * (PI / (2.0 * p)).cos();
    Ok((0..count)
        .map(|n| ((2 * n + 1) as f64 * PI * a.powf(1.0 / p) / denom).powf(2.0 * p / (p + 1.0)))
        .collect())
}

/// β below the barrier; complex turning points and their `γ_j` above it.
pub fn tunneling_data(pot: &Potential, energy: f64) -> Result<TunnelingData> {
    if energy < pot.v_max() {
        return Ok(TunnelingData {
            energy,
            beta: tunneling_beta(pot, energy)?,
            complex_turning_points: Vec::new(),
            gammas: Vec::new(),
        });
    }
    let x1 = nearest_complex_turning_point(pot, energy)?;
    let x2 = -x1.conj();
    let g1 = gamma_integral(pot, energy, &[Complex64::new(0.0, 0.0), x1])?;
    let g2 = gamma_integral(pot, energy, &[Complex64::new(0.0, 0.0), x2])?;
    Ok(TunnelingData {
        energy,
        beta: 0.0,
        complex_turning_points: vec![x1, x2],
        gammas: vec![g1, g2],
    })
}

/// Root of `E − V(z)` in the upper half plane closest to the real axis,
/// taken with `Re z ≥ 0`.
pub fn nearest_complex_turning_point(pot: &Potential, energy: f64) -> Result<Complex64> {
    let f = |z: Complex64| energy - pot.value_complex(z);
    let df = |z: Complex64| -pot.derivative_complex(z);
    let mut seeds: Vec<Complex64> = Vec::new();
    let max_im = match *pot {
        Potential::PowerLaw { p, a } => {
            let r = (energy.abs() / (a * a)).powf(0.5 / p);
            seeds.push(Complex64::from_polar(r, PI / (2.0 * p)));
            PI
        }
        Potential::Qes { b, n } => {
            // With s = sinh²z the root condition is a quadratic in s.
            let c = (n as f64).powi(2) - 0.25;
            let qa = Complex64::new(0.25 * b * b, 0.0);
            let qb = Complex64::new(0.25 * b * b + energy, 0.0);
            let qc = Complex64::new(energy + c, 0.0);
            let disc = (qb * qb - 4.0 * qa * qc).sqrt();
            for s in [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)] {
                let w = s.sqrt();
                for w in [w, -w] {
                    seeds.push(w.asinh());
                }
            }
            PI
        }
        // cosh^{2ν} is continued on its principal sheet, Re cosh z > 0.
        Potential::CoshKar { .. } => 0.5 * PI,
    };
    let reach = (energy.abs() + 10.0).ln().max(2.0) + 1.0;
    for i in 0..10 {
        for j in 1..10 {
            seeds.push(Complex64::new(reach * i as f64 / 9.0, max_im * j as f64 / 10.0));
        }
    }
    let mut best: Option<Complex64> = None;
    for seed in seeds {
        let Some(z) = damped_newton(&f, &df, normalize(seed, max_im)) else {
            continue;
        };
        let z = normalize(z, max_im);
        if z.im <= 1e-9 || z.im >= max_im || !z.is_finite() {
            continue;
        }
        let scale = energy.abs() + pot.value_complex(z).norm() + 1.0;
        if f(z).norm() > 1e-10 * scale {
            continue;
        }
        best = match best {
            Some(b) if b.im < z.im - 1e-12 || (b.im <= z.im + 1e-12 && b.re <= z.re) => Some(b),
            _ => Some(z),
        };
    }
    best.ok_or_else(|| Error::Estimation {
        op: "nearest_complex_turning_point",
        detail: format!("no complex root of E - V found at E = {energy}"),
    })
}

fn normalize(z: Complex64, max_im: f64) -> Complex64 {
    let mut z = if z.im < 0.0 { z.conj() } else { z };
    if max_im >= PI && z.im > PI {
        // sinh² and cosh² are iπ-periodic
        let shift = (z.im / PI).floor() * PI;
        z.im -= shift;
    }
    if z.re < 0.0 {
        z = -z.conj();
    }
    z
}

fn damped_newton<F, D>(f: &F, df: &D, mut z: Complex64) -> Option<Complex64>
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let mut fz = f(z);
    for _ in 0..100 {
        let d = df(z);
        if !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let step = fz / d;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = z - step * lambda;
            let ft = f(trial);
            if ft.is_finite() && ft.norm() < fz.norm() {
                z = trial;
                fz = ft;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return if fz.norm() < 1e-12 * (1.0 + z.norm()) { Some(z) } else { None };
        }
        if (step * lambda).norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    Some(z)
}

/// `γ = ∫ √(E − V(z)) dz` along a polyline ending at a turning point.
///
/// The square root starts on its positive real branch at the first vertex
/// and is continued along the path. The last segment is mapped by
/// `t = 1 − s²` to remove the square-root endpoint behaviour.
pub fn gamma_integral(pot: &Potential, energy: f64, path: &[Complex64]) -> Result<Complex64> {
    if path.len() < 2 {
        return Err(Error::domain("gamma_integral", "path needs at least two vertices"));
    }
    let f = |z: Complex64| Complex64::new(energy, 0.0) - pot.value_complex(z);
    let start = f(path[0]);
    if start.re <= 0.0 {
        return Err(Error::domain("gamma_integral", "path must start in a classically allowed region"));
    }
    let mut branch = start.sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    let panels = 64;
    let last = path.len() - 2;
    for (seg, w) in path.windows(2).enumerate() {
        let (za, zb) = (w[0], w[1]);
        let dz = zb - za;
        // Parameter samples ordered from the start of the segment.
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(panels * 21);
        for k in 0..panels {
            let (lo, hi) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (x, wt) in kronrod21() {
                nodes.push((0.5 * (lo + hi) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * wt));
            }
        }
        for (u, wt) in nodes {
            let (t, jac) = if seg == last {
                let s = 1.0 - u;
                (1.0 - s * s, 2.0 * s)
            } else {
                (u, 1.0)
            };
            let root = f(za + dz * t).sqrt();
            branch = if (root - branch).norm() <= (root + branch).norm() { root } else { -root };
            total += branch * dz * (jac * wt);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: [(f64, f64, f64, f64); 6] = [
        (1.25, 2.516_241_550_047_95, 2.645_732_936_934_16, 0.817_576_440_090_196),
        (1.5, 1.457_190_388_732_55, 1.682_618_526_390_55, 0.841_309_263_195_273),
        (2.0, 0.874_019_184_764_04, 1.236_049_784_867_58, 0.874_019_184_764_04),
        (3.0, 0.525_818_289_497_045, 1.051_636_578_994_09, 0.910_743_992_957_843),
        (5.0, 0.306_591_165_033_823, 0.992_149_851_350_309, 0.943_590_581_267_979),
        (10.0, 0.153_729_732_796_509, 0.982_710_125_655_325, 0.970_611_333_294_547),
    ];

    fn power() -> Potential {
        Potential::power_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn closed_forms_match_reference_table() {
        for (p, a, b, c) in TABLE {
            let k = coefficients(p).unwrap();
            assert!((k.a - a).abs() < 1e-12 * a, "A({p})");
            assert!((k.b - b).abs() < 1e-12 * b, "B({p})");
            assert!((k.c - c).abs() < 1e-12 * c, "C({p})");
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        for (p, ..) in TABLE {
            let k = coefficients(p).unwrap();
            let q = coefficients_by_quadrature(p).unwrap();
            assert!((k.a - q.a).abs() < 1e-9, "A({p}): {} vs {}", k.a, q.a);
            assert!((k.b - q.b).abs() < 1e-9, "B({p}): {} vs {}", k.b, q.b);
            assert!((k.c - q.c).abs() < 1e-9, "C({p}): {} vs {}", k.c, q.c);
        }
    }

    #[test]
    fn p_must_exceed_one() {
        assert!(coefficients(1.0).unwrap_err().is_domain());
        assert!(coefficients(0.5).is_err());
        assert!(total_transmission_energies(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(wkb_phase(&power(), 0.0).unwrap(), 0.0);
        assert!((wkb_phase(&power(), 1.0).unwrap() - 1.236_049_784_867_58).abs() < 1e-9);
        assert!((wkb_phase(&power(), -1.0).unwrap() + 0.874_019_184_764_04).abs() < 1e-9);
    }

    #[test]
    fn phase_quadrature_matches_closed_form() {
        for pot in [power(), Potential::power_law(0.5, 1.5).unwrap(), Potential::power_law(2.0, 3.0).unwrap()] {
            let Potential::PowerLaw { a, p } = pot else { unreachable!() };
            for e in [-10.0, -3.0, -0.4, 0.2, 1.0, 4.0, 10.0] {
                let q = wkb_phase(&pot, e).unwrap();
                let c = wkb_phase_closed_form(a, p, e).unwrap();
                assert!((q - c).abs() < 1e-8, "a={a} p={p} E={e}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn beta_examples() {
        assert!((tunneling_beta(&power(), -1.0).unwrap() - 0.874_019_184_764_04).abs() < 1e-10);
        assert!((tunneling_beta(&power(), -16.0).unwrap() - 6.992_153_478_112_32).abs() < 1e-9);
        assert!((tunneling_beta(&power(), -4.0).unwrap() - 2.472_099_569_735_17).abs() < 1e-9);
        assert!(tunneling_beta(&power(), -1e-10).unwrap() < 1e-6);
        assert!(tunneling_beta(&power(), 0.5).unwrap_err().is_domain());
    }

    #[test]
    fn beta_over_forbidden_region_only() {
        // E between V(0) and the barrier top: only the hump contributes.
        let q = Potential::qes(2.0, 2).unwrap();
        let e = -3.0;
        let beta = tunneling_beta(&q, e).unwrap();
        let direct = integrate(
            |x: f64| (q.value(x) - e).max(0.0).sqrt(),
            0.0,
            q.turning_point(e).unwrap(),
            &QuadratureSpec::with_tolerances(1e-9, 1e-9),
        )
        .unwrap();
        assert!(beta > 0.0 && (beta - direct).abs() < 1e-7);
    }

    #[test]
    fn alpha_examples() {
        let (alpha, theta) = wkb_alpha_theta(&power(), -1.0).unwrap();
        assert!((alpha - 1.395_789_197_218_33).abs() < 1e-10);
        assert_eq!(theta, 0.0);
        let e0 = total_transmission_energies(1.0, 2.0, 1).unwrap()[0];
        let (alpha, _) = wkb_alpha_theta(&power(), e0).unwrap();
        assert!(alpha < 1e-12);
        let (alpha, _) = wkb_alpha_theta(&power(), -400.0).unwrap();
        assert!((alpha - PI / 2.0).abs() < 1e-12);
        for e in [0.1, 0.7, 2.0, 9.0] {
            let (alpha, _) = wkb_alpha_theta(&power(), e).unwrap();
            assert!((0.0..=PI / 2.0).contains(&alpha));
        }
    }

    #[test]
    fn tt_energies() {
        let e = total_transmission_energies(1.0, 2.0, 4).unwrap();
        let expected = [1.376_507_403_471_31, 5.955_801_633_544_40, 11.768_972_751_791_7, 18.432_147_547_921_3];
        for (got, want) in e.iter().zip(expected) {
            assert!((got - want).abs() < 1e-11 * want);
        }
        let k = coefficients(2.0).unwrap();
        for (n, en) in e.iter().enumerate() {
            let lhs = en.powf(0.75) - e[0].powf(0.75);
            let rhs = n as f64 * PI / (2.0 * k.c * (PI / 4.0).cos());
            assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
        }
        let scaled = total_transmission_energies(3.0, 2.0, 3).unwrap();
        for (s, u) in scaled.iter().zip(&e) {
            assert!((s - 3f64.powf(2.0 / 3.0) * u).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn power_law_complex_turning_point_reproduces_closed_form() {
        let e = 2.0;
        let data = tunneling_data(&power(), e).unwrap();
        let x1 = data.complex_turning_points[0];
        let expected = Complex64::from_polar(e.powf(0.25), PI / 4.0);
        assert!((x1 - expected).norm() < 1e-10);
        let k = coefficients(2.0).unwrap();
        let g1 = Complex64::from_polar(e.powf(0.75) * k.c, PI / 4.0);
        assert!((data.gammas[0] - g1).norm() < 1e-9, "{} vs {g1}", data.gammas[0]);
        assert!((data.gammas[1] + g1.conj()).norm() < 1e-9);
    }

    #[test]
    fn exponential_family_turning_points() {
        for (pot, e) in [
            (Potential::qes(2.0, 2).unwrap(), 1.0),
            (Potential::qes(1.0, 3).unwrap(), 5.0),
            (Potential::cosh_kar(1.0, 1.0).unwrap(), 0.5),
            (Potential::cosh_kar(1.0, 2.0).unwrap(), 2.0),
        ] {
            let data = tunneling_data(&pot, e).unwrap();
            for z in &data.complex_turning_points {
                let r = Complex64::new(e, 0.0) - pot.value_complex(*z);
                assert!(r.norm() < 1e-10 * (1.0 + e.abs()), "{pot:?}: {z}");
                assert!(z.im > 0.0);
            }
            let (alpha, theta) = wkb_alpha_theta(&pot, e).unwrap();
            assert!((0.0..=PI / 2.0).contains(&alpha) && theta == 0.0);
        }
    }

    #[test]
    fn gamma_is_contour_independent() {
        let pot = Potential::qes(2.0, 2).unwrap();
        let e = 1.5;
        let x1 = nearest_complex_turning_point(&pot, e).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let straight = gamma_integral(&pot, e, &[zero, x1]).unwrap();
        for bend in [0.1, -0.1] {
            let mid = x1 * 0.5 * Complex64::new(1.0, bend);
            let bent = gamma_integral(&pot, e, &[zero, mid, x1]).unwrap();
            assert!((bent - straight).norm() < 1e-8, "{bent} vs {straight}");
        }
    }
}
