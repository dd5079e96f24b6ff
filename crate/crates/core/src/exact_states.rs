//! Closed-form states: the QES `n = 2` total-transmission modes and their
//! parity combinations, the cosh-power pair, and Wronskian limits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureSpec};
use crate::potentials::Potential;
use crate::scattering::Parity;

/// Value with first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub fn constant(c: Complex64) -> Jet {
        Jet {
            v: c,
            d1: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn real(v: f64, d1: f64, d2: f64) -> Jet {
        Jet {
            v: v.into(),
            d1: d1.into(),
            d2: d2.into(),
        }
    }

    /// `g ∘ self` given `g, g′, g″` at `self.v`.
    fn compose(self, g: Complex64, g1: Complex64, g2: Complex64) -> Jet {
        Jet {
            v: g,
            d1: g1 * self.d1,
            d2: g2 * self.d1 * self.d1 + g1 * self.d2,
        }
    }

    pub fn cos(self) -> Jet {
        let (c, s) = (self.v.cos(), self.v.sin());
        self.compose(c, -s, -c)
    }

    pub fn sin(self) -> Jet {
        let (c, s) = (self.v.cos(), self.v.sin());
        self.compose(s, c, -s)
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    /// Real power of a positive real jet.
    pub fn powf(self, a: f64) -> Jet {
        let x = self.v.re;
        self.compose(x.powf(a).into(), (a * x.powf(a - 1.0)).into(), (a * (a - 1.0) * x.powf(a - 2.0)).into())
    }

    pub fn scale(self, c: Complex64) -> Jet {
        Jet {
            v: c * self.v,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

fn sinh_jet(x: f64) -> Jet {
    Jet::real(x.sinh(), x.cosh(), x.sinh())
}

fn cosh_jet(x: f64) -> Jet {
    Jet::real(x.cosh(), x.sinh(), x.cosh())
}

/// `∫₀ˣ cosh^ν`, tabulated at fixed breakpoints.
#[derive(Debug)]
struct CoshPowerIntegral {
    nu: f64,
    step: f64,
    table: Vec<f64>,
}

impl CoshPowerIntegral {
    const STEP: f64 = 0.25;
    const REACH: f64 = 12.0;

    fn new(nu: f64) -> Result<Self> {
        let spec = QuadratureSpec::with_tolerances(1e-300, 1e-14);
        let n = (Self::REACH / Self::STEP) as usize;
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 0..n {
            let a = k as f64 * Self::STEP;
            acc += integrate(|t: f64| t.cosh().powf(nu), a, a + Self::STEP, &spec)?;
            table.push(acc);
        }
        Ok(CoshPowerIntegral {
            nu,
            step: Self::STEP,
            table,
        })
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        let k = ((ax / self.step).floor() as usize).min(self.table.len() - 1);
        let a = k as f64 * self.step;
        let nu = self.nu;
        let rest = if ax > a {
            integrate(|t: f64| t.cosh().powf(nu), a, ax, &QuadratureSpec::with_tolerances(1e-300, 1e-14))?
        } else {
            0.0
        };
        Ok((self.table[k] + rest).copysign(x))
    }
}

#[derive(Debug, Clone)]
enum Form {
    /// `cosh^{−3/2}[cos S − c sinh sin S]` (even) or `[sin S + c sinh cos S]` (odd), `S = (b/2) sinh`.
    QesParity { b: f64, c: f64, parity: Parity },
    /// `e^{±iS} cosh^{−3/2}[±i sinh − k]`.
    QesMover { b: f64, k: f64, dir: f64 },
    /// `cosh^{−ν/2} {cos, sin}(√A₁ ∫₀ˣ cosh^ν)`.
    CoshPower { a1: f64, nu: f64, parity: Parity, integral: Arc<CoshPowerIntegral> },
}

/// A closed-form state with its energy.
#[derive(Debug, Clone)]
pub struct StateFunction {
    pub label: String,
    pub energy: f64,
    form: Form,
}

impl StateFunction {
    pub fn jet(&self, x: f64) -> Result<Jet> {
        match &self.form {
            Form::QesParity { b, c, parity } => {
                let s = sinh_jet(x).scale((0.5 * b).into());
                let sh = sinh_jet(x).scale((*c).into());
                let bracket = match parity {
                    Parity::Even => s.cos() - sh * s.sin(),
                    Parity::Odd => s.sin() + sh * s.cos(),
                };
                Ok(cosh_jet(x).powf(-1.5) * bracket)
            }
            Form::QesMover { b, k, dir } => {
                let i = Complex64::i();
                let phase = sinh_jet(x).scale(i * (0.5 * b * dir)).exp();
                let bracket = sinh_jet(x).scale(i * *dir) - Jet::constant((*k).into());
                Ok(phase * cosh_jet(x).powf(-1.5) * bracket)
            }
            Form::CoshPower {
                a1,
                nu,
                parity,
                integral,
            } => {
                let ch = x.cosh();
                let inner = Jet::real(integral.eval(x)?, ch.powf(*nu), nu * ch.powf(nu - 1.0) * x.sinh())
                    .scale(a1.sqrt().into());
                let wave = match parity {
                    Parity::Even => inner.cos(),
                    Parity::Odd => inner.sin(),
                };
                Ok(cosh_jet(x).powf(-0.5 * nu) * wave)
            }
        }
    }

    /// `(ψ(x), ψ′(x))`
    pub fn evaluate(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let j = self.jet(x)?;
        Ok((j.v, j.d1))
    }
}

fn check_b(op: &'static str, b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(op, "b must be positive"));
    }
    Ok(())
}

/// `E₁ = (b² − 5)/4 − √(b² + 1)`, `E₂ = (b² − 5)/4 + √(b² + 1)`.
pub fn qes_energies(b: f64) -> (f64, f64) {
    let r = (b * b + 1.0).sqrt();
    let base = 0.25 * (b * b - 5.0);
    (base - r, base + r)
}

/// `[ψ⁺₁, ψ⁻₁, ψ⁺₂, ψ⁻₂]` for the `n = 2` QES potential.
pub fn qes_states(b: f64) -> Result<[StateFunction; 4]> {
    check_b("qes_states", b)?;
    let r = (b * b + 1.0).sqrt();
    let (e1, e2) = qes_energies(b);
    let make = |label: &str, energy: f64, c: f64, parity: Parity| StateFunction {
        label: label.into(),
        energy,
        form: Form::QesParity { b, c, parity },
    };
    Ok([
        make("psi+1", e1, (1.0 - r) / b, Parity::Even),
        make("psi-1", e1, (1.0 - r) / b, Parity::Odd),
        make("psi+2", e2, (1.0 + r) / b, Parity::Even),
        make("psi-2", e2, (1.0 + r) / b, Parity::Odd),
    ])
}

/// Right and left movers `[ψ_{1r}, ψ_{1l}, ψ_{2r}, ψ_{2l}]`, with
/// `k₁ = (√(b²+1) + 1)/b` and `k₂ = (1 − √(b²+1))/b`.
pub fn qes_movers(b: f64) -> Result<[StateFunction; 4]> {
    check_b("qes_movers", b)?;
    let r = (b * b + 1.0).sqrt();
    let (e1, e2) = qes_energies(b);
    let make = |label: &str, energy: f64, k: f64, dir: f64| StateFunction {
        label: label.into(),
        energy,
        form: Form::QesMover { b, k, dir },
    };
    Ok([
        make("psi1r", e1, (r + 1.0) / b, 1.0),
        make("psi1l", e1, (r + 1.0) / b, -1.0),
        make("psi2r", e2, (1.0 - r) / b, 1.0),
        make("psi2l", e2, (1.0 - r) / b, -1.0),
    ])
}

/// `[ψ⁺, ψ⁻]` at `E = −ν²/4` for `V = −A₁cosh^{2ν}x − (ν/2)(ν/2 + 1)sech²x`.
pub fn koley_kar_pair(a1: f64, nu: f64) -> Result<[StateFunction; 2]> {
    if !(a1 > 0.0 && nu > 0.0) || !a1.is_finite() || !nu.is_finite() {
        return Err(Error::domain("koley_kar_pair", "A1 and nu must be positive"));
    }
    let integral = Arc::new(CoshPowerIntegral::new(nu)?);
    let make = |label: &str, parity: Parity| StateFunction {
        label: label.into(),
        energy: -0.25 * nu * nu,
        form: Form::CoshPower {
            a1,
            nu,
            parity,
            integral: integral.clone(),
        },
    };
    Ok([make("kk+", Parity::Even), make("kk-", Parity::Odd)])
}

/// `f′g − fg′` at `x`.
pub fn wronskian_at(f: &StateFunction, g: &StateFunction, x: f64) -> Result<Complex64> {
    let (fv, fd) = f.evaluate(x)?;
    let (gv, gd) = g.evaluate(x)?;
    Ok(fd * gv - fv * gd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WronskianLimit {
    pub pair: (String, String),
    pub limit_plus: f64,
    pub limit_minus: f64,
    pub equal: bool,
    pub closed_form: Option<f64>,
}

/// Limits of `W[f, g]` at `x → ±∞` from the sequence `x = 4·1.5^k ≤ 200`.
pub fn wronskian_limits(f: &StateFunction, g: &StateFunction) -> Result<WronskianLimit> {
    let limit = |sign: f64| -> Result<f64> {
        let mut trace: Vec<(f64, f64)> = Vec::new();
        let mut x = 4.0;
        while x <= 200.0 {
            let w = wronskian_at(f, g, sign * x)?.re;
            if let Some(&(_, prev)) = trace.last() {
                if (w - prev).abs() <= 1e-7 {
                    return Ok(w);
                }
            }
            trace.push((sign * x, w));
            x *= 1.5;
        }
        Err(Error::LimitNotConverged {
            op: "wronskian_limits",
            trace,
        })
    };
    let limit_plus = limit(1.0)?;
    let limit_minus = limit(-1.0)?;
    Ok(WronskianLimit {
        pair: (f.label.clone(), g.label.clone()),
        limit_plus,
        limit_minus,
        equal: (limit_plus - limit_minus).abs() <= 1e-6,
        closed_form: None,
    })
}

/// The six parity-pair Wronskian limits with their closed forms.
pub fn qes_wronskian_table(b: f64) -> Result<Vec<WronskianLimit>> {
    let [p1, m1, p2, m2] = qes_states(b)?;
    let r = (b * b + 1.0).sqrt();
    let rows = [
        (&p1, &m1, -(b * b + 2.0 - 2.0 * r) / (2.0 * b)),
        (&p1, &m2, 0.5 * b),
        (&p2, &m1, 0.5 * b),
        (&p2, &m2, -(b * b + 2.0 + 2.0 * r) / (2.0 * b)),
        (&p1, &p2, 0.0),
        (&m1, &m2, 0.0),
    ];
    rows.iter()
        .map(|(f, g, exact)| {
            let mut w = wronskian_limits(f, g)?;
            w.closed_form = Some(*exact);
            Ok(w)
        })
        .collect()
}

/// `sup |f″ + (E − V) f| / (1 + |f″|)` over `grid`.
pub fn schrodinger_residual(f: &StateFunction, pot: &Potential, energy: f64, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        if x.abs() > 6.0 {
            return Err(Error::domain("schrodinger_residual", "grid must lie within |x| ≤ 6"));
        }
        let j = f.jet(x)?;
        let r = (j.d2 + (energy - pot.value(x)) * j.v).norm() / (1.0 + j.d2.norm());
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Uniform grid on `[−6, 6]`.
pub fn residual_grid(samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n).map(|i| -6.0 + 12.0 * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energies() {
        let (e1, e2) = qes_energies(2.0);
        assert!((e1 + 2.48606797749979).abs() < 1e-13);
        assert!((e2 - 1.98606797749979).abs() < 1e-13);
        let (e1, e2) = qes_energies(0.7);
        assert!((e2 - e1 - 2.0 * (1.49f64).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn origin_values() {
        let [p1, m1, ..] = qes_states(2.0).unwrap();
        assert!((p1.evaluate(0.0).unwrap().0 - 1.0).norm() < 1e-15);
        assert!(m1.evaluate(0.0).unwrap().0.norm() < 1e-15);
        let [kp, km] = koley_kar_pair(1.0, 2.0).unwrap();
        assert!((kp.evaluate(0.0).unwrap().0 - 1.0).norm() < 1e-15);
        assert!(km.evaluate(0.0).unwrap().0.norm() < 1e-15);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let mut states: Vec<StateFunction> = qes_states(2.0).unwrap().into();
        states.extend(qes_movers(1.3).unwrap());
        states.extend(koley_kar_pair(0.8, 1.7).unwrap());
        for s in &states {
            for x in [-2.3, -0.4, 0.1, 1.7, 3.2] {
                let h = 1e-5;
                let j = s.jet(x).unwrap();
                let fd = (s.jet(x + h).unwrap().v - s.jet(x - h).unwrap().v) / (2.0 * h);
                let fd2 = (s.jet(x + h).unwrap().d1 - s.jet(x - h).unwrap().d1) / (2.0 * h);
                assert!((fd - j.d1).norm() <= 1e-6 * j.d1.norm().max(1.0), "{} {x}", s.label);
                assert!((fd2 - j.d2).norm() <= 1e-6 * j.d2.norm().max(1.0), "{} {x}", s.label);
            }
        }
    }

    #[test]
    fn cosh_power_integral_closed_forms() {
        let one = CoshPowerIntegral::new(1.0).unwrap();
        let two = CoshPowerIntegral::new(2.0).unwrap();
        for x in [-3.3, 0.0, 0.6, 7.1, 14.0] {
            assert!((one.eval(x).unwrap() - x.sinh()).abs() <= 1e-13 * x.cosh());
            let exact = 0.5 * x + 0.25 * (2.0 * x).sinh();
            assert!((two.eval(x).unwrap() - exact).abs() <= 1e-13 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn nu_one_matches_qes_n1() {
        // ν = 1, A₁ = b²/4 gives cosh^{−1/2}cos((b/2) sinh x).
        let b = 2.4f64;
        let [kp, _] = koley_kar_pair(0.25 * b * b, 1.0).unwrap();
        for x in [0.3f64, 1.9, -2.2] {
            let exact = x.cosh().powf(-0.5) * (0.5 * b * x.sinh()).cos();
            assert!((kp.evaluate(x).unwrap().0.re - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn residuals() {
        let grid = residual_grid(241);
        let pot = Potential::qes(2.0, 2).unwrap();
        for s in qes_states(2.0).unwrap().iter().chain(qes_movers(2.0).unwrap().iter()) {
            let r = schrodinger_residual(s, &pot, s.energy, &grid).unwrap();
            assert!(r <= 1e-8, "{}: {r}", s.label);
            assert!(schrodinger_residual(s, &pot, s.energy + 0.1, &grid).unwrap() > 1e-3);
        }
        for nu in [1.0, 2.0, 0.6] {
            let pot = Potential::cosh_kar(1.0, nu).unwrap();
            for s in koley_kar_pair(1.0, nu).unwrap().iter() {
                let r = schrodinger_residual(s, &pot, s.energy, &grid).unwrap();
                assert!(r <= 1e-8, "{} nu={nu}: {r}", s.label);
            }
        }
        assert!(schrodinger_residual(&qes_states(2.0).unwrap()[0], &pot_qes(), -2.0, &[7.0]).is_err());
    }

    fn pot_qes() -> Potential {
        Potential::qes(2.0, 2).unwrap()
    }

    #[test]
    fn wronskian_basics() {
        let [p1, _, _, m2] = qes_states(2.0).unwrap();
        assert!(wronskian_at(&p1, &p1, 1.3).unwrap().norm() < 1e-15);
        assert!((wronskian_at(&p1, &m2, 8.0).unwrap().re - 1.0).abs() < 1e-5);
        let [kp, km] = koley_kar_pair(1.0, 2.0).unwrap();
        // W[ψ⁺, ψ⁻] = −√A₁ exactly.
        for x in [0.0, 1.5, -3.0] {
            assert!((wronskian_at(&kp, &km, x).unwrap().re + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_table() {
        for w in qes_wronskian_table(2.0).unwrap() {
            let exact = w.closed_form.unwrap();
            assert!((w.limit_plus - exact).abs() < 1e-6, "{w:?}");
            assert!((w.limit_minus - exact).abs() < 1e-6, "{w:?}");
            assert!(w.equal);
        }
    }

    #[test]
    fn movers_rebuild_parity_states() {
        let [p1, m1, p2, m2] = qes_states(2.0).unwrap();
        let [r1, l1, r2, l2] = qes_movers(2.0).unwrap();
        let at = |f: &StateFunction, x: f64| f.evaluate(x).unwrap().0;
        for (r, l, p, m) in [(&r1, &l1, &p1, &m1), (&r2, &l2, &p2, &m2)] {
            let c_plus = (at(r, 0.0) + at(l, 0.0)) / at(p, 0.0);
            let c_minus = (at(r, 0.7) - at(l, 0.7)) / Complex64::i() / at(m, 0.7);
            for x in [-3.0, -0.8, 0.0, 0.5, 2.6] {
                let sum = at(r, x) + at(l, x);
                assert!((sum - c_plus * at(p, x)).norm() < 1e-10);
                let diff = (at(r, x) - at(l, x)) / Complex64::i();
                assert!((diff - c_minus * at(m, x)).norm() < 1e-10);
            }
        }
    }
}
