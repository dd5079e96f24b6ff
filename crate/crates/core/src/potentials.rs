//! The three symmetric potential families and their classical helpers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate, QuadratureSpec, TailSubstitution};

/// A symmetric potential unbounded from below.
///
/// * `PowerLaw`: `V = −a²|x|^{2p}`
/// * `Qes`: `V = −(b²/4) sinh²x − (n² − ¼) sech²x`
/// * `CoshKar`: `V = −A₁ cosh^{2ν}x − (ν/2)(ν/2 + 1) sech²x`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Potential {
    #[serde(rename = "power")]
    PowerLaw { a: f64, p: f64 },
    #[serde(rename = "qes")]
    Qes { b: f64, n: u32 },
    #[serde(rename = "coshkar")]
    CoshKar { a1: f64, nu: f64 },
}

/// How fast `V → −∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Power(f64),
    Exponential,
}

/// A certified lower envelope: `V(x) ≤ −c |x|^{2p̃}` for `|x| ≥ x1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub exponent: f64,
    pub c: f64,
    pub x1: f64,
}

/// Classical quantities at energy `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalData {
    pub energy: f64,
    pub x0: Option<f64>,
    pub t_e: f64,
}

impl Potential {
    pub fn power_law(a: f64, p: f64) -> Result<Self> {
        Potential::PowerLaw { a, p }.validated()
    }

    pub fn qes(b: f64, n: u32) -> Result<Self> {
        Potential::Qes { b, n }.validated()
    }

    pub fn cosh_kar(a1: f64, nu: f64) -> Result<Self> {
        Potential::CoshKar { a1, nu }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Potential::PowerLaw { a, p } => a > 0.0 && a.is_finite() && p > 1.0 && p.is_finite(),
            Potential::Qes { b, n } => b > 0.0 && b.is_finite() && n >= 1,
            Potential::CoshKar { a1, nu } => a1 > 0.0 && a1.is_finite() && nu > 0.0 && nu.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain("Potential", format!("invalid parameters {self:?}")))
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Potential::PowerLaw { .. } => "power",
            Potential::Qes { .. } => "qes",
            Potential::CoshKar { .. } => "coshkar",
        }
    }

    pub fn growth(&self) -> Growth {
        match *self {
            Potential::PowerLaw { p, .. } => Growth::Power(p),
            _ => Growth::Exponential,
        }
    }

    /// An explicit power-law envelope for the exponential families.
    ///
    /// Uses `sinh x ≥ x³/6` and `cosh x ≥ x^{2m}/(2m)!`.
    pub fn growth_bound(&self) -> GrowthBound {
        match *self {
            Potential::PowerLaw { a, p } => GrowthBound {
                exponent: p,
                c: a * a,
                x1: 0.0,
            },
            Potential::Qes { b, .. } => GrowthBound {
                exponent: 3.0,
                c: b * b / 144.0,
                x1: 0.0,
            },
            Potential::CoshKar { a1, nu } => {
                let m = (1.0 / nu).floor() + 1.0;
                let fact: f64 = (1..=(2 * m as u64)).map(|k| k as f64).product();
                GrowthBound {
                    exponent: m * nu,
                    c: a1 / fact.powf(nu),
                    x1: 0.0,
                }
            }
        }
    }

    fn sech2_coefficient(&self) -> f64 {
        match *self {
            Potential::PowerLaw { .. } => 0.0,
            Potential::Qes { n, .. } => (n as f64).powi(2) - 0.25,
            Potential::CoshKar { nu, .. } => 0.5 * nu * (0.5 * nu + 1.0),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::PowerLaw { a, p } => -a * a * x.abs().powf(2.0 * p),
            Potential::Qes { b, .. } => {
                let s = x.sinh();
                let sech = 1.0 / x.cosh();
                -0.25 * b * b * s * s - self.sech2_coefficient() * sech * sech
            }
            Potential::CoshKar { a1, nu } => {
                let sech = 1.0 / x.cosh();
                -a1 * x.cosh().powf(2.0 * nu) - self.sech2_coefficient() * sech * sech
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Potential::PowerLaw { a, p } => -2.0 * p * a * a * x.abs().powf(2.0 * p - 1.0) * x.signum(),
            Potential::Qes { b, .. } => {
                let (s, ch) = (x.sinh(), x.cosh());
                let sech2 = 1.0 / (ch * ch);
                -0.5 * b * b * s * ch + 2.0 * self.sech2_coefficient() * sech2 * x.tanh()
            }
            Potential::CoshKar { a1, nu } => {
                let (s, ch) = (x.sinh(), x.cosh());
                let sech2 = 1.0 / (ch * ch);
                -2.0 * nu * a1 * ch.powf(2.0 * nu - 1.0) * s + 2.0 * self.sech2_coefficient() * sech2 * x.tanh()
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let d = self.sech2_coefficient();
        let sech2 = 1.0 / x.cosh().powi(2);
        let t = x.tanh();
        let sech_part = 2.0 * d * (sech2 * sech2 - 2.0 * sech2 * t * t);
        match *self {
            Potential::PowerLaw { a, p } => -2.0 * p * (2.0 * p - 1.0) * a * a * x.abs().powf(2.0 * p - 2.0),
            Potential::Qes { b, .. } => -0.5 * b * b * (2.0 * x).cosh() + sech_part,
            Potential::CoshKar { a1, nu } => {
                let (s, ch) = (x.sinh(), x.cosh());
                -2.0 * nu * a1 * ((2.0 * nu - 1.0) * ch.powf(2.0 * nu - 2.0) * s * s + ch.powf(2.0 * nu)) + sech_part
            }
        }
    }

    /// Analytic continuation of `V` (principal branches).
    pub fn value_complex(&self, z: Complex64) -> Complex64 {
        let d = self.sech2_coefficient();
        match *self {
            Potential::PowerLaw { a, p } => -a * a * (z * z).powf(p),
            Potential::Qes { b, .. } => {
                let s = z.sinh();
                let ch = z.cosh();
                -0.25 * b * b * s * s - d / (ch * ch)
            }
            Potential::CoshKar { a1, nu } => {
                let ch = z.cosh();
                -a1 * ch.powf(2.0 * nu) - d / (ch * ch)
            }
        }
    }

    pub fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let d = self.sech2_coefficient();
        match *self {
            Potential::PowerLaw { a, p } => -2.0 * p * a * a * (z * z).powf(p) / z,
            Potential::Qes { b, .. } => {
                let (s, ch) = (z.sinh(), z.cosh());
                -0.5 * b * b * s * ch + 2.0 * d * s / (ch * ch * ch)
            }
            Potential::CoshKar { a1, nu } => {
                let (s, ch) = (z.sinh(), z.cosh());
                -2.0 * nu * a1 * ch.powf(2.0 * nu - 1.0) * s + 2.0 * d * s / (ch * ch * ch)
            }
        }
    }

    /// Location `x* ≥ 0` of the global maximum of `V`.
    ///
    /// Writing `u = cosh²x`, both exponential families have a single
    /// stationary point in `u`, so the maximum is either at the origin or at
    /// the positive root of `dV/du = 0`.
    pub fn v_max_location(&self) -> f64 {
        let d = self.sech2_coefficient();
        let u_star = match *self {
            Potential::PowerLaw { .. } => return 0.0,
            Potential::Qes { b, .. } => 2.0 * d.sqrt() / b,
            Potential::CoshKar { a1, nu } => (d / (nu * a1)).powf(1.0 / (nu + 1.0)),
        };
        if u_star > 1.0 {
            u_star.sqrt().acosh()
        } else {
            0.0
        }
    }

    pub fn v_max(&self) -> f64 {
        self.value(self.v_max_location())
    }

    /// Outermost positive root of `V(x) = E`, for `E < V_max`.
    pub fn turning_point(&self, energy: f64) -> Result<f64> {
        if !energy.is_finite() {
            return Err(Error::domain("turning_point", "energy must be finite"));
        }
        let vmax = self.v_max();
        if energy >= vmax {
            return Err(Error::domain(
                "turning_point",
                format!("E = {energy} is not below the barrier top {vmax}"),
            ));
        }
        if let Potential::PowerLaw { a, p } = *self {
            return Ok((-energy / (a * a)).powf(0.5 / p));
        }
        let lo = self.v_max_location();
        let mut hi = lo.max(1.0);
        while self.value(hi) >= energy {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(Error::domain("turning_point", "no turning point found"));
            }
        }
        find_root(|x| self.value(x) - energy, lo, hi, 1e-14)
    }

    /// Largest value of `V` on `[x, ∞)`.
    pub fn sup_beyond(&self, x: f64) -> f64 {
        let x = x.abs();
        let xm = self.v_max_location();
        if x <= xm {
            self.v_max()
        } else {
            self.value(x)
        }
    }

    /// Classical travel time `∫_{x_from}^∞ dx / √(2(E − V))`.
    pub fn flight_time(&self, energy: f64, x_from: f64) -> Result<f64> {
        if !energy.is_finite() || !x_from.is_finite() || x_from < 0.0 {
            return Err(Error::domain("flight_time", "need finite energy and x_from ≥ 0"));
        }
        let sup = self.sup_beyond(x_from);
        if energy <= sup {
            return Err(Error::domain(
                "flight_time",
                format!("turning point inside [{x_from}, ∞): E = {energy} ≤ sup V = {sup}"),
            ));
        }
        let integrand = |x: f64| 1.0 / (2.0 * (energy - self.value(x))).sqrt();
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-12);
        match *self {
            Potential::PowerLaw { a, p } => {
                // Beyond X the integrand is a rapidly convergent binomial series
                // in E/(a² x^{2p}), integrated term by term.
                let x_tail = x_from.max((100.0 * energy.abs() / (a * a)).powf(0.5 / p)).max(1.0);
                let head = integrate(integrand, x_from, x_tail, &spec)?;
                let ratio = energy / (a * a);
                let mut tail = 0.0;
                let mut binom = 1.0;
                for k in 0..60 {
                    let kf = k as f64;
                    if k > 0 {
                        binom *= (-0.5 - (kf - 1.0)) / kf;
                    }
                    let expo = p - 1.0 + 2.0 * p * kf;
                    let term = binom * ratio.powi(k) * x_tail.powf(-expo) / expo;
                    tail += term;
                    if term.abs() < 1e-17 * tail.abs() {
                        break;
                    }
                }
                Ok(head + tail / (std::f64::consts::SQRT_2 * a))
            }
            _ => integrate(
                integrand,
                x_from,
                f64::INFINITY,
                &spec.with_tail(TailSubstitution::Reciprocal),
            ),
        }
    }

    pub fn classical_data(&self, energy: f64, x_from: f64) -> Result<ClassicalData> {
        let x0 = self.turning_point(energy).ok();
        let t_e = self.flight_time(energy, x_from)?;
        Ok(ClassicalData { energy, x0, t_e })
    }

    /// `|Q′| / |Q|^{3/2}` with `Q = V − E`.
    pub fn wkb_badness(&self, energy: f64, x: f64) -> f64 {
        let q = self.value(x) - energy;
        self.derivative(x).abs() / q.abs().powf(1.5)
    }

    /// Smallest `x_max` beyond which `|Q′|/|Q|^{3/2} ≤ eps` and
    /// `|V| ≥ 100 max(|E|, 1)` both hold.
    pub fn wkb_validity_radius(&self, energy: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps <= 0.1) || !energy.is_finite() {
            return Err(Error::domain("wkb_validity_radius", format!("eps must lie in (0, 0.1], got {eps}")));
        }
        let floor = 100.0 * energy.abs().max(1.0);
        let holds = |x: f64| self.value(x).abs() >= floor && self.wkb_badness(energy, x) <= eps;
        // Both criteria are monotone beyond the barrier top and the outermost
        // turning point, so it suffices to bisect the predicate there.
        let mut lo = self.v_max_location();
        if let Ok(x0) = self.turning_point(energy) {
            lo = lo.max(x0);
        }
        let mut hi = lo.max(1.0);
        while !holds(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e8 {
                return Err(Error::domain("wkb_validity_radius", "criteria never satisfied"));
            }
        }
        if holds(lo) {
            return Ok(lo);
        }
        for _ in 0..200 {
            if hi - lo <= 1e-10 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `∫₀ˣ √(−V) dx'`, the phase accumulated by the zero-energy momentum.
    pub fn sqrt_neg_v_integral(&self, x: f64) -> Result<f64> {
        let sign = x.signum();
        let x = x.abs();
        if x == 0.0 {
            return Ok(0.0);
        }
        let v = match *self {
            Potential::PowerLaw { a, p } => a * x.powf(p + 1.0) / (p + 1.0),
            _ => {
                let spec = QuadratureSpec::with_tolerances(1e-13, 1e-13);
                integrate(|t| (-self.value(t)).max(0.0).sqrt(), 0.0, x, &spec)?
            }
        };
        Ok(sign * v)
    }
}
