//! Numerical scattering: transmission and reflection amplitudes from WKB
//! matched boundary conditions, and the real parity-phase offsets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{
    integrate, integrate_system_observed, minimize_scalar, propagate_with, OdeState, PropagatorOptions,
    QuadratureSpec, TailSubstitution,
};
use crate::potentials::Potential;
use crate::wkb::{power_tail, wkb_phase};

/// Tolerances shared by every numerical solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// WKB validity threshold for the truncation radius.
    pub eps: f64,
    pub ode_tol: f64,
    pub unitarity_tol: f64,
    /// Largest disagreement between the two phase read-off points.
    pub readoff_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-3,
            ode_tol: 1e-12,
            unitarity_tol: 1e-6,
            readoff_tol: 1e-2,
        }
    }
}

impl SolverConfig {
    fn ode(&self) -> PropagatorOptions {
        PropagatorOptions {
            tol: self.ode_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub energy: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub x_max: f64,
    pub residual_unitarity: f64,
}

impl ScatteringAmplitudes {
    pub fn reflection_probability(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmission_probability(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// `| |R|² + |T|² − 1 |`
    pub fn flux_residual(&self) -> f64 {
        (self.r.norm_sqr() + self.t.norm_sqr() - 1.0).abs()
    }

    /// `|Re(T̄ R)|`, zero when `T̄R` is purely imaginary.
    pub fn phase_residual(&self) -> f64 {
        (self.t.conj() * self.r).re.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn symbol(&self) -> &'static str {
        match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityPhase {
    pub energy: f64,
    pub parity: Parity,
    /// Asymptotic phase offset, continuous in `E`.
    pub delta: f64,
    /// Disagreement between the two read-off points.
    pub spread: f64,
    pub x_max: f64,
}

/// `(α, θ)` recovered from amplitudes, with the phase-consistency diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaTheta {
    pub alpha: f64,
    pub theta: f64,
    /// Distance of `arg(R e^{−iθ})` from `−π/2`. Near `π` when `R` points
    /// along `+i e^{iθ}`, i.e. the signed angle is negative.
    pub phase_mismatch: f64,
    /// `α` with the sign read from the orientation of `R`, in `[−π/2, π/2]`.
    pub signed_alpha: f64,
}

/// Asymptotic WKB data at fixed energy.
///
/// The local momentum carries the second-order correction
/// `w = κ + [(5/16) V′²/g² + ¼ V″/g] / (2κ)`, `g = E − V`, `κ = √g`, so that
/// `w^{−1/2} e^{±i∫w}` solve the equation to fourth order in the WKB
/// parameter.
pub(crate) struct Asymptotics<'a> {
    pot: &'a Potential,
    energy: f64,
}

impl<'a> Asymptotics<'a> {
    pub(crate) fn new(pot: &'a Potential, energy: f64) -> Self {
        Asymptotics { pot, energy }
    }

    fn correction(&self, x: f64) -> f64 {
        let g = self.energy - self.pot.value(x);
        let v1 = self.pot.derivative(x);
        let v2 = self.pot.second_derivative(x);
        let r = v1 / g;
        (0.3125 * r * r + 0.25 * v2 / g) / (2.0 * g.sqrt())
    }

    pub(crate) fn w(&self, x: f64) -> f64 {
        (self.energy - self.pot.value(x)).sqrt() + self.correction(x)
    }

    pub(crate) fn dw(&self, x: f64) -> f64 {
        let g = self.energy - self.pot.value(x);
        let h = 1e-4 * x.abs().max(1.0) / (1.0 + g.sqrt()).sqrt();
        let dcorr = (self.correction(x + h) - self.correction(x - h)) / (2.0 * h);
        -self.pot.derivative(x) / (2.0 * g.sqrt()) + dcorr
    }

    /// `∫_x^∞ (w − √(−V))`
    fn tail(&self, x: f64) -> Result<f64> {
        let tail = match *self.pot {
            Potential::PowerLaw { p, .. } => power_tail(p),
            _ => TailSubstitution::Reciprocal,
        };
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-12).with_tail(tail);
        let e = self.energy;
        integrate(
            |t: f64| {
                let v = self.pot.value(t);
                if v.is_infinite() {
                    return 0.0;
                }
                let kappa = (e - v).sqrt();
                e / (kappa + (-v).sqrt()) + self.correction(t)
            },
            x,
            f64::INFINITY,
            &spec,
        )
    }

    /// `Σ′(x) = ∫₀ˣ √(−V) − ∫_x^∞ (w − √(−V))` for `x > 0`; the phase of the
    /// outgoing WKB wave measured from the module-wide reference point is
    /// `φ + Σ′(x)`.
    pub(crate) fn reduced_phase(&self, x: f64) -> Result<f64> {
        Ok(self.pot.sqrt_neg_v_integral(x)? - self.tail(x)?)
    }
}

/// Solves the scattering problem for a wave incident from the right.
///
/// A pure transmitted wave is imposed at `−x_max`, propagated to `+x_max`
/// and projected onto the incoming and reflected WKB waves there.
pub fn solve_scattering(pot: &Potential, energy: f64, cfg: &SolverConfig) -> Result<ScatteringAmplitudes> {
    if !energy.is_finite() {
        return Err(Error::domain("solve_scattering", "energy must be finite"));
    }
    let x_max = pot.wkb_validity_radius(energy, cfg.eps)?;
    solve_scattering_at(pot, energy, x_max, cfg)
}

pub fn solve_scattering_at(pot: &Potential, energy: f64, x_max: f64, cfg: &SolverConfig) -> Result<ScatteringAmplitudes> {
    let asym = Asymptotics::new(pot, energy);
    let phi = wkb_phase(pot, energy)?;
    let sigma = phi + asym.reduced_phase(x_max)?;
    let w = asym.w(x_max);
    let dw = asym.dw(x_max);
    let i = Complex64::i();

    // On the left the transmitted wave is w^{-1/2} e^{-iΣ_L}, Σ_L(−X) = −Σ(X);
    // w is even and w′ odd.
    let f_left = Complex64::from_polar(w.powf(-0.5), sigma);
    let df_left = (-i * w + dw / (2.0 * w)) * f_left;
    let start = OdeState::new(-x_max, f_left, df_left)?;
    let q = |x: f64| pot.value(x) - energy;
    let end = propagate_with(q, start, x_max, &cfg.ode())?;

    let f_in = Complex64::from_polar(w.powf(-0.5), -sigma);
    let f_out = Complex64::from_polar(w.powf(-0.5), sigma);
    let df_in = (-i * w - dw / (2.0 * w)) * f_in;
    let df_out = (i * w - dw / (2.0 * w)) * f_out;
    let det = f_in * df_out - f_out * df_in;
    if det.norm() < 1e-8 {
        return Err(Error::Projection {
            op: "solve_scattering",
            det: det.norm(),
        });
    }
    let c_in = (end.psi * df_out - end.dpsi * f_out) / det;
    let c_out = (end.dpsi * f_in - end.psi * df_in) / det;
    if c_in.norm() == 0.0 || !c_in.is_finite() {
        return Err(Error::Projection {
            op: "solve_scattering",
            det: det.norm(),
        });
    }
    let t = 1.0 / c_in;
    let r = c_out / c_in;
    let mut amps = ScatteringAmplitudes {
        energy,
        r,
        t,
        x_max,
        residual_unitarity: 0.0,
    };
    amps.residual_unitarity = amps.flux_residual().max(amps.phase_residual());
    Ok(amps)
}

/// Inverts `T = cos α e^{iθ}`, `R = −i sin α e^{iθ}`.
pub fn extract_alpha_theta(amps: &ScatteringAmplitudes, tolerance: f64) -> Result<AlphaTheta> {
    let residual = amps.flux_residual().max(amps.phase_residual());
    if !(residual <= tolerance) {
        return Err(Error::DataQuality {
            op: "extract_alpha_theta",
            residual,
            tolerance,
        });
    }
    let theta = if amps.t.norm() > 0.0 { amps.t.arg() } else { (amps.r * Complex64::i()).arg() };
    let alpha = amps.t.norm().min(1.0).acos();
    let phase_mismatch = if amps.r.norm() > 0.0 {
        let rel = (amps.r * Complex64::from_polar(1.0, -theta)).arg();
        wrap_pi(rel + PI / 2.0).abs()
    } else {
        0.0
    };
    let signed_alpha = if phase_mismatch > PI / 2.0 { -alpha } else { alpha };
    Ok(AlphaTheta {
        alpha,
        theta,
        phase_mismatch,
        signed_alpha,
    })
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Wraps an angle into `(−π/2, π/2]`.
pub fn wrap_half_pi(x: f64) -> f64 {
    let r = (x + PI / 2.0).rem_euclid(PI) - PI / 2.0;
    if r == -PI / 2.0 {
        PI / 2.0
    } else {
        r
    }
}

/// Real solution of definite parity, advanced outward from the origin.
///
/// Tracks the Prüfer angle of `(ψ, −ψ′/ω)` continuously, with
/// `ω² = |V − E| + |V′|^{2/3}`.
pub(crate) struct ParityRun<'a> {
    pot: &'a Potential,
    energy: f64,
    opts: PropagatorOptions,
    pub(crate) x: f64,
    pub(crate) y: [f64; 2],
    pub(crate) angle: f64,
}

impl<'a> ParityRun<'a> {
    pub(crate) fn new(pot: &'a Potential, energy: f64, parity: Parity, cfg: &SolverConfig) -> Self {
        let (y, angle) = match parity {
            Parity::Even => ([1.0, 0.0], 0.0),
            Parity::Odd => ([0.0, 1.0], -PI / 2.0),
        };
        ParityRun {
            pot,
            energy,
            opts: cfg.ode(),
            x: 0.0,
            y,
            angle,
        }
    }

    fn omega(&self, t: f64) -> f64 {
        ((self.pot.value(t) - self.energy).abs() + self.pot.derivative(t).abs().powf(2.0 / 3.0))
            .sqrt()
            .max(1e-3)
    }

    pub(crate) fn advance(&mut self, to: f64) -> Result<()> {
        let (pot, energy) = (self.pot, self.energy);
        let angle_of = |t: f64, y: &[f64; 2]| (-y[1] / self.omega(t)).atan2(y[0]);
        let rhs = |t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = (pot.value(t) - energy) * y[0];
        };
        let cap = |t: f64| self.opts.period_fraction * 2.0 * PI / self.omega(t);
        let mut angle = self.angle;
        let mut last = angle_of(self.x, &self.y);
        let y = integrate_system_observed(rhs, cap, self.x, self.y, to, &self.opts, |t, y| {
            let a = angle_of(t, y);
            angle += wrap_pi(a - last);
            last = a;
        })?;
        self.angle = angle;
        self.x = to;
        self.y = y;
        Ok(())
    }
}

fn readoff(
    asym: &Asymptotics,
    x: f64,
    psi: f64,
    dpsi: f64,
    prufer: f64,
    parity: Parity,
) -> Result<f64> {
    let w = asym.w(x);
    let dw = asym.dw(x);
    let s = dpsi + dw / (2.0 * w) * psi;
    let chi = (-s / w.sqrt()).atan2(w.sqrt() * psi);
    // Lift onto the branch of the continuously tracked angle.
    let lifted = chi + 2.0 * PI * ((prufer - chi) / (2.0 * PI)).round();
    let offset = match parity {
        Parity::Even => 0.0,
        Parity::Odd => PI / 2.0,
    };
    Ok(lifted + offset - asym.reduced_phase(x)?)
}

/// Asymptotic phase offset `δ` of the real parity solution.
///
/// `δ ≡ φ + (θ ∓ α)/2 (mod π)` for even/odd parity. The value is read off
/// at `x_max` and again a quarter oscillation further out; the two must
/// agree within `cfg.readoff_tol`.
pub fn parity_phase_numeric(pot: &Potential, energy: f64, parity: Parity, cfg: &SolverConfig) -> Result<ParityPhase> {
    let x_max = pot.wkb_validity_radius(energy, cfg.eps)?;
    parity_phase_at(pot, energy, parity, x_max, cfg)
}

pub fn parity_phase_at(
    pot: &Potential,
    energy: f64,
    parity: Parity,
    x_max: f64,
    cfg: &SolverConfig,
) -> Result<ParityPhase> {
    if !energy.is_finite() {
        return Err(Error::domain("parity_phase_numeric", "energy must be finite"));
    }
    let asym = Asymptotics::new(pot, energy);
    let x2 = x_max + 0.5 * PI / asym.w(x_max);
    let mut run = ParityRun::new(pot, energy, parity, cfg);
    run.advance(x_max)?;
    let d1 = readoff(&asym, x_max, run.y[0], run.y[1], run.angle, parity)?;
    run.advance(x2)?;
    let d2 = readoff(&asym, x2, run.y[0], run.y[1], run.angle, parity)?;
    let spread = (d1 - d2).abs();
    if !(spread <= cfg.readoff_tol) {
        return Err(Error::AsymptoticsNotReached {
            op: "parity_phase_numeric",
            x: x_max,
            spread,
        });
    }
    Ok(ParityPhase {
        energy,
        parity,
        delta: 0.5 * (d1 + d2),
        spread,
        x_max,
    })
}

/// Local WKB amplitude `A` of a real solution `A w^{−1/2} cos(·)` at `x`.
pub fn wkb_amplitude(pot: &Potential, energy: f64, x: f64, psi: f64, dpsi: f64) -> f64 {
    let asym = Asymptotics::new(pot, energy);
    let w = asym.w(x);
    let s = dpsi + asym.dw(x) / (2.0 * w) * psi;
    (w * psi * psi + s * s / w).sqrt()
}

/// `(ψ, ψ′)` of the parity solution normalised at the origin, at any `x`.
pub fn parity_state_at(pot: &Potential, energy: f64, parity: Parity, x: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let mut run = ParityRun::new(pot, energy, parity, cfg);
    run.advance(x.abs())?;
    let [psi, dpsi] = run.y;
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    Ok(match parity {
        Parity::Even => (psi, sign * dpsi),
        Parity::Odd => (sign * psi, dpsi),
    })
}

/// Phase-derived `(α, θ)`: `α ≡ δ₋ − δ₊` and `θ ≡ δ₊ + δ₋ − 2φ`, both mod π.
pub fn alpha_theta_from_parity(pot: &Potential, energy: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let even = parity_phase_numeric(pot, energy, Parity::Even, cfg)?;
    let odd = parity_phase_numeric(pot, energy, Parity::Odd, cfg)?;
    let phi = wkb_phase(pot, energy)?;
    let mut alpha = (odd.delta - even.delta).rem_euclid(PI);
    if alpha > PI / 2.0 {
        alpha = PI - alpha;
    }
    let theta = wrap_half_pi(even.delta + odd.delta - 2.0 * phi);
    Ok((alpha, theta))
}

/// Energy of minimal reflection `|R|²` in `[lo, hi]`.
pub fn locate_tt_energy(pot: &Potential, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let mut failure = None;
    let found = minimize_scalar(
        |e| match solve_scattering(pot, e, cfg) {
            Ok(a) => a.reflection_probability(),
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-9,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    found
}
