//! Quantization of the parity sectors and assembly of spectra.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::find_root;
use crate::potentials::Potential;
use crate::scattering::{locate_tt_energy, parity_phase_numeric, Asymptotics, Parity, ParityRun, SolverConfig};
use crate::wkb::phase_triple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Independent even and odd references.
    #[serde(rename = "two")]
    TwoParameter,
    /// Odd sector fixed by the even reference through a vanishing cross Wronskian.
    #[serde(rename = "one")]
    OneParameter,
    /// Both sectors referenced at a total-transmission energy.
    #[serde(rename = "tt")]
    TtReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseSource {
    #[serde(rename = "numeric")]
    Numeric,
    #[serde(rename = "wkb")]
    WkbEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub potential: Potential,
    pub e_ref_plus: f64,
    pub e_ref_minus: f64,
    pub n_min: i32,
    pub n_max: i32,
    pub scheme: Scheme,
    pub phase_source: PhaseSource,
    /// Relative, with floor 1 in energy units.
    pub degeneracy_tol: f64,
    pub solver: SolverConfig,
}

impl SpectrumSpec {
    pub fn new(potential: Potential, scheme: Scheme, e_ref_plus: f64, e_ref_minus: f64) -> Self {
        SpectrumSpec {
            potential,
            e_ref_plus,
            e_ref_minus,
            n_min: 0,
            n_max: 5,
            scheme,
            phase_source: PhaseSource::Numeric,
            degeneracy_tol: 1e-4,
            solver: SolverConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return Err(Error::domain("build_spectrum", "n_min must not exceed n_max"));
        }
        if !(self.degeneracy_tol > 0.0) {
            return Err(Error::domain("build_spectrum", "degeneracy tolerance must be positive"));
        }
        if !self.e_ref_plus.is_finite() || (self.scheme == Scheme::TwoParameter && !self.e_ref_minus.is_finite()) {
            return Err(Error::domain("build_spectrum", "reference energies must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub energy: f64,
    pub parity: Parity,
    pub n: i32,
    /// Index of the degenerate partner in `SpectrumResult::levels`.
    pub degenerate_with: Option<usize>,
    /// More than one root was found for this `n`.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub scheme: Scheme,
    pub e_ref_plus: f64,
    pub e_ref_minus: f64,
    /// Sorted by energy, then parity.
    pub levels: Vec<EnergyLevel>,
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// `Φ±(E) = φ + (θ ∓ α)/2`, continuous in `E`.
pub fn sector_phase(pot: &Potential, energy: f64, parity: Parity, source: PhaseSource, cfg: &SolverConfig) -> Result<f64> {
    match source {
        PhaseSource::Numeric => Ok(parity_phase_numeric(pot, energy, parity, cfg)?.delta),
        PhaseSource::WkbEstimate => {
            let t = phase_triple(pot, energy)?;
            Ok(match parity {
                Parity::Even => t.phi + 0.5 * (t.theta - t.alpha),
                Parity::Odd => t.phi + 0.5 * (t.theta + t.alpha),
            })
        }
    }
}

/// Levels `E_n` of one sector with `Φ(E_n) = Φ(E_ref) + nπ`.
pub fn quantize_sector(
    pot: &Potential,
    e_ref: f64,
    parity: Parity,
    n_min: i32,
    n_max: i32,
    source: PhaseSource,
    cfg: &SolverConfig,
) -> Result<Vec<EnergyLevel>> {
    if !e_ref.is_finite() || n_min > n_max {
        return Err(Error::domain("quantize_sector", "need finite reference and n_min ≤ n_max"));
    }
    let phase = |e: f64| sector_phase(pot, e, parity, source, cfg);
    let phi0 = phase(e_ref)?;
    quantize_targets(&phase, e_ref, phi0, n_min, n_max, parity)
}

/// Roots of `Φ(E) = phi0 + nπ`, scanning outward from `e_start`.
fn quantize_targets(
    phase: &dyn Fn(f64) -> Result<f64>,
    e_start: f64,
    phi0: f64,
    n_min: i32,
    n_max: i32,
    parity: Parity,
) -> Result<Vec<EnergyLevel>> {
    let target = |n: i32| phi0 + n as f64 * PI;
    let start = phase(e_start)?;
    let mut roots: Vec<(i32, f64)> = Vec::new();
    for n in n_min..=n_max {
        if (start - target(n)).abs() < 1e-12 * start.abs().max(1.0) {
            roots.push((n, e_start));
        }
    }
    let above: Vec<i32> = (n_min..=n_max).filter(|&n| target(n) > start && !roots.iter().any(|r| r.0 == n)).collect();
    let below: Vec<i32> = (n_min..=n_max).filter(|&n| target(n) < start && !roots.iter().any(|r| r.0 == n)).collect();
    if !above.is_empty() {
        scan(phase, e_start, start, 1.0, &above, &target, &mut roots)?;
    }
    if !below.is_empty() {
        scan(phase, e_start, start, -1.0, &below, &target, &mut roots)?;
    }
    let mut levels: Vec<EnergyLevel> = roots
        .iter()
        .map(|&(n, energy)| EnergyLevel {
            energy,
            parity,
            n,
            degenerate_with: None,
            ambiguous: roots.iter().filter(|r| r.0 == n).count() > 1,
        })
        .collect();
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(levels)
}

/// Grid continuation in one direction until every target is passed.
///
/// Steps aim at a phase change of about 0.3 rad and are halved whenever the
/// phase jumps by more than π/2.
fn scan(
    phase: &dyn Fn(f64) -> Result<f64>,
    e_start: f64,
    phi_start: f64,
    dir: f64,
    ns: &[i32],
    target: &dyn Fn(i32) -> f64,
    roots: &mut Vec<(i32, f64)>,
) -> Result<()> {
    let extreme = if dir > 0.0 {
        ns.iter().map(|&n| target(n)).fold(f64::NEG_INFINITY, f64::max)
    } else {
        ns.iter().map(|&n| target(n)).fold(f64::INFINITY, f64::min)
    };
    let probe = 1e-3 * e_start.abs().max(1.0);
    let slope = ((phase(e_start + dir * probe)? - phi_start) / probe).abs().max(1e-3);
    let mut h = (0.3 / slope).min(10.0 * e_start.abs().max(1.0));
    let (mut e, mut f) = (e_start, phi_start);
    let mut trace = Vec::new();
    for _ in 0..5_000 {
        let e_next = e + dir * h;
        let f_next = phase(e_next)?;
        let min_h = 1e-10 * e.abs().max(1.0);
        if (f_next - f).abs() > PI / 2.0 && h > min_h {
            h *= 0.5;
            continue;
        }
        for &n in ns {
            let t = target(n);
            if (f - t >= 0.0) != (f_next - t >= 0.0) {
                let (lo, hi) = if dir > 0.0 { (e, e_next) } else { (e_next, e) };
                if let Some(root) = refine(phase, t, lo, hi)? {
                    roots.push((n, root));
                }
            }
        }
        let step = (f_next - f).abs();
        trace.push((e_next, f_next));
        e = e_next;
        f = f_next;
        // Past every target with room for a local dip from oscillating α.
        if dir * (f - extreme) > PI / 2.0 {
            return Ok(());
        }
        if step < 0.1 {
            h *= 1.5;
        }
    }
    Err(Error::LimitNotConverged {
        op: "quantize_sector",
        trace,
    })
}

/// Brent refinement; a bracket across a jump of Φ rather than a root yields `None`.
fn refine(phase: &dyn Fn(f64) -> Result<f64>, t: f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    let mut failure = None;
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    let root = find_root(
        |e| match phase(e) {
            Ok(v) => v - t,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let root = root?;
    let resid = (phase(root)? - t).abs();
    Ok((resid < 1e-6).then_some(root))
}

/// Total-transmission energy near `seed`: the `|R|²` minimum for numeric
/// phases, the seed itself for WKB phases.
pub fn tt_reference_energy(pot: &Potential, seed: f64, source: PhaseSource, cfg: &SolverConfig) -> Result<f64> {
    match source {
        PhaseSource::WkbEstimate => Ok(seed),
        PhaseSource::Numeric => {
            let half = 0.25 * seed.abs().max(1.0);
            let (e, _) = locate_tt_energy(pot, seed - half, seed + half, cfg)?;
            Ok(e)
        }
    }
}

pub fn build_spectrum(spec: &SpectrumSpec) -> Result<SpectrumResult> {
    spec.validate()?;
    let pot = &spec.potential;
    let cfg = &spec.solver;
    let src = spec.phase_source;
    let (n_min, n_max) = (spec.n_min, spec.n_max);
    let (e_plus, e_minus, (even, odd)) = match spec.scheme {
        Scheme::TwoParameter => {
            let sectors = rayon::join(
                || quantize_sector(pot, spec.e_ref_plus, Parity::Even, n_min, n_max, src, cfg),
                || quantize_sector(pot, spec.e_ref_minus, Parity::Odd, n_min, n_max, src, cfg),
            );
            (spec.e_ref_plus, spec.e_ref_minus, sectors)
        }
        Scheme::TtReference => {
            let e_ref = tt_reference_energy(pot, spec.e_ref_plus, src, cfg)?;
            let sectors = rayon::join(
                || quantize_sector(pot, e_ref, Parity::Even, n_min, n_max, src, cfg),
                || quantize_sector(pot, e_ref, Parity::Odd, n_min, n_max, src, cfg),
            );
            (e_ref, e_ref, sectors)
        }
        Scheme::OneParameter => {
            let e_ref = spec.e_ref_plus;
            let phi_plus = sector_phase(pot, e_ref, Parity::Even, src, cfg)?;
            let odd_phase = |e: f64| sector_phase(pot, e, Parity::Odd, src, cfg);
            let sectors = rayon::join(
                || quantize_sector(pot, e_ref, Parity::Even, n_min, n_max, src, cfg),
                || quantize_targets(&odd_phase, e_ref, phi_plus + 0.5 * PI, n_min, n_max, Parity::Odd),
            );
            (e_ref, f64::NAN, sectors)
        }
    };
    let mut levels = even?;
    levels.extend(odd?);
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then((a.parity == Parity::Odd).cmp(&(b.parity == Parity::Odd)))
    });
    let degenerate_pairs = link_degenerate(&mut levels, spec.degeneracy_tol);
    Ok(SpectrumResult {
        scheme: spec.scheme,
        e_ref_plus: e_plus,
        e_ref_minus: e_minus,
        levels,
        degenerate_pairs,
    })
}

/// Pairs each even level with the nearest odd level within tolerance.
fn link_degenerate(levels: &mut [EnergyLevel], tol: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..levels.len() {
        if levels[i].parity != Parity::Even {
            continue;
        }
        let e = levels[i].energy;
        let best = (0..levels.len())
            .filter(|&j| levels[j].parity == Parity::Odd && levels[j].degenerate_with.is_none())
            .min_by(|&a, &b| (levels[a].energy - e).abs().total_cmp(&(levels[b].energy - e).abs()));
        if let Some(j) = best {
            if (levels[j].energy - e).abs() <= tol * e.abs().max(1.0) {
                levels[i].degenerate_with = Some(j);
                levels[j].degenerate_with = Some(i);
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// `1/(2cos²(π/2p))`; the total-transmission spectrum is degenerate iff this is 1.
pub fn tt_degeneracy_factor(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain("tt_degeneracy_factor", "p must exceed 1"));
    }
    // 2cos²(π/2p) = 1 + cos(π/p), exact at p = 2.
    Ok(1.0 / (1.0 + (PI / p).cos()))
}

/// Wronskian of two numerically propagated parity solutions at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelWronskian {
    pub x: f64,
    /// `ψ₁′ψ₂ − ψ₁ψ₂′` for solutions normalised at the origin.
    pub raw: f64,
    /// `raw / (A₁A₂)` with the local WKB amplitudes at `x`.
    pub normalized: f64,
    /// Normalized value with the finite-`x` phase drift between the two
    /// energies removed: the `x → ∞` limit of `W/(A₁A₂)`.
    pub limit: f64,
}

/// Wronskian of two levels at `x` (negative `x` uses the parity images).
pub fn level_wronskian(pot: &Potential, a: &EnergyLevel, b: &EnergyLevel, x: f64, cfg: &SolverConfig) -> Result<LevelWronskian> {
    let sample = |lvl: &EnergyLevel| -> Result<(f64, f64, f64, f64)> {
        let mut run = ParityRun::new(pot, lvl.energy, lvl.parity, cfg);
        run.advance(x.abs())?;
        let [mut psi, mut dpsi] = run.y;
        let asym = Asymptotics::new(pot, lvl.energy);
        let w = asym.w(x.abs());
        let s = dpsi + asym.dw(x.abs()) / (2.0 * w) * psi;
        let amp = (w * psi * psi + s * s / w).sqrt();
        let chi = (-s / w.sqrt()).atan2(w.sqrt() * psi);
        let drift = asym.reduced_phase(x.abs())?;
        if x < 0.0 {
            match lvl.parity {
                Parity::Even => dpsi = -dpsi,
                Parity::Odd => psi = -psi,
            }
        }
        Ok((psi, dpsi, amp, chi - drift))
    };
    let (p1, d1, a1, s1) = sample(a)?;
    let (p2, d2, a2, s2) = sample(b)?;
    let raw = d1 * p2 - p1 * d2;
    let sign = if x < 0.0 && a.parity == b.parity { -1.0 } else { 1.0 };
    Ok(LevelWronskian {
        x,
        raw,
        normalized: raw / (a1 * a2),
        limit: sign * (s2 - s1).sin(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wkb::{total_transmission_energies, wkb_phase_closed_form};

    fn power() -> Potential {
        Potential::power_law(1.0, 2.0).unwrap()
    }

    #[test]
    fn degeneracy_factor() {
        assert_eq!(tt_degeneracy_factor(2.0).unwrap(), 1.0);
        assert!((tt_degeneracy_factor(1.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((tt_degeneracy_factor(1e9).unwrap() - 0.5).abs() < 1e-12);
        assert!(tt_degeneracy_factor(1.0).is_err());
    }

    #[test]
    fn closed_form_phase_spacing() {
        let es = total_transmission_energies(1.0, 2.0, 4).unwrap();
        let phi0 = wkb_phase_closed_form(1.0, 2.0, es[0]).unwrap();
        for (n, e) in es.iter().enumerate() {
            let phi = wkb_phase_closed_form(1.0, 2.0, *e).unwrap();
            assert!((phi - phi0 - n as f64 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn reference_level_is_returned() {
        let cfg = SolverConfig::default();
        let lv = quantize_sector(&power(), 0.7, Parity::Even, 0, 0, PhaseSource::Numeric, &cfg).unwrap();
        assert_eq!(lv.len(), 1);
        assert_eq!(lv[0].energy, 0.7);
    }

    #[test]
    fn first_excitation_from_transmission_reference() {
        let cfg = SolverConfig::default();
        let lv = quantize_sector(&power(), 1.47714975, Parity::Even, 1, 1, PhaseSource::Numeric, &cfg).unwrap();
        assert_eq!(lv.len(), 1);
        assert!((lv[0].energy - 6.00338618).abs() < 1e-6, "{}", lv[0].energy);
    }

    #[test]
    fn levels_spaced_by_pi() {
        let cfg = SolverConfig::default();
        let lv = quantize_sector(&power(), -6.0, Parity::Odd, -2, 2, PhaseSource::Numeric, &cfg).unwrap();
        assert_eq!(lv.len(), 5);
        let phases: Vec<f64> = lv
            .iter()
            .map(|l| sector_phase(&power(), l.energy, Parity::Odd, PhaseSource::Numeric, &cfg).unwrap())
            .collect();
        for w in phases.windows(2) {
            assert!((w[1] - w[0] - PI).abs() < 1e-6);
        }
        for w in lv.windows(2) {
            assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn one_parameter_interleaves() {
        let mut spec = SpectrumSpec::new(power(), Scheme::OneParameter, -2.0, f64::NAN);
        spec.n_min = -2;
        spec.n_max = 3;
        let res = build_spectrum(&spec).unwrap();
        assert_eq!(res.levels.len(), 12);
        for w in res.levels.windows(2) {
            assert_ne!(w[0].parity, w[1].parity);
            assert!(w[1].energy > w[0].energy);
        }
    }

    #[test]
    fn wkb_estimate_transmission_spectrum() {
        let e0 = total_transmission_energies(1.0, 2.0, 1).unwrap()[0];
        let mut spec = SpectrumSpec::new(power(), Scheme::TtReference, e0, e0);
        spec.phase_source = PhaseSource::WkbEstimate;
        spec.n_max = 2;
        let res = build_spectrum(&spec).unwrap();
        assert_eq!(res.levels.len(), 6);
        assert!(res.levels.iter().all(|l| !l.ambiguous));
    }

    #[test]
    fn same_parity_wronskian_vanishes() {
        let cfg = SolverConfig::default();
        let lv = quantize_sector(&power(), 0.4, Parity::Even, 0, 2, PhaseSource::Numeric, &cfg).unwrap();
        let x = power().wkb_validity_radius(0.4, cfg.eps).unwrap();
        for i in 1..lv.len() {
            let w = level_wronskian(&power(), &lv[0], &lv[i], x, &cfg).unwrap();
            assert!(w.limit.abs() < 1e-3, "{w:?}");
        }
    }

    #[test]
    fn normalized_wronskian_tracks_phase_difference() {
        // Same energy, opposite parity: W/(A₁A₂) = sin(Δδ) with no drift.
        let cfg = SolverConfig::default();
        let e = 2.0;
        let a = EnergyLevel { energy: e, parity: Parity::Even, n: 0, degenerate_with: None, ambiguous: false };
        let b = EnergyLevel { parity: Parity::Odd, ..a };
        let x = power().wkb_validity_radius(e, cfg.eps).unwrap();
        let w = level_wronskian(&power(), &a, &b, x, &cfg).unwrap();
        assert!((w.normalized - w.limit).abs() < 1e-4, "{w:?}");
        // Exact Wronskian of (1,0) and (0,1) data is −1.
        assert!((w.raw + 1.0).abs() < 1e-8, "{w:?}");
        let mirrored = level_wronskian(&power(), &a, &b, -x, &cfg).unwrap();
        assert!((mirrored.raw - w.raw).abs() < 1e-12);
        assert!((mirrored.limit - w.limit).abs() < 1e-12);
    }
}
