//! Dormand–Prince 8(5,3) integration of `ψ″ = Q(x) ψ`.
//!
//! The stepper is a plain explicit Runge–Kutta pair with Hairer's combined
//! fifth/third order error estimate. On top of error control, each step is
//! capped at a fixed fraction of the local oscillation length `2π/√(−Q)`, so
//! fast oscillations far out in the tails are never stepped over.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point on a solution curve: position, value and derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub x: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl OdeState {
    pub fn new(x: f64, psi: Complex64, dpsi: Complex64) -> Result<Self> {
        let s = OdeState { x, psi, dpsi };
        if !s.is_finite() {
            return Err(Error::NonFinite { op: "OdeState::new", x });
        }
        Ok(s)
    }

    pub fn real(x: f64, psi: f64, dpsi: f64) -> Result<Self> {
        Self::new(x, Complex64::new(psi, 0.0), Complex64::new(dpsi, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.psi.is_finite() && self.dpsi.is_finite()
    }

    /// `ψ₁′ψ₂ − ψ₁ψ₂′`
    pub fn wronskian(&self, other: &OdeState) -> Complex64 {
        self.dpsi * other.psi - self.psi * other.dpsi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    pub tol: f64,
    /// Largest step as a fraction of the local period `2π/√(−Q)`.
    pub period_fraction: f64,
    pub max_steps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            tol: 1e-12,
            period_fraction: 0.1,
            max_steps: 5_000_000,
        }
    }
}

/// Integrates `ψ″ = Q(x) ψ` from `from` to `to_x` with default step caps.
pub fn propagate_schrodinger<Q: Fn(f64) -> f64>(q: Q, from: OdeState, to_x: f64, tol: f64) -> Result<OdeState> {
    let opts = PropagatorOptions {
        tol,
        ..Default::default()
    };
    propagate_with(q, from, to_x, &opts)
}

pub fn propagate_with<Q: Fn(f64) -> f64>(
    q: Q,
    from: OdeState,
    to_x: f64,
    opts: &PropagatorOptions,
) -> Result<OdeState> {
    let y0 = [from.psi.re, from.psi.im, from.dpsi.re, from.dpsi.im];
    let rhs = |x: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        let qx = q(x);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = qx * y[0];
        dy[3] = qx * y[1];
    };
    let cap = |x: f64| {
        let qx = q(x);
        if qx < 0.0 {
            opts.period_fraction * 2.0 * PI / (-qx).sqrt()
        } else {
            f64::INFINITY
        }
    };
    let y = integrate_system(rhs, cap, from.x, y0, to_x, opts)?;
    Ok(OdeState {
        x: to_x,
        psi: Complex64::new(y[0], y[1]),
        dpsi: Complex64::new(y[2], y[3]),
    })
}

/// Propagates a real solution, avoiding the cost of the imaginary part.
pub fn propagate_real<Q: Fn(f64) -> f64>(
    q: Q,
    x0: f64,
    psi: f64,
    dpsi: f64,
    to_x: f64,
    opts: &PropagatorOptions,
) -> Result<(f64, f64)> {
    let rhs = |x: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
        dy[0] = y[1];
        dy[1] = q(x) * y[0];
    };
    let cap = |x: f64| {
        let qx = q(x);
        if qx < 0.0 {
            opts.period_fraction * 2.0 * PI / (-qx).sqrt()
        } else {
            f64::INFINITY
        }
    };
    let y = integrate_system(rhs, cap, x0, [psi, dpsi], to_x, opts)?;
    Ok((y[0], y[1]))
}

/// Generic DOP853 driver for a fixed-size real system.
///
/// `cap(x)` bounds the step length at `x`.
pub fn integrate_system<const N: usize, F, H>(
    f: F,
    cap: H,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &PropagatorOptions,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
    H: Fn(f64) -> f64,
{
    integrate_system_observed(f, cap, x0, y0, x_end, opts, |_, _| {})
}

/// As [`integrate_system`], calling `observe(x, y)` after every accepted step.
pub fn integrate_system_observed<const N: usize, F, H, O>(
    f: F,
    cap: H,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &PropagatorOptions,
    mut observe: O,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
    H: Fn(f64) -> f64,
    O: FnMut(f64, &[f64; N]),
{
    if !(opts.tol > 0.0) || !(opts.period_fraction > 0.0) {
        return Err(Error::domain("propagate_schrodinger", "tolerance and step fraction must be positive"));
    }
    if !x0.is_finite() || !x_end.is_finite() || y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("propagate_schrodinger", "start point and target must be finite"));
    }
    let span = x_end - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let atol = opts.tol;
    let rtol = opts.tol;

    let mut x = x0;
    let mut y = y0;
    let mut k: [[f64; N]; 12] = [[0.0; N]; 12];
    f(x, &y, &mut k[0]);

    let mut h = cap(x).min(span.abs()).min(0.1 * (1.0 + x.abs()));
    h = h.max(1e-6 * span.abs().min(1.0)) * dir;
    let mut rejected_last = false;
    let mut steps = 0usize;
    // Kahan compensation for the running state and abscissa.
    let mut comp = [0.0; N];
    let mut x_comp = 0.0;

    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Stiffness {
                op: "propagate_schrodinger",
                x,
            });
        }
        let limit = cap(x);
        if h.abs() > limit {
            h = limit * dir;
        }
        let last = (x + 1.01 * h - x_end) * dir >= 0.0;
        if last {
            h = x_end - x;
        }
        if h.abs() <= 1e-14 * x.abs().max(1.0) {
            return Err(Error::Stiffness {
                op: "propagate_schrodinger",
                x,
            });
        }

        let mut stage = [0.0; N];
        for s in 1..12 {
            let row = A[s - 1];
            for i in 0..N {
                let mut acc = y[i];
                for (j, coeff) in row.iter().enumerate().take(s) {
                    if *coeff != 0.0 {
                        acc += h * coeff * k[j][i];
                    }
                }
                stage[i] = acc;
            }
            f(x + C[s] * h, &stage, &mut k[s]);
        }

        let mut y_new = [0.0; N];
        let mut comp_new = [0.0; N];
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..N {
            let mut incr = 0.0;
            let mut e5 = 0.0;
            for j in 0..12 {
                incr += B[j] * k[j][i];
                e5 += E[j] * k[j][i];
            }
            let dy = h * incr - comp[i];
            y_new[i] = y[i] + dy;
            comp_new[i] = (y_new[i] - y[i]) - dy;
            let e3 = incr - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            err += (e5 / sc).powi(2);
            err2 += (e3 / sc).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        // Error per unit step: the local estimate is divided by |h| for h < 1.
        let err_norm = h.abs() / h.abs().min(1.0) * err * (1.0 / (deno * N as f64)).sqrt();
        if !err_norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // Treat overflow inside a trial step as a rejection.
            if rejected_last && h.abs() < 1e-10 {
                return Err(Error::NonFinite {
                    op: "propagate_schrodinger",
                    x,
                });
            }
            h *= 0.25;
            rejected_last = true;
            continue;
        }

        let fac11 = err_norm.powf(1.0 / 8.0);
        let fac = (fac11 / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        if err_norm <= 1.0 {
            let dx = h - x_comp;
            let x_new = if last { x_end } else { x + dx };
            x_comp = (x_new - x) - dx;
            x = x_new;
            y = y_new;
            comp = comp_new;
            observe(x, &y);
            if last {
                return Ok(y);
            }
            f(x, &y, &mut k[0]);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.abs().min(h.abs()) * dir;
            }
            rejected_last = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
        }
    }
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

// Nodes c_1..c_12; the twelfth stage sits at x + h.
const C: [f64; 12] = [
    0.0,
    0.526_001_519_587_677_318_785_587_544_488E-01,
    0.789_002_279_381_515_978_178_381_316_732E-01,
    0.118_350_341_907_227_396_726_757_197_510E+00,
    0.281_649_658_092_772_603_273_242_802_490E+00,
    0.333_333_333_333_333_333_333_333_333_333E+00,
    0.25E+00,
    0.307_692_307_692_307_692_307_692_307_692E+00,
    0.651_282_051_282_051_282_051_282_051_282E+00,
    0.6E+00,
    0.857_142_857_142_857_142_857_142_857_142E+00,
    1.0,
];

// Row s holds a_{s+2, 1..s+1}, zero padded.
const A: [[f64; 11]; 11] = [
    [5.260_015_195_876_773_187_855_875_444_88E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.972_505_698_453_789_945_445_953_291_83E-2,
        5.917_517_095_361_369_836_337_859_875_49E-2,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        2.958_758_547_680_684_918_168_929_937_75E-2,
        0.0,
        8.876_275_643_042_054_754_506_789_813_24E-2,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        2.413_651_341_592_666_855_023_697_986_65E-1,
        0.0,
        -8.845_494_793_282_860_853_448_649_627_17E-1,
        9.248_340_032_617_920_031_157_379_665_43E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.703_703_703_703_703_703_703_703_703_7E-2,
        0.0,
        0.0,
        1.708_286_087_294_738_712_796_044_821_73E-1,
        1.254_676_875_668_224_250_166_918_141_23E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.710_937_5E-2,
        0.0,
        0.0,
        1.702_522_110_195_440_393_149_780_602_72E-1,
        6.021_653_898_045_596_068_502_193_972_83E-2,
        -1.757_812_5E-2,
        0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.709_200_011_850_479_271_087_793_198_36E-2,
        0.0,
        0.0,
        1.703_839_257_122_399_938_102_140_547_05E-1,
        1.072_620_304_463_732_846_518_091_991_68E-1,
        -1.531_943_774_862_440_175_279_361_582_36E-2,
        8.273_789_163_814_022_887_584_737_660_02E-3,
        0.0, 0.0, 0.0, 0.0,
    ],
    [
        6.241_109_587_160_757_171_144_295_778_12E-1,
        0.0,
        0.0,
        -3.360_892_629_446_941_294_068_571_098_25E0,
        -8.682_193_468_417_260_068_181_898_914_53E-1,
        2.759_209_969_944_670_830_494_156_007_97E1,
        2.015_406_755_047_789_340_861_867_889_79E1,
        -4.348_988_418_106_995_884_773_662_551_44E1,
        0.0, 0.0, 0.0,
    ],
    [
        4.776_625_364_382_643_658_904_339_085_27E-1,
        0.0,
        0.0,
        -2.488_114_619_971_667_641_926_425_864_68E0,
        -5.902_908_268_368_429_963_714_464_757_43E-1,
        2.123_005_144_818_119_423_472_889_498_97E1,
        1.527_923_363_288_242_358_325_969_229_38E1,
        -3.328_821_096_898_486_291_944_532_655_87E1,
        -2.033_120_170_850_862_613_582_229_285_93E-2,
        0.0, 0.0,
    ],
    [
        -9.371_424_300_859_873_257_170_402_165_8E-1,
        0.0,
        0.0,
        5.186_372_428_844_063_708_300_238_532_09E0,
        1.091_437_348_996_729_578_185_002_546_54E0,
        -8.149_787_010_746_926_125_139_972_673_57E0,
        -1.852_006_565_999_695_986_415_661_807_01E1,
        2.273_948_709_935_050_428_189_700_567_34E1,
        2.493_605_552_679_652_389_870_893_967_62E0,
        -3.046_764_471_898_219_500_382_366_902_2E0,
        0.0,
    ],
    [
        2.273_310_147_516_538_207_923_597_684_49E0,
        0.0,
        0.0,
        -1.053_449_546_673_725_019_840_666_898_79E1,
        -2.000_872_058_224_862_499_096_757_184_44E0,
        -1.795_893_186_311_879_891_727_659_505_34E1,
        2.794_888_452_941_996_005_084_998_088_37E1,
        -2.858_998_277_135_023_694_740_655_086_74E0,
        -8.872_856_933_530_629_544_335_492_892_58E0,
        1.236_056_717_579_430_306_472_662_015_28E1,
        6.433_927_460_157_635_303_559_704_840_46E-1,
    ],
];

const B: [f64; 12] = [
    5.429_373_411_656_876_223_805_357_663_63E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_408_881_441_139_505_66E0,
    1.891_517_899_314_500_383_042_815_990_44E0,
    -5.801_203_960_010_584_781_467_211_422_7E0,
    3.111_643_669_578_198_944_089_160_623_7E-1,
    -1.521_609_496_625_160_785_561_788_068_05E-1,
    2.013_654_008_040_303_483_747_765_375_01E-1,
    4.471_061_572_777_259_051_768_855_690_43E-2,
];

const BHH: [f64; 3] = [
    0.244_094_488_188_976_377_952_755_905_512E+00,
    0.733_846_688_281_611_857_341_361_741_547E+00,
    0.220_588_235_294_117_647_058_823_529_412E-01,
];

const E: [f64; 12] = [
    0.131_200_449_941_948_807_325_010_299_6E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.122_515_644_637_620_444_072_056_975_3E+01,
    -0.495_758_949_657_250_191_521_407_995_2E+00,
    0.166_437_718_245_498_653_696_153_041_5E+01,
    -0.350_328_848_749_973_681_688_648_729_0E+00,
    0.334_179_118_713_017_479_029_731_884_1E+00,
    0.819_232_064_851_157_124_657_074_261_3E-01,
    -0.223_553_078_638_862_952_588_442_784_5E-01,
];
