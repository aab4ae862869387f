//! Adaptive Gauss–Kronrod quadrature, including a half-line driver for
//! oscillatory Fourier-type integrands.

use crate::c64;
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the 15-point Kronrod rule mapped onto [a, b].
pub(crate) fn kronrod_rule(a: f64, b: f64) -> [(f64, f64); 15] {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(centre, WGK[7] * half); 15];
    for k in 0..7 {
        out[2 * k] = (centre - half * XGK[k], WGK[k] * half);
        out[2 * k + 1] = (centre + half * XGK[k], WGK[k] * half);
    }
    out
}

/// One 15-point Kronrod panel; returns the estimate and |K15 - G7|.
fn gk15<F: Fn(f64) -> c64>(f: &F, a: f64, b: f64) -> (c64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += pair * w;
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

fn adapt<F: Fn(f64) -> c64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (c64, f64),
    abs_tol: f64,
    depth: u32,
) -> Result<c64> {
    let (value, err) = whole;
    if err <= abs_tol.max(1e3 * f64::EPSILON * value.norm()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "bisection limit on [{a:e}, {b:e}], error estimate {err:e} > {abs_tol:e}"
        )));
    }
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    Ok(adapt(f, a, mid, left, 0.5 * abs_tol, depth + 1)?
        + adapt(f, mid, b, right, 0.5 * abs_tol, depth + 1)?)
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance
/// `abs_tol`.
pub fn integrate<F: Fn(f64) -> c64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<c64> {
    if a == b {
        return Ok(c64::new(0.0, 0.0));
    }
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, abs_tol, 0)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    integrate(|x| c64::new(f(x), 0.0), a, b, abs_tol).map(|z| z.re)
}

/// Smallest p ≤ 16 for which y^(p·power - 1) is a polynomial factor, so
/// the substituted integrand is smooth at y = 0.
fn smoothing_power(power: f64) -> f64 {
    (1..=16)
        .map(f64::from)
        .find(|p| {
            let q = p * power;
            q >= 1.0 - 1e-12 && (q - q.round()).abs() < 1e-9
        })
        .unwrap_or(16.0)
}

/// Integral over `[0, end]` of an integrand that may carry an algebraic
/// endpoint singularity `x^(power - 1)` at the origin and oscillates with
/// period `2π / frequency`.
///
/// The interval is cut into panels no wider than half an oscillation period
/// (and no wider than `scale`), so each panel holds a single lobe. On the
/// first panel the substitution `x = a·y^p` smooths the singular factor.
pub fn integrate_half_line<F: Fn(f64) -> c64>(
    f: F,
    power: f64,
    frequency: f64,
    scale: f64,
    end: f64,
    abs_tol: f64,
) -> Result<c64> {
    let mut width = scale;
    if frequency.abs() > 0.0 {
        width = width.min(std::f64::consts::PI / frequency.abs());
    }
    let panels = (end / width).ceil().max(1.0) as usize;
    let width = end / panels as f64;
    let tol = abs_tol / panels as f64;

    let p = smoothing_power(power);
    let first = integrate(
        |y: f64| {
            let x = width * y.powf(p);
            f(x) * (width * p * y.powf(p - 1.0))
        },
        0.0,
        1.0,
        tol,
    )?;
    let mut total = first;
    for k in 1..panels {
        let a = k as f64 * width;
        total += integrate(&f, a, a + width, tol)?;
    }
    Ok(total)
}
