//! Adaptive Gauss-Kronrod (7/15) quadrature and closed-form sphere areas.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// One 15-point Kronrod estimate and its difference from the embedded Gauss rule.
fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: u32) -> Result<f64> {
    if err <= tol || (b - a).abs() < 1e-15 * (a.abs() + b.abs()) {
        return Ok(whole);
    }
    if depth == MAX_DEPTH {
        return Err(Error::domain(format!("quadrature did not converge on [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    let (l, el) = kronrod15(f, a, m);
    let (r, er) = kronrod15(f, m, b);
    Ok(adapt(f, a, m, l, el, 0.5 * tol, depth + 1)? + adapt(f, m, b, r, er, 0.5 * tol, depth + 1)?)
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    let (whole, err) = kronrod15(&f, a, b);
    adapt(&f, a, b, whole, err, tol, 0)
}

/// `Gamma(k / 2)` for a positive integer `k`.
pub fn gamma_half_integer(k: u32) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    if k.is_multiple_of(2) {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Area of the unit sphere `S^d`: `2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half_integer(d + 1)
}

/// `I_{k,l} = int_0^pi sin^k(theta) cos(l theta) d theta`.
pub fn sine_power_cosine_integral(k: u32, l: usize) -> Result<f64> {
    let lf = l as f64;
    let v = integrate(|t| t.sin().powi(k as i32) * (lf * t).cos(), 0.0, PI, 1e-14)?;
    // odd about pi/2 for odd l
    Ok(if l % 2 == 1 { 0.0 } else { v })
}
