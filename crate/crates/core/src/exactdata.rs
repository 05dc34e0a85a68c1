//! Exact solutions of the linear wave equation built from a mode function,
//! real spherical harmonics, and their transformation to the conformal chart.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::chart::{chart_coeffs, FoliationParams};
use crate::error::{Error, Result};
use crate::evolve::State;
use crate::grid::{Field, Grid, Symmetry};
use crate::quadrature::{gamma_half_integer, sphere_area};

/// Gaussian-derivative profile `F(x) = A x exp(-x^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeFunction {
    amplitude: f64,
    sigma: f64,
}

/// Highest derivative of the mode function available.
pub const MAX_DERIVATIVE: usize = 4;

impl ModeFunction {
    pub fn new(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !amplitude.is_finite() {
            return Err(Error::domain(format!("mode function needs sigma > 0 and finite A (A={amplitude}, sigma={sigma})")));
        }
        Ok(Self { amplitude, sigma })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `F^{(order)}(x) = A sigma^{1-k} (-1)^k He_{k+1}(s) e^{-s^2/2}`, `s = x / sigma`.
    /// Vanishes for non-finite `x` (the profile decays at both ends).
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        assert!(order <= MAX_DERIVATIVE, "mode function derivative {order} not available");
        if !x.is_finite() {
            return 0.0;
        }
        let s = x / self.sigma;
        let g = (-0.5 * s * s).exp();
        if g == 0.0 {
            return 0.0;
        }
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.amplitude * self.sigma.powi(1 - order as i32) * sign * hermite_he(order + 1, s) * g
    }
}

/// Probabilists' Hermite polynomial `He_k`.
fn hermite_he(k: usize, s: f64) -> f64 {
    let (mut a, mut b) = (1.0, s);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = s * b - j as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Which characteristic families a radial solution uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `F(r + t)`.
    Ingoing,
    /// `F(r - t)`.
    Outgoing,
    /// Ingoing plus outgoing: regular at the origin for odd `F`.
    RegularSum,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Ingoing => "ingoing",
            Direction::Outgoing => "outgoing",
            Direction::RegularSum => "regular",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ingoing" | "in" => Ok(Direction::Ingoing),
            "outgoing" | "out" => Ok(Direction::Outgoing),
            "regular" | "regular-sum" | "sum" => Ok(Direction::RegularSum),
            other => Err(Error::config(format!("unknown direction '{other}' (ingoing|outgoing|regular)"))),
        }
    }
}

impl Direction {
    fn signs(self) -> &'static [f64] {
        match self {
            Direction::Ingoing => &[1.0],
            Direction::Outgoing => &[-1.0],
            Direction::RegularSum => &[1.0, -1.0],
        }
    }
}

/// Coefficients `c_k` of `Phi_l = sum_k c_k r^{-k-q} F^{(D-k)}(r +- t)`,
/// `q = (n-1)/2`, `D = l + q - 1`.
pub fn radial_coefficients(n: usize, l: usize) -> Result<&'static [f64]> {
    match (n, l) {
        (3, 0) => Ok(&[1.0]),
        (3, 1) => Ok(&[1.0, -1.0]),
        (3, 2) => Ok(&[1.0, -3.0, 3.0]),
        (5, 0) => Ok(&[1.0, -1.0]),
        (5, 1) => Ok(&[1.0, -3.0, 3.0]),
        (5, 2) => Ok(&[1.0, -6.0, 15.0, -15.0]),
        _ => Err(Error::domain(format!("no exact radial solution for n = {n}, l = {l} (n in {{3,5}}, l <= 2)"))),
    }
}

fn half_dimension(n: usize) -> i32 {
    (n as i32 - 1) / 2
}

/// Radial mode value and first derivatives in physical coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadialValue {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_r: f64,
}

/// Exact radial solution `Phi_l(t, r)` for `r > 0`.
pub fn radial_mode_solution(n: usize, l: usize, dir: Direction, f: &ModeFunction, t: f64, r: f64) -> Result<RadialValue> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radial solution needs r > 0, got {r}")));
    }
    let c = radial_coefficients(n, l)?;
    let q = half_dimension(n);
    let d = c.len() - 1;
    let mut out = RadialValue::default();
    for &sgn in dir.signs() {
        let x = r + sgn * t;
        for (k, &ck) in c.iter().enumerate() {
            let p = -(k as i32) - q;
            let rp = r.powi(p);
            let fk = f.eval(x, d - k);
            let fk1 = f.eval(x, d - k + 1);
            out.phi += ck * rp * fk;
            out.phi_r += ck * (p as f64 * rp / r * fk + rp * fk1);
            out.phi_t += ck * rp * fk1 * sgn;
        }
    }
    Ok(out)
}

/// Conformal field `Phi~ = Omega^{(1-n)/2} Phi` and its chart derivatives at `(t~, r~)`.
///
/// The negative power of `Omega` is cancelled against the `r^{-k-q}` prefactors
/// analytically, so the result is finite up to and including `r~ = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConformalValue {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_r: f64,
}

pub fn conformal_mode_value(
    l: usize,
    dir: Direction,
    f: &ModeFunction,
    t_tilde: f64,
    r_tilde: f64,
    params: &FoliationParams,
) -> Result<ConformalValue> {
    let n = params.n();
    if !(r_tilde > 0.0 && r_tilde <= 1.0) {
        return Err(Error::domain(format!("conformal exact solution needs r~ in (0, 1], got {r_tilde}")));
    }
    let c = radial_coefficients(n, l)?;
    let q = half_dimension(n);
    let d = c.len() - 1;
    let a = params.a();
    let rt = r_tilde;
    // rho = 1/r and its r~-derivative
    let rho = (1.0 - rt * rt) / (2.0 * a * rt);
    let drho = -(1.0 + rt * rt) / (2.0 * a * rt * rt);
    let pref = rt.powi(-q);
    let dpref = -(q as f64) * rt.powi(-q - 1);

    let mut out = ConformalValue::default();
    for &sgn in dir.signs() {
        // x = r +- t as a function of (t~, r~)
        let (x, dx_dt, dx_dr) = if sgn > 0.0 {
            let x = if rt < 1.0 { t_tilde + a * (1.0 + rt) / (1.0 - rt) } else { f64::INFINITY };
            (x, 1.0, 2.0 * a / ((1.0 - rt) * (1.0 - rt)))
        } else {
            let x = -t_tilde - a * (1.0 - rt) / (1.0 + rt);
            (x, -1.0, 2.0 * a / ((1.0 + rt) * (1.0 + rt)))
        };
        if !x.is_finite() {
            continue;
        }
        let (mut s, mut s_t, mut s_r) = (0.0, 0.0, 0.0);
        for (k, &ck) in c.iter().enumerate() {
            let fk = f.eval(x, d - k);
            let fk1 = f.eval(x, d - k + 1);
            let rk = rho.powi(k as i32);
            s += ck * rk * fk;
            s_t += ck * rk * fk1 * dx_dt;
            let drk = if k == 0 { 0.0 } else { k as f64 * rho.powi(k as i32 - 1) * drho };
            let chain = if fk1 == 0.0 { 0.0 } else { rk * fk1 * dx_dr };
            s_r += ck * (drk * fk + chain);
        }
        out.phi += pref * s;
        out.phi_t += pref * s_t;
        out.phi_r += dpref * s + pref * s_r;
    }
    Ok(out)
}

/// Real spherical harmonic, unit-normalised on `S^{n-1}`.
///
/// With `m = Some(_)` (`n = 3` only): `Y_{l0}`, `sqrt 2 N P_l^m cos(m phi)` for
/// `m > 0`, `sqrt 2 N P_l^{|m|} sin(|m| phi)` for `m < 0`, Legendre functions
/// without the Condon-Shortley phase. With `m = None`: the SO(n-1)-invariant
/// harmonic, a normalised Gegenbauer polynomial in `cos(theta)`.
pub fn spherical_harmonic(n: usize, l: usize, m: Option<i32>, theta: f64, phi: f64) -> Result<f64> {
    match m {
        Some(m) => {
            if n != 3 {
                return Err(Error::domain(format!("harmonics with m require n = 3, got n = {n}")));
            }
            let am = m.unsigned_abs() as usize;
            if am > l {
                return Err(Error::domain(format!("|m| = {am} exceeds l = {l}")));
            }
            let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial_ratio(l - am, l + am)).sqrt();
            let p = assoc_legendre(l, am, theta.cos());
            Ok(match m.signum() {
                0 => norm * p,
                1 => 2f64.sqrt() * norm * p * (am as f64 * phi).cos(),
                _ => 2f64.sqrt() * norm * p * (am as f64 * phi).sin(),
            })
        }
        None => axisymmetric_harmonic(n, l, theta),
    }
}

/// `a! / b!`.
fn factorial_ratio(a: usize, b: usize) -> f64 {
    if a >= b {
        ((b + 1)..=a).map(|i| i as f64).product()
    } else {
        1.0 / ((a + 1)..=b).map(|i| i as f64).product::<f64>()
    }
}

/// `P_l^m(x)` without the Condon-Shortley phase.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm2 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

fn gegenbauer(l: usize, lambda: f64, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * lambda * x);
    if l == 0 {
        return a;
    }
    for k in 2..=l {
        let kf = k as f64;
        let c = (2.0 * x * (kf + lambda - 1.0) * b - (kf + 2.0 * lambda - 2.0) * a) / kf;
        a = b;
        b = c;
    }
    b
}

fn axisymmetric_harmonic(n: usize, l: usize, theta: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("dimension n = {n} must be >= 2")));
    }
    if n == 2 {
        // S^1 parametrised by theta in [0, pi] with reflection symmetry
        return Ok(if l == 0 { 1.0 / (2.0 * PI).sqrt() } else { (l as f64 * theta).cos() / PI.sqrt() });
    }
    let lambda = (n as f64 - 2.0) / 2.0;
    // int_{-1}^{1} (1-x^2)^{lambda-1/2} C_l^lambda(x)^2 dx
    let gamma_l2 = factorial_ratio(l + n - 3, 0);
    let g = gamma_half_integer(n as u32 - 2);
    let norm_sq = PI * 2f64.powf(1.0 - 2.0 * lambda) * gamma_l2
        / (factorial_ratio(l, 0) * (l as f64 + lambda) * g * g);
    let area = sphere_area(n as u32 - 2);
    Ok(gegenbauer(l, lambda, theta.cos()) / (area * norm_sq).sqrt())
}

/// One exact linear mode: radial solution times harmonic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearMode {
    pub l: usize,
    pub m: Option<i32>,
    pub direction: Direction,
    pub profile: ModeFunction,
}

/// Samples the exact linear solution at conformal time `t~` on every grid node.
pub fn exact_linear_state(t_tilde: f64, grid: &Grid, params: &FoliationParams, modes: &[LinearMode]) -> Result<State> {
    let n = params.n();
    if n != grid.n() {
        return Err(Error::config(format!("grid dimension {} differs from foliation dimension {n}", grid.n())));
    }
    let shape = grid.shape();
    let mut phi = Field::zeros(shape);
    let mut pi = Field::zeros(shape);
    for mode in modes {
        match (grid.symmetry(), mode.m) {
            (Symmetry::Full3D, None) => {
                return Err(Error::config(format!("mode l = {} needs an m index on a full 3D grid", mode.l)))
            }
            (Symmetry::SoReduced, Some(m)) if m != 0 => {
                return Err(Error::config(format!("mode (l = {}, m = {m}) breaks SO(n-1) symmetry", mode.l)))
            }
            _ => {}
        }
        let m = match grid.symmetry() {
            Symmetry::Full3D => mode.m,
            Symmetry::SoReduced => None,
        };
        let mut harm = Vec::with_capacity(shape.plane());
        for &th in grid.theta() {
            for &ph in grid.phi() {
                harm.push(spherical_harmonic(n, mode.l, m, th, ph)?);
            }
        }
        for (i, &rt) in grid.r().iter().enumerate() {
            let v = conformal_mode_value(mode.l, mode.direction, &mode.profile, t_tilde, rt, params)?;
            let cc = chart_coeffs(rt, params)?;
            let pi_r = (v.phi_t - cc.shift * v.phi_r) / cc.lapse;
            for (q, y) in harm.iter().enumerate() {
                phi.shell_mut(i)[q] += v.phi * y;
                pi.shell_mut(i)[q] += pi_r * y;
            }
        }
    }
    Ok(State { phi, pi, time: t_tilde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{areal_radius, physical_time};
    use approx::assert_relative_eq;

    fn unit() -> ModeFunction {
        ModeFunction::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn mode_function_values_and_derivatives() {
        let f = unit();
        assert_eq!(f.eval(0.0, 0), 0.0);
        assert_relative_eq!(f.eval(0.0, 1), 1.0);
        let g = ModeFunction::new(2.0, 0.7).unwrap();
        let h = 1e-4;
        for order in 0..MAX_DERIVATIVE {
            for x in [-1.3, 0.2, 0.7, 2.1] {
                let fd = (g.eval(x + h, order) - g.eval(x - h, order)) / (2.0 * h);
                let ex = g.eval(x, order + 1);
                assert!((fd - ex).abs() <= 1e-6 * ex.abs().max(1.0), "order {order} at {x}");
            }
        }
        assert_eq!(f.eval(f64::INFINITY, 3), 0.0);
        assert_eq!(f.eval(1e200, 2), 0.0);
    }

    #[test]
    fn regular_sum_origin_limit() {
        let f = unit();
        let v = radial_mode_solution(3, 0, Direction::RegularSum, &f, 0.0, 1e-6).unwrap();
        assert_relative_eq!(v.phi, 2.0, max_relative = 1e-9);
        for n in [3, 5] {
            for l in 0..=2 {
                let v = radial_mode_solution(n, l, Direction::RegularSum, &f, 0.8, 1e-2).unwrap();
                assert!(v.phi.is_finite() && v.phi.abs() < 10.0, "n={n} l={l}: {}", v.phi);
            }
        }
    }

    fn mode_residual(n: usize, l: usize, dir: Direction, t: f64, r: f64) -> f64 {
        let f = ModeFunction::new(1.0, 1.0).unwrap();
        let h = 1e-3;
        let p = |t, r| radial_mode_solution(n, l, dir, &f, t, r).unwrap();
        let v = p(t, r);
        let d4 = |g: &dyn Fn(f64) -> f64, x: f64| (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h);
        let ptt = d4(&|s| p(s, r).phi_t, t);
        let prr = d4(&|s| p(t, s).phi_r, r);
        let lf = l as f64;
        let nf = n as f64;
        -ptt + prr + (nf - 1.0) / r * v.phi_r + lf * (2.0 - nf - lf) / (r * r) * v.phi
    }

    #[test]
    fn radial_solutions_satisfy_mode_equation() {
        for n in [3, 5] {
            for l in 0..=2 {
                for dir in [Direction::Ingoing, Direction::Outgoing, Direction::RegularSum] {
                    for (t, r) in [(0.3, 1.1), (-2.0, 2.5), (1.7, 0.9), (4.0, 3.3)] {
                        let res = mode_residual(n, l, dir, t, r);
                        assert!(res.abs() < 1e-7, "n={n} l={l} {dir:?} ({t},{r}): {res}");
                    }
                }
            }
        }
    }

    #[test]
    fn outgoing_decay_towards_scri() {
        let f = unit();
        let u = 0.5;
        let v1 = radial_mode_solution(5, 0, Direction::Outgoing, &f, 100.0 - u, 100.0).unwrap().phi;
        let v2 = radial_mode_solution(5, 0, Direction::Outgoing, &f, 200.0 - u, 200.0).unwrap().phi;
        assert_relative_eq!(v1 / v2, 4.0, max_relative = 2e-2);
    }

    #[test]
    fn conformal_route_matches_direct_transformation() {
        for (n, c) in [(3usize, 3.0), (5, 5.0), (3, 2.0)] {
            let params = FoliationParams::new(n, c).unwrap();
            let f = ModeFunction::new(1.3, 0.8).unwrap();
            let q = (n as i32 - 1) / 2;
            for l in 0..=2 {
                for dir in [Direction::Ingoing, Direction::Outgoing, Direction::RegularSum] {
                    for (tt, rt) in [(-3.0, 0.3), (0.5, 0.6), (1.0, 0.85), (-1.0, 0.1)] {
                        let r = areal_radius(rt, &params).unwrap();
                        let t = physical_time(tt, r, &params);
                        let v = radial_mode_solution(n, l, dir, &f, t, r).unwrap();
                        let om = params.omega(rt);
                        let want = om.powi(-q) * v.phi;
                        let got = conformal_mode_value(l, dir, &f, tt, rt, &params).unwrap();
                        assert_relative_eq!(got.phi, want, epsilon = 1e-12, max_relative = 1e-10);
                        // chain rule for the derivatives
                        let a = params.a();
                        let drdr = 2.0 * a * (1.0 + rt * rt) / (1.0 - rt * rt).powi(2);
                        let dtdr = 4.0 * a * rt / (1.0 - rt * rt).powi(2);
                        let phi_rt = drdr * v.phi_r + dtdr * v.phi_t;
                        let dlnom = -2.0 * rt / (1.0 - rt * rt);
                        let want_r = om.powi(-q) * (phi_rt - q as f64 * dlnom * v.phi);
                        assert_relative_eq!(got.phi_r, want_r, epsilon = 1e-11, max_relative = 1e-9);
                        assert_relative_eq!(got.phi_t, om.powi(-q) * v.phi_t, epsilon = 1e-12, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn finite_at_scri() {
        let params = FoliationParams::unit(3).unwrap();
        let f = unit();
        for l in 0..=2 {
            for dir in [Direction::Ingoing, Direction::Outgoing, Direction::RegularSum] {
                let at = conformal_mode_value(l, dir, &f, 0.5, 1.0, &params).unwrap();
                let near = conformal_mode_value(l, dir, &f, 0.5, 1.0 - 1e-6, &params).unwrap();
                assert!(at.phi.is_finite() && at.phi_r.is_finite() && at.phi_t.is_finite());
                assert!((at.phi - near.phi).abs() < 1e-5 * (1.0 + at.phi.abs()));
            }
        }
    }

    #[test]
    fn printed_five_dimensional_harmonics() {
        for th in [0.1, 0.9, 2.0] {
            assert_relative_eq!(spherical_harmonic(5, 0, None, th, 0.0).unwrap(), 3f64.sqrt() / (2.0 * 2f64.sqrt() * PI), max_relative = 1e-14);
            assert_relative_eq!(
                spherical_harmonic(5, 1, None, th, 0.0).unwrap(),
                15f64.sqrt() / (2.0 * 2f64.sqrt() * PI) * th.cos(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                spherical_harmonic(5, 2, None, th, 0.0).unwrap(),
                21f64.sqrt() / (8.0 * PI) * (5.0 * th.cos().powi(2) - 1.0),
                max_relative = 1e-13
            );
        }
    }

    fn sphere_inner(n: usize, a: (usize, Option<i32>), b: (usize, Option<i32>)) -> f64 {
        let k = n as i32 - 2;
        let area = if a.1.is_some() { 1.0 } else { sphere_area(n as u32 - 2) };
        let phi_int = |th: f64| -> f64 {
            match (a.1, b.1) {
                (Some(_), Some(_)) => crate::quadrature::integrate(
                    |ph| spherical_harmonic(n, a.0, a.1, th, ph).unwrap() * spherical_harmonic(n, b.0, b.1, th, ph).unwrap(),
                    0.0,
                    2.0 * PI,
                    1e-13,
                )
                .unwrap(),
                _ => spherical_harmonic(n, a.0, None, th, 0.0).unwrap() * spherical_harmonic(n, b.0, None, th, 0.0).unwrap(),
            }
        };
        area * crate::quadrature::integrate(|th| phi_int(th) * th.sin().powi(k), 0.0, PI, 1e-12).unwrap()
    }

    #[test]
    fn harmonics_are_orthonormal() {
        assert_relative_eq!(sphere_inner(3, (2, Some(1)), (2, Some(1))), 1.0, max_relative = 1e-10);
        assert!(sphere_inner(3, (2, Some(1)), (2, Some(2))).abs() < 1e-10);
        assert_relative_eq!(sphere_inner(3, (2, Some(-2)), (2, Some(-2))), 1.0, max_relative = 1e-10);
        assert_relative_eq!(sphere_inner(3, (3, Some(0)), (3, Some(0))), 1.0, max_relative = 1e-10);
        for n in [2, 3, 4, 5, 6] {
            for l in 0..4 {
                for l2 in 0..4 {
                    let v = sphere_inner(n, (l, None), (l2, None));
                    let want = if l == l2 { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10, "n={n} l={l} l2={l2}: {v}");
                }
            }
        }
    }

    #[test]
    fn real_harmonic_is_quadrupole() {
        // Y_22 is proportional to sin^2 cos(2 phi)
        let y = |t: f64, p: f64| spherical_harmonic(3, 2, Some(2), t, p).unwrap();
        let c = y(0.7, 0.3) / (0.7f64.sin().powi(2) * 0.6f64.cos());
        assert_relative_eq!(c, (15.0 / (16.0 * PI)).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn superposition_is_linear() {
        let grid = Grid::new(5, Symmetry::SoReduced, 16, 4, None).unwrap();
        let params = FoliationParams::unit(5).unwrap();
        let m = |l| LinearMode {
            l,
            m: None,
            direction: Direction::Ingoing,
            profile: unit(),
        };
        let both = exact_linear_state(-3.0, &grid, &params, &[m(1), m(2)]).unwrap();
        let a = exact_linear_state(-3.0, &grid, &params, &[m(1)]).unwrap();
        let b = exact_linear_state(-3.0, &grid, &params, &[m(2)]).unwrap();
        let mut sum = a.phi.clone();
        sum.axpy(1.0, &b.phi);
        assert!(sum.max_abs_diff(&both.phi) <= 1e-15 * both.phi.max_abs());
        assert!(exact_linear_state(0.0, &grid, &params, &[]).unwrap().phi.max_abs() == 0.0);
    }
}
