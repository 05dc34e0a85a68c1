//! Closed-form geometry of the constant-mean-curvature hyperboloidal foliation
//! of Minkowski space and its conformal compactification.
//!
//! The compactified radius `rt` lives on `[0, 1]`; `rt = 1` is future null
//! infinity. Everything here is a pure function of `rt` and [`FoliationParams`].

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Spatial dimension `n` and mean curvature `C` of the slices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoliationParams {
    n: usize,
    c: f64,
}

impl FoliationParams {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension n = {n} must be >= 2")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("mean curvature C = {c} must be positive")));
        }
        Ok(Self { n, c })
    }

    /// `C = n`, i.e. `a = 1`: the slices are unit hyperboloids.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Hyperboloid parameter `a = n / C`.
    pub fn a(&self) -> f64 {
        self.n as f64 / self.c
    }

    /// Conformal factor only; cheaper than [`chart_coeffs`].
    pub fn omega(&self, rt: f64) -> f64 {
        self.c * (1.0 - rt * rt) / (2.0 * self.n as f64)
    }
}

/// Conformal factor, lapse, shift, mean curvature, its normal Lie derivative and
/// the Ricci scalar of the rescaled metric, all at one compactified radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartCoeffs {
    pub omega: f64,
    pub lapse: f64,
    pub shift: f64,
    pub mean_k: f64,
    pub lie_nu_k: f64,
    pub ricci: f64,
}

fn check_unit_interval(rt: f64, closed: bool) -> Result<()> {
    let ok = rt >= 0.0 && if closed { rt <= 1.0 } else { rt < 1.0 };
    if ok {
        Ok(())
    } else {
        let range = if closed { "[0, 1]" } else { "[0, 1)" };
        Err(Error::domain(format!("compactified radius {rt} outside {range}")))
    }
}

/// Physical (areal) radius `r = 2 a rt / (1 - rt^2)`.
pub fn areal_radius(rt: f64, params: &FoliationParams) -> Result<f64> {
    check_unit_interval(rt, false)?;
    Ok(2.0 * params.a() * rt / (1.0 - rt * rt))
}

/// Minkowski time `t = t~ + sqrt(a^2 + r^2)` of a point on the slice `t~`.
pub fn physical_time(t_tilde: f64, r: f64, params: &FoliationParams) -> f64 {
    t_tilde + params.a().hypot(r)
}

pub fn chart_coeffs(rt: f64, params: &FoliationParams) -> Result<ChartCoeffs> {
    check_unit_interval(rt, true)?;
    let n = params.n as f64;
    let c = params.c;
    let r2 = rt * rt;
    let q = r2 + 1.0;
    Ok(ChartCoeffs {
        omega: c * (1.0 - r2) / (2.0 * n),
        lapse: c * q / (2.0 * n),
        shift: -c * rt / n,
        mean_k: -2.0 * n / q,
        lie_nu_k: 8.0 * n * r2 / (q * q * q),
        ricci: 4.0 * n * (-r2 * r2 + (n - 5.0) * r2 + n) / (q * q * q),
    })
}

/// Smallest power for which the rescaled equation is regular at null infinity,
/// and the energy-critical power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CriticalExponents {
    pub p_conf: Ratio<i64>,
    /// `None` for `n = 2`, where every power is energy-subcritical.
    pub p_crit: Option<Ratio<i64>>,
}

pub fn critical_exponents(n: usize) -> Result<CriticalExponents> {
    if n < 2 {
        return Err(Error::domain(format!("dimension n = {n} must be >= 2")));
    }
    let n = n as i64;
    Ok(CriticalExponents {
        p_conf: Ratio::new(n + 3, n - 1),
        p_crit: (n > 2).then(|| Ratio::new(n + 2, n - 2)),
    })
}

/// Nonlinearity power `p`, kept as an exact rational whenever the input was
/// a decimal or a fraction so that exponent comparisons are exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl Power {
    pub fn from_ratio(r: Ratio<i64>) -> Self {
        Self {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        }
    }

    pub fn integer(p: i64) -> Self {
        Self::from_ratio(Ratio::from_integer(p))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    /// `Some(k)` when `p` is exactly the integer `k`.
    pub fn as_integer(&self) -> Option<i64> {
        self.exact.filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    /// Exponent `[p(n-1) - n - 3] / 2` of the conformal factor multiplying
    /// the nonlinearity.
    pub fn omega_exponent(&self, n: usize) -> WeightExponent {
        let n = n as i64;
        match self.exact {
            Some(p) => {
                let e = (p * (n - 1) - Ratio::from_integer(n + 3)) / 2;
                WeightExponent {
                    value: *e.numer() as f64 / *e.denom() as f64,
                    sign: e.numer().signum() as i8,
                }
            }
            None => {
                let e = (self.value * (n - 1) as f64 - (n + 3) as f64) / 2.0;
                WeightExponent {
                    value: e,
                    sign: if e == 0.0 { 0 } else { e.signum() as i8 },
                }
            }
        }
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Power {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse power '{s}'"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den <= 0 {
                return Err(bad());
            }
            return Ok(Self::from_ratio(Ratio::new(num, den)));
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        // Decimal literal: recover the exact rational from the digits.
        let exact = decimal_ratio(s);
        Ok(match exact {
            Some(r) => Self::from_ratio(r),
            None => Self { value, exact: None },
        })
    }
}

fn decimal_ratio(s: &str) -> Option<Ratio<i64>> {
    if s.contains(['e', 'E']) {
        return None;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > 12 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let r = Ratio::new(num, den);
    Some(if neg { -r } else { r })
}

/// Exponent of `Omega` in the nonlinear term, with its exact sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightExponent {
    pub value: f64,
    pub sign: i8,
}

impl WeightExponent {
    /// `Omega^e`, short-circuiting to 1 for a vanishing exponent (no `0^0`).
    pub fn weight(&self, omega: f64) -> f64 {
        if self.sign == 0 {
            1.0
        } else if self.value.fract() == 0.0 && self.value.abs() < 64.0 {
            omega.powi(self.value as i32)
        } else {
            omega.powf(self.value)
        }
    }
}

/// Checks `p >= p_conf(n)`.
pub fn check_conformal_power(n: usize, p: &Power) -> Result<()> {
    if p.omega_exponent(n).sign < 0 {
        let pc = critical_exponents(n)?.p_conf;
        return Err(Error::config(format!(
            "conformal method inapplicable: p = {p} is below p_conf = {}/{} for n = {n}",
            pc.numer(),
            pc.denom()
        )));
    }
    Ok(())
}

/// `Omega(rt)^{[p(n-1)-n-3]/2}`.
pub fn nonlinearity_weight(rt: f64, params: &FoliationParams, p: &Power) -> Result<f64> {
    check_unit_interval(rt, true)?;
    check_conformal_power(params.n, p)?;
    Ok(p.omega_exponent(params.n).weight(params.omega(rt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(n: usize) -> FoliationParams {
        FoliationParams::unit(n).unwrap()
    }

    #[test]
    fn areal_radius_examples() {
        assert_eq!(areal_radius(0.0, &unit(3)).unwrap(), 0.0);
        assert_relative_eq!(areal_radius(0.5, &unit(3)).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(areal_radius(0.5, &unit(5)).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(areal_radius(1.0, &unit(3)).is_err());
        assert!(areal_radius(-0.1, &unit(3)).is_err());
    }

    #[test]
    fn physical_time_examples() {
        assert_eq!(physical_time(0.0, 0.0, &unit(3)), 1.0);
        assert_relative_eq!(
            physical_time(-15.0, 4.0 / 3.0, &unit(3)),
            -15.0 + 5.0 / 3.0,
            epsilon = 1e-14
        );
        let a2 = FoliationParams::new(3, 1.5).unwrap();
        assert_eq!(physical_time(2.0, 0.0, &a2), 4.0);
    }

    #[test]
    fn chart_at_scri_and_origin() {
        let c = chart_coeffs(1.0, &unit(3)).unwrap();
        assert_eq!(c.omega, 0.0);
        assert_relative_eq!(c.lapse, 1.0);
        assert_relative_eq!(c.shift, -1.0);
        assert_relative_eq!(c.mean_k, -3.0);
        assert_relative_eq!(c.lie_nu_k, 3.0);
        assert_relative_eq!(c.ricci, 0.0);

        let c = chart_coeffs(0.0, &unit(3)).unwrap();
        assert_relative_eq!(c.omega, 0.5);
        assert_relative_eq!(c.lapse, 0.5);
        assert_eq!(c.shift, 0.0);
        assert_relative_eq!(c.mean_k, -6.0);
        assert_eq!(c.lie_nu_k, 0.0);
        assert_relative_eq!(c.ricci, 36.0);

        let c = chart_coeffs(0.5, &unit(3)).unwrap();
        assert_relative_eq!(c.omega, 0.375);
        assert_relative_eq!(c.omega * areal_radius(0.5, &unit(3)).unwrap(), 0.5, epsilon = 1e-15);
        assert!(chart_coeffs(1.0 + 1e-12, &unit(3)).is_err());
    }

    #[test]
    fn ricci_endpoints_for_several_dimensions() {
        for n in 3..=7 {
            let nf = n as f64;
            let p = unit(n);
            assert_relative_eq!(chart_coeffs(1.0, &p).unwrap().ricci, nf * (nf - 3.0), epsilon = 1e-12);
            assert_relative_eq!(chart_coeffs(0.0, &p).unwrap().ricci, 4.0 * nf * nf, epsilon = 1e-12);
        }
    }

    #[test]
    fn lapse_shift_omega_identity() {
        for n in 2..=7 {
            let p = FoliationParams::new(n, 0.7 * n as f64 + 0.3).unwrap();
            for i in 0..=1000 {
                let rt = i as f64 / 1000.0;
                let c = chart_coeffs(rt, &p).unwrap();
                let lhs = c.lapse * c.lapse - c.shift * c.shift;
                let rhs = c.omega * c.omega;
                assert!((lhs - rhs).abs() <= 10.0 * f64::EPSILON * c.lapse * c.lapse);
                assert!(c.shift <= 0.0 && c.omega >= 0.0);
            }
        }
    }

    #[test]
    fn areal_radius_inverts_conformal_factor_and_is_monotone() {
        let p = FoliationParams::new(5, 2.5).unwrap();
        let mut prev = -1.0;
        for i in 0..1000 {
            let rt = i as f64 / 1000.0;
            let r = areal_radius(rt, &p).unwrap();
            assert!(r > prev);
            prev = r;
            if rt > 0.0 {
                assert_relative_eq!(p.omega(rt) * r, rt, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn critical_exponent_table() {
        let e = critical_exponents(3).unwrap();
        assert_eq!(e.p_conf, Ratio::from_integer(3));
        assert_eq!(e.p_crit, Some(Ratio::from_integer(5)));
        let e = critical_exponents(5).unwrap();
        assert_eq!(e.p_conf, Ratio::from_integer(2));
        assert_eq!(e.p_crit, Some(Ratio::new(7, 3)));
        let e = critical_exponents(2).unwrap();
        assert_eq!(e.p_conf, Ratio::from_integer(5));
        assert_eq!(e.p_crit, None);
        for n in 3..20 {
            let e = critical_exponents(n).unwrap();
            assert!(e.p_conf < e.p_crit.unwrap());
        }
        assert!(critical_exponents(1).is_err());
    }

    #[test]
    fn nonlinearity_weight_examples() {
        let p3 = unit(3);
        assert_eq!(nonlinearity_weight(1.0, &p3, &Power::integer(5)).unwrap(), 0.0);
        for rt in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(nonlinearity_weight(rt, &p3, &Power::integer(3)).unwrap(), 1.0);
        }
        assert_relative_eq!(nonlinearity_weight(0.0, &p3, &Power::integer(5)).unwrap(), 0.25);
        let err = nonlinearity_weight(0.5, &p3, &"2.5".parse().unwrap()).unwrap_err();
        assert!(err.to_string().contains("conformal method inapplicable"));
    }

    #[test]
    fn weight_is_continuous_up_to_scri() {
        let p5 = unit(5);
        for p in ["2", "2.5", "7/3", "3"] {
            let p: Power = p.parse().unwrap();
            let at1 = nonlinearity_weight(1.0, &p5, &p).unwrap();
            let near = nonlinearity_weight(1.0 - 1e-9, &p5, &p).unwrap();
            assert!(at1.is_finite() && (at1 - near).abs() < 1e-3);
        }
    }

    #[test]
    fn power_parsing_is_exact() {
        let p: Power = "7/3".parse().unwrap();
        assert_eq!(p.exact(), Some(Ratio::new(7, 3)));
        let p: Power = "2.5".parse().unwrap();
        assert_eq!(p.exact(), Some(Ratio::new(5, 2)));
        assert_eq!("5".parse::<Power>().unwrap().as_integer(), Some(5));
        assert_eq!("10/6".parse::<Power>().unwrap().omega_exponent(7).sign, 0);
        assert!("abc".parse::<Power>().is_err());
    }
}
