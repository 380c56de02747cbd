//! Scalar plumbing shared by the analytic modules: complex helpers, exact
//! rationals, truncated power series, quadrature, compensated sums and a small
//! multiprecision complex type.

mod erf;
pub mod mp;
mod quad;
mod series;
mod sum;

pub use erf::{e_func, erfc_pi};
pub use quad::{gauss_legendre, quad_gaussian_line, quad_vertical_ray, QuadOptions, Quadrature};
pub use series::{Coeff, ComplexSeries, IntSeries, TruncatedSeries};
pub use sum::NeumaierSum;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::f64::consts::PI;

pub use num_complex::Complex64 as C64;
pub use num_rational::BigRational;

pub const I: C64 = C64::new(0.0, 1.0);

/// `e(x) = exp(2 pi i x)`.
pub fn e(x: f64) -> C64 {
    C64::cis(2.0 * PI * x)
}

/// `e(x)` for complex `x`.
pub fn e_c(x: C64) -> C64 {
    (2.0 * PI * I * x).exp()
}

/// `e(p/q)` with the numerator reduced mod `q` before going to floating point.
pub fn e_frac(p: i128, q: i128) -> C64 {
    assert!(q > 0);
    let r = p.rem_euclid(q);
    // keep the angle in [-1/2, 1/2) for accuracy
    let r = if 2 * r >= q { r - q } else { r };
    e(r as f64 / q as f64)
}

/// `1 - e(p/q)`, computed as `-2i sin(pi p/q) e(p/(2q))` so that it keeps full
/// relative accuracy when `p/q` is close to an integer.
pub fn one_minus_e_frac(p: i128, q: i128) -> C64 {
    let r = p.rem_euclid(q);
    let r = if 2 * r >= q { r - q } else { r };
    let x = r as f64 / q as f64;
    -2.0 * I * (PI * x).sin() * C64::cis(PI * x)
}

/// Principal square root with argument in (-pi/2, pi/2]; a negative real
/// radicand maps to `+i sqrt(|z|)` regardless of the sign of its zero
/// imaginary part.
pub fn sqrt_principal(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            return C64::new(z.re.sqrt(), 0.0);
        }
        return C64::new(0.0, (-z.re).sqrt());
    }
    z.sqrt()
}

/// Principal `z^p` with `arg z` in (-pi, pi].
pub fn pow_principal(z: C64, p: f64) -> C64 {
    if z.im == 0.0 && z.re < 0.0 {
        return C64::from_polar((-z.re).powf(p), PI * p);
    }
    z.powf(p)
}

pub fn check_finite(z: C64, what: &str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Precision(format!("{what} is not finite")))
    }
}

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UHPoint(C64);

impl UHPoint {
    pub fn new(tau: C64) -> Result<Self> {
        if tau.im > 0.0 && tau.re.is_finite() && tau.im.is_finite() {
            Ok(UHPoint(tau))
        } else {
            Err(Error::Domain(format!(
                "tau = {tau} is not in the upper half-plane"
            )))
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(C64::new(re, im))
    }

    pub fn tau(self) -> C64 {
        self.0
    }

    pub fn q(self) -> C64 {
        e_c(self.0)
    }
}

/// Parses `a/b` or an integer into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // numer and denom can exceed f64 range individually for long words
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let (q, r) = x.numer().div_mod_floor(x.denom());
            let frac = BigRational::new(r, x.denom().clone());
            let shift = frac.denom().bits().saturating_sub(60);
            let n = (frac.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (frac.denom() >> shift).to_f64().unwrap_or(1.0);
            q.to_f64().unwrap_or(f64::NAN) + n / d
        }
    }
}

pub fn bigint_abs_i128(x: &BigInt) -> Option<i128> {
    x.abs().to_i128()
}
