//! SL2(Z) matrices, Dedekind sums and the eta multiplier.

use crate::error::{Error, Result};
use crate::numerics::{
    e, pow_principal, rational_to_f64, sqrt_principal, BigRational, UHPoint, C64,
};
use crate::qseries::eta_value;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SL2Matrix {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl SL2Matrix {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let m = SL2Matrix {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        if &m.a * &m.d - &m.b * &m.c != BigInt::one() {
            return Err(Error::Domain(format!("{m} has determinant != 1")));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        SL2Matrix {
            a: 1.into(),
            b: 0.into(),
            c: 0.into(),
            d: 1.into(),
        }
    }

    pub fn t() -> Self {
        SL2Matrix {
            a: 1.into(),
            b: 1.into(),
            c: 0.into(),
            d: 1.into(),
        }
    }

    /// `S_l = (1 0; l 1)`.
    pub fn s_ell(ell: i64) -> Self {
        SL2Matrix {
            a: 1.into(),
            b: 0.into(),
            c: ell.into(),
            d: 1.into(),
        }
    }

    pub fn mul(&self, o: &SL2Matrix) -> SL2Matrix {
        SL2Matrix {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> SL2Matrix {
        SL2Matrix {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn neg(&self) -> SL2Matrix {
        SL2Matrix {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    /// Representative of `+-gamma` with `c > 0`, or `c = 0, d = 1`.
    pub fn normalized(&self) -> SL2Matrix {
        if self.c.is_negative() || (self.c.is_zero() && self.d.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn act(&self, tau: C64) -> C64 {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        (f(&self.a) * tau + f(&self.b)) / (f(&self.c) * tau + f(&self.d))
    }

    /// `c tau + d` in floating point.
    pub fn cocycle(&self, tau: C64) -> C64 {
        self.c.to_f64().unwrap_or(f64::NAN) * tau + self.d.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for SL2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// `s(m, t)` straight from the sawtooth definition, O(t).
pub fn dedekind_sum_direct(m: &BigInt, t: &BigInt) -> BigRational {
    assert!(t.is_positive());
    let t64 = t
        .to_i128()
        .expect("direct Dedekind sum needs t to fit in i128");
    let m64 = m.mod_floor(t).to_i128().unwrap();
    let mut acc: i128 = 0;
    for j in 1..t64 {
        let r = (m64 * j) % t64;
        if r != 0 {
            acc += (2 * j - t64) * (2 * r - t64);
        }
    }
    BigRational::new(acc.into(), BigInt::from(4) * t * t)
}

/// `s(m, t)` by the reciprocity law
/// `s(m,t) + s(t,m) = -1/4 + (m/t + t/m + 1/(mt))/12` for coprime `m, t`.
pub fn dedekind_sum_reciprocity(m: &BigInt, t: &BigInt) -> BigRational {
    assert!(t.is_positive());
    let g = m.gcd(t);
    let (mut m, mut t) = (m / &g, t / &g);
    m = m.mod_floor(&t);
    let mut acc = BigRational::zero();
    let mut sign = BigRational::one();
    while !m.is_zero() {
        let term = BigRational::new(BigInt::from(-1), BigInt::from(4))
            + BigRational::new(
                &m * &m + &t * &t + BigInt::one(),
                BigInt::from(12) * &m * &t,
            );
        acc += &sign * term;
        sign = -sign;
        let r = t.mod_floor(&m);
        t = m;
        m = r;
    }
    acc
}

pub const DEDEKIND_DIRECT_LIMIT: u64 = 1_000_000;

/// `s(m, t)`, by the definition for `t <= 10^6` and by reciprocity beyond.
pub fn dedekind_sum(m: &BigInt, t: &BigInt) -> BigRational {
    if t <= &BigInt::from(DEDEKIND_DIRECT_LIMIT) {
        dedekind_sum_direct(m, t)
    } else {
        dedekind_sum_reciprocity(m, t)
    }
}

fn e_rational(x: &BigRational) -> C64 {
    let frac = x - x.floor();
    e(rational_to_f64(&frac))
}

/// The eta multiplier for `c > 0` or `c = 0, d = 1`; other matrices are
/// replaced by `-gamma` first.
pub fn chi_eta(gamma: &SL2Matrix) -> C64 {
    let g = gamma.normalized();
    if g.c.is_zero() {
        return e_rational(&BigRational::new(g.b.clone(), 24.into()));
    }
    let s = dedekind_sum(&g.d, &g.c);
    let phase = BigRational::new(BigInt::from(-1), BigInt::from(8)) - s / BigInt::from(2)
        + BigRational::new(&g.a + &g.d, BigInt::from(24) * &g.c);
    e_rational(&phase)
}

/// Jacobi symbol `(a/n)` for odd `n > 0`.
pub fn jacobi_symbol(a: &BigInt, n: &BigInt) -> i32 {
    assert!(n.is_positive() && n.is_odd());
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// The eta multiplier through the Legendre-symbol formula, for the normalized
/// representative (`c > 0`, or `c = 0, d = 1`).
pub fn chi_legendre(gamma: &SL2Matrix) -> Result<C64> {
    let g = gamma.normalized();
    let SL2Matrix { a, b, c, d } = &g;
    let base = (a + d) * c - b * d * (c * c - BigInt::one());
    if c.is_odd() {
        let sym = jacobi_symbol(d, &c.abs());
        let r = (base - BigInt::from(3) * c).mod_floor(&BigInt::from(24));
        Ok(f64::from(sym) * e(r.to_f64().unwrap() / 24.0))
    } else if d.is_odd() {
        // c >= 0 after normalization, so the generalized symbol is (c/|d|)
        let sym = jacobi_symbol(c, &d.abs());
        let r = (base + BigInt::from(3) * d - BigInt::from(3) - BigInt::from(3) * c * d)
            .mod_floor(&BigInt::from(24));
        Ok(f64::from(sym) * e(r.to_f64().unwrap() / 24.0))
    } else {
        Err(Error::InvariantViolation(format!(
            "{gamma}: c and d both even"
        )))
    }
}

/// `|eta(gamma tau) - chi_gamma (c tau + d)^{1/2} eta(tau)|` with the
/// normalized representative supplying `c, d`.
pub fn eta_transform_check(gamma: &SL2Matrix, tau: UHPoint) -> Result<f64> {
    let g = gamma.normalized();
    let image = UHPoint::new(g.act(tau.tau()))?;
    let lhs = eta_value(image)?;
    let rhs = chi_eta(&g) * sqrt_principal(g.cocycle(tau.tau())) * eta_value(tau)?;
    Ok((lhs - rhs).norm())
}

/// `chi_gamma (c x + d)^{-1/2}` for the normalized representative.
pub fn weight_half_factor(gamma: &SL2Matrix, x: C64) -> C64 {
    let g = gamma.normalized();
    chi_eta(&g) * pow_principal(g.cocycle(x), -0.5)
}
