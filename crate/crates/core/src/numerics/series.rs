use super::C64;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient ring for truncated q-series.
pub trait Coeff:
    Clone
    + Zero
    + One
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + Zero
        + One
        + PartialEq
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// `c_0 + c_1 q + ... + c_N q^N + O(q^{N+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

pub type IntSeries = TruncatedSeries<BigInt>;
pub type ComplexSeries = TruncatedSeries<C64>;

impl<T: Coeff> TruncatedSeries<T> {
    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(T::one(), 0, order)
    }

    pub fn monomial(c: T, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn from_coeffs(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        TruncatedSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &T {
        &self.coeffs[n]
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        TruncatedSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|i| self.coeffs[i].clone() + other.coeffs[i].clone())
            .collect();
        TruncatedSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|i| self.coeffs[i].clone() - other.coeffs[i].clone())
            .collect();
        TruncatedSeries { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncatedSeries { coeffs: out }
    }

    pub fn scale(&self, c: &T) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Multiplication by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        if k <= n {
            out[k..].clone_from_slice(&self.coeffs[..=n - k]);
        }
        TruncatedSeries { coeffs: out }
    }

    /// In-place multiplication by `1 - c q^e`.
    pub fn mul_one_minus(&mut self, c: &T, e: usize) {
        if e == 0 {
            let f = T::one() - c.clone();
            for a in self.coeffs.iter_mut() {
                *a = a.clone() * f.clone();
            }
            return;
        }
        for i in (e..self.coeffs.len()).rev() {
            let t = c.clone() * self.coeffs[i - e].clone();
            self.coeffs[i] = self.coeffs[i].clone() - t;
        }
    }

    /// In-place division by `1 - c q^e` for `e >= 1`.
    pub fn div_one_minus(&mut self, c: &T, e: usize) {
        assert!(e >= 1, "division by 1 - c q^0 is not a series operation");
        for i in e..self.coeffs.len() {
            let t = c.clone() * self.coeffs[i - e].clone();
            self.coeffs[i] = self.coeffs[i].clone() + t;
        }
    }

    /// Multiplicative inverse of a series with constant term 1.
    pub fn inverse_unit(&self) -> Option<Self> {
        if !self.coeffs[0].is_one() {
            return None;
        }
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        out[0] = T::one();
        for i in 1..=n {
            let mut acc = T::zero();
            for j in 1..=i {
                acc = acc + self.coeffs[j].clone() * out[i - j].clone();
            }
            out[i] = -acc;
        }
        Some(TruncatedSeries { coeffs: out })
    }
}

impl IntSeries {
    pub fn to_complex(&self) -> ComplexSeries {
        use num_traits::ToPrimitive;
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| C64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        }
    }
}

impl ComplexSeries {
    pub fn eval(&self, q: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * q + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int_series(v: &[i64], order: usize) -> IntSeries {
        TruncatedSeries::from_coeffs(v.iter().map(|&x| BigInt::from(x)).collect(), order)
    }

    proptest! {
        #[test]
        fn mul_is_truncated_convolution(a in prop::collection::vec(-50i64..50, 1..12),
                                        b in prop::collection::vec(-50i64..50, 1..12),
                                        order in 0usize..15) {
            let sa = int_series(&a, order);
            let sb = int_series(&b, order);
            let prod = sa.mul(&sb);
            for n in 0..=order {
                let mut want = BigInt::from(0);
                for i in 0..=n {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(n - i).copied().unwrap_or(0);
                    want += BigInt::from(x * y);
                }
                prop_assert_eq!(prod.coeff(n), &want);
            }
        }

        #[test]
        fn one_minus_roundtrip(a in prop::collection::vec(-50i64..50, 1..12), c in -5i64..5, e in 1usize..5) {
            let s = int_series(&a, 14);
            let mut t = s.clone();
            t.mul_one_minus(&BigInt::from(c), e);
            t.div_one_minus(&BigInt::from(c), e);
            prop_assert_eq!(t, s);
        }
    }

    #[test]
    fn mixed_orders_truncate_to_common_order() {
        let a = int_series(&[1, 1], 3);
        let b = int_series(&[1, 1], 5);
        assert_eq!(a.mul(&b).order(), 3);
        assert_eq!(a.add(&b).order(), 3);
    }

    #[test]
    fn inverse_of_one_minus_q() {
        let s = int_series(&[1, -1], 6);
        let inv = s.inverse_unit().unwrap();
        assert!(inv.coeffs().iter().all(|c| *c == BigInt::from(1)));
        assert!(int_series(&[2, 1], 3).inverse_unit().is_none());
    }
}
