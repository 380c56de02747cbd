//! Exact and complex q-series: Pochhammer symbols, partitions and ranks, the
//! eta product, `R_1(w; q)` and the closed form for `R_2(1, 1; q)`.

use crate::error::{Error, Result};
use crate::numerics::{
    e, e_c, Coeff, ComplexSeries, IntSeries, NeumaierSum, TruncatedSeries, UHPoint, C64,
};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochLength {
    Finite(usize),
    Infinite,
}

/// `(a; q)_m = prod_{j=1}^m (1 - a q^{j-1})`; the infinite product stops once
/// `|a q^{j-1}|` drops below `1e-17`.
pub fn pochhammer(a: C64, q: C64, m: PochLength) -> Result<C64> {
    match m {
        PochLength::Finite(m) => {
            let mut p = C64::new(1.0, 0.0);
            let mut t = a;
            for _ in 0..m {
                p *= 1.0 - t;
                t *= q;
            }
            Ok(p)
        }
        PochLength::Infinite => {
            if q.norm() >= 1.0 {
                return Err(Error::Domain(format!(
                    "(a; q)_inf needs |q| < 1, got |q| = {}",
                    q.norm()
                )));
            }
            let mut p = C64::new(1.0, 0.0);
            let mut t = a;
            let mut count = 0usize;
            while t.norm() >= 1e-17 {
                p *= 1.0 - t;
                t *= q;
                count += 1;
                if count > 100_000_000 {
                    return Err(Error::Precision("infinite product did not converge".into()));
                }
            }
            Ok(p)
        }
    }
}

/// All p(0..=n) by Euler's pentagonal recurrence.
pub fn partition_counts(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for m in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let mut t = p[m - g1].clone();
            if g2 <= m {
                t += &p[m - g2];
            }
            if k % 2 == 1 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        p[m] = acc;
    }
    p
}

pub fn partition_count(n: usize) -> BigInt {
    partition_counts(n).pop().unwrap()
}

/// Calls `f` on every partition of `n` (non-increasing parts), iteratively.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        f(&[]);
        return;
    }
    let mut parts = vec![n];
    loop {
        f(&parts);
        // drop trailing ones, then decrement the last part > 1
        let mut ones = 0;
        while parts.last() == Some(&1) {
            parts.pop();
            ones += 1;
        }
        let Some(last) = parts.pop() else { return };
        let v = last - 1;
        let mut rest = ones + 1;
        parts.push(v);
        while rest > 0 {
            let t = rest.min(v);
            parts.push(t);
            rest -= t;
        }
    }
}

/// `N(m, n)`: partitions of `n` whose largest part minus number of parts is `m`.
pub fn rank_count(m: i64, n: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    let mut count = 0u64;
    for_each_partition(n as usize, |p| {
        let largest = p.first().copied().unwrap_or(0) as i64;
        if largest - p.len() as i64 == m {
            count += 1;
        }
    });
    BigInt::from(count)
}

/// `prod_{n>=1} (1 - q^n)` through `q^order`.
pub fn eta_qexp(order: usize) -> IntSeries {
    let mut s = IntSeries::one(order);
    for n in 1..=order {
        s.mul_one_minus(&BigInt::one(), n);
    }
    s
}

/// `eta(tau) = e(tau/24) prod (1 - q^n)`.
///
/// For `|q| <= 1/2` the product is truncated once `|q^n| < 1e-17`. Closer to
/// the real axis the product needs millions of factors whose rounding errors
/// accumulate, so there the identical pentagonal series
/// `sum_k (-1)^k q^{k(3k-1)/2}` is summed instead: a few thousand terms of
/// modulus at most one, each phase reduced mod 1 exactly.
pub fn eta_value(tau: UHPoint) -> Result<C64> {
    let t = tau.tau();
    let q = tau.q();
    let prod = if q.norm() <= 0.5 {
        pochhammer(q, q, PochLength::Infinite)?
    } else {
        pentagonal_sum(t)?
    };
    Ok(e_c(t / 24.0) * prod)
}

/// `e(m x)` for an integer `m < 2^53`, with `m x` reduced mod 1 without
/// losing the low-order bits of the product.
pub fn e_int_times(m: f64, x: f64) -> C64 {
    let hi = m * x;
    let lo = m.mul_add(x, -hi);
    let frac = (hi - hi.floor()) + lo;
    C64::cis(2.0 * PI * frac)
}

fn pentagonal_sum(t: C64) -> Result<C64> {
    let y = t.im;
    let mut acc = NeumaierSum::new();
    acc.add(C64::new(1.0, 0.0));
    for k in 1u64.. {
        let mut small = true;
        for m in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
            let mag = (-2.0 * PI * m as f64 * y).exp();
            if mag >= 1e-18 {
                small = false;
            }
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            acc.add(sign * mag * e_int_times(m as f64, t.re));
        }
        if small {
            break;
        }
        if k > 50_000_000 {
            return Err(Error::Precision(format!(
                "pentagonal series at height {y} did not converge"
            )));
        }
    }
    Ok(acc.value())
}

/// `R_1(w; q) = sum_{n>=0} q^{n^2} / ((wq; q)_n (w^{-1} q; q)_n)` through `q^order`,
/// over any coefficient ring (`w_inv` must be the inverse of `w`).
pub fn r1_series<T: Coeff>(w: &T, w_inv: &T, order: usize) -> TruncatedSeries<T> {
    let mut total = TruncatedSeries::zero(order);
    let mut n = 0usize;
    while n * n <= order {
        let mut term = TruncatedSeries::monomial(T::one(), n * n, order);
        for j in 1..=n {
            term.div_one_minus(w, j);
            term.div_one_minus(w_inv, j);
        }
        total = total.add(&term);
        n += 1;
    }
    total
}

pub fn r1_series_complex(w: C64, order: usize) -> Result<ComplexSeries> {
    if w.norm() == 0.0 || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Singular(format!(
            "w = {w}: factor (w^-1 q; q)_n undefined"
        )));
    }
    Ok(r1_series(&w, &w.inv(), order))
}

/// Third order mock theta `f(q) = sum q^{n^2} / (-q; q)_n^2`.
pub fn mock_theta_f(order: usize) -> IntSeries {
    let mut total = IntSeries::zero(order);
    let mut n = 0usize;
    while n * n <= order {
        let mut den = IntSeries::one(order);
        for j in 1..=n {
            den.mul_one_minus(&BigInt::from(-1), j);
        }
        let den = den.mul(&den);
        let term =
            IntSeries::monomial(BigInt::one(), n * n, order).mul(&den.inverse_unit().unwrap());
        total = total.add(&term);
        n += 1;
    }
    total
}

/// `N(m, n)` for `0 <= n <= n_max`, read off `R_1(w; q)` at `M = 2 n_max + 1`
/// roots of unity in `w` with an inverse DFT. Entry `[n][m + n_max]`.
pub fn rank_table_via_dft(n_max: usize) -> Result<Vec<Vec<i64>>> {
    let m_count = 2 * n_max + 1;
    let evals: Vec<ComplexSeries> = (0..m_count)
        .map(|j| r1_series_complex(e(j as f64 / m_count as f64), n_max))
        .collect::<Result<_>>()?;
    let mut table = vec![vec![0i64; m_count]; n_max + 1];
    for (n, row) in table.iter_mut().enumerate() {
        for (idx, cell) in row.iter_mut().enumerate() {
            let m = idx as i64 - n_max as i64;
            let mut acc = C64::new(0.0, 0.0);
            for (j, s) in evals.iter().enumerate() {
                acc += s.coeff(n) * e(-(m * j as i64) as f64 / m_count as f64);
            }
            let v = acc.re / m_count as f64;
            let r = v.round();
            if (v - r).abs() > 1e-6 || acc.im.abs() / m_count as f64 > 1e-6 {
                return Err(Error::Precision(format!("N({m},{n}) not integral: {v}")));
            }
            *cell = r as i64;
        }
    }
    Ok(table)
}

/// `R_2(1,1;q) = (1/(q;q)_inf) sum_{m != 0} (-1)^{m-1} q^{3m(m+1)/2} / (1 - q^m)^2`.
///
/// For `m = -k < 0` the summand is rewritten as
/// `(-1)^{k+1} q^{(3k^2+k)/2} / (1 - q^k)^2`.
pub fn bringmann_r2_series(order: usize) -> IntSeries {
    let mut sum = IntSeries::zero(order);
    for (sign, expo, k) in bringmann_terms(order) {
        let mut t = IntSeries::monomial(BigInt::from(sign), expo, order);
        t.div_one_minus(&BigInt::one(), k);
        t.div_one_minus(&BigInt::one(), k);
        sum = sum.add(&t);
    }
    let mut out = sum;
    for n in 1..=order {
        out.div_one_minus(&BigInt::one(), n);
    }
    out
}

/// `(sign, q-exponent, k)` of every summand with exponent `<= order`.
pub fn bringmann_terms(order: usize) -> Vec<(i64, usize, usize)> {
    let mut v = Vec::new();
    for k in 1usize.. {
        let pos = 3 * k * (k + 1) / 2;
        let neg = (3 * k * k + k) / 2;
        if pos > order && neg > order {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        if pos <= order {
            v.push((sign, pos, k));
        }
        if neg <= order {
            v.push((sign, neg, k));
        }
    }
    v
}

pub fn series_to_i64(s: &IntSeries) -> Vec<i64> {
    s.coeffs()
        .iter()
        .map(|c| c.to_i64().expect("coefficient fits i64"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_partition_count(n: usize) -> u64 {
        let mut c = 0;
        for_each_partition(n, |_| c += 1);
        c
    }

    #[test]
    fn pochhammer_basics() {
        let one = pochhammer(
            C64::new(0.3, 0.1),
            C64::new(0.5, 0.0),
            PochLength::Finite(0),
        )
        .unwrap();
        assert_eq!(one, C64::new(1.0, 0.0));
        let q = C64::new(0.5, 0.0);
        let v = pochhammer(q, q, PochLength::Finite(3)).unwrap();
        assert!((v.re - 0.328125).abs() < 1e-15);
        assert!(pochhammer(q, C64::new(1.0, 0.0), PochLength::Infinite).is_err());
    }

    #[test]
    fn pochhammer_periodicity_at_roots_of_unity() {
        // (x z^r; z)_{s + M k} = (1 - x^k)^M (x z^r; z)_s with z a primitive k-th root
        let (k, r, s, m) = (3usize, 1usize, 2usize, 2usize);
        let x = e(0.25);
        let z = e(1.0 / 3.0);
        let a = x * z.powu(r as u32);
        let lhs = pochhammer(a, z, PochLength::Finite(s + m * k)).unwrap();
        let rhs = (1.0 - x.powu(k as u32)).powu(m as u32)
            * pochhammer(a, z, PochLength::Finite(s)).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn partitions() {
        let p = partition_counts(30);
        assert_eq!(p[0], BigInt::from(1));
        assert_eq!(p[4], BigInt::from(5));
        assert_eq!(p[7], BigInt::from(15));
        for (n, pn) in p.iter().enumerate() {
            assert_eq!(*pn, BigInt::from(brute_partition_count(n)), "p({n})");
        }
    }

    #[test]
    fn ranks() {
        for m in -3..=3 {
            assert_eq!(rank_count(m, 0), BigInt::from((m == 0) as u8));
        }
        assert_eq!(rank_count(-2, 7), BigInt::from(2));
        for n in 0..=20 {
            let total: BigInt = (-(n as i64)..=n as i64)
                .map(|m| rank_count(m, n as i64))
                .sum();
            assert_eq!(total, partition_count(n));
        }
    }

    #[test]
    fn eta_product_and_values() {
        let s = eta_qexp(200);
        assert_eq!(s.coeff(1), &BigInt::from(-1));
        assert!(s.coeffs().iter().all(|c| c.magnitude() <= &1u32.into()));
        let inv = s.truncate(30).inverse_unit().unwrap();
        assert_eq!(inv.coeffs(), &partition_counts(30)[..]);
        let tau = UHPoint::from_parts(0.0, 1.0).unwrap();
        let shifted = UHPoint::from_parts(1.0, 1.0).unwrap();
        let ratio = eta_value(shifted).unwrap() / eta_value(tau).unwrap();
        assert!((ratio - e(1.0 / 24.0)).norm() < 1e-14);
        // eta(i) = Gamma(1/4) / (2 pi^{3/4})
        assert!((eta_value(tau).unwrap().re - 0.768_225_422_326_056_7).abs() < 1e-15);
    }

    #[test]
    fn eta_product_and_pentagonal_branches_agree() {
        for (x, y) in [(0.1, 0.2), (0.37, 0.08), (-0.4, 0.11)] {
            let t = C64::new(x, y);
            let q = e_c(t);
            let prod = pochhammer(q, q, PochLength::Infinite).unwrap();
            let pent = pentagonal_sum(t).unwrap();
            assert!((prod - pent).norm() < 1e-13, "{t}: {prod} vs {pent}");
        }
    }

    #[test]
    fn r1_specializations() {
        let one = BigInt::one();
        let r = r1_series(&one, &one, 25);
        assert_eq!(r.coeffs(), &partition_counts(25)[..]);
        let m1 = BigInt::from(-1);
        assert_eq!(r1_series(&m1, &m1, 25), mock_theta_f(25));
        // f(q) = 1 + q - 2q^2 + 3q^3 - 3q^4 + 3q^5 - 5q^6 + ...
        assert_eq!(
            series_to_i64(&mock_theta_f(6)),
            vec![1, 1, -2, 3, -3, 3, -5]
        );
    }

    #[test]
    fn r1_partial_sums_stabilize() {
        let w = e(1.0 / 3.0);
        let full = r1_series_complex(w, 40).unwrap();
        // only n with n^2 <= 40 contribute; the same series at order 40 from a
        // bigger truncation must agree on every coefficient
        let bigger = r1_series_complex(w, 60).unwrap().truncate(40);
        for j in 0..=40 {
            assert!((full.coeff(j) - bigger.coeff(j)).norm() < 1e-9);
        }
    }

    #[test]
    fn rank_table_matches_enumeration() {
        let t = rank_table_via_dft(12).unwrap();
        for n in 0..=12i64 {
            for m in -12..=12i64 {
                assert_eq!(
                    BigInt::from(t[n as usize][(m + 12) as usize]),
                    rank_count(m, n),
                    "N({m},{n})"
                );
            }
        }
    }

    #[test]
    fn bringmann_series_shape() {
        let s = bringmann_r2_series(20);
        assert!(s.coeff(0).is_zero());
        assert!(bringmann_terms(50).len() <= 11);
    }
}
