//! Exact evaluation of `R_n(zeta; zeta_k^h)` at a quantum rational.
//!
//! Every index `m_j` past one period splits off a geometric factor
//! `((1 - x_j^k)(1 - x_j^{-k}))^{-1}`, leaving the multisum over
//! `0 < m_1 <= k`, `0 <= m_j < k`. The summands of that multisum can be huge
//! (`e^{780}` at `k = 2403`) and cancel, so the working precision is chosen
//! from a magnitude pre-pass: double precision with compensated summation
//! when the rounding bound allows it, MPFR otherwise.

use super::{RnEvaluation, RnMode};
use crate::error::{Error, Result};
use crate::numerics::mp::{MpComplex, Scratch};
use crate::numerics::{one_minus_e_frac, NeumaierSum, C64};
use crate::quantumset::{quantum_set_violation, QuantumRational, RootVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;

/// Values of `m_1` handled by one parallel task. Fixed so that the
/// combination order, and therefore the result, does not depend on the
/// thread count.
const CHUNK: usize = 16;

/// Per-step rounding growth assumed by the error bound, in units of the
/// working epsilon.
const STEP_ULPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Double precision if the rounding bound is below `tol`, else MPFR.
    Auto,
    Double,
    Bits(u32),
}

#[derive(Debug, Clone, Copy)]
pub struct FiniteSumOptions {
    pub precision: Precision,
    /// Target absolute accuracy of the multisum.
    pub tol: f64,
    /// Upper bound on `k^n`.
    pub max_terms: u64,
}

impl Default for FiniteSumOptions {
    fn default() -> Self {
        FiniteSumOptions {
            precision: Precision::Auto,
            tol: 1e-13,
            max_terms: 50_000_000,
        }
    }
}

pub fn rn_finite_sum(zeta: &RootVector, x: &QuantumRational) -> Result<RnEvaluation> {
    rn_finite_sum_with(zeta, x, &FiniteSumOptions::default())
}

pub fn rn_finite_sum_with(
    zeta: &RootVector,
    x: &QuantumRational,
    opts: &FiniteSumOptions,
) -> Result<RnEvaluation> {
    if let Some(v) = quantum_set_violation(zeta, x) {
        return Err(Error::Domain(format!("{x} is not in the quantum set: {v}")));
    }
    let n = zeta.n();
    let k = x
        .k()
        .to_u64()
        .filter(|&k| k < (1 << 40))
        .ok_or_else(|| Error::Resource(format!("denominator {} too large", x.k())))?;
    let term_count = (k as u128).pow(n as u32);
    if term_count > opts.max_terms as u128 {
        return Err(Error::Resource(format!(
            "k^n = {term_count} terms exceeds the budget {}",
            opts.max_terms
        )));
    }
    let h = x
        .h()
        .mod_floor(&BigInt::from(k))
        .to_i128()
        .expect("reduced mod k");
    let k = k as i128;

    let mut prefactor = 1.0;
    let mut ratios = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (zeta.alpha(j) as i128, zeta.beta(j) as i128);
        // |1 - x_j^k|^2 = (1 - x_j^k)(1 - x_j^{-k})
        let g = 1.0 / one_minus_e_frac(a * k, b).norm_sqr();
        if !(g < 1.0) {
            return Err(Error::InvariantViolation(format!(
                "geometric ratio {g} for x_{} at {x} is not below 1",
                j + 1
            )));
        }
        ratios.push(g);
        prefactor /= 1.0 - g;
    }

    let plan = Plan {
        n,
        k,
        h,
        alpha: (0..n).map(|j| zeta.alpha(j) as i128).collect(),
        beta: (0..n).map(|j| zeta.beta(j) as i128).collect(),
    };
    let (log_max, log_abs_sum) = plan.magnitudes();
    let path = (n as f64) * (k as f64) + 2.0;
    let bound_for =
        |eps_log2: f64| STEP_ULPS * path * (log_abs_sum + eps_log2 * std::f64::consts::LN_2).exp();
    let double_bound = bound_for(-53.0);
    let bits = match opts.precision {
        Precision::Double => None,
        Precision::Bits(b) => Some(b.max(64)),
        Precision::Auto if double_bound <= opts.tol => None,
        Precision::Auto => {
            let need = (STEP_ULPS * path).log2() + log_abs_sum / std::f64::consts::LN_2
                - opts.tol.min(1e-20).log2();
            Some(need.ceil() as u32 + 32)
        }
    };
    let (sum, bits_used, bound) = match bits {
        None => (plan.run(&DoubleField), 53, double_bound),
        Some(b) => (plan.run(&MpField { prec: b }), b, bound_for(-(b as f64))),
    };
    let value = prefactor * sum;
    let error_estimate = prefactor * (bound + sum.norm() * f64::EPSILON);
    Ok(RnEvaluation {
        value,
        mode: RnMode::FiniteSum,
        term_count: term_count as u64,
        error_estimate,
        geometric_ratios: ratios,
        precision_bits: bits_used,
        log_max_term: log_max,
    })
}

/// Arithmetic used by the multisum walk.
trait Field: Sync {
    type V: Clone + Send + Sync;
    type Acc: Send;
    type Scr;
    fn scratch(&self) -> Self::Scr;
    fn acc(&self) -> Self::Acc;
    fn one(&self) -> Self::V;
    /// `e(p/q)`.
    fn root(&self, p: i128, q: i128) -> Self::V;
    /// `1 - e(p/q)`.
    fn one_minus_root(&self, p: i128, q: i128) -> Self::V;
    fn recip(&self, v: &Self::V) -> Self::V;
    fn mul(&self, v: &mut Self::V, m: &Self::V, s: &mut Self::Scr);
    fn assign(&self, dst: &mut Self::V, src: &Self::V);
    fn add(&self, acc: &mut Self::Acc, v: &Self::V);
    fn merge(&self, into: &mut Self::Acc, other: Self::Acc);
    fn value(&self, acc: &Self::Acc) -> C64;
}

struct DoubleField;

impl Field for DoubleField {
    type V = C64;
    type Acc = NeumaierSum;
    type Scr = ();
    fn scratch(&self) {}
    fn acc(&self) -> NeumaierSum {
        NeumaierSum::new()
    }
    fn one(&self) -> C64 {
        C64::new(1.0, 0.0)
    }
    fn root(&self, p: i128, q: i128) -> C64 {
        crate::numerics::e_frac(p, q)
    }
    fn one_minus_root(&self, p: i128, q: i128) -> C64 {
        one_minus_e_frac(p, q)
    }
    fn recip(&self, v: &C64) -> C64 {
        v.inv()
    }
    fn mul(&self, v: &mut C64, m: &C64, _: &mut ()) {
        *v *= m;
    }
    fn assign(&self, dst: &mut C64, src: &C64) {
        *dst = *src;
    }
    fn add(&self, acc: &mut NeumaierSum, v: &C64) {
        acc.add(*v);
    }
    fn merge(&self, into: &mut NeumaierSum, other: NeumaierSum) {
        into.merge(&other);
    }
    fn value(&self, acc: &NeumaierSum) -> C64 {
        acc.value()
    }
}

struct MpField {
    prec: u32,
}

impl Field for MpField {
    type V = MpComplex;
    type Acc = MpComplex;
    type Scr = Scratch;
    fn scratch(&self) -> Scratch {
        Scratch::new(self.prec)
    }
    fn acc(&self) -> MpComplex {
        MpComplex::zero(self.prec)
    }
    fn one(&self) -> MpComplex {
        MpComplex::one(self.prec)
    }
    fn root(&self, p: i128, q: i128) -> MpComplex {
        MpComplex::e_frac(p, q, self.prec)
    }
    fn one_minus_root(&self, p: i128, q: i128) -> MpComplex {
        MpComplex::one_minus_e_frac(p, q, self.prec)
    }
    fn recip(&self, v: &MpComplex) -> MpComplex {
        v.recip()
    }
    fn mul(&self, v: &mut MpComplex, m: &MpComplex, s: &mut Scratch) {
        v.mul_assign(m, s);
    }
    fn assign(&self, dst: &mut MpComplex, src: &MpComplex) {
        dst.assign(src);
    }
    fn add(&self, acc: &mut MpComplex, v: &MpComplex) {
        acc.add_assign(v);
    }
    fn merge(&self, into: &mut MpComplex, other: MpComplex) {
        into.add_assign(&other);
    }
    fn value(&self, acc: &MpComplex) -> C64 {
        acc.to_c64()
    }
}

struct Plan {
    n: usize,
    k: i128,
    h: i128,
    alpha: Vec<i128>,
    beta: Vec<i128>,
}

impl Plan {
    /// `(p, q)` with `x_j^{sign} zeta^e = e(p/q)`.
    fn pole_args(&self, j: usize, e: i128, sign: i128) -> (i128, i128) {
        let (a, b) = (self.alpha[j], self.beta[j]);
        (sign * a * self.k + self.h * e * b, b * self.k)
    }

    /// `A_j(e) = 1/((1 - x_j zeta^e)(1 - zeta^e/x_j))` for `e = 0..k`.
    fn a_table<F: Field>(&self, f: &F, j: usize) -> Vec<F::V> {
        let mut s = f.scratch();
        (0..self.k)
            .map(|e| {
                let (p1, q) = self.pole_args(j, e, 1);
                let (p2, _) = self.pole_args(j, e, -1);
                let mut d = f.one_minus_root(p1, q);
                f.mul(&mut d, &f.one_minus_root(p2, q), &mut s);
                f.recip(&d)
            })
            .collect()
    }

    /// `M_j[r]`: factor applied when `m_j` grows by one at old total `S`,
    /// `S = r (mod k)`, all deeper indices zero.
    fn multipliers<F: Field>(&self, f: &F) -> (F::V, Vec<Vec<F::V>>) {
        let n = self.n;
        let k = self.k as usize;
        let a: Vec<Vec<F::V>> = (0..n).map(|j| self.a_table(f, j)).collect();
        let mut s = f.scratch();
        let mut init = f.root(self.h * n as i128, self.k);
        for aj in &a {
            f.mul(&mut init, &aj[1 % k], &mut s);
        }
        let ratio: Vec<Vec<F::V>> = a
            .iter()
            .map(|aj| {
                (0..k)
                    .map(|r| {
                        let mut v = aj[(r + 1) % k].clone();
                        f.mul(&mut v, &f.recip(&aj[r]), &mut s);
                        v
                    })
                    .collect()
            })
            .collect();
        let tables = (0..n)
            .map(|j| {
                (0..k)
                    .map(|r| {
                        let expo = (2 * r + 1 + (n - 1 - j)) as i128;
                        let mut v = f.root(self.h * expo, self.k);
                        f.mul(&mut v, &a[j][(r + 1) % k], &mut s);
                        for rj in ratio.iter().skip(j + 1) {
                            f.mul(&mut v, &rj[r], &mut s);
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        (init, tables)
    }

    /// Largest log-modulus of a summand and the log of the sum of moduli.
    fn magnitudes(&self) -> (f64, f64) {
        let (init, tables) = self.multipliers(&DoubleField);
        let logs: Vec<Vec<f64>> = tables
            .iter()
            .map(|t| t.iter().map(|v| v.norm().ln()).collect())
            .collect();
        let k = self.k as usize;
        let mut lead = Vec::with_capacity(k);
        let mut l = init.norm().ln();
        for m1 in 1..=k {
            lead.push(l);
            l += logs[0][m1 % k];
        }
        let parts: Vec<(f64, f64)> = lead
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut st = LogSum::default();
                for (i, &l1) in chunk.iter().enumerate() {
                    let m1 = c * CHUNK + i + 1;
                    self.walk_logs(&logs, 1, m1, l1, &mut st);
                }
                (st.max, st.sum)
            })
            .collect();
        let max = parts.iter().fold(f64::NEG_INFINITY, |a, p| a.max(p.0));
        let total: f64 = parts.iter().map(|&(m, s)| s * (m - max).exp()).sum();
        (max, max + total.ln())
    }

    fn walk_logs(&self, logs: &[Vec<f64>], j: usize, s: usize, l: f64, st: &mut LogSum) {
        let k = self.k as usize;
        let (mut l, mut s) = (l, s);
        for mj in 0..k {
            if j + 1 == self.n {
                st.push(l);
            } else {
                self.walk_logs(logs, j + 1, s, l, st);
            }
            if mj + 1 < k {
                l += logs[j][s % k];
                s += 1;
            }
        }
    }

    /// The finite multisum.
    fn run<F: Field>(&self, f: &F) -> C64 {
        let (init, tables) = self.multipliers(f);
        let k = self.k as usize;
        let mut s = f.scratch();
        let mut lead = Vec::with_capacity(k);
        let mut t = init;
        for m1 in 1..=k {
            lead.push(t.clone());
            f.mul(&mut t, &tables[0][m1 % k], &mut s);
        }
        let parts: Vec<F::Acc> = lead
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut acc = f.acc();
                let mut s = f.scratch();
                let mut buf: Vec<F::V> = vec![f.one(); self.n];
                for (i, t1) in chunk.iter().enumerate() {
                    let m1 = c * CHUNK + i + 1;
                    f.assign(&mut buf[1], t1);
                    self.walk(f, &tables, 1, m1, &mut buf, &mut acc, &mut s);
                }
                acc
            })
            .collect();
        let mut total = f.acc();
        for p in parts {
            f.merge(&mut total, p);
        }
        f.value(&total)
    }

    /// Sums the subtree below level `j`, whose running summand `buf[j]` has
    /// been set by the caller for `m_j = 0` at total `s`.
    #[allow(clippy::too_many_arguments)]
    fn walk<F: Field>(
        &self,
        f: &F,
        tables: &[Vec<F::V>],
        j: usize,
        s: usize,
        buf: &mut [F::V],
        acc: &mut F::Acc,
        scr: &mut F::Scr,
    ) {
        let k = self.k as usize;
        let mut s = s;
        for mj in 0..k {
            if j + 1 == self.n {
                f.add(acc, &buf[j]);
            } else {
                let (a, b) = buf.split_at_mut(j + 1);
                f.assign(&mut b[0], &a[j]);
                self.walk(f, tables, j + 1, s, buf, acc, scr);
            }
            if mj + 1 < k {
                f.mul(&mut buf[j], &tables[j][s % k], scr);
                s += 1;
            }
        }
    }
}

#[derive(Default)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn push(&mut self, l: f64) {
        if self.sum == 0.0 {
            self.max = l;
            self.sum = 1.0;
        } else if l <= self.max {
            self.sum += (l - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - l).exp() + 1.0;
            self.max = l;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::e;

    fn zeta() -> RootVector {
        RootVector::parse("1/4,1/5").unwrap()
    }

    #[test]
    fn pinned_value_at_one_third() {
        let r = rn_finite_sum(&zeta(), &QuantumRational::new(1, 3).unwrap()).unwrap();
        let want = C64::new(2.045_084_971_874_737, -2.062_843_076_693_681);
        assert!((r.value - want).norm() < 1e-13, "{}", r.value);
        assert_eq!(r.term_count, 9);
        assert_eq!(r.mode, RnMode::FiniteSum);
        assert!(r.geometric_ratios.iter().all(|&g| g < 1.0));
    }

    #[test]
    fn rejects_points_outside_the_quantum_set() {
        let err = rn_finite_sum(&zeta(), &QuantumRational::new(1, 5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(err.to_string().contains("beta_2 divides k"));
    }

    #[test]
    fn depends_on_h_mod_k_only() {
        for (h, k) in [(1, 3), (2, 7), (-3, 11)] {
            let a = rn_finite_sum(&zeta(), &QuantumRational::new(h, k).unwrap()).unwrap();
            let b = rn_finite_sum(&zeta(), &QuantumRational::new(h + 5 * k, k).unwrap()).unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn double_and_multiprecision_agree_where_both_apply() {
        let x = QuantumRational::new(2, 7).unwrap();
        let d = rn_finite_sum_with(
            &zeta(),
            &x,
            &FiniteSumOptions {
                precision: Precision::Double,
                ..Default::default()
            },
        )
        .unwrap();
        let m = rn_finite_sum_with(
            &zeta(),
            &x,
            &FiniteSumOptions {
                precision: Precision::Bits(200),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (d.value - m.value).norm() <= d.error_estimate + 1e-14,
            "{} vs {}",
            d.value,
            m.value
        );
        assert!(m.error_estimate < 1e-14);
    }

    #[test]
    fn automatic_precision_switches_for_large_k() {
        let x = QuantumRational::new(-1, 43).unwrap();
        let r = rn_finite_sum(&zeta(), &x).unwrap();
        let m = rn_finite_sum_with(
            &zeta(),
            &x,
            &FiniteSumOptions {
                precision: Precision::Bits(r.precision_bits + 64),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.value - m.value).norm() < 1e-12 * r.value.norm().max(1.0));
        assert!(r.error_estimate < 1e-12 * r.value.norm().max(1.0));
    }

    #[test]
    fn three_roots() {
        // n = 3 exercises the interior levels of the walk; the value must match
        // a direct double-precision evaluation with a different summation order.
        let z = RootVector::parse("1/4,1/5,1/7").unwrap();
        let x = QuantumRational::new(1, 3).unwrap();
        let r = rn_finite_sum(&z, &x).unwrap();
        assert_eq!(r.term_count, 27);
        let q = e(1.0 / 3.0);
        let xs: Vec<C64> = (0..3).map(|j| z.x(j)).collect();
        let mut total = C64::new(0.0, 0.0);
        for m1 in 1..=3usize {
            for m2 in 0..3usize {
                for m3 in 0..3usize {
                    let s = m1 + m2 + m3;
                    let mut t = q.powu((s * s + (m1 + m2) + m1) as u32);
                    for i in 1..=m1 {
                        t /= (1.0 - xs[0] * q.powu(i as u32)) * (1.0 - q.powu(i as u32) / xs[0]);
                    }
                    for i in m1..=m1 + m2 {
                        t /= (1.0 - xs[1] * q.powu(i as u32)) * (1.0 - q.powu(i as u32) / xs[1]);
                    }
                    for i in m1 + m2..=s {
                        t /= (1.0 - xs[2] * q.powu(i as u32)) * (1.0 - q.powu(i as u32) / xs[2]);
                    }
                    total += t;
                }
            }
        }
        let pre: f64 = (0..3)
            .map(|j| 1.0 / (1.0 - 1.0 / (1.0 - xs[j].powu(3)).norm_sqr()))
            .product();
        assert!((r.value - pre * total).norm() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_the_result() {
        let x = QuantumRational::new(3, 37).unwrap();
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| rn_finite_sum(&zeta(), &x).unwrap().value)
        };
        assert_eq!(run(1), run(3));
    }
}
