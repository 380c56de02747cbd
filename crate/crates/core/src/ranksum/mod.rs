//! `R_n(x; q)` as a multisum: formal q-expansions, values inside the unit
//! disk, exact finite sums at quantum rationals, radial limits, and the
//! Appell decomposition constants.

mod finite;
mod pidagger;

pub use finite::{rn_finite_sum, rn_finite_sum_with, FiniteSumOptions, Precision};
pub use pidagger::{default_taus, solve_pi_dagger, PiDaggerOptions, PiDaggerSolution};

use crate::error::{Error, Result};
use crate::numerics::{e_c, Coeff, NeumaierSum, TruncatedSeries, UHPoint, C64};
use crate::quantumset::{quantum_set_violation, QuantumRational, RootVector};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnMode {
    FiniteSum,
    TruncatedMultisum,
}

impl RnMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RnMode::FiniteSum => "finite-sum",
            RnMode::TruncatedMultisum => "truncated-multisum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnEvaluation {
    pub value: C64,
    pub mode: RnMode,
    pub term_count: u64,
    pub error_estimate: f64,
    /// `|((1 - x_j^k)(1 - x_j^{-k}))^{-1}|`, finite-sum mode only.
    pub geometric_ratios: Vec<f64>,
    /// Working precision in bits (53 for double precision).
    pub precision_bits: u32,
    /// Largest natural log of a term modulus, finite-sum mode only.
    pub log_max_term: f64,
}

/// Enumerates every multi-index of the `R_n` multisum with `m_1 >= 1`,
/// `m_j >= 0`, carrying the running summand.
///
/// `step(term, j, s)` returns the summand after `m_j` (0-based `j`) grows by
/// one while the deeper indices are zero and the total was `s`; `allow(j, m_j,
/// s)` decides whether `m_j` may take the value `m_j` with new total `s`.
fn walk<T: Clone>(
    n: usize,
    init: T,
    step: &impl Fn(&T, usize, usize) -> T,
    allow: &impl Fn(usize, usize, usize) -> bool,
    visit: &mut impl FnMut(&T, usize),
) {
    #[allow(clippy::too_many_arguments)]
    fn rec<T: Clone>(
        j: usize,
        n: usize,
        term: T,
        s: usize,
        m_first: usize,
        step: &impl Fn(&T, usize, usize) -> T,
        allow: &impl Fn(usize, usize, usize) -> bool,
        visit: &mut impl FnMut(&T, usize),
    ) {
        let mut t = term;
        let mut s = s;
        let mut m = m_first;
        loop {
            if j + 1 == n {
                visit(&t, s);
            } else {
                rec(j + 1, n, t.clone(), s, 0, step, allow, visit);
            }
            if !allow(j, m + 1, s + 1) {
                break;
            }
            t = step(&t, j, s);
            s += 1;
            m += 1;
        }
    }
    if allow(0, 1, 1) {
        rec(0, n, init, 1, 1, step, allow, visit);
    }
}

/// Formal `R_n(x; q)` through `q^order`. For `n = 1` the `m = 0` summand is
/// included.
pub fn rn_multisum_series<T: Coeff>(x: &[T], x_inv: &[T], order: usize) -> TruncatedSeries<T> {
    let n = x.len();
    assert!(n >= 1 && x_inv.len() == n);
    // initial summand: q^n / ((1 - x_1 q)(1 - q/x_1) prod_{j>=2} (1 - x_j q)(1 - q/x_j))
    let mut init = TruncatedSeries::monomial(T::one(), n, order);
    for j in 0..n {
        init.div_one_minus(&x[j], 1);
        init.div_one_minus(&x_inv[j], 1);
    }
    let step = |t: &TruncatedSeries<T>, j: usize, s: usize| {
        let mut t = t.shift(2 * s + 1 + (n - 1 - j));
        t.div_one_minus(&x[j], s + 1);
        t.div_one_minus(&x_inv[j], s + 1);
        for jp in j + 1..n {
            t.mul_one_minus(&x[jp], s);
            t.mul_one_minus(&x_inv[jp], s);
            t.div_one_minus(&x[jp], s + 1);
            t.div_one_minus(&x_inv[jp], s + 1);
        }
        t
    };
    // q-order of a summand is at least s^2
    let allow = |_: usize, _: usize, s: usize| s * s <= order;
    let mut total = if n == 1 {
        TruncatedSeries::one(order)
    } else {
        TruncatedSeries::zero(order)
    };
    walk(n, init, &step, &allow, &mut |t: &TruncatedSeries<T>, _| {
        total = total.add(t)
    });
    total
}

/// Complex-coefficient `R_n(x; q)` through `q^order`.
pub fn rn_multisum(x: &[C64], order: usize) -> Result<TruncatedSeries<C64>> {
    if x.is_empty() {
        return Err(Error::Domain("empty x vector".into()));
    }
    for (j, xj) in x.iter().enumerate() {
        if xj.norm() == 0.0 || !xj.re.is_finite() || !xj.im.is_finite() {
            return Err(Error::Singular(format!(
                "x_{} = {xj}: factor (q/x_{}; q) undefined",
                j + 1,
                j + 1
            )));
        }
    }
    let inv: Vec<C64> = x.iter().map(|v| v.inv()).collect();
    Ok(rn_multisum_series(x, &inv, order))
}

#[derive(Debug, Clone, Copy)]
pub struct MultisumOptions {
    /// Relative size of the largest summand in the outermost shell that is
    /// accepted as negligible.
    pub tol: f64,
    /// Cap on the total index `m_1 + ... + m_n`.
    pub max_total: usize,
}

impl Default for MultisumOptions {
    fn default() -> Self {
        MultisumOptions {
            tol: 1e-15,
            max_total: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultisumValue {
    pub value: C64,
    pub terms: u64,
    pub max_total: usize,
    /// Largest summand modulus with total index equal to the cutoff.
    pub tail_estimate: f64,
    /// Largest summand modulus overall; bounds the cancellation error.
    pub max_term: f64,
}

/// `R_n(x; q)` for `|q| < 1`, summing every multi-index with total at most
/// `S` and doubling `S` until the outermost shell is negligible.
pub fn rn_multisum_at(x: &[C64], q: C64, opts: &MultisumOptions) -> Result<MultisumValue> {
    let r = q.norm();
    if r >= 1.0 {
        return Err(Error::Domain(format!("|q| = {r} must be < 1")));
    }
    let powers = |count: usize| -> Vec<C64> {
        // q^e from a polar form so long products do not drift
        let (rho, phi) = q.to_polar();
        (0..count)
            .map(|e| C64::from_polar(rho.powi(e as i32), phi * e as f64))
            .collect()
    };
    let target = (opts.tol * 1e-3).ln();
    let mut s_max = if r == 0.0 {
        2
    } else {
        ((target / r.ln()).sqrt().ceil() as usize).max(4)
    };
    loop {
        if s_max > opts.max_total {
            return Err(Error::Resource(format!(
                "|q| = {r}: total index {s_max} exceeds the cap {}",
                opts.max_total
            )));
        }
        let qp = powers(2 * s_max + x.len() + 2);
        let v = multisum_with_powers(x, &qp, s_max)?;
        if v.tail_estimate <= opts.tol * v.value.norm().max(1e-300) || v.tail_estimate == 0.0 {
            return Ok(v);
        }
        s_max *= 2;
    }
}

fn multisum_with_powers(x: &[C64], qp: &[C64], s_max: usize) -> Result<MultisumValue> {
    let n = x.len();
    let xi: Vec<C64> = x.iter().map(|v| v.inv()).collect();
    let a = |j: usize, e: usize| 1.0 / ((1.0 - x[j] * qp[e]) * (1.0 - xi[j] * qp[e]));
    let mut init = qp[n];
    for j in 0..n {
        init *= a(j, 1);
    }
    let step = |t: &C64, j: usize, s: usize| {
        let mut m = qp[2 * s + 1 + (n - 1 - j)] * a(j, s + 1);
        for jp in j + 1..n {
            m *= a(jp, s + 1) / a(jp, s);
        }
        t * m
    };
    let allow = |_: usize, _: usize, s: usize| s <= s_max;
    let mut acc = NeumaierSum::new();
    if n == 1 {
        acc.add(C64::new(1.0, 0.0));
    }
    let mut terms = 0u64;
    let mut tail = 0.0f64;
    let mut max_term = 0.0f64;
    walk(n, init, &step, &allow, &mut |t: &C64, s| {
        acc.add(*t);
        terms += 1;
        let m = t.norm();
        max_term = max_term.max(m);
        if s == s_max {
            tail = tail.max(m);
        }
    });
    let value = acc.value();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Precision("multisum overflowed".into()));
    }
    Ok(MultisumValue {
        value,
        terms,
        max_total: s_max,
        tail_estimate: tail,
        max_term,
    })
}

/// `R_n(zeta; q)` at `q = e(tau)`.
pub fn rn_at_tau(zeta: &RootVector, tau: UHPoint, opts: &MultisumOptions) -> Result<MultisumValue> {
    let x: Vec<C64> = (0..zeta.n()).map(|j| zeta.x(j)).collect();
    rn_multisum_at(&x, tau.q(), opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub t: f64,
    pub value: C64,
    pub terms: u64,
    pub max_total: usize,
    pub tail_estimate: f64,
    pub max_term: f64,
}

/// `R_n(zeta; t e(h/k))` for each radius `t`.
pub fn radial_limit_probe(
    zeta: &RootVector,
    x: &QuantumRational,
    heights: &[f64],
) -> Result<Vec<ProbePoint>> {
    radial_limit_probe_with(
        zeta,
        x,
        heights,
        &MultisumOptions {
            tol: 1e-10,
            ..Default::default()
        },
    )
}

pub fn radial_limit_probe_with(
    zeta: &RootVector,
    x: &QuantumRational,
    heights: &[f64],
    opts: &MultisumOptions,
) -> Result<Vec<ProbePoint>> {
    let xs: Vec<C64> = (0..zeta.n()).map(|j| zeta.x(j)).collect();
    let phase = C64::cis(2.0 * PI * x.to_f64().fract());
    let mut out = Vec::with_capacity(heights.len());
    let mut last = 0.0;
    for &t in heights {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("radius {t} is not in (0, 1)")));
        }
        if t <= last {
            return Err(Error::Domain("radii must increase".into()));
        }
        last = t;
        let v = rn_multisum_at(&xs, t * phase, opts)?;
        out.push(ProbePoint {
            t,
            value: v.value,
            terms: v.terms,
            max_total: v.max_total,
            tail_estimate: v.tail_estimate,
            max_term: v.max_term,
        });
    }
    Ok(out)
}

/// `t_m = 1 - 2^{-m}`.
pub fn dyadic_heights(m_lo: u32, m_hi: u32) -> Vec<f64> {
    (m_lo..=m_hi).map(|m| 1.0 - 0.5f64.powi(m as i32)).collect()
}

/// `A_n(tau) = q^{-1/24} R_n(zeta; q)`.
pub fn a_n(tau: UHPoint, zeta: &RootVector) -> Result<C64> {
    let r = rn_at_tau(zeta, tau, &MultisumOptions::default())?;
    Ok(e_c(-tau.tau() / 24.0) * r.value)
}

/// `A_n(x) = e(-x/24) R_n(zeta; e(x))` from the finite sum.
pub fn a_n_at_rational(x: &QuantumRational, zeta: &RootVector) -> Result<C64> {
    if let Some(v) = quantum_set_violation(zeta, x) {
        return Err(Error::Domain(v.to_string()));
    }
    let r = rn_finite_sum(zeta, x)?;
    Ok(crate::numerics::e(-x.to_f64() / 24.0) * r.value)
}
