//! Least-squares fit of `(q)_inf R_n(zeta; q)` against the level three
//! Appell functions `A_3(u_j, -2 tau; tau)`.
//!
//! The fit carries one unknown per root plus a constant multiple of
//! `(q)_inf`: the Appell sums alone leave a residual of order one.

use super::{rn_at_tau, MultisumOptions};
use crate::error::{Error, Result};
use crate::numerics::{e, UHPoint, C64};
use crate::qseries::{pochhammer, PochLength};
use crate::quantumset::RootVector;
use crate::zwegers::appell_a3;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct PiDaggerOptions {
    pub held_out: Vec<UHPoint>,
    /// Largest accepted relative defect on the held-out points.
    pub threshold: f64,
    pub max_condition: f64,
}

impl Default for PiDaggerOptions {
    fn default() -> Self {
        let held_out = [(0.21, 0.55), (-0.37, 0.8), (0.05, 1.3), (0.44, 0.45)]
            .iter()
            .map(|&(re, im)| UHPoint::from_parts(re, im).expect("im > 0"))
            .collect();
        PiDaggerOptions {
            held_out,
            threshold: 1e-7,
            max_condition: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiDaggerSolution {
    /// Coefficient of `A_3(alpha_j/beta_j, -2 tau; tau)`.
    pub c: Vec<C64>,
    /// Coefficient of `(q)_inf`.
    pub offset: C64,
    /// `(e(-3u_j/2) - e(-u_j/2)) / c_j`.
    pub pi_dagger: Vec<C64>,
    /// Largest relative defect over the held-out points.
    pub residual: f64,
    pub sample_count: usize,
    pub condition: f64,
}

/// `count` points with real parts in `[-1/2, 1/2]` and heights in
/// `[0.4, 1.5]`, on a fixed low-discrepancy pattern.
pub fn default_taus(count: usize) -> Vec<UHPoint> {
    let g = 0.618_033_988_749_894_9;
    (0..count)
        .map(|i| {
            let a = ((i as f64 + 0.5) * g).fract();
            let b = (i as f64 + 0.5) / count as f64;
            UHPoint::from_parts(a - 0.5, 0.4 + 1.1 * b).expect("im > 0")
        })
        .collect()
}

/// Appell columns and the right-hand side `(q)_inf R_n` at one point.
fn sample(zeta: &RootVector, tau: UHPoint) -> Result<(Vec<C64>, C64)> {
    let t = tau.tau();
    let q = tau.q();
    let poch = pochhammer(q, q, PochLength::Infinite)?;
    let r = rn_at_tau(
        zeta,
        tau,
        &MultisumOptions {
            tol: 1e-16,
            max_total: 4000,
        },
    )?;
    let mut row = Vec::with_capacity(zeta.n() + 1);
    for j in 0..zeta.n() {
        row.push(appell_a3(C64::new(zeta.u_f64(j), 0.0), -2.0 * t, t)?);
    }
    row.push(poch);
    Ok((row, poch * r.value))
}

pub fn solve_pi_dagger(
    zeta: &RootVector,
    taus: &[UHPoint],
    opts: &PiDaggerOptions,
) -> Result<PiDaggerSolution> {
    let n = zeta.n();
    if taus.len() < 2 * n {
        return Err(Error::Domain(format!(
            "need at least {} samples, got {}",
            2 * n,
            taus.len()
        )));
    }
    for (i, a) in taus.iter().enumerate() {
        let im = a.tau().im;
        if !(0.4..=1.5).contains(&im) {
            return Err(Error::Domain(format!(
                "sample {} has height {im} outside [0.4, 1.5]",
                a.tau()
            )));
        }
        if taus[..i].iter().any(|b| (a.tau() - b.tau()).norm() < 1e-12) {
            return Err(Error::Domain(format!("sample {} repeated", a.tau())));
        }
    }
    let rows: Vec<(Vec<C64>, C64)> = taus
        .iter()
        .map(|&t| sample(zeta, t))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(rows.len(), n + 1, |i, j| rows[i].0[j]);
    let b = DVector::from_fn(rows.len(), |i, _| rows[i].1);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition <= opts.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let c: Vec<C64> = sol.iter().take(n).copied().collect();
    let offset = sol[n];

    let mut residual = 0.0f64;
    for &t in &opts.held_out {
        let (row, rhs) = sample(zeta, t)?;
        let terms: Vec<C64> = row.iter().zip(sol.iter()).map(|(a, x)| a * x).collect();
        let scale: f64 = terms.iter().map(|z| z.norm()).sum();
        let lhs: C64 = terms.iter().sum();
        residual = residual.max((lhs - rhs).norm() / scale.max(rhs.norm()));
    }
    if !(residual <= opts.threshold) {
        return Err(Error::Unusable {
            residual,
            threshold: opts.threshold,
        });
    }
    let pi_dagger = (0..n)
        .map(|j| {
            let u = zeta.u_f64(j);
            (e(-1.5 * u) - e(-0.5 * u)) / c[j]
        })
        .collect();
    Ok(PiDaggerSolution {
        c,
        offset,
        pi_dagger,
        residual,
        sample_count: taus.len(),
        condition,
    })
}
