//! Seeded residual batteries for the transformation laws of theta, `R`,
//! `g_{a,b}`, the Mordell integral, the completed Appell function and eta.
//!
//! Residuals are relative: `|lhs - rhs| / max(1, |lhs|, |rhs|)`.

use crate::error::Result;
use crate::modular::{chi_eta, chi_legendre, eta_transform_check, SL2Matrix};
use crate::numerics::{e, pow_principal, QuadOptions, UHPoint, C64, I};
use crate::quantumset::random_word;
use crate::zwegers::{
    a3hat_elliptic_sides, g_ab, mordell_h_quad, mordell_period_residual, script_r3,
    script_r3_unshifted, theta, theta_product, zwegers_r,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Tolerance for identities between series.
pub const SERIES_TOL: f64 = 1e-8;
/// Tolerance for identities involving a quadrature.
pub const QUADRATURE_TOL: f64 = 1e-7;
pub const CHI_TOL: f64 = 1e-12;
pub const ETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub identity: String,
    pub point: usize,
    pub tau: [f64; 2],
    pub residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Battery {
    pub name: String,
    pub seed: u64,
    pub points: usize,
    pub rows: Vec<ResidualRow>,
    pub max_residual: f64,
    pub failures: usize,
}

impl Battery {
    fn new(name: &str, seed: u64, points: usize, rows: Vec<ResidualRow>) -> Self {
        let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        let failures = rows.iter().filter(|r| !(r.residual <= r.tol)).count();
        Battery {
            name: name.to_string(),
            seed,
            points,
            rows,
            max_residual,
            failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// One randomized sample: `tau` with `Re tau in [-1/2, 1/2]`,
/// `Im tau in [0.5, 2]`, elliptic variables with `|Im| <= Im tau / 2`,
/// and characteristics `a, b in (-0.45, 0.45)`.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint {
    pub tau: C64,
    pub u: C64,
    pub v: C64,
    pub a: f64,
    pub b: f64,
}

pub fn sample_points(seed: u64, count: usize) -> Vec<SamplePoint> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let y = rng.gen_range(0.5..=2.0);
            let tau = C64::new(rng.gen_range(-0.5..=0.5), y);
            let ell = |rng: &mut ChaCha8Rng| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5 * y..0.5 * y))
            };
            let u = ell(&mut rng);
            let v = ell(&mut rng);
            SamplePoint {
                tau,
                u,
                v,
                a: rng.gen_range(-0.45..0.45),
                b: rng.gen_range(-0.45..0.45),
            }
        })
        .collect()
}

fn rel(lhs: C64, rhs: C64) -> f64 {
    (lhs - rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm())
}

fn row(identity: &str, point: usize, tau: C64, residual: f64, tol: f64) -> ResidualRow {
    ResidualRow {
        identity: identity.to_string(),
        point,
        tau: [tau.re, tau.im],
        residual,
        tol,
    }
}

fn zwegers_rows(i: usize, p: &SamplePoint) -> Result<Vec<ResidualRow>> {
    let SamplePoint { tau, u, a, b, .. } = *p;
    let mut out = Vec::new();
    let mut push =
        |name: &str, l: C64, r: C64, tol: f64| out.push(row(name, i, tau, rel(l, r), tol));

    let th = theta(u, tau)?;
    push(
        "theta(u+1) = -theta(u)",
        theta(u + 1.0, tau)?,
        -th,
        SERIES_TOL,
    );
    push(
        "theta(u+tau) = -exp(-pi i tau - 2 pi i u) theta(u)",
        theta(u + tau, tau)?,
        -(-PI * I * tau - 2.0 * PI * I * u).exp() * th,
        SERIES_TOL,
    );
    push(
        "theta series = product",
        th,
        theta_product(u, tau)?,
        SERIES_TOL,
    );

    let r = zwegers_r(u, tau)?;
    push("R(u+1) = -R(u)", zwegers_r(u + 1.0, tau)?, -r, SERIES_TOL);
    push(
        "R(u) + exp(-2 pi i u - pi i tau) R(u+tau) = 2 exp(-pi i u - pi i tau/4)",
        r + (-2.0 * PI * I * u - PI * I * tau).exp() * zwegers_r(u + tau, tau)?,
        2.0 * (-PI * I * u - 0.25 * PI * I * tau).exp(),
        SERIES_TOL,
    );
    push("R(u) = R(-u)", r, zwegers_r(-u, tau)?, SERIES_TOL);
    push(
        "R(u; tau+1) = exp(-pi i/4) R(u; tau)",
        zwegers_r(u, tau + 1.0)?,
        (-0.25 * PI * I).exp() * r,
        SERIES_TOL,
    );
    let h = mordell_h_quad(u, tau, &QuadOptions::with_tol(1e-12))?.value;
    push(
        "(-i tau)^(-1/2) exp(pi i u^2/tau) R(u/tau; -1/tau) + R(u; tau) = h(u; tau)",
        pow_principal(-I * tau, -0.5)
            * (PI * I * u * u / tau).exp()
            * zwegers_r(u / tau, -1.0 / tau)?
            + r,
        h,
        QUADRATURE_TOL,
    );

    let g = g_ab(a, b, tau)?;
    push("g_{a+1,b} = g_{a,b}", g_ab(a + 1.0, b, tau)?, g, SERIES_TOL);
    push(
        "g_{a,b+1} = e(a) g_{a,b}",
        g_ab(a, b + 1.0, tau)?,
        e(a) * g,
        SERIES_TOL,
    );
    push(
        "g_{a,b}(tau+1) = exp(-pi i a(a+1)) g_{a,a+b+1/2}(tau)",
        g_ab(a, b, tau + 1.0)?,
        (-PI * I * a * (a + 1.0)).exp() * g_ab(a, a + b + 0.5, tau)?,
        SERIES_TOL,
    );
    push(
        "g_{a,b}(-1/tau) = i e(ab) (-i tau)^(3/2) g_{b,-a}(tau)",
        g_ab(a, b, -1.0 / tau)?,
        I * e(a * b) * pow_principal(-I * tau, 1.5) * g_ab(b, -a, tau)?,
        SERIES_TOL,
    );
    for m in -2i32..=2 {
        let mf = f64::from(m);
        push(
            &format!("g_{{a,b}} = e({m}a) g_{{a,b-({m})}}"),
            g,
            e(mf * a) * g_ab(a, b - mf, tau)?,
            SERIES_TOL,
        );
    }
    let opts = QuadOptions::with_tol(1e-10);
    let (res, _) = mordell_period_residual(a, b, tau, &opts)?;
    let h_ab = mordell_h_quad(a * tau - b, tau, &opts)?.value;
    out.push(row(
        "h(a tau - b) = -e(a^2 tau/2 - a(b+1/2)) int_0^{i inf} g_{a+1/2,b+1/2}(rho)/sqrt(-i(rho+tau)) d rho",
        i,
        tau,
        res / 1f64.max(h_ab.norm()),
        QUADRATURE_TOL,
    ));
    Ok(out)
}

fn appell_rows(i: usize, p: &SamplePoint) -> Result<Vec<ResidualRow>> {
    let SamplePoint { tau, u, v, .. } = *p;
    let mut out = vec![row(
        "R_3 shifted form = unshifted form",
        i,
        tau,
        rel(script_r3(u, v, tau)?, script_r3_unshifted(u, v, tau)?),
        SERIES_TOL,
    )];
    for n1 in -1..=1 {
        for n2 in -1..=1 {
            for m1 in -1..=1 {
                for m2 in -1..=1 {
                    let (l, r) = a3hat_elliptic_sides(u, v, tau, n1, n2, m1, m2)?;
                    out.push(row(
                        &format!("A_3-hat elliptic law (n1,n2,m1,m2)=({n1},{n2},{m1},{m2})"),
                        i,
                        tau,
                        rel(l, r),
                        SERIES_TOL,
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn run(
    name: &str,
    seed: u64,
    count: usize,
    f: fn(usize, &SamplePoint) -> Result<Vec<ResidualRow>>,
) -> Result<Battery> {
    let points = sample_points(seed, count);
    let rows: Vec<Vec<ResidualRow>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| f(i, p))
        .collect::<Result<_>>()?;
    Ok(Battery::new(name, seed, count, rows.concat()))
}

/// Theta, `R`, `g_{a,b}` and Mordell-integral identities at `count` points.
pub fn zwegers_battery(seed: u64, count: usize) -> Result<Battery> {
    run("zwegers", seed, count, zwegers_rows)
}

/// Both forms of `R_3` and the elliptic law of `A_3-hat` for all shifts
/// with entries in `{-1, 0, 1}`.
pub fn appell_battery(seed: u64, count: usize) -> Result<Battery> {
    run("appell", seed, count, appell_rows)
}

/// `chi_eta = chi_legendre` on `words` random words of length `<= 8` in
/// `S_l^{+-1}, T^{+-1}`, then the eta transformation law on a
/// `matrices x taus` grid. The grid uses `S_l`, `T` and random matrices
/// with `1 <= c <= 40`: long words push `gamma tau` within `1e-13` of the
/// real axis, where eta cannot be evaluated in double precision.
pub fn eta_battery(
    seed: u64,
    ell: i64,
    words: usize,
    matrices: usize,
    taus: usize,
) -> Result<Battery> {
    let mut rows: Vec<ResidualRow> = (0..words)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let w = random_word(&mut rng, 8, ell, true);
            let m = w.to_matrix();
            let res = (chi_eta(&m) - chi_legendre(&m)?).norm();
            Ok(row(
                &format!("chi_eta = chi_legendre on {w}"),
                i,
                C64::new(0.0, 0.0),
                res,
                CHI_TOL,
            ))
        })
        .collect::<Result<_>>()?;

    let mut gammas = vec![SL2Matrix::s_ell(ell), SL2Matrix::t()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    while gammas.len() < matrices {
        let c: i64 = rng.gen_range(1..=40);
        let d: i64 = rng.gen_range(-40..=40);
        if num_integer::gcd(c, d) != 1 {
            continue;
        }
        // a d - b c = 1 from the extended gcd, then a random translate
        let ext = num_integer::Integer::extended_gcd(&d, &c);
        let (a0, b0) = (ext.x, -ext.y);
        let t: i64 = rng.gen_range(-3..=3);
        gammas.push(SL2Matrix::new(a0 + t * c, b0 + t * d, c, d)?);
    }
    gammas.truncate(matrices);
    let points: Vec<UHPoint> = sample_points(seed, taus)
        .iter()
        .map(|p| UHPoint::new(p.tau))
        .collect::<Result<_>>()?;
    let points = &points;
    let grid: Vec<ResidualRow> = gammas
        .par_iter()
        .enumerate()
        .flat_map_iter(|(gi, g)| {
            points.iter().enumerate().map(move |(ti, &t)| {
                let res = eta_transform_check(g, t)?;
                Ok(row(
                    &format!("eta transform, gamma = {g}"),
                    gi * points.len() + ti,
                    t.tau(),
                    res,
                    ETA_TOL,
                ))
            })
        })
        .collect::<Result<_>>()?;
    rows.extend(grid);
    Ok(Battery::new("eta", seed, words + matrices * taus, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let a = sample_points(7, 5);
        let b = sample_points(7, 5);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.tau, q.tau);
            assert!((0.5..=2.0).contains(&p.tau.im));
            assert!(p.u.im.abs() <= 0.5 * p.tau.im);
        }
    }

    #[test]
    fn small_batteries_pass() {
        assert!(zwegers_battery(1, 2).unwrap().passed());
        assert!(appell_battery(1, 1).unwrap().passed());
        let eta = eta_battery(1, 2400, 10, 3, 2).unwrap();
        assert!(
            eta.passed(),
            "{:?}",
            eta.rows.iter().find(|r| r.residual > r.tol)
        );
        assert_eq!(eta.rows.len(), 16);
    }
}
