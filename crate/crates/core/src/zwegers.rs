//! Jacobi theta, Zwegers' `R`, the Mordell integral, unary theta functions
//! `g_{a,b}`, and the level 3 Appell function with its completion.

use crate::error::{Error, Result};
use crate::numerics::{
    erfc_pi, pow_principal, quad_gaussian_line, quad_vertical_ray, sqrt_principal, NeumaierSum,
    QuadOptions, Quadrature, UHPoint, C64, I,
};
use std::f64::consts::PI;

const REL_TOL: f64 = 1e-17;
const CONSECUTIVE: usize = 5;
const MAX_TERMS: i64 = 10_000_000;

/// Sums `term(n)` outward from `center` in both directions, stopping on each
/// side after five consecutive terms below `rel * max(|term| seen, |sum|)`.
pub(crate) fn bilateral_sum(
    center: i64,
    mut term: impl FnMut(i64) -> C64,
    rel: f64,
) -> Result<C64> {
    let mut acc = NeumaierSum::new();
    let first = term(center);
    acc.add(first);
    let mut peak = first.norm();
    for dir in [1i64, -1] {
        let mut small = 0;
        let mut n = center;
        loop {
            n += dir;
            if (n - center).abs() > MAX_TERMS {
                return Err(Error::Precision(format!(
                    "bilateral series did not settle within {MAX_TERMS} terms"
                )));
            }
            let t = term(n);
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(Error::Precision(format!("non-finite term at index {n}")));
            }
            acc.add(t);
            let m = t.norm();
            peak = peak.max(m);
            if m <= rel * peak.max(acc.value().norm()) {
                small += 1;
                if small >= CONSECUTIVE {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
    Ok(acc.value())
}

fn check_tau(tau: C64) -> Result<()> {
    UHPoint::new(tau).map(|_| ())
}

/// `theta(u; tau) = sum_{nu in 1/2 + Z} exp(pi i nu^2 tau + 2 pi i nu (u + 1/2))`.
pub fn theta(u: C64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let center = (-u.im / tau.im - 0.5).round() as i64;
    bilateral_sum(
        center,
        |n| {
            let nu = n as f64 + 0.5;
            (PI * I * (nu * nu * tau + 2.0 * nu * (u + 0.5))).exp()
        },
        REL_TOL,
    )
}

/// Product form `-i e^{pi i tau/4} e^{-pi i u} prod (1-q^m)(1-e(u)q^{m-1})(1-e(-u)q^m)`.
pub fn theta_product(u: C64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let q = (2.0 * PI * I * tau).exp();
    let z = (2.0 * PI * I * u).exp();
    let zi = 1.0 / z;
    let scale = 1.0f64.max(z.norm()).max(zi.norm());
    let mut prod = C64::new(1.0, 0.0);
    let mut qm1 = C64::new(1.0, 0.0);
    for m in 1.. {
        let qm = qm1 * q;
        prod *= (1.0 - qm) * (1.0 - z * qm1) * (1.0 - zi * qm);
        if qm.norm() * scale < 1e-18 {
            break;
        }
        if m > MAX_TERMS {
            return Err(Error::Precision("theta product did not converge".into()));
        }
        qm1 = qm;
    }
    Ok(-I * (PI * I * tau / 4.0).exp() * (-PI * I * u).exp() * prod)
}

/// `ln erfc(t)` for `t >= 0`, switching to the asymptotic series where
/// `erfc` underflows.
fn ln_erfc(t: f64) -> f64 {
    if t < 25.0 {
        libm::erfc(t).ln()
    } else {
        let t2 = t * t;
        -t2 - t.ln() - 0.5 * PI.ln()
            + (1.0 - 0.5 / t2 + 0.75 / (t2 * t2) - 1.875 / (t2 * t2 * t2)).ln()
    }
}

/// Zwegers' `R(u; tau)`.
pub fn zwegers_r(u: C64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let y = tau.im;
    let a = u.im / y;
    let root = (2.0 * y).sqrt();
    let center = (-a - 0.5).round() as i64;
    bilateral_sum(
        center,
        |n| {
            let nu = n as f64 + 0.5;
            let x = (nu + a) * root;
            let sgn = nu.signum();
            // sgn(nu) - E(x) = sgn(nu) * (erfc(sqrt(pi)|x|)) when signs agree,
            // sgn(nu) * (2 - erfc(sqrt(pi)|x|)) otherwise
            let ln_factor = if x == 0.0 {
                0.0
            } else if x.signum() == sgn {
                ln_erfc(PI.sqrt() * x.abs())
            } else {
                (2.0 - erfc_pi(x.abs())).ln()
            };
            let expo = -PI * I * (nu * nu * tau + 2.0 * nu * u);
            let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let mag = (expo.re + ln_factor).exp();
            sgn * parity * mag * C64::cis(expo.im)
        },
        REL_TOL,
    )
}

/// Mordell integral `h(u; tau) = int_R exp(pi i tau t^2 - 2 pi u t)/cosh(pi t) dt`.
pub fn mordell_h_quad(u: C64, tau: C64, opts: &QuadOptions) -> Result<Quadrature> {
    check_tau(tau)?;
    quad_gaussian_line(
        |t| {
            let at = PI * t.abs();
            let ln_cosh = at + (0.5 * (1.0 + (-2.0 * at).exp())).ln();
            (PI * I * tau * t * t - 2.0 * PI * u * t - ln_cosh).exp()
        },
        opts,
    )
}

pub fn mordell_h(u: C64, tau: C64) -> Result<C64> {
    Ok(mordell_h_quad(u, tau, &QuadOptions::with_tol(1e-12))?.value)
}

/// `g_{a,b}(tau) = sum_{nu in a + Z} nu exp(pi i nu^2 tau + 2 pi i nu b)`, summed directly.
pub fn g_ab(a: f64, b: f64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let center = (-a).round() as i64;
    bilateral_sum(
        center,
        |n| {
            let nu = a + n as f64;
            nu * (PI * I * (nu * nu * tau + 2.0 * nu * b)).exp()
        },
        REL_TOL,
    )
}

/// `g_{a,b}(tau)` for any height: characteristics are reduced with
/// `g_{a+1,b} = g_{a,b}` and `g_{a,b} = e(ma) g_{a,b-m}`, `tau` is translated
/// into `|Re tau| <= 1/2` and inverted with `tau -> -1/tau` until its height
/// reaches `min_height`, and the series is summed there.
pub fn g_ab_reduced(a: f64, b: f64, tau: C64, min_height: f64) -> Result<C64> {
    check_tau(tau)?;
    let (mut a, mut b, mut tau) = (a, b, tau);
    let mut factor = C64::new(1.0, 0.0);
    for _ in 0..200 {
        let m = b.floor();
        factor *= (2.0 * PI * I * m * a).exp();
        b -= m;
        a -= a.floor();
        if tau.im >= min_height {
            return Ok(factor * g_ab(a, b, tau)?);
        }
        // g_{a,b}(tau) = e^{-pi i n a(a+1)} g_{a, b + n(a + 1/2)}(tau - n)
        let n = tau.re.round();
        if n != 0.0 {
            factor *= (-PI * I * n * a * (a + 1.0)).exp();
            b += n * (a + 0.5);
            tau -= n;
            let m = b.floor();
            factor *= (2.0 * PI * I * m * a).exp();
            b -= m;
        }
        if tau.norm_sqr() >= 1.0 {
            return Ok(factor * g_ab(a, b, tau)?);
        }
        // g_{a,b}(tau) = g_{a,b}(-1/tau') = i e(ab) (-i tau')^{3/2} g_{b,-a}(tau'), tau' = -1/tau
        let tp = -1.0 / tau;
        factor *= I * (2.0 * PI * I * a * b).exp() * pow_principal(-I * tp, 1.5);
        let (na, nb) = (b, -a);
        a = na;
        b = nb;
        tau = tp;
    }
    Err(Error::Precision(
        "modular reduction of g did not terminate".into(),
    ))
}

/// `A_3(u, v; tau) = e^{3 pi i u} sum_n (-1)^n q^{3n(n+1)/2} e(nv) / (1 - e(u) q^n)`.
pub fn appell_a3(u: C64, v: C64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let y = tau.im;
    let n_star = (-u.im / y).round();
    let w = u + n_star * tau;
    let off = w - w.re.round();
    if off.norm() < 1e-12 {
        return Err(Error::Singular(format!(
            "u = {u} lies on the lattice Z tau + Z (tau = {tau})"
        )));
    }
    let center = (-v.im / (3.0 * y) - 0.5).round() as i64;
    let sum = bilateral_sum(
        center,
        |n| {
            let nf = n as f64;
            let expo = 2.0 * PI * I * (1.5 * nf * (nf + 1.0) * tau + nf * v);
            let z = 2.0 * PI * I * (u + nf * tau);
            let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            if z.re <= 0.0 {
                parity * expo.exp() / (1.0 - z.exp())
            } else {
                // 1/(1 - w) = -w^{-1}/(1 - w^{-1}) keeps large |w| from overflowing
                -parity * (expo - z).exp() / (1.0 - (-z).exp())
            }
        },
        REL_TOL,
    )?;
    Ok((3.0 * PI * I * u).exp() * sum)
}

/// `R_3(u, v; tau) = (i/2) sum_{j=0}^2 e(ju) theta(v + j tau + 1; 3 tau) R(3u - v - j tau - 1; 3 tau)`.
pub fn script_r3(u: C64, v: C64, tau: C64) -> Result<C64> {
    script_r3_form(u, v, tau, 1.0)
}

/// The same sum without the `+-1` shifts; equal to `script_r3` by the
/// quasi-periodicity of `theta` and `R`.
pub fn script_r3_unshifted(u: C64, v: C64, tau: C64) -> Result<C64> {
    script_r3_form(u, v, tau, 0.0)
}

fn script_r3_form(u: C64, v: C64, tau: C64, shift: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..3 {
        let jf = j as f64;
        let th = theta(v + jf * tau + shift, 3.0 * tau)?;
        let r = zwegers_r(3.0 * u - v - jf * tau - shift, 3.0 * tau)?;
        acc += (2.0 * PI * I * jf * u).exp() * th * r;
    }
    Ok(0.5 * I * acc)
}

/// `A_3 + R_3`.
pub fn appell_a3_hat(u: C64, v: C64, tau: C64) -> Result<C64> {
    Ok(appell_a3(u, v, tau)? + script_r3(u, v, tau)?)
}

/// Both sides of the elliptic law of the completed Appell function at the
/// shift `(n1, n2, m1, m2)`.
pub fn a3hat_elliptic_sides(
    u: C64,
    v: C64,
    tau: C64,
    n1: i64,
    n2: i64,
    m1: i64,
    m2: i64,
) -> Result<(C64, C64)> {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let lhs = appell_a3_hat(u + n1f * tau + m1 as f64, v + n2f * tau + m2 as f64, tau)?;
    let sign = if (n1 + m1).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let phase = 2.0 * PI * I * (u * (3.0 * n1f - n2f) - v * n1f)
        + 2.0 * PI * I * tau * (1.5 * n1f * n1f - n1f * n2f);
    let rhs = sign * phase.exp() * appell_a3_hat(u, v, tau)?;
    Ok((lhs, rhs))
}

/// Absolute difference of the two sides of the elliptic law.
pub fn a3hat_elliptic_residual(
    u: C64,
    v: C64,
    tau: C64,
    n1: i64,
    n2: i64,
    m1: i64,
    m2: i64,
) -> Result<f64> {
    let (l, r) = a3hat_elliptic_sides(u, v, tau, n1, n2, m1, m2)?;
    Ok((l - r).norm())
}

/// `h(a tau - b; tau) + e(a^2 tau/2 - a(b + 1/2)) int_0^{i inf} g_{a+1/2,b+1/2}(rho) / sqrt(-i(rho + tau)) d rho`,
/// which vanishes for `a, b in (-1/2, 1/2)`.
pub fn mordell_period_residual(a: f64, b: f64, tau: C64, opts: &QuadOptions) -> Result<(f64, f64)> {
    if !(a.abs() < 0.5 && b.abs() < 0.5) {
        return Err(Error::Domain(format!(
            "a = {a}, b = {b} must lie in (-1/2, 1/2)"
        )));
    }
    let h = mordell_h_quad(a * tau - b, tau, opts)?;
    let integral = quad_vertical_ray(
        |rho| Ok(g_ab_reduced(a + 0.5, b + 0.5, rho, 0.5)? / sqrt_principal(-I * (rho + tau))),
        0.0,
        opts,
    )?;
    let pre = (2.0 * PI * I * (0.5 * a * a * tau - a * (b + 0.5))).exp();
    let residual = (h.value + pre * integral.value).norm();
    Ok((residual, h.error_estimate + integral.error_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn theta_examples() {
        let tau = c(0.0, 1.0);
        assert!(theta(c(0.0, 0.0), 3.0 * tau).unwrap().norm() < 1e-15);
        let u = c(0.3, 0.1);
        assert!((theta(u + 1.0, tau).unwrap() + theta(u, tau).unwrap()).norm() < 1e-14);
        let tau = c(0.2, 0.9);
        let lhs = theta(-2.0 * tau, 3.0 * tau).unwrap();
        let eta = crate::qseries::eta_value(UHPoint::new(tau).unwrap()).unwrap();
        let rhs = I * (2.0 * PI * I * tau * (-2.0 / 3.0)).exp() * eta;
        assert!((lhs - rhs).norm() < 1e-13);
        let u = c(-0.4, 0.25);
        assert!((theta(u, tau).unwrap() - theta_product(u, tau).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn r_examples() {
        let tau = c(0.0, 1.0);
        let u = c(0.17, 0.05);
        assert!((zwegers_r(u + 1.0, tau).unwrap() + zwegers_r(u, tau).unwrap()).norm() < 1e-13);
        let u = c(0.3, -0.2);
        let t2 = c(0.1, 0.8);
        assert!((zwegers_r(-u, t2).unwrap() - zwegers_r(u, t2).unwrap()).norm() < 1e-13);
        let u = c(0.2, 0.1);
        let lhs = zwegers_r(u, tau).unwrap()
            + (-2.0 * PI * I * u - PI * I * tau).exp() * zwegers_r(u + tau, tau).unwrap();
        let rhs = 2.0 * (-PI * I * u - PI * I * tau / 4.0).exp();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn r_far_from_real_axis_does_not_overflow() {
        let v = zwegers_r(c(0.1, 9.0), c(0.0, 0.6)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn mordell_examples() {
        let tau = c(0.0, 1.0);
        assert!(
            (mordell_h(c(0.4, 0.0), tau).unwrap() - mordell_h(c(-0.4, 0.0), tau).unwrap()).norm()
                < 1e-12
        );
        let u = c(0.1, 0.2);
        let tau = c(0.3, 1.1);
        let lhs = (PI * I * u * u / tau).exp() / sqrt_principal(-I * tau)
            * zwegers_r(u / tau, -1.0 / tau).unwrap()
            + zwegers_r(u, tau).unwrap();
        assert!((lhs - mordell_h(u, tau).unwrap()).norm() < 1e-8);
        let (res, _) =
            mordell_period_residual(0.2, 1.0 / 7.0, c(0.0, 1.0), &QuadOptions::with_tol(1e-11))
                .unwrap();
        assert!(res < 1e-7, "{res}");
    }

    #[test]
    fn g_examples() {
        let tau = c(0.0, 1.0);
        let (a, b) = (1.0 / 3.0, 0.25);
        let g = g_ab(a, b, tau).unwrap();
        assert!((g_ab(a + 1.0, b, tau).unwrap() - g).norm() < 1e-14);
        assert!((g_ab(a, b + 1.0, tau).unwrap() - (2.0 * PI * I * a).exp() * g).norm() < 1e-14);
        let (a, b) = (5.0 / 6.0, 0.5 - 0.6);
        let tau = c(0.2, 0.7);
        let lhs = g_ab(a, b, -1.0 / tau).unwrap();
        let rhs = I
            * (2.0 * PI * I * a * b).exp()
            * pow_principal(-I * tau, 1.5)
            * g_ab(b, -a, tau).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        for m in -2..=2 {
            let mf = m as f64;
            let shifted = (2.0 * PI * I * mf * a).exp() * g_ab(a, b - mf, tau).unwrap();
            assert!((shifted - g_ab(a, b, tau).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn reduced_g_matches_direct_series() {
        for (a, b, tau) in [
            (5.0 / 6.0, 0.5 - 0.75, c(0.37, 0.12)),
            (1.0 / 6.0, 0.5 - 0.6, c(-0.21, 0.05)),
            (0.3, 0.9, c(1.7, 0.2)),
        ] {
            let direct = g_ab(a, b, tau).unwrap();
            let reduced = g_ab_reduced(a, b, tau, 0.5).unwrap();
            assert!(
                (direct - reduced).norm() <= 1e-11 * direct.norm().max(1.0),
                "{a} {b} {tau}"
            );
        }
    }

    #[test]
    fn appell_examples() {
        let tau = c(0.0, 1.0);
        assert!(matches!(
            appell_a3(tau, c(0.3, 0.0), tau),
            Err(Error::Singular(_))
        ));
        let u = c(0.2, 0.0);
        let v = -2.0 * tau;
        let a = appell_a3(u, v, tau).unwrap();
        // direct symmetric window of 80 terms as a truncation-stability oracle
        let mut window = C64::new(0.0, 0.0);
        for n in -40i64..=40 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            window += sign * (2.0 * PI * I * (1.5 * nf * (nf + 1.0) * tau + nf * v)).exp()
                / (1.0 - (2.0 * PI * I * (u + nf * tau)).exp());
        }
        window *= (3.0 * PI * I * u).exp();
        assert!((a - window).norm() < 1e-14);
        let f1 = script_r3(u, v, tau).unwrap();
        let f2 = script_r3_unshifted(u, v, tau).unwrap();
        assert!((f1 - f2).norm() < 1e-10);
        let zero_v = script_r3(u, c(0.0, 0.0), tau).unwrap()
            - script_r3_unshifted(u, c(0.0, 0.0), tau).unwrap();
        assert!(zero_v.norm() < 1e-10);
    }

    #[test]
    fn elliptic_law_examples() {
        let (u, v, tau) = (c(0.2, 0.01), c(0.3, 0.0), c(0.0, 1.0));
        assert_eq!(a3hat_elliptic_residual(u, v, tau, 0, 0, 0, 0).unwrap(), 0.0);
        assert!(a3hat_elliptic_residual(u, v, tau, 1, 0, 0, 0).unwrap() < 1e-8);
        assert!(a3hat_elliptic_residual(u, v, tau, 0, 1, 1, 0).unwrap() < 1e-8);
    }
}
