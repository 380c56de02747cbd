//! `H_{n,S_l}` on the real line from theta period integrals.

use super::{check_s_ell_multiplier, f_alpha_beta};
use crate::error::{Error, Result};
use crate::numerics::{
    e, e_c, pow_principal, quad_vertical_ray, sqrt_principal, QuadOptions, Quadrature, C64, I,
};
use crate::quantumset::RootVector;
use crate::ranksum::PiDaggerSolution;
use crate::zwegers::g_ab_reduced;

#[derive(Debug, Clone, Copy)]
pub struct ClosedFormOptions {
    /// Absolute tolerance of each period integral.
    pub tol: f64,
    /// Theta series are summed only at heights at or above this; lower
    /// arguments are first mapped up with `tau -> -1/tau`.
    pub t_split: f64,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        ClosedFormOptions {
            tol: 1e-10,
            t_split: 0.5,
        }
    }
}

fn pole_check(ell: i64, x: C64) -> Result<()> {
    let w = ell as f64 * x + 1.0;
    if w.norm() < 1e-300 {
        return Err(Error::Pole(format!("x = -1/{ell}")));
    }
    Ok(())
}

/// `E_1(alpha/beta, l; x) = (l x + 1)^{1/2} zeta_24^l e(-x/24) e(3u/2) - e(-S_l x/24) e(3u/2)`.
pub fn mathcal_e1(u: f64, ell: i64, x: C64) -> Result<C64> {
    pole_check(ell, x)?;
    let w = ell as f64 * x + 1.0;
    let s_x = x / w;
    let z = e(ell.rem_euclid(24) as f64 / 24.0);
    Ok((sqrt_principal(w) * z * e_c(-x / 24.0) - e_c(-s_x / 24.0)) * e(1.5 * u))
}

/// `int_{1/l}^{i inf} g_{a,b}(3 rho) / sqrt(-i(rho + x)) d rho` along the
/// vertical ray `rho = 1/l + it`.
pub fn theta_period_integral(
    a: f64,
    b: f64,
    ell: i64,
    x: C64,
    opts: &ClosedFormOptions,
) -> Result<Quadrature> {
    if a.fract() == 0.0 {
        return Err(Error::Domain(format!("a = {a} is an integer")));
    }
    let base = 1.0 / ell as f64;
    if (x.re + base).abs() < 1e-300 && x.im <= 0.0 {
        return Err(Error::Pole(format!(
            "the ray meets the branch point at x = {x}"
        )));
    }
    quad_vertical_ray(
        |rho| Ok(g_ab_reduced(a, b, 3.0 * rho, opts.t_split)? / sqrt_principal(-I * (rho + x))),
        base,
        &QuadOptions::with_tol(opts.tol),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GReport {
    /// `sqrt(3) sum_+- -+e(-+1/6) I_+-`.
    pub closed_form: C64,
    pub error_estimate: f64,
    /// `F(tau) - zeta_24^{-l} (l tau + 1)^{-1/2} F(S_l tau)`, for `tau` in the
    /// upper half-plane only.
    pub f_difference: Option<C64>,
    /// The integrals `I_+` and `I_-`.
    pub integrals: [C64; 2],
}

/// `G_{alpha,beta}` as a period integral and, off the real line, as the
/// difference of `F` values it is defined by.
pub fn g_alpha_beta(
    alpha: i64,
    beta: i64,
    ell: i64,
    x: C64,
    opts: &ClosedFormOptions,
) -> Result<GReport> {
    pole_check(ell, x)?;
    let u = alpha as f64 / beta as f64;
    let b = 0.5 - 3.0 * u;
    let mut closed = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut integrals = [C64::new(0.0, 0.0); 2];
    for (i, s) in [1.0, -1.0].into_iter().enumerate() {
        let q = theta_period_integral(s / 3.0 + 0.5, b, ell, x, opts)?;
        integrals[i] = q.value;
        closed += -s * e(-s / 6.0) * q.value;
        err += q.error_estimate;
    }
    let closed = 3f64.sqrt() * closed;
    let f_difference = if x.im > 0.0 {
        check_s_ell_multiplier(ell)?;
        let w = ell as f64 * x + 1.0;
        let chi = e(-(ell.rem_euclid(24) as f64) / 24.0);
        Some(
            f_alpha_beta(alpha, beta, x)?
                - chi * pow_principal(w, -0.5) * f_alpha_beta(alpha, beta, x / w)?,
        )
    } else {
        None
    };
    Ok(GReport {
        closed_form: closed,
        error_estimate: 3f64.sqrt() * err,
        f_difference,
        integrals,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HClosedForm {
    /// `1/2 sum_j c_j e(2u_j) G_j(x)`.
    pub value: C64,
    pub error_estimate: f64,
    /// `sum_j c_j (l x + 1)^{-1/2} zeta_24^{-l} E_1(u_j, l; x)`.
    pub e1_sum: C64,
    /// `value + e1_sum`: the `G` assembly with the `E_1` line kept.
    pub route_b_literal: C64,
    /// The `sqrt(3)/2`, `zeta_6^{+-1}` assembly with the `E_1` line.
    pub route_a: C64,
}

/// `H_{n,S_l}(x)` for real `x != -1/l` (or `x` in the upper half-plane).
pub fn h_closed_form_s_ell(
    zeta: &RootVector,
    x: C64,
    pi: &PiDaggerSolution,
    opts: &ClosedFormOptions,
) -> Result<HClosedForm> {
    let ell = zeta.ell();
    check_s_ell_multiplier(ell)?;
    pole_check(ell, x)?;
    let chi = e(-(ell.rem_euclid(24) as f64) / 24.0);
    let w = ell as f64 * x + 1.0;
    let mut value = C64::new(0.0, 0.0);
    let mut route_a = C64::new(0.0, 0.0);
    let mut e1_sum = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for j in 0..zeta.n() {
        let u = zeta.u_f64(j);
        let c = pi.c[j];
        let g = g_alpha_beta(zeta.alpha(j), zeta.beta(j), ell, x, opts)?;
        let half = 0.5 * c * e(2.0 * u);
        value += half * g.closed_form;
        err += half.norm() * g.error_estimate;
        let bracket = e(1.0 / 6.0) * g.integrals[0] + e(-1.0 / 6.0) * g.integrals[1];
        route_a += 0.5 * 3f64.sqrt() * (e(0.5 * u) - e(1.5 * u)) / pi.pi_dagger[j] * bracket;
        e1_sum += c * pow_principal(w, -0.5) * chi * mathcal_e1(u, ell, x)?;
    }
    Ok(HClosedForm {
        value,
        error_estimate: err,
        e1_sum,
        route_b_literal: value + e1_sum,
        route_a: route_a + e1_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{pi, zeta};
    use super::*;

    #[test]
    fn e1_at_zero() {
        let u = 0.25;
        let v = mathcal_e1(u, 2400, C64::new(0.0, 0.0)).unwrap();
        // zeta_24^2400 = 1
        assert!(v.norm() < 1e-15);
        let v = mathcal_e1(u, 7, C64::new(0.0, 0.0)).unwrap();
        assert!((v - (e(7.0 / 24.0) - 1.0) * e(1.5 * u)).norm() < 1e-15);
    }

    #[test]
    fn e1_pole_and_continuity() {
        assert!(matches!(
            mathcal_e1(0.25, 2400, C64::new(-1.0 / 2400.0, 0.0)),
            Err(Error::Pole(_))
        ));
        let a = mathcal_e1(0.25, 2400, C64::new(1.0 / 3.0, 0.0)).unwrap();
        let b = mathcal_e1(0.25, 2400, C64::new(1.0 / 3.0 + 1e-6, 0.0)).unwrap();
        assert!((a - b).norm() < 1e-4);
    }

    #[test]
    fn period_integrand_decays_at_the_leading_rate() {
        // a = 5/6: the smallest |nu| in a + Z is 1/6, so far up the ray the
        // integrand falls by exp(-3 pi nu^2) sqrt(t/(t+1)) per unit of t
        let (a, b, ell) = (5.0 / 6.0, 0.5 - 0.75, 2400);
        let f = |t: f64| {
            let rho = C64::new(1.0 / ell as f64, t);
            (g_ab_reduced(a, b, 3.0 * rho, 0.5).unwrap() / sqrt_principal(-I * rho)).norm()
        };
        assert!(f(2.0) < f(0.2));
        let t: f64 = 6.0;
        let want = (-3.0 * std::f64::consts::PI / 36.0).exp() * (t / (t + 1.0)).sqrt();
        assert!((f(t + 1.0) / f(t) / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn period_integral_split_invariance() {
        let x = C64::new(1.0 / 3.0, 0.0);
        let a = theta_period_integral(5.0 / 6.0, -0.25, 2400, x, &ClosedFormOptions::default())
            .unwrap();
        let b = theta_period_integral(
            5.0 / 6.0,
            -0.25,
            2400,
            x,
            &ClosedFormOptions {
                t_split: 0.8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (a.value - b.value).norm() < 1e-9,
            "{} vs {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn g_routes_agree_off_the_axis() {
        let x = C64::new(1.0 / 3.0, 0.05);
        let g = g_alpha_beta(1, 4, 2400, x, &ClosedFormOptions::default()).unwrap();
        let d = (g.closed_form - g.f_difference.unwrap()).norm();
        assert!(d < 1e-5, "{d}");
    }

    #[test]
    fn h_vanishes_at_zero() {
        let h =
            h_closed_form_s_ell(&zeta(), C64::new(0.0, 0.0), pi(), &Default::default()).unwrap();
        assert!(h.value.norm() < 1e-8, "{}", h.value);
    }

    #[test]
    fn h_continuous_at_an_irrational() {
        let x = 1.0 / std::f64::consts::PI;
        let o = ClosedFormOptions::default();
        let a = h_closed_form_s_ell(&zeta(), C64::new(x, 0.0), pi(), &o).unwrap();
        let b = h_closed_form_s_ell(&zeta(), C64::new(x + 1e-4, 0.0), pi(), &o).unwrap();
        assert!((a.value - b.value).norm() < 1e-3);
    }
}
