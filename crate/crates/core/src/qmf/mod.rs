//! Quantum modularity of `A_n(tau) = q^{-1/24} R_n(zeta; q)`: the
//! nonholomorphic completion, the cocycle `H_{n,gamma}` from exact finite
//! sums, and the closed form of `H_{n,S_l}` through theta period integrals.

mod closed;
mod cocycle;

pub use closed::{
    g_alpha_beta, h_closed_form_s_ell, mathcal_e1, theta_period_integral, ClosedFormOptions,
    GReport, HClosedForm,
};
pub use cocycle::{
    cocycle_compose_residual, h_closed_form_word, h_cocycle_direct, word_factor, CocycleEvaluator,
    CocycleReport,
};

use crate::error::{Error, Result};
use crate::modular::{chi_eta, weight_half_factor, SL2Matrix};
use crate::numerics::{e, e_c, UHPoint, C64};
use crate::qseries::eta_value;
use crate::quantumset::{GroupWord, RootVector};
use crate::ranksum::{a_n, PiDaggerSolution};
use crate::zwegers::{script_r3, zwegers_r};

/// Heights below which the defining form of `A^-` is not cross-checked:
/// `theta(-2 tau + 1; 3 tau)` there is a sum of large cancelling terms.
const DEFINING_FORM_MIN_HEIGHT: f64 = 0.25;

/// Relative tolerance of the two-form identity for `A^-`.
const TWO_FORM_TOL: f64 = 1e-8;

/// `3 alpha/beta = m + r` with `m` the closest integer and `|r| < 1/2`.
pub fn split_three_u(alpha: i64, beta: i64) -> Result<(i64, f64)> {
    let num = 3 * alpha as i128;
    let den = beta as i128;
    if (2 * num).rem_euclid(2 * den) == den {
        return Err(Error::Domain(format!(
            "3*{alpha}/{beta} is a half-integer, so r = +-1/2"
        )));
    }
    let m = (2 * num + den).div_euclid(2 * den);
    let r = (num - m * den) as f64 / den as f64;
    Ok((m as i64, r))
}

/// `F_{alpha,beta}(tau) = q^{-1/6} sum_+- +-e(-+r/3) e(-+m/3) (-1)^m R(+-tau + r; 3 tau)`.
pub fn f_alpha_beta(alpha: i64, beta: i64, tau: C64) -> Result<C64> {
    let (m, r) = split_three_u(alpha, beta)?;
    let sign_m = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut acc = C64::new(0.0, 0.0);
    for s in [1.0, -1.0] {
        let phase = e(-s * (r + m as f64) / 3.0);
        acc += s * phase * zwegers_r(s * tau + r, 3.0 * tau)?;
    }
    Ok(sign_m * e_c(-tau / 6.0) * acc)
}

/// `F_{alpha,beta}` straight from `R(3 alpha/beta +- tau; 3 tau)`.
pub fn f_alpha_beta_unreduced(u: f64, tau: C64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for s in [1.0, -1.0] {
        acc += s * e(-s * u) * zwegers_r(3.0 * u + s * tau, 3.0 * tau)?;
    }
    Ok(e_c(-tau / 6.0) * acc)
}

/// The completion's nonholomorphic part through the `F` functions:
/// `-1/2 sum_j c_j e(2u_j) F_j(tau) - q^{-1/24}(sum_j c_j e(3u_j/2) + c_0)`.
fn a_minus_rewritten(zeta: &RootVector, tau: C64, pi: &PiDaggerSolution) -> Result<C64> {
    let mut f_part = C64::new(0.0, 0.0);
    let mut constant = pi.offset;
    for j in 0..zeta.n() {
        let u = zeta.u_f64(j);
        f_part += pi.c[j] * e(2.0 * u) * f_alpha_beta(zeta.alpha(j), zeta.beta(j), tau)?;
        constant += pi.c[j] * e(1.5 * u);
    }
    Ok(-0.5 * f_part - e_c(-tau / 24.0) * constant)
}

/// `(1/eta) sum_j c_j R_3(u_j, -2 tau; tau) - c_0 q^{-1/24}`.
fn a_minus_defining(zeta: &RootVector, tau: UHPoint, pi: &PiDaggerSolution) -> Result<C64> {
    let t = tau.tau();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..zeta.n() {
        acc += pi.c[j] * script_r3(C64::new(zeta.u_f64(j), 0.0), -2.0 * t, t)?;
    }
    Ok(acc / eta_value(tau)? - pi.offset * e_c(-t / 24.0))
}

/// Both forms of `A^-`; the second is `None` below the cross-check height.
pub fn a_minus_forms(
    zeta: &RootVector,
    tau: UHPoint,
    pi: &PiDaggerSolution,
) -> Result<(C64, Option<C64>)> {
    let v = a_minus_rewritten(zeta, tau.tau(), pi)?;
    if tau.tau().im < DEFINING_FORM_MIN_HEIGHT {
        return Ok((v, None));
    }
    Ok((v, Some(a_minus_defining(zeta, tau, pi)?)))
}

/// `A^-(zeta; q)`, with the two forms compared where both are reliable.
pub fn a_minus(zeta: &RootVector, tau: UHPoint, pi: &PiDaggerSolution) -> Result<C64> {
    let (v, w) = a_minus_forms(zeta, tau, pi)?;
    if let Some(w) = w {
        let d = (v - w).norm();
        if d > TWO_FORM_TOL * v.norm().max(1.0) {
            return Err(Error::Identity(format!(
                "A^- forms differ by {d:e} at tau = {}",
                tau.tau()
            )));
        }
    }
    Ok(v)
}

/// `A_n(tau) + A^-(tau)`.
pub fn a_hat(zeta: &RootVector, tau: UHPoint, pi: &PiDaggerSolution) -> Result<C64> {
    Ok(a_n(tau, zeta)? + a_minus(zeta, tau, pi)?)
}

/// `|A_hat(tau) - chi_gamma (c tau + d)^{-1/2} A_hat(gamma tau)|`.
pub fn a_hat_modularity_residual(
    zeta: &RootVector,
    tau: UHPoint,
    pi: &PiDaggerSolution,
    gamma: &GroupWord,
) -> Result<f64> {
    let m = gamma.to_matrix();
    if m == SL2Matrix::identity() {
        return Ok(0.0);
    }
    let image = UHPoint::new(m.act(tau.tau()))?;
    let lhs = a_hat(zeta, tau, pi)?;
    let rhs = weight_half_factor(&m, tau.tau()) * a_hat(zeta, image, pi)?;
    Ok((lhs - rhs).norm())
}

/// Confirms `chi_{S_l} = zeta_24^{-l}` before any `S_l` computation.
pub(crate) fn check_s_ell_multiplier(ell: i64) -> Result<()> {
    let chi = chi_eta(&SL2Matrix::s_ell(ell));
    let want = e(-(ell.rem_euclid(24) as f64) / 24.0);
    if (chi - want).norm() > 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "chi(S_{ell}) = {chi}, expected {want}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantumset::Letter;
    use crate::ranksum::{default_taus, solve_pi_dagger, PiDaggerOptions};
    use std::sync::OnceLock;

    pub(super) fn zeta() -> RootVector {
        RootVector::parse("1/4,1/5").unwrap()
    }

    pub(super) fn pi() -> &'static PiDaggerSolution {
        static PI: OnceLock<PiDaggerSolution> = OnceLock::new();
        PI.get_or_init(|| {
            solve_pi_dagger(&zeta(), &default_taus(8), &PiDaggerOptions::default()).unwrap()
        })
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_three_u(1, 4).unwrap(), (1, -0.25));
        assert_eq!(split_three_u(1, 5).unwrap(), (1, -0.4));
        assert_eq!(split_three_u(1, 7).unwrap(), (0, 3.0 / 7.0));
        assert!(split_three_u(1, 6).is_err());
    }

    #[test]
    fn f_forms_agree() {
        let tau = C64::new(0.13, 0.3);
        for (a, b) in [(1, 4), (1, 5), (2, 7), (-3, 8)] {
            let u = a as f64 / b as f64;
            let d = f_alpha_beta(a, b, tau).unwrap() - f_alpha_beta_unreduced(u, tau).unwrap();
            assert!(d.norm() < 1e-12, "{a}/{b}: {d}");
        }
    }

    #[test]
    fn a_minus_two_forms() {
        for (re, im) in [(0.1, 0.9), (-0.3, 0.4), (0.45, 1.7)] {
            let tau = UHPoint::from_parts(re, im).unwrap();
            let (v, w) = a_minus_forms(&zeta(), tau, pi()).unwrap();
            assert!((v - w.unwrap()).norm() < 1e-8, "{v} vs {w:?}");
        }
        assert!(
            a_minus(&zeta(), UHPoint::from_parts(0.0, 3.0).unwrap(), pi())
                .unwrap()
                .is_finite()
        );
    }

    #[test]
    fn a_hat_t_invariance() {
        let w = GroupWord::new(vec![Letter::T], 2400);
        let tau = UHPoint::from_parts(0.2, 0.8).unwrap();
        assert!(a_hat_modularity_residual(&zeta(), tau, pi(), &w).unwrap() < 1e-8);
        let id = GroupWord::new(vec![], 2400);
        assert_eq!(
            a_hat_modularity_residual(&zeta(), tau, pi(), &id).unwrap(),
            0.0
        );
    }

    #[test]
    fn a_hat_s_ell_invariance() {
        let w = GroupWord::new(vec![Letter::S], 2400);
        let tau = UHPoint::from_parts(-1.0 / 2400.0, 1.0 / 2400.0).unwrap();
        let r = a_hat_modularity_residual(&zeta(), tau, pi(), &w).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn multiplier_check() {
        check_s_ell_multiplier(2400).unwrap();
        check_s_ell_multiplier(7).unwrap();
    }
}
