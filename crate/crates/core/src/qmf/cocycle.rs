//! `H_{n,gamma}(x) = A_n(x) - chi_gamma (cx + d)^{-1/2} A_n(gamma x)` from
//! exact finite sums, and its closed form for words in `S_l` and `T`.
//! For words the automorphy factor is built letter by letter; see
//! [`word_factor`].

use super::check_s_ell_multiplier;
use super::closed::{h_closed_form_s_ell, ClosedFormOptions};
use crate::error::{Error, Result};
use crate::modular::{chi_eta, SL2Matrix};
use crate::numerics::{e_frac, rational_to_f64, C64};
use crate::quantumset::{
    apply_mobius, GroupWord, Letter, MobiusImage, QuantumRational, RootVector,
};
use crate::ranksum::{rn_finite_sum_with, FiniteSumOptions, PiDaggerSolution, RnEvaluation};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleReport {
    pub x: QuantumRational,
    pub gamma: GroupWord,
    pub direct_value: C64,
    pub direct_error_estimate: f64,
    pub closed_form_value: C64,
    pub residual: f64,
    pub integral_error_estimate: f64,
    /// Closed form with the `E_1` line kept, `S_l` only.
    pub route_b_literal: Option<C64>,
    /// The alternative `sqrt(3)/2` assembly, `S_l` only.
    pub route_a: Option<C64>,
}

/// Finite sums keyed by `(h mod k, k)`, shared by every cocycle evaluation
/// for one root vector.
pub struct CocycleEvaluator {
    zeta: RootVector,
    opts: FiniteSumOptions,
    cache: Mutex<HashMap<(BigInt, BigInt), RnEvaluation>>,
}

fn image(gamma: &SL2Matrix, x: &QuantumRational) -> Result<QuantumRational> {
    match apply_mobius(gamma, x) {
        MobiusImage::Finite(y) => Ok(y),
        MobiusImage::Infinity => Err(Error::Pole(format!("{gamma} maps {x} to infinity"))),
    }
}

/// `chi_L (c y + d)^{-1/2}` for one letter, with `chi_{S^-1} = chi_S^{-1}`
/// and `(c, d)` taken from the letter itself rather than its `c > 0`
/// representative. A negative radicand takes its limit from the upper half
/// plane: argument `pi` for `c > 0`, `-pi` for `c < 0`.
fn letter_factor(letter: Letter, ell: i64, y: &QuantumRational) -> Result<C64> {
    let (chi, c) = match letter {
        Letter::T => return Ok(e_frac(1, 24)),
        Letter::TInv => return Ok(e_frac(-1, 24)),
        Letter::S => (chi_eta(&SL2Matrix::s_ell(ell)), ell),
        Letter::SInv => (chi_eta(&SL2Matrix::s_ell(ell)).conj(), -ell),
    };
    let z = y.to_rational() * BigInt::from(c) + BigInt::from(1);
    if z.is_zero() {
        return Err(Error::Pole(format!("{letter} maps {y} to infinity")));
    }
    let mag = rational_to_f64(&z.abs()).powf(-0.5);
    let phase = if z.is_positive() {
        C64::new(1.0, 0.0)
    } else if c > 0 {
        C64::new(0.0, -1.0)
    } else {
        C64::new(0.0, 1.0)
    };
    Ok(chi * mag * phase)
}

/// Automorphy factor of a word at `x`, multiplied letter by letter from the
/// right: `j(L M, x) = j(M, x) j(L, M x)`. On words without inverse letters
/// it equals `chi_gamma (cx + d)^{-1/2}`; with inverse letters that formula
/// depends on the sign of the representative and breaks the composition law.
pub fn word_factor(gamma: &GroupWord, x: &QuantumRational) -> Result<C64> {
    let mut y = x.clone();
    let mut j = C64::new(1.0, 0.0);
    for &letter in gamma.letters.iter().rev() {
        j *= letter_factor(letter, gamma.ell, &y)?;
        y = image(&letter.matrix(gamma.ell), &y)?;
    }
    Ok(j)
}

impl CocycleEvaluator {
    pub fn new(zeta: RootVector, opts: FiniteSumOptions) -> Self {
        CocycleEvaluator {
            zeta,
            opts,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn zeta(&self) -> &RootVector {
        &self.zeta
    }

    /// `R_n(zeta; e(x))`.
    pub fn r_n(&self, x: &QuantumRational) -> Result<RnEvaluation> {
        let key = (x.h().mod_floor(x.k()), x.k().clone());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = rn_finite_sum_with(&self.zeta, x, &self.opts)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, v.clone());
        Ok(v)
    }

    /// `A_n(x) = e(-x/24) R_n(zeta; e(x))` and its error estimate.
    pub fn a_n(&self, x: &QuantumRational) -> Result<(C64, f64)> {
        let r = self.r_n(x)?;
        let m = x.k() * BigInt::from(24);
        let p = (-x.h()).mod_floor(&m);
        let phase = match (p.to_i128(), m.to_i128()) {
            (Some(p), Some(m)) => e_frac(p, m),
            _ => return Err(Error::Resource(format!("denominator of {x} too large"))),
        };
        Ok((phase * r.value, r.error_estimate))
    }

    /// `H_{n,gamma}(x)` and its error estimate.
    pub fn h(&self, gamma: &GroupWord, x: &QuantumRational) -> Result<(C64, f64)> {
        if gamma.letters.contains(&Letter::S) || gamma.letters.contains(&Letter::SInv) {
            check_s_ell_multiplier(gamma.ell)?;
        }
        let y = image(&gamma.to_matrix(), x)?;
        let (a, ea) = self.a_n(x)?;
        let (b, eb) = self.a_n(&y)?;
        let j = word_factor(gamma, x)?;
        Ok((a - j * b, ea + j.norm() * eb))
    }

    /// `|H_{gamma gamma'}(x) - H_{gamma'}(x) - chi_{gamma'}(Cx + D)^{-1/2} H_gamma(gamma' x)|`.
    pub fn compose_residual(
        &self,
        gamma: &GroupWord,
        gamma_prime: &GroupWord,
        x: &QuantumRational,
    ) -> Result<f64> {
        let both = gamma.concat(gamma_prime);
        let y = image(&gamma_prime.to_matrix(), x)?;
        let (h_both, _) = self.h(&both, x)?;
        let (h_prime, _) = self.h(gamma_prime, x)?;
        let (h_gamma, _) = self.h(gamma, &y)?;
        Ok((h_both - h_prime - word_factor(gamma_prime, x)? * h_gamma).norm())
    }

    /// Direct and closed-form cocycle side by side.
    pub fn report(
        &self,
        gamma: &GroupWord,
        x: &QuantumRational,
        pi: &PiDaggerSolution,
        opts: &ClosedFormOptions,
    ) -> Result<CocycleReport> {
        let (direct, direct_err) = self.h(gamma, x)?;
        let (closed, integral_err) = h_closed_form_word(&self.zeta, gamma, x, pi, opts)?;
        let (route_b_literal, route_a) = if gamma.letters == [Letter::S] {
            let h = h_closed_form_s_ell(&self.zeta, C64::new(x.to_f64(), 0.0), pi, opts)?;
            (Some(h.route_b_literal), Some(h.route_a))
        } else {
            (None, None)
        };
        Ok(CocycleReport {
            x: x.clone(),
            gamma: gamma.clone(),
            direct_value: direct,
            direct_error_estimate: direct_err,
            closed_form_value: closed,
            residual: (direct - closed).norm(),
            integral_error_estimate: integral_err,
            route_b_literal,
            route_a,
        })
    }
}

/// `H_{n,gamma}(x)` from exact finite sums.
pub fn h_cocycle_direct(zeta: &RootVector, gamma: &GroupWord, x: &QuantumRational) -> Result<C64> {
    let ev = CocycleEvaluator::new(zeta.clone(), FiniteSumOptions::default());
    Ok(ev.h(gamma, x)?.0)
}

pub fn cocycle_compose_residual(
    zeta: &RootVector,
    gamma: &GroupWord,
    gamma_prime: &GroupWord,
    x: &QuantumRational,
) -> Result<f64> {
    let ev = CocycleEvaluator::new(zeta.clone(), FiniteSumOptions::default());
    ev.compose_residual(gamma, gamma_prime, x)
}

/// Closed form of `H_{n,gamma}(x)` for any word, built letter by letter from
/// `H_T = 0`, the `S_l` closed form, and
/// `H_{L M}(x) = H_M(x) + chi_M (cx + d)^{-1/2} H_L(M x)`.
/// Returns the value and the accumulated quadrature error estimate.
pub fn h_closed_form_word(
    zeta: &RootVector,
    gamma: &GroupWord,
    x: &QuantumRational,
    pi: &PiDaggerSolution,
    opts: &ClosedFormOptions,
) -> Result<(C64, f64)> {
    let ell = gamma.ell;
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut y = x.clone();
    let mut j = C64::new(1.0, 0.0);
    for &letter in gamma.letters.iter().rev() {
        let (h, he) = match letter {
            Letter::T | Letter::TInv => (C64::new(0.0, 0.0), 0.0),
            Letter::S => {
                let r = h_closed_form_s_ell(zeta, C64::new(y.to_f64(), 0.0), pi, opts)?;
                (r.value, r.error_estimate)
            }
            Letter::SInv => {
                // 0 = H_{S S^-1}(y) = H_{S^-1}(y) + j(S^-1, y) H_S(S^-1 y)
                let z = image(&SL2Matrix::s_ell(-ell), &y)?;
                let r = h_closed_form_s_ell(zeta, C64::new(z.to_f64(), 0.0), pi, opts)?;
                let js = letter_factor(Letter::SInv, ell, &y)?;
                (-js * r.value, js.norm() * r.error_estimate)
            }
        };
        total += j * h;
        err += j.norm() * he;
        j *= letter_factor(letter, ell, &y)?;
        y = image(&letter.matrix(ell), &y)?;
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{pi, zeta};
    use super::*;

    fn word(s: &str) -> GroupWord {
        GroupWord::parse(s, 2400).unwrap()
    }

    fn q(h: i64, k: i64) -> QuantumRational {
        QuantumRational::new(h, k).unwrap()
    }

    #[test]
    fn h_t_and_identity_vanish() {
        let ev = CocycleEvaluator::new(zeta(), FiniteSumOptions::default());
        for x in [q(1, 3), q(2, 7), q(-5, 11), q(0, 1)] {
            assert!(ev.h(&word("T"), &x).unwrap().0.norm() < 1e-12);
            assert_eq!(ev.h(&word(""), &x).unwrap().0, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn h_s_ell_at_zero_is_zero() {
        let h = h_cocycle_direct(&zeta(), &word("S"), &q(0, 1)).unwrap();
        assert!(h.norm() < 1e-12);
    }

    #[test]
    fn composition_with_translations() {
        let ev = CocycleEvaluator::new(zeta(), FiniteSumOptions::default());
        for (g, gp) in [("T", "T"), ("", ""), ("T", "T^-1"), ("TT", "T")] {
            assert!(ev.compose_residual(&word(g), &word(gp), &q(1, 3)).unwrap() < 1e-8);
        }
        // gamma' = T: H_{S T}(0) = chi_T H_S(1), with S(1) = 1/2401
        assert!(
            ev.compose_residual(&word("S"), &word("T"), &q(0, 1))
                .unwrap()
                < 1e-6
        );
    }

    #[test]
    fn word_factor_is_a_cocycle() {
        use crate::modular::weight_half_factor;
        for x in [q(1, 3), q(-2, 7), q(0, 1)] {
            for w in ["S", "T S", "S T S", "T T S"] {
                let lit = weight_half_factor(&word(w).to_matrix(), C64::new(x.to_f64(), 0.0));
                assert!((word_factor(&word(w), &x).unwrap() - lit).norm() < 1e-12);
            }
        }
        // -S^-1 is the c > 0 representative; its literal factor has the other sign
        let x = q(1, 3);
        let y = q(1, 2403);
        let lit = weight_half_factor(&word("S").to_matrix(), C64::new(x.to_f64(), 0.0))
            * weight_half_factor(&word("S^-1").to_matrix(), C64::new(y.to_f64(), 0.0));
        assert!((lit + 1.0).norm() < 1e-12);
        for x in [q(1, 3), q(-1, 1), q(5, 2)] {
            let j = word_factor(&word("S^-1 S"), &x).unwrap();
            assert!((j - 1.0).norm() < 1e-12, "{x}: {j}");
            let j = word_factor(&word("S S^-1"), &x).unwrap();
            assert!((j - 1.0).norm() < 1e-12, "{x}: {j}");
        }
    }

    #[test]
    fn pole_of_the_action() {
        // S_l^-1 sends 1/2400 to infinity
        let err = h_cocycle_direct(&zeta(), &word("S^-1"), &q(1, 2400));
        assert!(matches!(err, Err(Error::Pole(_))));
    }

    #[test]
    fn closed_form_word_uses_translation_invariance() {
        let o = ClosedFormOptions::default();
        let (a, _) = h_closed_form_word(&zeta(), &word("T"), &q(1, 3), pi(), &o).unwrap();
        assert_eq!(a, C64::new(0.0, 0.0));
        let (b, _) = h_closed_form_word(&zeta(), &word("TS"), &q(0, 1), pi(), &o).unwrap();
        let (c, _) = h_closed_form_word(&zeta(), &word("S"), &q(0, 1), pi(), &o).unwrap();
        assert_eq!(b, c);
    }
}
