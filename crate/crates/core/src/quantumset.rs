//! Root-of-unity vectors, the quantum set predicate, the level `l`, and words
//! in `S_l`, `T` acting on rationals.

use crate::error::{Error, Result};
use crate::modular::SL2Matrix;
use crate::numerics::{e_frac, parse_rational, rational_to_f64, BigRational, C64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// `zeta_n = (e(alpha_1/beta_1), ..., e(alpha_n/beta_n))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootVector {
    entries: Vec<(i64, i64)>,
}

impl RootVector {
    /// Reduces each `alpha/beta` by its gcd and enforces `n >= 2`, `beta >= 3`
    /// and `alpha_r/beta_r +- alpha_s/beta_s` not integral for `r != s`.
    pub fn new(entries: &[(i64, i64)]) -> Result<Self> {
        let report = validate_entries(entries);
        if let Some(v) = report.violations.first() {
            return Err(Error::Domain(v.clone()));
        }
        Ok(RootVector {
            entries: report.reduced,
        })
    }

    /// Parses `"1/4,1/5"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(&parse_entries(s)?)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(i64, i64)] {
        &self.entries
    }

    pub fn alpha(&self, j: usize) -> i64 {
        self.entries[j].0
    }

    pub fn beta(&self, j: usize) -> i64 {
        self.entries[j].1
    }

    /// `alpha_j / beta_j` as an exact rational.
    pub fn u(&self, j: usize) -> BigRational {
        BigRational::new(self.alpha(j).into(), self.beta(j).into())
    }

    pub fn u_f64(&self, j: usize) -> f64 {
        self.alpha(j) as f64 / self.beta(j) as f64
    }

    /// `x_j = e(alpha_j / beta_j)`.
    pub fn x(&self, j: usize) -> C64 {
        e_frac(self.alpha(j) as i128, self.beta(j) as i128)
    }

    pub fn lcm_beta(&self) -> i64 {
        self.entries.iter().fold(1i64, |acc, &(_, b)| acc.lcm(&b))
    }

    pub fn ell(&self) -> i64 {
        ell_of(self)
    }

    pub fn swapped(&self, i: usize, j: usize) -> RootVector {
        let mut entries = self.entries.clone();
        entries.swap(i, j);
        RootVector { entries }
    }
}

impl fmt::Display for RootVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(a, b)| format!("{a}/{b}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

pub fn parse_entries(s: &str) -> Result<Vec<(i64, i64)>> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            let (a, b) = part
                .split_once('/')
                .ok_or_else(|| Error::Parse(format!("expected a/b, got {part:?}")))?;
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in {part:?}")))?;
            let b: i64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in {part:?}")))?;
            Ok((a, b))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub reduced: Vec<(i64, i64)>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_entries(entries: &[(i64, i64)]) -> ValidationReport {
    let mut violations = Vec::new();
    if entries.len() < 2 {
        violations.push(format!("need at least 2 entries, got {}", entries.len()));
    }
    let mut reduced = Vec::with_capacity(entries.len());
    for (j, &(a, b)) in entries.iter().enumerate() {
        if b <= 0 {
            violations.push(format!("beta_{} = {b} must be positive", j + 1));
            reduced.push((a, b));
            continue;
        }
        let g = a.gcd(&b);
        let (a, b) = (a / g, b / g);
        if b < 3 {
            violations.push(format!("beta_{} = {b} must be at least 3", j + 1));
        }
        reduced.push((a, b));
    }
    for r in 0..reduced.len() {
        for s in r + 1..reduced.len() {
            let (ar, br) = reduced[r];
            let (as_, bs) = reduced[s];
            if br <= 0 || bs <= 0 {
                continue;
            }
            for sign in [1i64, -1] {
                if (ar * bs + sign * as_ * br) % (br * bs) == 0 {
                    let op = if sign == 1 { "+" } else { "-" };
                    violations.push(format!(
                        "alpha_{}/beta_{} {op} alpha_{}/beta_{} is an integer",
                        r + 1,
                        r + 1,
                        s + 1,
                        s + 1
                    ));
                }
            }
        }
    }
    ValidationReport {
        reduced,
        violations,
    }
}

/// A reduced rational `h/k` with `k > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantumRational {
    h: BigInt,
    k: BigInt,
}

impl QuantumRational {
    pub fn new(h: impl Into<BigInt>, k: impl Into<BigInt>) -> Result<Self> {
        let (h, k) = (h.into(), k.into());
        if k.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::from_rational(&BigRational::new(h, k)))
    }

    pub fn from_rational(x: &BigRational) -> Self {
        QuantumRational {
            h: x.numer().clone(),
            k: x.denom().clone(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Self::from_rational(&parse_rational(s)?))
    }

    pub fn h(&self) -> &BigInt {
        &self.h
    }

    pub fn k(&self) -> &BigInt {
        &self.k
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.h.clone(), self.k.clone())
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.to_rational())
    }

    pub fn add_integer(&self, n: i64) -> QuantumRational {
        QuantumRational {
            h: &self.h + BigInt::from(n) * &self.k,
            k: self.k.clone(),
        }
    }
}

impl fmt::Display for QuantumRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.h, self.k)
    }
}

/// Nearest integer, rounding exact halves down: `[x] = ceil(x - 1/2)`.
pub fn closest_integer(x: &BigRational) -> BigInt {
    (x - BigRational::new(BigInt::one(), BigInt::from(2)))
        .ceil()
        .to_integer()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantumSetViolation {
    BetaDividesK { j: usize },
    TooClose { j: usize, distance: BigRational },
}

impl fmt::Display for QuantumSetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantumSetViolation::BetaDividesK { j } => write!(f, "beta_{} divides k", j + 1),
            QuantumSetViolation::TooClose { j, distance } => {
                write!(
                    f,
                    "|alpha_{0} k/beta_{0} - [alpha_{0} k/beta_{0}]| = {distance} <= 1/6",
                    j + 1
                )
            }
        }
    }
}

/// First violated condition of the quantum set, if any.
pub fn quantum_set_violation(
    zeta: &RootVector,
    x: &QuantumRational,
) -> Option<QuantumSetViolation> {
    let sixth = BigRational::new(BigInt::one(), BigInt::from(6));
    for j in 0..zeta.n() {
        let beta = BigInt::from(zeta.beta(j));
        if x.k().is_multiple_of(&beta) {
            return Some(QuantumSetViolation::BetaDividesK { j });
        }
    }
    for j in 0..zeta.n() {
        let v = BigRational::new(
            BigInt::from(zeta.alpha(j)) * x.k(),
            BigInt::from(zeta.beta(j)),
        );
        let distance = (&v - BigRational::from_integer(closest_integer(&v))).abs();
        if distance <= sixth {
            return Some(QuantumSetViolation::TooClose { j, distance });
        }
    }
    None
}

pub fn is_in_quantum_set(zeta: &RootVector, x: &QuantumRational) -> bool {
    quantum_set_violation(zeta, x).is_none()
}

/// `6 lcm(beta)^2` when no `beta_j` is divisible by 3, else `2 lcm(beta)^2`.
pub fn ell_of(zeta: &RootVector) -> i64 {
    let l = zeta.lcm_beta();
    if zeta.entries().iter().all(|&(_, b)| b % 3 != 0) {
        6 * l * l
    } else {
        2 * l * l
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MobiusImage {
    Finite(QuantumRational),
    Infinity,
}

pub fn apply_mobius(gamma: &SL2Matrix, x: &QuantumRational) -> MobiusImage {
    let num = &gamma.a * x.h() + &gamma.b * x.k();
    let den = &gamma.c * x.h() + &gamma.d * x.k();
    if den.is_zero() {
        MobiusImage::Infinity
    } else {
        MobiusImage::Finite(QuantumRational::from_rational(&BigRational::new(num, den)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Letter {
    S,
    SInv,
    T,
    TInv,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::S => Letter::SInv,
            Letter::SInv => Letter::S,
            Letter::T => Letter::TInv,
            Letter::TInv => Letter::T,
        }
    }

    pub fn matrix(self, ell: i64) -> SL2Matrix {
        match self {
            Letter::S => SL2Matrix::s_ell(ell),
            Letter::SInv => SL2Matrix::s_ell(-ell),
            Letter::T => SL2Matrix::t(),
            Letter::TInv => SL2Matrix::t().inverse(),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::S => "S",
            Letter::SInv => "S^-1",
            Letter::T => "T",
            Letter::TInv => "T^-1",
        })
    }
}

/// A formal word in `S_l` and `T`. Words are never reduced or canonicalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
    pub ell: i64,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>, ell: i64) -> Self {
        GroupWord { letters, ell }
    }

    pub fn identity(ell: i64) -> Self {
        GroupWord {
            letters: Vec::new(),
            ell,
        }
    }

    pub fn single(letter: Letter, ell: i64) -> Self {
        GroupWord {
            letters: vec![letter],
            ell,
        }
    }

    /// Parses words such as `"S"`, `"TS"`, `"S T^-1 S"`, `"S' T"`; `"I"` or the
    /// empty string is the identity.
    pub fn parse(s: &str, ell: i64) -> Result<Self> {
        let mut letters = Vec::new();
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            i += 1;
            let base = match c {
                'S' | 's' => Letter::S,
                'T' | 't' => Letter::T,
                'I' | ' ' | ',' | '*' | '.' => continue,
                _ => return Err(Error::Parse(format!("unexpected {c:?} in word {s:?}"))),
            };
            let rest: String = chars[i..].iter().collect();
            let inverse = if rest.starts_with("^-1") {
                i += 3;
                true
            } else if rest.starts_with('\'') || rest.starts_with('⁻') {
                i += if rest.starts_with('⁻') { 2 } else { 1 };
                true
            } else {
                false
            };
            letters.push(if inverse { base.inverse() } else { base });
        }
        Ok(GroupWord { letters, ell })
    }

    pub fn to_matrix(&self) -> SL2Matrix {
        word_to_matrix(self)
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            ell: self.ell,
        }
    }

    /// `self * other`.
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        assert_eq!(self.ell, other.ell);
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord {
            letters,
            ell: self.ell,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn word_to_matrix(w: &GroupWord) -> SL2Matrix {
    w.letters
        .iter()
        .fold(SL2Matrix::identity(), |acc, l| acc.mul(&l.matrix(w.ell)))
}

pub fn random_word(
    rng: &mut impl Rng,
    max_len: usize,
    ell: i64,
    allow_inverses: bool,
) -> GroupWord {
    let len = rng.gen_range(1..=max_len.max(1));
    let choices: &[Letter] = if allow_inverses {
        &[Letter::S, Letter::SInv, Letter::T, Letter::TInv]
    } else {
        &[Letter::S, Letter::T]
    };
    let letters = (0..len)
        .map(|_| choices[rng.gen_range(0..choices.len())])
        .collect();
    GroupWord { letters, ell }
}

/// Every `h/k` in the quantum set with `1 <= k <= kmax`, `|h| <= hmax`.
pub fn quantum_pool(zeta: &RootVector, kmax: i64, hmax: i64) -> Vec<QuantumRational> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        for h in -hmax..=hmax {
            if h.gcd(&k) != 1 {
                continue;
            }
            let x = QuantumRational {
                h: h.into(),
                k: k.into(),
            };
            if is_in_quantum_set(zeta, &x) {
                out.push(x);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzViolation {
    pub word: String,
    pub x: String,
    pub image: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub finite_images: usize,
    pub infinite_images: usize,
    pub violations: Vec<FuzzViolation>,
}

/// Applies `trials` random words (letters from `S_l^{+-1}, T^{+-1}`) to random
/// pool members and checks every finite image stays in the quantum set.
/// Trial `i` draws from its own ChaCha stream, so the report does not depend
/// on the thread count.
pub fn closure_fuzz(
    zeta: &RootVector,
    trials: usize,
    max_word_len: usize,
    seed: u64,
) -> Result<FuzzReport> {
    let pool = quantum_pool(zeta, 200, 200);
    if pool.is_empty() {
        return Err(Error::Domain(format!(
            "quantum set of {zeta} has no point with k, |h| <= 200"
        )));
    }
    let ell = zeta.ell();
    let outcomes: Vec<(bool, Option<FuzzViolation>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = &pool[rng.gen_range(0..pool.len())];
            let w = random_word(&mut rng, max_word_len, ell, true);
            match apply_mobius(&w.to_matrix(), x) {
                MobiusImage::Infinity => (false, None),
                MobiusImage::Finite(y) => {
                    let v = quantum_set_violation(zeta, &y).map(|v| FuzzViolation {
                        word: w.to_string(),
                        x: x.to_string(),
                        image: y.to_string(),
                        reason: v.to_string(),
                    });
                    (true, v)
                }
            }
        })
        .collect();
    let finite_images = outcomes.iter().filter(|o| o.0).count();
    let violations: Vec<FuzzViolation> = outcomes.into_iter().filter_map(|o| o.1).collect();
    let report = FuzzReport {
        trials,
        finite_images,
        infinite_images: trials - finite_images,
        violations,
    };
    if let Some(v) = report.violations.first() {
        return Err(Error::PropertyViolation(format!(
            "{} maps {} to {} outside the quantum set ({})",
            v.word, v.x, v.image, v.reason
        )));
    }
    Ok(report)
}

/// `(alpha_j / beta_j) l` is an integer for every `j`.
pub fn ell_clears_denominators(zeta: &RootVector) -> bool {
    let ell = zeta.ell();
    (0..zeta.n()).all(|j| (zeta.alpha(j) * ell) % zeta.beta(j) == 0)
}

pub fn k_as_u64(x: &QuantumRational) -> Option<u64> {
    x.k().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeta45() -> RootVector {
        RootVector::parse("1/4,1/5").unwrap()
    }

    fn q(h: i64, k: i64) -> QuantumRational {
        QuantumRational::new(h, k).unwrap()
    }

    #[test]
    fn closest_integer_examples() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(closest_integer(&r(7, 2)), BigInt::from(3));
        assert_eq!(closest_integer(&r(0, 1)), BigInt::from(0));
        assert_eq!(closest_integer(&r(-2, 5)), BigInt::from(0));
        assert_eq!(closest_integer(&r(-7, 2)), BigInt::from(-4));
        assert_eq!(closest_integer(&r(3, 5)), BigInt::from(1));
    }

    #[test]
    fn root_vector_validation() {
        assert!(RootVector::parse("1/4,1/5").is_ok());
        assert!(RootVector::parse("1/4").is_err());
        assert!(RootVector::parse("1/2,1/5").is_err());
        assert!(RootVector::parse("1/4,3/4").is_err());
        assert!(RootVector::parse("1/4,5/4").is_err());
        let z = RootVector::parse("2/8,3/9").unwrap();
        assert_eq!(z.entries(), &[(1, 4), (1, 3)]);
    }

    #[test]
    fn membership_examples() {
        let z = zeta45();
        assert!(is_in_quantum_set(&z, &q(1, 3)));
        assert_eq!(
            quantum_set_violation(&z, &q(1, 5)),
            Some(QuantumSetViolation::BetaDividesK { j: 1 })
        );
        assert_eq!(
            quantum_set_violation(&z, &q(1, 5)).unwrap().to_string(),
            "beta_2 divides k"
        );
        let z7 = RootVector::parse("1/4,1/7").unwrap();
        assert!(matches!(
            quantum_set_violation(&z7, &q(1, 6)),
            Some(QuantumSetViolation::TooClose { j: 1, .. })
        ));
        assert!(is_in_quantum_set(&z, &q(0, 1)));
        assert!(is_in_quantum_set(&z, &q(1, 2403)));
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell_of(&zeta45()), 2400);
        assert_eq!(ell_of(&RootVector::parse("1/3,1/5").unwrap()), 450);
        assert_eq!(ell_of(&RootVector::parse("1/5,1/7").unwrap()), 7350);
        assert!(ell_clears_denominators(&zeta45()));
    }

    #[test]
    fn mobius_examples() {
        let t = SL2Matrix::t();
        assert_eq!(apply_mobius(&t, &q(1, 3)), MobiusImage::Finite(q(4, 3)));
        assert_eq!(
            apply_mobius(&SL2Matrix::s_ell(2400), &q(1, 3)),
            MobiusImage::Finite(q(1, 2403))
        );
        let s = SL2Matrix::new(0, -1, 1, 0).unwrap();
        assert_eq!(apply_mobius(&s, &q(0, 1)), MobiusImage::Infinity);
    }

    #[test]
    fn words() {
        assert_eq!(GroupWord::identity(2400).to_matrix(), SL2Matrix::identity());
        assert_eq!(
            GroupWord::parse("S", 2400).unwrap().to_matrix(),
            SL2Matrix::new(1, 0, 2400, 1).unwrap()
        );
        let ts = GroupWord::parse("TS", 2400).unwrap().to_matrix();
        assert_eq!(ts, SL2Matrix::t().mul(&SL2Matrix::s_ell(2400)));
        let w = GroupWord::parse("S T^-1 S' T", 450).unwrap();
        assert_eq!(
            w.letters,
            vec![Letter::S, Letter::TInv, Letter::SInv, Letter::T]
        );
        assert_eq!(GroupWord::parse(&w.to_string(), 450).unwrap(), w);
        assert!(GroupWord::parse("SX", 450).is_err());
    }

    proptest! {
        #[test]
        fn word_times_inverse_is_identity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_word(&mut rng, 10, 2400, true);
            prop_assert_eq!(w.concat(&w.inverse()).to_matrix(), SL2Matrix::identity());
        }

        #[test]
        fn membership_depends_on_k_only(h in -300i64..300, k in 1i64..300, shift in -5i64..5) {
            prop_assume!(h.gcd(&k) == 1);
            let z = zeta45();
            let x = q(h, k);
            prop_assert_eq!(is_in_quantum_set(&z, &x), is_in_quantum_set(&z, &x.add_integer(shift)));
        }
    }

    #[test]
    fn closure_fuzz_finds_nothing() {
        for z in ["1/4,1/5", "1/3,1/5"] {
            let z = RootVector::parse(z).unwrap();
            let r = closure_fuzz(&z, 500, 8, 42).unwrap();
            assert!(r.violations.is_empty());
            assert_eq!(r.trials, 500);
        }
    }

    #[test]
    fn pool_is_in_quantum_set() {
        let z = zeta45();
        let pool = quantum_pool(&z, 12, 12);
        assert!(pool.contains(&q(1, 3)));
        assert!(!pool.contains(&q(1, 5)));
        assert!(pool.iter().all(|x| is_in_quantum_set(&z, x)));
    }
}
