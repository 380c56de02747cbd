//! Complex numbers over MPFR floats, only as much as the root-of-unity finite
//! sums need: in-place multiply and add.

use super::C64;
use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Assign, Float};

#[derive(Debug, Clone)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

/// Scratch space so the hot loop does not allocate.
#[derive(Debug)]
pub struct Scratch {
    t1: Float,
    t2: Float,
}

impl Scratch {
    pub fn new(prec: u32) -> Self {
        Scratch {
            t1: Float::new(prec),
            t2: Float::new(prec),
        }
    }
}

impl MpComplex {
    pub fn zero(prec: u32) -> Self {
        MpComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn from_c64(z: C64, prec: u32) -> Self {
        MpComplex {
            re: Float::with_val(prec, z.re),
            im: Float::with_val(prec, z.im),
        }
    }

    /// `e(p/q)` at the working precision.
    pub fn e_frac(p: i128, q: i128, prec: u32) -> Self {
        let r = p.rem_euclid(q);
        let mut angle = Float::with_val(prec + 16, rug::float::Constant::Pi);
        angle *= 2 * r;
        angle /= Float::with_val(prec + 16, q);
        let (s, c) = angle.sin_cos(Float::new(prec + 16));
        MpComplex {
            re: Float::with_val(prec, c),
            im: Float::with_val(prec, s),
        }
    }

    /// `1 - e(p/q)` as `-2i sin(pi r) e(r/2)` with `r = p/q` reduced to
    /// `[-1/2, 1/2)`, so no bits are lost when `r` is small.
    pub fn one_minus_e_frac(p: i128, q: i128, prec: u32) -> Self {
        let r = p.rem_euclid(q);
        let r = if 2 * r >= q { r - q } else { r };
        let wp = prec + 16;
        let mut angle = Float::with_val(wp, rug::float::Constant::Pi);
        angle *= r;
        angle /= Float::with_val(wp, q);
        let s = Float::with_val(wp, angle.sin_ref());
        let (sn, cs) = angle.sin_cos(Float::new(wp));
        // -2i s (c + i sn) = 2 s sn - 2i s c
        let re = Float::with_val(prec, Float::with_val(wp, &s * &sn) * 2);
        let im = Float::with_val(prec, Float::with_val(wp, &s * &cs) * -2);
        MpComplex { re, im }
    }

    pub fn one(prec: u32) -> Self {
        MpComplex {
            re: Float::with_val(prec, 1),
            im: Float::new(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn assign(&mut self, other: &MpComplex) {
        self.re.assign(&other.re);
        self.im.assign(&other.im);
    }

    pub fn add_assign(&mut self, other: &MpComplex) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn sub_assign(&mut self, other: &MpComplex) {
        self.re -= &other.re;
        self.im -= &other.im;
    }

    pub fn mul_assign(&mut self, other: &MpComplex, s: &mut Scratch) {
        s.t1.assign(&self.re * &other.re);
        s.t2.assign(&self.im * &other.im);
        s.t1 -= &s.t2;
        s.t2.assign(&self.re * &other.im);
        self.im *= &other.re;
        self.im += &s.t2;
        std::mem::swap(&mut self.re, &mut s.t1);
    }

    /// `1 / self`.
    pub fn recip(&self) -> MpComplex {
        let prec = self.prec();
        let mut den = Float::with_val(prec, &self.re * &self.re);
        den += Float::with_val(prec, &self.im * &self.im);
        let mut re = Float::new(prec);
        re.assign_round(&self.re / &den, Round::Nearest);
        let mut im = Float::new(prec);
        im.assign_round(&self.im / &den, Round::Nearest);
        im = -im;
        MpComplex { re, im }
    }

    pub fn one_minus(&self) -> MpComplex {
        let prec = self.prec();
        let mut re = Float::with_val(prec, 1);
        re -= &self.re;
        MpComplex {
            re,
            im: Float::with_val(prec, -&self.im),
        }
    }

    pub fn mul(&self, other: &MpComplex) -> MpComplex {
        let mut out = self.clone();
        let mut s = Scratch::new(self.prec());
        out.mul_assign(other, &mut s);
        out
    }
}
