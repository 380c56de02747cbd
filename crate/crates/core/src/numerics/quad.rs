use super::C64;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            max_nodes: 1 << 20,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    pub error_estimate: f64,
    pub nodes: usize,
}

type Rule = (&'static [f64], &'static [f64]);

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on `P_n` and cached.
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    *map.entry(n).or_insert_with(|| {
        let mut xs = vec![0.0; n];
        let mut ws = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            xs[i] = x;
            ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (
            Box::leak(xs.into_boxed_slice()),
            Box::leak(ws.into_boxed_slice()),
        )
    })
}

/// `int_R f(t) dt` for integrands with Gaussian decay.
///
/// The cutoff `T` grows until the tail beyond `+-T`, estimated from the local
/// decay rate, is below `tol / 10`; the trapezoid rule on `[-T, T]` is then
/// halved until successive estimates agree to `tol`.
pub fn quad_gaussian_line<F: Fn(f64) -> C64>(f: F, opts: &QuadOptions) -> Result<Quadrature> {
    let tail = |t: f64| -> Option<f64> {
        let a = f(t).norm();
        let b = f(1.1 * t).norm();
        if !a.is_finite() || !b.is_finite() {
            return None;
        }
        if a == 0.0 {
            return Some(0.0);
        }
        if b >= a {
            return None;
        }
        let rate = (a / b).ln() / (0.1 * t.abs());
        Some(a / rate)
    };
    let mut cut = 2.0;
    loop {
        match (tail(cut), tail(-cut)) {
            (Some(r), Some(l)) if r + l < opts.tol / 10.0 => break,
            _ => {}
        }
        cut *= 1.5;
        if cut > 1e4 {
            return Err(Error::Quadrature {
                estimate: f64::INFINITY,
            });
        }
    }
    let mut h = 0.25;
    let mut n = (2.0 * cut / h).ceil() as usize;
    h = 2.0 * cut / n as f64;
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * f(-cut + i as f64 * h);
    }
    let mut est = sum * h;
    let mut level = 0;
    loop {
        let mut mids = C64::new(0.0, 0.0);
        for i in 0..n {
            mids += f(-cut + (i as f64 + 0.5) * h);
        }
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        let err = (next - est).norm();
        level += 1;
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::Quadrature {
                estimate: f64::INFINITY,
            });
        }
        if level >= 2 && err < opts.tol {
            return Ok(Quadrature {
                value: next,
                error_estimate: err,
                nodes: n + 1,
            });
        }
        if 2 * n + 1 > opts.max_nodes {
            return Err(Error::Quadrature { estimate: err });
        }
        est = next;
    }
}

/// `int_{base}^{base + i inf} f(z) dz` along the vertical ray, using the
/// exp-sinh substitution `t = exp(pi/2 sinh s)` which tolerates integrable
/// endpoint singularities at `t = 0` and exponential decay as `t -> inf`.
pub fn quad_vertical_ray<F>(f: F, base: f64, opts: &QuadOptions) -> Result<Quadrature>
where
    F: Fn(C64) -> Result<C64>,
{
    let g = |s: f64| -> Result<C64> {
        let t = (0.5 * PI * s.sinh()).exp();
        if t == 0.0 || !t.is_finite() {
            return Ok(C64::new(0.0, 0.0));
        }
        let w = t * 0.5 * PI * s.cosh();
        let v = f(C64::new(base, t))?;
        let r = v * w;
        if r.re.is_finite() && r.im.is_finite() {
            Ok(r)
        } else {
            Err(Error::Quadrature {
                estimate: f64::INFINITY,
            })
        }
    };
    let small = opts.tol * 1e-3;
    let mut lo = -4.0_f64;
    while lo > -6.5 && (g(lo)?.norm() > small || g(lo + 0.25)?.norm() > small) {
        lo -= 0.5;
    }
    let mut hi = 4.0_f64;
    while hi < 6.5 && (g(hi)?.norm() > small || g(hi - 0.25)?.norm() > small) {
        hi += 0.5;
    }
    let mut h = 0.5;
    let mut n = ((hi - lo) / h).round() as usize;
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..=n {
        sum += g(lo + i as f64 * h)?;
    }
    let mut est = sum * h;
    let mut level = 0;
    loop {
        let mut mids = C64::new(0.0, 0.0);
        for i in 0..n {
            mids += g(lo + (i as f64 + 0.5) * h)?;
        }
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        let err = (next - est).norm();
        level += 1;
        if level >= 3 && err < opts.tol {
            return Ok(Quadrature {
                value: C64::new(0.0, 1.0) * next,
                error_estimate: err,
                nodes: n + 1,
            });
        }
        if 2 * n + 1 > opts.max_nodes {
            return Err(Error::Quadrature { estimate: err });
        }
        est = next;
    }
}
