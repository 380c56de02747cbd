use super::{gauss_legendre, C64};
use std::f64::consts::PI;

/// `E(z) = 2 * int_0^z exp(-pi t^2) dt` along the segment from 0 to `z`.
///
/// Real arguments go through `erf(sqrt(pi) x)`. Complex arguments use
/// composite 20-point Gauss-Legendre on `2z int_0^1 exp(-pi z^2 s^2) ds`,
/// with panel count scaled to the oscillation rate `2 pi |z|^2`.
pub fn e_func(z: C64) -> C64 {
    if z.im == 0.0 {
        return C64::new(libm::erf(PI.sqrt() * z.re), 0.0);
    }
    let (nodes, weights) = gauss_legendre(20);
    let z2 = z * z;
    let panels = 2 + (0.7 * z.norm_sqr()).ceil() as usize;
    let width = 1.0 / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let mut panel = C64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            let s = mid + 0.5 * width * x;
            panel += *w * (-PI * z2 * s * s).exp();
        }
        acc += panel * (0.5 * width);
    }
    2.0 * z * acc
}

/// `1 - E(x) = erfc(sqrt(pi) x)` for real `x`, without cancellation.
pub fn erfc_pi(x: f64) -> f64 {
    libm::erfc(PI.sqrt() * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: adaptive Simpson on the defining integral along the
    /// segment.
    fn simpson_oracle(z: C64) -> C64 {
        fn f(z: C64, s: f64) -> C64 {
            2.0 * z * (-PI * z * z * s * s).exp()
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(
            z: C64,
            a: f64,
            b: f64,
            fa: C64,
            fm: C64,
            fb: C64,
            whole: C64,
            tol: f64,
            depth: u32,
        ) -> C64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(z, lm);
            let frm = f(z, rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let diff = left + right - whole;
            if depth == 0 || diff.norm() < 15.0 * tol {
                return left + right + diff / 15.0;
            }
            rec(z, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(z, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(z, 0.0), f(z, 0.5), f(z, 1.0));
        let whole = (fa + 4.0 * fm + fb) / 6.0;
        rec(z, 0.0, 1.0, fa, fm, fb, whole, 1e-14, 40)
    }

    #[test]
    fn zero_and_oddness() {
        assert_eq!(e_func(C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        let z = C64::new(0.7, 0.0);
        assert!((e_func(z) + e_func(-z)).norm() < 1e-15);
    }

    #[test]
    fn e_of_one_matches_quadrature_oracle() {
        let oracle = simpson_oracle(C64::new(1.0, 0.0));
        // frozen oracle value at 1e-12 tolerance
        assert!((oracle.re - 0.987_811_117_815_197).abs() < 1e-12);
        assert!((e_func(C64::new(1.0, 0.0)) - oracle).norm() < 1e-12);
    }

    #[test]
    fn complex_values_match_oracle() {
        for z in [C64::new(0.3, 0.4), C64::new(-1.2, 0.7), C64::new(2.0, -1.5)] {
            let a = e_func(z);
            let b = simpson_oracle(z);
            assert!(
                (a - b).norm() <= 1e-12 * b.norm().max(1.0),
                "{z}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn large_arguments_match_reference_values() {
        // erf(sqrt(pi) z) from a 30-digit reference evaluation
        let cases = [
            (
                C64::new(6.0, 6.5),
                C64::new(-8_239_255.358_476_586, 8_889_603.885_984_132),
            ),
            (
                C64::new(0.5, 3.0),
                C64::new(15_736_302_180.272_183, -90_993_676_396.621_45),
            ),
            (
                C64::new(9.0, -2.0),
                C64::new(1.0, 1.250_919_600_109_167e-35),
            ),
            (
                C64::new(-1.2, 0.7),
                C64::new(-0.990_473_176_271_565, -0.005_658_596_734_319_225),
            ),
        ];
        for (z, want) in cases {
            let got = e_func(z);
            assert!(
                (got - want).norm() <= 1e-13 * want.norm(),
                "{z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn complex_path_agrees_with_real_path() {
        for x in [-3.0, -0.4, 0.1, 1.7] {
            let a = e_func(C64::new(x, 1e-300));
            let b = e_func(C64::new(x, 0.0));
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn oddness_grid() {
        for i in -10..=10 {
            for j in -10..=10 {
                let z = C64::new(i as f64 * 0.7, j as f64 * 0.45);
                let s = e_func(z) + e_func(-z);
                assert!(s.norm() <= 1e-13 * e_func(z).norm().max(1.0));
            }
        }
    }
}
