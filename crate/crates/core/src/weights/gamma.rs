//! Complex gamma function.
//!
//! `ln_gamma` uses the Stirling series after shifting the argument to
//! `|z| >= 10`, and reflection for `Re z < 1/2`. The logarithm is only
//! defined modulo `2 pi i`; every caller exponentiates differences of
//! logarithms, which keeps ratios of large gamma values representable.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `B_{2k} / (2k (2k - 1))` for `k = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const SHIFT_RADIUS: f64 = 10.0;

pub fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Gamma(z)` modulo `2 pi i`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::Pole(z.re));
    }
    if z.re < 0.5 {
        let one_minus = Complex64::new(1.0 - z.re, -z.im);
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(one_minus));
    }
    Ok(ln_gamma_right(z))
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(|l| l.exp())
}

/// `ln Gamma(z)` for `Re z >= 1/2`.
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    if w.norm() < SHIFT_RADIUS {
        let m = (SHIFT_RADIUS - w.re).ceil().max(0.0) as usize;
        for _ in 0..m {
            shift += w.ln();
            w += 1.0;
        }
    }
    stirling(w) - shift
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv
}

/// `ln sin(pi z)` modulo `2 pi i`, stable for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let half_pi_i = Complex64::new(0.0, PI / 2.0);
    if z.im > 5.0 {
        // sin(pi z) = i/2 e^{-i pi z} (1 - e^{2 pi i z})
        let small = (2.0 * PI * i * z).exp();
        -i * PI * z - std::f64::consts::LN_2 + half_pi_i + (-small).ln_1p()
    } else if z.im < -5.0 {
        // sin(pi z) = -i/2 e^{i pi z} (1 - e^{-2 pi i z})
        let small = (-2.0 * PI * i * z).exp();
        i * PI * z - std::f64::consts::LN_2 - half_pi_i + (-small).ln_1p()
    } else {
        // reduce the real part first so sin stays accurate
        let k = z.re.round();
        let r = Complex64::new(z.re - k, z.im);
        let s = (PI * r).sin();
        let sign = if (k as i64).rem_euclid(2) == 0 { 0.0 } else { PI };
        s.ln() + Complex64::new(0.0, sign)
    }
}

trait Ln1p {
    fn ln_1p(self) -> Self;
}

impl Ln1p for Complex64 {
    fn ln_1p(self) -> Self {
        if self.norm() < 1e-8 {
            self - self * self / 2.0
        } else {
            (1.0 + self).ln()
        }
    }
}

/// Upper bound on `ln |Gamma(z)|` valid for every `z` off the poles.
///
/// For `Re z > 0` the Stirling remainder satisfies `|R| <= 1 / (6 |z|)`; for
/// `Re z <= 0` reflection with `|sin(pi z)| >= sinh(pi |Im z|)` is used.
pub fn ln_abs_gamma_upper(z: Complex64) -> f64 {
    if z.re > 0.0 {
        stirling_main(z) + 1.0 / (6.0 * z.norm())
    } else {
        assert!(z.im != 0.0, "upper bound needs Im z != 0 when Re z <= 0");
        PI.ln() - ln_sinh(PI * z.im.abs()) - ln_abs_gamma_lower(Complex64::new(1.0 - z.re, -z.im))
    }
}

/// Lower bound on `ln |Gamma(z)|`, using `|sin(pi z)| <= cosh(pi Im z)` for `Re z <= 0`.
pub fn ln_abs_gamma_lower(z: Complex64) -> f64 {
    if z.re > 0.0 {
        stirling_main(z) - 1.0 / (6.0 * z.norm())
    } else {
        PI.ln() - ln_cosh(PI * z.im) - ln_abs_gamma_upper(Complex64::new(1.0 - z.re, -z.im))
    }
}

fn stirling_main(z: Complex64) -> f64 {
    ((z - 0.5) * z.ln()).re - z.re + LN_SQRT_2PI
}

fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn classical_values() {
        assert!(rel(gamma(c(1.0, 0.0)).unwrap(), c(1.0, 0.0)) < 1e-14);
        assert!(rel(gamma(c(0.5, 0.0)).unwrap(), c(PI.sqrt(), 0.0)) < 1e-14);
        assert!(rel(gamma(c(5.0, 0.0)).unwrap(), c(24.0, 0.0)) < 1e-14);
        assert!(rel(gamma(c(-0.5, 0.0)).unwrap(), c(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
        // Gamma(1 + i), reference value to 16 digits
        let g = gamma(c(1.0, 1.0)).unwrap();
        assert!(rel(g, c(0.498_015_668_118_356_0, -0.154_949_828_301_810_7)) < 1e-14);
        assert!(rel(gamma(c(0.25, 0.0)).unwrap(), c(3.625_609_908_221_908_3, 0.0)) < 1e-14);
    }

    #[test]
    fn poles_are_rejected() {
        for n in 0..5 {
            assert!(matches!(gamma(c(-(n as f64), 0.0)), Err(Error::Pole(_))));
        }
        assert!(gamma(c(-3.0, 1e-9)).is_ok());
    }

    #[test]
    fn recursion_on_random_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = c(rng.gen_range(-20.0..40.0), rng.gen_range(-200.0..200.0));
            let lhs = ln_gamma(s + 1.0).unwrap();
            let rhs = ln_gamma(s).unwrap() + s.ln();
            // equal modulo 2 pi i
            let d = lhs - rhs;
            let wrapped = c(d.re, d.im - (d.im / (2.0 * PI)).round() * 2.0 * PI);
            assert!(wrapped.norm() < 1e-11, "s = {s}, defect {wrapped}");
        }
    }

    #[test]
    fn critical_line_modulus() {
        // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
        for t in [0.0, 0.3, 1.0, 7.5, 40.0, 150.0, 200.0] {
            let l = ln_gamma(c(0.5, t)).unwrap().re;
            let expect = 0.5 * (PI.ln() - ln_cosh(PI * t));
            assert!((l - expect).abs() < 1e-12 * (1.0 + expect.abs()), "t = {t}");
        }
        // |Gamma(it)|^2 = pi / (t sinh(pi t))
        for t in [0.5, 3.0, 60.0] {
            let l = ln_gamma(c(0.0, t)).unwrap().re;
            let expect = 0.5 * (PI.ln() - t.ln() - (PI * t).sinh().ln());
            assert!((l - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn bounds_bracket_the_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let z = c(rng.gen_range(-10.0..10.0), rng.gen_range(0.5..300.0) * if rng.gen() { 1.0 } else { -1.0 });
            let l = ln_gamma(z).unwrap().re;
            assert!(ln_abs_gamma_lower(z) <= l + 1e-12 && l <= ln_abs_gamma_upper(z) + 1e-12, "z = {z}");
        }
    }
}
