//! Gauss, Kloosterman and Ramanujan sums modulo a prime.
//!
//! Every sum is a direct `O(q)` compensated summation over the units. The
//! bulk Gauss-sum path evaluates all `q - 1` Gauss sums at once with one FFT
//! along the discrete-log line and is kept in agreement with the direct path.

use num_complex::Complex64;
use crate::characters::{character_transform, inv_mod, DirichletCharacter, PrimeModulus};
use crate::sum::ComplexSum;

/// Largest imaginary part a Kloosterman sum may carry before it is treated as a bug.
const IMAG_RESIDUAL: f64 = 1e-10;

/// `tau(chi) = sum_{a=1}^{q-1} chi(a) e(a/q)`.
pub fn gauss_sum(chi: &DirichletCharacter<'_>) -> Complex64 {
    let pm = chi.modulus();
    (1..pm.q() as i64).map(|a| chi.value(a) * pm.additive(a)).collect::<ComplexSum>().value()
}

/// Gauss sums of all characters, indexed by character index.
///
/// Writing `a = g^j`, `tau(chi_k) = sum_j e(kj/(q-1)) e(g^j/q)`, which is an
/// unnormalized inverse DFT of the sequence `e(g^j / q)`.
pub fn gauss_sums_bulk(pm: &PrimeModulus) -> Vec<Complex64> {
    character_transform(pm, |a| pm.additive(a as i64))
}

/// `S(a, b; q) = sum_{x=1}^{q-1} e((a x + b xbar) / q)`.
pub fn kloosterman(a: i64, b: i64, pm: &PrimeModulus) -> f64 {
    let q = pm.q() as i64;
    let (a, b) = (a.rem_euclid(q), b.rem_euclid(q));
    let z = (1..q)
        .map(|x| {
            let xbar = inv_mod(x as u64, q as u64) as i64;
            pm.additive((a * x + b * xbar) % q)
        })
        .collect::<ComplexSum>()
        .value();
    assert!(z.im.abs() <= IMAG_RESIDUAL * q as f64, "Kloosterman sum S({a},{b};{q}) has imaginary part {}", z.im);
    z.re
}

/// `c_q(n) = sum_{a=1}^{q-1} e(a n / q)`: `q - 1` when `q | n`, else `-1`.
pub fn ramanujan_sum(n: i64, pm: &PrimeModulus) -> i64 {
    let z = (1..pm.q() as i64).map(|a| pm.additive(a * n.rem_euclid(pm.q() as i64))).collect::<ComplexSum>().value();
    let r = z.re.round();
    assert!((z - r).norm() <= 1e-10 * pm.q() as f64, "Ramanujan sum residual {}", (z - r).norm());
    r as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::primes_between;

    #[test]
    fn gauss_sum_examples() {
        let q5 = PrimeModulus::new(5).unwrap();
        let t = gauss_sum(&q5.character(2));
        assert!((t - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((gauss_sum(&q5.character(0)) + 1.0).norm() < 1e-12);
        let q3 = PrimeModulus::new(3).unwrap();
        // e(1/3) - e(2/3) = i sqrt(3)
        let t3 = gauss_sum(&q3.character(1));
        assert!((t3 - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn kloosterman_examples() {
        let q5 = PrimeModulus::new(5).unwrap();
        // exponents 2/5, 1, 1, 3/5 give 2 + 2 cos(4 pi / 5)
        let expect = 2.0 + 2.0 * (0.8 * std::f64::consts::PI).cos();
        assert!((kloosterman(1, 1, &q5) - expect).abs() < 1e-12);
        assert!((expect - 0.381_966_0).abs() < 1e-7);
        let q7 = PrimeModulus::new(7).unwrap();
        assert!((kloosterman(0, 1, &q7) + 1.0).abs() < 1e-12);
        assert!((kloosterman(1, 2, &q7) - kloosterman(2, 1, &q7)).abs() < 1e-12);
        assert!((kloosterman(0, 0, &q7) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn ramanujan_examples() {
        let q7 = PrimeModulus::new(7).unwrap();
        assert_eq!(ramanujan_sum(3, &q7), -1);
        assert_eq!(ramanujan_sum(14, &q7), 6);
        assert_eq!(ramanujan_sum(-5, &q7), -1);
        assert_eq!(ramanujan_sum(1, &PrimeModulus::new(5).unwrap()), -1);
    }

    #[test]
    fn bulk_matches_direct() {
        for q in [3u64, 5, 7, 31, 97, 101] {
            let pm = PrimeModulus::new(q).unwrap();
            let bulk = gauss_sums_bulk(&pm);
            for chi in pm.characters() {
                assert!((bulk[chi.index() as usize] - gauss_sum(&chi)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn gauss_identities() {
        for q in primes_between(3, 60) {
            let pm = PrimeModulus::new(q).unwrap();
            for chi in pm.characters().filter(|c| c.is_primitive()) {
                let t = gauss_sum(&chi);
                let tb = gauss_sum(&chi.conj());
                assert!((t.norm_sqr() - q as f64).abs() < 1e-10);
                assert!((t * tb - chi.parity_sign() * q as f64).norm() < 1e-10);
                assert!((tb - chi.parity_sign() * t.conj()).norm() < 1e-10);
            }
        }
    }
}
