//! Dirichlet characters modulo a prime.
//!
//! A character is stored as a single index `k` against the least primitive
//! root `g`: `chi_k(g^a) = e(k a / (q - 1))`. Values come out of a
//! precomputed table of `(q-1)`-th roots of unity, so products of character
//! values are exactly reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::ComplexSum;

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `q` (Fermat).
pub fn inv_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

/// A prime modulus with its least primitive root and discrete-log table.
#[derive(Clone, Debug)]
pub struct PrimeModulus {
    q: u64,
    g: u64,
    /// `dlog[x]` for `x` in `1..q`; `dlog[0]` is unused.
    dlog: Vec<u32>,
    /// `g^a mod q` for `a` in `0..q-1`.
    powers: Vec<u32>,
    /// `e(j / (q-1))`.
    roots: Vec<Complex64>,
    /// `e(a / q)`.
    additive: Vec<Complex64>,
}

impl PrimeModulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 {
            return Err(Error::ModulusTooSmall(q));
        }
        if !is_prime(q) {
            return Err(Error::CompositeModulus(q));
        }
        assert!(q < u32::MAX as u64, "modulus {q} too large for the dlog table");
        let g = (2..q).find(|&g| multiplicative_order(g, q) == q - 1).expect("prime modulus has a primitive root");
        let order = (q - 1) as usize;
        let mut dlog = vec![0u32; q as usize];
        let mut powers = Vec::with_capacity(order);
        let mut x = 1u64;
        for a in 0..order {
            powers.push(x as u32);
            dlog[x as usize] = a as u32;
            x = x * g % q;
        }
        let roots = (0..order).map(|j| crate::e(j as f64 / order as f64)).collect();
        let additive = (0..q).map(|a| crate::e(a as f64 / q as f64)).collect();
        Ok(Self { q, g, dlog, powers, roots, additive })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Least primitive root.
    #[inline]
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Order of the unit group, `q - 1`.
    #[inline]
    pub fn order(&self) -> u64 {
        self.q - 1
    }

    /// Discrete log base `g` of `x`, or `None` when `q | x`.
    #[inline]
    pub fn dlog(&self, x: i64) -> Option<u64> {
        let r = x.rem_euclid(self.q as i64) as usize;
        if r == 0 {
            None
        } else {
            Some(self.dlog[r] as u64)
        }
    }

    /// `g^a mod q`.
    #[inline]
    pub fn power(&self, a: u64) -> u64 {
        self.powers[(a % self.order()) as usize] as u64
    }

    /// `e(j / (q-1))` from the table.
    #[inline]
    pub fn root(&self, j: u64) -> Complex64 {
        self.roots[(j % self.order()) as usize]
    }

    /// `e(a / q)` from the table.
    #[inline]
    pub fn additive(&self, a: i64) -> Complex64 {
        self.additive[a.rem_euclid(self.q as i64) as usize]
    }

    pub fn character(&self, index: u64) -> DirichletCharacter<'_> {
        DirichletCharacter { modulus: self, index: index % self.order() }
    }

    /// All `q - 1` characters in index order.
    pub fn characters(&self) -> impl Iterator<Item = DirichletCharacter<'_>> + '_ {
        (0..self.order()).map(move |k| self.character(k))
    }

    /// Even primitive characters (even nonzero index), in index order.
    pub fn even_primitive(&self) -> impl Iterator<Item = DirichletCharacter<'_>> + '_ {
        (2..self.order()).step_by(2).map(move |k| self.character(k))
    }
}

/// `sum_{a=1}^{q-1} chi_k(a) v(a)` for every character index `k`.
///
/// With `a = g^j` this is `sum_j e(kj / (q-1)) v(g^j)`, an unnormalized
/// inverse DFT along the discrete-log line.
pub fn character_transform<F: Fn(u64) -> Complex64>(pm: &PrimeModulus, v: F) -> Vec<Complex64> {
    let n = pm.order() as usize;
    let mut buf: Vec<Complex64> = (0..n as u64).map(|j| v(pm.power(j))).collect();
    rustfft::FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

fn multiplicative_order(g: u64, q: u64) -> u64 {
    let mut x = g % q;
    let mut k = 1;
    while x != 1 {
        x = x * g % q;
        k += 1;
    }
    k
}

/// `chi_k(g^a) = e(k a / (q - 1))`.
#[derive(Clone, Copy, Debug)]
pub struct DirichletCharacter<'a> {
    modulus: &'a PrimeModulus,
    index: u64,
}

impl<'a> DirichletCharacter<'a> {
    #[inline]
    pub fn modulus(&self) -> &'a PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    /// For prime modulus every non-principal character is primitive.
    pub fn is_primitive(&self) -> bool {
        self.index != 0
    }

    /// `chi(-1) = (-1)^k` because `-1 = g^((q-1)/2)`.
    pub fn is_even(&self) -> bool {
        self.index % 2 == 0
    }

    /// `chi(-1)` as a sign.
    pub fn parity_sign(&self) -> f64 {
        if self.is_even() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn conj(&self) -> DirichletCharacter<'a> {
        let order = self.modulus.order();
        DirichletCharacter { modulus: self.modulus, index: (order - self.index) % order }
    }

    /// Real characters: principal and quadratic.
    pub fn is_real(&self) -> bool {
        self.index == 0 || 2 * self.index == self.modulus.order()
    }

    #[inline]
    pub fn value(&self, n: i64) -> Complex64 {
        match self.modulus.dlog(n) {
            None => Complex64::new(0.0, 0.0),
            Some(a) => self.modulus.root(mul_mod(self.index, a, self.modulus.order())),
        }
    }

    /// Exponent `j` with `chi(n) = e(j / (q-1))`, or `None` when `q | n`.
    #[inline]
    pub fn exponent(&self, n: i64) -> Option<u64> {
        self.modulus.dlog(n).map(|a| mul_mod(self.index, a, self.modulus.order()))
    }
}

/// Sum over primitive characters of `chi(n) conj(chi(m))`, by direct summation.
pub fn primitive_pair_sum(q: &PrimeModulus, n: i64, m: i64) -> Result<Complex64> {
    let (Some(_), Some(_)) = (q.dlog(n), q.dlog(m)) else {
        return Err(Error::NotCoprime { q: q.q(), detail: format!("n = {n}, m = {m}") });
    };
    let mut acc = ComplexSum::new();
    for chi in q.characters().filter(|c| c.is_primitive()) {
        acc.add(chi.value(n) * chi.value(m).conj());
    }
    Ok(acc.value())
}

/// Same sum over every character, primitive or not.
pub fn full_pair_sum(q: &PrimeModulus, n: i64, m: i64) -> Complex64 {
    q.characters().map(|chi| chi.value(n) * chi.value(m).conj()).collect::<ComplexSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Primitive-root oracle: g is a generator iff g^((q-1)/p) != 1 for every prime p | q-1.
    fn is_generator(g: u64, q: u64) -> bool {
        let n = q - 1;
        (2..=n).filter(|&p| n % p == 0 && (2..p).all(|d| p % d != 0)).all(|p| pow_mod(g, n / p, q) != 1)
    }

    #[test]
    fn least_primitive_roots() {
        assert_eq!(PrimeModulus::new(5).unwrap().generator(), 2);
        assert_eq!(PrimeModulus::new(7).unwrap().generator(), 3);
        for q in primes_between(3, 400) {
            let pm = PrimeModulus::new(q).unwrap();
            let g = pm.generator();
            assert!(is_generator(g, q));
            assert!((2..g).all(|h| !is_generator(h, q)), "q = {q}");
        }
    }

    #[test]
    fn modulus_errors() {
        assert!(matches!(PrimeModulus::new(9), Err(Error::CompositeModulus(9))));
        assert!(matches!(PrimeModulus::new(2), Err(Error::ModulusTooSmall(2))));
        assert!(matches!(PrimeModulus::new(100), Err(Error::CompositeModulus(100))));
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn dlog_table_is_a_bijection() {
        for q in [3, 5, 7, 101, 997] {
            let pm = PrimeModulus::new(q).unwrap();
            let mut seen = vec![false; q as usize];
            for a in 0..pm.order() {
                let x = pm.power(a);
                assert!(!seen[x as usize]);
                seen[x as usize] = true;
                assert_eq!(pm.dlog(x as i64), Some(a));
            }
            assert!(seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn character_values() {
        let q5 = PrimeModulus::new(5).unwrap();
        for chi in q5.characters() {
            assert_eq!(chi.value(10), Complex64::new(0.0, 0.0));
        }
        let q7 = PrimeModulus::new(7).unwrap();
        assert!((q7.character(0).value(3) - 1.0).norm() < 1e-15);
        // quadratic character mod 5 against the Legendre symbol (2|5) = -1
        let quad = q5.character(2);
        assert!((quad.value(2) + 1.0).norm() < 1e-15);
        for n in 1..5i64 {
            let legendre = if pow_mod(n as u64, 2, 5) == 1 { 1.0 } else { -1.0 };
            assert!((quad.value(n) - legendre).norm() < 1e-15);
        }
    }

    #[test]
    fn pair_sum_examples() {
        let q5 = PrimeModulus::new(5).unwrap();
        assert!((primitive_pair_sum(&q5, 1, 1).unwrap() - 3.0).norm() < 1e-12);
        assert!((primitive_pair_sum(&q5, 1, 2).unwrap() + 1.0).norm() < 1e-12);
        let q7 = PrimeModulus::new(7).unwrap();
        assert!((primitive_pair_sum(&q7, 10, 3).unwrap() - 5.0).norm() < 1e-12);
        assert!(matches!(primitive_pair_sum(&q7, 14, 3), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn parity_census_and_conjugation() {
        for q in primes_between(3, 199) {
            let pm = PrimeModulus::new(q).unwrap();
            let even = pm.characters().filter(|c| c.is_even()).count() as u64;
            let even_prim = pm.characters().filter(|c| c.is_even() && c.is_primitive()).count() as u64;
            assert_eq!(even, (q - 1) / 2);
            assert_eq!(even_prim, (q - 3) / 2);
            assert_eq!(pm.even_primitive().count() as u64, (q - 3) / 2);
            for chi in pm.characters() {
                assert_eq!((chi.value(-1) - chi.parity_sign()).norm() < 1e-12, true);
                for n in 1..q as i64 {
                    assert!((chi.conj().value(n) - chi.value(n).conj()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn completeness_relation() {
        for q in [5u64, 11, 53] {
            let pm = PrimeModulus::new(q).unwrap();
            for n in 1..q as i64 {
                for m in [1i64, 2, n, q as i64 + n] {
                    let expect = if (n - m).rem_euclid(q as i64) == 0 { (q - 1) as f64 } else { 0.0 };
                    assert!((full_pair_sum(&pm, n, m) - expect).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn complete_multiplicativity() {
        let pm = PrimeModulus::new(31).unwrap();
        for chi in pm.characters() {
            for a in -40i64..40 {
                for b in [-7i64, 3, 12, 31, 62] {
                    let lhs = chi.value(a * b);
                    let rhs = chi.value(a) * chi.value(b);
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }
}
