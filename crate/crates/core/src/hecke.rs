//! Hecke eigenvalue systems of even Maass cusp forms for SL(2, Z).
//!
//! Prime eigenvalues come from a data file (or a seeded mock) and are
//! extended to every `n` by the Hecke relations
//!
//! ```text
//!   lambda(mn) = lambda(m) lambda(n)             (m, n) = 1
//!   lambda(p^(k+1)) = lambda(p) lambda(p^k) - lambda(p^(k-1))
//! ```
//!
//! File format (UTF-8, line oriented, `#` starts a comment line):
//!
//! ```text
//!   maass v1
//!   T_f 13.779751351890743
//!   parity even
//!   precision 1e-9
//!   pmax 125000
//!   2 1.549304477935552e+00
//!   3 2.468997724633477e-01
//!   ...
//! ```

use std::io::BufRead;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characters::is_prime;
use crate::error::{Error, Result};
use crate::sum::{ComplexSum, Neumaier};
use crate::weights::{AfeKernel, WeightTable};

/// Kim-Sarnak exponent.
pub const THETA: f64 = 7.0 / 64.0;

/// Coefficients up to this index are kept in the dense cache; larger ones are
/// computed by trial division on every call.
pub const DENSE_LIMIT: u64 = 1 << 24;

/// Where a system's prime eigenvalues came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Provenance {
    File(String),
    Mock { seed: u64 },
    Explicit(String),
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::File(p) => write!(f, "file:{p}"),
            Provenance::Mock { seed } => write!(f, "mock:{seed}"),
            Provenance::Explicit(s) => write!(f, "explicit:{s}"),
        }
    }
}

#[derive(Debug)]
pub struct HeckeSystem {
    t_f: f64,
    pmax: u64,
    precision: f64,
    /// `lambda(p)` indexed by `p`; zero at non-primes.
    prime_coeffs: Vec<f64>,
    provenance: Provenance,
    /// `cache[n] = lambda(n)`, NaN where `n` has a prime factor above `pmax`.
    cache: RwLock<Arc<Vec<f64>>>,
    l_one: OnceLock<LOne>,
}

/// `p^theta + p^-theta`.
pub fn kim_sarnak_bound(p: u64) -> f64 {
    let x = (p as f64).powf(THETA);
    x + 1.0 / x
}

/// Upper bound on `sum_{n > n0} d(n) n^-b` for `b > 1`, `n0 >= 1`.
///
/// Partial summation against `D(x) = sum_{n <= x} d(n) <= x (ln x + 1)`.
/// Since `|lambda(n)| <= d(n) n^theta`, this bounds tails of coefficient sums.
pub fn divisor_tail(n0: f64, b: f64) -> f64 {
    assert!(b > 1.0 && n0 >= 1.0);
    let e = b - 1.0;
    b * n0.powf(-e) * ((n0.ln() + 1.0) / e + 1.0 / (e * e))
}

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format { line, msg: msg.into() }
}

impl HeckeSystem {
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file), Provenance::File(path.display().to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes(), Provenance::Explicit("text".into()))
    }

    pub fn from_reader<R: BufRead>(reader: R, provenance: Provenance) -> Result<Self> {
        let mut header: Vec<(usize, String)> = Vec::new();
        let mut data: Vec<(usize, u64, f64)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if header.len() < 5 {
                header.push((lineno, trimmed.to_string()));
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let (Some(p), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(format_err(lineno, "expected \"<prime> <value>\""));
            };
            let p: u64 = p.parse().map_err(|_| format_err(lineno, format!("bad prime {p:?}")))?;
            let v: f64 = v.parse().map_err(|_| format_err(lineno, format!("bad value {v:?}")))?;
            if !v.is_finite() {
                return Err(format_err(lineno, "non-finite eigenvalue"));
            }
            data.push((lineno, p, v));
        }
        if header.len() < 5 {
            return Err(format_err(header.last().map_or(1, |h| h.0 + 1), "truncated header"));
        }
        let field = |idx: usize, key: &str| -> Result<&str> {
            let (lineno, text) = &header[idx];
            text.strip_prefix(key)
                .filter(|rest| rest.starts_with(char::is_whitespace))
                .map(str::trim)
                .ok_or_else(|| format_err(*lineno, format!("expected \"{key} ...\"")))
        };
        if header[0].1.split_whitespace().collect::<Vec<_>>() != ["maass", "v1"] {
            return Err(format_err(header[0].0, "expected \"maass v1\""));
        }
        let t_f: f64 = field(1, "T_f")?.parse().map_err(|_| format_err(header[1].0, "bad T_f"))?;
        if field(2, "parity")? != "even" {
            return Err(format_err(header[2].0, "only parity even is supported"));
        }
        let precision: f64 = field(3, "precision")?.parse().map_err(|_| format_err(header[3].0, "bad precision"))?;
        let pmax: u64 = field(4, "pmax")?.parse().map_err(|_| format_err(header[4].0, "bad pmax"))?;
        if !(t_f.is_finite() && precision >= 0.0 && pmax >= 2) {
            return Err(format_err(header[1].0, "header values out of range"));
        }

        let mut prime_coeffs = vec![0.0; pmax as usize + 1];
        let mut last = 1;
        for &(lineno, p, v) in &data {
            if p <= last {
                return Err(format_err(lineno, format!("prime {p} out of increasing order")));
            }
            if !is_prime(p) {
                return Err(format_err(lineno, format!("{p} is not prime")));
            }
            if p > pmax {
                return Err(format_err(lineno, format!("prime {p} above pmax {pmax}")));
            }
            prime_coeffs[p as usize] = v;
            last = p;
        }
        let mut present = vec![false; pmax as usize + 1];
        for &(_, p, _) in &data {
            present[p as usize] = true;
        }
        Self::validated(t_f, pmax, precision, prime_coeffs, &present, provenance)
    }

    /// System from explicit prime values `values(p)` for every prime `p <= pmax`.
    pub fn from_prime_values<F: Fn(u64) -> f64>(t_f: f64, pmax: u64, precision: f64, values: F, label: &str) -> Result<Self> {
        let mut prime_coeffs = vec![0.0; pmax as usize + 1];
        let mut present = vec![false; pmax as usize + 1];
        for p in crate::characters::primes_between(2, pmax) {
            prime_coeffs[p as usize] = values(p);
            present[p as usize] = true;
        }
        Self::validated(t_f, pmax, precision, prime_coeffs, &present, Provenance::Explicit(label.into()))
    }

    /// Seeded surrogate with `lambda(p) = 2 cos(theta_p)`, `theta_p` uniform on
    /// `[0, pi]`. It satisfies the Hecke relations exactly but is not automorphic.
    pub fn mock(seed: u64, t_f: f64, pmax: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prime_coeffs = vec![0.0; pmax as usize + 1];
        let mut present = vec![false; pmax as usize + 1];
        for p in crate::characters::primes_between(2, pmax) {
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            prime_coeffs[p as usize] = 2.0 * angle.cos();
            present[p as usize] = true;
        }
        Self::validated(t_f, pmax, 0.0, prime_coeffs, &present, Provenance::Mock { seed })
            .expect("2 cos(theta) is within every Kim-Sarnak bound")
    }

    fn validated(
        t_f: f64,
        pmax: u64,
        precision: f64,
        prime_coeffs: Vec<f64>,
        present: &[bool],
        provenance: Provenance,
    ) -> Result<Self> {
        for p in 2..=pmax {
            if !is_prime(p) {
                continue;
            }
            if !present[p as usize] {
                return Err(Error::Gap { p, pmax });
            }
            let value = prime_coeffs[p as usize];
            let bound = kim_sarnak_bound(p);
            if value.abs() > bound + precision {
                return Err(Error::BoundViolation { p, value, bound });
            }
        }
        Ok(Self { t_f, pmax, precision, prime_coeffs, provenance, cache: RwLock::new(Arc::new(vec![f64::NAN, 1.0])), l_one: OnceLock::new() })
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn pmax(&self) -> u64 {
        self.pmax
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_mock(&self) -> bool {
        matches!(self.provenance, Provenance::Mock { .. })
    }

    /// `lambda(p)` for a prime `p <= pmax`.
    pub fn prime_coefficient(&self, p: u64) -> Option<f64> {
        (p <= self.pmax && is_prime(p)).then(|| self.prime_coeffs[p as usize])
    }

    /// Largest `N` such that every `n <= N` has all prime factors `<= pmax`.
    pub fn reach(&self) -> u64 {
        let mut p = self.pmax + 1;
        while !is_prime(p) {
            p += 1;
        }
        p - 1
    }

    fn prime_power(&self, p: u64, k: u32) -> f64 {
        let lp = self.prime_coeffs[p as usize];
        let (mut prev, mut cur) = (1.0, lp);
        if k == 0 {
            return 1.0;
        }
        for _ in 1..k {
            let next = lp * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `lambda(n)`.
    pub fn coefficient(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(format_err(0, "coefficient index must be positive"));
        }
        let v = if n <= DENSE_LIMIT {
            self.coefficients(n)?[n as usize]
        } else {
            self.coefficient_direct(n)
        };
        if v.is_nan() {
            return Err(Error::InsufficientData { n, pmax: self.pmax });
        }
        Ok(v)
    }

    fn coefficient_direct(&self, n: u64) -> f64 {
        let mut m = n;
        let mut value = 1.0;
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                let mut k = 0;
                while m % p == 0 {
                    m /= p;
                    k += 1;
                }
                if p > self.pmax {
                    return f64::NAN;
                }
                value *= self.prime_power(p, k);
            }
            p += 1;
        }
        if m > 1 {
            if m > self.pmax {
                return f64::NAN;
            }
            value *= self.prime_coeffs[m as usize];
        }
        value
    }

    /// Shared table with `table[n] = lambda(n)` for `1 <= n <= n_max` (index 0
    /// unused). Entries with a prime factor above `pmax` are NaN.
    pub fn coefficients(&self, n_max: u64) -> Result<Arc<Vec<f64>>> {
        if n_max > DENSE_LIMIT {
            return Err(Error::InsufficientData { n: n_max, pmax: self.pmax });
        }
        {
            let cache = self.cache.read().expect("coefficient cache poisoned");
            if cache.len() as u64 > n_max {
                return Ok(Arc::clone(&cache));
            }
        }
        let mut cache = self.cache.write().expect("coefficient cache poisoned");
        if cache.len() as u64 <= n_max {
            let target = n_max.max(2 * (cache.len() as u64 - 1)).min(DENSE_LIMIT);
            *cache = Arc::new(self.sieve(target));
        }
        Ok(Arc::clone(&cache))
    }

    /// Dense coefficient table for `n <= n_max` from a smallest-prime-factor
    /// sieve; each `lambda(n)` is `lambda(p^k) lambda(n / p^k)` for the least
    /// prime `p | n`, so the values do not depend on when the cache grew.
    fn sieve(&self, n_max: u64) -> Vec<f64> {
        let len = n_max as usize + 1;
        let mut spf = vec![0u32; len];
        for i in 2..len {
            if spf[i] == 0 {
                let mut j = i;
                while j < len {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut table = vec![f64::NAN; len];
        if len > 1 {
            table[1] = 1.0;
        }
        for n in 2..len {
            let p = spf[n] as usize;
            if p as u64 > self.pmax {
                continue;
            }
            let mut m = n;
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            table[n] = self.prime_power(p as u64, k) * table[m];
        }
        table
    }

    /// Coefficient table covering `1..=n`, or the first uncovered index.
    pub fn coefficients_checked(&self, n: u64) -> Result<Arc<Vec<f64>>> {
        let table = self.coefficients(n)?;
        if let Some(bad) = (1..=n as usize).find(|&i| table[i].is_nan()) {
            return Err(Error::InsufficientData { n: bad as u64, pmax: self.pmax });
        }
        Ok(table)
    }

    /// `(sum_{n<x} |lambda(n)|) / x` and `(sum_{n<x} lambda(n)^2) / x` for each `x`.
    pub fn average_bound_report(&self, x_grid: &[u64]) -> Result<AverageBoundReport> {
        let top = x_grid.iter().copied().max().unwrap_or(1).max(2);
        let table = self.coefficients_checked(top - 1)?;
        let rows: Vec<AverageBoundRow> = x_grid
            .iter()
            .map(|&x| {
                let mut abs = Neumaier::new();
                let mut sq = Neumaier::new();
                for &v in &table[1..x as usize] {
                    abs.add(v.abs());
                    sq.add(v * v);
                }
                AverageBoundRow { x, mean_abs: abs.value() / x as f64, mean_square: sq.value() / x as f64 }
            })
            .collect();
        let max_ratio = rows.iter().map(|r| r.mean_abs.max(r.mean_square)).fold(0.0, f64::max);
        Ok(AverageBoundReport { rows, max_ratio, flagged: max_ratio > AVERAGE_BOUND_FLAG })
    }

    /// `sum_{n <= N} lambda(n) e(alpha n)`.
    pub fn additive_twist(&self, alpha: f64, n_max: u64) -> Result<Complex64> {
        let table = self.coefficients_checked(n_max)?;
        let mut acc = ComplexSum::new();
        for (n, &v) in table.iter().enumerate().take(n_max as usize + 1).skip(1) {
            // reduce alpha n mod 1 before the exponential
            acc.add(crate::e((alpha * n as f64).fract()) * v);
        }
        Ok(acc.value())
    }

    /// `L(1, f)` by two smoothed sums `sum lambda(n)/n W_kappa(n / X)`, with
    /// `W_kappa(y) = (1/2 pi i) int y^-s exp(kappa s^2) ds / s` tabulated by
    /// the contour machinery, for `kappa` in [`L_ONE_KAPPAS`].
    pub fn l_one(&self, x: f64) -> Result<LOne> {
        let reach = self.reach().min(DENSE_LIMIT);
        let mut cutoffs = Vec::new();
        for kappa in L_ONE_KAPPAS {
            let table = WeightTable::new(AfeKernel::Gaussian { kappa }, 1.0, L_ONE_WEIGHT_TOL, 1e-3)?;
            // terms with W(n / X) = 0 to double precision are dropped
            let n_max = ((table.x_hi() * x).ceil() as u64).min(reach);
            let tail = self.smoothed_tail(&table, x, n_max, 1.0);
            if tail > L_ONE_TAIL_TOL {
                return Err(Error::InsufficientData { n: (table.x_hi() * x).ceil() as u64, pmax: self.pmax });
            }
            let coeffs = self.coefficients_checked(n_max)?;
            let mut acc = Neumaier::new();
            let mut abs_mass = Neumaier::new();
            for n in 1..=n_max as usize {
                let a = coeffs[n] / n as f64;
                acc.add(a * table.value(n as f64 / x));
                abs_mass.add(a.abs());
            }
            cutoffs.push(LOneCutoff {
                kappa,
                value: acc.value(),
                terms: n_max,
                tail_bound: tail,
                weight_error: abs_mass.value() * table.pointwise_error(),
            });
        }
        let disagreement = (cutoffs[0].value - cutoffs[1].value).abs();
        if disagreement > L_ONE_MAX_DISAGREEMENT {
            return Err(Error::NonConvergence { what: format!("L(1, f) at X = {x}"), disagreement });
        }
        Ok(LOne { value: cutoffs[0].value, x, disagreement, cutoffs })
    }

    /// Default smoothing scale for `L(1, f)`: the coefficient reach over 250,
    /// which leaves the Gaussian cutoffs negligible at the end of the data.
    pub fn l_one_scale(&self) -> f64 {
        (self.reach().min(DENSE_LIMIT) as f64 / 250.0).floor()
    }

    /// [`Self::l_one`] at [`Self::l_one_scale`], computed once per system.
    pub fn l_one_default(&self) -> Result<&LOne> {
        if let Some(v) = self.l_one.get() {
            return Ok(v);
        }
        let v = self.l_one(self.l_one_scale())?;
        Ok(self.l_one.get_or_init(|| v))
    }

    /// Certified bound on `sum_{n > n_max} |lambda(n)| n^-a |W(n / X)|`
    /// from `|W(y)| <= (y e^ls)^-C B(C)` and `|lambda(n)| <= d(n) n^theta`.
    pub fn smoothed_tail(&self, table: &WeightTable, x: f64, n_max: u64, a: f64) -> f64 {
        let scale = table.kernel().log_scale().exp();
        table
            .far_bounds()
            .iter()
            .filter(|&&(c, _)| a + c - THETA > 1.0)
            .map(|&(c, b)| b * (x / scale).powf(c) * divisor_tail(n_max as f64, a + c - THETA))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smoothing parameters of the two independent `L(1, f)` cutoffs.
pub const L_ONE_KAPPAS: [f64; 2] = [0.25, 0.2];
/// Contract: the two cutoffs should agree to this.
pub const L_ONE_AGREEMENT: f64 = 1e-6;
/// Beyond this disagreement `l_one` reports non-convergence.
pub const L_ONE_MAX_DISAGREEMENT: f64 = 1e-4;
const L_ONE_WEIGHT_TOL: f64 = 1e-12;
const L_ONE_TAIL_TOL: f64 = 1e-10;
/// Mean ratios above this are flagged by [`HeckeSystem::average_bound_report`].
pub const AVERAGE_BOUND_FLAG: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct AverageBoundRow {
    pub x: u64,
    pub mean_abs: f64,
    pub mean_square: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageBoundReport {
    pub rows: Vec<AverageBoundRow>,
    pub max_ratio: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LOneCutoff {
    pub kappa: f64,
    pub value: f64,
    pub terms: u64,
    /// Bound on the coefficients dropped past `terms`.
    pub tail_bound: f64,
    /// Bound on the effect of the tabulated weight's pointwise error.
    pub weight_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LOne {
    pub value: f64,
    pub x: f64,
    pub disagreement: f64,
    pub cutoffs: Vec<LOneCutoff>,
}

impl LOne {
    pub fn agrees(&self) -> bool {
        self.disagreement <= L_ONE_AGREEMENT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "maass v1\nT_f 9.5\nparity even\nprecision 1e-9\npmax 10\n# comment\n2 0.5\n3 -1.0\n5 0.25\n7 1.5\n";

    #[test]
    fn parses_and_extends() {
        let f = HeckeSystem::parse(SMALL).unwrap();
        assert_eq!(f.t_f(), 9.5);
        assert_eq!(f.coefficient(1).unwrap(), 1.0);
        assert_eq!(f.coefficient(4).unwrap(), 0.5 * 0.5 - 1.0);
        assert_eq!(f.coefficient(6).unwrap(), 0.5 * -1.0);
        assert_eq!(f.coefficient(8).unwrap(), 0.5 * (0.25 - 1.0) - 0.5);
        assert!(matches!(f.coefficient(11), Err(Error::InsufficientData { n: 11, pmax: 10 })));
        assert!(matches!(f.coefficient(22), Err(Error::InsufficientData { .. })));
        assert_eq!(f.reach(), 10);
    }

    #[test]
    fn rejects_bad_files() {
        let bound = SMALL.replace("2 0.5", "2 3.0");
        assert!(matches!(HeckeSystem::parse(&bound), Err(Error::BoundViolation { p: 2, .. })));
        let gap = SMALL.replace("3 -1.0\n", "");
        assert!(matches!(HeckeSystem::parse(&gap), Err(Error::Gap { p: 3, pmax: 10 })));
        let order = SMALL.replace("3 -1.0\n5 0.25", "5 0.25\n3 -1.0");
        assert!(matches!(HeckeSystem::parse(&order), Err(Error::Format { .. })));
        assert!(matches!(HeckeSystem::parse("maass v2\n"), Err(Error::Format { .. })));
        let odd = SMALL.replace("parity even", "parity odd");
        assert!(matches!(HeckeSystem::parse(&odd), Err(Error::Format { line: 3, .. })));
        let composite = SMALL.replace("7 1.5", "7 1.5\n9 0.1");
        assert!(matches!(HeckeSystem::parse(&composite), Err(Error::Format { .. })));
    }

    #[test]
    fn direct_and_sieved_coefficients_agree() {
        let f = HeckeSystem::mock(1, 10.0, 200);
        for n in 1..5000 {
            let a = f.coefficients(5000).unwrap()[n as usize];
            let b = f.coefficient_direct(n);
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()) || (a.is_nan() && b.is_nan()), "n = {n}");
        }
    }

    #[test]
    fn divisor_tail_dominates_partial_sums() {
        // sum_{n > 100} d(n) n^-2 computed to n = 10^6 plus a crude remainder
        let mut d = vec![0u32; 1_000_001];
        for i in 1..d.len() {
            for j in (i..d.len()).step_by(i) {
                d[j] += 1;
            }
        }
        let partial: f64 = (101..d.len()).map(|n| d[n] as f64 / (n as f64).powi(2)).sum();
        let bound = divisor_tail(100.0, 2.0);
        assert!(partial <= bound && bound < 3.0 * partial, "{partial} vs {bound}");
    }
}
