//! Central values `L(1/2, chi)` and `L(1/2, f x chi)` for even primitive `chi`.
//!
//! Approximate functional equations, with `eps(chi) = tau(chi) / sqrt(q)`:
//!
//! ```text
//!   L(1/2, chibar)  = sum chibar(m) m^-1/2 V1(m / sqrt q) + eps(chibar) sum chi(m) m^-1/2 V1(m / sqrt q)
//!   L(1/2, f x chi) = sum lambda(n) chi(n) n^-1/2 V2(n / q) + eps(chi)^2 sum lambda(n) chibar(n) n^-1/2 V2(n / q)
//! ```
//!
//! The first identity is kept in this orientation: [`dirichlet_central_afe`]
//! returns `L(1/2, chibar)`, which is the factor the moment needs.
//!
//! Both sums depend on `n` only through the coefficient weight and the
//! residue of `n` mod `q`, so each is `sum_a chi(a) A[a]` for class sums
//! `A[a]`. [`AfeClassSums`] holds those; a single DFT then gives every
//! character at once.
//!
//! The Hurwitz-zeta oracle uses `L(s, chi) = q^-s sum_a chi(a) zeta(s, a/q)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::{character_transform, DirichletCharacter, PrimeModulus};
use crate::error::{Error, Result};
use crate::exponential_sums::{gauss_sum, gauss_sums_bulk};
use crate::hecke::HeckeSystem;
use crate::sum::{ComplexSum, Neumaier};
use crate::weights::{shared_v1, shared_v2, WeightTable};

/// Certified accuracy of [`hurwitz_zeta`].
pub const HURWITZ_TOL: f64 = 1e-12;

/// Target bound for the coefficients dropped past an AFE cutoff.
pub const AFE_TAIL_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Afe,
    HurwitzOracle,
}

/// A computed central value with its provenance and error bar.
#[derive(Clone, Debug, Serialize)]
pub struct CentralValue {
    pub value: Complex64,
    pub method: Method,
    pub q: u64,
    /// Index `k` of the character `chi` the value was requested for.
    pub index: u64,
    /// `true` for `L(1/2, f x chi)`.
    pub twisted: bool,
    /// `true` when `value` is `L(1/2, chibar)` rather than `L(1/2, chi)`.
    pub conjugated: bool,
    /// Number of Dirichlet-series terms (or Hurwitz terms for the oracle).
    pub cutoff: u64,
    pub err_estimate: f64,
    /// The two sums of the approximate functional equation, root number
    /// included in the second; zero for the oracle.
    pub branches: [Complex64; 2],
}

// Bernoulli numbers B_2, B_4, ..., B_26.
const BERNOULLI: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

/// `zeta(s, a) = sum_{n >= 0} (n + a)^-s`, analytically continued.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    hurwitz_zeta_certified(s, a).map(|(v, _)| v)
}

/// Euler-Maclaurin evaluation with its remainder bound:
///
/// ```text
///   zeta(s, a) = sum_{n<N} (n+a)^-s + (N+a)^(1-s)/(s-1) + (N+a)^-s / 2
///              + sum_{k=1}^{M-1} B_2k/(2k)! (s)_(2k-1) (N+a)^(-s-2k+1) + R
///   |R| <= |B_2M|/(2M)! |(s)_2M| (N+a)^(-sigma-2M+1) / (sigma+2M-1)
/// ```
///
/// using `|B~_2M(x)| <= |B_2M|` for the periodic Bernoulli function. `N` is
/// doubled until the bound is below [`HURWITZ_TOL`].
pub fn hurwitz_zeta_certified(s: Complex64, a: f64) -> Result<(Complex64, f64)> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole(1.0));
    }
    assert!(a > 0.0, "Hurwitz parameter must be positive");
    let m = BERNOULLI.len();
    assert!(s.re + 2.0 * m as f64 - 1.0 > 0.0, "Re s too negative for the Euler-Maclaurin tail");
    let mut n = (s.norm().ceil() as usize).max(10);
    loop {
        let na = n as f64 + a;
        let bound = {
            let mut poch = 1.0;
            let mut fact = 1.0;
            for j in 0..2 * m {
                poch *= (s + j as f64).norm();
                fact *= (j + 1) as f64;
            }
            let sigma = s.re + 2.0 * m as f64 - 1.0;
            BERNOULLI[m - 1].abs() / fact * poch * na.powf(-sigma) / sigma
        };
        if bound > HURWITZ_TOL && n < 1 << 20 {
            n *= 2;
            continue;
        }
        let mut acc = ComplexSum::new();
        for k in 0..n {
            acc.add((-s * (k as f64 + a).ln()).exp());
        }
        let ln_na = na.ln();
        acc.add(((1.0 - s) * ln_na).exp() / (s - 1.0));
        acc.add((-s * ln_na).exp() / 2.0);
        // (s)_(2k-1) / (2k)! built incrementally
        let mut poch = s;
        let mut fact = 2.0;
        for k in 1..m {
            let term = BERNOULLI[k - 1] / fact * poch * ((-s - (2 * k - 1) as f64) * ln_na).exp();
            acc.add(term);
            poch *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
            fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
        }
        return Ok((acc.value(), bound));
    }
}

fn require_primitive(chi: &DirichletCharacter<'_>) -> Result<()> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    Ok(())
}

fn require_even_primitive(chi: &DirichletCharacter<'_>) -> Result<()> {
    require_primitive(chi)?;
    if !chi.is_even() {
        return Err(Error::OddCharacter);
    }
    Ok(())
}

/// `zeta(1/2, a/q)` for `a = 1..q-1` (index 0 unused), with the largest remainder bound.
pub fn hurwitz_half_values(pm: &PrimeModulus) -> Result<(Vec<f64>, f64)> {
    let q = pm.q();
    let half = Complex64::new(0.5, 0.0);
    let mut values = vec![0.0; q as usize];
    let mut worst: f64 = 0.0;
    for a in 1..q {
        let (z, b) = hurwitz_zeta_certified(half, a as f64 / q as f64)?;
        values[a as usize] = z.re;
        worst = worst.max(b);
    }
    Ok((values, worst))
}

/// `L(1/2, chi) = q^-1/2 sum_a chi(a) zeta(1/2, a/q)` by direct summation.
pub fn dirichlet_central_oracle(chi: &DirichletCharacter<'_>) -> Result<CentralValue> {
    require_primitive(chi)?;
    let pm = chi.modulus();
    let (zetas, _) = hurwitz_half_values(pm)?;
    let value = (1..pm.q() as i64).map(|a| chi.value(a) * zetas[a as usize]).collect::<ComplexSum>().value()
        / (pm.q() as f64).sqrt();
    Ok(oracle_value(pm, chi.index(), value))
}

/// Oracle values `L(1/2, chi_k)` for every index `k` (index 0 meaningless),
/// by one DFT of the Hurwitz values.
pub fn dirichlet_oracle_all(pm: &PrimeModulus) -> Result<Vec<CentralValue>> {
    let (zetas, _) = hurwitz_half_values(pm)?;
    let sqrt_q = (pm.q() as f64).sqrt();
    let sums = character_transform(pm, |a| Complex64::new(zetas[a as usize], 0.0));
    Ok(sums.into_iter().enumerate().map(|(k, v)| oracle_value(pm, k as u64, v / sqrt_q)).collect())
}

fn oracle_value(pm: &PrimeModulus, index: u64, value: Complex64) -> CentralValue {
    let q = pm.q();
    CentralValue {
        value,
        method: Method::HurwitzOracle,
        q,
        index,
        twisted: false,
        conjugated: false,
        cutoff: q - 1,
        err_estimate: (q - 1) as f64 * HURWITZ_TOL,
        branches: [Complex64::new(0.0, 0.0); 2],
    }
}

/// `M_cut = ceil(sqrt(q) (ln q)^2)`.
pub fn dirichlet_cutoff(q: u64) -> u64 {
    let lq = (q as f64).ln();
    ((q as f64).sqrt() * lq * lq).ceil() as u64
}

/// `N_cut = ceil(q (ln q)^2)`.
pub fn twist_cutoff(q: u64) -> u64 {
    let lq = (q as f64).ln();
    (q as f64 * lq * lq).ceil() as u64
}

/// Residue-class sums of one truncated AFE series,
/// `A[a] = sum_{n <= cutoff, n = a mod q} c(n) n^-1/2 V(n / X)`.
#[derive(Clone, Debug)]
pub struct AfeClassSums {
    pub q: u64,
    /// Indexed by residue; `A[0]` collects multiples of `q` and is never used.
    pub sums: Vec<f64>,
    /// Number of terms actually summed (the formula cutoff, extended when its
    /// tail certificate was not below [`AFE_TAIL_TOL`]).
    pub cutoff: u64,
    /// The formula cutoff before any extension.
    pub nominal_cutoff: u64,
    /// Bound on one branch: dropped tail plus propagated weight error.
    pub branch_error: f64,
}

impl AfeClassSums {
    /// Class sums for the Dirichlet series of `L(1/2, chi)`, `V1(m / sqrt q)`.
    pub fn dirichlet(pm: &PrimeModulus) -> Result<Self> {
        let q = pm.q();
        let table = shared_v1(1.0 / (q as f64).sqrt())?;
        let sqrt_q = (q as f64).sqrt();
        let nominal = dirichlet_cutoff(q);
        // |V1(x)| <= (sqrt(pi) x)^-C B(C), and sum_{m > M} m^(-1/2-C) <= M^(1/2-C) / (C - 1/2)
        let tail = |m: u64| {
            let y_scale = table.kernel().log_scale().exp() / sqrt_q;
            table
                .far_bounds()
                .iter()
                .map(|&(c, b)| b * y_scale.powf(-c) * (m as f64).powf(0.5 - c) / (c - 0.5))
                .fold(f64::INFINITY, f64::min)
        };
        let cutoff = extend_cutoff(nominal, tail);
        Self::build(q, nominal, cutoff, tail(cutoff), |_| Ok(1.0), &table, sqrt_q)
    }

    /// Class sums for the series of `L(1/2, f x chi)`, `V2(n / q)`.
    pub fn twist(f: &HeckeSystem, pm: &PrimeModulus) -> Result<Self> {
        let q = pm.q();
        let table = shared_v2(f.t_f(), 1.0 / q as f64)?;
        let nominal = twist_cutoff(q);
        let tail = |n: u64| f.smoothed_tail(&table, q as f64, n, 0.5);
        let cutoff = extend_cutoff(nominal, tail);
        let coeffs = f.coefficients_checked(cutoff)?;
        Self::build(q, nominal, cutoff, tail(cutoff), |n| Ok(coeffs[n as usize]), &table, q as f64)
    }

    fn build<C>(q: u64, nominal: u64, cutoff: u64, tail: f64, coeff: C, table: &WeightTable, x: f64) -> Result<Self>
    where
        C: Fn(u64) -> Result<f64>,
    {
        let mut acc = vec![Neumaier::new(); q as usize];
        let mut abs_mass = Neumaier::new();
        for n in 1..=cutoff {
            let c = coeff(n)? / (n as f64).sqrt();
            acc[(n % q) as usize].add(c * table.value(n as f64 / x));
            abs_mass.add(c.abs());
        }
        Ok(Self {
            q,
            sums: acc.iter().map(Neumaier::value).collect(),
            cutoff,
            nominal_cutoff: nominal,
            branch_error: tail + abs_mass.value() * table.pointwise_error(),
        })
    }

    /// `sum_a chi(a) A[a]`.
    pub fn pair(&self, chi: &DirichletCharacter<'_>) -> Complex64 {
        (1..self.q as i64).map(|a| chi.value(a) * self.sums[a as usize]).collect::<ComplexSum>().value()
    }

    /// `sum_a chi_k(a) A[a]` for every index `k`.
    pub fn pair_all(&self, pm: &PrimeModulus) -> Vec<Complex64> {
        character_transform(pm, |a| Complex64::new(self.sums[a as usize], 0.0))
    }
}

/// Smallest cutoff `>= nominal` (doubling) whose tail bound is below [`AFE_TAIL_TOL`].
fn extend_cutoff<T: Fn(u64) -> f64>(nominal: u64, tail: T) -> u64 {
    let mut n = nominal.max(1);
    while tail(n) > AFE_TAIL_TOL && n < 1 << 40 {
        n *= 2;
    }
    n
}

/// `L(1/2, chibar)` from the Dirichlet approximate functional equation.
pub fn dirichlet_central_afe(chi: &DirichletCharacter<'_>) -> Result<CentralValue> {
    require_even_primitive(chi)?;
    let pm = chi.modulus();
    let sums = AfeClassSums::dirichlet(pm)?;
    let eps_bar = gauss_sum(&chi.conj()) / (pm.q() as f64).sqrt();
    let first = sums.pair(&chi.conj());
    let second = eps_bar * sums.pair(chi);
    Ok(dirichlet_value(pm, chi.index(), &sums, first, second))
}

fn dirichlet_value(pm: &PrimeModulus, index: u64, sums: &AfeClassSums, first: Complex64, second: Complex64) -> CentralValue {
    CentralValue {
        value: first + second,
        method: Method::Afe,
        q: pm.q(),
        index,
        twisted: false,
        conjugated: true,
        cutoff: sums.cutoff,
        err_estimate: 2.0 * sums.branch_error,
        branches: [first, second],
    }
}

/// `L(1/2, f x chi)` from the twisted approximate functional equation.
pub fn twist_central_afe(f: &HeckeSystem, chi: &DirichletCharacter<'_>) -> Result<CentralValue> {
    require_even_primitive(chi)?;
    let pm = chi.modulus();
    let sums = AfeClassSums::twist(f, pm)?;
    let tau = gauss_sum(chi);
    let first = sums.pair(chi);
    let second = tau * tau / pm.q() as f64 * sums.pair(&chi.conj());
    Ok(twist_value(pm, chi.index(), &sums, first, second))
}

fn twist_value(pm: &PrimeModulus, index: u64, sums: &AfeClassSums, first: Complex64, second: Complex64) -> CentralValue {
    CentralValue {
        value: first + second,
        method: Method::Afe,
        q: pm.q(),
        index,
        twisted: true,
        conjugated: false,
        cutoff: sums.cutoff,
        err_estimate: 2.0 * sums.branch_error,
        branches: [first, second],
    }
}

/// Both central values for every even primitive character, in index order:
/// `(L(1/2, f x chi), L(1/2, chibar))`, from class sums and one DFT each.
pub fn central_values_all(f: &HeckeSystem, pm: &PrimeModulus) -> Result<Vec<(CentralValue, CentralValue)>> {
    let dir = AfeClassSums::dirichlet(pm)?;
    let tw = AfeClassSums::twist(f, pm)?;
    let t_dir = dir.pair_all(pm);
    let t_tw = tw.pair_all(pm);
    let taus = gauss_sums_bulk(pm);
    let order = pm.order() as usize;
    let q = pm.q() as f64;
    Ok(pm
        .even_primitive()
        .map(|chi| {
            let k = chi.index() as usize;
            let kbar = (order - k) % order;
            // A is real, so sum_a chibar(a) A[a] is the conjugate of the chi sum
            let twist = twist_value(pm, k as u64, &tw, t_tw[k], taus[k] * taus[k] / q * t_tw[kbar]);
            let dirichlet = dirichlet_value(pm, k as u64, &dir, t_dir[kbar], taus[kbar] / q.sqrt() * t_dir[k]);
            (twist, dirichlet)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_values() {
        let z2 = hurwitz_zeta(Complex64::new(2.0, 0.0), 1.0).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-13 && z2.im.abs() < 1e-15);
        let zh = hurwitz_zeta(Complex64::new(0.5, 0.0), 1.0).unwrap();
        assert!((zh.re + 1.460_354_508_809_586_8).abs() < 1e-12);
        // zeta(1/2, 1/2) = (sqrt 2 - 1) zeta(1/2)
        let zq = hurwitz_zeta(Complex64::new(0.5, 0.0), 0.5).unwrap();
        assert!((zq.re + (2f64.sqrt() - 1.0) * 1.460_354_508_809_586_8).abs() < 1e-12);
        assert!(matches!(hurwitz_zeta(Complex64::new(1.0, 0.0), 0.3), Err(Error::Pole(_))));
    }

    #[test]
    fn zeta_on_critical_line() {
        // zeta(1/2 + 14.134725141734693i) is a zero
        let z = hurwitz_zeta(Complex64::new(0.5, 14.134_725_141_734_693), 1.0).unwrap();
        assert!(z.norm() < 1e-11, "{z}");
    }

    #[test]
    fn cutoffs() {
        assert_eq!(dirichlet_cutoff(101), (101f64.sqrt() * 101f64.ln().powi(2)).ceil() as u64);
        assert!(twist_cutoff(2000) < 125_000);
    }
}
