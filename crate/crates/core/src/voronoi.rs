//! Numerical check of GL(2) Voronoi summation for an even level-one form,
//!
//! ```text
//!   sum_n lambda(n) e(n dbar / q) psi(n / N)
//!     = q sum_n lambda(n)/n e( n d / q) Psi_+(n N / q^2)
//!     + q sum_n lambda(n)/n e(-n d / q) Psi_-(n N / q^2).
//! ```
//!
//! The left side is a finite sum. The right side is truncated by doubling
//! from `q^2 (log q)^2 / N` until one more doubling moves it by less than
//! `1e-8 (1 + |value|)`. A rigorous bound on what is left comes from
//! `|Psi_pm(x)| <= (pi^2 x)^(-sigma) B(sigma)` together with the
//! Kim-Sarnak bound on `lambda(n)`.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{inv_mod, PrimeModulus};
use crate::error::{Error, Result};
use crate::hecke::{divisor_tail, HeckeSystem, THETA};
use crate::sum::{ComplexSum, Neumaier};
use crate::weights::{PsiKernel, TestFunction, PSI_TOL};

/// Relative change below which one more doubling of the dual sum stops.
pub const DOUBLING_TOL: f64 = 1e-8;
/// Relative size the certified tail should reach.
pub const TAIL_TARGET: f64 = 1e-9;
/// Abscissae at which decay constants of `Psi_pm` are computed.
pub const DECAY_ABSCISSAE: [f64; 2] = [1.0, 2.0];

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DualSum {
    pub value: Complex64,
    /// The `Psi_+` part.
    pub plus: Complex64,
    /// The `Psi_-` part.
    pub minus: Complex64,
    /// Last index included.
    pub truncation: u64,
    pub nominal_truncation: u64,
    /// Size of the contribution of the last doubling.
    pub last_change: f64,
    /// Rigorous bound on the terms past `truncation`.
    pub tail_bound: f64,
    /// Bound on the error of the sampled kernels summed over the included terms.
    pub kernel_error: f64,
    /// Propagated error of the ingested coefficients over the included terms.
    pub data_error: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VoronoiCheck {
    pub q: u64,
    pub d: i64,
    pub d_inverse: u64,
    pub n_scale: u64,
    pub test_function: TestFunction,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub dual: DualSum,
    /// `|lhs - rhs| / (1 + |lhs|)`.
    pub residual: f64,
    /// Whether the certified tail is below `1e-9 (1 + |lhs|)`.
    pub tail_certified: bool,
    /// Propagated data error of the left side.
    pub lhs_data_error: f64,
    /// The residual should not exceed this (tails, kernels, data, and `1e-6`).
    pub error_budget: f64,
    /// Set for mock coefficients, where the identity is expected to fail.
    pub negative_control: bool,
}

fn inverse(d: i64, pm: &PrimeModulus) -> Result<(u64, u64)> {
    let q = pm.q();
    let r = d.rem_euclid(q as i64) as u64;
    if r == 0 {
        return Err(Error::NotCoprime { q, detail: format!("d = {d}") });
    }
    Ok((r, inv_mod(r, q)))
}

fn phase(num: u64, q: u64) -> Complex64 {
    crate::e((num % q) as f64 / q as f64)
}

/// Bound on the error of `lambda(n)` from an error `precision` in every
/// `lambda(p)`: first-order propagation through the Hecke recursion and
/// multiplicativity.
pub fn coefficient_error(f: &HeckeSystem, n: u64) -> f64 {
    let mut m = n;
    let mut parts: Vec<(f64, f64)> = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            parts.push(prime_power_sensitivity(f, p, k));
        }
        p += 1;
    }
    if m > 1 {
        parts.push(prime_power_sensitivity(f, m, 1));
    }
    let total: f64 = (0..parts.len())
        .map(|i| parts.iter().enumerate().map(|(j, &(v, dv))| if i == j { dv } else { v.abs() }).product::<f64>())
        .sum();
    f.precision() * total
}

/// `(lambda(p^k), |d lambda(p^k) / d lambda(p)|)`.
fn prime_power_sensitivity(f: &HeckeSystem, p: u64, k: u32) -> (f64, f64) {
    let a = f.prime_coefficient(p).unwrap_or(f64::NAN);
    let (mut prev, mut cur) = (1.0, a);
    let (mut dprev, mut dcur) = (0.0, 1.0);
    for _ in 1..k {
        let next = a * cur - prev;
        let dnext = cur + a * dcur - dprev;
        (prev, cur, dprev, dcur) = (cur, next, dcur, dnext);
    }
    (cur, dcur.abs())
}

/// `sum_{n in [N, 2N]} lambda(n) e(n dbar / q) psi(n / N)`.
pub fn voronoi_lhs(f: &HeckeSystem, d: i64, pm: &PrimeModulus, n_scale: u64, psi: &TestFunction) -> Result<Complex64> {
    Ok(lhs_with_error(f, d, pm, n_scale, psi)?.0)
}

fn lhs_with_error(
    f: &HeckeSystem,
    d: i64,
    pm: &PrimeModulus,
    n_scale: u64,
    psi: &TestFunction,
) -> Result<(Complex64, f64)> {
    let (_, dbar) = inverse(d, pm)?;
    let q = pm.q();
    let coeffs = f.coefficients_checked(2 * n_scale)?;
    let mut acc = ComplexSum::new();
    let mut err = Neumaier::new();
    for n in n_scale..=2 * n_scale {
        let w = psi.value(n as f64 / n_scale as f64);
        if w != 0.0 {
            acc.add(phase(n * dbar, q) * (coeffs[n as usize] * w));
            err.add(w.abs() * coeffs_error_or_zero(f, n));
        }
    }
    Ok((acc.value(), err.value()))
}

fn coeffs_error_or_zero(f: &HeckeSystem, n: u64) -> f64 {
    if f.is_mock() {
        0.0
    } else {
        coefficient_error(f, n)
    }
}

type KernelKey = (u64, Vec<u64>, u64, u64);

static KERNELS: Mutex<Vec<(KernelKey, Arc<PsiKernel>)>> = Mutex::new(Vec::new());
static DECAY: Mutex<Vec<((u64, Vec<u64>, u64), f64)>> = Mutex::new(Vec::new());

fn psi_key(psi: &TestFunction) -> Vec<u64> {
    psi.parts().iter().flat_map(|p| [p.amplitude.to_bits(), p.lo.to_bits(), p.hi.to_bits()]).collect()
}

fn kernel(psi: &TestFunction, t_f: f64, x_min: f64, x_max: f64) -> Result<Arc<PsiKernel>> {
    let key = (t_f.to_bits(), psi_key(psi), x_min.to_bits(), x_max.to_bits());
    let mut cache = KERNELS.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, k)) = cache.iter().find(|(k, _)| *k == key) {
        return Ok(k.clone());
    }
    let k = Arc::new(PsiKernel::new(psi, t_f, 0.0, PSI_TOL, x_min, x_max)?);
    cache.push((key, k.clone()));
    Ok(k)
}

fn decay_constant(psi: &TestFunction, t_f: f64, sigma: f64) -> Result<f64> {
    let key = (t_f.to_bits(), psi_key(psi), sigma.to_bits());
    let mut cache = DECAY.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, b)) = cache.iter().find(|(k, _)| *k == key) {
        return Ok(*b);
    }
    let b = PsiKernel::decay_constant(psi, t_f, sigma)?;
    cache.push((key, b));
    Ok(b)
}

/// Bound on `q sum_{n > n0} |lambda(n)|/n (|Psi_+| + |Psi_-|)(n N / q^2)`,
/// the best over [`DECAY_ABSCISSAE`].
pub fn dual_tail_bound(psi: &TestFunction, t_f: f64, q: u64, n_scale: u64, n0: u64) -> Result<f64> {
    let y = std::f64::consts::PI.powi(2) * n_scale as f64 / (q * q) as f64;
    let mut best = f64::INFINITY;
    for sigma in DECAY_ABSCISSAE {
        let b = decay_constant(psi, t_f, sigma)?;
        // |lambda(n)| <= d(n) n^theta
        let bound = 2.0 * q as f64 * b * y.powf(-sigma) * divisor_tail(n0 as f64, 1.0 + sigma - THETA);
        best = best.min(bound);
    }
    Ok(best)
}

/// `ceil(q^2 (log q)^2 / N)`.
pub fn nominal_truncation(q: u64, n_scale: u64) -> u64 {
    let qf = q as f64;
    ((qf * qf * qf.ln().powi(2) / n_scale as f64).ceil() as u64).max(1)
}

struct Terms {
    plus: Complex64,
    minus: Complex64,
    kernel: f64,
    data: f64,
}

fn block(
    f: &HeckeSystem,
    k: &PsiKernel,
    coeffs: &[f64],
    d: u64,
    q: u64,
    xs: f64,
    range: std::ops::RangeInclusive<u64>,
) -> Terms {
    let terms: Vec<(Complex64, Complex64, f64, f64)> = range
        .into_par_iter()
        .map(|n| {
            let (a, b) = k.eval_real(n as f64 * xs);
            let c = coeffs[n as usize] / n as f64;
            let z = phase(n * d, q);
            let kernel = 2.0 * (coeffs[n as usize].abs() / n as f64) * (PSI_TOL + k.tail_bound());
            let data = coeffs_error_or_zero(f, n) / n as f64 * (a.abs() + b.abs());
            (z * (c * a), z.conj() * (c * b), kernel, data)
        })
        .collect();
    let mut plus = ComplexSum::new();
    let mut minus = ComplexSum::new();
    let mut kernel = Neumaier::new();
    let mut data = Neumaier::new();
    for (p, m, ke, de) in terms {
        plus.add(p);
        minus.add(m);
        kernel.add(ke);
        data.add(de);
    }
    let qf = q as f64;
    Terms { plus: plus.value() * qf, minus: minus.value() * qf, kernel: kernel.value() * qf, data: data.value() * qf }
}

/// The dual side, truncated as described in the module docs. Stops at the
/// coefficient reach if doubling has not settled by then.
pub fn voronoi_rhs(f: &HeckeSystem, d: i64, pm: &PrimeModulus, n_scale: u64, psi: &TestFunction) -> Result<DualSum> {
    let (d, _) = inverse(d, pm)?;
    let q = pm.q();
    if 2 * n_scale > f.reach() {
        return Err(Error::InsufficientDataAt { q, n: 2 * n_scale, pmax: f.pmax() });
    }
    let reach = f.reach().min(crate::hecke::DENSE_LIMIT);
    let xs = n_scale as f64 / (q * q) as f64;
    let k = kernel(psi, f.t_f(), xs, xs * reach as f64)?;
    let coeffs = f.coefficients_checked(reach)?;
    let nominal = nominal_truncation(q, n_scale).min(reach);
    let mut t = nominal;
    let mut acc = block(f, &k, &coeffs, d, q, xs, 1..=t);
    let mut last_change = f64::INFINITY;
    while t < reach {
        let next = (2 * t).min(reach);
        let b = block(f, &k, &coeffs, d, q, xs, t + 1..=next);
        acc.plus += b.plus;
        acc.minus += b.minus;
        acc.kernel += b.kernel;
        acc.data += b.data;
        last_change = (b.plus + b.minus).norm();
        t = next;
        if last_change <= DOUBLING_TOL * (1.0 + (acc.plus + acc.minus).norm()) {
            break;
        }
    }
    Ok(DualSum {
        value: acc.plus + acc.minus,
        plus: acc.plus,
        minus: acc.minus,
        truncation: t,
        nominal_truncation: nominal,
        last_change,
        tail_bound: dual_tail_bound(psi, f.t_f(), q, n_scale, t)?,
        kernel_error: acc.kernel,
        data_error: acc.data,
    })
}

/// Both sides of the identity and their residual.
pub fn voronoi_check(
    f: &HeckeSystem,
    d: i64,
    pm: &PrimeModulus,
    n_scale: u64,
    psi: &TestFunction,
) -> Result<VoronoiCheck> {
    let (lhs, lhs_data_error) = lhs_with_error(f, d, pm, n_scale, psi)?;
    let (_, d_inverse) = inverse(d, pm)?;
    let dual = voronoi_rhs(f, d, pm, n_scale, psi)?;
    let scale = 1.0 + lhs.norm();
    let residual = (lhs - dual.value).norm() / scale;
    let error_budget =
        (dual.tail_bound + dual.kernel_error + dual.data_error + lhs_data_error) / scale + 1e-6;
    Ok(VoronoiCheck {
        q: pm.q(),
        d,
        d_inverse,
        n_scale,
        test_function: psi.clone(),
        lhs,
        rhs: dual.value,
        residual,
        tail_certified: dual.tail_bound <= TAIL_TARGET * scale,
        lhs_data_error,
        error_budget,
        negative_control: f.is_mock(),
        dual,
    })
}
