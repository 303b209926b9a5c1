//! Compactly supported test functions and their Mellin transforms.
//!
//! The building block is `phi(u) = exp(g(u))`, `g(u) = -1 / (1 - u^2)` on
//! `(-1, 1)`, moved affinely onto a subinterval of `[1, 2]`. Derivatives
//! come from the Leibniz recursion for `r_n = phi^(n) / phi`,
//!
//! ```text
//!   r_{n+1} = sum_j binom(n, j) g^(j+1) r_{n-j},
//!   g^(m)(u) = -m!/2 ((1-u)^-(m+1) + (-1)^m (1+u)^-(m+1)),
//! ```
//!
//! which stays accurate near the endpoints where an expanded polynomial
//! form loses everything to cancellation.

use num_complex::Complex64;
use serde::Serialize;

/// Highest derivative order used for integration by parts.
pub const MAX_DERIVATIVE: usize = 24;

/// `phi^(n)(u)` for `n = 0..=k`.
pub fn unit_bump_derivatives(k: usize, u: f64) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    let v = 1.0 - u * u;
    if v <= 0.0 || 1.0 / v > 700.0 {
        return out;
    }
    let (a, b) = (1.0 / (1.0 - u), 1.0 / (1.0 + u));
    // g^(m) for m = 1..=k
    let mut g = vec![0.0; k + 1];
    let (mut pa, mut pb, mut fact) = (a, b, 1.0);
    for (m, gm) in g.iter_mut().enumerate().skip(1) {
        pa *= a;
        pb *= -b;
        fact *= m as f64;
        *gm = -0.5 * fact * (pa + pb);
    }
    let mut r = vec![0.0; k + 1];
    r[0] = 1.0;
    let mut binom = vec![1.0; k + 1];
    for n in 0..k {
        // binom holds row n of Pascal's triangle
        r[n + 1] = (0..=n).map(|j| binom[j] * g[j + 1] * r[n - j]).sum();
        for j in (1..=n).rev() {
            binom[j] += binom[j - 1];
        }
        binom[n + 1] = 1.0;
    }
    let phi = (-1.0 / v).exp();
    for (o, rn) in out.iter_mut().zip(&r) {
        *o = phi * rn;
    }
    out
}

/// `phi^(k)(u)` for the unit bump on `(-1, 1)`.
pub fn unit_bump_derivative(k: usize, u: f64) -> f64 {
    unit_bump_derivatives(k, u)[k]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpPart {
    pub amplitude: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A finite combination of affinely placed bumps, supported inside `[1, 2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunction {
    parts: Vec<BumpPart>,
}

impl Default for TestFunction {
    fn default() -> Self {
        Self::canonical()
    }
}

impl TestFunction {
    /// `exp(-1 / (1 - (2t - 3)^2))` on `(1, 2)`.
    pub fn canonical() -> Self {
        Self { parts: vec![BumpPart { amplitude: 1.0, lo: 1.0, hi: 2.0 }] }
    }

    pub fn zero() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn bump(amplitude: f64, lo: f64, hi: f64) -> Self {
        assert!((1.0..2.0).contains(&lo) && lo < hi && hi <= 2.0, "bump support [{lo}, {hi}] outside [1, 2]");
        Self { parts: vec![BumpPart { amplitude, lo, hi }] }
    }

    pub fn plus(&self, other: &TestFunction) -> TestFunction {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().copied());
        Self { parts }
    }

    pub fn parts(&self) -> &[BumpPart] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.amplitude == 0.0)
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.parts.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min);
        let hi = self.parts.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
        if lo > hi {
            (1.0, 1.0)
        } else {
            (lo, hi)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `psi^(n)(t)` for `n = 0..=k`.
    pub fn derivatives(&self, k: usize, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; k + 1];
        for p in &self.parts {
            let scale = 2.0 / (p.hi - p.lo);
            let u = (2.0 * t - p.lo - p.hi) / (p.hi - p.lo);
            let mut f = p.amplitude;
            for (o, d) in out.iter_mut().zip(unit_bump_derivatives(k, u)) {
                *o += f * d;
                f *= scale;
            }
        }
        out
    }

    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        self.parts
            .iter()
            .map(|p| {
                let scale = 2.0 / (p.hi - p.lo);
                let u = (2.0 * t - p.lo - p.hi) / (p.hi - p.lo);
                p.amplitude * scale.powi(k as i32) * unit_bump_derivative(k, u)
            })
            .sum()
    }

    /// Mellin transform `int psi(t) t^(s-1) dt` by the trapezoid rule, which
    /// converges faster than any power for functions flat at both ends.
    pub fn mellin(&self, s: Complex64) -> Complex64 {
        let mut n = 1024;
        let mut prev = MellinSampler::new(self, n).transform(s);
        loop {
            n *= 2;
            let next = MellinSampler::new(self, n).transform(s);
            if (next - prev).norm() <= 1e-14 * (1.0 + next.norm()) || n >= 1 << 20 {
                return next;
            }
            prev = next;
        }
    }
}

/// Trapezoid samples of `psi^(k)` on the support, reused for many `s`.
#[derive(Clone, Debug)]
pub struct MellinSampler {
    /// Step of the uniform grid in `u = ln t`.
    h: f64,
    u0: f64,
    /// `derivs[k][j] = psi^(k)(exp(u_j))`.
    derivs: Vec<Vec<f64>>,
    /// `int |psi^(k)(t)| t^(k-1) dt`, the `sigma = 0` case of [`Self::abs_moment`].
    abs_moments: Vec<f64>,
}

/// Steps between exact re-seeds of the geometric progression `exp(w u_j)`.
const RESEED: usize = 64;

impl MellinSampler {
    pub fn new(psi: &TestFunction, n: usize) -> Self {
        Self::with_orders(psi, n, 0)
    }

    /// Samples derivatives `0..=max_k` at the `n - 1` interior points of a
    /// uniform grid in `ln t` over the support.
    pub fn with_orders(psi: &TestFunction, n: usize, max_k: usize) -> Self {
        let (lo, hi) = psi.support();
        let (ulo, uhi) = (lo.ln(), hi.ln());
        let h = (uhi - ulo) / n as f64;
        let u0 = ulo + h;
        let ts: Vec<f64> = (0..n - 1).map(|j| (u0 + j as f64 * h).exp()).collect();
        let per_point: Vec<Vec<f64>> = ts.iter().map(|&t| psi.derivatives(max_k, t)).collect();
        let derivs: Vec<Vec<f64>> = (0..=max_k).map(|k| per_point.iter().map(|d| d[k]).collect()).collect();
        let abs_moments = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| crate::sum::sum_f64(d.iter().zip(&ts).map(|(v, t)| h * v.abs() * t.powi(k as i32))))
            .collect();
        Self { h, u0, derivs, abs_moments }
    }

    pub fn max_order(&self) -> usize {
        self.derivs.len() - 1
    }

    /// `int psi^(k)(t) t^(w-1) dt = int psi^(k)(e^u) e^(w u) du`.
    pub fn derivative_transform(&self, k: usize, w: Complex64) -> Complex64 {
        let step = (w * self.h).exp();
        let mut acc = crate::sum::ComplexSum::new();
        for (b, block) in self.derivs[k].chunks(RESEED).enumerate() {
            let mut z = (w * (self.u0 + (b * RESEED) as f64 * self.h)).exp();
            for &v in block {
                if v != 0.0 {
                    acc.add(z * v);
                }
                z *= step;
            }
        }
        acc.value() * self.h
    }

    pub fn transform(&self, s: Complex64) -> Complex64 {
        self.derivative_transform(0, s)
    }

    /// `psi~(s)` after `k` integrations by parts, `k` chosen to minimise the
    /// floating-point floor `M_k / |s (s+1) ... (s+k-1)|`.
    pub fn transform_stable(&self, s: Complex64) -> Complex64 {
        self.transform_stable_with(s, &self.abs_moments_at(s.re))
    }

    /// [`Self::transform_stable`] with the moments of [`Self::abs_moments_at`]
    /// at `Re s` precomputed, for repeated use along one vertical line.
    pub fn transform_stable_with(&self, s: Complex64, moments: &[f64]) -> Complex64 {
        if s.im.abs() < 1.0 {
            return self.transform(s);
        }
        let (k, _) = Self::best_order_with(s, moments);
        if k == 0 {
            return self.transform(s);
        }
        let mut denom = Complex64::new(1.0, 0.0);
        for j in 0..k {
            denom *= s + j as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.derivative_transform(k, s + k as f64) * sign / denom
    }

    /// `(k, bound)` minimising the integration-by-parts bound
    /// `int |psi^(k)| t^(Re s + k - 1) dt / prod |s + j|` on `|psi~(s)|`.
    pub fn best_order(&self, s: Complex64) -> (usize, f64) {
        Self::best_order_with(s, &self.abs_moments_at(s.re))
    }

    fn best_order_with(s: Complex64, moments: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        let mut denom = 1.0;
        for (k, &m) in moments.iter().enumerate() {
            if k > 0 {
                denom *= (s + (k - 1) as f64).norm();
            }
            let b = m / denom;
            if b < best.1 {
                best = (k, b);
            }
        }
        best
    }

    /// [`Self::abs_moment`] for every order at once.
    pub fn abs_moments_at(&self, sigma: f64) -> Vec<f64> {
        (0..=self.max_order()).map(|k| self.abs_moment(k, sigma)).collect()
    }

    /// `int |psi^(k)(t)| t^(sigma + k - 1) dt`.
    pub fn abs_moment(&self, k: usize, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return self.abs_moments[k];
        }
        let p = sigma + k as f64;
        crate::sum::sum_f64(
            self.derivs[k].iter().enumerate().map(|(j, v)| self.h * v.abs() * (p * (self.u0 + j as f64 * self.h)).exp()),
        )
    }
}
