//! Vertical-line Mellin inversion.
//!
//! A [`LineIntegral`] holds `N` kernels `K` sampled on one composite
//! Gauss-Legendre rule along `s = c + it`, `|t| <= H`, and evaluates
//!
//! ```text
//!   I(L) = (1 / 2 pi i) int_{(c)} exp(-s L) K(s) ds
//! ```
//!
//! for any `L`. Every weight in the crate has this shape with `L` the
//! logarithm of the (scaled) argument, so sampling the kernel once serves
//! every evaluation point.

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::CompositeRule;
use crate::error::{Error, Result};
use crate::sum::ComplexSum;

const MAX_PANELS: usize = 1 << 15;

/// Target width of the first panel subdivision.
const INITIAL_PANEL_WIDTH: f64 = 4.0;

#[derive(Clone, Debug)]
pub struct LineIntegral<const N: usize> {
    c: f64,
    height: f64,
    t: Vec<f64>,
    /// `w_j K(c + i t_j) / (2 pi)`.
    wk: Vec<[Complex64; N]>,
    panels: usize,
}

impl<const N: usize> LineIntegral<N> {
    /// Samples `kernel` on `[c - iH, c + iH]`, doubling the panel count until
    /// two successive rules agree to `tol / 2` at every probe point `L`, for
    /// every component and its `L`-derivative. Where `exp(-cL)` amplifies
    /// rounding beyond `tol`, agreement is required only down to the rounding
    /// floor reported by [`Self::rounding_floor`].
    pub fn build<K>(kernel: K, c: f64, height: f64, tol: f64, probes: &[f64]) -> Result<Self>
    where
        K: Fn(Complex64) -> Result<[Complex64; N]> + Sync,
    {
        let mut panels = ((2.0 * height / INITIAL_PANEL_WIDTH).ceil() as usize).max(2);
        let mut coarse = Self::sample(&kernel, c, height, panels)?;
        loop {
            if panels >= MAX_PANELS {
                return Err(Error::QuadratureFailure(format!(
                    "no agreement within {tol:e} after {panels} panels on the line Re s = {c}"
                )));
            }
            panels *= 2;
            let fine = Self::sample(&kernel, c, height, panels)?;
            let worst = probes
                .iter()
                .map(|&l| coarse.max_difference(&fine, l) - fine.rounding_floor(l))
                .fold(0.0, f64::max);
            if worst <= tol / 2.0 {
                return Ok(fine);
            }
            coarse = fine;
        }
    }

    fn max_difference(&self, other: &Self, l: f64) -> f64 {
        let (a, da) = self.eval_with_derivative(l);
        let (b, db) = other.eval_with_derivative(l);
        (0..N).map(|i| (a[i] - b[i]).norm().max((da[i] - db[i]).norm())).fold(0.0, f64::max)
    }

    fn sample<K>(kernel: &K, c: f64, height: f64, panels: usize) -> Result<Self>
    where
        K: Fn(Complex64) -> Result<[Complex64; N]> + Sync,
    {
        let rule = CompositeRule::new(-height, height, panels);
        let wk = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| kernel(Complex64::new(c, t)).map(|k| k.map(|v| v * (w / std::f64::consts::TAU))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { c, height, t: rule.nodes, wk, panels })
    }

    /// Size of the rounding error of [`Self::eval_with_derivative`] at `L`:
    /// a few ulps of the sum of absolute values of the terms.
    pub fn rounding_floor(&self, l: f64) -> f64 {
        let mass: f64 = self
            .t
            .iter()
            .zip(&self.wk)
            .map(|(&t, wk)| wk.iter().map(|v| v.norm()).fold(0.0, f64::max) * Complex64::new(self.c, t).norm().max(1.0))
            .sum();
        64.0 * f64::EPSILON * mass * (-self.c * l).exp()
    }

    pub fn abscissa(&self) -> f64 {
        self.c
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn eval(&self, l: f64) -> [Complex64; N] {
        let mut acc = [ComplexSum::new(); N];
        for (&t, wk) in self.t.iter().zip(&self.wk) {
            let (s, c) = (t * l).sin_cos();
            let phase = Complex64::new(c, -s);
            for i in 0..N {
                acc[i].add(wk[i] * phase);
            }
        }
        let scale = (-self.c * l).exp();
        acc.map(|a| a.value() * scale)
    }

    /// `I(L)` and `dI/dL`; the derivative kernel is `-s K(s)`.
    pub fn eval_with_derivative(&self, l: f64) -> ([Complex64; N], [Complex64; N]) {
        let mut v = [ComplexSum::new(); N];
        let mut d = [ComplexSum::new(); N];
        for (&t, wk) in self.t.iter().zip(&self.wk) {
            let (s, c) = (t * l).sin_cos();
            let phase = Complex64::new(c, -s);
            let minus_s = Complex64::new(-self.c, -t);
            for i in 0..N {
                let term = wk[i] * phase;
                v[i].add(term);
                d[i].add(term * minus_s);
            }
        }
        let scale = (-self.c * l).exp();
        (v.map(|a| a.value() * scale), d.map(|a| a.value() * scale))
    }

    /// `I(L)` for kernels with `K(conj s) = conj K(s)`, where the integral is
    /// real: twice the real part of the upper half-line. The rule is symmetric
    /// about `t = 0`, so this is the full-line sum with the imaginary parts
    /// cancelled analytically instead of numerically.
    ///
    /// The phase `exp(-i t L)` is split into a panel-midpoint factor, advanced
    /// geometrically from panel to panel and re-seeded every [`RESEED`]
    /// panels, times an in-panel factor shared by all panels.
    pub fn eval_real(&self, l: f64) -> [f64; N] {
        let width = 2.0 * self.height / self.panels as f64;
        let order = self.t.len() / self.panels;
        let first = self.panels / 2;
        let mid = |p: usize| -self.height + (p as f64 + 0.5) * width;
        let phase = |t: f64| {
            let (s, c) = (t * l).sin_cos();
            Complex64::new(c, -s)
        };
        let inner: Vec<Complex64> = self.t[..order].iter().map(|&t| phase(t - mid(0))).collect();
        let step = phase(width);
        let mut acc = [crate::sum::Neumaier::new(); N];
        let mut outer = Complex64::new(1.0, 0.0);
        for p in first..self.panels {
            if (p - first) % RESEED == 0 {
                outer = phase(mid(p));
            }
            let block = &self.wk[p * order..(p + 1) * order];
            let mut local = [Complex64::new(0.0, 0.0); N];
            for (wk, z) in block.iter().zip(&inner) {
                for i in 0..N {
                    local[i] += wk[i] * z;
                }
            }
            for i in 0..N {
                acc[i].add(2.0 * (local[i] * outer).re);
            }
            outer *= step;
        }
        let scale = (-self.c * l).exp();
        acc.map(|a| a.value() * scale)
    }
}

/// Panels between exact re-seeds of the midpoint phase in [`LineIntegral::eval_real`].
const RESEED: usize = 32;

/// `int_H^inf b(t) dt` for an envelope that decays at least geometrically
/// past `H`: sampled ratios `b(t + step) / b(t)` over 64 steps bound the decay
/// rate, and the integral is dominated by the resulting geometric series.
/// Returns `None` when the envelope is not yet decreasing at `H`.
pub fn geometric_tail<B: Fn(f64) -> f64>(b: B, h: f64, step: f64) -> Option<f64> {
    let b0 = b(h);
    if b0 == 0.0 {
        return Some(0.0);
    }
    let mut rho: f64 = 0.0;
    let mut prev = b0;
    for j in 1..=64 {
        let next = b(h + j as f64 * step);
        if prev > 0.0 {
            rho = rho.max(next / prev);
        }
        prev = next;
    }
    (rho < 1.0).then(|| step * b0 / (1.0 - rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverts_gaussian_mellin_pair() {
        // (1/2 pi i) int e^{s^2} y^{-s} ds = exp(-(ln y)^2 / 4) / (2 sqrt(pi))
        let li = LineIntegral::build(|s| Ok([(s * s).exp()]), 0.5, 12.0, 1e-13, &[-2.0, 0.0, 3.0]).unwrap();
        for l in [-2.0f64, -0.5, 0.0, 1.0, 3.0] {
            let expect = (-l * l / 4.0).exp() / (2.0 * PI.sqrt());
            let [got] = li.eval(l);
            assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12, "l = {l}");
            let (_, [d]) = li.eval_with_derivative(l);
            assert!((d.re + l / 2.0 * expect).abs() < 1e-12);
            let [r] = li.eval_real(l);
            assert!((r - got.re).abs() < 1e-13);
        }
    }

    #[test]
    fn geometric_tail_of_exponential() {
        let tail = geometric_tail(|t| (-t).exp(), 10.0, 0.25).unwrap();
        let exact = (-10.0f64).exp();
        assert!(tail >= exact && tail < 1.2 * exact);
        assert!(geometric_tail(|t| t, 1.0, 1.0).is_none());
    }
}
