//! Kernels of the GL(2) Voronoi formula.
//!
//! ```text
//!   2 pi G_pm(s) = R0(s) +- R1(s)
//!   R0(s) = Gamma((1+s+iT)/2) Gamma((1+s-iT)/2) / (Gamma((-s+iT)/2) Gamma((-s-iT)/2))
//!   R1(s) = the same with every argument shifted by 1/2
//!   Psi_pm(x) = (1 / 2 pi i) int_{(sigma)} (pi^2 x)^{-s} G_pm(s) psi~(-s) ds
//! ```
//!
//! [`PsiKernel`] samples `R0 psi~(-s)` and `R1 psi~(-s)` once on a certified
//! contour and then evaluates both signs at any number of points.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::bump::{MellinSampler, TestFunction, MAX_DERIVATIVE};
use super::contour::LineIntegral;
use super::quadrature::CompositeRule;
use super::gamma::{ln_abs_gamma_lower, ln_abs_gamma_upper, ln_gamma};
use crate::error::{Error, Result};

/// Trapezoid intervals used for Mellin transforms of the test function.
const MELLIN_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `(R0(s), R1(s))`.
pub fn gamma_ratios(s: Complex64, t_f: f64) -> Result<(Complex64, Complex64)> {
    let it = Complex64::new(0.0, t_f);
    let ratio = |shift: f64| -> Result<Complex64> {
        let num = ln_gamma((1.0 + shift + s + it) / 2.0)? + ln_gamma((1.0 + shift + s - it) / 2.0)?;
        let den = ln_gamma((shift - s + it) / 2.0)? + ln_gamma((shift - s - it) / 2.0)?;
        Ok((num - den).exp())
    };
    Ok((ratio(0.0)?, ratio(1.0)?))
}

/// `G_pm(s)`.
pub fn g_pm(s: Complex64, t_f: f64, sign: Sign) -> Result<Complex64> {
    let (r0, r1) = gamma_ratios(s, t_f)?;
    Ok((r0 + sign.value() * r1) / (2.0 * PI))
}

/// Upper bound on `max(|R0(s)|, |R1(s)|)` at `s = sigma + it`, `|t| != |T|`.
pub fn ratio_envelope(sigma: f64, t: f64, t_f: f64) -> f64 {
    let bound = |shift: f64| {
        let num = ln_abs_gamma_upper(Complex64::new((1.0 + shift + sigma) / 2.0, (t + t_f) / 2.0))
            + ln_abs_gamma_upper(Complex64::new((1.0 + shift + sigma) / 2.0, (t - t_f) / 2.0));
        let den = ln_abs_gamma_lower(Complex64::new((shift - sigma) / 2.0, (t_f - t) / 2.0))
            + ln_abs_gamma_lower(Complex64::new((shift - sigma) / 2.0, (-t_f - t) / 2.0));
        num - den
    };
    bound(0.0).max(bound(1.0)).exp()
}

/// Sampled Voronoi kernels for one test function, spectral parameter and line.
#[derive(Clone, Debug)]
pub struct PsiKernel {
    t_f: f64,
    line: LineIntegral<2>,
    tail: f64,
    x_min: f64,
}

impl PsiKernel {
    /// Prepares `Psi_pm` on `Re s = sigma` to absolute accuracy `tol` for every
    /// `x` in `[x_min, x_max]`.
    pub fn new(psi: &TestFunction, t_f: f64, sigma: f64, tol: f64, x_min: f64, x_max: f64) -> Result<Self> {
        if sigma <= -1.0 {
            return Err(Error::QuadratureFailure(format!("abscissa {sigma} is not to the right of -1")));
        }
        let sampler = MellinSampler::with_orders(psi, MELLIN_POINTS, MAX_DERIVATIVE);
        let scale = (PI * PI * x_min).powf(-sigma);
        let (height, tail) = Self::height(&sampler, t_f, sigma, tol / 10.0 / scale)?;
        let (l_lo, l_hi) = ((PI * PI * x_min).ln(), (PI * PI * x_max).ln());
        let probes: Vec<f64> = (0..=8).map(|i| l_lo + (l_hi - l_lo) * i as f64 / 8.0).collect();
        let moments = sampler.abs_moments_at(-sigma);
        let line = LineIntegral::build(
            |s| {
                let (r0, r1) = gamma_ratios(s, t_f)?;
                let m = sampler.transform_stable_with(-s, &moments) / (2.0 * PI);
                Ok([r0 * m, r1 * m])
            },
            sigma,
            height,
            tol,
            &probes,
        )?;
        Ok(Self { t_f, line, tail: tail * scale, x_min })
    }

    /// Smallest height (in steps of 10) whose certified tail is below `target`.
    ///
    /// For `|t| >= H` integration by parts gives `|psi~(-s)| <= M_k / |t|^k`,
    /// and `|G_pm| <= A t^(2 sigma + 1)` where `A` is the largest sampled ratio
    /// of the Stirling envelope to `t^(2 sigma + 1)` over `[H, 64 H]` (the ratio
    /// converges monotonically to its limit). Then the two half-lines
    /// contribute at most `A M_k H^(2 sigma + 2 - k) / (pi (k - 2 sigma - 2))`.
    fn height(sampler: &MellinSampler, t_f: f64, sigma: f64, target: f64) -> Result<(f64, f64)> {
        let p = 2.0 * sigma + 1.0;
        let moments = sampler.abs_moments_at(-sigma);
        let mut h = (t_f.abs() + 10.0).ceil();
        while h <= 20_000.0 {
            let a = (0..=60)
                .map(|j| {
                    let t = h * 64f64.powf(j as f64 / 60.0);
                    ratio_envelope(sigma, t, t_f) / t.powf(p)
                })
                .fold(0.0, f64::max);
            let best = (1..=sampler.max_order())
                .filter(|&k| k as f64 > p + 1.0)
                .map(|k| {
                    let m = moments[k];
                    a * m * h.powf(p + 1.0 - k as f64) / (PI * (k as f64 - p - 1.0))
                })
                .fold(f64::INFINITY, f64::min);
            if best <= target {
                return Ok((h, best));
            }
            h += 10.0;
        }
        Err(Error::QuadratureFailure(format!("no certified truncation height for Psi at sigma = {sigma}")))
    }

    /// `B(sigma)` with `|Psi_pm(x)| <= (pi^2 x)^(-sigma) B(sigma)` for all
    /// `x > 0`, where
    ///
    /// ```text
    ///   B(sigma) = (1 / 4 pi^2) int (|R0| + |R1|)(sigma + it) |psi~(-sigma - it)| dt.
    /// ```
    ///
    /// The integral over `|t| <= H` is a Gauss-Legendre sum refined to
    /// `1e-4` relative, inflated by `1e-3`, plus the certified tail.
    pub fn decay_constant(psi: &TestFunction, t_f: f64, sigma: f64) -> Result<f64> {
        let sampler = MellinSampler::with_orders(psi, MELLIN_POINTS, MAX_DERIVATIVE);
        let (height, tail) = Self::height(&sampler, t_f, sigma, 1e-8)?;
        let moments = sampler.abs_moments_at(-sigma);
        let integrand = |t: f64| -> f64 {
            let s = Complex64::new(sigma, t);
            match gamma_ratios(s, t_f) {
                Ok((r0, r1)) => (r0.norm() + r1.norm()) * sampler.transform_stable_with(-s, &moments).norm(),
                Err(_) => f64::NAN,
            }
        };
        let mut panels = (height / 2.0).ceil() as usize;
        let mut prev = CompositeRule::new(0.0, height, panels).integrate(integrand);
        loop {
            panels *= 2;
            let next = CompositeRule::new(0.0, height, panels).integrate(integrand);
            if !next.is_finite() {
                return Err(Error::QuadratureFailure(format!("decay constant at sigma = {sigma} hit a pole")));
            }
            if (next - prev).abs() <= 1e-4 * next {
                return Ok(2.0 * next * 1.001 / (4.0 * PI * PI) + tail);
            }
            if panels > 1 << 16 {
                return Err(Error::QuadratureFailure(format!("decay constant at sigma = {sigma} did not settle")));
            }
            prev = next;
        }
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn height_used(&self) -> f64 {
        self.line.height()
    }

    pub fn nodes(&self) -> usize {
        self.line.len()
    }

    /// Certified bound on the discarded part of the contour at `x >= x_min`.
    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// `(Psi_+(x), Psi_-(x))` with the full-line sum; both should be real.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let [a, b] = self.line.eval((PI * PI * x).ln());
        (a + b, a - b)
    }

    /// `(Psi_+(x), Psi_-(x))` using conjugate symmetry of the kernel.
    pub fn eval_real(&self, x: f64) -> (f64, f64) {
        let [a, b] = self.line.eval_real((PI * PI * x).ln());
        (a + b, a - b)
    }
}
