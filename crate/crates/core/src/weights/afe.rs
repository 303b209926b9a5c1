//! Weights of the form `(1 / 2 pi i) int_{(c)} y^{-s} K(s) ds / s`.
//!
//! Three kernels are used:
//!
//! * `V1`: `y = sqrt(pi) x`, `K = Gamma((2s+1)/4) / Gamma(1/4)`;
//! * `V2`: `y = pi x`, `K = Gamma((2s+1+2iT)/4) Gamma((2s+1-2iT)/4)` normalized to 1 at `s = 0`;
//! * `Gaussian`: `y = x`, `K = exp(kappa s^2)`, a smooth cutoff with closed form
//!   `erfc(ln x / (2 sqrt(kappa))) / 2`.
//!
//! [`WeightTable`] tabulates a weight on a logarithmic grid with cubic
//! Hermite interpolation (exact derivatives from the same contour) and keeps
//! an interpolation certificate. For `y < 1` it uses the line
//! `Re s = LEFT_ABSCISSA` plus the residue `1` at `s = 0` instead: every
//! kernel is analytic on `Re s > -1/2` apart from that pole, and the left line
//! does not amplify rounding by `y^-c` at small arguments.

use num_complex::Complex64;
use serde::Serialize;

use super::contour::{geometric_tail, LineIntegral};
use super::gamma::{ln_abs_gamma_upper, ln_gamma};
use crate::error::{Error, Result};

/// `ln Gamma(1/4)`.
const LN_GAMMA_QUARTER: f64 = 1.288_022_524_698_077_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AfeKernel {
    V1,
    V2 { t_f: f64 },
    Gaussian { kappa: f64 },
}

impl AfeKernel {
    /// `ln(y / x)`.
    pub fn log_scale(&self) -> f64 {
        match self {
            AfeKernel::V1 => 0.5 * std::f64::consts::PI.ln(),
            AfeKernel::V2 { .. } => std::f64::consts::PI.ln(),
            AfeKernel::Gaussian { .. } => 0.0,
        }
    }

    /// `K(s) / s`.
    pub fn kernel(&self, s: Complex64) -> Result<Complex64> {
        let k = match *self {
            AfeKernel::V1 => (ln_gamma((2.0 * s + 1.0) / 4.0)? - LN_GAMMA_QUARTER).exp(),
            AfeKernel::V2 { t_f } => {
                let it = Complex64::new(0.0, t_f / 2.0);
                let a = (2.0 * s + 1.0) / 4.0;
                let norm = ln_gamma(Complex64::new(0.25, 0.0) + it)? + ln_gamma(Complex64::new(0.25, 0.0) - it)?;
                (ln_gamma(a + it)? + ln_gamma(a - it)? - norm).exp()
            }
            AfeKernel::Gaussian { kappa } => (kappa * s * s).exp(),
        };
        Ok(k / s)
    }

    /// Upper bound on `|K(c + it)| max(1, |s|) / |s|`, covering the value
    /// kernel and the derivative kernel `-s K(s) / s`.
    pub fn envelope(&self, c: f64, t: f64) -> f64 {
        let s = Complex64::new(c, t);
        let ln_k = match *self {
            AfeKernel::V1 => ln_abs_gamma_upper(Complex64::new((2.0 * c + 1.0) / 4.0, t / 2.0)) - LN_GAMMA_QUARTER,
            AfeKernel::V2 { t_f } => {
                let re = (2.0 * c + 1.0) / 4.0;
                let norm = 2.0 * ln_gamma(Complex64::new(0.25, t_f / 2.0)).map(|z| z.re).unwrap_or(f64::NAN);
                ln_abs_gamma_upper(Complex64::new(re, (t + t_f) / 2.0))
                    + ln_abs_gamma_upper(Complex64::new(re, (t - t_f) / 2.0))
                    - norm
            }
            AfeKernel::Gaussian { kappa } => kappa * (c * c - t * t),
        };
        ln_k.exp() * s.norm().max(1.0) / s.norm()
    }

    /// Truncation height with certified discarded tail `<= tol / 10` for
    /// every `L` in `[l_lo, l_hi]`, and the tail bound at that height (already
    /// multiplied by the largest `exp(-c L)`).
    pub fn height(&self, c: f64, l_lo: f64, l_hi: f64, tol: f64) -> Result<(f64, f64)> {
        let scale = (-c * l_lo).exp().max((-c * l_hi).exp());
        let mut h: f64 = 4.0;
        if let AfeKernel::V2 { t_f } = self {
            h = h.max(t_f.abs() + 4.0);
        }
        while h < 1e4 {
            if let Some(tail) = geometric_tail(|t| self.envelope(c, t), h, 0.5) {
                // both half-lines, divided by 2 pi
                let bound = scale * tail / std::f64::consts::PI;
                if bound <= tol / 10.0 {
                    return Ok((h, bound));
                }
            }
            h += 2.0;
        }
        Err(Error::QuadratureFailure(format!("no truncation height for {self:?} at c = {c}, tol = {tol:e}")))
    }

    /// Contour rule on `Re s = c` accurate to `tol` for `ln x` in `[u_lo, u_hi]`.
    pub fn line(&self, c: f64, tol: f64, u_lo: f64, u_hi: f64) -> Result<LineIntegral<1>> {
        let ls = self.log_scale();
        let (h, _) = self.height(c, u_lo + ls, u_hi + ls, tol)?;
        let probes: Vec<f64> = (0..=8).map(|i| u_lo + ls + (u_hi - u_lo) * i as f64 / 8.0).collect();
        let k = *self;
        LineIntegral::build(move |s| Ok([k.kernel(s)?]), c, h, tol, &probes)
    }

    /// `(1 / 2 pi) int |K(c + it)| / |s| dt`, so that `|W(x)| <= y^{-c}` times this.
    pub fn abs_line_integral(&self, c: f64) -> Result<f64> {
        let (h, _) = self.height(c, 0.0, 0.0, 1e-3)?;
        let rule = super::quadrature::CompositeRule::new(-h, h, ((2.0 * h).ceil() as usize).max(8));
        let mut body = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            body += w * self.kernel(Complex64::new(c, t))?.norm();
        }
        let tail = geometric_tail(|t| self.envelope(c, t), h, 0.5).unwrap_or(f64::INFINITY);
        // 1% headroom for the quadrature of |K|, which is only piecewise smooth
        Ok(1.01 * body / std::f64::consts::TAU + tail / std::f64::consts::PI)
    }
}

/// Direct evaluation at one point; returns the value and its imaginary residual.
pub fn evaluate(kernel: AfeKernel, x: f64, c: f64, tol: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::QuadratureFailure(format!("weight argument {x} is not positive")));
    }
    let u = x.ln();
    let l = u + kernel.log_scale();
    if (-c * l).exp() > LEFT_SWITCH {
        // every kernel has residue 1 at s = 0
        let line = kernel.line(LEFT_ABSCISSA, tol, u, u)?;
        let [v] = line.eval(l);
        return Ok((1.0 + v.re, v.im));
    }
    let line = kernel.line(c, tol, u, u)?;
    let [v] = line.eval(l);
    Ok((v.re, v.im))
}

/// Above this amplification `y^-c` of the requested line, [`evaluate`] moves
/// to [`LEFT_ABSCISSA`] and adds the residue at `s = 0`.
const LEFT_SWITCH: f64 = 1e3;

/// Interpolation table of a real weight over `x` in `[x_lo, x_hi]`.
#[derive(Clone, Debug)]
pub struct WeightTable {
    kernel: AfeKernel,
    /// Rule on the requested line, used for `y >= 1`.
    right: LineIntegral<1>,
    /// Rule on `Re s = LEFT_ABSCISSA`, used with the residue for `y < 1`.
    left: Option<LineIntegral<1>>,
    /// `ln x` at `y = 1`.
    u_split: f64,
    u_lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    x_hi: f64,
    interpolation_error: f64,
    /// Pairs `(C, B)` with `|W(x)| <= y^{-C} B` for every `x`.
    far_bounds: Vec<(f64, f64)>,
    tol: f64,
}

/// Maximum accepted interpolation error at grid midpoints.
pub const INTERPOLATION_TOL: f64 = 1e-11;

/// Line used for arguments with `y < 1`, between the pole at `s = 0` and the
/// first gamma poles at `Re s = -1/2`.
pub const LEFT_ABSCISSA: f64 = -0.25;

/// Abscissae at which the far-field bounds `y^{-C} B(C)` are prepared.
const FAR_ABSCISSAE: [f64; 10] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 40.0];

impl WeightTable {
    /// Tabulates `kernel` from `x_lo` up to the point where the weight and its
    /// slope are below `1e-18`; beyond that the weight is returned as zero.
    pub fn new(kernel: AfeKernel, c: f64, tol: f64, x_lo: f64) -> Result<Self> {
        let far_bounds = FAR_ABSCISSAE
            .iter()
            .map(|&cc| kernel.abs_line_integral(cc).map(|b| (cc, b)))
            .collect::<Result<Vec<_>>>()?;
        let ls = kernel.log_scale();
        // smallest x with y^{-C} B(C) <= 1e-18 for some C
        let x_hi = far_bounds
            .iter()
            .map(|&(cc, b)| (b / 1e-18).powf(1.0 / cc) / ls.exp())
            .fold(f64::INFINITY, f64::min)
            .max(2.0 * x_lo);
        let (u_lo, u_hi) = (x_lo.ln(), x_hi.ln());
        let u_split = -ls;
        let right = kernel.line(c, tol, u_split.max(u_lo), u_hi)?;
        let left = if u_lo < u_split { Some(kernel.line(LEFT_ABSCISSA, tol, u_lo, u_split)?) } else { None };
        let mut step = 1.0 / 32.0;
        loop {
            let n = ((u_hi - u_lo) / step).ceil() as usize;
            let step_n = (u_hi - u_lo) / n as f64;
            let mut table = Self {
                kernel,
                right: right.clone(),
                left: left.clone(),
                u_split,
                u_lo,
                step: step_n,
                values: Vec::new(),
                slopes: Vec::new(),
                x_hi,
                interpolation_error: 0.0,
                far_bounds: far_bounds.clone(),
                tol,
            };
            (table.values, table.slopes) = (0..=n).map(|i| table.exact(u_lo + i as f64 * step_n)).unzip();
            let err = table.midpoint_error();
            if err <= INTERPOLATION_TOL {
                table.interpolation_error = err;
                return Ok(table);
            }
            if step < 1e-4 {
                return Err(Error::QuadratureFailure(format!(
                    "interpolation error {err:e} above {INTERPOLATION_TOL:e} at step {step_n:e}"
                )));
            }
            step /= 2.0;
        }
    }

    /// Contour value and `u`-derivative at `u = ln x`.
    fn exact(&self, u: f64) -> (f64, f64) {
        let l = u + self.kernel.log_scale();
        match &self.left {
            Some(left) if u < self.u_split => {
                let (v, d) = left.eval_with_derivative(l);
                (1.0 + v[0].re, d[0].re)
            }
            _ => {
                let (v, d) = self.right.eval_with_derivative(l);
                (v[0].re, d[0].re)
            }
        }
    }

    fn midpoint_error(&self) -> f64 {
        (0..self.values.len() - 1)
            .map(|i| {
                let u = self.u_lo + (i as f64 + 0.5) * self.step;
                (self.interpolate(u) - self.exact(u).0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn interpolate(&self, u: f64) -> f64 {
        let pos = (u - self.u_lo) / self.step;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }

    /// `W(x)`. Below `x_lo` the contour is evaluated directly; its refinement
    /// was only certified on `[x_lo, x_hi]`, so callers size `x_lo` to cover
    /// their arguments (see [`Self::x_lo`]).
    pub fn value(&self, x: f64) -> f64 {
        let u = x.ln();
        if u < self.u_lo {
            self.exact(u).0
        } else if x >= self.x_hi {
            0.0
        } else {
            self.interpolate(u)
        }
    }

    /// Bound on the error of [`Self::value`]: quadrature, interpolation and
    /// the zero returned past the table.
    pub fn pointwise_error(&self) -> f64 {
        self.tol + self.interpolation_error + 1e-18
    }

    /// `min_C y^{-C} B(C)` with `y = x exp(log_scale)`; a bound on `|W(x)|` at every `x`.
    pub fn decay_bound(&self, x: f64) -> f64 {
        let y = x * self.kernel.log_scale().exp();
        self.far_bounds.iter().map(|&(c, b)| y.powf(-c) * b).fold(f64::INFINITY, f64::min)
    }

    pub fn far_bounds(&self) -> &[(f64, f64)] {
        &self.far_bounds
    }

    pub fn kernel(&self) -> AfeKernel {
        self.kernel
    }

    pub fn x_lo(&self) -> f64 {
        self.u_lo.exp()
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn grid_len(&self) -> usize {
        self.values.len()
    }

    pub fn interpolation_error(&self) -> f64 {
        self.interpolation_error
    }
}
