//! Gamma function, approximate-functional-equation weights, Mellin transforms
//! of test functions and the Voronoi kernels, all realized by quadrature on
//! vertical lines.

pub mod afe;
pub mod bump;
pub mod contour;
pub mod gamma;
pub mod psi;
pub mod quadrature;

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use afe::{AfeKernel, WeightTable};
pub use bump::TestFunction;
pub use psi::{PsiKernel, Sign};

/// Default absolute tolerance of `V1` and `V2`.
pub const V_TOL: f64 = 1e-10;
/// Default absolute tolerance of `Psi_pm`.
pub const PSI_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    V1,
    V2,
    PsiPlus,
    PsiMinus,
}

/// Numerical realization of one weight: line, truncation and tolerance.
///
/// `height: None` lets each call pick the smallest certified height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub t_f: f64,
    pub c: f64,
    pub height: Option<f64>,
    pub tol: f64,
}

impl WeightSpec {
    pub fn v1() -> Self {
        Self { kind: WeightKind::V1, t_f: 0.0, c: 1.0, height: None, tol: V_TOL }
    }

    pub fn v2(t_f: f64) -> Self {
        Self { kind: WeightKind::V2, t_f, c: 1.0, height: None, tol: V_TOL }
    }

    pub fn psi(sign: Sign, t_f: f64) -> Self {
        let kind = match sign {
            Sign::Plus => WeightKind::PsiPlus,
            Sign::Minus => WeightKind::PsiMinus,
        };
        Self { kind, t_f, c: 0.0, height: None, tol: PSI_TOL }
    }

    pub fn with_abscissa(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    fn check(&self, kind: WeightKind) -> Result<()> {
        let kind_ok = match kind {
            WeightKind::PsiPlus | WeightKind::PsiMinus => {
                matches!(self.kind, WeightKind::PsiPlus | WeightKind::PsiMinus)
            }
            k => self.kind == k,
        };
        if !kind_ok {
            return Err(Error::WrongWeightKind(self.kind));
        }
        let line_ok = match self.kind {
            WeightKind::V1 | WeightKind::V2 => self.c > 0.0,
            _ => self.c > -1.0,
        };
        if !line_ok || !(self.tol > 0.0) {
            return Err(Error::QuadratureFailure(format!("inadmissible line Re s = {} or tolerance {:e}", self.c, self.tol)));
        }
        Ok(())
    }
}

pub fn complex_gamma(s: Complex64) -> Result<Complex64> {
    gamma::gamma(s)
}

fn real_weight(kernel: AfeKernel, x: f64, spec: &WeightSpec) -> Result<f64> {
    let (re, im) = match spec.height {
        None => afe::evaluate(kernel, x, spec.c, spec.tol)?,
        Some(h) => {
            let u = x.ln();
            let line = contour::LineIntegral::build(|s| Ok([kernel.kernel(s)?]), spec.c, h, spec.tol, &[u + kernel.log_scale()])?;
            let [v] = line.eval(u + kernel.log_scale());
            (v.re, v.im)
        }
    };
    if im.abs() > spec.tol {
        return Err(Error::QuadratureFailure(format!("imaginary residual {im:e} above {:e}", spec.tol)));
    }
    Ok(re)
}

/// `V1(x) = (1 / 2 pi i) int_{(c)} (sqrt(pi) x)^{-s} Gamma((2s+1)/4) / Gamma(1/4) ds / s`.
pub fn v1(x: f64, spec: &WeightSpec) -> Result<f64> {
    spec.check(WeightKind::V1)?;
    real_weight(AfeKernel::V1, x, spec)
}

/// `V2(x)` for spectral parameter `spec.t_f`.
pub fn v2(x: f64, spec: &WeightSpec) -> Result<f64> {
    spec.check(WeightKind::V2)?;
    real_weight(AfeKernel::V2 { t_f: spec.t_f }, x, spec)
}

/// `int_0^inf psi(x) x^(s-1) dx`.
pub fn mellin(psi: &TestFunction, s: Complex64) -> Complex64 {
    psi.mellin(s)
}

pub use psi::g_pm;

/// `Psi_pm(x)` for the sign in `spec.kind`, evaluated with its own certified contour.
pub fn psi_pm(x: f64, psi: &TestFunction, spec: &WeightSpec) -> Result<Complex64> {
    spec.check(WeightKind::PsiPlus)?;
    let kernel = PsiKernel::new(psi, spec.t_f, spec.c, spec.tol, x, x)?;
    let (plus, minus) = kernel.eval(x);
    Ok(if spec.kind == WeightKind::PsiPlus { plus } else { minus })
}

/// Default smallest tabulated argument of the shared tables.
pub const SHARED_X_LO: f64 = 1e-4;

static SHARED: Mutex<Vec<(AfeKernelKey, i32, Arc<WeightTable>)>> = Mutex::new(Vec::new());

#[derive(Clone, Copy, PartialEq, Eq)]
enum AfeKernelKey {
    V1,
    V2(u64),
}

/// Tables exist only at `x_lo = SHARED_X_LO / 4^k`, and a request always
/// gets the level just covering it, so a value never depends on which
/// requests came earlier.
fn shared(key: AfeKernelKey, kernel: AfeKernel, x_lo: f64) -> Result<Arc<WeightTable>> {
    let mut level = 0;
    while SHARED_X_LO / 4f64.powi(level) > x_lo {
        level += 1;
    }
    let mut tables = SHARED.lock().expect("weight table cache poisoned");
    if let Some((_, _, t)) = tables.iter().find(|(k, l, _)| *k == key && *l == level) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(WeightTable::new(kernel, 1.0, V_TOL, SHARED_X_LO / 4f64.powi(level))?);
    tables.push((key, level, Arc::clone(&table)));
    Ok(table)
}

/// Process-wide `V1` table on the default line and tolerance covering
/// `[x_lo, x_hi]`, built on first use.
pub fn shared_v1(x_lo: f64) -> Result<Arc<WeightTable>> {
    shared(AfeKernelKey::V1, AfeKernel::V1, x_lo)
}

/// Process-wide `V2` table for spectral parameter `t_f`, covering `[x_lo, x_hi]`.
pub fn shared_v2(t_f: f64, x_lo: f64) -> Result<Arc<WeightTable>> {
    shared(AfeKernelKey::V2(t_f.to_bits()), AfeKernel::V2 { t_f }, x_lo)
}
