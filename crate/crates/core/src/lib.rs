//! Numerical verification toolkit for the twisted first moment
//!
//! ```text
//!   sum over even primitive chi mod q of L(1/2, f x chi) * conj(L(1/2, chi))
//! ```
//!
//! where `f` is an even Hecke-Maass cusp form for SL(2, Z) and `q` is prime.
//! The crate evaluates every layer of the computation explicitly: the
//! character group, Gauss/Kloosterman/Ramanujan sums, Hecke coefficient
//! extension, the gamma-factor weights of the approximate functional
//! equations, the central values themselves, the moment with its four cross
//! terms, and a numerical check of the GL(2) Voronoi summation formula.

pub mod characters;
pub mod error;
pub mod exponential_sums;
pub mod hecke;
pub mod lvalues;
pub mod moment;
pub mod sum;
pub mod voronoi;
pub mod weights;

pub use characters::{DirichletCharacter, PrimeModulus};
pub use error::{Error, Result};
pub use hecke::HeckeSystem;
pub use lvalues::{CentralValue, Method};
pub use moment::MomentReport;
pub use voronoi::VoronoiCheck;
pub use weights::{TestFunction, WeightKind, WeightSpec};

pub use num_complex::Complex64;

/// `e(x) = exp(2 pi i x)`, the unit complex exponential of `x` turns.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * x).sin_cos();
    Complex64::new(c, s)
}
