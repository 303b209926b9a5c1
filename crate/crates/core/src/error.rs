use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is too small")]
    ModulusTooSmall(u64),

    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),

    #[error("arguments not coprime to the modulus {q}: {detail}")]
    NotCoprime { q: u64, detail: String },

    #[error("malformed eigenvalue data at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("lambda({p}) = {value} exceeds the Kim-Sarnak bound {bound} by more than the declared precision")]
    BoundViolation { p: u64, value: f64, bound: f64 },

    #[error("prime {p} is missing below the declared pmax {pmax}")]
    Gap { p: u64, pmax: u64 },

    #[error("coefficient {n} needs a prime factor above pmax = {pmax}")]
    InsufficientData { n: u64, pmax: u64 },

    #[error("modulus {q}: coefficient {n} needs a prime factor above pmax = {pmax}")]
    InsufficientDataAt { q: u64, n: u64, pmax: u64 },

    #[error("{what} did not converge: disagreement {disagreement:e}")]
    NonConvergence { what: String, disagreement: f64 },

    #[error("pole of the gamma function at s = {0}")]
    Pole(f64),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("the principal character has no primitive L-function here")]
    PrincipalCharacter,

    #[error("odd characters are not supported by the even-form approximate functional equations")]
    OddCharacter,

    #[error("weight spec of kind {0:?} used where another kind was required")]
    WrongWeightKind(crate::weights::WeightKind),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Data problems (bad input) vs numerical certificate problems.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::QuadratureFailure(_) | Error::Pole(_))
    }
}
