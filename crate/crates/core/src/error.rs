use std::fmt;

use thiserror::Error;

/// Which genericity condition a symbol failed.
#[derive(Debug, Clone, PartialEq)]
pub enum GenericityViolation {
    /// `H_u^2` and `K_u^2` have different numerical ranks; typically `mu_N = 0`,
    /// i.e. the constant function lies in the range of `H_u`.
    RankMismatch { h_rank: usize, k_rank: usize },
    /// Two consecutive positive eigenvalues are closer than the gap tolerance.
    EigenvalueGap { operator: &'static str, index: usize, gap: f64 },
    /// `nu_j = ||P_j(1)||` vanishes numerically.
    VanishingNu { index: usize, nu: f64 },
    /// `sum nu_j^2 < 1` fails.
    NuSumNotBelowOne { sum: f64 },
    /// `lambda_1^2 > mu_1^2 > lambda_2^2 > ... > mu_N^2 > 0` fails.
    InterlacingFails { index: usize },
    /// The symbol has no positive spectrum at all.
    ZeroSymbol,
}

impl fmt::Display for GenericityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RankMismatch { h_rank, k_rank } => write!(
                f,
                "rank of K_u^2 ({k_rank}) differs from rank of H_u^2 ({h_rank}): mu-rank deficiency, \
                 the constant 1 lies in the range of H_u"
            ),
            Self::EigenvalueGap { operator, index, gap } => write!(
                f,
                "eigenvalues {index} and {} of {operator} are not simple (relative gap {gap:.3e})",
                index + 1
            ),
            Self::VanishingNu { index, nu } => {
                write!(f, "nu_{} = ||P_{}(1)|| = {nu:.3e} vanishes", index + 1, index + 1)
            }
            Self::NuSumNotBelowOne { sum } => write!(f, "sum of nu_j^2 = {sum} is not below 1"),
            Self::InterlacingFails { index } => {
                write!(f, "interlacing lambda^2 > mu^2 fails at position {}", index + 1)
            }
            Self::ZeroSymbol => write!(f, "symbol has no positive Hankel spectrum"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("denominator has a root of modulus {modulus} inside the closed unit disc")]
    DenominatorRootInsideDisc { modulus: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("symbol is not generic: {0}")]
    NotGeneric(GenericityViolation),
    #[error("secular equation has no sign change in interval {index}")]
    IntervalFailure { index: usize },
    #[error("interlacing violated: {0}")]
    InterlacingViolated(String),
    #[error("spectral radius {radius} of the compressed shift is not below 1")]
    SpectralRadiusExceeded { radius: f64 },
    #[error("x = {x} lies within the guard distance of the pole {pole}")]
    NearPole { x: f64, pole: f64 },
    #[error("step rejected at t = {time}: coefficient exceeded the overflow guard")]
    StepRejected { time: f64 },
    #[error("self-adjoint reconstruction left an imaginary residue of {residue:e}")]
    NotReal { residue: f64 },
    #[error("Blaschke parameter of modulus {modulus} is not inside the unit disc")]
    PoleOutsideDisc { modulus: f64 },
    #[error("beat frequencies coincide (r+ - r- = {gap:e})")]
    DegenerateFrequencies { gap: f64 },
    #[error("phase velocities {a} and {b} coincide")]
    ResonantFrequencies { a: f64, b: f64 },
    #[error("Gram matrix of the Krylov moments is singular")]
    SingularGram,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
