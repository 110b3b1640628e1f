//! Exact and high-precision computation for fourth- and fifth-order
//! Picard-Fuchs-type differential equations with symplectic monodromy.
//!
//! The crate is organized in three layers:
//!
//! * exact kernels: the constants ring Q[P, P^-1, Xi]/(Xi^2) with P = 2*pi*i
//!   and Xi = zeta(3)/(2*pi*i)^3, truncated Laurent series, log-extended
//!   series, polynomials and rational functions over Q, and rational
//!   reconstruction from series ([`constant`], [`series`], [`logseries`],
//!   [`poly`], [`ratfun`]);
//! * operator algebra and special geometry: theta-operators (theta = z d/dz),
//!   Frobenius bases at a maximally unipotent point, wronskians, the mirror
//!   map, Yukawa coupling, the invariants p1, p2, p3 and the operators they
//!   determine ([`diffop`], [`frobenius`], [`geometry`]);
//! * numerics and lattice combinatorics: fixed-point big-float arithmetic,
//!   analytic continuation and monodromy, exact recognition, Guillera-type
//!   identity checks, the Siegel-space embedding, and the Sp4(Z) vector
//!   reduction algorithm ([`hp`], [`numeric`], [`klemm`], [`sp4`]).

pub mod acceptance;
pub mod constant;
pub mod data;
pub mod diffop;
pub mod frobenius;
pub mod geometry;
pub mod hp;
pub mod jsonio;
pub mod klemm;
pub mod logseries;
pub mod numeric;
pub mod poly;
pub mod ratfun;
pub mod series;
pub mod sp4;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("series is zero to truncation order, cannot invert")]
    ZeroLeadingCoefficient,
    #[error("series has odd valuation {0}, square root not defined")]
    OddValuation(i64),
    #[error("leading coefficient {0} is not a perfect square in the constants ring")]
    NonSquareLeadingCoefficient(String),
    #[error("no rational function within degree bounds ({0},{1}) matches the series")]
    NoMatch(usize, usize),
    #[error("series coefficients involve P or Xi, expected plain rationals")]
    MixedConstants,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("expression produces a non-polynomial coefficient: {0}")]
    NonPolynomialCoefficient(String),
    #[error("operator is not maximally unipotent at z=0")]
    NotMUM,
    #[error("basis-change matrix is singular over the constants ring")]
    SingularMatrix,
    #[error("wronskian module has rank {0} < 5; operator is degenerate")]
    DegenerateCase(usize),
    #[error("w01 is not invertible as a log-free series")]
    NonInvertibleW01,
    #[error("required wronskian relation w02 + w13 = 0 fails at order {0}")]
    RelationViolated(i64),
    #[error("series is not scalar: {0} monomial survives")]
    NotScalar(String),
    #[error("division by a series with log terms is not defined")]
    LogDivision,
    #[error("constant {0} is not invertible in the constants ring")]
    NonUnitConstant(String),
    #[error("evaluation point lies outside the justified radius {0}")]
    RadiusExceeded(String),
    #[error("series tail estimate {0} exceeds the target accuracy")]
    TailTooLarge(String),
    #[error("path passes through the singular point {0}")]
    SingularityOnPath(String),
    #[error("estimated precision loss exceeds budget: {0}")]
    PrecisionLoss(String),
    #[error("no exact recognition for entries: {0}")]
    NoRecognition(String),
    #[error("phi = 0, Siegel embedding undefined")]
    PhiZero,
    #[error("block C*T + D (or C*Z + D) is singular")]
    SingularBlock,
    #[error("reduction did not terminate within {0} passes")]
    NonTermination(usize),
    #[error("vector {0:?} is not primitive")]
    NotPrimitive([i64; 4]),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
