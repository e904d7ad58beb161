use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid log2 size {0} out of range (need 6..=24)")]
    GridSize(u32),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("expected a real-valued grid function (node {index} has imaginary part {imag:e})")]
    NotReal { index: usize, imag: f64 },

    #[error("weight sample at node {index} is not strictly positive ({value:e})")]
    NonPositive { index: usize, value: f64 },

    #[error("point {re:+.6} {im:+.6}i is not inside the unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("exponent p = {0} must exceed 1")]
    Exponent(f64),

    #[error("Fisher-Hartwig exponent beta = {0} is outside [0, 1/2): the A_2 quantity diverges")]
    Divergent(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degree or frequency {requested} exceeds the limit {limit}")]
    TooLarge { requested: usize, limit: usize },

    #[error("Szegő recursion lost positive definiteness at index {index} (1 - |alpha|^2 = {margin:e})")]
    Breakdown { index: usize, margin: f64 },

    #[error("weight is not normalized (mass {mass}); this operation requires ||w/2pi||_1 = 1")]
    NotNormalized { mass: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("exp(delta * f) overflows: delta * max|f| = {0}")]
    Overflow(f64),

    #[error("unit-modulus parameter required, got |alpha| = {0}")]
    NotUnimodular(f64),

    #[error("configuration error: {0}")]
    Config(String),
}
