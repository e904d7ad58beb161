//! Numerical companion for orthogonal polynomials on the unit circle with
//! Muckenhoupt weights.
//!
//! Everything lives on a uniform offset grid of `N = 2^m` nodes
//! ([`grid::CircleGrid`]); Fourier work goes through an FFT and integrals are
//! trapezoidal sums. On top of that sit weight families and their `A_p`
//! characteristics ([`weights`]), the Szegő recursion ([`opuc`]), the Szegő
//! function ([`szego`]), Clark measures ([`clark`]), weighted singular
//! operators ([`weighted_ops`]) and the experiment runner ([`experiments`]).

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod clark;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod opuc;
pub mod quad;
pub mod seeds;
pub mod szego;
pub mod weighted_ops;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{CircleGrid, Grid, GridFunction};
pub use opuc::OpucSystem;
pub use weights::{make_weight, Weight, WeightFamily};

/// Crate version stamped into every experiment record.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
