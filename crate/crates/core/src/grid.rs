//! Uniform sample grids on the unit circle and functions sampled on them.
//!
//! Nodes sit at half-step offsets, θ_j = 2π(j + ½)/N, so that no node ever
//! coincides with θ = 0 where the model weights are singular. Discrete Fourier
//! coefficients follow the continuous convention
//! `c_k = (1/N) Σ_j f(θ_j) e^{-ikθ_j}` with frequencies `k ∈ [-N/2, N/2)`;
//! the half-step offset shows up as a phase twist around the raw FFT.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type Grid = Arc<CircleGrid>;

pub struct CircleGrid {
    log2_size: u32,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// e^{-iπk/N} stored at the FFT index of frequency k.
    phase: Vec<Complex64>,
}

impl fmt::Debug for CircleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleGrid")
            .field("log2_size", &self.log2_size)
            .field("size", &self.size)
            .finish()
    }
}

impl PartialEq for CircleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.log2_size == other.log2_size
    }
}

impl CircleGrid {
    pub const DEFAULT_LOG2: u32 = 14;
    pub const MIN_LOG2: u32 = 6;
    pub const MAX_LOG2: u32 = 24;

    pub fn new(log2_size: u32) -> Result<Grid> {
        if !(Self::MIN_LOG2..=Self::MAX_LOG2).contains(&log2_size) {
            return Err(Error::GridSize(log2_size));
        }
        let size = 1usize << log2_size;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let phase = (0..size)
            .map(|idx| {
                let k = frequency_of(idx, size) as f64;
                Complex64::from_polar(1.0, -PI * k / size as f64)
            })
            .collect();
        Ok(Arc::new(Self {
            log2_size,
            size,
            forward,
            inverse,
            phase,
        }))
    }

    pub fn log2_size(&self) -> u32 {
        self.log2_size
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Node spacing 2π/N.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.spacing() * (j as f64 + 0.5)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(move |j| self.node(j))
    }

    /// e^{iθ_j}.
    pub fn point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.node(j))
    }

    /// Frequency represented by FFT slot `idx`; the Nyquist slot is `-N/2`.
    pub fn frequency(&self, idx: usize) -> i64 {
        frequency_of(idx, self.size)
    }

    /// FFT slot holding frequency `k`, for `k ∈ [-N/2, N/2)`.
    pub fn slot(&self, k: i64) -> usize {
        let n = self.size as i64;
        debug_assert!(k >= -n / 2 && k < n / 2);
        k.rem_euclid(n) as usize
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes().map(f).collect()
    }

    pub fn sample_real<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    /// Fourier coefficients of grid samples, slot-indexed.
    pub fn analyze(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.size);
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        for (c, ph) in buf.iter_mut().zip(&self.phase) {
            *c *= ph * scale;
        }
        buf
    }

    /// Inverse of [`CircleGrid::analyze`].
    pub fn synthesize(&self, mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.size);
        for (c, ph) in coeffs.iter_mut().zip(&self.phase) {
            *c *= ph.conj();
        }
        self.inverse.process(&mut coeffs);
        coeffs
    }

    /// Values of `Σ_k a_k e^{ikθ_j}` at every node, for `a.len() <= N`.
    pub fn eval_polynomial(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert!(coeffs.len() <= self.size, "polynomial degree exceeds grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (k, (slot, a)) in buf.iter_mut().zip(coeffs).enumerate() {
            *slot = a * Complex64::from_polar(1.0, PI * k as f64 / self.size as f64);
        }
        self.inverse.process(&mut buf);
        buf
    }
}

fn frequency_of(idx: usize, size: usize) -> i64 {
    if idx < size / 2 {
        idx as i64
    } else {
        idx as i64 - size as i64
    }
}

/// Complex samples of a boundary function on a [`CircleGrid`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::Length {
                expected: grid.size(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &Grid, f: F) -> Result<Self> {
        Self::new(grid.clone(), grid.sample(f))
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn constant(grid: &Grid, c: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.size()],
        }
    }

    /// e^{ikθ}.
    pub fn monomial(grid: &Grid, k: i64) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.sample(|t| Complex64::from_polar(1.0, k as f64 * t)),
        }
    }

    /// Builds without validation; callers guarantee length and finiteness.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.size());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    /// Real parts, failing if any imaginary part exceeds `tol` relative to the sup norm.
    pub fn require_real(&self, tol: f64) -> Result<Vec<f64>> {
        let scale = self.sup_norm().max(1.0);
        for (index, v) in self.values.iter().enumerate() {
            if v.im.abs() > tol * scale {
                return Err(Error::NotReal { index, imag: v.im });
            }
        }
        Ok(self.real_parts())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.grid.size(), other.grid.size(), "grid mismatch");
        Self::from_parts(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise multiplication by a real multiplier.
    pub fn mul_real(&self, m: &[f64]) -> Self {
        assert_eq!(m.len(), self.len());
        Self::from_parts(self.grid.clone(), self.values.iter().zip(m).map(|(v, &s)| v * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// Multiplication by z^k on the circle.
    pub fn shift(&self, k: i64) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.values
                .iter()
                .zip(self.grid.nodes())
                .map(|(&v, t)| v * Complex64::from_polar(1.0, k as f64 * t))
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
