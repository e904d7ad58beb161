//! Weighted singular operators on grid functions and estimates of their
//! induced `L^p → L^p` norms.
//!
//! Norms are taken with respect to the normalized measure `dθ/2π`, and
//! adjoints with respect to the pairing `⟨u, v⟩ = (1/2π)∫ u v̄ dθ`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{band_truncate, riesz_project};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LinearFit};
use crate::grid::{Grid, GridFunction};
use crate::seeds::{cell_seed, rng};
use crate::weights::Weight;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default input band `|k| ≤ 64` for materialized `p = 2` norms.
pub const DEFAULT_BAND: usize = 64;
pub const POWER_MAX_ITER: usize = 2000;
pub const POWER_TOL: f64 = 1e-9;
/// Iterations over which slow monotone creep is measured.
const POWER_WINDOW: usize = 100;
/// Relative gain over [`POWER_WINDOW`] iterations below which the iteration stops.
const POWER_WINDOW_TOL: f64 = 1e-6;

type LinearMap = Arc<dyn Fn(&GridFunction) -> GridFunction + Send + Sync>;

/// A linear operator on grid functions together with its adjoint.
#[derive(Clone)]
pub struct OperatorProbe {
    grid: Grid,
    p: f64,
    band: usize,
    description: String,
    apply: LinearMap,
    adjoint: Option<LinearMap>,
}

impl std::fmt::Debug for OperatorProbe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorProbe")
            .field("p", &self.p)
            .field("band", &self.band)
            .field("description", &self.description)
            .field("has_adjoint", &self.adjoint.is_some())
            .finish()
    }
}

impl OperatorProbe {
    pub fn new<F>(grid: &Grid, p: f64, band: usize, description: impl Into<String>, apply: F) -> Self
    where
        F: Fn(&GridFunction) -> GridFunction + Send + Sync + 'static,
    {
        Self {
            grid: grid.clone(),
            p,
            band,
            description: description.into(),
            apply: Arc::new(apply),
            adjoint: None,
        }
    }

    pub fn with_adjoint<F>(mut self, adjoint: F) -> Self
    where
        F: Fn(&GridFunction) -> GridFunction + Send + Sync + 'static,
    {
        self.adjoint = Some(Arc::new(adjoint));
        self
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.band = band;
        self
    }

    pub fn identity(grid: &Grid, p: f64) -> Self {
        Self::new(grid, p, DEFAULT_BAND, "identity", |f| f.clone()).with_adjoint(|f| f.clone())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        (self.apply)(f)
    }

    pub fn apply_adjoint(&self, f: &GridFunction) -> Option<GridFunction> {
        self.adjoint.as_ref().map(|a| a(f))
    }

    pub fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }

    /// `self − other`, keeping this probe's exponent and band.
    pub fn difference(&self, other: &OperatorProbe) -> OperatorProbe {
        let (a, b) = (self.apply.clone(), other.apply.clone());
        let mut out = OperatorProbe::new(
            &self.grid,
            self.p,
            self.band,
            format!("({}) - ({})", self.description, other.description),
            move |f| a(f).sub(&b(f)),
        );
        if let (Some(a), Some(b)) = (self.adjoint.clone(), other.adjoint.clone()) {
            out.adjoint = Some(Arc::new(move |f| a(f).sub(&b(f))));
        }
        out
    }

    /// `max ‖T(af + bg) − aTf − bTg‖∞ / scale` over random band-limited pairs.
    pub fn linearity_defect(&self, pairs: usize, seed: u64) -> f64 {
        let mut r = rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let f = random_band_function(&self.grid, self.band, &mut r);
            let g = random_band_function(&self.grid, self.band, &mut r);
            let a = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
            let b = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
            let lhs = self.apply(&f.scale(a).add(&g.scale(b)));
            let rhs = self.apply(&f).scale(a).add(&self.apply(&g).scale(b));
            let scale = lhs.sup_norm().max(rhs.sup_norm()).max(1.0);
            worst = worst.max(lhs.max_abs_diff(&rhs) / scale);
        }
        worst
    }
}

/// Random trigonometric polynomial with coefficients in the unit square for `|k| ≤ band`.
pub fn random_band_function<R: Rng>(grid: &Grid, band: usize, r: &mut R) -> GridFunction {
    let n = grid.size();
    let band = band.min(n / 2 - 1) as i64;
    let mut coeffs = vec![ZERO; n];
    for k in -band..=band {
        coeffs[grid.slot(k)] = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    }
    GridFunction::from_parts(grid.clone(), grid.synthesize(coeffs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactSvdP2,
    PowerMethodP,
    RandomProbe,
}

/// A lower bound for an induced operator norm with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub trials: usize,
    pub seed: u64,
    /// False when the power method hit its iteration cap in every trial.
    pub converged: bool,
}

/// `‖f‖_p` under `dθ/2π`.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    let s: f64 = f.values().iter().map(|v| v.norm().powf(p)).sum();
    (s / f.len() as f64).powf(1.0 / p)
}

/// `J_p(y) = |y|^{p−2} y / ‖y‖_p^{p−1}`: the unit-norm element of `L^{p′}` norming `y`.
fn duality_map(y: &GridFunction, p: f64) -> Option<GridFunction> {
    let norm = lp_norm(y, p);
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let scale = norm.powf(p - 1.0);
    Some(y.map(|v| {
        let a = v.norm();
        if a == 0.0 {
            ZERO
        } else {
            v * (a.powf(p - 2.0) / scale)
        }
    }))
}

/// Dual-norm power method from `trials` random band-limited starts.
///
/// Each step maps `x ↦ J_{p′}(T* J_p(Tx))`, along which `‖Tx‖_p` is
/// non-decreasing; the best value over all starts is a lower bound for
/// `‖T‖_{p,p}`. Without an adjoint the starts are only evaluated.
pub fn power_method(probe: &OperatorProbe, trials: usize, seed: u64) -> NormEstimate {
    let p = probe.p;
    let q = p / (p - 1.0);
    let trials = trials.max(1);
    let results: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(cell_seed(seed, t as u64));
            let start = random_band_function(&probe.grid, probe.band, &mut r);
            let norm = lp_norm(&start, p);
            let mut x = start.scale(Complex64::new(1.0 / norm, 0.0));
            let mut best = lp_norm(&probe.apply(&x), p);
            if !probe.has_adjoint() {
                return (best, true);
            }
            let mut history = Vec::with_capacity(POWER_MAX_ITER);
            for it in 0..POWER_MAX_ITER {
                let y = probe.apply(&x);
                let Some(z) = duality_map(&y, p) else {
                    return (best, true);
                };
                let s = probe.apply_adjoint(&z).expect("adjoint present");
                let Some(next) = duality_map(&s, q) else {
                    return (best, true);
                };
                let value = lp_norm(&probe.apply(&next), p);
                let scale = value.max(1e-300);
                let stalled = it >= POWER_WINDOW && value - history[it - POWER_WINDOW] <= POWER_WINDOW_TOL * scale;
                let done = stalled || (value - best).abs() <= POWER_TOL * scale;
                history.push(value);
                x = next;
                best = best.max(value);
                if done {
                    return (best, true);
                }
            }
            (best, false)
        })
        .collect();
    let value = results.iter().map(|r| r.0).fold(0.0, f64::max);
    NormEstimate {
        value,
        method: if probe.has_adjoint() {
            NormMethod::PowerMethodP
        } else {
            NormMethod::RandomProbe
        },
        trials,
        seed,
        converged: results.iter().any(|r| r.1),
    }
}

/// Exact `L² → L²` norm of the probe restricted to inputs with `|k| ≤ band`:
/// the largest singular value of the materialized `N × (2·band+1)` matrix.
pub fn exact_band_norm(probe: &OperatorProbe) -> Result<f64> {
    let grid = &probe.grid;
    let band = probe.band as i64;
    if band as usize >= grid.size() / 2 {
        return Err(Error::TooLarge {
            requested: probe.band,
            limit: grid.size() / 2 - 1,
        });
    }
    let columns: Vec<Vec<Complex64>> = (-band..=band)
        .into_par_iter()
        .map(|k| probe.apply(&GridFunction::monomial(grid, k)).into_values())
        .collect();
    Ok(largest_singular_value(&columns, grid.size()))
}

/// Exact `L²` norm on the whole grid space, for `N ≤ 2^10`.
pub fn exact_full_norm(probe: &OperatorProbe) -> Result<f64> {
    let n = probe.grid.size();
    if n > 1 << 10 {
        return Err(Error::TooLarge {
            requested: n,
            limit: 1 << 10,
        });
    }
    let s = (n as f64).sqrt();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = Complex64::new(s, 0.0);
            probe.apply(&GridFunction::from_parts(probe.grid.clone(), e)).into_values()
        })
        .collect();
    Ok(largest_singular_value(&columns, n))
}

/// Columns are images of `L²(dθ/2π)`-orthonormal inputs.
fn largest_singular_value(columns: &[Vec<Complex64>], n: usize) -> f64 {
    let m = columns.len();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        columns[i].iter().zip(&columns[j]).map(|(a, b)| a.conj() * b).sum::<Complex64>() / n as f64
    });
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v)).sqrt()
}

/// Dispatches on the requested method; `ExactSvdP2` requires `p = 2`.
pub fn operator_norm(probe: &OperatorProbe, method: NormMethod, trials: usize, seed: u64) -> Result<NormEstimate> {
    match method {
        NormMethod::ExactSvdP2 => {
            if probe.p != 2.0 {
                return Err(Error::Parameter(format!("exact SVD norms need p = 2, got {}", probe.p)));
            }
            Ok(NormEstimate {
                value: exact_band_norm(probe)?,
                method,
                trials: 0,
                seed,
                converged: true,
            })
        }
        NormMethod::PowerMethodP => {
            if !probe.has_adjoint() {
                return Err(Error::Parameter("power method needs an adjoint".into()));
            }
            Ok(power_method(probe, trials, seed))
        }
        NormMethod::RandomProbe => {
            let stripped = OperatorProbe {
                adjoint: None,
                ..probe.clone()
            };
            Ok(power_method(&stripped, trials, seed))
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Exponent(p))
    }
}

/// `f ↦ w^{1/p} P⁺(w^{−1/p} f)`
pub fn weighted_riesz(w: &Weight, p: f64) -> Result<OperatorProbe> {
    check_exponent(p)?;
    let up = Arc::new(w.powf(1.0 / p));
    let down = Arc::new(w.powf(-1.0 / p));
    let (u1, d1) = (up.clone(), down.clone());
    Ok(
        OperatorProbe::new(w.grid(), p, DEFAULT_BAND, format!("w^(1/{p}) P+ w^(-1/{p})"), move |f| {
            riesz_project(&f.mul_real(&d1)).mul_real(&u1)
        })
        .with_adjoint(move |f| riesz_project(&f.mul_real(&up)).mul_real(&down)),
    )
}

/// `Q_{w,p} = −w^{−1/p′} P_{n−1} w^{1/p′} + w^{1/p} P_{n−1} w^{−1/p}`.
pub fn build_q(w: &Weight, p: f64, n: usize) -> Result<OperatorProbe> {
    check_exponent(p)?;
    let size = w.grid().size();
    if n == 0 || n >= size / 4 {
        return Err(Error::TooLarge {
            requested: n,
            limit: size / 4 - 1,
        });
    }
    let q = p / (p - 1.0);
    let a = Arc::new(w.powf(1.0 / q));
    let ai = Arc::new(w.powf(-1.0 / q));
    let b = Arc::new(w.powf(1.0 / p));
    let bi = Arc::new(w.powf(-1.0 / p));
    let hi = n as i64 - 1;
    let (a1, ai1, b1, bi1) = (a.clone(), ai.clone(), b.clone(), bi.clone());
    let apply = move |f: &GridFunction| {
        let first = band_truncate(&f.mul_real(&a1), 0, hi).mul_real(&ai1);
        let second = band_truncate(&f.mul_real(&bi1), 0, hi).mul_real(&b1);
        second.sub(&first)
    };
    let adjoint = move |f: &GridFunction| {
        let first = band_truncate(&f.mul_real(&ai), 0, hi).mul_real(&a);
        let second = band_truncate(&f.mul_real(&b), 0, hi).mul_real(&bi);
        second.sub(&first)
    };
    Ok(OperatorProbe::new(w.grid(), p, 2 * n, format!("Q_(w,{p}), n = {n}"), apply).with_adjoint(adjoint))
}

/// Exact `L²` facts about `Q = Q_{w,2}` from its compression to
/// `V = span{w^{∓1/2} z^k : k < n}`; `Q` maps into `V` and vanishes on `V^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventReport {
    pub dimension: usize,
    pub t: f64,
    /// `‖Q‖₂`
    pub q_norm: f64,
    /// `‖(I − tQ)^{−1}‖₂`
    pub resolvent_norm: f64,
    /// `1/(1 − t‖Q‖)` when `t‖Q‖ < 1`, else infinity.
    pub neumann_bound: f64,
    /// `max |M + M*|` on the compression.
    pub antisymmetry_defect: f64,
}

pub fn q_resolvent(w: &Weight, n: usize, t: f64) -> Result<ResolventReport> {
    let probe = build_q(w, 2.0, n)?;
    let grid = w.grid();
    let size = grid.size();
    let up = w.powf(0.5);
    let down = w.powf(-0.5);
    let scale = (size as f64).sqrt();
    let mut cols = Vec::with_capacity(2 * n);
    for k in 0..n as i64 {
        let z = GridFunction::monomial(grid, k);
        cols.push(z.mul_real(&down));
        cols.push(z.mul_real(&up));
    }
    let b = DMatrix::from_fn(size, cols.len(), |i, j| cols[j].values()[i] / scale);
    let svd = b.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    let basis: Vec<GridFunction> = keep
        .iter()
        .map(|&i| GridFunction::from_parts(grid.clone(), u.column(i).iter().map(|v| v * scale).collect()))
        .collect();
    let images: Vec<GridFunction> = basis.par_iter().map(|v| probe.apply(v)).collect();
    let d = basis.len();
    let m = DMatrix::from_fn(d, d, |i, j| {
        basis[i]
            .values()
            .iter()
            .zip(images[j].values())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / size as f64
    });
    let antisymmetry_defect = (&m + m.adjoint()).iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
    let q_norm = m.clone().svd(false, false).singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    let shifted = DMatrix::<Complex64>::identity(d, d) - m * Complex64::new(t, 0.0);
    let smin = shifted
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, &v| a.min(v));
    let resolvent_norm = (1.0 / smin).max(1.0);
    let neumann_bound = if t * q_norm < 1.0 {
        1.0 / (1.0 - t * q_norm)
    } else {
        f64::INFINITY
    };
    Ok(ResolventReport {
        dimension: d,
        t,
        q_norm,
        resolvent_norm,
        neumann_bound,
        antisymmetry_defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub delta: f64,
    pub distance: f64,
    pub method: NormMethod,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub p: f64,
    pub band: usize,
    pub rows: Vec<ContinuityRow>,
    /// Slope of `log d(δ)` against `log δ`; absent when some `d(δ)` vanishes.
    pub fit: Option<LinearFit>,
}

pub const DEFAULT_DELTAS: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

/// Distances `d(δ) = ‖T(w e^{δf}) − T(w)‖` for `T = w^{1/p} P⁺ w^{−1/p}` on
/// inputs with `|k| ≤ band`. Exact at `p = 2`, power-method lower bounds otherwise.
pub fn continuity_experiment(
    w: &Weight,
    f: &GridFunction,
    p: f64,
    deltas: &[f64],
    band: usize,
    trials: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    check_exponent(p)?;
    let fr = f.require_real(1e-12)?;
    if fr.len() != w.samples().len() {
        return Err(Error::Length {
            expected: w.samples().len(),
            got: fr.len(),
        });
    }
    let fmax = fr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let base = weighted_riesz(w, p)?.with_band(band);
    let rows = deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            if !(delta > 0.0) {
                return Err(Error::Parameter(format!("deltas must be positive, got {delta}")));
            }
            if delta * fmax > 700.0 {
                return Err(Error::Overflow(delta * fmax));
            }
            let samples: Vec<f64> = w.samples().iter().zip(&fr).map(|(a, b)| a * (delta * b).exp()).collect();
            let wd = Weight::from_samples(w.grid(), samples, false)?;
            let diff = weighted_riesz(&wd, p)?.with_band(band).difference(&base);
            let cell = cell_seed(seed, i as u64);
            let est = if p == 2.0 {
                operator_norm(&diff, NormMethod::ExactSvdP2, 0, cell)?
            } else {
                operator_norm(&diff, NormMethod::PowerMethodP, trials, cell)?
            };
            Ok(ContinuityRow {
                delta,
                distance: est.value,
                method: est.method,
                seed: cell,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = if rows.iter().all(|r| r.distance > 0.0) && rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.delta).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.distance).collect();
        Some(loglog_fit(&x, &y)?)
    } else {
        None
    };
    Ok(ContinuityReport { p, band, rows, fit })
}
