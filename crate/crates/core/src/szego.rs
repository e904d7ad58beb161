//! The Szegő function on the boundary, strong Szegő errors and polynomial
//! entropy.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{conjugate_function, mean_real};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::opuc::{weighted_lp_norm, OpucSystem};
use crate::weights::{Weight, WeightFamily};

/// Floor for `|φ_n|` inside the entropy logarithm.
pub const LOG_FLOOR: f64 = 1e-300;

/// Boundary values of the outer function `D` with `|D|² = w` and `D(0) > 0`.
#[derive(Clone, Debug)]
pub struct SzegoData {
    grid: Grid,
    pub logw: Vec<f64>,
    /// Harmonic conjugate of `½ log w`.
    pub conj_half_logw: Vec<f64>,
    pub d: GridFunction,
    pub dinv: GridFunction,
    /// `D(0) = exp((1/4π)∫ log w dθ)`
    pub d0: f64,
}

impl SzegoData {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// `D = exp(½ log w + i·conj(½ log w))` on the grid.
pub fn szego_function(w: &Weight) -> Result<SzegoData> {
    let grid = w.grid().clone();
    let logw = w.log_samples();
    let half: Vec<f64> = logw.iter().map(|v| 0.5 * v).collect();
    let conj = conjugate_function(&GridFunction::from_real(grid.clone(), &half)?)?.real_parts();
    let d_values: Vec<Complex64> = half.iter().zip(&conj).map(|(&u, &v)| Complex64::new(u, v).exp()).collect();
    let dinv_values = d_values.iter().map(|v| v.inv()).collect();
    let d0 = mean_real(&half).exp();
    Ok(SzegoData {
        d: GridFunction::from_parts(grid.clone(), d_values),
        dinv: GridFunction::from_parts(grid.clone(), dinv_values),
        grid,
        logw,
        conj_half_logw: conj,
        d0,
    })
}

fn system_weight(system: &OpucSystem) -> Result<&Weight> {
    let w = system
        .weight()
        .ok_or_else(|| Error::Parameter("system was not built from a weight".into()))?;
    w.require_normalized()?;
    Ok(w)
}

/// `‖φ_n* − D^{−1}‖_{L^p_w}` for a normalized weight and `p ≥ 2`.
pub fn strong_szego_error(system: &OpucSystem, szego: &SzegoData, n: usize, p: f64) -> Result<f64> {
    let w = system_weight(system)?;
    if !(p >= 2.0) {
        return Err(Error::Parameter(format!("strong Szegő errors need p >= 2, got {p}")));
    }
    let star = system.reversed_on_grid(w.grid(), n)?;
    weighted_lp_norm(&star.sub(&szego.dinv), w, p)
}

/// Polynomial entropy `(1/2π)∫ |φ_n|² log|φ_n| w dθ`.
pub fn entropy(system: &OpucSystem, n: usize) -> Result<f64> {
    let w = system_weight(system)?;
    let phi = system.orthonormal_on_grid(w.grid(), n)?;
    let s: f64 = phi
        .values()
        .iter()
        .zip(w.samples())
        .map(|(v, w)| {
            let a = v.norm();
            a * a * a.max(LOG_FLOOR).ln() * w
        })
        .sum();
    Ok(s / phi.len() as f64)
}

/// `−(1/4π)∫ log w dθ`, the entropy limit.
pub fn entropy_limit(w: &Weight) -> f64 {
    -0.5 * mean_real(&w.log_samples())
}

/// Outcome of the scan for `q_cr(w) = sup{q : w^{−1} ∈ L^q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcrEstimate {
    /// Largest scanned `q` such that every scanned `q' ≤ q` converged.
    pub lower_bound: f64,
    pub scanned: Vec<(f64, bool)>,
}

/// Log₂ grid sizes used for the refinement test.
const QCR_LEVELS: [u32; 4] = [12, 14, 16, 18];

/// Lower-bounds `q_cr` for a closed-form family: `mean(w^{−q})` is computed on
/// a sequence of refined grids and `q` counts as integrable when successive
/// increments shrink by at least 10% per refinement.
pub fn estimate_q_cr(family: &WeightFamily, q_grid: &[f64]) -> Result<QcrEstimate> {
    if family.density(0.5).is_none() {
        return Err(Error::Parameter("q_cr scan needs a closed-form weight".into()));
    }
    let mut scanned = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let means: Vec<f64> = QCR_LEVELS
            .iter()
            .map(|&m| {
                let n = 1usize << m;
                let s: f64 = (0..n)
                    .map(|j| {
                        let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                        family.density(t).unwrap().powf(-q)
                    })
                    .sum();
                s / n as f64
            })
            .collect();
        let inc: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let tiny = 1e-12 * means.last().unwrap().abs();
        let converged = means.iter().all(|m| m.is_finite()) && inc.windows(2).all(|d| d[1] <= tiny || d[1] < 0.9 * d[0]);
        scanned.push((q, converged));
    }
    let mut sorted = scanned.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lower_bound = sorted.iter().take_while(|s| s.1).last().map_or(0.0, |s| s.0);
    Ok(QcrEstimate { lower_bound, scanned })
}

/// Largest exponent admitted in strong Szegő runs: `2(1 + q_cr)`.
pub fn strong_szego_p_cap(q_cr: &QcrEstimate) -> f64 {
    2.0 * (1.0 + q_cr.lower_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::weights::make_weight;

    #[test]
    fn flat_weight_has_unit_szego_function() {
        let g = CircleGrid::new(8).unwrap();
        let w = make_weight(&WeightFamily::Constant { value: 1.0 }, &g, true).unwrap();
        let s = szego_function(&w).unwrap();
        assert!((s.d0 - 1.0).abs() < 1e-15);
        assert!(s.d.values().iter().all(|v| (v - 1.0).norm() < 1e-14));
        let sys = OpucSystem::for_weight(&w, 8).unwrap();
        for n in [0, 3, 8] {
            assert!(strong_szego_error(&sys, &s, n, 2.0).unwrap() < 1e-13);
            assert!(entropy(&sys, n).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn bernstein_szego_closed_form() {
        let g = CircleGrid::new(10).unwrap();
        let a = 0.5;
        let w = make_weight(&WeightFamily::BernsteinSzego { a }, &g, true).unwrap();
        let s = szego_function(&w).unwrap();
        assert!((s.d0 - (1.0f64 - a * a).sqrt()).abs() < 1e-12);
        for j in 0..g.size() {
            let xi = g.point(j);
            let exact = (1.0f64 - a * a).sqrt() / (Complex64::new(1.0, 0.0) - a * xi);
            assert!((s.d.values()[j] - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn fisher_hartwig_argument() {
        // arg D = β(θ − π)/2; the sampled log singularity costs O(1/N) away from θ = 0
        let beta = 0.3;
        let mut last = f64::INFINITY;
        for m in [10, 12, 14] {
            let g = CircleGrid::new(m).unwrap();
            let w = make_weight(&WeightFamily::FisherHartwig { beta }, &g, false).unwrap();
            let s = szego_function(&w).unwrap();
            let mut worst: f64 = 0.0;
            for j in 0..g.size() {
                let t = g.node(j);
                let d = s.d.values()[j];
                assert!((d.norm_sqr() - w.samples()[j]).abs() < 1e-8 * w.samples()[j]);
                if (0.5..2.0 * PI - 0.5).contains(&t) {
                    worst = worst.max((d.arg() - beta * (t - PI) / 2.0).abs());
                }
            }
            assert!(worst < 1e-3 && worst < 0.3 * last, "m = {m}: {worst}");
            last = worst;
        }
    }

    #[test]
    fn entropy_and_errors_need_normalized_weights() {
        let g = CircleGrid::new(8).unwrap();
        let w = make_weight(&WeightFamily::FisherHartwig { beta: 0.2 }, &g, false).unwrap();
        let sys = OpucSystem::for_weight(&w, 4).unwrap();
        let s = szego_function(&w).unwrap();
        assert!(matches!(entropy(&sys, 2), Err(Error::NotNormalized { .. })));
        assert!(matches!(strong_szego_error(&sys, &s, 2, 2.0), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn q_cr_of_fisher_hartwig() {
        // w^{-q} = |θ|^{-2βq} near 0, integrable iff q < 1/(2β) = 2.5
        let est = estimate_q_cr(&WeightFamily::FisherHartwig { beta: 0.2 }, &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0]).unwrap();
        assert!(est.lower_bound >= 1.5 && est.lower_bound < 2.5, "{est:?}");
        let smooth = estimate_q_cr(&WeightFamily::BernsteinSzego { a: 0.5 }, &[1.0, 5.0]).unwrap();
        assert_eq!(smooth.lower_bound, 5.0);
    }
}
