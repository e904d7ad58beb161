//! Carathéodory and Schur functions of a weight and its Aleksandrov–Clark
//! family `F_α = (ζ + F)/(1 + ζF)`, `ζ = (1 − α)/(1 + α)`.

use num_complex::Complex64;

use crate::circle::{conjugate_function, herglotz, poisson_extend, poisson_on_circle};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::weights::{ap_characteristic, ArcFamily, Weight};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Denominator floor in `w/(w² + w̃²)`.
pub const DENOMINATOR_FLOOR: f64 = 1e-280;
/// Fraction of floored nodes above which the dual weight is rejected.
pub const MAX_FLOORED_FRACTION: f64 = 1e-4;

/// Boundary trace `F = w + i·w̃` of the Carathéodory function, normalized so
/// that `F(0) = 1`.
pub fn caratheodory_boundary(w: &Weight) -> Result<GridFunction> {
    w.require_normalized()?;
    let conj = conjugate_function(&w.to_grid_function())?;
    Ok(w.to_grid_function().zip_with(&conj, |a, b| Complex64::new(a.re, b.re)))
}

/// `f(ξ) = (F(ξ) − 1)/(ξ(F(ξ) + 1))` on the grid.
pub fn schur_from_caratheodory(f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let den = grid.point(j) * (v + ONE);
            if den.norm() <= DENOMINATOR_FLOOR {
                Err(Error::Degenerate(format!("F + 1 vanishes at node {j}")))
            } else {
                Ok((v - ONE) / den)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid.clone(), values)
}

fn mobius(zeta: Complex64, f: Complex64) -> Complex64 {
    (zeta + f) / (ONE + zeta * f)
}

#[derive(Clone, Debug)]
pub struct ClarkData {
    pub alpha: Complex64,
    base: Weight,
    /// Boundary values of `F_α`.
    pub f_alpha: GridFunction,
    /// Boundary values of the Schur function of `w_α`.
    pub schur: GridFunction,
    pub w_alpha: Weight,
    /// Nodes where the dual denominator hit the floor.
    pub floored: usize,
    /// For `α = −1`: `max |w/(w² + w̃²) − Re(1/F)|`.
    pub cross_check: Option<f64>,
}

fn check_unimodular(alpha: Complex64) -> Result<()> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        Err(Error::NotUnimodular(alpha.norm()))
    } else {
        Ok(())
    }
}

/// The Clark weight `w_α = Re F_α` of a normalized A₂ weight.
pub fn clark_weight(w: &Weight, alpha: Complex64) -> Result<ClarkData> {
    check_unimodular(alpha)?;
    w.require_normalized()?;
    if !w.in_a2() {
        return Err(Error::Parameter("Clark weights need w in A_2".into()));
    }
    let a2 = ap_characteristic(w, 2.0, &ArcFamily::dyadic(w.grid()))?.value;
    if !a2.is_finite() {
        return Err(Error::Parameter(format!("A_2 characteristic is not finite ({a2})")));
    }
    let grid = w.grid();
    let f = caratheodory_boundary(w)?;
    let (f_alpha, samples, floored, cross_check) = if (alpha + ONE).norm() < 1e-12 {
        let mut floored = 0;
        let mut samples = Vec::with_capacity(grid.size());
        let mut worst: f64 = 0.0;
        for v in f.values() {
            let mut den = v.re * v.re + v.im * v.im;
            if den < DENOMINATOR_FLOOR {
                den = DENOMINATOR_FLOOR;
                floored += 1;
            }
            let direct = v.re / den;
            worst = worst.max((direct - v.inv().re).abs());
            samples.push(direct);
        }
        if floored as f64 > MAX_FLOORED_FRACTION * grid.size() as f64 {
            return Err(Error::Degenerate(format!("F vanishes at {floored} nodes")));
        }
        (f.map(|v| v.inv()), samples, floored, Some(worst))
    } else {
        let zeta = (ONE - alpha) / (ONE + alpha);
        let fa = f.map(|v| mobius(zeta, v));
        let samples = fa.real_parts();
        (fa, samples, 0, None)
    };
    let schur = schur_from_caratheodory(&f_alpha)?;
    let mut w_alpha = Weight::from_samples(grid, samples, false)?;
    if (w_alpha.mass() - 1.0).abs() < 1e-6 {
        // µ_α is a probability measure; mark it so downstream checks apply
        w_alpha = w_alpha.normalized();
    }
    Ok(ClarkData {
        alpha,
        base: w.clone(),
        f_alpha,
        schur,
        w_alpha,
        floored,
        cross_check,
    })
}

/// `K(µ, z) = log P(w, z) − P(log w, z)` at each sample.
pub fn generalized_entropy(w: &Weight, z_samples: &[Complex64]) -> Result<Vec<f64>> {
    let wf = w.to_grid_function();
    let logw = GridFunction::from_real(w.grid().clone(), &w.log_samples())?;
    z_samples
        .iter()
        .map(|&z| Ok(poisson_extend(&wf, z)?.re.ln() - poisson_extend(&logw, z)?.re))
        .collect()
}

/// `K(µ, r e^{iθ_j})` at every grid angle, via Fourier multipliers.
pub fn generalized_entropy_on_circle(w: &Weight, r: f64) -> Result<Vec<f64>> {
    let pw = poisson_on_circle(&w.to_grid_function(), r)?;
    let plog = poisson_on_circle(&GridFunction::from_real(w.grid().clone(), &w.log_samples())?, r)?;
    Ok(pw.values().iter().zip(plog.values()).map(|(a, b)| a.re.ln() - b.re).collect())
}

/// `F(r e^{iθ_j}) = c₀ + 2Σ_{k>0} c_k r^k e^{ikθ_j}` from the boundary density.
fn caratheodory_on_circle(grid: &Grid, w: &Weight, r: f64) -> Result<Vec<Complex64>> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDisc { re: r, im: 0.0 });
    }
    let mut c = grid.analyze(w.to_grid_function().values());
    for (idx, v) in c.iter_mut().enumerate() {
        let k = grid.frequency(idx);
        *v *= match k {
            0 => 1.0,
            k if k > 0 => 2.0 * r.powi(k as i32),
            _ => 0.0,
        };
    }
    Ok(grid.synthesize(c))
}

impl ClarkData {
    fn interior_f_alpha(&self, f: Complex64) -> Complex64 {
        if (self.alpha + ONE).norm() < 1e-12 {
            f.inv()
        } else {
            mobius((ONE - self.alpha) / (ONE + self.alpha), f)
        }
    }

    /// `K(µ_α, z)` with `P(w_α, z) = Re F_α(z)` taken from the interior
    /// Carathéodory function of the base weight, which avoids quadrature of
    /// the possibly singular `w_α`.
    pub fn generalized_entropy(&self, z_samples: &[Complex64]) -> Result<Vec<f64>> {
        let wf = self.base.to_grid_function();
        let loga = GridFunction::from_real(self.w_alpha.grid().clone(), &self.w_alpha.log_samples())?;
        z_samples
            .iter()
            .map(|&z| {
                let fz = herglotz(&wf, z)?;
                Ok(self.interior_f_alpha(fz).re.ln() - poisson_extend(&loga, z)?.re)
            })
            .collect()
    }

    /// Same as [`ClarkData::generalized_entropy`] at every grid angle on `|z| = r`.
    pub fn generalized_entropy_on_circle(&self, r: f64) -> Result<Vec<f64>> {
        let grid = self.w_alpha.grid();
        let f = caratheodory_on_circle(grid, &self.base, r)?;
        let plog = poisson_on_circle(&GridFunction::from_real(grid.clone(), &self.w_alpha.log_samples())?, r)?;
        Ok(f.iter()
            .zip(plog.values())
            .map(|(&fz, b)| self.interior_f_alpha(fz).re.ln() - b.re)
            .collect())
    }
}
