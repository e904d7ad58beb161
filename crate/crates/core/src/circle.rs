//! Quadrature, trigonometric moments and the classical kernels on the circle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::weights::Weight;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Equal-weight trapezoid rule, `(2π/N) Σ f(θ_j) ≈ ∫_T f dθ`.
pub fn quadrature(f: &GridFunction) -> Complex64 {
    f.grid().spacing() * f.values().iter().sum::<Complex64>()
}

/// `(1/2π) ∫_T f dθ`.
pub fn mean(f: &GridFunction) -> Complex64 {
    f.values().iter().sum::<Complex64>() / f.len() as f64
}

pub fn mean_real(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Trigonometric moments `c_k = (1/2π) ∫ e^{-ikθ} w dθ`, `k = 0..=kmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    c: Vec<Complex64>,
}

impl MomentSequence {
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        let c0 = c.first().ok_or_else(|| Error::Parameter("empty moment sequence".into()))?;
        if !(c0.re > 0.0) || c0.im.abs() > 1e-12 * c0.re {
            return Err(Error::Parameter(format!("c_0 must be real and positive, got {c0}")));
        }
        Ok(Self { c })
    }

    pub fn kmax(&self) -> usize {
        self.c.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.c
    }

    /// `c_k` for any `|k| <= kmax`, using `c_{-k} = conj(c_k)`.
    pub fn get(&self, k: i64) -> Complex64 {
        if k >= 0 {
            self.c[k as usize]
        } else {
            self.c[(-k) as usize].conj()
        }
    }
}

pub fn trig_moments(w: &Weight, kmax: usize) -> Result<MomentSequence> {
    let grid = w.grid();
    if kmax >= grid.size() / 2 {
        return Err(Error::TooLarge {
            requested: kmax,
            limit: grid.size() / 2 - 1,
        });
    }
    let samples: Vec<Complex64> = w.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let coeffs = grid.analyze(&samples);
    let mut c: Vec<Complex64> = coeffs[..=kmax].to_vec();
    c[0] = Complex64::new(c[0].re, 0.0);
    MomentSequence::new(c)
}

fn apply_multiplier<F: Fn(i64) -> Complex64>(f: &GridFunction, multiplier: F) -> GridFunction {
    let grid = f.grid();
    let mut coeffs = grid.analyze(f.values());
    for (idx, c) in coeffs.iter_mut().enumerate() {
        *c *= multiplier(grid.frequency(idx));
    }
    GridFunction::from_parts(grid.clone(), grid.synthesize(coeffs))
}

/// Harmonic conjugate: Fourier multiplier `-i·sgn(k)`, constants map to 0.
pub fn conjugate_function(f: &GridFunction) -> Result<GridFunction> {
    f.require_real(1e-12)?;
    let out = apply_multiplier(f, |k| match k.signum() {
        1 => Complex64::new(0.0, -1.0),
        -1 => Complex64::new(0.0, 1.0),
        _ => ZERO,
    });
    Ok(out.map(|v| Complex64::new(v.re, 0.0)))
}

/// Riesz projection P⁺: keeps frequencies `k >= 0`.
pub fn riesz_project(f: &GridFunction) -> GridFunction {
    apply_multiplier(f, |k| if k >= 0 { Complex64::new(1.0, 0.0) } else { ZERO })
}

/// Keeps frequencies `lo..=hi` and zeroes the rest.
pub fn band_truncate(f: &GridFunction, lo: i64, hi: i64) -> GridFunction {
    apply_multiplier(f, |k| if (lo..=hi).contains(&k) { Complex64::new(1.0, 0.0) } else { ZERO })
}

/// `P_n`: projection onto frequencies `0..=n`.
pub fn polynomial_projection(f: &GridFunction, n: usize) -> GridFunction {
    band_truncate(f, 0, n as i64)
}

fn check_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisc { re: z.re, im: z.im })
    }
}

/// Poisson integral `P(f, z) = (1/2π) ∫ (1-|z|²)/|1 - ζ̄z|² f(ζ) dθ`.
pub fn poisson_extend(f: &GridFunction, z: Complex64) -> Result<Complex64> {
    check_disc(z)?;
    let grid = f.grid();
    let r2 = z.norm_sqr();
    let sum: Complex64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let d = (Complex64::new(1.0, 0.0) - grid.point(j).conj() * z).norm_sqr();
            v * ((1.0 - r2) / d)
        })
        .sum();
    Ok(sum / f.len() as f64)
}

/// Poisson extension on the circle of radius `r` at every grid angle, via the
/// multiplier `r^{|k|}`.
pub fn poisson_on_circle(f: &GridFunction, r: f64) -> Result<GridFunction> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDisc { re: r, im: 0.0 });
    }
    Ok(apply_multiplier(f, |k| Complex64::new(r.powi(k.unsigned_abs() as i32), 0.0)))
}

/// Cauchy integral `C(f, z) = (1/2π) ∫ f(ζ)/(1 - ζ̄z) dθ`.
pub fn cauchy_integral(f: &GridFunction, z: Complex64) -> Result<Complex64> {
    check_disc(z)?;
    let grid = f.grid();
    let one = Complex64::new(1.0, 0.0);
    let sum: Complex64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| v / (one - grid.point(j).conj() * z))
        .sum();
    Ok(sum / f.len() as f64)
}

/// Herglotz transform `(1/2π) ∫ (ζ + z)/(ζ - z) f(ζ) dθ`; for a probability
/// density this is the Carathéodory function evaluated inside the disc.
pub fn herglotz(f: &GridFunction, z: Complex64) -> Result<Complex64> {
    Ok(2.0 * cauchy_integral(f, z)? - mean(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::weights::{make_weight, WeightFamily};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadrature_of_constants_and_cosine() {
        let g = CircleGrid::new(8).unwrap();
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!((quadrature(&one) - c(2.0 * PI, 0.0)).norm() < 1e-12);
        let cos = GridFunction::from_real_fn(&g, f64::cos).unwrap();
        assert!(quadrature(&cos).norm() < 1e-12);
    }

    #[test]
    fn quadrature_is_exact_below_nyquist() {
        let g = CircleGrid::new(6).unwrap();
        for k in 1..64 {
            let f = GridFunction::monomial(&g, k);
            assert!(quadrature(&f).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn quadrature_of_chord_length() {
        // ∫|1 - e^{iθ}| dθ = ∫ 2 sin(θ/2) dθ = 8; the adaptive reference lives in quad.rs tests
        let g = CircleGrid::new(16).unwrap();
        let f = GridFunction::from_real_fn(&g, |t| (c(1.0, 0.0) - Complex64::from_polar(1.0, t)).norm()).unwrap();
        assert!((quadrature(&f).re - 8.0).abs() < 1e-6);
    }

    #[test]
    fn moments_of_simple_weights() {
        let g = CircleGrid::new(8).unwrap();
        let one = make_weight(&WeightFamily::Constant { value: 1.0 }, &g, false).unwrap();
        let m = trig_moments(&one, 5).unwrap();
        assert!((m.get(0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(m.as_slice()[1..].iter().all(|v| v.norm() < 1e-14));

        let w = Weight::from_samples(&g, g.sample_real(|t| 1.0 + t.cos()), false).unwrap();
        let m = trig_moments(&w, 3).unwrap();
        assert!((m.get(0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((m.get(1) - c(0.5, 0.0)).norm() < 1e-12);
        assert!(m.get(2).norm() < 1e-12);
        assert!((m.get(-1) - c(0.5, 0.0)).norm() < 1e-12);

        // |1 - e^{iθ}|² = 2 - 2cos θ
        let w = make_weight(&WeightFamily::FisherHartwig { beta: 1.0 }, &g, false).unwrap();
        let m = trig_moments(&w, 3).unwrap();
        assert!((m.get(0) - c(2.0, 0.0)).norm() < 1e-12);
        assert!((m.get(1) - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(m.get(2).norm() < 1e-12);
    }

    #[test]
    fn moments_reject_large_kmax() {
        let g = CircleGrid::new(6).unwrap();
        let w = make_weight(&WeightFamily::Constant { value: 1.0 }, &g, false).unwrap();
        assert!(matches!(trig_moments(&w, 32), Err(Error::TooLarge { .. })));
        assert!(trig_moments(&w, 31).is_ok());
    }

    #[test]
    fn conjugate_of_cos_and_constant() {
        let g = CircleGrid::new(8).unwrap();
        let cos = GridFunction::from_real_fn(&g, f64::cos).unwrap();
        let sin = GridFunction::from_real_fn(&g, f64::sin).unwrap();
        assert!(conjugate_function(&cos).unwrap().max_abs_diff(&sin) < 1e-12);
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!(conjugate_function(&one).unwrap().sup_norm() < 1e-12);
        let complex = GridFunction::constant(&g, c(0.0, 1.0));
        assert!(matches!(conjugate_function(&complex), Err(Error::NotReal { .. })));
    }

    #[test]
    fn conjugate_of_log_chord() {
        // conj(log|1 - e^{iθ}|) = arg(1 - e^{iθ}) = (θ - π)/2 on (0, 2π)
        let g = CircleGrid::new(14).unwrap();
        let f = GridFunction::from_real_fn(&g, |t| (2.0 * (t / 2.0).sin()).ln()).unwrap();
        let h = conjugate_function(&f).unwrap();
        let mut worst: f64 = 0.0;
        for (j, t) in g.nodes().enumerate() {
            if t > 0.1 && t < 2.0 * PI - 0.1 {
                worst = worst.max((h.values()[j].re - (t - PI) / 2.0).abs());
            }
        }
        assert!(worst < 1e-3, "worst = {worst}");
    }

    #[test]
    fn poisson_basics() {
        let g = CircleGrid::new(10).unwrap();
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!((poisson_extend(&one, c(0.3, -0.4)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let f = GridFunction::from_real_fn(&g, |t| (3.0 * t).sin() + 2.0).unwrap();
        assert!((poisson_extend(&f, c(0.0, 0.0)).unwrap() - mean(&f)).norm() < 1e-12);
        let cos = GridFunction::from_real_fn(&g, f64::cos).unwrap();
        for r in [0.1, 0.5, 0.9] {
            assert!((poisson_extend(&cos, c(r, 0.0)).unwrap() - c(r, 0.0)).norm() < 1e-10);
        }
        assert!(matches!(poisson_extend(&one, c(1.0, 0.0)), Err(Error::OutsideDisc { .. })));
    }

    #[test]
    fn poisson_on_circle_matches_pointwise() {
        let g = CircleGrid::new(9).unwrap();
        let f = GridFunction::from_real_fn(&g, |t| (t.cos() * 2.0).exp()).unwrap();
        let ring = poisson_on_circle(&f, 0.7).unwrap();
        for j in [0, 100, 311] {
            let direct = poisson_extend(&f, Complex64::from_polar(0.7, g.node(j))).unwrap();
            assert!((ring.values()[j] - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn poisson_approaches_boundary_values() {
        let g = CircleGrid::new(10).unwrap();
        let f = GridFunction::from_real_fn(&g, |t| (2.0 * t).cos() + 0.5 * (5.0 * t).sin()).unwrap();
        let r = 1.0 - 2.0 * PI / g.size() as f64;
        let ring = poisson_on_circle(&f, r).unwrap();
        // |f - P_r f| <= Σ |c_k| (1 - r^{|k|}) <= (1 - r) Σ |k||c_k|
        let bound = (1.0 - r) * (2.0 + 0.5 * 5.0);
        assert!(ring.max_abs_diff(&f) <= bound + 1e-12);
    }

    #[test]
    fn cauchy_reproduces_analytic_part() {
        let g = CircleGrid::new(8).unwrap();
        let z = c(0.2, 0.5);
        let one = GridFunction::constant(&g, c(1.0, 0.0));
        assert!((cauchy_integral(&one, z).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let e1 = GridFunction::monomial(&g, 1);
        assert!((cauchy_integral(&e1, z).unwrap() - z).norm() < 1e-12);
        let em1 = GridFunction::monomial(&g, -1);
        assert!(cauchy_integral(&em1, z).unwrap().norm() < 1e-12);
        assert!(cauchy_integral(&one, c(0.0, 1.5)).is_err());
    }

    #[test]
    fn riesz_projection_examples() {
        let g = CircleGrid::new(7).unwrap();
        let e1 = GridFunction::monomial(&g, 1);
        assert!(riesz_project(&e1).max_abs_diff(&e1) < 1e-12);
        assert!(riesz_project(&GridFunction::monomial(&g, -1)).sup_norm() < 1e-12);
        let two_cos = GridFunction::from_real_fn(&g, |t| 2.0 * t.cos()).unwrap();
        assert!(riesz_project(&two_cos).max_abs_diff(&e1) < 1e-12);
    }
}
