//! Orthogonal polynomials on the unit circle generated from trigonometric
//! moments by the Szegő recursion `Φ_{n+1} = zΦ_n − ᾱ_n Φ_n*`.

use num_complex::Complex64;

use crate::circle::{mean, trig_moments, MomentSequence};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::weighted_ops::{power_method, NormEstimate, OperatorProbe};
use crate::weights::Weight;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Smallest admissible `1 − |α_n|²` before the recursion is declared broken.
pub const BREAKDOWN_MARGIN: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct OpucSystem {
    verblunsky: Vec<Complex64>,
    /// Ascending coefficients of the monic `Φ_n`, `n = 0..=nmax`.
    monic: Vec<Vec<Complex64>>,
    /// `‖Φ_n‖²` in `L²(µ)`.
    norms2: Vec<f64>,
    weight: Option<Weight>,
}

/// `Q*(z) = zⁿ·conj(Q(1/z̄))` for a polynomial of formal degree `coeffs.len() − 1`.
pub fn reversed(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().rev().map(|c| c.conj()).collect()
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Runs the recursion on `c_0..c_nmax`, extracting `ᾱ_n = ⟨zΦ_n, 1⟩/‖Φ_n‖²`.
pub fn szego_recursion(moments: &MomentSequence, nmax: usize) -> Result<OpucSystem> {
    if nmax > moments.kmax() {
        return Err(Error::TooLarge {
            requested: nmax,
            limit: moments.kmax(),
        });
    }
    let c = moments.as_slice();
    let c0 = c[0].re;
    let mut verblunsky = Vec::with_capacity(nmax);
    let mut monic = vec![vec![ONE]];
    let mut norms2 = vec![c0];
    for n in 0..nmax {
        let phi = &monic[n];
        // ⟨z^{j+1}, 1⟩ = c_{-(j+1)} = conj(c_{j+1})
        let inner: Complex64 = phi.iter().enumerate().map(|(j, a)| a * c[j + 1].conj()).sum();
        let alpha_bar = inner / norms2[n];
        let alpha = alpha_bar.conj();
        let margin = 1.0 - alpha.norm_sqr();
        if !(margin > BREAKDOWN_MARGIN) {
            return Err(Error::Breakdown { index: n, margin });
        }
        verblunsky.push(alpha);
        let next = step(phi, alpha);
        norms2.push(norms2[n] * margin);
        monic.push(next);
    }
    Ok(OpucSystem {
        verblunsky,
        monic,
        norms2,
        weight: None,
    })
}

fn step(phi: &[Complex64], alpha: Complex64) -> Vec<Complex64> {
    let star = reversed(phi);
    let mut next = vec![ZERO; phi.len() + 1];
    for (j, a) in phi.iter().enumerate() {
        next[j + 1] += a;
    }
    for (j, b) in star.iter().enumerate() {
        next[j] -= alpha.conj() * b;
    }
    next
}

impl OpucSystem {
    /// Moments of `w` on its own grid, then the recursion up to `nmax`.
    pub fn for_weight(w: &Weight, nmax: usize) -> Result<Self> {
        let moments = trig_moments(w, nmax.max(1))?;
        let mut sys = szego_recursion(&moments, nmax)?;
        sys.weight = Some(w.clone());
        Ok(sys)
    }

    /// Polynomials of a measure of total mass `c0` with the given coefficients.
    pub fn from_verblunsky(alphas: &[Complex64], c0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::Parameter(format!("mass must be positive, got {c0}")));
        }
        let mut monic = vec![vec![ONE]];
        let mut norms2 = vec![c0];
        for (n, &alpha) in alphas.iter().enumerate() {
            let margin = 1.0 - alpha.norm_sqr();
            if !(margin > BREAKDOWN_MARGIN) {
                return Err(Error::Breakdown { index: n, margin });
            }
            monic.push(step(&monic[n], alpha));
            norms2.push(norms2[n] * margin);
        }
        Ok(Self {
            verblunsky: alphas.to_vec(),
            monic,
            norms2,
            weight: None,
        })
    }

    /// Attaches the weight used by norms, projections and probes.
    pub fn with_weight(mut self, w: &Weight) -> Self {
        self.weight = Some(w.clone());
        self
    }

    pub fn weight(&self) -> Option<&Weight> {
        self.weight.as_ref()
    }

    fn require_weight(&self) -> Result<&Weight> {
        self.weight
            .as_ref()
            .ok_or_else(|| Error::Parameter("operation needs a system built from a weight".into()))
    }

    pub fn nmax(&self) -> usize {
        self.verblunsky.len()
    }

    pub fn verblunsky(&self) -> &[Complex64] {
        &self.verblunsky
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.nmax() {
            Err(Error::TooLarge {
                requested: n,
                limit: self.nmax(),
            })
        } else {
            Ok(())
        }
    }

    pub fn monic(&self, n: usize) -> Result<&[Complex64]> {
        self.check_degree(n)?;
        Ok(&self.monic[n])
    }

    /// `k_n = coeff_n(φ_n) = ‖Φ_n‖^{-1}`.
    pub fn kappa(&self, n: usize) -> Result<f64> {
        self.check_degree(n)?;
        Ok(self.norms2[n].sqrt().recip())
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.norms2.iter().map(|v| v.sqrt().recip()).collect()
    }

    pub fn orthonormal(&self, n: usize) -> Result<Vec<Complex64>> {
        let k = self.kappa(n)?;
        Ok(self.monic[n].iter().map(|c| c * k).collect())
    }

    /// `φ_n*`
    pub fn orthonormal_reversed(&self, n: usize) -> Result<Vec<Complex64>> {
        Ok(reversed(&self.orthonormal(n)?))
    }

    /// Second-kind polynomials: the same recursion with `α → −α` and unit mass.
    pub fn second_kind(&self) -> Result<OpucSystem> {
        let flipped: Vec<Complex64> = self.verblunsky.iter().map(|a| -a).collect();
        OpucSystem::from_verblunsky(&flipped, 1.0)
    }

    pub fn eval_monic(&self, n: usize, z: Complex64) -> Result<Complex64> {
        Ok(horner(self.monic(n)?, z))
    }

    pub fn eval_orthonormal(&self, n: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.kappa(n)? * self.eval_monic(n, z)?)
    }

    fn on_grid(&self, grid: &Grid, coeffs: &[Complex64]) -> Result<GridFunction> {
        if coeffs.len() > grid.size() {
            return Err(Error::TooLarge {
                requested: coeffs.len() - 1,
                limit: grid.size() - 1,
            });
        }
        Ok(GridFunction::from_parts(grid.clone(), grid.eval_polynomial(coeffs)))
    }

    pub fn monic_on_grid(&self, grid: &Grid, n: usize) -> Result<GridFunction> {
        self.on_grid(grid, self.monic(n)?)
    }

    pub fn orthonormal_on_grid(&self, grid: &Grid, n: usize) -> Result<GridFunction> {
        self.on_grid(grid, &self.orthonormal(n)?)
    }

    pub fn reversed_on_grid(&self, grid: &Grid, n: usize) -> Result<GridFunction> {
        self.on_grid(grid, &self.orthonormal_reversed(n)?)
    }

    pub fn cd_kernel(&self, n: usize) -> Result<CdKernel<'_>> {
        self.check_degree(n)?;
        Ok(CdKernel { system: self, n })
    }

    /// Orthonormal coefficient table `φ_0..φ_n` bound to the weight's grid.
    pub fn projection_basis(&self, n: usize) -> Result<ProjectionBasis> {
        let w = self.require_weight()?;
        self.check_degree(n)?;
        if 2 * n >= w.grid().size() {
            return Err(Error::TooLarge {
                requested: n,
                limit: w.grid().size() / 2 - 1,
            });
        }
        let coeffs = (0..=n).map(|k| self.orthonormal(k)).collect::<Result<Vec<_>>>()?;
        Ok(ProjectionBasis {
            grid: w.grid().clone(),
            weight: w.samples().to_vec(),
            coeffs,
        })
    }

    /// `P^w_{[0,n]} f = Σ_{k≤n} ⟨f, φ_k⟩_w φ_k`.
    pub fn project(&self, f: &GridFunction, n: usize) -> Result<GridFunction> {
        self.projection_basis(n)?.apply(f)
    }

    /// Lower bound for `‖P^w_{[0,n]}‖` on `L^p_w`: random band-limited starts
    /// refined by the dual-norm power method.
    pub fn projection_norm_probe(&self, n: usize, p: f64, trials: usize, seed: u64) -> Result<NormEstimate> {
        if !(p > 1.0) {
            return Err(Error::Exponent(p));
        }
        let basis = std::sync::Arc::new(self.projection_basis(n)?);
        let w = basis.weight.clone();
        let grid = basis.grid.clone();
        // ‖P‖ on L^p_w equals ‖w^{1/p} P w^{-1/p}‖ on unweighted L^p
        let up: Vec<f64> = w.iter().map(|v| v.powf(1.0 / p)).collect();
        let down: Vec<f64> = up.iter().map(|v| v.recip()).collect();
        let (b1, u1, d1) = (basis.clone(), up.clone(), down.clone());
        let apply = move |f: &GridFunction| b1.apply_raw(&f.mul_real(&d1)).mul_real(&u1);
        // unweighted adjoint of P^w is w P^w w^{-1}
        let w2 = w.clone();
        let winv: Vec<f64> = w.iter().map(|v| v.recip()).collect();
        let b2 = basis.clone();
        let adjoint = move |f: &GridFunction| {
            let g = f.mul_real(&up).mul_real(&winv);
            b2.apply_raw(&g).mul_real(&w2).mul_real(&down)
        };
        let probe = OperatorProbe::new(&grid, p, 2 * n + 2, format!("w^(1/p) P^w_[0,{n}] w^(-1/p)"), apply).with_adjoint(adjoint);
        Ok(power_method(&probe, trials, seed))
    }
}

/// `K_n(z, ζ) = Σ_{k≤n} φ_k(z) conj(φ_k(ζ))`.
#[derive(Clone, Copy, Debug)]
pub struct CdKernel<'a> {
    system: &'a OpucSystem,
    n: usize,
}

impl CdKernel<'_> {
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn eval(&self, z: Complex64, zeta: Complex64) -> Complex64 {
        (0..=self.n)
            .map(|k| {
                let a = self.system.eval_orthonormal(k, z).expect("degree checked");
                let b = self.system.eval_orthonormal(k, zeta).expect("degree checked");
                a * b.conj()
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionBasis {
    grid: Grid,
    weight: Vec<f64>,
    /// Ascending coefficients of `φ_k`, `k = 0..=n`.
    coeffs: Vec<Vec<Complex64>>,
}

impl ProjectionBasis {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `⟨f, φ_k⟩_w = Σ_j conj(a_{kj}) m_j` with `m_j` the Fourier coefficients
    /// of `f w`; two FFTs and an `O(n²)` contraction per application.
    fn apply_raw(&self, f: &GridFunction) -> GridFunction {
        let fw: Vec<Complex64> = f.values().iter().zip(&self.weight).map(|(v, w)| v * w).collect();
        let m = self.grid.analyze(&fw);
        let mut out = vec![ZERO; self.grid.size()];
        for phi in &self.coeffs {
            let c: Complex64 = phi.iter().zip(&m).map(|(a, b)| a.conj() * b).sum();
            for (o, a) in out.iter_mut().zip(phi) {
                *o += c * a;
            }
        }
        GridFunction::from_parts(self.grid.clone(), self.grid.synthesize(out))
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.len() != self.grid.size() {
            return Err(Error::Length {
                expected: self.grid.size(),
                got: f.len(),
            });
        }
        Ok(self.apply_raw(f))
    }
}

/// `((1/2π)∫|f|^p w dθ)^{1/p}` by grid quadrature.
pub fn weighted_lp_norm(f: &GridFunction, w: &Weight, p: f64) -> Result<f64> {
    Ok(weighted_lp_power(f, w, p)?.powf(1.0 / p))
}

/// `(1/2π)∫|f|^p w dθ`.
pub fn weighted_lp_power(f: &GridFunction, w: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("norm exponent must be >= 1, got {p}")));
    }
    if f.len() != w.samples().len() {
        return Err(Error::Length {
            expected: w.samples().len(),
            got: f.len(),
        });
    }
    let s: f64 = f.values().iter().zip(w.samples()).map(|(v, w)| v.norm().powf(p) * w).sum();
    Ok(s / f.len() as f64)
}

/// `⟨f, g⟩_w = (1/2π)∫ f ḡ w dθ`.
pub fn weighted_inner(f: &GridFunction, g: &GridFunction, w: &Weight) -> Complex64 {
    mean(&f.zip_with(g, |a, b| a * b.conj()).mul_real(w.samples()))
}
