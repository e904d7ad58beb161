//! Weight families on the circle, Muckenhoupt characteristics over arc
//! families, Poisson-type characteristics and BMO norms.
//!
//! Arc averages are taken over unions of grid cells `[2πj/N, 2π(j+1)/N)`.
//! For weights with a closed form the cell averages are exact integrals, so
//! every reported arc value is a true arc value and the sweep is a lower
//! bound for the supremum over all arcs; for sampled weights the cell average
//! is the node sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{mean_real, poisson_extend, poisson_on_circle};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::quad::{tanh_sinh, GaussRule};

/// Direction `f` of a multiplicative perturbation `w e^{δf}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// `cos θ`
    Cosine,
    /// `log|1 - e^{iθ}|`
    LogChord,
    /// Arbitrary real samples on the weight's grid.
    Samples(Vec<f64>),
}

impl Perturbation {
    fn value(&self, theta: f64) -> Option<f64> {
        match self {
            Perturbation::Cosine => Some(theta.cos()),
            Perturbation::LogChord => Some(log_chord(theta)),
            Perturbation::Samples(_) => None,
        }
    }

    pub fn samples(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Perturbation::Samples(v) => {
                if v.len() != grid.size() {
                    return Err(Error::Length {
                        expected: grid.size(),
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
            other => Ok(grid.sample_real(|t| other.value(t).expect("closed form"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFamily {
    Constant {
        value: f64,
    },
    /// `|1 - e^{iθ}|^{2β}`
    FisherHartwig {
        beta: f64,
    },
    /// `(1 - a²)/|1 - a e^{iθ}|²`, the Poisson kernel at `a`.
    BernsteinSzego {
        a: f64,
    },
    /// `w₀ e^{δf}`
    Perturbed {
        base: Box<WeightFamily>,
        direction: Perturbation,
        delta: f64,
    },
    User,
}

/// `log|1 - e^{iθ}| = log(2|sin(θ/2)|)`
pub fn log_chord(theta: f64) -> f64 {
    (2.0 * (0.5 * theta).sin().abs()).ln()
}

impl WeightFamily {
    /// Unnormalized closed-form density, when the family has one.
    pub fn density(&self, theta: f64) -> Option<f64> {
        match self {
            WeightFamily::Constant { value } => Some(*value),
            WeightFamily::FisherHartwig { beta } => Some((2.0 * beta * log_chord(theta)).exp()),
            WeightFamily::BernsteinSzego { a } => {
                let d = 1.0 - 2.0 * a * theta.cos() + a * a;
                Some((1.0 - a * a) / d)
            }
            WeightFamily::Perturbed { base, direction, delta } => Some(base.density(theta)? * (delta * direction.value(theta)?).exp()),
            WeightFamily::User => None,
        }
    }

    /// Whether the density is singular (zero or infinite) at θ = 0.
    pub fn singular_at_origin(&self) -> bool {
        match self {
            WeightFamily::FisherHartwig { beta } => *beta != 0.0,
            WeightFamily::Perturbed { base, direction, delta } => {
                base.singular_at_origin() || (*direction == Perturbation::LogChord && *delta != 0.0)
            }
            _ => false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightFamily::Constant { .. } => "constant",
            WeightFamily::FisherHartwig { .. } => "fisher_hartwig",
            WeightFamily::BernsteinSzego { .. } => "bernstein_szego",
            WeightFamily::Perturbed { .. } => "perturbed",
            WeightFamily::User => "user",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            WeightFamily::FisherHartwig { beta } => Some(*beta),
            _ => None,
        }
    }

    /// False for Fisher–Hartwig exponents at or beyond 1/2, which leave A₂.
    pub fn in_a2(&self) -> bool {
        match self {
            WeightFamily::FisherHartwig { beta } => *beta < 0.5,
            WeightFamily::Perturbed { base, direction, delta } => {
                let own = match direction {
                    Perturbation::LogChord => delta.abs() < 1.0,
                    _ => true,
                };
                own && base.in_a2()
            }
            _ => true,
        }
    }
}

/// A strictly positive weight sampled on a grid.
#[derive(Clone, Debug)]
pub struct Weight {
    grid: Grid,
    samples: Vec<f64>,
    /// Multiplier applied to the family density (normalization).
    scale: f64,
    normalized: bool,
    family: WeightFamily,
}

pub fn make_weight(family: &WeightFamily, grid: &Grid, normalize: bool) -> Result<Weight> {
    let samples = match family {
        WeightFamily::Constant { value } => {
            if !(*value > 0.0 && value.is_finite()) {
                return Err(Error::Parameter(format!("constant weight must be positive, got {value}")));
            }
            vec![*value; grid.size()]
        }
        WeightFamily::FisherHartwig { beta } => {
            if !(*beta >= 0.0 && beta.is_finite()) {
                return Err(Error::Parameter(format!("Fisher-Hartwig beta must be >= 0, got {beta}")));
            }
            grid.sample_real(|t| family.density(t).unwrap())
        }
        WeightFamily::BernsteinSzego { a } => {
            if !(a.abs() < 1.0) {
                return Err(Error::Parameter(format!("Bernstein-Szegő parameter needs |a| < 1, got {a}")));
            }
            grid.sample_real(|t| family.density(t).unwrap())
        }
        WeightFamily::Perturbed { base, direction, delta } => {
            let base = make_weight(base, grid, false)?;
            let f = direction.samples(grid)?;
            let worst = f.iter().fold(0.0f64, |m, v| m.max(v.abs())) * delta.abs();
            if worst > 700.0 {
                return Err(Error::Overflow(worst));
            }
            base.samples.iter().zip(&f).map(|(w, f)| w * (delta * f).exp()).collect()
        }
        WeightFamily::User => {
            return Err(Error::Parameter("user weights are built with Weight::from_samples".into()));
        }
    };
    let w = Weight::build(grid, samples, family.clone())?;
    Ok(if normalize { w.normalized() } else { w })
}

impl Weight {
    fn build(grid: &Grid, samples: Vec<f64>, family: WeightFamily) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::Length {
                expected: grid.size(),
                got: samples.len(),
            });
        }
        for (index, &value) in samples.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite(index));
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { index, value });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
            scale: 1.0,
            normalized: false,
            family,
        })
    }

    pub fn from_samples(grid: &Grid, samples: Vec<f64>, normalize: bool) -> Result<Self> {
        let w = Self::build(grid, samples, WeightFamily::User)?;
        Ok(if normalize { w.normalized() } else { w })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `‖w/2π‖₁` by quadrature.
    pub fn mass(&self) -> f64 {
        mean_real(&self.samples)
    }

    pub fn normalized(&self) -> Self {
        let m = self.mass();
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v / m).collect(),
            scale: self.scale / m,
            normalized: true,
            family: self.family.clone(),
        }
    }

    pub fn require_normalized(&self) -> Result<()> {
        let mass = self.mass();
        if self.normalized && (mass - 1.0).abs() < 1e-12 {
            Ok(())
        } else {
            Err(Error::NotNormalized { mass })
        }
    }

    pub fn in_a2(&self) -> bool {
        self.family.in_a2()
    }

    pub fn powf(&self, s: f64) -> Vec<f64> {
        self.samples.iter().map(|v| v.powf(s)).collect()
    }

    pub fn log_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.ln()).collect()
    }

    pub fn to_grid_function(&self) -> GridFunction {
        GridFunction::from_parts(self.grid.clone(), self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `(1/|I_j|) ∫_{I_j} w^s dθ` over every grid cell `I_j = [jh, (j+1)h)`.
    pub fn cell_means(&self, s: f64) -> Vec<f64> {
        if self.family.density(0.5).is_none() {
            return self.powf(s);
        }
        let h = self.grid.spacing();
        let n = self.grid.size();
        let singular = self.family.singular_at_origin();
        let rule = GaussRule::new(10);
        let factor = self.scale.powf(s);
        let f = |t: f64| self.family.density(t).unwrap().powf(s);
        (0..n)
            .into_par_iter()
            .map(|j| {
                // the last cell is taken as [-h, 0] so nodes near the
                // singularity keep their full relative precision
                let (a, b) = if j == n - 1 {
                    (-h, 0.0)
                } else {
                    (j as f64 * h, (j + 1) as f64 * h)
                };
                let integral = if singular && (j == 0 || j == n - 1) {
                    tanh_sinh(f, a, b, 1e-13)
                } else {
                    rule.integrate(f, a, b)
                };
                factor * integral / h
            })
            .collect()
    }
}

/// `1/(1 - 4β²)`: the value of `⟨w⟩_I ⟨w^{-1}⟩_I` for `|θ|^{2β}` on `I = [0, a]`.
pub fn fh_a2_exact(beta: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::Divergent(beta));
    }
    Ok(1.0 / (1.0 - 4.0 * beta * beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    /// Every offset times every dyadic length `2^k` cells.
    Dyadic,
    /// Every offset times every length; O(N²), for validation on small grids.
    Full,
}

#[derive(Clone, Debug)]
pub struct ArcFamily {
    grid: Grid,
    kind: ArcKind,
}

impl ArcFamily {
    pub fn dyadic(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            kind: ArcKind::Dyadic,
        }
    }

    pub fn full(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            kind: ArcKind::Full,
        }
    }

    pub fn new(grid: &Grid, kind: ArcKind) -> Self {
        Self { grid: grid.clone(), kind }
    }

    pub fn kind(&self) -> ArcKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Arc lengths in cells.
    pub fn lengths(&self) -> Vec<usize> {
        let n = self.grid.size();
        match self.kind {
            ArcKind::Dyadic => (0..=self.grid.log2_size()).map(|k| 1usize << k).collect(),
            ArcKind::Full => (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.size() * self.lengths().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An arc `[offset·h, (offset + length)·h)` in grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcCell {
    pub offset: usize,
    pub length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub p: f64,
    pub value: f64,
    pub argmax_arc: ArcCell,
}

/// `max_I ⟨w⟩_I ⟨w^{1/(1-p)}⟩_I^{p-1}` over the arc family.
pub fn ap_characteristic(w: &Weight, p: f64, arcs: &ArcFamily) -> Result<ApReport> {
    if !(p > 1.0) {
        return Err(Error::Exponent(p));
    }
    if w.grid().size() != arcs.grid().size() {
        return Err(Error::Length {
            expected: arcs.grid().size(),
            got: w.grid().size(),
        });
    }
    let u = w.cell_means(1.0);
    let v = w.cell_means(1.0 / (1.0 - p));
    Ok(ap_from_cells(&u, &v, p, arcs))
}

fn ap_value(a: f64, b: f64, len: usize, p: f64) -> f64 {
    let l = len as f64;
    (a / l) * (b / l).powf(p - 1.0)
}

fn better(x: ApReport, y: ApReport) -> ApReport {
    // ties go to the shorter, then earlier, arc so results do not depend on scheduling
    let key = |r: &ApReport| (r.argmax_arc.length, r.argmax_arc.offset);
    if y.value > x.value || (y.value == x.value && key(&y) < key(&x)) {
        y
    } else {
        x
    }
}

fn ap_from_cells(u: &[f64], v: &[f64], p: f64, arcs: &ArcFamily) -> ApReport {
    let n = u.len();
    let empty = ApReport {
        p,
        value: f64::NEG_INFINITY,
        argmax_arc: ArcCell { offset: 0, length: 0 },
    };
    let scan = |len: usize, us: &[f64], vs: &[f64]| {
        let mut best = empty;
        for (j, (a, b)) in us.iter().zip(vs).enumerate() {
            let value = ap_value(*a, *b, len, p);
            if value > best.value {
                best = ApReport {
                    p,
                    value,
                    argmax_arc: ArcCell { offset: j, length: len },
                };
            }
        }
        best
    };
    match arcs.kind {
        ArcKind::Dyadic => {
            // pairwise doubling keeps short-window sums free of cancellation
            let double = |s: &[f64], len: usize| -> Vec<f64> { (0..n).map(|j| s[j] + s[(j + len) % n]).collect() };
            let (mut us, mut vs) = (u.to_vec(), v.to_vec());
            let mut len = 1;
            let mut best = scan(len, &us, &vs);
            while len < n {
                us = double(&us, len);
                vs = double(&vs, len);
                len *= 2;
                best = better(best, scan(len, &us, &vs));
            }
            best
        }
        ArcKind::Full => {
            let prefix = |x: &[f64]| {
                let mut out = Vec::with_capacity(2 * n + 1);
                out.push(0.0);
                for j in 0..2 * n {
                    out.push(out[j] + x[j % n]);
                }
                out
            };
            let (pu, pv) = (prefix(u), prefix(v));
            (1..=n)
                .into_par_iter()
                .map(|len| {
                    let mut best = empty;
                    for j in 0..n {
                        let value = ap_value(pu[j + len] - pu[j], pv[j + len] - pv[j], len, p);
                        if value > best.value {
                            best = ApReport {
                                p,
                                value,
                                argmax_arc: ArcCell { offset: j, length: len },
                            };
                        }
                    }
                    best
                })
                .reduce(|| empty, better)
        }
    }
}

/// Where to sample the Poisson characteristics.
#[derive(Clone, Debug, PartialEq)]
pub enum PoissonSampling {
    /// Every grid angle on each circle `|z| = r`.
    Radii(Vec<f64>),
    Points(Vec<Complex64>),
}

impl PoissonSampling {
    /// Radii `1 - 2^{-k}`, `k = 1..m-2`, at every grid angle.
    pub fn default_for(grid: &Grid) -> Self {
        let m = grid.log2_size() as i32;
        Self::Radii((1..=m - 2).map(|k| 1.0 - 2f64.powi(-k)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCharacteristics {
    /// `sup P(w,z) P(w^{-1},z)`
    pub a2p: f64,
    /// `sup P(w,z) exp(-P(log w, z))`
    pub ainfp: f64,
}

pub fn poisson_characteristics(w: &Weight, sampling: &PoissonSampling) -> Result<PoissonCharacteristics> {
    let grid = w.grid();
    let wf = w.to_grid_function();
    let inv = GridFunction::from_real(grid.clone(), &w.powf(-1.0))?;
    let logw = GridFunction::from_real(grid.clone(), &w.log_samples())?;
    let mut out = PoissonCharacteristics {
        a2p: f64::NEG_INFINITY,
        ainfp: f64::NEG_INFINITY,
    };
    let mut fold = |pw: f64, pinv: f64, plog: f64| {
        out.a2p = out.a2p.max(pw * pinv);
        out.ainfp = out.ainfp.max(pw * (-plog).exp());
    };
    match sampling {
        PoissonSampling::Radii(radii) => {
            for &r in radii {
                let pw = poisson_on_circle(&wf, r)?;
                let pinv = poisson_on_circle(&inv, r)?;
                let plog = poisson_on_circle(&logw, r)?;
                for j in 0..grid.size() {
                    fold(pw.values()[j].re, pinv.values()[j].re, plog.values()[j].re);
                }
            }
        }
        PoissonSampling::Points(points) => {
            for &z in points {
                fold(
                    poisson_extend(&wf, z)?.re,
                    poisson_extend(&inv, z)?.re,
                    poisson_extend(&logw, z)?.re,
                );
            }
        }
    }
    Ok(out)
}

/// Fenwick tree over value ranks carrying counts and sums.
struct RankTree {
    count: Vec<i64>,
    sum: Vec<f64>,
}

impl RankTree {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n + 1],
            sum: vec![0.0; n + 1],
        }
    }

    fn update(&mut self, rank: usize, dc: i64, ds: f64) {
        let mut i = rank + 1;
        while i < self.count.len() {
            self.count[i] += dc;
            self.sum[i] += ds;
            i += i & i.wrapping_neg();
        }
    }

    /// Count and sum over ranks `< r`.
    fn prefix(&self, r: usize) -> (i64, f64) {
        let (mut c, mut s) = (0, 0.0);
        let mut i = r;
        while i > 0 {
            c += self.count[i];
            s += self.sum[i];
            i &= i - 1;
        }
        (c, s)
    }
}

/// `max_I ⟨|f - ⟨f⟩_I|⟩_I` over the arc family, exact per arc.
///
/// Each length class is a sliding window over the cyclic samples; a Fenwick
/// tree over value ranks gives the mass on either side of the window mean.
pub fn bmo_norm(f: &GridFunction, arcs: &ArcFamily) -> Result<f64> {
    let values = f.require_real(1e-12)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    let lengths = arcs.lengths();
    let best = lengths
        .par_iter()
        .map(|&len| {
            if len >= n {
                let mu = mean_real(&values);
                return values.iter().map(|v| (v - mu).abs()).sum::<f64>() / n as f64;
            }
            let mut tree = RankTree::new(n);
            let mut total = 0.0;
            for &v in values.iter().take(len) {
                total += v;
            }
            for i in 0..len {
                tree.update(rank[i], 1, values[i]);
            }
            let mut best: f64 = 0.0;
            for start in 0..n {
                if start > 0 {
                    let out = start - 1;
                    let inn = (start + len - 1) % n;
                    tree.update(rank[out], -1, -values[out]);
                    tree.update(rank[inn], 1, values[inn]);
                    total += values[inn] - values[out];
                }
                let l = len as f64;
                let mu = total / l;
                let cut = sorted.partition_point(|&x| x <= mu);
                let (c, s) = tree.prefix(cut);
                let below = mu * c as f64 - s;
                let above = (total - s) - mu * (l - c as f64);
                best = best.max((below + above) / l);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Piecewise-constant weight equal to the mean of `w` over each of the `2^l`
/// arcs `2π·2^{-l}[j, j+1)`.
pub fn dyadic_approximant(w: &Weight, l: u32) -> Result<Weight> {
    let n = w.grid().size();
    if l > w.grid().log2_size() {
        return Err(Error::TooLarge {
            requested: 1 << l,
            limit: n,
        });
    }
    let block = n >> l;
    let mut samples = Vec::with_capacity(n);
    for chunk in w.samples().chunks(block) {
        let m = mean_real(chunk);
        samples.extend(std::iter::repeat_n(m, block));
    }
    let mut out = Weight::build(w.grid(), samples, WeightFamily::User)?;
    out.normalized = w.normalized;
    Ok(out)
}

/// Start angle of an arc.
pub fn arc_start(grid: &Grid, arc: ArcCell) -> f64 {
    arc.offset as f64 * 2.0 * PI / grid.size() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;

    fn fh(beta: f64, m: u32) -> Weight {
        let g = CircleGrid::new(m).unwrap();
        make_weight(&WeightFamily::FisherHartwig { beta }, &g, false).unwrap()
    }

    #[test]
    fn constant_weights_have_unit_characteristic() {
        let g = CircleGrid::new(8).unwrap();
        for value in [1.0, 5.0] {
            let w = make_weight(&WeightFamily::Constant { value }, &g, false).unwrap();
            let r = ap_characteristic(&w, 2.0, &ArcFamily::dyadic(&g)).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn characteristic_is_scale_invariant() {
        let g = CircleGrid::new(9).unwrap();
        let w = make_weight(&WeightFamily::FisherHartwig { beta: 0.3 }, &g, false).unwrap();
        let wn = w.normalized();
        let scaled = Weight::from_samples(&g, w.samples().iter().map(|v| 7.0 * v).collect(), false).unwrap();
        let raw = Weight::from_samples(&g, w.samples().to_vec(), false).unwrap();
        let arcs = ArcFamily::dyadic(&g);
        for p in [2.0, 3.0] {
            let a = ap_characteristic(&w, p, &arcs).unwrap().value;
            let b = ap_characteristic(&wn, p, &arcs).unwrap().value;
            assert!((a - b).abs() < 1e-10 * a, "closed-form p={p}");
            let c = ap_characteristic(&raw, p, &arcs).unwrap().value;
            let d = ap_characteristic(&scaled, p, &arcs).unwrap().value;
            assert!((c - d).abs() < 1e-10 * c, "sampled p={p}");
        }
    }

    #[test]
    fn rejects_bad_exponents_and_samples() {
        let w = fh(0.2, 6);
        let arcs = ArcFamily::dyadic(w.grid());
        assert_eq!(ap_characteristic(&w, 1.0, &arcs).unwrap_err(), Error::Exponent(1.0));
        let g = CircleGrid::new(6).unwrap();
        let mut s = vec![1.0; 64];
        s[3] = 0.0;
        assert!(matches!(
            Weight::from_samples(&g, s, false),
            Err(Error::NonPositive { index: 3, .. })
        ));
    }

    #[test]
    fn fisher_hartwig_exceeds_half_arc_value() {
        let w = fh(0.25, 12);
        let r = ap_characteristic(&w, 2.0, &ArcFamily::dyadic(w.grid())).unwrap();
        let half_arc = fh_a2_exact(0.25).unwrap();
        assert!(r.value >= half_arc * 0.999, "{} vs {}", r.value, half_arc);
        assert!(r.value <= 4.0 * half_arc);
    }

    #[test]
    fn fh_a2_exact_values() {
        assert_eq!(fh_a2_exact(0.0).unwrap(), 1.0);
        assert!((fh_a2_exact(0.25).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((fh_a2_exact(0.4).unwrap() - 1.0 / 0.36).abs() < 1e-12);
        assert_eq!(fh_a2_exact(0.5).unwrap_err(), Error::Divergent(0.5));
    }

    #[test]
    fn full_family_dominates_dyadic() {
        let w = fh(0.3, 8);
        let d = ap_characteristic(&w, 2.0, &ArcFamily::dyadic(w.grid())).unwrap().value;
        let f = ap_characteristic(&w, 2.0, &ArcFamily::full(w.grid())).unwrap().value;
        assert!(f >= d - 1e-12);
        assert!(f <= 4.0 * d);
    }

    #[test]
    fn refinement_is_monotone_for_exact_cells() {
        let mut last = 0.0;
        for m in [8, 10, 12, 14] {
            let w = fh(0.35, m);
            let v = ap_characteristic(&w, 2.0, &ArcFamily::dyadic(w.grid())).unwrap().value;
            assert!(v >= last - 1e-9, "m = {m}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn exact_cells_integrate_the_density() {
        let w = fh(0.45, 10);
        let total: f64 = w.cell_means(-1.0).iter().sum::<f64>() / w.grid().size() as f64;
        let exact = 2.0 * crate::quad::tanh_sinh(|t| (-0.9 * log_chord(t)).exp(), 0.0, PI, 1e-14) / (2.0 * PI);
        assert!((total - exact).abs() < 1e-8 * exact, "{total} vs {exact}");
    }

    #[test]
    fn poisson_characteristics_of_constant() {
        let g = CircleGrid::new(8).unwrap();
        let w = make_weight(&WeightFamily::Constant { value: 3.0 }, &g, false).unwrap();
        let pc = poisson_characteristics(&w, &PoissonSampling::default_for(&g)).unwrap();
        assert!((pc.a2p - 1.0).abs() < 1e-10 && (pc.ainfp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn poisson_characteristics_jensen_order() {
        let w = fh(0.3, 12);
        let pc = poisson_characteristics(&w, &PoissonSampling::default_for(w.grid())).unwrap();
        assert!(pc.ainfp <= pc.a2p);
        assert!(pc.ainfp >= 1.0 - 1e-12);
        let pts = PoissonSampling::Points(vec![Complex64::new(0.5, 0.5), Complex64::new(0.99, 0.0)]);
        let direct = poisson_characteristics(&w, &pts).unwrap();
        assert!(direct.ainfp <= direct.a2p);
        let outside = PoissonSampling::Points(vec![Complex64::new(1.0, 0.1)]);
        assert!(matches!(poisson_characteristics(&w, &outside), Err(Error::OutsideDisc { .. })));
    }

    fn bmo_brute(values: &[f64], arcs: &ArcFamily) -> f64 {
        let n = values.len();
        let mut best: f64 = 0.0;
        for len in arcs.lengths() {
            for start in 0..n {
                let window: Vec<f64> = (0..len).map(|i| values[(start + i) % n]).collect();
                let mu = mean_real(&window);
                best = best.max(window.iter().map(|v| (v - mu).abs()).sum::<f64>() / len as f64);
            }
        }
        best
    }

    #[test]
    fn bmo_matches_brute_force() {
        let g = CircleGrid::new(9).unwrap();
        let f = GridFunction::from_real_fn(&g, |t| log_chord(t) + 0.3 * (5.0 * t).sin()).unwrap();
        for arcs in [ArcFamily::dyadic(&g), ArcFamily::full(&g)] {
            let fast = bmo_norm(&f, &arcs).unwrap();
            let slow = bmo_brute(&f.real_parts(), &arcs);
            assert!((fast - slow).abs() < 1e-10, "{:?}: {fast} vs {slow}", arcs.kind());
        }
    }

    #[test]
    fn bmo_of_constant_is_zero() {
        let g = CircleGrid::new(8).unwrap();
        let f = GridFunction::constant(&g, Complex64::new(2.5, 0.0));
        assert!(bmo_norm(&f, &ArcFamily::dyadic(&g)).unwrap() < 1e-12);
    }

    #[test]
    fn dyadic_approximant_preserves_mean() {
        let w = fh(0.3, 10).normalized();
        for l in [0, 3, 7, 10] {
            let wl = dyadic_approximant(&w, l).unwrap();
            assert!((wl.mass() - w.mass()).abs() < 1e-12);
            assert!(wl.is_normalized());
        }
        assert!(dyadic_approximant(&w, 11).is_err());
        let g = CircleGrid::new(8).unwrap();
        let c = make_weight(&WeightFamily::Constant { value: 2.0 }, &g, false).unwrap();
        let cl = dyadic_approximant(&c, 4).unwrap();
        assert!(cl.samples().iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn families_sample_as_documented() {
        let g = CircleGrid::new(10).unwrap();
        let c = make_weight(&WeightFamily::Constant { value: 4.0 }, &g, true).unwrap();
        assert!(c.samples().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let bs = make_weight(&WeightFamily::BernsteinSzego { a: 0.5 }, &g, false).unwrap();
        assert!((bs.mass() - 1.0).abs() < 1e-12);
        let pert = make_weight(
            &WeightFamily::Perturbed {
                base: Box::new(WeightFamily::Constant { value: 1.0 }),
                direction: Perturbation::LogChord,
                delta: 0.4,
            },
            &g,
            false,
        )
        .unwrap();
        let direct = make_weight(&WeightFamily::FisherHartwig { beta: 0.2 }, &g, false).unwrap();
        for (a, b) in pert.samples().iter().zip(direct.samples()) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert!(pert.family().singular_at_origin());
        assert!(make_weight(&WeightFamily::BernsteinSzego { a: 1.0 }, &g, false).is_err());
        assert!(!make_weight(&WeightFamily::FisherHartwig { beta: 0.6 }, &g, true).unwrap().in_a2());
    }

    #[test]
    fn normalization_is_recorded() {
        let w = fh(0.2, 10);
        assert!(w.require_normalized().is_err());
        let wn = w.normalized();
        assert!(wn.require_normalized().is_ok());
        assert!((crate::circle::quadrature(&wn.to_grid_function()).re / (2.0 * PI) - 1.0).abs() < 1e-12);
    }
}
