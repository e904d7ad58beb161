//! Least-squares fits used by the experiments: straight lines with R²,
//! increment exponents of growing sequences and the bounded/log/power
//! growth classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fits below this R² are flagged rather than trusted.
pub const MIN_R2: f64 = 0.98;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

impl LinearFit {
    pub fn accepted(&self) -> bool {
        self.r2 >= MIN_R2
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Length {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("a line needs at least two points".into()));
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i % x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - rss / syy };
    Ok(LinearFit { slope, intercept, r2, rss })
}

/// Slope of `log y` against `log x`; every value must be positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    for (i, &v) in x.iter().chain(y).enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositive {
                index: i % x.len().max(1),
                value: v,
            });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Exponent `e` of `y(n) ≈ A + B nᵉ` from the log-log slope of the
/// successive increments `|y(n_{i+1}) − y(n_i)|` against `n_{i+1}`.
///
/// Differencing removes the additive constant that biases a direct fit of
/// `log y` when the exponent is small.
pub fn increment_exponent(ns: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if ns.len() != ys.len() {
        return Err(Error::Length {
            expected: ns.len(),
            got: ys.len(),
        });
    }
    let x: Vec<f64> = ns[1..].to_vec();
    let d: Vec<f64> = ys.windows(2).map(|w| (w[1] - w[0]).abs().max(f64::MIN_POSITIVE)).collect();
    loglog_fit(&x, &d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    Logarithmic,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub class: GrowthClass,
    /// `max(0, increment slope)`
    pub exponent: f64,
    pub increment: LinearFit,
    /// `(label, rss)` of each candidate regression that was compared.
    pub candidates: Vec<(String, f64)>,
}

/// Increment slope at or below this is read as a decaying increment, i.e. bounded.
pub const BOUNDED_SLOPE: f64 = -0.05;

/// Classifies `y(n)` as bounded, logarithmic or power growth.
///
/// Decaying increments mean bounded. Otherwise `y` is regressed linearly
/// against `log n` and against `n^ε` for `ε ∈ {0.05, 0.1}` (plus the measured
/// increment slope when it exceeds 0.1); the smallest residual decides.
pub fn classify_growth(ns: &[f64], ys: &[f64]) -> Result<GrowthFit> {
    let increment = increment_exponent(ns, ys)?;
    let exponent = increment.slope.max(0.0);
    if increment.slope <= BOUNDED_SLOPE {
        return Ok(GrowthFit {
            class: GrowthClass::Bounded,
            exponent,
            increment,
            candidates: Vec::new(),
        });
    }
    let logs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let mut candidates = vec![("log".to_string(), linear_fit(&logs, ys)?.rss)];
    let mut eps = vec![0.05, 0.1];
    if increment.slope > 0.1 {
        eps.push(increment.slope);
    }
    for e in eps {
        let x: Vec<f64> = ns.iter().map(|n| n.powf(e)).collect();
        candidates.push((format!("n^{e:.3}"), linear_fit(&x, ys)?.rss));
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let class = if best == 0 { GrowthClass::Logarithmic } else { GrowthClass::Power };
    Ok(GrowthFit {
        class,
        exponent,
        increment,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14 && f.accepted());
    }

    #[test]
    fn power_law_exponent() {
        let x = [10.0, 20.0, 40.0, 80.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 5.0 * v.powf(-0.5)).collect();
        assert!((loglog_fit(&x, &y).unwrap().slope + 0.5).abs() < 1e-12);
        assert!(loglog_fit(&x, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn increments_remove_the_constant() {
        let ns = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0];
        let ys: Vec<f64> = ns.iter().map(|n: &f64| 40.0 + 2.0 * n.powf(0.2)).collect();
        let direct = loglog_fit(&ns, &ys).unwrap().slope;
        let inc = increment_exponent(&ns, &ys).unwrap().slope;
        assert!((inc - 0.2).abs() < 1e-10);
        assert!((direct - 0.2).abs() > 0.1);
    }

    #[test]
    fn growth_classes() {
        let ns = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0];
        let bounded: Vec<f64> = ns.iter().map(|n: &f64| 3.0 - n.powf(-0.4)).collect();
        let log: Vec<f64> = ns.iter().map(|n: &f64| 1.0 + 0.7 * n.ln()).collect();
        let power: Vec<f64> = ns.iter().map(|n: &f64| 1.0 + n.powf(0.3)).collect();
        assert_eq!(classify_growth(&ns, &bounded).unwrap().class, GrowthClass::Bounded);
        assert_eq!(classify_growth(&ns, &log).unwrap().class, GrowthClass::Logarithmic);
        let p = classify_growth(&ns, &power).unwrap();
        assert_eq!(p.class, GrowthClass::Power);
        assert!((p.exponent - 0.3).abs() < 1e-10);
    }
}
