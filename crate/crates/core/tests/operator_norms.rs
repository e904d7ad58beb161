use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use steklov::seeds::rng;
use steklov::weighted_ops::{exact_full_norm, power_method, NormMethod, OperatorProbe};
use steklov::{CircleGrid, Grid, GridFunction};

const DIM: usize = 8;

type Matrix = [[Complex64; DIM]; DIM];

fn random_matrix(r: &mut ChaCha8Rng) -> Matrix {
    let mut m = [[Complex64::new(0.0, 0.0); DIM]; DIM];
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        }
    }
    m
}

fn adjoint(m: &Matrix) -> Matrix {
    let mut t = *m;
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[j][i].conj();
        }
    }
    t
}

fn mat_vec(m: &Matrix, x: &[Complex64]) -> [Complex64; DIM] {
    let mut y = [Complex64::new(0.0, 0.0); DIM];
    for (yi, row) in y.iter_mut().zip(m) {
        *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    y
}

/// The matrix acting on the first `DIM` grid samples. Normalized grid norms
/// carry the same factor on both sides, so the operator norm is the matrix
/// `ℓ^p` norm.
fn probe(grid: &Grid, p: f64, m: Matrix) -> OperatorProbe {
    let embed = move |m: &Matrix, f: &GridFunction| {
        let y = mat_vec(m, &f.values()[..DIM]);
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        out[..DIM].copy_from_slice(&y);
        GridFunction::new(f.grid().clone(), out).unwrap()
    };
    let t = adjoint(&m);
    OperatorProbe::new(grid, p, 8, "matrix", move |f| embed(&m, f)).with_adjoint(move |f| embed(&t, f))
}

fn lp(x: &[Complex64], p: f64) -> f64 {
    x.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Random-restart hill climbing on `‖Ax‖_p / ‖x‖_p` over `C^DIM`.
fn brute_force_norm(m: &Matrix, p: f64, seed: u64) -> f64 {
    let mut r = rng(seed);
    let ratio = |x: &[Complex64]| lp(&mat_vec(m, x), p) / lp(x, p);
    let mut best = 0.0f64;
    for _ in 0..60 {
        let mut x: Vec<Complex64> = (0..DIM)
            .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect();
        let mut value = ratio(&x);
        let mut step = 0.3;
        let mut misses = 0;
        while step > 1e-9 {
            let trial: Vec<Complex64> = x
                .iter()
                .map(|v| v + Complex64::new(r.random_range(-step..step), r.random_range(-step..step)))
                .collect();
            let t = ratio(&trial);
            if t > value {
                x = trial;
                value = t;
                misses = 0;
            } else {
                misses += 1;
                if misses == 60 {
                    step *= 0.5;
                    misses = 0;
                }
            }
        }
        best = best.max(value);
    }
    best
}

/// Riesz–Thorin: `‖A‖_3 ≤ ‖A‖_1^{1/3} ‖A‖_∞^{2/3}`.
fn interpolation_bound(m: &Matrix) -> f64 {
    let col = (0..DIM).map(|j| (0..DIM).map(|i| m[i][j].norm()).sum::<f64>()).fold(0.0, f64::max);
    let row = m.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    col.powf(1.0 / 3.0) * row.powf(2.0 / 3.0)
}

#[test]
fn power_method_matches_brute_force_at_p3() {
    let grid = CircleGrid::new(6).unwrap();
    let mut r = rng(2024);
    for case in 0..3 {
        let m = random_matrix(&mut r);
        let est = power_method(&probe(&grid, 3.0, m), 16, 100 + case);
        let brute = brute_force_norm(&m, 3.0, 500 + case);
        let rel = (est.value - brute).abs() / brute;
        assert!(rel < 1e-4, "case {case}: power {} vs brute force {brute}", est.value);
        assert!(est.value <= interpolation_bound(&m) * (1.0 + 1e-12));
        assert_eq!(est.method, NormMethod::PowerMethodP);
    }
}

#[test]
fn adjoint_has_dual_norm() {
    // ‖A‖_{p→p} = ‖A*‖_{p′→p′}
    let grid = CircleGrid::new(6).unwrap();
    let mut r = rng(99);
    for _ in 0..3 {
        let m = random_matrix(&mut r);
        let a = power_method(&probe(&grid, 3.0, m), 16, 1).value;
        let b = power_method(&probe(&grid, 1.5, adjoint(&m)), 16, 2).value;
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }
}

#[test]
fn p2_norms_agree_with_largest_singular_value() {
    let grid = CircleGrid::new(6).unwrap();
    let mut r = rng(5);
    let m = random_matrix(&mut r);
    // σ_max by power iteration on A*A, independent of the library
    let t = adjoint(&m);
    let mut x = [Complex64::new(1.0, 0.3); DIM];
    let mut sigma = 0.0;
    for _ in 0..5000 {
        let y = mat_vec(&t, &mat_vec(&m, &x));
        let n = lp(&y, 2.0);
        sigma = n.sqrt();
        for (a, b) in x.iter_mut().zip(y) {
            *a = b / n;
        }
    }
    let p = probe(&grid, 2.0, m);
    // the band-limited SVD would only see inputs with |k| ≤ band; this
    // operator acts on sample coordinates, so use the full grid matrix
    let exact = exact_full_norm(&p).unwrap();
    let iterative = power_method(&p, 8, 0).value;
    assert!((exact - sigma).abs() < 1e-9 * sigma, "{exact} vs {sigma}");
    assert!((iterative - sigma).abs() < 1e-6 * sigma);
}
