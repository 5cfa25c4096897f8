//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use faer::Mat;
use gapspec_core::matpoly::{make_pencil, QuadraticPencil};
use gapspec_core::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut StdRng, n: usize) -> Mat<f64> {
    let g = Mat::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    Mat::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
}

pub fn random_spd(rng: &mut StdRng, n: usize) -> Mat<f64> {
    let g = Mat::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut b = g.transpose() * &g;
    for i in 0..n {
        b[(i, i)] += 0.5;
    }
    b
}

/// Random `(Q, A, B)` with symmetric `Q`, `A` and positive definite `B`.
pub fn random_pencil(rng: &mut StdRng, n: usize) -> QuadraticPencil {
    let q = random_symmetric(rng, n);
    let a = random_symmetric(rng, n);
    let b = random_spd(rng, n);
    make_pencil(q.as_ref(), a.as_ref(), b.as_ref()).expect("random pencil is valid")
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).unwrap();
        if m[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    det
}

/// `det(Q − 2zA + z²B)` evaluated entrywise from the three matrices.
pub fn det_pencil(p: &QuadraticPencil, z: Complex64) -> Complex64 {
    let n = p.n();
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| p.q()[(i, j)] - 2.0 * z * p.a()[(i, j)] + z * z * p.b()[(i, j)])
                .collect()
        })
        .collect();
    complex_det(m)
}

/// Coefficients (ascending) of `det P(z)`, a polynomial of degree `2n`,
/// recovered by a discrete Fourier transform of samples on a circle.
pub fn det_polynomial(p: &QuadraticPencil) -> Vec<Complex64> {
    let deg = 2 * p.n();
    let npts = deg + 1;
    let radius = 1.0;
    let samples: Vec<Complex64> = (0..npts)
        .map(|k| {
            let z = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / npts as f64);
            det_pencil(p, z)
        })
        .collect();
    (0..npts)
        .map(|j| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, &v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / npts as f64))
                .sum();
            sum / (npts as f64 * radius.powi(j as i32))
        })
        .collect()
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All roots of a polynomial (ascending coefficients) by Aberth–Ehrlich
/// iteration.
pub fn polynomial_roots(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let c: Vec<Complex64> = c.iter().map(|&a| a / lead).collect();
    let bound = 1.0 + c[..deg].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(&c, z[i]);
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Largest distance after pairing each `expected` value with its nearest
/// unused `actual` value, relative to `max(1, |expected|)`.
pub fn multiset_distance(expected: &[Complex64], actual: &[Complex64]) -> f64 {
    assert_eq!(expected.len(), actual.len(), "cardinality differs");
    let mut used = vec![false; actual.len()];
    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&i, &j| expected[i].re.total_cmp(&expected[j].re).then(expected[i].im.total_cmp(&expected[j].im)));
    for i in order {
        let e = expected[i];
        let (k, d) = actual
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, a)| (k, (a - e).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d / e.norm().max(1.0));
    }
    worst
}

/// Explicit cubic Hermite hat functions on the mesh `{−1, 0, 1}`:
/// `(value, first, second)` derivatives at `x` of the value-type (`slope =
/// false`) or slope-type function attached to the node `0`.
pub fn hermite_at_origin(x: f64, slope: bool) -> (f64, f64, f64) {
    let t = x.abs();
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    if !slope {
        // 1 − 3t² + 2t³, even in x
        let v = 1.0 - 3.0 * t * t + 2.0 * t * t * t;
        let d = (-6.0 * t + 6.0 * t * t) * x.signum();
        let dd = -6.0 + 12.0 * t;
        (v, d, dd)
    } else {
        // x(1 − |x|)², odd in x
        let v = x * (1.0 - t) * (1.0 - t);
        let d = (1.0 - t) * (1.0 - 3.0 * t);
        let dd = (-4.0 + 6.0 * t) * x.signum();
        (v, d, dd)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Largest entrywise difference relative to the largest entry of `reference`.
pub fn relative_difference(reference: &Mat<f64>, other: &Mat<f64>) -> f64 {
    let mut scale = 0.0f64;
    let mut diff = 0.0f64;
    for j in 0..reference.ncols() {
        for i in 0..reference.nrows() {
            scale = scale.max(reference[(i, j)].abs());
            diff = diff.max((reference[(i, j)] - other[(i, j)]).abs());
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}
