//! The quadratic matrix polynomial `P(z) = Q − 2zA + z²B`, its companion
//! linearizations and its complex spectrum, plus the ordinary Galerkin
//! pencil `A u = λ B u` for comparison.

pub mod solver;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
pub use solver::{FaerQz, GeneralizedEigenpairs, GeneralizedEigensolver, SolverError};

/// Relative asymmetry above which input matrices are rejected.
pub const MAX_ASYMMETRY: f64 = 1e-8;
/// Points closer than `PAIR_TOL·(1 + |μ|)` to `conj(ν)` are conjugate partners.
pub const PAIR_TOL: f64 = 1e-8;
/// Unpaired points with `|Im μ| < SNAP_TOL·(1 + |Re μ|)` are made real.
pub const SNAP_TOL: f64 = 1e-12;
/// Points within this distance are counted as one multiple eigenvalue.
pub const CLUSTER_DIAMETER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PencilError {
    #[error("pencil matrices must be square and of equal size: Q {q:?}, A {a:?}, B {b:?}")]
    DimensionMismatch { q: (usize, usize), a: (usize, usize), b: (usize, usize) },
    #[error("empty pencil")]
    Empty,
    #[error("mass matrix singular or not positive definite (degenerate basis)")]
    MassNotPositiveDefinite,
    #[error("{matrix} asymmetry defect {defect:e} exceeds {MAX_ASYMMETRY:e}·‖{matrix}‖ (assembly bug)")]
    Asymmetric { matrix: &'static str, defect: f64 },
    #[error("companion scaling matrix N is singular or has the wrong shape")]
    SingularScaling,
    #[error("eigensolver failed on pencil with ‖Q‖={norm_q:e}, ‖A‖={norm_a:e}, ‖B‖={norm_b:e}: {source}")]
    Solver {
        source: SolverError,
        norm_q: f64,
        norm_a: f64,
        norm_b: f64,
    },
}

/// Validated triple `(Q, A, B)`; immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    q: Mat<f64>,
    a: Mat<f64>,
    b: Mat<f64>,
    asymmetry_defect: f64,
}

fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].abs());
        }
    }
    out
}

/// Returns `(M + Mᵀ)/2` and `max|M − Mᵀ| / max|M|`.
fn symmetrize(m: MatRef<'_, f64>) -> (Mat<f64>, f64) {
    let n = m.nrows();
    let mut defect = 0.0f64;
    let out = Mat::from_fn(n, n, |i, j| {
        defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        if i == j {
            m[(i, i)]
        } else {
            0.5 * (m[(i, j)] + m[(j, i)])
        }
    });
    let scale = max_abs(m);
    (out, if scale > 0.0 { defect / scale } else { 0.0 })
}

/// Validates and symmetrizes `(Q, A, B)` into a pencil.
pub fn make_pencil(
    q: MatRef<'_, f64>,
    a: MatRef<'_, f64>,
    b: MatRef<'_, f64>,
) -> Result<QuadraticPencil, PencilError> {
    let shape = |m: MatRef<'_, f64>| (m.nrows(), m.ncols());
    let n = q.nrows();
    if [shape(q), shape(a), shape(b)].iter().any(|&s| s != (n, n)) {
        return Err(PencilError::DimensionMismatch { q: shape(q), a: shape(a), b: shape(b) });
    }
    if n == 0 {
        return Err(PencilError::Empty);
    }
    let mut worst = 0.0f64;
    let mut sym = |m: MatRef<'_, f64>, name: &'static str| {
        let (s, defect) = symmetrize(m);
        if defect > MAX_ASYMMETRY {
            return Err(PencilError::Asymmetric { matrix: name, defect });
        }
        worst = worst.max(defect);
        Ok(s)
    };
    let q = sym(q, "Q")?;
    let a = sym(a, "A")?;
    let b = sym(b, "B")?;
    if b.llt(Side::Lower).is_err() {
        return Err(PencilError::MassNotPositiveDefinite);
    }
    Ok(QuadraticPencil { q, a, b, asymmetry_defect: worst })
}

impl QuadraticPencil {
    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn q(&self) -> MatRef<'_, f64> {
        self.q.as_ref()
    }

    pub fn a(&self) -> MatRef<'_, f64> {
        self.a.as_ref()
    }

    pub fn b(&self) -> MatRef<'_, f64> {
        self.b.as_ref()
    }

    /// Largest relative asymmetry seen on the inputs before symmetrizing.
    pub fn asymmetry_defect(&self) -> f64 {
        self.asymmetry_defect
    }

    /// Pencil of the potential shifted by `t`: `(Q + 2tA + t²B, A + tB, B)`,
    /// whose spectrum is `Spec(P) + t`.
    pub fn shifted(&self, t: f64) -> QuadraticPencil {
        let n = self.n();
        let q = Mat::from_fn(n, n, |i, j| self.q[(i, j)] + 2.0 * t * self.a[(i, j)] + t * t * self.b[(i, j)]);
        let a = Mat::from_fn(n, n, |i, j| self.a[(i, j)] + t * self.b[(i, j)]);
        QuadraticPencil { q, a, b: self.b.clone(), asymmetry_defect: self.asymmetry_defect }
    }

    /// `P(z)` at a complex point, as a dense complex matrix.
    pub fn eval(&self, z: Complex64) -> Mat<Complex64> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| self.q[(i, j)] - 2.0 * z * self.a[(i, j)] + z * z * self.b[(i, j)])
    }

    /// Smallest eigenvalue of the bending matrix and `max|Q|`; `Q` is a Gram
    /// matrix so the former should not fall below `−1e−10·max|Q|`.
    pub fn bending_min_eigenvalue(&self) -> (f64, f64) {
        let ev = self.q.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigensolver");
        (ev.iter().copied().fold(f64::INFINITY, f64::min), max_abs(self.q.as_ref()))
    }

    fn norms(&self) -> (f64, f64, f64) {
        (self.q.norm_l2(), self.a.norm_l2(), self.b.norm_l2())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompanionVariant {
    /// `L = [[0, N], [−Q, 2A]]`, `K = [[N, 0], [0, B]]`
    #[default]
    Form1,
    /// `L = [[−Q, 0], [0, N]]`, `K = [[−2A, B], [N, 0]]`
    Form2,
}

#[derive(Debug, Clone, Default)]
pub enum Scaling {
    #[default]
    Identity,
    /// `N = B`.
    Mass,
    Custom(Mat<f64>),
}

#[derive(Debug, Clone, Default)]
pub struct CompanionForm {
    pub variant: CompanionVariant,
    pub scaling: Scaling,
}

impl CompanionForm {
    pub fn new(variant: CompanionVariant, scaling: Scaling) -> Self {
        Self { variant, scaling }
    }
}

fn scaling_matrix(p: &QuadraticPencil, scaling: &Scaling) -> Result<Mat<f64>, PencilError> {
    let n = p.n();
    match scaling {
        Scaling::Identity => Ok(Mat::identity(n, n)),
        Scaling::Mass => Ok(p.b.clone()),
        Scaling::Custom(m) => {
            if m.nrows() != n || m.ncols() != n || !m.as_ref().is_all_finite() {
                return Err(PencilError::SingularScaling);
            }
            // rank check through the singular values
            let sv = m.singular_values().map_err(|_| PencilError::SingularScaling)?;
            let smax = sv.iter().copied().fold(0.0, f64::max);
            let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
            if !(smin > smax * n as f64 * f64::EPSILON) {
                return Err(PencilError::SingularScaling);
            }
            Ok(m.clone())
        }
    }
}

/// Builds the `2n × 2n` linear pencil `(L, K)` with
/// `det(L − zK) = 0 ⇔ det P(z) = 0`.
pub fn companion_linearize(p: &QuadraticPencil, form: &CompanionForm) -> Result<(Mat<f64>, Mat<f64>), PencilError> {
    let n = p.n();
    let nm = scaling_matrix(p, &form.scaling)?;
    let mut l = Mat::<f64>::zeros(2 * n, 2 * n);
    let mut k = Mat::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let (qv, av, bv, nv) = (p.q[(i, j)], p.a[(i, j)], p.b[(i, j)], nm[(i, j)]);
            match form.variant {
                CompanionVariant::Form1 => {
                    l[(i, n + j)] = nv;
                    l[(n + i, j)] = -qv;
                    l[(n + i, n + j)] = 2.0 * av;
                    k[(i, j)] = nv;
                    k[(n + i, n + j)] = bv;
                }
                CompanionVariant::Form2 => {
                    l[(i, j)] = -qv;
                    l[(n + i, n + j)] = nv;
                    k[(i, j)] = -2.0 * av;
                    k[(i, n + j)] = bv;
                    k[(n + i, j)] = nv;
                }
            }
        }
    }
    Ok((l, k))
}

/// One point of the second-order spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub mu: Complex64,
    /// Index of `conj(μ)` in the same spectrum; `None` for real points.
    pub conjugate_index: Option<usize>,
    /// `‖P(μ)u‖ / ‖u‖` for the computed eigenvector `u`.
    pub residual: f64,
    /// Number of points (including this one) in its numerical cluster.
    pub multiplicity: usize,
}

impl SpectrumPoint {
    /// A bare point with no partner, residual or multiplicity information.
    pub fn bare(mu: Complex64) -> Self {
        Self { mu, conjugate_index: None, residual: 0.0, multiplicity: 1 }
    }
}

/// Full spectrum of a pencil of size `n`: `2n` points with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.mu).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

/// Computes `Spec(P)` with the default QZ backend.
pub fn pencil_spectrum(p: &QuadraticPencil, form: &CompanionForm) -> Result<Spectrum, PencilError> {
    pencil_spectrum_with(p, form, &FaerQz::default())
}

pub fn pencil_spectrum_with(
    p: &QuadraticPencil,
    form: &CompanionForm,
    solver: &dyn GeneralizedEigensolver,
) -> Result<Spectrum, PencilError> {
    let n = p.n();
    let (l, k) = companion_linearize(p, form)?;
    let pairs = solver.solve(l.as_ref(), k.as_ref(), true).map_err(|source| {
        let (norm_q, norm_a, norm_b) = p.norms();
        PencilError::Solver { source, norm_q, norm_a, norm_b }
    })?;
    let residuals = residuals(p, &pairs);
    let mut values = pairs.values;
    debug_assert_eq!(values.len(), 2 * n);

    let partners = pair_conjugates(&mut values);
    let mult = multiplicities(&values);
    let points = values
        .iter()
        .enumerate()
        .map(|(i, &mu)| SpectrumPoint {
            mu,
            conjugate_index: partners[i],
            residual: residuals[i],
            multiplicity: mult[i],
        })
        .collect();
    Ok(Spectrum { points })
}

/// `‖P(μ_j)u_j‖/‖u_j‖` where `u_j` is the top block of the companion
/// eigenvector (both forms carry `v = [u; μu]`).
fn residuals(p: &QuadraticPencil, pairs: &GeneralizedEigenpairs) -> Vec<f64> {
    let n = p.n();
    let Some(vecs) = pairs.vectors.as_ref() else {
        return vec![f64::NAN; pairs.values.len()];
    };
    let top = vecs.as_ref().subrows(0, n);
    let m = top.ncols();
    let prod = |mat: MatRef<'_, f64>| {
        let mut out = Mat::<f64>::zeros(n, m);
        matmul(out.as_mut(), Accum::Replace, mat, top, 1.0, Par::Seq);
        out
    };
    let (qu, au, bu) = (prod(p.q()), prod(p.a()), prod(p.b()));
    let values = &pairs.values;
    let mut out = vec![0.0; m];
    let mut j = 0;
    while j < m {
        let mu = values[j];
        if !mu.is_finite() {
            out[j] = f64::NAN;
            j += 1;
            continue;
        }
        let paired = mu.im != 0.0 && j + 1 < m && values[j + 1] == mu.conj();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let (x, qx, ax, bx) = (top[(i, j)], qu[(i, j)], au[(i, j)], bu[(i, j)]);
            let (y, qy, ay, by) = if paired {
                (top[(i, j + 1)], qu[(i, j + 1)], au[(i, j + 1)], bu[(i, j + 1)])
            } else {
                (0.0, 0.0, 0.0, 0.0)
            };
            let r = Complex64::new(qx, qy) - 2.0 * mu * Complex64::new(ax, ay) + mu * mu * Complex64::new(bx, by);
            num += r.norm_sqr();
            den += x * x + y * y;
        }
        let res = if den > 0.0 { (num / den).sqrt() } else { f64::NAN };
        out[j] = res;
        if paired {
            out[j + 1] = res;
            j += 2;
        } else {
            j += 1;
        }
    }
    out
}

/// Links each non-real point with a conjugate partner and snaps unpaired
/// near-real points onto the real axis.
fn pair_conjugates(values: &mut [Complex64]) -> Vec<Option<usize>> {
    let len = values.len();
    let mut partner = vec![None; len];
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&i, &j| values[i].re.total_cmp(&values[j].re).then(i.cmp(&j)));
    for oi in 0..len {
        let i = order[oi];
        if partner[i].is_some() || !(values[i].im > 0.0) {
            continue;
        }
        let target = values[i].conj();
        let tol = PAIR_TOL * (1.0 + values[i].norm());
        let mut best: Option<(f64, usize)> = None;
        // scan neighbours in real-part order within the tolerance window
        let scan = |range: &mut dyn Iterator<Item = usize>, best: &mut Option<(f64, usize)>| {
            for oj in range {
                let j = order[oj];
                if (values[j].re - target.re).abs() > tol {
                    break;
                }
                if j == i || partner[j].is_some() || !(values[j].im < 0.0) {
                    continue;
                }
                let d = (values[j] - target).norm();
                if d <= tol && best.map_or(true, |(bd, bj)| d < bd || (d == bd && j < bj)) {
                    *best = Some((d, j));
                }
            }
        };
        scan(&mut (oi + 1..len), &mut best);
        scan(&mut (0..oi).rev(), &mut best);
        if let Some((_, j)) = best {
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
    }
    for i in 0..len {
        let v = values[i];
        if partner[i].is_none() && v.im != 0.0 && v.im.abs() < SNAP_TOL * (1.0 + v.re.abs()) {
            values[i] = Complex64::new(v.re, 0.0);
        }
    }
    partner
}

/// Size of the single-linkage cluster (link distance `CLUSTER_DIAMETER`)
/// containing each point.
fn multiplicities(values: &[Complex64]) -> Vec<usize> {
    let len = values.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&i, &j| values[i].re.total_cmp(&values[j].re).then(i.cmp(&j)));
    let mut parent: Vec<usize> = (0..len).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..len {
        for b in a + 1..len {
            let (i, j) = (order[a], order[b]);
            if values[j].re - values[i].re > CLUSTER_DIAMETER {
                break;
            }
            if (values[i] - values[j]).norm() <= CLUSTER_DIAMETER {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..len).map(|i| find(&mut parent, i)).collect();
    let mut count = vec![0usize; len];
    for &r in &roots {
        count[r] += 1;
    }
    roots.iter().map(|&r| count[r]).collect()
}

/// Eigenvalues of the Galerkin pencil `A u = λ B u`, nondecreasing.
pub fn galerkin_spectrum(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Vec<f64>, PencilError> {
    let shape = |m: MatRef<'_, f64>| (m.nrows(), m.ncols());
    let n = a.nrows();
    if shape(a) != (n, n) || shape(b) != (n, n) {
        return Err(PencilError::DimensionMismatch { q: (0, 0), a: shape(a), b: shape(b) });
    }
    solver::symmetric_definite_eigenvalues(a, b).map_err(|e| match e {
        SolverError::NotPositiveDefinite => PencilError::MassNotPositiveDefinite,
        source => PencilError::Solver { source, norm_q: 0.0, norm_a: a.norm_l2(), norm_b: b.norm_l2() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Mat<f64> {
        Mat::from_fn(1, 1, |_, _| v)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn scalar_pencil_is_valid() {
        let p = make_pencil(scalar(2.0).as_ref(), scalar(1.5).as_ref(), scalar(1.0).as_ref()).unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(p.asymmetry_defect(), 0.0);
    }

    #[test]
    fn singular_mass_is_rejected() {
        let err = make_pencil(scalar(2.0).as_ref(), scalar(1.5).as_ref(), scalar(0.0).as_ref()).unwrap_err();
        assert_eq!(err, PencilError::MassNotPositiveDefinite);
        assert!(err.to_string().contains("mass matrix singular"));
    }

    #[test]
    fn dimension_mismatch_and_asymmetry() {
        let i2 = Mat::<f64>::identity(2, 2);
        let i3 = Mat::<f64>::identity(3, 3);
        assert!(matches!(
            make_pencil(i2.as_ref(), i3.as_ref(), i2.as_ref()),
            Err(PencilError::DimensionMismatch { .. })
        ));
        let skew = Mat::from_fn(2, 2, |i, j| if i < j { 1.0 } else { 0.0 });
        assert!(matches!(
            make_pencil(skew.as_ref(), i2.as_ref(), i2.as_ref()),
            Err(PencilError::Asymmetric { matrix: "Q", .. })
        ));
        // tiny asymmetry is symmetrized and recorded
        let nearly = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 1e-12 } else { 0.0 } + if i == j { 1.0 } else { 0.0 });
        let p = make_pencil(nearly.as_ref(), i2.as_ref(), i2.as_ref()).unwrap();
        assert!(p.asymmetry_defect() > 0.0 && p.asymmetry_defect() < 1e-11);
        assert_eq!(p.q()[(0, 1)], p.q()[(1, 0)]);
    }

    #[test]
    fn scalar_companion_blocks() {
        let p = make_pencil(scalar(2.0).as_ref(), scalar(1.5).as_ref(), scalar(1.0).as_ref()).unwrap();
        let (l, k) = companion_linearize(&p, &CompanionForm::default()).unwrap();
        let expect_l = [[0.0, 1.0], [-2.0, 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(l[(i, j)], expect_l[i][j]);
                assert_eq!(k[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
        for variant in [CompanionVariant::Form1, CompanionVariant::Form2] {
            let s = pencil_spectrum(&p, &CompanionForm::new(variant, Scaling::Identity)).unwrap();
            let v = sorted(s.values());
            assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{variant:?}");
            assert!((v[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12, "{variant:?}");
        }
    }

    #[test]
    fn scalar_complex_pair() {
        let p = make_pencil(scalar(2.0).as_ref(), scalar(1.0).as_ref(), scalar(1.0).as_ref()).unwrap();
        let s = pencil_spectrum(&p, &CompanionForm::default()).unwrap();
        let v = sorted(s.values());
        assert!((v[0] - Complex64::new(1.0, -1.0)).norm() < 1e-12);
        assert!((v[1] - Complex64::new(1.0, 1.0)).norm() < 1e-12);
        assert_eq!(s.points[0].conjugate_index, Some(1));
        assert_eq!(s.points[1].conjugate_index, Some(0));
        assert!(s.max_residual() < 1e-12);
    }

    #[test]
    fn singular_custom_scaling() {
        let p = make_pencil(scalar(2.0).as_ref(), scalar(1.0).as_ref(), scalar(1.0).as_ref()).unwrap();
        let form = CompanionForm::new(CompanionVariant::Form1, Scaling::Custom(scalar(0.0)));
        assert_eq!(companion_linearize(&p, &form).unwrap_err(), PencilError::SingularScaling);
    }

    #[test]
    fn snapping_and_clusters() {
        let mut v = vec![
            Complex64::new(1.0, 1e-14),
            Complex64::new(2.0, 0.5),
            Complex64::new(2.0, -0.5),
            Complex64::new(3.0, 0.0),
            Complex64::new(3.0 + 1e-10, 0.0),
        ];
        let partners = pair_conjugates(&mut v);
        assert_eq!(v[0].im, 0.0);
        assert_eq!(partners, vec![None, Some(2), Some(1), None, None]);
        assert_eq!(multiplicities(&v), vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn galerkin_identity() {
        let id = Mat::<f64>::identity(5, 5);
        assert_eq!(galerkin_spectrum(id.as_ref(), id.as_ref()).unwrap(), vec![1.0; 5]);
        let zero = Mat::<f64>::zeros(5, 5);
        assert_eq!(galerkin_spectrum(id.as_ref(), zero.as_ref()), Err(PencilError::MassNotPositiveDefinite));
    }
}
