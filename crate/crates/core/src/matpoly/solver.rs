//! Adapter seam to dense generalized eigensolvers.
//!
//! The rest of the crate only sees [`GeneralizedEigensolver`]: two square
//! real matrices in, eigenvalues (and optionally right eigenvectors) out.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::ComputeEigenvectors;
use faer::linalg::gevd::{self, GevdParams};
use faer::{Auto, Mat, MatRef, Par};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("generalized eigensolver did not converge on a {dimension}x{dimension} pencil")]
    NoConvergence { dimension: usize },
    #[error("pencil matrices must be square and equal-sized, got {lhs:?} and {rhs:?}")]
    Shape { lhs: (usize, usize), rhs: (usize, usize) },
    #[error("symmetric-definite solver: right-hand matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Generalized eigenpairs of a real pencil `(L, K)`, `L v = μ K v`.
///
/// Eigenvectors are returned in real packed form: for a real `μ_j`
/// column `j` is the vector; for a complex pair `(μ_j, μ_{j+1} = conj μ_j)`
/// with `Im μ_j > 0`, the vector of `μ_j` is `col_j + i·col_{j+1}` and
/// that of `μ_{j+1}` its conjugate.
#[derive(Debug, Clone)]
pub struct GeneralizedEigenpairs {
    pub values: Vec<Complex64>,
    pub vectors: Option<Mat<f64>>,
}

impl GeneralizedEigenpairs {
    /// Complex right eigenvector of value `j`, if vectors were computed.
    pub fn vector(&self, j: usize) -> Option<Vec<Complex64>> {
        let u = self.vectors.as_ref()?;
        let im = self.values[j].im;
        let col = |k: usize| (0..u.nrows()).map(move |i| u[(i, k)]);
        let v = if im == 0.0 {
            col(j).map(|x| Complex64::new(x, 0.0)).collect()
        } else if j + 1 < self.values.len() && self.values[j + 1] == self.values[j].conj() && im > 0.0 {
            col(j).zip(col(j + 1)).map(|(a, b)| Complex64::new(a, b)).collect()
        } else {
            col(j - 1).zip(col(j)).map(|(a, b)| Complex64::new(a, -b)).collect()
        };
        Some(v)
    }
}

pub trait GeneralizedEigensolver: Sync {
    fn solve(
        &self,
        lhs: MatRef<'_, f64>,
        rhs: MatRef<'_, f64>,
        want_vectors: bool,
    ) -> Result<GeneralizedEigenpairs, SolverError>;
}

/// Real QZ from `faer`, run sequentially so results are bit-reproducible.
#[derive(Debug, Clone, Copy)]
pub struct FaerQz {
    /// Active-block size above which the multishift sweep is used.
    pub blocking_threshold: usize,
}

impl Default for FaerQz {
    fn default() -> Self {
        // faer's default (75) makes the blocked sweep stall for dimensions
        // in the hundreds; 300 measured fastest on companion pencils.
        Self { blocking_threshold: 300 }
    }
}

impl GeneralizedEigensolver for FaerQz {
    fn solve(
        &self,
        lhs: MatRef<'_, f64>,
        rhs: MatRef<'_, f64>,
        want_vectors: bool,
    ) -> Result<GeneralizedEigenpairs, SolverError> {
        let n = lhs.nrows();
        if lhs.ncols() != n || rhs.nrows() != n || rhs.ncols() != n {
            return Err(SolverError::Shape {
                lhs: (lhs.nrows(), lhs.ncols()),
                rhs: (rhs.nrows(), rhs.ncols()),
            });
        }
        if n == 0 {
            return Ok(GeneralizedEigenpairs { values: vec![], vectors: want_vectors.then(|| Mat::zeros(0, 0)) });
        }
        let mut params: GevdParams = <GevdParams as Auto<f64>>::auto();
        params.schur.blocking_threshold = self.blocking_threshold;
        let par = Par::Seq;
        let right = if want_vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };

        let mut a = lhs.to_owned();
        let mut b = rhs.to_owned();
        let mut s_re = faer::diag::Diag::<f64>::zeros(n);
        let mut s_im = faer::diag::Diag::<f64>::zeros(n);
        let mut beta = faer::diag::Diag::<f64>::zeros(n);
        let mut u = want_vectors.then(|| Mat::<f64>::zeros(n, n));
        // faer's scratch estimate omits the back-substitution workspace of
        // the eigenvector stage, which matters for tiny pencils
        let scratch = gevd::gevd_scratch::<f64>(n, ComputeEigenvectors::No, right, par, params.into())
            .and(faer::linalg::temp_mat_scratch::<f64>(n, 2));
        let mut buf = MemBuffer::new(scratch);
        gevd::gevd_real(
            a.as_mut(),
            b.as_mut(),
            s_re.as_mut(),
            s_im.as_mut(),
            beta.as_mut(),
            None,
            u.as_mut().map(|u| u.as_mut()),
            par,
            MemStack::new(&mut buf),
            params.into(),
        )
        .map_err(|_| SolverError::NoConvergence { dimension: n })?;

        let mut values = Vec::with_capacity(n);
        let mut j = 0;
        while j < n {
            let bj = beta[j];
            if s_im[j] == 0.0 {
                values.push(ratio(Complex64::new(s_re[j], 0.0), bj));
                j += 1;
            } else {
                // faer stores the pair's shared beta and ±Im on adjacent slots
                let mu = ratio(Complex64::new(s_re[j], s_im[j]), bj);
                let mu = Complex64::new(mu.re, mu.im.abs());
                values.push(mu);
                values.push(mu.conj());
                if let Some(u) = u.as_mut() {
                    if s_im[j] / bj < 0.0 {
                        // keep the packed convention: col_{j+1} is the imaginary part for Im > 0
                        for i in 0..n {
                            u[(i, j + 1)] = -u[(i, j + 1)];
                        }
                    }
                }
                j += 2;
            }
        }
        Ok(GeneralizedEigenpairs { values, vectors: u })
    }
}

fn ratio(alpha: Complex64, beta: f64) -> Complex64 {
    if beta == 0.0 {
        Complex64::new(f64::INFINITY, 0.0)
    } else {
        alpha / beta
    }
}

/// Eigenvalues of the symmetric-definite pencil `A x = λ B x`, ascending.
///
/// Reduces with the Cholesky factor `B = LLᵀ` to `L⁻¹AL⁻ᵀ`.
pub fn symmetric_definite_eigenvalues(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Vec<f64>, SolverError> {
    use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
    use faer::Side;

    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(SolverError::Shape { lhs: (a.nrows(), a.ncols()), rhs: (b.nrows(), b.ncols()) });
    }
    let llt = b.llt(Side::Lower).map_err(|_| SolverError::NotPositiveDefinite)?;
    let l = llt.L();
    let mut x = a.to_owned();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let mut ev = c
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| SolverError::NoConvergence { dimension: n })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_real_and_complex() {
        // roots of z² − 3z + 2 and z² − 2z + 2 via companion matrices
        let l = Mat::<f64>::from_fn(2, 2, |i, j| [[0.0, 1.0], [-2.0, 3.0]][i][j]);
        let k = Mat::<f64>::identity(2, 2);
        let mut v = FaerQz::default().solve(l.as_ref(), k.as_ref(), false).unwrap().values;
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((v[1] - Complex64::new(2.0, 0.0)).norm() < 1e-14);

        let l = Mat::<f64>::from_fn(2, 2, |i, j| [[0.0, 1.0], [-2.0, 2.0]][i][j]);
        let out = FaerQz::default().solve(l.as_ref(), k.as_ref(), true).unwrap();
        assert!((out.values[0] - Complex64::new(1.0, 1.0)).norm() < 1e-14);
        assert_eq!(out.values[1], out.values[0].conj());
        for j in 0..2 {
            let v = out.vector(j).unwrap();
            let mu = out.values[j];
            for i in 0..2 {
                let lv: Complex64 = (0..2).map(|c| v[c] * l[(i, c)]).sum();
                assert!((lv - mu * v[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetric_definite_identity() {
        let id = Mat::<f64>::identity(4, 4);
        assert_eq!(symmetric_definite_eigenvalues(id.as_ref(), id.as_ref()).unwrap(), vec![1.0; 4]);
        let zero = Mat::<f64>::zeros(4, 4);
        assert_eq!(
            symmetric_definite_eigenvalues(id.as_ref(), zero.as_ref()),
            Err(SolverError::NotPositiveDefinite)
        );
    }
}
