//! Kernels, ranks, inverses and Hermitian classification.
//!
//! Exact domains use Gauss-Jordan elimination over the field and a symmetric
//! pivoted LDL† factorization for definiteness. The float domain routes kernels
//! through an SVD and definiteness through a Hermitian eigendecomposition; every
//! zero decision there is relative to [`Tolerance::rel_eps`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::matrix::Matrix;
use crate::scalar::{RealScalar, Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    #[serde(rename = "PD")]
    PositiveDefinite,
    #[serde(rename = "PSD")]
    PositiveSemidefinite,
    #[serde(rename = "INDEFINITE")]
    Indefinite,
    #[serde(rename = "NSD")]
    NegativeSemidefinite,
    #[serde(rename = "ND")]
    NegativeDefinite,
}

impl Definiteness {
    pub fn is_psd(self) -> bool {
        matches!(
            self,
            Definiteness::PositiveDefinite | Definiteness::PositiveSemidefinite
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Definiteness::PositiveDefinite => "PD",
            Definiteness::PositiveSemidefinite => "PSD",
            Definiteness::Indefinite => "INDEFINITE",
            Definiteness::NegativeSemidefinite => "NSD",
            Definiteness::NegativeDefinite => "ND",
        }
    }

    fn from_inertia(n: usize, positive: usize, negative: usize, indefinite: bool) -> Self {
        if indefinite || (positive > 0 && negative > 0) {
            Definiteness::Indefinite
        } else if negative == 0 {
            if positive == n {
                Definiteness::PositiveDefinite
            } else {
                Definiteness::PositiveSemidefinite
            }
        } else if negative == n {
            Definiteness::NegativeDefinite
        } else {
            Definiteness::NegativeSemidefinite
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianReport<S> {
    pub class: Definiteness,
    pub rank: usize,
    pub kernel: Vec<Vec<S>>,
    /// Number of positive / negative pivots (exact) or eigenvalues (float).
    /// In exact mode the counts stop at the first zero pivot with a nonzero
    /// residual, which already certifies indefiniteness.
    pub positive: usize,
    pub negative: usize,
    /// Float mode only.
    pub min_eigenvalue: Option<f64>,
    pub max_abs_eigenvalue: Option<f64>,
}

/// Reduced row echelon form and pivot columns.
pub fn rref<S: Scalar>(m: &Matrix<S>, tol: &Tolerance) -> (Matrix<S>, Vec<usize>) {
    let mut a = m.clone();
    let scale = m.max_abs();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = if S::is_exact() {
            (r..rows).find(|&i| !num_traits::Zero::is_zero(&a[(i, c)]))
        } else {
            (r..rows)
                .max_by(|&i, &j| a[(i, c)].magnitude().total_cmp(&a[(j, c)].magnitude()))
                .filter(|&i| !a[(i, c)].is_negligible(scale, tol))
        };
        let Some(p) = best else {
            if !S::is_exact() {
                for i in r..rows {
                    a[(i, c)] = S::zero();
                }
            }
            continue;
        };
        if p != r {
            for k in 0..cols {
                let tmp = a[(p, k)].clone();
                a[(p, k)] = a[(r, k)].clone();
                a[(r, k)] = tmp;
            }
        }
        let inv = S::one() / a[(r, c)].clone();
        for k in c..cols {
            a[(r, k)] = a[(r, k)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a[(i, c)].clone();
            if num_traits::Zero::is_zero(&f) {
                continue;
            }
            for k in c..cols {
                a[(i, k)] = a[(i, k)].clone() - f.clone() * a[(r, k)].clone();
            }
            a[(i, c)] = S::zero();
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Kernel basis read off the reduced row echelon form: one vector per free column.
pub fn rref_kernel<S: Scalar>(m: &Matrix<S>, tol: &Tolerance) -> Vec<Vec<S>> {
    let (r, pivots) = rref(m, tol);
    let cols = m.cols();
    let mut is_pivot = vec![None; cols];
    for (row, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(row);
    }
    (0..cols)
        .filter(|&f| is_pivot[f].is_none())
        .map(|f| {
            let mut v = vec![S::zero(); cols];
            v[f] = S::one();
            for (row, &c) in pivots.iter().enumerate() {
                v[c] = -r[(row, f)].clone();
            }
            v
        })
        .collect()
}

pub fn kernel_basis<S: Scalar>(m: &Matrix<S>, tol: &Tolerance) -> Vec<Vec<S>> {
    S::kernel_basis(m, tol)
}

pub fn rank<S: Scalar>(m: &Matrix<S>, tol: &Tolerance) -> usize {
    m.cols() - kernel_basis(m, tol).len()
}

/// Rank of the span of a list of vectors of length `dim`.
pub fn span_rank<S: Scalar>(dim: usize, vectors: &[Vec<S>], tol: &Tolerance) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&Matrix::from_columns(dim, vectors), tol)
}

/// Whether two families of vectors span the same subspace.
pub fn same_span<S: Scalar>(dim: usize, a: &[Vec<S>], b: &[Vec<S>], tol: &Tolerance) -> bool {
    let ra = span_rank(dim, a, tol);
    let rb = span_rank(dim, b, tol);
    if ra != rb {
        return false;
    }
    let mut both = a.to_vec();
    both.extend(b.iter().cloned());
    span_rank(dim, &both, tol) == ra
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse<S: Scalar>(m: &Matrix<S>, tol: &Tolerance) -> Result<Matrix<S>> {
    if !m.is_square() {
        return Err(StokesError::Shape(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let aug = m.hstack(&Matrix::identity(n));
    let (r, pivots) = rref(&aug, tol);
    if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
        return Err(StokesError::Singular);
    }
    Ok(r.block(0, n, n, n))
}

/// Determinant by elimination with partial pivoting.
pub fn determinant<S: Scalar>(m: &Matrix<S>) -> Result<S> {
    if !m.is_square() {
        return Err(StokesError::Shape(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = S::one();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[(i, c)].magnitude().total_cmp(&a[(j, c)].magnitude()))
            .expect("nonempty range");
        if num_traits::Zero::is_zero(&a[(p, c)]) {
            return Ok(S::zero());
        }
        if p != c {
            for k in 0..n {
                let tmp = a[(p, k)].clone();
                a[(p, k)] = a[(c, k)].clone();
                a[(c, k)] = tmp;
            }
            det = -det;
        }
        let d = a[(c, c)].clone();
        det = det * d.clone();
        for i in c + 1..n {
            let f = a[(i, c)].clone() / d.clone();
            if num_traits::Zero::is_zero(&f) {
                continue;
            }
            for k in c..n {
                a[(i, k)] = a[(i, k)].clone() - f.clone() * a[(c, k)].clone();
            }
        }
    }
    Ok(det)
}

/// Solves `a * x = b` for `a` of full column rank; errors if `a` is rank
/// deficient or the system is inconsistent.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, tol: &Tolerance) -> Result<Matrix<S>> {
    if a.rows() != b.rows() {
        return Err(StokesError::Shape(format!(
            "solve: {} rows vs {} rows",
            a.rows(),
            b.rows()
        )));
    }
    let n = a.cols();
    let aug = a.hstack(b);
    let (r, pivots) = rref(&aug, tol);
    let a_pivots = pivots.iter().filter(|&&c| c < n).count();
    if a_pivots < n {
        return Err(StokesError::Singular);
    }
    if pivots.iter().any(|&c| c >= n) {
        return Err(StokesError::InvariantViolated(
            "inconsistent linear system".into(),
        ));
    }
    Ok(r.block(0, n, n, b.cols()))
}

/// Classifies a Hermitian matrix; errors if `h` is not Hermitian within tolerance.
pub fn hermitian_classify<S: Scalar>(h: &Matrix<S>, tol: &Tolerance) -> Result<HermitianReport<S>> {
    if !h.is_square() {
        return Err(StokesError::Shape(format!(
            "Hermitian classification of a {}x{} matrix",
            h.rows(),
            h.cols()
        )));
    }
    let diff = h - &h.adjoint();
    let residual = diff.frobenius_norm();
    let hermitian = if S::is_exact() {
        diff.is_zero()
    } else {
        residual <= tol.rel_eps * h.frobenius_norm()
    };
    if !hermitian {
        return Err(StokesError::NotHermitian { residual });
    }
    Ok(S::classify_hermitian_impl(h, tol))
}

/// Symmetric pivoted LDL† with field pivots. A zero diagonal facing a nonzero
/// off-diagonal entry exhibits a 2x2 principal minor `-|a|^2 < 0`, hence an
/// indefinite form.
pub fn ldl_classify<S: Scalar>(h: &Matrix<S>, tol: &Tolerance) -> HermitianReport<S> {
    let n = h.rows();
    let scale = h.max_abs();
    let mut a = h.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut positive, mut negative) = (0, 0);
    let mut indefinite = false;
    while !active.is_empty() {
        let pivot = active
            .iter()
            .position(|&k| !a[(k, k)].is_negligible(scale, tol));
        let Some(pos) = pivot else {
            let residual = active
                .iter()
                .any(|&i| active.iter().any(|&j| !a[(i, j)].is_negligible(scale, tol)));
            indefinite = residual;
            break;
        };
        let k = active.remove(pos);
        let d = a[(k, k)].clone();
        match d.re().sign_tol(scale, tol) {
            s if s > 0 => positive += 1,
            s if s < 0 => negative += 1,
            _ => {}
        }
        for &i in &active {
            let f = a[(i, k)].clone() / d.clone();
            if num_traits::Zero::is_zero(&f) {
                continue;
            }
            for &j in &active {
                a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
            }
        }
    }
    let kernel = kernel_basis(h, tol);
    let rank = n - kernel.len();
    HermitianReport {
        class: Definiteness::from_inertia(n, positive, negative, indefinite),
        rank,
        kernel,
        positive,
        negative,
        min_eigenvalue: None,
        max_abs_eigenvalue: None,
    }
}

/// Float-mode routines backed by nalgebra.
pub mod float {
    use nalgebra::{DMatrix, SymmetricEigen};

    use super::{Definiteness, HermitianReport};
    use crate::matrix::Matrix;
    use crate::scalar::{Complex64, Tolerance};

    pub fn to_dmatrix(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Matrix<Complex64> {
        Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Singular values of `m` (padded with zero rows so that all `cols` values exist).
    pub fn singular_values(m: &Matrix<Complex64>) -> Vec<f64> {
        if m.cols() == 0 {
            return Vec::new();
        }
        let rows = m.rows().max(m.cols());
        let mut d = DMatrix::<Complex64>::zeros(rows, m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                d[(r, c)] = m[(r, c)];
            }
        }
        d.singular_values().iter().copied().collect()
    }

    pub fn svd_kernel(m: &Matrix<Complex64>, tol: &Tolerance) -> Vec<Vec<Complex64>> {
        let cols = m.cols();
        if cols == 0 {
            return Vec::new();
        }
        if m.rows() == 0 {
            return (0..cols)
                .map(|i| {
                    let mut v = vec![Complex64::new(0.0, 0.0); cols];
                    v[i] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect();
        }
        let rows = m.rows().max(cols);
        let mut d = DMatrix::<Complex64>::zeros(rows, cols);
        for r in 0..m.rows() {
            for c in 0..cols {
                d[(r, c)] = m[(r, c)];
            }
        }
        let svd = d.svd(false, true);
        let v_t = svd.v_t.expect("requested V^H");
        let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let threshold = tol.rel_eps * sigma_max;
        svd.singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= threshold)
            .map(|(k, _)| (0..cols).map(|c| v_t[(k, c)].conj()).collect())
            .collect()
    }

    /// Column-pivoted modified Gram-Schmidt; returns the selected columns in
    /// increasing order.
    pub fn pivoted_qr_columns(m: &Matrix<Complex64>, tol: &Tolerance) -> Vec<usize> {
        let mut work: Vec<Vec<Complex64>> = m.columns();
        let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let scale = work.iter().map(|c| norm(c)).fold(0.0, f64::max);
        let mut remaining: Vec<usize> = (0..m.cols()).collect();
        let mut chosen = Vec::new();
        while !remaining.is_empty() {
            let (pos, best) = remaining
                .iter()
                .enumerate()
                .map(|(p, &c)| (p, norm(&work[c])))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            if best <= tol.rel_eps * scale || best == 0.0 {
                break;
            }
            let c = remaining.remove(pos);
            let q: Vec<Complex64> = work[c].iter().map(|x| x / best).collect();
            for &o in &remaining {
                let proj: Complex64 = q.iter().zip(&work[o]).map(|(a, b)| a.conj() * b).sum();
                for (w, qi) in work[o].iter_mut().zip(&q) {
                    *w -= proj * qi;
                }
            }
            chosen.push(c);
        }
        chosen.sort_unstable();
        chosen
    }

    pub fn hermitian_eigenvalues(h: &Matrix<Complex64>) -> Vec<f64> {
        if h.rows() == 0 {
            return Vec::new();
        }
        let d = to_dmatrix(h);
        let sym = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    pub fn eigen_classify(h: &Matrix<Complex64>, tol: &Tolerance) -> HermitianReport<Complex64> {
        let n = h.rows();
        if n == 0 {
            return HermitianReport {
                class: Definiteness::PositiveDefinite,
                rank: 0,
                kernel: Vec::new(),
                positive: 0,
                negative: 0,
                min_eigenvalue: None,
                max_abs_eigenvalue: None,
            };
        }
        let d = to_dmatrix(h);
        let sym = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let max_abs = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let threshold = tol.rel_eps * max_abs;
        let (mut positive, mut negative) = (0, 0);
        let mut kernel = Vec::new();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() <= threshold {
                kernel.push((0..n).map(|r| eig.eigenvectors[(r, k)]).collect());
            } else if lambda > 0.0 {
                positive += 1;
            } else {
                negative += 1;
            }
        }
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        HermitianReport {
            class: Definiteness::from_inertia(n, positive, negative, false),
            rank: n - kernel.len(),
            kernel,
            positive,
            negative,
            min_eigenvalue: Some(min),
            max_abs_eigenvalue: Some(max_abs),
        }
    }
}
