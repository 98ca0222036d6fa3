//! Partial indices of invertible matrix loops on the unit circle.
//!
//! With the factorization `g = g₋·diag(z^{κ_j})·g₊` (`g₊` holomorphic and
//! invertible inside the disc, `g₋` outside), the Toeplitz operator of
//! `z^{−s}g` on `H²` has kernel dimension `k(s) = Σ_j max(0, s − κ_j)`. We
//! measure `k(s)` on rectangular finite sections, doubling the truncation until
//! two consecutive sizes agree, and read the indices off the second differences
//! of `k`. Float only.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::linalg;
use crate::matrix::Matrix;
use crate::scalar::{Complex64, Tolerance};

pub const DEFAULT_TRUNCATION_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum LoopRepr {
    /// Laurent coefficients `k ↦ g_k`, so `g(z) = Σ g_k z^k`.
    Fourier(BTreeMap<i64, Matrix<Complex64>>),
    /// Values at `z_j = e^{2πij/N}`, `N` a power of two.
    Samples(Vec<Matrix<Complex64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLoop {
    pub dim: usize,
    pub repr: LoopRepr,
}

/// Constructor kinds for [`make_loop`].
#[derive(Debug, Clone, PartialEq)]
pub enum LoopKind {
    Constant(Matrix<Complex64>),
    Monomial(Vec<i64>),
    /// `[[z, 1], [0, z⁻¹]]`.
    UpperExample,
    Product(Vec<MatrixLoop>),
    BlockDiagonal(Vec<MatrixLoop>),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn make_loop(kind: LoopKind) -> Result<MatrixLoop> {
    match kind {
        LoopKind::Constant(h) => {
            if !h.is_square() || h.rows() == 0 {
                return Err(StokesError::BadParams(
                    "constant loop needs a square matrix".into(),
                ));
            }
            let tol = Tolerance::default();
            if linalg::rank(&h, &tol) < h.rows() {
                return Err(StokesError::BadParams("constant loop is singular".into()));
            }
            MatrixLoop::from_fourier(h.rows(), BTreeMap::from([(0, h)]))
        }
        LoopKind::Monomial(exps) => {
            if exps.is_empty() {
                return Err(StokesError::BadParams(
                    "monomial loop needs exponents".into(),
                ));
            }
            let d = exps.len();
            let mut coeffs: BTreeMap<i64, Matrix<Complex64>> = BTreeMap::new();
            for (i, &k) in exps.iter().enumerate() {
                coeffs.entry(k).or_insert_with(|| Matrix::zeros(d, d))[(i, i)] = c(1.0);
            }
            MatrixLoop::from_fourier(d, coeffs)
        }
        LoopKind::UpperExample => {
            let mut coeffs = BTreeMap::new();
            let mut plus = Matrix::zeros(2, 2);
            plus[(0, 0)] = c(1.0);
            let mut zero = Matrix::zeros(2, 2);
            zero[(0, 1)] = c(1.0);
            let mut minus = Matrix::zeros(2, 2);
            minus[(1, 1)] = c(1.0);
            coeffs.insert(1, plus);
            coeffs.insert(0, zero);
            coeffs.insert(-1, minus);
            MatrixLoop::from_fourier(2, coeffs)
        }
        LoopKind::Product(loops) => {
            let mut it = loops.into_iter();
            let first = it
                .next()
                .ok_or_else(|| StokesError::BadParams("empty product".into()))?;
            it.try_fold(first, |acc, l| acc.mul(&l))
        }
        LoopKind::BlockDiagonal(loops) => {
            if loops.is_empty() {
                return Err(StokesError::BadParams("empty block-diagonal loop".into()));
            }
            let tol = Tolerance::default();
            let d: usize = loops.iter().map(|l| l.dim).sum();
            let parts: Vec<BTreeMap<i64, Matrix<Complex64>>> =
                loops.iter().map(|l| l.fourier(&tol)).collect();
            let keys: std::collections::BTreeSet<i64> =
                parts.iter().flat_map(|p| p.keys().copied()).collect();
            let mut coeffs = BTreeMap::new();
            for k in keys {
                let blocks: Vec<Matrix<Complex64>> = loops
                    .iter()
                    .zip(&parts)
                    .map(|(l, p)| {
                        p.get(&k)
                            .cloned()
                            .unwrap_or_else(|| Matrix::zeros(l.dim, l.dim))
                    })
                    .collect();
                coeffs.insert(k, Matrix::block_diagonal(&blocks));
            }
            MatrixLoop::from_fourier(d, coeffs)
        }
    }
}

impl MatrixLoop {
    pub fn from_fourier(dim: usize, coeffs: BTreeMap<i64, Matrix<Complex64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(StokesError::BadParams("loop has no coefficients".into()));
        }
        if coeffs.values().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(StokesError::BadParams(format!(
                "every coefficient must be {dim}x{dim}"
            )));
        }
        Ok(MatrixLoop {
            dim,
            repr: LoopRepr::Fourier(coeffs),
        })
    }

    pub fn from_samples(dim: usize, samples: Vec<Matrix<Complex64>>) -> Result<Self> {
        if samples.is_empty() || !samples.len().is_power_of_two() {
            return Err(StokesError::BadParams(format!(
                "sample count {} is not a power of two",
                samples.len()
            )));
        }
        if samples.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(StokesError::BadParams(format!(
                "every sample must be {dim}x{dim}"
            )));
        }
        Ok(MatrixLoop {
            dim,
            repr: LoopRepr::Samples(samples),
        })
    }

    /// Laurent coefficients, dropping those negligible relative to the largest.
    pub fn fourier(&self, tol: &Tolerance) -> BTreeMap<i64, Matrix<Complex64>> {
        match &self.repr {
            LoopRepr::Fourier(m) => m.clone(),
            LoopRepr::Samples(s) => {
                let n = s.len();
                let d = self.dim;
                let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
                let mut coeffs: Vec<Matrix<Complex64>> = vec![Matrix::zeros(d, d); n];
                for r in 0..d {
                    for col in 0..d {
                        let mut buf: Vec<Complex64> = s.iter().map(|m| m[(r, col)]).collect();
                        fft.process(&mut buf);
                        for (k, v) in buf.into_iter().enumerate() {
                            coeffs[k][(r, col)] = v / n as f64;
                        }
                    }
                }
                let max = coeffs.iter().map(Matrix::max_abs).fold(0.0, f64::max);
                let half = n as i64 / 2;
                coeffs
                    .into_iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let k = k as i64;
                        (if k >= half { k - n as i64 } else { k }, m)
                    })
                    .filter(|(_, m)| m.max_abs() > tol.rel_eps * max)
                    .collect()
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Matrix<Complex64> {
        match &self.repr {
            LoopRepr::Fourier(m) => {
                let mut out = Matrix::zeros(self.dim, self.dim);
                for (&k, coeff) in m {
                    out = &out + &coeff.scale(&z.powi(k as i32));
                }
                out
            }
            LoopRepr::Samples(s) => {
                // nearest sample; only used on the sampling grid
                let n = s.len();
                let idx = ((z.arg().rem_euclid(TAU) / TAU) * n as f64).round() as usize % n;
                s[idx].clone()
            }
        }
    }

    pub fn samples(&self, n: usize) -> Vec<Matrix<Complex64>> {
        match &self.repr {
            LoopRepr::Samples(s) if s.len() == n => s.clone(),
            _ => (0..n)
                .map(|j| self.eval(Complex64::from_polar(1.0, TAU * j as f64 / n as f64)))
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &MatrixLoop) -> Result<MatrixLoop> {
        if self.dim != other.dim {
            return Err(StokesError::BadParams(format!(
                "cannot multiply loops of sizes {} and {}",
                self.dim, other.dim
            )));
        }
        let tol = Tolerance::default();
        let (a, b) = (self.fourier(&tol), other.fourier(&tol));
        let mut out: BTreeMap<i64, Matrix<Complex64>> = BTreeMap::new();
        for (&i, x) in &a {
            for (&j, y) in &b {
                let p = x * y;
                let e = out
                    .entry(i + j)
                    .or_insert_with(|| Matrix::zeros(self.dim, self.dim));
                *e = &*e + &p;
            }
        }
        MatrixLoop::from_fourier(self.dim, out)
    }

    /// Smallest and largest exponent with a nonzero coefficient.
    fn support(coeffs: &BTreeMap<i64, Matrix<Complex64>>) -> (i64, i64) {
        let lo = coeffs.keys().next().copied().unwrap_or(0);
        let hi = coeffs.keys().next_back().copied().unwrap_or(0);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    /// Partial indices in decreasing order.
    pub indices: Vec<i64>,
    pub det_winding: i64,
    pub stabilized_at: usize,
    pub max_condition: f64,
    pub min_abs_det: f64,
    /// `k(s)` for each probed shift `s`.
    pub kernel_dims: Vec<(i64, usize)>,
}

impl IndexResult {
    pub fn is_pure_weight_zero(&self) -> bool {
        self.indices.iter().all(|&k| k == 0)
    }
}

fn winding_and_conditioning(
    samples: &[Matrix<Complex64>],
    tol: &Tolerance,
) -> Result<(i64, f64, f64)> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut first: Option<f64> = None;
    let mut max_cond: f64 = 0.0;
    let mut min_det = f64::INFINITY;
    let spectra: Vec<Vec<f64>> = samples.iter().map(linalg::float::singular_values).collect();
    let scale = spectra.iter().flatten().copied().fold(0.0, f64::max);
    for (j, m) in samples.iter().enumerate() {
        let smax = spectra[j].iter().copied().fold(0.0, f64::max);
        let smin = spectra[j].iter().copied().fold(f64::INFINITY, f64::min);
        if smin <= tol.rel_eps * scale {
            return Err(StokesError::SingularLoop(j));
        }
        max_cond = max_cond.max(smax / smin);
        let det = linalg::determinant(m)?;
        min_det = min_det.min(det.norm());
        let phase = det.arg();
        if let Some(p) = prev {
            let mut step = phase - p;
            step -= TAU * (step / TAU).round();
            total += step;
        } else {
            first = Some(phase);
        }
        prev = Some(phase);
    }
    if let (Some(p), Some(f)) = (prev, first) {
        let mut step = f - p;
        step -= TAU * (step / TAU).round();
        total += step;
    }
    Ok(((total / TAU).round() as i64, max_cond, min_det))
}

/// `dim ker` of the Toeplitz sections of `z^{−s}g` on polynomials of degree
/// `< n`, for every `s` in `lo..=hi`.
///
/// The section for `s` keeps exactly the rows of `p ↦ g·p` whose exponent is
/// at least `s`, so one sweep over the rows from the top exponent down, with
/// an orthonormal basis of the rows seen so far, gives every rank at once.
fn section_kernels(
    coeffs: &BTreeMap<i64, Matrix<Complex64>>,
    d: usize,
    (bottom, top): (i64, i64),
    (lo, hi): (i64, i64),
    n: usize,
    tol: &Tolerance,
) -> Vec<usize> {
    let width = n * d;
    let row = |e: i64, a: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); width];
        for col in 0..n as i64 {
            if let Some(c) = coeffs.get(&(e - col)) {
                for b in 0..d {
                    v[col as usize * d + b] = c[(a, b)];
                }
            }
        }
        v
    };
    let first = n as i64 - 1 + top;
    let rows: Vec<(i64, Vec<Complex64>)> = (bottom..=first)
        .rev()
        .flat_map(|e| (0..d).map(move |a| (e, a)))
        .map(|(e, a)| (e, row(e, a)))
        .collect();
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let scale = rows.iter().map(|(_, v)| norm(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut rank_from = BTreeMap::new();
    for (e, mut v) in rows {
        if basis.len() < width {
            // twice is enough for Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= dot * y;
                    }
                }
            }
            let r = norm(&v);
            if r > tol.rel_eps * scale {
                v.iter_mut().for_each(|x| *x /= r);
                basis.push(v);
            }
        }
        rank_from.insert(e, basis.len());
    }
    (lo..=hi)
        .map(|s| width - rank_from.get(&s).copied().unwrap_or(0))
        .collect()
}

pub fn partial_indices(g: &MatrixLoop, tol: &Tolerance) -> Result<IndexResult> {
    partial_indices_with_cap(g, tol, DEFAULT_TRUNCATION_CAP)
}

pub fn partial_indices_with_cap(
    g: &MatrixLoop,
    tol: &Tolerance,
    cap: usize,
) -> Result<IndexResult> {
    let d = g.dim;
    let coeffs = g.fourier(tol);
    let (bottom, top) = MatrixLoop::support(&coeffs);
    let band = bottom.abs().max(top.abs()) as usize;
    let n_samples = (8 * (band + 1) * d).max(64).next_power_of_two();
    let samples = g.samples(n_samples);
    let (det_winding, max_condition, min_abs_det) = winding_and_conditioning(&samples, tol)?;

    // a loop supported on exponents [a, b] has all its indices in [a, b]
    let lo = bottom;
    let hi = top + 1;
    let mut n = ((hi - lo) as usize).next_power_of_two().max(8);
    let mut previous: Option<Vec<usize>> = None;
    let dims = loop {
        if n > cap {
            return Err(StokesError::NotStabilized(cap));
        }
        let current = section_kernels(&coeffs, d, (bottom, top), (lo, hi), n, tol);
        if previous.as_ref() == Some(&current) {
            break current;
        }
        previous = Some(current);
        n *= 2;
    };
    let stabilized_at = n;
    let kernel_dims: Vec<(i64, usize)> = (lo..=hi).zip(dims.iter().copied()).collect();

    // #{κ_j ≤ s} = k(s+1) − k(s); the window must start below every index
    let below: Vec<i64> = dims.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    if dims[0] != 0 || below.last().copied() != Some(d as i64) {
        return Err(StokesError::InvariantViolated(format!(
            "kernel dimensions {kernel_dims:?} do not bracket the indices"
        )));
    }
    let mut indices = Vec::with_capacity(d);
    let mut prev_count = 0;
    for (offset, &count) in below.iter().enumerate() {
        let s = lo + offset as i64;
        let new = count - prev_count;
        if new < 0 {
            return Err(StokesError::InvariantViolated(
                "kernel dimensions are not convex".into(),
            ));
        }
        indices.extend(std::iter::repeat_n(s, new as usize));
        prev_count = count;
    }
    indices.sort_unstable_by(|a, b| b.cmp(a));
    if indices.iter().sum::<i64>() != det_winding {
        return Err(StokesError::InvariantViolated(format!(
            "indices {indices:?} do not sum to the winding number {det_winding}"
        )));
    }
    Ok(IndexResult {
        indices,
        det_winding,
        stabilized_at,
        max_condition,
        min_abs_det,
        kernel_dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn constant_loop_has_zero_indices() {
        let mut h = Matrix::identity(3);
        h[(0, 1)] = c(0.5);
        h[(1, 0)] = c(0.5);
        let g = make_loop(LoopKind::Constant(h)).unwrap();
        let r = partial_indices(&g, &tol()).unwrap();
        assert_eq!(r.indices, vec![0, 0, 0]);
        assert!(r.is_pure_weight_zero());
    }

    #[test]
    fn monomial_examples() {
        let g = make_loop(LoopKind::Monomial(vec![2, 0, -1])).unwrap();
        let r = partial_indices(&g, &tol()).unwrap();
        assert_eq!(r.indices, vec![2, 0, -1]);
        assert_eq!(r.det_winding, 1);
        let g = make_loop(LoopKind::Monomial(vec![3, -3])).unwrap();
        let r = partial_indices(&g, &tol()).unwrap();
        assert_eq!((r.indices, r.det_winding), (vec![3, -3], 0));
    }

    #[test]
    fn upper_example_is_trivial() {
        let g = make_loop(LoopKind::UpperExample).unwrap();
        let r = partial_indices(&g, &tol()).unwrap();
        assert_eq!(r.indices, vec![0, 0]);
    }

    #[test]
    fn block_diagonal_of_monomials() {
        let a = make_loop(LoopKind::Monomial(vec![1])).unwrap();
        let b = make_loop(LoopKind::Monomial(vec![-1])).unwrap();
        let g = make_loop(LoopKind::BlockDiagonal(vec![a.clone(), b.clone()])).unwrap();
        assert_eq!(partial_indices(&g, &tol()).unwrap().indices, vec![1, -1]);
        let p = make_loop(LoopKind::Product(vec![a, b])).unwrap();
        assert_eq!(partial_indices(&p, &tol()).unwrap().indices, vec![0]);
    }

    #[test]
    fn samples_round_trip_through_fft() {
        let g = make_loop(LoopKind::UpperExample).unwrap();
        let s = MatrixLoop::from_samples(2, g.samples(32)).unwrap();
        let f = s.fourier(&tol());
        assert_eq!(f.keys().copied().collect::<Vec<_>>(), vec![-1, 0, 1]);
        assert!((f[&1][(0, 0)] - c(1.0)).norm() < 1e-12);
        assert_eq!(partial_indices(&s, &tol()).unwrap().indices, vec![0, 0]);
    }

    #[test]
    fn singular_loop_is_reported() {
        let g = make_loop(LoopKind::Product(vec![make_loop(LoopKind::Monomial(
            vec![0, 0],
        ))
        .unwrap()]))
        .unwrap();
        assert!(partial_indices(&g, &tol()).is_ok());
        let mut coeffs = BTreeMap::new();
        let mut m0 = Matrix::zeros(1, 1);
        m0[(0, 0)] = c(1.0);
        let mut m1 = Matrix::zeros(1, 1);
        m1[(0, 0)] = c(1.0);
        coeffs.insert(0, m0);
        coeffs.insert(1, m1);
        // 1 + z vanishes at z = −1, which is a sample point
        let bad = MatrixLoop::from_fourier(1, coeffs).unwrap();
        assert!(matches!(
            partial_indices(&bad, &tol()),
            Err(StokesError::SingularLoop(_))
        ));
    }
}
