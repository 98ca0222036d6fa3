//! Stokes data: a factor set ordered by a base direction, and two block
//! triangular matrices `Σ` (at the base direction) and `Σ′` (at the opposite one).
//!
//! Coordinates are column vectors. Block `(j, i)` of `Σ` is the component
//! `G_{c_i,1} → G_{c_j,2}`; `Σ` vanishes above the block diagonal (TRI≤),
//! `Σ′` below it (TRI≥), and all diagonal blocks are invertible.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::linalg;
use crate::matrix::Matrix;
use crate::order::{self, Direction, Factor};
use crate::scalar::{Scalar, Tolerance};

pub const CLAUSE_DISTINCT: &str = "factors distinct";
pub const CLAUSE_GENERIC: &str = "theta0 generic";
pub const CLAUSE_ORDERED: &str = "factors in theta0 order";
pub const CLAUSE_DIMS: &str = "dims positive";
pub const CLAUSE_SHAPE: &str = "matrix shape";
pub const CLAUSE_TRI_LE: &str = "TRI≤(Σ)";
pub const CLAUSE_TRI_GE: &str = "TRI≥(Σ′)";
pub const CLAUSE_DIAG: &str = "S_{ii} invertible";
pub const CLAUSE_DIAG_PRIME: &str = "S′_{ii} invertible";

/// Factor set in base-direction order together with block dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesType<R> {
    pub factors: Vec<Factor<R>>,
    pub theta0: Direction<R>,
    pub dims: Vec<usize>,
}

impl<R: crate::scalar::RealScalar> StokesType<R> {
    /// Sorts the factors for `theta0` and drops zero-dimensional ones. Returns the
    /// type and, for each kept block, the index of the input factor it came from.
    pub fn new(
        factors: Vec<Factor<R>>,
        dims: Vec<usize>,
        theta0: Direction<R>,
        tol: &Tolerance,
    ) -> Result<(Self, Vec<usize>)> {
        if factors.len() != dims.len() {
            return Err(StokesError::Shape(format!(
                "{} factors but {} dims",
                factors.len(),
                dims.len()
            )));
        }
        if factors.is_empty() {
            return Err(StokesError::BadParams("factor set is empty".into()));
        }
        let perm = order::order_permutation(&factors, &theta0, tol)?;
        let kept: Vec<usize> = perm.into_iter().filter(|&i| dims[i] > 0).collect();
        if kept.is_empty() {
            return Ok((StokesType::zero(theta0), Vec::new()));
        }
        let ty = StokesType {
            factors: kept.iter().map(|&i| factors[i].clone()).collect(),
            dims: kept.iter().map(|&i| dims[i]).collect(),
            theta0,
        };
        Ok((ty, kept))
    }

    /// The zero object: the single factor `0` with dimension `0`.
    pub fn zero(theta0: Direction<R>) -> Self {
        StokesType {
            factors: vec![Factor::zero()],
            dims: vec![0],
            theta0,
        }
    }

    pub fn is_zero_object(&self) -> bool {
        self.total() == 0
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.dims
            .iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    pub fn block_range(&self, i: usize) -> Range<usize> {
        let start: usize = self.dims[..i].iter().sum();
        start..start + self.dims[i]
    }

    /// Factor index of every coordinate.
    pub fn block_of_coordinates(&self) -> Vec<usize> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| std::iter::repeat_n(i, d))
            .collect()
    }

    pub fn factor_index(&self, c: &Factor<R>) -> Option<usize> {
        self.factors.iter().position(|f| f == c)
    }

    fn type_violations(&self, tol: &Tolerance, out: &mut Vec<Violation>) {
        if self.is_zero_object() {
            if self.factors.len() != 1 {
                out.push(Violation::new(
                    CLAUSE_DIMS,
                    None,
                    "zero object must have the single factor 0",
                ));
            }
            return;
        }
        for (i, &d) in self.dims.iter().enumerate() {
            if d == 0 {
                out.push(Violation::new(
                    CLAUSE_DIMS,
                    Some((i, i)),
                    format!("factor {} has dimension 0", self.factors[i]),
                ));
            }
        }
        for j in 0..self.factors.len() {
            for i in 0..j {
                let (a, b) = (&self.factors[i], &self.factors[j]);
                match order::leq_theta(a, b, &self.theta0, tol) {
                    order::Comparison::Lt => {}
                    order::Comparison::Eq => out.push(Violation::new(
                        CLAUSE_DISTINCT,
                        Some((j, i)),
                        format!("factor {a} repeated"),
                    )),
                    order::Comparison::Incomparable => out.push(Violation::new(
                        CLAUSE_GENERIC,
                        Some((j, i)),
                        format!("{b} and {a} are incomparable at {}", self.theta0),
                    )),
                    order::Comparison::Gt => out.push(Violation::new(
                        CLAUSE_ORDERED,
                        Some((j, i)),
                        format!("{a} is listed before {b} but is larger"),
                    )),
                }
            }
        }
    }
}

/// A violated clause of the Stokes data definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: String,
    /// Block coordinates `(target, source)` when the clause is local.
    pub block: Option<(usize, usize)>,
    pub detail: String,
}

impl Violation {
    fn new(clause: &str, block: Option<(usize, usize)>, detail: impl Into<String>) -> Self {
        Violation {
            clause: clause.to_string(),
            block,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn clauses(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.clause.as_str()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| match v.block {
                Some((j, i)) => format!("{} at block ({j}, {i}): {}", v.clause, v.detail),
                None => format!("{}: {}", v.clause, v.detail),
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesData<S: Scalar> {
    pub ty: StokesType<S::Real>,
    pub sigma: Matrix<S>,
    pub sigma_prime: Matrix<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyReport<S> {
    pub t1: Matrix<S>,
    pub graded: Vec<Matrix<S>>,
    pub eigenvalue_one_dim: usize,
}

/// A morphism of Stokes data: block-diagonal maps on both space families.
#[derive(Debug, Clone, PartialEq)]
pub struct Morphism<S> {
    pub lambda1: Matrix<S>,
    pub lambda2: Matrix<S>,
}

impl<S: Scalar> StokesData<S> {
    pub fn new(ty: StokesType<S::Real>, sigma: Matrix<S>, sigma_prime: Matrix<S>) -> Self {
        StokesData {
            ty,
            sigma,
            sigma_prime,
        }
    }

    /// Data with `Σ′ = −Σ†`.
    pub fn skew(ty: StokesType<S::Real>, sigma: Matrix<S>) -> Self {
        let sigma_prime = -&sigma.adjoint();
        StokesData::new(ty, sigma, sigma_prime)
    }

    pub fn identity(ty: StokesType<S::Real>) -> Self {
        let n = ty.total();
        StokesData::new(ty, Matrix::identity(n), Matrix::identity(n))
    }

    pub fn zero(theta0: Direction<S::Real>) -> Self {
        StokesData::identity(StokesType::zero(theta0))
    }

    /// Rank-one data with `Σ = Σ′ = (1)` at a single factor.
    pub fn trivial(c: Factor<S::Real>, theta0: Direction<S::Real>) -> Self {
        StokesData::identity(StokesType {
            factors: vec![c],
            theta0,
            dims: vec![1],
        })
    }

    pub fn total(&self) -> usize {
        self.ty.total()
    }

    pub fn block(&self, m: &Matrix<S>, j: usize, i: usize) -> Matrix<S> {
        let (rj, ri) = (self.ty.block_range(j), self.ty.block_range(i));
        m.block(rj.start, ri.start, rj.len(), ri.len())
    }

    pub fn validate(&self, tol: &Tolerance) -> ValidationReport {
        let mut out = Vec::new();
        self.ty.type_violations(tol, &mut out);
        let n = self.ty.total();
        for (name, m) in [("sigma", &self.sigma), ("sigma_prime", &self.sigma_prime)] {
            if m.rows() != n || m.cols() != n {
                out.push(Violation::new(
                    CLAUSE_SHAPE,
                    None,
                    format!("{name} is {}x{}, expected {n}x{n}", m.rows(), m.cols()),
                ));
            }
        }
        if !out
            .iter()
            .any(|v| v.clause == CLAUSE_SHAPE || v.clause == CLAUSE_DIMS)
        {
            self.matrix_violations(tol, &mut out);
        }
        ValidationReport { violations: out }
    }

    fn matrix_violations(&self, tol: &Tolerance, out: &mut Vec<Violation>) {
        let k = self.ty.n_factors();
        let checks = [
            (&self.sigma, CLAUSE_TRI_LE, CLAUSE_DIAG, true),
            (&self.sigma_prime, CLAUSE_TRI_GE, CLAUSE_DIAG_PRIME, false),
        ];
        for (m, tri, diag, lower) in checks {
            let scale = m.frobenius_norm();
            for j in 0..k {
                for i in 0..k {
                    let b = self.block(m, j, i);
                    let must_vanish = if lower { i > j } else { i < j };
                    if must_vanish && !b.is_negligible(scale, tol) {
                        out.push(Violation::new(
                            tri,
                            Some((j, i)),
                            format!("block ({j}, {i}) is nonzero"),
                        ));
                    }
                    if i == j && b.rows() > 0 && linalg::rank(&b, tol) < b.rows() {
                        out.push(Violation::new(
                            diag,
                            Some((j, i)),
                            format!("diagonal block {i} is singular"),
                        ));
                    }
                }
            }
        }
    }

    /// Errors with [`StokesError::InvalidData`] unless the data validates.
    pub fn ensure_valid(&self, tol: &Tolerance) -> Result<()> {
        let report = self.validate(tol);
        if report.is_valid() {
            Ok(())
        } else {
            Err(StokesError::InvalidData(report))
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        self.ty.dims == other.ty.dims
            && self.ty.factors.len() == other.ty.factors.len()
            && self
                .ty
                .factors
                .iter()
                .zip(&other.ty.factors)
                .all(|(a, b)| a.approx_eq(b, tol))
            && self.ty.theta0.same_as(&other.ty.theta0, tol)
            && self.sigma.approx_eq(&other.sigma, tol)
            && self.sigma_prime.approx_eq(&other.sigma_prime, tol)
    }

    pub fn monodromy(&self, tol: &Tolerance) -> Result<MonodromyReport<S>> {
        self.ensure_valid(tol)?;
        let t1 = &linalg::inverse(&self.sigma, tol)? * &self.sigma_prime;
        let graded = (0..self.ty.n_factors())
            .map(|i| {
                let inv = linalg::inverse(&self.block(&self.sigma, i, i), tol)?;
                Ok(&inv * &self.block(&self.sigma_prime, i, i))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = self.total();
        let shifted = &t1 - &Matrix::identity(n);
        let eigenvalue_one_dim = linalg::kernel_basis(&shifted, tol).len();
        Ok(MonodromyReport {
            t1,
            graded,
            eigenvalue_one_dim,
        })
    }

    /// Pull-back by `z ↦ −z`: factors negated, base direction rotated by π,
    /// `(Σ, Σ′) ↦ (Σ⁻¹, Σ′⁻¹)`.
    pub fn iota(&self, tol: &Tolerance) -> Result<Self> {
        self.ensure_valid(tol)?;
        if self.ty.is_zero_object() {
            return Ok(StokesData::zero(self.ty.theta0.opposite()));
        }
        let theta = self.ty.theta0.opposite();
        let factors: Vec<Factor<S::Real>> = self.ty.factors.iter().map(|c| -c).collect();
        let expected: Vec<usize> = (0..factors.len()).collect();
        check_numbering(&factors, &theta, &expected, tol)?;
        let out = StokesData::new(
            StokesType {
                factors,
                theta0: theta,
                dims: self.ty.dims.clone(),
            },
            linalg::inverse(&self.sigma, tol)?,
            linalg::inverse(&self.sigma_prime, tol)?,
        );
        ensure_convention(&out, tol)?;
        Ok(out)
    }

    /// Duality: factors `−C` renumbered for the same base direction (which
    /// reverses them), `Σ ↦ ρ·ᵗ(Σ⁻¹)·ρ` with `ρ` the block reversal.
    pub fn dualize(&self, tol: &Tolerance) -> Result<Self> {
        self.ensure_valid(tol)?;
        if self.ty.is_zero_object() {
            return Ok(self.clone());
        }
        let k = self.ty.n_factors();
        let factors: Vec<Factor<S::Real>> = self.ty.factors.iter().rev().map(|c| -c).collect();
        let expected: Vec<usize> = (0..k).collect();
        check_numbering(&factors, &self.ty.theta0, &expected, tol)?;
        let dims: Vec<usize> = self.ty.dims.iter().rev().copied().collect();
        let flip = |m: &Matrix<S>| -> Result<Matrix<S>> {
            let t = linalg::inverse(m, tol)?.transpose();
            Ok(block_reverse(&t, &self.ty.dims))
        };
        let out = StokesData::new(
            StokesType {
                factors,
                theta0: self.ty.theta0.clone(),
                dims,
            },
            flip(&self.sigma)?,
            flip(&self.sigma_prime)?,
        );
        ensure_convention(&out, tol)?;
        Ok(out)
    }

    /// Checks the intertwining equations of a candidate morphism `self → target`.
    pub fn is_morphism(&self, target: &Self, m: &Morphism<S>, tol: &Tolerance) -> bool {
        let l = &(&m.lambda2 * &self.sigma) - &(&target.sigma * &m.lambda1);
        let r = &(&m.lambda2 * &self.sigma_prime) - &(&target.sigma_prime * &m.lambda1);
        let scale = 1.0 + m.lambda1.frobenius_norm() + m.lambda2.frobenius_norm();
        l.is_negligible(scale, tol) && r.is_negligible(scale, tol)
    }

    /// Lays the coordinates of this data out along an aligned factor list:
    /// returns the dimension of each aligned factor.
    fn aligned_dims(&self, factors: &[Factor<S::Real>]) -> Vec<usize> {
        factors
            .iter()
            .map(|c| self.ty.factor_index(c).map_or(0, |i| self.ty.dims[i]))
            .collect()
    }
}

impl<R: crate::scalar::RealScalar> Factor<R> {
    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        if R::EXACT {
            return self == other;
        }
        let d = self - other;
        d.norm() <= tol.rel_eps * self.norm().max(other.norm()).max(1.0)
    }
}

fn check_numbering<R: crate::scalar::RealScalar>(
    factors: &[Factor<R>],
    theta: &Direction<R>,
    expected: &[usize],
    tol: &Tolerance,
) -> Result<()> {
    let perm = order::order_permutation(factors, theta, tol)
        .map_err(|e| StokesError::ConventionViolation(format!("renumbering failed: {e}")))?;
    if perm != expected {
        return Err(StokesError::ConventionViolation(format!(
            "numbering of the transformed factors is {perm:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

fn ensure_convention<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<()> {
    let report = d.validate(tol);
    if report.is_valid() {
        Ok(())
    } else {
        Err(StokesError::ConventionViolation(report.to_string()))
    }
}

/// Permutes a square block matrix (block sizes `dims`) by reversing the block order.
pub fn block_reverse<S: Scalar>(m: &Matrix<S>, dims: &[usize]) -> Matrix<S> {
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let order: Vec<usize> = (0..dims.len())
        .rev()
        .flat_map(|b| offsets[b]..offsets[b] + dims[b])
        .collect();
    m.submatrix(&order, &order)
}

/// Union factors with the block dimension each side contributes to them.
type Alignment<R> = (Vec<Factor<R>>, Vec<usize>, Vec<usize>);

/// Union of two factor sets in base-direction order, with the block dimension
/// each input contributes to every union factor.
fn align<S: Scalar>(
    d: &StokesData<S>,
    e: &StokesData<S>,
    tol: &Tolerance,
) -> Result<Alignment<S::Real>> {
    if !d.ty.theta0.same_as(&e.ty.theta0, tol) {
        return Err(StokesError::TypeMismatch(format!(
            "base directions differ: {} vs {}",
            d.ty.theta0, e.ty.theta0
        )));
    }
    let mut union: Vec<Factor<S::Real>> = Vec::new();
    for x in [d, e] {
        for (c, &dim) in x.ty.factors.iter().zip(&x.ty.dims) {
            if dim > 0 && !union.contains(c) {
                union.push(c.clone());
            }
        }
    }
    if union.is_empty() {
        return Ok((vec![Factor::zero()], vec![0], vec![0]));
    }
    let union = order::order_factors(&union, &d.ty.theta0, tol)?;
    let dd = d.aligned_dims(&union);
    let ed = e.aligned_dims(&union);
    Ok((union, dd, ed))
}

/// Basis of the space of morphisms `d → e`.
pub fn hom_space<S: Scalar>(
    d: &StokesData<S>,
    e: &StokesData<S>,
    tol: &Tolerance,
) -> Result<Vec<Morphism<S>>> {
    d.ensure_valid(tol)?;
    e.ensure_valid(tol)?;
    let (union, dd, ed) = align(d, e, tol)?;
    let (nd, ne) = (d.total(), e.total());
    let k = union.len();
    // unknowns: λ1 blocks, then λ2 blocks, each e_c × d_c row-major
    let mut var_off = Vec::with_capacity(k);
    let mut nvars = 0;
    for c in 0..k {
        var_off.push(nvars);
        nvars += ed[c] * dd[c];
    }
    let half = nvars;
    nvars *= 2;
    if nvars == 0 {
        return Ok(Vec::new());
    }
    let d_block: Vec<usize> = blocks_of(&dd);
    let e_block: Vec<usize> = blocks_of(&ed);
    let d_off = offsets_of(&dd);
    let e_off = offsets_of(&ed);
    let var = |c: usize, r: usize, s: usize| var_off[c] + (r - e_off[c]) * dd[c] + (s - d_off[c]);
    let mut sys = Matrix::<S>::zeros(2 * ne * nd, nvars);
    for (eq, (sd, se)) in [(&d.sigma, &e.sigma), (&d.sigma_prime, &e.sigma_prime)]
        .into_iter()
        .enumerate()
    {
        for r in 0..ne {
            for s in 0..nd {
                let row = eq * ne * nd + r * nd + s;
                // (λ2 Σ_D)[r, s]
                let c = e_block[r];
                for kk in d_off[c]..d_off[c] + dd[c] {
                    let coef = sd[(kk, s)].clone();
                    if !coef.is_zero() {
                        let v = half + var(c, r, kk);
                        sys[(row, v)] = sys[(row, v)].clone() + coef;
                    }
                }
                // −(Σ_E λ1)[r, s]
                let c = d_block[s];
                for kk in e_off[c]..e_off[c] + ed[c] {
                    let coef = se[(r, kk)].clone();
                    if !coef.is_zero() {
                        let v = var(c, kk, s);
                        sys[(row, v)] = sys[(row, v)].clone() - coef;
                    }
                }
            }
        }
    }
    let kernel = linalg::kernel_basis(&sys, tol);
    Ok(kernel
        .into_iter()
        .map(|x| {
            let mut l1 = Matrix::zeros(ne, nd);
            let mut l2 = Matrix::zeros(ne, nd);
            for c in 0..k {
                for r in e_off[c]..e_off[c] + ed[c] {
                    for s in d_off[c]..d_off[c] + dd[c] {
                        l1[(r, s)] = x[var(c, r, s)].clone();
                        l2[(r, s)] = x[half + var(c, r, s)].clone();
                    }
                }
            }
            Morphism {
                lambda1: l1,
                lambda2: l2,
            }
        })
        .collect())
}

fn offsets_of(dims: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    dims.iter()
        .map(|&d| {
            let o = acc;
            acc += d;
            o
        })
        .collect()
}

fn blocks_of(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .enumerate()
        .flat_map(|(i, &d)| std::iter::repeat_n(i, d))
        .collect()
}

/// Block-wise direct sum; on a shared factor the coordinates of `d` come first.
pub fn direct_sum<S: Scalar>(
    d: &StokesData<S>,
    e: &StokesData<S>,
    tol: &Tolerance,
) -> Result<StokesData<S>> {
    let (union, dd, ed) = align(d, e, tol)?;
    let dims: Vec<usize> = dd.iter().zip(&ed).map(|(a, b)| a + b).collect();
    if dims.iter().all(|&x| x == 0) {
        return Ok(StokesData::zero(d.ty.theta0.clone()));
    }
    let off = offsets_of(&dims);
    let mut emb_d = Vec::new();
    let mut emb_e = Vec::new();
    for c in 0..union.len() {
        emb_d.extend(off[c]..off[c] + dd[c]);
        emb_e.extend(off[c] + dd[c]..off[c] + dims[c]);
    }
    let n = off.last().unwrap() + dims.last().unwrap();
    let assemble = |a: &Matrix<S>, b: &Matrix<S>| {
        let mut m = Matrix::zeros(n, n);
        for (r, &er) in emb_d.iter().enumerate() {
            for (s, &es) in emb_d.iter().enumerate() {
                m[(er, es)] = a[(r, s)].clone();
            }
        }
        for (r, &er) in emb_e.iter().enumerate() {
            for (s, &es) in emb_e.iter().enumerate() {
                m[(er, es)] = b[(r, s)].clone();
            }
        }
        m
    };
    Ok(StokesData::new(
        StokesType {
            factors: union,
            theta0: d.ty.theta0.clone(),
            dims,
        },
        assemble(&d.sigma, &e.sigma),
        assemble(&d.sigma_prime, &e.sigma_prime),
    ))
}

/// Block-diagonal matrix of per-factor bases, dropping empty blocks' columns.
fn block_basis<S: Scalar>(dims: &[usize], bases: &[Vec<Vec<S>>]) -> Matrix<S> {
    let n: usize = dims.iter().sum();
    let off = offsets_of(dims);
    let mut cols = Vec::new();
    for (c, basis) in bases.iter().enumerate() {
        for v in basis {
            let mut col = vec![S::zero(); n];
            for (a, x) in v.iter().enumerate() {
                col[off[c] + a] = x.clone();
            }
            cols.push(col);
        }
    }
    Matrix::from_columns(n, &cols)
}

fn sub_type<S: Scalar>(
    factors: &[Factor<S::Real>],
    theta0: &Direction<S::Real>,
    dims: &[usize],
) -> StokesType<S::Real> {
    let keep: Vec<usize> = (0..dims.len()).filter(|&c| dims[c] > 0).collect();
    if keep.is_empty() {
        return StokesType::zero(theta0.clone());
    }
    StokesType {
        factors: keep.iter().map(|&c| factors[c].clone()).collect(),
        theta0: theta0.clone(),
        dims: keep.iter().map(|&c| dims[c]).collect(),
    }
}

/// Kernel of a morphism `d → e`, as Stokes data on the factors of `d`.
pub fn kernel_object<S: Scalar>(
    d: &StokesData<S>,
    e: &StokesData<S>,
    m: &Morphism<S>,
    tol: &Tolerance,
) -> Result<StokesData<S>> {
    let (union, dd, ed) = align(d, e, tol)?;
    let (d_off, e_off) = (offsets_of(&dd), offsets_of(&ed));
    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for c in 0..union.len() {
        let blk = |l: &Matrix<S>| l.block(e_off[c], d_off[c], ed[c], dd[c]);
        k1.push(linalg::kernel_basis(&blk(&m.lambda1), tol));
        k2.push(linalg::kernel_basis(&blk(&m.lambda2), tol));
    }
    let kd: Vec<usize> = k1.iter().map(Vec::len).collect();
    if kd != k2.iter().map(Vec::len).collect::<Vec<_>>() {
        return Err(StokesError::InvariantViolated(
            "kernel dimensions of the two families differ".into(),
        ));
    }
    let b1 = block_basis(&dd, &k1);
    let b2 = block_basis(&dd, &k2);
    let ty = sub_type::<S>(&union, &d.ty.theta0, &kd);
    if ty.is_zero_object() {
        return Ok(StokesData::zero(d.ty.theta0.clone()));
    }
    let sigma = linalg::solve(&b2, &(&d.sigma * &b1), tol)?;
    let sigma_prime = linalg::solve(&b2, &(&d.sigma_prime * &b1), tol)?;
    Ok(StokesData::new(ty, sigma, sigma_prime))
}

/// Cokernel of a morphism `d → e`, as Stokes data on the factors of `e`.
pub fn cokernel_object<S: Scalar>(
    d: &StokesData<S>,
    e: &StokesData<S>,
    m: &Morphism<S>,
    tol: &Tolerance,
) -> Result<StokesData<S>> {
    let (union, dd, ed) = align(d, e, tol)?;
    let (d_off, e_off) = (offsets_of(&dd), offsets_of(&ed));
    let mut q1 = Vec::new();
    let mut q2 = Vec::new();
    for c in 0..union.len() {
        let blk = |l: &Matrix<S>| l.block(e_off[c], d_off[c], ed[c], dd[c]).transpose();
        q1.push(linalg::kernel_basis(&blk(&m.lambda1), tol));
        q2.push(linalg::kernel_basis(&blk(&m.lambda2), tol));
    }
    let qd: Vec<usize> = q1.iter().map(Vec::len).collect();
    if qd != q2.iter().map(Vec::len).collect::<Vec<_>>() {
        return Err(StokesError::InvariantViolated(
            "cokernel dimensions of the two families differ".into(),
        ));
    }
    let ty = sub_type::<S>(&union, &d.ty.theta0, &qd);
    if ty.is_zero_object() {
        return Ok(StokesData::zero(d.ty.theta0.clone()));
    }
    // quotient maps as rows: q · x
    let p1 = block_basis(&ed, &q1).transpose();
    let p2 = block_basis(&ed, &q2).transpose();
    let induced = |s: &Matrix<S>| -> Result<Matrix<S>> {
        let rhs = (&p2 * s).transpose();
        Ok(linalg::solve(&p1.transpose(), &rhs, tol)?.transpose())
    };
    Ok(StokesData::new(
        ty,
        induced(&e.sigma)?,
        induced(&e.sigma_prime)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{GaussianRational, Rational, RealScalar};

    fn q(n: i64) -> Rational {
        <Rational as RealScalar>::from_i64(n)
    }

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(q(re), q(im))
    }

    fn dir0() -> Direction<Rational> {
        Direction::new(q(1), q(0)).unwrap()
    }

    fn ty(factors: &[i64], dims: &[usize]) -> StokesType<Rational> {
        StokesType::new(
            factors.iter().map(|&c| Factor::real(q(c))).collect(),
            dims.to_vec(),
            dir0(),
            &Tolerance::default(),
        )
        .unwrap()
        .0
    }

    fn gm(rows: &[&[(i64, i64)]]) -> Matrix<GaussianRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| g(a, b)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn upper_example() -> StokesData<GaussianRational> {
        StokesData::skew(
            ty(&[0, 1], &[1, 1]),
            gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]),
        )
    }

    #[test]
    fn identity_data_is_valid() {
        let tol = Tolerance::default();
        let d = StokesData::<GaussianRational>::identity(ty(&[0, 1, 2], &[2, 1, 3]));
        assert!(d.validate(&tol).is_valid());
    }

    #[test]
    fn singular_diagonal_block_cites_clause() {
        let tol = Tolerance::default();
        let mut d = StokesData::<GaussianRational>::identity(ty(&[0, 1], &[1, 1]));
        d.sigma[(1, 1)] = g(0, 0);
        let r = d.validate(&tol);
        assert_eq!(r.clauses(), vec![CLAUSE_DIAG]);
        assert_eq!(r.violations[0].block, Some((1, 1)));
    }

    #[test]
    fn upper_block_violates_triangularity() {
        let tol = Tolerance::default();
        let mut d = StokesData::<GaussianRational>::identity(ty(&[0, 1], &[1, 1]));
        d.sigma[(0, 1)] = g(1, 0);
        let r = d.validate(&tol);
        assert_eq!(r.clauses(), vec![CLAUSE_TRI_LE]);
        assert_eq!(r.violations[0].block, Some((0, 1)));
    }

    #[test]
    fn monodromy_examples() {
        let tol = Tolerance::default();
        let id = StokesData::<GaussianRational>::identity(ty(&[0, 1], &[2, 1]));
        let m = id.monodromy(&tol).unwrap();
        assert_eq!(m.t1, Matrix::identity(3));
        assert_eq!(m.eigenvalue_one_dim, 3);

        let m = upper_example().monodromy(&tol).unwrap();
        assert_eq!(m.t1, gm(&[&[(-1, 0), (-1, 0)], &[(1, 0), (0, 0)]]));
        assert_eq!(m.eigenvalue_one_dim, 0);

        let d = StokesData::skew(
            ty(&[0, 1], &[1, 1]),
            gm(&[&[(1, 0), (0, 0)], &[(0, 0), (0, 1)]]),
        );
        let m = d.monodromy(&tol).unwrap();
        assert_eq!(m.t1, gm(&[&[(-1, 0), (0, 0)], &[(0, 0), (1, 0)]]));
        assert_eq!(m.graded, vec![gm(&[&[(-1, 0)]]), gm(&[&[(1, 0)]])]);
        assert_eq!(m.eigenvalue_one_dim, 1);
    }

    #[test]
    fn iota_examples() {
        let tol = Tolerance::default();
        let z = StokesData::<GaussianRational>::identity(ty(&[0], &[1]));
        let i = z.iota(&tol).unwrap();
        assert_eq!(i.sigma, Matrix::identity(1));
        assert_eq!(i.ty.factors, vec![Factor::zero()]);
        assert!(i
            .ty
            .theta0
            .same_as(&Direction::new(q(-1), q(0)).unwrap(), &tol));

        let d = upper_example();
        let i = d.iota(&tol).unwrap();
        assert_eq!(i.sigma, gm(&[&[(1, 0), (0, 0)], &[(-1, 0), (1, 0)]]));
        assert_eq!(i.sigma_prime, gm(&[&[(-1, 0), (1, 0)], &[(0, 0), (-1, 0)]]));
        assert_eq!(i.ty.factors, vec![Factor::real(q(0)), Factor::real(q(-1))]);
        assert_eq!(i.iota(&tol).unwrap(), d);
    }

    #[test]
    fn dual_examples() {
        let tol = Tolerance::default();
        let id = StokesData::<GaussianRational>::identity(ty(&[0, 1, 3], &[1, 2, 1]));
        let du = id.dualize(&tol).unwrap();
        assert_eq!(du.ty.dims, vec![1, 2, 1]);
        assert_eq!(
            du.ty.factors,
            vec![Factor::real(q(-3)), Factor::real(q(-1)), Factor::real(q(0))]
        );
        assert_eq!(du.sigma, Matrix::identity(4));

        let d = upper_example();
        let du = d.dualize(&tol).unwrap();
        assert_eq!(du.dualize(&tol).unwrap(), d);
        // graded pieces dualize blockwise
        for i in 0..2 {
            let orig = d.block(&d.sigma, i, i);
            let j = 1 - i;
            assert_eq!(
                du.block(&du.sigma, j, j),
                linalg::inverse(&orig, &tol).unwrap().transpose()
            );
        }
    }

    #[test]
    fn hom_examples() {
        let tol = Tolerance::default();
        let d = upper_example();
        let h = hom_space(&d, &d, &tol).unwrap();
        assert!(!h.is_empty());
        assert!(h.iter().all(|m| d.is_morphism(&d, m, &tol)));
        // the identity lies in the span
        let t = ty(&[0], &[1]);
        let a = StokesData::skew(t.clone(), gm(&[&[(2, 0)]]));
        let b = StokesData::skew(t, gm(&[&[(3, 0)]]));
        // both have monodromy −1, so λ1 = 2, λ2 = 3 intertwines them
        let h = hom_space(&a, &b, &tol).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(
            h[0].lambda2[(0, 0)].clone() * g(2, 0),
            g(3, 0) * h[0].lambda1[(0, 0)].clone()
        );
        assert_eq!(hom_space(&a, &a, &tol).unwrap().len(), 1);
        let c = StokesData::skew(ty(&[0], &[1]), gm(&[&[(0, 1)]]));
        assert_eq!(hom_space(&a, &c, &tol).unwrap().len(), 0);
    }

    #[test]
    fn hom_rejects_other_direction() {
        let tol = Tolerance::default();
        let a = StokesData::<GaussianRational>::identity(ty(&[0], &[1]));
        let mut b = a.clone();
        b.ty.theta0 = Direction::new(q(0), q(1)).unwrap();
        assert!(matches!(
            hom_space(&a, &b, &tol),
            Err(StokesError::TypeMismatch(_))
        ));
    }

    #[test]
    fn direct_sum_examples() {
        let tol = Tolerance::default();
        let d = upper_example();
        let z = StokesData::zero(dir0());
        assert_eq!(direct_sum(&d, &z, &tol).unwrap(), d);
        assert_eq!(direct_sum(&z, &d, &tol).unwrap(), d);
        let t = ty(&[0], &[1]);
        let a = StokesData::skew(t.clone(), gm(&[&[(2, 0)]]));
        let b = StokesData::skew(t, gm(&[&[(0, 1)]]));
        let s = direct_sum(&a, &b, &tol).unwrap();
        assert_eq!(s.ty.dims, vec![2]);
        assert_eq!(s.sigma, gm(&[&[(2, 0), (0, 0)], &[(0, 0), (0, 1)]]));
        assert!(s.validate(&tol).is_valid());
    }

    #[test]
    fn kernel_and_cokernel_of_projection() {
        let tol = Tolerance::default();
        let t = ty(&[0], &[1]);
        let a = StokesData::skew(t.clone(), gm(&[&[(2, 0)]]));
        let b = StokesData::skew(t, gm(&[&[(0, 1)]]));
        let s = direct_sum(&a, &b, &tol).unwrap();
        let proj = Morphism {
            lambda1: gm(&[&[(1, 0), (0, 0)]]),
            lambda2: gm(&[&[(1, 0), (0, 0)]]),
        };
        assert!(s.is_morphism(&a, &proj, &tol));
        let k = kernel_object(&s, &a, &proj, &tol).unwrap();
        assert_eq!(k.sigma, gm(&[&[(0, 1)]]));
        let c = cokernel_object(&s, &a, &proj, &tol).unwrap();
        assert!(c.ty.is_zero_object());
        let incl = Morphism {
            lambda1: gm(&[&[(1, 0)], &[(0, 0)]]),
            lambda2: gm(&[&[(1, 0)], &[(0, 0)]]),
        };
        assert!(a.is_morphism(&s, &incl, &tol));
        let c = cokernel_object(&a, &s, &incl, &tol).unwrap();
        assert_eq!(c.sigma, gm(&[&[(0, 1)]]));
        assert!(c.validate(&tol).is_valid());
    }
}
