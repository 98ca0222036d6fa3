//! Sesquilinear pairings on Stokes data and the positivity certificate.
//!
//! All routines work in the gauge where the pairing between the two space
//! families is the identity matrix: `h(x, ȳ) = ᵗx·ȳ` for `x` in the first
//! family and `y` in the second. [`normalize_pairing`] moves any compatible
//! block-diagonal pairing into this gauge.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::linalg::{self, Definiteness, HermitianReport};
use crate::matrix::Matrix;
use crate::order::Factor;
use crate::scalar::{imaginary_unit, Scalar, Tolerance};
use crate::stokes::{direct_sum, StokesData, StokesType};

fn is_block_diagonal<S: Scalar>(m: &Matrix<S>, dims: &[usize], tol: &Tolerance) -> bool {
    let scale = m.frobenius_norm();
    let mut off = 0;
    let n = m.rows();
    for &d in dims {
        for r in off..off + d {
            for c in (0..off).chain(off + d..n) {
                if !m[(r, c)].is_negligible(scale, tol) {
                    return false;
                }
            }
        }
        off += d;
    }
    true
}

/// `ᵗΣ⁻¹·G·Σ̄′ − ᵗΣ′⁻¹·G·Σ̄`, the defect of compatibility of a pairing `G`.
pub fn compatibility_defect<S: Scalar>(
    d: &StokesData<S>,
    gram12: &Matrix<S>,
    tol: &Tolerance,
) -> Result<Matrix<S>> {
    let lhs = &(&linalg::inverse(&d.sigma.transpose(), tol)? * gram12) * &d.sigma_prime.conj();
    let rhs = &(&linalg::inverse(&d.sigma_prime.transpose(), tol)? * gram12) * &d.sigma.conj();
    Ok(&lhs - &rhs)
}

/// Changes basis on the first space family so that the pairing becomes the identity.
pub fn normalize_pairing<S: Scalar>(
    d: &StokesData<S>,
    gram12: &Matrix<S>,
    tol: &Tolerance,
) -> Result<StokesData<S>> {
    d.ensure_valid(tol)?;
    let n = d.total();
    if gram12.rows() != n || gram12.cols() != n {
        return Err(StokesError::BadPairing(format!(
            "gram12 is {}x{}, expected {n}x{n}",
            gram12.rows(),
            gram12.cols()
        )));
    }
    if !is_block_diagonal(gram12, &d.ty.dims, tol) {
        return Err(StokesError::BadPairing(
            "gram12 is not block-diagonal".into(),
        ));
    }
    for i in 0..d.ty.n_factors() {
        let b = d.block(gram12, i, i);
        if linalg::rank(&b, tol) < b.rows() {
            return Err(StokesError::BadPairing(format!("block {i} is singular")));
        }
    }
    let defect = compatibility_defect(d, gram12, tol)?;
    let scale = d.sigma.frobenius_norm() + d.sigma_prime.frobenius_norm() + gram12.frobenius_norm();
    if !defect.is_negligible(scale, tol) {
        return Err(StokesError::IncompatiblePairing {
            residual: defect.frobenius_norm(),
        });
    }
    let p = linalg::inverse(&gram12.transpose(), tol)?;
    Ok(StokesData::new(
        d.ty.clone(),
        &d.sigma * &p,
        &d.sigma_prime * &p,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReport {
    pub is_skew: bool,
    /// `‖Σ′ + Σ†‖_F`.
    pub residual: f64,
    /// Whether `ᵗΣ⁻¹Σ̄′` and `ᵗΣ′⁻¹Σ̄` are both `−I` (checked only when skew).
    pub compatibility_is_minus_identity: Option<bool>,
}

pub fn check_iota_skew<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<SkewReport> {
    d.ensure_valid(tol)?;
    let defect = &d.sigma_prime + &d.sigma.adjoint();
    let residual = defect.frobenius_norm();
    let scale = d.sigma.frobenius_norm() + d.sigma_prime.frobenius_norm();
    let is_skew = defect.is_negligible(scale, tol);
    let compatibility_is_minus_identity = if is_skew {
        let n = d.total();
        let minus_id = -&Matrix::<S>::identity(n);
        let lhs = &linalg::inverse(&d.sigma.transpose(), tol)? * &d.sigma_prime.conj();
        let rhs = &linalg::inverse(&d.sigma_prime.transpose(), tol)? * &d.sigma.conj();
        Some(lhs.approx_eq(&minus_id, tol) && rhs.approx_eq(&minus_id, tol))
    } else {
        None
    };
    Ok(SkewReport {
        is_skew,
        residual,
        compatibility_is_minus_identity,
    })
}

/// The Hermitian form induced on the image of `can₁ = I − T₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedForm<S> {
    pub can1: Matrix<S>,
    /// Coordinates whose unit vectors span a complement of `ker can₁`.
    pub pivots: Vec<usize>,
    pub param_basis: Vec<Vec<S>>,
    /// `can₁` applied to the parameter basis.
    pub f_basis: Vec<Vec<S>>,
    /// `gram[a, b] = ᵗX_a · conj(Σ − Σ′) · X̄_b`.
    pub gram: Matrix<S>,
}

pub fn induced_form_on_f<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<InducedForm<S>> {
    d.ensure_valid(tol)?;
    let n = d.total();
    let t1 = &linalg::inverse(&d.sigma, tol)? * &d.sigma_prime;
    let can1 = &Matrix::identity(n) - &t1;
    let pivots = S::pivot_columns(&can1, tol);
    let param_basis: Vec<Vec<S>> = pivots
        .iter()
        .map(|&p| {
            let mut e = vec![S::zero(); n];
            e[p] = S::one();
            e
        })
        .collect();
    let f_basis = pivots.iter().map(|&p| can1.column(p)).collect();
    let diff = &d.sigma - &d.sigma_prime;
    let gram = Matrix::from_fn(pivots.len(), pivots.len(), |a, b| {
        diff[(pivots[a], pivots[b])].conj()
    });
    Ok(InducedForm {
        can1,
        pivots,
        param_basis,
        f_basis,
        gram,
    })
}

/// `K_c` for one factor, in coordinates local to the factor's block.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpace<S: Scalar> {
    pub index: usize,
    pub factor: Factor<S::Real>,
    pub basis: Vec<Vec<S>>,
    /// Matrix of `h_K(x, ȳ) = ᵗx·Σ̄·ȳ` on the basis, i.e. `conj(B†·Σ_cc·B)`.
    pub h_k: Matrix<S>,
}

impl<S: Scalar> KSpace<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `K_c = {v ∈ block c : Σv = Σ′v, Σv supported in block c}` for every factor.
///
/// When `Σ′ = −Σ†` this also checks that `K_c = ker(Σ + Σ†) ∩ block c` and that
/// every `h_K` is skew-Hermitian.
pub fn k_spaces<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<Vec<KSpace<S>>> {
    let skew = check_iota_skew(d, tol)?.is_skew;
    let n = d.total();
    let diff = &d.sigma - &d.sigma_prime;
    let h = &d.sigma + &d.sigma.adjoint();
    let mut out = Vec::with_capacity(d.ty.n_factors());
    for (i, factor) in d.ty.factors.iter().enumerate() {
        let range = d.ty.block_range(i);
        let cols: Vec<usize> = range.clone().collect();
        let others: Vec<usize> = (0..n).filter(|r| !range.contains(r)).collect();
        let all: Vec<usize> = (0..n).collect();
        let system = diff
            .submatrix(&all, &cols)
            .vstack(&d.sigma.submatrix(&others, &cols));
        let basis = linalg::kernel_basis(&system, tol);
        let b = Matrix::from_columns(cols.len(), &basis);
        let s_cc = d.block(&d.sigma, i, i);
        let h_k = (&(&b.adjoint() * &s_cc) * &b).conj();
        if skew {
            let radical = linalg::kernel_basis(&h.submatrix(&all, &cols), tol);
            if !linalg::same_span(cols.len(), &basis, &radical, tol) {
                return Err(StokesError::InvariantViolated(format!(
                    "K at factor {i} differs from the radical of Σ + Σ† in that block"
                )));
            }
            let sym = &h_k + &h_k.adjoint();
            if !sym.is_negligible(h_k.frobenius_norm(), tol) {
                return Err(StokesError::InvariantViolated(format!(
                    "form on K at factor {i} is not skew-Hermitian"
                )));
            }
        }
        out.push(KSpace {
            index: i,
            factor: factor.clone(),
            basis,
            h_k,
        });
    }
    Ok(out)
}

/// One summand `(K_c, S(K_c), S, S)` split off by [`split_minimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrivialSummand<S: Scalar> {
    pub index: usize,
    pub factor: Factor<S::Real>,
    pub rank: usize,
    pub sigma_block: Matrix<S>,
    pub sigma_prime_block: Matrix<S>,
}

impl<S: Scalar> TrivialSummand<S> {
    pub fn as_data(&self, ty: &StokesType<S::Real>) -> StokesData<S> {
        StokesData::new(
            StokesType {
                factors: vec![self.factor.clone()],
                theta0: ty.theta0.clone(),
                dims: vec![self.rank],
            },
            self.sigma_block.clone(),
            self.sigma_prime_block.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<S: Scalar> {
    pub trivial: Vec<TrivialSummand<S>>,
    pub minimal: StokesData<S>,
    /// Block-diagonal basis change `P` of the first family: within each block,
    /// the complement of `K_c` first, then `K_c`. The second family changes by `P^{-†}`.
    pub change_of_basis: Matrix<S>,
}

/// Splits off the summands supported on the `K_c`, leaving a minimal remainder.
pub fn split_minimal<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<SplitResult<S>> {
    let skew = check_iota_skew(d, tol)?;
    if !skew.is_skew {
        return Err(StokesError::NotSkew {
            residual: skew.residual,
        });
    }
    let ks = k_spaces(d, tol)?;
    let k = d.ty.n_factors();
    let mut p_blocks = Vec::with_capacity(k);
    let mut comp_dims = Vec::with_capacity(k);
    for ks_c in &ks {
        let i = ks_c.index;
        let dc = d.ty.dims[i];
        if ks_c.dim() == 0 {
            p_blocks.push(Matrix::identity(dc));
            comp_dims.push(dc);
            continue;
        }
        if linalg::rank(&ks_c.h_k, tol) < ks_c.dim() {
            return Err(StokesError::DegenerateKForm(i));
        }
        let b = Matrix::from_columns(dc, &ks_c.basis);
        let image = &d.block(&d.sigma, i, i) * &b;
        let comp = linalg::kernel_basis(&image.adjoint(), tol);
        if comp.len() + ks_c.dim() != dc {
            return Err(StokesError::InvariantViolated(format!(
                "complement of K at factor {i} has wrong dimension"
            )));
        }
        let mut cols = comp.clone();
        cols.extend(ks_c.basis.iter().cloned());
        p_blocks.push(Matrix::from_columns(dc, &cols));
        comp_dims.push(comp.len());
    }
    let p = Matrix::block_diagonal(&p_blocks);
    let ph = p.adjoint();
    let s_split = &(&ph * &d.sigma) * &p;
    let sp_split = &(&ph * &d.sigma_prime) * &p;

    // coordinate classes: minimal part, and one trivial group per factor
    let offsets = d.ty.offsets();
    let mut minimal_idx = Vec::new();
    let mut trivial_idx: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        let o = offsets[i];
        minimal_idx.extend(o..o + comp_dims[i]);
        trivial_idx.push((o + comp_dims[i]..o + d.ty.dims[i]).collect());
    }
    let mut group = vec![usize::MAX; d.total()];
    for (g, idx) in trivial_idx.iter().enumerate() {
        for &x in idx {
            group[x] = g;
        }
    }
    for m in [&s_split, &sp_split] {
        let scale = m.frobenius_norm();
        for r in 0..d.total() {
            for c in 0..d.total() {
                if group[r] != group[c] && !m[(r, c)].is_negligible(scale, tol) {
                    return Err(StokesError::InvariantViolated(format!(
                        "split matrix is not block-diagonal at ({r}, {c})"
                    )));
                }
            }
        }
    }

    let minimal = {
        let keep: Vec<usize> = (0..k).filter(|&i| comp_dims[i] > 0).collect();
        if keep.is_empty() {
            StokesData::zero(d.ty.theta0.clone())
        } else {
            StokesData::new(
                StokesType {
                    factors: keep.iter().map(|&i| d.ty.factors[i].clone()).collect(),
                    theta0: d.ty.theta0.clone(),
                    dims: keep.iter().map(|&i| comp_dims[i]).collect(),
                },
                s_split.submatrix(&minimal_idx, &minimal_idx),
                sp_split.submatrix(&minimal_idx, &minimal_idx),
            )
        }
    };
    minimal.ensure_valid(tol)?;
    if !minimal.ty.is_zero_object() && k_spaces(&minimal, tol)?.iter().any(|x| x.dim() > 0) {
        return Err(StokesError::InvariantViolated(
            "minimal part still has a nonzero K".into(),
        ));
    }
    let trivial = ks
        .iter()
        .filter(|x| x.dim() > 0)
        .map(|x| {
            let idx = &trivial_idx[x.index];
            TrivialSummand {
                index: x.index,
                factor: x.factor.clone(),
                rank: x.dim(),
                sigma_block: s_split.submatrix(idx, idx),
                sigma_prime_block: sp_split.submatrix(idx, idx),
            }
        })
        .collect();
    Ok(SplitResult {
        trivial,
        minimal,
        change_of_basis: p,
    })
}

/// Direct sum of the minimal part and the trivial summands, transported back
/// through the change of basis.
pub fn reassemble<S: Scalar>(split: &SplitResult<S>, tol: &Tolerance) -> Result<StokesData<S>> {
    let mut acc = split.minimal.clone();
    for t in &split.trivial {
        acc = direct_sum(&acc, &t.as_data(&split.minimal.ty), tol)?;
    }
    let pinv = linalg::inverse(&split.change_of_basis, tol)?;
    let pinv_h = pinv.adjoint();
    let sigma = &(&pinv_h * &acc.sigma) * &pinv;
    let sigma_prime = &(&pinv_h * &acc.sigma_prime) * &pinv;
    Ok(StokesData::new(acc.ty, sigma, sigma_prime))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `Σ′ = −Σ†`.
    SkewHermitian,
    /// `Σ + Σ†` positive semidefinite.
    PositiveSemidefinite,
    /// `K_c = 0` or `i·h_K` positive definite, for every factor.
    TrivialSummandPositivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedPurePolarized,
    Failed { clause: Clause, reason: String },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedPurePolarized)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KReport<S: Scalar> {
    pub index: usize,
    pub factor: Factor<S::Real>,
    pub dim: usize,
    pub h_k: Matrix<S>,
    /// Class of `i·h_K`, evaluated in the complexified domain.
    pub i_h_k_class: Option<Definiteness>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    /// `(factor index, rank)` of each trivial summand.
    pub trivial: Vec<(usize, usize)>,
    pub minimal_dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<S: Scalar> {
    pub skew: SkewReport,
    pub h: Matrix<S>,
    pub h_report: HermitianReport<S>,
    pub k_reports: Vec<KReport<S>>,
    pub split: Option<SplitSummary>,
    /// Gram matrix of the induced form on `F` of the minimal part (certified runs only).
    pub induced_gram: Option<Matrix<S>>,
    pub verdict: Verdict,
}

pub fn certify<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<Certificate<S>> {
    let skew = check_iota_skew(d, tol)?;
    let h = &d.sigma + &d.sigma.adjoint();
    let h_report = linalg::hermitian_classify(&h, tol)?;
    let mut verdict = Verdict::CertifiedPurePolarized;
    if !skew.is_skew {
        verdict = Verdict::Failed {
            clause: Clause::SkewHermitian,
            reason: format!("‖Σ′ + Σ†‖ = {:.3e}", skew.residual),
        };
    } else if !h_report.class.is_psd() {
        verdict = Verdict::Failed {
            clause: Clause::PositiveSemidefinite,
            reason: format!("Σ + Σ† is {}", h_report.class.label()),
        };
    }

    let mut k_reports = Vec::new();
    if skew.is_skew {
        let i = imaginary_unit::<S>();
        for ks in k_spaces(d, tol)? {
            let (class, ok) = if ks.dim() == 0 {
                (None, true)
            } else {
                let ih = ks.h_k.map(|x| i.clone() * x.complexify());
                match linalg::hermitian_classify(&ih, tol) {
                    Ok(r) => (Some(r.class), r.class == Definiteness::PositiveDefinite),
                    Err(_) => (None, false),
                }
            };
            if !ok && verdict.is_certified() {
                verdict = Verdict::Failed {
                    clause: Clause::TrivialSummandPositivity,
                    reason: format!(
                        "i·h_K at factor {} is {}",
                        ks.factor,
                        class.map_or("not Hermitian", Definiteness::label)
                    ),
                };
            }
            k_reports.push(KReport {
                index: ks.index,
                dim: ks.dim(),
                factor: ks.factor,
                h_k: ks.h_k,
                i_h_k_class: class,
                ok,
            });
        }
    }

    let mut split = None;
    let mut induced_gram = None;
    if skew.is_skew {
        if let Ok(s) = split_minimal(d, tol) {
            split = Some(SplitSummary {
                trivial: s.trivial.iter().map(|t| (t.index, t.rank)).collect(),
                minimal_dims: if s.minimal.ty.is_zero_object() {
                    Vec::new()
                } else {
                    s.minimal.ty.dims.clone()
                },
            });
            if verdict.is_certified() && !s.minimal.ty.is_zero_object() {
                let form = induced_form_on_f(&s.minimal, tol)?;
                let report = linalg::hermitian_classify(&form.gram, tol)?;
                if report.class != Definiteness::PositiveDefinite {
                    return Err(StokesError::InvariantViolated(format!(
                        "induced form on F of the minimal part is {}",
                        report.class.label()
                    )));
                }
                induced_gram = Some(form.gram);
            }
        }
    }
    Ok(Certificate {
        skew,
        h,
        h_report,
        k_reports,
        split,
        induced_gram,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Direction;
    use crate::scalar::{GaussianRational, Rational, RealScalar};

    fn q(n: i64) -> Rational {
        <Rational as RealScalar>::from_i64(n)
    }

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(q(re), q(im))
    }

    fn gm(rows: &[&[(i64, i64)]]) -> Matrix<GaussianRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| g(a, b)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn ty(n: usize) -> StokesType<Rational> {
        StokesType {
            factors: (0..n as i64).map(|c| Factor::real(q(c))).collect(),
            theta0: Direction::new(q(1), q(0)).unwrap(),
            dims: vec![1; n],
        }
    }

    fn scalar(sigma: (i64, i64), sigma_prime: (i64, i64)) -> StokesData<GaussianRational> {
        StokesData::new(ty(1), gm(&[&[sigma]]), gm(&[&[sigma_prime]]))
    }

    #[test]
    fn skew_examples() {
        let tol = Tolerance::default();
        let r = check_iota_skew(&scalar((2, 0), (-2, 0)), &tol).unwrap();
        assert!(r.is_skew);
        assert_eq!(r.compatibility_is_minus_identity, Some(true));
        assert!(
            check_iota_skew(&scalar((0, 1), (0, 1)), &tol)
                .unwrap()
                .is_skew
        );
        let id = StokesData::<GaussianRational>::identity(ty(3));
        let r = check_iota_skew(&id, &tol).unwrap();
        assert!(!r.is_skew);
        assert!((r.residual - 2.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn induced_form_examples() {
        let tol = Tolerance::default();
        let f = induced_form_on_f(&StokesData::<GaussianRational>::identity(ty(2)), &tol).unwrap();
        assert!(f.can1.is_zero());
        assert_eq!(f.gram.rows(), 0);
        let f = induced_form_on_f(&scalar((2, 0), (-2, 0)), &tol).unwrap();
        assert_eq!(f.can1, gm(&[&[(2, 0)]]));
        assert_eq!(f.gram, gm(&[&[(4, 0)]]));
        let d = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        let f = induced_form_on_f(&d, &tol).unwrap();
        assert_eq!(f.pivots, vec![0, 1]);
        let r = linalg::hermitian_classify(&f.gram, &tol).unwrap();
        assert_eq!(r.class, Definiteness::PositiveDefinite);
    }

    #[test]
    fn k_space_examples() {
        let tol = Tolerance::default();
        let d = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(0, 0), (0, 1)]]));
        let ks = k_spaces(&d, &tol).unwrap();
        assert_eq!(ks[0].dim(), 0);
        assert_eq!(ks[1].dim(), 1);
        assert_eq!(ks[1].h_k, gm(&[&[(0, -1)]]));
        let id = StokesData::<GaussianRational>::identity(ty(2));
        assert!(k_spaces(&id, &tol).unwrap().iter().all(|k| k.dim() == 1));
        let pd = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        assert!(k_spaces(&pd, &tol).unwrap().iter().all(|k| k.dim() == 0));
    }

    #[test]
    fn split_examples() {
        let tol = Tolerance::default();
        let pd = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        let s = split_minimal(&pd, &tol).unwrap();
        assert!(s.trivial.is_empty());
        assert_eq!(s.minimal, pd);

        let d = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(0, 0), (0, 1)]]));
        let s = split_minimal(&d, &tol).unwrap();
        assert_eq!(s.trivial.len(), 1);
        assert_eq!(s.trivial[0].index, 1);
        assert_eq!(s.trivial[0].sigma_block, gm(&[&[(0, 1)]]));
        assert_eq!(s.minimal.ty.dims, vec![1]);
        assert_eq!(s.minimal.ty.factors, vec![Factor::real(q(0))]);
        assert_eq!(reassemble(&s, &tol).unwrap(), d);
    }

    #[test]
    fn degenerate_k_form_is_an_error() {
        let tol = Tolerance::default();
        // Σ = Σ′ = I on one factor: not skew
        let id = StokesData::<GaussianRational>::identity(ty(1));
        assert!(matches!(
            split_minimal(&id, &tol),
            Err(StokesError::NotSkew { .. })
        ));
    }

    #[test]
    fn certify_examples() {
        let tol = Tolerance::default();
        let c = certify(&scalar((2, 0), (-2, 0)), &tol).unwrap();
        assert!(c.verdict.is_certified());
        assert_eq!(c.induced_gram, Some(gm(&[&[(4, 0)]])));
        let c = certify(&scalar((0, 1), (0, 1)), &tol).unwrap();
        assert!(c.verdict.is_certified());
        assert_eq!(c.k_reports[0].h_k, gm(&[&[(0, -1)]]));
        let c = certify(&scalar((0, -1), (0, -1)), &tol).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::Failed {
                clause: Clause::TrivialSummandPositivity,
                ..
            }
        ));
    }

    #[test]
    fn normalization_restores_identity_gauge() {
        let tol = Tolerance::default();
        let d = StokesData::skew(ty(2), gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        // a pairing G and data (ΣP⁻¹, Σ′P⁻¹) that normalize back to d
        let gram = gm(&[&[(2, 0), (0, 0)], &[(0, 0), (0, 1)]]);
        let pinv = gram.transpose();
        let raw = StokesData::new(d.ty.clone(), &d.sigma * &pinv, &d.sigma_prime * &pinv);
        assert_eq!(normalize_pairing(&raw, &gram, &tol).unwrap(), d);
        let bad = gm(&[&[(1, 0), (1, 0)], &[(0, 0), (1, 0)]]);
        assert!(matches!(
            normalize_pairing(&d, &bad, &tol),
            Err(StokesError::BadPairing(_))
        ));
        let incompatible = gm(&[&[(1, 0), (0, 0)], &[(0, 0), (2, 0)]]);
        assert!(matches!(
            normalize_pairing(&d, &incompatible, &tol),
            Err(StokesError::IncompatiblePairing { .. })
        ));
    }
}
