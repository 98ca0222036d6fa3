//! Čech-level reconstruction on the two-arc cover of the circle.
//!
//! `I1` is the closed arc from `θ₀` counterclockwise to `θ′₀ = θ₀ + π`, slightly
//! thickened, and `I2` the opposite arc; they overlap in small arcs around
//! `θ₀` and `θ′₀`. Sections of `L` on `I1` carry first-family coordinates and on
//! `I2` second-family coordinates. Restrictions to the overlaps are
//!
//! ```text
//! at θ₀:  x1 ↦ x1,      x2 ↦ Σ⁻¹x2
//! at θ′₀: x1 ↦ Σ′x1,    x2 ↦ x2
//! ```
//!
//! The subsheaf `L_{≤c}` and the quotient `L/L_{≤c}` are handled through the
//! graded local model: membership of each block is sampled along the arcs at
//! the Stokes directions of `(c_i, c)` and between them.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::linalg;
use crate::matrix::Matrix;
use crate::order::{self, angle_cmp, Comparison, Direction, Factor};
use crate::pairing;
use crate::scalar::{RealScalar, Scalar, Tolerance};
use crate::stokes::StokesData;

/// `dim L_{≤c,θ}` in the graded local model.
pub fn stalk_dims<S: Scalar>(
    d: &StokesData<S>,
    theta: &Direction<S::Real>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<usize> {
    let mut pts = d.ty.factors.clone();
    if !pts.contains(c) {
        pts.push(c.clone());
    }
    for j in 0..pts.len() {
        for i in 0..j {
            if order::leq_theta(&pts[i], &pts[j], theta, tol) == Comparison::Incomparable {
                return Err(StokesError::OnStokesDirection(
                    pts[i].to_string(),
                    pts[j].to_string(),
                ));
            }
        }
    }
    Ok(d.ty
        .factors
        .iter()
        .zip(&d.ty.dims)
        .filter(|(ci, _)| {
            matches!(
                order::leq_theta(ci, c, theta, tol),
                Comparison::Lt | Comparison::Eq
            )
        })
        .map(|(_, &dim)| dim)
        .sum())
}

/// Direction `x` expressed relative to `start` (rotation by `−start`).
fn relative<R: RealScalar>(start: &Direction<R>, x: &Direction<R>) -> Direction<R> {
    Direction {
        u: x.u.clone() * start.u.clone() + x.v.clone() * start.v.clone(),
        v: x.v.clone() * start.u.clone() - x.u.clone() * start.v.clone(),
    }
}

fn ccw_cmp<R: RealScalar>(start: &Direction<R>, a: &Direction<R>, b: &Direction<R>) -> Ordering {
    angle_cmp(&relative(start, a), &relative(start, b))
}

/// Sample directions along the counterclockwise arc `[start, end]`: the
/// endpoints, every event strictly inside, and one point between consecutive ones.
fn arc_samples<R: RealScalar>(
    start: &Direction<R>,
    end: &Direction<R>,
    events: &[Direction<R>],
) -> Vec<Direction<R>> {
    let zero = Direction::new(R::one(), R::zero()).expect("nonzero");
    let end_rel = relative(start, end);
    let mut inner: Vec<Direction<R>> = events
        .iter()
        .filter(|e| {
            let r = relative(start, e);
            angle_cmp(&r, &zero) == Ordering::Greater && angle_cmp(&r, &end_rel) == Ordering::Less
        })
        .cloned()
        .collect();
    inner.sort_by(|a, b| ccw_cmp(start, a, b));
    inner.dedup_by(|a, b| ccw_cmp(start, a, b) == Ordering::Equal);
    let mut knots = vec![start.clone()];
    knots.extend(inner);
    knots.push(end.clone());
    let mut out = vec![start.clone()];
    for w in knots.windows(2) {
        let mid = w[0].bisect(&w[1]).unwrap_or_else(|| w[0].rot90());
        out.push(mid);
        out.push(w[1].clone());
    }
    out
}

fn runs(flags: &[bool]) -> usize {
    let mut count = 0;
    let mut inside = false;
    for &f in flags {
        if f && !inside {
            count += 1;
        }
        inside = f;
    }
    count
}

/// Section dimensions over the four opens `[I1, I2, overlap at θ₀, overlap at θ′₀]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDims {
    pub sub: [usize; 4],
    pub quotient: [usize; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cohomology {
    pub h0: usize,
    pub h1: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyReport<S: Scalar> {
    pub c: Factor<S::Real>,
    pub sections: SectionDims,
    /// `H^k(S¹, L_{≤c})`.
    pub sub: Cohomology,
    /// `H^k(S¹, L/L_{≤c})`.
    pub quotient: Cohomology,
    /// `H^k(S¹, L)`.
    pub total: Cohomology,
    pub can: Matrix<S>,
    pub dim_f: usize,
    /// Rank of `H¹(L_{≤c}) → H¹(L)`.
    pub restriction_rank: usize,
    /// `dim H¹` and `dim H²` of the vanishing-cycle side, read off the long exact sequence.
    pub h1_f_le_c: usize,
    pub h2_f_le_c: usize,
}

/// Per-block membership data for the cover.
struct Membership {
    /// blocks whose graded piece lies in `L_{≤c}` on all of the open
    sub: [Vec<bool>; 4],
    /// number of components of the complement of `L_{≤c}`-membership on the open
    quotient_runs: [Vec<usize>; 4],
}

fn membership<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<Membership> {
    let theta0 = d.ty.theta0.clone();
    let theta1 = theta0.opposite();
    let k = d.ty.n_factors();
    let mut sub: [Vec<bool>; 4] = Default::default();
    let mut quotient_runs: [Vec<usize>; 4] = Default::default();
    for ci in &d.ty.factors {
        let events: Vec<Direction<S::Real>> = {
            let (a, b) = order::stokes_directions(ci, c)?;
            vec![a, b]
        };
        let arcs = [
            arc_samples(&theta0, &theta1, &events),
            arc_samples(&theta1, &theta0, &events),
            vec![theta0.clone()],
            vec![theta1.clone()],
        ];
        for (slot, samples) in arcs.iter().enumerate() {
            let inside: Vec<bool> = samples
                .iter()
                .map(|t| order::strictly_less(ci, c, t, tol))
                .collect();
            sub[slot].push(inside.iter().all(|&b| b));
            let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
            quotient_runs[slot].push(runs(&outside));
        }
    }
    debug_assert!(sub.iter().all(|v| v.len() == k));
    Ok(Membership { sub, quotient_runs })
}

fn ensure_admissible<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<()> {
    d.ensure_valid(tol)?;
    if !order::is_admissible(&d.ty.factors, c, &d.ty.theta0, tol) {
        return Err(StokesError::NotAdmissible(
            c.to_string(),
            "factors must lie strictly below it at θ₀ and strictly above it at θ₀ + π".into(),
        ));
    }
    Ok(())
}

/// `Σ⁻¹x` computed by solving `Σy = x`.
fn apply_inverse<S: Scalar>(m: &Matrix<S>, x: &Matrix<S>, tol: &Tolerance) -> Result<Matrix<S>> {
    linalg::solve(m, x, tol)
}

/// Čech differential of `L`: `(x1, x2) ↦ (x1 − Σ⁻¹x2, Σ′x1 − x2)`.
fn differential<S: Scalar>(d: &StokesData<S>, tol: &Tolerance) -> Result<Matrix<S>> {
    let n = d.total();
    let id = Matrix::<S>::identity(n);
    let a2 = apply_inverse(&d.sigma, &id, tol)?;
    let top = id.hstack(&-&a2);
    let bottom = d.sigma_prime.hstack(&-&id);
    Ok(top.vstack(&bottom))
}

fn coords(dims: &[usize], blocks: &[bool], base: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut off = base;
    for (&d, &b) in dims.iter().zip(blocks) {
        if b {
            out.extend(off..off + d);
        }
        off += d;
    }
    out
}

fn cohomology_of<S: Scalar>(delta: &Matrix<S>, tol: &Tolerance) -> Cohomology {
    let r = linalg::rank(delta, tol);
    Cohomology {
        h0: delta.cols() - r,
        h1: delta.rows() - r,
    }
}

/// `can : L_{θ′₀} → L_{θ₀}` by the snake-lemma lift.
pub fn can_via_cech<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<Matrix<S>> {
    ensure_admissible(d, c, tol)?;
    let n = d.total();
    let u = Matrix::<S>::identity(n);
    // lift of the global quotient section u: on I1 through Σ′, on I2 as is
    let x1 = apply_inverse(&d.sigma_prime, &u, tol)?;
    let x2 = u.clone();
    let at_theta0 = &x1 - &apply_inverse(&d.sigma, &x2, tol)?;
    let at_theta1 = &(&d.sigma_prime * &x1) - &x2;
    if !at_theta1.is_negligible(1.0 + d.sigma_prime.frobenius_norm(), tol) {
        return Err(StokesError::InvariantViolated(
            "lift does not glue at θ₀ + π".into(),
        ));
    }
    Ok(at_theta0)
}

pub fn cohomology_report<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<CohomologyReport<S>> {
    ensure_admissible(d, c, tol)?;
    let n = d.total();
    let dims = &d.ty.dims;
    let m = membership(d, c, tol)?;
    let sum_if = |flags: &[bool]| -> usize {
        dims.iter()
            .zip(flags)
            .filter(|(_, &f)| f)
            .map(|(&x, _)| x)
            .sum()
    };
    let sum_runs = |r: &[usize]| -> usize { dims.iter().zip(r).map(|(&x, &k)| x * k).sum() };
    let sections = SectionDims {
        sub: [0, 1, 2, 3].map(|s| sum_if(&m.sub[s])),
        quotient: [0, 1, 2, 3].map(|s| sum_runs(&m.quotient_runs[s])),
    };
    if m.quotient_runs.iter().flatten().any(|&r| r > 1) {
        return Err(StokesError::InvariantViolated(
            "quotient has several components on one arc".into(),
        ));
    }

    let delta = differential(d, tol)?;
    let total = cohomology_of(&delta, tol);

    // subcomplex on coordinate subspaces
    let c0_sub: Vec<usize> = [coords(dims, &m.sub[0], 0), coords(dims, &m.sub[1], n)].concat();
    let c1_sub: Vec<usize> = [coords(dims, &m.sub[2], 0), coords(dims, &m.sub[3], n)].concat();
    let c1_rest: Vec<usize> = (0..2 * n).filter(|x| !c1_sub.contains(x)).collect();
    if !delta
        .submatrix(&c1_rest, &c0_sub)
        .is_negligible(1.0 + delta.frobenius_norm(), tol)
    {
        return Err(StokesError::InvariantViolated(
            "differential does not preserve the subsheaf".into(),
        ));
    }
    let sub = cohomology_of(&delta.submatrix(&c1_sub, &c0_sub), tol);

    // quotient complex on the complementary coordinates
    let c0_q: Vec<usize> = (0..2 * n).filter(|x| !c0_sub.contains(x)).collect();
    let c1_q = c1_rest.clone();
    let q_dims = [
        c0_q.iter().filter(|&&x| x < n).count(),
        c0_q.iter().filter(|&&x| x >= n).count(),
        c1_q.iter().filter(|&&x| x < n).count(),
        c1_q.iter().filter(|&&x| x >= n).count(),
    ];
    if q_dims != sections.quotient {
        return Err(StokesError::InvariantViolated(format!(
            "quotient sections {:?} disagree with the graded count {:?}",
            q_dims, sections.quotient
        )));
    }
    let quotient = cohomology_of(&delta.submatrix(&c1_q, &c0_q), tol);

    let can = can_via_cech(d, c, tol)?;
    let dim_f = linalg::rank(&can, tol);

    let incl = Matrix::from_columns(
        2 * n,
        &c1_sub
            .iter()
            .map(|&x| {
                let mut e = vec![S::zero(); 2 * n];
                e[x] = S::one();
                e
            })
            .collect::<Vec<_>>(),
    );
    let rank_delta = linalg::rank(&delta, tol);
    let restriction_rank = linalg::rank(&delta.hstack(&incl), tol) - rank_delta;
    let h1_f_le_c = dim_f;
    let coker = total.h1 - restriction_rank;
    let h2_f_le_c = coker.checked_sub(quotient.h1).ok_or_else(|| {
        StokesError::InvariantViolated("H¹(L/L≤c) exceeds the cokernel of H¹(L≤c) → H¹(L)".into())
    })?;

    let report = CohomologyReport {
        c: c.clone(),
        sections,
        sub,
        quotient,
        total,
        can,
        dim_f,
        restriction_rank,
        h1_f_le_c,
        h2_f_le_c,
    };
    report.check(n)?;
    Ok(report)
}

impl<S: Scalar> CohomologyReport<S> {
    /// Exactness of the long exact sequence, as rank identities.
    fn check(&self, n: usize) -> Result<()> {
        let fail = |what: &str| Err(StokesError::InvariantViolated(what.to_string()));
        if self.sub.h0 != 0 || self.sub.h1 != n {
            return fail("H*(L≤c) is not concentrated in degree one with rank n");
        }
        if self.quotient.h0 != n {
            return fail("H⁰(L/L≤c) does not have rank n");
        }
        if self.total.h0 + self.dim_f != n {
            return fail("H⁰(L) is not the kernel of can");
        }
        if self.restriction_rank + self.dim_f != self.sub.h1 {
            return fail("image of can is not the kernel of H¹(L≤c) → H¹(L)");
        }
        if self.h2_f_le_c != 0 {
            return fail("implied H² is nonzero");
        }
        Ok(())
    }
}

/// Matrices of the pairing `H⁰(L/L≤c) ⊗ conj H¹(ι⁻¹L≤c) → k` evaluated through
/// each sheet of the cover, and their average.
#[derive(Debug, Clone, PartialEq)]
pub struct CechPairing<S> {
    /// Through `I1`: `ᵗΣ′⁻¹·Σ̄`.
    pub first_sheet: Matrix<S>,
    /// Through `I2`: `ᵗΣ⁻¹·Σ̄′`.
    pub second_sheet: Matrix<S>,
    pub averaged: Matrix<S>,
}

pub fn pairing_via_cech<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<CechPairing<S>> {
    ensure_admissible(d, c, tol)?;
    let first_sheet = apply_inverse(&d.sigma_prime.transpose(), &d.sigma.conj(), tol)?;
    let second_sheet = apply_inverse(&d.sigma.transpose(), &d.sigma_prime.conj(), tol)?;
    let half = S::from_real(S::Real::ratio(1, 2));
    let averaged = (&first_sheet + &second_sheet).scale(&half);
    Ok(CechPairing {
        first_sheet,
        second_sheet,
        averaged,
    })
}

/// The induced form on `F_c` through the oracle: `ᵗx′·P·conj(can·x′)` with
/// `x′ = Σ′X` for the parameter basis `X` of the closed-form layer.
pub fn induced_gram_via_cech<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
) -> Result<Matrix<S>> {
    let form = pairing::induced_form_on_f(d, tol)?;
    let x = Matrix::from_columns(d.total(), &form.param_basis);
    let x_prime = &d.sigma_prime * &x;
    let p = pairing_via_cech(d, c, tol)?.averaged;
    let can = can_via_cech(d, c, tol)?;
    let image = (&can * &x_prime).conj();
    Ok(&(&x_prime.transpose() * &p) * &image)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CechCheck {
    pub can_residual: f64,
    pub rank_identity: bool,
    /// Present when the pairing is compatible (`Σ′ = −Σ†`).
    pub pairing_residual: Option<f64>,
    pub first_sheet_residual: Option<f64>,
    /// Relative to `max(1, ‖gram‖)`, since the gram is a long product.
    pub gram_residual: Option<f64>,
    pub passed: bool,
}

/// Two-path comparison of the oracle against the closed forms.
pub fn cech_check<S: Scalar>(
    d: &StokesData<S>,
    c: &Factor<S::Real>,
    tol: &Tolerance,
    abs_tol: f64,
) -> Result<CechCheck> {
    let can = can_via_cech(d, c, tol)?;
    let closed = &linalg::inverse(&d.sigma_prime, tol)? - &linalg::inverse(&d.sigma, tol)?;
    let can_residual = (&can - &closed).frobenius_norm();
    let mono = d.monodromy(tol)?;
    let rank_identity = d.total() - mono.eigenvalue_one_dim == linalg::rank(&closed, tol);
    let within = |r: f64| {
        if S::is_exact() {
            r == 0.0
        } else {
            r <= abs_tol
        }
    };

    let skew = pairing::check_iota_skew(d, tol)?.is_skew;
    let (mut pairing_residual, mut first_sheet_residual, mut gram_residual) = (None, None, None);
    if skew {
        let p = pairing_via_cech(d, c, tol)?;
        let closed_p = &linalg::inverse(&d.sigma.transpose(), tol)? * &d.sigma_prime.conj();
        pairing_residual = Some((&p.averaged - &closed_p).frobenius_norm());
        first_sheet_residual = Some((&p.first_sheet - &closed_p).frobenius_norm());
        let form = pairing::induced_form_on_f(d, tol)?;
        let oracle = induced_gram_via_cech(d, c, tol)?;
        let scale = form.gram.frobenius_norm().max(1.0);
        gram_residual = Some((&oracle - &form.gram).frobenius_norm() / scale);
    }
    let passed = within(can_residual)
        && rank_identity
        && [pairing_residual, first_sheet_residual, gram_residual]
            .iter()
            .flatten()
            .all(|&r| within(r));
    Ok(CechCheck {
        can_residual,
        rank_identity,
        pairing_residual,
        first_sheet_residual,
        gram_residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{GaussianRational, Rational};
    use crate::stokes::StokesType;

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

    fn ty(factors: &[i64], dir: (i64, i64)) -> StokesType<Rational> {
        StokesType {
            factors: factors.iter().map(|&c| Factor::real(q(c))).collect(),
            theta0: Direction::new(q(dir.0), q(dir.1)).unwrap(),
            dims: vec![1; factors.len()],
        }
    }

    #[test]
    fn stalk_dimension_examples() {
        let tol = Tolerance::default();
        let d = StokesData::<GaussianRational>::identity(ty(&[1, 0], (-1, 0)));
        let pi = Direction::new(q(-1), q(0)).unwrap();
        assert_eq!(stalk_dims(&d, &pi, &Factor::real(q(0)), &tol).unwrap(), 2);
        assert_eq!(stalk_dims(&d, &pi, &Factor::real(q(5)), &tol).unwrap(), 0);
        assert_eq!(stalk_dims(&d, &pi, &Factor::real(q(-5)), &tol).unwrap(), 2);
        let up = Direction::new(q(0), q(1)).unwrap();
        assert!(matches!(
            stalk_dims(&d, &up, &Factor::real(q(5)), &tol),
            Err(StokesError::OnStokesDirection(_, _))
        ));
    }

    #[test]
    fn can_examples() {
        let tol = Tolerance::default();
        let t = ty(&[0], (1, 0));
        let c = Factor::real(q(1));
        let same = StokesData::new(t.clone(), gm(&[&[(3, 1)]]), gm(&[&[(3, 1)]]));
        assert!(can_via_cech(&same, &c, &tol).unwrap().is_zero());
        let d = StokesData::new(t, gm(&[&[(2, 0)]]), gm(&[&[(-2, 0)]]));
        assert_eq!(can_via_cech(&d, &c, &tol).unwrap(), gm(&[&[(-1, 0)]]));
        let p = pairing_via_cech(&d, &c, &tol).unwrap();
        assert_eq!(p.averaged, gm(&[&[(-1, 0)]]));
    }

    #[test]
    fn non_admissible_point_is_rejected() {
        let tol = Tolerance::default();
        let d = StokesData::<GaussianRational>::identity(ty(&[0, 1], (1, 0)));
        assert!(matches!(
            can_via_cech(&d, &Factor::real(q(0)), &tol),
            Err(StokesError::NotAdmissible(_, _))
        ));
    }

    #[test]
    fn cohomology_examples() {
        let tol = Tolerance::default();
        let t = ty(&[0, 1], (1, 0));
        let c = order::admissible_point(&t.factors, &t.theta0, &tol).unwrap();
        let id = StokesData::<GaussianRational>::identity(t.clone());
        let r = cohomology_report(&id, &c, &tol).unwrap();
        assert_eq!((r.total.h0, r.dim_f), (2, 0));
        let pd = StokesData::skew(t.clone(), gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        let r = cohomology_report(&pd, &c, &tol).unwrap();
        assert_eq!((r.total.h0, r.dim_f), (0, 2));
        let diag = StokesData::skew(t, gm(&[&[(1, 0), (0, 0)], &[(0, 0), (0, 1)]]));
        let r = cohomology_report(&diag, &c, &tol).unwrap();
        assert_eq!((r.total.h0, r.dim_f), (1, 1));
        assert_eq!(r.sections.sub, [0, 0, 2, 0]);
        assert_eq!(r.sections.quotient, [2, 2, 0, 2]);
        assert_eq!(r.sub, Cohomology { h0: 0, h1: 2 });
    }

    #[test]
    fn check_passes_on_skew_example() {
        let tol = Tolerance::default();
        let t = ty(&[0, 1], (1, 0));
        let c = order::admissible_point(&t.factors, &t.theta0, &tol).unwrap();
        let pd = StokesData::skew(t, gm(&[&[(1, 0), (0, 0)], &[(1, 0), (1, 0)]]));
        let r = cech_check(&pd, &c, &tol, 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.gram_residual, Some(0.0));
    }
}
