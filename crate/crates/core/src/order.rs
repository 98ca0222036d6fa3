//! The half-plane order on exponential factors.
//!
//! For a direction θ, `c <_θ c'` holds when `Re((c - c') e^{-iθ}) < 0`. A
//! direction is stored as a nonzero vector `(u, v)` proportional to
//! `(cos θ, sin θ)`, so the comparison reduces to the sign of
//! `u·Re(c - c') + v·Im(c - c')` and works verbatim over the rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::scalar::{RealScalar, Tolerance};

/// A point of the complex plane with coordinates in an ordered field.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<R> {
    pub re: R,
    pub im: R,
}

impl<R: RealScalar> Factor<R> {
    pub fn new(re: R, im: R) -> Self {
        Factor { re, im }
    }

    pub fn zero() -> Self {
        Factor::new(R::zero(), R::zero())
    }

    pub fn real(re: R) -> Self {
        Factor::new(re, R::zero())
    }

    pub fn norm(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Coordinate of `self` along a direction: `u·Re + v·Im`.
    pub fn key(&self, dir: &Direction<R>) -> R {
        dir.u.clone() * self.re.clone() + dir.v.clone() * self.im.clone()
    }
}

impl<R: RealScalar> Sub for &Factor<R> {
    type Output = Factor<R>;

    fn sub(self, rhs: &Factor<R>) -> Factor<R> {
        Factor::new(
            self.re.clone() - rhs.re.clone(),
            self.im.clone() - rhs.im.clone(),
        )
    }
}

impl<R: RealScalar> Neg for &Factor<R> {
    type Output = Factor<R>;

    fn neg(self) -> Factor<R> {
        Factor::new(-self.re.clone(), -self.im.clone())
    }
}

impl<R: RealScalar> fmt::Display for Factor<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re.to_text())
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im.to_text())
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re.to_text(), (-self.im.clone()).to_text())
        } else {
            write!(f, "{}+{}i", self.re.to_text(), self.im.to_text())
        }
    }
}

/// A direction on the circle, represented by a nonzero vector up to positive scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction<R> {
    pub u: R,
    pub v: R,
}

impl<R: RealScalar> Direction<R> {
    /// `None` for the zero vector.
    pub fn new(u: R, v: R) -> Option<Self> {
        if u.is_zero() && v.is_zero() {
            None
        } else {
            Some(Direction { u, v })
        }
    }

    /// Direction at angle `theta` (radians). Exact domains store the exact binary
    /// value of `(cos θ, sin θ)`, so prefer [`Direction::new`] there.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        let u = R::from_f64(snap(c)).expect("finite angle");
        let v = R::from_f64(snap(s)).expect("finite angle");
        Direction { u, v }
    }

    /// `θ + π`.
    pub fn opposite(&self) -> Self {
        Direction {
            u: -self.u.clone(),
            v: -self.v.clone(),
        }
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        let a = self.v.to_f64().atan2(self.u.to_f64());
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn norm(&self) -> f64 {
        self.u.to_f64().hypot(self.v.to_f64())
    }

    /// Positive proportionality (equality of directions).
    pub fn same_as(&self, other: &Self, tol: &Tolerance) -> bool {
        let cross = self.u.clone() * other.v.clone() - self.v.clone() * other.u.clone();
        let dot = self.u.clone() * other.u.clone() + self.v.clone() * other.v.clone();
        let scale = self.norm() * other.norm();
        cross.sign_tol(scale, tol) == 0 && dot.sign_tol(scale, tol) > 0
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn rot90(&self) -> Self {
        Direction {
            u: -self.v.clone(),
            v: self.u.clone(),
        }
    }

    /// Sum of two direction vectors; `None` if they are antipodal.
    pub fn bisect(&self, other: &Self) -> Option<Self> {
        Direction::new(
            self.u.clone() + other.u.clone(),
            self.v.clone() + other.v.clone(),
        )
    }
}

impl<R: RealScalar> fmt::Display for Direction<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if R::EXACT {
            write!(f, "({}, {})", self.u.to_text(), self.v.to_text())
        } else {
            write!(f, "{:.6} rad", self.angle())
        }
    }
}

/// Upper or lower half of the circle, counted from angle 0 inclusive.
fn half<R: RealScalar>(d: &Direction<R>) -> u8 {
    if d.v.is_positive() || (d.v.is_zero() && d.u.is_positive()) {
        0
    } else {
        1
    }
}

/// Compares the angles of two directions in `[0, 2π)` without trigonometry.
pub fn angle_cmp<R: RealScalar>(a: &Direction<R>, b: &Direction<R>) -> Ordering {
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let cross = a.u.clone() * b.v.clone() - a.v.clone() * b.u.clone();
    if cross.is_positive() {
        Ordering::Less
    } else if cross.is_negative() {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Comparison {
    Lt,
    Eq,
    Gt,
    Incomparable,
}

impl Comparison {
    pub fn reverse(self) -> Self {
        match self {
            Comparison::Lt => Comparison::Gt,
            Comparison::Gt => Comparison::Lt,
            other => other,
        }
    }
}

/// Compares `c` and `c'` for the order attached to `dir`.
pub fn leq_theta<R: RealScalar>(
    c: &Factor<R>,
    c_prime: &Factor<R>,
    dir: &Direction<R>,
    tol: &Tolerance,
) -> Comparison {
    if c == c_prime {
        return Comparison::Eq;
    }
    let d = c - c_prime;
    let scale = d.norm() * dir.norm();
    match d.key(dir).sign_tol(scale, tol) {
        s if s < 0 => Comparison::Lt,
        s if s > 0 => Comparison::Gt,
        _ => Comparison::Incomparable,
    }
}

pub fn strictly_less<R: RealScalar>(
    c: &Factor<R>,
    c_prime: &Factor<R>,
    dir: &Direction<R>,
    tol: &Tolerance,
) -> bool {
    leq_theta(c, c_prime, dir, tol) == Comparison::Lt
}

/// The two directions at which `c` and `c'` are incomparable, sorted by angle in `[0, 2π)`.
pub fn stokes_directions<R: RealScalar>(
    c: &Factor<R>,
    c_prime: &Factor<R>,
) -> Result<(Direction<R>, Direction<R>)> {
    if c == c_prime {
        return Err(StokesError::EqualFactors(c.to_string()));
    }
    let d = c - c_prime;
    let a = Direction {
        u: -d.im.clone(),
        v: d.re.clone(),
    };
    let b = a.opposite();
    Ok(match angle_cmp(&a, &b) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    })
}

/// Checks that the factors are distinct and pairwise comparable at `dir`.
pub fn check_generic<R: RealScalar>(
    factors: &[Factor<R>],
    dir: &Direction<R>,
    tol: &Tolerance,
) -> Result<()> {
    for j in 0..factors.len() {
        for i in 0..j {
            match leq_theta(&factors[j], &factors[i], dir, tol) {
                Comparison::Eq => return Err(StokesError::EqualFactors(factors[i].to_string())),
                Comparison::Incomparable => {
                    return Err(StokesError::NotGeneric(
                        factors[j].to_string(),
                        factors[i].to_string(),
                    ))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Permutation sorting the factors increasingly for `<_dir`: `result[k]` is
/// the input index of the k-th smallest factor.
pub fn order_permutation<R: RealScalar>(
    factors: &[Factor<R>],
    dir: &Direction<R>,
    tol: &Tolerance,
) -> Result<Vec<usize>> {
    check_generic(factors, dir, tol)?;
    let mut idx: Vec<usize> = (0..factors.len()).collect();
    idx.sort_by(
        |&a, &b| match leq_theta(&factors[a], &factors[b], dir, tol) {
            Comparison::Lt => Ordering::Less,
            Comparison::Gt => Ordering::Greater,
            _ => Ordering::Equal,
        },
    );
    Ok(idx)
}

/// The unique numbering `c_1 <_θ ... <_θ c_n` of a generic factor set.
pub fn order_factors<R: RealScalar>(
    factors: &[Factor<R>],
    dir: &Direction<R>,
    tol: &Tolerance,
) -> Result<Vec<Factor<R>>> {
    if factors.is_empty() {
        return Err(StokesError::BadParams("factor set is empty".into()));
    }
    let perm = order_permutation(factors, dir, tol)?;
    Ok(perm.into_iter().map(|i| factors[i].clone()).collect())
}

/// A point `c` on the ray of `dir` lying strictly above every factor.
pub fn admissible_point<R: RealScalar>(
    factors: &[Factor<R>],
    dir: &Direction<R>,
    tol: &Tolerance,
) -> Result<Factor<R>> {
    check_generic(factors, dir, tol)?;
    let top = factors
        .iter()
        .map(|c| c.key(dir))
        .fold(R::zero(), |m, k| if k > m { k } else { m });
    let target = R::one() + top;
    let norm2 = dir.u.clone() * dir.u.clone() + dir.v.clone() * dir.v.clone();
    let t = target / norm2;
    let c = Factor::new(t.clone() * dir.u.clone(), t * dir.v.clone());
    for ci in factors {
        if !strictly_less(ci, &c, dir, tol) {
            return Err(StokesError::NotAdmissible(
                c.to_string(),
                format!("factor {ci} is not below it"),
            ));
        }
    }
    Ok(c)
}

/// Whether `c` lies strictly above all factors at `dir` and strictly below
/// them at the opposite direction, and differs from every factor.
pub fn is_admissible<R: RealScalar>(
    factors: &[Factor<R>],
    c: &Factor<R>,
    dir: &Direction<R>,
    tol: &Tolerance,
) -> bool {
    let opp = dir.opposite();
    factors
        .iter()
        .all(|ci| strictly_less(ci, c, dir, tol) && strictly_less(c, ci, &opp, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::{Signed, Zero};

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn f(re: i64, im: i64) -> Factor<Rational> {
        Factor::new(q(re), q(im))
    }

    fn dir(u: i64, v: i64) -> Direction<Rational> {
        Direction::new(q(u), q(v)).unwrap()
    }

    #[test]
    fn comparison_examples() {
        let tol = Tolerance::default();
        assert_eq!(
            leq_theta(&f(-1, 0), &f(0, 0), &dir(1, 0), &tol),
            Comparison::Lt
        );
        assert_eq!(
            leq_theta(&f(0, 0), &f(0, 0), &dir(0, 1), &tol),
            Comparison::Eq
        );
        assert_eq!(
            leq_theta(&f(0, 1), &f(0, 0), &dir(1, 0), &tol),
            Comparison::Incomparable
        );
        let d0 = Direction::<f64>::from_angle(0.0);
        let c = |re: f64, im: f64| Factor::new(re, im);
        assert_eq!(
            leq_theta(&c(-1.0, 0.0), &c(0.0, 0.0), &d0, &tol),
            Comparison::Lt
        );
        assert_eq!(
            leq_theta(&c(0.0, 1.0), &c(0.0, 0.0), &d0, &tol),
            Comparison::Incomparable
        );
    }

    #[test]
    fn stokes_direction_examples() {
        let (a, b) = stokes_directions(&f(1, 0), &f(0, 0)).unwrap();
        assert!((a.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((b.angle() - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let (a, b) = stokes_directions(&f(0, 1), &f(0, 0)).unwrap();
        assert_eq!(a.angle(), 0.0);
        assert!((b.angle() - std::f64::consts::PI).abs() < 1e-12);
        assert!(matches!(
            stokes_directions(&f(0, 0), &f(0, 0)),
            Err(StokesError::EqualFactors(_))
        ));
    }

    #[test]
    fn ordering_examples() {
        let tol = Tolerance::default();
        assert_eq!(
            order_factors(&[f(0, 0), f(1, 0)], &dir(-1, 0), &tol).unwrap(),
            vec![f(1, 0), f(0, 0)]
        );
        assert_eq!(
            order_factors(&[f(0, 0)], &dir(3, 5), &tol).unwrap(),
            vec![f(0, 0)]
        );
        match order_factors(&[f(0, 0), f(0, 1)], &dir(1, 0), &tol) {
            Err(StokesError::NotGeneric(a, b)) => assert_eq!((a.as_str(), b.as_str()), ("1i", "0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn admissible_examples() {
        let tol = Tolerance::default();
        assert_eq!(
            admissible_point(&[f(0, 0)], &dir(1, 0), &tol).unwrap(),
            f(1, 0)
        );
        let c = admissible_point(&[f(-2, 0), f(-1, 0)], &dir(1, 0), &tol).unwrap();
        assert!(c.im.is_zero() && c.re.is_positive());
        let c = admissible_point(&[f(0, 0), f(1, 0)], &dir(-1, 0), &tol).unwrap();
        assert!(c.re.is_negative());
        assert!(is_admissible(&[f(0, 0), f(1, 0)], &c, &dir(-1, 0), &tol));
    }

    #[test]
    fn angle_order_is_counterclockwise() {
        let dirs = [
            dir(1, 0),
            dir(1, 1),
            dir(0, 1),
            dir(-1, 0),
            dir(0, -1),
            dir(1, -1),
        ];
        for w in dirs.windows(2) {
            assert_eq!(angle_cmp(&w[0], &w[1]), Ordering::Less);
        }
    }
}
