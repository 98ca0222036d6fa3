//! Scalar domains with involution.
//!
//! Three domains are supported: double-precision complex numbers
//! ([`Complex64`]), exact Gaussian rationals ([`GaussianRational`]) and exact
//! rationals ([`Rational`]). The involution is complex conjugation on the
//! first two and the identity on the last.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, HermitianReport};
use crate::matrix::Matrix;

pub use num_complex::Complex64;

pub type Rational = BigRational;
pub type GaussianRational = Complex<BigRational>;

/// Relative tolerance used for every zero/rank decision in float mode.
///
/// Exact domains ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
}

impl Tolerance {
    pub const DEFAULT_REL_EPS: f64 = 1e-9;

    pub fn new(rel_eps: f64) -> Self {
        assert!(rel_eps >= 0.0, "tolerance must be nonnegative");
        Tolerance { rel_eps }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_eps: Self::DEFAULT_REL_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    Float,
    GaussianRational,
    Rational,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Float => "float",
            ScalarMode::GaussianRational => "gaussian_rational",
            ScalarMode::Rational => "rational",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "float" => Some(ScalarMode::Float),
            "gaussian_rational" => Some(ScalarMode::GaussianRational),
            "rational" => Some(ScalarMode::Rational),
            _ => None,
        }
    }
}

/// Ordered real field underlying a scalar domain (`f64` or `BigRational`).
pub trait RealScalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    /// Exact conversion of a finite double; `None` for NaN or infinities.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_i64(n: i64) -> Self;

    /// Nearest element to an exact rational (exact in exact fields).
    fn from_rational(r: &BigRational) -> Self;

    /// Human-readable rendering (`"p/q"` for rationals).
    fn to_text(&self) -> String;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Sign of `self` with values of magnitude `<= rel_eps * scale` treated as zero
    /// in inexact fields.
    fn sign_tol(&self, scale: f64, tol: &Tolerance) -> i8 {
        if Self::EXACT {
            if self.is_zero() {
                0
            } else if self.is_positive() {
                1
            } else {
                -1
            }
        } else {
            let v = self.to_f64();
            if v.abs() <= tol.rel_eps * scale {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        }
    }
}

impl RealScalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_text(&self) -> String {
        format!("{self}")
    }
}

impl RealScalar for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }
}

/// A field with involution in which all Stokes-data computations take place.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Real: RealScalar;
    /// The domain obtained by adjoining `i` (the domain itself when it already has one).
    type Complexified: Scalar<Real = Self::Real>;

    const MODE: ScalarMode;

    fn conj(&self) -> Self;
    fn from_real(r: Self::Real) -> Self;
    /// `re + i*im`; `None` when the domain has no imaginary unit and `im != 0`.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn complexify(&self) -> Self::Complexified;
    fn to_c64(&self) -> Complex64;

    /// Approximate modulus, used for pivot selection and norms.
    fn magnitude(&self) -> f64 {
        let c = self.to_c64();
        c.norm()
    }

    fn from_i64(n: i64) -> Self {
        Self::from_real(Self::Real::from_i64(n))
    }

    fn is_exact() -> bool {
        <Self::Real as RealScalar>::EXACT
    }

    /// Zero test relative to `scale`; exact domains test for equality with zero.
    fn is_negligible(&self, scale: f64, tol: &Tolerance) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.magnitude() <= tol.rel_eps * scale
        }
    }

    /// Basis of the right kernel of `m`, as column vectors.
    fn kernel_basis(m: &Matrix<Self>, tol: &Tolerance) -> Vec<Vec<Self>> {
        linalg::rref_kernel(m, tol)
    }

    /// Columns whose images form a basis of the column space (rank-revealing).
    fn pivot_columns(m: &Matrix<Self>, tol: &Tolerance) -> Vec<usize> {
        linalg::rref(m, tol).1
    }

    fn classify_hermitian_impl(h: &Matrix<Self>, tol: &Tolerance) -> HermitianReport<Self> {
        linalg::ldl_classify(h, tol)
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    type Complexified = Complex64;
    const MODE: ScalarMode = ScalarMode::Float;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }

    fn re(&self) -> f64 {
        self.re
    }

    fn im(&self) -> f64 {
        self.im
    }

    fn complexify(&self) -> Complex64 {
        *self
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn kernel_basis(m: &Matrix<Self>, tol: &Tolerance) -> Vec<Vec<Self>> {
        linalg::float::svd_kernel(m, tol)
    }

    fn pivot_columns(m: &Matrix<Self>, tol: &Tolerance) -> Vec<usize> {
        linalg::float::pivoted_qr_columns(m, tol)
    }

    fn classify_hermitian_impl(h: &Matrix<Self>, tol: &Tolerance) -> HermitianReport<Self> {
        linalg::float::eigen_classify(h, tol)
    }
}

impl Scalar for GaussianRational {
    type Real = BigRational;
    type Complexified = GaussianRational;
    const MODE: ScalarMode = ScalarMode::GaussianRational;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_real(r: BigRational) -> Self {
        Complex::new(r, BigRational::zero())
    }

    fn from_parts(re: BigRational, im: BigRational) -> Option<Self> {
        Some(Complex::new(re, im))
    }

    fn re(&self) -> BigRational {
        self.re.clone()
    }

    fn im(&self) -> BigRational {
        self.im.clone()
    }

    fn complexify(&self) -> Self {
        self.clone()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(RealScalar::to_f64(&self.re), RealScalar::to_f64(&self.im))
    }
}

impl Scalar for BigRational {
    type Real = BigRational;
    type Complexified = GaussianRational;
    const MODE: ScalarMode = ScalarMode::Rational;

    fn conj(&self) -> Self {
        self.clone()
    }

    fn from_real(r: BigRational) -> Self {
        r
    }

    fn from_parts(re: BigRational, im: BigRational) -> Option<Self> {
        im.is_zero().then_some(re)
    }

    fn re(&self) -> BigRational {
        self.clone()
    }

    fn im(&self) -> BigRational {
        BigRational::zero()
    }

    fn complexify(&self) -> GaussianRational {
        Complex::new(self.clone(), BigRational::zero())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(RealScalar::to_f64(self), 0.0)
    }

    fn magnitude(&self) -> f64 {
        RealScalar::to_f64(self).abs()
    }
}

/// The imaginary unit of a complexified domain.
pub fn imaginary_unit<S: Scalar>() -> S::Complexified {
    S::Complexified::from_parts(<S::Real as Zero>::zero(), <S::Real as One>::one())
        .expect("complexified domain has an imaginary unit")
}

/// Parse `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    // decimal literal such as "-1.25" is read exactly as a terminating decimal
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits * BigInt::from(sign), den))
}

/// Canonical `"p/q"` (or `"p"`) rendering of a rational.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    <BigRational as FromPrimitive>::from_f64(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution_is_self_inverse() {
        let z = GaussianRational::new(BigRational::ratio(1, 3), BigRational::ratio(-2, 5));
        assert_eq!(Scalar::conj(&Scalar::conj(&z)), z);
        assert_eq!(Scalar::conj(&z).im, BigRational::ratio(2, 5));
        let q = BigRational::ratio(7, 2);
        assert_eq!(Scalar::conj(&q), q);
        let c = Complex64::new(1.0, 2.0);
        assert_eq!(Scalar::conj(&c), Complex64::new(1.0, -2.0));
    }

    #[test]
    fn involution_is_multiplicative() {
        let a = GaussianRational::new(BigRational::ratio(1, 2), BigRational::ratio(3, 1));
        let b = GaussianRational::new(BigRational::ratio(-4, 7), BigRational::ratio(1, 9));
        assert_eq!(
            Scalar::conj(&(a.clone() * b.clone())),
            Scalar::conj(&a) * Scalar::conj(&b)
        );
    }

    #[test]
    fn rational_has_no_imaginary_unit() {
        assert!(BigRational::from_parts(BigRational::one(), BigRational::one()).is_none());
        let i = imaginary_unit::<BigRational>();
        assert_eq!(i.clone() * i, -GaussianRational::one());
    }

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("3/6"), Some(BigRational::ratio(1, 2)));
        assert_eq!(
            parse_rational("-4"),
            Some(<BigRational as RealScalar>::from_i64(-4))
        );
        assert_eq!(parse_rational("-1.25"), Some(BigRational::ratio(-5, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(format_rational(&BigRational::ratio(-6, 4)), "-3/2");
        assert_eq!(
            format_rational(&<BigRational as RealScalar>::from_i64(5)),
            "5"
        );
    }
}
