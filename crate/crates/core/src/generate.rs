//! Seeded random instances.
//!
//! Every generator is a pure function of its parameters and seed (ChaCha8).
//! Exact domains draw small integers, the float domain draws uniform reals.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::linalg;
use crate::matrix::Matrix;
use crate::order::{Direction, Factor};
use crate::scalar::{RealScalar, Scalar, ScalarMode, Tolerance};
use crate::stokes::{StokesData, StokesType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    /// Block dimension of each factor; the number of factors is `dims.len()`.
    pub dims: Vec<usize>,
    /// Rank of `H = Σ + Σ†`.
    pub rank: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(dims: Vec<usize>, rank: usize, seed: u64) -> Self {
        GenParams { dims, rank, seed }
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// Diagonal-block retries use `λ = ±m` for these magnitudes `m = num/den`.
const LAMBDA_MAGNITUDES: [(i64, i64); 8] = [
    (1, 1),
    (2, 1),
    (3, 1),
    (1, 2),
    (1, 3),
    (5, 1),
    (7, 1),
    (1, 5),
];
const RESAMPLES: usize = 64;

fn real<R: RealScalar>(rng: &mut ChaCha8Rng) -> R {
    if R::EXACT {
        R::from_i64(rng.random_range(-2..=2))
    } else {
        R::from_f64(rng.random_range(-1.0..1.0)).expect("finite")
    }
}

/// A random entry; purely real in the rational domain.
pub fn sample<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    let re = real::<S::Real>(rng);
    let im = if S::MODE == ScalarMode::Rational {
        S::Real::zero()
    } else {
        real::<S::Real>(rng)
    };
    S::from_parts(re, im).expect("imaginary part allowed")
}

/// A generic direction and `n` distinct factors with distinct keys along it.
pub fn sample_type<R: RealScalar>(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<StokesType<R>> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(StokesError::BadParams(
            "dims must be nonempty and positive".into(),
        ));
    }
    let (u, v) = loop {
        let u: i64 = rng.random_range(-3..=3);
        let v: i64 = rng.random_range(-3..=3);
        if (u, v) != (0, 0) {
            break (u, v);
        }
    };
    let mut pts: Vec<(i64, i64)> = Vec::with_capacity(dims.len());
    let mut keys: Vec<i64> = Vec::new();
    let mut guard = 0;
    while pts.len() < dims.len() {
        guard += 1;
        if guard > 10_000 {
            return Err(StokesError::Unsatisfiable(
                "could not place distinct factors".into(),
            ));
        }
        let a: i64 = rng.random_range(-4..=4);
        let b: i64 = rng.random_range(-4..=4);
        let key = u * a + v * b;
        if !keys.contains(&key) {
            keys.push(key);
            pts.push((a, b));
        }
    }
    // listing in key order makes the given dims line up with the numbering
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by_key(|&i| keys[i]);
    let dir = Direction::new(R::from_i64(u), R::from_i64(v)).expect("nonzero");
    let factors = idx
        .iter()
        .map(|&i| Factor::new(R::from_i64(pts[i].0), R::from_i64(pts[i].1)))
        .collect();
    Ok(StokesType {
        factors,
        theta0: dir,
        dims: dims.to_vec(),
    })
}

fn random_matrix<S: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<S> {
    Matrix::from_fn(rows, cols, |_, _| sample(rng))
}

/// Random invertible square block.
fn invertible_block<S: Scalar>(rng: &mut ChaCha8Rng, d: usize, tol: &Tolerance) -> Matrix<S> {
    loop {
        let m = random_matrix::<S>(rng, d, d);
        if linalg::rank(&m, tol) == d {
            let cond_ok = S::is_exact() || {
                let sv = linalg::float::singular_values(&m.map(|x| x.to_c64()));
                let max = sv.iter().copied().fold(0.0, f64::max);
                let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
                min > 1e-3 * max
            };
            if cond_ok {
                return m;
            }
        }
    }
}

/// Random triangular data with the block shape prescribed by `dims`; `Σ` and
/// `Σ′` are independent.
pub fn random_valid<S: Scalar>(dims: &[usize], seed: u64) -> Result<StokesData<S>> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ty = sample_type::<S::Real>(&mut rng, dims)?;
    let sigma = random_triangular::<S>(&mut rng, &ty, true, &tol);
    let sigma_prime = random_triangular::<S>(&mut rng, &ty, false, &tol);
    Ok(StokesData::new(ty, sigma, sigma_prime))
}

/// Random `Σ` with `Σ′ = −Σ†`; no positivity is imposed.
pub fn random_skew<S: Scalar>(dims: &[usize], seed: u64) -> Result<StokesData<S>> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ty = sample_type::<S::Real>(&mut rng, dims)?;
    let sigma = random_triangular::<S>(&mut rng, &ty, true, &tol);
    Ok(StokesData::skew(ty, sigma))
}

fn random_triangular<S: Scalar>(
    rng: &mut ChaCha8Rng,
    ty: &StokesType<S::Real>,
    lower: bool,
    tol: &Tolerance,
) -> Matrix<S> {
    let n = ty.total();
    let k = ty.n_factors();
    let off = ty.offsets();
    let mut m = Matrix::zeros(n, n);
    for j in 0..k {
        for i in 0..k {
            let keep = if lower { i <= j } else { i >= j };
            if !keep {
                continue;
            }
            let b = if i == j {
                invertible_block::<S>(rng, ty.dims[i], tol)
            } else {
                random_matrix::<S>(rng, ty.dims[j], ty.dims[i])
            };
            m.set_block(off[j], off[i], &b);
        }
    }
    m
}

/// Standard skew-symmetric form on `d` coordinates (a zero row is left when `d` is odd).
fn standard_skew<S: Scalar>(d: usize) -> Matrix<S> {
    let mut j = Matrix::zeros(d, d);
    for p in 0..d / 2 {
        j[(2 * p, 2 * p + 1)] = S::one();
        j[(2 * p + 1, 2 * p)] = -S::one();
    }
    j
}

/// Random data with `Σ′ = −Σ†` and `Σ + Σ† = H` for a random positive
/// semidefinite `H` of the requested rank.
pub fn generate_certified<S: Scalar>(p: &GenParams) -> Result<StokesData<S>> {
    let n = p.total();
    if p.rank > n {
        return Err(StokesError::BadParams(format!(
            "rank {} exceeds total dimension {n}",
            p.rank
        )));
    }
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let ty = sample_type::<S::Real>(&mut rng, &p.dims)?;
    let signs: Vec<i64> = (0..ty.n_factors())
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect();
    let half = S::from_real(S::Real::ratio(1, 2));
    let off = ty.offsets();
    for _ in 0..RESAMPLES {
        let a = random_matrix::<S>(&mut rng, p.rank, n);
        let h = &a.adjoint() * &a;
        if linalg::rank(&h, &tol) != p.rank {
            continue;
        }
        let mut sigma = Matrix::zeros(n, n);
        let mut ok = true;
        for j in 0..ty.n_factors() {
            for i in 0..j {
                let b = h.block(off[j], off[i], ty.dims[j], ty.dims[i]);
                sigma.set_block(off[j], off[i], &b);
            }
            let d = ty.dims[j];
            let hjj = h.block(off[j], off[j], d, d).scale(&half);
            let twist = if S::MODE == ScalarMode::Rational {
                standard_skew::<S>(d)
            } else {
                Matrix::identity(d)
                    .scale(&S::from_parts(S::Real::zero(), S::Real::one()).expect("has i"))
            };
            let block = LAMBDA_MAGNITUDES.iter().find_map(|&(num, den)| {
                let lambda = S::from_real(S::Real::ratio(signs[j] * num, den));
                let b = &hjj + &twist.scale(&lambda);
                (linalg::rank(&b, &tol) == d).then_some(b)
            });
            match block {
                Some(b) => sigma.set_block(off[j], off[j], &b),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(StokesData::skew(ty, sigma));
        }
    }
    Err(StokesError::Unsatisfiable(format!(
        "no invertible diagonal blocks for dims {:?} and rank {}",
        p.dims, p.rank
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Definiteness;
    use crate::pairing;
    use crate::scalar::{Complex64, GaussianRational, Rational};

    #[test]
    fn generated_data_is_valid_and_skew() {
        let tol = Tolerance::default();
        for seed in 0..20 {
            let p = GenParams::new(vec![2, 1, 3], (seed % 7) as usize, seed);
            let d = generate_certified::<GaussianRational>(&p).unwrap();
            assert!(d.validate(&tol).is_valid());
            assert!(pairing::check_iota_skew(&d, &tol).unwrap().is_skew);
            let h = &d.sigma + &d.sigma.adjoint();
            let r = linalg::hermitian_classify(&h, &tol).unwrap();
            assert!(r.class.is_psd());
            assert_eq!(r.rank, p.rank);
        }
    }

    #[test]
    fn full_rank_is_certified() {
        let tol = Tolerance::default();
        let p = GenParams::new(vec![1, 2, 1], 4, 11);
        let d = generate_certified::<Rational>(&p).unwrap();
        let c = pairing::certify(&d, &tol).unwrap();
        assert!(c.verdict.is_certified());
        assert_eq!(c.split.unwrap().trivial.len(), 0);
        let f = generate_certified::<Complex64>(&p).unwrap();
        assert!(pairing::certify(&f, &tol).unwrap().verdict.is_certified());
    }

    #[test]
    fn zero_rank_gives_full_k() {
        let tol = Tolerance::default();
        let d = generate_certified::<GaussianRational>(&GenParams::new(vec![1, 2], 0, 3)).unwrap();
        let ks = pairing::k_spaces(&d, &tol).unwrap();
        assert_eq!(ks.iter().map(|k| k.dim()).collect::<Vec<_>>(), vec![1, 2]);
        let c = pairing::certify(&d, &tol).unwrap();
        for k in &c.k_reports {
            assert!(matches!(
                k.i_h_k_class,
                Some(Definiteness::PositiveDefinite) | Some(Definiteness::NegativeDefinite)
            ));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let p = GenParams::new(vec![2, 2], 3, 99);
        let a = generate_certified::<GaussianRational>(&p).unwrap();
        let b = generate_certified::<GaussianRational>(&p).unwrap();
        assert_eq!(a, b);
        let c =
            generate_certified::<GaussianRational>(&GenParams::new(vec![2, 2], 3, 100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_valid_validates() {
        let tol = Tolerance::default();
        for seed in 0..10 {
            let d = random_valid::<Complex64>(&[1, 3, 2], seed).unwrap();
            assert!(d.validate(&tol).is_valid());
            let d = random_valid::<Rational>(&[2, 2], seed).unwrap();
            assert!(d.validate(&tol).is_valid());
        }
    }
}
