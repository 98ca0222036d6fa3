use proptest::prelude::*;

use stokes_core::birkhoff::{self, LoopKind, MatrixLoop};
use stokes_core::generate::{self, GenParams};
use stokes_core::io::{self, AnyStokesData};
use stokes_core::linalg;
use stokes_core::order::{self, Comparison, Direction, Factor};
use stokes_core::pairing;
use stokes_core::scalar::RealScalar;
use stokes_core::stokes::{self, StokesData};
use stokes_core::{cech, Complex64, GaussianRational, Matrix, Rational, Scalar, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn q(n: i64) -> Rational {
    <Rational as RealScalar>::from_i64(n)
}

fn dims_strategy(max_factors: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_dim, 1..=max_factors)
}

fn factor_strategy() -> impl Strategy<Value = Factor<Rational>> {
    (-8i64..=8, -8i64..=8).prop_map(|(a, b)| Factor::new(q(a), q(b)))
}

fn direction_strategy() -> impl Strategy<Value = Direction<Rational>> {
    (-5i64..=5, -5i64..=5)
        .prop_filter("nonzero", |&(u, v)| (u, v) != (0, 0))
        .prop_map(|(u, v)| Direction::new(q(u), q(v)).unwrap())
}

fn gaussian_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<GaussianRational>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), rows * cols).prop_map(move |v| {
        Matrix::from_fn(rows, cols, |r, c| {
            let (a, b) = v[r * cols + c];
            GaussianRational::new(q(a), q(b))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_is_a_total_order_at_generic_directions(
        a in factor_strategy(), b in factor_strategy(), c in factor_strategy(), dir in direction_strategy()
    ) {
        let t = tol();
        let ab = order::leq_theta(&a, &b, &dir, &t);
        let bc = order::leq_theta(&b, &c, &dir, &t);
        if ab == Comparison::Lt && bc == Comparison::Lt {
            prop_assert_eq!(order::leq_theta(&a, &c, &dir, &t), Comparison::Lt);
        }
        prop_assert_eq!(order::leq_theta(&a, &b, &dir.opposite(), &t), ab.reverse());
        let shifted = |f: &Factor<Rational>| Factor::new(f.re.clone() + c.re.clone(), f.im.clone() + c.im.clone());
        prop_assert_eq!(order::leq_theta(&shifted(&a), &shifted(&b), &dir, &t), ab);
    }

    #[test]
    fn sorted_factors_are_increasing(
        fs in prop::collection::vec(factor_strategy(), 1..6), dir in direction_strategy()
    ) {
        let t = tol();
        match order::order_factors(&fs, &dir, &t) {
            Ok(sorted) => {
                for w in sorted.windows(2) {
                    prop_assert!(order::strictly_less(&w[0], &w[1], &dir, &t));
                }
                let c = order::admissible_point(&sorted, &dir, &t).unwrap();
                prop_assert!(order::is_admissible(&sorted, &c, &dir, &t));
            }
            Err(_) => prop_assert!(order::check_generic(&fs, &dir, &t).is_err()),
        }
    }

    #[test]
    fn rank_plus_nullity_exact(m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| gaussian_matrix(r, c))) {
        let t = tol();
        let k = linalg::kernel_basis(&m, &t);
        prop_assert_eq!(linalg::rank(&m, &t) + k.len(), m.cols());
        for v in &k {
            prop_assert!(m.mul_vec(v).iter().all(|x| *x == GaussianRational::new(q(0), q(0))));
        }
    }

    #[test]
    fn hermitian_classification_agrees_across_modes(a in (1usize..5).prop_flat_map(|n| gaussian_matrix(n, n))) {
        let t = tol();
        // A†A − 2I has a spread of signs; integer entries keep the float path well separated
        let n = a.rows();
        let shift = Matrix::identity(n).scale(&GaussianRational::new(q(2), q(0)));
        let h = &(&a.adjoint() * &a) - &shift;
        let exact = linalg::hermitian_classify(&h, &t).unwrap();
        let float = linalg::hermitian_classify(&h.map(|x| x.to_c64()), &t).unwrap();
        prop_assert_eq!(exact.rank, float.rank);
        prop_assert_eq!(exact.class, float.class);
    }

    #[test]
    fn skew_data_is_compatible_with_the_identity_pairing(dims in dims_strategy(3, 2), seed in any::<u64>()) {
        let t = tol();
        let d = generate::random_skew::<GaussianRational>(&dims, seed).unwrap();
        let n = d.total();
        prop_assert!(pairing::compatibility_defect(&d, &Matrix::identity(n), &t).unwrap().is_zero());
        let r = pairing::check_iota_skew(&d, &t).unwrap();
        prop_assert!(r.is_skew && r.compatibility_is_minus_identity == Some(true));
        // a positive multiple of the identity normalizes to a rescaling
        let g = Matrix::identity(n).scale(&GaussianRational::new(q(3), q(0)));
        let normalized = pairing::normalize_pairing(&d, &g, &t).unwrap();
        prop_assert_eq!(normalized.sigma.scale(&GaussianRational::new(q(3), q(0))), d.sigma.clone());
        let form = pairing::induced_form_on_f(&d, &t).unwrap();
        prop_assert_eq!(form.gram.clone(), form.gram.adjoint());
    }

    #[test]
    fn cech_sheets_agree_under_compatibility(dims in dims_strategy(3, 2), seed in any::<u64>()) {
        let t = tol();
        let d = generate::random_skew::<GaussianRational>(&dims, seed).unwrap();
        let c = order::admissible_point(&d.ty.factors, &d.ty.theta0, &t).unwrap();
        let p = cech::pairing_via_cech(&d, &c, &t).unwrap();
        prop_assert_eq!(&p.first_sheet, &p.second_sheet);
        prop_assert_eq!(&p.first_sheet, &p.averaged);
    }

    #[test]
    fn monodromy_graded_pieces_are_diagonal_blocks(dims in dims_strategy(3, 3), seed in any::<u64>()) {
        let t = tol();
        let d = generate::random_valid::<Rational>(&dims, seed).unwrap();
        let m = d.monodromy(&t).unwrap();
        for (i, g) in m.graded.iter().enumerate() {
            let expected = &linalg::inverse(&d.block(&d.sigma, i, i), &t).unwrap() * &d.block(&d.sigma_prime, i, i);
            prop_assert_eq!(g, &expected);
        }
        let can = &Matrix::identity(d.total()) - &m.t1;
        prop_assert_eq!(linalg::rank(&can, &t) + m.eigenvalue_one_dim, d.total());
    }

    #[test]
    fn block_reverse_is_an_involution(dims in dims_strategy(4, 3), seed in any::<u64>()) {
        let d = generate::random_valid::<Rational>(&dims, seed).unwrap();
        let once = stokes::block_reverse(&d.sigma, &d.ty.dims);
        let rev: Vec<usize> = d.ty.dims.iter().rev().copied().collect();
        prop_assert_eq!(stokes::block_reverse(&once, &rev), d.sigma.clone());
    }

    #[test]
    fn direct_sum_with_zero_and_hom_dimension_adds(dims in dims_strategy(2, 2), seed in any::<u64>()) {
        let t = tol();
        let d = generate::random_skew::<GaussianRational>(&dims, seed).unwrap();
        let zero = StokesData::zero(d.ty.theta0.clone());
        prop_assert_eq!(stokes::direct_sum(&d, &zero, &t).unwrap(), d.clone());
        let c = d.ty.factors[0].clone();
        let trivial = StokesData::<GaussianRational>::trivial(c, d.ty.theta0.clone());
        let sum = stokes::direct_sum(&d, &trivial, &t).unwrap();
        let hom_d = stokes::hom_space(&trivial, &d, &t).unwrap().len();
        let hom_sum = stokes::hom_space(&trivial, &sum, &t).unwrap().len();
        prop_assert_eq!(hom_sum, hom_d + 1);
    }

    #[test]
    fn instances_round_trip_through_json(dims in dims_strategy(3, 3), seed in any::<u64>(), mode in 0u8..3) {
        let t = tol();
        let (original, text) = match mode {
            0 => {
                let d = generate::random_valid::<Complex64>(&dims, seed).unwrap();
                (AnyStokesData::Float(d.clone()), io::instance_to_json(&d).to_string())
            }
            1 => {
                let d = generate::random_valid::<GaussianRational>(&dims, seed).unwrap();
                (AnyStokesData::Gaussian(d.clone()), io::instance_to_json(&d).to_string())
            }
            _ => {
                let d = generate::random_valid::<Rational>(&dims, seed).unwrap();
                (AnyStokesData::Rational(d.clone()), io::instance_to_json(&d).to_string())
            }
        };
        let loaded = io::load_instance(&text, None, &t).unwrap();
        prop_assert_eq!(&loaded, &original);
        prop_assert_eq!(loaded.to_json().to_string(), text);
    }
}

fn constant(rows: &[Vec<(f64, f64)>]) -> MatrixLoop {
    let d = rows.len();
    let m = Matrix::from_fn(d, d, |r, c| Complex64::new(rows[r][c].0, rows[r][c].1));
    birkhoff::make_loop(LoopKind::Constant(m)).unwrap()
}

fn random_constant(d: usize) -> impl Strategy<Value = MatrixLoop> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
        let rows: Vec<Vec<(f64, f64)>> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let (a, b) = v[r * d + c];
                        // diagonal dominance keeps the cofactor invertible
                        if r == c {
                            (a + 2.0 * d as f64, b)
                        } else {
                            (a, b)
                        }
                    })
                    .collect()
            })
            .collect();
        constant(&rows)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn indices_invariant_under_constant_cofactors(
        (exps, left, right) in (1usize..4).prop_flat_map(|d| (
            prop::collection::vec(-3i64..=3, d),
            random_constant(d),
            random_constant(d),
        ))
    ) {
        let t = tol();
        let g = birkhoff::make_loop(LoopKind::Monomial(exps.clone())).unwrap();
        let twisted = birkhoff::make_loop(LoopKind::Product(vec![left, g, right])).unwrap();
        let r = birkhoff::partial_indices(&twisted, &t).unwrap();
        let mut expected = exps.clone();
        expected.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(r.indices, expected);
        prop_assert_eq!(r.det_winding, exps.iter().sum::<i64>());
    }

    #[test]
    fn indices_of_block_diagonal_loops_concatenate(
        a in prop::collection::vec(-3i64..=3, 1..3),
        b in prop::collection::vec(-3i64..=3, 1..3),
    ) {
        let t = tol();
        let upper = birkhoff::make_loop(LoopKind::UpperExample).unwrap();
        let ga = birkhoff::make_loop(LoopKind::Monomial(a.clone())).unwrap();
        let gb = birkhoff::make_loop(LoopKind::Monomial(b.clone())).unwrap();
        let g = birkhoff::make_loop(LoopKind::BlockDiagonal(vec![ga, upper, gb])).unwrap();
        let r = birkhoff::partial_indices(&g, &t).unwrap();
        let mut expected: Vec<i64> = a.iter().chain(&b).copied().chain([0, 0]).collect();
        expected.sort_unstable_by(|x, y| y.cmp(x));
        prop_assert_eq!(r.indices, expected);
    }

    #[test]
    fn permutation_conjugation_keeps_indices(exps in prop::collection::vec(-3i64..=3, 2..4), shift in 1usize..3) {
        let t = tol();
        let d = exps.len();
        let perm = Matrix::from_fn(d, d, |r, c| {
            if c == (r + shift) % d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let p = birkhoff::make_loop(LoopKind::Constant(perm.clone())).unwrap();
        let p_inv = birkhoff::make_loop(LoopKind::Constant(perm.transpose())).unwrap();
        let g = birkhoff::make_loop(LoopKind::Monomial(exps.clone())).unwrap();
        let conj = birkhoff::make_loop(LoopKind::Product(vec![p, g.clone(), p_inv])).unwrap();
        let a = birkhoff::partial_indices(&g, &t).unwrap();
        let b = birkhoff::partial_indices(&conj, &t).unwrap();
        prop_assert_eq!(a.indices, b.indices);
    }
}

#[test]
fn certified_generator_meets_its_contract() {
    let t = tol();
    for seed in 0..20 {
        let p = GenParams::new(vec![1, 2, 1], (seed % 5) as usize, seed);
        let d = generate::generate_certified::<GaussianRational>(&p).unwrap();
        let h = &d.sigma + &d.sigma.adjoint();
        let r = linalg::hermitian_classify(&h, &t).unwrap();
        assert!(r.class.is_psd());
        assert_eq!(r.rank, p.rank);
    }
    // an odd real skew block is never invertible
    let p = GenParams::new(vec![1, 2, 1], 0, 0);
    assert!(matches!(
        generate::generate_certified::<Rational>(&p),
        Err(stokes_core::StokesError::Unsatisfiable(_))
    ));
}
