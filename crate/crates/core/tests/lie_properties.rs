mod oracle;

use num_complex::Complex64;
use oracle::{
    all_right_normed_words, nested_bracket_rank, random_skew_hermitian,
    random_traceless_skew_hermitian, stacked_rank, CMat,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reachctl_core::lie::{classify, closure, member, AlgebraLabel};
use reachctl_core::matrix::{bracket, pauli::*, SquareComplexMatrix};
use reachctl_core::Tolerance;

fn sq(m: CMat) -> SquareComplexMatrix {
    SquareComplexMatrix::new(m).unwrap()
}

#[test]
fn su2_dimension_matches_depth_four_enumeration() {
    let gens = [i_times(&sigma_z()), i_times(&sigma_x())];
    let raw: Vec<CMat> = gens.iter().map(|g| g.as_matrix().clone()).collect();
    let words = all_right_normed_words(&raw, 4);
    assert_eq!(words.len(), 2 + 4 + 8 + 16);
    let oracle = stacked_rank(&words, 1e-10);
    assert_eq!(oracle, 3);
    assert_eq!(closure(&gens, &Tolerance::default()).unwrap().dim(), oracle);
}

#[test]
fn u2_dimension_matches_depth_four_enumeration() {
    let gens = [
        i_times(&SquareComplexMatrix::identity(2)),
        i_times(&sigma_z()),
        i_times(&sigma_x()),
    ];
    let raw: Vec<CMat> = gens.iter().map(|g| g.as_matrix().clone()).collect();
    let oracle = stacked_rank(&all_right_normed_words(&raw, 4), 1e-10);
    assert_eq!(oracle, 4);
    let basis = closure(&gens, &Tolerance::default()).unwrap();
    assert_eq!(basis.dim(), oracle);
    assert_eq!(
        classify(&basis, &Tolerance::default()).label,
        AlgebraLabel::FullUnitary
    );
}

#[test]
fn pruned_oracle_agrees_with_literal_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=3 {
        let gens = [
            random_skew_hermitian(n, &mut rng),
            random_skew_hermitian(n, &mut rng),
        ];
        let literal = stacked_rank(
            &all_right_normed_words(&gens, 6)
                .into_iter()
                .filter(|m| m.norm() > 1e-300)
                .map(|m| {
                    let nrm = m.norm();
                    m / Complex64::new(nrm, 0.0)
                })
                .collect::<Vec<_>>(),
            1e-10,
        );
        assert_eq!(nested_bracket_rank(&gens, 6, 1e-10), literal);
    }
}

#[test]
fn oracle_equivalence_on_random_pairs() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let n = 2 + trial % 4;
        let a = random_skew_hermitian(n, &mut rng);
        let b = random_skew_hermitian(n, &mut rng);
        let expected = nested_bracket_rank(&[a.clone(), b.clone()], n * n, tol.rank_tol);
        let got = closure(&[sq(a), sq(b)], &tol).unwrap().dim();
        assert_eq!(got, expected, "trial {trial}, n = {n}");
    }
}

#[test]
fn oracle_equivalence_on_structured_pairs() {
    // commuting, block-diagonal and dependent generators give proper subalgebras
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let a = random_skew_hermitian(2, &mut rng);
    let b = random_skew_hermitian(2, &mut rng);
    let mut block_a = CMat::zeros(4, 4);
    let mut block_b = CMat::zeros(4, 4);
    block_a.view_mut((0, 0), (2, 2)).copy_from(&a);
    block_a.view_mut((2, 2), (2, 2)).copy_from(&a);
    block_b.view_mut((0, 0), (2, 2)).copy_from(&b);
    block_b.view_mut((2, 2), (2, 2)).copy_from(&b);
    let cases: Vec<[CMat; 2]> = vec![
        [a.clone(), a.clone() * Complex64::new(-3.0, 0.0)],
        [block_a.clone(), block_b.clone()],
        [
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, -0.5),
            ])),
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(0.0, 0.3),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
            ])),
        ],
    ];
    for [a, b] in cases {
        let n = a.nrows();
        let expected = nested_bracket_rank(&[a.clone(), b.clone()], n * n, tol.rank_tol);
        assert_eq!(closure(&[sq(a), sq(b)], &tol).unwrap().dim(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_is_closed_contains_generators_and_idempotent(seed in any::<u64>(), n in 1usize..=4, traceless in any::<bool>()) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| if traceless {
            random_traceless_skew_hermitian(n, rng)
        } else {
            random_skew_hermitian(n, rng)
        };
        let gens = vec![sq(draw(&mut rng)), sq(draw(&mut rng))];
        let basis = closure(&gens, &tol).unwrap();

        prop_assert!(basis.dim() <= n * n);
        if traceless {
            prop_assert!(basis.dim() <= (n * n).saturating_sub(1));
        }
        for g in &gens {
            prop_assert!(member(&basis, g).unwrap() <= 1e-8 * g.frobenius_norm().max(1.0));
        }
        for x in basis.elements() {
            for y in basis.elements() {
                prop_assert!(member(&basis, &bracket(x, y).unwrap()).unwrap() <= 1e-8);
            }
        }
        if basis.dim() == 0 {
            return Ok(());
        }
        let again = closure(basis.elements(), &tol).unwrap();
        prop_assert_eq!(again.dim(), basis.dim());
        for e in again.elements() {
            prop_assert!(member(&basis, e).unwrap() <= 1e-8);
        }
        for e in basis.elements() {
            prop_assert!(member(&again, e).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn closure_is_scale_invariant(seed in any::<u64>(), n in 2usize..=4, scale in 1e-3f64..1e3) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_skew_hermitian(n, &mut rng);
        let b = random_skew_hermitian(n, &mut rng);
        let base = closure(&[sq(a.clone()), sq(b.clone())], &tol).unwrap();
        let s = Complex64::new(scale, 0.0);
        let scaled = closure(&[sq(a * s), sq(b * s)], &tol).unwrap();
        prop_assert_eq!(classify(&base, &tol), classify(&scaled, &tol));
    }
}
