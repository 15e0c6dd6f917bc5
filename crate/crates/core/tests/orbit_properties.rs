mod oracle;

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use num_complex::Complex64;
use oracle::{random_skew_hermitian, random_unit_vector, taylor_exp, CMat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachctl_core::dynamics::*;
use reachctl_core::lie::{closure, AlgebraLabel};
use reachctl_core::matrix::{pauli::*, SquareComplexMatrix};
use reachctl_core::orbit::*;
use reachctl_core::Tolerance;

fn sq(m: CMat) -> SquareComplexMatrix {
    SquareComplexMatrix::new(m).unwrap()
}

/// `V diag(i·d) V†` pairs sharing a random eigenbasis `V`.
fn commuting_pair(n: usize, rng: &mut ChaCha8Rng) -> (CMat, CMat) {
    let v = taylor_exp(&random_skew_hermitian(n, rng));
    let diag = |rng: &mut ChaCha8Rng| {
        CMat::from_diagonal(&DVector::from_fn(n, |_, _| {
            Complex64::new(0.0, rng.random_range(-2.0..2.0))
        }))
    };
    let a = &v * diag(rng) * v.adjoint();
    let b = &v * diag(rng) * v.adjoint();
    let skew = |m: CMat| (&m - m.adjoint()) * Complex64::new(0.5, 0.0);
    (skew(a), skew(b))
}

fn block_pair(rng: &mut ChaCha8Rng) -> (CMat, CMat) {
    // two uncoupled qubit blocks: the orbit cannot leave the block-norm level set
    let mut a = CMat::zeros(4, 4);
    let mut b = CMat::zeros(4, 4);
    a.view_mut((0, 0), (2, 2))
        .copy_from(&random_skew_hermitian(2, rng));
    a.view_mut((2, 2), (2, 2))
        .copy_from(&random_skew_hermitian(2, rng));
    b.view_mut((0, 0), (2, 2))
        .copy_from(&random_skew_hermitian(2, rng));
    b.view_mut((2, 2), (2, 2))
        .copy_from(&random_skew_hermitian(2, rng));
    (a, b)
}

fn systems(rng: &mut ChaCha8Rng) -> Vec<ControlSystem> {
    let tol = Tolerance::default();
    let mut out = vec![
        ControlSystem::new(i_times(&sigma_z()), i_times(&sigma_x()), &tol).unwrap(),
        {
            let a = SquareComplexMatrix::imaginary_diagonal(&[1.0, 2f64.sqrt()]).unwrap();
            ControlSystem::new(a.clone(), a.scale(2.0), &tol).unwrap()
        },
    ];
    for n in 2..=4 {
        out.push(
            ControlSystem::new(
                sq(random_skew_hermitian(n, rng)),
                sq(random_skew_hermitian(n, rng)),
                &tol,
            )
            .unwrap(),
        );
        let (a, b) = commuting_pair(n, rng);
        out.push(ControlSystem::new(sq(a), sq(b), &tol).unwrap());
    }
    let (a, b) = block_pair(rng);
    out.push(ControlSystem::new(sq(a), sq(b), &tol).unwrap());
    out
}

#[test]
fn orbit_dimension_is_homogeneous_along_the_orbit() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sys in systems(&mut rng) {
        let n = sys.n();
        let basis = closure(&[sys.drift().clone(), sys.control().clone()], &tol).unwrap();
        let s0 = StateVector::from_slice(&random_unit_vector(n, &mut rng)).unwrap();
        let d0 = tangent_dimension(&basis, &s0, &tol).unwrap();
        assert!(d0 <= basis.dim().min(2 * n - 1));
        for seed in 0..20 {
            let (s, _) = sample_orbit(&basis, &s0, 6, DEFAULT_DURATION_SCALE, seed).unwrap();
            assert!((s.amplitudes().norm_squared() - 1.0).abs() < 1e-12);
            assert_eq!(
                tangent_dimension(&basis, &s, &tol).unwrap(),
                d0,
                "n = {n}, seed = {seed}"
            );
        }
    }
}

#[test]
fn conserved_moduli_hold_under_random_controls() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases = vec![{
        let a = SquareComplexMatrix::imaginary_diagonal(&[1.0, 2f64.sqrt()]).unwrap();
        ControlSystem::new(a.clone(), a.scale(2.0), &tol).unwrap()
    }];
    for n in 2..=5 {
        let (a, b) = commuting_pair(n, &mut rng);
        cases.push(ControlSystem::new(sq(a), sq(b), &tol).unwrap());
    }
    for sys in cases {
        let n = sys.n();
        let moduli = conserved_moduli(&sys, &tol)
            .unwrap()
            .expect("commuting system");
        let covered: usize = moduli.blocks.iter().map(|b| b.len()).sum();
        assert_eq!(covered, n);
        let s0 = StateVector::from_slice(&random_unit_vector(n, &mut rng)).unwrap();
        let m0 = moduli.moduli(&s0).unwrap();
        for _ in 0..20 {
            let values: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
            let sched = ControlSchedule::uniform(rng.random_range(0.5..20.0), &values).unwrap();
            for s in &propagate(&sys, &s0, &sched, 2).unwrap().states {
                let m = moduli.moduli(s).unwrap();
                for (x, y) in m.iter().zip(&m0) {
                    assert!((x - y).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn degenerate_commuting_system_groups_blocks() {
    let tol = Tolerance::default();
    let sys = ControlSystem::new(
        SquareComplexMatrix::imaginary_diagonal(&[1.0, 1.0, 2.0]).unwrap(),
        SquareComplexMatrix::imaginary_diagonal(&[3.0, 3.0, 1.0]).unwrap(),
        &tol,
    )
    .unwrap();
    let m = conserved_moduli(&sys, &tol).unwrap().unwrap();
    assert_eq!(m.blocks, vec![vec![0, 1], vec![2]]);
    // drift degenerate but split by the control: three singleton blocks
    let sys = ControlSystem::new(
        SquareComplexMatrix::imaginary_diagonal(&[1.0, 1.0, 2.0]).unwrap(),
        SquareComplexMatrix::imaginary_diagonal(&[3.0, -1.0, 1.0]).unwrap(),
        &tol,
    )
    .unwrap();
    let m = conserved_moduli(&sys, &tol).unwrap().unwrap();
    assert_eq!(m.blocks, vec![vec![0], vec![1], vec![2]]);
}

#[test]
fn verdicts_are_consistent() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for sys in systems(&mut rng) {
        let n = sys.n();
        let s0 = StateVector::from_slice(&random_unit_vector(n, &mut rng)).unwrap();
        let r = controllability_report(&sys, &s0, &tol).unwrap();
        assert_eq!(r.sphere_dim, 2 * n - 1);
        assert!(r.orbit_dim <= r.algebra_dim.min(r.sphere_dim));
        match r.verdict {
            Verdict::OperatorControllable => {
                assert_eq!(r.orbit_dim, r.sphere_dim);
                assert!(matches!(
                    r.algebra_class.label,
                    AlgebraLabel::FullUnitary | AlgebraLabel::SpecialUnitary
                ));
            }
            Verdict::StateControllable => assert_eq!(r.orbit_dim, r.sphere_dim),
            Verdict::Restricted => {
                assert!(r.orbit_dim < r.sphere_dim);
                if r.algebra_class.abelian {
                    assert!(r.conserved_moduli.is_some());
                }
            }
        }
    }
}

#[test]
fn generic_pairs_are_operator_controllable() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=5 {
        let sys = ControlSystem::new(
            sq(random_skew_hermitian(n, &mut rng)),
            sq(random_skew_hermitian(n, &mut rng)),
            &tol,
        )
        .unwrap();
        let s0 = StateVector::from_slice(&random_unit_vector(n, &mut rng)).unwrap();
        let r = controllability_report(&sys, &s0, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::OperatorControllable);
        assert_eq!(r.algebra_dim, n * n);
    }
}

#[test]
fn torus_report_matches_closed_form() {
    let tol = Tolerance::default();
    let a = SquareComplexMatrix::imaginary_diagonal(&[1.0, 2f64.sqrt()]).unwrap();
    let sys = ControlSystem::new(a.clone(), a.scale(2.0), &tol).unwrap();
    let s0 = StateVector::from_slice(&[
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    ])
    .unwrap();
    let r = controllability_report(&sys, &s0, &tol).unwrap();
    assert_eq!(
        (r.algebra_dim, r.orbit_dim, r.verdict),
        (1, 1, Verdict::Restricted)
    );
    assert_eq!(r.conserved_moduli, Some(vec![vec![0], vec![1]]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tangent_dimension_is_bounded(seed in any::<u64>(), n in 1usize..=5) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = closure(&[sq(random_skew_hermitian(n, &mut rng))], &tol).unwrap();
        let s = StateVector::from_slice(&random_unit_vector(n, &mut rng)).unwrap();
        let d = tangent_dimension(&basis, &s, &tol).unwrap();
        prop_assert!(d <= basis.dim().min(2 * n - 1));
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), len in 0usize..10) {
        let tol = Tolerance::default();
        let basis = closure(&[i_times(&sigma_z()), i_times(&sigma_x())], &tol).unwrap();
        let s0 = StateVector::basis(2, 1);
        let a = sample_orbit(&basis, &s0, len, 2.0, seed).unwrap();
        let b = sample_orbit(&basis, &s0, len, 2.0, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.1.factors.len(), len);
        prop_assert!(a.1.factors.iter().all(|f| f.t.abs() <= 2.0));
    }
}
