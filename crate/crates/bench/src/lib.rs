//! Fixtures shared by the benchmarks in `benches/`.

use num_complex::Complex64;
use reachctl_core::{ControlSystem, SquareComplexMatrix, StateVector, Tolerance};

/// A controllable `n`-level chain: drift `diag(i√1, …, i√n)` with real nearest-neighbour coupling.
pub fn chain_system(n: usize) -> ControlSystem {
    let lambdas: Vec<f64> = (1..=n).map(|k| (k as f64).sqrt()).collect();
    let a = SquareComplexMatrix::imaginary_diagonal(&lambdas).unwrap();
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for k in 0..n.saturating_sub(1) {
        let w = 1.0 + 0.1 * k as f64;
        rows[k][k + 1] = Complex64::new(w, 0.0);
        rows[k + 1][k] = Complex64::new(-w, 0.0);
    }
    let b = SquareComplexMatrix::from_rows(&rows).unwrap();
    ControlSystem::new(a, b, &Tolerance::default()).unwrap()
}

/// Equal superposition over all levels.
pub fn uniform_state(n: usize) -> StateVector {
    StateVector::normalized(&vec![Complex64::new(1.0, 0.0); n]).unwrap()
}
