//! Dense complex matrix substrate: brackets, the real Frobenius pairing,
//! skew-Hermitian validation and matrix exponentials.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Numerical tolerances shared by every verdict in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value / residual cutoff for rank and span tests.
    pub rank_tol: f64,
    /// Relative max-entry deviation allowed in `X + X†`.
    pub skew_tol: f64,
    /// Accuracy target for propagation.
    pub ode_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            skew_tol: 1e-12,
            ode_tol: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, skew_tol: f64, ode_tol: f64) -> Result<Self> {
        let tol = Self {
            rank_tol,
            skew_tol,
            ode_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("skew_tol", self.skew_tol),
            ("ode_tol", self.ode_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A finite, square, complex matrix of dimension at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareComplexMatrix(CMatrix);

impl SquareComplexMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::Validation(format!(
                "matrix must be square with n >= 1, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some((idx, _)) = m.iter().enumerate().find(|(_, z)| !z.is_finite()) {
            // nalgebra storage is column-major
            let (r, c) = (idx % m.nrows(), idx / m.nrows());
            return Err(Error::Numeric(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    /// Builds a matrix from row-major nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// `diag(i·λ₁, …, i·λₙ)`, the canonical form of a skew-Hermitian drift.
    pub fn imaginary_diagonal(lambdas: &[f64]) -> Result<Self> {
        let d: Vec<Complex64> = lambdas.iter().map(|&l| I * l).collect();
        Self::from_diagonal(&d)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_inner_raw(&self.0, &self.0).sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

impl Deref for SquareComplexMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl Serialize for SquareComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        Self::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn frobenius_inner_raw(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum()
}

/// Largest entry of `X + X†` together with its position, relative to `max(1, max|X|)`.
pub fn skew_violation(x: &SquareComplexMatrix) -> (f64, (usize, usize)) {
    let n = x.dim();
    let scale = x.max_abs().max(1.0);
    let mut worst = (0.0, (0, 0));
    for r in 0..n {
        for c in 0..n {
            let v = (x[(r, c)] + x[(c, r)].conj()).norm() / scale;
            if v > worst.0 {
                worst = (v, (r, c));
            }
        }
    }
    worst
}

pub fn is_skew_hermitian(x: &SquareComplexMatrix, tol: &Tolerance) -> bool {
    skew_violation(x).0 <= tol.skew_tol
}

/// Fails with a validation error naming `label` and the worst entry when `x` is not skew-Hermitian.
pub fn require_skew_hermitian(x: &SquareComplexMatrix, tol: &Tolerance, label: &str) -> Result<()> {
    let (v, (r, c)) = skew_violation(x);
    if v <= tol.skew_tol {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{label} is not skew-Hermitian: |X + X^H| at ({r}, {c}) is {v:.3e} (relative), tolerance {:.1e}",
            tol.skew_tol
        )))
    }
}

/// Commutator `XY − YX`.
pub fn bracket(x: &SquareComplexMatrix, y: &SquareComplexMatrix) -> Result<SquareComplexMatrix> {
    check_dim(x.dim(), y.dim())?;
    Ok(SquareComplexMatrix(bracket_raw(&x.0, &y.0)))
}

pub(crate) fn bracket_raw(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

/// Real part of the Frobenius pairing, `Re tr(X†Y)`.
pub fn frobenius_inner(x: &SquareComplexMatrix, y: &SquareComplexMatrix) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(frobenius_inner_raw(&x.0, &y.0))
}

/// `exp(tX)`. Skew-Hermitian inputs go through a unitary eigendecomposition so the
/// result is unitary up to rounding; anything else uses scaling-and-squaring Padé.
pub fn matrix_exp(x: &SquareComplexMatrix, t: f64) -> Result<SquareComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::Numeric(format!(
            "exponent scale t = {t} is not finite"
        )));
    }
    if is_skew_hermitian(x, &Tolerance::default()) {
        Ok(SquareComplexMatrix(SkewHermitianEigen::new(&x.0).exp(t)))
    } else {
        let scaled = &x.0 * Complex64::new(t, 0.0);
        Ok(SquareComplexMatrix(expm_pade(&scaled)?))
    }
}

/// Spectral form `X = V diag(i·ω) V†` of a skew-Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SkewHermitianEigen {
    pub vectors: CMatrix,
    pub frequencies: DVector<f64>,
}

impl SkewHermitianEigen {
    /// The caller guarantees `x` is skew-Hermitian; only its skew-Hermitian part is used.
    pub fn new(x: &CMatrix) -> Self {
        // H = -iX is Hermitian with the same eigenvectors; X v = iω v  ⇔  H v = ω v
        let h = x * (-I);
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        Self {
            vectors: eig.eigenvectors,
            frequencies: eig.eigenvalues,
        }
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// `exp(tX) = V diag(e^{iωt}) V†`.
    pub fn exp(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, self.frequencies[k] * t);
        }
        scaled * self.vectors.adjoint()
    }
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm thresholds below which the degree-m approximant is accurate to unit roundoff
const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.53939833006323e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068, 9),
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// General matrix exponential by scaling and squaring with a diagonal Padé approximant.
pub fn expm_pade(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::Shape {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("non-finite entry in exponent".into()));
    }
    let ident = CMatrix::identity(n, n);
    let norm = one_norm(a);
    let c = |v: f64| Complex64::new(v, 0.0);

    let (u, v, squarings) = if let Some(&(_, m)) = THETA.iter().find(|(th, _)| norm <= *th) {
        let coeffs: &[f64] = match m {
            3 => &PADE3,
            5 => &PADE5,
            7 => &PADE7,
            _ => &PADE9,
        };
        let a2 = a * a;
        let mut u_sum = &ident * c(coeffs[1]);
        let mut v_sum = &ident * c(coeffs[0]);
        let mut power = ident.clone();
        for k in 1..=m / 2 {
            power = &power * &a2;
            u_sum += &power * c(coeffs[2 * k + 1]);
            v_sum += &power * c(coeffs[2 * k]);
        }
        (a * u_sum, v_sum, 0)
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let a = a * c(2f64.powi(-s));
        let b = &PADE13;
        let a2 = &a * &a;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let inner_u = &a6 * (&a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]))
            + &a6 * c(b[7])
            + &a4 * c(b[5])
            + &a2 * c(b[3])
            + &ident * c(b[1]);
        let u = &a * inner_u;
        let v = &a6 * (&a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]))
            + &a6 * c(b[6])
            + &a4 * c(b[4])
            + &a2 * c(b[2])
            + &ident * c(b[0]);
        (u, v, s as u32)
    };

    let numer = &v + &u;
    let denom = &v - &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numeric("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Principal logarithm of a unitary matrix, returned as a skew-Hermitian matrix.
///
/// Uses the complex Schur form, which is diagonal for normal input.
pub fn unitary_log(u: &SquareComplexMatrix) -> Result<SquareComplexMatrix> {
    let n = u.dim();
    let schur = Schur::try_new(u.0.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut log_diag = CMatrix::zeros(n, n);
    for k in 0..n {
        let z = t[(k, k)];
        if z.norm() < 1e-12 {
            return Err(Error::Numeric("matrix is singular, no logarithm".into()));
        }
        log_diag[(k, k)] = Complex64::new(z.norm().ln(), z.arg());
    }
    let log = &q * log_diag * q.adjoint();
    let skew = (&log - log.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(SquareComplexMatrix(skew))
}

/// Pauli matrices and their skew-Hermitian multiples.
pub mod pauli {
    use super::*;

    fn m(rows: [[Complex64; 2]; 2]) -> SquareComplexMatrix {
        SquareComplexMatrix(DMatrix::from_fn(2, 2, |r, c| rows[r][c]))
    }

    const O: Complex64 = Complex64 { re: 0.0, im: 0.0 };
    const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

    pub fn sigma_x() -> SquareComplexMatrix {
        m([[O, ONE], [ONE, O]])
    }

    pub fn sigma_y() -> SquareComplexMatrix {
        m([[O, -I], [I, O]])
    }

    pub fn sigma_z() -> SquareComplexMatrix {
        m([[ONE, O], [O, -ONE]])
    }

    /// `i·σ`, the skew-Hermitian generator associated with a Pauli matrix.
    pub fn i_times(p: &SquareComplexMatrix) -> SquareComplexMatrix {
        SquareComplexMatrix(&p.0 * I)
    }
}
