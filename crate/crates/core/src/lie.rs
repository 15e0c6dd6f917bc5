//! Lie algebra generated by a set of skew-Hermitian matrices: breadth-first
//! bracket closure with orthonormal basis completion, span membership and
//! classification.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::{
    bracket_raw, frobenius_inner_raw, require_skew_hermitian, CMatrix, SquareComplexMatrix,
    Tolerance,
};

/// The bracket expression a basis element was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BracketWord {
    /// Index into the generator list passed to [`closure`].
    Generator(usize),
    Bracket(Box<BracketWord>, Box<BracketWord>),
}

impl BracketWord {
    pub fn depth(&self) -> usize {
        match self {
            BracketWord::Generator(_) => 1,
            BracketWord::Bracket(a, b) => a.depth() + b.depth(),
        }
    }
}

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketWord::Generator(i) => write!(f, "g{i}"),
            BracketWord::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Orthonormal (real Frobenius pairing) basis of a matrix Lie algebra.
#[derive(Debug, Clone)]
pub struct LieAlgebraBasis {
    n: usize,
    elements: Vec<SquareComplexMatrix>,
    provenance: Vec<BracketWord>,
}

impl LieAlgebraBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SquareComplexMatrix] {
        &self.elements
    }

    pub fn provenance(&self) -> &[BracketWord] {
        &self.provenance
    }

    /// Wraps already orthonormal skew-Hermitian elements, e.g. a hand-picked subalgebra.
    pub fn from_orthonormal(
        n: usize,
        elements: Vec<SquareComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        for (k, e) in elements.iter().enumerate() {
            check_dim(n, e.dim())?;
            require_skew_hermitian(e, tol, &format!("basis element {k}"))?;
        }
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                let ip = frobenius_inner_raw(a, b);
                if (ip - expected).abs() > tol.rank_tol.max(1e-12) * 10.0 {
                    return Err(Error::Validation(format!(
                        "basis elements {i} and {j} are not orthonormal (inner product {ip:.3e})"
                    )));
                }
            }
        }
        let provenance = (0..elements.len()).map(BracketWord::Generator).collect();
        Ok(Self {
            n,
            elements,
            provenance,
        })
    }

    fn residual(&self, x: &CMatrix) -> CMatrix {
        // two passes of modified Gram–Schmidt
        let mut r = x.clone();
        for _ in 0..2 {
            for e in &self.elements {
                let coeff = frobenius_inner_raw(e, &r);
                r -= e.as_matrix() * num_complex::Complex64::new(coeff, 0.0);
            }
        }
        r
    }
}

fn norm(x: &CMatrix) -> f64 {
    frobenius_inner_raw(x, x).sqrt()
}

fn normalized_skew(r: CMatrix) -> SquareComplexMatrix {
    let skew = (&r - r.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let nrm = norm(&skew);
    SquareComplexMatrix::from_matrix_unchecked(skew / num_complex::Complex64::new(nrm, 0.0))
}

/// Orthonormal basis of the smallest real Lie algebra containing `generators`.
///
/// Generators are Gram–Schmidt seeded; unprocessed basis pairs are bracketed in
/// first-in-first-out order and the orthogonal residual of each bracket is
/// appended when it exceeds `rank_tol · max(‖[X, Y]‖, 1)`. Stops when no pairs
/// remain or the basis spans all of u(n).
pub fn closure(generators: &[SquareComplexMatrix], tol: &Tolerance) -> Result<LieAlgebraBasis> {
    tol.validate()?;
    let first = generators
        .first()
        .ok_or_else(|| Error::Argument("closure needs at least one generator".into()))?;
    let n = first.dim();
    for (k, g) in generators.iter().enumerate() {
        check_dim(n, g.dim())?;
        require_skew_hermitian(g, tol, &format!("generator {k}"))?;
    }
    let cap = n * n;
    let scale = generators
        .iter()
        .map(|g| g.frobenius_norm())
        .fold(0.0, f64::max);

    let mut basis = LieAlgebraBasis {
        n,
        elements: Vec::new(),
        provenance: Vec::new(),
    };
    for (k, g) in generators.iter().enumerate() {
        if basis.dim() == cap {
            break;
        }
        let r = basis.residual(g.as_matrix());
        if norm(&r) > tol.rank_tol * scale {
            basis.elements.push(normalized_skew(r));
            basis.provenance.push(BracketWord::Generator(k));
        }
    }

    let mut pending: VecDeque<(usize, usize)> = VecDeque::new();
    for j in 0..basis.dim() {
        for i in 0..j {
            pending.push_back((i, j));
        }
    }

    while let Some((i, j)) = pending.pop_front() {
        if basis.dim() == cap {
            break;
        }
        let br = bracket_raw(&basis.elements[i], &basis.elements[j]);
        let br_norm = norm(&br);
        let r = basis.residual(&br);
        if norm(&r) > tol.rank_tol * br_norm.max(1.0) {
            let k = basis.dim();
            basis.elements.push(normalized_skew(r));
            basis.provenance.push(BracketWord::Bracket(
                Box::new(basis.provenance[i].clone()),
                Box::new(basis.provenance[j].clone()),
            ));
            for m in 0..k {
                pending.push_back((m, k));
            }
        }
    }
    Ok(basis)
}

/// Frobenius norm of the part of `x` orthogonal to the span of `basis`; zero for members.
pub fn member(basis: &LieAlgebraBasis, x: &SquareComplexMatrix) -> Result<f64> {
    check_dim(basis.n, x.dim())?;
    Ok(norm(&basis.residual(x.as_matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlgebraLabel {
    FullUnitary,
    SpecialUnitary,
    Abelian,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraClass {
    pub dim: usize,
    pub traceless: bool,
    pub abelian: bool,
    pub label: AlgebraLabel,
}

/// Labels follow the precedence FULL_UNITARY, SPECIAL_UNITARY, ABELIAN, OTHER.
pub fn classify(basis: &LieAlgebraBasis, tol: &Tolerance) -> AlgebraClass {
    let n = basis.n;
    let dim = basis.dim();
    let norms: Vec<f64> = basis.elements.iter().map(|e| e.frobenius_norm()).collect();
    let traceless = basis
        .elements
        .iter()
        .zip(&norms)
        .all(|(e, nrm)| e.trace().norm() <= tol.rank_tol * nrm);
    let abelian = (0..dim).all(|i| {
        (i + 1..dim).all(|j| {
            let br = bracket_raw(&basis.elements[i], &basis.elements[j]);
            norm(&br) <= tol.rank_tol * norms[i] * norms[j]
        })
    });
    let label = if dim == n * n {
        AlgebraLabel::FullUnitary
    } else if dim + 1 == n * n && traceless {
        AlgebraLabel::SpecialUnitary
    } else if abelian && dim >= 1 {
        AlgebraLabel::Abelian
    } else {
        AlgebraLabel::Other
    };
    AlgebraClass {
        dim,
        traceless,
        abelian,
        label,
    }
}
