//! Orbits of the generated group through a state: infinitesimal dimension,
//! sampling by random group words, conserved moduli for commuting systems and
//! the controllability report.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{diagonalize_drift, realify_vector, CVector, ControlSystem, StateVector};
use crate::error::{check_dim, Error, Result};
use crate::lie::{classify, closure, AlgebraClass, AlgebraLabel, LieAlgebraBasis};
use crate::matrix::{
    bracket_raw, frobenius_inner_raw, CMatrix, SkewHermitianEigen, SquareComplexMatrix, Tolerance,
};

pub const DEFAULT_DURATION_SCALE: f64 = 2.0;

/// Number of singular values above `rank_tol · σ_max`; zero when `σ_max ≤ rank_tol`.
pub fn numerical_rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max <= rank_tol {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * max).count()
}

/// Dimension of the orbit through `s`: rank of the realified vectors `Xc` for `X` in the basis.
pub fn tangent_dimension(
    basis: &LieAlgebraBasis,
    s: &StateVector,
    tol: &Tolerance,
) -> Result<usize> {
    check_dim(basis.n(), s.dim())?;
    let n = s.dim();
    let columns: Vec<Vec<f64>> = basis
        .elements()
        .iter()
        .map(|x| realify_vector(&(x.as_matrix() * s.amplitudes())))
        .collect();
    if columns.is_empty() {
        return Ok(0);
    }
    let m = DMatrix::from_fn(2 * n, columns.len(), |r, c| columns[c][r]);
    Ok(numerical_rank(&m, tol.rank_tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFactor {
    pub basis_index: usize,
    pub generator: SquareComplexMatrix,
    pub t: f64,
}

/// Product of one-parameter subgroup elements; the first factor acts first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupWord {
    pub factors: Vec<GroupFactor>,
}

impl GroupWord {
    pub fn apply(&self, s: &StateVector) -> StateVector {
        let mut c = s.amplitudes().clone();
        for f in &self.factors {
            c = SkewHermitianEigen::new(f.generator.as_matrix()).exp(f.t) * c;
        }
        StateVector::from_vector_unchecked(c)
    }
}

/// A point on the orbit through `s0` by construction, with the word that produced it.
///
/// Generators are drawn uniformly from the basis and durations uniformly from
/// `[−duration_scale, duration_scale]`, all from a ChaCha stream seeded by `seed`.
pub fn sample_orbit(
    basis: &LieAlgebraBasis,
    s0: &StateVector,
    word_length: usize,
    duration_scale: f64,
    seed: u64,
) -> Result<(StateVector, GroupWord)> {
    check_dim(basis.n(), s0.dim())?;
    if !(duration_scale.is_finite() && duration_scale > 0.0) {
        return Err(Error::Argument(format!(
            "duration_scale must be positive, got {duration_scale}"
        )));
    }
    if word_length > 0 && basis.dim() == 0 {
        return Err(Error::Argument(
            "cannot sample words from an empty basis".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = (0..word_length)
        .map(|_| {
            let k = rng.random_range(0..basis.dim());
            let t = rng.random_range(-duration_scale..=duration_scale);
            GroupFactor {
                basis_index: k,
                generator: basis.elements()[k].clone(),
                t,
            }
        })
        .collect();
    let word = GroupWord { factors };
    Ok((word.apply(s0), word))
}

/// Blocks of a common unitary eigenbasis of commuting `A` and `B` whose
/// amplitude norms no control can change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedModuli {
    /// Columns are the common eigenvectors, ordered by their largest component.
    pub basis: SquareComplexMatrix,
    /// Column index sets sharing a joint eigenvalue pair, ordered by first index.
    pub blocks: Vec<Vec<usize>>,
}

impl ConservedModuli {
    /// Norm of the amplitude block for every block, in the common eigenbasis.
    pub fn moduli(&self, s: &StateVector) -> Result<Vec<f64>> {
        check_dim(self.basis.dim(), s.dim())?;
        let d: CVector = self.basis.adjoint().as_matrix() * s.amplitudes();
        Ok(self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&k| d[k].norm_sqr()).sum::<f64>().sqrt())
            .collect())
    }

    /// Lower bound on `½‖c − target‖²` over every state `c` sharing the moduli of `s0`.
    pub fn mismatch_bound(&self, s0: &StateVector, target: &StateVector) -> Result<f64> {
        let m0 = self.moduli(s0)?;
        let mt = self.moduli(target)?;
        Ok(0.5
            * m0.iter()
                .zip(&mt)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>())
    }
}

/// Present only when `[A, B]` vanishes within tolerance.
pub fn conserved_moduli(sys: &ControlSystem, tol: &Tolerance) -> Result<Option<ConservedModuli>> {
    let a = sys.drift().as_matrix();
    let b = sys.control().as_matrix();
    let n = sys.n();
    let norm = |m: &CMatrix| frobenius_inner_raw(m, m).sqrt();
    let comm = norm(&bracket_raw(a, b));
    if comm > tol.rank_tol * (norm(a) * norm(b)).max(1.0) {
        return Ok(None);
    }

    let spec = diagonalize_drift(sys.drift(), tol)?;
    let u = spec.u.as_matrix();
    let scale = |vals: &[f64]| vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let tie_a = tol.rank_tol * scale(&spec.lambdas);
    let b_scale = norm(b).max(1.0);
    let tie_b = tol.rank_tol * b_scale;

    // (λ, μ, eigenvector) for each common eigenvector
    let mut columns: Vec<(f64, f64, CVector)> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (spec.lambdas[start] - spec.lambdas[end]).abs() <= tie_a {
            end += 1;
        }
        let block_u = u.columns(start, end - start).into_owned();
        let b_block = block_u.adjoint() * b * &block_u;
        let eig = SkewHermitianEigen::new(&b_block);
        let rotated = &block_u * &eig.vectors;
        for k in 0..end - start {
            columns.push((
                spec.lambdas[start],
                eig.frequencies[k],
                rotated.column(k).into_owned(),
            ));
        }
        start = end;
    }

    // order by pivot row, make pivot entries real positive
    let mut keyed: Vec<(usize, f64, f64, CVector)> = columns
        .into_iter()
        .map(|(l, mu, mut v)| {
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v
                .iter()
                .position(|z| z.norm() >= max * (1.0 - 1e-9))
                .unwrap_or(0);
            let phase = v[pivot] / v[pivot].norm();
            v /= phase;
            (pivot, l, mu, v)
        })
        .collect();
    keyed.sort_by_key(|(pivot, ..)| *pivot);

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_keys: Vec<(f64, f64)> = Vec::new();
    for (k, (_, l, mu, _)) in keyed.iter().enumerate() {
        match block_keys
            .iter()
            .position(|(bl, bm)| (bl - l).abs() <= tie_a && (bm - mu).abs() <= tie_b)
        {
            Some(j) => blocks[j].push(k),
            None => {
                block_keys.push((*l, *mu));
                blocks.push(vec![k]);
            }
        }
    }

    let basis = CMatrix::from_columns(&keyed.iter().map(|(.., v)| v.clone()).collect::<Vec<_>>());
    Ok(Some(ConservedModuli {
        basis: SquareComplexMatrix::from_matrix_unchecked(basis),
        blocks,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Generated algebra is u(n) or su(n): every propagator is reachable up to phase.
    OperatorControllable,
    /// Orbit is the whole sphere.
    StateControllable,
    /// Orbit is a proper subset of the sphere.
    Restricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub n: usize,
    pub algebra_dim: usize,
    pub algebra_class: AlgebraClass,
    pub algebra_words: Vec<String>,
    pub orbit_dim: usize,
    pub sphere_dim: usize,
    pub verdict: Verdict,
    pub conserved_moduli: Option<Vec<Vec<usize>>>,
    pub moduli_basis: Option<SquareComplexMatrix>,
    pub summary: String,
}

/// Reachable set from `s0` is the orbit of the generated group; the verdict
/// comes from the orbit dimension and the algebra alone.
pub fn controllability_report(
    sys: &ControlSystem,
    s0: &StateVector,
    tol: &Tolerance,
) -> Result<ControllabilityReport> {
    check_dim(sys.n(), s0.dim())?;
    let n = sys.n();
    let basis = closure(&[sys.drift().clone(), sys.control().clone()], tol)?;
    let class = classify(&basis, tol);
    let orbit_dim = tangent_dimension(&basis, s0, tol)?;
    let sphere_dim = 2 * n - 1;
    let moduli = conserved_moduli(sys, tol)?;

    let full = matches!(
        class.label,
        AlgebraLabel::FullUnitary | AlgebraLabel::SpecialUnitary
    );
    let verdict = if orbit_dim == sphere_dim {
        if full {
            Verdict::OperatorControllable
        } else {
            Verdict::StateControllable
        }
    } else {
        Verdict::Restricted
    };

    let detail = match verdict {
        Verdict::OperatorControllable => "the orbit is the whole sphere and every unitary in the generated group is reachable as a propagator".to_string(),
        Verdict::StateControllable => "the orbit is the whole sphere".to_string(),
        Verdict::Restricted => match &moduli {
            Some(m) => format!(
                "the orbit is a proper subset of the sphere; A and B commute and the amplitude norms of {} eigenbasis blocks are conserved",
                m.blocks.len()
            ),
            None => "the orbit is a proper subset of the sphere".to_string(),
        },
    };
    let summary = format!(
        "The set reachable from the initial state equals the orbit through it of the group generated by the Lie algebra of {{A, B}} \
         (algebra dimension {}, orbit dimension {} of sphere dimension {}). This identification holds whether or not that group is \
         compact or closed, so no compactness test is made. Verdict: {}.",
        class.dim, orbit_dim, sphere_dim, detail
    );

    Ok(ControllabilityReport {
        n,
        algebra_dim: class.dim,
        algebra_class: class,
        algebra_words: basis.provenance().iter().map(|w| w.to_string()).collect(),
        orbit_dim,
        sphere_dim,
        verdict,
        conserved_moduli: moduli.as_ref().map(|m| m.blocks.clone()),
        moduli_basis: moduli.map(|m| m.basis),
        summary,
    })
}
