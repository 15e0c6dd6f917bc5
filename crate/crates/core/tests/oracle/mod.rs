//! Reference computations kept independent of the library code paths they check.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;

/// `(M − M†)/2` with standard complex Gaussian `M`.
pub fn random_skew_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&m - m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_traceless_skew_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut m = random_skew_hermitian(n, rng);
    let shift = m.trace() / Complex64::new(n as f64, 0.0);
    for k in 0..n {
        m[(k, k)] -= shift;
    }
    m
}

pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / nrm).collect()
}

fn commutator(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

fn realified(m: &CMat) -> Vec<f64> {
    m.iter()
        .map(|z| z.re)
        .chain(m.iter().map(|z| z.im))
        .collect()
}

/// Rank of the column stack of realified matrices, singular-value cutoff relative to the largest.
pub fn stacked_rank(mats: &[CMat], rank_tol: f64) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<f64>> = mats.iter().map(realified).collect();
    let m = DMatrix::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r]);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max <= rank_tol {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * max).count()
}

fn unit(m: CMat) -> Option<CMat> {
    let nrm = m.norm();
    (nrm > 1e-300).then(|| m / Complex64::new(nrm, 0.0))
}

/// Every right-normed bracket word `[g₁,[g₂,[…,gₖ]]]` with `k ≤ depth`, literally enumerated.
pub fn all_right_normed_words(generators: &[CMat], depth: usize) -> Vec<CMat> {
    let mut out = generators.to_vec();
    let mut level = generators.to_vec();
    for _ in 1..depth {
        let next: Vec<CMat> = generators
            .iter()
            .flat_map(|g| level.iter().map(move |w| commutator(g, w)))
            .collect();
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Rank of the nested-bracket stack up to `depth`. Each level keeps only words
/// that raise the rank of what has been collected; the discarded ones lie in
/// the span already, so the final span is that of all words up to `depth`.
pub fn nested_bracket_rank(generators: &[CMat], depth: usize, rank_tol: f64) -> usize {
    let mut collected: Vec<CMat> = Vec::new();
    let mut level: Vec<CMat> = Vec::new();
    for g in generators.iter().cloned().filter_map(unit) {
        collected.push(g.clone());
        if stacked_rank(&collected, rank_tol) < collected.len() {
            collected.pop();
        } else {
            level.push(g);
        }
    }
    let gens: Vec<CMat> = generators.iter().cloned().filter_map(unit).collect();
    for _ in 1..depth {
        let mut next = Vec::new();
        for g in &gens {
            for w in &level {
                if let Some(b) = unit(commutator(g, w)) {
                    collected.push(b.clone());
                    if stacked_rank(&collected, rank_tol) < collected.len() {
                        collected.pop();
                    } else {
                        next.push(b);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    collected.len()
}

/// `exp(X)` by a plain Taylor series after scaling, then squaring.
pub fn taylor_exp(x: &CMat) -> CMat {
    let n = x.nrows();
    let norm = x.norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = x * Complex64::new(2f64.powi(-s), 0.0);
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `‖c(t) − c₀‖` for `c(t) = diag(e^{iλt}) c₀` on the grid `dt, 2dt, …`; first grid
/// time inside the ball after having left it.
pub fn dense_first_return(
    lambdas: &[f64],
    c0: &[Complex64],
    tol: f64,
    t_max: f64,
    dt: f64,
) -> Option<f64> {
    let mut left = false;
    let steps = (t_max / dt).floor() as usize;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let d: f64 = lambdas
            .iter()
            .zip(c0)
            .map(|(l, c)| (c * (Complex64::from_polar(1.0, l * t) - 1.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if d > tol {
            left = true;
        } else if left {
            return Some(t);
        }
    }
    None
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_differences(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}
