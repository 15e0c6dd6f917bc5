//! Synthesis of piecewise-constant controls that steer a state onto a target.
//!
//! Each restart runs gradient descent with a backtracking (halving, Armijo)
//! line search on the terminal distance. Gradients are exact: the derivative
//! of `exp(Δt(A + εB))` in `ε` is the top-right block of the exponential of
//! `[[Δt(A+εB), ΔtB], [0, Δt(A+εB)]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_final, CVector, ControlSchedule, ControlSystem, StateVector};
use crate::error::{check_dim, Error, Result};
use crate::lie::closure;
use crate::matrix::{expm_pade, CMatrix, Tolerance};
use crate::orbit::sample_orbit;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringConfig {
    pub segments: usize,
    pub horizon: f64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub target_distance: f64,
    pub seed: u64,
    pub phase_sensitive: bool,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        Self {
            segments: 20,
            horizon: 5.0,
            restarts: 8,
            max_iterations: 500,
            target_distance: 1e-6,
            seed: 0,
            phase_sensitive: true,
        }
    }
}

impl SteeringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 || self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Argument(
                "segments, restarts and max_iterations must be positive".into(),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Argument(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.target_distance.is_finite() && self.target_distance > 0.0) {
            return Err(Error::Argument(format!(
                "target_distance must be positive, got {}",
                self.target_distance
            )));
        }
        Ok(())
    }
}

/// A schedule together with the terminal distance it achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityCertificate {
    pub schedule: ControlSchedule,
    pub achieved_distance: f64,
    pub target_distance: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub note: String,
}

const CONVERGED_NOTE: &str =
    "schedule steers the initial state to the target within the requested distance";
const NOT_CONVERGED_NOTE: &str =
    "optimizer did not reach the requested distance; this is a statement about the \
     optimizer run (or an off-orbit target), not evidence that an on-orbit target is unreachable";

/// Phase-sensitive: `½‖c − target‖²`. Projective: `1 − |⟨target, c⟩|²`.
pub fn distance(s: &StateVector, target: &StateVector, phase_sensitive: bool) -> Result<f64> {
    check_dim(target.dim(), s.dim())?;
    Ok(raw_distance(
        s.amplitudes(),
        target.amplitudes(),
        phase_sensitive,
    ))
}

fn raw_distance(c: &CVector, target: &CVector, phase_sensitive: bool) -> f64 {
    if phase_sensitive {
        0.5 * (c - target).norm_squared()
    } else {
        1.0 - target.dotc(c).norm_sqr()
    }
}

/// `g` with `δf = Re(g† δc)`.
fn distance_cogradient(c: &CVector, target: &CVector, phase_sensitive: bool) -> CVector {
    if phase_sensitive {
        c - target
    } else {
        target * (target.dotc(c) * -2.0)
    }
}

/// Segment propagator and its derivative with respect to the segment value.
fn propagator_and_derivative(
    sys: &ControlSystem,
    duration: f64,
    value: f64,
) -> Result<(CMatrix, CMatrix)> {
    let n = sys.n();
    let dt = Complex64::new(duration, 0.0);
    let g = sys.generator(value) * dt;
    let b = sys.control().as_matrix() * dt;
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&g);
    block.view_mut((n, n), (n, n)).copy_from(&g);
    block.view_mut((0, n), (n, n)).copy_from(&b);
    let e = expm_pade(&block)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
    ))
}

/// Exact derivative of the terminal distance with respect to every segment value.
pub fn gradient(
    sys: &ControlSystem,
    sched: &ControlSchedule,
    s0: &StateVector,
    target: &StateVector,
    phase_sensitive: bool,
) -> Result<Vec<f64>> {
    check_dim(sys.n(), s0.dim())?;
    check_dim(sys.n(), target.dim())?;
    let segs = sched.segments();
    let mut props = Vec::with_capacity(segs.len());
    let mut forward = Vec::with_capacity(segs.len() + 1);
    forward.push(s0.amplitudes().clone());
    for seg in segs {
        let (u, du) = propagator_and_derivative(sys, seg.duration, seg.value)?;
        let next = &u * forward.last().unwrap();
        forward.push(next);
        props.push((u, du));
    }
    let mut costate = distance_cogradient(
        forward.last().unwrap(),
        target.amplitudes(),
        phase_sensitive,
    );
    let mut grad = vec![0.0; segs.len()];
    for k in (0..segs.len()).rev() {
        let (u, du) = &props[k];
        grad[k] = costate.dotc(&(du * &forward[k])).re;
        costate = u.adjoint() * costate;
    }
    Ok(grad)
}

/// Result of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub restart_index: usize,
    pub values: Vec<f64>,
    pub distance: f64,
    pub iterations: usize,
}

/// Starting values for a restart: zeros for restart 0, otherwise uniform in
/// `[−1, 1]` from the ChaCha stream `(seed, restart)`.
pub fn initial_values(cfg: &SteeringConfig, restart: usize) -> Vec<f64> {
    if restart == 0 {
        return vec![0.0; cfg.segments];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    (0..cfg.segments)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect()
}

/// Runs one restart; `observe` sees every accepted iterate and its distance,
/// starting with the initial values.
pub fn descend(
    sys: &ControlSystem,
    s0: &StateVector,
    target: &StateVector,
    cfg: &SteeringConfig,
    restart: usize,
    observe: &mut dyn FnMut(&[f64], f64),
) -> Result<RestartOutcome> {
    cfg.validate()?;
    let objective = |values: &[f64]| -> Result<f64> {
        let sched = ControlSchedule::uniform(cfg.horizon, values)?;
        let c = propagate_final(sys, s0, &sched)?;
        distance(&c, target, cfg.phase_sensitive)
    };

    let mut values = initial_values(cfg, restart);
    let mut f = objective(&values)?;
    observe(&values, f);
    let mut iterations = 0;
    while f > cfg.target_distance && iterations < cfg.max_iterations {
        let sched = ControlSchedule::uniform(cfg.horizon, &values)?;
        let g = gradient(sys, &sched, s0, target, cfg.phase_sensitive)?;
        let g_sq: f64 = g.iter().map(|x| x * x).sum();
        if !(g_sq > 0.0 && g_sq.is_finite()) {
            break;
        }
        // first trial step assumes the optimum value is zero, as for on-orbit targets
        let mut step = f / g_sq;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = values.iter().zip(&g).map(|(v, d)| v - step * d).collect();
            let ft = objective(&trial)?;
            if ft <= f - ARMIJO * step * g_sq {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, ft)) = accepted else { break };
        values = trial;
        f = ft;
        iterations += 1;
        observe(&values, f);
    }
    Ok(RestartOutcome {
        restart_index: restart,
        values,
        distance: f,
        iterations,
    })
}

/// Best certificate over `cfg.restarts` independent descents.
pub fn steer(
    sys: &ControlSystem,
    s0: &StateVector,
    target: &StateVector,
    cfg: &SteeringConfig,
) -> Result<ReachabilityCertificate> {
    steer_with_threads(sys, s0, target, cfg, 1)
}

/// As [`steer`], running restarts on up to `threads` workers; the result does
/// not depend on `threads`.
pub fn steer_with_threads(
    sys: &ControlSystem,
    s0: &StateVector,
    target: &StateVector,
    cfg: &SteeringConfig,
    threads: usize,
) -> Result<ReachabilityCertificate> {
    cfg.validate()?;
    check_dim(sys.n(), s0.dim())?;
    check_dim(sys.n(), target.dim())?;
    let norm_sq = target.amplitudes().norm_squared();
    if (norm_sq - 1.0).abs() > crate::dynamics::NORM_TOL {
        return Err(Error::Validation(format!(
            "target is not unit norm: {norm_sq}"
        )));
    }
    let run = |r: usize| descend(sys, s0, target, cfg, r, &mut |_, _| {});
    let outcomes: Vec<RestartOutcome> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.restarts)
                .into_par_iter()
                .map(run)
                .collect::<Result<_>>()
        })?
    } else {
        (0..cfg.restarts).map(run).collect::<Result<_>>()?
    };
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.distance < best.distance { o } else { best })
        .expect("at least one restart");

    let schedule = ControlSchedule::uniform(cfg.horizon, &best.values)?;
    let achieved = distance(
        &propagate_final(sys, s0, &schedule)?,
        target,
        cfg.phase_sensitive,
    )?;
    let converged = achieved <= cfg.target_distance;
    Ok(ReachabilityCertificate {
        schedule,
        achieved_distance: achieved,
        target_distance: cfg.target_distance,
        converged,
        iterations_used: best.iterations,
        restart_index: best.restart_index,
        note: if converged {
            CONVERGED_NOTE
        } else {
            NOT_CONVERGED_NOTE
        }
        .to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub sample: usize,
    pub sample_seed: u64,
    pub target: StateVector,
    pub achieved_distance: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub restart_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerificationVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationTable {
    pub samples: usize,
    pub word_length: usize,
    pub seed: u64,
    pub target_distance: f64,
    pub rows: Vec<VerificationRow>,
    pub verdict: VerificationVerdict,
}

/// Samples `samples` targets on the orbit of `s0` (sample `i` uses seed
/// `seed + i`) and steers to each; PASS iff every steering run converges.
#[allow(clippy::too_many_arguments)]
pub fn verify_orbit_reachability(
    sys: &ControlSystem,
    s0: &StateVector,
    samples: usize,
    word_length: usize,
    seed: u64,
    cfg: &SteeringConfig,
    tol: &Tolerance,
    threads: usize,
) -> Result<VerificationTable> {
    let basis = closure(&[sys.drift().clone(), sys.control().clone()], tol)?;
    let targets = (0..samples)
        .map(|i| {
            let sample_seed = seed.wrapping_add(i as u64);
            sample_orbit(
                &basis,
                s0,
                word_length,
                crate::orbit::DEFAULT_DURATION_SCALE,
                sample_seed,
            )
            .map(|(t, _)| (sample_seed, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let run =
        |(i, (sample_seed, target)): (usize, &(u64, StateVector))| -> Result<VerificationRow> {
            let cert = steer(sys, s0, target, cfg)?;
            Ok(VerificationRow {
                sample: i,
                sample_seed: *sample_seed,
                target: target.clone(),
                achieved_distance: cert.achieved_distance,
                converged: cert.converged,
                iterations_used: cert.iterations_used,
                restart_index: cert.restart_index,
            })
        };
    let rows: Vec<VerificationRow> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
        pool.install(|| {
            targets
                .par_iter()
                .enumerate()
                .map(run)
                .collect::<Result<_>>()
        })?
    } else {
        targets.iter().enumerate().map(run).collect::<Result<_>>()?
    };
    let verdict = if rows.iter().all(|r| r.converged) {
        VerificationVerdict::Pass
    } else {
        VerificationVerdict::Fail
    };
    Ok(VerificationTable {
        samples,
        word_length,
        seed,
        target_distance: cfg.target_distance,
        rows,
        verdict,
    })
}
