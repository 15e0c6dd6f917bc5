//! State and propagator evolution under piecewise-constant controls, the
//! drift eigenbasis reduction, and drift recurrence scans.

use std::cmp::Ordering;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::{
    require_skew_hermitian, CMatrix, SkewHermitianEigen, SquareComplexMatrix, Tolerance,
};

/// Allowed deviation of `‖c‖²` from one for a state on the unit sphere.
pub const NORM_TOL: f64 = 1e-9;

pub type CVector = DVector<Complex64>;

/// Unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(c: CVector) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Validation(
                "state must have at least one amplitude".into(),
            ));
        }
        if c.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric("state has a non-finite amplitude".into()));
        }
        let norm_sq = c.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state is not unit norm: sum |c_k|^2 = {norm_sq:.12}"
            )));
        }
        Ok(Self(c))
    }

    pub fn from_slice(c: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(c))
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(c: &[Complex64]) -> Result<Self> {
        let v = CVector::from_column_slice(c);
        let nrm = v.norm();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::Validation(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(v.unscale(nrm))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = CVector::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub(crate) fn from_vector_unchecked(c: CVector) -> Self {
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        self.0.iter().copied().collect()
    }

    pub fn apply(&self, u: &CMatrix) -> Self {
        Self(u * &self.0)
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = Vec::<Complex64>::deserialize(d)?;
        Self::from_slice(&c).map_err(serde::de::Error::custom)
    }
}

/// `ċ = Ac + ε(t)Bc` with skew-Hermitian drift `A` and coupling `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSystem {
    a: SquareComplexMatrix,
    b: SquareComplexMatrix,
}

impl ControlSystem {
    pub fn new(a: SquareComplexMatrix, b: SquareComplexMatrix, tol: &Tolerance) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        require_skew_hermitian(&a, tol, "A")?;
        require_skew_hermitian(&b, tol, "B")?;
        Ok(Self { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub fn drift(&self) -> &SquareComplexMatrix {
        &self.a
    }

    pub fn control(&self) -> &SquareComplexMatrix {
        &self.b
    }

    /// `A + εB`.
    pub fn generator(&self, value: f64) -> CMatrix {
        self.a.as_matrix() + self.b.as_matrix() * Complex64::new(value, 0.0)
    }

    /// `exp(Δt(A + εB))`.
    pub fn segment_propagator(&self, seg: &Segment) -> CMatrix {
        SkewHermitianEigen::new(&self.generator(seg.value)).exp(seg.duration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub value: f64,
}

/// Piecewise-constant control `ε(t)`, applied segment by segment in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct ControlSchedule {
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    segments: Vec<Segment>,
}

impl TryFrom<ScheduleRepr> for ControlSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Self::new(r.segments)
    }
}

impl From<ControlSchedule> for ScheduleRepr {
    fn from(s: ControlSchedule) -> Self {
        Self {
            segments: s.segments,
        }
    }
}

impl ControlSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (k, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::Validation(format!(
                    "segment {k}: duration must be positive and finite, got {}",
                    s.duration
                )));
            }
            if !s.value.is_finite() {
                return Err(Error::Validation(format!(
                    "segment {k}: control value must be finite, got {}",
                    s.value
                )));
            }
        }
        Ok(Self { segments })
    }

    /// Equal-length segments over `horizon` carrying `values`.
    pub fn uniform(horizon: f64, values: &[f64]) -> Result<Self> {
        let dt = horizon / values.len() as f64;
        Self::new(
            values
                .iter()
                .map(|&value| Segment {
                    duration: dt,
                    value,
                })
                .collect(),
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn values(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.value).collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn is_drift_only(&self) -> bool {
        self.segments.iter().all(|s| s.value == 0.0)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        Self { segments }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }
}

/// Drift eigenfrequencies and the unitary eigenbasis: `U† A U = diag(iλ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpectrum {
    pub lambdas: Vec<f64>,
    pub u: SquareComplexMatrix,
}

impl DriftSpectrum {
    /// Amplitudes in the drift eigenbasis, `U† c`.
    pub fn eigen_amplitudes(&self, s: &StateVector) -> Result<CVector> {
        check_dim(self.lambdas.len(), s.dim())?;
        Ok(self.u.adjoint().as_matrix() * s.amplitudes())
    }
}

/// Eigenfrequencies sorted descending; ties ordered by comparing eigenvector
/// component moduli, larger first. Each eigenvector's largest component is made
/// real and positive.
pub fn diagonalize_drift(a: &SquareComplexMatrix, tol: &Tolerance) -> Result<DriftSpectrum> {
    require_skew_hermitian(a, tol, "drift")?;
    let n = a.dim();
    let eig = SkewHermitianEigen::new(a.as_matrix());

    let mut columns: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v: CVector = eig.vectors.column(k).into_owned();
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v
                .iter()
                .position(|z| z.norm() >= max * (1.0 - 1e-9))
                .unwrap_or(0);
            let phase = v[pivot] / v[pivot].norm();
            v /= phase;
            (eig.frequencies[k], v)
        })
        .collect();

    let scale = columns.iter().map(|(l, _)| l.abs()).fold(1.0, f64::max);
    let tie = tol.rank_tol * scale;
    columns.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (columns[start].0 - columns[end].0).abs() <= tie {
            end += 1;
        }
        columns[start..end].sort_by(|x, y| {
            x.1.iter()
                .zip(y.1.iter())
                .map(|(p, q)| q.norm().partial_cmp(&p.norm()).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        start = end;
    }

    let lambdas = columns.iter().map(|(l, _)| *l).collect();
    let u = CMatrix::from_columns(&columns.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>());
    Ok(DriftSpectrum {
        lambdas,
        u: SquareComplexMatrix::from_matrix_unchecked(u),
    })
}

/// `H = Σ λₖ |dₖ|²` with `d = U†c`, i.e. `Σ λₖ(aₖ² + bₖ²)` in real coordinates.
pub fn drift_hamiltonian(spec: &DriftSpectrum, s: &StateVector) -> Result<f64> {
    let d = spec.eigen_amplitudes(s)?;
    Ok(spec
        .lambdas
        .iter()
        .zip(d.iter())
        .map(|(l, z)| l * z.norm_sqr())
        .sum())
}

/// `(a₁, …, aₙ, b₁, …, bₙ)` for `cₖ = aₖ + i bₖ`.
pub fn realify(s: &StateVector) -> Vec<f64> {
    realify_vector(s.amplitudes())
}

pub(crate) fn realify_vector(c: &CVector) -> Vec<f64> {
    c.iter()
        .map(|z| z.re)
        .chain(c.iter().map(|z| z.im))
        .collect()
}

/// Exact piecewise flow of `ċ = (A + εB)c`, sampled at `samples_per_segment`
/// interior points of every segment plus the segment endpoints.
pub fn propagate(
    sys: &ControlSystem,
    s0: &StateVector,
    sched: &ControlSchedule,
    samples_per_segment: usize,
) -> Result<Trajectory> {
    check_dim(sys.n(), s0.dim())?;
    if samples_per_segment == 0 {
        return Err(Error::Argument(
            "samples_per_segment must be positive".into(),
        ));
    }
    let mut times = vec![0.0];
    let mut states = vec![s0.clone()];
    let mut t0 = 0.0;
    let mut current = s0.amplitudes().clone();
    let parts = (samples_per_segment + 1) as f64;
    for seg in sched.segments() {
        let eig = SkewHermitianEigen::new(&sys.generator(seg.value));
        for j in 1..=samples_per_segment {
            let tau = seg.duration * j as f64 / parts;
            times.push(t0 + tau);
            states.push(StateVector::from_vector_unchecked(eig.exp(tau) * &current));
        }
        current = eig.exp(seg.duration) * &current;
        t0 += seg.duration;
        times.push(t0);
        states.push(StateVector::from_vector_unchecked(current.clone()));
    }
    Ok(Trajectory { times, states })
}

/// Final state only; same arithmetic as the last sample of [`propagate`].
pub fn propagate_final(
    sys: &ControlSystem,
    s0: &StateVector,
    sched: &ControlSchedule,
) -> Result<StateVector> {
    check_dim(sys.n(), s0.dim())?;
    let mut current = s0.amplitudes().clone();
    for seg in sched.segments() {
        current = sys.segment_propagator(seg) * &current;
    }
    Ok(StateVector::from_vector_unchecked(current))
}

/// `U(T) = Π exp(Δtₖ(A + εₖB))`, later segments on the left.
pub fn propagate_operator(sys: &ControlSystem, sched: &ControlSchedule) -> SquareComplexMatrix {
    let n = sys.n();
    let u = sched
        .segments()
        .iter()
        .fold(CMatrix::identity(n, n), |acc, seg| {
            sys.segment_propagator(seg) * acc
        });
    SquareComplexMatrix::from_matrix_unchecked(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub time: f64,
    pub distance: f64,
}

const GOLDEN_ITERATIONS: usize = 80;

/// First return of the drift flow into the `tol`-ball around `s0`.
///
/// The flow is evaluated as phase rotations in the drift eigenbasis on the grid
/// `dt, 2dt, …, t_max`. A return only counts after the trajectory has left the
/// ball. Grid local minima that could dip below `tol` between grid points
/// (given the flow's speed bound) are refined by golden-section search.
/// A state the flow never moves out of the ball returns at `dt`.
pub fn recurrence_scan(
    sys: &ControlSystem,
    s0: &StateVector,
    tol: f64,
    t_max: f64,
    dt: f64,
) -> Result<Option<Recurrence>> {
    check_dim(sys.n(), s0.dim())?;
    if !(tol > 0.0 && dt > 0.0 && dt < t_max && t_max.is_finite()) {
        return Err(Error::Argument(format!(
            "recurrence scan needs tol > 0 and 0 < dt < t_max, got tol {tol}, dt {dt}, t_max {t_max}"
        )));
    }
    let spec = diagonalize_drift(sys.drift(), &Tolerance::default())?;
    let d0 = spec.eigen_amplitudes(s0)?;
    let weights: Vec<(f64, f64)> = spec
        .lambdas
        .iter()
        .zip(d0.iter())
        .map(|(&l, z)| (l, z.norm_sqr()))
        .collect();
    // ‖c(t) − c₀‖² = Σ |dₖ|² |e^{iλₖt} − 1|² = Σ |dₖ|² · 2(1 − cos λₖt)
    let dist = |t: f64| -> f64 {
        weights
            .iter()
            .map(|&(l, w)| 2.0 * w * (1.0 - (l * t).cos()))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    };
    let speed = weights.iter().map(|&(l, w)| w * l * l).sum::<f64>().sqrt();

    let steps = (t_max / dt).floor() as usize;
    let at = |k: usize| (k as f64 * dt).min(t_max);
    let mut left = false;
    let mut prev = 0.0;
    for k in 1..=steps {
        let t = at(k);
        let d = dist(t);
        if !left {
            if d > tol {
                left = true;
            } else if k == steps {
                return Ok(Some(Recurrence {
                    time: dt,
                    distance: dist(dt),
                }));
            }
            prev = d;
            continue;
        }
        if d <= tol {
            return Ok(Some(Recurrence {
                time: t,
                distance: d,
            }));
        }
        let next = if k < steps {
            dist(at(k + 1))
        } else {
            f64::INFINITY
        };
        if d <= prev && d <= next && d - speed * dt <= tol {
            let hi = at(k + 1).min(t_max);
            let (tm, dm) = golden_section_min(&dist, at(k - 1), hi);
            if dm <= tol {
                return Ok(Some(Recurrence {
                    time: tm,
                    distance: dm,
                }));
            }
        }
        prev = d;
    }
    Ok(None)
}

fn golden_section_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
