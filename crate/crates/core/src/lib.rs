//! Controllability analysis for finite-dimensional bilinear quantum systems
//! `ċ = Ac + ε(t)Bc` with skew-Hermitian `A`, `B`.
//!
//! The crate is organised bottom-up: [`matrix`] holds the complex linear algebra,
//! [`lie`] builds the dynamical Lie algebra, [`dynamics`] propagates states under
//! piecewise-constant controls, [`orbit`] decides controllability from the orbit
//! tangent space, and [`steering`] searches for explicit control schedules.

pub mod dynamics;
pub mod error;
pub mod lie;
pub mod matrix;
pub mod orbit;
pub mod steering;

pub use dynamics::{ControlSchedule, ControlSystem, Recurrence, Segment, StateVector, Trajectory};
pub use error::{Error, Result};
pub use lie::{AlgebraClass, AlgebraLabel, BracketWord, LieAlgebraBasis};
pub use matrix::{SquareComplexMatrix, Tolerance};
pub use orbit::{ConservedModuli, ControllabilityReport, GroupWord, Verdict};
pub use steering::{
    ReachabilityCertificate, SteeringConfig, VerificationRow, VerificationTable,
    VerificationVerdict,
};
