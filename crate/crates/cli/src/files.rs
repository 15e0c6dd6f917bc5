//! On-disk input formats.
//!
//! ```text
//! system.json    {"n": 2, "A": [[[re, im], ...], ...], "B": [...]}
//! state.json     {"n": 2, "c": [[re, im], ...]}
//! controls.json  {"segments": [{"duration": 0.5, "value": 1.0}, ...]}
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use reachctl_core::{ControlSchedule, ControlSystem, SquareComplexMatrix, StateVector, Tolerance};
use serde::Deserialize;

/// A load failure, carrying the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl std::error::Error for InputError {}

/// Bytes of an input file, kept for the report digest.
#[derive(Debug, Clone)]
pub struct RawInput {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl RawInput {
    pub fn read(role: &'static str, path: &Path) -> Result<Self, InputError> {
        let bytes = std::fs::read(path).map_err(|e| InputError {
            path: path.to_path_buf(),
            message: format!("cannot read {role} file: {e}"),
        })?;
        Ok(Self {
            role,
            path: path.to_path_buf(),
            bytes,
        })
    }

    fn error(&self, message: impl Into<String>) -> InputError {
        InputError {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    fn parse<'a, T: Deserialize<'a>>(&'a self) -> Result<T, InputError> {
        serde_json::from_slice(&self.bytes)
            .map_err(|e| self.error(format!("invalid {} file: {e}", self.role)))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Complex64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub c: Vec<Complex64>,
}

fn matrix_field(
    raw: &RawInput,
    field: &str,
    n: usize,
    rows: &[Vec<Complex64>],
) -> Result<SquareComplexMatrix, InputError> {
    if rows.len() != n {
        return Err(raw.error(format!(
            "field {field}: expected {n} rows, found {}",
            rows.len()
        )));
    }
    SquareComplexMatrix::from_rows(rows).map_err(|e| raw.error(format!("field {field}: {e}")))
}

pub fn load_system(raw: &RawInput, tol: &Tolerance) -> Result<ControlSystem, InputError> {
    let file: SystemFile = raw.parse()?;
    if file.n == 0 {
        return Err(raw.error("field n: dimension must be at least 1"));
    }
    let a = matrix_field(raw, "A", file.n, &file.a)?;
    let b = matrix_field(raw, "B", file.n, &file.b)?;
    ControlSystem::new(a, b, tol).map_err(|e| {
        let msg = e.to_string();
        let field = if msg.contains("B is not") { "B" } else { "A" };
        raw.error(format!("field {field}: {msg}"))
    })
}

pub fn load_state(raw: &RawInput, n: usize) -> Result<StateVector, InputError> {
    let file: StateFile = raw.parse()?;
    if file.n != file.c.len() {
        return Err(raw.error(format!(
            "field c: n is {} but c has {} amplitudes",
            file.n,
            file.c.len()
        )));
    }
    if file.n != n {
        return Err(raw.error(format!(
            "field n: state dimension {} does not match system dimension {n}",
            file.n
        )));
    }
    StateVector::from_slice(&file.c).map_err(|e| raw.error(format!("field c: {e}")))
}

pub fn load_controls(raw: &RawInput) -> Result<ControlSchedule, InputError> {
    raw.parse()
}
