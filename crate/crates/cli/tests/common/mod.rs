#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tempfile::TempDir;

pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(re: f64, im: f64) -> Value {
    json!([re, im])
}

/// `iσz`, `iσx`.
pub fn su2_system() -> Value {
    json!({
        "n": 2,
        "A": [[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
        "B": [[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
    })
}

/// `A = diag(i, i√2)`, `B = 2A`.
pub fn torus_system() -> Value {
    let r = 2f64.sqrt();
    json!({
        "n": 2,
        "A": [[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, r)]],
        "B": [[c(0.0, 2.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 2.0 * r)]],
    })
}

pub fn state(amplitudes: &[(f64, f64)]) -> Value {
    json!({"n": amplitudes.len(), "c": amplitudes.iter().map(|&(re, im)| c(re, im)).collect::<Vec<_>>()})
}

pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn write(&self, name: &str, value: &Value) -> PathBuf {
        self.write_raw(name, &serde_json::to_string_pretty(value).unwrap())
    }

    pub fn write_raw(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str], threads: Option<&str>) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("reachctl").chain(args.iter().copied());
    let code = reachctl_cli::run_with(argv, threads, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
