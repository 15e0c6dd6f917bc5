use reachctl_core::{
    ControllabilityReport, ReachabilityCertificate, StateVector, VerificationTable,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::files::RawInput;

pub const TOOL_VERSION: &str = concat!("reachctl ", env!("CARGO_PKG_VERSION"));

/// Everything a command emits: the payload plus enough provenance to tie it to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub result: CommandResult,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandResult {
    Analyze(ControllabilityReport),
    Simulate(SimulationSummary),
    Steer(ReachabilityCertificate),
    Recurrence(RecurrenceResult),
    Verify(VerificationTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub samples_per_segment: usize,
    pub sample_count: usize,
    pub total_duration: f64,
    pub final_state: StateVector,
    /// Largest `|‖c(t)‖ − ‖c(0)‖|` over the recorded samples.
    pub max_norm_drift: f64,
    /// Largest change of the drift Hamiltonian; only meaningful (and only
    /// reported) when every segment has ε = 0.
    pub max_drift_hamiltonian_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceResult {
    pub tol: f64,
    pub t_max: f64,
    pub dt: f64,
    pub found: bool,
    pub time: Option<f64>,
    pub distance: Option<f64>,
}

/// SHA-256 over the inputs in order; each contributes its role, byte length and bytes.
pub fn inputs_digest(inputs: &[RawInput]) -> String {
    let mut h = Sha256::new();
    for input in inputs {
        h.update(input.role.as_bytes());
        h.update((input.bytes.len() as u64).to_le_bytes());
        h.update(&input.bytes);
    }
    hex::encode(h.finalize())
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
