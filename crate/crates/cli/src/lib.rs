//! The `reachctl` command line.
//!
//! Every subcommand reads JSON input files, runs one analysis from
//! `reachctl-core`, and writes a [`RunReport`] to `--out` (or standard output).
//!
//! Exit codes: 0 on success or PASS, 1 on any input or argument error,
//! 2 when `verify` fails or `steer` does not converge.

pub mod files;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use reachctl_core::dynamics::{diagonalize_drift, drift_hamiltonian, propagate, recurrence_scan};
use reachctl_core::orbit::controllability_report;
use reachctl_core::steering::{steer_with_threads, verify_orbit_reachability};
use reachctl_core::{SteeringConfig, Tolerance, VerificationVerdict};

pub use files::InputError;
pub use report::{CommandResult, RecurrenceResult, RunReport, SimulationSummary, TOOL_VERSION};

use files::{load_controls, load_state, load_system, RawInput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

pub const THREADS_ENV: &str = "REACHCTL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "reachctl",
    version,
    about = "Controllability analysis for bilinear quantum systems"
)]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lie algebra, orbit dimension and controllability verdict.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Propagate a state under a piecewise-constant schedule.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        controls: PathBuf,
        #[arg(long, default_value_t = 10)]
        samples_per_segment: usize,
    },
    /// Search for a schedule that steers one state to another.
    Steer {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[command(flatten)]
        opts: SteerOpts,
        /// Compare states up to global phase.
        #[arg(long)]
        projective: bool,
    },
    /// First return of the drift flow to a neighbourhood of the state.
    Recurrence {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        tol: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Sample orbit points and steer to each of them.
    Verify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 6)]
        word_length: usize,
        #[arg(long, default_value_t = SteeringConfig::default().seed)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct SteerOpts {
    #[arg(long, default_value_t = SteeringConfig::default().segments)]
    segments: usize,
    #[arg(long, default_value_t = SteeringConfig::default().horizon)]
    horizon: f64,
    #[arg(long, default_value_t = SteeringConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = SteeringConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SteeringConfig::default().target_distance)]
    target_distance: f64,
}

/// Runs with the process environment and standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let threads = std::env::var(THREADS_ENV).ok();
    run_with(
        argv,
        threads.as_deref(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}

/// Like [`run`], with the thread setting and output streams supplied by the caller.
pub fn run_with<I, T>(
    argv: I,
    threads: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let outcome = parse_threads(threads).and_then(|t| execute(cli.command, t));
    let (report, code) = match outcome {
        Ok(v) => v,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let json = report.to_json();
    let written = match &cli.out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| format!("{}: cannot write report: {e}", path.display())),
        None => stdout
            .write_all(json.as_bytes())
            .map_err(|e| format!("cannot write report: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_INVALID;
    }
    code
}

fn parse_threads(value: Option<&str>) -> Result<usize, String> {
    match value {
        None => Ok(1),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            )),
        },
    }
}

fn read(role: &'static str, path: &Path) -> Result<RawInput, String> {
    RawInput::read(role, path).map_err(|e| e.to_string())
}

fn execute(command: Command, threads: usize) -> Result<(RunReport, i32), String> {
    let tol = Tolerance::default();
    let core = |e: reachctl_core::Error| e.to_string();
    let (name, inputs, result, code) = match command {
        Command::Analyze { system, state } => {
            let inputs = vec![read("system", &system)?, read("state", &state)?];
            let sys = load_system(&inputs[0], &tol).map_err(|e| e.to_string())?;
            let s0 = load_state(&inputs[1], sys.n()).map_err(|e| e.to_string())?;
            let report = controllability_report(&sys, &s0, &tol).map_err(core)?;
            ("analyze", inputs, CommandResult::Analyze(report), EXIT_OK)
        }
        Command::Simulate {
            system,
            state,
            controls,
            samples_per_segment,
        } => {
            let inputs = vec![
                read("system", &system)?,
                read("state", &state)?,
                read("controls", &controls)?,
            ];
            let sys = load_system(&inputs[0], &tol).map_err(|e| e.to_string())?;
            let s0 = load_state(&inputs[1], sys.n()).map_err(|e| e.to_string())?;
            let sched = load_controls(&inputs[2]).map_err(|e| e.to_string())?;
            let traj = propagate(&sys, &s0, &sched, samples_per_segment).map_err(core)?;
            let norm0 = s0.amplitudes().norm();
            let max_norm_drift = traj
                .states
                .iter()
                .map(|s| (s.amplitudes().norm() - norm0).abs())
                .fold(0.0, f64::max);
            let max_drift_hamiltonian_drift = if sched.is_drift_only() {
                let spec = diagonalize_drift(sys.drift(), &tol).map_err(core)?;
                let h0 = drift_hamiltonian(&spec, &s0).map_err(core)?;
                let mut worst = 0.0f64;
                for s in &traj.states {
                    worst = worst.max((drift_hamiltonian(&spec, s).map_err(core)? - h0).abs());
                }
                Some(worst)
            } else {
                None
            };
            let summary = SimulationSummary {
                samples_per_segment,
                sample_count: traj.states.len(),
                total_duration: sched.total_duration(),
                final_state: traj.final_state().clone(),
                max_norm_drift,
                max_drift_hamiltonian_drift,
            };
            (
                "simulate",
                inputs,
                CommandResult::Simulate(summary),
                EXIT_OK,
            )
        }
        Command::Steer {
            system,
            from,
            to,
            opts,
            projective,
        } => {
            let inputs = vec![
                read("system", &system)?,
                read("from", &from)?,
                read("to", &to)?,
            ];
            let sys = load_system(&inputs[0], &tol).map_err(|e| e.to_string())?;
            let s0 = load_state(&inputs[1], sys.n()).map_err(|e| e.to_string())?;
            let target = load_state(&inputs[2], sys.n()).map_err(|e| e.to_string())?;
            let cfg = SteeringConfig {
                segments: opts.segments,
                horizon: opts.horizon,
                restarts: opts.restarts,
                seed: opts.seed,
                target_distance: opts.target_distance,
                phase_sensitive: !projective,
                ..SteeringConfig::default()
            };
            let cert = steer_with_threads(&sys, &s0, &target, &cfg, threads).map_err(core)?;
            let code = if cert.converged {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            ("steer", inputs, CommandResult::Steer(cert), code)
        }
        Command::Recurrence {
            system,
            state,
            tol: ball,
            tmax,
            dt,
        } => {
            let inputs = vec![read("system", &system)?, read("state", &state)?];
            let sys = load_system(&inputs[0], &tol).map_err(|e| e.to_string())?;
            let s0 = load_state(&inputs[1], sys.n()).map_err(|e| e.to_string())?;
            let hit = recurrence_scan(&sys, &s0, ball, tmax, dt).map_err(core)?;
            let result = RecurrenceResult {
                tol: ball,
                t_max: tmax,
                dt,
                found: hit.is_some(),
                time: hit.map(|r| r.time),
                distance: hit.map(|r| r.distance),
            };
            (
                "recurrence",
                inputs,
                CommandResult::Recurrence(result),
                EXIT_OK,
            )
        }
        Command::Verify {
            system,
            state,
            samples,
            word_length,
            seed,
        } => {
            let inputs = vec![read("system", &system)?, read("state", &state)?];
            let sys = load_system(&inputs[0], &tol).map_err(|e| e.to_string())?;
            let s0 = load_state(&inputs[1], sys.n()).map_err(|e| e.to_string())?;
            if samples == 0 {
                return Err("--samples must be at least 1".into());
            }
            let cfg = SteeringConfig {
                seed,
                ..SteeringConfig::default()
            };
            let table = verify_orbit_reachability(
                &sys,
                &s0,
                samples,
                word_length,
                seed,
                &cfg,
                &tol,
                threads,
            )
            .map_err(core)?;
            let code = match table.verdict {
                VerificationVerdict::Pass => EXIT_OK,
                VerificationVerdict::Fail => EXIT_NEGATIVE,
            };
            ("verify", inputs, CommandResult::Verify(table), code)
        }
    };
    let report = RunReport {
        command: name.to_string(),
        inputs_digest: report::inputs_digest(&inputs),
        result,
        tool_version: TOOL_VERSION.to_string(),
    };
    Ok((report, code))
}
