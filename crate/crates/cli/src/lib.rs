//! `bellpt` command-line front end.
//!
//! Every command prints a manifest `{command, parameters, tool_version, results}`
//! to standard output. Exit codes: 0 success, 2 usage or input error, 3 internal
//! inconsistency (including a failed identity suite).

mod output;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use bellpt_core::matrix::{ComplexMatrix, DEFAULT_MAX_SITES, MAX_SITES, PSD_TOL};
use bellpt_core::partition::validate_density;
use bellpt_core::scan::bound_scan;
use bellpt_core::states::DEFAULT_PHASE;
use bellpt_core::verify::verify_identities;
use bellpt_core::{
    certify, maximize_violation, Error, Execution, MeasurementConfig, Partition, SeesawOptions,
    StateSpec,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

pub use output::{float, to_json};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bellpt",
    version,
    about = "Bell inequalities for partially transposed states"
)]
pub struct Cli {
    /// Worker threads for trial loops and restarts (default: all cores).
    #[arg(long, global = true, env = "BELLPT_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Largest number of qubits accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SITES)]
    pub max_n: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound, achieved value and partition bound value for p = 1..n.
    BoundScan {
        #[arg(long)]
        n: usize,
        /// GHZ phase of the block-product states, in radians.
        #[arg(long, default_value_t = DEFAULT_PHASE, allow_negative_numbers = true)]
        phase: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// PPT checks and bound report for a state, settings and partition.
    Certify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, default_value_t = PSD_TOL)]
        tol: f64,
    },
    /// Seesaw maximization of the Bell value over settings.
    Maximize {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
        max_iters: u32,
        #[arg(long, default_value_t = 1e-9)]
        conv_tol: f64,
    },
    /// Randomized identity suite.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<T: Serialize> {
    pub command: &'static str,
    pub parameters: Value,
    pub tool_version: &'static str,
    pub results: T,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Inconsistent(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistency(_) => Failure::Inconsistent(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render().ansi());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| dispatch(&cli, err)));
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(_) => Err(Failure::Inconsistent(
            "internal error: unexpected panic".into(),
        )),
    };
    match outcome {
        Ok((text, code)) => {
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return EXIT_USAGE;
            }
            code
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Inconsistent(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INCONSISTENT
        }
    }
}

fn dispatch(cli: &Cli, err: &mut dyn Write) -> Result<(String, u8), Failure> {
    if cli.max_n == 0 || cli.max_n > MAX_SITES {
        return Err(Failure::Usage(format!(
            "--max-n must lie in 1..={MAX_SITES}"
        )));
    }
    if cli.max_n > DEFAULT_MAX_SITES {
        let _ = writeln!(
            err,
            "warning: --max-n {} allows dense {}-dimensional matrices of {} each",
            cli.max_n,
            1u64 << cli.max_n,
            human_bytes(16.0 * 4f64.powi(cli.max_n as i32))
        );
    }
    let threads = cli.threads.map(usize::from);
    bellpt_core::exec::with_threads(threads, || match &cli.command {
        Command::BoundScan { n, phase, format } => cmd_bound_scan(cli.max_n, *n, *phase, *format),
        Command::Certify {
            state,
            config,
            partition,
            tol,
        } => cmd_certify(cli.max_n, state, config, partition, *tol),
        Command::Maximize {
            state,
            restarts,
            seed,
            max_iters,
            conv_tol,
        } => {
            let options = SeesawOptions {
                restarts: *restarts as usize,
                max_iters: *max_iters as usize,
                conv_tol: *conv_tol,
                seed: *seed,
            };
            cmd_maximize(cli.max_n, state, &options)
        }
        Command::Verify { n, trials, seed } => cmd_verify(cli.max_n, *n, *trials as usize, *seed),
    })
}

fn human_bytes(bytes: f64) -> String {
    let units = ["B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB"];
    let mut v = bytes;
    let mut k = 0;
    while v >= 1024.0 && k + 1 < units.len() {
        v /= 1024.0;
        k += 1;
    }
    format!("{v:.0} {}", units[k])
}

fn check_n(n: usize, max_n: usize) -> Result<(), Failure> {
    if n == 0 || n > max_n {
        return Err(Failure::Usage(format!(
            "n = {n} outside 1..={max_n} (raise --max-n to allow more)"
        )));
    }
    Ok(())
}

fn manifest<T: Serialize>(
    command: &'static str,
    parameters: Value,
    results: T,
) -> Result<String, Failure> {
    let m = RunManifest {
        command,
        parameters,
        tool_version: bellpt_core::TOOL_VERSION,
        results,
    };
    to_json(&m).map_err(|e| Failure::Inconsistent(format!("cannot serialize report: {e}")))
}

fn cmd_bound_scan(
    max_n: usize,
    n: usize,
    phase: f64,
    format: Format,
) -> Result<(String, u8), Failure> {
    check_n(n, max_n)?;
    if !phase.is_finite() {
        return Err(Failure::Usage(format!("phase {phase} is not finite")));
    }
    let rows = bound_scan(n, phase, Execution::Parallel)?;
    // The partition bound value does not depend on the phase; a mismatch is a bug.
    let consistent = rows.iter().all(|r| {
        (r.partition_bound_value - r.bound_squared).abs() <= bellpt_core::scan::SATURATION_TOL
    });
    let code = if consistent {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    };
    let parameters = json!({"n": n, "phase": phase, "format": format});
    let text = match format {
        Format::Json => manifest("bound-scan", parameters, &rows)?,
        Format::Csv => {
            let mut text = format!(
                "# command: bound-scan\n# parameters: {}\n# tool_version: {}\n",
                serde_json::to_string(&json!({"n": n, "phase": float(phase), "format": format}))
                    .expect("plain JSON value"),
                bellpt_core::TOOL_VERSION
            );
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Failure::Inconsistent(format!("cannot write CSV: {e}"));
            w.write_record([
                "p",
                "blocks",
                "bound",
                "achieved",
                "bound_squared",
                "partition_bound_value",
                "saturation_residual",
                "saturated",
            ])
            .map_err(csv_err)?;
            for r in &rows {
                let blocks: Vec<String> = r
                    .blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .map(|s| s.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                w.write_record([
                    r.p.to_string(),
                    blocks.join("|"),
                    float(r.bound),
                    float(r.achieved),
                    float(r.bound_squared),
                    float(r.partition_bound_value),
                    float(r.saturation_residual),
                    r.saturated.to_string(),
                ])
                .map_err(csv_err)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Failure::Inconsistent(format!("cannot write CSV: {e}")))?;
            text.push_str(&String::from_utf8(bytes).expect("CSV fields are UTF-8"));
            text
        }
    };
    Ok((text, code))
}

/// `path:line:column: message` for a JSON parse failure. Validation errors
/// raised after a whole object is read carry no position; they are anchored
/// at the start of the document.
fn located(path: &Path, text: &str, e: &serde_json::Error) -> String {
    let full = e.to_string();
    let (line, column, message) = match full.rsplit_once(" at line ") {
        Some((head, _)) if e.line() > 0 => (e.line(), e.column(), head.to_string()),
        _ => {
            let (line, column) = document_start(text);
            (line, column, full)
        }
    };
    format!("{}:{line}:{column}: {message}", path.display())
}

/// 1-based line and column of the first non-whitespace character.
fn document_start(text: &str) -> (usize, usize) {
    let offset = text.len() - text.trim_start().len();
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(located(path, &text, &e)))
}

/// A state file holds either a `StateSpec` (with a `"kind"` field) or a matrix.
enum StateInput {
    Spec(StateSpec),
    Matrix(ComplexMatrix),
}

impl StateInput {
    fn load(path: &Path, max_n: usize) -> Result<(Self, ComplexMatrix), Failure> {
        let text = read_text(path)?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(located(path, &text, &e)))?;
        let prefixed = |e: Error| match e {
            Error::Inconsistency(_) => Failure::Inconsistent(e.to_string()),
            _ => Failure::Usage(format!("{}: {e}", path.display())),
        };
        let input = if value.get("kind").is_some() {
            let spec: StateSpec = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(located(path, &text, &e)))?;
            if spec.sites() > max_n {
                return Err(Failure::Usage(format!(
                    "{}: state has {} qubits, more than --max-n {max_n}",
                    path.display(),
                    spec.sites()
                )));
            }
            StateInput::Spec(spec)
        } else {
            StateInput::Matrix(
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(located(path, &text, &e)))?,
            )
        };
        let rho = match &input {
            StateInput::Spec(spec) => spec.realize().map_err(prefixed)?,
            StateInput::Matrix(m) => m.clone(),
        };
        let n = validate_density(&rho, PSD_TOL).map_err(prefixed)?;
        if n > max_n {
            return Err(Failure::Usage(format!(
                "{}: state has {n} qubits, more than --max-n {max_n}",
                path.display()
            )));
        }
        Ok((input, rho))
    }

    fn echo(&self) -> Value {
        match self {
            StateInput::Spec(spec) => serde_json::to_value(spec),
            StateInput::Matrix(m) => serde_json::to_value(m),
        }
        .expect("states serialize")
    }
}

fn cmd_certify(
    max_n: usize,
    state_path: &Path,
    config_path: &Path,
    partition_path: &Path,
    tol: f64,
) -> Result<(String, u8), Failure> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Usage(format!(
            "tolerance {tol} must be finite and non-negative"
        )));
    }
    let (state, rho) = StateInput::load(state_path, max_n)?;
    let config: MeasurementConfig = read_json(config_path)?;
    let partition: Partition = read_json(partition_path)?;
    let report = certify(&rho, &config, &partition, tol, Execution::Parallel)?;
    let parameters = json!({
        "state_file": state_path,
        "state": state.echo(),
        "config_file": config_path,
        "config": config,
        "partition_file": partition_path,
        "partition": partition,
        "tol": tol,
    });
    Ok((manifest("certify", parameters, &report)?, EXIT_OK))
}

fn cmd_maximize(
    max_n: usize,
    state_path: &Path,
    options: &SeesawOptions,
) -> Result<(String, u8), Failure> {
    if !(options.conv_tol.is_finite() && options.conv_tol >= 0.0) {
        return Err(Failure::Usage(format!(
            "conv-tol {} must be finite and non-negative",
            options.conv_tol
        )));
    }
    let (state, rho) = StateInput::load(state_path, max_n)?;
    let result = maximize_violation(&rho, options, Execution::Parallel)?;
    let parameters = json!({
        "state_file": state_path,
        "state": state.echo(),
        "restarts": options.restarts,
        "seed": options.seed,
        "max_iters": options.max_iters,
        "conv_tol": options.conv_tol,
    });
    Ok((manifest("maximize", parameters, &result)?, EXIT_OK))
}

fn cmd_verify(max_n: usize, n: usize, trials: usize, seed: u64) -> Result<(String, u8), Failure> {
    check_n(n, max_n)?;
    let report = verify_identities(n, trials, seed, Execution::Parallel)?;
    let code = if report.passed {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    };
    let parameters = json!({"n": n, "trials": trials, "seed": seed});
    Ok((manifest("verify", parameters, &report)?, code))
}
