//! Command-line front end: build measurement operators from config files,
//! sample them, solve inverse-design targets, emit curve tables, and
//! re-validate built artifacts.
//!
//! Exit codes: `0` success, `1` validation failure (an invariant of the data
//! was violated), `2` usage error (bad arguments or unreadable/malformed
//! input files). Every error is a single-line JSON object on standard error.
//! The environment variable `POVM_FORGE_TOL` overrides the validation
//! tolerance.

pub mod curves;

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use povm_forge::artifact::{validate_artifact, BuiltArtifact, Config};
use povm_forge::chain::build_chain;
use povm_forge::inverse::{
    decompose_povm_to_chain, solve_gtom_params, solve_sastom_params, GtomTarget, SastomTarget,
};
use povm_forge::qubit::PolarizationState;
use povm_forge::sampler::{
    born_probabilities, chi_square_statistic, run_chain, sample_outcome, RngSpec,
};
use povm_forge::{Complex2x2, DEFAULT_TOL};

#[derive(Parser)]
#[command(
    name = "povm-forge",
    version,
    about = "Build, sample, invert, and validate single-qubit generalized measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the measurement a config file describes and emit its artifact.
    Build {
        /// Config JSON file with a `kind` tag.
        #[arg(short, long)]
        config: PathBuf,
        /// Output path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo sampling: one JSON line per shot plus a summary line.
    Sample {
        #[arg(short, long)]
        config: PathBuf,
        /// Input state: preset H, V, D, A, R, L, or inline JSON.
        #[arg(long, default_value = "H")]
        state: String,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator stream for independent batches.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve for physical parameters hitting a target measurement; emits a
    /// config consumable by `build`.
    Invert {
        /// Scalar target: `eps=..,theta=..,phi=..` for a symmetric pair or
        /// `p=..,q=..,theta=..,phi=..` for a weighted pair.
        #[arg(long)]
        target: Option<String>,
        /// JSON file with a list of target outcome operators to decompose
        /// into a cascade.
        #[arg(long, conflicts_with = "target")]
        povm: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit polar-angle-versus-reflectivity curve data as CSV.
    Curves {
        /// Comma-separated strength values in (0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Number of reflectivity grid points.
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-check every invariant of a built artifact file.
    Validate {
        /// Artifact JSON file produced by `build`.
        #[arg(short, long)]
        config: PathBuf,
    },
}

enum CliError {
    /// Bad arguments or unreadable/malformed inputs; exit status 2.
    Usage(String),
    /// A data invariant was violated; exit status 1.
    Failure(String),
}

fn emit_error(message: &str) {
    eprintln!("{}", json!({ "error": message }));
}

/// Parse and execute a full argument vector (including the binary name) and
/// return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return 0;
            }
            emit_error(&err.to_string());
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Failure(message)) => {
            emit_error(&message);
            1
        }
        Err(CliError::Usage(message)) => {
            emit_error(&message);
            2
        }
    }
}

fn tolerance() -> Result<f64, CliError> {
    match std::env::var("POVM_FORGE_TOL") {
        Ok(raw) => raw.parse::<f64>().ok().filter(|t| *t > 0.0).ok_or_else(|| {
            CliError::Usage(format!(
                "POVM_FORGE_TOL must be a positive number, got '{raw}'"
            ))
        }),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_config(path: &Path) -> Result<Config, CliError> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn write_output(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_state(raw: &str) -> Result<PolarizationState, CliError> {
    match raw {
        "H" => return Ok(PolarizationState::horizontal()),
        "V" => return Ok(PolarizationState::vertical()),
        "D" => return Ok(PolarizationState::diagonal()),
        "A" => return Ok(PolarizationState::antidiagonal()),
        "R" => return Ok(PolarizationState::right_circular()),
        "L" => return Ok(PolarizationState::left_circular()),
        _ => {}
    }
    if raw.trim_start().starts_with('{') {
        return serde_json::from_str(raw)
            .map_err(|e| CliError::Usage(format!("invalid state JSON: {e}")));
    }
    Err(CliError::Usage(format!(
        "unknown state '{raw}'; use H, V, D, A, R, L, or inline JSON"
    )))
}

fn parse_target(raw: &str) -> Result<Config, CliError> {
    let mut keys = Vec::new();
    let mut values = Vec::new();
    for part in raw.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("target component '{part}' is not key=value"))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            CliError::Usage(format!("target value '{}' is not a number", value.trim()))
        })?;
        keys.push(key.trim().to_string());
        values.push(value);
    }
    let lookup = |name: &str| -> Option<f64> {
        keys.iter().position(|k| k == name).map(|i| values[i])
    };
    let mut sorted = keys.clone();
    sorted.sort();
    let failure = |e: povm_forge::Error| CliError::Failure(e.to_string());
    if sorted == ["eps", "phi", "theta"] {
        let target = SastomTarget {
            epsilon: lookup("eps").unwrap(),
            theta: lookup("theta").unwrap(),
            phi: lookup("phi").unwrap(),
        };
        return Ok(Config::Sastom(solve_sastom_params(&target).map_err(failure)?));
    }
    if sorted == ["p", "phi", "q", "theta"] {
        let target = GtomTarget {
            p: lookup("p").unwrap(),
            q: lookup("q").unwrap(),
            theta: lookup("theta").unwrap(),
            phi: lookup("phi").unwrap(),
        };
        return Ok(Config::Gtom(solve_gtom_params(&target).map_err(failure)?));
    }
    Err(CliError::Usage(
        "target must be eps=..,theta=..,phi=.. or p=..,q=..,theta=..,phi=..".into(),
    ))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let tol = tolerance()?;
    match cli.command {
        Command::Build { config, output } => {
            let config = parse_config(&config)?;
            let artifact = config
                .build(tol)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            let mut text = serde_json::to_string_pretty(&artifact)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            text.push('\n');
            write_output(output.as_deref(), &text)
        }
        Command::Sample {
            config,
            state,
            shots,
            seed,
            stream,
            output,
        } => {
            if shots == 0 {
                return Err(CliError::Usage("shots must be at least 1".into()));
            }
            let config = parse_config(&config)?;
            let state = parse_state(&state)?;
            let spec = RngSpec {
                seed,
                stream,
                ..RngSpec::default()
            };
            let text = sample_to_string(&config, &state, shots, &spec, tol)?;
            write_output(output.as_deref(), &text)
        }
        Command::Invert {
            target,
            povm,
            output,
        } => {
            let config = match (target, povm) {
                (Some(raw), None) => parse_target(&raw)?,
                (None, Some(path)) => {
                    let targets: Vec<Complex2x2> = serde_json::from_str(&read_file(&path)?)
                        .map_err(|e| {
                            CliError::Usage(format!(
                                "invalid operator list {}: {e}",
                                path.display()
                            ))
                        })?;
                    let chain = decompose_povm_to_chain(&targets)
                        .map_err(|e| CliError::Failure(e.to_string()))?;
                    Config::Chain(chain)
                }
                _ => {
                    return Err(CliError::Usage(
                        "provide exactly one of --target or --povm".into(),
                    ))
                }
            };
            let mut text = serde_json::to_string_pretty(&config)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            text.push('\n');
            write_output(output.as_deref(), &text)
        }
        Command::Curves { eps, grid, output } => {
            let table = curves::emit_theta_curves(&eps, grid).map_err(CliError::Usage)?;
            write_output(output.as_deref(), &curves::format_csv(&table))
        }
        Command::Validate { config } => {
            let text = read_file(&config)?;
            let artifact: BuiltArtifact = serde_json::from_str(&text).map_err(|e| {
                CliError::Failure(format!("not a recognized artifact: {e}"))
            })?;
            validate_artifact(&artifact, tol)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            println!("{}", json!({ "valid": true }));
            Ok(())
        }
    }
}

fn sample_to_string(
    config: &Config,
    state: &PolarizationState,
    shots: u64,
    spec: &RngSpec,
    tol: f64,
) -> Result<String, CliError> {
    let failure = |e: povm_forge::Error| CliError::Failure(e.to_string());
    let mut rng = spec.build().map_err(failure)?;
    let mut buffer = BufWriter::new(Vec::new());

    let chain_povm = match config {
        Config::Chain(chain_config) => Some(build_chain(chain_config, tol).map_err(failure)?),
        _ => None,
    };
    let operators = match (&chain_povm, config.build(tol).map_err(failure)?) {
        (Some(povm), _) => povm.k_ops.clone(),
        (None, artifact) => artifact.operators(),
    };
    let expected = born_probabilities(state, &operators).map_err(failure)?;

    let mut counts = vec![0u64; operators.len()];
    let mut measurements_total = 0u64;
    for _ in 0..shots {
        let (outcome, n_meas) = match &chain_povm {
            Some(povm) => {
                let record = run_chain(state, povm, &mut rng).map_err(failure)?;
                (record.outcome_index, record.measurements_performed as u64)
            }
            None => {
                let record = sample_outcome(state, &operators, &mut rng).map_err(failure)?;
                (record.outcome_index, 1)
            }
        };
        counts[outcome] += 1;
        measurements_total += n_meas;
        writeln!(buffer, "{}", json!({ "outcome": outcome, "nMeas": n_meas }))
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }

    let frequencies: Vec<f64> = counts.iter().map(|c| *c as f64 / shots as f64).collect();
    let summary = json!({
        "summary": {
            "shots": shots,
            "frequencies": frequencies,
            "expected": expected,
            "chiSquare": chi_square_statistic(&counts, &expected),
            "meanMeasurements": measurements_total as f64 / shots as f64,
        }
    });
    writeln!(buffer, "{summary}").map_err(|e| CliError::Failure(e.to_string()))?;
    let bytes = buffer
        .into_inner()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
}
