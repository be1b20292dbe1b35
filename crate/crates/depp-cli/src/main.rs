//! The `depp` command line tool: runs scenarios, sweeps parameters,
//! compares purification protocols and re-verifies the built-in
//! invariant suite.
//!
//! Exit codes: 0 success, 1 failed validation, 2 parse or usage error,
//! 3 runtime error. Data goes to stdout (or the file named by
//! `run.output`), diagnostics to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use depp_core::report::{csv_row, CSV_HEADER};
use depp_core::{
    bell_weights, build_polarization_state, compare_protocols, parse_scenario_with_overrides,
    perturbed_network, run_invariant_suite, run_scenario, serialize_result, OpticalNetwork,
    ProtocolOutput, ScenarioConfig,
};

/// Set in test builds to exercise the failure path of `validate`.
const PERTURB_ENV: &str = "DEPP_TEST_PERTURB_NETWORK";

#[derive(Parser)]
#[command(name = "depp", version, about = "One-step polarization entanglement purification simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its results document
    Run {
        scenario: PathBuf,
        /// Override a scenario entry, e.g. --set run.seed=7
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate a scenario over evenly spaced values of one parameter
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_name = "SECTION.KEY")]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: u32,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Tabulate one-step DEPP against the Bennett and Simon-Pan protocols
    Compare {
        scenario: PathBuf,
        /// Target fidelity in (0.5, 1]
        #[arg(long)]
        target: f64,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the built-in invariant suite and report each check
    Validate,
}

enum CliError {
    Parse(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Parse(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, set, format } => cmd_run(&scenario, &set, format),
        Command::Sweep { scenario, param, from, to, steps, set } => {
            cmd_sweep(&scenario, &param, from, to, steps, &set)
        }
        Command::Compare { scenario, target, set } => cmd_compare(&scenario, target, &set),
        Command::Validate => return cmd_validate(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depp: {}", e.message());
            e.exit_code()
        }
    }
}

fn parse_overrides(set: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut overrides = Vec::new();
    for item in set {
        let (path, value) = item.split_once('=').ok_or_else(|| {
            CliError::Parse(format!("override `{item}` must be section.key=value"))
        })?;
        overrides.push((path.trim().to_string(), value.trim().to_string()));
    }
    if let Ok(seed) = std::env::var("DEPP_SEED") {
        if seed.parse::<u64>().is_err() {
            return Err(CliError::Parse(format!(
                "DEPP_SEED must be a nonnegative integer, got `{seed}`"
            )));
        }
        overrides.push(("run.seed".to_string(), seed));
    }
    Ok(overrides)
}

fn load_config(
    scenario: &Path,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(scenario)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", scenario.display())))?;
    parse_scenario_with_overrides(&text, overrides)
        .map_err(|e| CliError::Parse(format!("{}: {e}", scenario.display())))
}

fn emit(cfg: &ScenarioConfig, data: String) -> Result<(), CliError> {
    match &cfg.run.output {
        Some(path) => std::fs::write(path, data)
            .map_err(|e| CliError::Runtime(format!("{path}: {e}"))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn cmd_run(scenario: &Path, set: &[String], format: Format) -> Result<(), CliError> {
    let overrides = parse_overrides(set)?;
    let cfg = load_config(scenario, &overrides)?;
    let base_dir = scenario.parent();
    let out = run_scenario(&cfg, base_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
    let data = match format {
        Format::Json => serialize_result(&cfg, &out),
        Format::Csv => match &out {
            ProtocolOutput::Run { run, .. } => {
                format!("{CSV_HEADER}\n{}\n", csv_row("scenario", 0.0, run))
            }
            _ => {
                return Err(CliError::Parse(
                    "csv format is only available for the one_step_depp protocol".into(),
                ))
            }
        },
    };
    emit(&cfg, data)
}

fn cmd_sweep(
    scenario: &Path,
    param: &str,
    from: f64,
    to: f64,
    steps: u32,
    set: &[String],
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::Parse(format!("sweep needs at least 2 steps, got {steps}")));
    }
    let base_overrides = parse_overrides(set)?;
    let text = std::fs::read_to_string(scenario)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", scenario.display())))?;
    let base_dir = scenario.parent();

    // points evaluate concurrently; rows stay ordered by value
    let results: Vec<Result<String, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..steps)
            .map(|i| {
                let value = from + (to - from) * i as f64 / (steps - 1) as f64;
                let text = &text;
                let base_overrides = &base_overrides;
                scope.spawn(move || {
                    let mut overrides = base_overrides.clone();
                    overrides.push((param.to_string(), format!("{value}")));
                    let cfg = parse_scenario_with_overrides(text, &overrides)
                        .map_err(|e| CliError::Parse(format!("{}: {e}", scenario.display())))?;
                    let out = run_scenario(&cfg, base_dir)
                        .map_err(|e| CliError::Runtime(e.to_string()))?;
                    match out {
                        ProtocolOutput::Run { run, .. } => Ok(csv_row(param, value, &run)),
                        _ => Err(CliError::Parse(
                            "sweep is only available for the one_step_depp protocol".into(),
                        )),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    println!("{CSV_HEADER}");
    for row in rows {
        println!("{row}");
    }
    Ok(())
}

fn cmd_compare(scenario: &Path, target: f64, set: &[String]) -> Result<(), CliError> {
    let overrides = parse_overrides(set)?;
    let cfg = load_config(scenario, &overrides)?;
    let rho_p = build_polarization_state(&cfg.noise, scenario.parent())
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let params = bell_weights(&rho_p).map_err(|e| CliError::Runtime(e.to_string()))?;
    let cmp = compare_protocols(&params, target).map_err(|e| CliError::Parse(e.to_string()))?;

    println!("target fidelity: {target}");
    println!("{:<14} {:>16} {:>20} {:>16}", "protocol", "final_fidelity", "success_probability", "pairs_consumed");
    println!(
        "{:<14} {:>16.12} {:>20.12} {:>16.4}",
        "one_step_depp",
        cmp.depp.final_fidelity,
        cmp.depp.acceptance_probability,
        cmp.depp.pairs_consumed
    );
    match (cmp.bennett.rounds, cmp.bennett.expected_pairs, cmp.bennett.final_fidelity) {
        (Some(rounds), Some(pairs), Some(f)) => {
            println!(
                "{:<14} {:>16.12} {:>20} {:>16.4}   ({rounds} rounds)",
                "bennett", f, "-", pairs
            );
        }
        _ => println!("{:<14} unreachable: F=1 is not attained in finitely many rounds", "bennett"),
    }
    println!(
        "{:<14} {:>16.12} {:>20} {:>16}   (efficiency {:.2})",
        "simon_pan",
        cmp.simon_pan.params.f + cmp.simon_pan.params.f1,
        "-",
        "-",
        cmp.simon_pan.efficiency
    );
    Ok(())
}

fn cmd_validate() -> ExitCode {
    let net = if std::env::var_os(PERTURB_ENV).is_some() {
        eprintln!("depp: {PERTURB_ENV} is set, validating a deliberately broken network");
        perturbed_network()
    } else {
        OpticalNetwork::fig1()
    };
    let reports = run_invariant_suite(&net);
    let mut all_ok = true;
    for r in &reports {
        if r.passed {
            println!("PASS {}", r.name);
        } else {
            println!("FAIL {}: {}", r.name, r.detail);
            all_ok = false;
        }
    }
    if all_ok {
        println!("{} invariants passed", reports.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
