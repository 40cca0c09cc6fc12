//! Scenario runner: loads JSON configs, dispatches to the simulation
//! library, and writes CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 numeric
//! failure. Nothing is written unless the whole scenario succeeded.

mod config;
mod reference;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ScenarioConfig;
use run::{run_scenario, Artifacts, RunError};

#[derive(Parser)]
#[command(
    name = "hopsim",
    version,
    about = "Deterministic simulation and mission-sizing scenarios for rocket-hopping robots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (JSON). Repeatable: several configs run as a
    /// batch, each in its own subdirectory of --out.
    #[arg(long = "config", global = true, value_name = "PATH")]
    configs: Vec<PathBuf>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,

    /// Random seed override (multi-start sweeps).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for batches and data-parallel sweeps
    /// (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a solid-motor burn (chamber pressure, thrust, Isp history).
    MotorBurn,
    /// Ideal specific impulse across the propellant database.
    IspTable,
    /// One powered-then-ballistic hop with trajectory export.
    Hop,
    /// Closed-loop reaction-wheel attitude regulation.
    Attitude,
    /// Potential-field path planning with contour and path export.
    PlanPath {
        /// Use the built-in four-obstacle benchmark world regardless of
        /// the config's world block.
        #[arg(long)]
        reference_world: bool,
    },
    /// Size a cave survey: robots, hops and mapping time.
    Survey,
    /// Store-and-forward relay chain latency.
    Relay,
    /// Reproduce the propellant and survey-sizing reference tables.
    Tables {
        /// Which table to emit: 2, 3, 4 or all.
        #[arg(long, value_name = "WHICH")]
        which: Option<String>,
    },
    /// Check config files against every invariant without computing.
    Validate,
}

impl Command {
    fn kind_name(&self) -> &'static str {
        match self {
            Command::MotorBurn => "motor-burn",
            Command::IspTable => "isp-table",
            Command::Hop => "hop",
            Command::Attitude => "attitude",
            Command::PlanPath { .. } => "plan-path",
            Command::Survey => "survey",
            Command::Relay => "relay",
            Command::Tables { .. } => "tables",
            Command::Validate => "validate",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore "already initialized": only possible in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    ExitCode::from(dispatch(&cli) as u8)
}

fn dispatch(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Validate => validate_command(&cli.configs),
        command => run_command(cli, command),
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::Parse(format!("{}: {e}", path.display())))
}

fn validate_command(configs: &[PathBuf]) -> i32 {
    if configs.is_empty() {
        eprintln!("validate: at least one --config <path> is required");
        return 2;
    }
    let mut worst = 0;
    for path in configs {
        match load_config(path) {
            Err(e) => {
                eprintln!("{}: unreadable: {}", path.display(), e.message());
                return 2;
            }
            Ok(cfg) => {
                let violations = cfg.violations();
                if violations.is_empty() {
                    println!("{}: ok ({})", path.display(), cfg.kind_name());
                } else {
                    println!(
                        "{}: {} violation(s) in {} config:",
                        path.display(),
                        violations.len(),
                        cfg.kind_name()
                    );
                    for v in &violations {
                        println!("  - {v}");
                    }
                    worst = 3;
                }
            }
        }
    }
    worst
}

/// Apply subcommand-level flag overrides to a loaded (or default) config.
fn apply_overrides(mut config: ScenarioConfig, command: &Command) -> ScenarioConfig {
    match (&mut config, command) {
        (ScenarioConfig::PlanPath(cfg), Command::PlanPath { reference_world: true }) => {
            cfg.world = config::WorldConfig::default();
        }
        (ScenarioConfig::Tables(cfg), Command::Tables { which: Some(which) }) => {
            cfg.which = which.clone();
        }
        _ => {}
    }
    config
}

fn run_command(cli: &Cli, command: &Command) -> i32 {
    let kind = command.kind_name();

    // No config: run the built-in default scenario for this subcommand.
    if cli.configs.is_empty() {
        let config = ScenarioConfig::default_for_kind(kind).expect("every kind has a default");
        let config = apply_overrides(config, command);
        return finish_one(&config, cli.seed, &cli.out, None);
    }

    if cli.configs.len() == 1 {
        return match load_config(&cli.configs[0]) {
            Err(e) => {
                eprintln!("error: {}", e.message());
                e.exit_code()
            }
            Ok(config) => {
                if config.kind_name() != kind {
                    eprintln!(
                        "error: {}: config kind `{}` does not match subcommand `{kind}`",
                        cli.configs[0].display(),
                        config.kind_name()
                    );
                    return 3;
                }
                finish_one(&apply_overrides(config, command), cli.seed, &cli.out, None)
            }
        };
    }

    // Batch: independent scenarios fan out across the worker pool, each
    // with an isolated output directory named after its config file.
    let results: Vec<i32> = cli
        .configs
        .par_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".to_string());
            match load_config(path) {
                Err(e) => {
                    eprintln!("[{stem}] error: {}", e.message());
                    e.exit_code()
                }
                Ok(config) => {
                    if config.kind_name() != kind {
                        eprintln!(
                            "[{stem}] error: config kind `{}` does not match subcommand `{kind}`",
                            config.kind_name()
                        );
                        return 3;
                    }
                    let config = apply_overrides(config, command);
                    finish_one(&config, cli.seed, &cli.out.join(&stem), Some(&stem))
                }
            }
        })
        .collect();

    results.into_iter().max().unwrap_or(0)
}

fn finish_one(
    config: &ScenarioConfig,
    seed: Option<u64>,
    out_dir: &Path,
    tag: Option<&str>,
) -> i32 {
    let prefix = tag.map(|t| format!("[{t}] ")).unwrap_or_default();
    match run_scenario(config, seed) {
        Err(e) => {
            eprintln!("{prefix}error: {}", e.message());
            e.exit_code()
        }
        Ok(artifacts) => match write_artifacts(&artifacts, out_dir) {
            Err(e) => {
                eprintln!("{prefix}error: failed to write artifacts: {e}");
                1
            }
            Ok(()) => {
                for line in artifacts.headline.lines() {
                    println!("{prefix}{line}");
                }
                println!("{prefix}artifacts in {}", out_dir.display());
                0
            }
        },
    }
}

/// All files land only after the scenario fully succeeded; a failed run
/// leaves the output directory untouched.
fn write_artifacts(artifacts: &Artifacts, out_dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for (name, bytes) in &artifacts.files {
        std::fs::write(out_dir.join(name), bytes)?;
    }
    let summary = serde_json::to_vec_pretty(&artifacts.summary).expect("summary serializes");
    std::fs::write(out_dir.join("summary.json"), summary)?;
    Ok(())
}
