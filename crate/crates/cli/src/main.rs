use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dunkl_experiments::{describe, preset, run, threads_from_env, ExperimentConfig, ExperimentError, RunOptions, PRESETS};

#[derive(Parser)]
#[command(name = "dunkl-experiments", version, about = "Run Dunkl transform and wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML configuration.
    Run {
        /// Preset name.
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's `output_dir` or `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reject undecayed data and exit non-zero on any failed check.
        #[arg(long)]
        strict: bool,
    },
    /// List the presets.
    ListPresets,
    /// Show a preset's property and configuration.
    Describe { preset: String },
    /// Check a TOML configuration without running it.
    ValidateConfig { path: PathBuf },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    ExperimentConfig::from_toml(&text)
}

fn execute(cli: Cli) -> Result<ExitCode, ExperimentError> {
    match cli.command {
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<20} {}", p.name, p.config().scenario.tag());
            }
        }
        Command::Describe { preset } => println!("{}", describe(&preset)?),
        Command::ValidateConfig { path } => {
            let cfg = load(&path)?;
            println!("{}: ok ({})", path.display(), cfg.scenario.tag());
        }
        Command::Run { preset: name, config, seed, out, strict } => {
            let mut cfg = match (name, config) {
                (Some(n), None) => preset(&n)?.config(),
                (None, Some(path)) => load(&path)?,
                _ => return Err(ExperimentError::Source),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out_dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let manifest = run(&cfg, &RunOptions { out_dir: out_dir.clone(), strict, threads: threads_from_env() })?;
            for c in &manifest.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} ({:.2} s)", out_dir.display(), manifest.wall_clock_seconds);
            if strict && !manifest.passed {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
