use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::compare::{compare_systems, COMPARISON_NAME};
use super::config::ScenarioConfig;
use super::presets::{preset, preset_names};
use super::run::{output_root, resolve_output_dir, run_scenario_in, RunOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "airlink", version, about = "Seeded link-level channel and receiver scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        config: PathBuf,
        /// Output root; the scenario name is appended.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate SNR points one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// List or emit built-in scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Run scenarios sharing one channel, seed and SNR grid and tabulate them.
    Compare {
        #[arg(required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Debug, Subcommand)]
enum PresetAction {
    List,
    /// Write `<name>.json`.
    Emit {
        name: String,
        /// Directory to write into (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, i32> {
    ScenarioConfig::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_VALIDATION
    })
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            sequential,
        } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let dir = resolve_output_dir(&cfg, out.as_deref());
            match run_scenario_in(&cfg, &dir, RunOptions { parallel: !sequential }) {
                Ok(report) => {
                    println!("{}: {} files in {}", report.name, report.files.len(), dir.display());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", cfg.name);
                    exit_code(&e)
                }
            }
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in preset_names() {
                    println!("{name}");
                }
                EXIT_OK
            }
            PresetAction::Emit { name, out } => {
                let Some(cfg) = preset(&name) else {
                    eprintln!("error: unknown preset \"{name}\"; available: {}", preset_names().join(", "));
                    return EXIT_VALIDATION;
                };
                let path = out.unwrap_or_default().join(format!("{name}.json"));
                match std::fs::write(&path, cfg.to_json()) {
                    Ok(()) => {
                        println!("{}", path.display());
                        EXIT_OK
                    }
                    Err(e) => {
                        eprintln!("error: {}: {e}", path.display());
                        EXIT_RUNTIME
                    }
                }
            }
        },
        Command::Compare {
            configs,
            out,
            sequential,
        } => {
            let mut loaded = Vec::with_capacity(configs.len());
            for path in &configs {
                match load(path) {
                    Ok(c) => loaded.push(c),
                    Err(code) => return code,
                }
            }
            let root = output_root(out.as_deref(), loaded[0].output_dir.as_deref());
            match compare_systems(&loaded, &root, RunOptions { parallel: !sequential }) {
                Ok(report) => {
                    for (system, snr) in &report.mean_effective_snr_db {
                        println!("{system}: mean effective SNR {snr:.2} dB");
                    }
                    println!("{}", root.join(COMPARISON_NAME).join("comparison.csv").display());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
    }
}
