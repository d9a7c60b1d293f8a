//! Declarative scenarios, their execution and reporting, and the CLI.
//!
//! A scenario is a JSON document naming a system chain, a channel (explicit
//! taps or a scatterer scene), an SNR grid and a mandatory seed. Each run
//! writes plain CSV files plus `manifest.json` into its own directory; the
//! same config and seed always reproduce the same bytes.

mod cli;
mod compare;
mod config;
mod presets;
mod report;
mod run;

pub use cli::{cli_main, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};
pub use compare::{compare_systems, ComparisonReport, COMPARISON_NAME};
pub use config::{
    AnalysisBlock, BroadeningSweepBlock, ChannelBlock, DopplerBlock, EqualizerBlock, EstimatorBlock, OfdmBlock,
    RakeBlock, ScattererSweepBlock, ScenarioConfig, System, SCHEMA,
};
pub use presets::{
    common_channel, preset, preset_names, DOPPLER_125_KMH_HZ, GOLDEN_SEPARATION_S, PRESETS, WCDMA_CHIP_RATE,
};
pub use report::{sha256_hex, RunReport, RunWriter, SnrPoint, MANIFEST};
pub use run::{config_hash, resolve_output_dir, run_scenario, run_scenario_in, RunOptions, DEFAULT_OUT, OUT_ENV};
