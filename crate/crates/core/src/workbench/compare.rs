use std::collections::BTreeMap;
use std::path::Path;

use super::config::{ScenarioConfig, System};
use super::report::{sha256_hex, RunReport, RunWriter, SnrPoint};
use super::run::{config_hash, run_scenario_in, RunOptions};
use crate::{Error, Result};

pub const COMPARISON_NAME: &str = "comparison";

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// `(system, point)` in config order, then SNR order.
    pub rows: Vec<(String, SnrPoint)>,
    /// Mean effective SNR per system over the grid.
    pub mean_effective_snr_db: BTreeMap<String, f64>,
    pub runs: Vec<RunReport>,
    pub manifest: RunReport,
}

fn check_shared(configs: &[ScenarioConfig]) -> Result<()> {
    let mut v = Vec::new();
    if configs.len() < 2 {
        v.push(format!("compare: needs at least two configs, got {}", configs.len()));
    }
    for (i, c) in configs.iter().enumerate() {
        if let Err(Error::Validation(errs)) = c.validate() {
            v.extend(errs.into_iter().map(|e| format!("config {i} ({}): {e}", c.name)));
        }
        if c.system == System::ChannelAnalysis {
            v.push(format!("config {i} ({}): channel_analysis has no link metrics", c.name));
        }
        if c.rake.as_ref().is_some_and(|r| !r.tx_magnitudes_db.is_empty()) {
            v.push(format!("config {i} ({}): finger-table mode has no SNR grid", c.name));
        }
    }
    if let Some(first) = configs.first() {
        let taps0 = first.channel.tap_set().ok();
        for (i, c) in configs.iter().enumerate().skip(1) {
            if c.seed != first.seed {
                v.push(format!("config {i} ({}): seed {} differs from {}", c.name, c.seed, first.seed));
            }
            if c.snr_db != first.snr_db {
                v.push(format!("config {i} ({}): SNR grid differs", c.name));
            }
            if c.channel.tap_set().ok() != taps0 {
                v.push(format!("config {i} ({}): channel differs", c.name));
            }
        }
        let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) || names.contains(&COMPARISON_NAME) {
            v.push(format!("compare: scenario names must be distinct and not \"{COMPARISON_NAME}\""));
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

/// Runs every scenario under `out_root` and writes
/// `out_root/comparison/comparison.csv` with one row per system and SNR.
pub fn compare_systems(configs: &[ScenarioConfig], out_root: &Path, opts: RunOptions) -> Result<ComparisonReport> {
    check_shared(configs)?;
    let runs = configs
        .iter()
        .map(|c| run_scenario_in(c, &out_root.join(&c.name), opts))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<(String, SnrPoint)> = runs
        .iter()
        .flat_map(|r| r.points.iter().map(move |p| (r.system.clone(), p.clone())))
        .collect();
    let mut mean_effective_snr_db = BTreeMap::new();
    for r in &runs {
        let n = r.points.len() as f64;
        mean_effective_snr_db.insert(
            r.system.clone(),
            r.points.iter().map(|p| p.effective_snr_db).sum::<f64>() / n,
        );
    }

    let hashes: String = configs.iter().map(config_hash).collect::<Vec<_>>().join("\n");
    let mut out = RunWriter::create(
        &out_root.join(COMPARISON_NAME),
        COMPARISON_NAME,
        COMPARISON_NAME,
        sha256_hex(hashes.as_bytes()),
        configs[0].seed,
    )?;
    out.text_csv(
        "comparison.csv",
        "system,snr_db,ber,evm_db,effective_snr_db",
        rows.iter()
            .map(|(s, p)| format!("{s},{},{},{},{}", p.snr_db, p.ber, p.evm_db, p.effective_snr_db)),
    )?;
    for (system, snr) in &mean_effective_snr_db {
        out.metric(&format!("mean_effective_snr_db.{system}"), *snr);
    }
    let manifest = out.finish()?;
    Ok(ComparisonReport {
        rows,
        mean_effective_snr_db,
        runs,
        manifest,
    })
}
