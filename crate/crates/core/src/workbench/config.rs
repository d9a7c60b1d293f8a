use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adapteq::EqualizerConfig;
use crate::channel::{scene_to_taps, ScattererScene, Tap, TapSet};
use crate::ofdm::OfdmSpec;
use crate::rake::SearchParams;
use crate::sigcore::{primitive_polynomial, Modulation};
use crate::{Error, Result};

pub const SCHEMA: &str = "airlink-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    WcdmaRake,
    WifiAdapteq,
    WimaxOfdm,
    /// IR/FR and broadening analysis of the channel alone.
    ChannelAnalysis,
}

impl System {
    pub fn as_str(self) -> &'static str {
        match self {
            System::WcdmaRake => "wcdma_rake",
            System::WifiAdapteq => "wifi_adapteq",
            System::WimaxOfdm => "wimax_ofdm",
            System::ChannelAnalysis => "channel_analysis",
        }
    }
}

/// Exactly one of `scene` and `taps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<ScattererScene>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<Tap>>,
}

impl ChannelBlock {
    pub fn from_taps(taps: Vec<Tap>) -> Self {
        Self {
            scene: None,
            taps: Some(taps),
        }
    }

    pub fn from_scene(scene: ScattererScene) -> Self {
        Self {
            scene: Some(scene),
            taps: None,
        }
    }

    pub fn tap_set(&self) -> Result<TapSet> {
        match (&self.scene, &self.taps) {
            (Some(scene), None) => scene_to_taps(scene),
            (None, Some(taps)) => TapSet::new(taps.clone()),
            _ => Err(Error::config("channel needs exactly one of scene and taps")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopplerBlock {
    pub enabled: bool,
    /// Common frequency offset applied to the received waveform.
    pub offset_hz: f64,
}

impl DopplerBlock {
    pub fn active_offset(&self) -> f64 {
        if self.enabled {
            self.offset_hz
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RakeBlock {
    pub chip_rate: f64,
    pub pn_degree: u32,
    #[serde(default = "one_u32")]
    pub pn_seed: u32,
    pub spreading_factor: usize,
    pub fingers: usize,
    pub data_symbols: usize,
    pub search: SearchParams,
    #[serde(default)]
    pub mmse: bool,
    /// Finger-table mode: one run per transmit magnitude (dB of symbol
    /// amplitude) at a fixed chip noise power, instead of an SNR sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tx_magnitudes_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_power: Option<f64>,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorBlock {
    /// Exact response of the configured taps.
    Known,
    /// One known preamble OFDM symbol.
    Ls,
    /// Per-carrier LMS over known training OFDM symbols, optionally
    /// continued on sliced decisions during the data.
    Lms {
        mu: f64,
        training_symbols: usize,
        #[serde(default)]
        decision_directed: bool,
    },
}

impl EstimatorBlock {
    pub fn training_symbols(&self) -> usize {
        match self {
            EstimatorBlock::Lms {
                training_symbols, ..
            } => *training_symbols,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmBlock {
    pub params: OfdmSpec,
    /// Data OFDM symbols per SNR point.
    pub data_symbols: usize,
    pub estimator: EstimatorBlock,
    #[serde(default)]
    pub timing_offset: usize,
    /// Data OFDM symbols dumped to the constellation files.
    #[serde(default = "default_constellation_symbols")]
    pub constellation_symbols: usize,
}

fn default_constellation_symbols() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerBlock {
    pub lms: EqualizerConfig,
    pub sample_rate: f64,
    pub training_symbols: usize,
    pub data_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadeningSweepBlock {
    pub max_separation: f64,
    pub points: usize,
    /// Broadening whose separation is recorded as a golden value.
    pub target_pct: f64,
}

/// Moves scatterer `scatterer` to perpendicular offsets from the LOS axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSweepBlock {
    pub scatterer: usize,
    pub offsets_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    pub bandwidth: f64,
    pub sample_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<BroadeningSweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterer_sweep: Option<ScattererSweepBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub name: String,
    pub system: System,
    pub seed: u64,
    pub channel: ChannelBlock,
    pub modulation: Modulation,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub doppler: DopplerBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rake: Option<RakeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ofdm: Option<OfdmBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equalizer: Option<EqualizerBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Pretty JSON; `from_json(to_json())` reproduces the same text.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serialises");
        text.push('\n');
        text
    }

    /// Checks every field and reports all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.schema != SCHEMA {
            v.push(format!("schema: expected \"{SCHEMA}\", found \"{}\"", self.schema));
        }
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            v.push(format!("name: \"{}\" must be non-empty [A-Za-z0-9_-]", self.name));
        }
        self.validate_channel(&mut v);
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            v.push("snr_db: values must be finite".into());
        }
        if !self.doppler.offset_hz.is_finite() {
            v.push("doppler.offset_hz: must be finite".into());
        }

        let blocks = [
            ("rake", self.rake.is_some(), System::WcdmaRake),
            ("ofdm", self.ofdm.is_some(), System::WimaxOfdm),
            ("equalizer", self.equalizer.is_some(), System::WifiAdapteq),
            ("analysis", self.analysis.is_some(), System::ChannelAnalysis),
        ];
        for (field, present, owner) in blocks {
            if owner == self.system && !present {
                v.push(format!("{field}: required for system {}", self.system.as_str()));
            }
            if owner != self.system && present {
                v.push(format!("{field}: not used by system {}", self.system.as_str()));
            }
        }
        if let Some(r) = &self.rake {
            validate_rake(r, self.snr_db.is_empty(), &mut v);
        }
        if let Some(o) = &self.ofdm {
            validate_ofdm(o, &mut v);
        }
        if let Some(e) = &self.equalizer {
            validate_equalizer(e, &mut v);
        }
        if let Some(a) = &self.analysis {
            self.validate_analysis(a, &mut v);
        }
        let needs_snr = match self.system {
            System::WcdmaRake => self.rake.as_ref().is_some_and(|r| r.tx_magnitudes_db.is_empty()),
            System::WifiAdapteq | System::WimaxOfdm => true,
            System::ChannelAnalysis => false,
        };
        if needs_snr && self.snr_db.is_empty() {
            v.push("snr_db: at least one SNR point required".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    fn validate_channel(&self, v: &mut Vec<String>) {
        match (&self.channel.scene, &self.channel.taps) {
            (Some(_), Some(_)) => v.push("channel: both scene and taps given, exactly one allowed".into()),
            (None, None) => v.push("channel: one of scene or taps required".into()),
            (Some(scene), None) => {
                if let Err(e) = scene.validate() {
                    v.push(format!("channel.scene: {e}"));
                }
            }
            (None, Some(taps)) => {
                if let Err(e) = TapSet::new(taps.clone()) {
                    v.push(format!("channel.taps: {e}"));
                }
            }
        }
    }

    fn validate_analysis(&self, a: &AnalysisBlock, v: &mut Vec<String>) {
        if !(a.bandwidth > 0.0 && a.bandwidth.is_finite()) {
            v.push("analysis.bandwidth: must be positive".into());
        } else if !(a.sample_rate >= 4.0 * a.bandwidth && a.sample_rate.is_finite()) {
            v.push("analysis.sample_rate: must be at least 4x bandwidth".into());
        }
        if let Some(span) = a.span {
            if !(span >= 0.0 && span.is_finite()) {
                v.push("analysis.span: must be finite and non-negative".into());
            }
        }
        if let Some(s) = &a.sweep {
            if !(s.max_separation > 0.0 && s.max_separation.is_finite()) {
                v.push("analysis.sweep.max_separation: must be positive".into());
            }
            if s.points < 2 {
                v.push("analysis.sweep.points: at least 2".into());
            }
            if !(s.target_pct > 0.0 && s.target_pct.is_finite()) {
                v.push("analysis.sweep.target_pct: must be positive".into());
            }
        }
        if let Some(s) = &a.scatterer_sweep {
            match &self.channel.scene {
                None => v.push("analysis.scatterer_sweep: needs a channel scene".into()),
                Some(scene) if s.scatterer >= scene.scatterers.len() => v.push(format!(
                    "analysis.scatterer_sweep.scatterer: index {} but scene has {} scatterers",
                    s.scatterer,
                    scene.scatterers.len()
                )),
                _ => {}
            }
            if s.offsets_m.is_empty() || s.offsets_m.iter().any(|x| !x.is_finite()) {
                v.push("analysis.scatterer_sweep.offsets_m: non-empty finite list required".into());
            }
        }
    }
}

fn validate_rake(r: &RakeBlock, no_snr: bool, v: &mut Vec<String>) {
    if !(r.chip_rate > 0.0 && r.chip_rate.is_finite()) {
        v.push("rake.chip_rate: must be positive".into());
    }
    if primitive_polynomial(r.pn_degree).is_none() {
        v.push(format!("rake.pn_degree: no built-in primitive polynomial for degree {}", r.pn_degree));
    } else {
        let period = (1usize << r.pn_degree) - 1;
        if r.spreading_factor == 0 || r.spreading_factor > period {
            v.push(format!("rake.spreading_factor: must be in 1..={period}"));
        }
        if r.pn_seed == 0 || r.pn_seed as usize > period {
            v.push(format!("rake.pn_seed: must be a nonzero {}-bit state", r.pn_degree));
        }
    }
    if r.fingers == 0 {
        v.push("rake.fingers: at least one".into());
    }
    if r.data_symbols == 0 {
        v.push("rake.data_symbols: at least one".into());
    }
    if r.search.pilot_symbols == 0 {
        v.push("rake.search.pilot_symbols: at least one".into());
    }
    if !(r.search.threshold_factor > 0.0 && r.search.threshold_factor <= 1.0) {
        v.push("rake.search.threshold_factor: must be in (0, 1]".into());
    }
    if r.search.max_peaks == 0 {
        v.push("rake.search.max_peaks: at least one".into());
    }
    if r.tx_magnitudes_db.iter().any(|m| !m.is_finite()) {
        v.push("rake.tx_magnitudes_db: values must be finite".into());
    }
    if !r.tx_magnitudes_db.is_empty() {
        if !r.noise_power.is_some_and(|p| p >= 0.0 && p.is_finite()) {
            v.push("rake.noise_power: required and non-negative in finger-table mode".into());
        }
        if !no_snr {
            v.push("snr_db: must be empty in finger-table mode".into());
        }
    }
}

fn validate_ofdm(o: &OfdmBlock, v: &mut Vec<String>) {
    match o.params.build() {
        Err(e) => v.push(format!("ofdm.params: {e}")),
        Ok(p) => {
            if o.timing_offset > p.cp_len() {
                v.push(format!("ofdm.timing_offset: exceeds cp_len {}", p.cp_len()));
            }
        }
    }
    if o.data_symbols == 0 {
        v.push("ofdm.data_symbols: at least one".into());
    }
    if let EstimatorBlock::Lms {
        mu,
        training_symbols,
        ..
    } = o.estimator
    {
        if !(mu > 0.0 && mu < 2.0) {
            v.push("ofdm.estimator.mu: must be in (0, 2)".into());
        }
        if training_symbols == 0 {
            v.push("ofdm.estimator.training_symbols: at least one".into());
        }
    }
}

fn validate_equalizer(e: &EqualizerBlock, v: &mut Vec<String>) {
    if let Err(err) = e.lms.validate() {
        v.push(format!("equalizer.lms: {err}"));
    } else if e.training_symbols < e.lms.min_training() {
        v.push(format!(
            "equalizer.training_symbols: {} below {} ({}x taps)",
            e.training_symbols,
            e.lms.min_training(),
            e.lms.training_headroom
        ));
    }
    if !(e.sample_rate > 0.0 && e.sample_rate.is_finite()) {
        v.push("equalizer.sample_rate: must be positive".into());
    }
    if e.data_symbols == 0 {
        v.push("equalizer.data_symbols: at least one".into());
    }
}
