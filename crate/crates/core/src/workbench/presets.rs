//! Named scenarios, one per reproduced exhibit plus a matched trio for
//! `compare`.

use num_complex::Complex64;

use super::config::*;
use crate::adapteq::EqualizerConfig;
use crate::channel::{Point2, Scatterer, ScattererScene, Tap};
use crate::ofdm::OfdmSpec;
use crate::rake::SearchParams;
use crate::sigcore::Modulation;

pub const WCDMA_CHIP_RATE: f64 = 3.84e6;
/// 125 km/h at 2.4 GHz.
pub const DOPPLER_125_KMH_HZ: f64 = 277.8;
/// Two-tap separation giving 5.90 % main-lobe broadening at 5 MHz.
pub const GOLDEN_SEPARATION_S: f64 = 91.2187e-9;

pub const PRESETS: &[&str] = &[
    "fig2_ir_ideal",
    "fig3_ir_broadened",
    "table1",
    "fig8_scatterer",
    "fig9_scatterer_sweep",
    "fig11_wimax_eq",
    "fig12_doppler",
    "fig13_constellation",
    "fig14_cell_edge",
    "wifi_lms_eq",
    "compare_wcdma",
    "compare_wifi",
    "compare_wimax",
];

pub fn preset_names() -> &'static [&'static str] {
    PRESETS
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    Some(match name {
        "fig2_ir_ideal" => analysis(name, ChannelBlock::from_taps(vec![Tap::unit(0.0)]), None, None),
        "fig3_ir_broadened" => analysis(
            name,
            ChannelBlock::from_taps(vec![Tap::unit(0.0), Tap::unit(GOLDEN_SEPARATION_S)]),
            Some(BroadeningSweepBlock {
                max_separation: 100e-9,
                points: 100,
                target_pct: 5.90,
            }),
            None,
        ),
        "table1" => table1(),
        "fig8_scatterer" => analysis(
            name,
            ChannelBlock::from_scene(ScattererScene {
                scatterers: vec![
                    scatterer(100.0, 30.0, Complex64::new(0.7, 0.0)),
                    scatterer(150.0, -20.0, Complex64::new(0.0, 0.5)),
                ],
                rx_velocity: 125.0 / 3.6,
                ..ScattererScene::new(Point2::new(0.0, 0.0), Point2::new(200.0, 0.0), 2.4e9)
            }),
            None,
            None,
        ),
        "fig9_scatterer_sweep" => analysis(
            name,
            ChannelBlock::from_scene(ScattererScene {
                scatterers: vec![scatterer(100.0, 10.0, Complex64::new(0.8, 0.0))],
                ..ScattererScene::new(Point2::new(0.0, 0.0), Point2::new(200.0, 0.0), 2.4e9)
            }),
            None,
            Some(ScattererSweepBlock {
                scatterer: 0,
                offsets_m: (0..=20).map(|k| 10.0 * k as f64).collect(),
            }),
        ),
        "fig11_wimax_eq" => wimax(name, EstimatorBlock::Ls, DopplerBlock::default()),
        "fig12_doppler" => wimax(
            name,
            EstimatorBlock::Known,
            DopplerBlock {
                enabled: true,
                offset_hz: DOPPLER_125_KMH_HZ,
            },
        ),
        "fig13_constellation" => wimax(
            name,
            EstimatorBlock::Lms {
                mu: 0.5,
                training_symbols: 8,
                decision_directed: true,
            },
            DopplerBlock::default(),
        ),
        "fig14_cell_edge" => cell_edge(),
        "wifi_lms_eq" => wifi_lms(),
        "compare_wcdma" => compare_wcdma(),
        "compare_wifi" => compare_wifi(),
        "compare_wimax" => compare_wimax(),
        _ => return None,
    })
}

fn base(name: &str, system: System, channel: ChannelBlock) -> ScenarioConfig {
    ScenarioConfig {
        schema: SCHEMA.to_string(),
        name: name.to_string(),
        system,
        seed: 20_240_601,
        channel,
        modulation: Modulation::Qpsk,
        snr_db: Vec::new(),
        doppler: DopplerBlock::default(),
        rake: None,
        ofdm: None,
        equalizer: None,
        analysis: None,
        output_dir: None,
    }
}

fn scatterer(x: f64, y: f64, reflectivity: Complex64) -> Scatterer {
    Scatterer {
        pos: Point2::new(x, y),
        reflectivity,
    }
}

fn tap(delay_s: f64, re: f64, im: f64) -> Tap {
    Tap::new(delay_s, Complex64::new(re, im), 0.0)
}

fn chips(n: f64) -> f64 {
    n / WCDMA_CHIP_RATE
}

fn analysis(
    name: &str,
    channel: ChannelBlock,
    sweep: Option<BroadeningSweepBlock>,
    scatterer_sweep: Option<ScattererSweepBlock>,
) -> ScenarioConfig {
    ScenarioConfig {
        analysis: Some(AnalysisBlock {
            bandwidth: 5e6,
            sample_rate: 40e6,
            span: None,
            sweep,
            scatterer_sweep,
        }),
        ..base(name, System::ChannelAnalysis, channel)
    }
}

fn rake_block(spreading_factor: usize, data_symbols: usize) -> RakeBlock {
    RakeBlock {
        chip_rate: WCDMA_CHIP_RATE,
        pn_degree: 9,
        pn_seed: 1,
        spreading_factor,
        fingers: 4,
        data_symbols,
        search: SearchParams::default(),
        mmse: false,
        tx_magnitudes_db: Vec::new(),
        noise_power: None,
    }
}

fn table1() -> ScenarioConfig {
    let channel = ChannelBlock::from_taps(vec![
        tap(chips(0.0), 1.0, 0.0),
        tap(chips(3.0), 0.0, 1.0),
        tap(chips(7.0), -1.0, 0.0),
        tap(chips(12.0), 0.0, -1.0),
    ]);
    ScenarioConfig {
        rake: Some(RakeBlock {
            tx_magnitudes_db: vec![1.0, 3.0, 6.0, 7.0, 10.0, 15.0, 20.0, 25.0],
            noise_power: Some(0.01),
            ..rake_block(128, 200)
        }),
        ..base("table1", System::WcdmaRake, channel)
    }
}

fn cell_edge() -> ScenarioConfig {
    // serving cell cluster plus a weaker, later cluster from the neighbour
    let channel = ChannelBlock::from_taps(vec![
        tap(chips(0.0), 0.8, 0.0),
        tap(chips(2.0), 0.0, 0.5),
        tap(chips(9.0), 0.3, 0.0),
        tap(chips(11.0), -0.15, 0.15),
    ]);
    ScenarioConfig {
        snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
        rake: Some(rake_block(16, 2000)),
        ..base("fig14_cell_edge", System::WcdmaRake, channel)
    }
}

fn wimax_channel() -> ChannelBlock {
    ChannelBlock::from_taps(vec![
        tap(0.0, 0.6, 0.6),
        tap(1.25e-6, 0.4, -0.3),
        tap(3.0e-6, -0.2, 0.1),
    ])
}

fn wimax(name: &str, estimator: EstimatorBlock, doppler: DopplerBlock) -> ScenarioConfig {
    ScenarioConfig {
        snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        doppler,
        ofdm: Some(OfdmBlock {
            params: OfdmSpec::wimax(),
            data_symbols: 20,
            estimator,
            timing_offset: 0,
            constellation_symbols: 4,
        }),
        ..base(name, System::WimaxOfdm, wimax_channel())
    }
}

fn wifi_lms() -> ScenarioConfig {
    let channel = ChannelBlock::from_taps(vec![
        tap(0.0, 0.8, 0.45),
        tap(50e-9, -0.2, 0.25),
        tap(150e-9, 0.1, -0.05),
    ]);
    ScenarioConfig {
        snr_db: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        equalizer: Some(EqualizerBlock {
            lms: EqualizerConfig::default(),
            sample_rate: 20e6,
            training_symbols: 1000,
            data_symbols: 5000,
        }),
        ..base("wifi_lms_eq", System::WifiAdapteq, channel)
    }
}

/// Four equal-power paths two chips apart, unit total power.
pub fn common_channel() -> ChannelBlock {
    ChannelBlock::from_taps(vec![
        tap(chips(0.0), 0.5, 0.0),
        tap(chips(2.0), 0.0, 0.5),
        tap(chips(4.0), -0.5, 0.0),
        tap(chips(6.0), 0.0, -0.5),
    ])
}

const COMPARE_SNR: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

fn compare_wcdma() -> ScenarioConfig {
    ScenarioConfig {
        snr_db: COMPARE_SNR.to_vec(),
        rake: Some(rake_block(16, 2000)),
        ..base("compare_wcdma", System::WcdmaRake, common_channel())
    }
}

fn compare_wifi() -> ScenarioConfig {
    ScenarioConfig {
        snr_db: COMPARE_SNR.to_vec(),
        equalizer: Some(EqualizerBlock {
            lms: EqualizerConfig {
                taps: 41,
                mu: 0.002,
                reference_delay: 20,
                ..EqualizerConfig::default()
            },
            sample_rate: 20e6,
            training_symbols: 3000,
            data_symbols: 5000,
        }),
        ..base("compare_wifi", System::WifiAdapteq, common_channel())
    }
}

fn compare_wimax() -> ScenarioConfig {
    ScenarioConfig {
        snr_db: COMPARE_SNR.to_vec(),
        ofdm: Some(OfdmBlock {
            params: OfdmSpec::wimax(),
            data_symbols: 20,
            estimator: EstimatorBlock::Lms {
                mu: 0.5,
                training_symbols: 8,
                decision_directed: false,
            },
            timing_offset: 0,
            constellation_symbols: 4,
        }),
        ..base("compare_wimax", System::WimaxOfdm, common_channel())
    }
}
