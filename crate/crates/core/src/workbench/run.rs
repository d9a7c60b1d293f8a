use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{AnalysisBlock, EqualizerBlock, EstimatorBlock, OfdmBlock, RakeBlock, ScenarioConfig, System};
use super::report::{sha256_hex, RunReport, RunWriter, SnrPoint};
use crate::adapteq::{equalize_dd, train};
use crate::channel::{
    apply_channel, broadening_sweep, delay_in_samples, impulse_response, mainlobe_broadening, scene_to_taps,
    separation_for_broadening, TapSet,
};
use crate::ofdm::{
    apply_doppler_offset, estimate_channel_lms, estimate_channel_ls, known_channel, ofdm_demodulate, ofdm_modulate,
    one_tap_equalize, ChannelEstimate, LmsChannelTracker, OfdmParams,
};
use crate::rake::{rake_receive, spread, with_pilots, PathKnowledge, RakeConfig, SpreadingCode};
use crate::sigcore::{
    add_awgn, add_noise_power, bit_error_rate, evm_db, mean_power, random_bits, seeded_rng, sub_seed, ComplexSignal,
    PnSequence, SymbolAlphabet,
};
use crate::{Error, Result};

pub const OUT_ENV: &str = "AIRLINK_OUT";
pub const DEFAULT_OUT: &str = "airlink-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Evaluate SNR points on the rayon pool instead of in order.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { parallel: true }
    }
}

/// `--out`, then the config's `output_dir`, then `$AIRLINK_OUT`, then
/// `./airlink-out`; the scenario name is appended.
pub fn resolve_output_dir(config: &ScenarioConfig, cli_out: Option<&Path>) -> PathBuf {
    output_root(cli_out, config.output_dir.as_deref()).join(&config.name)
}

pub(crate) fn output_root(cli_out: Option<&Path>, config_out: Option<&str>) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| config_out.map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    sha256_hex(config.to_json().as_bytes())
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_in(config, &resolve_output_dir(config, None), RunOptions::default())
}

/// Runs the scenario into `dir`. On a mid-run failure the manifest lists the
/// files written so far plus the error, and the error is returned.
pub fn run_scenario_in(config: &ScenarioConfig, dir: &Path, opts: RunOptions) -> Result<RunReport> {
    config.validate()?;
    let mut out = RunWriter::create(dir, &config.name, config.system.as_str(), config_hash(config), config.seed)?;
    let result = match config.system {
        System::WcdmaRake => run_wcdma(config, config.rake.as_ref().expect("validated"), &mut out, opts),
        System::WimaxOfdm => run_ofdm(config, config.ofdm.as_ref().expect("validated"), &mut out, opts),
        System::WifiAdapteq => run_adapteq(config, config.equalizer.as_ref().expect("validated"), &mut out, opts),
        System::ChannelAnalysis => run_analysis(config, config.analysis.as_ref().expect("validated"), &mut out),
    };
    match result {
        Ok(()) => out.finish(),
        Err(e) => {
            out.fail(&e)?;
            Err(e)
        }
    }
}

fn map_points<T, F>(n: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Independent streams of one point: data bits and noise.
fn point_rngs(seed: u64, point: usize) -> (crate::sigcore::SimRng, crate::sigcore::SimRng) {
    let s = sub_seed(seed, point as u64);
    (seeded_rng(sub_seed(s, 0)), seeded_rng(sub_seed(s, 1)))
}

fn link_taps(config: &ScenarioConfig) -> Result<TapSet> {
    Ok(config.channel.tap_set()?.relative_to_first())
}

fn random_symbols(alphabet: &SymbolAlphabet, n: usize, rng: &mut crate::sigcore::SimRng) -> Result<(Vec<bool>, Vec<Complex64>)> {
    let bits = random_bits(n * alphabet.bits_per_symbol(), rng);
    let symbols = alphabet.modulate(&bits)?;
    Ok((bits, symbols))
}

fn ber_and_evm(alphabet: &SymbolAlphabet, bits: &[bool], reference: &[Complex64], soft: &[Complex64]) -> Result<(f64, f64)> {
    let ber = bit_error_rate(bits, &alphabet.demodulate(soft)?)?;
    Ok((ber, evm_db(reference, soft)?))
}

// ---------------------------------------------------------------- WCDMA

struct WcdmaPoint {
    rake: (f64, f64),
    single: (f64, f64),
    combined_snr_db: Option<f64>,
    fingers: Vec<(usize, f64)>,
}

fn spreading_code(r: &RakeBlock) -> Result<SpreadingCode> {
    SpreadingCode::new(PnSequence::m_sequence(r.pn_degree, r.pn_seed)?, r.chip_rate, r.spreading_factor)
}

fn rake_config(r: &RakeBlock, fingers: usize, frame_len: usize, noise_var: f64) -> RakeConfig {
    RakeConfig {
        fingers,
        search: r.search.clone(),
        n_symbols: frame_len,
        paths: PathKnowledge::Search,
        mmse_noise_var: r.mmse.then_some(noise_var),
    }
}

/// Noiseless received chip stream for `frame`.
fn wcdma_rx(
    config: &ScenarioConfig,
    code: &SpreadingCode,
    taps: &TapSet,
    frame: &[Complex64],
) -> ComplexSignal {
    let tx = spread(frame, code);
    apply_doppler_offset(&apply_channel(&tx, taps), config.doppler.active_offset())
}

fn despread_or_zero(rx: &ComplexSignal, code: &SpreadingCode, cfg: &RakeConfig) -> Result<(Vec<Complex64>, Option<crate::rake::RakeOutput>)> {
    match rake_receive(rx, code, cfg) {
        Ok(out) => Ok((out.symbols.clone(), Some(out))),
        Err(Error::NoLock) => Ok((vec![Complex64::new(0.0, 0.0); cfg.n_symbols], None)),
        Err(e) => Err(e),
    }
}

fn wcdma_point(config: &ScenarioConfig, r: &RakeBlock, code: &SpreadingCode, taps: &TapSet, idx: usize) -> Result<WcdmaPoint> {
    let alphabet = config.modulation.alphabet();
    let (mut data_rng, mut noise_rng) = point_rngs(config.seed, idx);
    let (bits, data) = random_symbols(&alphabet, r.data_symbols, &mut data_rng)?;
    let pilots = r.search.pilot_symbols;
    let frame = with_pilots(pilots, &data);
    let clean = wcdma_rx(config, code, taps, &frame);
    let snr_db = config.snr_db[idx];
    let noise_var = mean_power(clean.samples()) / 10f64.powf(snr_db / 10.0);
    let rx = add_awgn(&clean, snr_db, &mut noise_rng);

    let (rake_syms, rake_out) = despread_or_zero(&rx, code, &rake_config(r, r.fingers, frame.len(), noise_var))?;
    let (single_syms, _) = despread_or_zero(&rx, code, &rake_config(r, 1, frame.len(), noise_var))?;
    Ok(WcdmaPoint {
        rake: ber_and_evm(&alphabet, &bits, &data, &rake_syms[pilots..])?,
        single: ber_and_evm(&alphabet, &bits, &data, &single_syms[pilots..])?,
        combined_snr_db: rake_out.as_ref().and_then(|o| o.report.combined_snr_db()),
        fingers: rake_out
            .map(|o| o.fingers.iter().map(|f| (f.delay, f.magnitude_db)).collect())
            .unwrap_or_default(),
    })
}

fn run_wcdma(config: &ScenarioConfig, r: &RakeBlock, out: &mut RunWriter, opts: RunOptions) -> Result<()> {
    let code = spreading_code(r)?;
    let taps = link_taps(config)?;
    out.metric("chip_rate_hz", r.chip_rate);
    out.metric("spreading_factor", r.spreading_factor);
    if !r.tx_magnitudes_db.is_empty() {
        return run_finger_table(config, r, &code, &taps, out, opts);
    }

    let points = map_points(config.snr_db.len(), opts.parallel, |i| wcdma_point(config, r, &code, &taps, i))?;
    let rows: Vec<Vec<f64>> = config
        .snr_db
        .iter()
        .zip(&points)
        .map(|(&snr, p)| {
            vec![
                snr,
                p.rake.0,
                p.single.0,
                p.rake.1,
                p.single.1,
                -p.rake.1,
                -p.single.1,
                p.combined_snr_db.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    out.csv(
        "ber.csv",
        "snr_db,ber_rake,ber_single_finger,evm_rake_db,evm_single_finger_db,effective_snr_rake_db,effective_snr_single_finger_db,combined_snr_db",
        rows,
    )?;
    let finger_rows: Vec<Vec<f64>> = config
        .snr_db
        .iter()
        .zip(&points)
        .flat_map(|(&snr, p)| {
            p.fingers
                .iter()
                .enumerate()
                .map(move |(k, &(d, m))| vec![snr, (k + 1) as f64, d as f64, m])
        })
        .collect();
    out.csv("fingers.csv", "snr_db,finger,delay_chips,magnitude_db", finger_rows)?;
    out.points(
        config
            .snr_db
            .iter()
            .zip(&points)
            .map(|(&snr_db, p)| SnrPoint {
                snr_db,
                ber: p.rake.0,
                evm_db: p.rake.1,
                effective_snr_db: -p.rake.1,
            })
            .collect(),
    );
    out.metric(
        "effective_snr_single_finger_db",
        points.iter().map(|p| -p.single.1).collect::<Vec<_>>(),
    );
    Ok(())
}

/// Per-finger magnitudes for each transmit magnitude; total is the
/// arithmetic sum of the finger columns in dB.
fn run_finger_table(
    config: &ScenarioConfig,
    r: &RakeBlock,
    code: &SpreadingCode,
    taps: &TapSet,
    out: &mut RunWriter,
    opts: RunOptions,
) -> Result<()> {
    let noise_power = r.noise_power.expect("validated");
    let alphabet = config.modulation.alphabet();
    let rows = map_points(r.tx_magnitudes_db.len(), opts.parallel, |i| {
        let tx_db = r.tx_magnitudes_db[i];
        let amplitude = 10f64.powf(tx_db / 20.0);
        let (mut data_rng, mut noise_rng) = point_rngs(config.seed, i);
        let (_, data) = random_symbols(&alphabet, r.data_symbols, &mut data_rng)?;
        let frame: Vec<Complex64> = with_pilots(r.search.pilot_symbols, &data)
            .into_iter()
            .map(|s| s * amplitude)
            .collect();
        let rx = add_noise_power(&wcdma_rx(config, code, taps, &frame), noise_power, &mut noise_rng);
        let out = rake_receive(&rx, code, &rake_config(r, r.fingers, frame.len(), noise_power))?;
        let mut row = vec![tx_db];
        row.extend(out.report.finger_magnitudes_db.iter().copied());
        row.resize(1 + r.fingers, f64::NAN);
        row.push(out.report.total_magnitude_db);
        Ok(row)
    })?;
    let header = std::iter::once("tx_mag_db".to_string())
        .chain((1..=r.fingers).map(|k| format!("fing{k}_db")))
        .chain(std::iter::once("total_db".to_string()))
        .collect::<Vec<_>>()
        .join(",");
    out.metric(
        "max_finger_deviation_db",
        rows.iter()
            .map(|row| {
                row[1..=r.fingers]
                    .iter()
                    .map(|f| (f - row[0]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max),
    );
    out.csv("finger_table.csv", &header, rows)
}

// ---------------------------------------------------------------- OFDM

struct OfdmPoint {
    ber: f64,
    evm_before: f64,
    evm_after: f64,
    before: Vec<Vec<Complex64>>,
    after: Vec<Vec<Complex64>>,
}

fn offset_channel(est: ChannelEstimate, params: &OfdmParams, timing_offset: usize) -> ChannelEstimate {
    let n = params.n_fft() as f64;
    let h = est
        .h
        .iter()
        .zip(params.used_carriers())
        .map(|(h, &k)| h * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 * timing_offset as f64 / n))
        .collect();
    ChannelEstimate { h, source: est.source }
}

fn ofdm_point(
    config: &ScenarioConfig,
    o: &OfdmBlock,
    params: &OfdmParams,
    taps: &TapSet,
    doppler_hz: f64,
    idx: usize,
) -> Result<OfdmPoint> {
    let alphabet = config.modulation.alphabet();
    let (mut data_rng, mut noise_rng) = point_rngs(config.seed, idx);
    let n_train = o.estimator.training_symbols();
    let used = params.n_used();
    let total = n_train + o.data_symbols;
    let (bits, symbols) = random_symbols(&alphabet, total * used, &mut data_rng)?;
    let tx = ofdm_modulate(&symbols, params)?;
    let rx = apply_doppler_offset(&apply_channel(&tx, taps), doppler_hz);
    let rx = add_awgn(&rx, config.snr_db[idx], &mut noise_rng);
    let carriers = ofdm_demodulate(&rx, params, o.timing_offset)?;
    let refs: Vec<&[Complex64]> = symbols.chunks(used).collect();

    let mut tracker = None;
    let est = match &o.estimator {
        EstimatorBlock::Known => offset_channel(known_channel(&taps.without_doppler(), params), params, o.timing_offset),
        EstimatorBlock::Ls => estimate_channel_ls(&carriers[0], refs[0], params)?,
        EstimatorBlock::Lms {
            mu,
            training_symbols,
            decision_directed,
        } => {
            let rx_train: Vec<Vec<Complex64>> = carriers[..*training_symbols].to_vec();
            let ref_train: Vec<Vec<Complex64>> = refs[..*training_symbols].iter().map(|r| r.to_vec()).collect();
            let est = estimate_channel_lms(&rx_train, &ref_train, params, *mu, None)?;
            if *decision_directed {
                tracker = Some(LmsChannelTracker::new(est.h.clone(), *mu)?);
            }
            est
        }
    };

    let mut before = Vec::with_capacity(o.data_symbols);
    let mut after = Vec::with_capacity(o.data_symbols);
    let (mut kept, mut kept_ref) = (Vec::new(), Vec::new());
    let mut soft_all = Vec::with_capacity(o.data_symbols * used);
    for m in n_train..total {
        let current = match &tracker {
            Some(t) => t.estimate(),
            None => est.clone(),
        };
        let eq = one_tap_equalize(&carriers[m], &current)?;
        if let Some(t) = tracker.as_mut() {
            let decisions: Vec<Complex64> = eq.symbols.iter().map(|&s| alphabet.slice(s)).collect();
            t.update(&carriers[m], &decisions)?;
        }
        let (k, r) = eq.retained(refs[m]);
        kept.extend(k);
        kept_ref.extend(r);
        soft_all.extend(eq.symbols.iter().copied());
        before.push(carriers[m].clone());
        after.push(eq.symbols);
    }
    let data_bits = &bits[n_train * used * alphabet.bits_per_symbol()..];
    let raw: Vec<Complex64> = before.concat();
    let data_ref = &symbols[n_train * used..];
    Ok(OfdmPoint {
        ber: bit_error_rate(data_bits, &alphabet.demodulate(&soft_all)?)?,
        evm_before: evm_db(data_ref, &raw)?,
        evm_after: evm_db(&kept_ref, &kept)?,
        before,
        after,
    })
}

fn constellation_rows(symbols: &[Vec<Complex64>], params: &OfdmParams, count: usize) -> Vec<Vec<f64>> {
    symbols
        .iter()
        .take(count)
        .enumerate()
        .flat_map(|(m, sym)| {
            sym.iter()
                .zip(params.used_carriers())
                .map(move |(s, &k)| vec![m as f64, k as f64, s.re, s.im])
        })
        .collect()
}

fn best_snr_index(snr: &[f64]) -> usize {
    snr.iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s > snr[best] { i } else { best })
}

fn run_ofdm(config: &ScenarioConfig, o: &OfdmBlock, out: &mut RunWriter, opts: RunOptions) -> Result<()> {
    let params = o.params.build()?;
    let taps = link_taps(config)?;
    let offset = config.doppler.active_offset();
    let points = map_points(config.snr_db.len(), opts.parallel, |i| ofdm_point(config, o, &params, &taps, offset, i))?;
    let paired = if config.doppler.enabled {
        let still = taps.without_doppler();
        Some(map_points(config.snr_db.len(), opts.parallel, |i| {
            ofdm_point(config, o, &params, &still, 0.0, i).map(|p| p.evm_after)
        })?)
    } else {
        None
    };

    let mut header = String::from("snr_db,ber,evm_before_db,evm_after_db,effective_snr_db");
    if paired.is_some() {
        header.push_str(",evm_after_no_doppler_db");
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![config.snr_db[i], p.ber, p.evm_before, p.evm_after, -p.evm_after];
            if let Some(no) = &paired {
                row.push(no[i]);
            }
            row
        })
        .collect();
    out.csv("ber.csv", &header, rows)?;

    let best = best_snr_index(&config.snr_db);
    let cols = "symbol_index,carrier,re,im";
    out.csv("constellation_before.csv", cols, constellation_rows(&points[best].before, &params, o.constellation_symbols))?;
    out.csv("constellation_after.csv", cols, constellation_rows(&points[best].after, &params, o.constellation_symbols))?;
    out.metric("evm_improvement_db", points[best].evm_before - points[best].evm_after);
    out.metric("constellation_snr_db", config.snr_db[best]);
    if let Some(no) = &paired {
        out.metric("doppler_hz", offset);
        out.metric(
            "doppler_degrades_every_point",
            points.iter().zip(no).all(|(p, n)| p.evm_after > *n),
        );
    }
    out.points(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| SnrPoint {
                snr_db: config.snr_db[i],
                ber: p.ber,
                evm_db: p.evm_after,
                effective_snr_db: -p.evm_after,
            })
            .collect(),
    );
    Ok(())
}

// ---------------------------------------------------------------- adaptive equalizer

struct EqPoint {
    ber: f64,
    evm_before: f64,
    evm_after: f64,
    diverged: bool,
    mse: Vec<f64>,
    taps: Vec<Complex64>,
}

fn adapteq_point(config: &ScenarioConfig, e: &EqualizerBlock, taps: &TapSet, idx: usize) -> Result<EqPoint> {
    let alphabet = config.modulation.alphabet();
    let (mut data_rng, mut noise_rng) = point_rngs(config.seed, idx);
    let total = e.training_symbols + e.data_symbols;
    let (bits, symbols) = random_symbols(&alphabet, total, &mut data_rng)?;
    let tx = ComplexSignal::new(symbols.clone(), e.sample_rate)?;
    let rx = apply_doppler_offset(&apply_channel(&tx, taps), config.doppler.active_offset());
    let rx = add_awgn(&rx, config.snr_db[idx], &mut noise_rng);

    let state = train(&rx, &symbols[..e.training_symbols], &e.lms)?;
    let (dd, state) = equalize_dd(&rx, state, &alphabet)?;
    let d = e.lms.reference_delay;
    let mut soft = vec![Complex64::new(0.0, 0.0); e.data_symbols];
    for (i, &y) in dd.soft.iter().enumerate() {
        let k = dd.first_index + i - d;
        if (e.training_symbols..total).contains(&k) {
            soft[k - e.training_symbols] = y;
        }
    }
    let strongest = taps
        .taps()
        .iter()
        .fold(taps.taps()[0], |best, t| if t.gain.norm() > best.gain.norm() { *t } else { best });
    let lag = delay_in_samples(strongest.delay_s, e.sample_rate);
    let raw: Vec<Complex64> = (e.training_symbols..total).map(|k| rx.samples()[k + lag]).collect();
    let data = &symbols[e.training_symbols..];
    let data_bits = &bits[e.training_symbols * alphabet.bits_per_symbol()..];
    let (ber, evm_after) = ber_and_evm(&alphabet, data_bits, data, &soft)?;
    Ok(EqPoint {
        ber,
        evm_before: evm_db(data, &raw)?,
        evm_after,
        diverged: state.diverged(),
        mse: state.mse_history().to_vec(),
        taps: state.taps().to_vec(),
    })
}

fn run_adapteq(config: &ScenarioConfig, e: &EqualizerBlock, out: &mut RunWriter, opts: RunOptions) -> Result<()> {
    let taps = link_taps(config)?;
    let points = map_points(config.snr_db.len(), opts.parallel, |i| adapteq_point(config, e, &taps, i))?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                config.snr_db[i],
                p.ber,
                p.evm_before,
                p.evm_after,
                -p.evm_after,
                p.diverged as u8 as f64,
            ]
        })
        .collect();
    out.csv("ber.csv", "snr_db,ber,evm_before_db,evm_after_db,effective_snr_db,diverged", rows)?;
    let best = best_snr_index(&config.snr_db);
    let p = &points[best];
    out.csv("mse.csv", "step,mse", p.mse.iter().enumerate().map(|(n, &m)| [n as f64, m]))?;
    out.csv("taps.csv", "index,re,im", p.taps.iter().enumerate().map(|(i, w)| [i as f64, w.re, w.im]))?;
    out.metric("evm_improvement_db", p.evm_before - p.evm_after);
    out.metric("mse_snr_db", config.snr_db[best]);
    out.metric("training_steps", e.training_symbols);
    out.metric("any_diverged", points.iter().any(|p| p.diverged));
    out.points(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| SnrPoint {
                snr_db: config.snr_db[i],
                ber: p.ber,
                evm_db: p.evm_after,
                effective_snr_db: -p.evm_after,
            })
            .collect(),
    );
    Ok(())
}

// ---------------------------------------------------------------- channel analysis

fn mag_db(z: Complex64) -> f64 {
    20.0 * z.norm().max(1e-15).log10()
}

fn run_analysis(config: &ScenarioConfig, a: &AnalysisBlock, out: &mut RunWriter) -> Result<()> {
    let taps = config.channel.tap_set()?;
    let span = a.span.unwrap_or(taps.max_delay());
    let ir = impulse_response(&taps, a.bandwidth, a.sample_rate, span)?;
    out.csv(
        "channel_taps.csv",
        "delay_s,re,im,doppler_hz",
        taps.taps().iter().map(|t| [t.delay_s, t.gain.re, t.gain.im, t.doppler_hz]),
    )?;
    out.csv(
        "ir.csv",
        "time_s,re,im,mag_db",
        ir.times().iter().zip(ir.ir.samples()).map(|(&t, &h)| [t, h.re, h.im, mag_db(h)]),
    )?;
    out.csv(
        "fr.csv",
        "freq_hz,re,im,mag_db",
        ir.freqs.iter().zip(&ir.fr).map(|(&f, &h)| [f, h.re, h.im, mag_db(h)]),
    )?;
    let ideal = impulse_response(&TapSet::single(0.0), a.bandwidth, a.sample_rate, 0.0)?;
    out.metric("peak_time_s", ir.peak_time);
    out.metric("null_left_s", ir.nulls.0);
    out.metric("null_right_s", ir.nulls.1);
    out.metric("mainlobe_width_s", ir.mainlobe_width);
    out.metric("ideal_mainlobe_width_s", ideal.mainlobe_width);
    out.metric("broadening_pct", mainlobe_broadening(&ideal, &ir)?);

    if let Some(s) = &a.sweep {
        let seps: Vec<f64> = (1..=s.points)
            .map(|i| s.max_separation * i as f64 / s.points as f64)
            .collect();
        let sweep = broadening_sweep(&seps, a.bandwidth, a.sample_rate)?;
        let monotone = sweep.windows(2).all(|w| w[1].1 > w[0].1);
        out.csv("broadening_sweep.csv", "separation_s,broadening_pct", sweep.iter().map(|&(x, b)| [x, b]))?;
        out.metric("sweep_strictly_monotone", monotone);
        out.metric("golden_target_pct", s.target_pct);
        out.metric(
            "golden_separation_s",
            separation_for_broadening(s.target_pct, a.bandwidth, a.sample_rate, s.max_separation)?,
        );
    }

    if let Some(s) = &a.scatterer_sweep {
        let scene = config.channel.scene.as_ref().expect("validated");
        let rows = s
            .offsets_m
            .iter()
            .map(|&y| {
                let mut moved = scene.clone();
                moved.scatterers[s.scatterer].pos.y = y;
                let taps = scene_to_taps(&moved)?;
                let ir = impulse_response(&taps, a.bandwidth, a.sample_rate, taps.max_delay())?;
                let los = scene.tx_pos.distance(scene.rx_pos) / crate::channel::SPEED_OF_LIGHT;
                let path = moved.tx_pos.distance(moved.scatterers[s.scatterer].pos)
                    + moved.scatterers[s.scatterer].pos.distance(moved.rx_pos);
                let tap = taps
                    .taps()
                    .iter()
                    .find(|t| (t.delay_s - path / crate::channel::SPEED_OF_LIGHT).abs() < 1e-15)
                    .copied()
                    .ok_or_else(|| Error::Numerical("scatterer tap missing".into()))?;
                Ok(vec![
                    y,
                    tap.delay_s - los,
                    ir.mainlobe_width,
                    mainlobe_broadening(&ideal, &ir)?,
                    mag_db(tap.gain),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        out.csv(
            "scatterer_sweep.csv",
            "offset_m,excess_delay_s,mainlobe_width_s,broadening_pct,scatterer_gain_db",
            rows,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::fs;

    use super::*;
    use crate::workbench::presets::preset;
    use crate::workbench::report::MANIFEST;

    fn files_of(dir: &Path, report: &RunReport) -> Vec<(String, Vec<u8>)> {
        let mut names = report.files.clone();
        names.push(MANIFEST.into());
        names.into_iter().map(|f| (f.clone(), fs::read(dir.join(&f)).unwrap())).collect()
    }

    #[test]
    fn cli_out_beats_config_dir() {
        let mut cfg = preset("fig2_ir_ideal").unwrap();
        cfg.output_dir = Some("from-config".into());
        assert_eq!(
            resolve_output_dir(&cfg, Some(Path::new("cli"))),
            Path::new("cli").join("fig2_ir_ideal")
        );
        assert_eq!(resolve_output_dir(&cfg, None), Path::new("from-config").join("fig2_ir_ideal"));
    }

    #[test]
    fn same_seed_same_bytes_and_parallel_matches_sequential() {
        let tmp = tempfile::tempdir().unwrap();
        for name in ["fig11_wimax_eq", "fig14_cell_edge", "wifi_lms_eq"] {
            let cfg = preset(name).unwrap();
            let a = tmp.path().join(format!("{name}-a"));
            let b = tmp.path().join(format!("{name}-b"));
            let ra = run_scenario_in(&cfg, &a, RunOptions { parallel: true }).unwrap();
            let rb = run_scenario_in(&cfg, &b, RunOptions { parallel: false }).unwrap();
            assert_eq!(files_of(&a, &ra), files_of(&b, &rb), "{name}");
        }
    }

    #[test]
    fn seed_changes_noise() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = preset("fig11_wimax_eq").unwrap();
        let a = run_scenario_in(&cfg, &tmp.path().join("a"), RunOptions::default()).unwrap();
        cfg.seed += 1;
        let b = run_scenario_in(&cfg, &tmp.path().join("b"), RunOptions::default()).unwrap();
        assert_ne!(a.points, b.points);
        assert_ne!(a.config_hash, b.config_hash);
    }

    #[test]
    fn manifest_records_hash_and_points() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = preset("fig13_constellation").unwrap();
        let r = run_scenario_in(&cfg, tmp.path(), RunOptions::default()).unwrap();
        assert_eq!(r.config_hash, sha256_hex(cfg.to_json().as_bytes()));
        assert_eq!(r.points.len(), cfg.snr_db.len());
        let m: RunReport = serde_json::from_str(&fs::read_to_string(tmp.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m.points, r.points);
        assert!(m.error.is_none());
        for f in &r.files {
            assert!(tmp.path().join(f).is_file(), "{f}");
        }
    }

    #[test]
    fn failure_leaves_partial_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("ir.csv")).unwrap();
        let cfg = preset("fig2_ir_ideal").unwrap();
        let err = run_scenario_in(&cfg, tmp.path(), RunOptions::default()).unwrap_err();
        assert!(!err.is_validation());
        let m: RunReport = serde_json::from_str(&fs::read_to_string(tmp.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m.files, vec!["channel_taps.csv"]);
        assert!(m.error.is_some());
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("x");
        let mut cfg = preset("fig2_ir_ideal").unwrap();
        cfg.schema.clear();
        assert!(run_scenario_in(&cfg, &dir, RunOptions::default()).unwrap_err().is_validation());
        assert!(!dir.exists());
    }
}
