//! DSSS transmit chain and RAKE receiver.
//!
//! The receiver works at one sample per chip. A frame starts with
//! `pilot_symbols` copies of [`PILOT_SYMBOL`]; the path searcher correlates
//! coherently over that pilot run, which yields both path delays and complex
//! path gains for maximal-ratio combining.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sigcore::{ComplexSignal, PnSequence};
use crate::{Error, Result};

/// Known symbol repeated at the head of every frame.
pub const PILOT_SYMBOL: Complex64 = Complex64::new(1.0, 0.0);

/// Absolute search floor in units of the estimated correlation noise std.
pub const FLOOR_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    code: PnSequence,
    chip_rate: f64,
    spreading_factor: usize,
}

impl SpreadingCode {
    pub fn new(code: PnSequence, chip_rate: f64, spreading_factor: usize) -> Result<Self> {
        if spreading_factor == 0 || spreading_factor > code.period() {
            return Err(Error::config(format!(
                "spreading factor {spreading_factor} must be in 1..={}",
                code.period()
            )));
        }
        if !(chip_rate > 0.0 && chip_rate.is_finite()) {
            return Err(Error::config(format!("chip rate {chip_rate} must be positive")));
        }
        Ok(Self {
            code,
            chip_rate,
            spreading_factor,
        })
    }

    pub fn code(&self) -> &PnSequence {
        &self.code
    }

    pub fn chip_rate(&self) -> f64 {
        self.chip_rate
    }

    pub fn chip_period(&self) -> f64 {
        1.0 / self.chip_rate
    }

    pub fn spreading_factor(&self) -> usize {
        self.spreading_factor
    }

    /// Chip `i` of symbol `symbol`. Symbols take consecutive segments of the
    /// code, wrapping around its period.
    pub fn chip(&self, symbol: usize, i: usize) -> f64 {
        self.code.chip(symbol * self.spreading_factor + i)
    }

    fn segment(&self, symbol: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.spreading_factor).map(move |i| self.chip(symbol, i))
    }
}

pub fn spread(symbols: &[Complex64], code: &SpreadingCode) -> ComplexSignal {
    let chips = symbols
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| code.segment(k).map(move |c| s * c))
        .collect();
    ComplexSignal::new(chips, code.chip_rate()).expect("chip rate validated")
}

/// Frame layout: pilots followed by data.
pub fn with_pilots(pilot_symbols: usize, data: &[Complex64]) -> Vec<Complex64> {
    let mut frame = vec![PILOT_SYMBOL; pilot_symbols];
    frame.extend_from_slice(data);
    frame
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPeak {
    /// Chips.
    pub delay: usize,
    /// Magnitude of `gain`.
    pub strength: f64,
    /// Pilot-normalised complex correlation, an estimate of the path gain.
    pub gain: Complex64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    /// Chips.
    pub max_delay: usize,
    /// Peaks weaker than this fraction of the strongest are dropped.
    pub threshold_factor: f64,
    pub max_peaks: usize,
    pub pilot_symbols: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            max_delay: 32,
            threshold_factor: 0.5,
            max_peaks: 4,
            pilot_symbols: 16,
        }
    }
}

/// Full correlation profile over the search window.
#[derive(Debug, Clone)]
pub struct SearchProfile {
    /// Index = delay in chips.
    pub correlation: Vec<Complex64>,
    /// Noise std of the correlation output, from the median of `|c|²`.
    pub noise_std: f64,
    /// Every local maximum, strongest first, flagged against both thresholds.
    pub candidates: Vec<PathPeak>,
}

pub fn search_profile(
    rx: &ComplexSignal,
    code: &SpreadingCode,
    params: &SearchParams,
) -> Result<SearchProfile> {
    let sf = code.spreading_factor();
    let x = rx.samples();
    if x.len() < sf + params.max_delay {
        return Err(Error::size(format!(
            "received {} chips, search needs at least {}",
            x.len(),
            sf + params.max_delay
        )));
    }
    let pilots = params
        .pilot_symbols
        .min((x.len() - params.max_delay) / sf)
        .max(1);
    let norm = 1.0 / (pilots * sf) as f64;
    let correlation: Vec<Complex64> = (0..=params.max_delay)
        .map(|d| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..pilots {
                let base = k * sf + d;
                let mut sym = Complex64::new(0.0, 0.0);
                for (i, c) in code.segment(k).enumerate() {
                    sym += x[base + i] * c;
                }
                acc += sym * PILOT_SYMBOL.conj();
            }
            acc * norm
        })
        .collect();

    let mut power: Vec<f64> = correlation.iter().map(|c| c.norm_sqr()).collect();
    power.sort_by(f64::total_cmp);
    let median = if power.len() % 2 == 1 {
        power[power.len() / 2]
    } else {
        0.5 * (power[power.len() / 2 - 1] + power[power.len() / 2])
    };
    let noise_std = (median / std::f64::consts::LN_2).sqrt();
    let floor = FLOOR_SIGMAS * noise_std;

    let mag: Vec<f64> = correlation.iter().map(|c| c.norm()).collect();
    let mut candidates: Vec<PathPeak> = (0..mag.len())
        .filter(|&d| (d == 0 || mag[d] > mag[d - 1]) && (d + 1 == mag.len() || mag[d] >= mag[d + 1]))
        .map(|d| PathPeak {
            delay: d,
            strength: mag[d],
            gain: correlation[d],
            above_threshold: false,
        })
        .collect();
    candidates.sort_by(|a, b| b.strength.total_cmp(&a.strength).then(a.delay.cmp(&b.delay)));
    let strongest = candidates.first().map(|p| p.strength).unwrap_or(0.0);
    for p in &mut candidates {
        p.above_threshold = p.strength > floor && p.strength >= params.threshold_factor * strongest;
    }
    Ok(SearchProfile {
        correlation,
        noise_std,
        candidates,
    })
}

/// Sliding pilot correlation over delays `0..=max_delay`; returns up to
/// `max_peaks` local maxima that clear both the relative threshold and the
/// absolute noise floor, strongest first (ties to the smaller delay). An
/// empty list means no lock.
pub fn path_search(
    rx: &ComplexSignal,
    code: &SpreadingCode,
    params: &SearchParams,
) -> Result<Vec<PathPeak>> {
    let profile = search_profile(rx, code, params)?;
    Ok(profile
        .candidates
        .into_iter()
        .filter(|p| p.above_threshold)
        .take(params.max_peaks)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerReport {
    pub finger_id: usize,
    /// Chips.
    pub delay: usize,
    /// `20·log10(mean |symbol|)`.
    pub magnitude_db: f64,
    pub symbols: Vec<Complex64>,
}

fn magnitude_db(symbols: &[Complex64]) -> f64 {
    let mean = symbols.iter().map(|s| s.norm()).sum::<f64>() / symbols.len().max(1) as f64;
    20.0 * mean.log10()
}

fn check_window(rx: &ComplexSignal, sf: usize, delay: usize, n_symbols: usize) -> Result<()> {
    let needed = delay + n_symbols * sf;
    if needed > rx.len() {
        return Err(Error::Range(format!(
            "finger at delay {delay} needs {needed} chips, buffer holds {}",
            rx.len()
        )));
    }
    Ok(())
}

/// Conventional correlator finger: advance by `delay` chips and integrate
/// over each symbol's code segment.
pub fn finger_despread(
    rx: &ComplexSignal,
    code: &SpreadingCode,
    delay: usize,
    n_symbols: usize,
) -> Result<FingerReport> {
    let sf = code.spreading_factor();
    check_window(rx, sf, delay, n_symbols)?;
    let x = rx.samples();
    let symbols: Vec<Complex64> = (0..n_symbols)
        .map(|k| {
            let base = k * sf + delay;
            code.segment(k)
                .enumerate()
                .map(|(i, c)| x[base + i] * c)
                .sum::<Complex64>()
                / sf as f64
        })
        .collect();
    Ok(FingerReport {
        finger_id: 1,
        delay,
        magnitude_db: magnitude_db(&symbols),
        symbols,
    })
}

/// Unbiased correlator kernel minimising output interference-plus-noise for
/// symbol `symbol` at `delay`, given the multipath profile `paths`
/// (`(delay, gain)` pairs) and chip noise variance `noise_var`.
///
/// The kernel is `R⁻¹c / (cᴴR⁻¹c)`, where `c` is the symbol's code segment
/// and `R` the covariance of everything in the window except the finger's
/// own path contribution to the symbol. This is the Wiener solution up to a
/// scalar; with `R = σ²I` it reduces to the conventional `c / SF`.
pub fn mmse_kernel(
    code: &SpreadingCode,
    symbol: usize,
    delay: usize,
    paths: &[(usize, Complex64)],
    noise_var: f64,
    n_symbols: usize,
) -> Result<Vec<Complex64>> {
    if !(noise_var > 0.0) {
        return Err(Error::config(format!("noise variance {noise_var} must be positive")));
    }
    let sf = code.spreading_factor();
    let window_start = symbol * sf + delay;
    let max_path = paths.iter().map(|p| p.0).max().unwrap_or(0).max(delay);
    let reach = max_path.div_ceil(sf) + 1;
    let first = symbol.saturating_sub(reach);
    let last = (symbol + reach).min(n_symbols.saturating_sub(1));

    let mut r = DMatrix::<Complex64>::from_diagonal_element(sf, sf, Complex64::new(noise_var, 0.0));
    for m in first..=last {
        let mut v = DVector::<Complex64>::zeros(sf);
        for &(pd, g) in paths {
            if m == symbol && pd == delay {
                continue;
            }
            let start = m * sf + pd;
            for j in 0..sf {
                let t = window_start + j;
                if t >= start && t < start + sf {
                    v[j] += g * code.chip(m, t - start);
                }
            }
        }
        r += &v * v.adjoint();
    }
    let trace: f64 = (0..sf).map(|i| r[(i, i)].re).sum();
    let loading = 1e-6 * trace / sf as f64;
    for i in 0..sf {
        r[(i, i)] += loading;
    }
    let c = DVector::<Complex64>::from_iterator(sf, code.segment(symbol).map(|x| Complex64::new(x, 0.0)));
    let chol = r
        .cholesky()
        .ok_or_else(|| Error::Numerical("interference covariance not positive definite".into()))?;
    let rc = chol.solve(&c);
    let denom = c.dotc(&rc);
    Ok(rc.iter().map(|w| w / denom.conj()).collect())
}

/// MMSE-correlator finger: like [`finger_despread`] with the per-symbol
/// kernel from [`mmse_kernel`].
pub fn mmse_finger(
    rx: &ComplexSignal,
    code: &SpreadingCode,
    delay: usize,
    paths: &[(usize, Complex64)],
    noise_var: f64,
    n_symbols: usize,
) -> Result<FingerReport> {
    let sf = code.spreading_factor();
    check_window(rx, sf, delay, n_symbols)?;
    let x = rx.samples();
    let symbols = (0..n_symbols)
        .map(|k| {
            let w = mmse_kernel(code, k, delay, paths, noise_var, n_symbols)?;
            let base = k * sf + delay;
            Ok(w.iter()
                .enumerate()
                .map(|(j, wj)| wj.conj() * x[base + j])
                .sum())
        })
        .collect::<Result<Vec<Complex64>>>()?;
    Ok(FingerReport {
        finger_id: 1,
        delay,
        magnitude_db: magnitude_db(&symbols),
        symbols,
    })
}

/// Blind SNR of constant-modulus symbols in complex Gaussian noise from the
/// second and fourth moments. `None` when the moments are inconsistent.
pub fn m2m4_snr(symbols: &[Complex64]) -> Option<f64> {
    if symbols.is_empty() {
        return None;
    }
    let n = symbols.len() as f64;
    let m2 = symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
    let m4 = symbols.iter().map(|s| s.norm_sqr().powi(2)).sum::<f64>() / n;
    let s2 = 2.0 * m2 * m2 - m4;
    if s2 <= 0.0 {
        return Some(0.0);
    }
    let signal = s2.sqrt();
    let noise = m2 - signal;
    if noise <= 0.0 {
        return None;
    }
    Some(signal / noise)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedReport {
    pub finger_magnitudes_db: Vec<f64>,
    /// Arithmetic sum of the per-finger dB figures (tabulation convention,
    /// not a power sum).
    pub total_magnitude_db: f64,
    /// Blind per-finger SNR, linear.
    pub finger_snr: Vec<Option<f64>>,
    /// Blind SNR of the combined output, linear.
    pub combined_snr: Option<f64>,
}

impl CombinedReport {
    pub fn combined_snr_db(&self) -> Option<f64> {
        self.combined_snr.map(crate::sigcore::db10)
    }
}

/// Maximal-ratio combining: `y_k = Σ conj(g_f)·s_f,k / Σ|g_f|²`, which
/// leaves an unbiased estimate of the transmitted symbol.
pub fn combine(
    fingers: &[FingerReport],
    channel_gains: &[Complex64],
) -> Result<(Vec<Complex64>, CombinedReport)> {
    if fingers.is_empty() {
        return Err(Error::config("combining needs at least one finger"));
    }
    if fingers.len() != channel_gains.len() {
        return Err(Error::size(format!(
            "{} fingers but {} channel gains",
            fingers.len(),
            channel_gains.len()
        )));
    }
    let gain_power: f64 = channel_gains.iter().map(|g| g.norm_sqr()).sum();
    if gain_power <= 0.0 {
        return Err(Error::Numerical("all combining weights are zero".into()));
    }
    let n = fingers.iter().map(|f| f.symbols.len()).min().unwrap_or(0);
    let combined: Vec<Complex64> = (0..n)
        .map(|k| {
            fingers
                .iter()
                .zip(channel_gains)
                .map(|(f, g)| g.conj() * f.symbols[k])
                .sum::<Complex64>()
                / gain_power
        })
        .collect();
    let finger_magnitudes_db: Vec<f64> = fingers.iter().map(|f| f.magnitude_db).collect();
    let report = CombinedReport {
        total_magnitude_db: finger_magnitudes_db.iter().sum(),
        finger_magnitudes_db,
        finger_snr: fingers.iter().map(|f| m2m4_snr(&f.symbols)).collect(),
        combined_snr: m2m4_snr(&combined),
    };
    Ok((combined, report))
}

/// Where fingers and combining weights come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PathKnowledge {
    /// Path searcher delays, searcher correlation values as weights.
    Search,
    /// True `(delay, gain)` pairs, strongest used first.
    Genie(Vec<(usize, Complex64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RakeConfig {
    pub fingers: usize,
    pub search: SearchParams,
    /// Symbols per frame, pilots included.
    pub n_symbols: usize,
    pub paths: PathKnowledge,
    /// Use MMSE-correlator fingers with this chip noise variance.
    pub mmse_noise_var: Option<f64>,
}

impl RakeConfig {
    pub fn new(fingers: usize, n_symbols: usize) -> Self {
        Self {
            fingers,
            search: SearchParams::default(),
            n_symbols,
            paths: PathKnowledge::Search,
            mmse_noise_var: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RakeOutput {
    /// Combined soft symbols for the whole frame, pilots included.
    pub symbols: Vec<Complex64>,
    pub peaks: Vec<PathPeak>,
    pub fingers: Vec<FingerReport>,
    pub report: CombinedReport,
}

/// Search, despread and combine.
pub fn rake_receive(rx: &ComplexSignal, code: &SpreadingCode, config: &RakeConfig) -> Result<RakeOutput> {
    if config.fingers == 0 {
        return Err(Error::config("RAKE needs at least one finger"));
    }
    let peaks: Vec<PathPeak> = match &config.paths {
        PathKnowledge::Search => {
            let params = SearchParams {
                max_peaks: config.search.max_peaks.max(config.fingers),
                ..config.search.clone()
            };
            path_search(rx, code, &params)?
        }
        PathKnowledge::Genie(paths) => {
            let mut peaks: Vec<PathPeak> = paths
                .iter()
                .map(|&(delay, gain)| PathPeak {
                    delay,
                    strength: gain.norm(),
                    gain,
                    above_threshold: true,
                })
                .collect();
            peaks.sort_by(|a, b| b.strength.total_cmp(&a.strength).then(a.delay.cmp(&b.delay)));
            peaks
        }
    };
    let selected: Vec<PathPeak> = peaks.into_iter().take(config.fingers).collect();
    if selected.is_empty() {
        return Err(Error::NoLock);
    }
    let profile: Vec<(usize, Complex64)> = selected.iter().map(|p| (p.delay, p.gain)).collect();

    let fingers = selected
        .par_iter()
        .enumerate()
        .map(|(i, peak)| {
            let mut report = match config.mmse_noise_var {
                Some(nv) => mmse_finger(rx, code, peak.delay, &profile, nv, config.n_symbols)?,
                None => finger_despread(rx, code, peak.delay, config.n_symbols)?,
            };
            report.finger_id = i + 1;
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    let gains: Vec<Complex64> = selected.iter().map(|p| p.gain).collect();
    let (symbols, report) = combine(&fingers, &gains)?;
    Ok(RakeOutput {
        symbols,
        peaks: selected,
        fingers,
        report,
    })
}
