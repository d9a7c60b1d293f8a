//! Transversal LMS equalizer with training and decision-directed modes.
//!
//! The filter output is `y[n] = Σ w[i]·x[n−i]` (`wᵀx`) and the update is
//! the complex LMS rule `w ← w + μ·e·conj(x)`. Input windows are ordered
//! newest first and zero-padded before the start of the stream.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sigcore::{ComplexSignal, SymbolAlphabet};
use crate::{Error, Result};

/// Length of the moving average used for divergence detection and the
/// reported learning curves.
pub const MSE_SMOOTHING: usize = 100;

/// Smoothed MSE above this multiple of the best smoothed MSE flags divergence.
pub const DIVERGENCE_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqMode {
    Training,
    DecisionDirected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerConfig {
    pub taps: usize,
    pub mu: f64,
    pub reference_delay: usize,
    /// Minimum training length as a multiple of `taps`.
    #[serde(default = "default_headroom")]
    pub training_headroom: f64,
}

fn default_headroom() -> f64 {
    10.0
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        Self {
            taps: 11,
            mu: 0.01,
            reference_delay: 5,
            training_headroom: default_headroom(),
        }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taps == 0 {
            return Err(Error::config("equalizer needs at least one tap"));
        }
        if self.reference_delay >= self.taps {
            return Err(Error::config(format!(
                "reference delay {} must be below tap count {}",
                self.reference_delay, self.taps
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::config(format!("step size {} must be positive", self.mu)));
        }
        if !(self.training_headroom >= 0.0 && self.training_headroom.is_finite()) {
            return Err(Error::config("training headroom must be non-negative"));
        }
        Ok(())
    }

    pub fn min_training(&self) -> usize {
        ((self.taps as f64 * self.training_headroom).ceil() as usize).max(self.taps)
    }
}

/// Largest step size for mean-square stability, `2 / (L·P_in)`.
pub fn stability_bound(taps: usize, input_power: f64) -> f64 {
    2.0 / (taps as f64 * input_power)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerState {
    taps: Vec<Complex64>,
    mu: f64,
    mode: EqMode,
    reference_delay: usize,
    mse_history: Vec<f64>,
    /// Stream index of the next sample to process.
    next_index: usize,
    window_sum: f64,
    best_smoothed: f64,
    diverged: bool,
}

impl EqualizerState {
    /// Zero taps except a unit spike at `reference_delay`.
    pub fn new(taps: usize, mu: f64, reference_delay: usize) -> Result<Self> {
        if taps == 0 || reference_delay >= taps {
            return Err(Error::config(format!("{taps} taps with reference delay {reference_delay}")));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); taps];
        w[reference_delay] = Complex64::new(1.0, 0.0);
        Self::with_taps(w, mu, reference_delay)
    }

    pub fn with_taps(taps: Vec<Complex64>, mu: f64, reference_delay: usize) -> Result<Self> {
        if taps.is_empty() || reference_delay >= taps.len() {
            return Err(Error::config(format!(
                "{} taps with reference delay {reference_delay}",
                taps.len()
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::config(format!("step size {mu} must be finite and non-negative")));
        }
        Ok(Self {
            taps,
            mu,
            mode: EqMode::Training,
            reference_delay,
            mse_history: Vec::new(),
            next_index: 0,
            window_sum: 0.0,
            best_smoothed: f64::INFINITY,
            diverged: false,
        })
    }

    pub fn from_config(cfg: &EqualizerConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.taps, cfg.mu, cfg.reference_delay)
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn set_mu(&mut self, mu: f64) {
        self.mu = mu;
    }

    pub fn mode(&self) -> EqMode {
        self.mode
    }

    pub fn reference_delay(&self) -> usize {
        self.reference_delay
    }

    pub fn mse_history(&self) -> &[f64] {
        &self.mse_history
    }

    pub fn next_index(&self) -> usize {
        self.next_index
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    /// `wᵀx` for a newest-first window.
    pub fn filter(&self, window: &[Complex64]) -> Complex64 {
        self.taps.iter().zip(window).map(|(w, x)| w * x).sum()
    }

    /// Moving average of the squared error over [`MSE_SMOOTHING`] steps.
    pub fn smoothed_mse(&self) -> Vec<f64> {
        smooth(&self.mse_history, MSE_SMOOTHING)
    }

    fn record(&mut self, err_sq: f64) {
        self.mse_history.push(err_sq);
        self.window_sum += err_sq;
        let n = self.mse_history.len();
        if n > MSE_SMOOTHING {
            self.window_sum -= self.mse_history[n - 1 - MSE_SMOOTHING];
        }
        if n >= MSE_SMOOTHING {
            let s = self.window_sum / MSE_SMOOTHING as f64;
            if s < self.best_smoothed {
                self.best_smoothed = s;
            }
            if !s.is_finite() || s > DIVERGENCE_RATIO * self.best_smoothed {
                self.diverged = true;
            }
        }
    }
}

fn smooth(x: &[f64], window: usize) -> Vec<f64> {
    if x.len() < window {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(x.len() - window + 1);
    let mut sum: f64 = x[..window].iter().sum();
    out.push(sum / window as f64);
    for i in window..x.len() {
        sum += x[i] - x[i - window];
        out.push(sum / window as f64);
    }
    out
}

/// Newest-first window of `len` samples ending at `n`, zero before the start.
pub fn input_window(x: &[Complex64], n: usize, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            n.checked_sub(i)
                .and_then(|k| x.get(k).copied())
                .unwrap_or(Complex64::new(0.0, 0.0))
        })
        .collect()
}

/// One LMS iteration; returns `(output, error)`.
pub fn lms_step(
    state: &mut EqualizerState,
    window: &[Complex64],
    desired: Complex64,
) -> Result<(Complex64, Complex64)> {
    if window.len() != state.taps.len() {
        return Err(Error::size(format!(
            "window of {} samples for {} taps",
            window.len(),
            state.taps.len()
        )));
    }
    if !window.iter().all(|x| x.re.is_finite() && x.im.is_finite())
        || !(desired.re.is_finite() && desired.im.is_finite())
    {
        return Err(Error::Numerical("non-finite equalizer input".into()));
    }
    let y = state.filter(window);
    let e = desired - y;
    let step = state.mu * e;
    for (w, x) in state.taps.iter_mut().zip(window) {
        *w += step * x.conj();
    }
    state.record(e.norm_sqr());
    Ok((y, e))
}

/// Adapts from `state.next_index()` while `desired(n)` yields a target,
/// stopping early once the error stops being finite.
fn adapt<F>(state: &mut EqualizerState, x: &[Complex64], end: usize, mut desired: F) -> Result<Vec<Complex64>>
where
    F: FnMut(&EqualizerState, Complex64) -> Complex64,
{
    let l = state.taps.len();
    let mut outputs = Vec::with_capacity(end.saturating_sub(state.next_index));
    for n in state.next_index..end {
        let window = input_window(x, n, l);
        let y = state.filter(&window);
        let d = desired(state, y);
        let (_, e) = lms_step(state, &window, d)?;
        state.next_index = n + 1;
        outputs.push(y);
        if !(e.re.is_finite() && e.im.is_finite()) {
            state.diverged = true;
            break;
        }
    }
    Ok(outputs)
}

/// Training mode: the desired response at stream index `n` is
/// `training[n − D]`, for `n` in `D..D + training.len()` (bounded by the
/// received length).
pub fn train(rx: &ComplexSignal, training: &[Complex64], cfg: &EqualizerConfig) -> Result<EqualizerState> {
    let mut state = EqualizerState::from_config(cfg)?;
    train_from(&mut state, rx, training)?;
    Ok(state)
}

/// Continues training from `state.next_index()` with the known symbols
/// `training` aligned as in [`train`] (index `n` wants `training[n − D]`).
pub fn train_from(state: &mut EqualizerState, rx: &ComplexSignal, training: &[Complex64]) -> Result<Vec<Complex64>> {
    let l = state.taps.len();
    if training.len() < l {
        return Err(Error::size(format!(
            "training sequence of {} symbols shorter than {l} taps",
            training.len()
        )));
    }
    let d = state.reference_delay;
    state.mode = EqMode::Training;
    state.next_index = state.next_index.max(d);
    let end = (training.len() + d).min(rx.len());
    let mut n = state.next_index;
    adapt(state, rx.samples(), end, |_, _| {
        let t = training[n - d];
        n += 1;
        t
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdOutput {
    /// Filter outputs before slicing.
    pub soft: Vec<Complex64>,
    /// Sliced decisions; `decisions[i]` estimates the symbol sent at stream
    /// index `first_index + i − D`.
    pub decisions: Vec<Complex64>,
    pub first_index: usize,
}

/// Decision-directed mode from `state.next_index()` to the end of `rx`.
pub fn equalize_dd(
    rx: &ComplexSignal,
    mut state: EqualizerState,
    alphabet: &SymbolAlphabet,
) -> Result<(DdOutput, EqualizerState)> {
    state.mode = EqMode::DecisionDirected;
    state.next_index = state.next_index.max(state.reference_delay);
    let first_index = state.next_index;
    let soft = adapt(&mut state, rx.samples(), rx.len(), |_, y| alphabet.slice(y))?;
    let decisions = soft.iter().map(|&y| alphabet.slice(y)).collect();
    Ok((
        DdOutput {
            soft,
            decisions,
            first_index,
        },
        state,
    ))
}

/// Fixed-filter output `wᵀx` at every stream index of `rx`.
pub fn apply_filter(rx: &ComplexSignal, taps: &[Complex64]) -> Vec<Complex64> {
    let x = rx.samples();
    (0..x.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .filter(|&(i, _)| i <= n)
                .map(|(i, w)| w * x[n - i])
                .sum()
        })
        .collect()
}
