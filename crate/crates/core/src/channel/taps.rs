use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sigcore::ComplexSignal;
use crate::{Error, Result};

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tap {
    /// Seconds.
    pub delay_s: f64,
    pub gain: Complex64,
    #[serde(default)]
    pub doppler_hz: f64,
}

impl Tap {
    pub fn new(delay_s: f64, gain: Complex64, doppler_hz: f64) -> Self {
        Self {
            delay_s,
            gain,
            doppler_hz,
        }
    }

    pub fn unit(delay_s: f64) -> Self {
        Self::new(delay_s, Complex64::new(1.0, 0.0), 0.0)
    }
}

/// Non-empty list of taps sorted by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    taps: Vec<Tap>,
    normalized: bool,
}

impl TapSet {
    pub fn new(mut taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::config("tap set needs at least one tap"));
        }
        for t in &taps {
            if !(t.delay_s >= 0.0 && t.delay_s.is_finite()) {
                return Err(Error::config(format!("tap delay {} is not a finite non-negative time", t.delay_s)));
            }
            if !(t.gain.re.is_finite() && t.gain.im.is_finite() && t.doppler_hz.is_finite()) {
                return Err(Error::config("tap gain and Doppler must be finite"));
            }
        }
        taps.sort_by(|a, b| a.delay_s.total_cmp(&b.delay_s));
        Ok(Self {
            taps,
            normalized: false,
        })
    }

    pub fn single(delay_s: f64) -> Self {
        Self {
            taps: vec![Tap::unit(delay_s)],
            normalized: true,
        }
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_power(&self) -> f64 {
        self.taps.iter().map(|t| t.gain.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> f64 {
        self.taps.last().map(|t| t.delay_s).unwrap_or(0.0)
    }

    pub fn min_delay(&self) -> f64 {
        self.taps.first().map(|t| t.delay_s).unwrap_or(0.0)
    }

    /// Scaled copy with unit total power.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.total_power();
        if p <= 0.0 {
            return Err(Error::Numerical("cannot normalize a tap set with zero power".into()));
        }
        let scale = 1.0 / p.sqrt();
        Ok(Self {
            taps: self
                .taps
                .iter()
                .map(|t| Tap::new(t.delay_s, t.gain * scale, t.doppler_hz))
                .collect(),
            normalized: true,
        })
    }

    /// Copy with every delay reduced by the first tap's delay.
    pub fn relative_to_first(&self) -> Self {
        let d0 = self.min_delay();
        Self {
            taps: self
                .taps
                .iter()
                .map(|t| Tap::new(t.delay_s - d0, t.gain, t.doppler_hz))
                .collect(),
            normalized: self.normalized,
        }
    }

    /// Copy with all Doppler shifts set to zero.
    pub fn without_doppler(&self) -> Self {
        Self {
            taps: self
                .taps
                .iter()
                .map(|t| Tap::new(t.delay_s, t.gain, 0.0))
                .collect(),
            normalized: self.normalized,
        }
    }
}

/// Tap delay rounded to the nearest whole sample.
pub fn delay_in_samples(delay_s: f64, sample_rate: f64) -> usize {
    (delay_s * sample_rate).round() as usize
}

/// Tapped delay line with per-tap Doppler rotation:
/// `y[m] = sum_k g_k · exp(j2π f_k m/fs) · x[m - d_k]`.
///
/// Delays are rounded to whole samples; the output is longer than the input
/// by the largest delay.
pub fn apply_channel(signal: &ComplexSignal, taps: &TapSet) -> ComplexSignal {
    let fs = signal.sample_rate();
    let x = signal.samples();
    let delays: Vec<usize> = taps
        .taps()
        .iter()
        .map(|t| delay_in_samples(t.delay_s, fs))
        .collect();
    let max_d = delays.iter().copied().max().unwrap_or(0);
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + max_d];
    if x.is_empty() {
        return signal.with_samples(Vec::new());
    }
    for (tap, &d) in taps.taps().iter().zip(&delays) {
        let step = 2.0 * PI * tap.doppler_hz / fs;
        for (i, &xi) in x.iter().enumerate() {
            let m = i + d;
            let g = if tap.doppler_hz == 0.0 {
                tap.gain
            } else {
                tap.gain * Complex64::from_polar(1.0, step * m as f64)
            };
            y[m] += g * xi;
        }
    }
    signal.with_samples(y)
}
