//! Cyclic-prefix OFDM modem with per-carrier channel estimation and one-tap
//! equalization.
//!
//! Carriers are indexed in `[-n_fft/2, n_fft/2)`; carrier `k` sits in FFT
//! bin `k mod n_fft`. Transforms are unitary (`1/√N` both ways).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channel::{delay_in_samples, TapSet};
use crate::sigcore::ComplexSignal;
use crate::{Error, Result};

/// `|h|` below which a carrier is erased instead of divided.
pub const ERASURE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmParams {
    n_fft: usize,
    cp_len: usize,
    used_carriers: Vec<i32>,
    sample_rate: f64,
}

/// Serialisable form of [`OfdmParams`]; used carriers as inclusive ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSpec {
    pub n_fft: usize,
    pub cp_len: usize,
    pub used_ranges: Vec<(i32, i32)>,
    pub sample_rate: f64,
}

impl OfdmSpec {
    pub fn wifi() -> Self {
        Self {
            n_fft: 64,
            cp_len: 16,
            used_ranges: vec![(-26, -1), (1, 26)],
            sample_rate: 20e6,
        }
    }

    /// 3.5 MHz channel with 8/7 sampling factor, G = 1/8.
    pub fn wimax() -> Self {
        Self {
            n_fft: 256,
            cp_len: 32,
            used_ranges: vec![(-100, -1), (1, 100)],
            sample_rate: 4e6,
        }
    }

    pub fn build(&self) -> Result<OfdmParams> {
        let carriers = self
            .used_ranges
            .iter()
            .flat_map(|&(a, b)| a..=b)
            .collect();
        OfdmParams::new(self.n_fft, self.cp_len, carriers, self.sample_rate)
    }
}

impl OfdmParams {
    pub fn new(n_fft: usize, cp_len: usize, mut used_carriers: Vec<i32>, sample_rate: f64) -> Result<Self> {
        if n_fft < 2 || !n_fft.is_power_of_two() {
            return Err(Error::config(format!("n_fft {n_fft} must be a power of two ≥ 2")));
        }
        if cp_len >= n_fft {
            return Err(Error::config(format!("cp_len {cp_len} must be below n_fft {n_fft}")));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::config(format!("sample rate {sample_rate} must be positive")));
        }
        let half = (n_fft / 2) as i32;
        if used_carriers.is_empty() {
            return Err(Error::config("no used carriers"));
        }
        for &k in &used_carriers {
            if k == 0 || k < -half || k >= half {
                return Err(Error::config(format!(
                    "carrier {k} outside [-{half}, {half}) or at DC"
                )));
            }
        }
        used_carriers.sort_unstable();
        if used_carriers.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("duplicate used carrier"));
        }
        Ok(Self {
            n_fft,
            cp_len,
            used_carriers,
            sample_rate,
        })
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn used_carriers(&self) -> &[i32] {
        &self.used_carriers
    }

    pub fn n_used(&self) -> usize {
        self.used_carriers.len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Samples per OFDM symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }

    pub fn cp_duration(&self) -> f64 {
        self.cp_len as f64 / self.sample_rate
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.sample_rate / self.n_fft as f64
    }

    pub fn bin(&self, carrier: i32) -> usize {
        carrier.rem_euclid(self.n_fft as i32) as usize
    }
}

pub fn ofdm_modulate(symbols: &[Complex64], params: &OfdmParams) -> Result<ComplexSignal> {
    let used = params.n_used();
    if !symbols.len().is_multiple_of(used) {
        return Err(Error::size(format!(
            "{} symbols do not fill whole OFDM symbols of {used} carriers",
            symbols.len()
        )));
    }
    let n = params.n_fft();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let blocks: Vec<Vec<Complex64>> = symbols
        .par_chunks(used)
        .map(|chunk| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (&k, &s) in params.used_carriers().iter().zip(chunk) {
                buf[params.bin(k)] = s;
            }
            ifft.process(&mut buf);
            let mut out = Vec::with_capacity(params.symbol_len());
            out.extend(buf[n - params.cp_len()..].iter().map(|x| x * scale));
            out.extend(buf.iter().map(|x| x * scale));
            out
        })
        .collect();
    ComplexSignal::new(blocks.concat(), params.sample_rate())
}

/// Strips the prefix and transforms each OFDM symbol. The FFT window of
/// symbol `m` starts `timing_offset` samples before the end of its prefix;
/// any offset in `[0, cp_len - max_delay]` is ISI-free.
pub fn ofdm_demodulate(
    signal: &ComplexSignal,
    params: &OfdmParams,
    timing_offset: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if timing_offset > params.cp_len() {
        return Err(Error::Range(format!(
            "timing offset {timing_offset} exceeds cp_len {}",
            params.cp_len()
        )));
    }
    let len = params.symbol_len();
    let x = signal.samples();
    if x.len() < len {
        return Err(Error::size(format!(
            "signal of {} samples shorter than one OFDM symbol ({len})",
            x.len()
        )));
    }
    let n = params.n_fft();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let count = x.len() / len;
    Ok((0..count)
        .into_par_iter()
        .map(|m| {
            let start = m * len + params.cp_len() - timing_offset;
            let mut buf = x[start..start + n].to_vec();
            fft.process(&mut buf);
            params
                .used_carriers()
                .iter()
                .map(|&k| buf[params.bin(k)] * scale)
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    Known,
    Lms,
    LeastSquaresPreamble,
}

/// Complex gain per used carrier, in `used_carriers` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h: Vec<Complex64>,
    pub source: EstimateSource,
}

/// Exact per-carrier response of `taps` at the modem's sample rate, with
/// delays rounded to whole samples as [`crate::channel::apply_channel`]
/// does. Doppler is ignored.
pub fn known_channel(taps: &TapSet, params: &OfdmParams) -> ChannelEstimate {
    let n = params.n_fft() as f64;
    let h = params
        .used_carriers()
        .iter()
        .map(|&k| {
            taps.taps()
                .iter()
                .map(|t| {
                    let d = delay_in_samples(t.delay_s, params.sample_rate()) as f64;
                    t.gain * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * d / n)
                })
                .sum()
        })
        .collect();
    ChannelEstimate {
        h,
        source: EstimateSource::Known,
    }
}

pub fn estimate_channel_ls(
    rx_preamble: &[Complex64],
    known_preamble: &[Complex64],
    params: &OfdmParams,
) -> Result<ChannelEstimate> {
    if rx_preamble.len() != params.n_used() || known_preamble.len() != params.n_used() {
        return Err(Error::size(format!(
            "preamble lengths {} / {} do not match {} used carriers",
            rx_preamble.len(),
            known_preamble.len(),
            params.n_used()
        )));
    }
    if let Some(i) = known_preamble.iter().position(|p| p.norm() == 0.0) {
        return Err(Error::Numerical(format!(
            "known preamble is zero on carrier {}",
            params.used_carriers()[i]
        )));
    }
    Ok(ChannelEstimate {
        h: rx_preamble
            .iter()
            .zip(known_preamble)
            .map(|(r, p)| r / p)
            .collect(),
        source: EstimateSource::LeastSquaresPreamble,
    })
}

/// Independent scalar LMS loop per carrier:
/// `ĥ ← ĥ + μ·conj(ref)·(rx − ĥ·ref)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmsChannelTracker {
    h: Vec<Complex64>,
    mu: f64,
}

impl LmsChannelTracker {
    pub fn new(initial: Vec<Complex64>, mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::config(format!("LMS step {mu} must be finite and non-negative")));
        }
        Ok(Self { h: initial, mu })
    }

    pub fn zeros(n_used: usize, mu: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n_used], mu)
    }

    pub fn update(&mut self, rx: &[Complex64], reference: &[Complex64]) -> Result<()> {
        if rx.len() != self.h.len() || reference.len() != self.h.len() {
            return Err(Error::size(format!(
                "LMS update with {} / {} carriers, tracker holds {}",
                rx.len(),
                reference.len(),
                self.h.len()
            )));
        }
        for ((h, &r), &x) in self.h.iter_mut().zip(rx).zip(reference) {
            *h += self.mu * x.conj() * (r - *h * x);
        }
        Ok(())
    }

    pub fn estimate(&self) -> ChannelEstimate {
        ChannelEstimate {
            h: self.h.clone(),
            source: EstimateSource::Lms,
        }
    }
}

/// Runs the per-carrier LMS loop over the given training symbols, starting
/// from `init` (zeros when `None`).
pub fn estimate_channel_lms(
    rx: &[Vec<Complex64>],
    reference: &[Vec<Complex64>],
    params: &OfdmParams,
    mu: f64,
    init: Option<&ChannelEstimate>,
) -> Result<ChannelEstimate> {
    if rx.len() != reference.len() {
        return Err(Error::size(format!(
            "{} received vs {} reference OFDM symbols",
            rx.len(),
            reference.len()
        )));
    }
    let start = match init {
        Some(e) if e.h.len() == params.n_used() => e.h.clone(),
        Some(e) => {
            return Err(Error::size(format!(
                "initial estimate has {} carriers, expected {}",
                e.h.len(),
                params.n_used()
            )))
        }
        None => vec![Complex64::new(0.0, 0.0); params.n_used()],
    };
    let mut tracker = LmsChannelTracker::new(start, mu)?;
    for (r, x) in rx.iter().zip(reference) {
        tracker.update(r, x)?;
    }
    Ok(tracker.estimate())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    /// `rx / h`, zero on erased carriers.
    pub symbols: Vec<Complex64>,
    pub erased: Vec<bool>,
}

impl Equalized {
    /// Symbols and matching references with erased carriers removed.
    pub fn retained(&self, reference: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        self.symbols
            .iter()
            .zip(reference)
            .zip(&self.erased)
            .filter(|(_, &e)| !e)
            .map(|((&s, &r), _)| (s, r))
            .unzip()
    }
}

pub fn one_tap_equalize(rx_carriers: &[Complex64], est: &ChannelEstimate) -> Result<Equalized> {
    if rx_carriers.len() != est.h.len() {
        return Err(Error::size(format!(
            "{} carriers vs {} channel coefficients",
            rx_carriers.len(),
            est.h.len()
        )));
    }
    let (symbols, erased) = rx_carriers
        .iter()
        .zip(&est.h)
        .map(|(&r, &h)| {
            if h.norm() < ERASURE_FLOOR {
                (Complex64::new(0.0, 0.0), true)
            } else {
                (r / h, false)
            }
        })
        .unzip();
    Ok(Equalized { symbols, erased })
}

/// Frequency offset: multiplies sample `n` by `exp(j2π f n / fs)`.
pub fn apply_doppler_offset(signal: &ComplexSignal, doppler_hz: f64) -> ComplexSignal {
    if doppler_hz == 0.0 {
        return signal.clone();
    }
    let step = 2.0 * PI * doppler_hz / signal.sample_rate();
    signal.with_samples(
        signal
            .samples()
            .iter()
            .enumerate()
            .map(|(n, &x)| x * Complex64::from_polar(1.0, step * n as f64))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, Tap};
    use crate::sigcore::{add_awgn, evm_db, seeded_rng, Modulation};
    use proptest::prelude::*;
    use rand::Rng;

    fn qpsk(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = seeded_rng(seed);
        let bits: Vec<bool> = (0..2 * n).map(|_| rng.random()).collect();
        Modulation::Qpsk.alphabet().modulate(&bits).unwrap()
    }

    fn wifi() -> OfdmParams {
        OfdmSpec::wifi().build().unwrap()
    }

    fn sample_taps(params: &OfdmParams, taps: &[(usize, Complex64)]) -> TapSet {
        TapSet::new(
            taps.iter()
                .map(|&(d, g)| Tap::new(d as f64 / params.sample_rate(), g, 0.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn presets_are_consistent() {
        let w = wifi();
        assert_eq!((w.n_fft(), w.cp_len(), w.n_used()), (64, 16, 52));
        let m = OfdmSpec::wimax().build().unwrap();
        assert_eq!((m.n_fft(), m.cp_len(), m.n_used()), (256, 32, 200));
        assert!(!m.used_carriers().contains(&0));
    }

    #[test]
    fn invalid_params() {
        assert!(OfdmParams::new(60, 16, vec![1], 1.0).is_err());
        assert!(OfdmParams::new(64, 64, vec![1], 1.0).is_err());
        assert!(OfdmParams::new(64, 16, vec![0], 1.0).is_err());
        assert!(OfdmParams::new(64, 16, vec![32], 1.0).is_err());
        assert!(OfdmParams::new(64, 16, vec![-32, 1, 1], 1.0).is_err());
    }

    #[test]
    fn round_trip_identity() {
        let p = wifi();
        let s = qpsk(52 * 5, 1);
        let tx = ofdm_modulate(&s, &p).unwrap();
        assert_eq!(tx.len(), 5 * 80);
        let rx: Vec<Complex64> = ofdm_demodulate(&tx, &p, 0).unwrap().concat();
        for (a, b) in rx.iter().zip(&s) {
            assert!((a - b).norm() < 1e-10);
        }
        let e_in: f64 = s.iter().map(|x| x.norm_sqr()).sum();
        let e_out: f64 = rx.iter().map(|x| x.norm_sqr()).sum();
        assert!((e_in - e_out).abs() < 1e-10);
    }

    #[test]
    fn size_errors() {
        let p = wifi();
        assert!(matches!(ofdm_modulate(&qpsk(51, 1), &p), Err(Error::Size(_))));
        let short = ComplexSignal::new(vec![Complex64::new(0.0, 0.0); 79], p.sample_rate()).unwrap();
        assert!(matches!(ofdm_demodulate(&short, &p, 0), Err(Error::Size(_))));
    }

    #[test]
    fn single_carrier_is_a_tone() {
        let p = OfdmParams::new(64, 16, vec![5], 1.0).unwrap();
        let tx = ofdm_modulate(&[Complex64::new(1.0, 0.0)], &p).unwrap();
        for (n, x) in tx.samples().iter().enumerate() {
            let expected = Complex64::from_polar(1.0 / 8.0, 2.0 * PI * 5.0 * (n as f64 - 16.0) / 64.0);
            assert!((x - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn integer_delay_is_phase_ramp() {
        let p = wifi();
        let s = qpsk(52 * 3, 2);
        let d = 7;
        let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &sample_taps(&p, &[(d, Complex64::new(1.0, 0.0))]));
        let carriers = ofdm_demodulate(&rx, &p, 0).unwrap();
        for (m, sym) in carriers.iter().enumerate() {
            for (i, &k) in p.used_carriers().iter().enumerate() {
                let expected = s[m * 52 + i] * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * d as f64 / 64.0);
                assert!((sym[i] - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn two_tap_gain_is_tap_dft() {
        let p = wifi();
        let taps = [(0usize, Complex64::new(0.9, 0.1)), (9usize, Complex64::new(-0.3, 0.4))];
        let s = qpsk(52 * 4, 3);
        let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &sample_taps(&p, &taps));
        let carriers = ofdm_demodulate(&rx, &p, 0).unwrap();
        // oracle: direct DFT of the dense tap vector
        let mut dense = vec![Complex64::new(0.0, 0.0); 64];
        for &(d, g) in &taps {
            dense[d] = g;
        }
        let h: Vec<Complex64> = p
            .used_carriers()
            .iter()
            .map(|&k| {
                (0..64)
                    .map(|n| dense[n] * Complex64::from_polar(1.0, -2.0 * PI * (k.rem_euclid(64) as f64) * n as f64 / 64.0))
                    .sum()
            })
            .collect();
        let est = ChannelEstimate { h, source: EstimateSource::Known };
        let eq: Vec<Complex64> = carriers
            .iter()
            .flat_map(|c| one_tap_equalize(c, &est).unwrap().symbols)
            .collect();
        assert!(evm_db(&s, &eq).unwrap() <= -80.0);
        assert_eq!(known_channel(&sample_taps(&p, &taps), &p).h.len(), 52);
        for (a, b) in known_channel(&sample_taps(&p, &taps), &p).h.iter().zip(&est.h) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delay_beyond_cp_leaves_isi_floor() {
        let p = wifi();
        let taps = [(0usize, Complex64::new(0.8, 0.0)), (24usize, Complex64::new(0.6, 0.0))];
        let s = qpsk(52 * 20, 4);
        let tset = sample_taps(&p, &taps);
        let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &tset);
        let est = known_channel(&tset, &p);
        let eq: Vec<Complex64> = ofdm_demodulate(&rx, &p, 0)
            .unwrap()
            .iter()
            .take(20)
            .flat_map(|c| one_tap_equalize(c, &est).unwrap().symbols)
            .collect();
        assert!(evm_db(&s, &eq).unwrap() >= -20.0);
    }

    #[test]
    fn timing_offset_inside_cp_is_isi_free() {
        let p = wifi();
        let taps = [(0usize, Complex64::new(1.0, 0.0)), (4usize, Complex64::new(0.5, 0.2))];
        let s = qpsk(52 * 3, 5);
        let tset = sample_taps(&p, &taps);
        let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &tset);
        let offset = 6;
        let carriers = ofdm_demodulate(&rx, &p, offset).unwrap();
        let pre = ofdm_demodulate(&apply_channel(&ofdm_modulate(&s[..52], &p).unwrap(), &tset), &p, offset).unwrap();
        let est = estimate_channel_ls(&pre[0], &s[..52], &p).unwrap();
        let eq: Vec<Complex64> = carriers.iter().take(3).flat_map(|c| one_tap_equalize(c, &est).unwrap().symbols).collect();
        assert!(evm_db(&s, &eq).unwrap() <= -80.0);
        assert!(ofdm_demodulate(&rx, &p, 17).is_err());
    }

    #[test]
    fn ls_estimates() {
        let p = wifi();
        let pre = qpsk(52, 6);
        let identity = estimate_channel_ls(&pre, &pre, &p).unwrap();
        assert!(identity.h.iter().all(|h| (h - 1.0).norm() < 1e-15));
        let d = 3;
        let rx = apply_channel(&ofdm_modulate(&pre, &p).unwrap(), &sample_taps(&p, &[(d, Complex64::new(1.0, 0.0))]));
        let est = estimate_channel_ls(&ofdm_demodulate(&rx, &p, 0).unwrap()[0], &pre, &p).unwrap();
        for (h, &k) in est.h.iter().zip(p.used_carriers()) {
            assert!((h - Complex64::from_polar(1.0, -2.0 * PI * k as f64 * d as f64 / 64.0)).norm() < 1e-9);
        }
        let mut zero = pre.clone();
        zero[3] = Complex64::new(0.0, 0.0);
        assert!(estimate_channel_ls(&pre, &zero, &p).is_err());
    }

    #[test]
    fn ls_noise_variance_at_20db() {
        let p = wifi();
        let mut err = 0.0;
        let mut count = 0.0;
        for seed in 0..200 {
            let pre = qpsk(52, 1000 + seed);
            let tx = ofdm_modulate(&pre, &p).unwrap();
            let rx = add_awgn(&tx, 20.0, &mut seeded_rng(seed));
            let est = estimate_channel_ls(&ofdm_demodulate(&rx, &p, 0).unwrap()[0], &pre, &p).unwrap();
            for h in &est.h {
                err += (h - 1.0).norm_sqr();
                count += 1.0;
            }
        }
        // time-domain SNR 20 dB on 52/64 occupied bins: per-carrier noise = 0.01 * 52/64
        let expected = 0.01 * 52.0 / 64.0;
        let measured = err / count;
        assert!((measured / expected - 1.0).abs() < 0.1, "{measured} vs {expected}");
    }

    #[test]
    fn lms_single_step_and_frozen() {
        let p = wifi();
        let x = qpsk(52, 7);
        let r: Vec<Complex64> = x.iter().map(|v| v * Complex64::new(0.3, -0.7)).collect();
        let est = estimate_channel_lms(std::slice::from_ref(&r), std::slice::from_ref(&x), &p, 1.0, None).unwrap();
        for (h, (ri, xi)) in est.h.iter().zip(r.iter().zip(&x)) {
            assert!((h - ri / xi).norm() < 1e-12);
        }
        let init = ChannelEstimate { h: vec![Complex64::new(0.5, 0.5); 52], source: EstimateSource::Known };
        let frozen = estimate_channel_lms(&[r], &[x], &p, 0.0, Some(&init)).unwrap();
        assert_eq!(frozen.h, init.h);
    }

    #[test]
    fn lms_converges_to_ls_on_static_channel() {
        let p = wifi();
        let tset = sample_taps(&p, &[(0, Complex64::new(0.8, 0.2)), (5, Complex64::new(-0.3, 0.4))]);
        let n_sym = 60;
        let s = qpsk(52 * n_sym, 8);
        let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &tset);
        let carriers = ofdm_demodulate(&rx, &p, 0).unwrap();
        let refs: Vec<Vec<Complex64>> = s.chunks(52).map(|c| c.to_vec()).collect();
        let ls = estimate_channel_ls(&carriers[0], &refs[0], &p).unwrap();
        let mut tracker = LmsChannelTracker::zeros(52, 0.3).unwrap();
        let mut last = f64::INFINITY;
        for m in 0..n_sym {
            tracker.update(&carriers[m], &refs[m]).unwrap();
            let err: f64 = tracker.estimate().h.iter().zip(&ls.h).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < last || err < 1e-12);
            last = err;
        }
        assert!(tracker.estimate().h.iter().zip(&ls.h).all(|(a, b)| (a - b).norm() < 1e-3));
    }

    #[test]
    fn equalizer_identity_and_erasure() {
        let x = qpsk(4, 9);
        let ones = ChannelEstimate { h: vec![Complex64::new(1.0, 0.0); 4], source: EstimateSource::Known };
        assert_eq!(one_tap_equalize(&x, &ones).unwrap().symbols, x);
        let mut h = ones.h.clone();
        h[2] = Complex64::new(1e-9, 0.0);
        let eq = one_tap_equalize(&x, &ChannelEstimate { h, source: EstimateSource::Known }).unwrap();
        assert_eq!(eq.erased, vec![false, false, true, false]);
        assert!(eq.symbols.iter().all(|s| s.norm().is_finite() && s.norm() < 2.0));
        let (kept, refs) = eq.retained(&x);
        assert_eq!(kept.len(), 3);
        assert_eq!(refs.len(), 3);
    }

    #[test]
    fn doppler_offset_effects() {
        let p = wifi();
        let s = qpsk(52 * 10, 10);
        let tx = ofdm_modulate(&s, &p).unwrap();
        assert_eq!(apply_doppler_offset(&tx, 0.0), tx);

        // one subcarrier spacing moves data up one carrier index
        let shifted = apply_doppler_offset(&tx, p.subcarrier_spacing());
        let carriers = ofdm_demodulate(&shifted, &p, 0).unwrap();
        for (m, sym) in carriers.iter().enumerate() {
            for i in 0..p.n_used() - 1 {
                let k = p.used_carriers()[i];
                let next = p.used_carriers()[i + 1];
                if next == k + 1 {
                    // CP advance of each symbol adds a common phase
                    let phase = Complex64::from_polar(1.0, 2.0 * PI * ((m * 80 + 16) as f64) / 64.0);
                    assert!((sym[i + 1] - s[m * 52 + i] * phase).norm() < 1e-9);
                }
            }
        }

        // a tenth of a spacing hurts uncorrected EVM
        let ones = ChannelEstimate { h: vec![Complex64::new(1.0, 0.0); 52], source: EstimateSource::Known };
        let evm_at = |hz: f64| {
            let rx = add_awgn(&apply_doppler_offset(&tx, hz), 25.0, &mut seeded_rng(3));
            let eq: Vec<Complex64> = ofdm_demodulate(&rx, &p, 0)
                .unwrap()
                .iter()
                .flat_map(|c| one_tap_equalize(c, &ones).unwrap().symbols)
                .collect();
            evm_db(&s, &eq).unwrap()
        };
        assert!(evm_at(0.1 * p.subcarrier_spacing()) > evm_at(0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn cp_absorbs_any_short_channel(
            n_taps in 1usize..5,
            seed in 0u64..10_000,
        ) {
            let p = wifi();
            let mut rng = seeded_rng(seed);
            let taps: Vec<(usize, Complex64)> = (0..n_taps)
                .map(|_| (rng.random_range(0..=16), Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .chain(std::iter::once((0, Complex64::new(1.0, 0.0))))
                .collect();
            let tset = sample_taps(&p, &taps);
            let s = qpsk(52 * 3, seed);
            let rx = apply_channel(&ofdm_modulate(&s, &p).unwrap(), &tset);
            let est = known_channel(&tset, &p);
            let mut kept = Vec::new();
            let mut refs = Vec::new();
            for (m, c) in ofdm_demodulate(&rx, &p, 0).unwrap().iter().take(3).enumerate() {
                let eq = one_tap_equalize(c, &est).unwrap();
                let (k, r) = eq.retained(&s[m * 52..(m + 1) * 52]);
                kept.extend(k);
                refs.extend(r);
            }
            prop_assert!(evm_db(&refs, &kept).unwrap() <= -80.0);
        }
    }
}
