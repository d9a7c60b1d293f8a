use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::ComplexSignal;
use crate::{Error, Result};

/// EVM reported for an exactly zero error vector.
pub const EVM_FLOOR_DB: f64 = -120.0;

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

pub fn bit_errors(tx: &[bool], rx: &[bool]) -> Result<usize> {
    if tx.len() != rx.len() {
        return Err(Error::size(format!(
            "bit streams differ in length: {} vs {}",
            tx.len(),
            rx.len()
        )));
    }
    Ok(tx.iter().zip(rx).filter(|(a, b)| a != b).count())
}

pub fn bit_error_rate(tx: &[bool], rx: &[bool]) -> Result<f64> {
    let errors = bit_errors(tx, rx)?;
    if tx.is_empty() {
        return Ok(0.0);
    }
    Ok(errors as f64 / tx.len() as f64)
}

/// `10·log10(mean|rx - ref|² / mean|ref|²)`, floored at [`EVM_FLOOR_DB`].
pub fn evm_db(reference: &[Complex64], received: &[Complex64]) -> Result<f64> {
    if reference.len() != received.len() {
        return Err(Error::size(format!(
            "symbol streams differ in length: {} vs {}",
            reference.len(),
            received.len()
        )));
    }
    let err: f64 = reference
        .iter()
        .zip(received)
        .map(|(r, x)| (x - r).norm_sqr())
        .sum();
    let refp: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if err == 0.0 {
        return Ok(EVM_FLOOR_DB);
    }
    if refp == 0.0 {
        return Err(Error::Numerical("reference symbols carry no energy".into()));
    }
    Ok((10.0 * (err / refp).log10()).max(EVM_FLOOR_DB))
}

/// Averaged Hann-windowed periodogram with `n_bins` bins, ordered from
/// `-fs/2` to `fs/2` (DC at index `n_bins/2`). Signals shorter than one
/// segment are zero-padded. Bin powers sum to the mean signal power for
/// white input.
pub fn power_spectrum(signal: &ComplexSignal, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins == 0 {
        return Err(Error::size("power spectrum needs at least one bin"));
    }
    if signal.is_empty() {
        return Err(Error::size("power spectrum of an empty signal"));
    }
    let window: Vec<f64> = (0..n_bins)
        .map(|i| {
            if n_bins == 1 {
                1.0
            } else {
                0.5 - 0.5 * (2.0 * PI * i as f64 / n_bins as f64).cos()
            }
        })
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(n_bins);

    let samples = signal.samples();
    let segments = (samples.len() / n_bins).max(1);
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_bins];
    for seg in 0..segments {
        for (i, b) in buf.iter_mut().enumerate() {
            let x = samples.get(seg * n_bins + i).copied().unwrap_or_default();
            *b = x * window[i];
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * window_energy * n_bins as f64);
    let half = n_bins / 2;
    Ok((0..n_bins)
        .map(|i| acc[(i + n_bins - half) % n_bins] * scale)
        .collect())
}

/// Bin centre frequencies matching [`power_spectrum`].
pub fn spectrum_frequencies(n_bins: usize, sample_rate: f64) -> Vec<f64> {
    let half = n_bins as i64 / 2;
    (0..n_bins as i64)
        .map(|i| (i - half) as f64 * sample_rate / n_bins as f64)
        .collect()
}
