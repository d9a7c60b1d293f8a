use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Tap, TapSet};
use crate::sigcore::ComplexSignal;
use crate::{Error, Result};

/// Sinc kernel truncation, lobes either side of each tap.
pub const SINC_LOBES: f64 = 16.0;

/// A main-lobe null is a local magnitude minimum at least this far below the
/// peak.
pub const NULL_THRESHOLD_DB: f64 = -20.0;

/// Band-limited impulse and frequency response of a tap set.
#[derive(Debug, Clone, PartialEq)]
pub struct IrAnalysis {
    /// Samples of the band-limited response; sample `i` sits at
    /// `t_start + i / fs`.
    pub ir: ComplexSignal,
    pub t_start: f64,
    /// Frequencies of `fr`, spanning `[-bandwidth/2, bandwidth/2]`.
    pub freqs: Vec<f64>,
    pub fr: Vec<Complex64>,
    pub peak_time: f64,
    /// Left and right first nulls, seconds.
    pub nulls: (f64, f64),
    /// Distance between the first nulls, seconds.
    pub mainlobe_width: f64,
    pub bandwidth: f64,
    pub fs: f64,
}

impl IrAnalysis {
    pub fn times(&self) -> Vec<f64> {
        (0..self.ir.len())
            .map(|i| self.t_start + i as f64 / self.fs)
            .collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn band_limited(taps: &[Tap], bandwidth: f64, t: f64) -> Complex64 {
    taps.iter()
        .filter_map(|tap| {
            let x = bandwidth * (t - tap.delay_s);
            (x.abs() <= SINC_LOBES).then(|| tap.gain * sinc(x))
        })
        .sum()
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Band-limited (brick-wall, truncated-sinc) view of `taps`.
///
/// The impulse response covers `[-16/B, span + 16/B]` on a grid of `fs`;
/// the frequency response is the tap train's transfer function on the DFT
/// bins of that grid inside the band. Null positions are refined off-grid on
/// the continuous response, so `mainlobe_width` is not quantised to `1/fs`.
pub fn impulse_response(taps: &TapSet, bandwidth: f64, fs: f64, span: f64) -> Result<IrAnalysis> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::config(format!("bandwidth {bandwidth} must be positive")));
    }
    if !(fs >= 4.0 * bandwidth) {
        return Err(Error::config(format!(
            "analysis rate {fs} Hz below 4x bandwidth ({} Hz)",
            4.0 * bandwidth
        )));
    }
    if !(span >= taps.max_delay()) {
        return Err(Error::Truncation(format!(
            "span {span} s shorter than max tap delay {} s",
            taps.max_delay()
        )));
    }

    let lobe = SINC_LOBES / bandwidth;
    let n_first = (-lobe * fs).floor() as i64;
    let n_last = ((span + lobe) * fs).ceil() as i64;
    let t_start = n_first as f64 / fs;
    let n = (n_last - n_first + 1) as usize;
    let samples: Vec<Complex64> = (0..n)
        .map(|i| band_limited(taps.taps(), bandwidth, t_start + i as f64 / fs))
        .collect();

    let freqs: Vec<f64> = {
        let df = fs / n as f64;
        let k_max = (bandwidth / 2.0 / df).floor() as i64;
        (-k_max..=k_max).map(|k| k as f64 * df).collect()
    };
    let fr = freqs
        .iter()
        .map(|&f| {
            taps.taps()
                .iter()
                .map(|tap| tap.gain * Complex64::from_polar(1.0, -2.0 * PI * f * tap.delay_s))
                .sum()
        })
        .collect();

    let mags: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let peak = mags
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
        .0;
    let peak_mag = mags[peak];
    if peak_mag <= 0.0 {
        return Err(Error::Numerical("impulse response is identically zero".into()));
    }
    let threshold = peak_mag * 10f64.powf(NULL_THRESHOLD_DB / 20.0);
    let is_null = |i: usize| {
        i > 0 && i + 1 < mags.len() && mags[i] <= mags[i - 1] && mags[i] <= mags[i + 1] && mags[i] < threshold
    };
    let time = |i: usize| t_start + i as f64 / fs;
    let refine = |i: usize| {
        golden_min(
            |t| band_limited(taps.taps(), bandwidth, t).norm_sqr(),
            time(i - 1),
            time(i + 1),
            1e-6 / fs,
        )
    };
    let right = (peak + 1..mags.len())
        .find(|&i| is_null(i))
        .ok_or_else(|| Error::Numerical("no right null within the analysis span".into()))?;
    let left = (1..peak)
        .rev()
        .find(|&i| is_null(i))
        .ok_or_else(|| Error::Numerical("no left null within the analysis span".into()))?;
    let nulls = (refine(left), refine(right));

    Ok(IrAnalysis {
        ir: ComplexSignal::new(samples, fs)?,
        t_start,
        freqs,
        fr,
        peak_time: time(peak),
        nulls,
        mainlobe_width: nulls.1 - nulls.0,
        bandwidth,
        fs,
    })
}

/// Percentage growth of the main lobe from `base` to `perturbed`.
pub fn mainlobe_broadening(base: &IrAnalysis, perturbed: &IrAnalysis) -> Result<f64> {
    if base.bandwidth != perturbed.bandwidth || base.fs != perturbed.fs {
        return Err(Error::config(
            "broadening needs both analyses at the same bandwidth and rate",
        ));
    }
    Ok(100.0 * (perturbed.mainlobe_width - base.mainlobe_width) / base.mainlobe_width)
}

/// Broadening of two equal unit taps `separation` apart against one tap.
pub fn two_tap_broadening(separation: f64, bandwidth: f64, fs: f64) -> Result<f64> {
    let base = impulse_response(&TapSet::single(0.0), bandwidth, fs, 0.0)?;
    let pair = TapSet::new(vec![Tap::unit(0.0), Tap::unit(separation)])?;
    let perturbed = impulse_response(&pair, bandwidth, fs, separation)?;
    mainlobe_broadening(&base, &perturbed)
}

/// `(separation, broadening %)` for each separation.
pub fn broadening_sweep(separations: &[f64], bandwidth: f64, fs: f64) -> Result<Vec<(f64, f64)>> {
    separations
        .iter()
        .map(|&s| two_tap_broadening(s, bandwidth, fs).map(|b| (s, b)))
        .collect()
}

/// Two-tap separation in `(0, max_separation]` whose broadening equals
/// `target_pct`, by bisection on the monotone sweep.
pub fn separation_for_broadening(
    target_pct: f64,
    bandwidth: f64,
    fs: f64,
    max_separation: f64,
) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = max_separation;
    if two_tap_broadening(hi, bandwidth, fs)? < target_pct {
        return Err(Error::Range(format!(
            "{target_pct}% broadening not reached within {max_separation} s"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if two_tap_broadening(mid, bandwidth, fs)? < target_pct {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_5mhz_nulls_at_200ns() {
        let a = impulse_response(&TapSet::single(0.0), 5e6, 40e6, 0.0).unwrap();
        assert!((a.nulls.0 + 200e-9).abs() < 1e-12, "{:?}", a.nulls);
        assert!((a.nulls.1 - 200e-9).abs() < 1e-12);
        assert!((a.mainlobe_width - 400e-9).abs() < 25e-9);
    }

    #[test]
    fn ideal_10mhz_nulls_at_100ns() {
        let a = impulse_response(&TapSet::single(0.0), 10e6, 80e6, 0.0).unwrap();
        assert!((a.nulls.0 + 100e-9).abs() < 1e-12);
        assert!((a.nulls.1 - 100e-9).abs() < 1e-12);
    }

    #[test]
    fn delayed_tap_shifts_nulls() {
        let d = 333.6e-9;
        let a = impulse_response(&TapSet::single(d), 5e6, 40e6, d).unwrap();
        assert!((a.nulls.0 - (d - 200e-9)).abs() < 1e-12);
        assert!((a.mainlobe_width - 400e-9).abs() < 1e-12);
    }

    #[test]
    fn two_taps_40ns_broaden() {
        let pair = TapSet::new(vec![Tap::unit(0.0), Tap::unit(40e-9)]).unwrap();
        let a = impulse_response(&pair, 5e6, 40e6, 40e-9).unwrap();
        assert!(a.mainlobe_width > 400e-9);
    }

    #[test]
    fn flat_fr_for_unit_tap_and_phase_ramp_for_delay() {
        let a = impulse_response(&TapSet::single(0.0), 5e6, 40e6, 0.0).unwrap();
        assert!(a.fr.iter().all(|h| (h.norm() - 1.0).abs() < 1e-6));
        assert!(a.freqs.first().unwrap() >= &-2.5e6 && a.freqs.last().unwrap() <= &2.5e6);
        let d = 100e-9;
        let b = impulse_response(&TapSet::single(d), 5e6, 40e6, d).unwrap();
        for (f, h) in b.freqs.iter().zip(&b.fr) {
            assert!((h.norm() - 1.0).abs() < 1e-12);
            let expected = Complex64::from_polar(1.0, -2.0 * PI * f * d);
            assert!((h - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn identical_inputs_zero_broadening() {
        let a = impulse_response(&TapSet::single(0.0), 5e6, 40e6, 0.0).unwrap();
        assert_eq!(mainlobe_broadening(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn broadening_formula() {
        let mut a = impulse_response(&TapSet::single(0.0), 5e6, 40e6, 0.0).unwrap();
        let mut b = a.clone();
        a.mainlobe_width = 400e-9;
        b.mainlobe_width = 423.6e-9;
        assert!((mainlobe_broadening(&a, &b).unwrap() - 5.90).abs() < 1e-9);
    }

    #[test]
    fn mismatched_rates_rejected() {
        let a = impulse_response(&TapSet::single(0.0), 5e6, 40e6, 0.0).unwrap();
        let b = impulse_response(&TapSet::single(0.0), 5e6, 80e6, 0.0).unwrap();
        assert!(mainlobe_broadening(&a, &b).is_err());
    }

    #[test]
    fn preconditions() {
        let taps = TapSet::single(1e-6);
        assert!(matches!(impulse_response(&taps, 5e6, 40e6, 0.5e-6), Err(Error::Truncation(_))));
        assert!(matches!(impulse_response(&taps, 5e6, 10e6, 2e-6), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_is_strictly_monotone() {
        let seps: Vec<f64> = (1..=20).map(|k| k as f64 * 5e-9).collect();
        let sweep = broadening_sweep(&seps, 5e6, 40e6).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].1 > w[0].1, "{w:?}");
        }
    }
}
