use std::f64::consts::PI;

use airlink::channel::{
    apply_channel, broadening_sweep, impulse_response, scene_to_taps, separation_for_broadening, Point2,
    ScattererScene, Tap, TapSet, SPEED_OF_LIGHT,
};
use airlink::sigcore::ComplexSignal;
use airlink::Complex64;

#[test]
fn scene_delays_follow_path_lengths() {
    let scene = ScattererScene::new(Point2::new(0.0, 0.0), Point2::new(300.0, 0.0), 1e9)
        .with_scatterer(Point2::new(150.0, 200.0), Complex64::new(0.5, 0.0));
    let taps = scene_to_taps(&scene).unwrap();
    assert_eq!(taps.len(), 2);
    let los = taps.taps()[0];
    assert!((los.delay_s - 300.0 / SPEED_OF_LIGHT).abs() < 1e-18);
    let s = taps.taps()[1];
    assert!((s.delay_s - 500.0 / SPEED_OF_LIGHT).abs() < 1e-18);
    assert!((s.gain.norm() - 0.5 * 300.0 / 500.0).abs() < 1e-12);
    let phase = -2.0 * PI * s.delay_s * 1e9;
    assert!((s.gain / s.gain.norm() - Complex64::from_polar(1.0, phase)).norm() < 1e-9);
}

#[test]
fn blocked_los_and_coincident_ends() {
    let mut scene = ScattererScene::new(Point2::new(0.0, 0.0), Point2::new(100.0, 0.0), 1e9)
        .with_scatterer(Point2::new(50.0, 50.0), Complex64::new(0.3, 0.0));
    scene.los_blocked = true;
    assert_eq!(scene_to_taps(&scene).unwrap().len(), 1);
    let bad = ScattererScene::new(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0), 1e9);
    assert!(scene_to_taps(&bad).is_err());
}

#[test]
fn tapped_delay_line_is_a_convolution() {
    let fs = 10e6;
    let taps = TapSet::new(vec![
        Tap::new(0.0, Complex64::new(1.0, 0.0), 0.0),
        Tap::new(3.0 / fs, Complex64::new(0.0, -0.5), 0.0),
    ])
    .unwrap();
    let x: Vec<Complex64> = (0..20).map(|k| Complex64::new(k as f64, 1.0)).collect();
    let y = apply_channel(&ComplexSignal::new(x.clone(), fs).unwrap(), &taps);
    assert_eq!(y.len(), 23);
    for m in 0..23 {
        let mut want = Complex64::new(0.0, 0.0);
        if m < 20 {
            want += x[m];
        }
        if (3..23).contains(&m) {
            want += Complex64::new(0.0, -0.5) * x[m - 3];
        }
        assert!((y.samples()[m] - want).norm() < 1e-12);
    }
}

#[test]
fn single_tap_nulls_at_inverse_bandwidth() {
    let b = 5e6;
    let fs = 40e6;
    let ir = impulse_response(&TapSet::single(0.0), b, fs, 0.0).unwrap();
    assert!(ir.peak_time.abs() < 1.0 / fs);
    assert!((ir.nulls.0 + 1.0 / b).abs() < 1.0 / fs);
    assert!((ir.nulls.1 - 1.0 / b).abs() < 1.0 / fs);
    let flat = ir.fr.iter().map(|h| h.norm()).fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
    assert!(flat.1 - flat.0 < 1e-9);
}

#[test]
fn two_tap_frequency_response_matches_closed_form() {
    let d = 120e-9;
    let g = Complex64::new(0.3, 0.4);
    let taps = TapSet::new(vec![Tap::unit(0.0), Tap::new(d, g, 0.0)]).unwrap();
    let ir = impulse_response(&taps, 10e6, 80e6, d).unwrap();
    for (&f, &h) in ir.freqs.iter().zip(&ir.fr) {
        let want = Complex64::new(1.0, 0.0) + g * Complex64::from_polar(1.0, -2.0 * PI * f * d);
        assert!((h - want).norm() < 1e-9, "f {f}");
    }
}

#[test]
fn broadening_grows_then_reaches_target() {
    let (b, fs) = (5e6, 40e6);
    let seps: Vec<f64> = (1..=20).map(|i| i as f64 * 5e-9).collect();
    let sweep = broadening_sweep(&seps, b, fs).unwrap();
    assert!(sweep.windows(2).all(|w| w[1].1 > w[0].1));
    let s = separation_for_broadening(5.9, b, fs, 100e-9).unwrap();
    let at = broadening_sweep(&[s], b, fs).unwrap()[0].1;
    assert!((at - 5.9).abs() < 1e-4, "{at} at {s}");
    assert!((s - 91.2e-9).abs() < 1e-9);
}
