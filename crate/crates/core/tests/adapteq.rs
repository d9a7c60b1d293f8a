use airlink::adapteq::{apply_filter, equalize_dd, train, EqualizerConfig};
use airlink::channel::{apply_channel, Tap, TapSet};
use airlink::sigcore::{
    add_awgn, random_bits, seeded_rng, ComplexSignal, Modulation, SymbolAlphabet,
};
use airlink::Complex64;

fn link(n: usize, snr_db: f64, seed: u64) -> (Vec<Complex64>, ComplexSignal) {
    let a = SymbolAlphabet::new(Modulation::Qpsk);
    let mut rng = seeded_rng(seed);
    let s = a.modulate(&random_bits(2 * n, &mut rng)).unwrap();
    let taps = TapSet::new(vec![
        Tap::new(0.0, Complex64::new(0.8, 0.45), 0.0),
        Tap::new(1.0, Complex64::new(-0.25, 0.2), 0.0),
        Tap::new(2.0, Complex64::new(0.1, -0.05), 0.0),
    ])
    .unwrap();
    let rx = apply_channel(&ComplexSignal::new(s.clone(), 1.0).unwrap(), &taps);
    (s, add_awgn(&rx, snr_db, &mut rng))
}

#[test]
fn trained_equalizer_then_decision_directed_is_error_free() {
    let (s, rx) = link(6000, 25.0, 1);
    let cfg = EqualizerConfig::default();
    let state = train(&rx, &s[..1000], &cfg).unwrap();
    assert!(!state.diverged());
    let (out, state) = equalize_dd(&rx, state, &SymbolAlphabet::new(Modulation::Qpsk)).unwrap();
    assert!(!state.diverged());
    let d = cfg.reference_delay;
    let errors = out
        .decisions
        .iter()
        .enumerate()
        .filter(|(i, y)| {
            let k = out.first_index + i - d;
            k < s.len() && (**y - s[k]).norm() > 1e-9
        })
        .count();
    assert_eq!(errors, 0);
}

#[test]
fn trained_filter_undoes_the_channel() {
    let (s, rx) = link(3000, 40.0, 2);
    let cfg = EqualizerConfig::default();
    let state = train(&rx, &s, &cfg).unwrap();
    let y = apply_filter(&rx, state.taps());
    let d = cfg.reference_delay;
    let mse = (1000..2900).map(|n| (y[n] - s[n - d]).norm_sqr()).sum::<f64>() / 1900.0;
    assert!(mse < 1e-2, "mse {mse}");
    let tail = state.smoothed_mse();
    assert!(tail.last().unwrap() < &(tail[0] / 10.0));
}
