use airlink::sigcore::{
    add_awgn, bit_error_rate, evm_db, mean_power, pn_generate, primitive_polynomial, random_bits, seeded_rng,
    sub_seed, ComplexSignal, Modulation, PnSequence, SymbolAlphabet,
};
use airlink::Complex64;

fn golden_chips(file: &str) -> Vec<i8> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file);
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace().map(|t| t.parse::<i8>().unwrap()).collect::<Vec<_>>())
        .collect()
}

/// Bit recurrence `a[k+n] = Σ c_i a[k+i]` with `a[0..n]` from the seed bits.
fn recurrence_chips(degree: u32, poly: u32, seed: u32) -> Vec<i8> {
    let n = degree as usize;
    let period = (1usize << n) - 1;
    let mut a: Vec<u32> = (0..n).map(|i| (seed >> i) & 1).collect();
    while a.len() < period {
        let k = a.len() - n;
        let bit = (0..n).filter(|&i| (poly >> i) & 1 == 1).fold(0, |acc, i| acc ^ a[k + i]);
        a.push(bit);
    }
    a.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect()
}

#[test]
fn degree_three_matches_golden_file() {
    let pn = PnSequence::m_sequence(3, 1).unwrap();
    assert_eq!(pn.chips(), golden_chips("pn_deg3_seed1.txt").as_slice());
}

#[test]
fn lfsr_matches_bit_recurrence() {
    for degree in 2..=12 {
        let poly = primitive_polynomial(degree).unwrap();
        for seed in [1u32, 2, (1 << degree) - 1] {
            let pn = pn_generate(degree, poly, seed).unwrap();
            assert_eq!(pn.chips(), recurrence_chips(degree, poly, seed).as_slice(), "degree {degree} seed {seed}");
        }
    }
}

#[test]
fn m_sequences_have_two_valued_autocorrelation() {
    for degree in 3..=10 {
        let pn = PnSequence::m_sequence(degree, 1).unwrap();
        let n = pn.period() as i64;
        assert_eq!(pn.circular_autocorrelation(0), n);
        for lag in 1..pn.period() {
            assert_eq!(pn.circular_autocorrelation(lag), -1, "degree {degree} lag {lag}");
        }
        let sum: i64 = pn.chips().iter().map(|&c| c as i64).sum();
        assert_eq!(sum.abs(), 1);
    }
}

#[test]
fn gray_mapping_neighbours_differ_in_one_bit() {
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let a = SymbolAlphabet::new(m);
        let pts = a.points();
        let bps = a.bits_per_symbol();
        let min_d = pts
            .iter()
            .enumerate()
            .flat_map(|(i, p)| pts[i + 1..].iter().map(move |q| (p - q).norm()))
            .fold(f64::INFINITY, f64::min);
        for (i, p) in pts.iter().enumerate() {
            for (j, q) in pts.iter().enumerate() {
                if i != j && ((p - q).norm() - min_d).abs() < 1e-9 {
                    assert_eq!(((i ^ j) as u32).count_ones(), 1, "{} {i} {j}", a.name());
                }
            }
        }
        assert!((mean_power(pts) - 1.0).abs() < 1e-12);
        let mut rng = seeded_rng(3);
        let bits = random_bits(bps * 500, &mut rng);
        let back = a.demodulate(&a.modulate(&bits).unwrap()).unwrap();
        assert_eq!(bit_error_rate(&bits, &back).unwrap(), 0.0);
    }
}

#[test]
fn awgn_hits_requested_snr() {
    let mut rng = seeded_rng(11);
    let x = ComplexSignal::new(vec![Complex64::new(0.6, -0.8); 200_000], 1.0).unwrap();
    for snr in [0.0, 10.0, 20.0] {
        let y = add_awgn(&x, snr, &mut rng);
        let evm = evm_db(x.samples(), y.samples()).unwrap();
        assert!((evm + snr).abs() < 0.05, "snr {snr}: evm {evm}");
    }
}

#[test]
fn sub_seeds_are_distinct_and_stable() {
    let seeds: Vec<u64> = (0..1000).map(|i| sub_seed(42, i)).collect();
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), seeds.len());
    assert_eq!(sub_seed(42, 7), sub_seed(42, 7));
    let a = random_bits(64, &mut seeded_rng(sub_seed(42, 7)));
    let b = random_bits(64, &mut seeded_rng(sub_seed(42, 7)));
    assert_eq!(a, b);
}
