use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ComplexSignal;

/// Random stream used throughout the workbench.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-seed for the `index`-th independent work item of a run: the base seed
/// xor a splitmix64 hash of the index.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = index.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    seed ^ (z ^ (z >> 31))
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

/// Adds circular complex Gaussian noise at `snr_db` below the measured
/// signal power. `f64::INFINITY` returns the input unchanged.
pub fn add_awgn<R: Rng + ?Sized>(signal: &ComplexSignal, snr_db: f64, rng: &mut R) -> ComplexSignal {
    if snr_db == f64::INFINITY || signal.is_empty() {
        return signal.clone();
    }
    let noise_power = signal.power() * 10f64.powf(-snr_db / 10.0);
    add_noise_power(signal, noise_power, rng)
}

/// Adds complex Gaussian noise of total variance `noise_power`, split evenly
/// between the real and imaginary parts.
pub fn add_noise_power<R: Rng + ?Sized>(
    signal: &ComplexSignal,
    noise_power: f64,
    rng: &mut R,
) -> ComplexSignal {
    let sigma = (noise_power / 2.0).sqrt();
    let samples = signal
        .samples()
        .iter()
        .map(|&x| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x + Complex64::new(re, im) * sigma
        })
        .collect();
    signal.with_samples(samples)
}
