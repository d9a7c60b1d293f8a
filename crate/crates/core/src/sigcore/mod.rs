//! Shared signal types, symbol mapping, pseudo-noise generation, noise
//! injection and quality metrics.

mod alphabet;
mod metrics;
mod noise;
mod pn;
mod signal;

pub use alphabet::{Modulation, SymbolAlphabet};
pub use metrics::{
    bit_error_rate, bit_errors, evm_db, mean_power, power_spectrum, spectrum_frequencies,
    EVM_FLOOR_DB,
};
pub use noise::{add_awgn, add_noise_power, random_bits, seeded_rng, sub_seed, SimRng};
pub use pn::{pn_generate, primitive_polynomial, PnSequence};
pub use signal::ComplexSignal;

/// 10·log10 of a power ratio.
pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db10(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
