use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn alphabet(self) -> SymbolAlphabet {
        SymbolAlphabet::new(self)
    }
}

/// Gray-coded constellation with unit average energy.
///
/// `points[label]` is the point carrying the bit label `label`, first bit
/// most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolAlphabet {
    name: String,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl SymbolAlphabet {
    pub fn new(modulation: Modulation) -> Self {
        let (name, points) = match modulation {
            Modulation::Bpsk => ("BPSK", vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]),
            Modulation::Qpsk => {
                let pts = (0..4u32)
                    .map(|label| {
                        let i = if label & 0b10 == 0 { 1.0 } else { -1.0 };
                        let q = if label & 0b01 == 0 { 1.0 } else { -1.0 };
                        Complex64::new(i, q) * FRAC_1_SQRT_2
                    })
                    .collect();
                ("QPSK", pts)
            }
            Modulation::Qam16 => {
                // Gray levels per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
                let level = |b: u32| match b {
                    0b00 => -3.0,
                    0b01 => -1.0,
                    0b11 => 1.0,
                    _ => 3.0,
                };
                let scale = 1.0 / 10f64.sqrt();
                let pts = (0..16u32)
                    .map(|label| Complex64::new(level(label >> 2), level(label & 0b11)) * scale)
                    .collect();
                ("QAM16", pts)
            }
        };
        let bits_per_symbol = points.len().trailing_zeros() as usize;
        Self {
            name: name.to_string(),
            points,
            bits_per_symbol,
        }
    }

    /// Arbitrary constellation, labelled by index. Must be a non-empty power
    /// of two in size with unit mean energy.
    pub fn custom(name: &str, points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() || !points.len().is_power_of_two() {
            return Err(Error::config(format!(
                "alphabet needs a non-empty power-of-two point count, got {}",
                points.len()
            )));
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!(
                "alphabet mean energy must be 1, got {energy}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            bits_per_symbol: points.len().trailing_zeros() as usize,
            points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn modulate(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if k == 0 || !bits.len().is_multiple_of(k) {
            return Err(Error::size(format!(
                "{} bits is not a multiple of {} bits per {} symbol",
                bits.len(),
                k,
                self.name
            )));
        }
        Ok(bits
            .chunks(k)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[label]
            })
            .collect())
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest_index(&self, symbol: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (idx, p) in self.points.iter().enumerate() {
            let d = (symbol - p).norm_sqr();
            if d < best_dist {
                best = idx;
                best_dist = d;
            }
        }
        best
    }

    pub fn slice(&self, symbol: Complex64) -> Complex64 {
        self.points[self.nearest_index(symbol)]
    }

    pub fn demodulate(&self, symbols: &[Complex64]) -> Result<Vec<bool>> {
        if self.points.is_empty() {
            return Err(Error::config("empty alphabet"));
        }
        let k = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(symbols.len() * k);
        for &s in symbols {
            let label = self.nearest_index(s);
            bits.extend((0..k).rev().map(|shift| (label >> shift) & 1 == 1));
        }
        Ok(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: [Modulation; 3] = [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16];

    #[test]
    fn qpsk_00_maps_to_first_quadrant() {
        let a = Modulation::Qpsk.alphabet();
        let s = a.modulate(&[false, false]).unwrap();
        assert!((s[0] - Complex64::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn bpsk_mapping() {
        let a = Modulation::Bpsk.alphabet();
        let s = a.modulate(&[false, true]).unwrap();
        assert_eq!(s, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn unit_energy() {
        for m in ALL {
            let a = m.alphabet();
            let e = a.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / a.points().len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        for m in ALL {
            let a = m.alphabet();
            let pts = a.points();
            let dmin = (0..pts.len())
                .flat_map(|i| (0..pts.len()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| (pts[i] - pts[j]).norm())
                .fold(f64::INFINITY, f64::min);
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    if i != j && ((pts[i] - pts[j]).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "{m:?} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_ragged_bit_count() {
        let a = Modulation::Qpsk.alphabet();
        assert!(matches!(a.modulate(&[true; 3]), Err(Error::Size(_))));
    }

    #[test]
    fn nearest_point_slicing() {
        let a = Modulation::Qpsk.alphabet();
        let bits = a
            .demodulate(&[Complex64::new(0.9, 0.8) / 2f64.sqrt()])
            .unwrap();
        assert_eq!(bits, vec![false, false]);
        let exact = a.demodulate(a.points()).unwrap();
        assert_eq!(
            exact,
            vec![false, false, false, true, true, false, true, true]
        );
    }

    #[test]
    fn origin_tie_goes_to_lowest_index() {
        for m in ALL {
            let a = m.alphabet();
            let idx = a.nearest_index(Complex64::new(0.0, 0.0));
            let best = a.points().iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
            let first = a.points().iter().position(|p| (p.norm() - best).abs() < 1e-12).unwrap();
            assert_eq!(idx, first, "{m:?}");
        }
        let qpsk = Modulation::Qpsk.alphabet();
        assert_eq!(qpsk.demodulate(&[Complex64::new(0.0, 0.0)]).unwrap(), vec![false, false]);
    }

    #[test]
    fn custom_alphabet_validation() {
        assert!(matches!(SymbolAlphabet::custom("empty", vec![]), Err(Error::Config(_))));
        assert!(SymbolAlphabet::custom("bad", vec![Complex64::new(2.0, 0.0); 2]).is_err());
        let ook = SymbolAlphabet::custom(
            "antipodal",
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
        )
        .unwrap();
        assert_eq!(ook.bits_per_symbol(), 1);
    }

    #[test]
    fn round_trip_ten_thousand_bits() {
        use rand::Rng;
        let mut rng = crate::sigcore::seeded_rng(3);
        let bits: Vec<bool> = (0..10_000).map(|_| rng.random()).collect();
        for m in ALL {
            let a = m.alphabet();
            let n = bits.len() - bits.len() % a.bits_per_symbol();
            let back = a.demodulate(&a.modulate(&bits[..n]).unwrap()).unwrap();
            assert_eq!(back, bits[..n]);
        }
    }

    proptest! {
        #[test]
        fn round_trip_identity(bits in proptest::collection::vec(any::<bool>(), 0..256), which in 0usize..3) {
            let a = ALL[which].alphabet();
            let n = bits.len() - bits.len() % a.bits_per_symbol();
            let back = a.demodulate(&a.modulate(&bits[..n]).unwrap()).unwrap();
            prop_assert_eq!(back, bits[..n].to_vec());
        }
    }
}
