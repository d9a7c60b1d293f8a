use crate::{Error, Result};

/// Primitive feedback polynomials, bit k = coefficient of x^k.
const PRIMITIVE: [(u32, u32); 14] = [
    (2, 0x7),
    (3, 0xB),
    (4, 0x13),
    (5, 0x25),
    (6, 0x43),
    (7, 0x89),
    (8, 0x11D),
    (9, 0x211),
    (10, 0x409),
    (11, 0x805),
    (12, 0x1053),
    (13, 0x201B),
    (14, 0x4443),
    (15, 0x8003),
];

/// A known primitive polynomial for `degree` in 2..=15.
pub fn primitive_polynomial(degree: u32) -> Option<u32> {
    PRIMITIVE
        .iter()
        .find(|(d, _)| *d == degree)
        .map(|&(_, p)| p)
}

/// One period of a bipolar LFSR sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnSequence {
    chips: Vec<i8>,
    degree: u32,
    polynomial: u32,
}

/// Runs a Fibonacci LFSR until its state returns to `seed` and maps the
/// output bits to chips (0 -> +1, 1 -> -1).
///
/// The register holds `a[k] .. a[k+degree-1]` with `a[k]` in bit 0; the
/// output is bit 0 and the feedback is the parity of the register masked by
/// the low `degree` bits of `polynomial`, i.e. the recurrence
/// `a[k+n] = sum(c_i * a[k+i])` for `p(x) = x^n + ... + c_1 x + c_0`.
pub fn pn_generate(degree: u32, polynomial: u32, seed: u32) -> Result<PnSequence> {
    if !(2..=24).contains(&degree) {
        return Err(Error::config(format!("LFSR degree {degree} outside 2..=24")));
    }
    if polynomial >> degree != 1 {
        return Err(Error::config(format!(
            "polynomial {polynomial:#x} does not have degree {degree}"
        )));
    }
    if polynomial & 1 == 0 {
        return Err(Error::config(format!(
            "polynomial {polynomial:#x} lacks a constant term"
        )));
    }
    let mask = (1u32 << degree) - 1;
    if seed & mask == 0 {
        return Err(Error::DegenerateState);
    }
    if seed & !mask != 0 {
        return Err(Error::config(format!(
            "seed {seed:#x} wider than {degree} bits"
        )));
    }

    let taps = polynomial & mask;
    let mut state = seed;
    let mut chips = Vec::new();
    loop {
        chips.push(if state & 1 == 1 { -1 } else { 1 });
        let feedback = (state & taps).count_ones() & 1;
        state = (state >> 1) | (feedback << (degree - 1));
        if state == seed {
            break;
        }
    }
    Ok(PnSequence {
        chips,
        degree,
        polynomial,
    })
}

impl PnSequence {
    /// Maximal-length sequence from the built-in primitive polynomial table.
    pub fn m_sequence(degree: u32, seed: u32) -> Result<Self> {
        let poly = primitive_polynomial(degree).ok_or_else(|| {
            Error::config(format!("no built-in primitive polynomial for degree {degree}"))
        })?;
        pn_generate(degree, poly, seed)
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn period(&self) -> usize {
        self.chips.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn polynomial(&self) -> u32 {
        self.polynomial
    }

    /// Chip at `index`, wrapping around the period.
    pub fn chip(&self, index: usize) -> f64 {
        self.chips[index % self.chips.len()] as f64
    }

    pub fn circular_autocorrelation(&self, lag: usize) -> i64 {
        let n = self.chips.len();
        (0..n)
            .map(|i| (self.chips[i] * self.chips[(i + lag) % n]) as i64)
            .sum()
    }
}
