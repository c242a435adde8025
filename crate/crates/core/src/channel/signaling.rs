use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A setting-driven bit pattern whose single-bit marginal never changes.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalingDemo {
    pub control: bool,
    pub bits: Vec<u8>,
    /// Fraction of `1`s in `bits`.
    pub marginal_one: f64,
    pub decoded: bool,
}

impl SignalingDemo {
    pub fn pattern(&self) -> alloc::string::String {
        self.bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

/// Emits `0101…` when `control` is false and `0011 0011…` when true, then
/// decodes `control` back from the sequence.
///
/// `length` must be a positive multiple of four so both patterns contain
/// exactly as many ones as zeros.
pub fn signaling_pattern_demo(control: bool, length: usize) -> Result<SignalingDemo> {
    if length < 4 || !length.is_multiple_of(4) {
        return Err(Error::Invalid(alloc::format!(
            "signaling sequence length must be a positive multiple of 4, got {length}"
        )));
    }
    let bits: Vec<u8> = (0..length)
        .map(|i| if control { ((i / 2) % 2) as u8 } else { (i % 2) as u8 })
        .collect();
    let ones = bits.iter().filter(|b| **b == 1).count();
    let decoded = decode_signal(&bits);
    Ok(SignalingDemo {
        control,
        marginal_one: ones as f64 / length as f64,
        decoded,
        bits,
    })
}

/// Recovers the control bit: the period-2 pattern has a `1` at position 1,
/// the period-4 pattern a `0`.
pub fn decode_signal(bits: &[u8]) -> bool {
    bits.get(1).copied() == Some(0)
}
