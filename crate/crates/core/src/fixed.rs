//! Unsigned fixed-point numbers on `[0, 1)`.
//!
//! A value carries its precision `n` and a raw integer `raw < 2^n`; the real
//! number it stands for is `raw / 2^n`. All map arithmetic is done on the raw
//! integers so results are bit-exact on every platform.

use std::fmt;

use thiserror::Error;

/// Smallest supported precision in bits.
pub const MIN_BITS: u32 = 8;
/// Largest supported precision in bits.
pub const MAX_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedError {
    #[error("precision {0} is outside {MIN_BITS}..={MAX_BITS} bits")]
    Precision(u32),
    #[error("value {0} is outside [0, 1)")]
    OutOfRange(f64),
    #[error("raw value {raw:#x} does not fit in {bits} bits")]
    RawTooLarge { raw: u64, bits: u32 },
}

/// An `n`-bit fixed-point number in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedPoint {
    raw: u64,
    bits: u32,
}

/// Largest raw value representable at `bits` of precision, `2^bits - 1`.
#[inline]
pub fn max_raw(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

pub(crate) fn check_bits(bits: u32) -> Result<(), FixedError> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(FixedError::Precision(bits))
    }
}

impl FixedPoint {
    pub fn from_raw(raw: u64, bits: u32) -> Result<Self, FixedError> {
        check_bits(bits)?;
        if raw > max_raw(bits) {
            return Err(FixedError::RawTooLarge { raw, bits });
        }
        Ok(Self { raw, bits })
    }

    /// Rounds `value * 2^bits` to nearest, clamping to `2^bits - 1`.
    pub fn from_real(value: f64, bits: u32) -> Result<Self, FixedError> {
        check_bits(bits)?;
        if !(0.0..1.0).contains(&value) {
            return Err(FixedError::OutOfRange(value));
        }
        // Scaling by a power of two is exact; only the rounding loses bits.
        let scaled = (value * 2f64.powi(bits as i32)).round();
        let raw = if scaled >= 2f64.powi(bits as i32) {
            max_raw(bits)
        } else {
            scaled as u64
        };
        Ok(Self { raw, bits })
    }

    pub(crate) const fn new_unchecked(raw: u64, bits: u32) -> Self {
        Self { raw, bits }
    }

    #[inline]
    pub fn raw(self) -> u64 {
        self.raw
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn to_real(self) -> f64 {
        self.raw as f64 / 2f64.powi(self.bits as i32)
    }

    /// Least significant bit of the raw representation.
    #[inline]
    pub fn lsb(self) -> u8 {
        (self.raw & 1) as u8
    }
}

impl fmt::Debug for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedPoint({:#x}/2^{} ≈ {})", self.raw, self.bits, self.to_real())
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_real(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn from_real_examples() {
        assert_eq!(FixedPoint::from_real(0.5, 8).unwrap().raw(), 128);
        assert_eq!(FixedPoint::from_real(0.0, 32).unwrap().raw(), 0);
        // 0.3 * 256 = 76.8
        assert_eq!(FixedPoint::from_real(0.3, 8).unwrap().raw(), 77);
    }

    #[test]
    fn from_real_clamps_just_below_one() {
        let x = FixedPoint::from_real(0.9999, 8).unwrap();
        assert_eq!(x.raw(), 255);
        // 1 - 2^-52 is exact at 64 bits, so no clamping happens
        let x = FixedPoint::from_real(1.0 - f64::EPSILON, 64).unwrap();
        assert_eq!(x.raw(), u64::MAX - 4095);
        let x = FixedPoint::from_real(1.0 - f64::EPSILON / 2.0, 16).unwrap();
        assert_eq!(x.raw(), u16::MAX as u64);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(FixedPoint::from_real(1.0, 8), Err(FixedError::OutOfRange(1.0)));
        assert!(FixedPoint::from_real(-0.1, 8).is_err());
        assert!(FixedPoint::from_real(f64::NAN, 8).is_err());
        assert_eq!(FixedPoint::from_real(0.5, 7), Err(FixedError::Precision(7)));
        assert_eq!(FixedPoint::from_real(0.5, 65), Err(FixedError::Precision(65)));
        assert!(FixedPoint::from_raw(256, 8).is_err());
        assert!(FixedPoint::from_raw(u64::MAX, 64).is_ok());
    }

    proptest! {
        #[test]
        fn real_round_trip_is_lossless(bits in 8u32..=51, seed: u64) {
            let raw = seed & max_raw(bits);
            let x = FixedPoint::from_raw(raw, bits).unwrap();
            prop_assert_eq!(FixedPoint::from_real(x.to_real(), bits).unwrap(), x);
        }
    }
}
