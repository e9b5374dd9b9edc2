//! The stream cipher: 95-bit keys and keystream XOR.
//!
//! Key text is 24 hex digits (96 bits, top bit zero), big-endian:
//!
//! ```text
//!  95    94 ........ 63   62 ....... 31   30 ...... 0
//! [ 0 ][ x0 (32 bits) ][ gamma (32 bits) ][ seed (31) ]
//! ```
//!
//! `x0` is the raw 32-bit fixed-point initial state. For the skew tent map
//! `gamma` is a raw 32-bit fixed-point value in (0, 1); for the modified
//! logistic map it is unsigned 4.28 fixed point and must lie in (4, 16)
//! without being a multiple of 4. The seed initializes the order-31 register
//! `x^31 + x^3 + 1`.
//!
//! There is no nonce: a key must never encrypt two messages, since XORing
//! the two ciphertexts cancels the keystream.

use rand::{Rng, TryRngCore};
use thiserror::Error;

use crate::fixed::FixedPoint;
use crate::keystream::Generator;
use crate::lfsr::Lfsr;
use crate::maps::{MapFamily, MapKind, MlmParams, StmParams, DEFAULT_INT_BITS};

/// Map precision fixed by the key format.
pub const KEY_PRECISION: u32 = 32;
/// Register order fixed by the key format.
pub const KEY_LFSR_ORDER: u32 = 31;
/// Hex digits in a key string.
pub const KEY_HEX_LEN: usize = 24;
/// Fractional bits of the logistic map's gamma field.
pub const MLM_GAMMA_FRAC_BITS: u32 = 28;

const SEED_MASK: u32 = (1 << KEY_LFSR_ORDER) - 1;

pub const KEY_REUSE_WARNING: &str = "warning: this cipher has no nonce; never encrypt more than one \
message with the same key. A one-bit change in the plaintext flips exactly one ciphertext bit, \
and two ciphertexts under one key XOR to the XOR of their plaintexts.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyError {
    #[error("key must be {KEY_HEX_LEN} hex characters, got {0}")]
    Length(usize),
    #[error("key has non-hex character {ch:?} at position {position}")]
    NonHex { position: usize, ch: char },
    #[error("key top bit must be zero (keys are 95 bits)")]
    TopBitSet,
    #[error("key field x0 must be nonzero")]
    ZeroX0,
    #[error("key field gamma must be nonzero for the skew tent map")]
    ZeroGamma,
    #[error("key field gamma {0} is outside (4, 16) for the modified logistic map")]
    GammaRange(f64),
    #[error("key field gamma {0} is a multiple of 4")]
    GammaMultipleOfFour(f64),
    #[error("key field lfsr seed must be nonzero")]
    ZeroSeed,
    #[error("key field lfsr seed {0:#x} exceeds 31 bits")]
    SeedRange(u32),
    #[error("entropy source unavailable: {0}")]
    Entropy(String),
}

/// A validated cipher key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key {
    family: MapFamily,
    x0_bits: u32,
    gamma_bits: u32,
    lfsr_seed: u32,
}

impl Key {
    pub fn new(family: MapFamily, x0_bits: u32, gamma_bits: u32, lfsr_seed: u32) -> Result<Self, KeyError> {
        if x0_bits == 0 {
            return Err(KeyError::ZeroX0);
        }
        validate_gamma(family, gamma_bits)?;
        if lfsr_seed == 0 {
            return Err(KeyError::ZeroSeed);
        }
        if lfsr_seed > SEED_MASK {
            return Err(KeyError::SeedRange(lfsr_seed));
        }
        Ok(Self { family, x0_bits, gamma_bits, lfsr_seed })
    }

    /// Parses 24 hex digits (either case).
    pub fn parse(text: &str, family: MapFamily) -> Result<Self, KeyError> {
        let text = text.trim();
        let len = text.chars().count();
        if len != KEY_HEX_LEN {
            return Err(KeyError::Length(len));
        }
        if let Some((position, ch)) = text.chars().enumerate().find(|(_, c)| !c.is_ascii_hexdigit()) {
            return Err(KeyError::NonHex { position, ch });
        }
        let value = u128::from_str_radix(text, 16).expect("validated hex digits");
        Self::from_u128(value, family)
    }

    pub fn from_u128(value: u128, family: MapFamily) -> Result<Self, KeyError> {
        if value >> 95 != 0 {
            return Err(KeyError::TopBitSet);
        }
        let x0_bits = (value >> 63) as u32;
        let gamma_bits = (value >> 31) as u32;
        let lfsr_seed = value as u32 & SEED_MASK;
        Self::new(family, x0_bits, gamma_bits, lfsr_seed)
    }

    pub fn to_u128(&self) -> u128 {
        ((self.x0_bits as u128) << 63) | ((self.gamma_bits as u128) << 31) | self.lfsr_seed as u128
    }

    /// 24 lowercase hex digits.
    pub fn encode(&self) -> String {
        format!("{:024x}", self.to_u128())
    }

    /// Draws a key from `rng`: 32 bits for x0, 32 for gamma, 31 for the seed,
    /// each redrawn until valid. Deterministic for a deterministic `rng`.
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, family: MapFamily) -> Self {
        let x0_bits = loop {
            let v = rng.next_u32();
            if v != 0 {
                break v;
            }
        };
        let gamma_bits = loop {
            let v = rng.next_u32();
            if validate_gamma(family, v).is_ok() {
                break v;
            }
        };
        let lfsr_seed = loop {
            let v = rng.next_u32() & SEED_MASK;
            if v != 0 {
                break v;
            }
        };
        Self { family, x0_bits, gamma_bits, lfsr_seed }
    }

    /// Key from the operating system's entropy source.
    pub fn generate_os(family: MapFamily) -> Result<Self, KeyError> {
        let mut os = rand::rngs::OsRng;
        // Probe once so an unavailable source is an error rather than a panic.
        os.try_next_u32().map_err(|e| KeyError::Entropy(e.to_string()))?;
        Ok(Self::generate(&mut os.unwrap_err(), family))
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    pub fn x0_bits(&self) -> u32 {
        self.x0_bits
    }

    pub fn gamma_bits(&self) -> u32 {
        self.gamma_bits
    }

    pub fn lfsr_seed(&self) -> u32 {
        self.lfsr_seed
    }

    /// The same key material read for the other map, if it is valid there.
    pub fn with_family(&self, family: MapFamily) -> Result<Self, KeyError> {
        Self::new(family, self.x0_bits, self.gamma_bits, self.lfsr_seed)
    }

    pub fn map(&self) -> MapKind {
        match self.family {
            MapFamily::Stm => {
                let gamma = FixedPoint::new_unchecked(self.gamma_bits as u64, KEY_PRECISION);
                MapKind::Stm(StmParams::new(gamma).expect("validated key"))
            }
            MapFamily::Mlm => {
                let raw = (self.gamma_bits as u128) << (KEY_PRECISION - MLM_GAMMA_FRAC_BITS);
                MapKind::Mlm(MlmParams::from_raw(raw, KEY_PRECISION, DEFAULT_INT_BITS).expect("validated key"))
            }
        }
    }

    pub fn x0(&self) -> FixedPoint {
        FixedPoint::new_unchecked(self.x0_bits as u64, KEY_PRECISION)
    }

    pub fn lfsr(&self) -> Lfsr {
        Lfsr::with_default_taps(KEY_LFSR_ORDER, self.lfsr_seed as u128).expect("validated key")
    }

    /// The keystream generator this key defines.
    pub fn generator(&self) -> Generator {
        Generator::perturbed(self.map(), self.x0(), self.lfsr()).expect("key precision matches")
    }

    /// The map alone, without the perturbing register.
    pub fn bare_generator(&self) -> Generator {
        Generator::bare(self.map(), self.x0()).expect("key precision matches")
    }
}

fn validate_gamma(family: MapFamily, gamma_bits: u32) -> Result<(), KeyError> {
    match family {
        MapFamily::Stm if gamma_bits == 0 => Err(KeyError::ZeroGamma),
        MapFamily::Stm => Ok(()),
        MapFamily::Mlm => {
            let four = 4u32 << MLM_GAMMA_FRAC_BITS;
            let value = gamma_bits as f64 / (1u64 << MLM_GAMMA_FRAC_BITS) as f64;
            if gamma_bits % four == 0 {
                Err(KeyError::GammaMultipleOfFour(value))
            } else if gamma_bits < four {
                Err(KeyError::GammaRange(value))
            } else {
                Ok(())
            }
        }
    }
}

/// `data XOR keystream(key)`; length preserving, no header.
pub fn encrypt(key: &Key, data: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    key.generator().apply_keystream(&mut out);
    out
}

/// Identical to [`encrypt`].
pub fn decrypt(key: &Key, data: &[u8]) -> Vec<u8> {
    encrypt(key, data)
}

/// Encrypts in place.
pub fn apply_keystream(key: &Key, data: &mut [u8]) {
    key.generator().apply_keystream(data);
}
