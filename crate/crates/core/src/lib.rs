//! Chaos-based lightweight stream ciphers.
//!
//! Two keystream generators, one driven by the skew tent map and one by the
//! modified logistic map, both evaluated in bit-exact fixed point. Each map
//! iteration has its state LSB XORed with one bit of a maximal-length LFSR
//! of Mersenne-prime period; that bit is the keystream output and is fed
//! back into the map. The prime register period forces the keystream period
//! to be a multiple of it, which the [`period`] module measures directly at
//! small precisions.
//!
//! Around the generators sit a 95-bit key codec and XOR cipher
//! ([`cipher`]), a statistical test battery ([`randstats`]), binary PGM
//! tooling for image experiments ([`imageio`]) and order-preserving
//! data-parallel helpers ([`exec`]).
//!
//! ```
//! use chaos_lfsr::cipher::{decrypt, encrypt, Key};
//! use chaos_lfsr::maps::MapFamily;
//!
//! let key = Key::parse("2d1e4b70cf1bbcdca545f491", MapFamily::Stm).unwrap();
//! let ct = encrypt(&key, b"hello");
//! assert_eq!(decrypt(&key, &ct), b"hello");
//! ```

pub mod cipher;
pub mod exec;
pub mod fixed;
pub mod imageio;
pub mod keystream;
pub mod lfsr;
pub mod maps;
pub mod period;
pub mod randstats;

pub use cipher::{decrypt, encrypt, Key, KeyError};
pub use exec::Execution;
pub use fixed::FixedPoint;
pub use keystream::Generator;
pub use lfsr::{Lfsr, LfsrConfig};
pub use maps::{MapFamily, MapKind, MlmParams, StmParams};
