//! Fibonacci linear feedback shift registers of Mersenne-exponent order.
//!
//! With an irreducible feedback polynomial of degree `k` where `2^k - 1` is
//! prime, the register is maximal-length and its output has prime period
//! `2^k - 1`.
//!
//! Tap masks: bit `i` of `taps` is the coefficient of `x^(i+1)`. The leading
//! `x^k` and constant `1` terms are implicit, so `x^3 + x + 1` is `0b1` and
//! `x^31 + x^3 + 1` is `0b100`.

use thiserror::Error;

/// Orders `k` for which `2^k - 1` is prime and a register is supported.
pub const MERSENNE_ORDERS: [u32; 9] = [3, 5, 7, 13, 17, 19, 31, 61, 89];

/// Largest order whose period is checked by walking the full cycle.
pub const MAX_WALK_ORDER: u32 = 19;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfsrError {
    #[error("order {0} is not a supported Mersenne exponent {MERSENNE_ORDERS:?}")]
    Order(u32),
    #[error("tap mask {taps:#x} does not fit an order-{order} register")]
    TapRange { order: u32, taps: u128 },
    #[error("feedback polynomial with taps {taps:#x} is reducible for order {order}")]
    Reducible { order: u32, taps: u128 },
    #[error("register seed must be nonzero")]
    ZeroSeed,
    #[error("seed {seed:#x} does not fit in {order} bits")]
    SeedRange { order: u32, seed: u128 },
    #[error("exhaustive period walk is limited to order <= {MAX_WALK_ORDER}, got {0}")]
    TooLargeToWalk(u32),
}

/// One primitive polynomial per supported order.
pub fn default_taps(order: u32) -> Option<u128> {
    let taps = match order {
        3 => 1 << 0,                           // x^3 + x + 1
        5 => 1 << 1,                           // x^5 + x^2 + 1
        7 => 1 << 0,                           // x^7 + x + 1
        13 => (1 << 3) | (1 << 2) | (1 << 0),  // x^13 + x^4 + x^3 + x + 1
        17 => 1 << 2,                          // x^17 + x^3 + 1
        19 => (1 << 4) | (1 << 1) | (1 << 0),  // x^19 + x^5 + x^2 + x + 1
        31 => 1 << 2,                          // x^31 + x^3 + 1
        61 => (1 << 4) | (1 << 1) | (1 << 0),  // x^61 + x^5 + x^2 + x + 1
        89 => 1 << 37,                         // x^89 + x^38 + 1
        _ => return None,
    };
    Some(taps)
}

/// Register order plus validated feedback taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LfsrConfig {
    order: u32,
    taps: u128,
}

impl LfsrConfig {
    pub fn new(order: u32, taps: u128) -> Result<Self, LfsrError> {
        if !MERSENNE_ORDERS.contains(&order) {
            return Err(LfsrError::Order(order));
        }
        if taps >> (order - 1) != 0 {
            return Err(LfsrError::TapRange { order, taps });
        }
        if !is_irreducible(taps, order) {
            return Err(LfsrError::Reducible { order, taps });
        }
        Ok(Self { order, taps })
    }

    /// The built-in primitive polynomial for `order`.
    pub fn with_default_taps(order: u32) -> Result<Self, LfsrError> {
        let taps = default_taps(order).ok_or(LfsrError::Order(order))?;
        Self::new(order, taps)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn taps(&self) -> u128 {
        self.taps
    }

    /// `2^k - 1`, the prime period of a maximal register.
    pub fn period(&self) -> u128 {
        (1u128 << self.order) - 1
    }

    fn register_mask(&self) -> u128 {
        self.period()
    }

    /// Register bits XORed into the feedback: bit 0 (the constant term)
    /// plus `taps` shifted onto their register positions.
    fn feedback_mask(&self) -> u128 {
        (self.taps << 1) | 1
    }
}

/// A running register. Copying it forks an identical stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lfsr {
    config: LfsrConfig,
    feedback: u128,
    register: u128,
}

impl Lfsr {
    pub fn new(config: LfsrConfig, seed: u128) -> Result<Self, LfsrError> {
        if seed == 0 {
            return Err(LfsrError::ZeroSeed);
        }
        if seed & !config.register_mask() != 0 {
            return Err(LfsrError::SeedRange { order: config.order, seed });
        }
        Ok(Self { config, feedback: config.feedback_mask(), register: seed })
    }

    /// Register of order `order` with the built-in taps.
    pub fn with_default_taps(order: u32, seed: u128) -> Result<Self, LfsrError> {
        Self::new(LfsrConfig::with_default_taps(order)?, seed)
    }

    pub fn config(&self) -> &LfsrConfig {
        &self.config
    }

    pub fn register(&self) -> u128 {
        self.register
    }

    /// Emits bit 0 of the register, then shifts right and feeds the parity
    /// of the tapped bits into bit `k - 1`.
    #[inline]
    pub fn step(&mut self) -> u8 {
        let out = (self.register & 1) as u8;
        let fb = (self.register & self.feedback).count_ones() as u128 & 1;
        self.register = (self.register >> 1) | (fb << (self.config.order - 1));
        out
    }

    /// Value-style step: returns the emitted bit and the advanced register.
    pub fn stepped(mut self) -> (u8, Self) {
        let bit = self.step();
        (bit, self)
    }
}

/// Minimal period of the register started from `1`, found by walking it.
pub fn lfsr_period(config: &LfsrConfig) -> Result<u64, LfsrError> {
    if config.order > MAX_WALK_ORDER {
        return Err(LfsrError::TooLargeToWalk(config.order));
    }
    let mut lfsr = Lfsr::new(*config, 1)?;
    let mut steps = 0u64;
    loop {
        lfsr.step();
        steps += 1;
        if lfsr.register == 1 {
            return Ok(steps);
        }
    }
}

/// Rabin's irreducibility test for `x^k + taps(x) + 1` over GF(2).
///
/// The polynomial is irreducible iff `x^(2^k) = x (mod P)` and, for every
/// prime `q` dividing `k`, `gcd(x^(2^(k/q)) - x, P) = 1`.
pub fn is_irreducible(taps: u128, order: u32) -> bool {
    if !(2..=126).contains(&order) || taps >> (order - 1) != 0 {
        return false;
    }
    let poly = (1u128 << order) | (taps << 1) | 1;
    let x = 0b10u128;
    // frobenius[i] = x^(2^i) mod P
    let mut frob = x;
    let mut powers = Vec::with_capacity(order as usize + 1);
    powers.push(frob);
    for _ in 0..order {
        frob = gf2_mulmod(frob, frob, poly, order);
        powers.push(frob);
    }
    if powers[order as usize] != x {
        return false;
    }
    prime_factors(order).into_iter().all(|q| {
        let h = powers[(order / q) as usize] ^ x;
        gf2_gcd(h, poly) == 1
    })
}

fn degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn gf2_mulmod(mut a: u128, mut b: u128, poly: u128, order: u32) -> u128 {
    let top = 1u128 << order;
    let mut acc = 0u128;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

fn gf2_rem(mut a: u128, b: u128) -> u128 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn gf2_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = gf2_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
