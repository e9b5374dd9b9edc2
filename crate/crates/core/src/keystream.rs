//! The perturbed chaotic bit generator.
//!
//! Each step takes the LSB of the map state, XORs it with one register bit,
//! emits the result, writes it back into the state's LSB and iterates the map
//! on the perturbed state. Without a register the generator degrades to the
//! bare map and emits `LSB(x_i)`.

use crate::fixed::FixedPoint;
use crate::lfsr::Lfsr;
use crate::maps::{MapError, MapKind};

/// Composite generator state: map, current map value, optional perturbing
/// register and the number of bits emitted so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator {
    map: MapKind,
    x: u64,
    lfsr: Option<Lfsr>,
    steps: u64,
}

impl Generator {
    pub fn new(map: MapKind, x0: FixedPoint, lfsr: Option<Lfsr>) -> Result<Self, MapError> {
        map.check_state(x0)?;
        Ok(Self { map, x: x0.raw(), lfsr, steps: 0 })
    }

    pub fn perturbed(map: MapKind, x0: FixedPoint, lfsr: Lfsr) -> Result<Self, MapError> {
        Self::new(map, x0, Some(lfsr))
    }

    pub fn bare(map: MapKind, x0: FixedPoint) -> Result<Self, MapError> {
        Self::new(map, x0, None)
    }

    pub fn map(&self) -> &MapKind {
        &self.map
    }

    /// Current (unperturbed) map value `x_i`.
    pub fn state(&self) -> FixedPoint {
        FixedPoint::new_unchecked(self.x, self.map.bits())
    }

    pub fn lfsr(&self) -> Option<&Lfsr> {
        self.lfsr.as_ref()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Equality of everything that determines future output.
    pub fn same_state(&self, other: &Self) -> bool {
        self.x == other.x && self.lfsr.map(|l| l.register()) == other.lfsr.map(|l| l.register())
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        let z = match self.lfsr.as_mut() {
            Some(lfsr) => lfsr.step() as u64,
            None => 0,
        };
        let perturbed = self.x ^ z;
        self.x = self.map.step_raw(perturbed);
        self.steps += 1;
        (perturbed & 1) as u8
    }

    /// Value-style step returning the bit and the advanced generator.
    pub fn stepped(mut self) -> (u8, Self) {
        let bit = self.next_bit();
        (bit, self)
    }

    /// The next `count` keystream bits, one per byte (0 or 1).
    pub fn bits(&mut self, count: usize) -> Vec<u8> {
        (0..count).map(|_| self.next_bit()).collect()
    }

    /// Eight bits packed first-emitted-bit-first into the MSB.
    #[inline]
    pub fn next_byte(&mut self) -> u8 {
        let mut byte = 0u8;
        for _ in 0..8 {
            byte = (byte << 1) | self.next_bit();
        }
        byte
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for b in out.iter_mut() {
            *b = self.next_byte();
        }
    }

    pub fn bytes(&mut self, count: usize) -> Vec<u8> {
        let mut out = vec![0u8; count];
        self.fill_bytes(&mut out);
        out
    }

    /// XORs the keystream into `data` in place.
    pub fn apply_keystream(&mut self, data: &mut [u8]) {
        for b in data.iter_mut() {
            *b ^= self.next_byte();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{MlmParams, StmParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stm8() -> MapKind {
        MapKind::Stm(StmParams::new(FixedPoint::from_raw(128, 8).unwrap()).unwrap())
    }

    #[test]
    fn one_step_unrolled() {
        let map = stm8();
        // x = 0b00001010, register chosen so its first output is 1
        let x = FixedPoint::from_raw(0b0000_1010, 8).unwrap();
        let lfsr = Lfsr::with_default_taps(3, 0b001).unwrap();
        let mut g = Generator::perturbed(map, x, lfsr).unwrap();
        assert_eq!(g.next_bit(), 1);
        assert_eq!(g.state(), map.step(FixedPoint::from_raw(0b0000_1011, 8).unwrap()).unwrap());
        assert_eq!(g.steps(), 1);
    }

    #[test]
    fn zero_register_bit_leaves_state_alone() {
        let map = stm8();
        let x = FixedPoint::from_raw(0b0110_0101, 8).unwrap();
        // seed 0b010: first output bit is 0
        let lfsr = Lfsr::with_default_taps(3, 0b010).unwrap();
        let mut g = Generator::perturbed(map, x, lfsr).unwrap();
        assert_eq!(g.next_bit(), 1);
        assert_eq!(g.state(), map.step(x).unwrap());
    }

    #[test]
    fn frozen_first_eight_bits() {
        // Frozen from tests/oracle/keystream_oracle.py (stm_n8_k3_first8).
        let x = FixedPoint::from_raw(64, 8).unwrap();
        let lfsr = Lfsr::with_default_taps(3, 1).unwrap();
        let mut g = Generator::perturbed(stm8(), x, lfsr).unwrap();
        assert_eq!(g.bits(8), vec![1, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn bare_generator_emits_lsb_of_orbit() {
        let map = MapKind::Stm(StmParams::from_real(0.37, 16).unwrap());
        let mut x = FixedPoint::from_real(0.61, 16).unwrap();
        let mut g = Generator::bare(map, x).unwrap();
        for _ in 0..200 {
            assert_eq!(g.next_bit(), x.lsb());
            x = map.step(x).unwrap();
        }
    }

    #[test]
    fn zero_state_is_rescued_within_one_register_period() {
        let map = MapKind::Stm(StmParams::from_real(0.41, 16).unwrap());
        let zero = FixedPoint::from_raw(0, 16).unwrap();
        assert_eq!(Generator::bare(map, zero).unwrap().bits(64), vec![0; 64]);
        for seed in 1..32 {
            let lfsr = Lfsr::with_default_taps(5, seed).unwrap();
            let mut g = Generator::perturbed(map, zero, lfsr).unwrap();
            let left = (0..31).any(|_| {
                g.next_bit();
                g.state().raw() != 0
            });
            assert!(left, "seed {seed}");
        }
    }

    #[test]
    fn byte_packing_is_msb_first() {
        let x = FixedPoint::from_raw(77, 8).unwrap();
        let lfsr = Lfsr::with_default_taps(5, 9).unwrap();
        let g = Generator::perturbed(stm8(), x, lfsr).unwrap();
        let bits = g.clone().bits(16);
        let bytes = g.clone().bytes(2);
        for (i, byte) in bytes.iter().enumerate() {
            let packed = bits[i * 8..i * 8 + 8].iter().fold(0u8, |acc, &b| (acc << 1) | b);
            assert_eq!(*byte, packed);
        }
        assert_eq!(g.clone().bytes(0), Vec::<u8>::new());
    }

    /// Bin frequencies of perturbed MLM output relative to uniform.
    fn mlm_bins(gamma: f64, rng: &mut ChaCha8Rng) -> [f64; 16] {
        let map = MapKind::Mlm(MlmParams::new(gamma, 32, 4).unwrap());
        let x0 = FixedPoint::from_raw(rng.random_range(1..u32::MAX as u64), 32).unwrap();
        let lfsr = Lfsr::with_default_taps(31, rng.random_range(1..1u128 << 31)).unwrap();
        let mut g = Generator::perturbed(map, x0, lfsr).unwrap();
        let mut bins = [0u32; 16];
        let iterates = 100_000;
        for _ in 0..iterates {
            g.next_bit();
            bins[(g.state().raw() >> 28) as usize] += 1;
        }
        bins.map(|c| c as f64 * 16.0 / iterates as f64)
    }

    // The invariant density is not uniform: the inner branches reach 1 at the
    // parabola's vertex where the slope vanishes, so mass piles up near 1 (and
    // near 0, its next image). A float simulation of the same recurrence gives
    // the same profile.
    #[test]
    fn mlm_output_density_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..4 {
            let gamma = rng.random_range(4.05..7.95);
            let bins = mlm_bins(gamma, &mut rng);
            for (i, &b) in bins.iter().enumerate() {
                assert!((0.6..=2.7).contains(&b), "gamma {gamma}: bin {i} at {b:.3}");
            }
            assert!(bins[15] > 1.8 && bins[0] > 1.3, "gamma {gamma}: {bins:?}");
            let middle = bins[4..10].iter().sum::<f64>() / 6.0;
            assert!((0.65..0.9).contains(&middle), "gamma {gamma}: {bins:?}");
        }
    }

    proptest! {
        #[test]
        fn emitted_bit_is_perturbed_lsb(x0 in 1u64..(1 << 32), seed in 1u128..(1 << 31), g in 0.01f64..0.99) {
            let map = MapKind::Stm(StmParams::from_real(g, 32).unwrap());
            let x0 = FixedPoint::from_raw(x0, 32).unwrap();
            let mut lfsr = Lfsr::with_default_taps(31, seed).unwrap();
            let mut gen = Generator::perturbed(map, x0, lfsr).unwrap();
            let mut x = x0.raw();
            for _ in 0..256 {
                let z = lfsr.step() as u64;
                let before = (x & 1) ^ z;
                let perturbed = x ^ z;
                prop_assert_eq!(gen.next_bit() as u64, before);
                prop_assert_eq!(perturbed & 1, before);
                x = map.step(FixedPoint::from_raw(perturbed, 32).unwrap()).unwrap().raw();
                prop_assert_eq!(gen.state().raw(), x);
            }
        }

        #[test]
        fn streaming_is_consistent(split in 0usize..64, seed in 1u128..(1 << 31)) {
            let map = MapKind::Mlm(MlmParams::new(6.3, 32, 4).unwrap());
            let x0 = FixedPoint::from_real(0.123, 32).unwrap();
            let lfsr = Lfsr::with_default_taps(31, seed).unwrap();
            let g = Generator::perturbed(map, x0, lfsr).unwrap();
            let whole = g.clone().bits(64);
            let mut parts = g;
            let mut joined = parts.bits(split);
            joined.extend(parts.bits(64 - split));
            prop_assert_eq!(whole, joined);
            prop_assert_eq!(parts.steps(), 64);
        }
    }
}
