//! Period measurement for bare and perturbed generators.
//!
//! Cycles are found on the composite state `(x, register)` with Brent's
//! algorithm, which gives the exact cycle length and tail. The keystream bit
//! period is then the smallest divisor of the cycle length under which the
//! bits emitted around the cycle repeat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Execution;
use crate::fixed::{max_raw, FixedPoint};
use crate::keystream::Generator;
use crate::lfsr::{Lfsr, LfsrError};
use crate::maps::{MapError, MapFamily, MapKind, MlmParams, StmParams, DEFAULT_INT_BITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error("no cycle found within {0} steps")]
    CycleNotFound(u64),
    #[error("empty bit pattern")]
    EmptyPattern,
    #[error("experiments need 8 <= n <= 16 and order in {{3, 5, 7}}, got n={bits}, k={order}")]
    ExperimentScale { bits: u32, order: u32 },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Lfsr(#[from] LfsrError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodReport {
    /// Cycle length of the composite internal state.
    pub state_period: u64,
    /// Steps before the state first enters the cycle.
    pub tail_length: u64,
    /// Minimal period of the emitted bits once on the cycle.
    pub bit_period: u64,
    /// `2^k - 1` of the perturbing register, if any.
    pub lfsr_period: Option<u64>,
}

impl PeriodReport {
    /// `Some(bit_period % P_z == 0)` for perturbed runs, `None` for bare ones.
    pub fn multiple_of_lfsr_period(&self) -> Option<bool> {
        self.lfsr_period.map(|p| self.bit_period % p == 0)
    }
}

/// Step budget that certainly covers every state of an `n`-bit map with an
/// order-`k` register (Brent needs at most about three passes).
pub fn exhaustive_budget(bits: u32, order: Option<u32>) -> u64 {
    let lfsr_states = order.map_or(1, |k| (1u64 << k) - 1);
    4 * (1u64 << bits) * lfsr_states + 16
}

/// Measures the cycle reached from `x0`.
pub fn measure_period(
    map: MapKind,
    x0: FixedPoint,
    lfsr: Option<Lfsr>,
    max_steps: u64,
) -> Result<PeriodReport, PeriodError> {
    let start = Generator::new(map, x0, lfsr)?;
    let advance = |g: &mut Generator| {
        g.next_bit();
    };

    let mut steps = 0u64;
    let mut power = 1u64;
    let mut lambda = 1u64;
    let mut tortoise = start;
    let mut hare = start;
    advance(&mut hare);
    steps += 1;
    while !tortoise.same_state(&hare) {
        if power == lambda {
            tortoise = hare;
            power *= 2;
            lambda = 0;
        }
        advance(&mut hare);
        lambda += 1;
        steps += 1;
        if steps > max_steps {
            return Err(PeriodError::CycleNotFound(max_steps));
        }
    }

    let mut tortoise = start;
    let mut hare = start;
    for _ in 0..lambda {
        advance(&mut hare);
    }
    let mut mu = 0u64;
    while !tortoise.same_state(&hare) {
        advance(&mut tortoise);
        advance(&mut hare);
        mu += 1;
    }

    let mut on_cycle = tortoise;
    let bits: Vec<u8> = (0..lambda).map(|_| on_cycle.next_bit()).collect();
    Ok(PeriodReport {
        state_period: lambda,
        tail_length: mu,
        bit_period: minimal_cyclic_period(&bits) as u64,
        lfsr_period: lfsr.map(|l| l.config().period() as u64),
    })
}

/// Smallest divisor `p` of `bits.len()` with `bits[i] == bits[(i + p) % len]`.
pub fn minimal_cyclic_period(bits: &[u8]) -> usize {
    let len = bits.len();
    divisors(len)
        .into_iter()
        .find(|&p| (0..len).all(|i| bits[i] == bits[(i + p) % len]))
        .unwrap_or(len)
}

fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact minimal period of `w = y XOR z` where `y` and `z` are each given
/// as one full period, by brute force over `lcm(|y|, |z|)` positions.
///
/// When `z` has prime period and `y` is independent of it the result is a
/// multiple of `|z|`. Patterns built to cancel (for instance `y == z`, which
/// gives the constant zero sequence) fall outside that guarantee and return
/// whatever the XOR actually has.
pub fn xor_period_oracle(y: &[u8], z: &[u8]) -> Result<usize, PeriodError> {
    if y.is_empty() || z.is_empty() {
        return Err(PeriodError::EmptyPattern);
    }
    let lcm = y.len() / gcd(y.len(), z.len()) * z.len();
    let w: Vec<u8> = (0..lcm).map(|i| (y[i % y.len()] ^ z[i % z.len()]) & 1).collect();
    Ok(minimal_cyclic_period(&w))
}

/// Key material for one desk-scale trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialKey {
    pub x0: u64,
    pub gamma_raw: u128,
    pub lfsr_seed: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub index: usize,
    pub key: TrialKey,
    pub bare: PeriodReport,
    pub perturbed: Option<PeriodReport>,
}

impl TrialResult {
    /// True when the perturbed bit period is not a multiple of `P_z`.
    pub fn is_exception(&self) -> bool {
        self.perturbed
            .as_ref()
            .and_then(PeriodReport::multiple_of_lfsr_period)
            .is_some_and(|ok| !ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposition1Summary {
    pub family: MapFamily,
    pub bits: u32,
    pub order: Option<u32>,
    pub lfsr_period: Option<u64>,
    pub trials: Vec<TrialResult>,
}

impl Proposition1Summary {
    /// Trials whose perturbed bit period is a multiple of `P_z`.
    pub fn divisible_count(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| t.perturbed.as_ref().and_then(|p| p.multiple_of_lfsr_period()) == Some(true))
            .count()
    }

    pub fn exceptions(&self) -> Vec<&TrialResult> {
        self.trials.iter().filter(|t| t.is_exception()).collect()
    }

    pub fn bare_state_periods(&self) -> Vec<u64> {
        self.trials.iter().map(|t| t.bare.state_period).collect()
    }

    pub fn perturbed_bit_periods(&self) -> Vec<u64> {
        self.trials.iter().filter_map(|t| t.perturbed.as_ref().map(|p| p.bit_period)).collect()
    }

    pub fn median_bare_period(&self) -> Option<f64> {
        median(self.bare_state_periods())
    }

    pub fn median_perturbed_period(&self) -> Option<f64> {
        median(self.perturbed_bit_periods())
    }
}

pub fn median(mut values: Vec<u64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] as f64 + values[mid] as f64) / 2.0
    })
}

/// Counts per `floor(log2(period))` bucket, ascending.
pub fn log2_histogram(periods: &[u64]) -> Vec<(u32, usize)> {
    let mut buckets = std::collections::BTreeMap::new();
    for &p in periods {
        *buckets.entry(63 - p.max(1).leading_zeros()).or_insert(0) += 1;
    }
    buckets.into_iter().collect()
}

/// Draws a uniformly random valid key at `bits` of precision.
pub fn random_trial_key<R: Rng>(rng: &mut R, family: MapFamily, bits: u32, order: u32) -> TrialKey {
    let x0 = rng.random_range(1..=max_raw(bits));
    let gamma_raw = match family {
        MapFamily::Stm => rng.random_range(1..=max_raw(bits)) as u128,
        MapFamily::Mlm => loop {
            let low = (4u128 << bits) + 1;
            let high = 1u128 << (bits + DEFAULT_INT_BITS);
            let g = rng.random_range(low..high);
            if g % (4u128 << bits) >= 4 {
                break g;
            }
        },
    };
    let lfsr_seed = rng.random_range(1..(1u128 << order));
    TrialKey { x0, gamma_raw, lfsr_seed }
}

pub fn trial_map(family: MapFamily, bits: u32, gamma_raw: u128) -> Result<MapKind, MapError> {
    Ok(match family {
        MapFamily::Stm => MapKind::Stm(StmParams::new(FixedPoint::from_raw(gamma_raw as u64, bits)?)?),
        MapFamily::Mlm => MapKind::Mlm(MlmParams::from_raw(gamma_raw, bits, DEFAULT_INT_BITS)?),
    })
}

/// Runs `trials` random keys through [`measure_period`] with and without an
/// order-`order` register (`None` measures bare maps only).
///
/// Trial `i` draws its key from a ChaCha stream selected by `(seed, i)`, so
/// results do not depend on the execution mode.
pub fn check_proposition1(
    trials: usize,
    bits: u32,
    order: Option<u32>,
    family: MapFamily,
    seed: u64,
    exec: Execution,
) -> Result<Proposition1Summary, PeriodError> {
    let k = order.unwrap_or(3);
    if !(8..=16).contains(&bits) || ![3, 5, 7].contains(&k) {
        return Err(PeriodError::ExperimentScale { bits, order: k });
    }
    let budget = exhaustive_budget(bits, order);
    let results = exec.map_indexed(trials, |index| -> Result<TrialResult, PeriodError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let key = random_trial_key(&mut rng, family, bits, k);
        let map = trial_map(family, bits, key.gamma_raw)?;
        let x0 = FixedPoint::from_raw(key.x0, bits).map_err(MapError::from)?;
        let bare = measure_period(map, x0, None, exhaustive_budget(bits, None))?;
        let perturbed = match order {
            Some(order) => {
                let lfsr = Lfsr::with_default_taps(order, key.lfsr_seed)?;
                Some(measure_period(map, x0, Some(lfsr), budget)?)
            }
            None => None,
        };
        Ok(TrialResult { index, key, bare, perturbed })
    });
    Ok(Proposition1Summary {
        family,
        bits,
        order,
        lfsr_period: order.map(|k| (1u64 << k) - 1),
        trials: results.into_iter().collect::<Result<_, _>>()?,
    })
}
