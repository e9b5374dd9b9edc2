//! Statistical randomness battery.
//!
//! Nine test kinds from the NIST SP 800-22 family: frequency (monobit),
//! block frequency, runs, longest run of ones, cumulative sums forward and
//! backward, serial, approximate entropy and the spectral (DFT) test. Every
//! p-value is judged at significance 0.01.

mod battery;
pub mod special;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::exec::Execution;

pub use special::{erfc, igamc};

/// Significance level for every test.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("{test} needs at least {min} bits, got {len}")]
    TooShort { test: TestKind, min: usize, len: usize },
    #[error("invalid parameter for {test}: {reason}")]
    Parameter { test: TestKind, reason: String },
    #[error("bit sequence must not be empty")]
    Empty,
}

/// A packed bit string, first bit in the MSB of byte 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    bytes: Vec<u8>,
    len: usize,
}

impl BitSequence {
    /// Takes the first `len` bits of `bytes` (all of them for `None`).
    pub fn from_bytes(bytes: &[u8], len: Option<usize>) -> Result<Self, StatsError> {
        let len = len.unwrap_or(bytes.len() * 8).min(bytes.len() * 8);
        if len == 0 {
            return Err(StatsError::Empty);
        }
        let mut bytes = bytes[..len.div_ceil(8)].to_vec();
        if len % 8 != 0 {
            let last = bytes.len() - 1;
            bytes[last] &= 0xffu8 << (8 - len % 8);
        }
        Ok(Self { bytes, len })
    }

    /// Packs one bit per input element (nonzero means 1).
    pub fn from_bits(bits: &[u8]) -> Result<Self, StatsError> {
        if bits.is_empty() {
            return Err(StatsError::Empty);
        }
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        Ok(Self { bytes, len: bits.len() })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        (i < self.len).then(|| (self.bytes[i / 8] >> (7 - i % 8)) & 1)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(|i| (self.bytes[i / 8] >> (7 - i % 8)) & 1)
    }

    /// One byte per bit.
    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().collect()
    }
}

impl FromStr for BitSequence {
    type Err = StatsError;

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Vec<u8> = s.chars().filter(|c| !c.is_whitespace()).map(|c| (c == '1') as u8).collect();
        Self::from_bits(&bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Monobit,
    BlockFrequency,
    Runs,
    LongestRun,
    CusumForward,
    CusumBackward,
    Serial,
    ApproxEntropy,
    Dft,
}

impl TestKind {
    pub const ALL: [TestKind; 9] = [
        TestKind::Monobit,
        TestKind::BlockFrequency,
        TestKind::Runs,
        TestKind::LongestRun,
        TestKind::CusumForward,
        TestKind::CusumBackward,
        TestKind::Serial,
        TestKind::ApproxEntropy,
        TestKind::Dft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Monobit => "monobit",
            TestKind::BlockFrequency => "block_frequency",
            TestKind::Runs => "runs",
            TestKind::LongestRun => "longest_run",
            TestKind::CusumForward => "cusum_forward",
            TestKind::CusumBackward => "cusum_backward",
            TestKind::Serial => "serial",
            TestKind::ApproxEntropy => "approx_entropy",
            TestKind::Dft => "dft",
        }
    }

    /// Shortest sequence the test accepts.
    pub fn min_len(self) -> usize {
        match self {
            TestKind::Runs => 2,
            TestKind::LongestRun => 128,
            TestKind::Dft => 1000,
            _ => 100,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestParams {
    /// Block length for the block frequency test.
    pub block_size: usize,
    /// Pattern length for the serial test.
    pub serial_m: usize,
    /// Pattern length for approximate entropy.
    pub apen_m: usize,
}

impl Default for TestParams {
    fn default() -> Self {
        Self { block_size: 128, serial_m: 2, apen_m: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub kind: TestKind,
    /// One p-value per part (two for the serial test).
    pub p_values: Vec<f64>,
    /// The test's intermediate statistic, for diagnostics.
    pub statistic: f64,
    pub pass: bool,
}

impl TestResult {
    fn new(kind: TestKind, (statistic, p_values): battery::Outcome) -> Self {
        let p_values: Vec<f64> =
            p_values.into_iter().map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) }).collect();
        let pass = p_values.iter().all(|&p| p >= ALPHA);
        Self { kind, p_values, statistic, pass }
    }

    pub fn min_p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(1.0, f64::min)
    }

    /// Row labels: the test name, or `name_1`, `name_2`, ... for multi-part tests.
    pub fn part_names(&self) -> Vec<String> {
        if self.p_values.len() == 1 {
            vec![self.kind.name().to_string()]
        } else {
            (1..=self.p_values.len()).map(|i| format!("{}_{i}", self.kind.name())).collect()
        }
    }
}

fn check_pattern_len(kind: TestKind, m: usize, len: usize) -> Result<(), StatsError> {
    let log2 = usize::BITS - 1 - len.leading_zeros();
    let limit = (log2 as usize).saturating_sub(2);
    let min_m = if kind == TestKind::Serial { 2 } else { 1 };
    if m < min_m || m >= limit || m > 24 {
        return Err(StatsError::Parameter {
            test: kind,
            reason: format!("pattern length {m} must satisfy {min_m} <= m < floor(log2 n) - 2 = {limit}"),
        });
    }
    Ok(())
}

/// Runs one test on unpacked bits.
pub fn run_test_bits(kind: TestKind, bits: &[u8], params: &TestParams) -> Result<TestResult, StatsError> {
    let len = bits.len();
    if len < kind.min_len() {
        return Err(StatsError::TooShort { test: kind, min: kind.min_len(), len });
    }
    let outcome = match kind {
        TestKind::Monobit => battery::monobit(bits),
        TestKind::BlockFrequency => {
            let m = params.block_size;
            if m < 2 || m > len {
                return Err(StatsError::Parameter {
                    test: kind,
                    reason: format!("block size {m} must lie in 2..={len}"),
                });
            }
            battery::block_frequency(bits, m)
        }
        TestKind::Runs => battery::runs(bits),
        TestKind::LongestRun => battery::longest_run(bits),
        TestKind::CusumForward => battery::cumulative_sums(bits, true),
        TestKind::CusumBackward => battery::cumulative_sums(bits, false),
        TestKind::Serial => {
            check_pattern_len(kind, params.serial_m, len)?;
            battery::serial(bits, params.serial_m)
        }
        TestKind::ApproxEntropy => {
            check_pattern_len(kind, params.apen_m, len)?;
            battery::approximate_entropy(bits, params.apen_m)
        }
        TestKind::Dft => battery::dft(bits),
    };
    Ok(TestResult::new(kind, outcome))
}

pub fn run_test(kind: TestKind, bits: &BitSequence, params: &TestParams) -> Result<TestResult, StatsError> {
    run_test_bits(kind, &bits.to_bits(), params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub results: Vec<TestResult>,
    /// Tests not applicable to this sequence, with the reason.
    pub skipped: Vec<(TestKind, String)>,
    pub all_pass: bool,
    pub sequence_length: usize,
}

impl TestReport {
    pub fn result(&self, kind: TestKind) -> Option<&TestResult> {
        self.results.iter().find(|r| r.kind == kind)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestResult> {
        self.results.iter().filter(|r| !r.pass)
    }

    /// `test_name p_value PASS|FAIL` rows, skipped tests as `SKIP`, then an
    /// `ALL PASS|FAIL` row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            for (name, p) in r.part_names().iter().zip(&r.p_values) {
                let verdict = if *p >= ALPHA { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{name} {p:.6} {verdict}");
            }
        }
        for (kind, _) in &self.skipped {
            let _ = writeln!(out, "{kind} - SKIP");
        }
        let _ = writeln!(out, "ALL {}", if self.all_pass { "PASS" } else { "FAIL" });
        out
    }

    /// `key=value` lines for scripts.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sequence_length={}", self.sequence_length);
        for r in &self.results {
            for (name, p) in r.part_names().iter().zip(&r.p_values) {
                let _ = writeln!(out, "{name}.p_value={p:.17e}");
                let _ = writeln!(out, "{name}.pass={}", *p >= ALPHA);
            }
            let _ = writeln!(out, "{}.statistic={:.17e}", r.kind, r.statistic);
        }
        for (kind, reason) in &self.skipped {
            let _ = writeln!(out, "{kind}.skipped={reason}");
        }
        let _ = writeln!(out, "all_pass={}", self.all_pass);
        out
    }
}

/// Runs all nine tests with default parameters. Tests that do not apply
/// (sequence too short, pattern length too large) are recorded as skipped.
pub fn run_suite(bits: &BitSequence, exec: Execution) -> TestReport {
    let unpacked = bits.to_bits();
    let params = TestParams::default();
    let outcomes = exec.map_slice(&TestKind::ALL, |&kind| (kind, run_test_bits(kind, &unpacked, &params)));
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (kind, outcome) in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => skipped.push((kind, e.to_string())),
        }
    }
    let all_pass = !results.is_empty() && results.iter().all(|r| r.pass);
    TestReport { results, skipped, all_pass, sequence_length: bits.len() }
}
