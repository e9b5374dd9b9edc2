//! Individual test statistics. Every function takes unpacked bits (0/1 per
//! byte) whose length has already been validated by the caller.

use std::f64::consts::{LN_2, SQRT_2};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::special::{erfc, igamc, normal_cdf};

/// `(statistic, p-values)` of one test.
pub(super) type Outcome = (f64, Vec<f64>);

pub(super) fn monobit(bits: &[u8]) -> Outcome {
    let n = bits.len() as f64;
    let sum: i64 = bits.iter().map(|&b| 2 * b as i64 - 1).sum();
    let s_obs = sum.unsigned_abs() as f64 / n.sqrt();
    (s_obs, vec![erfc(s_obs / SQRT_2)])
}

pub(super) fn block_frequency(bits: &[u8], block: usize) -> Outcome {
    let blocks = bits.len() / block;
    let chi2 = 4.0
        * block as f64
        * bits
            .chunks_exact(block)
            .map(|c| {
                let pi = c.iter().map(|&b| b as u64).sum::<u64>() as f64 / block as f64;
                (pi - 0.5) * (pi - 0.5)
            })
            .sum::<f64>();
    (chi2, vec![igamc(blocks as f64 / 2.0, chi2 / 2.0)])
}

pub(super) fn runs(bits: &[u8]) -> Outcome {
    let n = bits.len() as f64;
    let pi = bits.iter().map(|&b| b as u64).sum::<u64>() as f64 / n;
    // frequency prerequisite: the runs test is not applicable, p = 0
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return (0.0, vec![0.0]);
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let v_obs = v_obs as f64;
    let num = (v_obs - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    (v_obs, vec![erfc(num / den)])
}

struct LongestRunTable {
    block: usize,
    low: usize,
    probs: &'static [f64],
}

const LONGEST_RUN_8: LongestRunTable = LongestRunTable {
    block: 8,
    low: 1,
    probs: &[0.21484375, 0.3671875, 0.23046875, 0.1875],
};
const LONGEST_RUN_128: LongestRunTable = LongestRunTable {
    block: 128,
    low: 4,
    probs: &[0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847],
};
const LONGEST_RUN_10000: LongestRunTable = LongestRunTable {
    block: 10_000,
    low: 10,
    probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

pub(super) fn longest_run(bits: &[u8]) -> Outcome {
    let table = match bits.len() {
        n if n < 6_272 => &LONGEST_RUN_8,
        n if n < 750_000 => &LONGEST_RUN_128,
        _ => &LONGEST_RUN_10000,
    };
    let classes = table.probs.len();
    let mut counts = vec![0u64; classes];
    for block in bits.chunks_exact(table.block) {
        let mut longest = 0usize;
        let mut run = 0usize;
        for &b in block {
            if b == 1 {
                run += 1;
                longest = longest.max(run);
            } else {
                run = 0;
            }
        }
        let class = longest.clamp(table.low, table.low + classes - 1) - table.low;
        counts[class] += 1;
    }
    let blocks = (bits.len() / table.block) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(table.probs)
        .map(|(&c, &p)| {
            let expected = blocks * p;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let k = (classes - 1) as f64;
    (chi2, vec![igamc(k / 2.0, chi2 / 2.0)])
}

pub(super) fn cumulative_sums(bits: &[u8], forward: bool) -> Outcome {
    let n = bits.len() as i64;
    let step = |s: i64, &b: &u8| s + 2 * b as i64 - 1;
    let mut sum = 0i64;
    let mut z = 0i64;
    let mut track = |b: &u8| {
        sum = step(sum, b);
        z = z.max(sum.abs());
    };
    if forward {
        bits.iter().for_each(&mut track);
    } else {
        bits.iter().rev().for_each(&mut track);
    }
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    let phi = |k: i64, off: i64| normal_cdf((4 * k + off) as f64 * zf / sqrt_n);
    // Integer bounds truncate toward zero, as in the reference code.
    let mut sum1 = 0.0;
    for k in (-n / z + 1) / 4..=(n / z - 1) / 4 {
        sum1 += phi(k, 1) - phi(k, -1);
    }
    let mut sum2 = 0.0;
    for k in (-n / z - 3) / 4..=(n / z - 1) / 4 {
        sum2 += phi(k, 3) - phi(k, 1);
    }
    (zf, vec![1.0 - sum1 + sum2])
}

/// Counts of every overlapping `m`-bit pattern, wrapping around the end.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for &b in bits.iter().take(m - 1) {
        window = (window << 1) | b as usize;
    }
    for i in 0..n {
        window = ((window << 1) | bits[(i + m - 1) % n] as usize) & mask;
        counts[window] += 1;
    }
    counts
}

fn psi_squared(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m).iter().map(|&c| (c as f64).powi(2)).sum();
    sum * (1u64 << m) as f64 / n - n
}

pub(super) fn serial(bits: &[u8], m: usize) -> Outcome {
    let psi_m = psi_squared(bits, m);
    let psi_m1 = psi_squared(bits, m - 1);
    let psi_m2 = psi_squared(bits, m - 2);
    let del1 = psi_m - psi_m1;
    let del2 = psi_m - 2.0 * psi_m1 + psi_m2;
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0);
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0);
    (del1, vec![p1, p2])
}

fn phi(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

pub(super) fn approximate_entropy(bits: &[u8], m: usize) -> Outcome {
    let n = bits.len() as f64;
    let apen = phi(bits, m) - phi(bits, m + 1);
    let chi2 = 2.0 * n * (LN_2 - apen);
    (chi2, vec![igamc(2f64.powi(m as i32 - 1), chi2 / 2.0)])
}

/// Magnitudes `|S_j|`, `j < n/2`, of the DFT of the +-1 sequence.
pub(super) fn dft_magnitudes(bits: &[u8]) -> Vec<f64> {
    let n = bits.len();
    let mut buf: Vec<Complex<f64>> =
        bits.iter().map(|&b| Complex::new(2.0 * b as f64 - 1.0, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(n / 2).map(|c| c.norm()).collect()
}

pub(super) fn dft_threshold(n: usize) -> f64 {
    ((1.0f64 / 0.05).ln() * n as f64).sqrt()
}

/// Spectral test statistic from precomputed magnitudes.
pub(super) fn dft_from_magnitudes(n: usize, magnitudes: &[f64]) -> Outcome {
    let n = n as f64;
    let threshold = dft_threshold(n as usize);
    let expected = 0.95 * n / 2.0;
    let below = magnitudes.iter().filter(|&&m| m < threshold).count() as f64;
    let d = (below - expected) / (n * 0.95 * 0.05 / 4.0).sqrt();
    (d, vec![erfc(d.abs() / SQRT_2)])
}

pub(super) fn dft(bits: &[u8]) -> Outcome {
    dft_from_magnitudes(bits.len(), &dft_magnitudes(bits))
}
