use std::hint::black_box;

use chaos_lfsr::cipher::Key;
use chaos_lfsr::maps::MapFamily;
use chaos_lfsr::period::check_proposition1;
use chaos_lfsr::randstats::{run_suite, BitSequence};
use chaos_lfsr::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] =
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn keystream(c: &mut Criterion) {
    let mut group = c.benchmark_group("keystream");
    let len = 64 * 1024;
    group.throughput(Throughput::Bytes(len as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for family in [MapFamily::Stm, MapFamily::Mlm] {
        let key = Key::generate(&mut rng, family);
        group.bench_function(family.name(), |b| {
            b.iter(|| black_box(key.generator().bytes(len)));
        });
    }
    group.finish();
}

/// Sixteen independent keys, one keystream each.
fn multi_key_keystream(c: &mut Criterion) {
    let mut group = c.benchmark_group("multi_key_keystream");
    let len = 16 * 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let keys: Vec<Key> = (0..16).map(|_| Key::generate(&mut rng, MapFamily::Mlm)).collect();
    group.throughput(Throughput::Bytes((len * keys.len()) as u64));
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| black_box(exec.map_slice(&keys, |k| k.generator().bytes(len))));
        });
    }
    group.finish();
}

fn test_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("randstats_suite");
    group.sample_size(10);
    let key = Key::generate(&mut ChaCha8Rng::seed_from_u64(3), MapFamily::Stm);
    let bits = BitSequence::from_bytes(&key.generator().bytes(125_000), None).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, bits.len()), &bits, |b, bits| {
            b.iter(|| black_box(run_suite(bits, exec)));
        });
    }
    group.finish();
}

fn period_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("proposition1_trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| black_box(check_proposition1(16, 10, Some(5), MapFamily::Stm, 7, exec).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, keystream, multi_key_keystream, test_suite, period_trials);
criterion_main!(benches);
