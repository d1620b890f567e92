//! Parallel vs sequential throughput of the sample sweeps.
//!
//! `exec::try_map` dispatches over rayon when the `parallel` feature is on
//! (the default) and falls back to plain iteration otherwise; `try_map_seq`
//! is always sequential. Benching both in one build shows what the fan-out
//! buys on this machine. Without the feature the two paths coincide.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use afmin::diagnostics::pythagorean_smart;
use afmin::exec;
use afmin::framework::{sample_around_trace, SampleDomain, StoppingRule};
use afmin::model::NonnegMatrix;
use afmin::solvers::solve_smart;
use afmin::synth;

struct Sample {
    p: NonnegMatrix,
    y: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
}

fn identity_samples(n: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..n)
        .map(|_| {
            let rows = rng.random_range(2..=6);
            let cols = rng.random_range(2..=4);
            let p = synth::random_normalized_matrix(&mut rng, rows, cols);
            let y = synth::positive_vec(&mut rng, rows, 0.3, 3.0);
            let x = synth::positive_vec(&mut rng, cols, 0.2, 2.0);
            let z = synth::positive_vec(&mut rng, cols, 0.2, 2.0);
            Sample { p, y, x, z }
        })
        .collect()
}

fn bench_identity_sweep(c: &mut Criterion) {
    let samples = identity_samples(1000);
    let eval = |s: &Sample| pythagorean_smart(&s.p, &s.y, &s.x, &s.z);
    let mut group = c.benchmark_group("identity_sweep_1000");
    group.bench_function("fanned_out", |b| {
        b.iter(|| exec::try_map(&samples, eval).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| exec::try_map_seq(&samples, eval).unwrap())
    });
    group.finish();
}

fn bench_monitor_samples(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (p, y, x0) = synth::random_kl_instance(&mut rng, 6, 4, false).unwrap();
    let rule = StoppingRule::new(50, 0.0, 0.0).unwrap();
    let run = solve_smart(&p, &y, &x0, &rule).unwrap();
    let samples = sample_around_trace(&run.trace, 200, SampleDomain::Positive, &[], &mut rng);
    let records = run.trace.records();
    // per-sample work comparable to one monitor pass over the trace
    let eval = |x: &Vec<f64>| -> afmin::Result<f64> {
        let mut worst = f64::INFINITY;
        for rec in records {
            let v = afmin::distances::kl_vec(x, &rec.x)?
                - afmin::distances::kl_vec(&run.p.mul(x)?, &run.p.mul(&rec.x)?)?;
            worst = worst.min(v);
        }
        Ok(worst)
    };
    let mut group = c.benchmark_group("monitor_samples_200x50");
    group.bench_function("fanned_out", |b| {
        b.iter(|| exec::try_map(&samples, eval).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| exec::try_map_seq(&samples, eval).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_identity_sweep, bench_monitor_samples);
criterion_main!(benches);
