//! Parallel vs sequential throughput of the data-parallel entry points:
//! energy sweeps of the kernel integrals and randomized bound-scan trials.
//!
//! Run with `cargo bench`; the same closures go through `exec::map` (rayon
//! when the `parallel` feature is on) and `exec::map_seq`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wkbound::exec;
use wkbound::profiles::{LengthProfile, PotentialSpec};
use wkbound::semiclassical;
use wkbound::units::Units;
use wkbound::variational;

fn sweep_workload(c: &mut Criterion) {
    let profile = LengthProfile::from_spec(&PotentialSpec::PositivePower {
        alpha: 2.0,
        strength: 1.0,
        length_scale: 1.0,
        v0: 0.0,
    })
    .unwrap();
    let energies: Vec<f64> = (1..=256).map(|i| 0.05 * i as f64).collect();
    let units = Units::natural();

    let mut group = c.benchmark_group("energy_sweep_256");
    group.sample_size(10);
    group.bench_with_input(
        BenchmarkId::new("parallel", energies.len()),
        &energies,
        |b, es| {
            b.iter(|| {
                let rows = exec::map(es, |&e| {
                    let t = semiclassical::integrals(&profile, e).unwrap();
                    semiclassical::state_count(&t, units)
                        + semiclassical::uncertainty_ratio(&t).unwrap()
                });
                black_box(rows)
            })
        },
    );
    group.bench_with_input(
        BenchmarkId::new("sequential", energies.len()),
        &energies,
        |b, es| {
            b.iter(|| {
                let rows = exec::map_seq(es, |&e| {
                    let t = semiclassical::integrals(&profile, e).unwrap();
                    semiclassical::state_count(&t, units)
                        + semiclassical::uncertainty_ratio(&t).unwrap()
                });
                black_box(rows)
            })
        },
    );
    group.finish();
}

fn scan_workload(c: &mut Criterion) {
    let base = LengthProfile::from_spec(&PotentialSpec::Harmonic {
        amplitude: 2.0,
        v0: 0.0,
    })
    .unwrap();

    let mut group = c.benchmark_group("bound_scan_128");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(variational::perturbation_scan(&base, 128, 7).unwrap().max_u))
    });
    group.bench_function("sequential", |b| {
        // Same trials through the sequential executor: one trial per call,
        // mapped without the pool.
        b.iter(|| {
            let us = exec::map_seq(&(0..128).collect::<Vec<_>>(), |&i| {
                variational::perturbation_scan(&base, 1, 7 ^ (i as u64))
                    .unwrap()
                    .max_u
            });
            black_box(us)
        })
    });
    group.finish();
}

criterion_group!(benches, sweep_workload, scan_workload);
criterion_main!(benches);
