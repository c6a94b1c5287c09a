//! Sequential versus parallel execution of the data-parallel workloads.
//! Without the `parallel` feature both variants run sequentially.

use std::f64::consts::FRAC_PI_4;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdi_duality::bounds::{classical_maximum_with, quantum_maximum_with, SeeSawConfig};
use sdi_duality::dataio::{coverage_study, ExtremumMode};
use sdi_duality::exec::Execution;
use sdi_duality::interferometer::{duality_estimate, phi_s_grid, PHI_S_RANGE};
use sdi_duality::witness::{bb84_preparations, duality_witness_max};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn classical_enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("classical_enumeration");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| black_box(classical_maximum_with(exec))));
    }
    g.finish();
}

fn quantum_restarts(c: &mut Criterion) {
    let mut g = c.benchmark_group("quantum_restarts");
    let cfg = SeeSawConfig::default();
    for restarts in [20usize, 200] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, restarts), &restarts, |b, &n| {
                b.iter(|| black_box(quantum_maximum_with(7, n, &cfg, exec).unwrap()))
            });
        }
    }
    g.finish();
}

fn coverage(c: &mut Criterion) {
    let mut g = c.benchmark_group("coverage_study_200_trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(coverage_study(FRAC_PI_4, 1e4, 200, 1, 3.0, ExtremumMode::MaxMin, exec).unwrap()))
        });
    }
    g.finish();
}

fn phi_s_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("phi_s_sweep_101");
    g.sample_size(20);
    let grid = phi_s_grid(PHI_S_RANGE.0, PHI_S_RANGE.1, 101);
    let prep = bb84_preparations();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                black_box(exec.map_slice(&grid, |&phi_s| {
                    (duality_estimate(phi_s, 64).unwrap(), duality_witness_max(&prep, phi_s).unwrap())
                }))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, classical_enumeration, quantum_restarts, coverage, phi_s_sweep);
criterion_main!(benches);
