use std::hint::black_box;

use cmchain_bench::{fast_ramp, magnon_to_photon_chain, photonic_chain};
use cmchain_core::dynamics::integrate_fixed;
use cmchain_core::spectral::uniform_grid;
use cmchain_core::{eigendecompose, evolve, gap_width, propagate_piecewise, scan_spectrum};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectral(c: &mut Criterion) {
    let spec = photonic_chain();
    let h = spec.build_hamiltonian(0.7);
    c.bench_function("eigendecompose L=21", |b| b.iter(|| eigendecompose(black_box(&h)).unwrap()));

    let grid = uniform_grid(0.0, 2.0 * std::f64::consts::PI, 201);
    c.bench_function("scan_spectrum L=21 x 201", |b| b.iter(|| scan_spectrum(&spec, black_box(&grid)).unwrap()));
    c.bench_function("gap_width L=21 x 201", |b| b.iter(|| gap_width(&spec, black_box(&grid)).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let ramp = fast_ramp();
    let mut group = c.benchmark_group("ramp");
    group.sample_size(10);
    for (name, spec) in [("L=21", photonic_chain()), ("L=5 g0=16", magnon_to_photon_chain())] {
        let init = spec.left_edge();
        let tgt = spec.right_edge();
        group.bench_with_input(BenchmarkId::new("evolve", name), &spec, |b, s| {
            b.iter(|| evolve(s, &ramp, &init, &tgt, 0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rk4 4096 steps", name), &spec, |b, s| {
            b.iter(|| integrate_fixed(s, &ramp, &init, 4096).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("piecewise 4096 slices", name), &spec, |b, s| {
            b.iter(|| propagate_piecewise(s, &ramp, &init, 4096).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectral, dynamics);
criterion_main!(benches);
