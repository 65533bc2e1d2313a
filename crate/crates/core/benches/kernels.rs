//! Benchmarks of the data-parallel inner kernels against their sequential
//! reference implementations, plus the end-to-end operator application.
//!
//! Build with `--no-default-features` to measure the sequential fallback
//! of the whole crate; within one build, the `row_fft` group compares the
//! configured chunk dispatcher against `par::seq` directly.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use num_complex::Complex64;

use mvlb_core::grid::Grid;
use mvlb_core::oseen::OseenParams;
use mvlb_core::par;
use mvlb_core::steady::{single_vortex_state, VortexSpec};

fn wave(n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        Complex64::new((i as f64 * 0.37).sin(), (j as f64 * 0.73).cos())
    })
}

fn phase_rotate(row: &mut [Complex64]) {
    for (k, z) in row.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, 1e-3 * k as f64);
    }
}

fn bench_row_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("row_kernels");
    for &n in &[128usize, 256] {
        let base = wave(n);
        group.bench_with_input(BenchmarkId::new("dispatched", n), &n, |b, &n| {
            let mut data = base.clone();
            b.iter(|| {
                let slice = data.as_slice_mut().unwrap();
                par::maybe_par_chunks_mut(slice, n, phase_rotate);
            });
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            let mut data = base.clone();
            b.iter(|| {
                let slice = data.as_slice_mut().unwrap();
                par::seq::chunks_mut(slice, n, phase_rotate);
            });
        });
    }
    group.finish();
}

fn bench_fft2(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft2");
    for &n in &[128usize, 256] {
        let data = wave(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| mvlb_core::fft::fft2(data));
        });
    }
    group.finish();
}

fn bench_linearization(c: &mut Criterion) {
    let grid = Grid::new(128, 16.0).unwrap();
    let spec = VortexSpec::ring(4.0, 1.0, (8.0, 8.0));
    let state = single_vortex_state(grid, &spec, 0.05, 0.0).unwrap();
    let op = OseenParams::from_state(&state, Complex64::default());
    let w = state.velocity.clone();
    c.bench_function("oseen_apply_128", |b| {
        b.iter(|| op.apply_linearization(&w).unwrap());
    });
}

criterion_group!(benches, bench_row_kernels, bench_fft2, bench_linearization);
criterion_main!(benches);
