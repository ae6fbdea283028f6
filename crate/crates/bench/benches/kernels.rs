use covfield_bench::reference_coupling;
use covfield_core::kernel::{coupling_from_memory, memory_profile, MemoryKernel};
use covfield_core::numerics::j0;
use covfield_core::response::Dispersion;
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn bessel(c: &mut Criterion) {
    let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.05).collect();
    c.bench_function("j0 on 1000 points in [0, 50)", |b| {
        b.iter(|| xs.iter().map(|&x| j0(black_box(x))).sum::<f64>())
    });
}

fn hankel(c: &mut Criterion) {
    let f = reference_coupling();
    c.bench_function("memory profile g(1.3) by quadrature", |b| {
        b.iter(|| memory_profile(&f, black_box(1.3)).unwrap())
    });
    let g = MemoryKernel::closed_form(&f).unwrap();
    let grid = g.inversion_grid(10.0).unwrap();
    c.bench_function("f^2(2) from the closed-form kernel", |b| {
        b.iter(|| coupling_from_memory(&g, black_box(2.0), &grid).unwrap())
    });
}

fn susceptibility(c: &mut Criterion) {
    let d = Dispersion::new(&reference_coupling(), 1.0).unwrap();
    c.bench_function("gamma~(1, 0.5 + 2i)", |b| {
        b.iter(|| d.gamma_tilde(black_box(Complex64::new(0.5, 2.0))).unwrap())
    });
}

criterion_group!(benches, bessel, hankel, susceptibility);
criterion_main!(benches);
