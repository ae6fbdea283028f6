use covfield_bench::{excited_lattice, reference_coupling};
use covfield_core::micro_sim::Lattice;
use covfield_core::response::{mode_response_volterra, VolterraConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn volterra(c: &mut Criterion) {
    let f = reference_coupling();
    let cfg = VolterraConfig::for_mode(&f, 1.0, 1.0, 10.0);
    c.bench_function("Volterra response to t = 10", |b| {
        b.iter(|| mode_response_volterra(&f, 1.0, 1.0, &cfg).unwrap())
    });
}

fn lattice(c: &mut Criterion) {
    let (cfg, state) = excited_lattice();
    let mut lat = Lattice::new(&cfg, state).unwrap();
    c.bench_function("lattice step, 256 sites x 200 frequencies", |b| {
        b.iter(|| lat.step().unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = volterra, lattice
}
criterion_main!(benches);
