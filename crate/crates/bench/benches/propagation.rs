use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;

use vibronic_bench::{mixed_state, scenario};
use vibronic_core::dynamics::ChebyshevPropagator;
use vibronic_core::measures::{self, MeasureRecord};
use vibronic_core::{eigensolve, VibronicHamiltonian};

fn kernels(c: &mut Criterion) {
    let s = scenario();
    let state = mixed_state(&s);
    let kinetic = s.hamiltonian.kinetic();
    let input = state.channel(1).to_vec();
    let mut output = vec![Complex64::new(0.0, 0.0); input.len()];
    c.bench_function("kinetic_apply", |b| b.iter(|| kinetic.apply(&input, &mut output)));

    let prop = ChebyshevPropagator::new(&s.hamiltonian);
    let t = vibronic_core::units::ps(15.0);
    let dt = s.config.run.dt;
    c.bench_function("chebyshev_step", |b| {
        b.iter_batched(|| state.clone(), |mut psi| prop.step(&mut psi, t, dt).unwrap(), BatchSize::SmallInput)
    });

    let channel = &s.hamiltonian.channels()[1];
    let curve = channel.dressed_curve();
    c.bench_function("eigensolve_40", |b| b.iter(|| eigensolve(&s.config.grid, &curve, 40).unwrap()));

    let potentials = s.bare_potentials();
    c.bench_function("measure_record", |b| {
        b.iter(|| MeasureRecord::compute(&state, &s.bases, &potentials, false).unwrap())
    });
    c.bench_function("skew_reduced_profile", |b| {
        b.iter(|| measures::skew_information_reduced(&state, &potentials).unwrap())
    });

    let oracle = VibronicHamiltonian::new(&s.hamiltonian, &s.bases).unwrap();
    c.bench_function("oracle_matrix", |b| b.iter(|| oracle.matrix(t)));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
