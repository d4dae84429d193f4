use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use csbohm::ensemble::{appendix_average_check, plane_wave_basis, sample_positions};
use csbohm::spin::{Direction, MultiSpinState, Sign};
use csbohm::spin_geometry::{hidden_spin_vector, sweep_maximum};
use csbohm::trajectories::{bohm_trajectory, cs_worldline, IntegratorOptions};
use csbohm::two_state::{entangled_weak_value, weak_spin_value, EntangledContext, TwoStateContext};
use csbohm::wavepacket::{current_cs, current_standard, Propagator};
use csbohm_bench::{counter_propagating_history, grid, moving_packet, standard_history};

fn spin(c: &mut Criterion) {
    let ctx = TwoStateContext::from_axes(&Direction::Z, Sign::Up, &Direction::X, Sign::Up).unwrap();
    let h = Direction::new(0.3, -0.4, 0.8).unwrap();
    c.bench_function("weak_spin_value", |b| b.iter(|| weak_spin_value(black_box(&ctx), black_box(&h))));
    c.bench_function("hidden_spin_vector", |b| {
        b.iter(|| hidden_spin_vector(black_box(&Direction::Z), black_box(&Direction::X)).unwrap())
    });
    let ent = EntangledContext::new(MultiSpinState::singlet(), Direction::Z, Sign::Up, Direction::X, Sign::Up).unwrap();
    c.bench_function("entangled_weak_value", |b| b.iter(|| entangled_weak_value(black_box(&ent), black_box(&h))));
    c.bench_function("sweep_maximum_36x10", |b| b.iter(|| sweep_maximum(black_box(&ctx), 36, 10)));
}

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_step");
    for n in [256usize, 1024, 4096] {
        let psi = moving_packet(n);
        let mut prop = Propagator::new(&grid(n), 0.001, None).unwrap();
        let mut amps = psi.amplitudes().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| prop.step(black_box(&mut amps))));
    }
    group.finish();

    let psi = moving_packet(1024);
    c.bench_function("current_standard_1024", |b| b.iter(|| current_standard(black_box(&psi))));
    c.bench_function("current_cs_1024", |b| b.iter(|| current_cs(black_box(&psi), black_box(&psi)).unwrap()));
}

fn paths(c: &mut Criterion) {
    let std = standard_history();
    let cs = counter_propagating_history();
    let opts = IntegratorOptions::default();
    c.bench_function("bohm_trajectory", |b| b.iter(|| bohm_trajectory(black_box(&std), 0.3, &opts).unwrap()));
    c.bench_function("cs_worldline_with_reversal", |b| b.iter(|| cs_worldline(black_box(&cs), 0.4, 0.5, &opts).unwrap()));
}

fn statistics(c: &mut Criterion) {
    let psi = moving_packet(1024);
    c.bench_function("sample_positions_1e4", |b| b.iter(|| sample_positions(black_box(&psi), 10_000, 1).unwrap()));
    let small = moving_packet(256);
    let basis = plane_wave_basis(&grid(256), 0.0).unwrap();
    let mut group = c.benchmark_group("appendix");
    group.sample_size(10);
    group.bench_function("plane_waves_256", |b| b.iter(|| appendix_average_check(black_box(&small), &basis).unwrap()));
    group.finish();
}

criterion_group!(benches, spin, evolution, paths, statistics);
criterion_main!(benches);
