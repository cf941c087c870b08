//! Kernel benchmarks: Hamiltonian assembly, pure-state and density-matrix
//! propagation, and the Zeno eigendecomposition.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use zenoswap_core::dynamics::{
    build_step_hamiltonian, lindblad_evolve, schrodinger_evolve, Branching, NoiseModel, Step,
};
use zenoswap_core::hilbert::{AtomLevel, BasisState};
use zenoswap_core::protocol::ProtocolConfig;
use zenoswap_core::zeno::{merge_tolerance, reachable_subspace, zeno_decompose};

fn bench_hamiltonian_build(c: &mut Criterion) {
    let cfg = ProtocolConfig::default();
    c.bench_function("build_step_hamiltonian(step1)", |b| {
        b.iter(|| black_box(build_step_hamiltonian(Step::One, &cfg).unwrap()))
    });
}

fn bench_schrodinger(c: &mut Criterion) {
    let cfg = ProtocolConfig::default();
    let h = build_step_hamiltonian(Step::One, &cfg).unwrap();
    let psi0 = cfg
        .space()
        .basis_vector(&BasisState::new(AtomLevel::G0, AtomLevel::G1, 0))
        .unwrap();
    // 100 RK4 steps on the 50-dimensional space
    c.bench_function("schrodinger_100_steps", |b| {
        b.iter(|| {
            black_box(
                schrodinger_evolve(&h, &psi0, (0.0, 100.0 * cfg.dt), cfg.dt, usize::MAX, 0.0)
                    .unwrap(),
            )
        })
    });
}

fn bench_lindblad(c: &mut Criterion) {
    let cfg = ProtocolConfig::default();
    let h = build_step_hamiltonian(Step::One, &cfg).unwrap();
    let noise = NoiseModel { kappa: 10.0, gamma: 1.0, branching: Branching::PerChannel };
    let psi0 = cfg
        .space()
        .basis_vector(&BasisState::new(AtomLevel::G0, AtomLevel::G1, 0))
        .unwrap();
    let rho0 = &psi0 * psi0.adjoint();
    // 20 RK4 steps of the full dissipator (13 jump operators)
    c.bench_function("lindblad_20_steps", |b| {
        b.iter(|| {
            black_box(
                lindblad_evolve(&h, &rho0, &noise, (0.0, 20.0 * cfg.dt), cfg.dt, usize::MAX, 0.0)
                    .unwrap(),
            )
        })
    });
}

fn bench_zeno_decompose(c: &mut Criterion) {
    let cfg = ProtocolConfig::default();
    let h = build_step_hamiltonian(Step::One, &cfg).unwrap();
    let space = cfg.space();
    let sub = reachable_subspace(&BasisState::new(AtomLevel::G0, AtomLevel::G1, 0), &h).unwrap();
    let cavity = h.cavity_matrix();
    c.bench_function("zeno_decompose_5_state", |b| {
        b.iter(|| {
            black_box(zeno_decompose(&cavity, &sub, &space, merge_tolerance(cfg.g)).unwrap())
        })
    });
}

criterion_group!(
    benches,
    bench_hamiltonian_build,
    bench_schrodinger,
    bench_lindblad,
    bench_zeno_decompose
);
criterion_main!(benches);
