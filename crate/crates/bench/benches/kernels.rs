use criterion::{black_box, criterion_group, criterion_main, Criterion};
use feberi_core::born_dynamics::{passage_profile, PassageWindow};
use feberi_core::coulomb::m_tilde;
use feberi_core::special::{bessel_j_sequence, bessel_k01_scaled};
use feberi_core::PhysicsParams;

fn kernels(c: &mut Criterion) {
    let coupling = PhysicsParams::default().coupling().unwrap();
    let dp = coupling.tls.energy_gap / coupling.kin.v0 / 16.0;

    c.bench_function("m_tilde x1024", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for k in 0..1024 {
                acc += m_tilde(black_box((k as f64 - 512.0) * dp), &coupling).norm();
            }
            acc
        })
    });
    c.bench_function("bessel_k01 x1024", |b| {
        b.iter(|| (1..=1024).map(|k| bessel_k01_scaled(black_box(k as f64 * 0.01)).unwrap().0).sum::<f64>())
    });
    c.bench_function("bessel_j_sequence(40, 3)", |b| b.iter(|| bessel_j_sequence(40, black_box(3.0))));
    c.bench_function("passage_profile sigma=0.1 T21", |b| {
        let sigma = 0.1 * coupling.tls.period();
        b.iter(|| passage_profile(&coupling, black_box(sigma), 0.0, &PassageWindow::default()).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
