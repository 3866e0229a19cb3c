use criterion::{criterion_group, criterion_main, Criterion};
use feberi_core::born_dynamics::{arrival_schedule, simulate_train, PassageWindow, ScheduleKind};
use feberi_core::experiments::{gaussian_passage, solver_crosscheck, SolverSettings};
use feberi_core::solver_momentum::Integrator;
use feberi_core::{PhysicsParams, PrefactorConvention, TlsState};

fn solvers(c: &mut Criterion) {
    let coupling = PhysicsParams::default().coupling().unwrap();
    let period = coupling.tls.period();
    let sigma = 0.1 * period;
    let settings = SolverSettings {
        grid_points: 128,
        ..Default::default()
    };

    let mut g = c.benchmark_group("solvers");
    g.sample_size(10);
    g.bench_function("density passage N=128", |b| {
        b.iter(|| gaussian_passage(&coupling, sigma, &settings).unwrap())
    });
    g.bench_function("momentum vs density N=128", |b| {
        b.iter(|| {
            solver_crosscheck(&coupling, sigma, &settings, Integrator::Rk4, None, PrefactorConvention::default())
                .unwrap()
        })
    });
    g.bench_function("correlated train of 20", |b| {
        let omega_b = 0.5 * coupling.tls.omega_21;
        let schedule =
            arrival_schedule(ScheduleKind::Correlated, 20, omega_b, 0.0, 20.0 * period, 7).unwrap();
        b.iter(|| {
            simulate_train(&TlsState::ground(), &schedule, &coupling, 0.01 * period, &PassageWindow::default())
                .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
