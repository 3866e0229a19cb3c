//! Executes a configured scenario and collects its tables, plots and
//! diagnostics. Sweep points run on the supplied worker pool; results are
//! gathered in sweep order so output is independent of the pool size.

use feberi_core::analytic::{dp1_superposition, p2_from_ground, IncrementModel};
use feberi_core::experiments::*;
use feberi_core::solver_density::write_rho_b;
use feberi_core::tls::TlsState;
use feberi_core::{DipoleCoupling, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::output::{Plot, Series, Table};
use crate::validate::scenario_sigmas;

pub struct Bundle {
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub diagnostics: Value,
    pub warnings: Vec<String>,
    pub seeds: Vec<u64>,
    /// File name and contents of optional binary dumps.
    pub binaries: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    fn new(diagnostics: Value) -> Self {
        Self {
            tables: vec![],
            plots: vec![],
            diagnostics,
            warnings: vec![],
            seeds: vec![],
            binaries: vec![],
        }
    }
}

pub struct RunOptions {
    pub seed: u64,
    pub rho_b: bool,
}

fn plot(name: &str, title: &str, x_label: &str, y_label: &str, log_y: bool, series: Vec<Series>) -> Plot {
    Plot {
        name: name.into(),
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_y,
        series,
    }
}

fn series(label: impl Into<String>, x: &[f64], y: &[f64]) -> Series {
    Series {
        label: label.into(),
        x: x.to_vec(),
        y: y.to_vec(),
    }
}

fn par_map<T: Sync, U: Send>(pool: &rayon::ThreadPool, items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    pool.install(|| items.par_iter().map(f).collect())
}

pub fn execute(cfg: &ScenarioConfig, opts: &RunOptions, pool: &rayon::ThreadPool) -> Result<Bundle> {
    let c = cfg.physics.coupling()?;
    match cfg.scenario {
        Scenario::GroundPassage | Scenario::SuperpositionPassage => passage_scenario(cfg, &c, opts, pool),
        Scenario::PhaseSizeSweep => phase_size(cfg, &c, pool),
        Scenario::ModulatedResonance => resonance(cfg, &c, pool),
        Scenario::SinglePoint => single_point(cfg, &c, pool),
        Scenario::Buildup => trains(cfg, &c, opts),
        Scenario::SolverCrosscheck => crosscheck(cfg, &c, pool),
    }
}

fn series_table(name: String, r: &PassageSeries) -> Table {
    Table::new(name)
        .column("t [fs]", r.times.clone())
        .column("P1", r.p1.clone())
        .column("P2", r.p2.clone())
        .column("dE_F [eV]", r.de_free.clone())
        .column("dE_I [eV]", r.de_interaction.clone())
        .column("dE_total [eV]", r.de_total.clone())
        .column("dE_F + E21*dP2 [eV]", r.balance.clone())
}

fn passage_scenario(
    cfg: &ScenarioConfig,
    c: &DipoleCoupling,
    opts: &RunOptions,
    pool: &rayon::ThreadPool,
) -> Result<Bundle> {
    let settings = cfg.numerics.settings();
    let sigmas = scenario_sigmas(cfg, c);
    let ground = cfg.scenario == Scenario::GroundPassage;
    let zeta = cfg.sweep.zeta;
    let runs = par_map(pool, &sigmas, |&s| {
        if ground {
            ground_state_run(c, s, &settings)
        } else {
            superposition_run(c, s, zeta, &settings)
        }
    })?;
    let e21 = c.tls.energy_gap;
    let period = c.tls.period();
    let prefactor = cfg.physics.prefactor;
    let analytic = p2_from_ground(c, prefactor);

    let final_p2: Vec<f64> = runs.iter().map(|r| r.final_p2()).collect();
    let mut results = Table::new("results")
        .column("sigma_et [fs]", sigmas.clone())
        .column("sigma_et/T21", sigmas.iter().map(|s| s / period).collect())
        .column("Gamma", runs.iter().map(|r| r.gamma).collect())
        .column("P2_final", final_p2.clone())
        .column("max |dE_F + E21*dP2| [eV]", runs.iter().map(|r| r.max_abs_balance()).collect())
        .column("final dE_F + E21*dP2 [eV]", runs.iter().map(|r| r.final_balance()).collect());
    let diagnostics = if ground {
        results = results
            .column("P2_closed_form", vec![analytic.value; runs.len()])
            .column("rel_dev", final_p2.iter().map(|p| p / analytic.value - 1.0).collect());
        serde_json::to_value(GroundSummary::new(&runs, analytic)).expect("serializable")
    } else {
        let state = TlsState::equal_with_bloch_phase(zeta, 0.0, c.tls.omega_21);
        let dp1: Vec<f64> = sigmas
            .iter()
            .map(|&s| dp1_superposition(c, &state, 0.0, s, IncrementModel::Momentum, prefactor).value)
            .collect();
        let dp2: Vec<f64> = final_p2.iter().map(|p| p - state.p2()).collect();
        results = results
            .column("dP2_final", dp2.clone())
            .column("dP1_closed_form", dp1.clone());
        json!({
            "zeta_rad": zeta,
            "dp2_final": dp2,
            "dp1_closed_form": dp1,
            "transient_max_balance_ev": runs.iter().map(|r| r.max_abs_balance()).collect::<Vec<_>>(),
            "final_balance_ev": runs.iter().map(|r| r.final_balance()).collect::<Vec<_>>(),
            "tolerance_ev": 1e-3 * e21,
        })
    };
    let mut b = Bundle::new(diagnostics);
    b.tables.push(results);
    for (k, r) in runs.iter().enumerate() {
        let name = format!("series_{k}");
        b.tables.push(series_table(name.clone(), r));
        let scaled: Vec<f64> = r.de_free.iter().map(|e| -e / e21).collect();
        let dp2: Vec<f64> = r.p2.iter().map(|p| p - r.p2[0]).collect();
        b.plots.push(plot(
            &name,
            &format!("sigma_et = {:.4} fs (Gamma = {:.3})", r.sigma_et, r.gamma),
            "t [fs]",
            "probability change",
            false,
            vec![series("P2 - P2(0)", &r.times, &dp2), series("-dE_F/E21", &r.times, &scaled)],
        ));
    }
    b.plots.push(plot(
        "p2_vs_time",
        "excited-state probability",
        "t [fs]",
        "P2",
        false,
        runs.iter()
            .map(|r| series(format!("sigma_et/T21 = {:.3}", r.sigma_et / period), &r.times, &r.p2))
            .collect(),
    ));
    if opts.rho_b {
        if let Some(r) = runs.first() {
            let mut buf = vec![];
            write_rho_b(&mut buf, cfg.numerics.grid_points, r.sample_spacing(), &r.rho_b).expect("in-memory write");
            b.binaries.push(("rho_b.bin".into(), buf));
        }
    }
    Ok(b)
}

fn phase_size(cfg: &ScenarioConfig, c: &DipoleCoupling, pool: &rayon::ThreadPool) -> Result<Bundle> {
    let settings = cfg.numerics.settings();
    let gammas = cfg.sweep.gammas();
    let zetas = phase_samples(cfg.sweep.zeta_points);
    let cols = par_map(pool, &gammas, |&g| phase_size_column(c, g, &zetas, &settings))?;
    let fit = fit_phase_size(&cols)?;
    let max_inc = max_increment_check(&cols[0])?;
    let single = p2_from_ground(c, cfg.physics.prefactor).value;

    let mut long = Table::new("results");
    let (mut gcol, mut scol, mut zcol, mut dcol) = (vec![], vec![], vec![], vec![]);
    for col in &cols {
        for (z, d) in col.zetas.iter().zip(&col.dp2) {
            gcol.push(col.gamma);
            scol.push(col.sigma_et);
            zcol.push(*z);
            dcol.push(*d);
        }
    }
    long = long
        .column("Gamma", gcol)
        .column("sigma_et [fs]", scol)
        .column("zeta [rad]", zcol)
        .column("dP2", dcol);
    let closed: Vec<f64> = gammas.iter().map(|g| single.sqrt() * (-0.5 * g * g).exp()).collect();
    let slices = Table::new("slices")
        .column("Gamma", gammas.clone())
        .column("sigma_et [fs]", cols.iter().map(|c| c.sigma_et).collect())
        .column("slice_amplitude", fit.slice_amplitudes.clone())
        .column("closed_form_amplitude", closed.clone())
        .column("P2_ground_start", cols.iter().map(|c| c.ground_p2).collect());

    let mut b = Bundle::new(json!({
        "fit": fit,
        "max_increment": max_inc,
        "enhancement": fit.enhancement,
    }));
    b.tables.push(long);
    b.tables.push(slices);
    b.plots.push(plot(
        "slices",
        "largest phase-dependent increment vs packet size",
        "Gamma = omega_21 sigma_et",
        "amplitude of dP2(zeta)",
        true,
        vec![
            series("numerical", &gammas, &fit.slice_amplitudes),
            series("e^{-Gamma^2/2} law", &gammas, &closed),
        ],
    ));
    let picks: Vec<usize> = {
        let mut v = vec![0, cols.len() / 2, cols.len() - 1];
        v.dedup();
        v
    };
    b.plots.push(plot(
        "zeta_slices",
        "increment vs Bloch phase",
        "zeta [rad]",
        "dP2",
        false,
        picks
            .iter()
            .map(|&k| series(format!("Gamma = {:.2}", cols[k].gamma), &cols[k].zetas, &cols[k].dp2))
            .collect(),
    ));
    Ok(b)
}

fn resonance(cfg: &ScenarioConfig, c: &DipoleCoupling, pool: &rayon::ThreadPool) -> Result<Bundle> {
    let m = cfg.modulation;
    let prefactor = cfg.physics.prefactor;
    let scans = par_map(pool, &cfg.sweep.harmonics, |&n| {
        resonance_scan(c, &m, n, cfg.sweep.scan_points, prefactor)
    })?;
    let resonant = (1.0 / m.omega_b_ratio).round().max(1.0) as i64;
    let detunings: Vec<f64> = cfg.sweep.born_detunings.iter().map(|d| d / m.sigma_et_fs).collect();
    let spots = born_resonance_check(c, &m, resonant, &detunings, prefactor)?;

    let mut results = Table::new("results");
    let (mut h, mut w, mut d, mut p) = (vec![], vec![], vec![], vec![]);
    for s in &scans {
        for k in 0..s.omega.len() {
            h.push(s.harmonic as f64);
            w.push(s.omega[k]);
            d.push(s.detuning[k]);
            p.push(s.dp2[k]);
        }
    }
    results = results
        .column("harmonic", h)
        .column("omega_21 [rad/fs]", w)
        .column("detuning [rad/fs]", d)
        .column("dP2", p);
    let born = Table::new("born_checks")
        .column("detuning [rad/fs]", spots.iter().map(|s| s.detuning).collect())
        .column("P2_born", spots.iter().map(|s| s.born).collect())
        .column("P2_closed_form", spots.iter().map(|s| s.analytic).collect())
        .column("rel_diff", spots.iter().map(|s| s.rel_diff).collect());
    let mut b = Bundle::new(json!({
        "scans": scans.iter().map(|s| json!({
            "harmonic": s.harmonic,
            "fit": s.fit,
            "expected_half_width_rad_per_fs": s.expected_half_width,
            "half_width_error": s.half_width_error,
        })).collect::<Vec<_>>(),
        "born_harmonic": resonant,
        "born_checks": spots,
    }));
    b.tables.push(results);
    b.tables.push(born);
    for s in &scans {
        b.plots.push(plot(
            &format!("harmonic_{}", s.harmonic),
            &format!("resonance at {} omega_b", s.harmonic),
            "detuning [rad/fs]",
            "dP2",
            false,
            vec![series("closed form", &s.detuning, &s.dp2)],
        ));
    }
    Ok(b)
}

fn single_point(cfg: &ScenarioConfig, c: &DipoleCoupling, pool: &rayon::ThreadPool) -> Result<Bundle> {
    let sigmas = scenario_sigmas(cfg, c);
    let window = cfg.numerics.window();
    let prefactor = cfg.physics.prefactor;
    let runs = par_map(pool, &sigmas, |&s| {
        point_passage(c, s, &window, cfg.numerics.samples, prefactor)
    })?;
    let results = Table::new("results")
        .column("sigma_et [fs]", sigmas.clone())
        .column("Gamma", sigmas.iter().map(|s| s * c.tls.omega_21).collect())
        .column("P2_final", runs.iter().map(|r| r.final_p2()).collect())
        .column("P2_closed_form", runs.iter().map(|r| r.analytic).collect());
    let mut b = Bundle::new(json!({
        "final_p2": runs.iter().map(|r| r.final_p2()).collect::<Vec<_>>(),
        "closed_form": runs.iter().map(|r| r.analytic).collect::<Vec<_>>(),
    }));
    b.tables.push(results);
    for (k, r) in runs.iter().enumerate() {
        let name = format!("series_{k}");
        b.tables.push(
            Table::new(name.clone())
                .column("t [fs]", r.times.clone())
                .column("P1", r.p1.clone())
                .column("P2", r.p2.clone()),
        );
        b.plots.push(plot(
            &name,
            &format!("point electron, sigma_et = {:.4e} fs", r.sigma_et),
            "t [fs]",
            "P2",
            false,
            vec![series("P2", &r.times, &r.p2)],
        ));
    }
    Ok(b)
}

fn trains(cfg: &ScenarioConfig, c: &DipoleCoupling, opts: &RunOptions) -> Result<Bundle> {
    let r = buildup(c, &cfg.modulation, &cfg.buildup, &cfg.numerics.window(), opts.seed)?;
    let nr: Vec<f64> = (1..=r.random_mean.len()).map(|n| n as f64).collect();
    let nc: Vec<f64> = (1..=r.correlated.len()).map(|n| n as f64).collect();
    let quad: Vec<f64> = nc.iter().map(|&n| r.quadratic.predict(&[1.0, n, n * n])).collect();
    let lin: Vec<f64> = nr.iter().map(|&n| r.linear.predict(&[1.0, n])).collect();
    let mut b = Bundle::new(json!({
        "sigma_et_point_fs": r.sigma_et_point,
        "quadratic_fit": { "coefficients": r.quadratic.coefficients, "r2": r.quadratic.r2 },
        "linear_fit": { "coefficients": r.linear.coefficients, "r2": r.linear.r2 },
        "correlated_ratio": r.correlated_ratio,
        "expected_ratio": (r.correlated.len() * r.correlated.len()) as f64,
        "crossing_n": r.crossing,
    }));
    b.warnings = r.warnings.clone();
    b.seeds = r.seeds.clone();
    b.tables.push(
        Table::new("results")
            .column("N", nr.clone())
            .column("P2_random_mean", r.random_mean.clone())
            .column("P2_correlated", r.correlated.clone()),
    );
    b.tables.push(
        Table::new("fits")
            .column("N", nr.clone())
            .column("P2_linear_fit", lin.clone())
            .column("P2_quadratic_fit", quad.clone()),
    );
    b.plots.push(plot(
        "correlated",
        "phase-locked train",
        "N",
        "P2",
        false,
        vec![series("simulated", &nc, &r.correlated), series("quadratic fit", &nc, &quad)],
    ));
    b.plots.push(plot(
        "random",
        &format!("random arrivals, mean of {} seeds", r.seeds.len()),
        "N",
        "P2",
        false,
        vec![series("simulated", &nr, &r.random_mean), series("linear fit", &nr, &lin)],
    ));
    Ok(b)
}

fn crosscheck(cfg: &ScenarioConfig, c: &DipoleCoupling, pool: &rayon::ThreadPool) -> Result<Bundle> {
    let settings = cfg.numerics.settings();
    let sigmas = scenario_sigmas(cfg, c);
    let n = &cfg.numerics;
    let checks = par_map(pool, &sigmas, |&s| {
        solver_crosscheck(c, s, &settings, n.integrator, n.dt_fs, cfg.physics.prefactor)
    })?;
    let results = Table::new("results")
        .column("sigma_et [fs]", sigmas.clone())
        .column("P2_momentum_stepping", checks.iter().map(|x| x.p2_momentum).collect())
        .column("P2_joint_propagation", checks.iter().map(|x| x.p2_density).collect())
        .column("P2_closed_form", checks.iter().map(|x| x.analytic).collect())
        .column("rel_diff", checks.iter().map(|x| x.rel_diff).collect())
        .column("norm_drift", checks.iter().map(|x| x.norm_drift).collect());
    let mut b = Bundle::new(json!({ "checks": checks }));
    b.tables.push(results);
    Ok(b)
}
