//! Dry-run checks on a configuration: grid sizing, window coverage, regime
//! flags and rough cost estimates. Nothing here runs a solver.

use std::fmt;

use feberi_core::analytic::{p2_from_ground, RegimeFlag};
use feberi_core::born_dynamics::transverse_kernel_captured_fraction;
use feberi_core::coulomb::DipoleCoupling;
use feberi_core::grid::build_grid;
use feberi_core::qew::{bunch_rms_duration, GaussianQewSpec};
use feberi_core::solver_density::check_periodic_images;
use feberi_core::solver_momentum::MomentumSolver;
use feberi_core::tls::DipoleOrientation;
use serde::Serialize;

use crate::config::{Scenario, ScenarioConfig};

/// Largest grid the joint solver is sized for: a (2N)² dense eigenproblem.
pub const MAX_GRID_POINTS: usize = 1024;
/// Seconds per (2N)³ for the Hermitian eigendecomposition, measured on a desktop core.
const EIGEN_COST: f64 = 9e-9;
/// Seconds per N² per RK4 step of the momentum-space stepper.
const STEP_COST: f64 = 1.5e-8;

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub scenario: String,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub memory_mib: f64,
    pub runtime_s: f64,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.scenario,
            if self.is_valid() { "valid" } else { "invalid" }
        )?;
        for e in &self.errors {
            writeln!(f, "  error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        writeln!(
            f,
            "  estimate: peak memory ~{:.1} MiB, runtime ~{:.1} s (single worker)",
            self.memory_mib, self.runtime_s
        )
    }
}

/// Packet durations [fs] a scenario will use.
pub fn scenario_sigmas(cfg: &ScenarioConfig, coupling: &DipoleCoupling) -> Vec<f64> {
    match cfg.scenario {
        Scenario::PhaseSizeSweep => cfg
            .sweep
            .gammas()
            .iter()
            .map(|g| g / coupling.tls.omega_21)
            .collect(),
        Scenario::ModulatedResonance | Scenario::Buildup => vec![],
        s => cfg.sweep.sigmas(s, coupling.tls.period()),
    }
}

fn regime_warning(sigma: f64, omega: f64, what: &str) -> String {
    format!(
        "outside near-point-particle validity (t_r, sigma_et < 1/omega_21): {what} sigma_et = {sigma:.4e} fs gives omega_21 sigma_et = {:.3}",
        omega * sigma
    )
}

pub fn validate(cfg: &ScenarioConfig) -> Report {
    let mut r = Report {
        scenario: cfg.scenario.name().to_string(),
        ..Default::default()
    };
    let n = cfg.numerics.grid_points;
    if cfg.scenario.uses_joint_solver() {
        if n % 2 != 0 {
            r.errors.push(format!("numerics.grid_points must be even, got {n}"));
        }
        if !(16..=MAX_GRID_POINTS).contains(&n) {
            r.errors.push(format!(
                "numerics.grid_points must lie in [16, {MAX_GRID_POINTS}], got {n}"
            ));
        }
    }
    if let Some(dt) = cfg.numerics.dt_fs {
        if !(dt > 0.0) {
            r.errors.push(format!("numerics.dt_fs must be positive, got {dt}"));
        }
    }
    let w = &cfg.numerics;
    if w.transit_multiple < 10.0 || w.width_multiple < 6.0 {
        r.errors.push(format!(
            "interaction window must cover at least 10 t_r + 6 sigma_et (got transit_multiple {}, width_multiple {})",
            w.transit_multiple, w.width_multiple
        ));
    }
    if w.steps_per_scale < 20.0 {
        r.errors.push(format!(
            "numerics.steps_per_scale must be at least 20, got {}",
            w.steps_per_scale
        ));
    }
    if w.samples == 0 {
        r.errors.push("numerics.samples must be positive".into());
    }

    let coupling = match cfg.physics.coupling() {
        Ok(c) => c,
        Err(e) => {
            r.errors.push(format!("physics: {e}"));
            return r;
        }
    };
    let omega = coupling.tls.omega_21;
    let t_r = coupling.geometry.transit_time;
    let window = w.window();

    r.notes.push(format!(
        "gamma = {:.7}, v0 = {:.4} nm/fs, t_r = {:.4} as, T21 = {:.4} fs, omega_21 t_r = {:.4}",
        coupling.kin.gamma,
        coupling.kin.v0,
        t_r * 1e3,
        coupling.tls.period(),
        omega * t_r
    ));
    if omega * t_r >= 1.0 {
        r.warnings.push(format!(
            "outside near-point-particle validity (t_r, sigma_et < 1/omega_21): omega_21 t_r = {:.3}",
            omega * t_r
        ));
    }
    let single = p2_from_ground(&coupling, cfg.physics.prefactor);
    if single.has(&RegimeFlag::PerturbativeValidityExceeded) {
        r.warnings.push(format!(
            "single-electron excitation probability {:.3e} exceeds the perturbative range",
            single.value
        ));
    } else {
        r.notes.push(format!("single-electron point-particle P2 = {:.4e}", single.value));
    }
    if coupling.orientation == DipoleOrientation::Transverse {
        r.notes.push(format!(
            "window +-{} t_r captures {:.4}% of the transverse kernel area",
            w.transit_multiple,
            100.0 * transverse_kernel_captured_fraction(w.transit_multiple)
        ));
    }

    let sigmas = scenario_sigmas(cfg, &coupling);
    for &s in &sigmas {
        if !(s > 0.0) {
            r.errors.push(format!("packet duration must be positive, got {s} fs"));
        }
    }
    if !r.errors.is_empty() {
        return r;
    }

    match cfg.scenario {
        Scenario::PhaseSizeSweep => {
            let sw = &cfg.sweep;
            if !(sw.gamma_min > 0.0) || sw.gamma_max < sw.gamma_min {
                r.errors.push(format!(
                    "sweep.gamma_min must be positive and not above gamma_max (got {}, {})",
                    sw.gamma_min, sw.gamma_max
                ));
            }
            if sw.zeta_points < 4 || sw.zeta_points % 2 != 0 {
                r.errors.push(format!(
                    "sweep.zeta_points must be even and at least 4, got {}",
                    sw.zeta_points
                ));
            }
        }
        Scenario::ModulatedResonance => {
            if cfg.sweep.harmonics.iter().any(|&h| h < 1) || cfg.sweep.harmonics.is_empty() {
                r.errors.push("sweep.harmonics must be positive integers".into());
            }
            if cfg.sweep.scan_points < 5 {
                r.errors.push("sweep.scan_points must be at least 5".into());
            }
        }
        Scenario::Buildup => {
            let b = &cfg.buildup;
            if b.n_correlated < 3 || b.n_random < 2 || b.seeds == 0 {
                r.errors.push(format!(
                    "buildup needs n_correlated >= 3, n_random >= 2, seeds >= 1 (got {}, {}, {})",
                    b.n_correlated, b.n_random, b.seeds
                ));
            }
            if b.seeds < 32 {
                r.warnings.push(format!(
                    "{} seeds: the random-train mean is noisy below 32",
                    b.seeds
                ));
            }
        }
        _ => {}
    }
    if cfg.scenario == Scenario::ModulatedResonance || cfg.scenario == Scenario::Buildup {
        let m = &cfg.modulation;
        if !(m.g_abs > 0.0) || !(m.omega_b_ratio > 0.0) || !(m.sigma_et_fs > 0.0) {
            r.errors.push("modulation: g_abs, omega_b_ratio and sigma_et_fs must be positive".into());
        } else {
            match m.beam(&coupling) {
                Ok((q, _)) => {
                    let bunch = cfg.buildup.sigma_et_point_fs.unwrap_or_else(|| bunch_rms_duration(&q));
                    if omega * bunch > 1.0 {
                        r.warnings.push(regime_warning(bunch, omega, "bunch"));
                    } else {
                        r.notes.push(format!(
                            "bunch duration {:.4e} fs, omega_21 sigma = {:.3}",
                            bunch,
                            omega * bunch
                        ));
                    }
                }
                Err(e) => r.errors.push(format!("modulation: {e}")),
            }
        }
    }

    let mut runtime = 0.0;
    let mut memory: f64 = 1.0;
    for &s in &sigmas {
        let g = omega * s;
        if cfg.scenario.uses_born_model() && g > 1.0 {
            r.warnings.push(regime_warning(s, omega, "packet"));
        }
        if !cfg.scenario.uses_joint_solver() {
            continue;
        }
        let q = match GaussianQewSpec::from_duration(coupling.kin, s, 0.0) {
            Ok(q) => q,
            Err(e) => {
                r.errors.push(e.to_string());
                continue;
            }
        };
        let grid = match build_grid(&coupling.kin, q.sigma_p0, -coupling.tls.energy_gap / coupling.kin.v0, n) {
            Ok(g) => g,
            Err(e) => {
                r.errors.push(format!("sigma_et = {s:.4e} fs: {e}"));
                continue;
            }
        };
        let hw = window.half_width(&coupling, s);
        if let Err(e) = check_periodic_images(&grid, coupling.kin.v0, hw, q.sigma_z0, coupling.kernel_width()) {
            r.errors.push(format!("sigma_et = {s:.4e} fs: {e}"));
        }
        let dim = (2 * n) as f64;
        runtime += EIGEN_COST * dim.powi(3);
        memory = memory.max(4.0 * dim * dim * 16.0 / (1024.0 * 1024.0));
        if cfg.scenario == Scenario::SolverCrosscheck {
            let solver = MomentumSolver::new(&grid, &coupling);
            let dt = cfg.numerics.dt_fs.unwrap_or_else(|| solver.default_dt());
            let steps = (2.0 * hw / dt).ceil();
            runtime += STEP_COST * steps * (n * n) as f64;
        }
    }
    if cfg.scenario == Scenario::Buildup {
        runtime += 1e-6 * (cfg.buildup.seeds * cfg.buildup.n_random) as f64 + 0.5;
    }
    if cfg.scenario == Scenario::ModulatedResonance {
        runtime += 0.3 * cfg.sweep.born_detunings.len() as f64;
    }
    if cfg.scenario == Scenario::SinglePoint {
        runtime += 0.1 * sigmas.len() as f64;
    }
    r.memory_mib = memory;
    r.runtime_s = runtime;
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text).unwrap()
    }

    #[test]
    fn defaults_are_valid() {
        for s in Scenario::ALL {
            let r = validate(&ScenarioConfig::for_scenario(s));
            assert!(r.is_valid(), "{r}");
            assert!(r.to_string().contains(": valid"));
        }
    }

    #[test]
    fn odd_grid_is_an_error() {
        let r = validate(&cfg("scenario = \"fig3_ground\"\n[numerics]\ngrid_points = 17\n"));
        assert!(!r.is_valid());
        assert!(r.errors[0].contains("even"), "{r}");
    }

    #[test]
    fn long_packet_in_born_model_warns() {
        let r = validate(&cfg("scenario = \"fig8_single_point\"\n[sweep]\nsigma_fractions = [10.0]\n"));
        assert!(r.is_valid());
        assert!(r
            .warnings
            .iter()
            .any(|w| w.starts_with("outside near-point-particle validity (t_r, sigma_et < 1/omega_21)")));
        let q = validate(&cfg("scenario = \"fig3_ground\"\n[sweep]\nsigma_fractions = [1.0]\n"));
        assert!(q.warnings.iter().all(|w| !w.starts_with("outside")));
    }

    #[test]
    fn short_window_rejected() {
        let r = validate(&cfg("scenario = \"fig3_ground\"\n[numerics]\ntransit_multiple = 5.0\n"));
        assert!(!r.is_valid());
    }

    #[test]
    fn bad_physics_reported() {
        let r = validate(&cfg("scenario = \"fig3_ground\"\n[physics]\ndipole_debye = -1.0\n"));
        assert!(r.errors[0].starts_with("physics:"), "{r}");
    }
}
