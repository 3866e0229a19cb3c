//! Scenario configuration files: TOML with `[physics]`, `[numerics]`,
//! `[sweep]`, `[modulation]` and `[buildup]` sections. Every section is
//! optional and falls back to the reference setup; unknown keys are errors.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use feberi_core::born_dynamics::PassageWindow;
use feberi_core::constants::as_to_fs;
use feberi_core::experiments::{BuildupParams, ModulationParams, PhysicsParams, SolverSettings};
use feberi_core::solver_density::KernelSampling;
use feberi_core::solver_momentum::Integrator;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[serde(rename = "fig3_ground")]
    GroundPassage,
    #[serde(rename = "fig4_superposition")]
    SuperpositionPassage,
    #[serde(rename = "fig56_phase_size_sweep")]
    PhaseSizeSweep,
    ModulatedResonance,
    #[serde(rename = "fig8_single_point")]
    SinglePoint,
    #[serde(rename = "fig9_buildup")]
    Buildup,
    SolverCrosscheck,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::GroundPassage,
        Scenario::SuperpositionPassage,
        Scenario::PhaseSizeSweep,
        Scenario::ModulatedResonance,
        Scenario::SinglePoint,
        Scenario::Buildup,
        Scenario::SolverCrosscheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::GroundPassage => "fig3_ground",
            Scenario::SuperpositionPassage => "fig4_superposition",
            Scenario::PhaseSizeSweep => "fig56_phase_size_sweep",
            Scenario::ModulatedResonance => "modulated_resonance",
            Scenario::SinglePoint => "fig8_single_point",
            Scenario::Buildup => "fig9_buildup",
            Scenario::SolverCrosscheck => "solver_crosscheck",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::GroundPassage => {
                "ground-state start, joint density-matrix solver: P1/P2 and energy increments vs time for several packet durations; plateau vs closed form"
            }
            Scenario::SuperpositionPassage => {
                "equal-superposition start at a chosen Bloch phase: energy balance broken during the passage and restored after it"
            }
            Scenario::PhaseSizeSweep => {
                "transition increment over (packet size, Bloch phase): sinusoidal in phase, e^{-Gamma^2/2} decay in size"
            }
            Scenario::ModulatedResonance => {
                "PINEM-modulated packets: increment vs transition frequency around each harmonic of the modulation, Born-model spot checks"
            }
            Scenario::SinglePoint => "single point-like electron in the Born model: P1/P2 vs time",
            Scenario::Buildup => {
                "electron trains: phase-locked arrivals (quadratic growth) vs random arrivals (linear growth of the ensemble mean)"
            }
            Scenario::SolverCrosscheck => {
                "ground-state passage solved by momentum-space stepping and by exact joint-state propagation on one grid"
            }
        }
    }

    /// Whether the scenario drives the TLS with the semiclassical Born model.
    pub fn uses_born_model(&self) -> bool {
        matches!(
            self,
            Scenario::ModulatedResonance | Scenario::SinglePoint | Scenario::Buildup
        )
    }

    /// Whether the scenario builds the joint electron/TLS state on a momentum grid.
    pub fn uses_joint_solver(&self) -> bool {
        matches!(
            self,
            Scenario::GroundPassage | Scenario::SuperpositionPassage | Scenario::PhaseSizeSweep | Scenario::SolverCrosscheck
        )
    }

    fn default_sigma_fractions(&self) -> Vec<f64> {
        match self {
            Scenario::GroundPassage => vec![0.1, 0.3, 1.0],
            Scenario::SinglePoint => vec![0.01],
            _ => vec![0.1],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Momentum grid size N (even).
    pub grid_points: usize,
    pub integrator: Integrator,
    /// Fixed step for momentum-space stepping [fs]; 0.1/ω_max when unset.
    pub dt_fs: Option<f64>,
    /// Output samples per passage.
    pub samples: usize,
    pub sampling: KernelSampling,
    pub transit_multiple: f64,
    pub parallel_period_multiple: f64,
    pub width_multiple: f64,
    pub steps_per_scale: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let w = PassageWindow::default();
        let s = SolverSettings::default();
        Self {
            grid_points: s.grid_points,
            integrator: Integrator::Rk4,
            dt_fs: None,
            samples: s.samples,
            sampling: s.sampling,
            transit_multiple: w.transit_multiple,
            parallel_period_multiple: w.parallel_period_multiple,
            width_multiple: w.width_multiple,
            steps_per_scale: w.steps_per_scale,
        }
    }
}

impl Numerics {
    pub fn window(&self) -> PassageWindow {
        PassageWindow {
            transit_multiple: self.transit_multiple,
            parallel_period_multiple: self.parallel_period_multiple,
            width_multiple: self.width_multiple,
            steps_per_scale: self.steps_per_scale,
        }
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            grid_points: self.grid_points,
            window: self.window(),
            sampling: self.sampling,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Packet durations as fractions of the transition period.
    pub sigma_fractions: Option<Vec<f64>>,
    /// Packet durations in attoseconds; overrides `sigma_fractions`.
    pub sigma_et_as: Option<Vec<f64>>,
    /// Bloch phase at arrival for the superposition start [rad].
    pub zeta: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    /// Phase samples on [0, 2π); must be even.
    pub zeta_points: usize,
    pub harmonics: Vec<i64>,
    pub scan_points: usize,
    /// Born-model spot-check detunings in units of 1/σ_et.
    pub born_detunings: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            sigma_fractions: None,
            sigma_et_as: None,
            zeta: FRAC_PI_2,
            gamma_min: 0.1,
            gamma_max: 3.7,
            gamma_points: 19,
            zeta_points: 16,
            harmonics: vec![1, 2, 3],
            scan_points: 81,
            born_detunings: vec![0.0, 0.5, -1.0],
        }
    }
}

impl Sweep {
    /// Packet durations [fs] for the scenario.
    pub fn sigmas(&self, scenario: Scenario, period: f64) -> Vec<f64> {
        if let Some(v) = &self.sigma_et_as {
            return v.iter().map(|&a| as_to_fs(a)).collect();
        }
        self.sigma_fractions
            .clone()
            .unwrap_or_else(|| scenario.default_sigma_fractions())
            .iter()
            .map(|f| f * period)
            .collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        if self.gamma_points < 2 {
            return vec![self.gamma_min];
        }
        (0..self.gamma_points)
            .map(|k| self.gamma_min + (self.gamma_max - self.gamma_min) * k as f64 / (self.gamma_points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub physics: PhysicsParams,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub modulation: ModulationParams,
    #[serde(default)]
    pub buildup: BuildupParams,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("feberi-out")
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        // toml's message already carries the line, column and offending key
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::parse(&text).map_err(|e| ConfigError::Parse(path.to_path_buf(), e))
    }

    /// Minimal config for a built-in scenario with every default.
    #[cfg(test)]
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self::parse(&format!("scenario = \"{}\"", scenario.name())).expect("built-in scenario parses")
    }
}
