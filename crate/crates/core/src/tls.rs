//! Two-level system description and state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{debye_to_e_nm, wrap_phase, HBAR};
use crate::error::{FeberiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipoleOrientation {
    /// Along the electron trajectory (ẑ).
    Parallel,
    /// Along the impact-parameter direction (r̂).
    Transverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsSpec {
    /// E₂ − E₁ [eV].
    pub energy_gap: f64,
    /// [rad/fs]
    pub omega_21: f64,
    /// |r₂₁| [nm] (dipole moment in units of e·nm).
    pub dipole_length: f64,
    pub orientation: DipoleOrientation,
}

impl TlsSpec {
    pub fn new(energy_gap: f64, dipole_debye: f64, orientation: DipoleOrientation) -> Result<Self> {
        if !(energy_gap >= 0.0) {
            return Err(FeberiError::Domain(format!(
                "energy gap must be non-negative, got {energy_gap}"
            )));
        }
        if !(dipole_debye > 0.0) {
            return Err(FeberiError::Domain(format!(
                "dipole magnitude must be positive, got {dipole_debye}"
            )));
        }
        Ok(Self {
            energy_gap,
            omega_21: energy_gap / HBAR,
            dipole_length: debye_to_e_nm(dipole_debye),
            orientation,
        })
    }

    /// Period of the transition, 2π/ω₂₁ [fs].
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_21
    }

    pub fn with_energy_gap(&self, energy_gap: f64) -> Self {
        Self {
            energy_gap,
            omega_21: energy_gap / HBAR,
            ..*self
        }
    }
}

/// Interaction-picture amplitudes (C₁, C₂) of the bound electron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsState {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl TlsState {
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self> {
        let s = Self { c1, c2 };
        if (s.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(FeberiError::Domain(format!(
                "TLS state not normalized: |c1|²+|c2|² = {}",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    pub fn ground() -> Self {
        Self {
            c1: Complex64::new(1.0, 0.0),
            c2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        Self {
            c1: Complex64::new(0.0, 0.0),
            c2: Complex64::new(1.0, 0.0),
        }
    }

    /// cos(θ/2)|1⟩ + e^{iφ} sin(θ/2)|2⟩.
    pub fn superposition(theta: f64, phi: f64) -> Self {
        Self {
            c1: Complex64::new((theta / 2.0).cos(), 0.0),
            c2: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    /// Equal superposition whose Bloch phase at arrival time `t0` equals `zeta`.
    pub fn equal_with_bloch_phase(zeta: f64, t0: f64, omega_21: f64) -> Self {
        Self::superposition(std::f64::consts::FRAC_PI_2, omega_21 * t0 - zeta)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn p1(&self) -> f64 {
        self.c1.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.c2.norm_sqr()
    }

    /// Relative phase φ = arg(C₁* C₂).
    pub fn relative_phase(&self) -> f64 {
        (self.c1.conj() * self.c2).arg()
    }
}

/// ζ = ω₂₁ t₀ − arg(C₁* C₂), wrapped to [0, 2π).
pub fn bloch_phase(state: &TlsState, t0: f64, omega_21: f64) -> Result<f64> {
    if state.c1.norm() == 0.0 || state.c2.norm() == 0.0 {
        return Err(FeberiError::PhaseUndefined);
    }
    Ok(wrap_phase(omega_21 * t0 - state.relative_phase()))
}
