//! Relativistic free-electron kinematics and interaction geometry.

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, ELECTRON_MASS, ELECTRON_REST_ENERGY};
use crate::error::{FeberiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronKinematics {
    /// [eV]
    pub kinetic_energy: f64,
    pub gamma: f64,
    pub beta: f64,
    /// [nm/fs]
    pub v0: f64,
    /// [eV·fs/nm]
    pub p0: f64,
}

impl ElectronKinematics {
    pub fn from_kinetic_energy(kinetic_energy: f64) -> Result<Self> {
        kinematics_from_kinetic_energy(kinetic_energy)
    }

    /// Effective longitudinal mass γ³m entering the quadratic dispersion.
    pub fn longitudinal_mass(&self) -> f64 {
        self.gamma.powi(3) * ELECTRON_MASS
    }

    /// Free-electron energy measured from the central energy,
    /// v₀(p−p₀) + (p−p₀)²/(2γ³m).
    pub fn dispersion(&self, p: f64) -> f64 {
        let dp = p - self.p0;
        self.v0 * dp + dp * dp / (2.0 * self.longitudinal_mass())
    }

    /// Total energy γmc².
    pub fn total_energy(&self) -> f64 {
        self.gamma * ELECTRON_REST_ENERGY
    }
}

pub fn kinematics_from_kinetic_energy(kinetic_energy: f64) -> Result<ElectronKinematics> {
    if !(kinetic_energy >= 0.0) || !kinetic_energy.is_finite() {
        return Err(FeberiError::Domain(format!(
            "kinetic energy must be finite and non-negative, got {kinetic_energy}"
        )));
    }
    let gamma = 1.0 + kinetic_energy / ELECTRON_REST_ENERGY;
    // γβ = sqrt(γ²−1) written to avoid cancellation at small energies
    let t = kinetic_energy / ELECTRON_REST_ENERGY;
    let gamma_beta = (t * (2.0 + t)).sqrt();
    let beta = gamma_beta / gamma;
    let v0 = beta * C_LIGHT;
    let p0 = gamma * ELECTRON_MASS * v0;
    Ok(ElectronKinematics {
        kinetic_energy,
        gamma,
        beta,
        v0,
        p0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionGeometry {
    /// Impact parameter [nm].
    pub r_perp: f64,
    /// t_r = r⊥/(cβγ) [fs].
    pub transit_time: f64,
}

impl InteractionGeometry {
    pub fn new(r_perp: f64, kin: &ElectronKinematics) -> Result<Self> {
        Ok(Self {
            r_perp,
            transit_time: transit_time(r_perp, kin)?,
        })
    }
}

/// Interaction transit time r⊥/(cβγ) in fs.
pub fn transit_time(r_perp: f64, kin: &ElectronKinematics) -> Result<f64> {
    if !(r_perp > 0.0) {
        return Err(FeberiError::Domain(format!(
            "impact parameter must be positive, got {r_perp}"
        )));
    }
    if !(kin.beta > 0.0) {
        return Err(FeberiError::Domain(
            "electron at rest has no transit time".into(),
        ));
    }
    Ok(r_perp / (C_LIGHT * kin.beta * kin.gamma))
}
