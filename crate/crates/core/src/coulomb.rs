//! Relativistic Coulomb dipole coupling between the passing electron and the
//! bound transition: spatial kernels and their momentum transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{COULOMB_E2, HBAR};
use crate::kinematics::{ElectronKinematics, InteractionGeometry};
use crate::special::bessel_k01_scaled;
use crate::tls::{DipoleOrientation, TlsSpec};

/// Normalization used for the closed-form momentum transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformConvention {
    /// Matches direct quadrature of ∫ M(z) e^{−ipz/ħ} dz.
    #[default]
    Exact,
    /// C/γ² on both orientations with an extra 1/√(2π) on the transverse form.
    ReducedSqrt2Pi,
    /// C/γ² on both orientations.
    Reduced,
}

impl TransformConvention {
    pub fn label(&self) -> &'static str {
        match self {
            TransformConvention::Exact => "exact",
            TransformConvention::ReducedSqrt2Pi => "reduced_sqrt2pi",
            TransformConvention::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleCoupling {
    pub tls: TlsSpec,
    pub geometry: InteractionGeometry,
    pub kin: ElectronKinematics,
    pub orientation: DipoleOrientation,
    pub convention: TransformConvention,
}

impl DipoleCoupling {
    pub fn new(tls: TlsSpec, geometry: InteractionGeometry, kin: ElectronKinematics) -> Self {
        Self {
            tls,
            geometry,
            kin,
            orientation: tls.orientation,
            convention: TransformConvention::Exact,
        }
    }

    pub fn with_convention(mut self, convention: TransformConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_orientation(mut self, orientation: DipoleOrientation) -> Self {
        self.orientation = orientation;
        self.tls.orientation = orientation;
        self
    }

    /// Same geometry and beam with a different dipole length [nm].
    pub fn with_dipole_length(mut self, dipole_length: f64) -> Self {
        self.tls.dipole_length = dipole_length;
        self
    }

    pub fn with_tls(mut self, tls: TlsSpec) -> Self {
        self.tls = tls;
        self.orientation = tls.orientation;
        self
    }

    /// e²|r₂₁|/4πε₀ [eV·nm²].
    pub fn strength(&self) -> f64 {
        COULOMB_E2 * self.tls.dipole_length
    }

    /// Peak of the time-domain kernel scale: C/r⊥² (parallel), Cγ/r⊥² (transverse).
    pub fn profile_scale(&self) -> f64 {
        let r = self.geometry.r_perp;
        match self.orientation {
            DipoleOrientation::Parallel => self.strength() / (r * r),
            DipoleOrientation::Transverse => self.strength() * self.kin.gamma / (r * r),
        }
    }

    /// Length scale r⊥/γ of the Lorentz-contracted kernel [nm].
    pub fn kernel_width(&self) -> f64 {
        self.geometry.r_perp / self.kin.gamma
    }

    /// Spatial kernel M(z) [eV].
    pub fn m_spatial(&self, z: f64) -> f64 {
        m_spatial(z, self)
    }

    /// Momentum transform M̃(p) [eV·nm].
    pub fn m_tilde(&self, p: f64) -> Complex64 {
        m_tilde(p, self)
    }

    /// Kernel seen by a point electron passing z = 0 at t = 0, M(v₀t) [eV].
    pub fn kernel_time(&self, t: f64) -> f64 {
        m_spatial(self.kin.v0 * t, self)
    }
}

/// M(z): parallel kernel Cγz/(γ²z²+r⊥²)^{3/2}, transverse Cγr⊥/(γ²z²+r⊥²)^{3/2}.
pub fn m_spatial(z: f64, coupling: &DipoleCoupling) -> f64 {
    let g = coupling.kin.gamma;
    let r = coupling.geometry.r_perp;
    let d = (g * g * z * z + r * r).powf(1.5);
    let num = match coupling.orientation {
        DipoleOrientation::Parallel => g * z,
        DipoleOrientation::Transverse => g * r,
    };
    coupling.strength() * num / d
}

/// M̃(p) = ∫ M(z) e^{−ipz/ħ} dz in the closed form selected by the coupling's convention.
pub fn m_tilde(p: f64, coupling: &DipoleCoupling) -> Complex64 {
    let g = coupling.kin.gamma;
    let r = coupling.geometry.r_perp;
    let c = coupling.strength();
    let (par_pref, perp_pref) = match coupling.convention {
        TransformConvention::Exact => (2.0 * c / (g * g), 2.0 * c / g),
        TransformConvention::ReducedSqrt2Pi => (
            c / (g * g),
            c / (g * g) / (2.0 * std::f64::consts::PI).sqrt(),
        ),
        TransformConvention::Reduced => (c / (g * g), c / (g * g)),
    };
    let k = p / HBAR;
    let x = p.abs() * r / (HBAR * g);
    match coupling.orientation {
        DipoleOrientation::Parallel => {
            if x == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let (k0s, _) = bessel_k01_scaled(x).expect("x > 0");
            Complex64::new(0.0, -par_pref * k * k0s * (-x).exp())
        }
        DipoleOrientation::Transverse => {
            if x == 0.0 {
                // |p| K₁(|p|r⊥/ħγ)/ħ → γ/r⊥
                return Complex64::new(perp_pref * g / r, 0.0);
            }
            let (_, k1s) = bessel_k01_scaled(x).expect("x > 0");
            Complex64::new(perp_pref * k.abs() * k1s * (-x).exp(), 0.0)
        }
    }
}
