//! Physical constants and unit conversions.
//!
//! Internal units: energy in eV, time in fs, length in nm. Momenta are
//! therefore in eV·fs/nm and masses in eV·fs²/nm².

/// Reduced Planck constant [eV·fs].
pub const HBAR: f64 = 0.658_211_956_9;
/// Speed of light [nm/fs].
pub const C_LIGHT: f64 = 299.792_458;
/// Electron rest energy m_e c² [eV].
pub const ELECTRON_REST_ENERGY: f64 = 510_998.95;
/// Electron rest mass [eV·fs²/nm²].
pub const ELECTRON_MASS: f64 = ELECTRON_REST_ENERGY / (C_LIGHT * C_LIGHT);
/// e²/4πε₀ [eV·nm].
pub const COULOMB_E2: f64 = 1.439_964_548;
/// One Debye expressed as a dipole length [e·nm].
pub const DEBYE_E_NM: f64 = 0.020_819_434;
/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub const FS_PER_AS: f64 = 1e-3;
pub const EV_PER_KEV: f64 = 1e3;

pub fn debye_to_e_nm(debye: f64) -> f64 {
    debye * DEBYE_E_NM
}

pub fn e_nm_to_debye(e_nm: f64) -> f64 {
    e_nm / DEBYE_E_NM
}

pub fn as_to_fs(t_as: f64) -> f64 {
    t_as * FS_PER_AS
}

pub fn fs_to_as(t_fs: f64) -> f64 {
    t_fs / FS_PER_AS
}

/// Wrap an angle into [0, 2π).
pub fn wrap_phase(phi: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let w = phi.rem_euclid(two_pi);
    // rem_euclid can return exactly 2π for tiny negative inputs
    if w >= two_pi {
        0.0
    } else {
        w
    }
}
