//! Gaussian and PINEM-modulated electron wavepackets.
//!
//! Momentum amplitudes are interaction-picture values c_p = A(p) e^{iE_p t₀/ħ},
//! so that free propagation brings the packet to its longitudinal waist at
//! z = 0 at time t₀.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{FeberiError, Result};
use crate::grid::MomentumGrid;
use crate::kinematics::ElectronKinematics;
use crate::special::{bessel_j_cutoff, bessel_j_sequence};

/// Probability that may be lost to grid truncation when sampling a packet.
pub const MAX_SAMPLING_LOSS: f64 = 1e-6;
/// Sideband cutoff: keep |n| while |J_n(2|g|)| ≥ this.
pub const SIDEBAND_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianQewSpec {
    pub kin: ElectronKinematics,
    /// [eV·fs/nm]
    pub sigma_p0: f64,
    /// [nm]
    pub sigma_z0: f64,
    /// [fs]
    pub sigma_et: f64,
    /// Centroid arrival time at z = 0 [fs].
    pub t0: f64,
}

impl GaussianQewSpec {
    /// Packet of arrival-time spread `sigma_et` [fs], waist at z = 0 at `t0`.
    pub fn from_duration(kin: ElectronKinematics, sigma_et: f64, t0: f64) -> Result<Self> {
        if !(sigma_et > 0.0) || !(kin.v0 > 0.0) {
            return Err(FeberiError::Domain(format!(
                "wavepacket duration and beam speed must be positive (sigma_et = {sigma_et})"
            )));
        }
        let sigma_z0 = kin.v0 * sigma_et;
        Ok(Self {
            kin,
            sigma_p0: HBAR / (2.0 * sigma_z0),
            sigma_z0,
            sigma_et,
            t0,
        })
    }

    pub fn from_momentum_spread(kin: ElectronKinematics, sigma_p0: f64, t0: f64) -> Result<Self> {
        if !(sigma_p0 > 0.0) {
            return Err(FeberiError::Domain(format!(
                "momentum spread must be positive, got {sigma_p0}"
            )));
        }
        Self::from_duration(kin, HBAR / (2.0 * sigma_p0 * kin.v0), t0)
    }

    pub fn with_arrival(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// RMS length at time t under the quadratic dispersion.
    pub fn sigma_z_at(&self, t: f64) -> f64 {
        let tau = t - self.t0;
        let spread = HBAR * tau / (2.0 * self.kin.longitudinal_mass() * self.sigma_z0 * self.sigma_z0);
        self.sigma_z0 * (1.0 + spread * spread).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedQewSpec {
    pub base: GaussianQewSpec,
    /// PINEM coupling; sideband n carries J_n(2|g|) e^{in(φ_b + arg g)}.
    pub g: Complex64,
    /// [rad/fs]
    pub omega_b: f64,
    pub phi_b: f64,
    /// Drift time between the modulation and the interaction point [fs].
    pub t_drift: f64,
    /// ħω_b/v₀ [eV·fs/nm].
    pub delta_p: f64,
}

impl ModulatedQewSpec {
    pub fn new(base: GaussianQewSpec, g: Complex64, omega_b: f64, phi_b: f64, t_drift: f64) -> Result<Self> {
        if !(omega_b > 0.0) {
            return Err(FeberiError::Domain(format!(
                "modulation frequency must be positive, got {omega_b}"
            )));
        }
        let period = std::f64::consts::TAU / omega_b;
        if !(base.sigma_et > period) {
            return Err(FeberiError::Domain(format!(
                "envelope ({:.3} fs) must be longer than one modulation period ({period:.3} fs)",
                base.sigma_et
            )));
        }
        Ok(Self {
            base,
            g,
            omega_b,
            phi_b,
            t_drift,
            delta_p: HBAR * omega_b / base.kin.v0,
        })
    }

    /// Modulated packet whose drift maximizes the fundamental bunching harmonic.
    pub fn with_optimal_drift(base: GaussianQewSpec, g: Complex64, omega_b: f64, phi_b: f64) -> Result<Self> {
        let probe = Self::new(base, g, omega_b, phi_b, 0.0)?;
        let theta = optimal_drift_phase(g.norm());
        Ok(Self {
            t_drift: probe.drift_time_for_phase(theta),
            ..probe
        })
    }

    /// θ_D = δp² t_D / (2γ³mħ): quadratic drift phase per sideband index squared.
    pub fn drift_phase(&self) -> f64 {
        self.delta_p * self.delta_p * self.t_drift / (2.0 * self.base.kin.longitudinal_mass() * HBAR)
    }

    pub fn drift_time_for_phase(&self, theta: f64) -> f64 {
        theta * 2.0 * self.base.kin.longitudinal_mass() * HBAR / (self.delta_p * self.delta_p)
    }

    pub fn sideband_phase(&self) -> f64 {
        self.phi_b + self.g.arg()
    }

    /// Modulation reference time t_L = t₀ + φ/ω_b where the periodic factor has phase zero.
    pub fn t_l(&self) -> f64 {
        self.base.t0 + self.sideband_phase() / self.omega_b
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_b
    }

    pub fn sideband_cutoff(&self) -> usize {
        bessel_j_cutoff(2.0 * self.g.norm(), SIDEBAND_TOL)
    }
}

/// Drift phase maximizing |f₁| = |J₁(4|g| sin θ)|; J₁ peaks at 1.8412.
pub fn optimal_drift_phase(g_abs: f64) -> f64 {
    const J1_PEAK: f64 = 1.841_183_781_340_659;
    let s = J1_PEAK / (4.0 * g_abs);
    if s < 1.0 {
        s.asin()
    } else {
        std::f64::consts::FRAC_PI_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QewSpec {
    Gaussian(GaussianQewSpec),
    Modulated(ModulatedQewSpec),
}

impl QewSpec {
    pub fn base(&self) -> &GaussianQewSpec {
        match self {
            QewSpec::Gaussian(g) => g,
            QewSpec::Modulated(m) => &m.base,
        }
    }

    pub fn amplitudes(&self, grid: &MomentumGrid) -> Result<Vec<Complex64>> {
        match self {
            QewSpec::Gaussian(g) => gaussian_momentum_amplitudes(g, grid),
            QewSpec::Modulated(m) => modulated_momentum_amplitudes(m, grid),
        }
    }
}

fn finish_amplitudes(mut c: Vec<Complex64>, grid: &MomentumGrid, analytic_norm: f64, what: &str) -> Result<Vec<Complex64>> {
    let mass: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dp;
    let loss = (1.0 - mass / analytic_norm).abs();
    if loss > MAX_SAMPLING_LOSS {
        return Err(FeberiError::Truncation {
            what: what.into(),
            mass: loss,
            limit: MAX_SAMPLING_LOSS,
        });
    }
    let s = 1.0 / mass.sqrt();
    for v in &mut c {
        *v *= s;
    }
    Ok(c)
}

/// c_{p_n} ∝ exp(−(p_n−p₀)²/4σ²) e^{iE_{p_n} t₀/ħ}, normalized so Σ|c|²Δp = 1.
pub fn gaussian_momentum_amplitudes(spec: &GaussianQewSpec, grid: &MomentumGrid) -> Result<Vec<Complex64>> {
    let s = spec.sigma_p0;
    let pref = (std::f64::consts::TAU * s * s).powf(-0.25);
    let c = grid
        .points
        .iter()
        .map(|&p| {
            let d = p - spec.kin.p0;
            let amp = pref * (-d * d / (4.0 * s * s)).exp();
            Complex64::from_polar(amp, spec.kin.dispersion(p) * spec.t0 / HBAR)
        })
        .collect();
    finish_amplitudes(c, grid, 1.0, "Gaussian wavepacket on momentum grid")
}

/// Bessel-weighted Gaussian sidebands with the quadratic drift phase.
pub fn modulated_momentum_amplitudes(spec: &ModulatedQewSpec, grid: &MomentumGrid) -> Result<Vec<Complex64>> {
    let b = &spec.base;
    let s = b.sigma_p0;
    let pref = (std::f64::consts::TAU * s * s).powf(-0.25);
    let nmax = spec.sideband_cutoff();
    let j = bessel_j_sequence(nmax, 2.0 * spec.g.norm());
    let phase = spec.sideband_phase();
    let mt = b.kin.longitudinal_mass();
    let sidebands: Vec<(f64, Complex64)> = (-(nmax as i64)..=nmax as i64)
        .map(|n| {
            let jn = if n < 0 && n % 2 != 0 { -j[n.unsigned_abs() as usize] } else { j[n.unsigned_abs() as usize] };
            (n as f64 * spec.delta_p, Complex64::from_polar(jn, n as f64 * phase))
        })
        .collect();
    let c = grid
        .points
        .iter()
        .map(|&p| {
            let d = p - b.kin.p0;
            let mut sum = Complex64::new(0.0, 0.0);
            for (shift, w) in &sidebands {
                let e = d - shift;
                sum += w * (-e * e / (4.0 * s * s)).exp();
            }
            let drift = -d * d * spec.t_drift / (2.0 * mt * HBAR);
            sum * pref * Complex64::from_polar(1.0, drift + b.kin.dispersion(p) * b.t0 / HBAR)
        })
        .collect();
    // sidebands are well separated when σ_et spans several periods, so Σ J_n² = 1
    let analytic: f64 = sidebands.iter().map(|(_, w)| w.norm_sqr()).sum();
    finish_amplitudes(c, grid, analytic, "modulated wavepacket sidebands on momentum grid")
}

/// ψ(z, t) from interaction-picture momentum amplitudes, with the carrier e^{ip₀z/ħ} removed.
pub fn position_amplitudes(
    c: &[Complex64],
    grid: &MomentumGrid,
    kin: &ElectronKinematics,
    t: f64,
    z: &[f64],
) -> Vec<Complex64> {
    let pref = grid.dp / (std::f64::consts::TAU * HBAR).sqrt();
    let evolved: Vec<Complex64> = c
        .iter()
        .zip(&grid.points)
        .map(|(a, &p)| a * Complex64::from_polar(1.0, -kin.dispersion(p) * t / HBAR))
        .collect();
    z.iter()
        .map(|&zz| {
            // phase recurrence e^{i(p_n−p₀)z/ħ} with p_n descending by Δp
            let start = Complex64::from_polar(1.0, (grid.points[0] - grid.p0) * zz / HBAR);
            let step = Complex64::from_polar(1.0, -grid.dp * zz / HBAR);
            let mut ph = start;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, a) in evolved.iter().enumerate() {
                if k % 64 == 0 {
                    ph = Complex64::from_polar(1.0, (grid.points[k] - grid.p0) * zz / HBAR);
                }
                acc += a * ph;
                ph *= step;
            }
            acc * pref
        })
        .collect()
}

/// Electron probability density n(z, t) [1/nm].
pub fn density_profile(spec: &QewSpec, t: f64, z: &[f64]) -> Result<Vec<f64>> {
    match spec {
        QewSpec::Gaussian(g) => {
            let sz = g.sigma_z_at(t);
            let center = g.kin.v0 * (t - g.t0);
            let norm = 1.0 / ((std::f64::consts::TAU).sqrt() * sz);
            Ok(z
                .iter()
                .map(|&zz| norm * (-(zz - center).powi(2) / (2.0 * sz * sz)).exp())
                .collect())
        }
        QewSpec::Modulated(m) => {
            let grid = modulated_transform_grid(m, z)?;
            let c = modulated_momentum_amplitudes(m, &grid)?;
            Ok(position_amplitudes(&c, &grid, &m.base.kin, t, z)
                .iter()
                .map(|v| v.norm_sqr())
                .collect())
        }
    }
}

/// Momentum grid fine enough that its conjugate period covers the requested
/// z-range plus the packet, and wide enough for every sideband.
fn modulated_transform_grid(m: &ModulatedQewSpec, z: &[f64]) -> Result<MomentumGrid> {
    let b = &m.base;
    let p_cut = m.sideband_cutoff() as f64 * m.delta_p + 9.0 * b.sigma_p0;
    let (zmin, zmax) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let extent = if z.is_empty() { 0.0 } else { zmax - zmin };
    let span = 2.0 * (extent + 16.0 * b.sigma_z0);
    let dp = (std::f64::consts::TAU * HBAR / span).min(b.sigma_p0 / 3.0);
    let mut n = (2.0 * p_cut / dp).ceil() as usize;
    n += n % 2;
    if n > 1 << 22 {
        return Err(FeberiError::Resolution(format!(
            "density transform would need {n} momentum points"
        )));
    }
    MomentumGrid::with_cutoff(b.kin.p0, p_cut, n.max(64))
}

/// Γ = ω σ_et.
pub fn gamma_parameter(omega: f64, sigma_et: f64) -> f64 {
    omega * sigma_et
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpectrum {
    /// f_m for m = −M..=M, stored at index m + M.
    pub coefficients: Vec<Complex64>,
    pub omega_b: f64,
    pub m_max: usize,
}

impl ModulationSpectrum {
    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.m_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(m + self.m_max as i64) as usize]
        }
    }

    /// Σ_m f_m e^{imω_b τ}.
    pub fn evaluate(&self, tau: f64) -> f64 {
        let mut s = self.get(0).re;
        for m in 1..=self.m_max as i64 {
            s += 2.0 * (self.get(m) * Complex64::from_polar(1.0, m as f64 * self.omega_b * tau)).re;
        }
        s
    }

    /// Harmonic n minimizing |ω − nω_b|; half-integer ties go to the lower n.
    pub fn nearest_harmonic(&self, omega: f64) -> (i64, bool) {
        nearest_harmonic(omega, self.omega_b)
    }
}

/// Harmonic n minimizing |ω − nω_b|, with a flag set on exact half-integer ties.
pub fn nearest_harmonic(omega: f64, omega_b: f64) -> (i64, bool) {
    let r = omega / omega_b;
    let lo = r.floor();
    let frac = r - lo;
    if (frac - 0.5).abs() < 1e-12 {
        (lo as i64, true)
    } else {
        (r.round() as i64, false)
    }
}

/// Periodic bunching factor of the density at the interaction point,
/// |Σ_n J_n(2|g|) e^{−inω_b τ} e^{−in²θ_D}|², τ = t − t_L; unit mean.
pub fn periodic_factor(spec: &ModulatedQewSpec, tau: f64) -> f64 {
    let nmax = spec.sideband_cutoff();
    let j = bessel_j_sequence(nmax, 2.0 * spec.g.norm());
    periodic_factor_with(&j, spec.drift_phase(), spec.omega_b, tau)
}

fn periodic_factor_with(j: &[f64], theta: f64, omega_b: f64, tau: f64) -> f64 {
    let nmax = j.len() as i64 - 1;
    let mut s = Complex64::new(0.0, 0.0);
    for n in -nmax..=nmax {
        let a = n.unsigned_abs() as usize;
        let jn = if n < 0 && a % 2 == 1 { -j[a] } else { j[a] };
        let nf = n as f64;
        s += Complex64::from_polar(jn, -nf * omega_b * tau - nf * nf * theta);
    }
    s.norm_sqr()
}

/// Fourier coefficients f_m (|m| ≤ M) of the periodic density factor by
/// discrete Fourier analysis over one period.
pub fn modulation_fourier_coefficients(spec: &ModulatedQewSpec, m_max: usize) -> Result<ModulationSpectrum> {
    let nmax = spec.sideband_cutoff();
    let j = bessel_j_sequence(nmax, 2.0 * spec.g.norm());
    let theta = spec.drift_phase();
    // the factor holds harmonics up to 2·nmax; sample well past that to avoid aliasing
    let samples = (64 * m_max.max(1)).max(8 * (2 * nmax + 1)).next_power_of_two();
    let period = spec.period();
    let vals: Vec<f64> = (0..samples)
        .map(|k| periodic_factor_with(&j, theta, spec.omega_b, k as f64 * period / samples as f64))
        .collect();
    let dft = |m: i64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in vals.iter().enumerate() {
            let ang = -std::f64::consts::TAU * m as f64 * k as f64 / samples as f64;
            acc += v * Complex64::from_polar(1.0, ang);
        }
        acc / samples as f64
    };
    let f0 = dft(0).re;
    if !(f0 > 0.0) {
        return Err(FeberiError::Resolution("modulation factor has non-positive mean".into()));
    }
    // content near the Nyquist harmonic means the sampling aliases
    let nyq = dft(samples as i64 / 2 - 1).norm() / f0;
    if nyq > 1e-10 {
        return Err(FeberiError::Resolution(format!(
            "modulation sampling too coarse: harmonic {} carries {nyq:.2e}",
            samples / 2 - 1
        )));
    }
    if vals.iter().any(|&v| v < -1e-12) {
        return Err(FeberiError::Resolution("sampled modulation density is negative".into()));
    }
    let coefficients = (-(m_max as i64)..=m_max as i64).map(|m| dft(m) / f0).collect();
    Ok(ModulationSpectrum {
        coefficients,
        omega_b: spec.omega_b,
        m_max,
    })
}

/// RMS-equivalent duration FWHM/(2√(2 ln 2)) of one density bunch [fs].
pub fn bunch_rms_duration(spec: &ModulatedQewSpec) -> f64 {
    let nmax = spec.sideband_cutoff();
    let j = bessel_j_sequence(nmax, 2.0 * spec.g.norm());
    let theta = spec.drift_phase();
    let samples = 8192.max(64 * (2 * nmax + 1));
    let period = spec.period();
    let h = period / samples as f64;
    let vals: Vec<f64> = (0..samples)
        .map(|k| periodic_factor_with(&j, theta, spec.omega_b, k as f64 * h))
        .collect();
    let (imax, vmax) = vals
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let half = 0.5 * vmax;
    let at = |k: i64| vals[k.rem_euclid(samples as i64) as usize];
    let crossing = |dir: i64| -> f64 {
        let mut k = imax as i64;
        for _ in 0..samples {
            let next = k + dir;
            if at(next) < half {
                let frac = (at(k) - half) / (at(k) - at(next));
                return ((k - imax as i64) as f64 + dir as f64 * frac).abs() * h;
            }
            k = next;
        }
        0.5 * period
    };
    let fwhm = crossing(1) + crossing(-1);
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, MomentumGrid};
    use crate::kinematics::kinematics_from_kinetic_energy;
    use crate::special::bessel_jn;

    fn kin() -> ElectronKinematics {
        kinematics_from_kinetic_energy(200e3).unwrap()
    }

    fn t21() -> f64 {
        std::f64::consts::TAU * HBAR / 2.0
    }

    #[test]
    fn waist_relations() {
        let s = GaussianQewSpec::from_duration(kin(), 0.3, 1.0).unwrap();
        assert!((s.sigma_z0 - HBAR / (2.0 * s.sigma_p0)).abs() < 1e-12);
        assert!((s.sigma_et - s.sigma_z0 / s.kin.v0).abs() < 1e-15);
        let s2 = GaussianQewSpec::from_momentum_spread(kin(), s.sigma_p0, 1.0).unwrap();
        assert!((s2.sigma_et - 0.3).abs() < 1e-14);
        assert!(GaussianQewSpec::from_duration(kin(), 0.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_amplitudes_normalized_and_peaked() {
        let spec = GaussianQewSpec::from_duration(kin(), 0.1 * t21(), 0.4).unwrap();
        let grid = build_grid(&spec.kin, spec.sigma_p0, -2.0 / spec.kin.v0, 256).unwrap();
        let c = gaussian_momentum_amplitudes(&spec, &grid).unwrap();
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dp;
        assert!((norm - 1.0).abs() < 1e-9);
        let imax = (0..c.len()).max_by(|&a, &b| c[a].norm().partial_cmp(&c[b].norm()).unwrap()).unwrap();
        assert_eq!(imax, grid.nearest(spec.kin.p0));
    }

    #[test]
    fn gaussian_second_moment() {
        let spec = GaussianQewSpec::from_duration(kin(), 0.2, 0.0).unwrap();
        let grid = MomentumGrid::with_cutoff(spec.kin.p0, 5.0 * spec.sigma_p0, 512).unwrap();
        let c = gaussian_momentum_amplitudes(&spec, &grid).unwrap();
        let m2: f64 = c
            .iter()
            .zip(&grid.points)
            .map(|(v, p)| (p - spec.kin.p0).powi(2) * v.norm_sqr())
            .sum::<f64>()
            * grid.dp;
        let s2 = spec.sigma_p0 * spec.sigma_p0;
        assert!((m2 - s2).abs() / s2 < 1e-3, "{m2} vs {s2}");
    }

    #[test]
    fn narrow_grid_is_truncation_error() {
        let spec = GaussianQewSpec::from_duration(kin(), 0.2, 0.0).unwrap();
        let grid = MomentumGrid::with_cutoff(spec.kin.p0, 2.0 * spec.sigma_p0, 256).unwrap();
        assert!(matches!(
            gaussian_momentum_amplitudes(&spec, &grid),
            Err(FeberiError::Truncation { .. })
        ));
    }

    #[test]
    fn position_transform_matches_closed_form_at_waist() {
        let spec = GaussianQewSpec::from_duration(kin(), 0.15, 0.7).unwrap();
        let grid = MomentumGrid::with_cutoff(spec.kin.p0, 10.0 * spec.sigma_p0, 512).unwrap();
        let c = gaussian_momentum_amplitudes(&spec, &grid).unwrap();
        let psi = position_amplitudes(&c, &grid, &spec.kin, spec.t0, &[0.0, spec.sigma_z0]);
        let peak = (std::f64::consts::TAU * spec.sigma_z0 * spec.sigma_z0).powf(-0.25);
        assert!((psi[0].norm() - peak).abs() / peak < 1e-6);
        let off = peak * (-0.25f64).exp();
        assert!((psi[1].norm() - off).abs() / peak < 1e-6);
    }

    #[test]
    fn gaussian_density_shape() {
        let spec = GaussianQewSpec::from_duration(kin(), 0.1, 0.0).unwrap();
        let q = QewSpec::Gaussian(spec);
        let h = spec.sigma_z0 / 50.0;
        let z: Vec<f64> = (-600..=600).map(|k| k as f64 * h).collect();
        let n = density_profile(&q, 0.0, &z).unwrap();
        let integral: f64 = n.iter().sum::<f64>() * h;
        assert!((integral - 1.0).abs() < 1e-6);
        let imax = (0..n.len()).max_by(|&a, &b| n[a].partial_cmp(&n[b]).unwrap()).unwrap();
        assert_eq!(z[imax], 0.0);
        let half = n[imax] / 2.0;
        let above: Vec<f64> = z.iter().zip(&n).filter(|(_, v)| **v >= half).map(|(zz, _)| *zz).collect();
        let fwhm = above.last().unwrap() - above[0];
        let expect = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * spec.sigma_z0;
        assert!((fwhm - expect).abs() <= 2.0 * h);
    }

    #[test]
    fn gamma_identities() {
        let k = kin();
        assert_eq!(gamma_parameter(3.0, 0.0), 0.0);
        let w = 2.0 / HBAR;
        let g = gamma_parameter(w, 0.3 * std::f64::consts::TAU / w);
        assert!((g - 0.6 * std::f64::consts::PI).abs() < 1e-12);
        for s in [0.01, 0.2, 1.7] {
            let spec = GaussianQewSpec::from_duration(k, s, 0.0).unwrap();
            let p_rec = 2.0 / k.v0;
            let beta_lambda = k.beta * std::f64::consts::TAU * crate::constants::C_LIGHT / w;
            let forms = [
                gamma_parameter(w, s),
                p_rec / (2.0 * spec.sigma_p0),
                HBAR * w / (2.0 * k.v0 * spec.sigma_p0),
                std::f64::consts::TAU * spec.sigma_z0 / beta_lambda,
            ];
            for f in &forms[1..] {
                assert!((f - forms[0]).abs() <= 1e-12 * forms[0]);
            }
        }
    }

    fn modulated(g: f64, sigma_et: f64) -> ModulatedQewSpec {
        let base = GaussianQewSpec::from_duration(kin(), sigma_et, 0.0).unwrap();
        ModulatedQewSpec::with_optimal_drift(base, Complex64::new(g, 0.0), 1.0, 0.0).unwrap()
    }

    #[test]
    fn zero_coupling_reduces_to_gaussian() {
        let m = modulated(0.0, 10.0);
        let grid = MomentumGrid::with_cutoff(m.base.kin.p0, 10.0 * m.base.sigma_p0, 256).unwrap();
        let a = modulated_momentum_amplitudes(&m, &grid).unwrap();
        let b = gaussian_momentum_amplitudes(&m.base, &grid).unwrap();
        // drift phase only; magnitudes identical
        for (x, y) in a.iter().zip(&b) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
        let m0 = ModulatedQewSpec::new(m.base, Complex64::new(0.0, 0.0), 1.0, 0.0, 0.0).unwrap();
        let a0 = modulated_momentum_amplitudes(&m0, &grid).unwrap();
        for (x, y) in a0.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn sideband_ratio() {
        let m = modulated(1.0, 20.0);
        let p_cut = (m.sideband_cutoff() as f64 + 1.0) * m.delta_p;
        let n = ((2.0 * p_cut / (m.base.sigma_p0 / 4.0)) as usize / 2) * 2;
        let grid = MomentumGrid::with_cutoff(m.base.kin.p0, p_cut, n).unwrap();
        let c = modulated_momentum_amplitudes(&m, &grid).unwrap();
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dp;
        assert!((norm - 1.0).abs() < 1e-9);
        let at = |p: f64| c[grid.nearest(p)].norm();
        let r = at(m.base.kin.p0 + m.delta_p) / at(m.base.kin.p0);
        let rm = at(m.base.kin.p0 - m.delta_p) / at(m.base.kin.p0);
        let expect = bessel_jn(1, 2.0) / bessel_jn(0, 2.0);
        assert!((r - expect).abs() < 1e-3 * expect, "{r} vs {expect}");
        assert!((rm - expect).abs() < 1e-3 * expect);
    }

    #[test]
    fn envelope_must_exceed_period() {
        let base = GaussianQewSpec::from_duration(kin(), 1.0, 0.0).unwrap();
        assert!(ModulatedQewSpec::new(base, Complex64::new(1.0, 0.0), 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn fourier_coefficients_zero_coupling() {
        let m = modulated(0.0, 10.0);
        let s = modulation_fourier_coefficients(&m, 6).unwrap();
        assert!((s.get(0).re - 1.0).abs() < 1e-12);
        for k in 1..=6 {
            assert!(s.get(k).norm() < 1e-10 && s.get(-k).norm() < 1e-10);
        }
    }

    #[test]
    fn fourier_coefficients_properties() {
        for g in [0.5, 1.0, 3.0, 6.0] {
            let m = modulated(g, 10.0);
            let s = modulation_fourier_coefficients(&m, 12).unwrap();
            assert!((s.get(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let theta = m.drift_phase();
            for k in 1..=12i64 {
                assert!((s.get(-k) - s.get(k).conj()).norm() < 1e-12);
                // closed-form bunching magnitude |J_m(4|g| sin(mθ))|
                let o = bessel_jn(k, 4.0 * g * (k as f64 * theta).sin()).abs();
                assert!((s.get(k).norm() - o).abs() < 1e-9, "g={g} m={k}: {} vs {o}", s.get(k).norm());
            }
            // optimal drift puts |f₁| at the J₁ maximum when reachable
            if 4.0 * g > 1.8412 {
                assert!((s.get(1).norm() - 0.581_865_2).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn frozen_bunching_regression() {
        let m = modulated(3.0, 10.0);
        let s = modulation_fourier_coefficients(&m, 4).unwrap();
        // regression values from the discrete Fourier path
        assert!((s.get(1).norm() - 0.581_865_2).abs() < 1e-6);
        let f2 = s.get(2).norm();
        let f2_oracle = bessel_jn(2, 12.0 * (2.0 * m.drift_phase()).sin()).abs();
        assert!((f2 - f2_oracle).abs() < 1e-10);
    }

    #[test]
    fn nearest_harmonic_ties() {
        assert_eq!(nearest_harmonic(2.0, 1.0), (2, false));
        assert_eq!(nearest_harmonic(2.4, 1.0), (2, false));
        assert_eq!(nearest_harmonic(2.5, 1.0), (2, true));
        assert_eq!(nearest_harmonic(2.6, 1.0), (3, false));
    }

    #[test]
    fn density_profile_bunches_and_harmonics() {
        // sideband envelopes drift apart by ~2θ_D v₀/ω_b per index; a long
        // envelope keeps the envelope × periodic-factor picture accurate
        let m = modulated(3.0, 16.0 * std::f64::consts::TAU);
        let q = QewSpec::Modulated(m);
        let lambda = m.base.kin.v0 * m.period();
        // around the centroid at t = t₀
        let h = lambda / 400.0;
        let z: Vec<f64> = (-1200..1200).map(|k| k as f64 * h).collect();
        let n = density_profile(&q, m.base.t0, &z).unwrap();
        // compare against envelope × periodic factor at the same points
        let env = |zz: f64| {
            (-(zz * zz) / (2.0 * m.base.sigma_z0 * m.base.sigma_z0)).exp()
                / ((std::f64::consts::TAU).sqrt() * m.base.sigma_z0)
        };
        let mut max_rel: f64 = 0.0;
        for (zz, v) in z.iter().zip(&n) {
            // z = −v₀ τ at fixed t: later arrival ↔ upstream position
            let tau = -zz / m.base.kin.v0 + m.base.t0 - m.t_l();
            let model = env(*zz) * periodic_factor(&m, tau);
            max_rel = max_rel.max((v - model).abs() / env(0.0));
        }
        assert!(max_rel < 0.03, "max deviation {max_rel}");
        // bunch peaks spaced by v₀T_b
        let ratio: Vec<f64> = z.iter().zip(&n).map(|(zz, v)| v / env(*zz)).collect();
        let top = ratio.iter().cloned().fold(0.0, f64::max);
        let peaks: Vec<f64> = (1..n.len() - 1)
            .filter(|&k| ratio[k] > ratio[k - 1] && ratio[k] >= ratio[k + 1] && ratio[k] > 0.6 * top)
            .map(|k| z[k])
            .collect();
        assert!(peaks.len() >= 4);
        for w in peaks.windows(2) {
            assert!(((w[1] - w[0]) - lambda).abs() < 3.0 * h);
        }
    }

    #[test]
    fn modulated_density_integrates_to_one() {
        let m = modulated(2.0, 7.0);
        let q = QewSpec::Modulated(m);
        let span = 8.0 * m.base.sigma_z0;
        let k = 40_000;
        let h = 2.0 * span / k as f64;
        let z: Vec<f64> = (0..=k).map(|i| -span + i as f64 * h).collect();
        let n = density_profile(&q, m.base.t0, &z).unwrap();
        let integral: f64 = n.iter().sum::<f64>() * h;
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn bunch_duration_shrinks_with_coupling() {
        let a = bunch_rms_duration(&modulated(1.0, 10.0));
        let b = bunch_rms_duration(&modulated(5.0, 10.0));
        assert!(b < a && b > 0.0);
        // ω_b = 1 rad/fs: bunches must be much shorter than the 2π fs period
        assert!(a < std::f64::consts::PI);
    }
}
