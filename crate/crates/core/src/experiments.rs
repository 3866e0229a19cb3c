//! Scenario workflows shared by the command-line runner and the acceptance
//! suite. Each function takes laboratory-unit parameters, runs one model and
//! returns plain series plus the diagnostics the scenario is judged by.

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{modulated_increments, p2_from_ground, Flagged, PrefactorConvention};
use crate::born_dynamics::{
    arrival_schedule, evolve_tls, evolve_tls_final, modulated_profile, passage_profile, run_train, PassageMatrix,
    PassageWindow, ScheduleKind,
};
use crate::constants::HBAR;
use crate::coulomb::{DipoleCoupling, TransformConvention};
use crate::error::{FeberiError, Result};
use crate::fit::{gaussian_fit, polynomial_fit, sinusoid_fit, GaussianFit, LinearFit};
use crate::kinematics::{ElectronKinematics, InteractionGeometry};
use crate::qew::{
    bunch_rms_duration, modulation_fourier_coefficients, GaussianQewSpec, ModulatedQewSpec, ModulationSpectrum,
    QewSpec,
};
use crate::solver_density::{bound_state_of, DensityPassage, DensityRun, KernelSampling};
use crate::solver_momentum::{integrate, EntangledAmplitudes, Integrator, MomentumSolver};
use crate::tls::{DipoleOrientation, TlsSpec, TlsState};

type C = Complex64;

/// Physical setup in laboratory units. Defaults are the reference
/// configuration: 200 keV beam, 2.4 nm impact parameter, 2 eV / 5 D
/// transition with a transverse dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    pub kinetic_energy_kev: f64,
    pub r_perp_nm: f64,
    pub energy_gap_ev: f64,
    pub dipole_debye: f64,
    pub orientation: DipoleOrientation,
    pub transform: TransformConvention,
    pub prefactor: PrefactorConvention,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            kinetic_energy_kev: 200.0,
            r_perp_nm: 2.4,
            energy_gap_ev: 2.0,
            dipole_debye: 5.0,
            orientation: DipoleOrientation::Transverse,
            transform: TransformConvention::Exact,
            prefactor: PrefactorConvention::HbarV0,
        }
    }
}

impl PhysicsParams {
    pub fn kinematics(&self) -> Result<ElectronKinematics> {
        ElectronKinematics::from_kinetic_energy(self.kinetic_energy_kev * 1e3)
    }

    pub fn coupling(&self) -> Result<DipoleCoupling> {
        let kin = self.kinematics()?;
        let geometry = InteractionGeometry::new(self.r_perp_nm, &kin)?;
        let tls = TlsSpec::new(self.energy_gap_ev, self.dipole_debye, self.orientation)?;
        Ok(DipoleCoupling::new(tls, geometry, kin).with_convention(self.transform))
    }
}

/// Grid and window for the joint-state solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub grid_points: usize,
    pub window: PassageWindow,
    pub sampling: KernelSampling,
    /// Output samples per passage.
    pub samples: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_points: 256,
            window: PassageWindow::default(),
            sampling: KernelSampling::BandLimited,
            samples: 200,
        }
    }
}

pub fn gaussian_passage(coupling: &DipoleCoupling, sigma_et: f64, settings: &SolverSettings) -> Result<DensityPassage> {
    let q = GaussianQewSpec::from_duration(coupling.kin, sigma_et, 0.0)?;
    DensityPassage::new(
        coupling,
        &QewSpec::Gaussian(q),
        settings.grid_points,
        &settings.window,
        settings.sampling,
    )
}

/// Time series of one joint-state passage. Energies are increments from the
/// start of the window [eV].
#[derive(Debug, Clone)]
pub struct PassageSeries {
    pub sigma_et: f64,
    pub gamma: f64,
    pub zeta: Option<f64>,
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub de_free: Vec<f64>,
    pub de_interaction: Vec<f64>,
    pub de_total: Vec<f64>,
    pub purity: Vec<f64>,
    /// ΔE_F + E₂₁ΔP₂: zero whenever the electron alone pays for the excitation.
    pub balance: Vec<f64>,
    pub rho_b: Vec<Matrix2<C>>,
}

impl PassageSeries {
    fn from_run(run: DensityRun, sigma_et: f64, coupling: &DipoleCoupling, zeta: Option<f64>) -> Self {
        let e21 = coupling.tls.energy_gap;
        let p20 = run.p2[0];
        let balance = run
            .energy
            .de_free
            .iter()
            .zip(&run.p2)
            .map(|(f, p)| f + e21 * (p - p20))
            .collect();
        Self {
            sigma_et,
            gamma: coupling.tls.omega_21 * sigma_et,
            zeta,
            p1: run.p2.iter().map(|p| 1.0 - p).collect(),
            p2: run.p2,
            times: run.times,
            de_free: run.energy.de_free,
            de_interaction: run.energy.de_interaction,
            de_total: run.energy.de_total,
            purity: run.purity,
            balance,
            rho_b: run.rho_b,
        }
    }

    pub fn final_p2(&self) -> f64 {
        *self.p2.last().expect("series has samples")
    }

    pub fn max_abs_balance(&self) -> f64 {
        self.balance.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    pub fn final_balance(&self) -> f64 {
        *self.balance.last().expect("series has samples")
    }

    pub fn sample_spacing(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }
}

/// Ground-state start, Gaussian packet of duration `sigma_et`.
pub fn ground_state_run(coupling: &DipoleCoupling, sigma_et: f64, settings: &SolverSettings) -> Result<PassageSeries> {
    let passage = gaussian_passage(coupling, sigma_et, settings)?;
    let run = passage.run(&TlsState::ground(), settings.samples);
    Ok(PassageSeries::from_run(run, sigma_et, coupling, None))
}

/// Equal superposition with Bloch phase ζ at the packet's arrival.
pub fn superposition_run(
    coupling: &DipoleCoupling,
    sigma_et: f64,
    zeta: f64,
    settings: &SolverSettings,
) -> Result<PassageSeries> {
    let passage = gaussian_passage(coupling, sigma_et, settings)?;
    let state = TlsState::equal_with_bloch_phase(zeta, passage.arrival(), coupling.tls.omega_21);
    let run = passage.run(&state, settings.samples);
    Ok(PassageSeries::from_run(run, sigma_et, coupling, Some(zeta)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundSummary {
    pub sigma_et: Vec<f64>,
    pub final_p2: Vec<f64>,
    pub analytic: Flagged<f64>,
    /// max/min − 1 over the runs.
    pub spread: f64,
    pub max_analytic_deviation: f64,
}

impl GroundSummary {
    pub fn new(runs: &[PassageSeries], analytic: Flagged<f64>) -> Self {
        let final_p2: Vec<f64> = runs.iter().map(|r| r.final_p2()).collect();
        let hi = final_p2.iter().cloned().fold(f64::MIN, f64::max);
        let lo = final_p2.iter().cloned().fold(f64::MAX, f64::min);
        let max_analytic_deviation = final_p2
            .iter()
            .map(|p| (p / analytic.value - 1.0).abs())
            .fold(0.0, f64::max);
        Self {
            sigma_et: runs.iter().map(|r| r.sigma_et).collect(),
            final_p2,
            analytic,
            spread: hi / lo - 1.0,
            max_analytic_deviation,
        }
    }
}

/// ΔP₂(ζ) after one passage for a fixed packet size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSizeColumn {
    pub gamma: f64,
    pub sigma_et: f64,
    pub zetas: Vec<f64>,
    pub dp2: Vec<f64>,
    /// P₂ after the same passage from the ground state.
    pub ground_p2: f64,
}

/// One eigendecomposition per size: the passage is linear in the TLS
/// amplitudes, so |1⟩ and |2⟩ are evolved once and recombined for every ζ.
pub fn phase_size_column(
    coupling: &DipoleCoupling,
    gamma: f64,
    zetas: &[f64],
    settings: &SolverSettings,
) -> Result<PhaseSizeColumn> {
    let w = coupling.tls.omega_21;
    let sigma_et = gamma / w;
    let passage = gaussian_passage(coupling, sigma_et, settings)?;
    let t = passage.duration();
    let y1 = passage.propagator.evolve_vector(&passage.initial_vector(&TlsState::ground()), t);
    let y2 = passage.propagator.evolve_vector(&passage.initial_vector(&TlsState::excited()), t);
    let ground_p2 = bound_state_of(&y1)[(1, 1)].re;
    let dp2 = zetas
        .iter()
        .map(|&z| {
            let s = TlsState::equal_with_bloch_phase(z, passage.arrival(), w);
            let x: DVector<C> = &y1 * s.c1 + &y2 * s.c2;
            bound_state_of(&x)[(1, 1)].re - s.p2()
        })
        .collect();
    Ok(PhaseSizeColumn {
        gamma,
        sigma_et,
        zetas: zetas.to_vec(),
        dp2,
        ground_p2,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSizeFit {
    /// ΔP₂ ≈ A e^{−Γ²/2} sin ζ + B e^{−Γ²}.
    pub a: f64,
    pub b: f64,
    /// Largest fit residual relative to the peak |ΔP₂|.
    pub max_residual_rel: f64,
    /// Smallest R² of a per-size sinusoid fit.
    pub min_slice_r2: f64,
    /// Sinusoid amplitude of each column.
    pub slice_amplitudes: Vec<f64>,
    /// Largest over smallest slice amplitude.
    pub enhancement: f64,
}

pub fn fit_phase_size(columns: &[PhaseSizeColumn]) -> Result<PhaseSizeFit> {
    let mut rows = vec![];
    let mut y = vec![];
    let mut min_slice_r2 = f64::INFINITY;
    let mut slice_amplitudes = vec![];
    for col in columns {
        let g2 = col.gamma * col.gamma;
        for (z, d) in col.zetas.iter().zip(&col.dp2) {
            rows.push(vec![(-0.5 * g2).exp() * z.sin(), (-g2).exp()]);
            y.push(*d);
        }
        let s = sinusoid_fit(&col.zetas, &col.dp2)?;
        min_slice_r2 = min_slice_r2.min(s.r2);
        slice_amplitudes.push(s.amplitude());
    }
    let f = crate::fit::least_squares(&rows, &y)?;
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let hi = slice_amplitudes.iter().cloned().fold(0.0, f64::max);
    let lo = slice_amplitudes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PhaseSizeFit {
        a: f.coefficients[0],
        b: f.coefficients[1],
        max_residual_rel: f.max_residual / peak,
        min_slice_r2,
        slice_amplitudes,
        enhancement: hi / lo,
    })
}

/// Largest first-order increment over ζ against √ΔP₂⁽²⁾ from the same passage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MaxIncrementCheck {
    pub gamma: f64,
    pub max_dp1: f64,
    pub sqrt_dp2: f64,
    pub rel_diff: f64,
}

/// Needs ζ samples in antipodal pairs: ΔP₂⁽¹⁾(ζ) = (ΔP₂(ζ) − ΔP₂(ζ+π))/2
/// for the equal superposition.
pub fn max_increment_check(col: &PhaseSizeColumn) -> Result<MaxIncrementCheck> {
    let n = col.zetas.len();
    if n % 2 != 0 {
        return Err(FeberiError::Domain("phase samples must come in antipodal pairs".into()));
    }
    let dp1: Vec<f64> = (0..n).map(|k| 0.5 * (col.dp2[k] - col.dp2[(k + n / 2) % n])).collect();
    let max_dp1 = sinusoid_fit(&col.zetas, &dp1)?.amplitude();
    let sqrt_dp2 = col.ground_p2.sqrt();
    Ok(MaxIncrementCheck {
        gamma: col.gamma,
        max_dp1,
        sqrt_dp2,
        rel_diff: (max_dp1 / sqrt_dp2 - 1.0).abs(),
    })
}

/// Evenly spaced phases on [0, 2π).
pub fn phase_samples(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
}

/// PINEM-modulated beam: coupling strength |g|, modulation frequency as a
/// fraction of ω₂₁, envelope duration, and harmonics kept in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationParams {
    pub g_abs: f64,
    pub omega_b_ratio: f64,
    pub phi_b: f64,
    pub sigma_et_fs: f64,
    pub harmonics: usize,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self {
            g_abs: 3.0,
            omega_b_ratio: 0.5,
            phi_b: 0.0,
            sigma_et_fs: 10.0,
            harmonics: 8,
        }
    }
}

impl ModulationParams {
    pub fn omega_b(&self, coupling: &DipoleCoupling) -> f64 {
        self.omega_b_ratio * coupling.tls.omega_21
    }

    pub fn beam(&self, coupling: &DipoleCoupling) -> Result<(ModulatedQewSpec, ModulationSpectrum)> {
        let base = GaussianQewSpec::from_duration(coupling.kin, self.sigma_et_fs, 0.0)?;
        let q = ModulatedQewSpec::with_optimal_drift(base, C::new(self.g_abs, 0.0), self.omega_b(coupling), self.phi_b)?;
        let s = modulation_fourier_coefficients(&q, self.harmonics)?;
        Ok((q, s))
    }
}

fn with_frequency(coupling: &DipoleCoupling, omega: f64) -> DipoleCoupling {
    coupling.with_tls(coupling.tls.with_energy_gap(omega * HBAR))
}

/// Ground-start ΔP₂ as the transition frequency sweeps across nω_b.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub harmonic: i64,
    pub omega: Vec<f64>,
    pub detuning: Vec<f64>,
    pub dp2: Vec<f64>,
    pub fit: GaussianFit,
    /// 1/σ_et [rad/fs].
    pub expected_half_width: f64,
    pub half_width_error: f64,
}

pub fn resonance_scan(
    coupling: &DipoleCoupling,
    params: &ModulationParams,
    harmonic: i64,
    points: usize,
    convention: PrefactorConvention,
) -> Result<ResonanceScan> {
    if harmonic < 1 || points < 5 {
        return Err(FeberiError::Domain("scan needs a positive harmonic and at least 5 points".into()));
    }
    let (q, spectrum) = params.beam(coupling)?;
    let sigma = params.sigma_et_fs;
    let center = harmonic as f64 * spectrum.omega_b;
    let span = 4.0 / sigma;
    let detuning: Vec<f64> = (0..points)
        .map(|k| -span + 2.0 * span * k as f64 / (points - 1) as f64)
        .collect();
    let omega: Vec<f64> = detuning.iter().map(|d| center + d).collect();
    let dp2: Vec<f64> = omega
        .iter()
        .map(|&w| {
            let c = with_frequency(coupling, w);
            modulated_increments(&c, &spectrum, sigma, &TlsState::ground(), q.t_l(), 0.0, convention)
                .value
                .dp2
        })
        .collect();
    let fit = gaussian_fit(&detuning, &dp2)?;
    Ok(ResonanceScan {
        harmonic,
        omega,
        detuning,
        dp2,
        fit,
        expected_half_width: 1.0 / sigma,
        half_width_error: (fit.half_width_1e * sigma - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BornSpotCheck {
    pub detuning: f64,
    pub born: f64,
    pub analytic: f64,
    pub rel_diff: f64,
}

/// Integrates the slowly-varying modulated drive from the ground state at a
/// few detunings from the given harmonic.
pub fn born_resonance_check(
    coupling: &DipoleCoupling,
    params: &ModulationParams,
    harmonic: i64,
    detunings: &[f64],
    convention: PrefactorConvention,
) -> Result<Vec<BornSpotCheck>> {
    let (q, spectrum) = params.beam(coupling)?;
    detunings
        .iter()
        .map(|&d| {
            let c = with_frequency(coupling, harmonic as f64 * spectrum.omega_b + d);
            let profile = modulated_profile(&c, &q, &spectrum, 50.0)?;
            let born = evolve_tls_final(&TlsState::ground(), &profile, c.tls.omega_21)?.p2();
            let analytic =
                modulated_increments(&c, &spectrum, params.sigma_et_fs, &TlsState::ground(), q.t_l(), 0.0, convention)
                    .value
                    .dp2;
            Ok(BornSpotCheck {
                detuning: d,
                born,
                analytic,
                rel_diff: (born / analytic - 1.0).abs(),
            })
        })
        .collect()
}

/// Point-particle passage from the ground state in the Born model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointPassage {
    pub sigma_et: f64,
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// |M̃/ħv₀|² e^{−Γ²}.
    pub analytic: f64,
}

impl PointPassage {
    pub fn final_p2(&self) -> f64 {
        *self.p2.last().expect("passage has samples")
    }
}

pub fn point_passage(
    coupling: &DipoleCoupling,
    sigma_et: f64,
    window: &PassageWindow,
    samples: usize,
    convention: PrefactorConvention,
) -> Result<PointPassage> {
    let profile = passage_profile(coupling, sigma_et, 0.0, window)?;
    let traj = evolve_tls(&TlsState::ground(), &profile, coupling.tls.omega_21)?;
    let stride = (traj.times.len() / samples.max(1)).max(1);
    let mut idx: Vec<usize> = (0..traj.times.len()).step_by(stride).collect();
    if idx.last() != Some(&(traj.times.len() - 1)) {
        idx.push(traj.times.len() - 1);
    }
    let p2: Vec<f64> = idx.iter().map(|&k| traj.states[k].p2()).collect();
    let g = coupling.tls.omega_21 * sigma_et;
    Ok(PointPassage {
        sigma_et,
        times: idx.iter().map(|&k| traj.times[k]).collect(),
        p1: idx.iter().map(|&k| traj.states[k].p1()).collect(),
        p2,
        analytic: p2_from_ground(coupling, convention).value * (-g * g).exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildupParams {
    pub n_correlated: usize,
    pub n_random: usize,
    pub seeds: usize,
    /// Mean arrival spacing in modulation periods.
    pub mean_spacing_periods: f64,
    /// Point-particle duration of each electron; the bunch RMS width when unset.
    pub sigma_et_point_fs: Option<f64>,
}

impl Default for BuildupParams {
    fn default() -> Self {
        Self {
            n_correlated: 20,
            n_random: 400,
            seeds: 128,
            mean_spacing_periods: 20.0,
            sigma_et_point_fs: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Buildup {
    pub sigma_et_point: f64,
    pub correlated: Vec<f64>,
    /// Ensemble mean over seeds.
    pub random_mean: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Coefficients (c₀, c₁, c₂) of P₂ ≈ c₀ + c₁N + c₂N².
    pub quadratic: LinearFit,
    /// Coefficients (c₀, c₁) of P₂ ≈ c₀ + c₁N.
    pub linear: LinearFit,
    /// P₂(N_max)/P₂(1) for the correlated train.
    pub correlated_ratio: f64,
    /// Random-train electron count at which the linear fit reaches the
    /// correlated train's final P₂.
    pub crossing: f64,
    pub warnings: Vec<String>,
}

/// Ground-start trains: phase-locked arrivals on the modulation grid against
/// random arrivals. Seeds are `seed`, `seed + 1`, ….
pub fn buildup(
    coupling: &DipoleCoupling,
    modulation: &ModulationParams,
    params: &BuildupParams,
    window: &PassageWindow,
    seed: u64,
) -> Result<Buildup> {
    if params.n_correlated < 3 || params.n_random < 2 || params.seeds == 0 {
        return Err(FeberiError::Domain(
            "buildup needs ≥ 3 correlated electrons, ≥ 2 random electrons and ≥ 1 seed".into(),
        ));
    }
    let (q, _) = modulation.beam(coupling)?;
    let sigma = params.sigma_et_point_fs.unwrap_or_else(|| bunch_rms_duration(&q));
    let profile = passage_profile(coupling, sigma, 0.0, window)?;
    let s0 = PassageMatrix::from_profile(&profile, coupling.tls.omega_21)?;
    let hw = window.half_width(coupling, sigma);
    let wb = q.omega_b;
    let spacing = params.mean_spacing_periods * q.period();

    let corr_sched = arrival_schedule(ScheduleKind::Correlated, params.n_correlated, wb, 0.0, spacing, seed)?;
    let corr = run_train(&TlsState::ground(), &corr_sched, &s0, hw);
    let mut warnings = corr.warnings;

    let seeds: Vec<u64> = (0..params.seeds as u64).map(|k| seed.wrapping_add(k)).collect();
    let mut sum = vec![0.0; params.n_random];
    for &s in &seeds {
        let sched = arrival_schedule(ScheduleKind::Random, params.n_random, wb, 0.0, spacing, s)?;
        let r = run_train(&TlsState::ground(), &sched, &s0, hw);
        for (acc, p) in sum.iter_mut().zip(&r.p2) {
            *acc += p;
        }
        if warnings.is_empty() {
            warnings.extend(r.warnings);
        }
    }
    let random_mean: Vec<f64> = sum.iter().map(|v| v / seeds.len() as f64).collect();

    let nc: Vec<f64> = (1..=params.n_correlated).map(|n| n as f64).collect();
    let nr: Vec<f64> = (1..=params.n_random).map(|n| n as f64).collect();
    let quadratic = polynomial_fit(&nc, &corr.p2, 2)?;
    let linear = polynomial_fit(&nr, &random_mean, 1)?;
    let last = *corr.p2.last().expect("non-empty train");
    Ok(Buildup {
        sigma_et_point: sigma,
        correlated_ratio: last / corr.p2[0],
        crossing: (last - linear.coefficients[0]) / linear.coefficients[1],
        correlated: corr.p2,
        random_mean,
        seeds,
        quadratic,
        linear,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrossCheck {
    pub sigma_et: f64,
    pub grid_points: usize,
    pub p2_momentum: f64,
    pub p2_density: f64,
    pub analytic: f64,
    pub rel_diff: f64,
    /// |‖a‖² − 1| after the momentum-space integration.
    pub norm_drift: f64,
}

/// Ground-start passage solved twice on the same grid and window: stepping
/// the coupled momentum amplitudes, and exact propagation of the joint state.
/// `dt` defaults to the solver's stability-based step.
pub fn solver_crosscheck(
    coupling: &DipoleCoupling,
    sigma_et: f64,
    settings: &SolverSettings,
    integrator: Integrator,
    dt: Option<f64>,
    convention: PrefactorConvention,
) -> Result<CrossCheck> {
    let passage = gaussian_passage(coupling, sigma_et, settings)?;
    let p2_density = passage.final_p2(&TlsState::ground());
    let grid = &passage.assembly.grid;
    let solver = MomentumSolver::new(grid, coupling);
    let start = EntangledAmplitudes::product(&TlsState::ground(), &passage.free, 0.0);
    let traj = integrate(
        &solver,
        &start,
        passage.duration(),
        dt.unwrap_or_else(|| solver.default_dt()),
        integrator,
        usize::MAX,
    )?;
    let p2_momentum = traj.last.p2(grid.dp);
    Ok(CrossCheck {
        sigma_et,
        grid_points: grid.n,
        p2_momentum,
        p2_density,
        analytic: p2_from_ground(coupling, convention).value,
        rel_diff: (p2_momentum - p2_density).abs() / p2_density,
        norm_drift: (traj.last.norm(grid.dp) - start.norm(grid.dp)).abs(),
    })
}
