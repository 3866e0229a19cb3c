//! Time-domain probabilistic model: the arrival-time density weights the
//! point-electron kernel, and the TLS amplitudes follow the resulting
//! classical drive. Includes arrival schedules and electron-train buildup.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::constants::HBAR;
use crate::coulomb::DipoleCoupling;
use crate::error::{FeberiError, Result};
use crate::qew::{ModulatedQewSpec, ModulationSpectrum};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::tls::{DipoleOrientation, TlsState};

/// Below this σ_et/t_r the convolution is replaced by the bare kernel.
const POINT_LIMIT: f64 = 1e-3;
const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Extent and resolution of a single passage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageWindow {
    /// Half-width in units of t_r.
    pub transit_multiple: f64,
    /// Lower bound on the half-width in units of T₂₁ for the parallel
    /// dipole: its kernel falls only as 1/t², so the resonant component
    /// needs ωW ≳ 2π. The transverse kernel (1/t³) does not need it.
    pub parallel_period_multiple: f64,
    /// Extra half-width in units of σ_et.
    pub width_multiple: f64,
    /// RK4 steps per shortest time scale.
    pub steps_per_scale: f64,
}

impl Default for PassageWindow {
    fn default() -> Self {
        Self {
            transit_multiple: 40.0,
            parallel_period_multiple: 1.0,
            width_multiple: 6.0,
            steps_per_scale: 50.0,
        }
    }
}

impl PassageWindow {
    pub fn half_width(&self, coupling: &DipoleCoupling, sigma_et: f64) -> f64 {
        let t_r = coupling.geometry.transit_time;
        let floor = match coupling.orientation {
            DipoleOrientation::Parallel => self.parallel_period_multiple * coupling.tls.period(),
            DipoleOrientation::Transverse => 0.0,
        };
        (self.transit_multiple * t_r).max(floor) + self.width_multiple * sigma_et
    }

    /// RK4 step: min(t_r, σ_et, T₂₁)/steps_per_scale (σ_et ignored when zero).
    pub fn step(&self, coupling: &DipoleCoupling, sigma_et: f64) -> f64 {
        let mut s = coupling.geometry.transit_time.min(coupling.tls.period());
        if sigma_et > 0.0 {
            s = s.min(sigma_et);
        }
        s / self.steps_per_scale
    }
}

/// Uniform sample times start + k·spacing, k = 0..len.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub spacing: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Samples at RK4 half-steps covering the passage window around `t0`.
    pub fn for_passage(coupling: &DipoleCoupling, sigma_et: f64, t0: f64, window: &PassageWindow) -> Self {
        let w = window.half_width(coupling, sigma_et);
        let h = 0.5 * window.step(coupling, sigma_et);
        // symmetric about t0 so odd/even profiles sample exactly
        let steps = (w / h).ceil() as usize;
        Self {
            start: t0 - steps as f64 * h,
            spacing: h,
            len: 2 * steps + 1,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.spacing
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionProfile {
    pub grid: TimeGrid,
    /// f(t − t₀) [eV] at each grid time.
    pub values: Vec<f64>,
    pub t0: f64,
    pub orientation: DipoleOrientation,
    /// σ_et/t_r.
    pub sigma_bar_et: f64,
}

impl InteractionProfile {
    pub fn times(&self) -> Vec<f64> {
        (0..self.grid.len).map(|k| self.grid.time(k)).collect()
    }

    /// Trapezoid integral of the sampled profile [eV·fs].
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        self.grid.spacing * (inner + 0.5 * (v[0] + v[v.len() - 1]))
    }

    /// Same samples, shifted to a new arrival time.
    pub fn shifted(&self, t0: f64) -> Self {
        let mut p = self.clone();
        p.grid.start += t0 - self.t0;
        p.t0 = t0;
        p
    }

    #[cfg(test)]
    fn zero(grid: TimeGrid, t0: f64, orientation: DipoleOrientation) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len],
            t0,
            orientation,
            sigma_bar_et: 0.0,
        }
    }
}

fn gaussian_density(s: f64, sigma: f64) -> f64 {
    (-0.5 * (s / sigma).powi(2)).exp() / ((TAU).sqrt() * sigma)
}

/// f(s) = ∫ M(v₀t′) f_et(s − t′) dt′ for a Gaussian arrival density of width σ_et.
pub fn profile_value(coupling: &DipoleCoupling, sigma_et: f64, s: f64) -> f64 {
    let t_r = coupling.geometry.transit_time;
    if sigma_et < POINT_LIMIT * t_r {
        return coupling.kernel_time(s);
    }
    let lo = s - 12.0 * sigma_et;
    let hi = s + 12.0 * sigma_et;
    let breaks: Vec<f64> = [-5.0 * t_r, -t_r, 0.0, t_r, 5.0 * t_r, s]
        .into_iter()
        .filter(|&b| b > lo && b < hi)
        .collect();
    let opts = QuadOptions {
        abs_tol: 1e-13 * coupling.profile_scale(),
        rel_tol: 1e-10,
        max_intervals: 2000,
    };
    integrate_with_breaks(
        |tp| coupling.kernel_time(tp) * gaussian_density(s - tp, sigma_et),
        lo,
        hi,
        &breaks,
        opts,
    )
    .value
}

/// Sample the convolved profile on `grid` for an arrival at `t0`.
pub fn interaction_profile(
    coupling: &DipoleCoupling,
    sigma_et: f64,
    grid: &TimeGrid,
    t0: f64,
) -> Result<InteractionProfile> {
    if !(sigma_et >= 0.0) {
        return Err(FeberiError::Domain(format!("σ_et must be non-negative, got {sigma_et}")));
    }
    let t_r = coupling.geometry.transit_time;
    let need = 10.0 * t_r + 6.0 * sigma_et;
    if grid.len < 3 || grid.start > t0 - need || grid.end() < t0 + need {
        return Err(FeberiError::Resolution(format!(
            "time grid must span ±{need:.4e} fs around the arrival"
        )));
    }
    let fine = if sigma_et > 0.0 { t_r.min(sigma_et) } else { t_r };
    if grid.spacing > fine / 20.0 {
        return Err(FeberiError::Resolution(format!(
            "time step {:.3e} fs exceeds min(t_r, σ_et)/20 = {:.3e} fs",
            grid.spacing,
            fine / 20.0
        )));
    }
    let values = (0..grid.len)
        .map(|k| profile_value(coupling, sigma_et, grid.time(k) - t0))
        .collect();
    Ok(InteractionProfile {
        grid: *grid,
        values,
        t0,
        orientation: coupling.orientation,
        sigma_bar_et: sigma_et / t_r,
    })
}

/// Profile for one passage with the default sampling rule.
pub fn passage_profile(
    coupling: &DipoleCoupling,
    sigma_et: f64,
    t0: f64,
    window: &PassageWindow,
) -> Result<InteractionProfile> {
    let grid = TimeGrid::for_passage(coupling, sigma_et, t0, window);
    interaction_profile(coupling, sigma_et, &grid, t0)
}

/// Slowly-varying-envelope profile of a modulated packet:
/// f(t) = f_et(t−t₀) Σ_m f_m e^{imω_b(t−t_L)} M̃(mħω_b/v₀)/v₀.
pub fn modulated_profile(
    coupling: &DipoleCoupling,
    qew: &ModulatedQewSpec,
    spectrum: &ModulationSpectrum,
    steps_per_period: f64,
) -> Result<InteractionProfile> {
    let sigma = qew.base.sigma_et;
    let t0 = qew.base.t0;
    let t_l = qew.t_l();
    let v0 = coupling.kin.v0;
    let shortest = coupling
        .tls
        .period()
        .min(TAU / (spectrum.m_max.max(1) as f64 * spectrum.omega_b));
    let h = 0.5 * shortest / steps_per_period;
    let w = 7.0 * sigma;
    let steps = (w / h).ceil() as usize;
    let grid = TimeGrid {
        start: t0 - w,
        spacing: h,
        len: 2 * steps + 1,
    };
    let weights: Vec<Complex64> = (0..=spectrum.m_max as i64)
        .map(|m| {
            let p = m as f64 * HBAR * spectrum.omega_b / v0;
            spectrum.get(m) * coupling.m_tilde(p) / v0
        })
        .collect();
    let values = (0..grid.len)
        .map(|k| {
            let t = grid.time(k);
            let tau = t - t_l;
            let mut s = weights[0].re;
            for (m, wm) in weights.iter().enumerate().skip(1) {
                s += 2.0 * (wm * Complex64::from_polar(1.0, m as f64 * spectrum.omega_b * tau)).re;
            }
            gaussian_density(t - t0, sigma) * s
        })
        .collect();
    Ok(InteractionProfile {
        grid,
        values,
        t0,
        orientation: coupling.orientation,
        sigma_bar_et: sigma / coupling.geometry.transit_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<TlsState>,
}

impl BornTrajectory {
    pub fn last(&self) -> TlsState {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn p2(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.p2()).collect()
    }
}

fn rhs(c: [Complex64; 2], f: f64, phase: Complex64) -> [Complex64; 2] {
    // (1/iħ) = −i/ħ
    let k = Complex64::new(0.0, -f / HBAR);
    [k * c[1] * phase.conj(), k * c[0] * phase]
}

fn rk4_passage(
    state: TlsState,
    profile: &InteractionProfile,
    omega_21: f64,
    mut record: impl FnMut(f64, [Complex64; 2]),
) -> Result<TlsState> {
    let g = profile.grid;
    let h = 2.0 * g.spacing;
    let mut c = [state.c1, state.c2];
    let n0 = state.norm_sqr();
    record(g.start, c);
    let steps = (g.len - 1) / 2;
    for k in 0..steps {
        let t = g.time(2 * k);
        let (fa, fb, fc) = (
            profile.values[2 * k],
            profile.values[2 * k + 1],
            profile.values[2 * k + 2],
        );
        let pa = Complex64::from_polar(1.0, omega_21 * t);
        let pb = Complex64::from_polar(1.0, omega_21 * (t + 0.5 * h));
        let pc = Complex64::from_polar(1.0, omega_21 * (t + h));
        let k1 = rhs(c, fa, pa);
        let y2 = [c[0] + 0.5 * h * k1[0], c[1] + 0.5 * h * k1[1]];
        let k2 = rhs(y2, fb, pb);
        let y3 = [c[0] + 0.5 * h * k2[0], c[1] + 0.5 * h * k2[1]];
        let k3 = rhs(y3, fb, pb);
        let y4 = [c[0] + h * k3[0], c[1] + h * k3[1]];
        let k4 = rhs(y4, fc, pc);
        for i in 0..2 {
            c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        record(t + h, c);
    }
    let out = TlsState { c1: c[0], c2: c[1] };
    let drift = (out.norm_sqr() - n0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(FeberiError::Resolution(format!(
            "norm drift {drift:.2e} over one passage; reduce the time step"
        )));
    }
    Ok(out)
}

/// Integrate Ċ₂ = (1/iħ)C₁e^{iω₂₁t}f(t−t₀), Ċ₁ = (1/iħ)C₂e^{−iω₂₁t}f(t−t₀)
/// with fixed-step RK4 over the profile's grid.
pub fn evolve_tls(state0: &TlsState, profile: &InteractionProfile, omega_21: f64) -> Result<BornTrajectory> {
    let mut times = Vec::with_capacity(profile.grid.len / 2 + 1);
    let mut states = Vec::with_capacity(profile.grid.len / 2 + 1);
    rk4_passage(*state0, profile, omega_21, |t, c| {
        times.push(t);
        states.push(TlsState { c1: c[0], c2: c[1] });
    })?;
    Ok(BornTrajectory { times, states })
}

/// Final state only.
pub fn evolve_tls_final(state0: &TlsState, profile: &InteractionProfile, omega_21: f64) -> Result<TlsState> {
    rk4_passage(*state0, profile, omega_21, |_, _| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// t_K = t_0L + n_K·T_b with random ascending integers n_K.
    Correlated,
    /// Uniform random gaps, no phase relation to the modulation.
    Random,
    /// t_K = t_0L + K·T_b.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSchedule {
    /// Arrival times [fs].
    pub times: Vec<f64>,
    pub kind: ScheduleKind,
    pub seed: u64,
    pub omega_b: f64,
    pub t_0l: f64,
    /// Integer period counts for correlated and periodic schedules.
    pub periods: Vec<u64>,
}

pub fn arrival_schedule(
    kind: ScheduleKind,
    n: usize,
    omega_b: f64,
    t_0l: f64,
    mean_spacing: f64,
    seed: u64,
) -> Result<ArrivalSchedule> {
    if n == 0 {
        return Err(FeberiError::Domain("schedule needs at least one electron".into()));
    }
    if kind != ScheduleKind::Random && !(omega_b > 0.0) {
        return Err(FeberiError::Domain(format!("ω_b must be positive, got {omega_b}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_b = if omega_b > 0.0 { TAU / omega_b } else { 0.0 };
    let (times, periods) = match kind {
        ScheduleKind::Correlated => {
            let g = (mean_spacing / t_b).round().max(1.0) as u64;
            let mut nk = Vec::with_capacity(n);
            let mut cur = 0u64;
            for k in 0..n {
                if k > 0 {
                    cur += rng.gen_range(1..=2 * g - 1);
                }
                nk.push(cur);
            }
            (nk.iter().map(|&m| t_0l + m as f64 * t_b).collect(), nk)
        }
        ScheduleKind::Periodic => {
            let nk: Vec<u64> = (0..n as u64).collect();
            (nk.iter().map(|&m| t_0l + m as f64 * t_b).collect(), nk)
        }
        ScheduleKind::Random => {
            if !(mean_spacing > 0.0) {
                return Err(FeberiError::Domain("random schedule needs a positive mean spacing".into()));
            }
            let mut t = t_0l;
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                if k > 0 {
                    t += mean_spacing * rng.gen_range(0.5..1.5);
                }
                out.push(t);
            }
            (out, vec![])
        }
    };
    Ok(ArrivalSchedule {
        times,
        kind,
        seed,
        omega_b,
        t_0l,
        periods,
    })
}

/// Exact single-passage propagator for an arrival at t = 0: columns are the
/// evolved |1⟩ and |2⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageMatrix {
    pub s: [[Complex64; 2]; 2],
    pub omega_21: f64,
}

impl PassageMatrix {
    pub fn from_profile(profile: &InteractionProfile, omega_21: f64) -> Result<Self> {
        let p = profile.shifted(0.0);
        let a = evolve_tls_final(&TlsState::ground(), &p, omega_21)?;
        let b = evolve_tls_final(&TlsState::excited(), &p, omega_21)?;
        Ok(Self {
            s: [[a.c1, b.c1], [a.c2, b.c2]],
            omega_21,
        })
    }

    /// Apply the passage for an arrival at `t`: D(t) S₀ D(t)†, D = diag(1, e^{iω₂₁t}).
    pub fn apply(&self, state: &TlsState, t: f64) -> TlsState {
        let d = Complex64::from_polar(1.0, self.omega_21 * t);
        let c2r = state.c2 * d.conj();
        let n1 = self.s[0][0] * state.c1 + self.s[0][1] * c2r;
        let n2 = self.s[1][0] * state.c1 + self.s[1][1] * c2r;
        TlsState { c1: n1, c2: n2 * d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    /// P₂ after each electron.
    pub p2: Vec<f64>,
    pub final_state: TlsState,
    pub warnings: Vec<String>,
}

fn overlap_warnings(schedule: &ArrivalSchedule, half_width: f64) -> Vec<String> {
    let mut out = vec![];
    for (k, w) in schedule.times.windows(2).enumerate() {
        if w[1] - w[0] < 2.0 * half_width {
            out.push(format!(
                "overlap: electrons {} and {} are {:.4e} fs apart, interaction windows span {:.4e} fs",
                k,
                k + 1,
                w[1] - w[0],
                2.0 * half_width
            ));
            break;
        }
    }
    out
}

/// Sequential passages with the full coupled-equation propagator.
pub fn simulate_train(
    state0: &TlsState,
    schedule: &ArrivalSchedule,
    coupling: &DipoleCoupling,
    sigma_et_point: f64,
    window: &PassageWindow,
) -> Result<TrainResult> {
    let profile = passage_profile(coupling, sigma_et_point, 0.0, window)?;
    let s0 = PassageMatrix::from_profile(&profile, coupling.tls.omega_21)?;
    Ok(run_train(state0, schedule, &s0, window.half_width(coupling, sigma_et_point)))
}

/// Train driven by a precomputed passage matrix; reuse across seeds.
pub fn run_train(state0: &TlsState, schedule: &ArrivalSchedule, s0: &PassageMatrix, half_width: f64) -> TrainResult {
    let mut state = *state0;
    let mut p2 = Vec::with_capacity(schedule.times.len());
    for &t in &schedule.times {
        state = s0.apply(&state, t);
        p2.push(state.p2());
    }
    TrainResult {
        p2,
        final_state: state,
        warnings: overlap_warnings(schedule, half_width),
    }
}

/// Reference path: integrates every passage with its own shifted profile.
pub fn simulate_train_direct(
    state0: &TlsState,
    schedule: &ArrivalSchedule,
    coupling: &DipoleCoupling,
    sigma_et_point: f64,
    window: &PassageWindow,
) -> Result<TrainResult> {
    let profile = passage_profile(coupling, sigma_et_point, 0.0, window)?;
    let mut state = *state0;
    let mut p2 = vec![];
    for &t in &schedule.times {
        state = evolve_tls_final(&state, &profile.shifted(t), coupling.tls.omega_21)?;
        p2.push(state.p2());
    }
    Ok(TrainResult {
        p2,
        final_state: state,
        warnings: overlap_warnings(schedule, window.half_width(coupling, sigma_et_point)),
    })
}

/// ∫(t²+1)^{−3/2} dt from −L to L, used for truncation reporting.
pub fn transverse_kernel_captured_fraction(l: f64) -> f64 {
    l / (l * l + 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{
        dp1_superposition, first_order_amplitude, p2_from_ground, IncrementModel, PrefactorConvention,
    };
    use crate::coulomb::tests::reference_coupling;
    use crate::tls::bloch_phase;
    use std::f64::consts::FRAC_PI_2;

    const MAIN: PrefactorConvention = PrefactorConvention::HbarV0;

    fn perp() -> DipoleCoupling {
        reference_coupling(DipoleOrientation::Transverse)
    }

    #[test]
    fn point_limits() {
        let c = perp();
        assert_eq!(profile_value(&reference_coupling(DipoleOrientation::Parallel), 0.0, 0.0), 0.0);
        assert!((profile_value(&c, 0.0, 0.0) - c.profile_scale()).abs() < 1e-12 * c.profile_scale());
        // tiny but resolved width is close to the bare kernel
        let t_r = c.geometry.transit_time;
        let v = profile_value(&c, 0.01 * t_r, 0.3 * t_r);
        assert!((v - c.kernel_time(0.3 * t_r)).abs() < 1e-3 * c.profile_scale());
    }

    #[test]
    fn profile_symmetry_and_integrals() {
        for &o in &[DipoleOrientation::Parallel, DipoleOrientation::Transverse] {
            let c = reference_coupling(o);
            let t_r = c.geometry.transit_time;
            let sigma = 2.0 * t_r;
            let p = passage_profile(&c, sigma, 0.0, &PassageWindow::default()).unwrap();
            let n = p.values.len();
            let scale = c.profile_scale();
            for k in 0..n / 2 {
                let (a, b) = (p.values[k], p.values[n - 1 - k]);
                match o {
                    DipoleOrientation::Parallel => assert!((a + b).abs() < 1e-9 * scale),
                    DipoleOrientation::Transverse => {
                        assert!((a - b).abs() < 1e-9 * scale);
                        assert!(a > 0.0);
                    }
                }
            }
            let l = p.grid.end() / t_r;
            match o {
                DipoleOrientation::Parallel => assert!(p.integral().abs() < 1e-9 * scale * t_r),
                DipoleOrientation::Transverse => {
                    // truncated ∫(t̄²+1)^{-3/2} over the window, Gaussian smearing at the edge negligible
                    let expect = 2.0 * scale * t_r * transverse_kernel_captured_fraction(l);
                    assert!((p.integral() - expect).abs() < 1e-6 * expect);
                    let full = 2.0 * c.strength() / (c.geometry.r_perp * c.kin.v0);
                    assert!((2.0 * scale * t_r - full).abs() < 1e-12 * full);
                }
            }
        }
    }

    #[test]
    fn grid_checks() {
        let c = perp();
        let t_r = c.geometry.transit_time;
        let short = TimeGrid {
            start: -t_r,
            spacing: t_r / 100.0,
            len: 201,
        };
        assert!(matches!(interaction_profile(&c, 0.0, &short, 0.0), Err(FeberiError::Resolution(_))));
        let coarse = TimeGrid {
            start: -20.0 * t_r,
            spacing: t_r / 5.0,
            len: 201,
        };
        assert!(matches!(interaction_profile(&c, 0.0, &coarse, 0.0), Err(FeberiError::Resolution(_))));
    }

    #[test]
    fn zero_drive_leaves_state() {
        let g = TimeGrid {
            start: 0.0,
            spacing: 0.01,
            len: 101,
        };
        let p = InteractionProfile::zero(g, 0.5, DipoleOrientation::Transverse);
        let s = TlsState::superposition(0.7, 1.3);
        let out = evolve_tls_final(&s, &p, 3.0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn ground_start_matches_closed_form() {
        let c = perp();
        let w = c.tls.omega_21;
        for &gam in &[0.0, 0.05] {
            let sigma = gam / w;
            let p = passage_profile(&c, sigma, 0.0, &PassageWindow::default()).unwrap();
            let tr = evolve_tls(&TlsState::ground(), &p, w).unwrap();
            for s in &tr.states {
                assert!((s.norm_sqr() - 1.0).abs() < 1e-8);
            }
            let p2 = tr.last().p2();
            let expect = p2_from_ground(&c, MAIN).value * (-gam * gam).exp();
            assert!((p2 / expect - 1.0).abs() < 0.02, "Γ={gam}: {p2} vs {expect}");
            // amplitude phase too
            let a = first_order_amplitude(&c, &TlsState::ground(), 0.0, sigma, MAIN);
            assert!((tr.last().c2 - a).norm() < 0.01 * a.norm());
        }
    }

    #[test]
    fn parallel_window_convergence() {
        let c = reference_coupling(DipoleOrientation::Parallel);
        let w = c.tls.omega_21;
        let expect = p2_from_ground(&c, MAIN).value;
        let p = passage_profile(&c, 0.0, 0.0, &PassageWindow::default()).unwrap();
        let p2 = evolve_tls_final(&TlsState::ground(), &p, w).unwrap().p2();
        assert!((p2 / expect - 1.0).abs() < 0.05, "{p2} vs {expect}");
    }

    #[test]
    fn superposition_increment() {
        let c = perp();
        let w = c.tls.omega_21;
        let t0 = 0.0;
        for &gam in &[0.2, 0.6, 1.0] {
            let sigma = gam / w;
            let p = passage_profile(&c, sigma, t0, &PassageWindow::default()).unwrap();
            let s = TlsState::new(
                Complex64::new(1.0 / 2f64.sqrt(), 0.0),
                Complex64::new(0.0, 1.0 / 2f64.sqrt()),
            )
            .unwrap();
            assert!((bloch_phase(&s, t0, w).unwrap() - 3.0 * FRAC_PI_2).abs() < 1e-12);
            let s = TlsState::equal_with_bloch_phase(FRAC_PI_2, t0, w);
            let out = evolve_tls_final(&s, &p, w).unwrap();
            let d = out.p2() - s.p2();
            let expect = dp1_superposition(&c, &s, t0, sigma, IncrementModel::Born, MAIN).value;
            assert!((d / expect - 1.0).abs() < 0.05, "Γ={gam}: {d} vs {expect}");
        }
    }

    #[test]
    fn schedules() {
        let wb = 1.5;
        let tb = TAU / wb;
        let a = arrival_schedule(ScheduleKind::Correlated, 50, wb, 0.7, 10.0 * tb, 3).unwrap();
        for (t, n) in a.times.iter().zip(&a.periods) {
            assert_eq!(*t, 0.7 + *n as f64 * tb);
        }
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(a, arrival_schedule(ScheduleKind::Correlated, 50, wb, 0.7, 10.0 * tb, 3).unwrap());
        assert_ne!(a, arrival_schedule(ScheduleKind::Correlated, 50, wb, 0.7, 10.0 * tb, 4).unwrap());
        let gaps: Vec<u64> = a.periods.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps.iter().all(|&g| (1..=19).contains(&g)));
        let p = arrival_schedule(ScheduleKind::Periodic, 3, wb, 0.0, 0.0, 0).unwrap();
        assert!((p.times[1] - tb).abs() < 1e-15 && (p.times[2] - 2.0 * tb).abs() < 1e-15);
        let r = arrival_schedule(ScheduleKind::Random, 100, 0.0, 0.0, 5.0, 9).unwrap();
        assert!(r.times.windows(2).all(|w| w[1] - w[0] >= 2.5));
        assert!(arrival_schedule(ScheduleKind::Correlated, 0, wb, 0.0, 1.0, 0).is_err());
        assert!(arrival_schedule(ScheduleKind::Correlated, 3, 0.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn transfer_matrix_matches_direct_evolution() {
        let c = perp();
        let w = c.tls.omega_21;
        let win = PassageWindow::default();
        let sched = arrival_schedule(ScheduleKind::Correlated, 6, w / 2.0, 0.3, 30.0, 11).unwrap();
        // strong dipole so the state moves visibly
        let strong = c.with_dipole_length(c.tls.dipole_length * 100.0);
        let s0 = TlsState::superposition(0.4, 0.9);
        let a = simulate_train(&s0, &sched, &strong, 0.0, &win).unwrap();
        let b = simulate_train_direct(&s0, &sched, &strong, 0.0, &win).unwrap();
        for (x, y) in a.p2.iter().zip(&b.p2) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        assert!((a.final_state.c2 - b.final_state.c2).norm() < 1e-9);
        assert!(a.warnings.is_empty());
        let single = simulate_train(&s0, &arrival_schedule(ScheduleKind::Periodic, 1, 1.0, 2.0, 0.0, 0).unwrap(), &strong, 0.0, &win).unwrap();
        let direct = evolve_tls_final(&s0, &passage_profile(&strong, 0.0, 2.0, &win).unwrap(), w).unwrap();
        assert!((single.p2[0] - direct.p2()).abs() < 1e-10);
    }

    #[test]
    fn correlated_train_is_quadratic_and_seed_independent() {
        let c = perp();
        let w = c.tls.omega_21;
        let win = PassageWindow::default();
        let sigma = 0.05 / w;
        let a = arrival_schedule(ScheduleKind::Correlated, 20, w / 2.0, 0.0, 20.0, 1).unwrap();
        let b = arrival_schedule(ScheduleKind::Correlated, 20, w / 2.0, 0.0, 20.0, 2).unwrap();
        let ra = simulate_train(&TlsState::ground(), &a, &c, sigma, &win).unwrap();
        let rb = simulate_train(&TlsState::ground(), &b, &c, sigma, &win).unwrap();
        for k in 0..20 {
            assert!((ra.p2[k] - rb.p2[k]).abs() < 1e-12 * ra.p2[k].max(1e-30) + 1e-18);
            let n = (k + 1) as f64;
            assert!((ra.p2[k] / ra.p2[0] / (n * n) - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn modulated_drive_matches_resonant_harmonic() {
        use crate::analytic::modulated_increments;
        use crate::qew::{modulation_fourier_coefficients, GaussianQewSpec};
        let c0 = perp();
        let wb = c0.tls.omega_21 / 2.0;
        let sigma = 10.0;
        let base = GaussianQewSpec::from_duration(c0.kin, sigma, 0.0).unwrap();
        let q = ModulatedQewSpec::with_optimal_drift(base, Complex64::new(3.0, 0.0), wb, 0.4).unwrap();
        let spec = modulation_fourier_coefficients(&q, 8).unwrap();
        for &d in &[0.0, 0.05, -0.1] {
            let c = c0.with_tls(c0.tls.with_energy_gap((c0.tls.omega_21 + d) * HBAR));
            let p = modulated_profile(&c, &q, &spec, 50.0).unwrap();
            let out = evolve_tls_final(&TlsState::ground(), &p, c.tls.omega_21).unwrap();
            let a = modulated_increments(&c, &spec, sigma, &TlsState::ground(), q.t_l(), 0.0, MAIN);
            assert!((out.p2() / a.value.dp2 - 1.0).abs() < 0.02, "δ={d}: {} vs {}", out.p2(), a.value.dp2);
        }
    }

    #[test]
    fn overlap_warning() {
        let c = perp();
        let win = PassageWindow::default();
        let hw = win.half_width(&c, 0.0);
        let sched = ArrivalSchedule {
            times: vec![0.0, hw],
            kind: ScheduleKind::Random,
            seed: 0,
            omega_b: 0.0,
            t_0l: 0.0,
            periods: vec![],
        };
        let r = simulate_train(&TlsState::ground(), &sched, &c, 0.0, &win).unwrap();
        assert!(r.warnings[0].starts_with("overlap"));
    }
}
