//! Closed-form transition increments: recoil, overlap, single- and
//! multi-wavepacket predictions for the momentum and Born models.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::coulomb::DipoleCoupling;
use crate::error::{FeberiError, Result};
use crate::qew::{nearest_harmonic, ModulationSpectrum};
use crate::tls::TlsState;

/// Amplitude prefactor: 1/(ħv₀), or the alternative 1/(2πħv₀) that differs
/// by a factor 2π. The solvers agree with the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorConvention {
    #[default]
    HbarV0,
    TwoPiHbarV0,
}

impl PrefactorConvention {
    pub fn label(&self) -> &'static str {
        match self {
            PrefactorConvention::HbarV0 => "1_over_hbar_v0",
            PrefactorConvention::TwoPiHbarV0 => "1_over_2pi_hbar_v0",
        }
    }

    fn amplitude_factor(&self, v0: f64) -> f64 {
        match self {
            PrefactorConvention::HbarV0 => 1.0 / (HBAR * v0),
            PrefactorConvention::TwoPiHbarV0 => 1.0 / (std::f64::consts::TAU * HBAR * v0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementModel {
    /// First-order perturbation in momentum space.
    Momentum,
    /// Time-domain model with the arrival-time density as interaction weight.
    Born,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeFlag {
    /// Single-pass probability above 0.1.
    PerturbativeValidityExceeded,
    /// Γ > 1: the Born-model size suppression does not describe the full
    /// quantum result there.
    OutsideNearPointParticle,
    /// State has a zero amplitude; the first-order increment vanishes.
    NoDipolePhase,
    /// No modulation harmonic within 6/σ_et of the transition.
    OffResonance,
    /// ω/ω_b is half-integer; lower harmonic chosen.
    HarmonicTie,
    /// Accumulated probability above 0.5: quadratic growth law invalid.
    RabiRegime,
    /// Value fell outside [0, 1] and was clamped.
    Clamped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flagged<T> {
    pub value: T,
    pub flags: Vec<RegimeFlag>,
}

impl<T> Flagged<T> {
    fn new(value: T) -> Self {
        Self { value, flags: vec![] }
    }

    pub fn has(&self, f: &RegimeFlag) -> bool {
        self.flags.contains(f)
    }
}

fn clamp_probability(p: f64, flags: &mut Vec<RegimeFlag>) -> f64 {
    if p > 1.0 || p < 0.0 {
        flags.push(RegimeFlag::Clamped);
        p.clamp(0.0, 1.0)
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionIncrement {
    /// Interference (first-order) increment of P₂.
    pub dp1: f64,
    /// Squared first-order amplitude; never negative.
    pub dp2: f64,
    pub model: IncrementModel,
}

impl TransitionIncrement {
    pub fn total(&self) -> f64 {
        self.dp1 + self.dp2
    }
}

/// p_rec = −E/v₀ (negative for an upward transition).
pub fn recoil_momentum(energy_gap: f64, v0: f64) -> Result<f64> {
    if !(v0 > 0.0) {
        return Err(FeberiError::Domain(format!("beam speed must be positive, got {v0}")));
    }
    Ok(-energy_gap / v0)
}

/// Overlap I(p_rec) = ∫ c_p*(t₀) c_{p−p_rec}(t₀) dp of a Gaussian packet at
/// its waist with linear dispersion: e^{−Γ²/2} e^{−iωt₀}, Γ = |p_rec|/(2σ_p0).
pub fn overlap_integral(p_rec: f64, sigma_p0: f64, t0: f64, omega_ij: f64) -> Result<Complex64> {
    if !(sigma_p0 > 0.0) {
        return Err(FeberiError::Domain(format!(
            "momentum spread must be positive, got {sigma_p0}"
        )));
    }
    let gamma = p_rec.abs() / (2.0 * sigma_p0);
    Ok(Complex64::from_polar((-0.5 * gamma * gamma).exp(), -omega_ij * t0))
}

fn recoil(coupling: &DipoleCoupling) -> f64 {
    -coupling.tls.energy_gap / coupling.kin.v0
}

/// Single-pass P₂ for a ground-state start: |M̃(p_rec)|²/(ħv₀)², independent of packet size.
pub fn p2_from_ground(coupling: &DipoleCoupling, convention: PrefactorConvention) -> Flagged<f64> {
    let a = coupling.m_tilde(recoil(coupling)).norm() * convention.amplitude_factor(coupling.kin.v0);
    let mut out = Flagged::new(a * a);
    if out.value > 0.1 {
        out.flags.push(RegimeFlag::PerturbativeValidityExceeded);
    }
    out.value = clamp_probability(out.value, &mut out.flags);
    out
}

/// First-order change of C₂ for a Gaussian packet arriving at t₀:
/// (C₁/(iħv₀)) M̃(p_rec) e^{iω₂₁t₀} e^{−Γ²/2}.
pub fn first_order_amplitude(
    coupling: &DipoleCoupling,
    state: &TlsState,
    t0: f64,
    sigma_et: f64,
    convention: PrefactorConvention,
) -> Complex64 {
    let w = coupling.tls.omega_21;
    let g = w * sigma_et;
    let m = coupling.m_tilde(recoil(coupling));
    state.c1 * m * Complex64::new(0.0, -convention.amplitude_factor(coupling.kin.v0))
        * Complex64::from_polar((-0.5 * g * g).exp(), w * t0)
}

/// ΔP^(1) = 2 Re(C₂* ΔC₂) = (2/ħv₀)|M̃||C₁C₂| e^{−Γ²/2} sin(ζ + arg M̃(p_rec)).
/// Both models give the same expression.
pub fn dp1_superposition(
    coupling: &DipoleCoupling,
    state: &TlsState,
    t0: f64,
    sigma_et: f64,
    _model: IncrementModel,
    convention: PrefactorConvention,
) -> Flagged<f64> {
    if state.c1.norm() == 0.0 || state.c2.norm() == 0.0 {
        return Flagged {
            value: 0.0,
            flags: vec![RegimeFlag::NoDipolePhase],
        };
    }
    let dc2 = first_order_amplitude(coupling, state, t0, sigma_et, convention);
    Flagged::new(2.0 * (state.c2.conj() * dc2).re)
}

/// Born-model second-order increment from the ground state, |M̃/ħv₀|² e^{−Γ²}.
pub fn dp2_born(coupling: &DipoleCoupling, sigma_et: f64, convention: PrefactorConvention) -> Flagged<f64> {
    let g = coupling.tls.omega_21 * sigma_et;
    let base = p2_from_ground(coupling, convention);
    let mut out = Flagged {
        value: base.value * (-g * g).exp(),
        flags: base.flags,
    };
    if g > 1.0 {
        out.flags.push(RegimeFlag::OutsideNearPointParticle);
    }
    out
}

/// Both increments for an arbitrary initial state; ΔP^(2) = |ΔC₂|² carries
/// e^{−Γ²} in the Born model and no size factor in the momentum model.
pub fn transition_increment(
    coupling: &DipoleCoupling,
    state: &TlsState,
    t0: f64,
    sigma_et: f64,
    model: IncrementModel,
    convention: PrefactorConvention,
) -> Flagged<TransitionIncrement> {
    let dp1 = dp1_superposition(coupling, state, t0, sigma_et, model, convention);
    let ground = p2_from_ground(coupling, convention);
    let g = coupling.tls.omega_21 * sigma_et;
    let size = match model {
        IncrementModel::Momentum => 1.0,
        IncrementModel::Born => (-g * g).exp(),
    };
    let mut flags = ground.flags;
    flags.extend(dp1.flags);
    if model == IncrementModel::Born && g > 1.0 {
        flags.push(RegimeFlag::OutsideNearPointParticle);
    }
    Flagged {
        value: TransitionIncrement {
            dp1: dp1.value,
            dp2: state.p1() * ground.value * size,
            model,
        },
        flags,
    }
}

/// Resonant-harmonic increment for a modulated packet (Born model):
/// ΔC₂ = (C₁/(iħv₀)) M̃(p_rec) f_{−n} e^{inω_b t_L} e^{iδt₀} e^{−δ²σ²/2}, δ = ω₂₁ − nω_b.
pub fn modulated_increments(
    coupling: &DipoleCoupling,
    spectrum: &ModulationSpectrum,
    sigma_et: f64,
    state: &TlsState,
    t_l: f64,
    t0: f64,
    convention: PrefactorConvention,
) -> Flagged<TransitionIncrement> {
    let w = coupling.tls.omega_21;
    let (n, tie) = nearest_harmonic(w, spectrum.omega_b);
    let delta = w - n as f64 * spectrum.omega_b;
    let mut flags = vec![];
    if tie {
        flags.push(RegimeFlag::HarmonicTie);
    }
    if delta.abs() > 6.0 / sigma_et {
        flags.push(RegimeFlag::OffResonance);
    }
    let m = coupling.m_tilde(recoil(coupling));
    let fac = convention.amplitude_factor(coupling.kin.v0);
    let dc2 = state.c1
        * m
        * Complex64::new(0.0, -fac)
        * spectrum.get(-n)
        * Complex64::from_polar(
            (-0.5 * delta * delta * sigma_et * sigma_et).exp(),
            n as f64 * spectrum.omega_b * t_l + delta * t0,
        );
    let dp1 = if state.c2.norm() == 0.0 || state.c1.norm() == 0.0 {
        flags.push(RegimeFlag::NoDipolePhase);
        0.0
    } else {
        2.0 * (state.c2.conj() * dc2).re
    };
    Flagged {
        value: TransitionIncrement {
            dp1,
            dp2: dc2.norm_sqr(),
            model: IncrementModel::Born,
        },
        flags,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MultiQewVariant {
    /// Phase-locked Gaussian packets: N²|M̃/ħv₀|² e^{−ω²σ²}.
    PointTrain,
    /// Modulation-correlated packets at resonance: N²|M̃/ħv₀|²|f_n|².
    ModulatedCorrelated { f_n_abs: f64 },
}

/// Coherent N-electron buildup from the ground state (quadratic regime).
pub fn multi_qew_p2(
    n: usize,
    coupling: &DipoleCoupling,
    sigma_et: f64,
    variant: MultiQewVariant,
    convention: PrefactorConvention,
) -> Result<Flagged<f64>> {
    if n == 0 {
        return Err(FeberiError::Domain("electron count must be at least 1".into()));
    }
    let single = p2_from_ground(coupling, convention).value;
    let nn = (n * n) as f64;
    let raw = match variant {
        MultiQewVariant::PointTrain => {
            let g = coupling.tls.omega_21 * sigma_et;
            nn * single * (-g * g).exp()
        }
        MultiQewVariant::ModulatedCorrelated { f_n_abs } => nn * single * f_n_abs * f_n_abs,
    };
    let mut out = Flagged::new(raw);
    if raw > 0.5 {
        out.flags.push(RegimeFlag::RabiRegime);
    }
    out.value = clamp_probability(raw, &mut out.flags);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::tests::reference_coupling;
    use crate::quadrature::{integrate_complex, QuadOptions};
    use crate::qew::{modulation_fourier_coefficients, GaussianQewSpec, ModulatedQewSpec};
    use crate::tls::{bloch_phase, DipoleOrientation};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    const MAIN: PrefactorConvention = PrefactorConvention::HbarV0;

    fn perp() -> DipoleCoupling {
        reference_coupling(DipoleOrientation::Transverse)
    }

    #[test]
    fn recoil_examples() {
        let c = perp();
        assert_eq!(recoil_momentum(0.0, c.kin.v0).unwrap(), 0.0);
        let p = recoil_momentum(2.0, c.kin.v0).unwrap();
        assert!(p < 0.0);
        assert!((p + 0.009_594_6).abs() < 2e-7, "{p}");
        assert!(recoil_momentum(2.0, 0.0).is_err());
    }

    #[test]
    fn overlap_examples() {
        let i0 = overlap_integral(0.0, 0.01, 0.3, 3.0).unwrap();
        assert!((i0.norm() - 1.0).abs() < 1e-15);
        let i = overlap_integral(-0.02, 0.005, 0.0, 3.0).unwrap();
        assert!((i.norm() - (-2.0f64).exp()).abs() < 1e-15);
        assert!(overlap_integral(0.1, 0.0, 0.0, 1.0).is_err());
    }

    /// Brute-force ∫ c_p*(t₀) c_{p−p_rec}(t₀) dp with Gaussian amplitudes.
    pub(crate) fn overlap_oracle(p_rec: f64, sigma: f64, t0: f64, v0: f64) -> Complex64 {
        let g = |p: f64| (TAU * sigma * sigma).powf(-0.25) * (-p * p / (4.0 * sigma * sigma)).exp();
        let c = |p: f64| Complex64::from_polar(g(p), -v0 * p * t0 / HBAR);
        let lo = p_rec.min(0.0) - 12.0 * sigma;
        let hi = p_rec.max(0.0) + 12.0 * sigma;
        integrate_complex(
            |p| c(p).conj() * c(p - p_rec),
            lo,
            hi,
            &[0.0, p_rec, 0.5 * p_rec],
            QuadOptions {
                abs_tol: 1e-16,
                rel_tol: 1e-13,
                max_intervals: 4000,
            },
        )
    }

    #[test]
    fn overlap_matches_quadrature() {
        let c = perp();
        let p_rec = recoil_momentum(2.0, c.kin.v0).unwrap();
        let w = 2.0 / HBAR;
        for k in 0..=40 {
            let gamma = 0.1 * k as f64;
            let sigma = if gamma == 0.0 { 1.0 } else { p_rec.abs() / (2.0 * gamma) };
            let pr = if gamma == 0.0 { 0.0 } else { p_rec };
            let t0 = 0.37;
            let wi = if gamma == 0.0 { 0.0 } else { w };
            let a = overlap_integral(pr, sigma, t0, wi).unwrap();
            let o = overlap_oracle(pr, sigma, t0, c.kin.v0);
            assert!((a.norm() - o.norm()).abs() < 1e-8, "Γ={gamma}");
            assert!((a - o).norm() < 1e-8, "Γ={gamma}: {a} vs {o}");
        }
    }

    #[test]
    fn ground_probability_scaling() {
        let c = perp();
        let p = p2_from_ground(&c, MAIN);
        assert!(p.flags.is_empty());
        assert!((p.value - 8.27e-7).abs() < 0.01e-7, "{}", p.value);
        let weak = p2_from_ground(&c.with_dipole_length(c.tls.dipole_length * 1e-3), MAIN);
        assert!((weak.value / p.value - 1e-6).abs() < 1e-15);
        let strong = p2_from_ground(&c.with_dipole_length(c.tls.dipole_length * 2.0), MAIN);
        assert!((strong.value / p.value - 4.0).abs() < 1e-12);
        let app = p2_from_ground(&c, PrefactorConvention::TwoPiHbarV0);
        assert!((p.value / app.value - TAU * TAU).abs() < 1e-9);
        let huge = p2_from_ground(&c.with_dipole_length(c.tls.dipole_length * 2e3), MAIN);
        assert!(huge.has(&RegimeFlag::PerturbativeValidityExceeded));
        assert!(huge.has(&RegimeFlag::Clamped) && huge.value == 1.0);
    }

    #[test]
    fn dp1_examples() {
        let c = perp();
        let w = c.tls.omega_21;
        let t0 = 0.5;
        let s = TlsState::equal_with_bloch_phase(0.0, t0, w);
        let v = dp1_superposition(&c, &s, t0, 0.01, IncrementModel::Momentum, MAIN).value;
        assert!(v.abs() < 1e-18);
        let s = TlsState::equal_with_bloch_phase(FRAC_PI_2, t0, w);
        let peak = dp1_superposition(&c, &s, t0, 0.0, IncrementModel::Momentum, MAIN).value;
        let dp2 = p2_from_ground(&c, MAIN).value;
        assert!((peak - dp2.sqrt()).abs() < 1e-15);
        let none = dp1_superposition(&c, &TlsState::ground(), t0, 0.1, IncrementModel::Born, MAIN);
        assert_eq!(none.value, 0.0);
        assert!(none.has(&RegimeFlag::NoDipolePhase));
        // Γ = 2 suppresses by e^{−2}
        let big = dp1_superposition(&c, &s, t0, 2.0 / w, IncrementModel::Born, MAIN).value;
        assert!((big / peak - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn dp1_sign_symmetry_and_max_identity() {
        let c = perp();
        let w = c.tls.omega_21;
        let t0 = 0.2;
        for &sig in &[0.0, 0.05, 0.3] {
            let mut best: f64 = 0.0;
            for k in 0..720 {
                let z = TAU * k as f64 / 720.0;
                let s = TlsState::equal_with_bloch_phase(z, t0, w);
                let a = dp1_superposition(&c, &s, t0, sig, IncrementModel::Born, MAIN).value;
                let s2 = TlsState::equal_with_bloch_phase(z + PI, t0, w);
                let b = dp1_superposition(&c, &s2, t0, sig, IncrementModel::Born, MAIN).value;
                assert!((a + b).abs() < 1e-15);
                best = best.max(a);
            }
            // Born: exact identity at every size
            let dp2 = dp2_born(&c, sig, MAIN).value;
            assert!((best - dp2.sqrt()).abs() <= 1e-12 + 1e-4 * best);
        }
    }

    #[test]
    fn parallel_dipole_phase_offset() {
        let c = reference_coupling(DipoleOrientation::Parallel);
        let w = c.tls.omega_21;
        // arg M̃_par(p_rec) = π/2, so the maximum sits at ζ = 0
        let s = TlsState::equal_with_bloch_phase(0.0, 0.0, w);
        let v = dp1_superposition(&c, &s, 0.0, 0.0, IncrementModel::Momentum, MAIN).value;
        let amp = p2_from_ground(&c, MAIN).value.sqrt();
        assert!((v - amp).abs() < 1e-15);
    }

    #[test]
    fn dp2_born_and_size_independence() {
        let c = perp();
        let w = c.tls.omega_21;
        let ground = p2_from_ground(&c, MAIN).value;
        assert_eq!(dp2_born(&c, 0.0, MAIN).value, ground);
        let one = dp2_born(&c, 1.0 / w, MAIN);
        assert!((one.value / ground - (-1.0f64).exp()).abs() < 1e-14);
        assert!(!one.has(&RegimeFlag::OutsideNearPointParticle));
        assert!(dp2_born(&c, 1.5 / w, MAIN).has(&RegimeFlag::OutsideNearPointParticle));
        // momentum model second-order increment has no size dependence
        let g = TlsState::ground();
        let a = transition_increment(&c, &g, 0.0, 0.01, IncrementModel::Momentum, MAIN).value;
        let b = transition_increment(&c, &g, 0.0, 0.9, IncrementModel::Momentum, MAIN).value;
        assert_eq!(a.dp2, b.dp2);
        let born = transition_increment(&c, &g, 0.0, 0.9, IncrementModel::Born, MAIN).value;
        assert!(born.dp2 < b.dp2);
    }

    #[test]
    fn models_coincide_at_zero_size() {
        let c = perp();
        let s = TlsState::superposition(1.1, 0.4);
        for &t0 in &[0.0, 0.3, 1.7] {
            let a = transition_increment(&c, &s, t0, 0.0, IncrementModel::Momentum, MAIN).value;
            let b = transition_increment(&c, &s, t0, 0.0, IncrementModel::Born, MAIN).value;
            assert!((a.dp1 - b.dp1).abs() < 1e-12 && (a.dp2 - b.dp2).abs() < 1e-12);
            assert!(a.dp2 >= 0.0);
            let z = bloch_phase(&s, t0, c.tls.omega_21).unwrap();
            let expect = 2.0 * c.m_tilde(-c.tls.energy_gap / c.kin.v0).norm() / (HBAR * c.kin.v0)
                * (s.c1 * s.c2).norm()
                * z.sin();
            assert!((a.dp1 - expect).abs() < 1e-15);
        }
    }

    fn spectrum(omega_b: f64) -> (ModulatedQewSpec, ModulationSpectrum) {
        let base = GaussianQewSpec::from_duration(perp().kin, 10.0, 0.0).unwrap();
        let m = ModulatedQewSpec::with_optimal_drift(base, Complex64::new(3.0, 0.0), omega_b, 0.0).unwrap();
        (m, modulation_fourier_coefficients(&m, 8).unwrap())
    }

    #[test]
    fn modulated_exact_resonance() {
        let c = perp();
        let w = c.tls.omega_21;
        let (_, spec) = spectrum(w / 2.0);
        let inc = modulated_increments(&c, &spec, 10.0, &TlsState::ground(), 0.0, 0.0, MAIN);
        let expect = p2_from_ground(&c, MAIN).value * spec.get(2).norm_sqr();
        assert!((inc.value.dp2 - expect).abs() < 1e-15 * 1e3);
        assert_eq!(inc.flags, vec![RegimeFlag::NoDipolePhase]);
        // no bunching harmonic → nothing
        let mut zero = spec.clone();
        for v in zero.coefficients.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        let s = TlsState::superposition(1.0, 0.3);
        let z = modulated_increments(&c, &zero, 10.0, &s, 0.0, 0.0, MAIN).value;
        assert_eq!(z.dp1, 0.0);
        assert_eq!(z.dp2, 0.0);
    }

    #[test]
    fn modulated_detuning_matches_full_harmonic_sum() {
        let c0 = perp();
        let sigma = 10.0;
        let (_, spec) = spectrum(c0.tls.omega_21 / 2.0);
        let fac = 1.0 / (HBAR * c0.kin.v0);
        let on = modulated_increments(&c0, &spec, sigma, &TlsState::ground(), 0.0, 0.0, MAIN).value.dp2;
        for &d in &[-0.15, -0.05, 0.08, 0.2] {
            let w = c0.tls.omega_21 + d;
            let c = c0.with_tls(c0.tls.with_energy_gap(w * HBAR));
            let inc = modulated_increments(&c, &spec, sigma, &TlsState::ground(), 0.0, 0.0, MAIN).value;
            // brute-force amplitude over every harmonic of the density
            let p_rec = -w * HBAR / c.kin.v0;
            let mut amp = Complex64::new(0.0, 0.0);
            for m in -(spec.m_max as i64)..=spec.m_max as i64 {
                let x = w + m as f64 * spec.omega_b;
                amp += spec.get(m) * (-0.5 * x * x * sigma * sigma).exp();
            }
            let brute = (c.m_tilde(p_rec).norm() * fac * amp.norm()).powi(2);
            assert!((inc.dp2 - brute).abs() / brute < 1e-9);
            let m_ratio = (c.m_tilde(p_rec).norm() / c0.m_tilde(-c0.tls.energy_gap / c0.kin.v0).norm()).powi(2);
            let ratio = inc.dp2 / on / m_ratio;
            assert!((ratio - (-d * d * sigma * sigma).exp()).abs() < 1e-12);
        }
        let far = c0.with_tls(c0.tls.with_energy_gap((c0.tls.omega_21 + 0.7) * HBAR));
        let r = modulated_increments(&far, &spec, sigma, &TlsState::ground(), 0.0, 0.0, MAIN);
        assert!(r.has(&RegimeFlag::OffResonance));
    }

    #[test]
    fn multi_qew_scaling() {
        let c = perp();
        let s = 0.05;
        let one = multi_qew_p2(1, &c, s, MultiQewVariant::PointTrain, MAIN).unwrap().value;
        assert!((one - dp2_born(&c, s, MAIN).value).abs() < 1e-18);
        for n in [1usize, 3, 10, 50] {
            let a = multi_qew_p2(n, &c, s, MultiQewVariant::PointTrain, MAIN).unwrap().value;
            let b = multi_qew_p2(2 * n, &c, s, MultiQewVariant::PointTrain, MAIN).unwrap().value;
            assert!((b / a - 4.0).abs() < 1e-12);
        }
        let v = MultiQewVariant::ModulatedCorrelated { f_n_abs: 0.5 };
        let m20 = multi_qew_p2(20, &c, 0.0, v, MAIN).unwrap().value;
        assert!((m20 - 100.0 * p2_from_ground(&c, MAIN).value).abs() < 1e-15);
        assert!(multi_qew_p2(0, &c, s, v, MAIN).is_err());
        let r = multi_qew_p2(2000, &c, 0.0, MultiQewVariant::PointTrain, MAIN).unwrap();
        assert!(r.has(&RegimeFlag::RabiRegime) && r.value <= 1.0);
    }
}
