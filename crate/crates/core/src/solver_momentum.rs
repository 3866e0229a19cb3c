//! Entangled-amplitude integration on a momentum grid: the free electron and
//! the TLS share one state c_{i,p}(t), advanced in the interaction picture.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use crate::grid::{build_grid, MomentumGrid};

use crate::constants::HBAR;
use crate::coulomb::DipoleCoupling;
use crate::error::{FeberiError, Result};
use crate::tls::TlsState;

const EULER_DRIFT_LIMIT: f64 = 1e-4;
const RK4_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntangledAmplitudes {
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
    pub t: f64,
}

impl EntangledAmplitudes {
    /// Unentangled start c_{i,p} = C_i c_p.
    pub fn product(state: &TlsState, free: &[Complex64], t: f64) -> Self {
        Self {
            v1: free.iter().map(|c| state.c1 * c).collect(),
            v2: free.iter().map(|c| state.c2 * c).collect(),
            t,
        }
    }

    pub fn p1(&self, dp: f64) -> f64 {
        self.v1.iter().map(|c| c.norm_sqr()).sum::<f64>() * dp
    }

    pub fn p2(&self, dp: f64) -> f64 {
        self.v2.iter().map(|c| c.norm_sqr()).sum::<f64>() * dp
    }

    pub fn norm(&self, dp: f64) -> f64 {
        self.p1(dp) + self.p2(dp)
    }

    /// Mean free-electron energy Σ E_n(|v1_n|² + |v2_n|²)Δp.
    pub fn free_energy(&self, energies: &[f64], dp: f64) -> f64 {
        energies
            .iter()
            .zip(self.v1.iter().zip(&self.v2))
            .map(|(e, (a, b))| e * (a.norm_sqr() + b.norm_sqr()))
            .sum::<f64>()
            * dp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// First-order explicit update; reference mode.
    Euler,
    #[default]
    Rk4,
}

/// Dense coupling matrices at time t:
/// U²¹_nm = (Δp/2πiħ²) M̃(p_n−p_m) e^{i(E_n−E_m+E₂₁)t/ħ} drives c₂ from c₁,
/// U¹²_nm the same with −E₂₁. U²¹ = −(U¹²)†.
pub fn coupling_matrix(grid: &MomentumGrid, t: f64, coupling: &DipoleCoupling) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = grid.n;
    let e = grid.energies(&coupling.kin);
    let k = Complex64::new(0.0, -grid.dp / (std::f64::consts::TAU * HBAR * HBAR));
    let e21 = coupling.tls.energy_gap;
    let mut u12 = DMatrix::zeros(n, n);
    let mut u21 = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let m = k * coupling.m_tilde(grid.points[a] - grid.points[b]);
            let de = e[a] - e[b];
            u21[(a, b)] = m * Complex64::from_polar(1.0, (de + e21) * t / HBAR);
            u12[(a, b)] = m * Complex64::from_polar(1.0, (de - e21) * t / HBAR);
        }
    }
    (u12, u21)
}

/// Precomputed Toeplitz kernel and energies; the time-dependent phases are
/// applied as diagonal factors on either side of the kernel.
#[derive(Debug, Clone)]
pub struct MomentumSolver {
    pub grid: MomentumGrid,
    pub energies: Vec<f64>,
    pub omega_21: f64,
    /// (Δp/2πiħ²) M̃(p_n − p_m) indexed by n − m + N − 1.
    toeplitz: Vec<Complex64>,
}

impl MomentumSolver {
    pub fn new(grid: &MomentumGrid, coupling: &DipoleCoupling) -> Self {
        let n = grid.n as i64;
        let k = Complex64::new(0.0, -grid.dp / (std::f64::consts::TAU * HBAR * HBAR));
        // p_n − p_m = −(n − m)Δp on the descending grid
        let toeplitz = (-(n - 1)..n)
            .map(|d| k * coupling.m_tilde(-(d as f64) * grid.dp))
            .collect();
        Self {
            grid: grid.clone(),
            energies: grid.energies(&coupling.kin),
            omega_21: coupling.tls.omega_21,
            toeplitz,
        }
    }

    /// Fastest phase rate, max|E_n − E_m| + E₂₁ over ħ [rad/fs].
    pub fn max_frequency(&self) -> f64 {
        let (lo, hi) = self
            .energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
        (hi - lo) / HBAR + self.omega_21
    }

    /// Step with ω_max·dt = 0.1.
    pub fn default_dt(&self) -> f64 {
        0.1 / self.max_frequency()
    }

    fn apply_kernel(&self, w: &[Complex64], out: &mut [Complex64]) {
        let n = w.len();
        for (r, o) in out.iter_mut().enumerate() {
            // row r uses toeplitz[r − m + N − 1], m = 0..N
            let row = &self.toeplitz[r..r + n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, x) in row.iter().rev().zip(w) {
                acc += t * x;
            }
            *o = acc;
        }
    }

    /// Time derivative of (v1, v2) at time t.
    pub fn derivative(&self, t: f64, v1: &[Complex64], v2: &[Complex64], d1: &mut [Complex64], d2: &mut [Complex64]) {
        let n = self.grid.n;
        let ph: Vec<Complex64> = self.energies.iter().map(|e| Complex64::from_polar(1.0, e * t / HBAR)).collect();
        let w1: Vec<Complex64> = (0..n).map(|m| ph[m].conj() * v1[m]).collect();
        let w2: Vec<Complex64> = (0..n).map(|m| ph[m].conj() * v2[m]).collect();
        self.apply_kernel(&w1, d2);
        self.apply_kernel(&w2, d1);
        let b = Complex64::from_polar(1.0, self.omega_21 * t);
        for k in 0..n {
            d2[k] *= ph[k] * b;
            d1[k] *= ph[k] * b.conj();
        }
    }

    fn step(&self, s: &mut EntangledAmplitudes, dt: f64, integrator: Integrator) {
        let n = self.grid.n;
        let z = Complex64::new(0.0, 0.0);
        let mut k1 = (vec![z; n], vec![z; n]);
        self.derivative(s.t, &s.v1, &s.v2, &mut k1.0, &mut k1.1);
        match integrator {
            Integrator::Euler => {
                for i in 0..n {
                    s.v1[i] += dt * k1.0[i];
                    s.v2[i] += dt * k1.1[i];
                }
            }
            Integrator::Rk4 => {
                let stage = |k: &(Vec<Complex64>, Vec<Complex64>), f: f64| -> (Vec<Complex64>, Vec<Complex64>) {
                    (
                        (0..n).map(|i| s.v1[i] + f * dt * k.0[i]).collect(),
                        (0..n).map(|i| s.v2[i] + f * dt * k.1[i]).collect(),
                    )
                };
                let mut k2 = (vec![z; n], vec![z; n]);
                let y = stage(&k1, 0.5);
                self.derivative(s.t + 0.5 * dt, &y.0, &y.1, &mut k2.0, &mut k2.1);
                let mut k3 = (vec![z; n], vec![z; n]);
                let y = stage(&k2, 0.5);
                self.derivative(s.t + 0.5 * dt, &y.0, &y.1, &mut k3.0, &mut k3.1);
                let mut k4 = (vec![z; n], vec![z; n]);
                let y = stage(&k3, 1.0);
                self.derivative(s.t + dt, &y.0, &y.1, &mut k4.0, &mut k4.1);
                for i in 0..n {
                    s.v1[i] += dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
                    s.v2[i] += dt / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
                }
            }
        }
        s.t += dt;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumTrajectory {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// Mean free-electron energy [eV].
    pub free_energy: Vec<f64>,
    pub last: EntangledAmplitudes,
}

/// Advance `state0` to `t_end` with a fixed step no larger than `dt`,
/// recording every `sample_every`-th step.
pub fn integrate(
    solver: &MomentumSolver,
    state0: &EntangledAmplitudes,
    t_end: f64,
    dt: f64,
    integrator: Integrator,
    sample_every: usize,
) -> Result<MomentumTrajectory> {
    if !(dt > 0.0) || t_end < state0.t {
        return Err(FeberiError::Domain(format!(
            "need dt > 0 and t_end ≥ start, got dt = {dt}, span [{}, {t_end}]",
            state0.t
        )));
    }
    let steps = ((t_end - state0.t) / dt).ceil().max(1.0) as usize;
    let h = (t_end - state0.t) / steps as f64;
    let dp = solver.grid.dp;
    let n0 = state0.norm(dp);
    let mut s = state0.clone();
    let mut traj = MomentumTrajectory {
        times: vec![],
        p1: vec![],
        p2: vec![],
        free_energy: vec![],
        last: s.clone(),
    };
    let every = sample_every.max(1);
    let record = |s: &EntangledAmplitudes, traj: &mut MomentumTrajectory| {
        traj.times.push(s.t);
        traj.p1.push(s.p1(dp));
        traj.p2.push(s.p2(dp));
        traj.free_energy.push(s.free_energy(&solver.energies, dp));
    };
    record(&s, &mut traj);
    for k in 1..=steps {
        solver.step(&mut s, h, integrator);
        if k % every == 0 || k == steps {
            if s.v2.iter().chain(&s.v1).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(FeberiError::Numerical(format!("non-finite amplitude at t = {}", s.t)));
            }
            record(&s, &mut traj);
        }
    }
    let drift = (s.norm(dp) - n0).abs();
    let limit = match integrator {
        Integrator::Euler => EULER_DRIFT_LIMIT,
        Integrator::Rk4 => RK4_DRIFT_LIMIT,
    };
    if drift > limit {
        return Err(FeberiError::Resolution(format!(
            "norm drift {drift:.2e} exceeds {limit:.0e}; use a smaller step{}",
            if integrator == Integrator::Euler { " or RK4" } else { "" }
        )));
    }
    traj.last = s;
    Ok(traj)
}
