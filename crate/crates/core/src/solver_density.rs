//! Joint free⊗bound evolution under the time-independent Hamiltonian, with the
//! interaction assembled through the conjugate position grid. Provides
//! partial traces, entropy, energy bookkeeping and sequential electron trains.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;

use crate::born_dynamics::PassageWindow;
use crate::constants::HBAR;
use crate::coulomb::DipoleCoupling;
use crate::error::{FeberiError, Result};
use crate::grid::{build_grid, MomentumGrid};
use crate::qew::QewSpec;
use crate::tls::TlsState;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSampling {
    /// Diagonal chosen so the circulant reproduces the exact transform for
    /// |m − n| < N/2.
    #[default]
    BandLimited,
    /// Spatial kernel sampled at the position-grid points.
    Point,
    /// Band-limited when Δz exceeds a quarter of the kernel width.
    Auto,
}

/// Conjugate position grid z_l = (l − N/2)Δz.
pub fn z_grid(grid: &MomentumGrid) -> Vec<f64> {
    let dz = grid.dz();
    (0..grid.n).map(|l| (l as f64 - (grid.n / 2) as f64) * dz).collect()
}

/// Unitary DFT between momentum and position grids,
/// F_ml = e^{2πi m(l − N/2)/N}/√N (common l-dependent phases dropped).
pub fn dft_matrix(n: usize) -> DMatrix<C> {
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |m, l| {
        let k = ((m * (l + n - n / 2)) % n) as f64;
        C::from_polar(s, TAU * k / n as f64)
    })
}

#[derive(Debug, Clone)]
pub struct HamiltonianAssembly {
    pub grid: MomentumGrid,
    /// Free-electron energies E_{p_n} [eV].
    pub h0_free: Vec<f64>,
    /// Bound energies (E₁, E₂) with E₁ = 0.
    pub h0_bound: [f64; 2],
    /// N×N interaction kernel ⟨p_m|f|p_n⟩Δp.
    pub h_ip: DMatrix<C>,
    /// Real-dipole σx structure (diagonal dropped).
    pub h_ib: Matrix2<C>,
    /// Position-space diagonal d_l [eV].
    pub kernel_diagonal: Vec<f64>,
    pub sampling: KernelSampling,
}

impl HamiltonianAssembly {
    pub fn dim(&self) -> usize {
        2 * self.grid.n
    }

    /// h₀ + h_ip ⊗ h_ib on the basis index 2n + i.
    pub fn total(&self) -> DMatrix<C> {
        let n = self.grid.n;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                let v = self.h_ip[(a, b)];
                for i in 0..2 {
                    for j in 0..2 {
                        h[(2 * a + i, 2 * b + j)] = v * self.h_ib[(i, j)];
                    }
                }
            }
            for i in 0..2 {
                h[(2 * a + i, 2 * a + i)] += C::new(self.h0_free[a] + self.h0_bound[i], 0.0);
            }
        }
        h
    }

    /// ⟨H_I⟩ for a joint state vector.
    pub fn interaction_energy(&self, x: &DVector<C>) -> f64 {
        let n = self.grid.n;
        let x1 = DVector::from_fn(n, |k, _| x[2 * k]);
        let x2 = DVector::from_fn(n, |k, _| x[2 * k + 1]);
        let a = &self.h_ip * &x1;
        let b = &self.h_ip * &x2;
        (x2.dotc(&a) + x1.dotc(&b)).re
    }
}

fn circulant_from(c: &[C]) -> DMatrix<C> {
    let n = c.len();
    DMatrix::from_fn(n, n, |m, k| c[(m + n - k) % n])
}

/// First-row coefficients c_k, k ≡ m − n (mod N), of the circulant kernel.
fn circulant_coefficients(grid: &MomentumGrid, coupling: &DipoleCoupling, sampling: KernelSampling) -> Vec<C> {
    let n = grid.n;
    let half = n / 2;
    match sampling {
        KernelSampling::Point => {
            let z = z_grid(grid);
            let d: Vec<f64> = z.iter().map(|&zz| coupling.m_spatial(zz)).collect();
            (0..n)
                .map(|k| {
                    let mut s = ZERO;
                    for (l, dl) in d.iter().enumerate() {
                        let ph = ((k * (l + n - half)) % n) as f64;
                        s += dl * C::from_polar(1.0, TAU * ph / n as f64);
                    }
                    s / n as f64
                })
                .collect()
        }
        _ => {
            // h(k) = Δp M̃(p_m − p_n)/(2πħ) with p_m − p_n = −kΔp
            let h = |k: i64| coupling.m_tilde(-(k as f64) * grid.dp) * (grid.dp / (TAU * HBAR));
            (0..n)
                .map(|k| {
                    if k < half {
                        h(k as i64)
                    } else if k == half {
                        C::new(h(half as i64).re, 0.0)
                    } else {
                        h(k as i64 - n as i64)
                    }
                })
                .collect()
        }
    }
}

/// d_l = Σ_k c_k e^{−2πik(l−N/2)/N}.
fn diagonal_from(c: &[C]) -> Vec<f64> {
    let n = c.len();
    let half = n / 2;
    (0..n)
        .map(|l| {
            let mut s = ZERO;
            for (k, ck) in c.iter().enumerate() {
                let ph = ((k * (l + n - half)) % n) as f64;
                s += ck * C::from_polar(1.0, -TAU * ph / n as f64);
            }
            s.re
        })
        .collect()
}

pub fn resolve_sampling(grid: &MomentumGrid, coupling: &DipoleCoupling, sampling: KernelSampling) -> KernelSampling {
    match sampling {
        KernelSampling::Auto => {
            if grid.dz() > 0.25 * coupling.kernel_width() {
                KernelSampling::BandLimited
            } else {
                KernelSampling::Point
            }
        }
        s => s,
    }
}

pub fn assemble_hamiltonian(
    grid: &MomentumGrid,
    coupling: &DipoleCoupling,
    sampling: KernelSampling,
) -> Result<HamiltonianAssembly> {
    let sampling = resolve_sampling(grid, coupling, sampling);
    let c = circulant_coefficients(grid, coupling, sampling);
    let h_ip = circulant_from(&c);
    Ok(HamiltonianAssembly {
        grid: grid.clone(),
        h0_free: grid.energies(&coupling.kin),
        h0_bound: [0.0, coupling.tls.energy_gap],
        h_ip,
        h_ib: Matrix2::new(ZERO, C::new(1.0, 0.0), C::new(1.0, 0.0), ZERO),
        kernel_diagonal: diagonal_from(&c),
        sampling,
    })
}

/// The electron's periodic images (period z_span) must stay clear of the TLS
/// for the whole window.
pub fn check_periodic_images(
    grid: &MomentumGrid,
    v0: f64,
    half_width: f64,
    sigma_z0: f64,
    kernel_width: f64,
) -> Result<()> {
    let need = v0 * half_width + 6.0 * sigma_z0 + 10.0 * kernel_width;
    if grid.z_span() < need {
        return Err(FeberiError::Assembly(format!(
            "position period {:.1} nm shorter than the {need:.1} nm the passage needs; \
             increase N or reduce the cutoff",
            grid.z_span()
        )));
    }
    Ok(())
}

/// U(t) = V e^{−iΛt/ħ} V† from one Hermitian eigendecomposition.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C>,
}

impl Propagator {
    pub fn new(h: &DMatrix<C>) -> Result<Self> {
        let herm = (h - h.adjoint()).norm();
        if herm > 1e-12 * h.norm().max(1e-300) {
            return Err(FeberiError::Numerical(format!("Hamiltonian not Hermitian (defect {herm:.2e})")));
        }
        let eig = h.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(FeberiError::Numerical("eigendecomposition produced non-finite values".into()));
        }
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    fn phases(&self, t: f64) -> DVector<C> {
        DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|l| C::from_polar(1.0, -l * t / HBAR)),
        )
    }

    /// Coefficients in the eigenbasis, reusable across times.
    pub fn to_eigenbasis(&self, x0: &DVector<C>) -> DVector<C> {
        self.eigenvectors.adjoint() * x0
    }

    pub fn from_eigenbasis(&self, y: &DVector<C>, t: f64) -> DVector<C> {
        &self.eigenvectors * y.component_mul(&self.phases(t))
    }

    pub fn evolve_vector(&self, x0: &DVector<C>, t: f64) -> DVector<C> {
        self.from_eigenbasis(&self.to_eigenbasis(x0), t)
    }

    pub fn unitary(&self, t: f64) -> DMatrix<C> {
        let p = self.phases(t);
        let mut vp = self.eigenvectors.clone();
        for (j, mut col) in vp.column_iter_mut().enumerate() {
            col *= p[j];
        }
        vp * self.eigenvectors.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDensityMatrix {
    pub rho: DMatrix<C>,
    pub n: usize,
}

impl JointDensityMatrix {
    pub fn new(rho: DMatrix<C>) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() % 2 != 0 {
            return Err(FeberiError::Domain("joint density matrix must be 2N×2N".into()));
        }
        let s = Self { n: rho.nrows() / 2, rho };
        if s.hermiticity_defect() > 1e-10 || (s.trace() - 1.0).abs() > 1e-10 {
            return Err(FeberiError::Domain(format!(
                "not a density matrix: trace {}, Hermitian defect {:.2e}",
                s.trace(),
                s.hermiticity_defect()
            )));
        }
        Ok(s)
    }

    pub fn from_pure(x: &DVector<C>) -> Self {
        Self {
            n: x.len() / 2,
            rho: x * x.adjoint(),
        }
    }

    /// ρ_f ⊗ ρ_b on the index 2n + i.
    pub fn product(rho_f: &DMatrix<C>, rho_b: &Matrix2<C>) -> Self {
        let n = rho_f.nrows();
        Self {
            n,
            rho: DMatrix::from_fn(2 * n, 2 * n, |a, b| rho_f[(a / 2, b / 2)] * rho_b[(a % 2, b % 2)]),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ab|² for Hermitian ρ
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn evolve(rho0: &JointDensityMatrix, propagator: &Propagator, t: f64) -> Result<JointDensityMatrix> {
    if t < 0.0 {
        return Err(FeberiError::Domain(format!("evolution time must be non-negative, got {t}")));
    }
    let u = propagator.unitary(t);
    Ok(JointDensityMatrix {
        rho: &u * &rho0.rho * u.adjoint(),
        n: rho0.n,
    })
}

pub fn partial_trace_bound(rho: &JointDensityMatrix) -> Matrix2<C> {
    let mut out = Matrix2::zeros();
    for k in 0..rho.n {
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] += rho.rho[(2 * k + i, 2 * k + j)];
            }
        }
    }
    out
}

pub fn partial_trace_free(rho: &JointDensityMatrix) -> DMatrix<C> {
    DMatrix::from_fn(rho.n, rho.n, |a, b| rho.rho[(2 * a, 2 * b)] + rho.rho[(2 * a + 1, 2 * b + 1)])
}

/// ρ_b of a pure joint state without forming the joint matrix.
pub fn bound_state_of(x: &DVector<C>) -> Matrix2<C> {
    let mut out = Matrix2::zeros();
    for k in 0..x.len() / 2 {
        let a = x[2 * k];
        let b = x[2 * k + 1];
        out[(0, 0)] += a * a.conj();
        out[(0, 1)] += a * b.conj();
        out[(1, 0)] += b * a.conj();
        out[(1, 1)] += b * b.conj();
    }
    out
}

/// −Tr ρ ln ρ [nats].
pub fn von_neumann_entropy(rho_b: &Matrix2<C>) -> f64 {
    rho_b
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyAccounting {
    pub times: Vec<f64>,
    pub de_free: Vec<f64>,
    pub de_bound: Vec<f64>,
    pub de_interaction: Vec<f64>,
    pub de_total: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DensityRun {
    pub times: Vec<f64>,
    pub p2: Vec<f64>,
    pub rho_b: Vec<Matrix2<C>>,
    pub energy: EnergyAccounting,
    /// Tr ρ² of the joint state at each sample.
    pub purity: Vec<f64>,
    pub final_state: DVector<C>,
}

impl DensityRun {
    pub fn final_p2(&self) -> f64 {
        *self.p2.last().expect("run has samples")
    }
}

/// Energy increments from sampled joint states (pure).
pub fn energy_accounting(assembly: &HamiltonianAssembly, times: &[f64], states: &[DVector<C>]) -> EnergyAccounting {
    let parts = |x: &DVector<C>| {
        let mut ef = 0.0;
        let mut eb = 0.0;
        for k in 0..assembly.grid.n {
            let (a, b) = (x[2 * k].norm_sqr(), x[2 * k + 1].norm_sqr());
            ef += assembly.h0_free[k] * (a + b);
            eb += assembly.h0_bound[0] * a + assembly.h0_bound[1] * b;
        }
        (ef, eb, assembly.interaction_energy(x))
    };
    let (f0, b0, i0) = parts(&states[0]);
    let mut out = EnergyAccounting {
        times: times.to_vec(),
        de_free: vec![],
        de_bound: vec![],
        de_interaction: vec![],
        de_total: vec![],
    };
    for x in states {
        let (f, b, i) = parts(x);
        out.de_free.push(f - f0);
        out.de_bound.push(b - b0);
        out.de_interaction.push(i - i0);
        out.de_total.push((f - f0) + (b - b0) + (i - i0));
    }
    out
}

/// x[2n+i] = C_i c_n √Δp.
pub fn product_vector(state: &TlsState, free: &[C], dp: f64) -> DVector<C> {
    let s = dp.sqrt();
    DVector::from_fn(2 * free.len(), |k, _| {
        let c = if k % 2 == 0 { state.c1 } else { state.c2 };
        c * free[k / 2] * s
    })
}

/// Grid, Hamiltonian, propagator and prepared free-electron state for one
/// passage. Local time runs from 0 to 2W with the packet centred on the TLS at W.
#[derive(Debug, Clone)]
pub struct DensityPassage {
    pub assembly: HamiltonianAssembly,
    pub propagator: Propagator,
    /// Momentum amplitudes, Σ|c|²Δp = 1.
    pub free: Vec<C>,
    pub half_width: f64,
    pub omega_21: f64,
}

impl DensityPassage {
    pub fn new(
        coupling: &DipoleCoupling,
        qew: &QewSpec,
        n: usize,
        window: &PassageWindow,
        sampling: KernelSampling,
    ) -> Result<Self> {
        let base = qew.base();
        let hw = window.half_width(coupling, base.sigma_et);
        let p_rec = -coupling.tls.energy_gap / coupling.kin.v0;
        let grid = build_grid(&coupling.kin, base.sigma_p0, p_rec, n)?;
        Self::on_grid(coupling, qew, &grid, hw, sampling)
    }

    pub fn on_grid(
        coupling: &DipoleCoupling,
        qew: &QewSpec,
        grid: &MomentumGrid,
        half_width: f64,
        sampling: KernelSampling,
    ) -> Result<Self> {
        let base = qew.base();
        check_periodic_images(grid, coupling.kin.v0, half_width, base.sigma_z0, coupling.kernel_width())?;
        let local = match qew {
            QewSpec::Gaussian(g) => QewSpec::Gaussian(g.with_arrival(half_width)),
            QewSpec::Modulated(m) => {
                let mut m = *m;
                m.base = m.base.with_arrival(half_width);
                QewSpec::Modulated(m)
            }
        };
        let free = local.amplitudes(grid)?;
        let assembly = assemble_hamiltonian(grid, coupling, sampling)?;
        let propagator = Propagator::new(&assembly.total())?;
        Ok(Self {
            assembly,
            propagator,
            free,
            half_width,
            omega_21: coupling.tls.omega_21,
        })
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Arrival time inside the local window.
    pub fn arrival(&self) -> f64 {
        self.half_width
    }

    pub fn initial_vector(&self, state: &TlsState) -> DVector<C> {
        product_vector(state, &self.free, self.assembly.grid.dp)
    }

    /// Pure-state evolution sampled at `samples + 1` evenly spaced times.
    pub fn run(&self, state: &TlsState, samples: usize) -> DensityRun {
        let x0 = self.initial_vector(state);
        let y = self.propagator.to_eigenbasis(&x0);
        let samples = samples.max(1);
        let times: Vec<f64> = (0..=samples).map(|k| self.duration() * k as f64 / samples as f64).collect();
        let states: Vec<DVector<C>> = times.iter().map(|&t| self.propagator.from_eigenbasis(&y, t)).collect();
        let rho_b: Vec<Matrix2<C>> = states.iter().map(bound_state_of).collect();
        let p2 = rho_b.iter().map(|r| r[(1, 1)].re).collect();
        let purity = states.iter().map(|x| x.norm_squared().powi(2)).collect();
        DensityRun {
            energy: energy_accounting(&self.assembly, &times, &states),
            times,
            p2,
            rho_b,
            purity,
            final_state: states.last().expect("samples").clone(),
        }
    }

    /// ρ_b after the passage for a pure TLS start (Schrödinger frame at the
    /// window edges).
    pub fn final_bound_state(&self, state: &TlsState) -> Matrix2<C> {
        let x = self.propagator.evolve_vector(&self.initial_vector(state), self.duration());
        bound_state_of(&x)
    }

    pub fn final_p2(&self, state: &TlsState) -> f64 {
        self.final_bound_state(state)[(1, 1)].re
    }

    /// Mixed TLS start: evolve each eigencomponent with a fresh electron.
    pub fn final_bound_state_mixed(&self, rho_b: &Matrix2<C>) -> Matrix2<C> {
        let eig = rho_b.symmetric_eigen();
        let mut out = Matrix2::zeros();
        for k in 0..2 {
            let w = eig.eigenvalues[k];
            if w <= 1e-15 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let s = TlsState { c1: v[0], c2: v[1] };
            out += self.final_bound_state(&s) * C::new(w, 0.0);
        }
        out
    }
}

/// Rotating-frame change R(s) = diag(1, e^{−iω₂₁s}).
fn to_schrodinger(rho: &Matrix2<C>, omega: f64, s: f64) -> Matrix2<C> {
    let r = Matrix2::new(C::new(1.0, 0.0), ZERO, ZERO, C::from_polar(1.0, -omega * s));
    r * rho * r.adjoint()
}

fn to_interaction(rho: &Matrix2<C>, omega: f64, s: f64) -> Matrix2<C> {
    let r = Matrix2::new(C::new(1.0, 0.0), ZERO, ZERO, C::from_polar(1.0, -omega * s));
    r.adjoint() * rho * r
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub p2: Vec<f64>,
    /// Interaction-picture TLS state after each electron.
    pub rho_b: Vec<Matrix2<C>>,
}

/// Electrons with identical packets arriving at `arrivals` (global times);
/// each meets the TLS in a fresh product state, the free electron is traced
/// out afterwards and ρ_b carried forward.
pub fn sequential_multi_qew(rho_b0: &Matrix2<C>, passage: &DensityPassage, arrivals: &[f64]) -> Result<TrainOutcome> {
    let hw = passage.half_width;
    let w = passage.omega_21;
    let mut rho = *rho_b0;
    let mut out = TrainOutcome { p2: vec![], rho_b: vec![] };
    for (k, &t) in arrivals.iter().enumerate() {
        if k > 0 && t - arrivals[k - 1] < 2.0 * hw {
            return Err(FeberiError::Overlap(format!(
                "electrons {} and {} arrive {:.4e} fs apart; windows span {:.4e} fs",
                k - 1,
                k,
                t - arrivals[k - 1],
                2.0 * hw
            )));
        }
        let s = t - hw;
        let rs = to_schrodinger(&rho, w, s);
        let after = passage.final_bound_state_mixed(&rs);
        rho = to_interaction(&after, w, s + 2.0 * hw);
        out.p2.push(rho[(1, 1)].re);
        out.rho_b.push(rho);
    }
    Ok(out)
}

/// Little-endian dump: u64 N, u64 steps, f64 dt, then each 2×2 ρ_b row-major
/// as (re, im) f64 pairs.
pub fn write_rho_b<W: Write>(mut w: W, n: usize, dt: f64, series: &[Matrix2<C>]) -> std::io::Result<()> {
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(series.len() as u64).to_le_bytes())?;
    w.write_all(&dt.to_le_bytes())?;
    for m in series {
        for i in 0..2 {
            for j in 0..2 {
                w.write_all(&m[(i, j)].re.to_le_bytes())?;
                w.write_all(&m[(i, j)].im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_rho_b(bytes: &[u8]) -> Option<(usize, f64, Vec<Matrix2<C>>)> {
    let u = |o: usize| Some(u64::from_le_bytes(bytes.get(o..o + 8)?.try_into().ok()?));
    let f = |o: usize| Some(f64::from_le_bytes(bytes.get(o..o + 8)?.try_into().ok()?));
    let n = u(0)? as usize;
    let steps = u(8)? as usize;
    let dt = f(16)?;
    let mut out = Vec::with_capacity(steps);
    for s in 0..steps {
        let base = 24 + s * 64;
        let mut m = Matrix2::zeros();
        for e in 0..4 {
            m[(e / 2, e % 2)] = C::new(f(base + 16 * e)?, f(base + 16 * e + 8)?);
        }
        out.push(m);
    }
    Some((n, dt, out))
}
