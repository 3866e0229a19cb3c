//! Uniform momentum grid shared by the wavepacket builders and both solvers.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{FeberiError, Result};
use crate::kinematics::ElectronKinematics;

pub const MAX_TAIL_MASS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub n: usize,
    pub p0: f64,
    pub p_cutoff: f64,
    pub dp: f64,
    /// p_n = p0 + (1 − 2n/N) p_cutoff for n = 1..N (descending).
    pub points: Vec<f64>,
    /// Probability of the reference Gaussian not captured by the grid.
    pub tail_mass: f64,
}

impl MomentumGrid {
    /// Grid with an explicit half-width; no wavepacket check.
    pub fn with_cutoff(p0: f64, p_cutoff: f64, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(FeberiError::Grid(format!(
                "grid size must be even, got N = {n}"
            )));
        }
        if !(p_cutoff > 0.0) {
            return Err(FeberiError::Grid(format!(
                "cutoff must be positive, got {p_cutoff}"
            )));
        }
        let points = (1..=n)
            .map(|k| p0 + (1.0 - 2.0 * k as f64 / n as f64) * p_cutoff)
            .collect();
        Ok(Self {
            n,
            p0,
            p_cutoff,
            dp: 2.0 * p_cutoff / n as f64,
            points,
            tail_mass: 0.0,
        })
    }

    /// Period of the conjugate position grid, 2πħ/Δp [nm].
    pub fn z_span(&self) -> f64 {
        std::f64::consts::TAU * HBAR / self.dp
    }

    /// Conjugate grid spacing Δz = 2πħ/(NΔp) [nm].
    pub fn dz(&self) -> f64 {
        self.z_span() / self.n as f64
    }

    /// Free-electron energies E_{p_n} relative to the central energy.
    pub fn energies(&self, kin: &ElectronKinematics) -> Vec<f64> {
        self.points.iter().map(|&p| kin.dispersion(p)).collect()
    }

    /// Index of the point nearest `p`.
    pub fn nearest(&self, p: f64) -> usize {
        let k = ((self.p0 + self.p_cutoff - p) / self.dp).round() as i64 - 1;
        k.clamp(0, self.n as i64 - 1) as usize
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().sum::<f64>() / self.n as f64
    }
}

/// Gaussian probability missed by a Riemann sum over the grid; covers both
/// truncation at the edges and under-resolution of the peak.
pub fn gaussian_grid_defect(grid: &MomentumGrid, center: f64, sigma: f64) -> f64 {
    let norm = 1.0 / ((std::f64::consts::TAU).sqrt() * sigma);
    let captured: f64 = grid
        .points
        .iter()
        .map(|&p| norm * (-(p - center).powi(2) / (2.0 * sigma * sigma)).exp())
        .sum::<f64>()
        * grid.dp;
    let outside = libm::erfc((grid.p_cutoff - (center - grid.p0).abs()) / (sigma * 2f64.sqrt()));
    (1.0 - captured).abs().max(outside)
}

/// Grid of N points with half-width max(8σ_p0, 6|p_rec|) about p0.
pub fn build_grid(kin: &ElectronKinematics, sigma_p0: f64, p_rec: f64, n: usize) -> Result<MomentumGrid> {
    if n < 64 {
        return Err(FeberiError::Grid(format!("grid needs N >= 64, got {n}")));
    }
    if !(sigma_p0 > 0.0) {
        return Err(FeberiError::Grid(format!(
            "momentum spread must be positive, got {sigma_p0}"
        )));
    }
    let p_cut = (8.0 * sigma_p0).max(6.0 * p_rec.abs());
    let mut grid = MomentumGrid::with_cutoff(kin.p0, p_cut, n)?;
    // |c_p|² is a Gaussian of standard deviation σ_p0
    let tail = gaussian_grid_defect(&grid, kin.p0, sigma_p0)
        .max(gaussian_grid_defect(&grid, kin.p0 + p_rec, sigma_p0));
    grid.tail_mass = tail;
    if tail > MAX_TAIL_MASS {
        return Err(FeberiError::Truncation {
            what: format!("momentum grid (N = {n}, cutoff {p_cut:.4e})"),
            mass: tail,
            limit: MAX_TAIL_MASS,
        });
    }
    Ok(grid)
}
