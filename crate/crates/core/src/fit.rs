//! Least-squares fits used by the scenario diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FeberiError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub r2: f64,
    /// Largest |y − ŷ|.
    pub max_residual: f64,
}

impl LinearFit {
    pub fn predict(&self, basis: &[f64]) -> f64 {
        self.coefficients.iter().zip(basis).map(|(c, b)| c * b).sum()
    }
}

pub fn r_squared(y: &[f64], yhat: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Minimize Σ(y_k − Σ_j c_j rows[k][j])².
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let m = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if m != y.len() || m < p || p == 0 {
        return Err(FeberiError::Domain(format!(
            "least squares needs at least as many points ({m}) as parameters ({p})"
        )));
    }
    let a = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| FeberiError::Numerical(format!("least squares failed: {e}")))?;
    let yhat = &a * &c;
    let max_residual = (&b - &yhat).amax();
    Ok(LinearFit {
        coefficients: c.iter().copied().collect(),
        r2: r_squared(y, yhat.as_slice()),
        max_residual,
    })
}

/// y ≈ Σ_{k=0}^{degree} c_k x^k.
pub fn polynomial_fit(x: &[f64], y: &[f64], degree: usize) -> Result<LinearFit> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&v| (0..=degree).map(|k| v.powi(k as i32)).collect()).collect();
    least_squares(&rows, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub center: f64,
    /// Offset from the centre at which the peak falls to 1/e.
    pub half_width_1e: f64,
    pub amplitude: f64,
    /// R² of the log-quadratic fit.
    pub r2: f64,
}

/// Fit ln y = a + bx + cx² over positive samples.
pub fn gaussian_fit(x: &[f64], y: &[f64]) -> Result<GaussianFit> {
    let (xs, ls): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &v)| (a, v.ln())).unzip();
    let f = polynomial_fit(&xs, &ls, 2)?;
    let (a, b, c) = (f.coefficients[0], f.coefficients[1], f.coefficients[2]);
    if !(c < 0.0) {
        return Err(FeberiError::Numerical("samples are not peaked".into()));
    }
    let center = -b / (2.0 * c);
    Ok(GaussianFit {
        center,
        half_width_1e: (-1.0 / c).sqrt(),
        amplitude: (a - b * b / (4.0 * c)).exp(),
        r2: f.r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    /// y ≈ a sin x + b cos x + c.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
}

impl SinusoidFit {
    pub fn amplitude(&self) -> f64 {
        self.a.hypot(self.b)
    }
}

pub fn sinusoid_fit(x: &[f64], y: &[f64]) -> Result<SinusoidFit> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v.sin(), v.cos(), 1.0]).collect();
    let f = least_squares(&rows, y)?;
    Ok(SinusoidFit {
        a: f.coefficients[0],
        b: f.coefficients[1],
        c: f.coefficients[2],
        r2: f.r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_polynomial() {
        let x: Vec<f64> = (1..=20).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v - 0.5 * v + 2.0).collect();
        let f = polynomial_fit(&x, &y, 2).unwrap();
        assert!((f.coefficients[2] - 3.0).abs() < 1e-10);
        assert!((f.coefficients[1] + 0.5).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-14);
        assert!(f.max_residual < 1e-9);
    }

    #[test]
    fn gaussian_recovers_width() {
        let x: Vec<f64> = (-40..=40).map(|k| 0.01 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * (-((v - 0.03) / 0.1f64).powi(2)).exp()).collect();
        let g = gaussian_fit(&x, &y).unwrap();
        assert!((g.half_width_1e - 0.1).abs() < 1e-10);
        assert!((g.center - 0.03).abs() < 1e-10);
        assert!((g.amplitude - 2.5).abs() < 1e-9);
        assert!(gaussian_fit(&x, &x.iter().map(|v| (v * v).exp()).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn sinusoid() {
        let x: Vec<f64> = (0..36).map(|k| k as f64 * 0.17453292519943295).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.7 * (v + 0.3).sin() + 0.1).collect();
        let f = sinusoid_fit(&x, &y).unwrap();
        assert!((f.amplitude() - 0.7).abs() < 1e-12);
        assert!((f.c - 0.1).abs() < 1e-12);
        assert!(f.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn rejects_underdetermined() {
        assert!(polynomial_fit(&[1.0, 2.0], &[1.0, 2.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn r2_at_most_one(noise in proptest::collection::vec(-1.0f64..1.0, 10)) {
            let x: Vec<f64> = (0..10).map(|v| v as f64).collect();
            let y: Vec<f64> = x.iter().zip(&noise).map(|(a, n)| 2.0 * a + n).collect();
            let f = polynomial_fit(&x, &y, 1).unwrap();
            prop_assert!(f.r2 <= 1.0 + 1e-12);
        }
    }
}
