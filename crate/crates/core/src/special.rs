//! Bessel functions: modified K₀, K₁ (and the I₀, I₁ needed by their series)
//! and integer-order J_n.

use crate::constants::EULER_GAMMA;
use crate::error::{FeberiError, Result};

const SERIES_SWITCH: f64 = 2.0;
const EPS: f64 = 1e-16;

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(FeberiError::Domain(format!(
            "modified Bessel K requires x > 0, got {x}"
        )))
    }
}

/// I₀(x) by power series; accurate for moderate x.
pub fn bessel_i0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > EPS * sum {
        term *= y / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// I₁(x) by power series; accurate for moderate x.
pub fn bessel_i1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > EPS * sum.abs() {
        term *= y / (k * (k + 1.0));
        sum += term;
        k += 1.0;
    }
    sum
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lnx2 = (0.5 * x).ln();

    // K₀ = −(ln(x/2)+γ) I₀ + Σ_{k≥1} y^k/(k!)² H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    let mut k = 1.0;
    loop {
        term *= y / (k * k);
        harmonic += 1.0 / k;
        let add = term * harmonic;
        tail += add;
        if add < EPS * tail.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    let k0 = -(lnx2 + EULER_GAMMA) * bessel_i0_series(x) + tail;

    // K₁ = 1/x + ln(x/2) I₁ − (x/4) Σ_{k≥0} [ψ(k+1)+ψ(k+2)] y^k/(k!(k+1)!)
    let mut term = 1.0;
    let mut psi1 = -EULER_GAMMA; // ψ(k+1)
    let mut sum = psi1 + (psi1 + 1.0);
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= y / (k * (k + 1.0));
        psi1 += 1.0 / k;
        let add = term * (psi1 + psi1 + 1.0 / (k + 1.0));
        sum += add;
        if add.abs() < EPS * sum.abs() {
            break;
        }
    }
    let k1 = 1.0 / x + lnx2 * bessel_i1_series(x) - 0.25 * x * sum;
    (k0, k1)
}

/// Steed/Temme continued fraction for x > 2; returns (e^x K₀(x), e^x K₁(x)).
fn k01_scaled_cf(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0s = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1s = k0s * (x + 0.5 - h) / x;
    (k0s, k1s)
}

/// e^x K₀(x) and e^x K₁(x).
pub fn bessel_k01_scaled(x: f64) -> Result<(f64, f64)> {
    check_positive(x)?;
    if x <= SERIES_SWITCH {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        Ok((k0 * e, k1 * e))
    } else {
        Ok(k01_scaled_cf(x))
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= SERIES_SWITCH {
        Ok(k01_series(x).0)
    } else {
        Ok(k01_scaled_cf(x).0 * (-x).exp())
    }
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x <= SERIES_SWITCH {
        Ok(k01_series(x).1)
    } else {
        Ok(k01_scaled_cf(x).1 * (-x).exp())
    }
}

/// J₀(x), …, J_{nmax}(x) by Miller's backward recurrence.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (nmax as f64).max(ax);
    let mut start = (top + 30.0 + (160.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    let mut tmp = vec![0.0; start + 1];
    tmp[start] = j;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        tmp[k - 1] = j;
        if j.abs() > 1e250 {
            for v in tmp.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    for (k, v) in tmp.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for n in 0..=nmax {
        let v = tmp[n] / norm;
        out[n] = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// Integer-order Bessel function of the first kind.
pub fn bessel_jn(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_sequence(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Smallest n such that |J_k(x)| < tol for all k ≥ n.
pub fn bessel_j_cutoff(x: f64, tol: f64) -> usize {
    let ax = x.abs();
    let guess = (ax + 10.0 + 3.0 * ax.cbrt() * 10.0) as usize + 10;
    let seq = bessel_j_sequence(guess, ax);
    let mut n = guess;
    while n > 0 && seq[n - 1].abs() < tol {
        n -= 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};

    fn k_oracle(nu: f64, x: f64) -> f64 {
        // K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt
        let tmax = (1.0 + 745.0 / x).acosh();
        integrate(
            |t| (-x * t.cosh()).exp() * (nu * t).cosh(),
            0.0,
            tmax,
            QuadOptions {
                abs_tol: 1e-300,
                rel_tol: 1e-13,
                max_intervals: 4000,
            },
        )
        .value
    }

    fn j_oracle(n: i64, x: f64) -> f64 {
        // (1/2π)∫₀^{2π} cos(nτ − x sin τ) dτ, trapezoid is spectrally exact here
        let m = 4096;
        let h = std::f64::consts::TAU / m as f64;
        (0..m)
            .map(|k| {
                let t = k as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn frozen_values() {
        assert!((bessel_k0(1.0).unwrap() - 0.421_024_438).abs() < 1e-9);
        assert!((bessel_k1(1.0).unwrap() - 0.601_907_230).abs() < 1e-9);
    }

    #[test]
    fn small_argument_log_limit() {
        let x = 1e-4;
        let r = bessel_k0(x).unwrap() + (x / 2.0).ln() + EULER_GAMMA;
        assert!(r.abs() < 1e-6);
        // K₁ ~ 1/x
        assert!((bessel_k1(1e-6).unwrap() * 1e-6 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_integral_representation() {
        let mut x = 1e-3;
        while x <= 50.0 {
            for (nu, k) in [(0.0, bessel_k0(x).unwrap()), (1.0, bessel_k1(x).unwrap())] {
                let o = k_oracle(nu, x);
                assert!((k - o).abs() / o < 1e-9, "K{nu}({x}): {k} vs {o}");
            }
            x *= 1.17;
        }
    }

    #[test]
    fn continuous_across_switch() {
        let a = bessel_k1(2.0).unwrap();
        let b = bessel_k1(2.0 + 1e-12).unwrap();
        assert!((a - b).abs() / a < 1e-9);
        let (s0, s1) = bessel_k01_scaled(2.0).unwrap();
        let (t0, t1) = k01_scaled_cf(2.0);
        assert!((s0 - t0).abs() / t0 < 1e-12 && (s1 - t1).abs() / t1 < 1e-12);
    }

    #[test]
    fn large_argument_and_domain() {
        assert!(bessel_k0(700.0).unwrap() > 0.0);
        assert_eq!(bessel_k1(800.0).unwrap(), 0.0);
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        let (s0, _) = bessel_k01_scaled(800.0).unwrap();
        assert!((s0 - (std::f64::consts::PI / 1600.0).sqrt()).abs() / s0 < 1e-3);
    }

    #[test]
    fn jn_against_integral() {
        for &x in &[0.1, 1.0, 2.0, 5.5, 12.0, 30.0] {
            for n in -8..=25 {
                let a = bessel_jn(n, x);
                let o = j_oracle(n, x);
                assert!((a - o).abs() < 1e-12, "J{n}({x}) = {a} vs {o}");
            }
        }
        assert!((bessel_jn(0, 2.0) - 0.223_890_779_141_235_7).abs() < 1e-14);
        assert!((bessel_jn(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert_eq!(bessel_jn(0, 0.0), 1.0);
        assert_eq!(bessel_jn(3, 0.0), 0.0);
        assert!((bessel_jn(3, -1.3) + bessel_jn(3, 1.3)).abs() < 1e-15);
    }

    #[test]
    fn j_cutoff_bounds_tail() {
        for &x in &[0.5, 2.0, 6.0, 20.0] {
            let n = bessel_j_cutoff(x, 1e-8);
            let seq = bessel_j_sequence(n + 20, x);
            assert!(seq[n..].iter().all(|v| v.abs() < 1e-8));
            assert!(n == 0 || seq[n - 1].abs() >= 1e-8);
        }
    }
}
