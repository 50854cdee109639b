use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::EpochSeries;
use crate::error::{Error, Result};
use crate::linalg::{ComplexValue, C64};

/// Ratio of smallest to largest singular value below which a design matrix
/// counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

/// `X_k = c1 lambda2^k + c2 |lambda1|^k cos(k arg(lambda1) + c3)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub lambda1: ComplexValue,
    pub lambda2: f64,
    pub rms_residual: f64,
    /// False when `c2` is negligible and `c3` carries no information.
    pub phase_identifiable: bool,
}

impl FitResult {
    pub fn model(&self, k: usize) -> f64 {
        let l1: C64 = self.lambda1.into();
        let kf = k as f64;
        self.c1 * self.lambda2.powf(kf) + self.c2 * l1.norm().powf(kf) * (kf * l1.arg() + self.c3).cos()
    }
}

/// `X_k = c1 lambda^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureFit {
    pub c1: f64,
    pub lambda: f64,
    pub rms_residual: f64,
}

impl PureFit {
    pub fn model(&self, k: usize) -> f64 {
        self.c1 * self.lambda.powf(k as f64)
    }
}

fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rows = y.len();
    let cols = columns.len();
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::DegenerateFit("a model column vanishes or overflows".into()));
    }
    let a = DMatrix::from_fn(rows, cols, |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= RANK_TOL * smax {
        return Err(Error::DegenerateFit(format!(
            "design matrix is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let resid = &a * &x - &b;
    let rms = (resid.norm_squared() / rows as f64).sqrt();
    Ok(((0..cols).map(|j| x[j] / norms[j]).collect(), rms))
}

/// Least-squares fit of the two-mode model to valley logs, indexed from 0.
pub fn fit_decay(epochs: &EpochSeries, lambda1: C64, lambda2: f64) -> Result<FitResult> {
    fit_decay_values(&epochs.valley_logs(), lambda1, lambda2)
}

pub fn fit_decay_values(valleys: &[f64], lambda1: C64, lambda2: f64) -> Result<FitResult> {
    if valleys.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "fit needs at least 6 valleys, have {}",
            valleys.len()
        )));
    }
    if lambda1.im == 0.0 {
        return Err(Error::Domain("lambda1 must be complex".into()));
    }
    let (rho, theta) = (lambda1.norm(), lambda1.arg());
    let ks = 0..valleys.len();
    let pure: Vec<f64> = ks.clone().map(|k| lambda2.powi(k as i32)).collect();
    let cos: Vec<f64> = ks
        .clone()
        .map(|k| rho.powi(k as i32) * (k as f64 * theta).cos())
        .collect();
    let sin: Vec<f64> = ks.map(|k| rho.powi(k as i32) * (k as f64 * theta).sin()).collect();
    let (x, rms) = least_squares(&[pure, cos, sin], valleys)?;
    // c2 cos(k theta + c3) = (c2 cos c3) cos(k theta) - (c2 sin c3) sin(k theta)
    let c2 = x[1].hypot(x[2]);
    let c3 = (-x[2]).atan2(x[1]);
    let scale = x[0].abs().max(valleys.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    Ok(FitResult {
        c1: x[0],
        c2,
        c3,
        lambda1: lambda1.into(),
        lambda2,
        rms_residual: rms,
        phase_identifiable: c2 > 1e-9 * scale,
    })
}

/// Least-squares fit of a single geometric mode.
pub fn fit_pure_mode(valleys: &[f64], lambda: f64) -> Result<PureFit> {
    if valleys.is_empty() {
        return Err(Error::InsufficientData("no valleys to fit".into()));
    }
    let col: Vec<f64> = (0..valleys.len()).map(|k| lambda.powi(k as i32)).collect();
    let (x, rms) = least_squares(&[col], valleys)?;
    Ok(PureFit {
        c1: x[0],
        lambda,
        rms_residual: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(c1: f64, c2: f64, c3: f64, l1: C64, l2: f64, len: usize) -> Vec<f64> {
        (0..len)
            .map(|k| {
                let kf = k as f64;
                c1 * l2.powf(kf) + c2 * l1.norm().powf(kf) * (kf * l1.arg() + c3).cos()
            })
            .collect()
    }

    #[test]
    fn recovers_exact_coefficients() {
        let l1 = C64::new(-1.039_63, 1.470_80);
        let l2 = 1.079_26;
        let data = synth(-120.0, 3.5, 0.7, l1, l2, 12);
        let f = fit_decay_values(&data, l1, l2).unwrap();
        assert!((f.c1 + 120.0).abs() < 1e-8);
        assert!((f.c2 - 3.5).abs() < 1e-8);
        assert!((f.c3 - 0.7).abs() < 1e-8);
        assert!(f.rms_residual < 1e-9);
        assert!(f.phase_identifiable);
        for (k, v) in data.iter().enumerate() {
            assert!((f.model(k) - v).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_amplitude_flags_phase() {
        let l1 = C64::new(-1.0, 1.5);
        let data = synth(-50.0, 0.0, 0.0, l1, 1.1, 10);
        let f = fit_decay_values(&data, l1, 1.1).unwrap();
        assert!(f.c2.abs() < 1e-8);
        assert!(!f.phase_identifiable);
    }

    #[test]
    fn needs_six_points() {
        let l1 = C64::new(-1.0, 1.5);
        assert!(matches!(
            fit_decay_values(&[1.0; 5], l1, 1.1),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rank_deficiency_detected() {
        // a complex mode this close to lambda2 duplicates the pure column
        let l1 = C64::from_polar(1.1, 1e-10);
        assert!(matches!(
            fit_decay_values(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], l1, 1.1),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn pure_mode_fit() {
        let data: Vec<f64> = (0..8).map(|k| -3.0 * 1.5f64.powi(k)).collect();
        let f = fit_pure_mode(&data, 1.5).unwrap();
        assert!((f.c1 + 3.0).abs() < 1e-12);
        assert!(f.rms_residual < 1e-12);
    }
}
