//! Polynomial roots and small dense eigenproblems.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Residual bound for a reported root: `|P(z)| < ROOT_RESIDUAL_TOL * max(1, |z|^q)`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// Relative tolerance for treating two magnitudes as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for C64 {
    fn from(z: ComplexValue) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Horner evaluation of a polynomial with coefficients in descending order.
pub fn eval_poly(coeffs: &[f64], z: C64) -> C64 {
    coeffs
        .iter()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn eval_with_derivative(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn residual_scale(z: C64, degree: usize) -> f64 {
    z.norm().powi(degree as i32).max(1.0)
}

/// True when `z` is real to within the tie tolerance.
pub fn is_real(z: C64) -> bool {
    z.im.abs() <= TIE_TOL * z.norm().max(f64::MIN_POSITIVE)
}

/// Sort by descending magnitude; runs of tied magnitudes by ascending argument.
pub fn sort_by_magnitude(values: &mut [C64]) {
    values.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < values.len() {
        let lead = values[start].norm();
        let mut end = start + 1;
        while end < values.len() && lead - values[end].norm() <= TIE_TOL * lead.max(1e-300) {
            end += 1;
        }
        values[start..end]
            .sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap_or(Ordering::Equal));
        start = end;
    }
}

/// Companion matrix of a monic polynomial given in descending order.
pub fn companion(coeffs: &[f64]) -> DMatrix<f64> {
    let q = coeffs.len() - 1;
    let mut c = DMatrix::zeros(q, q);
    for k in 0..q {
        c[(0, k)] = -coeffs[k + 1];
    }
    for k in 1..q {
        c[(k, k - 1)] = 1.0;
    }
    c
}

/// Iteration cap for the Schur decomposition, per unit of dimension.
const SCHUR_ITERATIONS_PER_DIM: usize = 2_000;

fn schur_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<C64>> {
    Schur::try_new(m.clone(), f64::EPSILON, SCHUR_ITERATIONS_PER_DIM * m.nrows().max(1))
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
}

/// All roots of a monic polynomial (coefficients in descending order).
///
/// Exact zero roots are split off first. The rest are eigenvalues of the
/// companion matrix, each refined by one Newton step that is kept only if it
/// lowers the residual.
pub fn roots(coeffs: &[f64]) -> Result<Vec<C64>> {
    if coeffs.len() < 2 {
        return Err(Error::Domain("polynomial must have degree >= 1".into()));
    }
    if coeffs[0] != 1.0 {
        return Err(Error::Domain(format!(
            "polynomial must be monic, leading coefficient is {}",
            coeffs[0]
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite polynomial coefficient".into()));
    }
    let q = coeffs.len() - 1;
    let zeros = coeffs.iter().rev().take_while(|&&c| c == 0.0).count();
    let reduced = &coeffs[..coeffs.len() - zeros];
    let mut found = vec![C64::new(0.0, 0.0); zeros];
    if reduced.len() > 1 {
        let eig = schur_eigenvalues(&companion(reduced)).ok_or_else(|| Error::RootsNotConverged {
            best: Vec::new(),
            residual: f64::INFINITY,
        })?;
        found.extend(eig);
    }
    let mut worst = 0.0f64;
    for z in found.iter_mut() {
        let (p, dp) = eval_with_derivative(coeffs, *z);
        if dp.norm() > 0.0 {
            let polished = *z - p / dp;
            if eval_poly(coeffs, polished).norm() < p.norm() {
                *z = polished;
            }
        }
        worst = worst.max(eval_poly(coeffs, *z).norm() / residual_scale(*z, q));
    }
    sort_by_magnitude(&mut found);
    if worst >= ROOT_RESIDUAL_TOL {
        return Err(Error::RootsNotConverged {
            best: found,
            residual: worst,
        });
    }
    Ok(found)
}

/// Largest relative residual over a set of roots.
pub fn max_residual(coeffs: &[f64], zs: &[C64]) -> f64 {
    let q = coeffs.len() - 1;
    zs.iter()
        .map(|&z| eval_poly(coeffs, z).norm() / residual_scale(z, q))
        .fold(0.0, f64::max)
}

/// Characteristic polynomial `det(zI - m)` in descending order, by the
/// Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        mk = m * (&mk + &id * coeffs[k - 1]);
        coeffs.push(-mk.trace() / k as f64);
    }
    coeffs
}

/// Eigenvalues of a square real matrix, sorted as in [`sort_by_magnitude`].
/// Falls back to the roots of the characteristic polynomial when the Schur
/// iteration stalls, as it does on nilpotent matrices.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<C64>> {
    let mut ev = match schur_eigenvalues(m) {
        Some(ev) => ev,
        None => roots(&characteristic_polynomial(m))?,
    };
    sort_by_magnitude(&mut ev);
    Ok(ev)
}

/// Unit null vector of `m - lambda I` for a real `lambda`, taken from the
/// smallest singular value.
pub fn real_eigenvector(m: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(Ordering::Equal))
        .expect("nonempty matrix");
    v_t.row(idx).transpose()
}

/// Scale so that the largest-magnitude entry is `+1`.
pub fn normalize_max_positive(v: &DVector<f64>) -> DVector<f64> {
    let (idx, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(Ordering::Equal))
        .expect("nonempty vector");
    v / v[idx]
}

/// Angle between two real vectors, ignoring sign.
pub fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ua = a.normalize();
    let mut ub = b.normalize();
    if ua.dot(&ub) < 0.0 {
        ub = -ub;
    }
    // chord form stays accurate for nearly parallel vectors
    2.0 * ((&ua - &ub).norm() / 2.0).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_roots() {
        let d: f64 = 1.192_896_462_151_224_6;
        let z = roots(&[1.0, -d, -d]).unwrap();
        let disc = (d * d + 4.0 * d).sqrt();
        assert_relative_eq!(z[0].re, (d + disc) / 2.0, epsilon = 1e-13);
        assert_relative_eq!(z[1].re, (d - disc) / 2.0, epsilon = 1e-13);
        assert!(z.iter().all(|r| r.im == 0.0));
    }

    #[test]
    fn monomial_roots_are_zero() {
        let z = roots(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.iter().all(|r| r.norm() < 1e-3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(roots(&[1.0]).is_err());
        assert!(roots(&[2.0, 1.0]).is_err());
        assert!(roots(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn unit_circle_roots_sort_by_argument() {
        // z^2 + 1
        let z = roots(&[1.0, 0.0, 1.0]).unwrap();
        assert!(z[0].im < 0.0 && z[1].im > 0.0);
        assert!(max_residual(&[1.0, 0.0, 1.0], &z) < 1e-14);
    }

    #[test]
    fn companion_eigenvalues_match_roots() {
        let c = [1.0, 1.0, 1.0, -3.5];
        let a = roots(&c).unwrap();
        let b = eigenvalues(&companion(&c)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn nilpotent_matrix_eigenvalues() {
        let mut m = DMatrix::zeros(4, 4);
        for k in 0..3 {
            m[(k, k + 1)] = 1.0;
        }
        let ev = eigenvalues(&m).unwrap();
        assert_eq!(ev.len(), 4);
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn faddeev_leverrier_matches_companion() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let got = characteristic_polynomial(&companion(&c));
        for (a, b) in got.iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_of_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let v = normalize_max_positive(&real_eigenvector(&m, 2.0));
        assert_relative_eq!(v[0], 1.0, epsilon = 1e-14);
        assert!(v[1].abs() < 1e-14);
    }

    #[test]
    fn angle_of_parallel_vectors_is_tiny() {
        let a = DVector::from_vec(vec![1.0, 0.5, 0.25]);
        let b = &a * -3.0;
        assert!(angle_between(&a, &b) < 1e-15);
        let c = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let e = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(angle_between(&c, &e), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }
}
