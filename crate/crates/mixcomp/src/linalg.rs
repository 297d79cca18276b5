//! Dense symmetric PSD square roots, singular values and tail norms.
//!
//! Decompositions and the heavy matrix products run on `faer`; the ndarray
//! types stay at the API boundary.

use faer::{Mat, Side};
use ndarray::Array2;

use crate::error::{MixError, Result};

/// Singular values in descending order together with their tail norms
/// `r_j = sqrt(sum_{i >= j} sigma_i^2)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    pub sigmas: Vec<f64>,
    pub tail_norms: Vec<f64>,
}

impl Spectrum {
    /// Builds the spectrum from descending nonnegative singular values.
    pub fn from_sigmas(sigmas: Vec<f64>) -> Result<Self> {
        let tail_norms = tail_norms(&sigmas)?;
        Ok(Self { sigmas, tail_norms })
    }

    /// Number of tail norms at or above `tau`. Ties count (the defining rule
    /// uses `>=`).
    pub fn count_at_or_above(&self, tau: f64) -> usize {
        self.tail_norms.iter().filter(|r| **r >= tau).count()
    }
}

fn to_faer(a: &Array2<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_ndarray(m: &Mat<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// `a . b` on the faer backend.
pub(crate) fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let prod = to_faer(a) * to_faer(b);
    to_ndarray(&prod)
}

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending plus an
/// eigenvector matrix whose column `k` belongs to eigenvalue `k`.
pub(crate) fn sym_eigh(s: &Array2<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(MixError::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            n,
            s.ncols()
        )));
    }
    let evd = to_faer(s)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| MixError::Linalg(format!("self-adjoint eigendecomposition: {e:?}")))?;
    let lam: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    Ok((lam, evd.U().to_owned()))
}

/// Symmetric PSD square root.
///
/// Eigenvalues below the roundoff floor `n * lambda_max * eps` are clamped to
/// 0 (Gram matrices are PSD in exact arithmetic); anything below ten times
/// the negative of that floor is a genuine violation and is rejected.
pub fn psd_sqrt(s: &Array2<f64>) -> Result<Array2<f64>> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(MixError::DimensionMismatch(format!(
            "psd_sqrt expects a square matrix, got {}x{}",
            n,
            s.ncols()
        )));
    }
    let mut max_abs = 0.0f64;
    for v in s.iter() {
        if !v.is_finite() {
            return Err(MixError::NonFinite("psd_sqrt input".into()));
        }
        max_abs = max_abs.max(v.abs());
    }
    let sym_tol = 1e-8 * max_abs.max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (s[(i, j)] - s[(j, i)]).abs();
            if d > sym_tol {
                return Err(MixError::NotSymmetric(format!(
                    "entry ({i},{j}) differs from its transpose by {d:e}"
                )));
            }
        }
    }

    let (vals, u) = sym_eigh(s)?;
    let lambda_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let clamp_floor = n as f64 * lambda_max * f64::EPSILON;
    if let Some(bad) = vals.iter().find(|&&v| v < -10.0 * clamp_floor) {
        return Err(MixError::NotPsd(format!(
            "eigenvalue {bad:e} below tolerance {:e}",
            -10.0 * clamp_floor
        )));
    }

    // R = C C^T with C = U diag(lambda^(1/4)), then symmetrized so the
    // result is exactly symmetric.
    let quarter: Vec<f64> = vals
        .iter()
        .map(|lam| if *lam < clamp_floor { 0.0 } else { lam.powf(0.25) })
        .collect();
    let c = Mat::from_fn(n, n, |i, j| u[(i, j)] * quarter[j]);
    let r = &c * c.transpose();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        0.5 * (r[(i, j)] + r[(j, i)])
    }))
}

/// Singular values of a real matrix, descending.
pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(MixError::NonFinite("singular_values input".into()));
    }
    to_faer(a)
        .singular_values()
        .map_err(|e| MixError::Linalg(format!("singular value decomposition: {e:?}")))
}

/// Tail norms `r_j = sqrt(sum_{i >= j} sigma_i^2)`, accumulated from the
/// smallest singular value upward so small tails do not cancel.
pub fn tail_norms(sigmas: &[f64]) -> Result<Vec<f64>> {
    for w in sigmas.windows(2) {
        if w[1] > w[0] {
            return Err(MixError::NotSorted(format!(
                "{} followed by {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(last) = sigmas.last() {
        if *last < 0.0 {
            return Err(MixError::NotSorted(format!("negative singular value {last}")));
        }
    }
    let mut out = vec![0.0; sigmas.len()];
    let mut acc = 0.0f64;
    for (i, s) in sigmas.iter().enumerate().rev() {
        acc += s * s;
        out[i] = acc.sqrt();
    }
    Ok(out)
}
