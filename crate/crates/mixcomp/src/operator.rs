//! The operator estimate: Gram matrices of kernel cross-products, the matrix
//! `A_h = W2^(1/2) W1^(1/2) / N` sharing the singular values of the estimated
//! operator, and its spectrum.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{MixError, Result};
use crate::kernels::{phi_vec, KernelSpec};
use crate::linalg::{psd_sqrt, singular_values, Spectrum};
use crate::sample::{ComponentSample, PairData};

/// N x N Gram matrix `W[i][j] = phi_h^d(x_i, x_j)`.
///
/// Fills the upper triangle in parallel row blocks and mirrors it; every entry
/// comes straight from the closed form, so the result is independent of the
/// thread count.
pub fn build_gram(comp: &ComponentSample, spec: &KernelSpec) -> Result<Array2<f64>> {
    if spec.dim != comp.dim() {
        return Err(MixError::DimensionMismatch(format!(
            "kernel dimension {} does not match component dimension {}",
            spec.dim,
            comp.dim()
        )));
    }
    let n = comp.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = comp.row(i);
            (i..n)
                .map(|j| phi_vec(spec, xi, comp.row(j)).expect("dims checked"))
                .collect()
        })
        .collect();
    let mut w = Array2::<f64>::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let j = i + off;
            w[(i, j)] = *v;
            w[(j, i)] = *v;
        }
    }
    Ok(w)
}

/// `A_h = psd_sqrt(W2) . psd_sqrt(W1) / N`.
pub fn build_ahat(w1: &Array2<f64>, w2: &Array2<f64>) -> Result<Array2<f64>> {
    if w1.dim() != w2.dim() {
        return Err(MixError::DimensionMismatch(format!(
            "Gram matrices must share a size, got {:?} and {:?}",
            w1.dim(),
            w2.dim()
        )));
    }
    let r1 = psd_sqrt(w1)?;
    let r2 = psd_sqrt(w2)?;
    Ok(ahat_from_roots(&r1, &r2))
}

/// The product step of [`build_ahat`], reusable when the square roots are
/// already at hand.
pub(crate) fn ahat_from_roots(r1: &Array2<f64>, r2: &Array2<f64>) -> Array2<f64> {
    let n = r1.nrows() as f64;
    let mut a = crate::linalg::matmul(r2, r1);
    a.mapv_inplace(|v| v / n);
    a
}

/// Singular values and tail norms of the operator estimate for one pair.
pub fn spectrum(pair: &PairData, k1: &KernelSpec, k2: &KernelSpec) -> Result<Spectrum> {
    let w1 = build_gram(&pair.left, k1)?;
    let w2 = build_gram(&pair.right, k2)?;
    let a = build_ahat(&w1, &w2)?;
    Spectrum::from_sigmas(singular_values(&a)?)
}
