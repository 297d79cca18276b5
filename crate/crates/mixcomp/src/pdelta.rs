//! Baseline diagnostics: the cell-probability matrix over a rectangular
//! partition of a bivariate sample. Its rank is a lower bound on the rank of
//! the operator the main estimator targets, which makes its spectrum a useful
//! side-by-side check. Rank-selection statistics on top of it are out of
//! scope here; only the matrix and its spectrum are built.

use ndarray::Array2;

use crate::error::{MixError, Result};
use crate::linalg::{singular_values, Spectrum};
use crate::sample::PairData;

/// A partition of the real line into half-open cells
/// `(-inf, e1], (e1, e2], ..., (e_last, +inf)` given by strictly increasing
/// edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    pub edges: Vec<f64>,
}

impl Partition1D {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() {
            return Err(MixError::TooFewPoints("a partition needs at least one edge".into()));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MixError::TooFewPoints(
                "partition edges must be strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    pub fn cell_count(&self) -> usize {
        self.edges.len() + 1
    }

    /// Index of the cell containing `x`; every real lands in exactly one cell.
    pub fn cell_of(&self, x: f64) -> usize {
        self.edges.partition_point(|e| *e < x)
    }
}

/// Empirical cell probabilities over a rectangular partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PDeltaMatrix {
    pub cells: Array2<f64>,
}

/// Edges at the right-continuous empirical quantiles `k / m0`,
/// `k = 1..m0-1`: the smallest order statistic whose ECDF reaches `k / m0`.
pub fn equiprobable_edges(values: &[f64], m0: usize) -> Result<Partition1D> {
    if m0 < 2 {
        return Err(MixError::TooFewPoints(format!("need M0 >= 2 cells, got {m0}")));
    }
    let n = values.len();
    if n < m0 {
        return Err(MixError::TooFewPoints(format!(
            "need at least M0 = {m0} observations, got {n}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut edges = Vec::with_capacity(m0 - 1);
    for k in 1..m0 {
        // smallest i with i/n >= k/m0, as a 1-based order statistic
        let i = (n * k).div_ceil(m0);
        edges.push(sorted[i - 1]);
    }
    if edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MixError::TooFewPoints(
            "ties collapse the equiprobable cells; partition is degenerate".into(),
        ));
    }
    Partition1D::new(edges)
}

/// Cell `(i, j)` holds the empirical fraction of observations with the first
/// component in cell `i` and the second in cell `j`.
pub fn build_pdelta_hat(
    pair: &PairData,
    p1: &Partition1D,
    p2: &Partition1D,
) -> Result<PDeltaMatrix> {
    if pair.left.dim() != 1 || pair.right.dim() != 1 {
        return Err(MixError::DimensionMismatch(
            "cell-probability matrices are built from scalar components".into(),
        ));
    }
    let n = pair.n();
    let mut cells = Array2::<f64>::zeros((p1.cell_count(), p2.cell_count()));
    let weight = 1.0 / n as f64;
    for idx in 0..n {
        let i = p1.cell_of(pair.left.row(idx)[0]);
        let j = p2.cell_of(pair.right.row(idx)[0]);
        cells[(i, j)] += weight;
    }
    Ok(PDeltaMatrix { cells })
}

/// Singular values and tail norms of the cell matrix.
pub fn pdelta_spectrum(p: &PDeltaMatrix) -> Result<Spectrum> {
    Spectrum::from_sigmas(singular_values(&p.cells)?)
}
