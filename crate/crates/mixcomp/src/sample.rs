//! Observation containers: per-component blocks of a multivariate sample.

use ndarray::Array2;

use crate::error::{MixError, Result};

/// Whether a component carries continuous measurements or discrete category
/// codes. Discrete data are embedded as reals (category `c` maps to the real
/// value `c`, 0-indexed) and run through the same kernel machinery; only the
/// component count, not the spectrum, is invariant to the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Continuous,
    Discrete,
}

/// `N` observations of one component, each a vector of dimension `d`.
#[derive(Debug, Clone)]
pub struct ComponentSample {
    /// Row `i` is observation `i`.
    pub values: Array2<f64>,
    pub kind: DataKind,
}

impl ComponentSample {
    pub fn new(values: Array2<f64>, kind: DataKind) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(MixError::BadSample(
                "component needs at least one observation and one coordinate".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MixError::NonFinite("component sample".into()));
        }
        Ok(Self { values, kind })
    }

    /// Builds a scalar (d = 1) component from a flat slice.
    pub fn scalar(values: &[f64], kind: DataKind) -> Result<Self> {
        let n = values.len();
        let arr = Array2::from_shape_vec((n, 1), values.to_vec())
            .map_err(|e| MixError::BadSample(e.to_string()))?;
        Self::new(arr, kind)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Observation `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i).to_slice().expect("contiguous row")
    }

    /// Concatenates several components observation-wise into one block.
    pub fn merge(parts: &[&ComponentSample]) -> Result<ComponentSample> {
        let n = parts
            .first()
            .ok_or_else(|| MixError::BadSample("merge of zero components".into()))?
            .n();
        if parts.iter().any(|p| p.n() != n) {
            return Err(MixError::DimensionMismatch(
                "merged components must share the observation count".into(),
            ));
        }
        let d: usize = parts.iter().map(|p| p.dim()).sum();
        let mut values = Array2::<f64>::zeros((n, d));
        for i in 0..n {
            let mut off = 0;
            for p in parts {
                for (j, v) in p.row(i).iter().enumerate() {
                    values[(i, off + j)] = *v;
                }
                off += p.dim();
            }
        }
        let kind = if parts.iter().all(|p| p.kind == DataKind::Discrete) {
            DataKind::Discrete
        } else {
            DataKind::Continuous
        };
        ComponentSample::new(values, kind)
    }
}

/// Paired observations of two components.
#[derive(Debug, Clone)]
pub struct PairData {
    pub left: ComponentSample,
    pub right: ComponentSample,
}

impl PairData {
    pub fn new(left: ComponentSample, right: ComponentSample) -> Result<Self> {
        if left.n() != right.n() {
            return Err(MixError::DimensionMismatch(format!(
                "paired components must share N, got {} and {}",
                left.n(),
                right.n()
            )));
        }
        Ok(Self { left, right })
    }

    pub fn n(&self) -> usize {
        self.left.n()
    }

    pub fn swapped(&self) -> PairData {
        PairData {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

/// A full K-component sample of paired observations.
#[derive(Debug, Clone)]
pub struct Sample {
    components: Vec<ComponentSample>,
}

impl Sample {
    pub fn new(components: Vec<ComponentSample>) -> Result<Self> {
        let n = components
            .first()
            .ok_or_else(|| MixError::BadSample("sample needs at least one component".into()))?
            .n();
        if components.iter().any(|c| c.n() != n) {
            return Err(MixError::DimensionMismatch(
                "all components must share the observation count".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    pub fn component(&self, k: usize) -> &ComponentSample {
        &self.components[k]
    }

    pub fn components(&self) -> &[ComponentSample] {
        &self.components
    }

    /// The pair `(components[i], components[j])`.
    pub fn pair(&self, i: usize, j: usize) -> Result<PairData> {
        PairData::new(self.components[i].clone(), self.components[j].clone())
    }

    /// Merges the blocks `left` and `right` into a two-component pair.
    pub fn block_pair(&self, left: &[usize], right: &[usize]) -> Result<PairData> {
        let gather = |idx: &[usize]| -> Result<ComponentSample> {
            let parts: Vec<&ComponentSample> = idx.iter().map(|&k| &self.components[k]).collect();
            ComponentSample::merge(&parts)
        };
        PairData::new(gather(left)?, gather(right)?)
    }
}
