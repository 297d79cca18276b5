//! The component-count estimator: bandwidth selection, the per-pair
//! thresholding rule, and the pairwise / bipartition strategies for samples
//! with more than two components.

use ndarray::Array2;

use crate::error::{MixError, Result};
use crate::kernels::{analytic_l, KernelFamily, KernelSpec};
use crate::linalg::{psd_sqrt, singular_values, Spectrum};
use crate::operator::{ahat_from_roots, build_gram};
use crate::sample::{ComponentSample, PairData, Sample};
use crate::threshold::{
    closed_form_threshold, raw_stats_from_grams, solve_threshold, solve_threshold_corrected,
    ConcentrationStats,
};

/// Bandwidth policy per component.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `h = 1.06 * mean per-coordinate sample std * N^(-1/6)`
    Silverman,
    /// A fixed bandwidth shared by every component.
    Fixed(f64),
}

/// How multi-component samples are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Maximum over all C(K,2) variable pairs.
    Pairs,
    /// Maximum over nontrivial bipartitions of the variables, each block
    /// treated as one multivariate component under a product kernel.
    Bipartitions,
}

/// Which threshold rule gates the tail norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdForm {
    /// Numerically solved rule (recommended; tighter).
    Solved,
    /// Conservative closed form, using the distribution-free supremum.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorConfig {
    pub delta: f64,
    pub kernel_family: KernelFamily,
    pub bandwidth: Bandwidth,
    pub strategy: Strategy,
    pub threshold_form: ThresholdForm,
    /// Cap on the number of bipartition units evaluated.
    pub max_partitions: usize,
    /// Keep the lower-order variance correction in the solved rule.
    pub keep_correction_term: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            kernel_family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::Silverman,
            strategy: Strategy::Pairs,
            threshold_form: ThresholdForm::Solved,
            max_partitions: 256,
            keep_correction_term: false,
        }
    }
}

/// Which components (or blocks of components) formed a unit.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitIndices {
    Pair { left: usize, right: usize },
    Bipartition { left: Vec<usize>, right: Vec<usize> },
}

impl std::fmt::Display for UnitIndices {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitIndices::Pair { left, right } => write!(f, "({left},{right})"),
            UnitIndices::Bipartition { left, right } => write!(f, "({left:?}|{right:?})"),
        }
    }
}

/// Spectrum and delta-independent concentration statistics of one unit.
/// Thresholding for any `delta` can be replayed from this without touching
/// the data again.
#[derive(Debug, Clone)]
pub struct UnitSpectrum {
    pub indices: UnitIndices,
    pub k_left: KernelSpec,
    pub k_right: KernelSpec,
    pub n: usize,
    pub spectrum: Spectrum,
    pub l_hat: f64,
    pub sigma2_hat: f64,
}

/// One thresholded unit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairEstimate {
    pub indices: UnitIndices,
    pub m_hat: usize,
    pub spectrum: Spectrum,
    pub tau: f64,
    pub h_left: f64,
    pub h_right: f64,
}

/// The aggregated estimate: the maximum unit count and the per-unit detail.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Estimate {
    pub m_hat: usize,
    pub strategy: Strategy,
    pub per_unit: Vec<PairEstimate>,
    pub warnings: Vec<String>,
}

/// Rule-of-thumb bandwidth `1.06 * sigma_bar * N^(-1/6)`, with `sigma_bar`
/// the mean per-coordinate sample standard deviation of the component.
pub fn silverman_bandwidth(comp: &ComponentSample, pair_n: usize) -> Result<f64> {
    if comp.n() < 2 {
        return Err(MixError::DegenerateSample(
            "Silverman's rule needs at least two observations".into(),
        ));
    }
    let n = comp.n() as f64;
    let mut sigma_sum = 0.0;
    for col in comp.values.columns() {
        let mean = col.sum() / n;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        sigma_sum += (ss / (n - 1.0)).sqrt();
    }
    let sigma_bar = sigma_sum / comp.dim() as f64;
    if !(sigma_bar > 0.0) {
        return Err(MixError::DegenerateSample(
            "zero spread: Silverman bandwidth undefined".into(),
        ));
    }
    Ok(1.06 * sigma_bar * (pair_n as f64).powf(-1.0 / 6.0))
}

fn kernel_for(cfg: &EstimatorConfig, comp: &ComponentSample, pair_n: usize) -> Result<KernelSpec> {
    let h = match cfg.bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(comp, pair_n)?,
        Bandwidth::Fixed(h) => h,
    };
    KernelSpec::new(cfg.kernel_family, h, comp.dim())
}

/// Gram matrix plus its PSD square root for one component.
struct PreparedComponent {
    kernel: KernelSpec,
    gram: Array2<f64>,
    root: Array2<f64>,
}

fn prepare_component(
    comp: &ComponentSample,
    cfg: &EstimatorConfig,
    pair_n: usize,
) -> Result<PreparedComponent> {
    let kernel = kernel_for(cfg, comp, pair_n)?;
    let gram = build_gram(comp, &kernel)?;
    let root = psd_sqrt(&gram)?;
    Ok(PreparedComponent { kernel, gram, root })
}

fn unit_from_prepared(
    left: &PreparedComponent,
    right: &PreparedComponent,
    n: usize,
    indices: UnitIndices,
) -> Result<UnitSpectrum> {
    let a = ahat_from_roots(&left.root, &right.root);
    let spectrum = Spectrum::from_sigmas(singular_values(&a)?)?;
    let (l_hat, sigma2_hat) = raw_stats_from_grams(&left.gram, &right.gram)?;
    Ok(UnitSpectrum {
        indices,
        k_left: left.kernel,
        k_right: right.kernel,
        n,
        spectrum,
        l_hat,
        sigma2_hat,
    })
}

/// Spectrum and concentration statistics for one explicit pair.
pub fn compute_pair_unit(
    pair: &PairData,
    cfg: &EstimatorConfig,
    indices: UnitIndices,
) -> Result<UnitSpectrum> {
    let n = pair.n();
    if n < 2 {
        return Err(MixError::DegenerateSample(format!("need N >= 2, got {n}")));
    }
    let left = prepare_component(&pair.left, cfg, n)?;
    let right = prepare_component(&pair.right, cfg, n)?;
    unit_from_prepared(&left, &right, n, indices)
}

/// Applies the configured threshold rule to one unit.
pub fn threshold_for_unit(unit: &UnitSpectrum, cfg: &EstimatorConfig) -> Result<f64> {
    match cfg.threshold_form {
        ThresholdForm::Solved => {
            let stats = ConcentrationStats::new(unit.l_hat, unit.sigma2_hat, unit.n, cfg.delta)?;
            if cfg.keep_correction_term {
                solve_threshold_corrected(&stats)
            } else {
                solve_threshold(&stats)
            }
        }
        ThresholdForm::ClosedForm => {
            let l = analytic_l(&unit.k_left, &unit.k_right);
            closed_form_threshold(l, 2.0 * unit.sigma2_hat, unit.n, cfg.delta)
        }
    }
}

/// Thresholds every unit at the configured `delta` and takes the maximum.
pub fn decide_from_units(units: &[UnitSpectrum], cfg: &EstimatorConfig) -> Result<Estimate> {
    if units.is_empty() {
        return Err(MixError::BadSample("no units to threshold".into()));
    }
    let mut per_unit = Vec::with_capacity(units.len());
    let mut warnings = Vec::new();
    for unit in units {
        let tau = threshold_for_unit(unit, cfg)?;
        let m_hat = unit.spectrum.count_at_or_above(tau);
        if m_hat == 0 {
            warnings.push(format!(
                "unit {} selected 0 components: threshold {tau:.6} exceeds the full spectrum norm {:.6}",
                unit.indices, unit.spectrum.tail_norms[0]
            ));
        }
        per_unit.push(PairEstimate {
            indices: unit.indices.clone(),
            m_hat,
            spectrum: unit.spectrum.clone(),
            tau,
            h_left: unit.k_left.h,
            h_right: unit.k_right.h,
        });
    }
    let m_hat = per_unit.iter().map(|u| u.m_hat).max().unwrap_or(0);
    Ok(Estimate {
        m_hat,
        strategy: cfg.strategy,
        per_unit,
        warnings,
    })
}

/// The estimator for one pair of components.
pub fn estimate_pair(pair: &PairData, cfg: &EstimatorConfig) -> Result<PairEstimate> {
    let unit = compute_pair_unit(pair, cfg, UnitIndices::Pair { left: 0, right: 1 })?;
    let est = decide_from_units(std::slice::from_ref(&unit), cfg)?;
    Ok(est.per_unit.into_iter().next().expect("one unit in, one out"))
}

/// Advances `combo` to the next size-|combo| subset of `{0..k}` in
/// lexicographic order; false once exhausted.
fn next_combination(combo: &mut [usize], k: usize) -> bool {
    let size = combo.len();
    let mut i = size;
    while i > 0 {
        i -= 1;
        if combo[i] != i + k - size {
            combo[i] += 1;
            for j in (i + 1)..size {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Nontrivial bipartitions of `{0..k}`, ordered by the size of the smaller
/// block and then lexicographically, truncated at `cap` units.
pub fn bipartitions(k: usize, cap: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k > 30 {
        return Err(MixError::TooManyPartitions(format!(
            "bipartition enumeration is limited to K <= 30, got {k}"
        )));
    }
    let mut out = Vec::new();
    'outer: for size in 1..=(k / 2) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            // a half-size block and its complement describe the same split;
            // keep the representative containing index 0
            if !(2 * size == k && combo[0] != 0) {
                let left = combo.clone();
                let right: Vec<usize> = (0..k).filter(|i| !left.contains(i)).collect();
                out.push((left, right));
                if out.len() >= cap {
                    break 'outer;
                }
            }
            if !next_combination(&mut combo, k) {
                break;
            }
        }
    }
    Ok(out)
}

/// Per-unit spectra for the configured strategy, without thresholding.
///
/// Under the pairs strategy each component's Gram matrix and square root are
/// computed once and shared by every pair touching that component; the result
/// is identical to running each pair in isolation because both the bandwidth
/// and the Gram matrix depend only on the component's own data.
pub fn compute_units(sample: &Sample, cfg: &EstimatorConfig) -> Result<Vec<UnitSpectrum>> {
    let k = sample.k();
    if k < 2 {
        return Err(MixError::BadSample(format!(
            "estimation needs K >= 2 components, got {k}"
        )));
    }
    let n = sample.n();
    if n < 2 {
        return Err(MixError::DegenerateSample(format!("need N >= 2, got {n}")));
    }
    match cfg.strategy {
        Strategy::Pairs => {
            let prepared: Vec<PreparedComponent> = sample
                .components()
                .iter()
                .map(|c| prepare_component(c, cfg, n))
                .collect::<Result<_>>()?;
            let mut units = Vec::with_capacity(k * (k - 1) / 2);
            for i in 0..k {
                for j in (i + 1)..k {
                    units.push(unit_from_prepared(
                        &prepared[i],
                        &prepared[j],
                        n,
                        UnitIndices::Pair { left: i, right: j },
                    )?);
                }
            }
            Ok(units)
        }
        Strategy::Bipartitions => {
            let splits = bipartitions(k, cfg.max_partitions)?;
            let mut units = Vec::with_capacity(splits.len());
            for (left, right) in splits {
                let pair = sample.block_pair(&left, &right)?;
                units.push(compute_pair_unit(
                    &pair,
                    cfg,
                    UnitIndices::Bipartition { left, right },
                )?);
            }
            Ok(units)
        }
    }
}

/// Full estimator: per-unit estimates under the configured strategy, with the
/// overall count the maximum across units.
pub fn estimate(sample: &Sample, cfg: &EstimatorConfig) -> Result<Estimate> {
    let units = compute_units(sample, cfg)?;
    decide_from_units(&units, cfg)
}
