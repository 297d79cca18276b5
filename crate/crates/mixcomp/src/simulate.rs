//! Seeded mixture generators for the five built-in Monte Carlo designs plus
//! free-form mixtures, and the replication harness that turns them into
//! selection-frequency tables.
//!
//! Randomness comes from ChaCha8 with a fixed stream layout: stream 0 of the
//! replicate seed drives the latent labels, stream `1 + k` drives component
//! `k`. Draws are consumed observation by observation, so the first `n`
//! observations do not depend on the requested sample size, and replicates
//! are independent of how the harness schedules them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{MixError, Result};
use crate::estimator::{compute_units, decide_from_units, estimate, EstimatorConfig};
use crate::sample::{ComponentSample, DataKind, Sample};

/// A one-dimensional conditional law for a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum Law1d {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

/// Free-form mixture: `weights[m]` selects the latent class and
/// `components[m][k]` lists the independent coordinate laws of component `k`
/// given class `m`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CustomDesign {
    pub weights: Vec<f64>,
    pub components: Vec<Vec<Vec<Law1d>>>,
}

/// The five built-in simulation designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BuiltinDesign {
    /// 3 bivariate normals at (0,0), (1,2), (2,1), identity covariance.
    Design1,
    /// 3 uniform squares on [m-1, m]^2, m = 1..3.
    Design2,
    /// 3 bivariate normals at (0,0), (3,3), (-3,-3).
    Design3,
    /// 5 uniform squares on [m-1, m]^2, m = 1..5.
    Design4,
    /// 3 eight-variate normals, K = 8.
    Design5,
}

impl BuiltinDesign {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::Design1),
            2 => Ok(Self::Design2),
            3 => Ok(Self::Design3),
            4 => Ok(Self::Design4),
            5 => Ok(Self::Design5),
            _ => Err(MixError::BadDesign(format!("no builtin design {i}"))),
        }
    }

    /// True number of mixture components.
    pub fn true_m(&self) -> usize {
        match self {
            Self::Design1 | Self::Design2 | Self::Design3 | Self::Design5 => 3,
            Self::Design4 => 5,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Design1 => "design1",
            Self::Design2 => "design2",
            Self::Design3 => "design3",
            Self::Design4 => "design4",
            Self::Design5 => "design5",
        }
    }

    fn custom(&self) -> CustomDesign {
        fn normals(mus: &[&[f64]]) -> CustomDesign {
            let m = mus.len();
            CustomDesign {
                weights: vec![1.0 / m as f64; m],
                components: mus
                    .iter()
                    .map(|mu| {
                        mu.iter()
                            .map(|&mean| vec![Law1d::Normal { mean, sd: 1.0 }])
                            .collect()
                    })
                    .collect(),
            }
        }
        fn uniform_squares(m: usize) -> CustomDesign {
            CustomDesign {
                weights: vec![1.0 / m as f64; m],
                components: (1..=m)
                    .map(|c| {
                        let law = Law1d::Uniform {
                            lo: (c - 1) as f64,
                            hi: c as f64,
                        };
                        vec![vec![law], vec![law]]
                    })
                    .collect(),
            }
        }
        match self {
            Self::Design1 => normals(&[&[0.0, 0.0], &[1.0, 2.0], &[2.0, 1.0]]),
            Self::Design2 => uniform_squares(3),
            Self::Design3 => normals(&[&[0.0, 0.0], &[3.0, 3.0], &[-3.0, -3.0]]),
            Self::Design4 => uniform_squares(5),
            Self::Design5 => normals(&[
                &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                &[1.0, 2.0, 0.5, 1.0, 0.75, 1.25, 0.25, 0.5],
                &[2.0, 1.0, 1.0, 0.5, 1.25, 0.75, 0.5, 0.25],
            ]),
        }
    }
}

/// Either a built-in design or a free-form mixture.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum DesignSpec {
    Builtin(BuiltinDesign),
    Custom(CustomDesign),
}

impl DesignSpec {
    pub fn label(&self) -> String {
        match self {
            DesignSpec::Builtin(b) => b.label().to_string(),
            DesignSpec::Custom(_) => "custom".to_string(),
        }
    }

    fn resolve(&self) -> Result<CustomDesign> {
        let design = match self {
            DesignSpec::Builtin(b) => b.custom(),
            DesignSpec::Custom(c) => c.clone(),
        };
        validate(&design)?;
        Ok(design)
    }
}

fn validate(design: &CustomDesign) -> Result<()> {
    let m = design.weights.len();
    if m == 0 {
        return Err(MixError::BadDesign("no mixture components".into()));
    }
    if design.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(MixError::BadDesign("weights must be positive".into()));
    }
    let total: f64 = design.weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MixError::BadDesign(format!("weights sum to {total}, expected 1")));
    }
    if design.components.len() != m {
        return Err(MixError::BadDesign(format!(
            "{} weight(s) but {} component row(s)",
            m,
            design.components.len()
        )));
    }
    let k = design.components[0].len();
    if k == 0 {
        return Err(MixError::BadDesign("each class needs at least one component".into()));
    }
    for row in &design.components {
        if row.len() != k {
            return Err(MixError::BadDesign("ragged component table".into()));
        }
        for (kk, coords) in row.iter().enumerate() {
            if coords.is_empty() || coords.len() != design.components[0][kk].len() {
                return Err(MixError::BadDesign(format!(
                    "component {kk} must have one fixed dimension across classes"
                )));
            }
            for law in coords {
                match law {
                    Law1d::Normal { sd, mean } => {
                        if !(*sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
                            return Err(MixError::BadDesign(format!("bad normal law {law:?}")));
                        }
                    }
                    Law1d::Uniform { lo, hi } => {
                        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                            return Err(MixError::BadDesign(format!("bad uniform law {law:?}")));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn draw(law: &Law1d, rng: &mut ChaCha8Rng) -> f64 {
    match law {
        Law1d::Normal { mean, sd } => {
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        }
        Law1d::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
    }
}

/// `n` i.i.d. draws from the design, deterministic in `(design, n, seed)`.
pub fn generate(design: &DesignSpec, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(MixError::BadSample("cannot generate an empty sample".into()));
    }
    let spec = design.resolve()?;
    let k = spec.components[0].len();

    let mut label_rng = ChaCha8Rng::seed_from_u64(seed);
    label_rng.set_stream(0);
    let labels: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = label_rng.random();
            let mut acc = 0.0;
            for (m, w) in spec.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    return m;
                }
            }
            spec.weights.len() - 1
        })
        .collect();

    let mut components = Vec::with_capacity(k);
    for kk in 0..k {
        let dim = spec.components[0][kk].len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + kk as u64);
        let mut values = ndarray::Array2::<f64>::zeros((n, dim));
        for (i, &label) in labels.iter().enumerate() {
            for (d, law) in spec.components[label][kk].iter().enumerate() {
                values[(i, d)] = draw(law, &mut rng);
            }
        }
        components.push(ComponentSample::new(values, DataKind::Continuous)?);
    }
    Sample::new(components)
}

/// Selection counts over seeded replicates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FrequencyTable {
    pub design: String,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub config: EstimatorConfig,
    /// `m_hat -> number of replicates selecting it`
    pub counts: BTreeMap<usize, usize>,
    /// error message -> number of failed replicates
    pub errors: BTreeMap<String, usize>,
}

impl FrequencyTable {
    pub fn frequency(&self, m: usize) -> f64 {
        *self.counts.get(&m).unwrap_or(&0) as f64 / self.reps as f64
    }

    /// Fraction of replicates selecting strictly more than `m`.
    pub fn frequency_above(&self, m: usize) -> f64 {
        let c: usize = self
            .counts
            .iter()
            .filter(|(k, _)| **k > m)
            .map(|(_, v)| *v)
            .sum();
        c as f64 / self.reps as f64
    }
}

fn fold_outcomes(
    design: &DesignSpec,
    n: usize,
    base_seed: u64,
    cfg: &EstimatorConfig,
    outcomes: Vec<std::result::Result<usize, String>>,
) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    let mut errors = BTreeMap::new();
    let reps = outcomes.len();
    for outcome in outcomes {
        match outcome {
            Ok(m) => *counts.entry(m).or_insert(0) += 1,
            Err(e) => *errors.entry(e).or_insert(0) += 1,
        }
    }
    FrequencyTable {
        design: design.label(),
        n,
        reps,
        base_seed,
        config: *cfg,
        counts,
        errors,
    }
}

/// Runs `reps` seeded replicates (replicate `r` uses seed `base_seed + r`)
/// and aggregates the selected counts. Per-replicate estimation errors are
/// recorded in the table, not fatal.
pub fn run_montecarlo(
    design: &DesignSpec,
    n: usize,
    reps: usize,
    cfg: &EstimatorConfig,
    base_seed: u64,
) -> Result<FrequencyTable> {
    if reps == 0 {
        return Err(MixError::BadDesign("reps must be >= 1".into()));
    }
    design.resolve()?;
    let outcomes: Vec<std::result::Result<usize, String>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r as u64);
            let sample = generate(design, n, seed).map_err(|e| e.to_string())?;
            let est = estimate(&sample, cfg).map_err(|e| e.to_string())?;
            Ok(est.m_hat)
        })
        .collect();
    Ok(fold_outcomes(design, n, base_seed, cfg, outcomes))
}

/// Replays each replicate's spectra against several `delta` values at once.
///
/// The spectrum and the concentration statistics do not depend on `delta`,
/// so one pass over the data yields the table for every requested value;
/// results are identical to calling [`run_montecarlo`] per delta with the
/// same seeds.
pub fn run_delta_sweep(
    design: &DesignSpec,
    n: usize,
    reps: usize,
    deltas: &[f64],
    cfg: &EstimatorConfig,
    base_seed: u64,
) -> Result<Vec<FrequencyTable>> {
    if reps == 0 {
        return Err(MixError::BadDesign("reps must be >= 1".into()));
    }
    if deltas.is_empty() {
        return Err(MixError::BadDelta("no delta values requested".into()));
    }
    design.resolve()?;
    let per_rep: Vec<std::result::Result<Vec<usize>, String>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r as u64);
            let sample = generate(design, n, seed).map_err(|e| e.to_string())?;
            let units = compute_units(&sample, cfg).map_err(|e| e.to_string())?;
            deltas
                .iter()
                .map(|&delta| {
                    let mut cfg_d = *cfg;
                    cfg_d.delta = delta;
                    decide_from_units(&units, &cfg_d)
                        .map(|est| est.m_hat)
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();

    Ok(deltas
        .iter()
        .enumerate()
        .map(|(di, &delta)| {
            let mut cfg_d = *cfg;
            cfg_d.delta = delta;
            let outcomes = per_rep
                .iter()
                .map(|rep| match rep {
                    Ok(ms) => Ok(ms[di]),
                    Err(e) => Err(e.clone()),
                })
                .collect();
            fold_outcomes(design, n, base_seed, &cfg_d, outcomes)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(b: BuiltinDesign) -> DesignSpec {
        DesignSpec::Builtin(b)
    }

    #[test]
    fn design2_first_component_mean() {
        let sample = generate(&d(BuiltinDesign::Design2), 100_000, 1).unwrap();
        let mean = sample.component(0).values.column(0).sum() / 100_000.0;
        assert!((mean - 1.5).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn design1_per_coordinate_variance() {
        let sample = generate(&d(BuiltinDesign::Design1), 100_000, 2).unwrap();
        for k in 0..2 {
            let col = sample.component(k).values.column(0);
            let mean = col.sum() / 100_000.0;
            let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 99_999.0;
            assert!((var - 5.0 / 3.0).abs() < 0.02, "component {k}: var = {var}");
        }
    }

    #[test]
    fn design5_shape_and_mean_vector() {
        let spec = BuiltinDesign::Design5.custom();
        assert_eq!(spec.components.len(), 3);
        assert_eq!(spec.components[1].len(), 8);
        let mu2: Vec<f64> = spec.components[1]
            .iter()
            .map(|coords| match coords[0] {
                Law1d::Normal { mean, .. } => mean,
                _ => panic!("design 5 is normal"),
            })
            .collect();
        assert_eq!(mu2, vec![1.0, 2.0, 0.5, 1.0, 0.75, 1.25, 0.25, 0.5]);
        let sample = generate(&d(BuiltinDesign::Design5), 500, 3).unwrap();
        assert_eq!(sample.k(), 8);
        assert_eq!(sample.n(), 500);
    }

    #[test]
    fn generation_is_deterministic_and_prefix_stable() {
        let a = generate(&d(BuiltinDesign::Design1), 200, 42).unwrap();
        let b = generate(&d(BuiltinDesign::Design1), 200, 42).unwrap();
        assert_eq!(a.component(0).values, b.component(0).values);
        assert_eq!(a.component(1).values, b.component(1).values);

        let longer = generate(&d(BuiltinDesign::Design1), 400, 42).unwrap();
        for k in 0..2 {
            for i in 0..200 {
                assert_eq!(a.component(k).row(i), longer.component(k).row(i));
            }
        }

        let other = generate(&d(BuiltinDesign::Design1), 200, 43).unwrap();
        assert_ne!(a.component(0).values, other.component(0).values);
    }

    #[test]
    fn bad_custom_designs_are_rejected() {
        let bad_weights = DesignSpec::Custom(CustomDesign {
            weights: vec![0.6, 0.6],
            components: vec![
                vec![vec![Law1d::Normal { mean: 0.0, sd: 1.0 }]; 2],
                vec![vec![Law1d::Normal { mean: 1.0, sd: 1.0 }]; 2],
            ],
        });
        assert!(matches!(
            generate(&bad_weights, 10, 0),
            Err(MixError::BadDesign(_))
        ));
        let bad_law = DesignSpec::Custom(CustomDesign {
            weights: vec![1.0],
            components: vec![vec![vec![Law1d::Uniform { lo: 2.0, hi: 1.0 }]]],
        });
        assert!(matches!(
            generate(&bad_law, 10, 0),
            Err(MixError::BadDesign(_))
        ));
    }

    #[test]
    fn montecarlo_counts_sum_to_reps() {
        let cfg = EstimatorConfig::default();
        let table = run_montecarlo(&d(BuiltinDesign::Design2), 60, 5, &cfg, 7).unwrap();
        let total: usize = table.counts.values().sum::<usize>() + table.errors.values().sum::<usize>();
        assert_eq!(total, 5);
        assert_eq!(table.reps, 5);
    }

    #[test]
    fn montecarlo_is_reproducible() {
        let cfg = EstimatorConfig::default();
        let a = run_montecarlo(&d(BuiltinDesign::Design1), 50, 4, &cfg, 11).unwrap();
        let b = run_montecarlo(&d(BuiltinDesign::Design1), 50, 4, &cfg, 11).unwrap();
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn delta_sweep_matches_independent_runs() {
        let cfg = EstimatorConfig::default();
        let deltas = [0.05, 0.4];
        let swept = run_delta_sweep(&d(BuiltinDesign::Design2), 60, 4, &deltas, &cfg, 5).unwrap();
        for (di, &delta) in deltas.iter().enumerate() {
            let mut cfg_d = cfg;
            cfg_d.delta = delta;
            let direct = run_montecarlo(&d(BuiltinDesign::Design2), 60, 4, &cfg_d, 5).unwrap();
            assert_eq!(swept[di].counts, direct.counts, "delta = {delta}");
        }
    }
}
