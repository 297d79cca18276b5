//! Command-line surface: CSV ingestion with column grouping, JSON output
//! documents, and the `estimate` / `montecarlo` / `singvals` subcommands.
//!
//! Exit codes: 0 ok, 1 usage, 2 input parse, 3 numerical or estimation
//! failure. The JSON documents are stable; `docs/schema/` holds one schema
//! file per subcommand.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::MixError;
use crate::estimator::{
    compute_pair_unit, estimate, threshold_for_unit, Bandwidth, Estimate, EstimatorConfig,
    Strategy, ThresholdForm, UnitIndices,
};
use crate::kernels::{analytic_l, KernelFamily};
use crate::sample::{ComponentSample, DataKind, PairData, Sample};
use crate::simulate::{self, BuiltinDesign, CustomDesign, DesignSpec, FrequencyTable};
use crate::threshold::closed_form_threshold;

/// Dense decompositions are exact but cubic; refuse anything past the regime
/// the estimator is meant for.
pub const MAX_DENSE_N: usize = 5000;

const DEFAULT_SPECTRUM_LEN: usize = 50;

/// A failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// exit 1
    Usage(String),
    /// exit 2
    Parse(String),
    /// exit 3
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Estimation(m) => m,
        }
    }
}

impl From<MixError> for CliError {
    fn from(e: MixError) -> Self {
        CliError::Estimation(e.to_string())
    }
}

/// Ordered column groups, one per component, with a kind tag each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnGrouping {
    pub groups: Vec<(Vec<usize>, DataKind)>,
}

impl ColumnGrouping {
    /// Parses specs like `"0;1"` or `"0-3;4-7"`, with optional kind tags
    /// `"continuous;discrete"` (or `"c;d"`) aligned with the groups.
    pub fn parse(groups: &str, kinds: Option<&str>) -> Result<Self, CliError> {
        let mut parsed: Vec<Vec<usize>> = Vec::new();
        for part in groups.split(';') {
            let part = part.trim();
            if part.is_empty() {
                return Err(CliError::Usage(format!("empty group in '{groups}'")));
            }
            let cols = if let Some((a, b)) = part.split_once('-') {
                let lo: usize = a.trim().parse().map_err(|_| {
                    CliError::Usage(format!("bad column index '{a}' in group '{part}'"))
                })?;
                let hi: usize = b.trim().parse().map_err(|_| {
                    CliError::Usage(format!("bad column index '{b}' in group '{part}'"))
                })?;
                if hi < lo {
                    return Err(CliError::Usage(format!("reversed range '{part}'")));
                }
                (lo..=hi).collect()
            } else {
                vec![part.parse().map_err(|_| {
                    CliError::Usage(format!("bad column index '{part}' in '{groups}'"))
                })?]
            };
            parsed.push(cols);
        }
        let kinds = match kinds {
            None => vec![DataKind::Continuous; parsed.len()],
            Some(spec) => {
                let tags: Vec<&str> = spec.split(';').map(str::trim).collect();
                if tags.len() != parsed.len() {
                    return Err(CliError::Usage(format!(
                        "{} kind tag(s) for {} group(s)",
                        tags.len(),
                        parsed.len()
                    )));
                }
                tags.iter()
                    .map(|t| match *t {
                        "c" | "continuous" => Ok(DataKind::Continuous),
                        "d" | "discrete" => Ok(DataKind::Discrete),
                        other => Err(CliError::Usage(format!("unknown kind tag '{other}'"))),
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        let mut seen = std::collections::BTreeSet::new();
        for cols in &parsed {
            for c in cols {
                if !seen.insert(*c) {
                    return Err(CliError::Usage(format!("column {c} referenced twice")));
                }
            }
        }
        Ok(Self {
            groups: parsed.into_iter().zip(kinds).collect(),
        })
    }

    /// Splits parsed CSV rows into the grouped components.
    pub fn apply(&self, rows: &[Vec<f64>]) -> Result<Sample, CliError> {
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut components = Vec::with_capacity(self.groups.len());
        for (cols, kind) in &self.groups {
            if let Some(bad) = cols.iter().find(|c| **c >= width) {
                return Err(CliError::Usage(format!(
                    "group references column {bad} but the file has {width} column(s)"
                )));
            }
            let mut values = ndarray::Array2::<f64>::zeros((rows.len(), cols.len()));
            for (i, row) in rows.iter().enumerate() {
                for (j, c) in cols.iter().enumerate() {
                    values[(i, j)] = row[*c];
                }
            }
            components.push(
                ComponentSample::new(values, *kind).map_err(|e| CliError::Parse(e.to_string()))?,
            );
        }
        Sample::new(components).map_err(|e| CliError::Parse(e.to_string()))
    }
}

/// Strict CSV: UTF-8, comma-separated numeric fields, no quoting, decimal
/// point. Errors carry the 1-based line (and column) of the offence.
pub fn read_csv(reader: impl BufRead, has_header: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CliError::Parse(format!("line {line_no}: {e}")))?;
        let line = line.trim_end_matches('\r');
        if idx == 0 && has_header {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(CliError::Parse(format!(
                    "line {line_no}: expected {w} field(s), got {}",
                    fields.len()
                )));
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(fields.len());
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Parse(format!(
                    "line {line_no}, column {}: invalid number '{field}'",
                    col + 1
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse("no data rows".into()));
    }
    Ok(rows)
}

fn read_csv_file(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(file), has_header)
}

// ---------------------------------------------------------------------------
// argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "mixcomp",
    version,
    about = "Estimate the number of mixture components by singular-value thresholding"
)]
pub struct CliArgs {
    /// Cap on internal parallelism (fallback: MIXCOMP_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigFlags {
    /// Overestimation control; the threshold holds with probability 1 - 2 delta.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,

    /// Kernel family: gaussian | uniform.
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,

    /// Bandwidth: "silverman" or a fixed positive value.
    #[arg(long, default_value = "silverman")]
    pub bandwidth: String,

    /// Multi-component strategy: pairs | bipartitions.
    #[arg(long, default_value = "pairs")]
    pub strategy: String,

    /// Threshold rule: solved | closed-form.
    #[arg(long = "threshold", default_value = "solved")]
    pub threshold_form: String,

    /// Cap on the number of bipartition units.
    #[arg(long, default_value_t = 256)]
    pub max_partitions: usize,

    /// Keep the lower-order variance correction in the solved rule.
    #[arg(long)]
    pub keep_correction_term: bool,
}

impl ConfigFlags {
    pub fn to_config(&self) -> Result<EstimatorConfig, CliError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::Usage(format!(
                "--delta must be in (0,1), got {}",
                self.delta
            )));
        }
        let kernel_family = match self.kernel.as_str() {
            "gaussian" => KernelFamily::Gaussian,
            "uniform" => KernelFamily::Uniform,
            other => return Err(CliError::Usage(format!("unknown kernel '{other}'"))),
        };
        let bandwidth = if self.bandwidth == "silverman" {
            Bandwidth::Silverman
        } else {
            let h: f64 = self.bandwidth.parse().map_err(|_| {
                CliError::Usage(format!(
                    "--bandwidth takes 'silverman' or a number, got '{}'",
                    self.bandwidth
                ))
            })?;
            if !(h > 0.0) {
                return Err(CliError::Usage(format!("fixed bandwidth must be > 0, got {h}")));
            }
            Bandwidth::Fixed(h)
        };
        let strategy = match self.strategy.as_str() {
            "pairs" => Strategy::Pairs,
            "bipartitions" => Strategy::Bipartitions,
            other => return Err(CliError::Usage(format!("unknown strategy '{other}'"))),
        };
        let threshold_form = match self.threshold_form.as_str() {
            "solved" => ThresholdForm::Solved,
            "closed-form" | "closed_form" => ThresholdForm::ClosedForm,
            other => return Err(CliError::Usage(format!("unknown threshold rule '{other}'"))),
        };
        Ok(EstimatorConfig {
            delta: self.delta,
            kernel_family,
            bandwidth,
            strategy,
            threshold_form,
            max_partitions: self.max_partitions,
            keep_correction_term: self.keep_correction_term,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Estimate the component count from a CSV of observations.
    Estimate {
        /// CSV file; one row per observation.
        #[arg(long)]
        input: PathBuf,

        /// Column groups, one per component: e.g. "0;1" or "0-3;4-7".
        #[arg(long)]
        groups: String,

        /// Kind tags aligned with --groups: "continuous;discrete" (or "c;d").
        #[arg(long)]
        kinds: Option<String>,

        /// Skip the first row.
        #[arg(long)]
        header: bool,

        /// Emit the full spectrum instead of the first 50 entries.
        #[arg(long)]
        full_spectrum: bool,

        #[command(flatten)]
        config: ConfigFlags,
    },

    /// Replicate a simulation design and tabulate the selection frequencies.
    Montecarlo {
        /// Builtin design index, 1 through 5.
        #[arg(long)]
        design: Option<usize>,

        /// JSON file with a custom design (weights + per-class coordinate laws).
        #[arg(long)]
        design_file: Option<PathBuf>,

        /// Sample size per replicate.
        #[arg(long)]
        n: usize,

        /// Number of replicates.
        #[arg(long)]
        reps: usize,

        /// Base seed; replicate r uses seed + r.
        #[arg(long, default_value_t = 1)]
        seed: u64,

        #[command(flatten)]
        config: ConfigFlags,
    },

    /// Dump singular values, tail norms and both thresholds for one pair.
    Singvals {
        /// CSV input (alternative to --design).
        #[arg(long)]
        input: Option<PathBuf>,

        /// Column groups for --input.
        #[arg(long)]
        groups: Option<String>,

        /// Kind tags for --groups.
        #[arg(long)]
        kinds: Option<String>,

        /// Skip the first CSV row.
        #[arg(long)]
        header: bool,

        /// Builtin design index (alternative to --input).
        #[arg(long)]
        design: Option<usize>,

        /// Sample size when drawing from a design.
        #[arg(long)]
        n: Option<usize>,

        /// Seed when drawing from a design.
        #[arg(long, default_value_t = 1)]
        seed: u64,

        /// Fixed bandwidth override for both components.
        #[arg(long)]
        h: Option<f64>,

        /// Which two components form the pair, e.g. "0,1".
        #[arg(long, default_value = "0,1")]
        pair: String,

        /// Emit the full spectrum instead of the first 50 entries.
        #[arg(long)]
        full_spectrum: bool,

        #[command(flatten)]
        config: ConfigFlags,
    },
}

// ---------------------------------------------------------------------------
// output documents
// ---------------------------------------------------------------------------

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct UnitDoc {
    pub indices: UnitIndices,
    pub m_hat: usize,
    pub tau: f64,
    pub h_left: f64,
    pub h_right: f64,
    pub sigmas: Vec<f64>,
    pub tail_norms: Vec<f64>,
    /// True when the spectrum was cut to the leading entries.
    pub truncated: bool,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct EstimateDoc {
    pub m_hat: usize,
    pub strategy: Strategy,
    pub n: usize,
    pub per_unit: Vec<UnitDoc>,
    pub config: EstimatorConfig,
    pub warnings: Vec<String>,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct MontecarloDoc {
    pub design: String,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub config: EstimatorConfig,
    pub counts: BTreeMap<usize, usize>,
    pub frequencies: BTreeMap<usize, f64>,
    pub errors: BTreeMap<String, usize>,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct SingvalsDoc {
    pub source: String,
    pub n: usize,
    pub delta: f64,
    pub h_left: f64,
    pub h_right: f64,
    pub sigmas: Vec<f64>,
    pub tail_norms: Vec<f64>,
    pub tau_solved: f64,
    /// Closed form needs delta < 1/2; null otherwise.
    pub tau_closed_form: Option<f64>,
    pub truncated: bool,
}

fn truncate(values: &[f64], full: bool) -> (Vec<f64>, bool) {
    if full || values.len() <= DEFAULT_SPECTRUM_LEN {
        (values.to_vec(), false)
    } else {
        (values[..DEFAULT_SPECTRUM_LEN].to_vec(), true)
    }
}

fn estimate_to_doc(est: Estimate, cfg: &EstimatorConfig, n: usize, full: bool) -> EstimateDoc {
    let per_unit = est
        .per_unit
        .into_iter()
        .map(|u| {
            let (sigmas, truncated) = truncate(&u.spectrum.sigmas, full);
            let (tail_norms, _) = truncate(&u.spectrum.tail_norms, full);
            UnitDoc {
                indices: u.indices,
                m_hat: u.m_hat,
                tau: u.tau,
                h_left: u.h_left,
                h_right: u.h_right,
                sigmas,
                tail_norms,
                truncated,
            }
        })
        .collect();
    EstimateDoc {
        m_hat: est.m_hat,
        strategy: est.strategy,
        n,
        per_unit,
        config: *cfg,
        warnings: est.warnings,
    }
}

fn check_dense_cap(n: usize) -> Result<(), CliError> {
    if n > MAX_DENSE_N {
        return Err(CliError::Usage(format!(
            "N = {n} exceeds the dense-decomposition cap of {MAX_DENSE_N}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// command runners
// ---------------------------------------------------------------------------

pub fn cmd_estimate(
    input: &Path,
    groups: &str,
    kinds: Option<&str>,
    header: bool,
    full_spectrum: bool,
    flags: &ConfigFlags,
) -> Result<EstimateDoc, CliError> {
    let cfg = flags.to_config()?;
    let grouping = ColumnGrouping::parse(groups, kinds)?;
    if grouping.groups.len() < 2 {
        return Err(CliError::Usage(
            "estimation needs at least two column groups".into(),
        ));
    }
    let rows = read_csv_file(input, header)?;
    check_dense_cap(rows.len())?;
    let sample = grouping.apply(&rows)?;
    let est = estimate(&sample, &cfg)?;
    Ok(estimate_to_doc(est, &cfg, sample.n(), full_spectrum))
}

fn design_from_args(
    design: Option<usize>,
    design_file: Option<&Path>,
) -> Result<DesignSpec, CliError> {
    match (design, design_file) {
        (Some(i), None) => Ok(DesignSpec::Builtin(
            BuiltinDesign::from_index(i).map_err(|e| CliError::Usage(e.to_string()))?,
        )),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            let custom: CustomDesign = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            Ok(DesignSpec::Custom(custom))
        }
        _ => Err(CliError::Usage(
            "pass exactly one of --design or --design-file".into(),
        )),
    }
}

pub fn cmd_montecarlo(
    design: Option<usize>,
    design_file: Option<&Path>,
    n: usize,
    reps: usize,
    seed: u64,
    flags: &ConfigFlags,
) -> Result<MontecarloDoc, CliError> {
    let cfg = flags.to_config()?;
    if reps == 0 {
        return Err(CliError::Usage("--reps must be >= 1".into()));
    }
    if n < 2 {
        return Err(CliError::Usage("--n must be >= 2".into()));
    }
    check_dense_cap(n)?;
    let spec = design_from_args(design, design_file)?;
    let table: FrequencyTable = simulate::run_montecarlo(&spec, n, reps, &cfg, seed)?;
    let frequencies = table
        .counts
        .iter()
        .map(|(m, c)| (*m, *c as f64 / table.reps as f64))
        .collect();
    Ok(MontecarloDoc {
        design: table.design,
        n: table.n,
        reps: table.reps,
        base_seed: table.base_seed,
        config: table.config,
        counts: table.counts,
        frequencies,
        errors: table.errors,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_singvals(
    input: Option<&Path>,
    groups: Option<&str>,
    kinds: Option<&str>,
    header: bool,
    design: Option<usize>,
    n: Option<usize>,
    seed: u64,
    h: Option<f64>,
    pair_spec: &str,
    full_spectrum: bool,
    flags: &ConfigFlags,
) -> Result<SingvalsDoc, CliError> {
    let mut flags = flags.clone();
    if let Some(h) = h {
        if !(h > 0.0) {
            return Err(CliError::Usage(format!("--h must be > 0, got {h}")));
        }
        flags.bandwidth = h.to_string();
    }
    let cfg = flags.to_config()?;

    let (pi, pj) = {
        let parts: Vec<&str> = pair_spec.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::Usage(format!("--pair takes 'i,j', got '{pair_spec}'")));
        }
        let i: usize = parts[0].trim().parse().map_err(|_| {
            CliError::Usage(format!("bad component index '{}'", parts[0]))
        })?;
        let j: usize = parts[1].trim().parse().map_err(|_| {
            CliError::Usage(format!("bad component index '{}'", parts[1]))
        })?;
        (i, j)
    };

    let (sample, source) = match (input, design) {
        (Some(path), None) => {
            let groups = groups.ok_or_else(|| {
                CliError::Usage("--groups is required with --input".into())
            })?;
            let grouping = ColumnGrouping::parse(groups, kinds)?;
            let rows = read_csv_file(path, header)?;
            check_dense_cap(rows.len())?;
            (grouping.apply(&rows)?, path.display().to_string())
        }
        (None, Some(idx)) => {
            let n = n.ok_or_else(|| CliError::Usage("--n is required with --design".into()))?;
            check_dense_cap(n)?;
            let spec = DesignSpec::Builtin(
                BuiltinDesign::from_index(idx).map_err(|e| CliError::Usage(e.to_string()))?,
            );
            (simulate::generate(&spec, n, seed)?, spec.label())
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --input or --design".into(),
            ));
        }
    };

    if pi >= sample.k() || pj >= sample.k() || pi == pj {
        return Err(CliError::Usage(format!(
            "--pair {pi},{pj} out of range for {} component(s)",
            sample.k()
        )));
    }
    let pair: PairData = sample.pair(pi, pj)?;
    let unit = compute_pair_unit(&pair, &cfg, UnitIndices::Pair { left: pi, right: pj })?;
    let tau_solved = threshold_for_unit(&unit, &cfg)?;
    let tau_closed_form = if cfg.delta < 0.5 {
        Some(closed_form_threshold(
            analytic_l(&unit.k_left, &unit.k_right),
            2.0 * unit.sigma2_hat,
            unit.n,
            cfg.delta,
        )?)
    } else {
        None
    };
    let (sigmas, truncated) = truncate(&unit.spectrum.sigmas, full_spectrum);
    let (tail_norms, _) = truncate(&unit.spectrum.tail_norms, full_spectrum);
    Ok(SingvalsDoc {
        source,
        n: unit.n,
        delta: cfg.delta,
        h_left: unit.k_left.h,
        h_right: unit.k_right.h,
        sigmas,
        tail_norms,
        tau_solved,
        tau_closed_form,
        truncated,
    })
}

/// Runs a parsed command and renders its JSON document.
pub fn run(args: &CliArgs) -> Result<String, CliError> {
    let doc = match &args.command {
        CliCommand::Estimate {
            input,
            groups,
            kinds,
            header,
            full_spectrum,
            config,
        } => serde_json::to_string_pretty(&cmd_estimate(
            input,
            groups,
            kinds.as_deref(),
            *header,
            *full_spectrum,
            config,
        )?),
        CliCommand::Montecarlo {
            design,
            design_file,
            n,
            reps,
            seed,
            config,
        } => serde_json::to_string_pretty(&cmd_montecarlo(
            *design,
            design_file.as_deref(),
            *n,
            *reps,
            *seed,
            config,
        )?),
        CliCommand::Singvals {
            input,
            groups,
            kinds,
            header,
            design,
            n,
            seed,
            h,
            pair,
            full_spectrum,
            config,
        } => serde_json::to_string_pretty(&cmd_singvals(
            input.as_deref(),
            groups.as_deref(),
            kinds.as_deref(),
            *header,
            *design,
            *n,
            *seed,
            *h,
            pair,
            *full_spectrum,
            config,
        )?),
    };
    doc.map_err(|e| CliError::Estimation(format!("JSON encoding: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_column_groups() {
        let g = ColumnGrouping::parse("0;1", None).unwrap();
        assert_eq!(g.groups.len(), 2);
        assert_eq!(g.groups[0], (vec![0], DataKind::Continuous));
        assert_eq!(g.groups[1], (vec![1], DataKind::Continuous));
    }

    #[test]
    fn parses_ranges_and_kinds() {
        let g = ColumnGrouping::parse("0-3;4-7", Some("c;d")).unwrap();
        assert_eq!(g.groups[0].0, vec![0, 1, 2, 3]);
        assert_eq!(g.groups[1].0, vec![4, 5, 6, 7]);
        assert_eq!(g.groups[1].1, DataKind::Discrete);
    }

    #[test]
    fn rejects_overlapping_groups() {
        assert!(ColumnGrouping::parse("0-2;2-4", None).is_err());
    }

    #[test]
    fn csv_error_names_line_and_column() {
        let data = "1.0,2.0\n3.0,x\n";
        let err = read_csv(data.as_bytes(), false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.message().contains("line 2"), "{}", err.message());
        assert!(err.message().contains("column 2"), "{}", err.message());
    }

    #[test]
    fn csv_error_names_wrong_field_count() {
        let data = "1.0,2.0\n3.0,4.0,5.0\n";
        let err = read_csv(data.as_bytes(), false).unwrap_err();
        assert!(err.message().contains("line 2"), "{}", err.message());
        assert!(err.message().contains("expected 2"), "{}", err.message());
    }

    #[test]
    fn csv_header_lines_count_physically() {
        let data = "a,b\n1.0,2.0\nbad,3.0\n";
        let err = read_csv(data.as_bytes(), true).unwrap_err();
        assert!(err.message().contains("line 3"), "{}", err.message());
    }

    #[test]
    fn bandwidth_flag_accepts_silverman_or_number() {
        let mut flags = ConfigFlags {
            delta: 0.05,
            kernel: "gaussian".into(),
            bandwidth: "silverman".into(),
            strategy: "pairs".into(),
            threshold_form: "solved".into(),
            max_partitions: 256,
            keep_correction_term: false,
        };
        assert_eq!(flags.to_config().unwrap().bandwidth, Bandwidth::Silverman);
        flags.bandwidth = "0.25".into();
        assert_eq!(flags.to_config().unwrap().bandwidth, Bandwidth::Fixed(0.25));
        flags.bandwidth = "nope".into();
        assert!(flags.to_config().is_err());
    }
}
