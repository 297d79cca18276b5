//! The data-driven concentration threshold: sample statistics `L_hat` and
//! `sigma2_hat` over pairwise Hilbert-Schmidt distances, the numerically
//! solved threshold rule, and the conservative closed form.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{MixError, Result};
use crate::kernels::{hs_dist_sq, KernelSpec};
use crate::sample::PairData;

/// Sample concentration statistics of the rank-one observation operators.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConcentrationStats {
    /// `sup_{i != j} ||T_{h,X_i} - T_{h,X_j}||_HS`
    pub l_hat: f64,
    /// `(1 / (2 N (N-1))) sum_{i != j} ||T_{h,X_i} - T_{h,X_j}||_HS^2`
    pub sigma2_hat: f64,
    pub n: usize,
    pub delta: f64,
}

impl ConcentrationStats {
    pub fn new(l_hat: f64, sigma2_hat: f64, n: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(MixError::BadDelta(format!("delta must be in (0,1), got {delta}")));
        }
        if n < 2 {
            return Err(MixError::DegenerateStats(format!("need N >= 2, got {n}")));
        }
        if !(l_hat > 0.0) || !l_hat.is_finite() || !(sigma2_hat > 0.0) || !sigma2_hat.is_finite() {
            return Err(MixError::DegenerateStats(format!(
                "L_hat = {l_hat}, sigma2_hat = {sigma2_hat}"
            )));
        }
        Ok(Self {
            l_hat,
            sigma2_hat,
            n,
            delta,
        })
    }

    /// Unhalved mean of squared pairwise distances,
    /// `(1 / (N (N-1))) sum_{i != j} hs^2`, as used by the closed form.
    pub fn mean_sq_unhalved(&self) -> f64 {
        2.0 * self.sigma2_hat
    }
}

fn reduce_rows(rows: Vec<(f64, f64)>) -> (f64, f64) {
    let mut max_d2 = 0.0f64;
    let mut sum_d2 = 0.0f64;
    for (m, s) in rows {
        max_d2 = max_d2.max(m);
        sum_d2 += s;
    }
    (max_d2, sum_d2)
}

fn stats_from_parts(max_d2: f64, sum_d2: f64, n: usize, delta: f64) -> Result<ConcentrationStats> {
    if max_d2 <= 0.0 {
        return Err(MixError::DegenerateSample(
            "all observations identical; the threshold equation is undefined".into(),
        ));
    }
    let nn = n as f64;
    ConcentrationStats::new(max_d2.sqrt(), sum_d2 / (nn * (nn - 1.0)), n, delta)
}

/// One O(N^2) pass over distinct observation pairs.
///
/// Rows are processed in parallel but combined in index order, so the result
/// does not depend on the thread count.
pub fn concentration_stats(
    pair: &PairData,
    k1: &KernelSpec,
    k2: &KernelSpec,
    delta: f64,
) -> Result<ConcentrationStats> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(MixError::BadDelta(format!("delta must be in (0,1), got {delta}")));
    }
    let n = pair.n();
    if n < 2 {
        return Err(MixError::DegenerateSample(format!("need N >= 2, got {n}")));
    }
    let rows: Vec<(f64, f64)> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let xi = (pair.left.row(i), pair.right.row(i));
            let mut row_max = 0.0f64;
            let mut row_sum = 0.0f64;
            for j in (i + 1)..n {
                let xj = (pair.left.row(j), pair.right.row(j));
                let d2 = hs_dist_sq(k1, k2, xi, xj).expect("dims fixed by PairData");
                row_max = row_max.max(d2);
                row_sum += d2;
            }
            (row_max, row_sum)
        })
        .collect();
    let (max_d2, sum_d2) = reduce_rows(rows);
    stats_from_parts(max_d2, sum_d2, n, delta)
}

/// `(L_hat, sigma2_hat)` computed from already-built Gram matrices: the
/// squared distance between observations i and j is
/// `W1[i,i] W2[i,i] + W1[j,j] W2[j,j] - 2 W1[i,j] W2[i,j]`.
///
/// Entry products and summation order match [`concentration_stats`] exactly,
/// so the two routes agree bit for bit.
pub(crate) fn raw_stats_from_grams(w1: &Array2<f64>, w2: &Array2<f64>) -> Result<(f64, f64)> {
    let n = w1.nrows();
    if n < 2 {
        return Err(MixError::DegenerateSample(format!("need N >= 2, got {n}")));
    }
    let rows: Vec<(f64, f64)> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let own_i = w1[(i, i)] * w2[(i, i)];
            let mut row_max = 0.0f64;
            let mut row_sum = 0.0f64;
            for j in (i + 1)..n {
                let own_j = w1[(j, j)] * w2[(j, j)];
                let cross = w1[(i, j)] * w2[(i, j)];
                let d2 = (own_i + own_j - 2.0 * cross).max(0.0);
                row_max = row_max.max(d2);
                row_sum += d2;
            }
            (row_max, row_sum)
        })
        .collect();
    let (max_d2, sum_d2) = reduce_rows(rows);
    if max_d2 <= 0.0 {
        return Err(MixError::DegenerateSample(
            "all observations identical; the threshold equation is undefined".into(),
        ));
    }
    let nn = n as f64;
    Ok((max_d2.sqrt(), sum_d2 / (nn * (nn - 1.0))))
}


/// Left-hand side minus right-hand side structure of the threshold equation:
///
/// ```text
/// rhs(tau) = -(tau N / L) ln(1 + tau L / s2)
///            + N ln(1 + tau/L - (s2/L^2) ln(1 + tau L / s2))
/// ```
///
/// Strictly decreasing in `tau` from 0 toward -inf; the solved threshold is
/// the root of `rhs(tau) = ln(delta/2)`.
fn rhs(tau: f64, l: f64, s2: f64, n: f64) -> f64 {
    let t = (tau * l / s2).ln_1p();
    -(tau * n / l) * t + n * (tau / l - (s2 / (l * l)) * t).ln_1p()
}

fn solve_with_sigma2(l: f64, s2: f64, n: usize, delta: f64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() || !(s2 > 0.0) || !s2.is_finite() {
        return Err(MixError::DegenerateStats(format!("L = {l}, sigma^2 = {s2}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(MixError::BadDelta(format!("delta must be in (0,1), got {delta}")));
    }
    let nn = n as f64;
    let target = (delta / 2.0).ln();

    // expand the upper bracket by doubling from sigma^2 / L
    let mut hi = s2 / l;
    let mut doublings = 0;
    while rhs(hi, l, s2, nn) > target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(MixError::NoBracket(format!(
                "rhs never crossed ln(delta/2) within 200 doublings (L={l}, sigma^2={s2}, N={n})"
            )));
        }
    }

    let mut lo = 0.0f64;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = rhs(mid, l, s2, nn);
        if r > target {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if (hi - lo) <= 1e-12 && (r - target).abs() <= 1e-10 {
            break;
        }
        if next == mid || next == lo || next == hi {
            break; // interval exhausted at f64 resolution
        }
        mid = next;
    }
    let residual = (rhs(mid, l, s2, nn) - target).abs();
    if residual > 1e-10 {
        return Err(MixError::Linalg(format!(
            "threshold bisection residual {residual:e} exceeds 1e-10"
        )));
    }
    Ok(mid)
}

/// Numerically solved threshold: the `tau > 0` with
/// `rhs(tau) = ln(delta/2)`, using the sample variance proxy as printed
/// (lower-order correction dropped).
pub fn solve_threshold(stats: &ConcentrationStats) -> Result<f64> {
    solve_with_sigma2(stats.l_hat, stats.sigma2_hat, stats.n, stats.delta)
}

/// Variant of [`solve_threshold`] that keeps the lower-order term, replacing
/// `sigma2_hat` by `sigma2_hat + (L_hat^2 / 2) sqrt(ln(1/delta) / N)`.
/// Exposed for sensitivity analysis.
pub fn solve_threshold_corrected(stats: &ConcentrationStats) -> Result<f64> {
    let correction =
        0.5 * stats.l_hat * stats.l_hat * ((1.0 / stats.delta).ln() / stats.n as f64).sqrt();
    solve_with_sigma2(
        stats.l_hat,
        stats.sigma2_hat + correction,
        stats.n,
        stats.delta,
    )
}

/// Closed-form threshold
///
/// ```text
/// 2 L ln(2/delta) / N + sqrt( (ln(2/delta)/N) (S + L^2 sqrt(ln(1/delta)/N)) )
/// ```
///
/// where `S` is the *unhalved* mean of squared pairwise distances. Valid for
/// `0 < delta < 1/2`. More conservative than the solved rule.
pub fn closed_form_threshold(l: f64, s: f64, n: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(MixError::BadDelta(format!(
            "closed form requires delta in (0, 1/2), got {delta}"
        )));
    }
    if !(l > 0.0) || !l.is_finite() || !(s >= 0.0) || !s.is_finite() || n < 2 {
        return Err(MixError::DegenerateStats(format!("L = {l}, S = {s}, N = {n}")));
    }
    let nn = n as f64;
    let log_2d = (2.0 / delta).ln();
    let log_1d = (1.0 / delta).ln();
    Ok(2.0 * l * log_2d / nn + ((log_2d / nn) * (s + l * l * (log_1d / nn).sqrt())).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use crate::operator::build_gram;
    use crate::sample::{ComponentSample, DataKind};
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn gauss(h: f64) -> KernelSpec {
        KernelSpec::new(KernelFamily::Gaussian, h, 1).unwrap()
    }

    fn scalar_pair(a: &[f64], b: &[f64]) -> PairData {
        PairData::new(
            ComponentSample::scalar(a, DataKind::Continuous).unwrap(),
            ComponentSample::scalar(b, DataKind::Continuous).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_far_observations() {
        let pair = scalar_pair(&[0.0, 60.0], &[0.0, 60.0]);
        let k = gauss(0.5);
        let stats = concentration_stats(&pair, &k, &k, 0.05).unwrap();
        let expect_l = (2.0 / std::f64::consts::PI).sqrt();
        assert!((stats.l_hat - expect_l).abs() < 1e-12);
        assert!((stats.sigma2_hat - expect_l * expect_l / 2.0).abs() < 1e-12);
        assert!((stats.sigma2_hat - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn identical_sample_is_degenerate() {
        let pair = scalar_pair(&[1.0; 5], &[2.0; 5]);
        let k = gauss(0.5);
        assert!(matches!(
            concentration_stats(&pair, &k, &k, 0.05),
            Err(MixError::DegenerateSample(_))
        ));
    }

    #[test]
    fn gram_route_matches_direct_route_bitwise() {
        let mut rng = StdRng::seed_from_u64(3);
        let a: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let pair = scalar_pair(&a, &b);
        let (k1, k2) = (gauss(0.4), gauss(0.7));
        let direct = concentration_stats(&pair, &k1, &k2, 0.05).unwrap();
        let w1 = build_gram(&pair.left, &k1).unwrap();
        let w2 = build_gram(&pair.right, &k2).unwrap();
        let (l_hat, sigma2_hat) = raw_stats_from_grams(&w1, &w2).unwrap();
        assert_eq!(direct.l_hat, l_hat);
        assert_eq!(direct.sigma2_hat, sigma2_hat);
    }

    /// Oracle value computed by 50-digit bisection on the defining equation.
    #[test]
    fn solved_threshold_matches_high_precision_oracle() {
        let stats = ConcentrationStats::new(1.0, 1.0, 100, 0.05).unwrap();
        let tau = solve_threshold(&stats).unwrap();
        assert!(
            (tau - 0.281_456_254_176_039_3).abs() < 1e-9,
            "tau = {tau}"
        );
    }

    #[test]
    fn solved_threshold_residual_is_tiny() {
        let stats = ConcentrationStats::new(0.8, 0.3, 2000, 0.05).unwrap();
        let tau = solve_threshold(&stats).unwrap();
        let r = rhs(tau, 0.8, 0.3, 2000.0) - (0.05f64 / 2.0).ln();
        assert!(r.abs() <= 1e-10, "residual {r:e}");
    }

    #[test]
    fn corrected_variant_is_no_smaller() {
        let stats = ConcentrationStats::new(0.8, 0.3, 500, 0.05).unwrap();
        let plain = solve_threshold(&stats).unwrap();
        let corrected = solve_threshold_corrected(&stats).unwrap();
        assert!(corrected >= plain, "{corrected} < {plain}");
    }

    /// Oracle value recomputed with 50-digit arithmetic:
    /// 2 ln(40)/100 + sqrt((ln(40)/100)(1 + sqrt(ln(20)/100)))
    ///   = 0.073778 + 0.208023 = 0.2818006044231867...
    #[test]
    fn closed_form_matches_high_precision_oracle() {
        let tau = closed_form_threshold(1.0, 1.0, 100, 0.05).unwrap();
        assert!((tau - 0.281_800_604_423_186_7).abs() < 1e-12, "tau = {tau}");
    }

    #[test]
    fn closed_form_decreases_in_n() {
        let a = closed_form_threshold(1.0, 1.0, 100, 0.05).unwrap();
        let b = closed_form_threshold(1.0, 1.0, 400, 0.05).unwrap();
        assert!(b < a);
    }

    #[test]
    fn closed_form_rejects_large_delta() {
        assert!(matches!(
            closed_form_threshold(1.0, 1.0, 100, 0.6),
            Err(MixError::BadDelta(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sigma2_below_half_l_squared(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.random_range(2..25usize);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let pair = scalar_pair(&a, &b);
            let k = gauss(0.5);
            if let Ok(stats) = concentration_stats(&pair, &k, &k, 0.05) {
                prop_assert!(stats.sigma2_hat <= stats.l_hat * stats.l_hat / 2.0 + 1e-15);
            }
        }

        #[test]
        fn solved_threshold_decreasing_in_n_and_delta(
            l in 0.2f64..3.0,
            ratio in 0.05f64..0.5,
            n in 10usize..3000,
        ) {
            let s2 = ratio * l * l; // sigma^2 <= L^2/2 by construction
            let tau = solve_with_sigma2(l, s2, n, 0.05).unwrap();
            let tau_4n = solve_with_sigma2(l, s2, 4 * n, 0.05).unwrap();
            prop_assert!(tau_4n < tau, "N monotonicity: {} !< {}", tau_4n, tau);
            let tau_loose = solve_with_sigma2(l, s2, n, 0.4).unwrap();
            prop_assert!(tau_loose < tau, "delta monotonicity: {} !< {}", tau_loose, tau);
            // defining-equation residual at the returned root
            let r = rhs(tau, l, s2, n as f64) - (0.05f64 / 2.0).ln();
            prop_assert!(r.abs() <= 1e-10);
        }

        #[test]
        fn rhs_strictly_decreasing(
            l in 0.2f64..3.0,
            ratio in 0.05f64..0.5,
            n in 10u32..2000,
        ) {
            let s2 = ratio * l * l;
            let mut prev = f64::INFINITY;
            for k in 1..60 {
                let tau = k as f64 * 0.02 * l;
                let v = rhs(tau, l, s2, n as f64);
                prop_assert!(v < prev);
                prev = v;
            }
        }
    }
}
