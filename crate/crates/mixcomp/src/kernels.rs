//! Closed-form kernel cross-products and Hilbert-Schmidt geometry of the
//! rank-one observation operators.
//!
//! The estimator never evaluates the smoothing kernel itself; everything it
//! needs reduces to the cross-product
//!
//! ```text
//! phi_h(a, b) = ∫ K_h(a - u) K_h(b - u) du
//! ```
//!
//! which has a closed form for the Gaussian and uniform kernels, and to its
//! d-fold product for multivariate components. A midpoint-rule quadrature of
//! the defining integral is provided as a test oracle.

use crate::error::{MixError, Result};

/// Smoothing kernel family. Only families with published closed-form
/// cross-products are exposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `K(x) = exp(-x^2/2) / sqrt(2 pi)`
    Gaussian,
    /// `K(x) = (1/2) 1{|x| <= 1}`
    Uniform,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Gaussian => write!(f, "gaussian"),
            KernelFamily::Uniform => write!(f, "uniform"),
        }
    }
}

/// A scaled kernel `K_h` applied to one component of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub h: f64,
    pub dim: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, h: f64, dim: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(MixError::BadSample(format!(
                "bandwidth must be a positive finite real, got {h}"
            )));
        }
        if dim == 0 {
            return Err(MixError::DimensionMismatch(
                "kernel dimension must be >= 1".into(),
            ));
        }
        Ok(Self { family, h, dim })
    }

    /// Value of `phi_h^d(a, a)`, constant over `a` for both families.
    pub fn diag_value(&self) -> f64 {
        let d = self.dim as i32;
        match self.family {
            KernelFamily::Gaussian => (2.0 * self.h * PI_SQRT).powi(-d),
            KernelFamily::Uniform => (2.0 * self.h).powi(-d),
        }
    }
}

const PI_SQRT: f64 = 1.7724538509055160273; // sqrt(pi)

/// One-dimensional kernel cross-product `phi_h(a, b)`.
///
/// Gaussian: `(2 h sqrt(pi))^-1 exp(-(a-b)^2 / (4 h^2))`.
/// Uniform: `1{|a-b| <= 2h} (2h - |a-b|) / (4 h^2)`; the boundary
/// `|a-b| = 2h` evaluates to exactly 0.
pub fn phi(spec: &KernelSpec, a: f64, b: f64) -> f64 {
    let h = spec.h;
    let t = (a - b).abs();
    match spec.family {
        KernelFamily::Gaussian => (2.0 * h * PI_SQRT).recip() * (-(t * t) / (4.0 * h * h)).exp(),
        KernelFamily::Uniform => {
            if t <= 2.0 * h {
                (2.0 * h - t) / (4.0 * h * h)
            } else {
                0.0
            }
        }
    }
}

/// `phi_h^d(a, b)`: the coordinate-wise product of [`phi`].
///
/// Implemented literally as the product so that it composes bit-for-bit with
/// the one-dimensional function; the fused Gaussian form
/// `(2 h sqrt(pi))^-d exp(-||a-b||^2 / (4 h^2))` is kept as a test identity.
pub fn phi_vec(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != spec.dim || b.len() != spec.dim {
        return Err(MixError::DimensionMismatch(format!(
            "phi_vec expects vectors of length {}, got {} and {}",
            spec.dim,
            a.len(),
            b.len()
        )));
    }
    let mut p = 1.0;
    for (ai, bi) in a.iter().zip(b) {
        p *= phi(spec, *ai, *bi);
    }
    Ok(p)
}

/// Squared Hilbert-Schmidt distance between the rank-one operators attached
/// to the observations `x = (x1, x2)` and `x' = (x1', x2')`:
///
/// ```text
/// phi1(x1,x1) phi2(x2,x2) + phi1(x1',x1') phi2(x2',x2') - 2 phi1(x1,x1') phi2(x2,x2')
/// ```
///
/// The exact value is a squared norm, so negative roundoff is clamped to 0.
pub fn hs_dist_sq(
    k1: &KernelSpec,
    k2: &KernelSpec,
    x: (&[f64], &[f64]),
    x_prime: (&[f64], &[f64]),
) -> Result<f64> {
    let own = phi_vec(k1, x.0, x.0)? * phi_vec(k2, x.1, x.1)?;
    let other = phi_vec(k1, x_prime.0, x_prime.0)? * phi_vec(k2, x_prime.1, x_prime.1)?;
    let cross = phi_vec(k1, x.0, x_prime.0)? * phi_vec(k2, x.1, x_prime.1)?;
    Ok((own + other - 2.0 * cross).max(0.0))
}

/// Exact supremum of the Hilbert-Schmidt distance between two rank-one
/// observation operators: `sqrt(2 phi1(a,a) phi2(a,a))`.
///
/// The cross term's infimum is 0 for both families (attained in the limit of
/// infinite separation for Gaussian, exactly beyond the support for uniform),
/// and the diagonal terms are constant, so the supremum is available in
/// closed form. Distribution free.
pub fn analytic_l(k1: &KernelSpec, k2: &KernelSpec) -> f64 {
    (2.0 * k1.diag_value() * k2.diag_value()).sqrt()
}

/// Midpoint-rule approximation of `∫ K_h(a-u) K_h(b-u) du` over
/// `[min(a,b) - halfwidth, max(a,b) + halfwidth]`. Testing oracle for the
/// closed forms in [`phi`]; one-dimensional.
pub fn phi_quadrature(
    spec: &KernelSpec,
    a: f64,
    b: f64,
    grid_step: f64,
    grid_halfwidth: f64,
) -> f64 {
    assert!(grid_step > 0.0, "grid_step must be positive");
    let lo = a.min(b) - grid_halfwidth;
    let hi = a.max(b) + grid_halfwidth;
    let m = ((hi - lo) / grid_step).ceil() as usize;
    let step = (hi - lo) / m as f64;
    let h = spec.h;
    let k = |x: f64| -> f64 {
        match spec.family {
            KernelFamily::Gaussian => {
                (-(x * x) / (2.0 * h * h)).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
            }
            KernelFamily::Uniform => {
                if x.abs() <= h {
                    0.5 / h
                } else {
                    0.0
                }
            }
        }
    };
    let mut acc = 0.0;
    for i in 0..m {
        let u = lo + (i as f64 + 0.5) * step;
        acc += k(a - u) * k(b - u);
    }
    acc * step
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss(h: f64) -> KernelSpec {
        KernelSpec::new(KernelFamily::Gaussian, h, 1).unwrap()
    }

    fn unif(h: f64) -> KernelSpec {
        KernelSpec::new(KernelFamily::Uniform, h, 1).unwrap()
    }

    #[test]
    fn gaussian_diagonal_matches_closed_form() {
        // phi(0,0) at h=0.5 is 1/sqrt(pi); quadrature oracle agrees.
        let k = gauss(0.5);
        let v = phi(&k, 0.0, 0.0);
        assert!((v - 1.0 / PI_SQRT).abs() < 1e-15);
        assert!((v - 0.564_189_583_547_756_3).abs() < 1e-12);
        let q = phi_quadrature(&k, 0.0, 0.0, 1e-3, 10.0);
        assert!((v - q).abs() < 1e-8, "closed form {v} vs quadrature {q}");
    }

    #[test]
    fn gaussian_off_diagonal_matches_closed_form() {
        let k = gauss(0.5);
        let v = phi(&k, 0.0, 1.0);
        // e^{-1}/sqrt(pi), cross-checked against the quadrature oracle
        assert!((v - 0.207_553_748_710_297_4).abs() < 1e-12);
        let q = phi_quadrature(&k, 0.0, 1.0, 1e-3, 10.0);
        assert!((v - q).abs() < 1e-8);
    }

    #[test]
    fn uniform_closed_form_and_boundary() {
        let k = unif(0.5);
        assert_eq!(phi(&k, 0.3, 0.3), 1.0);
        assert_eq!(phi(&k, 0.0, 1.0), 0.0); // |a-b| = 2h exactly
        assert_eq!(phi(&k, 0.0, 1.5), 0.0);
        // interior value against closed-form arithmetic and quadrature
        let v = phi(&k, 0.0, 0.5);
        assert!((v - 0.5).abs() < 1e-15);
        let q = phi_quadrature(&k, 0.0, 0.5, 1e-3, 2.0);
        assert!((v - q).abs() < 1e-6);
    }

    #[test]
    fn quadrature_step_halving_does_not_worsen() {
        let k = gauss(0.5);
        let exact = phi(&k, 0.2, 1.1);
        let coarse = (phi_quadrature(&k, 0.2, 1.1, 2e-3, 10.0) - exact).abs();
        let fine = (phi_quadrature(&k, 0.2, 1.1, 1e-3, 10.0) - exact).abs();
        assert!(fine <= coarse + 1e-12);
    }

    #[test]
    fn phi_vec_gaussian_two_dim_diagonal() {
        let k = KernelSpec::new(KernelFamily::Gaussian, 0.5, 2).unwrap();
        let v = phi_vec(&k, &[0.3, -1.0], &[0.3, -1.0]).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(v, k.diag_value());
    }

    #[test]
    fn phi_vec_dimension_mismatch() {
        let k = KernelSpec::new(KernelFamily::Gaussian, 0.5, 2).unwrap();
        assert!(matches!(
            phi_vec(&k, &[0.0], &[0.0, 1.0]),
            Err(MixError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn phi_vec_uniform_dead_coordinate_kills_product() {
        let k = KernelSpec::new(KernelFamily::Uniform, 0.5, 2).unwrap();
        assert_eq!(phi_vec(&k, &[0.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hs_dist_sq_identical_points_is_zero() {
        let (k1, k2) = (gauss(0.5), gauss(0.5));
        let x = (&[0.7][..], &[-0.2][..]);
        assert_eq!(hs_dist_sq(&k1, &k2, x, x).unwrap(), 0.0);
    }

    #[test]
    fn hs_dist_sq_far_separation_approaches_supremum() {
        // x = ((0),(0)), x' = ((t),(t)) with t = 50: the cross term vanishes
        // and the squared distance is 2/pi.
        let (k1, k2) = (gauss(0.5), gauss(0.5));
        let d2 = hs_dist_sq(&k1, &k2, (&[0.0], &[0.0]), (&[50.0], &[50.0])).unwrap();
        assert!((d2 - 2.0 / std::f64::consts::PI).abs() < 1e-14);
        let l = analytic_l(&k1, &k2);
        assert!((l * l - d2).abs() < 1e-14);
    }

    #[test]
    fn analytic_l_values() {
        let g = analytic_l(&gauss(0.5), &gauss(0.5));
        assert!((g - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((g - 0.797_884_560_802_865_4).abs() < 1e-12);
        let u = analytic_l(&unif(0.5), &unif(0.5));
        assert!((u - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn analytic_l_matches_grid_maximization_oracle() {
        // Coarse grid search over separations can only approach the closed
        // form from below.
        for (k1, k2) in [(gauss(0.5), gauss(0.5)), (unif(0.5), unif(0.7))] {
            let l = analytic_l(&k1, &k2);
            let mut best: f64 = 0.0;
            for i in 0..200 {
                let t = i as f64 * 0.25;
                let d2 = hs_dist_sq(&k1, &k2, (&[0.0], &[0.0]), (&[t], &[t])).unwrap();
                best = best.max(d2.sqrt());
            }
            assert!(best <= l + 1e-12);
            assert!((l - best).abs() < 1e-6, "grid best {best} vs closed {l}");
        }
    }

    proptest! {
        #[test]
        fn phi_is_symmetric(a in -20.0f64..20.0, b in -20.0f64..20.0, h in 0.05f64..3.0) {
            for k in [gauss(h), unif(h)] {
                prop_assert_eq!(phi(&k, a, b), phi(&k, b, a));
            }
        }

        #[test]
        fn phi_diagonal_dominates(a in -20.0f64..20.0, b in -20.0f64..20.0, h in 0.05f64..3.0) {
            for k in [gauss(h), unif(h)] {
                prop_assert!(phi(&k, a, b) <= phi(&k, a, a) + 1e-15);
            }
        }

        #[test]
        fn gaussian_quadrature_agreement(a in -5.0f64..5.0, b in -5.0f64..5.0, h in 0.2f64..2.0) {
            let k = gauss(h);
            let v = phi(&k, a, b);
            let q = phi_quadrature(&k, a, b, h / 50.0, 20.0 * h);
            prop_assert!((v - q).abs() <= 1e-8, "phi={} quad={}", v, q);
        }

        #[test]
        fn phi_vec_is_exact_product(
            a in proptest::collection::vec(-5.0f64..5.0, 3),
            b in proptest::collection::vec(-5.0f64..5.0, 3),
            h in 0.1f64..2.0,
        ) {
            for fam in [KernelFamily::Gaussian, KernelFamily::Uniform] {
                let k3 = KernelSpec::new(fam, h, 3).unwrap();
                let k1 = KernelSpec::new(fam, h, 1).unwrap();
                let expected = phi(&k1, a[0], b[0]) * phi(&k1, a[1], b[1]) * phi(&k1, a[2], b[2]);
                prop_assert_eq!(phi_vec(&k3, &a, &b).unwrap(), expected);
            }
        }

        #[test]
        fn gaussian_phi_vec_matches_fused_closed_form(
            a in proptest::collection::vec(-5.0f64..5.0, 2),
            b in proptest::collection::vec(-5.0f64..5.0, 2),
            h in 0.1f64..2.0,
        ) {
            let k = KernelSpec::new(KernelFamily::Gaussian, h, 2).unwrap();
            let norm_sq = (a[0]-b[0]).powi(2) + (a[1]-b[1]).powi(2);
            let fused = (2.0*h*PI_SQRT).powi(-2) * (-norm_sq / (4.0*h*h)).exp();
            let v = phi_vec(&k, &a, &b).unwrap();
            prop_assert!((v - fused).abs() <= 1e-12 * fused.max(1e-300));
        }

        #[test]
        fn hs_dist_sq_bounded_and_symmetric(
            x1 in -10.0f64..10.0, x2 in -10.0f64..10.0,
            y1 in -10.0f64..10.0, y2 in -10.0f64..10.0,
            h in 0.1f64..2.0,
        ) {
            for fam in [KernelFamily::Gaussian, KernelFamily::Uniform] {
                let k = KernelSpec::new(fam, h, 1).unwrap();
                let d2 = hs_dist_sq(&k, &k, (&[x1], &[x2]), (&[y1], &[y2])).unwrap();
                let d2_swapped = hs_dist_sq(&k, &k, (&[y1], &[y2]), (&[x1], &[x2])).unwrap();
                prop_assert!(d2 >= 0.0);
                prop_assert_eq!(d2, d2_swapped);
                let l = analytic_l(&k, &k);
                prop_assert!(d2 <= l * l + 1e-12);
            }
        }
    }
}
