//! Generalized singular values, the distribution function, and the
//! (quasi)norms built on them.
//!
//! With the normalized trace on `M_n`, `mu_t(x)` is the step function equal to
//! the `k`-th largest singular value on `[(k-1)/n, k/n)`, and
//! `lambda_s(x) = #{k : sigma_k > s} / n`. Everything here works on the
//! breakpoint values directly, so integrals and suprema are exact.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, SpectralDecomposition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValueProfile {
    pub n: usize,
    /// Sorted descending, clamped at zero.
    pub sigma: Vec<f64>,
}

impl SingularValueProfile {
    /// Builds a profile from arbitrary non-negative values.
    pub fn from_values(mut sigma: Vec<f64>) -> Self {
        for s in &mut sigma {
            *s = s.max(0.0);
        }
        sigma.sort_by(|a, b| b.total_cmp(a));
        Self {
            n: sigma.len(),
            sigma,
        }
    }

    /// `mu_t` for `t >= 0`; zero for `t >= 1`.
    pub fn mu_at(&self, t: f64) -> f64 {
        if t < 0.0 || self.n == 0 {
            return self.sigma.first().copied().unwrap_or(0.0);
        }
        let k = (t * self.n as f64).floor() as usize;
        self.sigma.get(k).copied().unwrap_or(0.0)
    }

    /// `lambda_s = tau(chi_(s, inf)(|x|))`.
    pub fn lambda(&self, s: f64) -> f64 {
        self.sigma.iter().filter(|&&v| v > s).count() as f64 / self.n as f64
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p > 0.0, "exponent must be positive");
        let max = self.op_norm();
        if max == 0.0 {
            return 0.0;
        }
        // Scaling by the largest value keeps large p from overflowing.
        let mean = self.sigma.iter().map(|s| (s / max).powf(p)).sum::<f64>() / self.n as f64;
        max * mean.powf(1.0 / p)
    }

    pub fn op_norm(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `sup_t t mu_t`, attained as the left limit at a breakpoint `k/n`.
    pub fn weak_l1(&self) -> f64 {
        self.sigma
            .iter()
            .enumerate()
            .map(|(k, s)| (k + 1) as f64 / self.n as f64 * s)
            .fold(0.0, f64::max)
    }

    /// `int_0^{k/n} mu_t dt` for `k = 1..=n`.
    pub fn partial_integrals(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s / self.n as f64;
                Some(*acc)
            })
            .collect()
    }

    /// `self ≺≺ other` up to `tol` at every breakpoint.
    pub fn submajorized_by(&self, other: &SingularValueProfile, tol: f64) -> bool {
        assert_eq!(self.n, other.n, "profiles must have equal length");
        self.partial_integrals()
            .iter()
            .zip(other.partial_integrals())
            .all(|(a, b)| *a <= b + tol)
    }

    /// `t -> mu_t(self) mu_t(other)`.
    pub fn pointwise_product(&self, other: &SingularValueProfile) -> SingularValueProfile {
        assert_eq!(self.n, other.n, "profiles must have equal length");
        SingularValueProfile {
            n: self.n,
            sigma: self.sigma.iter().zip(&other.sigma).map(|(a, b)| a * b).collect(),
        }
    }
}

pub fn mu(a: &Operator) -> SingularValueProfile {
    SingularValueProfile::from_values(a.matrix().singular_values().iter().copied().collect())
}

pub fn lambda(a: &Operator, s: f64) -> f64 {
    mu(a).lambda(s)
}

/// Non-commutative `L^p` (quasi)norm with respect to the normalized trace.
pub fn lp_norm(a: &Operator, p: f64) -> f64 {
    mu(a).lp_norm(p)
}

pub fn op_norm(a: &Operator) -> f64 {
    mu(a).op_norm()
}

pub fn weak_l1_quasinorm(a: &Operator) -> f64 {
    mu(a).weak_l1()
}

/// `a ≺≺ b`: `b` submajorizes `a`.
pub fn submajorizes(b: &Operator, a: &Operator, tol: f64) -> bool {
    mu(a).submajorized_by(&mu(b), tol)
}

fn positive_spectrum(a: &Operator) -> Result<SpectralDecomposition> {
    let spec = SpectralDecomposition::new(a)?;
    let scale = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if spec.min() < -crate::algebra::HERMITIAN_TOL * (1.0 + scale) {
        return Err(Error::NotPositive {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(spec)
}

/// `s log s` for `s > 1`, zero otherwise.
pub fn xlogx_plus(s: f64) -> f64 {
    if s > 1.0 {
        s * s.ln()
    } else {
        0.0
    }
}

/// `tau(a log^+ a)` for positive `a` (natural logarithm).
pub fn llogl_functional(a: &Operator) -> Result<f64> {
    let spec = positive_spectrum(a)?;
    Ok(spec.values.iter().map(|&s| xlogx_plus(s)).sum::<f64>() / a.n() as f64)
}

#[derive(Debug, Clone)]
pub struct DyadicPart {
    /// `k = 0` collects the spectrum in `[0, 1)`; `k >= 1` collects `[2^{k-1}, 2^k)`.
    pub k: u32,
    pub part: Operator,
    pub projection: Operator,
    pub eigenvalues: Vec<f64>,
}

impl DyadicPart {
    /// `epsilon_k = tau(P_k)`.
    pub fn weight(&self) -> f64 {
        self.eigenvalues.len() as f64 / self.part.n() as f64
    }
}

#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub parts: Vec<DyadicPart>,
}

impl DyadicDecomposition {
    pub fn reconstruct(&self) -> Option<Operator> {
        let mut it = self.parts.iter();
        let first = it.next()?.part.clone();
        Some(it.fold(first, |acc, p| acc + &p.part))
    }

    pub fn projection_sum(&self) -> Option<Operator> {
        let mut it = self.parts.iter();
        let first = it.next()?.projection.clone();
        Some(it.fold(first, |acc, p| acc + &p.projection))
    }
}

/// Dyadic band of a non-negative eigenvalue.
pub fn dyadic_index(s: f64) -> u32 {
    if s < 1.0 {
        return 0;
    }
    let mut k = s.log2().floor() as i32 + 1;
    while k > 1 && s < 2f64.powi(k - 1) {
        k -= 1;
    }
    while s >= 2f64.powi(k) {
        k += 1;
    }
    k as u32
}

/// Splits positive `a` into `a_k = a chi_[2^{k-1}, 2^k)(a)` and `a_0 = a chi_[0,1)(a)`.
/// Only bands that contain spectrum are returned, in increasing `k`.
pub fn dyadic_decompose(a: &Operator) -> Result<DyadicDecomposition> {
    let spec = positive_spectrum(a)?;
    let mut ks: Vec<u32> = spec.values.iter().map(|&s| dyadic_index(s)).collect();
    ks.dedup();
    let parts = ks
        .into_iter()
        .map(|k| {
            let in_band = |s: f64| dyadic_index(s) == k;
            DyadicPart {
                k,
                part: spec.apply(|s| if in_band(s) { s } else { 0.0 }),
                projection: spec.projection(in_band),
                eigenvalues: spec.values.iter().copied().filter(|&s| in_band(s)).collect(),
            }
        })
        .collect();
    Ok(DyadicDecomposition { parts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracedAlgebra;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn alg(n: usize) -> Arc<TracedAlgebra> {
        Arc::new(TracedAlgebra::flag(n).unwrap())
    }

    fn ones(n: usize) -> Operator {
        Operator::from_fn(&alg(n), |_, _| Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(&Operator::identity(&alg(4))).sigma, vec![1.0; 4]);
        let p = mu(&ones(4));
        assert_abs_diff_eq!(p.sigma[0], 4.0, epsilon = 1e-12);
        for s in &p.sigma[1..] {
            assert_abs_diff_eq!(*s, 0.0, epsilon = 1e-12);
        }
        let d = Operator::diagonal(&alg(3), &[3.0, 1.0, 2.0]).unwrap();
        let p = mu(&d);
        assert_abs_diff_eq!(p.sigma[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.sigma[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.sigma[2], 1.0, epsilon = 1e-14);
        assert_eq!(p.mu_at(0.0), p.sigma[0]);
        assert_eq!(p.mu_at(1.0 / 3.0), p.sigma[1]);
        assert_eq!(p.mu_at(1.0), 0.0);
    }

    #[test]
    fn lambda_examples() {
        let id = Operator::identity(&alg(4));
        assert_eq!(lambda(&id, 0.5), 1.0);
        assert_eq!(lambda(&id, 1.0), 0.0);
        let d = SingularValueProfile::from_values(vec![3.0, 1.0, 2.0]);
        assert_eq!(d.lambda(1.5), 2.0 / 3.0);
        assert_eq!(d.lambda(3.0), 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let id = Operator::identity(&alg(5));
        for p in [0.25, 0.5, 1.0, 2.0, 7.5] {
            assert_abs_diff_eq!(lp_norm(&id, p), 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(lp_norm(&ones(6), 1.0), 1.0, epsilon = 1e-12);
        let d = Operator::diagonal(&alg(2), &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lp_norm(&d, 2.0), 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(lp_norm(&Operator::zeros(&alg(3)), 1.0), 0.0);
    }

    #[test]
    fn op_norm_examples() {
        assert_abs_diff_eq!(op_norm(&Operator::identity(&alg(3))), 1.0, epsilon = 1e-14);
        let d = Operator::diagonal(&alg(2), &[3.0, 1.0]).unwrap();
        assert_abs_diff_eq!(op_norm(&d), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn weak_l1_examples() {
        assert_abs_diff_eq!(weak_l1_quasinorm(&Operator::identity(&alg(4))), 1.0, epsilon = 1e-14);
        let d = Operator::diagonal(&alg(4), &[4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(weak_l1_quasinorm(&d), 1.0, epsilon = 1e-14);
        let d = Operator::diagonal(&alg(2), &[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(weak_l1_quasinorm(&d), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn submajorization_examples() {
        let a = Operator::diagonal(&alg(2), &[1.0, 1.0]).unwrap();
        let b = Operator::diagonal(&alg(2), &[2.0, 0.0]).unwrap();
        assert!(submajorizes(&b, &a, 0.0));
        assert!(!submajorizes(&a, &b, 0.0));
    }

    #[test]
    fn llogl_examples() {
        assert_eq!(llogl_functional(&Operator::identity(&alg(3))).unwrap(), 0.0);
        assert_eq!(llogl_functional(&Operator::zeros(&alg(3))).unwrap(), 0.0);
        let e2 = std::f64::consts::E.powi(2);
        let d = Operator::diagonal(&alg(2), &[e2, 0.0]).unwrap();
        assert_abs_diff_eq!(llogl_functional(&d).unwrap(), e2, epsilon = 1e-12);
        let neg = Operator::diagonal(&alg(2), &[1.0, -0.5]).unwrap();
        assert!(matches!(llogl_functional(&neg), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn dyadic_index_boundaries() {
        assert_eq!(dyadic_index(0.0), 0);
        assert_eq!(dyadic_index(0.999), 0);
        assert_eq!(dyadic_index(1.0), 1);
        assert_eq!(dyadic_index(1.999), 1);
        assert_eq!(dyadic_index(2.0), 2);
        assert_eq!(dyadic_index(3.0), 2);
        assert_eq!(dyadic_index(4.0), 3);
        assert_eq!(dyadic_index(1024.0), 11);
        assert_eq!(dyadic_index(1023.9), 10);
    }

    #[test]
    fn dyadic_examples() {
        let d = Operator::diagonal(&alg(3), &[0.5, 1.5, 3.0]).unwrap();
        let dec = dyadic_decompose(&d).unwrap();
        let ks: Vec<u32> = dec.parts.iter().map(|p| p.k).collect();
        assert_eq!(ks, vec![0, 1, 2]);
        assert_abs_diff_eq!(dec.parts[0].eigenvalues[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(dec.parts[1].eigenvalues[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(dec.parts[2].eigenvalues[0], 3.0, epsilon = 1e-14);

        let small = d.scale_real(0.3);
        let dec = dyadic_decompose(&small).unwrap();
        assert_eq!(dec.parts.len(), 1);
        assert_eq!(dec.parts[0].k, 0);
        assert!(dec.parts[0].part.max_abs_diff(&small) < 1e-14);

        let neg = Operator::diagonal(&alg(2), &[-1.0, 1.0]).unwrap();
        assert!(matches!(dyadic_decompose(&neg), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn partial_integrals_are_exact() {
        let p = SingularValueProfile::from_values(vec![1.0, 4.0, 2.0, 1.0]);
        assert_eq!(p.partial_integrals(), vec![1.0, 1.5, 1.75, 2.0]);
    }
}
