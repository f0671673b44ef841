//! Commutative reference: the conjugate function on trigonometric polynomials,
//! and the trace-norm growth of the triangular sign pattern.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, TracedAlgebra};
use crate::error::{Error, Result};
use crate::hardy::hilbert;
use crate::spectral::lp_norm;

/// Coefficients `c_{-N}, ..., c_N` (odd length `2N + 1`); frequency `m`
/// is multiplied by `-i sgn(m)`.
pub fn classical_conjugate(coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = degree_of(coefficients)?;
    Ok(coefficients
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let m = idx as i64 - degree as i64;
            c * Complex64::new(0.0, -(m.signum() as f64))
        })
        .collect())
}

fn degree_of(coefficients: &[Complex64]) -> Result<usize> {
    if coefficients.len().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "coefficient list must have odd length 2N+1, got {}",
            coefficients.len()
        )));
    }
    Ok(coefficients.len() / 2)
}

/// Values of `sum_m c_m e^{i m theta}` at `theta_j = 2 pi j / samples`.
pub fn sample_polynomial(coefficients: &[Complex64], samples: usize) -> Result<Vec<Complex64>> {
    let degree = degree_of(coefficients)?;
    if samples <= 2 * degree {
        return Err(Error::InvalidParameter(format!(
            "{samples} samples alias a degree-{degree} polynomial"
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); samples];
    for (idx, &c) in coefficients.iter().enumerate() {
        let m = idx as i64 - degree as i64;
        buf[m.rem_euclid(samples as i64) as usize] += c;
    }
    // Inverse DFT without normalization evaluates the polynomial on the grid.
    FftPlanner::new().plan_fft_inverse(samples).process(&mut buf);
    Ok(buf)
}

/// `(1/2pi integral |P|^p)^{1/p}` by the trapezoid rule on `samples` points.
/// Exact for `p = 2` once `samples > 2N`.
pub fn trig_lp_norm(coefficients: &[Complex64], p: f64, samples: usize) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::BadExponent(p));
    }
    let values = sample_polynomial(coefficients, samples)?;
    let mean = values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / samples as f64;
    Ok(mean.powf(1.0 / p))
}

/// Fejer kernel of order `n`: coefficients `1 - |m| / (n + 1)` for `|m| <= n`.
pub fn fejer_kernel(n: usize) -> Vec<Complex64> {
    let n_i = n as i64;
    (-n_i..=n_i)
        .map(|m| Complex64::new(1.0 - m.unsigned_abs() as f64 / (n + 1) as f64, 0.0))
        .collect()
}

/// `||conj(F_n)||_1` with `||F_n||_1 = 1`; grows like `(2/pi) log n`.
pub fn fejer_conjugate_l1(n: usize) -> Result<f64> {
    let samples = (64 * (n + 1)).next_power_of_two();
    trig_lp_norm(&classical_conjugate(&fejer_kernel(n))?, 1.0, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `||u~||_1` for the all-ones `u` on the full flag (`||u||_1 = 1`).
    pub ratio: f64,
    /// `||conj(F_n)||_1` from the commutative reference oracle.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub strictly_increasing: bool,
}

pub fn truncation_growth_witness(n_list: &[usize]) -> Result<GrowthTable> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let alg = Arc::new(TracedAlgebra::flag(n)?);
        let ones = Operator::from_fn(&alg, |_, _| Complex64::new(1.0, 0.0))?;
        rows.push(GrowthRow {
            n,
            ratio: lp_norm(&hilbert(&ones), 1.0) / lp_norm(&ones, 1.0),
            reference: fejer_conjugate_l1(n)?,
        });
    }
    let strictly_increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(GrowthTable {
        rows,
        strictly_increasing,
    })
}
