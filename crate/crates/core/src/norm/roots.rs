//! The constants `K_2k`: largest real root of
//!
//! ```text
//! q(X) = X^{2k} - C(2k,2) X^{2k-2} - C(2k,4) X^{2k-4} - ... - C(2k,2k-2) X^2 - 2.
//! ```
//!
//! In `y = X^2` the coefficient signs are `(+, -, ..., -)`, a single sign
//! change, so there is exactly one positive root. It is bracketed in
//! `[1, 2k 4^k]` and bisected in double-double arithmetic: `q` has terms of
//! size `~1e17` near the root at `k = 8`, so an `f64` evaluation cannot even
//! resolve the sign of `q` close to the root.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConstant {
    pub k: u32,
    /// Nearest `f64` to the root.
    pub value: f64,
    /// `value + value_lo` is the root to double-double precision.
    pub value_lo: f64,
    /// `|q(value + value_lo)|`.
    pub residual: f64,
    /// `|q(value)|`, evaluated exactly enough to be meaningful.
    pub residual_f64: f64,
    /// Sign changes in the coefficient sequence (Descartes bound on positive roots).
    pub sign_changes: usize,
    /// `q > 0` at `value * (1 + 1e-6)`.
    pub positive_above: bool,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `q` in `y = X^2`, highest degree first.
pub fn coefficients(k: u32) -> Vec<f64> {
    let k = k as u64;
    let mut c = Vec::with_capacity(k as usize + 1);
    c.push(1.0);
    for j in 1..k {
        c.push(-binomial(2 * k, 2 * j).round());
    }
    c.push(-2.0);
    c
}

fn eval_dd(coeffs: &[f64], x: TwoFloat) -> TwoFloat {
    let y = x * x;
    coeffs
        .iter()
        .fold(TwoFloat::from(0.0), |acc, &c| acc * y + TwoFloat::from(c))
}

/// `q(x)` in double-double arithmetic.
pub fn evaluate(k: u32, x: f64) -> f64 {
    eval_dd(&coefficients(k), TwoFloat::from(x)).hi()
}

fn sign_changes(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .filter(|c| **c != 0.0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count()
}

pub fn k2k_constant(k: u32) -> Result<RootConstant> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let coeffs = coefficients(k);
    let mut lo = TwoFloat::from(1.0);
    let mut hi = TwoFloat::from(2.0 * k as f64 * 4f64.powi(k as i32));
    debug_assert!(eval_dd(&coeffs, lo).hi() < 0.0);
    debug_assert!(eval_dd(&coeffs, hi).hi() > 0.0);
    for _ in 0..256 {
        let mid = (lo + hi) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if eval_dd(&coeffs, mid).hi() > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = if eval_dd(&coeffs, hi).abs() < eval_dd(&coeffs, lo).abs() {
        hi
    } else {
        lo
    };
    let value = root.hi();
    Ok(RootConstant {
        k,
        value,
        value_lo: root.lo(),
        residual: eval_dd(&coeffs, root).abs().hi(),
        residual_f64: eval_dd(&coeffs, TwoFloat::from(value)).abs().hi(),
        sign_changes: sign_changes(&coeffs),
        positive_above: eval_dd(&coeffs, TwoFloat::from(value * (1.0 + 1e-6))).hi() > 0.0,
    })
}
