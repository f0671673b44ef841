use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, TracedAlgebra};
use crate::ensemble::{EnsembleKind, TrialSampler};
use crate::error::{Error, Result};
use crate::hardy::{hilbert, riesz};
use crate::spectral::lp_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMap {
    Hilbert,
    Riesz,
}

impl TransformMap {
    pub fn apply(self, a: &Operator) -> Operator {
        match self {
            Self::Hilbert => hilbert(a),
            Self::Riesz => riesz(a),
        }
    }

    /// Adjoint for the trace inner product. Both maps are entrywise
    /// multipliers, so the adjoint multiplies by the conjugate symbol.
    pub fn apply_adjoint(self, a: &Operator) -> Operator {
        match self {
            Self::Hilbert => -hilbert(a),
            Self::Riesz => riesz(a),
        }
    }

    /// Closed form when the map is trivial on the algebra.
    fn degenerate_norm(self, algebra: &TracedAlgebra) -> Option<f64> {
        match (self, algebra.num_blocks()) {
            (Self::Hilbert, 1) => Some(0.0),
            (Self::Riesz, 1) => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactL2,
    Ascent,
    ClosedForm,
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub p: f64,
    /// `||T(witness)||_p / ||witness||_p`; a lower bound on the norm.
    pub value: f64,
    pub witness: Operator,
    pub method: NormMethod,
    pub restarts: usize,
    pub iterations: usize,
    /// Objective per accepted ascent step of the winning restart.
    pub trace: Vec<f64>,
}

impl NormEstimate {
    fn closed_form(p: f64, value: f64, algebra: &Arc<TracedAlgebra>) -> Self {
        Self {
            p,
            value,
            witness: Operator::identity(algebra),
            method: NormMethod::ClosedForm,
            restarts: 0,
            iterations: 0,
            trace: vec![value],
        }
    }

    pub fn ratio_of(map: TransformMap, a: &Operator, p: f64) -> f64 {
        let den = lp_norm(a, p);
        if den == 0.0 {
            0.0
        } else {
            lp_norm(&map.apply(a), p) / den
        }
    }
}

/// Largest singular value of the map as an operator on `L^2(M_n, tau)`.
///
/// Matrix units scaled by `sqrt(n)` are orthonormal for `<x, y> = tau(x* y)`,
/// and the scale cancels, so the superoperator is built on plain matrix units.
pub fn exact_l2_norm(algebra: &Arc<TracedAlgebra>, map: TransformMap) -> NormEstimate {
    let n = algebra.n();
    let dim = n * n;
    let mut sup = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let unit = Operator::from_fn(algebra, |i, j| {
            Complex64::new(if i * n + j == col { 1.0 } else { 0.0 }, 0.0)
        })
        .expect("matrix unit is finite");
        let image = map.apply(&unit);
        for i in 0..n {
            for j in 0..n {
                sup[(i * n + j, col)] = image.get(i, j);
            }
        }
    }
    let svd = sup.svd(false, true);
    let (top, value) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &s)| if s > best.1 { (i, s) } else { best });
    let witness = if value > 0.0 {
        let v_t = svd.v_t.expect("requested right singular vectors");
        Operator::from_fn(algebra, |i, j| v_t[(top, i * n + j)].conj())
            .expect("singular vector is finite")
    } else {
        Operator::identity(algebra)
    };
    NormEstimate {
        p: 2.0,
        value,
        witness,
        method: NormMethod::ExactL2,
        restarts: 0,
        iterations: 0,
        trace: vec![value],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentParams {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub step: f64,
    /// Smoothing of `sigma^p` near zero singular values for `p < 2`.
    pub smoothing: f64,
}

impl Default for AscentParams {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 500,
            seed: 0,
            step: 0.1,
            smoothing: 1e-8,
        }
    }
}

/// `(1/p) log sum phi(sigma_i)` and its gradient for the real inner product
/// `Re Tr(G* dX)`, where `phi(s) = s^p` (or `(s^2 + delta^2)^{p/2}` when smoothed).
fn log_schatten(x: &DMatrix<Complex64>, p: f64, delta: f64) -> (f64, DMatrix<Complex64>) {
    let svd = x.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let sigma = &svd.singular_values;
    let smooth = p < 2.0;
    let phi = |s: f64| {
        if smooth {
            (s * s + delta * delta).powf(0.5 * p)
        } else {
            s.powf(p)
        }
    };
    let dphi_over_p = |s: f64| {
        if smooth {
            s * (s * s + delta * delta).powf(0.5 * p - 1.0)
        } else {
            s.powf(p - 1.0)
        }
    };
    let total: f64 = sigma.iter().map(|&s| phi(s)).sum();
    let weights = DVector::from_iterator(
        sigma.len(),
        sigma.iter().map(|&s| Complex64::new(dphi_over_p(s) / total, 0.0)),
    );
    let grad = &u * DMatrix::from_diagonal(&weights) * &v_t;
    (total.ln() / p, grad)
}

/// `U diag(sigma^e) V*` for `x = U diag(sigma) V*`.
fn singular_power(x: &DMatrix<Complex64>, e: f64) -> DMatrix<Complex64> {
    let svd = x.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let w = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values
            .iter()
            .map(|&s| Complex64::new(if s > 0.0 { s.powf(e) } else { 0.0 }, 0.0)),
    );
    &u * DMatrix::from_diagonal(&w) * &v_t
}

/// One step of the nonlinear power method `a <- J_q(T* J_p(T a))`, where `J`
/// are the duality maps of `L^p` and its dual. The ratio never decreases
/// along exact steps; `p <= 1` has no smooth dual and returns `None`.
fn power_step(
    map: TransformMap,
    alg: &Arc<TracedAlgebra>,
    a: &DMatrix<Complex64>,
    p: f64,
) -> Option<DMatrix<Complex64>> {
    if p <= 1.0 {
        return None;
    }
    let q = p / (p - 1.0);
    let image = map.apply(&Operator::wrap(alg.clone(), a.clone()));
    let dual = singular_power(image.matrix(), p - 1.0);
    let back = map.apply_adjoint(&Operator::wrap(alg.clone(), dual)).into_matrix();
    let next = singular_power(&back, q - 1.0);
    let norm = next.norm();
    (norm > 0.0 && norm.is_finite()).then(|| next / Complex64::new(norm, 0.0))
}

struct AscentRun {
    log_ratio: f64,
    witness: DMatrix<Complex64>,
    trace: Vec<f64>,
}

fn objective(map: TransformMap, alg: &Arc<TracedAlgebra>, a: &DMatrix<Complex64>, p: f64, delta: f64) -> (f64, DMatrix<Complex64>) {
    let op = Operator::wrap(alg.clone(), a.clone());
    let image = map.apply(&op);
    let (num, g_num) = log_schatten(image.matrix(), p, delta);
    let (den, g_den) = log_schatten(a, p, delta);
    let pulled = map
        .apply_adjoint(&Operator::wrap(alg.clone(), g_num))
        .into_matrix();
    (num - den, pulled - g_den)
}

fn ascend(
    map: TransformMap,
    alg: &Arc<TracedAlgebra>,
    p: f64,
    params: &AscentParams,
    restart: usize,
) -> AscentRun {
    let mut sampler = TrialSampler::new(alg.clone(), params.seed, restart);
    let start = sampler.draw(EnsembleKind::General).into_matrix();
    let mut a = &start / Complex64::new(start.norm(), 0.0);
    let (mut value, mut grad) = objective(map, alg, &a, p, params.smoothing);
    let mut trace = vec![value.exp()];
    let mut step = params.step;
    for _ in 0..params.iterations {
        if let Some(cand) = power_step(map, alg, &a, p) {
            let (v, g) = objective(map, alg, &cand, p, params.smoothing);
            if v.is_finite() && v > value {
                a = cand;
                value = v;
                grad = g;
                trace.push(value.exp());
                continue;
            }
        }
        let gnorm = grad.norm();
        if !(gnorm > 1e-14) {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand = &a + &grad * Complex64::new(step / gnorm, 0.0);
            let cn = cand.norm();
            cand /= Complex64::new(cn, 0.0);
            let (v, g) = objective(map, alg, &cand, p, params.smoothing);
            if v.is_finite() && v >= value {
                a = cand;
                value = v;
                grad = g;
                accepted = true;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(value.exp());
    }
    AscentRun {
        log_ratio: value,
        witness: a,
        trace,
    }
}

/// Lower bound on `||map||_{L^p -> L^p}` from `params.restarts` seeded
/// starting points. Each iteration tries a power-method step and falls back to
/// a normalized gradient step with backtracking; only increases are accepted.
pub fn estimate_lp_norm(
    algebra: &Arc<TracedAlgebra>,
    map: TransformMap,
    p: f64,
    params: &AscentParams,
) -> Result<NormEstimate> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if params.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    if let Some(v) = map.degenerate_norm(algebra) {
        return Ok(NormEstimate::closed_form(p, v, algebra));
    }
    let runs: Vec<AscentRun> = (0..params.restarts)
        .into_par_iter()
        .map(|r| ascend(map, algebra, p, params, r))
        .collect();
    // Deterministic max; the earliest restart wins ties.
    let mut best: Option<(f64, usize)> = None;
    for (idx, run) in runs.iter().enumerate() {
        let w = Operator::wrap(algebra.clone(), run.witness.clone());
        let ratio = NormEstimate::ratio_of(map, &w, p);
        debug_assert!(run.log_ratio.is_finite());
        if best.is_none_or(|(v, _)| ratio > v) {
            best = Some((ratio, idx));
        }
    }
    let (value, idx) = best.expect("at least one restart");
    let run = &runs[idx];
    Ok(NormEstimate {
        p,
        value,
        witness: Operator::wrap(algebra.clone(), run.witness.clone()),
        method: NormMethod::Ascent,
        restarts: params.restarts,
        iterations: params.iterations,
        trace: run.trace.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p: f64,
    pub estimate: f64,
    /// `estimate / (p q)` with `1/p + 1/q = 1`.
    pub pq_ratio: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthScan {
    pub rows: Vec<ScanRow>,
    pub m_ceiling: f64,
    pub max_pq_ratio: f64,
    pub within_ceiling: bool,
}

impl GrowthScan {
    pub const CSV_HEADER: &'static str = "p,estimate,pq_ratio,restarts,iterations,seed";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                crate::io::format_real(r.p),
                crate::io::format_real(r.estimate),
                crate::io::format_real(r.pq_ratio),
                r.restarts,
                r.iterations,
                r.seed
            ));
        }
        out
    }
}

/// Estimates of the conjugation norm across exponents against the `M p q` growth.
pub fn cp_growth_scan(
    algebra: &Arc<TracedAlgebra>,
    p_list: &[f64],
    params: &AscentParams,
    m_ceiling: f64,
) -> Result<GrowthScan> {
    if let Some(&p) = p_list.iter().find(|&&p| !(p > 1.0) || !p.is_finite()) {
        return Err(Error::BadExponent(p));
    }
    let mut rows = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let est = if p == 2.0 {
            exact_l2_norm(algebra, TransformMap::Hilbert)
        } else {
            estimate_lp_norm(algebra, TransformMap::Hilbert, p, params)?
        };
        let q = p / (p - 1.0);
        rows.push(ScanRow {
            p,
            estimate: est.value,
            pq_ratio: est.value / (p * q),
            restarts: params.restarts,
            iterations: params.iterations,
            seed: params.seed,
        });
    }
    let max_pq_ratio = rows.iter().map(|r| r.pq_ratio).fold(0.0, f64::max);
    Ok(GrowthScan {
        rows,
        m_ceiling,
        max_pq_ratio,
        within_ceiling: max_pq_ratio <= m_ceiling,
    })
}
