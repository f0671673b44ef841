//! Property checks run over seeded ensembles.
//!
//! Each check draws its operators per trial from an independent stream, so a
//! report depends only on the configuration. Trials run in parallel and are
//! folded in trial order.

mod checks;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Operator, TracedAlgebra};
use crate::ensemble::{EnsembleConfig, Tolerances, TrialSampler};
use crate::error::{Error, Result};

pub use checks::*;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    pub config: EnsembleConfig,
    pub params: BTreeMap<String, Value>,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` of the check's bounds, or `residual / allowed`
    /// for identity checks.
    pub worst_ratio: f64,
    pub worst_trial: Option<usize>,
    pub tolerances: Tolerances,
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    pub witness_file: Option<String>,
    #[serde(skip)]
    pub witness: Vec<Operator>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub worst: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn stat(&self, key: &str) -> f64 {
        self.stats.get(key).copied().unwrap_or(f64::NAN)
    }

    /// Combines runs of one check under different parameters.
    pub fn merge(check: &str, parts: Vec<(String, InequalityReport)>) -> InequalityReport {
        let mut iter = parts.into_iter();
        let (label, first) = iter.next().expect("at least one part");
        let mut out = InequalityReport {
            check: check.to_string(),
            params: BTreeMap::new(),
            stats: BTreeMap::new(),
            trials: 0,
            violations: 0,
            worst_ratio: f64::NEG_INFINITY,
            worst_trial: None,
            witness: Vec::new(),
            ..first.clone()
        };
        for (label, part) in std::iter::once((label, first)).chain(iter) {
            out.trials += part.trials;
            out.violations += part.violations;
            if part.worst_ratio > out.worst_ratio {
                out.worst_ratio = part.worst_ratio;
                out.worst_trial = part.worst_trial;
                out.witness = part.witness.clone();
            }
            out.params
                .insert(label.clone(), serde_json::to_value(&part.params).unwrap_or(Value::Null));
            out.stats.insert(format!("{label}/worst_ratio"), part.worst_ratio);
            out.stats.insert(format!("{label}/violations"), part.violations as f64);
            for (k, v) in part.stats {
                out.stats.insert(format!("{label}/{k}"), v);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report is serializable");
        text.push('\n');
        text
    }

    /// Writes `<check>.json` and the witness operators next to it.
    /// Returns every path written.
    pub fn write(&mut self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        self.witness_file = None;
        for (i, w) in self.witness.iter().enumerate() {
            let name = format!("{}.witness.{i}.json", self.check);
            let path = dir.join(&name);
            crate::io::write_matrix(&path, w)?;
            if i == 0 {
                self.witness_file = Some(name);
            }
            paths.push(path);
        }
        let path = dir.join(format!("{}.json", self.check));
        std::fs::write(&path, self.to_json())?;
        paths.insert(0, path);
        Ok(paths)
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone)]
pub struct TrialCheck {
    tolerances: Tolerances,
    bound_ratio: Option<f64>,
    residual_ratio: f64,
    violated: bool,
    witness: Vec<Operator>,
    stats: BTreeMap<&'static str, f64>,
    sweep: Vec<f64>,
}

impl TrialCheck {
    pub fn new(tolerances: Tolerances) -> Self {
        Self {
            tolerances,
            bound_ratio: None,
            residual_ratio: 0.0,
            violated: false,
            witness: Vec::new(),
            stats: BTreeMap::new(),
            sweep: Vec::new(),
        }
    }

    fn ratio(&self, lhs: f64, rhs: f64) -> f64 {
        if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            lhs / self.tolerances.abs
        }
    }

    /// `lhs <= rhs`, contributing to the reported ratio.
    pub fn bound(&mut self, lhs: f64, rhs: f64) -> bool {
        let r = self.ratio(lhs, rhs);
        self.bound_ratio = Some(self.bound_ratio.map_or(r, |b| b.max(r)));
        self.require(lhs, rhs)
    }

    /// `lhs <= rhs`, counted as a violation only.
    pub fn require(&mut self, lhs: f64, rhs: f64) -> bool {
        let ok = lhs.is_finite() && self.tolerances.bound_holds(lhs, rhs);
        self.violated |= !ok;
        ok
    }

    /// Identity check: `residual <= abs + rel * scale`.
    pub fn residual(&mut self, residual: f64, scale: f64) -> bool {
        let allowed = self.tolerances.abs + self.tolerances.rel * scale;
        self.residual_ratio = self.residual_ratio.max(residual / allowed);
        let ok = residual.is_finite() && self.tolerances.residual_holds(residual, scale);
        self.violated |= !ok;
        ok
    }

    /// Hard predicate that has no numeric slack.
    pub fn holds(&mut self, ok: bool) -> bool {
        self.violated |= !ok;
        ok
    }

    /// Records the running maximum of a diagnostic.
    pub fn stat(&mut self, key: &'static str, value: f64) {
        let e = self.stats.entry(key).or_insert(f64::NEG_INFINITY);
        *e = e.max(value);
    }

    pub fn sweep_point(&mut self, value: f64) {
        self.sweep.push(value);
    }

    pub fn witness(&mut self, ops: Vec<Operator>) {
        self.witness = ops;
    }

    pub fn worst_ratio(&self) -> f64 {
        self.bound_ratio.unwrap_or(self.residual_ratio)
    }

    pub fn violated(&self) -> bool {
        self.violated
    }
}

/// Runs `body` once per trial and folds the outcomes in trial order.
pub fn run_trials<F>(
    check: &str,
    cfg: &EnsembleConfig,
    params: BTreeMap<String, Value>,
    body: F,
) -> Result<InequalityReport>
where
    F: Fn(&mut TrialSampler, &mut TrialCheck) -> Result<()> + Sync,
{
    cfg.validate()?;
    let algebra: Arc<TracedAlgebra> = cfg.algebra()?;
    let outcomes: Vec<TrialCheck> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut sampler = TrialSampler::new(algebra.clone(), cfg.master_seed, t);
            let mut tc = TrialCheck::new(cfg.tolerances);
            body(&mut sampler, &mut tc)?;
            Ok(tc)
        })
        .collect::<Result<_>>()?;

    let mut report = InequalityReport {
        check: check.to_string(),
        config: cfg.clone(),
        params,
        trials: cfg.trials,
        violations: 0,
        worst_ratio: 0.0,
        worst_trial: None,
        tolerances: cfg.tolerances,
        stats: BTreeMap::new(),
        sweep: Vec::new(),
        witness_file: None,
        witness: Vec::new(),
    };
    let mut sweep: Vec<f64> = Vec::new();
    for (t, tc) in outcomes.into_iter().enumerate() {
        report.violations += tc.violated as usize;
        let r = tc.worst_ratio();
        if report.worst_trial.is_none() || r > report.worst_ratio {
            report.worst_ratio = r;
            report.worst_trial = Some(t);
            report.witness = tc.witness;
        }
        for (k, v) in tc.stats {
            let e = report.stats.entry(k.to_string()).or_insert(f64::NEG_INFINITY);
            *e = e.max(v);
        }
        if sweep.len() < tc.sweep.len() {
            sweep.resize(tc.sweep.len(), f64::NEG_INFINITY);
        }
        for (acc, v) in sweep.iter_mut().zip(&tc.sweep) {
            *acc = acc.max(*v);
        }
    }
    report.worst_ratio = report.worst_ratio.max(0.0);
    if let Some(Value::Array(grid)) = report.params.get("s_grid") {
        report.sweep = grid
            .iter()
            .zip(&sweep)
            .map(|(s, &worst)| SweepRow {
                s: s.as_f64().unwrap_or(f64::NAN),
                worst,
            })
            .collect();
    }
    Ok(report)
}

pub const CHECK_NAMES: [&str; 13] = [
    "h2_contraction",
    "hoelder",
    "phi_power_identity",
    "even_p_bound",
    "duality",
    "kolmogorov",
    "commuting_projection",
    "re_vs_abs",
    "inverse_monotone",
    "weak_type",
    "weak_lp",
    "llogl",
    "regularization_suite",
];

/// Runs a check by name with its default parameters.
pub fn run_check(name: &str, cfg: &EnsembleConfig) -> Result<InequalityReport> {
    match name {
        "h2_contraction" => check_h2_contraction(cfg),
        "hoelder" => {
            let mut parts = Vec::new();
            for exps in DEFAULT_HOELDER_EXPONENTS {
                let label = format!(
                    "p=({})",
                    exps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
                );
                parts.push((label, check_hoelder(cfg, exps)?));
            }
            Ok(InequalityReport::merge(name, parts))
        }
        "phi_power_identity" => {
            let parts = (1..=3)
                .map(|k| Ok((format!("k={k}"), check_phi_power_identity(cfg, k)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(InequalityReport::merge(name, parts))
        }
        "even_p_bound" => {
            let parts = (1..=3)
                .map(|k| Ok((format!("k={k}"), check_even_p_bound(cfg, k)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(InequalityReport::merge(name, parts))
        }
        "duality" => check_duality(cfg),
        "kolmogorov" => check_kolmogorov(cfg, &default_s_grid()),
        "commuting_projection" => check_commuting_projection(cfg),
        "re_vs_abs" => check_re_vs_abs(cfg, DEFAULT_EPSILON),
        "inverse_monotone" => check_inverse_monotone(cfg, DEFAULT_EPSILON),
        "weak_type" => check_weak_type(cfg, DEFAULT_WEAK_TYPE_CEILING),
        "weak_lp" => {
            let parts = [0.5, 0.75]
                .into_iter()
                .map(|p| Ok((format!("p={p}"), check_weak_lp(cfg, p)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(InequalityReport::merge(name, parts))
        }
        "llogl" => check_llogl(cfg, DEFAULT_LLOGL_CEILING),
        "regularization_suite" => check_regularization_suite(cfg, &DEFAULT_EPSILON_GRID),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

pub fn run_all(cfg: &EnsembleConfig) -> Result<Vec<InequalityReport>> {
    CHECK_NAMES.iter().map(|name| run_check(name, cfg)).collect()
}
