//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! (visible with `--nocapture`) and then asserts.
//!
//! Tolerances are pinned here rather than taken from library defaults.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use nch_core::inequality::*;
use nch_core::norm::{exact_l2_norm, k2k_constant, truncation_growth_witness, TransformMap};
use nch_core::{EnsembleConfig, Tolerances, TracedAlgebra};

const SEED: u64 = 20_240_601;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!("{} [{id:02}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn config(partition: Vec<usize>, trials: usize, tol: Tolerances) -> EnsembleConfig {
    EnsembleConfig::new(partition, trials, SEED).unwrap().with_tolerances(tol)
}

fn partitions(n: usize) -> Vec<(&'static str, Vec<usize>)> {
    vec![
        ("flag", TracedAlgebra::flag(n).unwrap().partition().to_vec()),
        ("halves", TracedAlgebra::halves(n).unwrap().partition().to_vec()),
        ("single", TracedAlgebra::single(n).unwrap().partition().to_vec()),
    ]
}

fn l2_sweep() -> Vec<InequalityReport> {
    let tol = Tolerances::new(1e-10, 0.0);
    let mut out = Vec::new();
    for n in [2, 4, 8, 16] {
        for (_, p) in partitions(n) {
            out.push(check_h2_contraction(&config(p, 500, tol)).unwrap());
        }
    }
    out
}

#[test]
fn criterion_01_l2_contraction() {
    let reports = l2_sweep();
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let worst = reports.iter().map(|r| r.stat("max_l2_ratio")).fold(0.0, f64::max);
    let flag = exact_l2_norm(&Arc::new(TracedAlgebra::flag(8).unwrap()), TransformMap::Hilbert).value;
    let single = exact_l2_norm(&Arc::new(TracedAlgebra::single(8).unwrap()), TransformMap::Hilbert).value;
    let ok = violations == 0 && (flag - 1.0).abs() <= 1e-8 && single == 0.0;
    verdict(
        1,
        "L2 contraction",
        ok,
        format!("{violations} violations over 12 ensembles x 500, max ratio {worst:.6}, exact norm flag {flag:.12} single {single}"),
    );
}

#[test]
fn criterion_02_pythagoras_and_reconstruction() {
    let reports = l2_sweep();
    let pyth = reports.iter().map(|r| r.stat("max_pythagoras_residual")).fold(0.0, f64::max);
    let recon = reports.iter().map(|r| r.stat("max_reconstruction_residual")).fold(0.0, f64::max);
    let ok = pyth <= 1e-10 && recon <= 1e-10;
    verdict(2, "Pythagoras and reconstruction", ok, format!("max residuals {pyth:.3e} / {recon:.3e}"));
}

/// Plain f64 bisection on a monotone function, independent of the library.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_03_root_constants() {
    let k2 = k2k_constant(1).unwrap().value;
    let k4 = k2k_constant(2).unwrap().value;
    let k2_oracle = bisect(|x| x * x - 2.0, 1.0, 2.0);
    let k4_oracle = (3.0 + 11f64.sqrt()).sqrt();
    let k4_bisect = bisect(|x| x.powi(4) - 6.0 * x * x - 2.0, 1.0, 4.0);
    let worst_residual = (1..=8).map(|k| k2k_constant(k).unwrap().residual).fold(0.0, f64::max);
    let ok = (k2 - k2_oracle).abs() <= 1e-10
        && (k2 - 2f64.sqrt()).abs() <= 1e-10
        && (k4 - k4_oracle).abs() <= 1e-9
        && (k4 - k4_bisect).abs() <= 1e-9
        && worst_residual <= 1e-10;
    verdict(
        3,
        "root constants",
        ok,
        format!("K2 = {k2:.12}, K4 = {k4:.12}, max residual k<=8 {worst_residual:.3e}"),
    );
}

#[test]
fn criterion_04_even_exponent_bounds() {
    let tol = Tolerances::new(1e-9, 1e-7);
    let mut details = Vec::new();
    let mut violations = 0;
    for k in 1..=3 {
        let r = check_even_p_bound(&config(vec![1; 8], 500, tol), k).unwrap();
        violations += r.violations;
        details.push(format!(
            "k={k}: sa {:.4} gen {:.4}",
            r.stat("max_self_adjoint_ratio"),
            r.stat("max_general_ratio")
        ));
    }
    verdict(4, "even exponent bounds", violations == 0, format!("{violations} violations; {}", details.join(", ")));
}

#[test]
fn criterion_05_weak_type_positive() {
    let r = check_kolmogorov(&config(vec![1; 16], 500, Tolerances::new(1e-9, 1e-7)), &default_s_grid()).unwrap();
    let max_ratio = r.stat("max_ratio").max(r.stat("max_weak_ratio"));
    let ok = r.violations == 0 && max_ratio <= 4.0;
    verdict(5, "weak type for positive inputs", ok, format!("{} violations, max s*lambda_s/||u||_1 = {max_ratio:.6}", r.violations));
}

#[test]
fn criterion_06_generalized_hoelder() {
    let tol = Tolerances::new(1e-9, 1e-7);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for exps in DEFAULT_HOELDER_EXPONENTS {
        let r = check_hoelder(&config(vec![1; 6], 500, tol), exps).unwrap();
        violations += r.violations;
        worst = worst.max(r.worst_ratio);
    }
    verdict(6, "generalized Hoelder", violations == 0, format!("{violations} violations, worst ratio {worst:.6}"));
}

#[test]
fn criterion_07_expectation_power_identity() {
    let tol = Tolerances::new(1e-8, 0.0);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let r = check_phi_power_identity(&config(vec![1; 6], 200, tol), k).unwrap();
        violations += r.violations;
        worst = worst.max(r.stat("max_residual"));
    }
    verdict(7, "expectation of even powers", violations == 0 && worst <= 1e-8, format!("max residual {worst:.3e}"));
}

#[test]
fn criterion_08_duality() {
    let r = check_duality(&config(vec![1; 8], 500, Tolerances::new(1e-10, 0.0))).unwrap();
    let worst = r.stat("max_residual");
    verdict(8, "skew duality", r.violations == 0 && worst <= 1e-10, format!("max residual {worst:.3e}"));
}

#[test]
fn criterion_09_regularization() {
    let r = check_regularization_suite(
        &config(vec![1; 8], 200, Tolerances::new(1e-9, 1e-7)),
        &DEFAULT_EPSILON_GRID,
    )
    .unwrap();
    let gap = r.stat("max_gap_ratio");
    verdict(
        9,
        "regularization properties",
        r.violations == 0 && gap <= 1.0,
        format!("{} violations, max ||f_eps - f||_2 / (eps ||I + f^2||_2) = {gap:.6}", r.violations),
    );
}

#[test]
fn criterion_10_trace_inequalities() {
    let cfg = config(vec![1; 8], 500, Tolerances::new(1e-9, 1e-7));
    let reports = [
        check_commuting_projection(&cfg).unwrap(),
        check_re_vs_abs(&cfg, DEFAULT_EPSILON).unwrap(),
        check_inverse_monotone(&cfg, DEFAULT_EPSILON).unwrap(),
    ];
    let detail: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {} viol (worst {:.6})", r.check, r.violations, r.worst_ratio))
        .collect();
    let ok = reports.iter().all(|r| r.violations == 0);
    verdict(10, "trace inequalities", ok, detail.join(", "));
}

#[test]
fn criterion_11_small_exponent_bound() {
    let tol = Tolerances::new(1e-6, 0.0);
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [0.5, 0.75] {
        let r = check_weak_lp(&config(vec![1; 16], 500, tol), p).unwrap();
        ok &= r.violations == 0;
        parts.push(format!(
            "p={p}: max {:.4} <= {:.4}, conjugate ratio {:.4}",
            r.stat("max_lp_power"),
            weak_lp_bound(p),
            r.stat("max_conjugate_ratio")
        ));
    }
    verdict(11, "L^p bound for p < 1", ok, parts.join("; "));
}

#[test]
fn criterion_12_llogl() {
    let cfg = config(vec![1; 16], 500, Tolerances::new(1e-10, 0.0));
    let a = check_llogl(&cfg, DEFAULT_LLOGL_CEILING).unwrap();
    let b = check_llogl(&cfg, DEFAULT_LLOGL_CEILING).unwrap();
    let k = a.stat("empirical_k");
    let recon = a.stat("max_reconstruction_residual");
    let ok = a.violations == 0 && recon <= 1e-10 && k.is_finite() && k.to_bits() == b.stat("empirical_k").to_bits();
    verdict(12, "L log L", ok, format!("{} violations, empirical K {k:.6}, reconstruction {recon:.3e}", a.violations));
}

#[test]
fn criterion_13_weak_type_general() {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [8, 16, 32] {
        let r = check_weak_type(&config(vec![1; n], 1000, Tolerances::new(1e-9, 1e-7)), DEFAULT_WEAK_TYPE_CEILING).unwrap();
        let k = r.stat("empirical_k");
        ok &= r.violations == 0 && k <= 40.0;
        parts.push(format!("n={n}: K {k:.4}"));
    }
    verdict(13, "weak type for general inputs", ok, parts.join(", "));
}

#[test]
fn criterion_14_growth_witness() {
    let t = truncation_growth_witness(&[2, 8, 64]).unwrap();
    let ratios: Vec<String> = t.rows.iter().map(|r| format!("{}:{:.6}", r.n, r.ratio)).collect();
    verdict(14, "truncation growth", t.strictly_increasing, ratios.join(" "));
}

fn verify_all(dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_nch"))
        .args(["verify", "--all", "--seed", "7", "--out"])
        .arg(dir)
        .env_remove("NCH_SEED")
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn criterion_15_determinism() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    verify_all(a.path());
    verify_all(b.path());
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.ends_with(".manifest.json"))
        .collect();
    names.sort();
    let identical = names
        .iter()
        .all(|n| std::fs::read(a.path().join(n)).unwrap() == std::fs::read(b.path().join(n)).unwrap_or_default());
    let reports = names.iter().filter(|n| !n.contains(".witness.")).count();
    verdict(15, "determinism", identical && reports == 13, format!("{} files compared, {reports} reports", names.len()));
}
