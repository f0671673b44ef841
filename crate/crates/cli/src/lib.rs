//! Argument handling and command implementations for the `nch` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use nch_core::algebra::{membership, Operator, SubspaceTag, I};
use nch_core::hardy::{decompose, hilbert, riesz};
use nch_core::inequality::{self, check_kolmogorov, InequalityReport, CHECK_NAMES};
use nch_core::io::{format_real, read_matrix, write_matrix};
use nch_core::norm::{cp_growth_scan, k2k_constant, truncation_growth_witness, AscentParams, GrowthScan};
use nch_core::spectral::lp_norm;
use nch_core::{EnsembleConfig, Error, Result, Tolerances, TracedAlgebra};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATIONS: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "nch", version, about = "Conjugate operators on block upper-triangular matrix algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Matrix dimension (defaults to the partition sum, or a per-command default).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated block sizes, or one of `flag`, `single`, `halves`.
    #[arg(long, default_value = "flag")]
    pub partition: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "NCH_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_abs: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_rel: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AscentArgs {
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = 500)]
    pub iterations: usize,
    /// Ceiling on estimate / (p q) across the scan.
    #[arg(long, default_value_t = 1.0)]
    pub m_ceiling: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the conjugate of a matrix file.
    Hilbert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Split a matrix file into its strictly upper, strictly lower and diagonal parts.
    Decompose {
        input: PathBuf,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write the block upper-triangular truncation of a matrix file.
    Riesz {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        partition: Option<String>,
    },
    /// Run inequality checks and write one report per check.
    Verify {
        /// Check names; see `--all`.
        checks: Vec<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Tabulate the even-exponent constants and the growth scan.
    Constants {
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [1.25, 2.0, 4.0, 8.0])]
        p: Vec<f64>,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        ascent: AscentArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Worst `s * lambda_s(|u + i u~|) / ||u||_1` per level `s`.
    Kolmogorov {
        #[arg(long, default_value_t = 0.01)]
        s_min: f64,
        #[arg(long, default_value_t = 100.0)]
        s_max: f64,
        #[arg(long, default_value_t = 41)]
        s_points: usize,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Lower bounds on the L^p norm of the conjugation across exponents.
    Scan {
        #[arg(long, value_delimiter = ',', default_values_t = [1.25, 2.0, 4.0, 8.0])]
        p: Vec<f64>,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        ascent: AscentArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Trace norm of the conjugate of the all-ones matrix on the full flag.
    TruncationGrowth {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 8, 64])]
        n_list: Vec<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ensemble: Option<EnsembleConfig>,
    pub params: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub artifact_paths: Vec<String>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl RunManifest {
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        self.finished_unix_ms = now_ms();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Resolves `--partition` against an optional dimension.
pub fn parse_partition(spec: &str, n: Option<usize>, default_n: usize) -> Result<Vec<usize>> {
    let keyword_n = n.unwrap_or(default_n);
    let partition = match spec.trim() {
        "flag" => TracedAlgebra::flag(keyword_n)?.partition().to_vec(),
        "single" => TracedAlgebra::single(keyword_n)?.partition().to_vec(),
        "halves" => TracedAlgebra::halves(keyword_n)?.partition().to_vec(),
        list => list
            .split(',')
            .map(|b| {
                b.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad partition entry {b:?} in {list:?}")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let algebra = match n {
        Some(n) => TracedAlgebra::with_dimension(n, partition)?,
        None => TracedAlgebra::new(partition)?,
    };
    Ok(algebra.partition().to_vec())
}

impl EnsembleArgs {
    pub fn resolve(&self, default_n: usize) -> Result<EnsembleConfig> {
        let partition = parse_partition(&self.partition, self.n, default_n)?;
        if !(self.tol_abs >= 0.0 && self.tol_rel >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be non-negative".into()));
        }
        Ok(EnsembleConfig::new(partition, self.trials, self.seed)?
            .with_tolerances(Tolerances::new(self.tol_abs, self.tol_rel)))
    }
}

fn read_input(input: &Path, partition: Option<&str>) -> Result<Operator> {
    let a = read_matrix(input, None)?;
    match partition {
        None => Ok(a),
        Some(spec) => {
            let p = parse_partition(spec, Some(a.n()), a.n())?;
            a.with_algebra(Arc::new(TracedAlgebra::with_dimension(a.n(), p)?))
        }
    }
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8> {
    let started = now_ms();
    let manifest = |command: &str, ensemble: Option<EnsembleConfig>, params: BTreeMap<String, Value>| RunManifest {
        command: command.to_string(),
        config: RunConfig { ensemble, params },
        started_unix_ms: started,
        finished_unix_ms: started,
        artifact_paths: Vec::new(),
    };
    match cli.command {
        Command::Hilbert { input, output, partition } => {
            let a = read_input(&input, partition.as_deref())?;
            let conj = hilbert(&a);
            write_matrix(&output, &conj)?;
            let analytic = &a + &conj.scale(I);
            println!("l2_norm(a) = {}", lp_norm(&a, 2.0));
            println!("l2_norm(conjugate) = {}", lp_norm(&conj, 2.0));
            println!("a + i*conjugate in block upper pattern: {}", membership(&analytic, SubspaceTag::Hinf, 1e-12));
            Ok(EXIT_OK)
        }
        Command::Riesz { input, output, partition } => {
            let a = read_input(&input, partition.as_deref())?;
            let r = riesz(&a);
            write_matrix(&output, &r)?;
            println!("idempotence residual = {}", riesz(&r).max_abs_diff(&r));
            Ok(EXIT_OK)
        }
        Command::Decompose { input, partition, out } => {
            let a = read_input(&input, partition.as_deref())?;
            let dec = decompose(&a);
            std::fs::create_dir_all(&out)?;
            for (name, op) in [("a1", &dec.a1), ("a2", &dec.a2), ("d", &dec.d)] {
                write_matrix(&out.join(format!("{name}.json")), op)?;
            }
            write_matrix(&out.join("conjugate.json"), &dec.conjugate())?;
            let sq = |x: &Operator| lp_norm(x, 2.0).powi(2);
            println!("reconstruction residual = {}", dec.reconstruct().max_abs_diff(&a));
            println!(
                "pythagoras residual = {}",
                (sq(&a) - sq(&dec.a1) - sq(&dec.a2) - sq(&dec.d)).abs()
            );
            Ok(EXIT_OK)
        }
        Command::Verify { checks, all, ensemble, out } => {
            let cfg = ensemble.resolve(8)?;
            let names: Vec<String> = if all {
                CHECK_NAMES.iter().map(|s| s.to_string()).collect()
            } else if checks.is_empty() {
                return Err(Error::InvalidParameter("name at least one check or pass --all".into()));
            } else {
                checks
            };
            if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
                return Err(Error::UnknownCheck(bad.clone()));
            }
            let mut m = manifest("verify", Some(cfg.clone()), BTreeMap::from([("checks".into(), json!(names))]));
            let mut failed = false;
            for name in &names {
                let mut report = inequality::run_check(name, &cfg)?;
                for p in report.write(&out)? {
                    m.artifact_paths.push(path_string(&p));
                }
                failed |= !report.passed();
                print_report(&report);
            }
            m.write(&out)?;
            Ok(if failed { EXIT_VIOLATIONS } else { EXIT_OK })
        }
        Command::Constants { k_max, p, ensemble, ascent, out } => {
            let cfg = ensemble.resolve(8)?;
            std::fs::create_dir_all(&out)?;
            let mut roots = Vec::new();
            let mut csv = String::from("k,value,value_lo,residual,residual_f64,sign_changes\n");
            for k in 1..=k_max {
                let r = k2k_constant(k)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    k,
                    format_real(r.value),
                    format_real(r.value_lo),
                    format_real(r.residual),
                    format_real(r.residual_f64),
                    r.sign_changes
                );
                roots.push(r);
            }
            let scan = run_scan(&cfg, &p, &ascent)?;
            let mut m = manifest("constants", Some(cfg.clone()), scan_params(&p, &ascent, Some(k_max)));
            let root_ok = roots.iter().all(|r| r.residual <= 1e-10);
            let csv_path = out.join("constants.csv");
            std::fs::write(&csv_path, csv)?;
            let scan_path = out.join("scan.csv");
            std::fs::write(&scan_path, scan.to_csv())?;
            let json_path = out.join("constants.json");
            let doc = json!({ "roots": roots, "scan": scan });
            std::fs::write(&json_path, serde_json::to_string_pretty(&doc)? + "\n")?;
            for r in &roots {
                println!("K_{} = {} (residual {:e})", 2 * r.k, r.value, r.residual);
            }
            print_scan(&scan);
            m.artifact_paths = [csv_path, scan_path, json_path].iter().map(|p| path_string(p)).collect();
            m.write(&out)?;
            Ok(if root_ok && scan.within_ceiling { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::Scan { p, ensemble, ascent, out } => {
            let cfg = ensemble.resolve(8)?;
            std::fs::create_dir_all(&out)?;
            let scan = run_scan(&cfg, &p, &ascent)?;
            let path = out.join("scan.csv");
            std::fs::write(&path, scan.to_csv())?;
            print_scan(&scan);
            let mut m = manifest("scan", Some(cfg), scan_params(&p, &ascent, None));
            m.artifact_paths.push(path_string(&path));
            m.write(&out)?;
            Ok(if scan.within_ceiling { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::Kolmogorov { s_min, s_max, s_points, ensemble, out } => {
            let cfg = ensemble.resolve(16)?;
            if !(s_min > 0.0 && s_max >= s_min && s_points >= 1) {
                return Err(Error::InvalidParameter("need 0 < s-min <= s-max and s-points >= 1".into()));
            }
            let grid: Vec<f64> = (0..s_points)
                .map(|i| {
                    let t = if s_points == 1 { 0.0 } else { i as f64 / (s_points - 1) as f64 };
                    s_min * (s_max / s_min).powf(t)
                })
                .collect();
            let mut report = check_kolmogorov(&cfg, &grid)?;
            std::fs::create_dir_all(&out)?;
            let mut csv = String::from("s,worst\n");
            for row in &report.sweep {
                let _ = writeln!(csv, "{},{}", format_real(row.s), format_real(row.worst));
            }
            let csv_path = out.join("kolmogorov.csv");
            std::fs::write(&csv_path, csv)?;
            let mut m = manifest("kolmogorov", Some(cfg), BTreeMap::from([("s_grid".into(), json!(grid))]));
            m.artifact_paths.push(path_string(&csv_path));
            for p in report.write(&out)? {
                m.artifact_paths.push(path_string(&p));
            }
            print_report(&report);
            m.write(&out)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::TruncationGrowth { n_list, out } => {
            let table = truncation_growth_witness(&n_list)?;
            std::fs::create_dir_all(&out)?;
            let mut csv = String::from("n,ratio,reference\n");
            for r in &table.rows {
                let _ = writeln!(csv, "{},{},{}", r.n, format_real(r.ratio), format_real(r.reference));
                println!("n = {:>4}  ratio = {:.12}  reference = {:.12}", r.n, r.ratio, r.reference);
            }
            println!("strictly increasing: {}", table.strictly_increasing);
            let path = out.join("growth.csv");
            std::fs::write(&path, csv)?;
            let mut m = manifest("truncation-growth", None, BTreeMap::from([("n_list".into(), json!(n_list))]));
            m.artifact_paths.push(path_string(&path));
            m.write(&out)?;
            Ok(if table.strictly_increasing { EXIT_OK } else { EXIT_VIOLATIONS })
        }
    }
}

fn run_scan(cfg: &EnsembleConfig, p: &[f64], ascent: &AscentArgs) -> Result<GrowthScan> {
    let params = AscentParams {
        restarts: ascent.restarts,
        iterations: ascent.iterations,
        seed: cfg.master_seed,
        ..AscentParams::default()
    };
    cp_growth_scan(&cfg.algebra()?, p, &params, ascent.m_ceiling)
}

fn scan_params(p: &[f64], ascent: &AscentArgs, k_max: Option<u32>) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::from([
        ("p".to_string(), json!(p)),
        ("restarts".to_string(), json!(ascent.restarts)),
        ("iterations".to_string(), json!(ascent.iterations)),
        ("m_ceiling".to_string(), json!(ascent.m_ceiling)),
    ]);
    if let Some(k) = k_max {
        m.insert("k_max".into(), json!(k));
    }
    m
}

fn print_report(r: &InequalityReport) {
    println!(
        "{} {:<22} trials={:<6} violations={:<4} worst_ratio={:.6e}",
        if r.passed() { "PASS" } else { "FAIL" },
        r.check,
        r.trials,
        r.violations,
        r.worst_ratio
    );
}

fn print_scan(scan: &GrowthScan) {
    for r in &scan.rows {
        println!("p = {:<6} estimate = {:.8}  estimate/(pq) = {:.8}", r.p, r.estimate, r.pq_ratio);
    }
    println!("max estimate/(pq) = {:.8} (ceiling {})", scan.max_pq_ratio, scan.m_ceiling);
}
