use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::algebra::{
    abs_value, expectation, inverse, pattern_leak, trace, Operator, SpectralDecomposition,
    SubspaceTag,
};
use crate::ensemble::{EnsembleConfig, EnsembleKind, TrialSampler};
use crate::error::{Error, Result};
use crate::hardy::{analytic_completion, decompose, hilbert, moebius, regularize};
use crate::norm::k2k_constant;
use crate::spectral::{dyadic_decompose, llogl_functional, lp_norm, mu, op_norm, weak_l1_quasinorm};

use super::{run_trials, InequalityReport};

pub const DEFAULT_HOELDER_EXPONENTS: [&[f64]; 3] = [&[2.0, 2.0], &[3.0, 3.0, 3.0], &[8.0, 8.0, 4.0, 2.0]];
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_EPSILON_GRID: [f64; 3] = [0.1, 0.01, 0.001];
pub const DEFAULT_WEAK_TYPE_CEILING: f64 = 40.0;
pub const DEFAULT_LLOGL_CEILING: f64 = 4.0;
pub const KOLMOGOROV_CONSTANT: f64 = 4.0;

/// 41 points, ten per decade, from 0.01 to 100.
pub fn default_s_grid() -> Vec<f64> {
    (0..=40).map(|i| 10f64.powf(-2.0 + i as f64 / 10.0)).collect()
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn tau_re(a: &Operator) -> f64 {
    trace(a).re
}

fn min_real_part(a: &Operator) -> Result<f64> {
    Ok(SpectralDecomposition::new(&a.real_part())?.min())
}

/// `sum_j c_j x^j` with `c_j` uniform in `[0, 1)` and degree uniform in `0..=3`.
fn random_nonnegative_polynomial(s: &mut TrialSampler, x: &Operator) -> Operator {
    let degree = s.index(4);
    let mut power = Operator::identity(x.algebra());
    let mut out = power.scale_real(s.uniform(0.0, 1.0));
    for _ in 0..degree {
        power = &power * x;
        out = out + power.scale_real(s.uniform(0.0, 1.0));
    }
    out
}

/// `||a~||_2 <= ||a||_2`, plus the orthogonal decomposition identities.
pub fn check_h2_contraction(cfg: &EnsembleConfig) -> Result<InequalityReport> {
    run_trials(
        "h2_contraction",
        cfg,
        params(&[("ensemble", json!("general"))]),
        |s, tc| {
            let a = s.draw(EnsembleKind::General);
            let dec = decompose(&a);
            let conj = hilbert(&a);
            let (na, nc) = (lp_norm(&a, 2.0), lp_norm(&conj, 2.0));
            tc.bound(nc, na);
            tc.stat("max_l2_ratio", if na > 0.0 { nc / na } else { 0.0 });

            let sq = |x: &Operator| lp_norm(x, 2.0).powi(2);
            let pythagoras = (sq(&a) - (sq(&dec.a1) + sq(&dec.a2.adjoint()) + sq(&dec.d))).abs();
            tc.residual(pythagoras, sq(&a));
            tc.stat("max_pythagoras_residual", pythagoras);
            let recon = dec.reconstruct().max_abs_diff(&a);
            tc.residual(recon, a.max_abs());
            tc.stat("max_reconstruction_residual", recon);
            let via_parts = dec.conjugate().max_abs_diff(&conj);
            tc.residual(via_parts, a.max_abs());
            tc.stat("max_conjugate_route_residual", via_parts);
            tc.witness(vec![a]);
            Ok(())
        },
    )
}

/// `|tau(a_1 ... a_m)| <= prod ||a_j||_{p_j}` for `sum 1/p_j = 1`.
pub fn check_hoelder(cfg: &EnsembleConfig, exponents: &[f64]) -> Result<InequalityReport> {
    let sum: f64 = exponents.iter().map(|p| 1.0 / p).sum();
    if exponents.is_empty() || (sum - 1.0).abs() > 1e-12 || exponents.iter().any(|p| !(*p >= 1.0)) {
        return Err(Error::BadExponents { sum });
    }
    run_trials(
        "hoelder",
        cfg,
        params(&[("ensemble", json!("general")), ("exponents", json!(exponents))]),
        |s, tc| {
            let ops: Vec<Operator> = exponents.iter().map(|_| s.draw(EnsembleKind::General)).collect();
            let product = ops[1..].iter().fold(ops[0].clone(), |acc, x| &acc * x);
            let lhs = trace(&product).norm();
            let rhs: f64 = ops.iter().zip(exponents).map(|(a, &p)| lp_norm(a, p)).product();
            tc.bound(lhs, rhs);
            tc.witness(ops);
            Ok(())
        },
    )
}

/// `Phi(g^{2k}) = Phi(u)^{2k}` for `g = u + iu~`, self-adjoint `u`.
pub fn check_phi_power_identity(cfg: &EnsembleConfig, k: u32) -> Result<InequalityReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    run_trials(
        "phi_power_identity",
        cfg,
        params(&[("ensemble", json!("self_adjoint")), ("k", json!(k))]),
        |s, tc| {
            let u = s.draw(EnsembleKind::SelfAdjoint);
            let g = analytic_completion(&u);
            let d = expectation(&u);
            let lhs = expectation(&g.powi(2 * k));
            let rhs = d.powi(2 * k);
            let res = lhs.max_abs_diff(&rhs);
            tc.residual(res, rhs.max_abs());
            tc.stat("max_residual", res);
            // The trace form used in the even-exponent argument.
            let tr = (trace(&g.powi(2 * k)) - trace(&rhs)).norm();
            tc.residual(tr, rhs.max_abs());
            tc.witness(vec![u]);
            Ok(())
        },
    )
}

/// `||u~||_{2k} <= K_2k ||u||_{2k}` (self-adjoint) and `||f~||_{2k} <= 2 K_2k ||f||_{2k}`.
pub fn check_even_p_bound(cfg: &EnsembleConfig, k: u32) -> Result<InequalityReport> {
    let root = k2k_constant(k)?;
    let kk = root.value;
    let p = 2.0 * k as f64;
    run_trials(
        "even_p_bound",
        cfg,
        params(&[
            ("ensemble", json!(["self_adjoint", "general"])),
            ("k", json!(k)),
            ("k2k", json!(kk)),
        ]),
        |s, tc| {
            let u = s.draw(EnsembleKind::SelfAdjoint);
            let f = s.draw(EnsembleKind::General);
            let (nu, nut) = (lp_norm(&u, p), lp_norm(&hilbert(&u), p));
            let (nf, nft) = (lp_norm(&f, p), lp_norm(&hilbert(&f), p));
            tc.bound(nut, kk * nu);
            tc.bound(nft, 2.0 * kk * nf);
            tc.stat("max_self_adjoint_ratio", nut / nu);
            tc.stat("max_general_ratio", nft / nf);
            tc.witness(vec![u, f]);
            Ok(())
        },
    )
}

/// `tau(u v~) = -tau(u~ v)` for self-adjoint `u, v`.
pub fn check_duality(cfg: &EnsembleConfig) -> Result<InequalityReport> {
    run_trials(
        "duality",
        cfg,
        params(&[("ensemble", json!("self_adjoint"))]),
        |s, tc| {
            let u = s.draw(EnsembleKind::SelfAdjoint);
            let v = s.draw(EnsembleKind::SelfAdjoint);
            let (ut, vt) = (hilbert(&u), hilbert(&v));
            let scale = lp_norm(&u, 2.0) * lp_norm(&v, 2.0);
            let res = (trace(&(&u * &vt)) + trace(&(&ut * &v))).norm();
            tc.residual(res, scale);
            tc.stat("max_residual", res);
            let same = trace(&(&(&u * &ut) + &(&ut * &u))).norm();
            tc.residual(same, scale);
            tc.stat("max_symmetric_residual", same);
            tc.witness(vec![u, v]);
            Ok(())
        },
    )
}

/// `s lambda_s(|u + iu~|) <= 4 ||u||_1` for positive `u`, over `s_grid` and
/// in the sup form `||u + iu~||_{1,inf} <= 4 ||u||_1`.
pub fn check_kolmogorov(cfg: &EnsembleConfig, s_grid: &[f64]) -> Result<InequalityReport> {
    if s_grid.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter("s grid must be positive and finite".into()));
    }
    run_trials(
        "kolmogorov",
        cfg,
        params(&[
            ("ensemble", json!("positive")),
            ("constant", json!(KOLMOGOROV_CONSTANT)),
            ("s_grid", json!(s_grid)),
        ]),
        |s, tc| {
            let u = s.draw(EnsembleKind::Positive);
            let f = analytic_completion(&u);
            let norm1 = lp_norm(&u, 1.0);
            let profile = mu(&f);
            for &sv in s_grid {
                let lhs = sv * profile.lambda(sv);
                tc.bound(lhs, KOLMOGOROV_CONSTANT * norm1);
                let r = if norm1 > 0.0 { lhs / norm1 } else { 0.0 };
                tc.sweep_point(r);
                tc.stat("max_ratio", r);
            }
            let weak = profile.weak_l1();
            tc.bound(weak, KOLMOGOROV_CONSTANT * norm1);
            tc.stat("max_weak_ratio", if norm1 > 0.0 { weak / norm1 } else { 0.0 });
            tc.witness(vec![u]);
            Ok(())
        },
    )
}

/// `tau(ab) >= tau(P ab P)` for positive `a, b` and a spectral projection `P` of `a`.
pub fn check_commuting_projection(cfg: &EnsembleConfig) -> Result<InequalityReport> {
    run_trials(
        "commuting_projection",
        cfg,
        params(&[("ensemble", json!("positive"))]),
        |s, tc| {
            let a = s.draw(EnsembleKind::Positive);
            let b = s.draw(EnsembleKind::Positive);
            let spec = SpectralDecomposition::new(&a)?;
            let cut = s.uniform(spec.min(), spec.max());
            let p = spec.projection(|x| x > cut);
            let ab = &a * &b;
            tc.bound(tau_re(&(&(&p * &ab) * &p)), tau_re(&ab));
            tc.witness(vec![a, b, p]);
            Ok(())
        },
    )
}

/// `tau(S Re f_eps) <= tau(S |f_eps|)` for `S` a non-negative polynomial in `|f_eps|`.
pub fn check_re_vs_abs(cfg: &EnsembleConfig, epsilon: f64) -> Result<InequalityReport> {
    run_trials(
        "re_vs_abs",
        cfg,
        params(&[("ensemble", json!("positive")), ("epsilon", json!(epsilon))]),
        |s, tc| {
            let u = s.draw(EnsembleKind::Positive);
            let reg = regularize(&u, epsilon)?;
            let modulus = abs_value(&reg.f_eps);
            let sop = random_nonnegative_polynomial(s, &modulus);
            tc.bound(tau_re(&(&sop * &reg.f_eps.real_part())), tau_re(&(&sop * &modulus)));
            tc.witness(vec![u, sop]);
            Ok(())
        },
    )
}

/// With `A = |f_eps + s|^2`, `B = (|f_eps| + s)^2` and `C` a non-negative
/// polynomial in `|f_eps|`: `tau(CA) <= tau(CB)` and `tau(C B^{-1}) <= tau(C A^{-1})`.
pub fn check_inverse_monotone(cfg: &EnsembleConfig, epsilon: f64) -> Result<InequalityReport> {
    run_trials(
        "inverse_monotone",
        cfg,
        params(&[
            ("ensemble", json!("positive")),
            ("epsilon", json!(epsilon)),
            ("s", json!("log-uniform on [0.1, 10]")),
        ]),
        |smp, tc| {
            let u = smp.draw(EnsembleKind::Positive);
            let s = 10f64.powf(smp.uniform(-1.0, 1.0));
            let reg = regularize(&u, epsilon)?;
            let modulus = abs_value(&reg.f_eps);
            let sq = &reg.f_eps.adjoint() * &reg.f_eps;
            let a = (&sq + &reg.f_eps.real_part().scale_real(2.0 * s)).shift(s * s);
            let b = (&sq + &modulus.scale_real(2.0 * s)).shift(s * s);
            let c = random_nonnegative_polynomial(smp, &modulus);
            tc.require(tau_re(&(&c * &a)), tau_re(&(&c * &b)));
            tc.bound(tau_re(&(&c * &inverse(&b)?)), tau_re(&(&c * &inverse(&a)?)));
            tc.witness(vec![u, c]);
            Ok(())
        },
    )
}

/// `||a~||_{1,inf} <= K ||a||_1` over general inputs, `K` capped at `ceiling`;
/// positive inputs also satisfy the sharp form with constant 4.
pub fn check_weak_type(cfg: &EnsembleConfig, ceiling: f64) -> Result<InequalityReport> {
    run_trials(
        "weak_type",
        cfg,
        params(&[
            ("ensemble", json!(["general", "positive"])),
            ("ceiling", json!(ceiling)),
        ]),
        |s, tc| {
            let a = s.draw(EnsembleKind::General);
            let (lhs, norm1) = (weak_l1_quasinorm(&hilbert(&a)), lp_norm(&a, 1.0));
            tc.bound(lhs, ceiling * norm1);
            tc.stat("empirical_k", if norm1 > 0.0 { lhs / norm1 } else { 0.0 });

            let u = s.draw(EnsembleKind::Positive);
            let (sharp, unorm) = (weak_l1_quasinorm(&analytic_completion(&u)), lp_norm(&u, 1.0));
            tc.require(sharp, KOLMOGOROV_CONSTANT * unorm);
            tc.stat("max_positive_ratio", if unorm > 0.0 { sharp / unorm } else { 0.0 });
            tc.witness(vec![a, u]);
            Ok(())
        },
    )
}

/// Bound on `||u + iu~||_p^p` for unit-trace positive `u`, from integrating
/// the weak-type tail `lambda_s <= 4/s`.
pub fn weak_lp_bound(p: f64) -> f64 {
    5.0 + 4.0 * p / (1.0 - p)
}

/// For positive `u` with `||u||_1 = 1`: `||u + iu~||_p^p <= 5 + 4p/(1-p)`.
pub fn check_weak_lp(cfg: &EnsembleConfig, p: f64) -> Result<InequalityReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadExponent(p));
    }
    let rhs = weak_lp_bound(p);
    run_trials(
        "weak_lp",
        cfg,
        params(&[("ensemble", json!("positive, unit trace")), ("p", json!(p)), ("bound", json!(rhs))]),
        |s, tc| {
            let raw = s.draw(EnsembleKind::Positive);
            let u = raw.scale_real(1.0 / lp_norm(&raw, 1.0));
            let f = analytic_completion(&u);
            let lhs = lp_norm(&f, p).powf(p);
            tc.bound(lhs, rhs);
            tc.stat("max_lp_power", lhs);
            // Reported only: the constant for the conjugate alone.
            tc.stat("max_conjugate_ratio", lp_norm(&hilbert(&u), p));
            tc.witness(vec![u]);
            Ok(())
        },
    )
}

/// `||a~||_1 <= K (tau(a log+ a) + 1)` with `K` capped at `ceiling`, plus the
/// per-band inequalities of the dyadic argument.
pub fn check_llogl(cfg: &EnsembleConfig, ceiling: f64) -> Result<InequalityReport> {
    run_trials(
        "llogl",
        cfg,
        params(&[
            ("ensemble", json!("positive, operator norm log-uniform on [0.5, 256]")),
            ("ceiling", json!(ceiling)),
        ]),
        |s, tc| {
            let raw = s.draw(EnsembleKind::Positive);
            let scale = 2f64.powf(s.uniform(-1.0, 8.0));
            let a = raw.scale_real(scale / op_norm(&raw));
            let conj_l1 = lp_norm(&hilbert(&a), 1.0);
            let ll = llogl_functional(&a)?;
            tc.bound(conj_l1, ceiling * (1.0 + ll));
            tc.stat("empirical_k", conj_l1 / (1.0 + ll));

            let dec = dyadic_decompose(&a)?;
            let recon = dec.reconstruct().map_or(a.max_abs(), |r| r.max_abs_diff(&a));
            tc.residual(recon, a.max_abs());
            tc.stat("max_reconstruction_residual", recon);
            let pmass = dec
                .projection_sum()
                .map_or(1.0, |p| p.max_abs_diff(&Operator::identity(a.algebra())));
            tc.residual(pmass, 1.0);
            for part in &dec.parts {
                let k = part.k as i32;
                let top = 2f64.powi(k);
                let eps_k = part.weight();
                let largest = part.eigenvalues.iter().copied().fold(0.0, f64::max);
                // a_k <= 2^k P_k, and the band's lower edge for k >= 1.
                tc.require(largest, top);
                tc.holds(part.eigenvalues.iter().all(|&x| x < top));
                if k >= 1 {
                    tc.holds(part.eigenvalues.iter().all(|&x| x >= top / 2.0));
                }
                let p = 1.0 + 1.0 / (part.k as f64 + 1.0);
                let conj_k = hilbert(&part.part);
                tc.require(lp_norm(&conj_k, 1.0), lp_norm(&conj_k, p));
                tc.require(lp_norm(&part.part, p), top * eps_k.powf(1.0 / p));
                if k >= 2 {
                    let tlogt = part.eigenvalues.iter().map(|&x| x * x.ln()).sum::<f64>()
                        / a.n() as f64;
                    tc.require((k - 1) as f64 * 2f64.powi(k - 1) * eps_k, tlogt / 2f64.ln());
                }
            }
            tc.witness(vec![a]);
            Ok(())
        },
    )
}

/// The regularization `f_eps` and the Moebius images `A_s(f_eps)` for every
/// `eps` in the grid.
pub fn check_regularization_suite(cfg: &EnsembleConfig, eps_grid: &[f64]) -> Result<InequalityReport> {
    if eps_grid.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParameter("epsilon grid must lie in (0, 1)".into()));
    }
    let s_values = [0.5, 1.0, 2.0];
    run_trials(
        "regularization_suite",
        cfg,
        params(&[
            ("ensemble", json!("positive")),
            ("epsilon_grid", json!(eps_grid)),
            ("moebius_s", json!(s_values)),
        ]),
        |s, tc| {
            let u = s.draw(EnsembleKind::Positive);
            let d = expectation(&u);
            let mut previous_gap = f64::INFINITY;
            for &eps in eps_grid {
                let reg = regularize(&u, eps)?;
                let f = &reg.f;
                let fe = &reg.f_eps;
                let scale = fe.max_abs();
                // Resolvent is a contraction.
                tc.require(op_norm(&reg.resolvent), 1.0);
                // f_eps stays block upper triangular.
                let leak = pattern_leak(fe, SubspaceTag::Hinf);
                tc.residual(leak, scale);
                tc.stat("max_pattern_leak", leak);
                // Phi(f_eps) = Phi(u)_eps.
                let d_eps = regularize(&d, eps)?.f_eps;
                let phi_res = expectation(fe).max_abs_diff(&d_eps);
                tc.residual(phi_res, scale);
                tc.stat("max_expectation_residual", phi_res);
                // Re f_eps >= eps.
                let re_min = min_real_part(fe)?;
                tc.require(eps, re_min);
                tc.stat("max_re_margin_deficit", eps - re_min);
                // A_s(f_eps) has non-negative real part, stays in the pattern,
                // and commutes with Phi.
                for &sv in &s_values {
                    let m = moebius(fe, sv)?;
                    let re = min_real_part(&m)?;
                    tc.require(-re, 0.0);
                    tc.stat("max_moebius_negativity", -re);
                    tc.residual(pattern_leak(&m, SubspaceTag::Hinf), m.max_abs());
                    let phi_m = expectation(&m).max_abs_diff(&moebius(&d_eps, sv)?);
                    tc.residual(phi_m, m.max_abs());
                    tc.stat("max_moebius_expectation_residual", phi_m);
                }
                // ||f_eps - f||_2 <= eps ||I + f^2||_2.
                let f2 = f * f;
                let gap = lp_norm(&(fe - f), 2.0);
                let plus = lp_norm(&f2.shift(1.0), 2.0);
                tc.bound(gap, eps * plus);
                tc.stat("max_gap_ratio", gap / (eps * plus));
                // The exact difference is eps (I - f^2)(I + eps f)^{-1}.
                let exact = (&f2.scale_real(-1.0).shift(1.0) * &reg.resolvent).scale_real(eps);
                let diff_res = (fe - f).max_abs_diff(&exact);
                tc.residual(diff_res, scale.max(f2.max_abs()));
                tc.stat("max_difference_identity_residual", diff_res);
                let minus = lp_norm(&f2.scale_real(-1.0).shift(1.0), 2.0);
                tc.require(gap, eps * minus);
                // Convergence along the grid.
                tc.holds(gap <= previous_gap);
                previous_gap = gap;
            }
            tc.witness(vec![u]);
            Ok(())
        },
    )
}
