//! Hardy decomposition, conjugation and the Riesz projection.
//!
//! Every `a` splits uniquely as `a = a1 + a2* + d` with `a1, a2` in `H^inf_0`
//! and `d` in `D`. The conjugate is `ã = i a2* - i a1`, so `a + iã = 2 a1 + d`
//! lies in `H^inf`. In the block model this is an entrywise multiplier: `-i` on
//! the strictly upper blocks, `+i` on the strictly lower blocks, `0` on the
//! diagonal blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{
    expectation, inverse, project, Operator, SpectralDecomposition, SubspaceTag, HERMITIAN_TOL, I,
};
use crate::error::{Error, Result};
use crate::spectral::op_norm;

#[derive(Debug, Clone)]
pub struct HardyDecomposition {
    pub a1: Operator,
    pub a2: Operator,
    pub d: Operator,
    pub source: Operator,
}

impl HardyDecomposition {
    pub fn reconstruct(&self) -> Operator {
        &(&self.a1 + &self.a2.adjoint()) + &self.d
    }

    /// The conjugate computed from the decomposition, `i a2* - i a1`.
    pub fn conjugate(&self) -> Operator {
        (&self.a2.adjoint() - &self.a1).scale(I)
    }

    /// `a + iã = 2 a1 + d`.
    pub fn analytic_part(&self) -> Operator {
        &self.a1.scale_real(2.0) + &self.d
    }
}

pub fn decompose(a: &Operator) -> HardyDecomposition {
    HardyDecomposition {
        a1: project(a, SubspaceTag::Hinf0),
        a2: project(a, SubspaceTag::Hinf0Star).adjoint(),
        d: expectation(a),
        source: a.clone(),
    }
}

/// Multiplication by `±i` as an exact component swap.
fn times_i(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

fn times_minus_i(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

/// The conjugation operator `a -> ã`.
pub fn hilbert(a: &Operator) -> Operator {
    let alg = a.algebra();
    let n = a.n();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (bi, bj) = (alg.block_of(i), alg.block_of(j));
        let z = a.matrix()[(i, j)];
        match bi.cmp(&bj) {
            std::cmp::Ordering::Less => times_minus_i(z),
            std::cmp::Ordering::Greater => times_i(z),
            std::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
        }
    });
    Operator::wrap(alg.clone(), m)
}

/// `R(a) = (a + iã + Phi(a)) / 2`, the projection onto `H^inf`.
pub fn riesz(a: &Operator) -> Operator {
    let conj_i = Operator::wrap(a.algebra().clone(), hilbert(a).matrix().map(times_i));
    (&(a + &conj_i) + &expectation(a)).scale_real(0.5)
}

/// `f = u + iũ`.
pub fn analytic_completion(u: &Operator) -> Operator {
    let conj = hilbert(u);
    u + &Operator::wrap(u.algebra().clone(), conj.matrix().map(times_i))
}

pub(crate) fn require_positive(u: &Operator) -> Result<()> {
    let spec = SpectralDecomposition::new(u)?;
    let scale = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if spec.min() < -HERMITIAN_TOL * (1.0 + scale) {
        return Err(Error::NotPositive {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(())
}

/// The regularization `f_eps = (eps I + f)(I + eps f)^{-1}` of `f = u + iũ`.
#[derive(Debug, Clone)]
pub struct Regularization {
    pub epsilon: f64,
    pub f: Operator,
    /// `(I + eps f)^{-1}`.
    pub resolvent: Operator,
    pub f_eps: Operator,
}

pub fn regularize(u: &Operator, epsilon: f64) -> Result<Regularization> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    require_positive(u)?;
    let f = analytic_completion(u);
    let resolvent = inverse(&f.scale_real(epsilon).shift(1.0))?;
    let f_eps = &f.shift(epsilon) * &resolvent;
    Ok(Regularization {
        epsilon,
        f,
        resolvent,
        f_eps,
    })
}

/// `A_s(z) = 1 + (z - s)/(z + s)` applied to an operator.
pub fn moebius(f_eps: &Operator, s: f64) -> Result<Operator> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let denom = inverse(&f_eps.shift(s))?;
    Ok((&f_eps.shift(-s) * &denom).shift(1.0))
}

/// `psi_s(t) = 2t^2 / (t + s)^2`, increasing on `[s, inf)` with `psi_s(s) = 1/2`.
pub fn psi(s: f64, t: f64) -> f64 {
    2.0 * t * t / (t * t + 2.0 * s * t + s * s)
}

#[derive(Debug, Clone)]
pub struct ExpSeries {
    pub value: Operator,
    /// Highest power included.
    pub terms: usize,
    /// Upper bound on `sum_{k > terms} x^k / k!` with `x = t eps ||f||`.
    pub tail_bound: f64,
}

/// `sum_{k=0}^{K} (t eps)^k f^k / k!` truncated once the scalar tail bound
/// drops below `tol`.
pub fn exp_series(f: &Operator, t: f64, epsilon: f64, tol: f64) -> Result<ExpSeries> {
    if !(t > 0.0) || !(epsilon > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(
            "t, epsilon and tol must be positive".into(),
        ));
    }
    let x = t * epsilon * op_norm(f);
    let mut value = Operator::identity(f.algebra());
    let mut power = Operator::identity(f.algebra());
    let mut coeff = 1.0;
    let mut k = 0usize;
    loop {
        // Remainder after degree k is at most x^{k+1}/(k+1)! / (1 - x/(k+2)).
        let next = coeff * x / (k + 1) as f64;
        let ratio = x / (k + 2) as f64;
        let tail = if ratio < 1.0 { next / (1.0 - ratio) } else { f64::INFINITY };
        if tail <= tol {
            return Ok(ExpSeries {
                value,
                terms: k,
                tail_bound: tail,
            });
        }
        k += 1;
        coeff = next;
        power = &power * f;
        value = &value + &power.scale_real((t * epsilon).powi(k as i32) / factorial(k));
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{membership, trace, TracedAlgebra};
    use crate::ensemble::{EnsembleConfig, EnsembleKind};
    use crate::spectral::lp_norm;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn flag2() -> Arc<TracedAlgebra> {
        Arc::new(TracedAlgebra::flag(2).unwrap())
    }

    fn m1234() -> Operator {
        Operator::from_real_rows(&flag2(), &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap()
    }

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn decompose_example() {
        let dec = decompose(&m1234());
        let alg = flag2();
        assert_eq!(dec.a1, Operator::from_real_rows(&alg, &[&[0.0, 2.0], &[0.0, 0.0]]).unwrap());
        assert_eq!(
            dec.a2.adjoint(),
            Operator::from_real_rows(&alg, &[&[0.0, 0.0], &[3.0, 0.0]]).unwrap()
        );
        assert_eq!(dec.d, Operator::diagonal(&alg, &[1.0, 4.0]).unwrap());
        assert_eq!(dec.reconstruct(), m1234());
        assert!(membership(&dec.a1, SubspaceTag::Hinf0, 0.0));
        assert!(membership(&dec.a2, SubspaceTag::Hinf0, 0.0));
    }

    #[test]
    fn decompose_diagonal_input() {
        let d = Operator::diagonal(&flag2(), &[5.0, -1.0]).unwrap();
        let dec = decompose(&d);
        assert_eq!(dec.a1, Operator::zeros(&flag2()));
        assert_eq!(dec.a2, Operator::zeros(&flag2()));
        assert_eq!(dec.d, d);
    }

    #[test]
    fn hilbert_example() {
        let expected = Operator::from_fn(&flag2(), |i, j| match (i, j) {
            (0, 1) => cz(0.0, -2.0),
            (1, 0) => cz(0.0, 3.0),
            _ => cz(0.0, 0.0),
        })
        .unwrap();
        assert_eq!(hilbert(&m1234()), expected);
        assert_eq!(decompose(&m1234()).conjugate(), expected);
        let d = Operator::diagonal(&flag2(), &[5.0, -1.0]).unwrap();
        assert_eq!(hilbert(&d), Operator::zeros(&flag2()));
    }

    #[test]
    fn riesz_example() {
        let expected = Operator::from_real_rows(&flag2(), &[&[1.0, 2.0], &[0.0, 4.0]]).unwrap();
        assert_eq!(riesz(&m1234()), expected);
        assert_eq!(riesz(&expected), expected);
    }

    #[test]
    fn analytic_part_lies_in_hinf() {
        let cfg = EnsembleConfig::new(vec![2, 1, 3], 1, 5).unwrap();
        let a = crate::ensemble::random_operator(&cfg, EnsembleKind::General, 0).unwrap();
        let f = analytic_completion(&a);
        assert!(membership(&f, SubspaceTag::Hinf, 1e-15));
        assert!(f.max_abs_diff(&decompose(&a).analytic_part()) < 1e-15);
    }

    #[test]
    fn selfadjoint_conjugate_is_selfadjoint() {
        let cfg = EnsembleConfig::new(vec![1; 8], 1, 11).unwrap();
        for t in 0..10 {
            let u = crate::ensemble::random_operator(&cfg, EnsembleKind::SelfAdjoint, t).unwrap();
            assert!(hilbert(&u).asymmetry() <= 1e-12);
        }
    }

    #[test]
    fn regularize_fixed_points() {
        let id = Operator::identity(&flag2());
        let r = regularize(&id, 0.3).unwrap();
        assert!(r.f_eps.max_abs_diff(&id) < 1e-15);

        let zero = Operator::zeros(&flag2());
        let r = regularize(&zero, 0.3).unwrap();
        assert!(r.f_eps.max_abs_diff(&id.scale_real(0.3)) < 1e-15);
    }

    #[test]
    fn regularize_rejects_bad_input() {
        let neg = Operator::diagonal(&flag2(), &[1.0, -1.0]).unwrap();
        assert!(matches!(regularize(&neg, 0.1), Err(Error::NotPositive { .. })));
        let id = Operator::identity(&flag2());
        assert!(regularize(&id, 0.0).is_err());
        assert!(regularize(&id, 1.0).is_err());
    }

    #[test]
    fn regularize_converges() {
        let cfg = EnsembleConfig::new(vec![1; 8], 1, 3).unwrap();
        let u = crate::ensemble::random_operator(&cfg, EnsembleKind::Positive, 0).unwrap();
        let r = regularize(&u, 0.01).unwrap();
        let f2 = (&r.f * &r.f).shift(1.0);
        assert!(lp_norm(&(&r.f_eps - &r.f), 2.0) <= 0.01 * lp_norm(&f2, 2.0));
    }

    #[test]
    fn moebius_examples() {
        let alg = flag2();
        let s_id = Operator::identity(&alg).scale_real(0.7);
        assert!(moebius(&s_id, 0.7).unwrap().max_abs_diff(&Operator::identity(&alg)) < 1e-15);
        let id = Operator::identity(&alg);
        assert!(moebius(&id, 1.0).unwrap().max_abs_diff(&id) < 1e-15);
        assert!(moebius(&id, 0.0).is_err());
        let minus = id.scale_real(-1.0);
        assert!(matches!(moebius(&minus, 1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn moebius_has_positive_real_part() {
        let cfg = EnsembleConfig::new(vec![1; 8], 1, 9).unwrap();
        let u = crate::ensemble::random_operator(&cfg, EnsembleKind::Positive, 0).unwrap();
        let r = regularize(&u, 0.1).unwrap();
        let a = moebius(&r.f_eps, 0.5).unwrap();
        assert!(SpectralDecomposition::new(&a.real_part()).unwrap().min() >= -1e-10);
        assert!(membership(&a, SubspaceTag::Hinf, 1e-9));
    }

    #[test]
    fn psi_properties() {
        assert_eq!(psi(1.0, 1.0), 0.5);
        for s in [0.1, 1.0, 7.0] {
            let mut prev = psi(s, s);
            for k in 1..200 {
                let t = s * (1.0 + k as f64 * 0.1);
                let v = psi(s, t);
                assert!(v >= prev && v >= 0.5);
                prev = v;
            }
        }
    }

    #[test]
    fn exp_series_examples() {
        let alg = flag2();
        let zero = Operator::zeros(&alg);
        let e = exp_series(&zero, 1.0, 0.5, 1e-14).unwrap();
        assert_eq!(e.value, Operator::identity(&alg));
        assert_eq!(e.terms, 0);

        let id = Operator::identity(&alg);
        let e = exp_series(&id, 2.0, 0.5, 1e-13).unwrap();
        assert_abs_diff_eq!(trace(&e.value).re, std::f64::consts::E, epsilon = 1e-12);
        assert!(e.tail_bound <= 1e-13);
    }

    #[test]
    fn exp_series_stays_in_hinf() {
        let cfg = EnsembleConfig::new(vec![2, 2, 2], 1, 1).unwrap();
        let f = crate::ensemble::random_operator(&cfg, EnsembleKind::BlockUpper, 0).unwrap();
        let e = exp_series(&f.scale_real(3.0), 1.5, 0.9, 1e-12).unwrap();
        assert!(membership(&e.value, SubspaceTag::Hinf, 1e-9));
    }
}
