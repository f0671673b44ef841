use std::sync::Arc;

use nch_core::algebra::{expectation, membership, project, trace, Operator, SubspaceTag, I};
use nch_core::ensemble::TrialSampler;
use nch_core::hardy::{hilbert, riesz};
use nch_core::norm::classical::classical_conjugate;
use nch_core::norm::k2k_constant;
use nch_core::norm::roots::evaluate;
use nch_core::spectral::{lp_norm, mu, weak_l1_quasinorm};
use nch_core::{EnsembleKind, TracedAlgebra};
use num_complex::Complex64;
use proptest::prelude::*;

fn sampler(partition: Vec<usize>, seed: u64) -> TrialSampler {
    TrialSampler::new(Arc::new(TracedAlgebra::new(partition).unwrap()), seed, 0)
}

fn partitions() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..4, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singular_values_are_unitarily_invariant(part in partitions(), seed in any::<u64>(), p in 0.5f64..6.0) {
        let mut s = sampler(part, seed);
        let a = s.draw(EnsembleKind::General);
        let (u, v) = (s.unitary(), s.unitary());
        let b = &(&u * &a) * &v;
        prop_assert!((lp_norm(&a, p) - lp_norm(&b, p)).abs() <= 1e-10 * (1.0 + lp_norm(&a, p)));
    }

    #[test]
    fn hoelder_two_factors(part in partitions(), seed in any::<u64>(), p in 1.05f64..20.0) {
        let mut s = sampler(part, seed);
        let (a, b) = (s.draw(EnsembleKind::General), s.draw(EnsembleKind::General));
        let q = p / (p - 1.0);
        prop_assert!(trace(&(&a * &b)).norm() <= lp_norm(&a, p) * lp_norm(&b, q) * (1.0 + 1e-10));
    }

    #[test]
    fn weak_quasi_triangle(part in partitions(), seed in any::<u64>()) {
        let mut s = sampler(part, seed);
        let (a, b) = (s.draw(EnsembleKind::General), s.draw(EnsembleKind::General));
        let lhs = weak_l1_quasinorm(&(&a + &b));
        prop_assert!(lhs <= 2.0 * (weak_l1_quasinorm(&a) + weak_l1_quasinorm(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn distribution_inverts_rearrangement(part in partitions(), seed in any::<u64>(), t in 0.0f64..1.0) {
        let mut s = sampler(part, seed);
        let profile = mu(&s.draw(EnsembleKind::General));
        let m = profile.mu_at(t);
        // lambda at mu_t is at most t; slightly below mu_t it exceeds t.
        prop_assert!(profile.lambda(m) <= t + 1e-15);
        if m > 0.0 {
            prop_assert!(profile.lambda(m * (1.0 - 1e-9)) > t);
        }
    }

    #[test]
    fn l2_contraction(part in partitions(), seed in any::<u64>()) {
        let a = sampler(part, seed).draw(EnsembleKind::General);
        prop_assert!(lp_norm(&hilbert(&a), 2.0) <= lp_norm(&a, 2.0) + 1e-12);
    }

    #[test]
    fn conjugation_is_skew_for_the_trace(part in partitions(), seed in any::<u64>()) {
        let mut s = sampler(part, seed);
        let (u, v) = (s.draw(EnsembleKind::SelfAdjoint), s.draw(EnsembleKind::SelfAdjoint));
        let r = trace(&(&u * &hilbert(&v))) + trace(&(&hilbert(&u) * &v));
        prop_assert!(r.norm() <= 1e-13);
    }

    #[test]
    fn expectation_is_multiplicative_on_block_upper(part in partitions(), seed in any::<u64>()) {
        let mut s = sampler(part, seed);
        let (a, b) = (s.draw(EnsembleKind::BlockUpper), s.draw(EnsembleKind::BlockUpper));
        let lhs = expectation(&(&a * &b));
        let rhs = &expectation(&a) * &expectation(&b);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-14);
        prop_assert!(membership(&(&a * &b), SubspaceTag::Hinf, 0.0));
    }

    #[test]
    fn double_conjugate_and_linearity(part in partitions(), seed in any::<u64>()) {
        let a = sampler(part, seed).draw(EnsembleKind::General);
        let twice = hilbert(&hilbert(&a));
        prop_assert_eq!(twice, &(-&a) + &expectation(&a));
        prop_assert_eq!(hilbert(&a.scale(I)), hilbert(&a).scale(I));
        prop_assert_eq!(hilbert(&expectation(&a)), Operator::zeros(a.algebra()));
    }

    #[test]
    fn riesz_is_block_upper_truncation(part in partitions(), seed in any::<u64>()) {
        let a = sampler(part, seed).draw(EnsembleKind::General);
        let r = riesz(&a);
        prop_assert_eq!(&r, &project(&a, SubspaceTag::Hinf));
        prop_assert_eq!(riesz(&r), r);
    }

    #[test]
    fn analytic_completion_lies_in_hinf(part in partitions(), seed in any::<u64>()) {
        let u = sampler(part, seed).draw(EnsembleKind::SelfAdjoint);
        let f = &u + &hilbert(&u).scale(I);
        prop_assert!(membership(&f, SubspaceTag::Hinf, 1e-15));
    }

    #[test]
    fn classical_conjugate_squares_to_minus_one(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20)) {
        let n = coeffs.len();
        let mut c: Vec<Complex64> = coeffs.iter().chain(coeffs.iter()).map(|&(re, im)| Complex64::new(re, im)).collect();
        c.insert(n, Complex64::new(0.0, 0.0));
        let twice = classical_conjugate(&classical_conjugate(&c).unwrap()).unwrap();
        for (x, y) in twice.iter().zip(&c) {
            prop_assert_eq!(*x, -*y);
        }
    }
}

#[test]
fn root_certificates() {
    for k in 1..=8 {
        let r = k2k_constant(k).unwrap();
        assert!(r.residual <= 1e-10);
        assert!(evaluate(k, r.value * 1.01) > 0.0);
        assert!(evaluate(k, 1.0) < 0.0);
        assert!(r.positive_above);
        assert_eq!(r.sign_changes, 1);
    }
}
