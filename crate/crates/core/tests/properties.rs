//! Property-based invariants of the tensor layer, special functions,
//! R-matrices, sampler and reports.

use std::collections::BTreeMap;

use proptest::prelude::*;
use ybe_core::qspecial::{c64, q_number, qpoch_finite, re, theta, TruncationPolicy, C64};
use ybe_core::report::{ResidualReport, TruncationInfo};
use ybe_core::rmat::{qdybe_residual, qybe_residual, r6v, r8v, r_irf};
use ybe_core::sampling::{ParamBox, Sampler};
use ybe_core::tensor::{embed, kron, rel_residual, CMatrix};

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| c64(a, b))
}

fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex(2.0), n * n).prop_map(move |d| CMatrix::from_vec(n, n, d))
}

/// Point on the annulus `lo < |z| < hi`.
fn annulus(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, -3.1..3.1_f64).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(rel_residual(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn embed_on_adjacent_legs_is_kron(op in matrix(4)) {
        let id = CMatrix::identity(2);
        prop_assert!(rel_residual(&embed(&op, (1, 2), 3, 2).unwrap(), &kron(&op, &id)) < 1e-15);
        prop_assert!(rel_residual(&embed(&op, (2, 3), 3, 2).unwrap(), &kron(&id, &op)) < 1e-15);
        let swap = CMatrix::swap(2);
        let flipped = swap.matmul(&op).matmul(&swap);
        prop_assert!(rel_residual(&embed(&op, (2, 1), 2, 2).unwrap(), &flipped) < 1e-15);
    }

    #[test]
    fn rel_residual_is_symmetric_and_vanishes_on_equal(a in matrix(3), b in matrix(3)) {
        prop_assert_eq!(rel_residual(&a, &a), 0.0);
        prop_assert_eq!(rel_residual(&a, &b), rel_residual(&b, &a));
        prop_assert!(rel_residual(&a, &b) >= 0.0);
    }

    #[test]
    fn pass_iff_within_tolerance(residual in 0.0..1.0_f64, tolerance in 0.0..1.0_f64) {
        let info = TruncationInfo::from_policy(&TruncationPolicy::default(), None);
        let r = ResidualReport::new("qspecial", BTreeMap::new(), residual, tolerance, info);
        prop_assert_eq!(r.pass, residual <= tolerance);
    }

    #[test]
    fn sampler_is_reproducible(seed in any::<u64>()) {
        let draw = |seed| {
            let mut s = Sampler::new(seed, ParamBox::default());
            (0..8).map(|_| (s.q(), s.p(), s.w(), s.z())).collect::<Vec<_>>()
        };
        let first = draw(seed);
        prop_assert_eq!(&first, &draw(seed));
        let b = ParamBox::default();
        for (q, p, w, z) in first {
            prop_assert!(q.re >= b.q.0 && q.re <= b.q.1);
            prop_assert!(p.re >= b.p.0 && p.re <= b.p.1);
            prop_assert!(w.re >= b.w.0 && w.re <= b.w.1);
            prop_assert!(z.norm() >= b.z_abs.0 * 0.999 && z.norm() <= b.z_abs.1 * 1.001);
        }
    }

    #[test]
    fn theta_quasi_periodicity(z in annulus(0.3, 2.0), q in 0.05..0.7_f64) {
        let pol = TruncationPolicy::default();
        let q = re(q);
        let t = theta(z, q, &pol).unwrap();
        let shifted = theta(q * z, q, &pol).unwrap();
        let scale = t.norm().max(1.0);
        prop_assert!((shifted + t / z).norm() < 1e-12 * scale);
        prop_assert!((theta(q / z, q, &pol).unwrap() - t).norm() < 1e-12 * scale);
    }

    #[test]
    fn finite_pochhammer_recursion(a in complex(1.5), q in complex(0.9), k in 0usize..12) {
        let lhs = qpoch_finite(a, q, k + 1);
        let rhs = qpoch_finite(a, q, k) * (re(1.0) - a * q.powu(k as u32));
        prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn q_number_symmetry(n in -8i64..8, q in annulus(0.3, 0.95)) {
        prop_assert!((q_number(n, q) - q_number(n, q.inv())).norm() < 1e-10 * q_number(n, q).norm().max(1.0));
        prop_assert!((q_number(-n, q) + q_number(n, q)).norm() < 1e-10 * q_number(n, q).norm().max(1.0));
    }

    #[test]
    fn six_vertex_qybe(z1 in annulus(0.3, 2.0), z2 in annulus(0.3, 2.0), z3 in annulus(0.3, 2.0), q in 0.1..0.6_f64) {
        let pol = TruncationPolicy::default();
        let q = re(q);
        let res = qybe_residual(|a, b| r6v(a, b, q, &pol), z1, z2, z3);
        prop_assume!(res.is_ok());
        prop_assert!(res.unwrap() < 1e-9);
    }

    #[test]
    fn eight_vertex_qybe(
        z1 in annulus(0.5, 1.5), z2 in annulus(0.5, 1.5), z3 in annulus(0.5, 1.5),
        p in 0.1..0.5_f64, q in 0.2..0.6_f64,
    ) {
        let pol = TruncationPolicy::default();
        let res = qybe_residual(|a, b| r8v(a, b, re(p), re(q), &pol), z1, z2, z3);
        prop_assume!(res.is_ok());
        prop_assert!(res.unwrap() < 1e-9);
    }

    #[test]
    fn irf_qdybe(
        z1 in annulus(0.5, 1.5), z2 in annulus(0.5, 1.5), z3 in annulus(0.5, 1.5),
        p in 0.1..0.5_f64, w in 0.6..1.4_f64, q in 0.2..0.6_f64,
    ) {
        let pol = TruncationPolicy::default();
        let (p, q) = (re(p), re(q));
        let res = qdybe_residual(|z, wv| r_irf(z, p, wv, q, &pol), z1, z2, z3, re(w), q);
        prop_assume!(res.is_ok());
        let res = res.unwrap();
        prop_assume!(res.is_finite());
        prop_assert!(res < 1e-9, "residual {res}");
    }
}
