//! Acceptance criteria. Each criterion prints one `PASS` or `FAIL` line at
//! its stated tolerance. Criteria 4, 5 and 6 state tolerances that the
//! truncated products cannot reach; their lines report `FAIL` honestly and
//! the assertions check the measured convergence behaviour instead.

use std::io::Write;
use std::time::Instant;

use ybe_core::cartan::{
    build_cartan_data, c_coeff, c_coeff_alt, c_coeff_inverse_residual, check_cartan_data, s1_explicit_aleph_one,
    valid_alephs,
};
use ybe_core::converge::{converge, ConvergeParams, ConvergeTarget};
use ybe_core::evalrep::sigma_intertwining_residual;
use ybe_core::gauge::hexagonal::hexagonal_check;
use ybe_core::qspecial::{c64, q_number, re, TruncationPolicy};
use ybe_core::report::{ParamValue, ResidualReport};
use ybe_core::rmat::{r6v, r8v};
use ybe_core::sampling::Sampler;
use ybe_core::suites::{run_suites, RunConfig, Suite};

const SEED: u64 = 20_240_601;

struct Verdict {
    id: usize,
    pass: bool,
    text: String,
}

fn verdict(id: usize, pass: bool, text: String) -> Verdict {
    Verdict { id, pass, text }
}

fn cfg(samples: usize) -> RunConfig {
    RunConfig { seed: SEED, samples: Some(samples), ..RunConfig::default() }
}

fn check_name(r: &ResidualReport) -> &str {
    match r.params.get("check") {
        Some(ParamValue::Text(s)) => s,
        _ => "",
    }
}

fn real_param(r: &ResidualReport, key: &str) -> f64 {
    match r.params.get(key) {
        Some(ParamValue::Real(x)) => *x,
        Some(ParamValue::Complex { re, .. }) => *re,
        Some(ParamValue::Int(n)) => *n as f64,
        other => panic!("parameter {key} missing or not numeric: {other:?}"),
    }
}

fn worst<'a>(reports: impl IntoIterator<Item = &'a ResidualReport>) -> (f64, usize) {
    reports.into_iter().fold((0.0_f64, 0), |(m, n), r| (m.max(r.residual), n + 1))
}

fn qybe_8v() -> Verdict {
    let start = Instant::now();
    let reports = run_suites(&[Suite::Qybe8v], &cfg(20)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (max, n) = worst(&reports);
    verdict(
        1,
        n == 20 && max < 1e-9 && secs < 5.0,
        format!("QYBE for R^8V: max residual {max:.2e} over {n} points (< 1e-9), {secs:.2} s (< 5 s)"),
    )
}

fn qdybe_irf() -> Verdict {
    let reports = run_suites(&[Suite::QdybeIrf], &cfg(20)).unwrap();
    let (qd, n) = worst(reports.iter().filter(|r| check_name(r) == "qdybe"));
    let (st, m) = worst(reports.iter().filter(|r| check_name(r) == "star-triangle"));
    verdict(
        2,
        n == 20 && m == 20 && qd < 1e-9 && st < 1e-9,
        format!("QDYBE for R^IRF: max residual {qd:.2e} over {n} points, star-triangle {st:.2e} over {m} (< 1e-9)"),
    )
}

fn vertex_irf() -> Verdict {
    let start = Instant::now();
    let reports = run_suites(&[Suite::VertexIrf], &cfg(10)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (max, n) = worst(reports.iter().filter(|r| check_name(r) == "vertex-irf"));
    verdict(
        3,
        n == 10 && max < 1e-7 && secs < 10.0,
        format!("vertex-IRF identity: max residual {max:.2e} over {n} points (< 1e-7), {secs:.2} s (< 10 s)"),
    )
}

/// Fitted twist rates at `p = 0.3` for several `w`, with the predicted rate
/// `max(w^2, p^2/w^2)`.
fn twist_rates() -> Vec<(f64, f64, f64, bool)> {
    let p: f64 = 0.3;
    let ns: Vec<usize> = (1..=6).collect();
    [0.8, 0.45, p.sqrt()]
        .into_iter()
        .map(|w| {
            let prm = ConvergeParams { z: re(0.5), p: re(p), w: re(w), q: re(0.4) };
            let s = converge(ConvergeTarget::Twist, &ns, &prm, &TruncationPolicy::default()).unwrap();
            (w, s.rate.unwrap(), (w * w).max(p * p / (w * w)), s.monotone)
        })
        .collect()
}

fn twist_equivalence(rates: &[(f64, f64, f64, bool)]) -> Verdict {
    let p2 = 0.09;
    let pass = rates.iter().all(|&(_, rate, _, mono)| mono && rate < 3.0 * p2 && rate > p2 / 3.0);
    let listed: Vec<String> = rates.iter().map(|(w, rate, _, _)| format!("w={w:.3}: {rate:.3}")).collect();
    verdict(
        4,
        pass,
        format!("twist product N=1..6 at p=0.3: fitted rates {} vs p^2 = 0.09 (within factor 3)", listed.join(", ")),
    )
}

/// `(residual, rate^n)` of the conjugated matrix at `n` factors over the
/// twist suite sample.
fn irf_from_twist_at(n: usize) -> Vec<(f64, f64)> {
    let run = RunConfig { order: Some(n), ..cfg(10) };
    run_suites(&[Suite::Twist], &run)
        .unwrap()
        .iter()
        .filter(|r| check_name(r) == "irf-from-twist")
        .map(|r| {
            let (p, w) = (real_param(r, "p"), real_param(r, "w"));
            (r.residual, (w * w).max(p * p / (w * w)).powi(n as i32))
        })
        .collect()
}

fn irf_from_twist_at_eight() -> (Verdict, Vec<(f64, f64)>) {
    let pts = irf_from_twist_at(8);
    let max = pts.iter().fold(0.0_f64, |m, &(r, _)| m.max(r));
    let v = verdict(
        5,
        max < 1e-8,
        format!("R^IRF from twist conjugation at N=8: max residual {max:.2e} over {} points (< 1e-8)", pts.len()),
    );
    (v, pts)
}

fn universal_product() -> (Verdict, f64, f64) {
    let (z, q) = (0.2, 0.6);
    let ns: Vec<usize> = (1..=12).collect();
    let prm = ConvergeParams { z: re(z), q: re(q), ..ConvergeParams::default() };
    let s = converge(ConvergeTarget::R6vUniversal, &ns, &prm, &TruncationPolicy::default()).unwrap();
    assert!(s.monotone);
    let at12 = s.rows.last().unwrap().residual;
    let v = verdict(
        6,
        at12 < 1e-10,
        format!("universal six-vertex product at N=12, |z1/z2|=0.2, q=0.6: residual {at12:.2e} (< 1e-10)"),
    );
    (v, s.rate.unwrap(), z / (q * q))
}

fn trigonometric_limit() -> Verdict {
    let pol = TruncationPolicy::default();
    let (z1, z2, q) = (c64(0.5, 0.1), re(0.9), re(0.4));
    let ps = [1e-2, 1e-3, 1e-4];
    let d: Vec<f64> =
        ps.iter().map(|&p| (&r8v(z1, z2, re(p), q, &pol).unwrap() - &r6v(z1, z2, q, &pol).unwrap()).norm()).collect();
    let slopes: Vec<f64> = (0..2).map(|i| (d[i] / d[i + 1]).log10() / (ps[i] / ps[i + 1]).log10()).collect();
    verdict(
        7,
        slopes.iter().all(|s| (s - 1.0).abs() <= 0.1),
        format!("p -> 0 limit of R^8V: log-log slopes {:.4}, {:.4} (1 +- 0.1)", slopes[0], slopes[1]),
    )
}

fn hexagonal() -> Verdict {
    let pol = TruncationPolicy::default();
    let mut s = Sampler::new(SEED, Default::default());
    let mut max = 0.0_f64;
    let mut count = 0;
    for r in 1..=3 {
        let pts = s
            .accepted(5, |s| (s.q(), s.z()), |&(q, z)| hexagonal_check(r, z, q, &pol).map(|_| vec![re(1.0)]))
            .unwrap();
        for (q, z) in pts {
            max = max.max(hexagonal_check(r, z, q, &pol).unwrap().max());
            count += 1;
        }
    }
    verdict(
        8,
        count == 15 && max < 1e-9,
        format!("hexagonal closed forms and Ad_omega for r=1..3: max residual {max:.2e} over {count} points (< 1e-9)"),
    )
}

fn cartan_identities() -> Verdict {
    let mut cases = 0;
    let mut ok = true;
    for r in 1..=6 {
        for aleph in valid_alephs(r) {
            let c = build_cartan_data(r, aleph).unwrap();
            ok &= check_cartan_data(&c).required_hold();
            if aleph == 1 {
                ok &= c.s1 == s1_explicit_aleph_one(r);
            }
            cases += 1;
        }
    }
    verdict(9, ok, format!("Cartan identities in exact rational arithmetic: {cases} (r, aleph) cases, r <= 6"))
}

fn c_coefficients() -> Verdict {
    let mut worst = 0.0_f64;
    let mut r1 = 0.0_f64;
    for q in [re(0.3), re(0.55), c64(0.4, 0.2)] {
        for r in 1..=6 {
            for n in 1..=5 {
                worst = worst.max(c_coeff_inverse_residual(n, r, q));
                for i in 1..=r {
                    for j in 1..=r {
                        let a = c_coeff(i, j, n, r, q);
                        worst = worst.max((a - c_coeff_alt(i, j, n, r, q)).norm() / a.norm().max(1.0));
                    }
                }
            }
        }
        for n in 1..=5 {
            let expected = re(n as f64) / q_number(2 * n as i64, q);
            r1 = r1.max((c_coeff(1, 1, n, 1, q) - expected).norm());
        }
    }
    verdict(
        10,
        worst < 1e-12 && r1 < 1e-12,
        format!("c_ij^(n) closed forms and inverse property: {worst:.2e}, r=1 against n/[2n]_q: {r1:.2e} (< 1e-12)"),
    )
}

fn hypergeometric() -> Verdict {
    let reports = run_suites(&[Suite::Qspecial], &cfg(50)).unwrap();
    let parts: Vec<(&str, f64, usize)> = ["q-difference", "connection", "phi01-phi21"]
        .into_iter()
        .map(|name| {
            let (m, n) = worst(reports.iter().filter(|r| check_name(r) == name));
            (name, m, n)
        })
        .collect();
    let pass = parts.iter().all(|&(_, m, n)| n == 50 && m < 1e-9);
    let listed: Vec<String> = parts.iter().map(|(name, m, n)| format!("{name} {m:.2e} ({n})")).collect();
    verdict(11, pass, format!("hypergeometric layer: {} (< 1e-9)", listed.join(", ")))
}

fn gauge_assembly() -> Verdict {
    let reports = run_suites(&[Suite::VertexIrf], &cfg(10)).unwrap();
    let (sm, _) = worst(reports.iter().filter(|r| check_name(r) == "s-times-m"));
    let eqs = ["eq-m-plus", "eq-m-minus", "eq-a-plus", "eq-a-bis", "eq-a-minus"];
    let (de, n) = worst(reports.iter().filter(|r| eqs.contains(&check_name(r))));
    verdict(
        12,
        sm < 1e-7 && n == 50 && de < 1e-9,
        format!("gauge assembly: S M = I residual {sm:.2e} (< 1e-7), difference equations {de:.2e} over {n} (< 1e-9)"),
    )
}

fn sigma_intertwining() -> Verdict {
    let mut max = 0.0_f64;
    for r in 1..=4 {
        for (z, q) in [(c64(0.7, 0.3), re(0.4)), (re(1.3), c64(0.5, -0.1)), (c64(-0.4, 0.9), re(0.25))] {
            max = max.max(sigma_intertwining_residual(r, z, q).unwrap());
        }
    }
    verdict(13, max < 1e-12, format!("sigma intertwining on generators, r <= 4: max residual {max:.2e} (< 1e-12)"))
}

fn full_run() -> Verdict {
    let run = RunConfig { seed: SEED, ..RunConfig::default() };
    let start = Instant::now();
    let first = run_suites(&Suite::ALL, &run).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let second = run_suites(&Suite::ALL, &run).unwrap();
    let same = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    let failed = first.iter().filter(|r| !r.pass).count();
    verdict(
        14,
        secs < 120.0 && same && failed == 0,
        format!(
            "check --suite all: {} reports, {failed} failed, {secs:.2} s (< 120 s), identical rerun: {same}",
            first.len()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let rates = twist_rates();
    let (c5, n8) = irf_from_twist_at_eight();
    let (c6, rate6, predicted6) = universal_product();
    let verdicts = vec![
        qybe_8v(),
        qdybe_irf(),
        vertex_irf(),
        twist_equivalence(&rates),
        c5,
        c6,
        trigonometric_limit(),
        hexagonal(),
        cartan_identities(),
        c_coefficients(),
        hypergeometric(),
        gauge_assembly(),
        sigma_intertwining(),
        full_run(),
    ];
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for v in &verdicts {
        writeln!(out, "criterion {:>2} {} {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.text).unwrap();
    }
    drop(out);

    for v in &verdicts {
        if ![4, 5, 6].contains(&v.id) {
            assert!(v.pass, "criterion {} failed: {}", v.id, v.text);
        }
    }

    // The twist product converges geometrically at max(w^2, p^2/w^2), which
    // is at least p; at p = 0.3 that exceeds 3 p^2.
    for &(w, rate, predicted, mono) in &rates {
        assert!(mono, "w={w}");
        assert!((rate / predicted - 1.0).abs() < 0.05, "w={w}: fitted {rate}, predicted {predicted}");
        assert!(rate >= 0.3 * 0.95);
    }

    // At N = 8 the conjugated matrix is off by rate^8 up to a prefactor,
    // and doubling N contracts the error by about another rate^8.
    assert_eq!(n8.len(), 10);
    let n16 = irf_from_twist_at(16);
    for (&(r8, b8), &(r16, b16)) in n8.iter().zip(&n16) {
        assert!(r8 < 100.0 * b8 && r8 > 0.01 * b8, "{r8} vs {b8}");
        let contraction = b16 / b8;
        assert!(r16 < 100.0 * contraction * r8 && r16 > 0.01 * contraction * r8, "{r16} after {r8}");
    }
    let suite = run_suites(&[Suite::Twist], &cfg(10)).unwrap();
    assert!(suite.iter().all(|r| r.pass), "twist suite at its own order");

    // The universal product contracts at |z|/q^2 per factor.
    assert!(rate6 < predicted6 * 1.05 && rate6 > predicted6 * 0.8, "fitted {rate6}, predicted {predicted6}");
}
