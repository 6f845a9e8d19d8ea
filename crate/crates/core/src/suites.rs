//! Identity suites: each suite samples parameter points from a seeded
//! generator, evaluates one or more residual checks per point in parallel,
//! and returns the reports in a fixed order that does not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{build_cartan_data, c_coeff, c_coeff_alt, c_coeff_inverse_residual, check_cartan_data, s1_explicit_aleph_one, valid_alephs};
use crate::error::{Error, Result};
use crate::evalrep::{log_transform_residual, relation_residual, sigma_intertwining_residual};
use crate::gauge::hexagonal::{hexagonal_check, star_exchange_residual};
use crate::gauge::{
    assembly_residual, beta_relation_residual, eq_a_bis_residual, eq_a_minus_residual, eq_a_plus_residual,
    eq_m_minus_residual, eq_m_plus_residual, phi01_phi21_residual, phi_vector_residual, s_route_residual,
    vertex_irf_residual, MMinusRoute,
};
use crate::qspecial::{
    c64, connection_formula_residual, phi21_q_difference_residual, qpoch, re, scalar_f6v, scalar_f6v_expsum,
    scalar_fq_hexagon, scalar_fq_hexagon_expsum, theta, TruncationPolicy, C64,
};
use crate::report::{ParamValue, ResidualReport, TruncationInfo};
use crate::rmat::{f_twist_closed, f_twist_product, qdybe_residual, qybe_residual, r6v, r8v, r_irf, r_irf_from_twist, star_triangle_residual};
use crate::sampling::{ParamBox, Sampler};
use crate::tensor::rel_residual;

/// Named identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Suite {
    Qspecial,
    Cartan,
    Evalrep,
    Qybe6v,
    Qybe8v,
    QdybeIrf,
    Twist,
    VertexIrf,
    Hexagonal,
}

impl Suite {
    /// Every suite, in the order `all` runs them.
    pub const ALL: [Suite; 9] = [
        Suite::Qspecial,
        Suite::Cartan,
        Suite::Evalrep,
        Suite::Qybe6v,
        Suite::Qybe8v,
        Suite::QdybeIrf,
        Suite::Twist,
        Suite::VertexIrf,
        Suite::Hexagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qspecial => "qspecial",
            Suite::Cartan => "cartan",
            Suite::Evalrep => "evalrep",
            Suite::Qybe6v => "qybe6v",
            Suite::Qybe8v => "qybe8v",
            Suite::QdybeIrf => "qdybe-irf",
            Suite::Twist => "twist",
            Suite::VertexIrf => "vertex-irf",
            Suite::Hexagonal => "hexagonal",
        }
    }

    /// Default number of random parameter points.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Qspecial => 50,
            Suite::Cartan => 3,
            Suite::Evalrep => 5,
            Suite::Qybe6v | Suite::Qybe8v | Suite::QdybeIrf => 20,
            Suite::Twist | Suite::VertexIrf => 10,
            Suite::Hexagonal => 5,
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

/// Expands a suite name, including `all`, into the suites to run.
pub fn expand_suite_name(name: &str) -> std::result::Result<Vec<Suite>, String> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

/// Settings shared by every suite in a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides the per-suite default point count.
    pub samples: Option<usize>,
    /// Overrides every per-check tolerance.
    pub tolerance: Option<f64>,
    pub policy: TruncationPolicy,
    /// Overrides the number of factors in truncated products.
    pub order: Option<usize>,
    pub bounds: ParamBox,
    /// Caps the worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Records wall time in each report.
    pub timing: bool,
}

type Eval = Box<dyn Fn() -> Result<f64> + Send + Sync>;

/// One residual evaluation scheduled by a suite.
struct Task {
    suite: Suite,
    params: BTreeMap<String, ParamValue>,
    tolerance: f64,
    order: Option<usize>,
    eval: Eval,
}

struct Builder<'a> {
    suite: Suite,
    cfg: &'a RunConfig,
    tasks: Vec<Task>,
}

impl<'a> Builder<'a> {
    fn push(
        &mut self,
        check: &'static str,
        params: Vec<(&str, ParamValue)>,
        tolerance: f64,
        order: Option<usize>,
        eval: impl Fn() -> Result<f64> + Send + Sync + 'static,
    ) {
        let mut map: BTreeMap<String, ParamValue> = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        map.insert("check".into(), check.into());
        self.tasks.push(Task {
            suite: self.suite,
            params: map,
            tolerance: self.cfg.tolerance.unwrap_or(tolerance),
            order,
            eval: Box::new(eval),
        });
    }
}

fn sampler_for(suite: Suite, cfg: &RunConfig) -> Sampler {
    let seed = cfg.seed ^ (suite.index() + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    Sampler::new(seed, cfg.bounds)
}

/// Runs the given suites and returns their reports in suite order, then
/// point order, then check order.
pub fn run_suites(suites: &[Suite], cfg: &RunConfig) -> Result<Vec<ResidualReport>> {
    let mut tasks = Vec::new();
    for &suite in suites {
        tasks.extend(build_tasks(suite, cfg)?);
    }
    let evaluate = || -> Vec<ResidualReport> { tasks.par_iter().map(|t| run_task(t, cfg)).collect() };
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(evaluate))
        }
        None => Ok(evaluate()),
    }
}

fn run_task(task: &Task, cfg: &RunConfig) -> ResidualReport {
    let start = Instant::now();
    let outcome = (task.eval)();
    let mut params = task.params.clone();
    let residual = match outcome {
        Ok(r) if r.is_nan() => f64::INFINITY,
        Ok(r) => r,
        Err(e) => {
            params.insert("error".into(), e.to_string().into());
            f64::INFINITY
        }
    };
    let truncation = TruncationInfo::from_policy(&cfg.policy, task.order);
    let mut report = ResidualReport::new(task.suite.name(), params, residual, task.tolerance, truncation);
    if cfg.timing {
        report.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

fn build_tasks(suite: Suite, cfg: &RunConfig) -> Result<Vec<Task>> {
    let mut b = Builder { suite, cfg, tasks: Vec::new() };
    let n = cfg.samples.unwrap_or(suite.default_samples());
    let mut s = sampler_for(suite, cfg);
    let pol = cfg.policy;
    match suite {
        Suite::Qspecial => qspecial_tasks(&mut b, &mut s, n, pol)?,
        Suite::Cartan => cartan_tasks(&mut b, &mut s, n),
        Suite::Evalrep => evalrep_tasks(&mut b, &mut s, n),
        Suite::Qybe6v => {
            let pts = s.accepted(n, |s| (s.q(), s.z(), s.z(), s.z()), |&(q, z1, z2, z3)| {
                Ok(vec![z1 - z2, z1 - z3, z2 - z3, qpoch(z1 / z2 * q * q, q.powi(4), &pol)?])
            })?;
            for (q, z1, z2, z3) in pts {
                let ps = vec![("q", q.into()), ("z1", z1.into()), ("z2", z2.into()), ("z3", z3.into())];
                b.push("qybe", ps, 1e-9, None, move || qybe_residual(|a, c| r6v(a, c, q, &pol), z1, z2, z3));
            }
        }
        Suite::Qybe8v => {
            let pts = s.accepted(n, |s| (s.p(), s.q(), s.z(), s.z(), s.z()), |&(p, q, z1, z2, z3)| {
                let th = |x: C64| theta(x, p.powi(4), &pol);
                let mut d = Vec::new();
                for (a, c) in [(z1, z2), (z1, z3), (z2, z3)] {
                    d.push(th(a / (c * q * q))?);
                    d.push(th(p * p * a / (c * q * q))?);
                }
                Ok(d)
            })?;
            for (p, q, z1, z2, z3) in pts {
                let ps = vec![("p", p.into()), ("q", q.into()), ("z1", z1.into()), ("z2", z2.into()), ("z3", z3.into())];
                b.push("qybe", ps, 1e-9, None, move || qybe_residual(|a, c| r8v(a, c, p, q, &pol), z1, z2, z3));
            }
        }
        Suite::QdybeIrf => {
            let pts = s.accepted(n, |s| (s.p(), s.q(), s.w(), s.z(), s.z(), s.z()), |&(p, q, w, z1, z2, z3)| {
                irf_denominators(p, q, w, &[z1 / z2, z1 / z3, z2 / z3], &pol)
            })?;
            for (p, q, w, z1, z2, z3) in pts {
                let ps = || {
                    vec![("p", p.into()), ("q", q.into()), ("w", w.into()), ("z1", z1.into()), ("z2", z2.into()), ("z3", z3.into())]
                };
                b.push("qdybe", ps(), 1e-9, None, move || {
                    qdybe_residual(|z, wv| r_irf(z, p, wv, q, &pol), z1, z2, z3, w, q)
                });
                b.push("star-triangle", ps(), 1e-9, None, move || {
                    star_triangle_residual(z1, z2, z3, p, w, q, -2..=2, &pol)
                });
            }
        }
        Suite::Twist => twist_tasks(&mut b, &mut s, n, pol, cfg.order)?,
        Suite::VertexIrf => vertex_irf_tasks(&mut b, &mut s, n, pol)?,
        Suite::Hexagonal => hexagonal_tasks(&mut b, &mut s, n, pol)?,
    }
    Ok(b.tasks)
}

/// Theta factors that appear in denominators of `R^IRF` and its shifts.
fn irf_denominators(p: C64, q: C64, w: C64, zs: &[C64], pol: &TruncationPolicy) -> Result<Vec<C64>> {
    let p2 = p * p;
    let mut d = Vec::new();
    for &z in zs {
        d.push(theta(z / (q * q), p2, pol)?);
    }
    for k in -3..=3 {
        let wk = w * q.powi(k);
        d.push(theta(wk * wk, p2, pol)?);
        d.push(qpoch(p2 / (wk * wk), p2, pol)?);
        d.push(qpoch(wk * wk, p2, pol)?);
    }
    Ok(d)
}

fn qspecial_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize, pol: TruncationPolicy) -> Result<()> {
    for _ in 0..n {
        let a = re(s.uniform((-0.9, 0.9)));
        let bb = re(s.uniform((-0.9, 0.9)));
        let c = re(s.uniform((-0.9, 0.9)));
        let q = s.q();
        let z = s.z_in((0.05, 0.9));
        let ps = vec![("a", a.into()), ("b", bb.into()), ("c", c.into()), ("q", q.into()), ("z", z.into())];
        b.push("q-difference", ps, 1e-9, None, move || phi21_q_difference_residual(a, bb, c, q, z, &pol));
    }
    let conn = s.accepted(
        n,
        |s| {
            let a = re(s.uniform((0.5, 0.95)));
            let bb = re(s.uniform((-0.95, -0.5)));
            let c = re(s.uniform((0.1, 0.5)));
            let q = re(s.uniform((0.2, 0.6)));
            let z = s.z_in((0.3, 0.95));
            (a, bb, c, q, z)
        },
        |&(a, bb, c, q, z)| {
            let far = (q * c / (a * bb * z)).norm();
            if far > 0.9 {
                return Ok(vec![re(0.0)]);
            }
            Ok(vec![theta(q / z, q, &pol)?, qpoch(c, q, &pol)?])
        },
    )?;
    for (a, bb, c, q, z) in conn {
        let ps = vec![("a", a.into()), ("b", bb.into()), ("c", c.into()), ("q", q.into()), ("z", z.into())];
        b.push("connection", ps, 1e-9, None, move || connection_formula_residual(a, bb, c, q, z, &pol));
    }
    for _ in 0..n {
        let (p, w, z) = (s.p(), s.w(), s.z());
        let x = z.inv();
        let ps = vec![("p", p.into()), ("w", w.into()), ("x", x.into())];
        b.push("phi01-phi21", ps, 1e-9, None, move || phi01_phi21_residual(x, p, w, &pol));
    }
    for _ in 0..n {
        let (q, z) = (s.q(), s.z_in((0.05, 0.95)));
        let r = s.integer(1, 4) as usize;
        let ps = vec![("q", q.into()), ("z", z.into()), ("r", r.into())];
        b.push("product-vs-series", ps, 1e-9, None, move || {
            let f6 = scalar_f6v(z, q, &pol)?.value;
            let f6s = scalar_f6v_expsum(z, q, &pol)?.value;
            let fq = scalar_fq_hexagon(z, q, r, &pol)?.value;
            let fqs = scalar_fq_hexagon_expsum(z, q, r, &pol)?.value;
            Ok(((f6 - f6s).norm() / f6.norm().max(1.0)).max((fq - fqs).norm() / fq.norm().max(1.0)))
        });
    }
    Ok(())
}

fn cartan_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize) {
    for r in 1..=6 {
        for aleph in valid_alephs(r) {
            let ps = vec![("r", r.into()), ("aleph", aleph.into())];
            b.push("identities", ps, 0.0, None, move || {
                let c = build_cartan_data(r, aleph)?;
                let ok = check_cartan_data(&c).required_hold()
                    && (aleph != 1 || c.s1 == s1_explicit_aleph_one(r));
                Ok(if ok { 0.0 } else { 1.0 })
            });
        }
    }
    let qs: Vec<C64> = (0..n).map(|_| s.q()).collect();
    for q in qs {
        for r in 1..=6 {
            for k in 1..=5 {
                let ps = vec![("q", q.into()), ("r", r.into()), ("n", k.into())];
                b.push("c-coefficients", ps, 1e-12, None, move || {
                    let mut worst = c_coeff_inverse_residual(k, r, q);
                    for i in 1..=r {
                        for j in 1..=r {
                            let a = c_coeff(i, j, k, r, q);
                            worst = worst.max((a - c_coeff_alt(i, j, k, r, q)).norm() / a.norm().max(1.0));
                        }
                    }
                    Ok(worst)
                });
            }
        }
    }
}

fn evalrep_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize) {
    for r in 1..=4 {
        for _ in 0..n {
            let (q, z) = (s.q(), s.z());
            let ps = || vec![("r", r.into()), ("q", q.into()), ("z", z.into())];
            b.push("sigma-intertwining", ps(), 1e-12, None, move || sigma_intertwining_residual(r, z, q));
            b.push("relations", ps(), 1e-9, None, move || relation_residual(r, z, q));
            b.push("log-transform", ps(), 1e-9, None, move || log_transform_residual(r, z, q, 8));
        }
    }
}

/// Factors needed for `rate^N < 1e-14`, where `rate = max(|w|^2, |p/w|^2)`
/// governs the truncated twist product.
pub fn twist_order_for(p: C64, w: C64) -> usize {
    let rate = (w.norm() * w.norm()).max((p / w).norm().powi(2));
    if rate >= 1.0 {
        return 400;
    }
    ((1e-14_f64.ln() / rate.ln()).ceil() as usize).clamp(1, 400)
}

fn twist_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize, pol: TruncationPolicy, order: Option<usize>) -> Result<()> {
    let pts = s.accepted(
        n,
        |s| {
            let p = s.p();
            let q = s.q();
            let sp = p.re.sqrt();
            let w = re(s.uniform((0.85 * sp, (sp / 0.85).min(0.95))));
            let z = s.z_in((0.05, 0.8 * (q.re * q.re / (p.re * p.re)).min(1.0)));
            (p, q, w, z)
        },
        |&(p, q, w, z)| {
            let mut d = irf_denominators(p, q, w, &[z], &pol)?;
            d.push(re(1.0) - w * w);
            Ok(d)
        },
    )?;
    for (p, q, w, z) in pts {
        let nf = order.unwrap_or_else(|| twist_order_for(p, w));
        let ps = || vec![("p", p.into()), ("q", q.into()), ("w", w.into()), ("z", z.into()), ("n", nf.into())];
        b.push("twist-product", ps(), 1e-9, Some(nf), move || {
            let closed = f_twist_closed(z, p, w, q, &pol)?;
            Ok(rel_residual(&f_twist_product(z, re(1.0), p, w, q, nf, &pol)?, &closed))
        });
        b.push("irf-from-twist", ps(), 1e-9, Some(nf), move || {
            Ok(rel_residual(&r_irf_from_twist(z, re(1.0), p, w, q, nf, &pol)?, &r_irf(z, p, w, q, &pol)?))
        });
    }
    Ok(())
}

fn vertex_irf_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize, pol: TruncationPolicy) -> Result<()> {
    let pts = s.accepted(n, |s| (s.p(), s.q(), s.w(), s.z(), s.z()), |&(p, q, w, z1, z2)| {
        let p2 = p * p;
        let p4 = p2 * p2;
        let mut d = irf_denominators(p, q, w, &[z1 / z2], &pol)?;
        for z in [z1, z2, z1 / z2] {
            d.push(theta(z, p2, &pol)?);
            d.push(theta(-z, p2, &pol)?);
            d.push(theta(z / (q * q), p4, &pol)?);
            d.push(theta(p2 * z / (q * q), p4, &pol)?);
            d.push(qpoch(z, q.powi(4), &pol)?);
            d.push(qpoch(q * q * p2 / z, q.powi(4), &pol)?);
        }
        d.push(w - w.inv());
        d.push(p / w - w / p);
        d.push(p * p + w * w);
        Ok(d)
    })?;
    for (p, q, w, z1, z2) in pts {
        let ps = || vec![("p", p.into()), ("q", q.into()), ("w", w.into()), ("z1", z1.into()), ("z2", z2.into())];
        b.push("vertex-irf", ps(), 1e-7, None, move || vertex_irf_residual(z1, z2, p, w, q, &pol));
        b.push("phi-vector", ps(), 1e-7, None, move || phi_vector_residual(z1, z2, p, w, q, &pol));
        b.push("s-times-m", ps(), 1e-7, None, move || assembly_residual(z1, p, w, q, &pol));
        b.push("s-routes", ps(), 1e-7, None, move || s_route_residual(z1, p, w, q, &pol));
        b.push("eq-m-plus", ps(), 1e-9, None, move || eq_m_plus_residual(z1, p, w, q, &pol));
        b.push("eq-m-minus", ps(), 1e-9, None, move || {
            eq_m_minus_residual(z1, p, w, q, MMinusRoute::PhiZeroOne, &pol)
        });
        b.push("eq-a-plus", ps(), 1e-9, None, move || eq_a_plus_residual(z1, p, w, &pol));
        b.push("eq-a-bis", ps(), 1e-9, None, move || eq_a_bis_residual(z1.inv(), p, w, &pol));
        b.push("eq-a-minus", ps(), 1e-9, None, move || eq_a_minus_residual(z1.inv(), p, w, &pol));
        b.push("beta-relation", ps(), 1e-9, None, move || beta_relation_residual(z1.inv(), p, w, &pol));
    }
    Ok(())
}

fn hexagonal_tasks(b: &mut Builder<'_>, s: &mut Sampler, n: usize, pol: TruncationPolicy) -> Result<()> {
    for r in 1..=3 {
        let pts = s.accepted(n, |s| (s.q(), s.z()), |&(q, z)| hexagonal_check(r, z, q, &pol).map(|_| vec![c64(1.0, 0.0)]))?;
        for (q, z) in pts {
            let ps = vec![("r", r.into()), ("q", q.into()), ("z", z.into())];
            b.push("closed-forms", ps, 1e-9, None, move || Ok(hexagonal_check(r, z, q, &pol)?.max()));
        }
        let pts = s.accepted(n, |s| (s.q(), s.z_in((0.2, 0.9))), |&(q, z)| {
            star_exchange_residual(r, z, q, &pol).map(|_| vec![c64(1.0, 0.0)])
        })?;
        for (q, z) in pts {
            let ps = vec![("r", r.into()), ("q", q.into()), ("z", z.into())];
            b.push("star-exchange", ps, 1e-9, None, move || star_exchange_residual(r, z, q, &pol));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(expand_suite_name("all").unwrap().len(), 9);
        assert!(expand_suite_name("bogus").is_err());
    }

    #[test]
    fn small_suites_pass() {
        let cfg = RunConfig { samples: Some(3), ..RunConfig::default() };
        for suite in [Suite::Qybe6v, Suite::Qybe8v, Suite::Hexagonal] {
            let reports = run_suites(&[suite], &cfg).unwrap();
            assert!(!reports.is_empty());
            for r in &reports {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let base = RunConfig { samples: Some(4), seed: 9, ..RunConfig::default() };
        let one = run_suites(&[Suite::Qybe6v], &RunConfig { threads: Some(1), ..base.clone() }).unwrap();
        let four = run_suites(&[Suite::Qybe6v], &RunConfig { threads: Some(4), ..base }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn twist_order_grows_with_rate() {
        assert!(twist_order_for(re(0.3), re(0.55)) < twist_order_for(re(0.3), re(0.9)));
        assert_eq!(twist_order_for(re(0.3), re(1.2)), 400);
    }
}
