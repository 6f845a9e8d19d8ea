//! Complex q-special functions: q-Pochhammer symbols (finite, infinite and
//! multi-base), the q-theta function, the q-exponential, basic hypergeometric
//! series, and the scalar prefactors carried by the R-matrices and gauge
//! matrices.
//!
//! Infinite products stop once `|factor - 1|` stays below the tail tolerance
//! for three consecutive indices (or shells, for several bases). Series stop
//! once `|term| < tol * |partial sum|` holds for three consecutive terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{guard_pole, Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Number of consecutive small factors or terms required to stop.
const STREAK: usize = 3;

/// Truncation controls for every infinite product and series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Iteration budget (factors, shells or series terms).
    pub max_terms: usize,
    /// Stop threshold for `|factor - 1|` or the relative size of a term.
    pub tail_tolerance: f64,
    /// Safety clamp applied to `max_terms`.
    pub hard_cap: usize,
    /// Denominators smaller than this in modulus raise `PoleHit`.
    pub pole_tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { max_terms: 4000, tail_tolerance: 1e-17, hard_cap: 100_000, pole_tolerance: 1e-13 }
    }
}

impl TruncationPolicy {
    /// Policy with the given tail tolerance and default budgets.
    pub fn with_tolerance(tail_tolerance: f64) -> Self {
        Self { tail_tolerance, ..Self::default() }
    }

    /// Effective iteration limit, `max_terms` clamped by `hard_cap`.
    pub fn limit(&self) -> usize {
        self.max_terms.min(self.hard_cap).max(1)
    }
}

/// Value of a truncated evaluation together with an estimate of the
/// truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub value: C64,
    pub tail_bound: f64,
}

impl QValue {
    fn exact(value: C64) -> Self {
        Self { value, tail_bound: 0.0 }
    }
}

/// Shorthand constructor for a complex number.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real number as a complex scalar.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Principal-branch power `x^e` with argument in (-pi, pi].
pub fn cpow(x: C64, e: f64) -> C64 {
    if x == C64::new(0.0, 0.0) {
        return if e == 0.0 { re(1.0) } else { re(0.0) };
    }
    let (r, theta) = x.to_polar();
    C64::from_polar(r.powf(e), theta * e)
}

/// Integer power, accepting negative exponents.
pub fn ipow(x: C64, n: i64) -> C64 {
    if n >= 0 {
        x.powu(n as u32)
    } else {
        x.powu((-n) as u32).inv()
    }
}

/// Symmetric q-number `[n]_q = (q^n - q^{-n}) / (q - q^{-1})`.
pub fn q_number(n: i64, q: C64) -> C64 {
    if n == 0 {
        return re(0.0);
    }
    (ipow(q, n) - ipow(q, -n)) / (q - q.inv())
}

/// Finite q-Pochhammer symbol `(a;q)_k`; the empty product is 1.
pub fn qpoch_finite(a: C64, q: C64, k: usize) -> C64 {
    let mut acc = re(1.0);
    let mut qa = a;
    for _ in 0..k {
        acc *= re(1.0) - qa;
        qa *= q;
    }
    acc
}

fn check_bases(bases: &[C64]) -> Result<()> {
    for b in bases {
        if b.norm() >= 1.0 {
            return Err(Error::DivergentBase { modulus: b.norm() });
        }
    }
    Ok(())
}

/// Calls `visit` with every monomial `prod_i bases[i]^{l_i}` with
/// `sum_i l_i = shell`.
fn for_each_monomial(bases: &[C64], shell: usize, visit: &mut dyn FnMut(C64)) {
    fn rec(bases: &[C64], left: usize, acc: C64, visit: &mut dyn FnMut(C64)) {
        match bases.len() {
            0 => {
                if left == 0 {
                    visit(acc)
                }
            }
            1 => visit(acc * bases[0].powu(left as u32)),
            _ => {
                let mut pw = acc;
                for used in 0..=left {
                    rec(&bases[1..], left - used, pw, visit);
                    pw *= bases[0];
                }
            }
        }
    }
    rec(bases, shell, re(1.0), visit);
}

/// Multi-base infinite product `(z_1, ..., z_m; q_1, ..., q_n)_inf`
/// `= prod_k prod_{l_1..l_n >= 0} (1 - z_k q_1^{l_1} ... q_n^{l_n})`,
/// enumerated by shells of constant total degree.
pub fn qpoch_inf(zs: &[C64], bases: &[C64], policy: &TruncationPolicy) -> Result<QValue> {
    check_bases(bases)?;
    if zs.is_empty() {
        return Ok(QValue::exact(re(1.0)));
    }
    if bases.is_empty() {
        let v = zs.iter().fold(re(1.0), |acc, z| acc * (re(1.0) - z));
        return Ok(QValue::exact(v));
    }
    let zmax = zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rho = bases.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let mut acc = re(1.0);
    let mut streak = 0;
    let limit = policy.limit();
    for shell in 0..limit {
        let mut dev = 0.0_f64;
        for_each_monomial(bases, shell, &mut |m| {
            dev = dev.max(m.norm());
            for z in zs {
                acc *= re(1.0) - z * m;
            }
        });
        let dev = dev * zmax;
        if dev < policy.tail_tolerance {
            streak += 1;
            if streak >= STREAK {
                let count = (shell + 2).pow(bases.len() as u32 - 1) as f64 * zs.len() as f64;
                let tail = acc.norm() * count * dev * rho / (1.0 - rho).max(f64::EPSILON);
                return Ok(QValue { value: acc, tail_bound: tail });
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::CapExceeded { limit })
}

/// Single-base infinite product `(z;q)_inf`.
pub fn qpoch(z: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(qpoch_inf(&[z], &[q], policy)?.value)
}

/// Two-base infinite product `(z;q1,q2)_inf`.
pub fn qpoch2(z: C64, q1: C64, q2: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(qpoch_inf(&[z], &[q1, q2], policy)?.value)
}

/// q-theta function `Theta_q(z) = (z, q/z, q; q)_inf`.
pub fn theta_q(z: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument { what: "z" });
    }
    if q.norm() == 0.0 || q.norm() >= 1.0 {
        return Err(Error::DivergentBase { modulus: q.norm() });
    }
    qpoch_inf(&[z, q / z, q], &[q], policy)
}

/// Theta value without the tail bound.
pub fn theta(z: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(theta_q(z, q, policy)?.value)
}

/// q-exponential `exp_q(z) = 1 / ((1 - q^2) z; q^2)_inf`.
pub fn exp_q(z: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    let den = exp_q_inv(z, q, policy)?;
    guard_pole(den.value, policy.pole_tolerance, "exp_q denominator ((1-q^2)z;q^2)")?;
    let value = den.value.inv();
    Ok(QValue { value, tail_bound: den.tail_bound * value.norm() * value.norm() })
}

/// Entire inverse of the q-exponential, `((1 - q^2) z; q^2)_inf`.
pub fn exp_q_inv(z: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    qpoch_inf(&[(re(1.0) - q * q) * z], &[q * q], policy)
}

/// q-exponential as the series `sum_n z^n / (n)_q!` with
/// `(n)_q = q^{n-1} [n]_q = (1 - q^{2n}) / (1 - q^2)`.
pub fn exp_q_series(z: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    let q2 = q * q;
    let mut sum = re(1.0);
    let mut term = re(1.0);
    let mut streak = 0;
    let mut q2n = re(1.0);
    let limit = policy.limit();
    for _ in 1..limit {
        q2n *= q2;
        term *= z * (re(1.0) - q2) / (re(1.0) - q2n);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::OutsideConvergence { modulus: ((re(1.0) - q2) * z).norm() });
        }
        if term.norm() < policy.tail_tolerance * sum.norm() {
            streak += 1;
            if streak >= STREAK {
                return Ok(QValue { value: sum, tail_bound: term.norm() * 2.0 });
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::CapExceeded { limit })
}

/// True when some `a q^k` equals one, so that `(a;q)_k` vanishes and the
/// series terminates.
fn terminates(a: C64, q: C64, limit: usize) -> bool {
    let mut x = a;
    for _ in 0..limit {
        if (re(1.0) - x).norm() < 1e-13 {
            return true;
        }
        if q.norm() < 1.0 && x.norm() < 0.5 {
            return false;
        }
        x *= q;
    }
    false
}

/// Basic hypergeometric series
/// `_rphi_s(a; b; q; z) = sum_k (a_1..a_r; q)_k / ((q, b_1..b_s; q)_k)
/// [(-1)^k q^{k(k-1)/2}]^{1+s-r} z^k`.
pub fn basic_hypergeometric(
    a: &[C64],
    b: &[C64],
    q: C64,
    z: C64,
    policy: &TruncationPolicy,
) -> Result<QValue> {
    if q.norm() >= 1.0 {
        return Err(Error::DivergentBase { modulus: q.norm() });
    }
    if z.norm() == 0.0 {
        return Ok(QValue::exact(re(1.0)));
    }
    let limit = policy.limit();
    let r = a.len() as i64;
    let s = b.len() as i64;
    let terminating = a.iter().any(|&x| terminates(x, q, limit));
    if !terminating && (r > s + 1 || (r == s + 1 && z.norm() >= 1.0)) {
        return Err(Error::OutsideConvergence { modulus: z.norm() });
    }
    let power = 1 + s - r;
    let mut sum = re(1.0);
    let mut term = re(1.0);
    let mut qk = re(1.0);
    let mut streak = 0;
    for _ in 0..limit {
        let mut ratio = z;
        for &x in a {
            ratio *= re(1.0) - x * qk;
        }
        let mut den = re(1.0) - q * qk;
        for &y in b {
            let f = re(1.0) - y * qk;
            guard_pole(f, policy.pole_tolerance, "lower parameter of the form q^-m")?;
            den *= f;
        }
        ratio /= den;
        if power != 0 {
            ratio *= ipow(-qk, power);
        }
        term *= ratio;
        sum += term;
        qk *= q;
        if !sum.is_finite() {
            return Err(Error::CapExceeded { limit });
        }
        if term.norm() <= policy.tail_tolerance * sum.norm() {
            streak += 1;
            if streak >= STREAK {
                return Ok(QValue { value: sum, tail_bound: term.norm() * 2.0 });
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::CapExceeded { limit })
}

/// `_2phi_1(a, b; c; q; z)`.
pub fn phi21(a: C64, b: C64, c: C64, q: C64, z: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(basic_hypergeometric(&[a, b], &[c], q, z, policy)?.value)
}

/// `_0phi_1(-; a; q; z)`.
pub fn phi01(a: C64, q: C64, z: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(basic_hypergeometric(&[], &[a], q, z, policy)?.value)
}

/// Both sides of the `_2phi_1` connection formula relating the expansions
/// at `z` and at `q c / (a b z)`.
pub fn connection_formula_sides(
    a: C64,
    b: C64,
    c: C64,
    q: C64,
    z: C64,
    policy: &TruncationPolicy,
) -> Result<(C64, C64)> {
    let lhs = phi21(a, b, c, q, z, policy)?;
    let th_den = theta(q / z, q, policy)?;
    guard_pole(th_den, policy.pole_tolerance, "Theta_q(q/z)")?;
    let arg = q * c / (a * b * z);
    let pref = |x: C64, y: C64| -> Result<C64> {
        let num = qpoch(y, q, policy)? * qpoch(c / x, q, policy)?;
        let den = qpoch(c, q, policy)? * qpoch(y / x, q, policy)?;
        guard_pole(den, policy.pole_tolerance, "(c, b/a; q) denominator")?;
        Ok(num / den * theta(q / (x * z), q, policy)? / th_den)
    };
    let t1 = pref(a, b)? * phi21(a, q * a / c, q * a / b, q, arg, policy)?;
    let t2 = pref(b, a)? * phi21(b, q * b / c, q * b / a, q, arg, policy)?;
    Ok((lhs, t1 + t2))
}

/// Normalized residual `|LHS - RHS| / max(|LHS|, |RHS|, 1)` of the
/// connection formula.
pub fn connection_formula_residual(
    a: C64,
    b: C64,
    c: C64,
    q: C64,
    z: C64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let (l, r) = connection_formula_sides(a, b, c, q, z, policy)?;
    Ok((l - r).norm() / l.norm().max(r.norm()).max(1.0))
}

/// Residual of the second-order q-difference equation satisfied by
/// `phi(z) = _2phi_1(a, b; c; q; z)`:
/// `phi(z) - (1 + c/q) phi(qz) + (c/q) phi(q^2 z) = z [phi(z) - (a + b) phi(qz) + a b phi(q^2 z)]`,
/// relative to `max(|phi(z)|, 1)`.
pub fn phi21_q_difference_residual(
    a: C64,
    b: C64,
    c: C64,
    q: C64,
    z: C64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let f0 = phi21(a, b, c, q, z, policy)?;
    let f1 = phi21(a, b, c, q, q * z, policy)?;
    let f2 = phi21(a, b, c, q, q * q * z, policy)?;
    let lhs = f0 - (re(1.0) + c / q) * f1 + c / q * f2;
    let rhs = z * (f0 - (a + b) * f1 + a * b * f2);
    Ok((lhs - rhs).norm() / f0.norm().max(1.0))
}

/// Six-vertex scalar `f(u) = (u, q^4 u; q^4)_inf / (q^2 u; q^4)_inf^2`.
pub fn scalar_f6v(u: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    let q4 = q.powu(4);
    let num = qpoch_inf(&[u, q4 * u], &[q4], policy)?;
    let den = qpoch_inf(&[q * q * u], &[q4], policy)?;
    guard_pole(den.value, policy.pole_tolerance, "(q^2 u; q^4)")?;
    let value = num.value / (den.value * den.value);
    Ok(QValue { value, tail_bound: value.norm() * (num.tail_bound + 2.0 * den.tail_bound) })
}

/// Exponential-sum form `exp sum_n (q^n - q^-n)/(q^n + q^-n) u^n / n` of
/// the six-vertex scalar, valid for `|u| < 1`.
pub fn scalar_f6v_expsum(u: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    if u.norm() >= 1.0 {
        return Err(Error::OutsideConvergence { modulus: u.norm() });
    }
    let s = log_series(policy, |n| {
        let q2n = q.powu(2 * n as u32);
        (q2n - re(1.0)) / (q2n + re(1.0)) * u.powu(n as u32) / n as f64
    })?;
    Ok(QValue { value: s.value.exp(), tail_bound: s.tail_bound * s.value.exp().norm() })
}

/// Sums `sum_{n >= 1} term(n)` with the series stop rule.
fn log_series(policy: &TruncationPolicy, term: impl Fn(usize) -> C64) -> Result<QValue> {
    let mut sum = re(0.0);
    let mut streak = 0;
    let limit = policy.limit();
    for n in 1..limit {
        let t = term(n);
        sum += t;
        if !sum.is_finite() {
            return Err(Error::CapExceeded { limit });
        }
        if t.norm() <= policy.tail_tolerance * sum.norm().max(1e-300) {
            streak += 1;
            if streak >= STREAK {
                return Ok(QValue { value: sum, tail_bound: t.norm() * 2.0 });
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::CapExceeded { limit })
}

/// Eight-vertex scalar
/// `rho(z;p) = (z, q^4 z, p^2 q^2/z, p^2 q^2/z; p^2, q^4)_inf
///           / (q^2 z, q^2 z, p^2/z, p^2 q^4/z; p^2, q^4)_inf`.
pub fn scalar_rho8v(z: C64, p: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    let p2 = p * p;
    let q2 = q * q;
    let q4 = q2 * q2;
    let bases = [p2, q4];
    let num = qpoch_inf(&[z, q4 * z, p2 * q2 / z, p2 * q2 / z], &bases, policy)?;
    let den = qpoch_inf(&[q2 * z, q2 * z, p2 / z, p2 * q4 / z], &bases, policy)?;
    guard_pole(den.value, policy.pole_tolerance, "rho(z;p) denominator")?;
    let value = num.value / den.value;
    Ok(QValue { value, tail_bound: value.norm() * (num.tail_bound + den.tail_bound) })
}

/// Twist scalar `phi(z;p) = (p^2 z, q^4 p^2 z; q^4, p^2)_inf / (q^2 p^2 z; q^4, p^2)_inf^2`.
pub fn scalar_phi_twist(z: C64, p: C64, q: C64, policy: &TruncationPolicy) -> Result<QValue> {
    let p2 = p * p;
    let q2 = q * q;
    let q4 = q2 * q2;
    let bases = [q4, p2];
    let num = qpoch_inf(&[p2 * z, q4 * p2 * z], &bases, policy)?;
    let den = qpoch_inf(&[q2 * p2 * z], &bases, policy)?;
    guard_pole(den.value, policy.pole_tolerance, "phi(z;p) denominator")?;
    let value = num.value / (den.value * den.value);
    Ok(QValue { value, tail_bound: value.norm() * (num.tail_bound + 2.0 * den.tail_bound) })
}

/// Product form of `exp sum_{k >= 1} x^k [k j]_q / (k [k m]_q)`, namely
/// `(x q^{m+j}; q^{2m})_inf / (x q^{m-j}; q^{2m})_inf` for `|q| < 1`.
/// The product continues the series beyond its disc `|x q^{m-j}| < 1`.
pub fn exp_qratio_product(x: C64, j: i64, m: i64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let base = ipow(q, 2 * m);
    let num = qpoch(x * ipow(q, m + j), base, policy)?;
    let den = qpoch(x * ipow(q, m - j), base, policy)?;
    guard_pole(den, policy.pole_tolerance, "q-ratio product denominator")?;
    Ok(num / den)
}

/// Truncated series `exp sum_{k >= 1} x^k [k j]_q / (k [k m]_q)`.
pub fn exp_qratio_series(x: C64, j: i64, m: i64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let lead = (x * ipow(q, m - j)).norm();
    if lead >= 1.0 {
        return Err(Error::OutsideConvergence { modulus: lead });
    }
    let s = log_series(policy, |k| {
        let k = k as i64;
        ipow(x, k) * q_number(k * j, q) / (q_number(k * m, q) * k as f64)
    })?;
    Ok(s.value.exp())
}

/// Hexagonal scalar
/// `f_q(z) = exp sum_k (-1)^{k(r+1)} q^{kr} [k]_q / ([k(r+1)]_q k) z^k`,
/// evaluated through its product form
/// `(s q^{2(r+1)} z; q^{2(r+1)})_inf / (s q^{2r} z; q^{2(r+1)})_inf`, `s = (-1)^{r+1}`.
pub fn scalar_fq_hexagon(z: C64, q: C64, r: usize, policy: &TruncationPolicy) -> Result<QValue> {
    let r = r as i64;
    let sign = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let value = exp_qratio_product(sign * ipow(q, r) * z, 1, r + 1, q, policy)?;
    Ok(QValue { value, tail_bound: value.norm() * policy.tail_tolerance })
}

/// Series form of `f_q(z)`, valid for `|q^{2r} z| < 1`.
pub fn scalar_fq_hexagon_expsum(z: C64, q: C64, r: usize, policy: &TruncationPolicy) -> Result<QValue> {
    let r = r as i64;
    let sign = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let value = exp_qratio_series(sign * ipow(q, r) * z, 1, r + 1, q, policy)?;
    Ok(QValue { value, tail_bound: value.norm() * policy.tail_tolerance })
}

/// `f_{q^{-1}}(z^{-1})` through the same product, with `|q| < 1`.
pub fn scalar_fq_hexagon_inverse(z: C64, q: C64, r: usize, policy: &TruncationPolicy) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument { what: "z" });
    }
    let r = r as i64;
    let sign = if (r + 1) % 2 == 0 { 1.0 } else { -1.0 };
    exp_qratio_product(sign * ipow(q, -r) / z, 1, r + 1, q, policy)
}
