//! Vertex-IRF gauge layer for `r = 1`: the evaluated factors `C^[+-]` and
//! `C^[+-k]`, the matrices `M^(0)`, `M^(+)` and `M^(-)^{-1}` built either as
//! truncated products or through basic hypergeometric closed forms, the
//! closed-form gauge matrix `S(z;p,w)`, and residuals for the difference
//! equations, the assembly `S M = I`, and the vertex-IRF intertwining.
//!
//! The general-rank hexagonal relation lives in [`hexagonal`].

pub mod hexagonal;

use serde::{Deserialize, Serialize};

use crate::error::{guard_pole, Result};
use crate::qspecial::{cpow, phi01, phi21, qpoch, qpoch2, re, theta, TruncationPolicy, C64};
use crate::rmat::{boltzmann_weight, r8v, r_irf, Heights, WEIGHTS};
use crate::tensor::{kron, rel_residual, CMatrix};

/// Which of the two Gauss factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeSign {
    Plus,
    Minus,
}

/// Construction route for `M^(+)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MPlusRoute {
    /// Ordered product `C^[+1] C^[+2] ... C^[+N]`.
    Product(usize),
    /// Prefactor times `2phi1` entries.
    Hypergeometric,
}

/// Construction route for `M^(-)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MMinusRoute {
    /// Ordered product `C^[-N] ... C^[-2] C^[-1]`.
    Product(usize),
    /// Prefactor times `0phi1` entries `alpha, beta, gamma, delta`.
    PhiZeroOne,
    /// Inverse of the `2phi1` closed form of `M^(-)`.
    PhiTwoOne,
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> CMatrix {
    CMatrix::from_rows(&[vec![a, b], vec![c, d]])
}

fn sqrt_p(p: C64) -> C64 {
    cpow(p, 0.5)
}

/// Ratio of single-base products `(num; base)_inf / (den; base)_inf`.
fn poch_ratio(num: C64, den: C64, base: C64, policy: &TruncationPolicy, what: &str) -> Result<C64> {
    let d = qpoch(den, base, policy)?;
    guard_pole(d, policy.pole_tolerance, what)?;
    Ok(qpoch(num, base, policy)? / d)
}

/// Ratio of two-base products `(num; b1, b2)_inf / (den; b1, b2)_inf`.
fn poch2_ratio(num: C64, den: C64, b1: C64, b2: C64, policy: &TruncationPolicy, what: &str) -> Result<C64> {
    let d = qpoch2(den, b1, b2, policy)?;
    guard_pole(d, policy.pole_tolerance, what)?;
    Ok(qpoch2(num, b1, b2, policy)? / d)
}

/// Evaluated `C^[+]` and `C^[-]`:
/// `C^[+] = (q^2 z;q^4)/(z;q^4) [[1, -p^{-1/2} w], [-p^{1/2} z/w, 1]]`,
/// `C^[-] = (q^4/z;q^4)/(q^2/z;q^4) [[1, -p^{-1/2} w/z], [-p^{1/2}/w, 1]]`.
pub fn c_pm_ev(sign: GaugeSign, z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let q2 = q * q;
    let q4 = q2 * q2;
    let sp = sqrt_p(p);
    Ok(match sign {
        GaugeSign::Plus => {
            let pre = poch_ratio(q2 * z, z, q4, policy, "(z;q^4)")?;
            mat2(re(1.0), -w / sp, -sp * z / w, re(1.0)).scale(pre)
        }
        GaugeSign::Minus => {
            let pre = poch_ratio(q4 / z, q2 / z, q4, policy, "(q^2/z;q^4)")?;
            mat2(re(1.0), -w / (sp * z), -sp / w, re(1.0)).scale(pre)
        }
    })
}

/// Evaluated `C^[+k]` and `C^[-k]`, `k >= 1`.
///
/// `C^[+1] = C^[+]` and `C^[+k](z) = O C^[+(k-1)](p^2 z) O^{-1}` with
/// `O = diag(p^{1/2}, p^{-1/2}) omega(p^2 z)`. On the minus side the
/// dilation gives `C^[-1](z; w) = C^[-](p^{-2} z; 1/w)` and
/// `C^[-k](z) = U^{k-1} C^[-1](p^{-2(k-1)} z) U^{1-k}` with `U = diag(1/w, w)`.
pub fn c_k_ev(sign: GaugeSign, k: usize, z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    assert!(k >= 1, "C^[k] is defined for k >= 1");
    let p2 = p * p;
    match sign {
        GaugeSign::Plus => {
            if k == 1 {
                return c_pm_ev(GaugeSign::Plus, z, p, w, q, policy);
            }
            let inner = c_k_ev(GaugeSign::Plus, k - 1, p2 * z, p, w, q, policy)?;
            let sp = sqrt_p(p);
            let o = mat2(re(0.0), sp, p2 * z / sp, re(0.0));
            inner.conjugate_by(&o)
        }
        GaugeSign::Minus => {
            let shift = cpow(p2, -(k as f64));
            let base = c_pm_ev(GaugeSign::Minus, shift * z, p, w.inv(), q, policy)?;
            let u = CMatrix::diag(&[w.inv(), w]).pow(k as u32 - 1);
            base.conjugate_by(&u)
        }
    }
}

/// `M^(0) = diag(p^{1/8} w^{-1/4}, p^{-1/8} w^{1/4})`, the principal square
/// root of `diag(p^{1/4} w^{-1/2}, p^{-1/4} w^{1/2})`.
pub fn m0(p: C64, w: C64) -> CMatrix {
    CMatrix::diag(&[cpow(p, 0.125) * cpow(w, -0.25), cpow(p, -0.125) * cpow(w, 0.25)])
}

/// `a^(+)(z;p,w) = 2phi1(-w^2/p^2, -p^2/w^2; p^2; p^4; p^2 z)`.
pub fn a_plus(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    phi21(-w2 / p2, -p2 / w2, p2, p2 * p2, p2 * z, policy)
}

/// `c^(+)(z;p,w) = z (w + 1/w) / (p (p - 1/p)) 2phi1(-p^2 w^2, -p^2/w^2; p^6; p^4; p^2 z)`.
pub fn c_plus(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    let lead = z * (w + w.inv()) / (p * (p - p.inv()));
    Ok(lead * phi21(-p2 * w2, -p2 / w2, p2 * p2 * p2, p2 * p2, p2 * z, policy)?)
}

/// `b^(+)(z;p,w) = (p/z) c^(+)(z;p,p/w)`.
pub fn b_plus(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(p / z * c_plus(z, p, p / w, policy)?)
}

/// `d^(+)(z;p,w) = a^(+)(z;p,p/w)`.
pub fn d_plus(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    a_plus(z, p, p / w, policy)
}

/// `alpha^(-)` as a function of `x = 1/z`:
/// `0phi1(-; p^2/w^2; p^2; p^4 x / w^2)`.
pub fn alpha_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    phi01(p2 / w2, p2, p2 * p2 * x / w2, policy)
}

/// `beta^(-)(x) = p x / (p/w - w/p) 0phi1(-; p^4/w^2; p^2; p^6 x / w^2)`.
pub fn beta_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    let lead = p * x / (p / w - w / p);
    Ok(lead * phi01(p2 * p2 / w2, p2, p2 * p2 * p2 * x / w2, policy)?)
}

/// `gamma^(-)(x) = (1/(p x)) beta^(-)(x; p, p/w)`.
pub fn gamma_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(beta_minus(x, p, p / w, policy)? / (p * x))
}

/// `delta^(-)(x) = alpha^(-)(x; p, p/w)`.
pub fn delta_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    alpha_minus(x, p, p / w, policy)
}

/// `a^(-)(x) = 2phi1(-1/w^2, -p^2/w^2; p^4/w^4; p^4; p^4 x)`.
pub fn a_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    phi21(-w2.inv(), -p2 / w2, p2 * p2 / (w2 * w2), p2 * p2, p2 * p2 * x, policy)
}

/// `c^(-)(x) = 1/(w - 1/w) 2phi1(-w^2, -p^2 w^2; p^4 w^4; p^4; p^4 x)`.
pub fn c_minus(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let w2 = w * w;
    let lead = (w - w.inv()).inv();
    Ok(lead * phi21(-w2, -p2 * w2, p2 * p2 * w2 * w2, p2 * p2, p2 * p2 * x, policy)?)
}

/// `M^(+)(z;p,w)` along the chosen route.
pub fn m_plus(z: C64, p: C64, w: C64, q: C64, via: MPlusRoute, policy: &TruncationPolicy) -> Result<CMatrix> {
    match via {
        MPlusRoute::Product(n) => {
            let mut m = CMatrix::identity(2);
            for k in 1..=n {
                m = m.matmul(&c_k_ev(GaugeSign::Plus, k, z, p, w, q, policy)?);
            }
            Ok(m)
        }
        MPlusRoute::Hypergeometric => {
            let p2 = p * p;
            let q2 = q * q;
            let pre = poch2_ratio(q2 * z, z, p2, q2 * q2, policy, "(z;p^2,q^4)")? * qpoch(p2 * z, p2 * p2, policy)?;
            let sp = sqrt_p(p);
            let m = mat2(
                a_plus(z, p, w, policy)?,
                b_plus(z, p, w, policy)? / sp,
                sp * c_plus(z, p, w, policy)?,
                d_plus(z, p, w, policy)?,
            );
            Ok(m.scale(pre))
        }
    }
}

/// `M^(-)(z;p,w)^{-1}` along the chosen route.
pub fn m_minus_inv(z: C64, p: C64, w: C64, q: C64, via: MMinusRoute, policy: &TruncationPolicy) -> Result<CMatrix> {
    match via {
        MMinusRoute::Product(n) => {
            let mut m = CMatrix::identity(2);
            for k in 1..=n {
                m = c_k_ev(GaugeSign::Minus, k, z, p, w, q, policy)?.matmul(&m);
            }
            Ok(m)
        }
        MMinusRoute::PhiZeroOne => {
            let x = z.inv();
            let p2 = p * p;
            let q2 = q * q;
            let pre = poch2_ratio(q2 * q2 * p2 * x, q2 * p2 * x, p2, q2 * q2, policy, "(q^2 p^2/z;p^2,q^4)")?;
            let sp = sqrt_p(p);
            let m = mat2(
                alpha_minus(x, p, w, policy)?,
                beta_minus(x, p, w, policy)? / sp,
                sp * gamma_minus(x, p, w, policy)?,
                delta_minus(x, p, w, policy)?,
            );
            Ok(m.scale(pre))
        }
        MMinusRoute::PhiTwoOne => m_minus(z, p, w, q, policy)?.inverse(),
    }
}

/// `M^(-)(z;p,w)` from the `2phi1` closed form
/// `pre [[d, -p^{-1/2} b], [-p^{1/2} c, a]]` with `b(x) = p x c(x; p/w)`,
/// `d(x) = a(x; p/w)` and `pre = (q^2p^2x; p^2,q^4) / ((q^4p^2x; p^2,q^4) (p^2x; p^4))`.
pub fn m_minus(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let x = z.inv();
    let p2 = p * p;
    let q2 = q * q;
    let den = qpoch(p2 * x, p2 * p2, policy)?;
    guard_pole(den, policy.pole_tolerance, "(p^2/z;p^4)")?;
    let pre = poch2_ratio(q2 * p2 * x, q2 * q2 * p2 * x, p2, q2 * q2, policy, "(q^4 p^2/z;p^2,q^4)")? / den;
    let a = a_minus(x, p, w, policy)?;
    let c = c_minus(x, p, w, policy)?;
    let b = p * x * c_minus(x, p, p / w, policy)?;
    let d = a_minus(x, p, p / w, policy)?;
    let sp = sqrt_p(p);
    Ok(mat2(d, -b / sp, -sp * c, a).scale(pre))
}

/// Diagonal factor
/// `Lambda = Theta_{p^2}(z)^{-1} (z, q^2p^2/z; q^4,p^2) / (q^2 z, q^4p^2/z; q^4,p^2)
/// diag(p^{-1/8} w^{1/4} / (w^2;p^2), p^{1/8} w^{-1/4} / (p^2/w^2;p^2))`.
pub fn lambda(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let p2 = p * p;
    let q2 = q * q;
    let q4 = q2 * q2;
    let th = theta(z, p2, policy)?;
    guard_pole(th, policy.pole_tolerance, "Theta_{p^2}(z)")?;
    let num = qpoch2(z, q4, p2, policy)? * qpoch2(q2 * p2 / z, q4, p2, policy)?;
    let den = qpoch2(q2 * z, q4, p2, policy)? * qpoch2(q4 * p2 / z, q4, p2, policy)?;
    guard_pole(den, policy.pole_tolerance, "(q^2 z, q^4 p^2/z; q^4, p^2)")?;
    let d1 = qpoch(w * w, p2, policy)?;
    let d2 = qpoch(p2 / (w * w), p2, policy)?;
    guard_pole(d1, policy.pole_tolerance, "(w^2;p^2)")?;
    guard_pole(d2, policy.pole_tolerance, "(p^2/w^2;p^2)")?;
    let s = num / (den * th);
    Ok(CMatrix::diag(&[
        s * cpow(p, -0.125) * cpow(w, 0.25) / d1,
        s * cpow(p, 0.125) * cpow(w, -0.25) / d2,
    ]))
}

/// Closed-form gauge matrix
/// `S = [[Th(-p^2 z/w^2), p^{-1/2} w Th(-p^2 w^2 z)], [p^{1/2} w Th(-z/w^2), Th(-w^2 z)]] Lambda`
/// with `Th = Theta_{p^4}`.
pub fn s_gauge(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let p2 = p * p;
    let w2 = w * w;
    let th = |x: C64| theta(x, p2 * p2, policy);
    let sp = sqrt_p(p);
    let m = mat2(
        th(-p2 * z / w2)?,
        w / sp * th(-p2 * w2 * z)?,
        sp * w * th(-z / w2)?,
        th(-w2 * z)?,
    );
    Ok(m.matmul(&lambda(z, p, w, q, policy)?))
}

/// `S` through `M^(+)^{-1} M^(-) M^(0)^{-1}` with the hypergeometric
/// routes.
pub fn s_via_m(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let mp = m_plus(z, p, w, q, MPlusRoute::Hypergeometric, policy)?;
    let mm = m_minus(z, p, w, q, policy)?;
    Ok(mp.inverse()?.matmul(&mm).matmul(&m0(p, w).inverse()?))
}

/// `M = M^(0) M^(-)^{-1} M^(+)` with the hypergeometric routes.
pub fn m_assembled(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let mm = m_minus_inv(z, p, w, q, MMinusRoute::PhiZeroOne, policy)?;
    let mp = m_plus(z, p, w, q, MPlusRoute::Hypergeometric, policy)?;
    Ok(m0(p, w).matmul(&mm).matmul(&mp))
}

/// Relative residual of `S(z) M(z) = I`.
pub fn assembly_residual(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let prod = s_gauge(z, p, w, q, policy)?.matmul(&m_assembled(z, p, w, q, policy)?);
    Ok(rel_residual(&prod, &CMatrix::identity(2)))
}

/// Relative residual between the closed form `S` and `s_via_m`.
pub fn s_route_residual(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    Ok(rel_residual(&s_gauge(z, p, w, q, policy)?, &s_via_m(z, p, w, q, policy)?))
}

/// Sum over basis vectors `e_b` of the other leg of `S(z; w q^{wt_b})`
/// tensored with the projector onto `e_b`. `on_first_leg` puts `S` on the
/// first tensor factor.
fn s_shifted(z: C64, p: C64, w: C64, q: C64, on_first_leg: bool, policy: &TruncationPolicy) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(4, 4);
    for (b, &wt) in WEIGHTS.iter().enumerate() {
        let s = s_gauge(z, p, w * cpow(q, wt), q, policy)?;
        let mut proj = CMatrix::zeros(2, 2);
        proj[(b, b)] = re(1.0);
        let term = if on_first_leg { kron(&s, &proj) } else { kron(&proj, &s) };
        out = &out + &term;
    }
    Ok(out)
}

/// Relative residual of
/// `S_1(z1; w) S_2(z2; w q^{h_1}) R^IRF(z1/z2; w) = R^8V(z1, z2) S_2(z2; w) S_1(z1; w q^{h_2})`.
pub fn vertex_irf_residual(z1: C64, z2: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let id = CMatrix::identity(2);
    let lhs = kron(&s_gauge(z1, p, w, q, policy)?, &id)
        .matmul(&s_shifted(z2, p, w, q, false, policy)?)
        .matmul(&r_irf(z1 / z2, p, w, q, policy)?);
    let rhs = r8v(z1, z2, p, q, policy)?
        .matmul(&kron(&id, &s_gauge(z2, p, w, q, policy)?))
        .matmul(&s_shifted(z1, p, w, q, true, policy)?);
    Ok(rel_residual(&lhs, &rhs))
}

/// Column vector `Phi^(eps)(z; w)`: column `0` of `S` for `eps = +1` and
/// column `1` for `eps = -1`.
pub fn phi_vector(eps: i64, z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let s = s_gauge(z, p, w, q, policy)?;
    let col = if eps == 1 { 0 } else { 1 };
    Ok(CMatrix::from_vec(2, 1, vec![s[(0, col)], s[(1, col)]]))
}

/// Largest relative residual over the four height triples `(l, l', m')`
/// with `l = 0` of
/// `R^8V [Phi^(l'-l)(z1; w q^{m'-l'}) (x) Phi^(m'-l')(z2; w)]
/// = sum_m W(l,l',m,m' | z1/z2) Phi^(m'-m)(z1; w) (x) Phi^(m-l)(z2; w q^{m'-m})`,
/// with face weights taken at base parameter `w0 = w q^{-l}`.
pub fn phi_vector_residual(z1: C64, z2: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let r8 = r8v(z1, z2, p, q, policy)?;
    let qp = |s: i64| cpow(q, s as f64);
    let l = 0_i64;
    let w0 = w * qp(-l);
    let mut worst = 0.0_f64;
    for lp in [l + 1, l - 1] {
        for mp in [lp + 1, lp - 1] {
            let lhs = r8.matmul(&kron(
                &phi_vector(lp - l, z1, p, w * qp(mp - lp), q, policy)?,
                &phi_vector(mp - lp, z2, p, w, q, policy)?,
            ));
            let mut rhs = CMatrix::zeros(4, 1);
            for m in [l + 1, l - 1] {
                let h = Heights { l, lp, m, mp };
                if !h.is_admissible() {
                    continue;
                }
                let wt = boltzmann_weight(h, z1 / z2, p, w0, q, policy)?;
                let v = kron(
                    &phi_vector(mp - m, z1, p, w, q, policy)?,
                    &phi_vector(m - l, z2, p, w * qp(mp - m), q, policy)?,
                );
                rhs = &rhs + &v.scale(wt);
            }
            worst = worst.max(rel_residual(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// Residual of
/// `(1 - p^2 z) a(z) = (1 + p^{-2} + (w^2/p^2 + p^2/w^2) p^2 z) a(p^4 z) - p^{-2} (1 - p^4 z) a(p^8 z)`
/// for `a = a^(+)`, relative to `max(|lhs|, 1)`.
pub fn eq_a_plus_residual(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p2 = p * p;
    let p4 = p2 * p2;
    let w2 = w * w;
    let a = |x: C64| a_plus(x, p, w, policy);
    let lhs = (re(1.0) - p2 * z) * a(z)?;
    let rhs = (re(1.0) + p2.inv() + (w2 / p2 + p2 / w2) * p2 * z) * a(p4 * z)?
        - (re(1.0) - p4 * z) * a(p4 * p4 * z)? / p2;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// Residual of `c^(+)(z) = p^2 w/(p^2 + w^2) [(1 + w^2 z/p^4) a(z) - (1 - z/p^2) a(z/p^4)]`,
/// which needs `|z/p^2| < 1`.
pub fn c_plus_from_a_residual(z: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p2 = p * p;
    let p4 = p2 * p2;
    let w2 = w * w;
    let a = |x: C64| a_plus(x, p, w, policy);
    let expect = p2 * w / (p2 + w2) * ((re(1.0) + w2 * z / p4) * a(z)? - (re(1.0) - z / p2) * a(z / p4)?);
    let c = c_plus(z, p, w, policy)?;
    Ok((c - expect).norm() / c.norm().max(1.0))
}

/// Residual of `alpha(x) = (1 + w^{-2}) alpha(p^2 x) + w^{-2} (p^4 x - 1) alpha(p^4 x)`
/// for `alpha = alpha^(-)`.
pub fn eq_a_bis_residual(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p2 = p * p;
    let wi2 = (w * w).inv();
    let al = |y: C64| alpha_minus(y, p, w, policy);
    let lhs = al(x)?;
    let rhs = (re(1.0) + wi2) * al(p2 * x)? + wi2 * (p2 * p2 * x - 1.0) * al(p2 * p2 * x)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// The same three-term relation read with arguments `x/p^2` and `x/p^4`.
pub fn eq_a_bis_inverse_reading_residual(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p2 = p * p;
    let wi2 = (w * w).inv();
    let al = |y: C64| alpha_minus(y, p, w, policy);
    let lhs = al(x)?;
    let rhs = (re(1.0) + wi2) * al(x / p2)? + wi2 * (p2 * p2 * x - 1.0) * al(x / (p2 * p2))?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// Residual of
/// `(1 - p^4 x) a(x) = [1 + w^{-4} + (1 + p^{-2}) p^6 x / w^2] a(p^4 x) - w^{-4} (1 - p^6 x) a(p^8 x)`
/// for `a = a^(-)`.
pub fn eq_a_minus_residual(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p2 = p * p;
    let p4 = p2 * p2;
    let wi2 = (w * w).inv();
    let a = |y: C64| a_minus(y, p, w, policy);
    let lhs = (re(1.0) - p4 * x) * a(x)?;
    let rhs = (re(1.0) + wi2 * wi2 + (re(1.0) + p2.inv()) * p4 * p2 * x * wi2) * a(p4 * x)?
        - wi2 * wi2 * (re(1.0) - p4 * p2 * x) * a(p4 * p4 * x)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// Residual of `beta(x) = w [alpha(x) - alpha(x/p^2)]`.
pub fn beta_relation_residual(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let b = beta_minus(x, p, w, policy)?;
    let expect = w * (alpha_minus(x, p, w, policy)? - alpha_minus(x / (p * p), p, w, policy)?);
    Ok((b - expect).norm() / b.norm().max(1.0))
}

/// Residual of `alpha^(-)(x) = a^(-)(x) (p^4 x; p^4)_inf`, the identity
/// joining the `0phi1` and `2phi1` descriptions.
pub fn phi01_phi21_residual(x: C64, p: C64, w: C64, policy: &TruncationPolicy) -> Result<f64> {
    let p4 = p * p * p * p;
    let al = alpha_minus(x, p, w, policy)?;
    let other = a_minus(x, p, w, policy)? * qpoch(p4 * x, p4, policy)?;
    Ok((al - other).norm() / al.norm().max(1.0))
}

/// Relative residual of `M^(+)(z) = C^[+1](z) C^[+2](z) D M^(+)(p^4 z) D^{-1}`
/// with `D = diag(p, 1/p)`.
pub fn eq_m_plus_residual(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let via = MPlusRoute::Hypergeometric;
    let d = CMatrix::diag(&[p, p.inv()]);
    let shifted = m_plus(p.powi(4) * z, p, w, q, via, policy)?.conjugate_by(&d)?;
    let rhs = c_k_ev(GaugeSign::Plus, 1, z, p, w, q, policy)?
        .matmul(&c_k_ev(GaugeSign::Plus, 2, z, p, w, q, policy)?)
        .matmul(&shifted);
    Ok(rel_residual(&m_plus(z, p, w, q, via, policy)?, &rhs))
}

/// Relative residual of `M^(-)^{-1}(z) = U M^(-)^{-1}(z/p^2) U^{-1} C^[-1](z)`
/// with `U = diag(1/w, w)`.
pub fn eq_m_minus_residual(z: C64, p: C64, w: C64, q: C64, via: MMinusRoute, policy: &TruncationPolicy) -> Result<f64> {
    let u = CMatrix::diag(&[w.inv(), w]);
    let rhs = m_minus_inv(z / (p * p), p, w, q, via, policy)?
        .conjugate_by(&u)?
        .matmul(&c_k_ev(GaugeSign::Minus, 1, z, p, w, q, policy)?);
    Ok(rel_residual(&m_minus_inv(z, p, w, q, via, policy)?, &rhs))
}

/// Gauge matrices at fixed `(p, w, q)` and truncation policy, evaluated as
/// functions of the spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeMatrices {
    pub p: C64,
    pub w: C64,
    pub q: C64,
    pub policy: TruncationPolicy,
}

impl GaugeMatrices {
    pub fn new(p: C64, w: C64, q: C64, policy: TruncationPolicy) -> Self {
        Self { p, w, q, policy }
    }

    pub fn c_plus(&self, z: C64) -> Result<CMatrix> {
        c_pm_ev(GaugeSign::Plus, z, self.p, self.w, self.q, &self.policy)
    }

    pub fn c_minus(&self, z: C64) -> Result<CMatrix> {
        c_pm_ev(GaugeSign::Minus, z, self.p, self.w, self.q, &self.policy)
    }

    pub fn m0(&self) -> CMatrix {
        m0(self.p, self.w)
    }

    pub fn m_plus(&self, z: C64, via: MPlusRoute) -> Result<CMatrix> {
        m_plus(z, self.p, self.w, self.q, via, &self.policy)
    }

    pub fn m_minus_inv(&self, z: C64, via: MMinusRoute) -> Result<CMatrix> {
        m_minus_inv(z, self.p, self.w, self.q, via, &self.policy)
    }

    pub fn s(&self, z: C64) -> Result<CMatrix> {
        s_gauge(z, self.p, self.w, self.q, &self.policy)
    }

    pub fn lambda(&self, z: C64) -> Result<CMatrix> {
        lambda(z, self.p, self.w, self.q, &self.policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::c64;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn c_plus_display_and_determinant() {
        let (z, p, w, q) = (re(0.6), re(0.3), re(0.8), re(0.4));
        let c = c_pm_ev(GaugeSign::Plus, z, p, w, q, &pol()).unwrap();
        let pre = qpoch(q * q * z, q.powi(4), &pol()).unwrap() / qpoch(z, q.powi(4), &pol()).unwrap();
        let inner = c.scale(pre.inv());
        let expect = mat2(re(1.0), -w / p.sqrt(), -p.sqrt() * z / w, re(1.0));
        assert!(rel_residual(&inner, &expect) < 1e-15);
        assert!((inner.determinant() - (re(1.0) - z)).norm() < 1e-15);
        let at_sqrt_p = c_pm_ev(GaugeSign::Plus, z, p, p.sqrt(), q, &pol()).unwrap().scale(pre.inv());
        assert!(rel_residual(&at_sqrt_p, &mat2(re(1.0), re(-1.0), -z, re(1.0))) < 1e-15);
    }

    #[test]
    fn c_k_displays() {
        let (z, p, w, q) = (c64(0.6, 0.1), re(0.3), re(0.8), re(0.4));
        let q4 = q.powi(4);
        let sp = p.sqrt();
        let c2 = c_k_ev(GaugeSign::Plus, 2, z, p, w, q, &pol()).unwrap();
        let pre2 = qpoch(q * q * p * p * z, q4, &pol()).unwrap() / qpoch(p * p * z, q4, &pol()).unwrap();
        let expect2 = mat2(re(1.0), -p * sp / w, -sp * w * z, re(1.0)).scale(pre2);
        assert!(rel_residual(&c2, &expect2) < 1e-14);
        let cm1 = c_k_ev(GaugeSign::Minus, 1, z, p, w, q, &pol()).unwrap();
        let pre1 = qpoch(q4 * p * p / z, q4, &pol()).unwrap() / qpoch(q * q * p * p / z, q4, &pol()).unwrap();
        let expect1 = mat2(re(1.0), -p * sp / (w * z), -sp * w, re(1.0)).scale(pre1);
        assert!(rel_residual(&cm1, &expect1) < 1e-14);
        let c1 = c_k_ev(GaugeSign::Plus, 1, z, p, w, q, &pol()).unwrap();
        assert_eq!(c1, c_pm_ev(GaugeSign::Plus, z, p, w, q, &pol()).unwrap());
    }

    #[test]
    fn c_minus_at_sqrt_p() {
        let (z, p, q) = (re(1.7), re(0.3), re(0.4));
        let q4 = q.powi(4);
        let c = c_pm_ev(GaugeSign::Minus, z, p, p.sqrt(), q, &pol()).unwrap();
        let pre = qpoch(q4 / z, q4, &pol()).unwrap() / qpoch(q * q / z, q4, &pol()).unwrap();
        let expect = mat2(re(1.0), -z.inv(), re(-1.0), re(1.0)).scale(pre);
        assert!(rel_residual(&c, &expect) < 1e-15);
    }

    #[test]
    fn normalizations_at_zero() {
        let (p, w) = (re(0.3), re(0.8));
        assert_eq!(a_plus(re(0.0), p, w, &pol()).unwrap(), re(1.0));
        assert_eq!(alpha_minus(re(0.0), p, w, &pol()).unwrap(), re(1.0));
        let m = m_plus(re(0.0), p, w, re(0.4), MPlusRoute::Hypergeometric, &pol()).unwrap();
        assert!((m[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn m_plus_routes_agree() {
        let (z, p, w, q) = (re(0.6), re(0.3), re(0.8), re(0.4));
        let closed = m_plus(z, p, w, q, MPlusRoute::Hypergeometric, &pol()).unwrap();
        let errs: Vec<f64> = [4, 8, 12, 20]
            .iter()
            .map(|&n| rel_residual(&m_plus(z, p, w, q, MPlusRoute::Product(n), &pol()).unwrap(), &closed))
            .collect();
        assert!(errs.windows(2).all(|e| e[1] < e[0]));
        assert!(errs[3] < 1e-7);
    }

    #[test]
    fn m_minus_routes_agree() {
        let (z, p, w, q) = (re(2.0), re(0.3), re(0.8), re(0.4));
        let closed = m_minus_inv(z, p, w, q, MMinusRoute::PhiZeroOne, &pol()).unwrap();
        let two = m_minus_inv(z, p, w, q, MMinusRoute::PhiTwoOne, &pol()).unwrap();
        assert!(rel_residual(&closed, &two) < 1e-13);
        let errs: Vec<f64> = [8, 16, 32, 120]
            .iter()
            .map(|&n| rel_residual(&m_minus_inv(z, p, w, q, MMinusRoute::Product(n), &pol()).unwrap(), &closed))
            .collect();
        assert!(errs.windows(2).all(|e| e[1] < e[0]));
        assert!(errs[3] < 1e-12);
        let x = re(0.3);
        let a = m_minus_inv(x.inv(), re(0.25), re(0.9), q, MMinusRoute::PhiZeroOne, &pol()).unwrap();
        let b = m_minus_inv(x.inv(), re(0.25), re(0.9), q, MMinusRoute::PhiTwoOne, &pol()).unwrap();
        assert!(rel_residual(&a, &b) < 1e-9);
    }

    #[test]
    fn difference_equations() {
        let (p, w, q) = (re(0.3), re(0.8), re(0.4));
        assert!(eq_a_plus_residual(re(0.4), p, w, &pol()).unwrap() < 1e-10);
        assert!(c_plus_from_a_residual(re(0.004), p, w, &pol()).unwrap() < 1e-10);
        for x in [re(0.5), re(0.3), c64(0.2, 0.3)] {
            assert!(eq_a_bis_residual(x, p, w, &pol()).unwrap() < 1e-10);
            assert!(eq_a_bis_inverse_reading_residual(x, p, w, &pol()).unwrap() > 1e-3);
            assert!(eq_a_minus_residual(x, p, w, &pol()).unwrap() < 1e-10);
            assert!(beta_relation_residual(x, p, w, &pol()).unwrap() < 1e-10);
            assert!(phi01_phi21_residual(x, p, w, &pol()).unwrap() < 1e-10);
        }
        for z in [re(2.0), re(0.7), c64(0.3, 0.2)] {
            assert!(eq_m_plus_residual(z, p, w, q, &pol()).unwrap() < 1e-10);
            assert!(eq_m_minus_residual(z, p, w, q, MMinusRoute::PhiZeroOne, &pol()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn gauge_assembly() {
        let (p, w, q) = (re(0.25), re(0.8), re(0.4));
        for z in [re(0.6), re(2.0), c64(0.3, 0.5)] {
            assert!(assembly_residual(z, p, w, q, &pol()).unwrap() < 1e-10);
            assert!(s_route_residual(z, p, w, q, &pol()).unwrap() < 1e-10);
        }
        let z = re(0.6);
        let s = s_gauge(z, p, w, q, &pol()).unwrap();
        let l = lambda(z, p, w, q, &pol()).unwrap();
        let th = theta(-p * p * z / (w * w), p.powi(4), &pol()).unwrap();
        assert!((s[(0, 0)] - th * l[(0, 0)]).norm() < 1e-15);
        assert!(s.determinant().norm() > 0.0);
    }

    #[test]
    fn vertex_irf_identity() {
        let (p, q, w) = (re(0.2), re(0.4), re(0.9));
        let r = vertex_irf_residual(re(0.5), re(1.1), p, w, q, &pol()).unwrap();
        assert!(r < 1e-10);
        let scaled = vertex_irf_residual(re(0.5 * 1.3), re(1.1 * 1.3), p, w, q, &pol()).unwrap();
        assert!(scaled < 1e-10);
        assert!(phi_vector_residual(re(0.5), re(1.1), p, w, q, &pol()).unwrap() < 1e-10);
    }
}
