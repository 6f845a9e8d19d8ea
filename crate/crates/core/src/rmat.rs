//! R-matrices of rank one at the level of the evaluation representation:
//! the six-vertex matrix (closed form and truncated universal product), the
//! eight-vertex matrix, the dynamical IRF matrix, the twist `F` (closed form
//! and truncated product), face weights, and residuals of the Yang-Baxter
//! and dynamical Yang-Baxter equations.

use serde::{Deserialize, Serialize};

use crate::error::{guard_pole, Error, Result};
use crate::evalrep::{ev_pbw, PbwLabel, Sign};
use crate::qspecial::{
    cpow, phi21, q_number, qpoch, re, scalar_f6v, scalar_phi_twist, scalar_rho8v, theta, TruncationPolicy, C64,
};
use crate::tensor::{embed, exp_diagonal, exp_q_nilpotent, kron, rel_residual, shift_leg, CMatrix, DynamicalOperator};

/// Cartan weights of the two basis vectors of `C^2`.
pub const WEIGHTS: [f64; 2] = [1.0, -1.0];

/// Which R-matrix an `ROperator` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    SixVertex,
    EightVertex,
    Irf,
    TwistF,
}

/// An R-matrix family with fixed parameters, evaluated at spectral
/// parameters `(z1, z2)`. The IRF matrix and the twist depend on `z1/z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ROperator {
    pub model: Model,
    pub q: C64,
    pub p: C64,
    pub w: C64,
    pub policy: TruncationPolicy,
}

impl ROperator {
    pub fn eval(&self, z1: C64, z2: C64) -> Result<CMatrix> {
        match self.model {
            Model::SixVertex => r6v(z1, z2, self.q, &self.policy),
            Model::EightVertex => r8v(z1, z2, self.p, self.q, &self.policy),
            Model::Irf => r_irf(z1 / z2, self.p, self.w, self.q, &self.policy),
            Model::TwistF => f_twist_closed(z1 / z2, self.p, self.w, self.q, &self.policy),
        }
    }
}

fn block4(a: C64, b11: C64, b12: C64, b21: C64, b22: C64, d: C64) -> CMatrix {
    let o = re(0.0);
    CMatrix::from_rows(&[
        vec![a, o, o, o],
        vec![o, b11, b12, o],
        vec![o, b21, b22, o],
        vec![o, o, o, d],
    ])
}

/// Six-vertex R-matrix `q^{1/2} f(z1/z2)` times the trigonometric matrix
/// with `b = (z2 - z1)/(q z2 - z1/q)` and off-diagonal entries
/// `(q - 1/q) z2/(q z2 - z1/q)`, `(q - 1/q) z1/(q z2 - z1/q)`.
pub fn r6v(z1: C64, z2: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let den = q * z2 - z1 / q;
    guard_pole(den, policy.pole_tolerance, "q z2 - z1/q")?;
    let qq = q - q.inv();
    let b = (z2 - z1) / den;
    let one = re(1.0);
    let inner = block4(one, b, qq * z2 / den, qq * z1 / den, b, one);
    let f = scalar_f6v(z1 / z2, q, policy)?.value;
    Ok(inner.scale(cpow(q, 0.5) * f))
}

/// Image of `q^{h (x) h / 2}`: `diag(q^{1/2}, q^{-1/2}, q^{-1/2}, q^{1/2})`.
pub fn k_factor(q: C64) -> CMatrix {
    let a = cpow(q, 0.5);
    CMatrix::diag(&[a, a.inv(), a.inv(), a])
}

/// Truncated universal product for the six-vertex R-matrix: `K` times the
/// ordered real-root q-exponentials for `alpha_1 + n delta` (`n = 0..N`),
/// the exponential of the imaginary-root sum (`n = 1..N`), and the
/// reversed real-root q-exponentials for `alpha_0 + n delta`.
pub fn r6v_universal_truncated(z1: C64, z2: C64, q: C64, n_max: usize) -> Result<CMatrix> {
    let qq = q - q.inv();
    let qinv = q.inv();
    let mut m = k_factor(q);
    for n in 0..=n_max {
        let e = ev_pbw(1, z1, q, PbwLabel::AlphaPlusDelta { i: 1, n }, Sign::E)?;
        let f = ev_pbw(1, z2, q, PbwLabel::AlphaPlusDelta { i: 1, n }, Sign::F)?;
        m = m.matmul(&exp_q_nilpotent(&kron(&e, &f).scale(qq), qinv)?);
    }
    let mut s = CMatrix::zeros(4, 4);
    for n in 1..=n_max {
        let e = ev_pbw(1, z1, q, PbwLabel::Imaginary { n, i: 1 }, Sign::E)?;
        let f = ev_pbw(1, z2, q, PbwLabel::Imaginary { n, i: 1 }, Sign::F)?;
        let c = qq * n as f64 / q_number(2 * n as i64, q);
        s = &s + &kron(&e, &f).scale(c);
    }
    m = m.matmul(&exp_diagonal(&s));
    for n in (0..=n_max).rev() {
        let e = ev_pbw(1, z1, q, PbwLabel::AlphaZeroPlusDelta { n }, Sign::E)?;
        let f = ev_pbw(1, z2, q, PbwLabel::AlphaZeroPlusDelta { n }, Sign::F)?;
        m = m.matmul(&exp_q_nilpotent(&kron(&e, &f).scale(qq), qinv)?);
    }
    Ok(m)
}

/// Eight-vertex R-matrix with `z = z1/z2` and `Th = Theta_{p^4}`:
/// `q^{1/2} rho(z;p) [[a,0,0,d/z1],[0,b,c,0],[0,z c,b,0],[z2 d,0,0,a]]`.
pub fn r8v(z1: C64, z2: C64, p: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let z = z1 / z2;
    let p2 = p * p;
    let q2 = q * q;
    let p4 = p2 * p2;
    let th = |x: C64| theta(x, p4, policy);
    let th_p2 = th(p2)?;
    let den_a = th_p2 * th(p2 * z / q2)?;
    let den_b = th_p2 * th(z / q2)?;
    guard_pole(den_a, policy.pole_tolerance, "Theta(p^2) Theta(p^2 q^-2 z)")?;
    guard_pole(den_b, policy.pole_tolerance, "Theta(p^2) Theta(q^-2 z)")?;
    let th_z = th(z)?;
    let th_p2z = th(p2 * z)?;
    let a = th_p2z * th(p2 * q2)? / den_a;
    let b = th_z * th(p2 * q2)? / (q * den_b);
    let c = th_p2z * th(q2.inv())? / den_b;
    let d = p * th_z * th(q2)? / (q * den_a);
    let o = re(0.0);
    let inner = CMatrix::from_rows(&[
        vec![a, o, o, d / z1],
        vec![o, b, c, o],
        vec![o, z * c, b, o],
        vec![z2 * d, o, o, a],
    ]);
    let rho = scalar_rho8v(z, p, q, policy)?.value;
    Ok(inner.scale(cpow(q, 0.5) * rho))
}

/// Entry `b^IRF(z;p,w)`.
pub fn b_irf(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let q2 = q * q;
    let u = p2 / (w * w);
    let den_poch = qpoch(u, p2, policy)?;
    guard_pole(den_poch, policy.pole_tolerance, "(p^2/w^2; p^2)")?;
    let den_th = theta(z / q2, p2, policy)?;
    guard_pole(den_th, policy.pole_tolerance, "Theta_{p^2}(q^-2 z)")?;
    let poch = qpoch(q2 * u, p2, policy)? * qpoch(u / q2, p2, policy)? / (den_poch * den_poch);
    Ok(poch * theta(z, p2, policy)? / (q * den_th))
}

/// Entry `c^IRF(z;p,w)`.
pub fn c_irf(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let p2 = p * p;
    let q2 = q * q;
    let den = theta(w * w, p2, policy)? * theta(z / q2, p2, policy)?;
    guard_pole(den, policy.pole_tolerance, "Theta_{p^2}(w^2) Theta_{p^2}(q^-2 z)")?;
    Ok(theta(q2.inv(), p2, policy)? * theta(w * w * z, p2, policy)? / den)
}

/// Dynamical IRF R-matrix
/// `q^{1/2} rho(z;p) [[1,0,0,0],[0,b(w),c(w),0],[0,z c(p/w),b(p/w),0],[0,0,0,1]]`.
pub fn r_irf(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let wd = p / w;
    let inner = block4(
        re(1.0),
        b_irf(z, p, w, q, policy)?,
        c_irf(z, p, w, q, policy)?,
        z * c_irf(z, p, wd, q, policy)?,
        b_irf(z, p, wd, q, policy)?,
        re(1.0),
    );
    let rho = scalar_rho8v(z, p, q, policy)?.value;
    Ok(inner.scale(cpow(q, 0.5) * rho))
}

/// Relative residual of `R12 R13 R23 = R23 R13 R12` for `R(z_i, z_j)`.
pub fn qybe_residual(r: impl Fn(C64, C64) -> Result<CMatrix>, z1: C64, z2: C64, z3: C64) -> Result<f64> {
    let r12 = embed(&r(z1, z2)?, (1, 2), 3, 2)?;
    let r13 = embed(&r(z1, z3)?, (1, 3), 3, 2)?;
    let r23 = embed(&r(z2, z3)?, (2, 3), 3, 2)?;
    let lhs = r12.matmul(&r13).matmul(&r23);
    let rhs = r23.matmul(&r13).matmul(&r12);
    Ok(rel_residual(&lhs, &rhs))
}

/// Relative residual of the dynamical Yang-Baxter equation
/// `R12(w) R13(w q^{h2}) R23(w) = R23(w q^{h1}) R13(w) R12(w q^{h3})`,
/// where `r(z, w)` is evaluated at the ratios `z1/z2`, `z1/z3`, `z2/z3`.
pub fn qdybe_residual(
    r: impl Fn(C64, C64) -> Result<CMatrix> + Sync,
    z1: C64,
    z2: C64,
    z3: C64,
    w: C64,
    q: C64,
) -> Result<f64> {
    let op = |z: C64| {
        let r = &r;
        DynamicalOperator::new(move |w| r(z, w).unwrap_or_else(|_| CMatrix::from_vec(4, 4, vec![C64::new(f64::NAN, 0.0); 16])), WEIGHTS.to_vec())
    };
    let (o12, o13, o23) = (op(z1 / z2), op(z1 / z3), op(z2 / z3));
    let lhs = embed(&r(z1 / z2, w)?, (1, 2), 3, 2)?
        .matmul(&shift_leg(&o13, 2, (1, 3), 3, w, q)?)
        .matmul(&embed(&r(z2 / z3, w)?, (2, 3), 3, 2)?);
    let rhs = shift_leg(&o23, 1, (2, 3), 3, w, q)?
        .matmul(&embed(&r(z1 / z3, w)?, (1, 3), 3, 2)?)
        .matmul(&shift_leg(&o12, 3, (1, 2), 3, w, q)?);
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::PoleHit { what: "shifted R-matrix".into(), magnitude: 0.0 });
    }
    Ok(rel_residual(&lhs, &rhs))
}

/// Series `X11(z;w) = 2phi1(q^2, q^2 p^2/w^2; p^2/w^2; p^2; p^2 z/q^2)`.
pub fn x11(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let (p2, q2) = (p * p, q * q);
    let u = p2 / (w * w);
    phi21(q2, q2 * u, u, p2, p2 * z / q2, policy)
}

/// Series `X12(z;w) = -(q - 1/q)/(1 - w^-2) 2phi1(q^2 p^2, q^2 w^2; p^2 w^2; p^2; p^2 z/q^2)`.
pub fn x12(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<C64> {
    let (p2, q2, w2) = (p * p, q * q, w * w);
    let den = re(1.0) - w2.inv();
    guard_pole(den, policy.pole_tolerance, "1 - w^-2")?;
    Ok(-(q - q.inv()) / den * phi21(q2 * p2, q2 * w2, p2 * w2, p2, p2 * z / q2, policy)?)
}

/// Closed form of the twist
/// `phi(z;p) [[1,0,0,0],[0,X11(w),X12(w),0],[0,z X12(p/w),X11(p/w),0],[0,0,0,1]]`.
pub fn f_twist_closed(z: C64, p: C64, w: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let wd = p / w;
    let inner = block4(
        re(1.0),
        x11(z, p, w, q, policy)?,
        x12(z, p, w, q, policy)?,
        z * x12(z, p, wd, q, policy)?,
        x11(z, p, wd, q, policy)?,
        re(1.0),
    );
    Ok(inner.scale(scalar_phi_twist(z, p, q, policy)?.value))
}

/// Truncated product `prod_{k=1}^{N} D_k^{-1} Rhat(z1, p^{-2k} z2) D_k`
/// (factor `k = 1` leftmost), with `Rhat = K^{-1} R^6V` and
/// `D_k = 1 (x) diag(w, 1/w)^k`.
pub fn f_twist_product(
    z1: C64,
    z2: C64,
    p: C64,
    w: C64,
    q: C64,
    n_factors: usize,
    policy: &TruncationPolicy,
) -> Result<CMatrix> {
    let k_inv = k_factor(q).inverse()?;
    let mut m = CMatrix::identity(4);
    for k in 1..=n_factors {
        let wk = w.powi(k as i32);
        let d = kron(&CMatrix::identity(2), &CMatrix::diag(&[wk, wk.inv()]));
        let rhat = k_inv.matmul(&r6v(z1, z2 * p.powi(-2 * k as i32), q, policy)?);
        m = m.matmul(&d.inverse()?.matmul(&rhat).matmul(&d));
    }
    Ok(m)
}

/// `F21^{-1} R^6V(z1, z2) F12` with `F12 = f_twist_product(z1, z2)` and
/// `F21 = P f_twist_product(z2, z1) P`.
pub fn r_irf_from_twist(
    z1: C64,
    z2: C64,
    p: C64,
    w: C64,
    q: C64,
    n_factors: usize,
    policy: &TruncationPolicy,
) -> Result<CMatrix> {
    let swap = CMatrix::swap(2);
    let f12 = f_twist_product(z1, z2, p, w, q, n_factors, policy)?;
    let f21 = swap.matmul(&f_twist_product(z2, z1, p, w, q, n_factors, policy)?).matmul(&swap);
    Ok(f21.inverse()?.matmul(&r6v(z1, z2, q, policy)?).matmul(&f12))
}

/// `h (x) 1 + 1 (x) h` on `C^2 (x) C^2`.
pub fn total_weight() -> CMatrix {
    CMatrix::diag(&[re(2.0), re(0.0), re(0.0), re(-2.0)])
}

/// Heights of a face in the order `(l, l', m, m')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heights {
    pub l: i64,
    pub lp: i64,
    pub m: i64,
    pub mp: i64,
}

/// A face weight together with its heights and spectral ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannWeight {
    pub heights: Heights,
    pub z: C64,
    pub value: C64,
}

impl Heights {
    /// Unit steps along `l - l'`, `l' - m'`, `m' - m`, `m - l`.
    pub fn is_admissible(&self) -> bool {
        (self.l - self.lp).abs() == 1
            && (self.lp - self.mp).abs() == 1
            && (self.mp - self.m).abs() == 1
            && (self.m - self.l).abs() == 1
    }

    /// Row and column of the IRF matrix holding this weight: the row is
    /// `(i1, i2)` with `eps_1 = m' - m`, `eps_2 = m - l`, the column is
    /// `(j1, j2)` with `eps'_1 = l' - l`, `eps'_2 = m' - l'`, and
    /// `eps = 3 - 2 i`.
    pub fn matrix_position(&self) -> (usize, usize) {
        let idx = |eps: i64| if eps == 1 { 0 } else { 1 };
        let row = 2 * idx(self.mp - self.m) + idx(self.m - self.l);
        let col = 2 * idx(self.lp - self.l) + idx(self.mp - self.lp);
        (row, col)
    }
}

/// Face weight `W(l, l', m, m' | z)`, the matrix element of
/// `R^IRF(z; p, w0 q^l)` at `matrix_position`.
pub fn boltzmann_weight(
    heights: Heights,
    z: C64,
    p: C64,
    w0: C64,
    q: C64,
    policy: &TruncationPolicy,
) -> Result<C64> {
    if !heights.is_admissible() {
        let Heights { l, lp, m, mp } = heights;
        return Err(Error::InadmissibleHeights { l, lp, m, mp });
    }
    let (row, col) = heights.matrix_position();
    let r = r_irf(z, p, w0 * q.powi(heights.l as i32), q, policy)?;
    Ok(r[(row, col)])
}

/// All admissible faces with `l` in `lo..=hi`.
pub fn admissible_faces(lo: i64, hi: i64) -> Vec<Heights> {
    let mut out = Vec::new();
    for l in lo..=hi {
        for dl in [1, -1] {
            for dm in [1, -1] {
                for dmp in [1, -1] {
                    let h = Heights { l, lp: l + dl, m: l + dm, mp: l + dm + dmp };
                    if h.is_admissible() {
                        out.push(h);
                    }
                }
            }
        }
    }
    out
}

/// IRF matrix at dynamical parameter `w0 q^s` assembled from face weights
/// with base height `s`.
pub fn irf_from_weights(s: i64, z: C64, p: C64, w0: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(4, 4);
    for h in admissible_faces(s, s) {
        let (row, col) = h.matrix_position();
        m[(row, col)] = boltzmann_weight(h, z, p, w0, q, policy)?;
    }
    Ok(m)
}

/// Star-triangle residual: the dynamical Yang-Baxter equation with every
/// matrix element replaced by a face weight, over base heights `s` in
/// `heights`, maximized over `s`.
#[allow(clippy::too_many_arguments)]
pub fn star_triangle_residual(
    z1: C64,
    z2: C64,
    z3: C64,
    p: C64,
    w0: C64,
    q: C64,
    heights: std::ops::RangeInclusive<i64>,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in heights {
        let w = w0 * q.powi(s as i32);
        let from_weights = |z: C64, wv: C64| {
            let shift = ((wv / w).ln() / q.ln()).re.round() as i64;
            irf_from_weights(s + shift, z, p, w0, q, policy)
        };
        worst = worst.max(qdybe_residual(from_weights, z1, z2, z3, w, q)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::c64;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn r6v_examples() {
        let q = re(0.45);
        let m = r6v(re(0.3), re(0.7), q, &pol()).unwrap();
        let s = cpow(q, 0.5) * scalar_f6v(re(0.3 / 0.7), q, &pol()).unwrap().value;
        assert!((m[(0, 0)] - s).norm() < 1e-15 && (m[(3, 3)] - s).norm() < 1e-15);
        let same = r6v(re(0.8), re(0.8), q, &pol()).unwrap();
        assert!(same.max_abs() < 1e-15);
        let qyb = qybe_residual(|a, b| r6v(a, b, q, &pol()), re(0.3), re(0.7), re(1.1)).unwrap();
        assert!(qyb < 1e-12);
    }

    #[test]
    fn r6v_inner_at_equal_arguments_is_swap() {
        let q = re(0.45);
        let z = re(0.8);
        let den = q * z - z / q;
        let qq = q - q.inv();
        let inner = block4(re(1.0), re(0.0), qq * z / den, qq * z / den, re(0.0), re(1.0));
        assert!(rel_residual(&inner, &CMatrix::swap(2)) < 1e-15);
    }

    #[test]
    fn universal_product_converges() {
        let q = re(0.6);
        let exact = r6v(re(0.2), re(1.0), q, &pol()).unwrap();
        let mut last = f64::INFINITY;
        for n in 1..=8 {
            let e = rel_residual(&r6v_universal_truncated(re(0.2), re(1.0), q, n).unwrap(), &exact);
            assert!(e < last, "n={n}");
            last = e;
        }
        assert!(rel_residual(&k_factor(q), &CMatrix::diag(&[cpow(q, 0.5), cpow(q, -0.5), cpow(q, -0.5), cpow(q, 0.5)])) < 1e-15);
    }

    #[test]
    fn r8v_examples() {
        let (p, q) = (re(0.2), re(0.45));
        let m = r8v(re(0.4), re(0.9), p, q, &pol()).unwrap();
        assert_eq!(m.nonzero_count(1e-300), 8);
        let res = qybe_residual(|a, b| r8v(a, b, p, q, &pol()), re(0.4), re(0.9), re(1.3)).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn irf_examples() {
        let (p, q, w) = (re(0.2), re(0.4), re(0.8));
        let m = r_irf(re(0.6), p, w, q, &pol()).unwrap();
        assert!(m.commutator(&total_weight()).max_abs() == 0.0);
        let res = qdybe_residual(|z, w| r_irf(z, p, w, q, &pol()), re(0.5), re(0.9), re(1.4), w, q).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn twist_examples() {
        let (p, q, w) = (re(0.3), re(0.4), re(0.8));
        let f = f_twist_closed(re(0.5), p, w, q, &pol()).unwrap();
        assert!(f.commutator(&total_weight()).max_abs() < 1e-15);
        assert_eq!(x11(re(0.0), p, w, q, &pol()).unwrap(), re(1.0));
        let errs: Vec<f64> = (1..=6)
            .map(|n| rel_residual(&f_twist_product(re(0.5), re(1.0), p, w, q, n, &pol()).unwrap(), &f))
            .collect();
        assert!(errs.windows(2).all(|e| e[1] < e[0]));
    }

    #[test]
    fn twist_reproduces_irf_with_many_factors() {
        let (p, q, w) = (re(0.2), re(0.4), re(0.8));
        let from_twist = r_irf_from_twist(re(0.5), re(1.0), p, w, q, 60, &pol()).unwrap();
        let direct = r_irf(re(0.5), p, w, q, &pol()).unwrap();
        assert!(rel_residual(&from_twist, &direct) < 1e-10);
    }

    #[test]
    fn weights() {
        let (p, q, w0) = (re(0.2), re(0.4), re(0.9));
        let bad = Heights { l: 0, lp: 2, m: 1, mp: 1 };
        assert!(matches!(boltzmann_weight(bad, re(0.5), p, w0, q, &pol()), Err(Error::InadmissibleHeights { .. })));
        let z = c64(0.5, 0.1);
        let corner = cpow(q, 0.5) * scalar_rho8v(z, p, q, &pol()).unwrap().value;
        for s in -2..=2 {
            let h = Heights { l: s, lp: s + 1, m: s + 1, mp: s + 2 };
            assert!((boltzmann_weight(h, z, p, w0, q, &pol()).unwrap() - corner).norm() < 1e-14);
        }
        assert_eq!(admissible_faces(0, 0).len(), 6);
        let st = star_triangle_residual(re(0.5), re(0.9), re(1.4), p, w0, q, -2..=2, &pol()).unwrap();
        assert!(st < 1e-12);
    }
}
