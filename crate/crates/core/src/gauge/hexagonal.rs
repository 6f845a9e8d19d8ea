//! Hexagonal relation in the evaluation representation of rank `r`: the
//! Gauss factors `C^+ = Z^+ Y^+ X^+` and `C^- = X^- Y^- Z^-` assembled from
//! PBW root vectors and the Cartan elements `zeta_i`, their closed-form
//! inverses `f_q(z) (1 + omega_z)` and `f_{q^-1}(z^-1) (1 + omega_z^-1)`,
//! and the adjoint action of `C^{+ -1} C^-` on generator images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalrep::{ev_cartan_zeta_ext, ev_generator, ev_pbw, omega_z, q_power_diag, Generator, PbwLabel, Sign};
use crate::qspecial::{cpow, exp_qratio_product, ipow, q_number, re, scalar_fq_hexagon, scalar_fq_hexagon_inverse, TruncationPolicy, C64};
use crate::tensor::{exp_q_nilpotent, rel_residual, CMatrix};

/// Character values on the simple roots `0..=r` of the positive and
/// negative nilpotent parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterChoice {
    pub r: usize,
    pub a_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
}

impl CharacterChoice {
    /// The solution of the hexagonal relation:
    /// `a^- = q^{1/(r+1)} / (q - 1/q)` and `a^+ = -q^{1 - 1/(r+1)} / (q - 1/q)`
    /// on every simple root.
    pub fn hexagonal(r: usize, q: C64) -> Self {
        let m = (r + 1) as f64;
        let qq = q - q.inv();
        let am = cpow(q, 1.0 / m) / qq;
        let ap = -cpow(q, 1.0 - 1.0 / m) / qq;
        Self { r, a_plus: vec![ap; r + 1], a_minus: vec![am; r + 1] }
    }

    /// Largest `|a^+_i a^-_i + q/(q - 1/q)^2|` over the simple roots.
    pub fn product_residual(&self, q: C64) -> f64 {
        let target = -q / ((q - q.inv()) * (q - q.inv()));
        self.a_plus
            .iter()
            .zip(&self.a_minus)
            .map(|(a, b)| (a * b - target).norm())
            .fold(0.0, f64::max)
    }

    fn plus_over(&self, roots: std::ops::Range<usize>) -> C64 {
        roots.map(|k| self.a_plus[k]).product()
    }

    fn minus_over(&self, roots: std::ops::Range<usize>) -> C64 {
        roots.map(|k| self.a_minus[k]).product()
    }
}

/// How the diagonal imaginary-root factor `Y^+-` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YEvaluation {
    /// Infinite-product form, valid for every `z` off its poles.
    Resummed,
    /// Exponential of the truncated imaginary-root series; converges for
    /// `|z| < 1` on the plus side and `|z| > 1` on the minus side.
    Series,
}

/// The three Gauss factors of `C^+` (ordered `z, y, x`) or `C^-` (ordered
/// `x, y, z`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussFactors {
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

fn zeta(r: usize, i: usize) -> Result<CMatrix> {
    ev_cartan_zeta_ext(r, i)
}

/// `(q - 1/q)`.
fn qq(q: C64) -> C64 {
    q - q.inv()
}

fn resummed_y(r: usize, z: C64, q: C64, plus: bool, policy: &TruncationPolicy) -> Result<CMatrix> {
    let n = r + 1;
    let m = n as i64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = vec![re(1.0); n];
    for j in 1..=r {
        let jj = j as i64;
        let (x, x_next) = if plus {
            let x = sign * ipow(q, m - jj) * z;
            (x, x / (q * q))
        } else {
            let x = sign * ipow(q, jj - m) / z;
            (x, x * q * q)
        };
        d[j - 1] /= exp_qratio_product(x, jj, m, q, policy)?;
        d[j] *= exp_qratio_product(x_next, jj, m, q, policy)?;
    }
    Ok(CMatrix::diag(&d))
}

fn series_y(r: usize, z: C64, q: C64, chars: &CharacterChoice, plus: bool, policy: &TruncationPolicy) -> Result<CMatrix> {
    let n = r + 1;
    let m = n as i64;
    let rr = r as i64;
    let mut s = CMatrix::zeros(n, n);
    let a = if plus { chars.plus_over(0..n) } else { chars.minus_over(0..n) };
    let mut streak = 0;
    let limit = policy.limit();
    for k in 1..=limit {
        let kk = k as i64;
        let sgn = if (kk * rr) % 2 == 0 { 1.0 } else { -1.0 };
        let lead = if plus {
            sgn * ipow(q, -kk * m) * ipow(re(1.0) - q * q, kk * m)
        } else {
            sgn * ipow(re(1.0) - ipow(q, -2), kk * m)
        } * ipow(a, kk)
            / q_number(kk * m, q);
        let mut inc = CMatrix::zeros(n, n);
        for j in 1..=r {
            let label = PbwLabel::Imaginary { n: k, i: j };
            let g = ev_pbw(r, z, q, label, if plus { Sign::E } else { Sign::F })?;
            let c = lead * q_number(kk * j as i64, q) / q_number(kk, q);
            inc = &inc + &g.scale(c);
        }
        s = &s + &inc;
        if !s.is_finite() {
            return Err(Error::OutsideConvergence { modulus: z.norm() });
        }
        if inc.max_abs() <= policy.tail_tolerance * s.max_abs().max(1.0) {
            streak += 1;
            if streak >= 3 {
                return Ok(CMatrix::diag(&s.diagonal().iter().map(|x| x.exp()).collect::<Vec<_>>()));
            }
        } else {
            streak = 0;
        }
    }
    Err(Error::CapExceeded { limit })
}

/// Gauss factors of `ev_z(C^-) = X^- Y^- Z^-` with
/// `X^- = prod_{i=1..r} exp_q(-(q - 1/q) f_{delta - alpha_{i,r+1}} q^{zeta_i} (1 - q^{-2})^{i-1} a^-_{0..i-1})`
/// and `Z^- = prod_{i=r..1} exp_q(-(q - 1/q) f_{alpha_i} q^{zeta_{i+1} - zeta_i} a^-_i)`.
pub fn c_minus_factors(
    r: usize,
    z: C64,
    q: C64,
    chars: &CharacterChoice,
    y: YEvaluation,
    policy: &TruncationPolicy,
) -> Result<GaussFactors> {
    let n = r + 1;
    let mut x = CMatrix::identity(n);
    for i in 1..=r {
        let f = ev_pbw(r, z, q, PbwLabel::DeltaMinusAlpha { i, j: n }, Sign::F)?;
        let coeff = -qq(q) * ipow(re(1.0) - ipow(q, -2), i as i64 - 1) * chars.minus_over(0..i);
        let arg = f.matmul(&q_power_diag(&zeta(r, i)?, q)).scale(coeff);
        x = x.matmul(&exp_q_nilpotent(&arg, q)?);
    }
    let mut zf = CMatrix::identity(n);
    for i in (1..=r).rev() {
        let f = ev_pbw(r, z, q, PbwLabel::Alpha { i, j: i + 1 }, Sign::F)?;
        let h = &zeta(r, i + 1)? - &zeta(r, i)?;
        let arg = f.matmul(&q_power_diag(&h, q)).scale(-qq(q) * chars.a_minus[i]);
        zf = zf.matmul(&exp_q_nilpotent(&arg, q)?);
    }
    let ym = match y {
        YEvaluation::Resummed => resummed_y(r, z, q, false, policy)?,
        YEvaluation::Series => series_y(r, z, q, chars, false, policy)?,
    };
    Ok(GaussFactors { x, y: ym, z: zf })
}

/// Gauss factors of `ev_z(C^+) = Z^+ Y^+ X^+` with base `1/q` in the
/// q-exponentials:
/// `Z^+ = prod_{i=1..r} exp((q - 1/q) q^{zeta_{i-1} - zeta_i} e_{alpha_i} a^+_i)` and
/// `X^+ = prod_{i=r..1} exp((q - 1/q) q^{zeta_r - zeta_{i-1}} q^{1-i} e_{delta - alpha_{i,r+1}} (1 - q^2)^{i-1} a^+_{0..i-1})`.
pub fn c_plus_factors(
    r: usize,
    z: C64,
    q: C64,
    chars: &CharacterChoice,
    y: YEvaluation,
    policy: &TruncationPolicy,
) -> Result<GaussFactors> {
    let n = r + 1;
    let qi = q.inv();
    let mut zf = CMatrix::identity(n);
    for i in 1..=r {
        let e = ev_pbw(r, z, q, PbwLabel::Alpha { i, j: i + 1 }, Sign::E)?;
        let h = &zeta(r, i - 1)? - &zeta(r, i)?;
        let arg = q_power_diag(&h, q).matmul(&e).scale(qq(q) * chars.a_plus[i]);
        zf = zf.matmul(&exp_q_nilpotent(&arg, qi)?);
    }
    let mut x = CMatrix::identity(n);
    for i in (1..=r).rev() {
        let e = ev_pbw(r, z, q, PbwLabel::DeltaMinusAlpha { i, j: n }, Sign::E)?;
        let h = &zeta(r, r)? - &zeta(r, i - 1)?;
        let coeff = qq(q) * ipow(q, 1 - i as i64) * ipow(re(1.0) - q * q, i as i64 - 1) * chars.plus_over(0..i);
        let arg = q_power_diag(&h, q).matmul(&e).scale(coeff);
        x = x.matmul(&exp_q_nilpotent(&arg, qi)?);
    }
    let yp = match y {
        YEvaluation::Resummed => resummed_y(r, z, q, true, policy)?,
        YEvaluation::Series => series_y(r, z, q, chars, true, policy)?,
    };
    Ok(GaussFactors { x, y: yp, z: zf })
}

/// `ev_z(C^-) = X^- Y^- Z^-` with the hexagonal character choice.
pub fn c_minus_ev(r: usize, z: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let f = c_minus_factors(r, z, q, &CharacterChoice::hexagonal(r, q), YEvaluation::Resummed, policy)?;
    Ok(f.x.matmul(&f.y).matmul(&f.z))
}

/// `ev_z(C^+) = Z^+ Y^+ X^+` with the hexagonal character choice.
pub fn c_plus_ev(r: usize, z: C64, q: C64, policy: &TruncationPolicy) -> Result<CMatrix> {
    let f = c_plus_factors(r, z, q, &CharacterChoice::hexagonal(r, q), YEvaluation::Resummed, policy)?;
    Ok(f.z.matmul(&f.y).matmul(&f.x))
}

/// Residuals of the hexagonal-relation checks at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HexagonalResiduals {
    /// `ev(C^+)^{-1}` against `f_q(z) (1 + omega_z)`.
    pub plus_inverse: f64,
    /// `ev(C^-)^{-1}` against `f_{q^-1}(z^-1) (1 + omega_z^-1)`.
    pub minus_inverse: f64,
    /// `ev(C^+)^{-1} ev(C^-)` against `(f_q(z) / f_{q^-1}(z^-1)) omega_z`.
    pub ratio: f64,
    /// Largest difference of `Ad_{C^{+ -1} C^-}` and `Ad_{omega_z}` on the
    /// images of `e_i, f_i, h_i`.
    pub adjoint: f64,
}

impl HexagonalResiduals {
    pub fn max(&self) -> f64 {
        self.plus_inverse.max(self.minus_inverse).max(self.ratio).max(self.adjoint)
    }
}

/// Compares the product formulas for `ev_z(C^+-)` with their closed-form
/// inverses and checks `Ad_{ev(C^{+ -1} C^-)} = Ad_{omega_z}` on generators.
pub fn hexagonal_check(r: usize, z: C64, q: C64, policy: &TruncationPolicy) -> Result<HexagonalResiduals> {
    if r == 0 {
        return Err(Error::BadIndex { index: 0, rank: 0 });
    }
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument { what: "z" });
    }
    let n = r + 1;
    let id = CMatrix::identity(n);
    let om = omega_z(r, z);
    let om_inv = om.inverse()?;
    let cp = c_plus_ev(r, z, q, policy)?;
    let cm = c_minus_ev(r, z, q, policy)?;
    let cp_inv = cp.inverse()?;
    let fq = scalar_fq_hexagon(z, q, r, policy)?.value;
    let fqi = scalar_fq_hexagon_inverse(z, q, r, policy)?;
    let plus_inverse = rel_residual(&cp_inv, &(&id + &om).scale(fq));
    let minus_inverse = rel_residual(&cm.inverse()?, &(&id + &om_inv).scale(fqi));
    let u = cp_inv.matmul(&cm);
    let ratio = rel_residual(&u, &om.scale(fq / fqi));
    let u_inv = u.inverse()?;
    let mut adjoint = 0.0_f64;
    for i in 0..=r {
        for g in [Generator::E(i), Generator::F(i), Generator::H(i)] {
            let x = ev_generator(r, z, g)?;
            let a = u.matmul(&x).matmul(&u_inv);
            let b = om.matmul(&x).matmul(&om_inv);
            adjoint = adjoint.max(rel_residual(&a, &b));
        }
    }
    Ok(HexagonalResiduals { plus_inverse, minus_inverse, ratio, adjoint })
}

/// Largest entry difference between the series and product forms of
/// `Y^+(z)` (needs `|z| < 1`) and `Y^-(1/z)` at the same `q`.
pub fn y_series_residual(r: usize, z: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let chars = CharacterChoice::hexagonal(r, q);
    let dp = (&series_y(r, z, q, &chars, true, policy)? - &resummed_y(r, z, q, true, policy)?).max_abs();
    let zi = z.inv();
    let dm = (&series_y(r, zi, q, &chars, false, policy)? - &resummed_y(r, zi, q, false, policy)?).max_abs();
    Ok(dp.max(dm))
}

/// Factor-wise check of the `*` exchange of the two Gauss factors: the
/// factors of `ev_z(C^+)` at `q` against the transposes of the factors of
/// `ev_{1/z}(C^-)` at `1/q`, both with the series form of `Y` and their
/// own hexagonal character choices. Needs `|z| < 1`.
pub fn star_exchange_residual(r: usize, z: C64, q: C64, policy: &TruncationPolicy) -> Result<f64> {
    let qi = q.inv();
    let plus = c_plus_factors(r, z, q, &CharacterChoice::hexagonal(r, q), YEvaluation::Series, policy)?;
    let minus = c_minus_factors(r, z.inv(), qi, &CharacterChoice::hexagonal(r, qi), YEvaluation::Series, policy)?;
    let dz = rel_residual(&plus.z, &minus.z.transpose());
    let dy = rel_residual(&plus.y, &minus.y.transpose());
    let dx = rel_residual(&plus.x, &minus.x.transpose());
    Ok(dz.max(dy).max(dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::c64;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn character_product() {
        for r in 1..=4 {
            let q = re(0.37);
            assert!(CharacterChoice::hexagonal(r, q).product_residual(q) < 1e-15);
            let chosen = CharacterChoice::hexagonal(r, q).a_minus[0] * qq(q) * cpow(q, -1.0 / (r as f64 + 1.0));
            assert!((chosen - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_for_small_ranks() {
        for r in 1..=3 {
            for (q, z) in [(re(0.4), re(0.7)), (re(0.3), c64(1.3, 0.4)), (re(0.55), c64(-0.9, 0.2))] {
                let res = hexagonal_check(r, z, q, &pol()).unwrap();
                assert!(res.max() < 1e-12, "r={r} z={z} {res:?}");
            }
        }
    }

    #[test]
    fn y_series_matches_products() {
        for r in 1..=3 {
            assert!(y_series_residual(r, re(0.6), re(0.5), &pol()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn star_exchange() {
        for r in 1..=3 {
            assert!(star_exchange_residual(r, re(0.6), re(0.5), &pol()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(hexagonal_check(0, re(0.5), re(0.4), &pol()), Err(Error::BadIndex { .. })));
        assert!(matches!(hexagonal_check(2, re(0.0), re(0.4), &pol()), Err(Error::ZeroArgument { .. })));
    }
}
