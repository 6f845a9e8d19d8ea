//! Convergence studies: residual of a truncated product against its
//! closed form as the number of factors grows, with a least-squares fit of
//! the geometric rate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{m_minus_inv, m_plus, MMinusRoute, MPlusRoute};
use crate::qspecial::{re, TruncationPolicy, C64};
use crate::rmat::{f_twist_closed, f_twist_product, r6v, r6v_universal_truncated};
use crate::tensor::rel_residual;

/// Truncated product under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergeTarget {
    /// Twist product against its `2phi1` closed form.
    Twist,
    /// `M^(+)` product against the hypergeometric form.
    MPlus,
    /// `M^(-)^{-1}` product against the `0phi1` form.
    MMinus,
    /// Universal six-vertex product against the closed-form matrix.
    R6vUniversal,
}

impl ConvergeTarget {
    pub fn name(self) -> &'static str {
        match self {
            ConvergeTarget::Twist => "twist",
            ConvergeTarget::MPlus => "m_plus",
            ConvergeTarget::MMinus => "m_minus",
            ConvergeTarget::R6vUniversal => "r6v_universal",
        }
    }
}

impl fmt::Display for ConvergeTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvergeTarget {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [ConvergeTarget::Twist, ConvergeTarget::MPlus, ConvergeTarget::MMinus, ConvergeTarget::R6vUniversal]
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown convergence target '{s}'"))
    }
}

/// Parameters of a convergence study. `z` is the spectral ratio `z1/z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergeParams {
    pub z: C64,
    pub p: C64,
    pub w: C64,
    pub q: C64,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        Self { z: re(0.5), p: re(0.3), w: re(0.8), q: re(0.4) }
    }
}

/// Residual at one truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub n: usize,
    pub residual: f64,
}

/// Residuals over a range of truncation orders with their fitted rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeStudy {
    pub target: ConvergeTarget,
    pub params: ConvergeParams,
    pub rows: Vec<ConvergeRow>,
    /// Residuals strictly decrease along the rows.
    pub monotone: bool,
    /// Fitted ratio `rho` of `residual ~ C rho^N`; absent with fewer than
    /// two usable rows.
    pub rate: Option<f64>,
}

/// Residual of the truncated product with `n` factors. The universal
/// six-vertex product converges only for `|z| < |q|^2`.
pub fn converge_residual(target: ConvergeTarget, n: usize, prm: &ConvergeParams, policy: &TruncationPolicy) -> Result<f64> {
    let ConvergeParams { z, p, w, q } = *prm;
    Ok(match target {
        ConvergeTarget::Twist => rel_residual(
            &f_twist_product(z, re(1.0), p, w, q, n, policy)?,
            &f_twist_closed(z, p, w, q, policy)?,
        ),
        ConvergeTarget::MPlus => rel_residual(
            &m_plus(z, p, w, q, MPlusRoute::Product(n), policy)?,
            &m_plus(z, p, w, q, MPlusRoute::Hypergeometric, policy)?,
        ),
        ConvergeTarget::MMinus => rel_residual(
            &m_minus_inv(z, p, w, q, MMinusRoute::Product(n), policy)?,
            &m_minus_inv(z, p, w, q, MMinusRoute::PhiZeroOne, policy)?,
        ),
        ConvergeTarget::R6vUniversal => {
            let modulus = (z / (q * q)).norm();
            if modulus >= 1.0 {
                return Err(Error::OutsideConvergence { modulus });
            }
            rel_residual(&r6v_universal_truncated(z, re(1.0), q, n)?, &r6v(z, re(1.0), q, policy)?)
        }
    })
}

/// Least-squares slope of `ln residual` against `N`, exponentiated. Rows
/// with a zero or non-finite residual are skipped.
pub fn fit_rate(rows: &[ConvergeRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.residual.is_finite() && r.residual > 0.0)
        .map(|r| (r.n as f64, r.residual.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}

/// Runs a study over the truncation orders `ns`.
pub fn converge(target: ConvergeTarget, ns: &[usize], prm: &ConvergeParams, policy: &TruncationPolicy) -> Result<ConvergeStudy> {
    let rows = ns
        .iter()
        .map(|&n| Ok(ConvergeRow { n, residual: converge_residual(target, n, prm, policy)? }))
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].residual < w[0].residual);
    let rate = fit_rate(&rows);
    Ok(ConvergeStudy { target, params: *prm, rows, monotone, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_geometric_rate() {
        let rows: Vec<ConvergeRow> = (1..=8).map(|n| ConvergeRow { n, residual: 3.0 * 0.25_f64.powi(n as i32) }).collect();
        assert!((fit_rate(&rows).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(fit_rate(&rows[..1]), None);
    }

    #[test]
    fn single_order_has_no_fit() {
        let s = converge(ConvergeTarget::MPlus, &[5], &ConvergeParams::default(), &TruncationPolicy::default()).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.rate.is_none());
    }

    #[test]
    fn universal_product_is_strictly_decreasing() {
        let prm = ConvergeParams { z: re(0.2), q: re(0.6), ..ConvergeParams::default() };
        let ns: Vec<usize> = (1..=8).collect();
        let s = converge(ConvergeTarget::R6vUniversal, &ns, &prm, &TruncationPolicy::default()).unwrap();
        assert!(s.monotone);
        let outside = ConvergeParams { z: re(0.5), q: re(0.4), ..ConvergeParams::default() };
        assert!(matches!(
            converge(ConvergeTarget::R6vUniversal, &ns, &outside, &TruncationPolicy::default()),
            Err(Error::OutsideConvergence { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for t in [ConvergeTarget::Twist, ConvergeTarget::MPlus, ConvergeTarget::MMinus, ConvergeTarget::R6vUniversal] {
            assert_eq!(t.name().parse::<ConvergeTarget>().unwrap(), t);
        }
    }
}
