//! Evaluation representations `ev_z` of the derived quantum affine algebra
//! of type `A_r^(1)` on `C^{r+1}`: Chevalley generators, root vectors of the
//! PBW basis, Cartan elements `zeta_i`, the rotation matrix `omega_z`, and
//! residual checks for the defining relations and the diagram rotation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qspecial::{cpow, ipow, q_number, re, C64};
use crate::tensor::CMatrix;

/// Chevalley generator of the derived algebra, indexed by `0..=r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    E(usize),
    F(usize),
    H(usize),
}

/// Positive (`E`) or negative (`F`) root vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    E,
    F,
}

/// Root labels of the PBW basis in the evaluation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PbwLabel {
    /// Real root `alpha_{i,j} = alpha_i + ... + alpha_{j-1}`, `1 <= i < j <= r+1`.
    Alpha { i: usize, j: usize },
    /// Real root `delta - alpha_{i,j}`.
    DeltaMinusAlpha { i: usize, j: usize },
    /// Real root `alpha_i + n delta`, `1 <= i <= r`, `n >= 0`.
    AlphaPlusDelta { i: usize, n: usize },
    /// Real root `alpha_0 + n delta` (rank one).
    AlphaZeroPlusDelta { n: usize },
    /// Imaginary root vector `e_{n delta}^{(alpha_i)}`, `n >= 1`.
    Imaginary { n: usize, i: usize },
    /// Imaginary root vector `e'_{n delta}^{(alpha_i)}` of the exponential
    /// generating function, `n >= 1`.
    ImaginaryPrimed { n: usize, i: usize },
}

fn check_rank_index(i: usize, r: usize, lo: usize) -> Result<()> {
    if r == 0 || i < lo || i > r {
        Err(Error::BadIndex { index: i, rank: r })
    } else {
        Ok(())
    }
}

/// Image of a Chevalley generator. The central element maps to zero, so
/// `h_0 = -(h_1 + ... + h_r)`.
pub fn ev_generator(r: usize, z: C64, which: Generator) -> Result<CMatrix> {
    let n = r + 1;
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument { what: "z" });
    }
    let e = |i, j| CMatrix::elementary(n, i, j);
    match which {
        Generator::E(0) => {
            check_rank_index(0, r, 0)?;
            Ok(e(n, 1).scale(z))
        }
        Generator::F(0) => {
            check_rank_index(0, r, 0)?;
            Ok(e(1, n).scale(z.inv()))
        }
        Generator::H(0) => {
            check_rank_index(0, r, 0)?;
            Ok(&e(n, n) - &e(1, 1))
        }
        Generator::E(i) => {
            check_rank_index(i, r, 1)?;
            Ok(e(i, i + 1))
        }
        Generator::F(i) => {
            check_rank_index(i, r, 1)?;
            Ok(e(i + 1, i))
        }
        Generator::H(i) => {
            check_rank_index(i, r, 1)?;
            Ok(&e(i, i) - &e(i + 1, i + 1))
        }
    }
}

/// `q^{h}` for a diagonal matrix `h`, computed entrywise.
pub fn q_power_diag(h: &CMatrix, q: C64) -> CMatrix {
    CMatrix::diag(&h.diagonal().iter().map(|x| cpow(q, x.re)).collect::<Vec<_>>())
}

/// Image of `q^{h_i}`.
pub fn ev_q_power(r: usize, i: usize, q: C64) -> Result<CMatrix> {
    Ok(q_power_diag(&ev_generator(r, re(1.0), Generator::H(i))?, q))
}

/// Image of a PBW root vector.
pub fn ev_pbw(r: usize, z: C64, q: C64, label: PbwLabel, sign: Sign) -> Result<CMatrix> {
    let dim = r + 1;
    let e = |i, j| CMatrix::elementary(dim, i, j);
    let bad = |msg: &str| Error::BadLabel(format!("{msg} for rank {r}: {label:?}"));
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument { what: "z" });
    }
    let zi = z.inv();
    match label {
        PbwLabel::Alpha { i, j } => {
            if !(1 <= i && i < j && j <= dim) {
                return Err(bad("need 1 <= i < j <= r+1"));
            }
            let k = (j - i - 1) as i64;
            Ok(match sign {
                Sign::E => e(i, j).scale(ipow(-q.inv(), k)),
                Sign::F => e(j, i).scale(ipow(-q, k)),
            })
        }
        PbwLabel::DeltaMinusAlpha { i, j } => {
            if !(1 <= i && i < j && j <= dim) {
                return Err(bad("need 1 <= i < j <= r+1"));
            }
            let k = (i - 1) as i64;
            Ok(match sign {
                Sign::E => e(j, i).scale(z * ipow(-q.inv(), k)),
                Sign::F => e(i, j).scale(zi * ipow(-q, k)),
            })
        }
        PbwLabel::AlphaPlusDelta { i, n } => {
            if !(1 <= i && i <= r) {
                return Err(bad("need 1 <= i <= r"));
            }
            let m = n as i64;
            let sgn = if (m * i as i64) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(match sign {
                Sign::E => e(i, i + 1).scale(ipow(z, m) * ipow(q, -(i as i64) * m) * sgn),
                Sign::F => e(i + 1, i).scale(ipow(zi, m) * ipow(q, i as i64 * m) * sgn),
            })
        }
        PbwLabel::AlphaZeroPlusDelta { n } => {
            if r != 1 {
                return Err(bad("alpha_0 + n delta is tabulated for rank one only"));
            }
            let m = n as i64;
            Ok(match sign {
                Sign::E => e(2, 1).scale(z * ipow(-z / q, m)),
                Sign::F => e(1, 2).scale(zi * ipow(-q / z, m)),
            })
        }
        PbwLabel::Imaginary { n, i } => {
            if n == 0 || !(1 <= i && i <= r) {
                return Err(bad("need n >= 1 and 1 <= i <= r"));
            }
            let m = n as i64;
            let sgn = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let weight = q_number(m, q) / m as f64 * sgn;
            Ok(match sign {
                Sign::E => (&e(i, i) - &e(i + 1, i + 1).scale(ipow(q, -2 * m)))
                    .scale(weight * ipow(z, m) * ipow(q, (1 - i as i64) * m)),
                Sign::F => (&e(i, i) - &e(i + 1, i + 1).scale(ipow(q, 2 * m)))
                    .scale(weight * ipow(zi, m) * ipow(q, (i as i64 - 1) * m)),
            })
        }
        PbwLabel::ImaginaryPrimed { n, i } => {
            if n == 0 || !(1 <= i && i <= r) {
                return Err(bad("need n >= 1 and 1 <= i <= r"));
            }
            let m = n as i64;
            let sgn = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let i = i as i64;
            Ok(match sign {
                Sign::E => (&e(i as usize, i as usize) - &e(i as usize + 1, i as usize + 1).scale(ipow(q, -2)))
                    .scale(ipow(z, m) * ipow(q, 1 - i * m) * sgn),
                Sign::F => (&e(i as usize, i as usize) - &e(i as usize + 1, i as usize + 1).scale(ipow(q, 2)))
                    .scale(ipow(zi, m) * ipow(q, i * m - 1) * sgn),
            })
        }
    }
}

/// Image of the Cartan element `zeta_i`: `-(i/(r+1)) 1 + sum_{j <= i} E_jj`.
pub fn ev_cartan_zeta(r: usize, i: usize) -> Result<CMatrix> {
    check_rank_index(i, r, 1)?;
    let n = r + 1;
    let d: Vec<C64> = (1..=n)
        .map(|j| re(if j <= i { 1.0 } else { 0.0 } - i as f64 / n as f64))
        .collect();
    Ok(CMatrix::diag(&d))
}

/// `zeta_i` extended by `zeta_0 = zeta_{r+1} = 0`.
pub fn ev_cartan_zeta_ext(r: usize, i: usize) -> Result<CMatrix> {
    if i == 0 || i == r + 1 {
        Ok(CMatrix::zeros(r + 1, r + 1))
    } else {
        ev_cartan_zeta(r, i)
    }
}

/// `omega_z`: ones on the superdiagonal and `z` in the lower-left corner.
pub fn omega_z(r: usize, z: C64) -> CMatrix {
    let n = r + 1;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = re(1.0);
    }
    m[(n - 1, 0)] += z;
    m
}

/// Entry of the affine Cartan matrix of `A_r^(1)`, indices in `0..=r`.
pub fn affine_cartan_entry(i: usize, j: usize, r: usize) -> i64 {
    let m = r + 1;
    if i == j {
        2
    } else if r == 1 {
        -2
    } else if (i + 1) % m == j || (j + 1) % m == i {
        -1
    } else {
        0
    }
}

/// Direction of the diagram rotation: `Plus` maps index `i` to `i - 1`,
/// `Minus` maps `i` to `i + 1` (indices mod `r + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Plus,
    Minus,
}

fn rotate(g: Generator, rot: Rotation, r: usize) -> Generator {
    let m = r + 1;
    let f = |i: usize| match rot {
        Rotation::Plus => (i + m - 1) % m,
        Rotation::Minus => (i + 1) % m,
    };
    match g {
        Generator::E(i) => Generator::E(f(i)),
        Generator::F(i) => Generator::F(f(i)),
        Generator::H(i) => Generator::H(f(i)),
    }
}

/// Maximum over generators `e_i, f_i, q^{h_i}` and both rotations of
/// `|| ev(sigma(u)) - omega^{+-1} ev(u) omega^{-+1} ||_F`.
pub fn sigma_intertwining_residual(r: usize, z: C64, q: C64) -> Result<f64> {
    let om = omega_z(r, z);
    let om_inv = om.inverse()?;
    let mut worst = 0.0_f64;
    for rot in [Rotation::Plus, Rotation::Minus] {
        let (a, b) = match rot {
            Rotation::Plus => (&om, &om_inv),
            Rotation::Minus => (&om_inv, &om),
        };
        for i in 0..=r {
            for g in [Generator::E(i), Generator::F(i), Generator::H(i)] {
                let lhs = ev_generator(r, z, rotate(g, rot, r))?;
                let rhs = a.matmul(&ev_generator(r, z, g)?).matmul(b);
                let (lhs, rhs) = match g {
                    Generator::H(_) => (q_power_diag(&lhs, q), q_power_diag(&rhs, q)),
                    _ => (lhs, rhs),
                };
                worst = worst.max((&lhs - &rhs).norm());
            }
        }
    }
    Ok(worst)
}

/// Gaussian binomial `[n choose k]_q` in the symmetric convention.
pub fn q_binomial(n: i64, k: i64, q: C64) -> C64 {
    let fact = |m: i64| (1..=m).fold(re(1.0), |acc, j| acc * q_number(j, q));
    fact(n) / (fact(k) * fact(n - k))
}

/// Maximum residual of the defining relations evaluated on generator
/// images: `[e_i, f_j] = delta_ij (K_i - K_i^{-1})/(q - q^{-1})`,
/// `K_i e_j K_i^{-1} = q^{a_ij} e_j`, the same for `f_j`, and the q-Serre
/// relations for `i != j`.
pub fn relation_residual(r: usize, z: C64, q: C64) -> Result<f64> {
    let mut worst = 0.0_f64;
    let gens: Vec<(CMatrix, CMatrix, CMatrix)> = (0..=r)
        .map(|i| {
            Ok((
                ev_generator(r, z, Generator::E(i))?,
                ev_generator(r, z, Generator::F(i))?,
                ev_q_power(r, i, q)?,
            ))
        })
        .collect::<Result<_>>()?;
    let qq = q - q.inv();
    for i in 0..=r {
        let (ei, _, ki) = &gens[i];
        let ki_inv = ki.inverse()?;
        for j in 0..=r {
            let (ej, fj, _) = &gens[j];
            let comm = ei.commutator(fj);
            let target = if i == j { (ki - &ki_inv).scale(qq.inv()) } else { CMatrix::zeros(r + 1, r + 1) };
            worst = worst.max((&comm - &target).norm());
            let a = affine_cartan_entry(i, j, r);
            let ke = ki.matmul(ej).matmul(&ki_inv);
            worst = worst.max((&ke - &ej.scale(ipow(q, a))).norm());
            let kf = ki.matmul(fj).matmul(&ki_inv);
            worst = worst.max((&kf - &fj.scale(ipow(q, -a))).norm());
            if i != j {
                let order = 1 - a;
                for pick in [0usize, 1] {
                    let x = if pick == 0 { &gens[i].0 } else { &gens[i].1 };
                    let y = if pick == 0 { &gens[j].0 } else { &gens[j].1 };
                    let mut serre = CMatrix::zeros(r + 1, r + 1);
                    for k in 0..=order {
                        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                        let term = x.pow((order - k) as u32).matmul(y).matmul(&x.pow(k as u32));
                        serre = &serre + &term.scale(q_binomial(order, k, q) * sgn);
                    }
                    worst = worst.max(serre.norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Checks the generating-function relations between the imaginary root
/// vectors and their primed counterparts, order by order in the formal
/// variable up to `order`:
/// `(q - 1/q) sum e_n u^n = log(1 + (q - 1/q) sum e'_n u^n)` and
/// `-(q - 1/q) sum f_n u^n = log(1 - (q - 1/q) sum f'_n u^n)`.
/// Returns the largest relative coefficient mismatch over the diagonal
/// entries.
pub fn log_transform_residual(r: usize, z: C64, q: C64, order: usize) -> Result<f64> {
    let qq = q - q.inv();
    let mut worst = 0.0_f64;
    for i in 1..=r {
        for (sign, s) in [(Sign::E, 1.0), (Sign::F, -1.0)] {
            let primed: Vec<Vec<C64>> = (1..=order)
                .map(|n| Ok(ev_pbw(r, z, q, PbwLabel::ImaginaryPrimed { n, i }, sign)?.diagonal()))
                .collect::<Result<_>>()?;
            let plain: Vec<Vec<C64>> = (1..=order)
                .map(|n| Ok(ev_pbw(r, z, q, PbwLabel::Imaginary { n, i }, sign)?.diagonal()))
                .collect::<Result<_>>()?;
            for entry in 0..=r {
                let a: Vec<C64> = primed.iter().map(|d| d[entry] * qq * s).collect();
                let logc = log1p_series(&a);
                for n in 0..order {
                    let target = plain[n][entry] * qq * s;
                    worst = worst.max((logc[n] - target).norm() / target.norm().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

/// Coefficients `b_1..b_N` of `log(1 + sum_{n>=1} a_n u^n)`.
fn log1p_series(a: &[C64]) -> Vec<C64> {
    let mut b: Vec<C64> = Vec::with_capacity(a.len());
    for n in 1..=a.len() {
        let mut s = a[n - 1] * n as f64;
        for k in 1..n {
            s -= b[k - 1] * k as f64 * a[n - k - 1];
        }
        b.push(s / n as f64);
    }
    b
}
