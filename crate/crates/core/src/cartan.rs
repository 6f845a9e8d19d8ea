//! Exact rational matrix data attached to the affine Cartan matrix of
//! `A_r^(1)` extended by the derivation: the rotation matrices `Y` and
//! `Theta^+`, the vector `v`, projectors, quasi-inverses, the matrices
//! `S^(1)` and `S^(0)`, the function `chi`, and the q-dependent
//! coefficients `c_ij^(n)`.
//!
//! Basis order is `(k_0, ..., k_r, k_d)`; the index `d = r + 1` labels the
//! derivation direction. `E_mu^nu` is the matrix unit with row `mu` and
//! column `nu`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qspecial::{q_number, C64};

/// Square matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct RMatrix {
    n: usize,
    data: Vec<Rational64>,
}

fn rat(num: i64, den: i64) -> Rational64 {
    Rational64::new(num, den)
}

fn int(x: i64) -> Rational64 {
    Rational64::from_integer(x)
}

impl RMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Rational64::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Rational64::one());
        }
        m
    }

    /// Matrix unit with a one at `(row, col)`.
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(row, col, Rational64::one());
        m
    }

    /// Outer product `x y^t`.
    pub fn outer(x: &[Rational64], y: &[Rational64]) -> Self {
        let n = x.len();
        let mut m = Self::zeros(n);
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                m.set(i, j, xi * yj);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Rational64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational64) {
        self.data[i * self.n + j] = x;
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(j, i, self.get(i, j));
            }
        }
        m
    }

    pub fn scale(&self, s: Rational64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.n), |acc, _| &acc * self)
    }

    pub fn apply(&self, x: &[Rational64]) -> Vec<Rational64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Floating-point copy, used by checks that mix in q-dependent data.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| *self.get(i, j).numer() as f64 / *self.get(i, j).denom() as f64).collect())
            .collect()
    }
}

impl fmt::Debug for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &RMatrix {
    type Output = RMatrix;
    fn mul(self, rhs: &RMatrix) -> RMatrix {
        let n = self.n;
        let mut m = RMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        m
    }
}

impl Add for &RMatrix {
    type Output = RMatrix;
    fn add(self, rhs: &RMatrix) -> RMatrix {
        RMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &RMatrix {
    type Output = RMatrix;
    fn sub(self, rhs: &RMatrix) -> RMatrix {
        RMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Residue of `k` in `{0, ..., m - 1}`.
pub fn residue(k: i64, m: i64) -> i64 {
    k.rem_euclid(m)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Inverse of `aleph` modulo `m`, assuming they are coprime.
pub fn inverse_mod(aleph: usize, m: usize) -> usize {
    (1..=m).find(|x| (x * aleph) % m == 1 % m).unwrap_or(1)
}

/// Matrix data attached to a rank `r` and a rotation `aleph`.
#[derive(Debug, Clone)]
pub struct CartanData {
    pub r: usize,
    pub aleph: usize,
    /// Extended affine Cartan matrix.
    pub a_ext: RMatrix,
    /// Affine Cartan matrix padded by a zero derivation row and column.
    pub a_bar: RMatrix,
    /// Cyclic shift on the `0..r` block.
    pub y: RMatrix,
    /// Diagram rotation `Theta^+` acting on the extended basis.
    pub theta_plus: RMatrix,
    pub t: RMatrix,
    pub pi: RMatrix,
    pub omega: RMatrix,
    pub pi_aleph: RMatrix,
    /// `S^(1) = Theta^+ S^(0)`, satisfying `A + S^(1) + S^(1)^t = 0`.
    /// It equals `s1_uncorrected` plus the term
    /// `-k_d w^t / 2 + (r - 1) w k_d^t / (2 (r + 1))`, which is fixed by
    /// `Theta^+` and annihilated by `Pi^(aleph)`.
    pub s1: RMatrix,
    /// `Y^a Omega A_bar + E_d^0 Pi Y^a Omega + Y^a Omega Pi E_0^d`.
    pub s1_uncorrected: RMatrix,
    pub s0: RMatrix,
    pub v: Vec<Rational64>,
}

impl CartanData {
    /// Dimension `r + 2` of the extended basis.
    pub fn dim(&self) -> usize {
        self.r + 2
    }

    /// Index of the derivation direction.
    pub fn d(&self) -> usize {
        self.r + 1
    }

    /// Vector `w = sum_{i=0}^r k_i`.
    pub fn w(&self) -> Vec<Rational64> {
        let mut w = vec![Rational64::one(); self.dim()];
        w[self.d()] = Rational64::zero();
        w
    }

    /// Basis vector `k_mu`.
    pub fn basis(&self, mu: usize) -> Vec<Rational64> {
        let mut e = vec![Rational64::zero(); self.dim()];
        e[mu] = Rational64::one();
        e
    }

    /// `Y^k` on the `0..r` block, with `Y^0` the block projector.
    pub fn y_pow(&self, k: i64) -> RMatrix {
        let m = (self.r + 1) as i64;
        let mut out = RMatrix::zeros(self.dim());
        for i in 0..m {
            out.set(i as usize, residue(i + k, m) as usize, Rational64::one());
        }
        out
    }
}

/// Builds all matrix data for rank `r` and rotation `aleph`.
pub fn build_cartan_data(r: usize, aleph: usize) -> Result<CartanData> {
    if r == 0 {
        return Err(Error::BadIndex { index: 0, rank: 0 });
    }
    let m = r + 1;
    if aleph == 0 || aleph > r || gcd(aleph, m) != 1 {
        return Err(Error::NotCoprime { aleph, modulus: m });
    }
    let n = r + 2;
    let d = r + 1;
    let mi = m as i64;

    let mut y = RMatrix::zeros(n);
    for i in 0..m {
        y.set(i, (i + 1) % m, Rational64::one());
    }
    let mut proj = RMatrix::identity(n);
    proj.set(d, d, Rational64::zero());

    let a_bar = &(&proj.scale(int(2)) - &y) - &y.transpose();
    let a_ext = &(&a_bar + &RMatrix::unit(n, 0, d)) + &RMatrix::unit(n, d, 0);

    let ypow = |k: i64| {
        let mut out = RMatrix::zeros(n);
        for i in 0..mi {
            out.set(i as usize, residue(i + k, mi) as usize, Rational64::one());
        }
        out
    };
    let al = aleph as i64;

    let mut v = vec![Rational64::zero(); n];
    for (j, vj) in v.iter_mut().enumerate().take(m) {
        let j = j as i64;
        let s = residue(j - al, mi);
        *vj = rat(j * (mi - j) - s * (mi - s), 2 * mi);
    }

    let mut theta_plus = ypow(al);
    theta_plus.set(d, d, Rational64::one());
    for (j, vj) in v.iter().enumerate() {
        theta_plus.set(d, j, theta_plus.get(d, j) + vj);
    }

    let mut t = RMatrix::zeros(n);
    for l in 1..mi {
        t = &t + &ypow(l).scale(rat(-l * (mi - l), 2 * mi));
    }

    let mut w = vec![Rational64::one(); n];
    w[d] = Rational64::zero();
    let pi = &proj - &RMatrix::outer(&w, &w).scale(rat(1, mi));

    let mut omega = RMatrix::zeros(n);
    for l in 1..mi {
        omega = &omega + &ypow(al * l).scale(rat(-l, mi));
    }

    let mut e_d = vec![Rational64::zero(); n];
    e_d[d] = Rational64::one();
    let mut e_0 = vec![Rational64::zero(); n];
    e_0[0] = Rational64::one();
    let pi_aleph = &pi - &(&RMatrix::outer(&e_d, &v) * &omega);

    let ya = ypow(al);
    let ya_om = &ya * &omega;
    let s1_uncorrected = &(&(&ya_om * &a_bar) + &(&(&RMatrix::unit(n, d, 0) * &pi) * &ya_om))
        + &(&(&ya_om * &pi) * &RMatrix::unit(n, 0, d));
    let gauge_term = &RMatrix::outer(&e_d, &w).scale(rat(-1, 2))
        + &RMatrix::outer(&w, &e_d).scale(rat(mi - 2, 2 * mi));
    let s1 = &s1_uncorrected + &gauge_term;

    let centered: Vec<Rational64> = (0..n).map(|i| e_0[i] - w[i] * rat(1, mi)).collect();
    let t_om = &t * &omega;
    let corner = t_om.get(0, 0) - (&t_om * &ya).get(0, 0);
    let s0 = &(&(&(&omega * &a_bar) + &(&RMatrix::outer(&e_d, &centered) * &omega))
        + &(&omega * &RMatrix::outer(&centered, &e_d)))
        + &RMatrix::unit(n, d, d).scale(corner);
    let s0 = &s0 + &gauge_term;

    Ok(CartanData { r, aleph, a_ext, a_bar, y, theta_plus, t, pi, omega, pi_aleph, s1, s1_uncorrected, s0, v })
}

/// `chi_aleph(u) = -(2 [u a'] - [(u+1) a'] - [(u-1) a']) / (r + 1)`, where
/// `[k]` is the residue mod `r + 1` and `a'` the inverse of `aleph`.
pub fn chi_aleph(u: i64, r: usize, aleph: usize) -> i64 {
    let m = (r + 1) as i64;
    let ap = inverse_mod(aleph, r + 1) as i64;
    let num = 2 * residue(u * ap, m) - residue((u + 1) * ap, m) - residue((u - 1) * ap, m);
    -num / m
}

/// Explicit entries of `S^(1)` for `aleph = 1`.
pub fn s1_explicit_aleph_one(r: usize) -> RMatrix {
    let m = (r + 1) as i64;
    let n = r + 2;
    let d = r + 1;
    let mut s = RMatrix::zeros(n);
    for i in 0..=r {
        s.set(i, i, s.get(i, i) - Rational64::one());
        let j = (i + 1) % (r + 1);
        s.set(i, j, s.get(i, j) + Rational64::one());
        s.set(i, d, rat(2 * i as i64 - 1, 2 * m));
        s.set(d, i, rat(-2 * residue(i as i64 - 1, m) - 1, 2 * m));
    }
    s
}

/// Outcome of every exact identity on a `CartanData` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CartanChecks {
    pub theta_preserves_a: bool,
    pub s1_antisymmetric_part: bool,
    pub a_bar_t_is_pi: bool,
    pub omega_quasi_inverse: bool,
    pub pi_idempotent: bool,
    pub theta_fixes_w: bool,
    pub pi_aleph_idempotent: bool,
    pub pi_aleph_commutes_with_theta: bool,
    pub pi_aleph_kernel: bool,
    pub chi_expansion: bool,
    pub theta_s0_is_s1: bool,
}

impl CartanChecks {
    /// The identities the construction is required to satisfy.
    pub fn required_hold(&self) -> bool {
        self.theta_preserves_a
            && self.s1_antisymmetric_part
            && self.a_bar_t_is_pi
            && self.omega_quasi_inverse
            && self.pi_idempotent
            && self.theta_fixes_w
            && self.pi_aleph_idempotent
            && self.pi_aleph_commutes_with_theta
            && self.pi_aleph_kernel
            && self.chi_expansion
    }
}

/// Evaluates every identity exactly.
pub fn check_cartan_data(c: &CartanData) -> CartanChecks {
    let n = c.dim();
    let id = RMatrix::identity(n);
    let th = &c.theta_plus;
    let w = c.w();
    let chi_sum = (0..=c.r as i64).fold(RMatrix::zeros(n), |acc, u| {
        &acc + &c.y_pow(u + c.aleph as i64).scale(int(chi_aleph(u, c.r, c.aleph)))
    });
    let pa = &c.pi_aleph;
    CartanChecks {
        theta_preserves_a: &(th * &c.a_ext) * &th.transpose() == c.a_ext,
        s1_antisymmetric_part: (&(&c.a_ext + &c.s1) + &c.s1.transpose()).is_zero(),
        a_bar_t_is_pi: &c.a_bar * &c.t == c.pi && &c.t * &c.a_bar == c.pi,
        omega_quasi_inverse: &c.omega * &(&id - &c.y_pow(c.aleph as i64)) == c.pi,
        pi_idempotent: &c.pi * &c.pi == c.pi,
        theta_fixes_w: (th - &id).apply(&w).iter().all(|x| x.is_zero()),
        pi_aleph_idempotent: pa * pa == *pa,
        pi_aleph_commutes_with_theta: pa * th == th * pa,
        pi_aleph_kernel: pa.apply(&w).iter().all(|x| x.is_zero())
            && pa.apply(&c.basis(c.d())).iter().all(|x| x.is_zero()),
        chi_expansion: chi_sum == &(&c.y_pow(c.aleph as i64) * &c.omega) * &c.a_bar,
        theta_s0_is_s1: th * &c.s0 == c.s1,
    }
}

/// `c_ij^(n) = n [min]_{q^n} [r+1-max]_{q^n} / ([n]_q [r+1]_{q^n})`.
pub fn c_coeff(i: usize, j: usize, n: usize, r: usize, q: C64) -> C64 {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    let (n, m) = (n as i64, (r + 1) as i64);
    let qn = q.powi(n as i32);
    q_number(lo, qn) * q_number(m - hi, qn) * n as f64 / (q_number(n, q) * q_number(m, qn))
}

/// Second closed form `(n / [n]_q^2) [n min]_q [n (r+1-max)]_q / [n (r+1)]_q`.
pub fn c_coeff_alt(i: usize, j: usize, n: usize, r: usize, q: C64) -> C64 {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    let (n, m) = (n as i64, (r + 1) as i64);
    let qn = q_number(n, q);
    q_number(n * lo, q) * q_number(n * (m - hi), q) * n as f64 / (qn * qn * q_number(n * m, q))
}

/// Entry `(i, j)` of the finite Cartan matrix of `A_r`.
pub fn cartan_entry(i: usize, j: usize) -> i64 {
    match i.abs_diff(j) {
        0 => 2,
        1 => -1,
        _ => 0,
    }
}

/// Maximum entry deviation of `sum_j c_ij^(n) [n a_jk]_q / n` from the
/// identity, over `1 <= i, k <= r`.
pub fn c_coeff_inverse_residual(n: usize, r: usize, q: C64) -> f64 {
    let mut worst = 0.0_f64;
    for i in 1..=r {
        for k in 1..=r {
            let s: C64 = (1..=r)
                .map(|j| c_coeff(i, j, n, r, q) * q_number(n as i64 * cartan_entry(j, k), q) / n as f64)
                .sum();
            let target = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// Closed-form inverse of the q-Cartan matrix `[a_ij]_q`:
/// `[min]_q [r+1-max]_q / [r+1]_q`.
pub fn q_cartan_inverse_entry(i: usize, j: usize, r: usize, q: C64) -> C64 {
    let (lo, hi) = (i.min(j) as i64, i.max(j) as i64);
    let m = (r + 1) as i64;
    q_number(lo, q) * q_number(m - hi, q) / q_number(m, q)
}

/// Maximum deviation of `[a]_q * closed-form inverse` from the identity.
pub fn q_cartan_inverse_residual(r: usize, q: C64) -> f64 {
    let mut worst = 0.0_f64;
    for i in 1..=r {
        for k in 1..=r {
            let s: C64 =
                (1..=r).map(|j| q_number(cartan_entry(i, j), q) * q_cartan_inverse_entry(j, k, r, q)).sum();
            worst = worst.max((s - if i == k { 1.0 } else { 0.0 }).norm());
        }
    }
    worst
}

/// Every `(r, aleph)` pair with `aleph` coprime to `r + 1`.
pub fn valid_alephs(r: usize) -> Vec<usize> {
    (1..=r).filter(|&a| gcd(a, r + 1) == 1).collect()
}
