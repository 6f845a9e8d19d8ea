//! Dense complex matrices on `V = C^{r+1}` and its tensor powers: Kronecker
//! products, embeddings of two-leg operators into `n`-leg spaces, dynamical
//! block shifts, and residual norms.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qspecial::{re, C64};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    /// Dimensions of the tensor factors when built by `kron`.
    factors: Vec<usize>,
}

impl CMatrix {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![re(0.0); rows * cols], factors: vec![rows] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    /// Matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows * cols");
        Self { rows, cols, data, factors: vec![rows] }
    }

    /// Square matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(n, m, data)
    }

    /// Diagonal matrix.
    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Elementary matrix `E_{i,j}` of size `n`, with 1-based indices.
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i - 1, j - 1)] = re(1.0);
        m
    }

    /// Leg swap `P` on `C^d (x) C^d`.
    pub fn swap(d: usize) -> Self {
        let mut m = Self::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                m[(a * d + b, b * d + a)] = re(1.0);
            }
        }
        m.factors = vec![d, d];
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Tensor factor dimensions recorded when the matrix was built by `kron`.
    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x *= s);
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Number of entries with modulus above `tol`.
    pub fn nonzero_count(&self, tol: f64) -> usize {
        self.data.iter().filter(|x| x.norm() > tol).count()
    }

    /// Matrix product, with a dimension check.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == re(0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        if self.factors == other.factors {
            m.factors = self.factors.clone();
        }
        m
    }

    /// Inverse through an LU factorization.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("cannot invert {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let inv = m.try_inverse().ok_or(Error::Singular { size: n })?;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = inv[(i, j)];
            }
        }
        if !out.is_finite() {
            return Err(Error::Singular { size: n });
        }
        out.factors = self.factors.clone();
        Ok(out)
    }

    /// Determinant through an LU factorization.
    pub fn determinant(&self) -> C64 {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data).determinant()
    }

    /// Integer power of a square matrix.
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.matmul(self))
    }

    /// Commutator `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Conjugation `A X A^{-1}`.
    pub fn conjugate_by(&self, a: &Self) -> Result<Self> {
        Ok(a.matmul(self).matmul(&a.inverse()?))
    }

    /// Entrywise map.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x = f(*x));
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self.clone();
        m.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
        m
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self.clone();
        m.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
        m
    }
}

/// Kronecker product `A (x) B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == re(0.0) {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    m[(i * b.rows + k, j * b.cols + l)] = x * b[(k, l)];
                }
            }
        }
    }
    m.factors = a.factors.iter().chain(&b.factors).copied().collect();
    m
}

/// Digits of a basis index of `(C^d)^{(x) n}`, most significant leg first.
fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

fn check_legs(i: usize, j: usize, n: usize) -> Result<()> {
    if i == 0 || j == 0 || i == j || i > n || j > n {
        return Err(Error::BadLegs { i, j, n });
    }
    Ok(())
}

/// Embeds an operator on `V (x) V` into `V^{(x) n}` acting on legs `(i, j)`
/// (1-based) and as the identity elsewhere. The first tensor factor of `op`
/// acts on leg `i`.
pub fn embed(op: &CMatrix, legs: (usize, usize), n: usize, d: usize) -> Result<CMatrix> {
    embed_with(|_| op.clone(), legs, None, n, d)
}

/// Shared kernel of `embed` and `shift_leg`: the operator placed on the
/// pair `legs` may depend on the basis index of a spectator leg.
fn embed_with(
    op_for: impl Fn(usize) -> CMatrix,
    (i, j): (usize, usize),
    spectator: Option<usize>,
    n: usize,
    d: usize,
) -> Result<CMatrix> {
    check_legs(i, j, n)?;
    if let Some(k) = spectator {
        if k == 0 || k > n || k == i || k == j {
            return Err(Error::BadLegs { i: k, j: i, n });
        }
    }
    let ops: Vec<CMatrix> = (0..if spectator.is_some() { d } else { 1 }).map(&op_for).collect();
    for op in &ops {
        if op.rows != d * d || op.cols != d * d {
            return Err(Error::Dimension(format!("operator must be {}x{}", d * d, d * d)));
        }
    }
    let dim = d.pow(n as u32);
    let mut m = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let rd = digits(row, d, n);
        let op = &ops[spectator.map_or(0, |k| rd[k - 1])];
        for a in 0..d {
            for b in 0..d {
                let mut cd = rd.clone();
                cd[i - 1] = a;
                cd[j - 1] = b;
                let col = cd.iter().fold(0, |acc, &x| acc * d + x);
                m[(row, col)] = op[(rd[i - 1] * d + rd[j - 1], a * d + b)];
            }
        }
    }
    m.factors = vec![d; n];
    Ok(m)
}

/// Operator on `V (x) V` depending on a dynamical parameter `w`, together
/// with the Cartan weights of the basis of `V`.
pub struct DynamicalOperator<'a> {
    pub eval: Box<dyn Fn(C64) -> CMatrix + Send + Sync + 'a>,
    pub weights: Vec<f64>,
}

impl<'a> DynamicalOperator<'a> {
    pub fn new(eval: impl Fn(C64) -> CMatrix + Send + Sync + 'a, weights: Vec<f64>) -> Self {
        Self { eval: Box::new(eval), weights }
    }

    pub fn at(&self, w: C64) -> CMatrix {
        (self.eval)(w)
    }
}

/// Block realization of `op(w q^{h_k})` on legs `placement` of
/// `V^{(x) n}`: the sum over basis vectors `e_b` of leg `k` of
/// `op(w q^{weight_b})` tensored with the projector onto `e_b`.
pub fn shift_leg(
    op: &DynamicalOperator<'_>,
    k: usize,
    placement: (usize, usize),
    n: usize,
    w: C64,
    q: C64,
) -> Result<CMatrix> {
    let d = op.weights.len();
    embed_with(
        |b| op.at(w * crate::qspecial::cpow(q, op.weights[b])),
        placement,
        Some(k),
        n,
        d,
    )
}

/// Relative residual `||A - B||_F / max(||A||_F, ||B||_F, 1)`.
pub fn rel_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Matrix q-exponential `sum_n x^n / (n)_q!` for a nilpotent matrix, where
/// `(n)_q = q^{n-1} [n]_q`. The series terminates after at most `dim` terms.
pub fn exp_q_nilpotent(x: &CMatrix, q: C64) -> Result<CMatrix> {
    let n = x.rows;
    let mut sum = CMatrix::identity(n);
    let mut pw = CMatrix::identity(n);
    let mut fact = re(1.0);
    for k in 1..=n {
        pw = pw.matmul(x);
        if pw.max_abs() == 0.0 {
            return Ok(sum);
        }
        fact *= crate::qspecial::ipow(q, k as i64 - 1) * crate::qspecial::q_number(k as i64, q);
        sum = &sum + &pw.scale(fact.inv());
    }
    if pw.matmul(x).max_abs() == 0.0 {
        Ok(sum)
    } else {
        Err(Error::Dimension("argument of the matrix q-exponential is not nilpotent".into()))
    }
}

/// Entrywise exponential of a diagonal matrix.
pub fn exp_diagonal(x: &CMatrix) -> CMatrix {
    CMatrix::diag(&x.diagonal().iter().map(|v| v.exp()).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(d: usize, n: usize, idx: &[usize]) -> CMatrix {
        let mut v = CMatrix::zeros(d.pow(n as u32), 1);
        let pos = idx.iter().fold(0, |acc, &x| acc * d + x);
        v[(pos, 0)] = re(1.0);
        v
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)).as_slice(), CMatrix::identity(4).as_slice());
        let m = kron(&CMatrix::elementary(2, 1, 2), &CMatrix::elementary(2, 2, 1));
        assert_eq!(m.nonzero_count(0.0), 1);
        assert_eq!(m[(1, 2)], re(1.0));
        let big = kron(&CMatrix::identity(2), &CMatrix::identity(3));
        assert_eq!((big.rows(), big.cols()), (6, 6));
        assert_eq!(big.factors(), &[2, 3]);
    }

    #[test]
    fn embed_examples() {
        let r = CMatrix::from_vec(4, 4, (0..16).map(|x| re(x as f64)).collect());
        assert_eq!(embed(&r, (1, 2), 2, 2).unwrap().as_slice(), r.as_slice());
        let id = embed(&CMatrix::identity(4), (1, 3), 3, 2).unwrap();
        assert_eq!(id.as_slice(), CMatrix::identity(8).as_slice());
        let p = embed(&CMatrix::swap(3), (1, 3), 3, 3).unwrap();
        let v = p.matmul(&basis(3, 3, &[0, 1, 2]));
        assert_eq!(v.as_slice(), basis(3, 3, &[2, 1, 0]).as_slice());
        assert!(matches!(embed(&r, (2, 2), 3, 2), Err(Error::BadLegs { .. })));
        assert!(matches!(embed(&r, (1, 4), 3, 2), Err(Error::BadLegs { .. })));
    }

    #[test]
    fn embed_13_matches_swap_conjugation() {
        let r = CMatrix::from_vec(4, 4, (0..16).map(|x| re(1.0 + x as f64)).collect());
        let p23 = kron(&CMatrix::identity(2), &CMatrix::swap(2));
        let expected = p23.matmul(&kron(&r, &CMatrix::identity(2))).matmul(&p23);
        assert_eq!(embed(&r, (1, 3), 3, 2).unwrap().as_slice(), expected.as_slice());
    }

    #[test]
    fn shift_leg_examples() {
        let q = re(0.5);
        let w = re(0.8);
        let constant = DynamicalOperator::new(|_| CMatrix::swap(2), vec![1.0, -1.0]);
        let a = shift_leg(&constant, 3, (1, 2), 3, w, q).unwrap();
        assert_eq!(a.as_slice(), embed(&CMatrix::swap(2), (1, 2), 3, 2).unwrap().as_slice());
        let scalar = DynamicalOperator::new(|w| CMatrix::identity(4).scale(w), vec![1.0, -1.0]);
        let m = shift_leg(&scalar, 3, (1, 2), 3, w, q).unwrap();
        for idx in 0..8 {
            let expect = if idx % 2 == 0 { w * q } else { w / q };
            assert!((m[(idx, idx)] - expect).norm() < 1e-15);
        }
        assert!(matches!(shift_leg(&scalar, 1, (1, 2), 3, w, q), Err(Error::BadLegs { .. })));
    }

    #[test]
    fn residual_examples() {
        let a = CMatrix::identity(3);
        assert_eq!(rel_residual(&a, &a), 0.0);
        assert_eq!(rel_residual(&CMatrix::zeros(2, 2), &CMatrix::zeros(2, 2)), 0.0);
        for n in [1usize, 2, 5] {
            let i = CMatrix::identity(n);
            let r = rel_residual(&i, &i.scale(re(2.0)));
            assert!((r - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_and_nilpotent_exponential() {
        let m = CMatrix::from_rows(&[vec![re(2.0), re(1.0)], vec![re(1.0), re(3.0)]]);
        let prod = m.matmul(&m.inverse().unwrap());
        assert!(rel_residual(&prod, &CMatrix::identity(2)) < 1e-15);
        let x = CMatrix::elementary(2, 1, 2).scale(re(0.7));
        let e = exp_q_nilpotent(&x, re(0.4)).unwrap();
        assert!(rel_residual(&e, &(&CMatrix::identity(2) + &x)) < 1e-16);
        assert!(exp_q_nilpotent(&CMatrix::identity(2), re(0.4)).is_err());
    }
}
