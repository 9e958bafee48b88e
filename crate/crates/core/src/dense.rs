//! Small dense complex matrix kernel: storage, products, LU, pivoted QR and
//! one-sided Jacobi SVD.
//!
//! Everything here is sized for desk-scale problems (a few hundred rows at
//! most). Storage is row-major.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

pub type C64 = Complex64;

pub const EPS: f64 = f64::EPSILON;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cc = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, cc, |i, j| re(rows[i][j]))
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn column_vector(v: &[C64]) -> Self {
        Self::from_row_major(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Selects rows in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn vstack(parts: &[&Matrix]) -> Self {
        let cols = parts.first().map_or(0, |p| p.cols);
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            assert_eq!(p.cols, cols, "vstack: column mismatch");
            data.extend_from_slice(&p.data);
        }
        Self { rows, cols, data }
    }

    pub fn hstack(parts: &[&Matrix]) -> Self {
        let rows = parts.first().map_or(0, |p| p.rows);
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            assert_eq!(p.rows, rows, "hstack: row mismatch");
            m.set_block(0, c0, p);
            c0 += p.cols;
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `v^* M` returned as a plain vector (the conjugate is not re-applied).
    pub fn left_mul_adjoint(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![C64::zero(); self.cols];
        for i in 0..self.rows {
            let w = v[i].conj();
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += w * a;
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub(crate) fn rot_rows(&mut self, p: usize, q: usize, cs: f64, sn: C64) {
        for k in 0..self.cols {
            let x = self[(p, k)];
            let y = self[(q, k)];
            self[(p, k)] = x * cs + sn * y;
            self[(q, k)] = -sn.conj() * x + y * cs;
        }
    }

    pub(crate) fn rot_cols(&mut self, p: usize, q: usize, cs: f64, sn: C64) {
        for k in 0..self.rows {
            let x = self[(k, p)];
            let y = self[(k, q)];
            self[(k, p)] = x * cs + sn * y;
            self[(k, q)] = -sn.conj() * x + y * cs;
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product: inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'a Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(re(-1.0))
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns `v / ‖v‖`, or `v` unchanged when it is zero.
pub fn normalized(v: &[C64]) -> Vec<C64> {
    let n = vec_norm(v);
    if n == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|&x| x / n).collect()
}

/// `u^* v`.
pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(&a, &b)| a.conj() * b).sum()
}

/// Sine of the angle between the lines spanned by `u` and `v`.
pub fn direction_distance(u: &[C64], v: &[C64]) -> f64 {
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    let (u, v) = (normalized(u), normalized(v));
    let proj = dot(&u, &v);
    // ‖v − u(u^*v)‖ keeps full relative accuracy for small angles.
    let s = u.iter().zip(&v).map(|(&a, &b)| (b - a * proj).norm_sqr()).sum::<f64>().sqrt();
    s.min(1.0)
}

/// Givens pair `(c, s)` with `[c s; -s̄ c] [a; b] = [r; 0]`, `c` real.
pub fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::zero());
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let nrm = na.hypot(nb);
    (na / nrm, (a / na) * b.conj() / nrm)
}

// ---------------------------------------------------------------------------
// LU with partial pivoting

#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &Matrix) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Self { lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::zero();
        }
        let n = self.lu.rows;
        (0..n).fold(re(self.sign), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A X = B`; `None` if `A` is exactly singular.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut x = b.select_rows(&self.perm);
        for col in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.lu[(i, i)];
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        self.solve(&Matrix::identity(self.lu.rows))
    }
}

pub fn det(a: &Matrix) -> C64 {
    Lu::new(a).det()
}

pub fn inverse(a: &Matrix) -> Option<Matrix> {
    Lu::new(a).inverse()
}

// ---------------------------------------------------------------------------
// Householder QR with column pivoting

/// `A P = Q R` with `Q` square unitary and `|R[0,0]| ≥ |R[1,1]| ≥ …`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub q: Matrix,
    pub r: Matrix,
    /// `perm[j]` is the original column placed at position `j`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        qr_impl(a, true)
    }

    /// Numerical rank: diagonal entries of `R` above `max(m,n)·ε·|R[0,0]|`.
    pub fn rank(&self) -> usize {
        let k = self.r.rows.min(self.r.cols);
        if k == 0 {
            return 0;
        }
        let top = self.r[(0, 0)].norm();
        let tol = (self.r.rows.max(self.r.cols) as f64) * EPS * top;
        (0..k).take_while(|&i| self.r[(i, i)].norm() > tol && top > 0.0).count()
    }
}

/// Unpivoted Householder QR, `A = Q R` with square `Q`.
pub fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let f = qr_impl(a, false);
    (f.q, f.r)
}

fn qr_impl(a: &Matrix, pivot: bool) -> PivotedQr {
    let m = a.rows;
    let n = a.cols;
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut colnorm: Vec<f64> = (0..n).map(|j| vec_norm(&r.column(j))).collect();
    for k in 0..m.min(n) {
        if pivot {
            // Recompute trailing norms to avoid downdating drift; sizes are small.
            for (j, cn) in colnorm.iter_mut().enumerate().skip(k) {
                *cn = (k..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            }
            let p = (k..n).fold(k, |b, j| if colnorm[j] > colnorm[b] { j } else { b });
            if p != k {
                for i in 0..m {
                    r.data.swap(i * n + k, i * n + p);
                }
                perm.swap(k, p);
                colnorm.swap(k, p);
            }
        }
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let xn = vec_norm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { re(1.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xn;
        let mut v = x;
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        // R <- (I - 2 v v^*/v^*v) R on rows k..m
        for j in k..n {
            let s: C64 = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            let f = s * 2.0 / vn2;
            for i in k..m {
                let t = v[i - k] * f;
                r[(i, j)] -= t;
            }
        }
        for i in k + 1..m {
            r[(i, k)] = C64::zero();
        }
        // Q <- Q H
        for i in 0..m {
            let s: C64 = (k..m).map(|l| q[(i, l)] * v[l - k]).sum();
            let f = s * 2.0 / vn2;
            for l in k..m {
                let t = f * v[l - k].conj();
                q[(i, l)] -= t;
            }
        }
    }
    PivotedQr { q, r, perm }
}

/// Least squares `min ‖A X − B‖_F` for full-column-rank `A`
/// via pivoted QR. Returns `None` when `A` is numerically rank deficient.
pub fn lstsq(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    assert_eq!(a.rows, b.rows, "lstsq: row mismatch");
    let f = PivotedQr::new(a);
    let n = a.cols;
    if f.rank() < n {
        return None;
    }
    let qb = &f.q.adjoint() * b;
    let mut y = Matrix::zeros(n, b.cols);
    for col in 0..b.cols {
        for i in (0..n).rev() {
            let mut s = qb[(i, col)];
            for k in i + 1..n {
                s -= f.r[(i, k)] * y[(k, col)];
            }
            y[(i, col)] = s / f.r[(i, i)];
        }
    }
    let mut x = Matrix::zeros(n, b.cols);
    for (j, &pj) in f.perm.iter().enumerate() {
        for col in 0..b.cols {
            x[(pj, col)] = y[(j, col)];
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// SVD (one-sided Jacobi)

/// Thin SVD `A = U diag(s) V^*`, singular values in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(a: &Matrix) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let m = a.rows;
    let n = a.cols;
    let mut g = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::zero();
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    alpha += gp.norm_sqr();
                    beta += gq.norm_sqr();
                    gamma += gp.conj() * gq;
                }
                let gabs = gamma.norm();
                if gabs == 0.0 || gabs <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = gamma / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)] * ph.conj();
                    g[(i, p)] = gp * cs - gq * sn;
                    g[(i, q)] = gp * sn + gq * cs;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * ph.conj();
                    v[(i, p)] = vp * cs - vq * sn;
                    v[(i, q)] = vp * sn + vq * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| vec_norm(&g.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = Matrix::zeros(m, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            for i in 0..m {
                u[(i, k)] = g[(i, j)] / norms[j];
            }
        }
    }
    let v = v.select_cols(&order);
    Svd { u, s, v }
}

pub fn singular_values(a: &Matrix) -> Vec<f64> {
    svd(a).s
}

/// Smallest singular value of a (possibly rectangular) matrix, taken over
/// `min(rows, cols)` values.
pub fn sigma_min(a: &Matrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Default numerical-rank tolerance for a matrix with the given singular values.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    (rows.max(cols) as f64) * EPS * sigma_max
}

/// Orthonormal basis (as columns) of the orthogonal complement of `range(a)`,
/// assuming `a` has full column rank.
pub fn orthogonal_complement(a: &Matrix) -> Matrix {
    let f = PivotedQr::new(a);
    let k = a.cols.min(a.rows);
    f.q.block(0, k, a.rows, a.rows - k)
}
