//! Linearizations: second companion form, `W(λ,μ)` built from a left
//! annihilator of `col{A}`, Fiedler pencils, `DL(v)` pencils and the companion
//! form for bases with a three-term recurrence.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{c, det, lstsq, rank_tolerance, re, singular_values, Lu, Matrix, PivotedQr, C64, EPS};
use crate::duality::{bases_completion, check_permutation, BasisCompletion};
use crate::error::{Error, Result};
use crate::polycore::{HomogeneousEval, MatrixPolynomial, Pencil};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `C₀ = diag(A₀, I, …, I)`, `C₁` with `−A₁ … −A_d` in the first block column
/// and identities on the block superdiagonal. Stored as `(C₀, C₁)`, i.e. the
/// pencil `μC₀ − λC₁`.
pub fn companion_second_form(a: &MatrixPolynomial) -> Result<Pencil> {
    let (n, d) = (a.n(), a.degree());
    if d == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let nn = n * d;
    let mut c0 = Matrix::identity(nn);
    c0.set_block(0, 0, a.coeff(0));
    let mut c1 = Matrix::zeros(nn, nn);
    let eye = Matrix::identity(n);
    for i in 0..d {
        c1.set_block(i * n, 0, &(-a.coeff(i + 1)));
        if i + 1 < d {
            c1.set_block(i * n, (i + 1) * n, &eye);
        }
    }
    Pencil::new(c0, c1)
}

#[derive(Clone, Debug)]
pub enum AnnihilatorMode {
    /// Trailing columns of a column-pivoted QR of `col{A}`.
    QrOrthonormal,
    UserSupplied(Matrix),
}

#[derive(Clone, Debug)]
pub struct WLinearization {
    pub pencil: Pencil,
    /// `dn × (d+1)n` left annihilator of `col{A}`.
    pub w: Matrix,
    /// `[V; W]·[col{A} B] = I`.
    pub completion: BasisCompletion,
    pub orthonormal: bool,
}

impl WLinearization {
    pub fn degree(&self) -> usize {
        self.w.cols() / (self.w.cols() - self.w.rows()) - 1
    }

    pub fn n(&self) -> usize {
        self.w.cols() - self.w.rows()
    }
}

/// Numerical rank of `col{A}`; errors with `CommonKernel` when it is below `n`.
fn check_col_rank(a: &MatrixPolynomial) -> Result<Matrix> {
    let col = a.col_stack();
    let n = a.n();
    let sv = singular_values(&col);
    let tol = rank_tolerance(col.rows(), n, sv[0]);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < n {
        return Err(Error::CommonKernel { rank, n });
    }
    Ok(col)
}

pub fn w_linearization(a: &MatrixPolynomial, mode: AnnihilatorMode) -> Result<WLinearization> {
    let (n, d) = (a.n(), a.degree());
    if d == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let col = check_col_rank(a)?;
    let nn = n * d;
    let total = nn + n;
    let (w, orthonormal) = match mode {
        AnnihilatorMode::QrOrthonormal => {
            let q = PivotedQr::new(&col).q;
            (q.block(0, n, total, nn).adjoint(), true)
        }
        AnnihilatorMode::UserSupplied(w) => {
            if w.rows() != nn || w.cols() != total {
                return Err(Error::InvalidAnnihilator(format!(
                    "shape: W is {}x{}, expected {nn}x{total}",
                    w.rows(),
                    w.cols()
                )));
            }
            let sv = singular_values(&w);
            if sv[nn - 1] <= rank_tolerance(nn, total, sv[0]) {
                return Err(Error::InvalidAnnihilator("full row rank: W is rank deficient".into()));
            }
            let res = (&w * &col).norm_fro();
            if res > 10.0 * (total as f64) * EPS * col.norm_fro() * w.norm2() {
                return Err(Error::InvalidAnnihilator(format!("annihilation: ‖W·col(A)‖ = {res:e}")));
            }
            (w, false)
        }
    };
    let pencil = Pencil::new(w.block(0, n, nn, nn), w.block(0, 0, nn, nn))?;
    let completion = bases_completion(&w, &col)?;
    Ok(WLinearization { pencil, w, completion, orthonormal })
}

/// Factor `F_i` for `1 ≤ i < d`: identity except for the block
/// `[[−A_i, I], [I, 0]]` in block rows/columns `i−1, i`. `F_d` is
/// `diag(I, …, I, −A_d)`.
pub fn fiedler_factor(a: &MatrixPolynomial, i: usize) -> Matrix {
    let (n, d) = (a.n(), a.degree());
    let mut f = Matrix::identity(n * d);
    if i == d {
        f.set_block((d - 1) * n, (d - 1) * n, &(-a.coeff(d)));
    } else {
        let r = (i - 1) * n;
        f.set_block(r, r, &(-a.coeff(i)));
        f.set_block(r, r + n, &Matrix::identity(n));
        f.set_block(r + n, r, &Matrix::identity(n));
        f.set_block(r + n, r + n, &Matrix::zeros(n, n));
    }
    f
}

/// Inverse of `F_i` for `i < d`: the block becomes `[[0, I], [I, A_i]]`.
fn fiedler_factor_inverse(a: &MatrixPolynomial, i: usize) -> Matrix {
    let n = a.n();
    let mut f = Matrix::identity(n * a.degree());
    let r = (i - 1) * n;
    f.set_block(r, r, &Matrix::zeros(n, n));
    f.set_block(r, r + n, &Matrix::identity(n));
    f.set_block(r + n, r, &Matrix::identity(n));
    f.set_block(r + n, r + n, a.coeff(i));
    f
}

/// Fiedler pencil for a 1-based permutation `sigma` of `1..=d`.
///
/// The product `F_{σ(1)} ⋯ F_{σ(d)}` is formed left to right. Factors that
/// follow `F_d` in the sequence are invertible constants and are moved to the
/// `C₀` side, so the returned pencil is
/// `(C₀ F_{σ(d)}⁻¹ ⋯ F_{σ(p+1)}⁻¹, F_{σ(1)} ⋯ F_{σ(p)})` with `σ(p) = d`.
pub fn fiedler_pencil(a: &MatrixPolynomial, sigma: &[usize]) -> Result<Pencil> {
    let d = a.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    let zero_based: Vec<usize> = sigma.iter().map(|&s| s.wrapping_sub(1)).collect();
    check_permutation(&zero_based, d)?;
    let n = a.n();
    let p = sigma.iter().position(|&s| s == d).unwrap_or(d - 1);
    let mut p1 = Matrix::identity(n * d);
    for &s in &sigma[..=p] {
        p1 = &p1 * &fiedler_factor(a, s);
    }
    let mut p0 = companion_second_form(a)?.p0().clone();
    for &s in sigma[p + 1..].iter().rev() {
        p0 = &p0 * &fiedler_factor_inverse(a, s);
    }
    Pencil::new(p0, p1)
}

/// Coefficients of the row-shifted-sum system shared by `dl_pencil`: the
/// unknown `L₀[i][j]` sits at index `i·d + j`, `L₁[i][j]` at `d² + i·d + j`.
fn dl_system(d: usize) -> Matrix {
    let dd = d * d;
    let rows = 2 * d * (d + 1);
    let mut k = Matrix::zeros(rows, 2 * dd);
    let one = re(1.0);
    // [I; 0]L₀ − [0; I]L₁, block (i, j) with i ≤ d, j < d.
    for i in 0..=d {
        for j in 0..d {
            let r = i * d + j;
            if i < d {
                k[(r, i * d + j)] += one;
            }
            if i >= 1 {
                k[(r, dd + (i - 1) * d + j)] -= one;
            }
        }
    }
    // [L₀ 0] − [0 L₁], block (i, j) with i < d, j ≤ d.
    let off = d * (d + 1);
    for i in 0..d {
        for j in 0..=d {
            let r = off + i * (d + 1) + j;
            if j < d {
                k[(r, i * d + j)] += one;
            }
            if j >= 1 {
                k[(r, dd + i * d + j - 1)] -= one;
            }
        }
    }
    k
}

/// The `DL(v)` pencil: the pencil in both `𝕃₁` (with ansatz `v̄`) and `𝕃₂`
/// (with ansatz `v`), found by solving the shifted-sum equations entrywise.
///
/// `[I; 0]L₀ − [0; I]L₁ = col{A}(v^*⊗I)` and `[L₀ 0] − [0 L₁] = (v̄⊗I)row{A}`.
pub fn dl_pencil(a: &MatrixPolynomial, v: &[C64]) -> Result<Pencil> {
    let (n, d) = (a.n(), a.degree());
    if d == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!("ansatz vector has length {}, expected {d}", v.len())));
    }
    if v.iter().all(|x| *x == zero()) {
        return Err(Error::DlConstruction("ansatz vector is zero".into()));
    }
    let k = dl_system(d);
    let dd = d * d;
    let off = d * (d + 1);
    let mut rhs = Matrix::zeros(k.rows(), n * n);
    for p in 0..n {
        for q in 0..n {
            let col = p * n + q;
            for i in 0..=d {
                let aiq = a.coeff(i)[(p, q)];
                for j in 0..d {
                    rhs[(i * d + j, col)] = v[j].conj() * aiq;
                    rhs[(off + j * (d + 1) + i, col)] = v[j].conj() * aiq;
                }
            }
        }
    }
    let sol = lstsq(&k, &rhs).ok_or_else(|| Error::DlConstruction("constraint system is singular".into()))?;
    let mismatch = (&(&k * &sol) - &rhs).norm_fro();
    let scale = rhs.norm_fro();
    if mismatch > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DlConstruction(format!("constraint system is inconsistent (residual {mismatch:e})")));
    }
    let nn = n * d;
    let mut l0 = Matrix::zeros(nn, nn);
    let mut l1 = Matrix::zeros(nn, nn);
    for i in 0..d {
        for j in 0..d {
            for p in 0..n {
                for q in 0..n {
                    l0[(i * n + p, j * n + q)] = sol[(i * d + j, p * n + q)];
                    l1[(i * n + p, j * n + q)] = sol[(dd + i * d + j, p * n + q)];
                }
            }
        }
    }
    Pencil::new(l0, l1)
}

/// Mismatch of `[I; 0]L₀ − [0; I]L₁ = col{A}·Z` with the least-squares `Z`.
/// `Z` is `None` when `col{A}` is rank deficient; the residual is then the
/// norm of the left-hand side.
pub fn l2_residual(l: &Pencil, a: &MatrixPolynomial) -> Result<(f64, Option<Matrix>)> {
    let (n, d) = (a.n(), a.degree());
    let nn = n * d;
    if l.size() != nn {
        return Err(Error::DimensionMismatch(format!("pencil size {} but dn = {nn}", l.size())));
    }
    let mut lhs = Matrix::zeros(nn + n, nn);
    lhs.set_block(0, 0, l.p0());
    let shifted = &lhs.block(n, 0, nn, nn) - l.p1();
    lhs.set_block(n, 0, &shifted);
    let col = a.col_stack();
    match lstsq(&col, &lhs) {
        Some(z) => Ok(((&(&col * &z) - &lhs).norm_fro(), Some(z))),
        None => Ok((lhs.norm_fro(), None)),
    }
}

/// Three-term recurrence data: `alpha` has `d−1` entries (`α₀..α_{d−2}`),
/// `beta` has `d` (`β₀..β_{d−1}`), `gamma` has `d−1` (`γ₁..γ_{d−1}`).
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    pub gamma: Vec<C64>,
}

impl Recurrence {
    /// `β₀ = 0`, `γ_i = 1`, everything else zero: the companion form again.
    pub fn monomial(d: usize) -> Self {
        Self {
            alpha: vec![zero(); d.saturating_sub(1)],
            beta: vec![zero(); d],
            gamma: vec![re(1.0); d.saturating_sub(1)],
        }
    }

    pub fn chebyshev(d: usize) -> Self {
        Self {
            alpha: vec![re(0.5); d.saturating_sub(1)],
            beta: vec![zero(); d],
            gamma: vec![re(0.5); d.saturating_sub(1)],
        }
    }

    pub fn degree(&self) -> usize {
        self.beta.len()
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.beta.len() != d || self.alpha.len() + 1 != d || self.gamma.len() + 1 != d {
            return Err(Error::InvalidRecurrence(format!(
                "lengths alpha={}, beta={}, gamma={} do not fit degree {d} (need {}, {d}, {})",
                self.alpha.len(),
                self.beta.len(),
                self.gamma.len(),
                d.saturating_sub(1),
                d.saturating_sub(1)
            )));
        }
        Ok(())
    }

    /// Scalar `d × d` tridiagonal matrix with `α` below, `β` on and `γ` above
    /// the diagonal.
    pub fn tridiagonal(&self) -> Matrix {
        let d = self.beta.len();
        Matrix::from_fn(d, d, |i, j| {
            if j + 1 == i {
                self.alpha[j]
            } else if i == j {
                self.beta[i]
            } else if i + 1 == j {
                self.gamma[i]
            } else {
                zero()
            }
        })
    }
}

/// Companion form `(C₀, C̃₁)` for a basis given by a three-term recurrence.
/// Block `(i, 0)` of `C̃₁` is `−A_{i+1} + t_{i0}A₀`, the remaining blocks are
/// `t_{ij}·I` with `t` the tridiagonal recurrence matrix.
pub fn orthobasis_companion(a: &MatrixPolynomial, rec: &Recurrence) -> Result<Pencil> {
    let (n, d) = (a.n(), a.degree());
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    rec.check(d)?;
    let t = rec.tridiagonal();
    let mut c1 = Matrix::zeros(n * d, n * d);
    let eye = Matrix::identity(n);
    for i in 0..d {
        let first = &(-a.coeff(i + 1)) + &a.coeff(0).scale(t[(i, 0)]);
        c1.set_block(i * n, 0, &first);
        for j in 1..d {
            if t[(i, j)] != zero() {
                c1.set_block(i * n, j * n, &eye.scale(t[(i, j)]));
            }
        }
    }
    let c0 = companion_second_form(a)?.p0().clone();
    Pencil::new(c0, c1)
}

/// Monomial coefficients (`ψ_k = Σ_j out[k][j] x^j`) of the scalar functions
/// with `det(C₀ − xC̃₁) = det Σ_k A_k ψ_k(x)` for `orthobasis_companion`.
pub fn orthobasis_scalar_basis(rec: &Recurrence) -> Result<Vec<Vec<C64>>> {
    let d = rec.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall(d));
    }
    rec.check(d)?;
    let nodes: Vec<C64> = (0..=d)
        .map(|k| {
            let th = 2.0 * core::f64::consts::PI * k as f64 / (d + 1) as f64;
            c(th.cos(), th.sin())
        })
        .collect();
    let vander = Matrix::from_fn(d + 1, d + 1, |r, j| nodes[r].powu(j as u32));
    let lu = Lu::new(&vander);
    let mut out = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let coeffs: Vec<C64> = (0..=d).map(|i| if i == k { re(1.0) } else { zero() }).collect();
        let unit = MatrixPolynomial::scalar(&coeffs)?;
        let pencil = orthobasis_companion(&unit, rec)?;
        let vals: Vec<C64> =
            nodes.iter().map(|&x| det(&pencil.eval(x, re(1.0)))).collect();
        let sol = lu
            .solve(&Matrix::column_vector(&vals))
            .ok_or_else(|| Error::InvalidRecurrence("interpolation failed".into()))?;
        out.push(sol.column(0));
    }
    Ok(out)
}

/// Coefficients `B_k` with `Σ_k B_k ψ_k(x) = Σ_j A_j x^j`, so that
/// `orthobasis_companion(B, rec)` linearizes `A`.
pub fn monomial_to_orthobasis(a: &MatrixPolynomial, rec: &Recurrence) -> Result<MatrixPolynomial> {
    let d = a.degree();
    if rec.degree() != d {
        return Err(Error::InvalidRecurrence(format!("recurrence degree {} vs polynomial degree {d}", rec.degree())));
    }
    let psi = orthobasis_scalar_basis(rec)?;
    // Ψ[j][k] = coefficient of x^j in ψ_k.
    let big_psi = Matrix::from_fn(d + 1, d + 1, |j, k| psi[k][j]);
    let inv = Lu::new(&big_psi)
        .inverse()
        .ok_or_else(|| Error::InvalidRecurrence("basis functions are linearly dependent".into()))?;
    let n = a.n();
    let coeffs = (0..=d)
        .map(|k| {
            let mut b = Matrix::zeros(n, n);
            for j in 0..=d {
                b = &b + &a.coeff(j).scale(inv[(k, j)]);
            }
            b
        })
        .collect();
    MatrixPolynomial::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MatrixPolynomial {
        MatrixPolynomial::scalar(&[re(5.0), re(3.0), re(2.0)]).unwrap()
    }

    #[test]
    fn companion_scalar_example() {
        let p = companion_second_form(&sample()).unwrap();
        assert_eq!(p.p0(), &Matrix::from_real_rows(&[&[5.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(p.p1(), &Matrix::from_real_rows(&[&[-3.0, 1.0], &[-2.0, 0.0]]));
        // det(λC₁ − μC₀) expanded by hand.
        for (l, m) in [(0.3, 1.1), (-2.0, 0.5), (1.0, 0.0)] {
            let val = det(&(&p.p1().scale(re(l)) - &p.p0().scale(re(m))));
            let expect = 2.0 * l * l + 3.0 * l * m + 5.0 * m * m;
            assert!((val - re(expect)).norm() < 1e-12);
        }
    }

    #[test]
    fn companion_degree_one_is_negated_polynomial() {
        let a0 = Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let a1 = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = MatrixPolynomial::new(vec![a0.clone(), a1.clone()]).unwrap();
        let l = companion_second_form(&p).unwrap();
        assert_eq!(l.p0(), &a0);
        assert_eq!(l.p1(), &(-&a1));
        let constant = MatrixPolynomial::new(vec![a0]).unwrap();
        assert_eq!(companion_second_form(&constant), Err(Error::DegreeTooSmall(0)));
    }

    #[test]
    fn w_scalar_example_is_proportional() {
        let a = sample();
        let wl = w_linearization(&a, AnnihilatorMode::QrOrthonormal).unwrap();
        assert!((&(&wl.w * &wl.w.adjoint()) - &Matrix::identity(2)).max_abs() < 10.0 * EPS);
        assert!((&wl.w * &a.col_stack()).max_abs() < 1e-14);
        let pts = [(0.3, 1.1), (-2.0, 0.5), (1.0, 0.0), (0.7, -0.2)];
        let ratio = |l: f64, m: f64| det(&wl.pencil.eval(re(l), re(m))) / a.eval(re(l), re(m))[(0, 0)];
        let r0 = ratio(pts[0].0, pts[0].1);
        assert!(r0.norm() > 1e-3);
        for (l, m) in pts {
            assert!((ratio(l, m) - r0).norm() < 1e-12 * r0.norm());
        }
    }

    #[test]
    fn w_common_kernel() {
        let z = Matrix::from_real_rows(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let a = MatrixPolynomial::new(vec![z.clone(), z.scale(re(3.0)), z]).unwrap();
        assert!(matches!(
            w_linearization(&a, AnnihilatorMode::QrOrthonormal),
            Err(Error::CommonKernel { rank: 1, n: 2 })
        ));
    }

    #[test]
    fn w_user_supplied_checks() {
        let a = sample();
        let good = Matrix::from_real_rows(&[&[3.0, -5.0, 0.0], &[2.0, 0.0, -5.0]]);
        let wl = w_linearization(&a, AnnihilatorMode::UserSupplied(good)).unwrap();
        assert!(!wl.orthonormal);
        assert_eq!(wl.pencil.p0(), &Matrix::from_real_rows(&[&[-5.0, 0.0], &[0.0, -5.0]]));
        assert_eq!(wl.pencil.p1(), &Matrix::from_real_rows(&[&[3.0, -5.0], &[2.0, 0.0]]));
        let bad = Matrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        match w_linearization(&a, AnnihilatorMode::UserSupplied(bad)) {
            Err(Error::InvalidAnnihilator(msg)) => assert!(msg.starts_with("annihilation")),
            other => panic!("{other:?}"),
        }
        let low = Matrix::from_real_rows(&[&[3.0, -5.0, 0.0], &[6.0, -10.0, 0.0]]);
        match w_linearization(&a, AnnihilatorMode::UserSupplied(low)) {
            Err(Error::InvalidAnnihilator(msg)) => assert!(msg.starts_with("full row rank")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fiedler_identity_and_reversal() {
        let a = MatrixPolynomial::scalar(&[re(1.0), re(2.0), re(3.0), re(4.0)]).unwrap();
        let id = fiedler_pencil(&a, &[1, 2, 3]).unwrap();
        assert_eq!(id.p0(), &Matrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]));
        assert_eq!(id.p1(), &Matrix::from_real_rows(&[&[-2.0, -3.0, -4.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]));
        let rev = fiedler_pencil(&a, &[3, 2, 1]).unwrap();
        assert_eq!(rev.p0(), &Matrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 2.0], &[0.0, 1.0, 3.0]]));
        assert_eq!(rev.p1(), &Matrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, -4.0]]));
        assert!(matches!(fiedler_pencil(&a, &[1, 1, 3]), Err(Error::InvalidPermutation(_))));
        assert!(matches!(fiedler_pencil(&a, &[1, 2]), Err(Error::InvalidPermutation(_))));
    }

    #[test]
    fn dl_e1_quadratic_closed_form() {
        let a0 = Matrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let a1 = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 3.0]]);
        let a2 = Matrix::from_real_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        let a = MatrixPolynomial::new(vec![a0.clone(), a1.clone(), a2.clone()]).unwrap();
        let l = dl_pencil(&a, &[re(1.0), re(0.0)]).unwrap();
        let mut l0 = Matrix::zeros(4, 4);
        l0.set_block(0, 0, &a0);
        l0.set_block(2, 2, &(-&a2));
        let mut l1 = Matrix::zeros(4, 4);
        l1.set_block(0, 0, &(-&a1));
        l1.set_block(0, 2, &(-&a2));
        l1.set_block(2, 0, &(-&a2));
        assert!((l.p0() - &l0).max_abs() < 1e-13);
        assert!((l.p1() - &l1).max_abs() < 1e-13);
    }

    #[test]
    fn dl_residual_and_linearity() {
        let a = sample();
        for v in [[re(1.0), re(0.0)], [re(0.0), re(1.0)], [c(0.5, 1.0), c(-2.0, 0.25)]] {
            let l = dl_pencil(&a, &v).unwrap();
            let (res, z) = l2_residual(&l, &a).unwrap();
            assert!(res < 1e-12, "{res}");
            let z = z.unwrap();
            for j in 0..2 {
                assert!((z[(0, j)] - v[j].conj()).norm() < 1e-12);
            }
            let doubled: Vec<C64> = v.iter().map(|x| x * 2.0).collect();
            let l2 = dl_pencil(&a, &doubled).unwrap();
            assert!((l2.p0() - &l.p0().scale(re(2.0))).max_abs() < 1e-12);
            assert!((l2.p1() - &l.p1().scale(re(2.0))).max_abs() < 1e-12);
        }
        assert!(matches!(dl_pencil(&a, &[zero(), zero()]), Err(Error::DlConstruction(_))));
        assert!(matches!(dl_pencil(&a, &[re(1.0)]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn companion_lies_in_l2() {
        let a = sample();
        let (res, z) = l2_residual(&companion_second_form(&a).unwrap(), &a).unwrap();
        assert!(res < 1e-14);
        let z = z.unwrap();
        assert!((z[(0, 0)] - re(1.0)).norm() < 1e-14 && z[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn random_pencil_far_from_l2() {
        let a = sample();
        let l = Pencil::new(
            Matrix::from_real_rows(&[&[0.3, -1.0], &[0.8, 0.1]]),
            Matrix::from_real_rows(&[&[0.5, 0.9], &[-0.6, 0.2]]),
        )
        .unwrap();
        assert!(l2_residual(&l, &a).unwrap().0 > 1e-2);
    }

    #[test]
    fn orthobasis_monomial_is_companion() {
        let a = MatrixPolynomial::scalar(&[re(1.0), re(2.0), re(3.0), re(4.0)]).unwrap();
        let o = orthobasis_companion(&a, &Recurrence::monomial(3)).unwrap();
        assert_eq!(o, companion_second_form(&a).unwrap());
    }

    #[test]
    fn orthobasis_quadratic_determinant() {
        let rec = Recurrence::chebyshev(2);
        let a = MatrixPolynomial::scalar(&[re(2.0), re(-1.0), re(3.0)]).unwrap();
        let o = orthobasis_companion(&a, &rec).unwrap();
        // 2(1 − x²/4) − x + 3x²/2, expanded by hand.
        for x in [0.0, 0.5, -1.5, 2.0] {
            let val = det(&o.eval(re(x), re(1.0)));
            let expect = 2.0 * (1.0 - x * x / 4.0) - x + 1.5 * x * x;
            assert!((val - re(expect)).norm() < 1e-12);
        }
        let psi = orthobasis_scalar_basis(&rec).unwrap();
        assert!((psi[0][2] - re(-0.25)).norm() < 1e-12);
        assert!((psi[2][2] - re(0.5)).norm() < 1e-12);
    }

    #[test]
    fn orthobasis_block_pattern_and_lengths() {
        let a = MatrixPolynomial::scalar(&[re(1.0), re(2.0), re(3.0), re(4.0), re(5.0)]).unwrap();
        let rec = Recurrence {
            alpha: vec![re(0.1), re(0.2), re(0.3)],
            beta: vec![re(1.0), re(2.0), re(3.0), re(4.0)],
            gamma: vec![re(5.0), re(6.0), re(7.0)],
        };
        let o = orthobasis_companion(&a, &rec).unwrap();
        let c1 = o.p1();
        for i in 0..4 {
            for j in 1..4 {
                if (i as usize).abs_diff(j) > 1 {
                    assert_eq!(c1[(i, j)], zero());
                }
            }
        }
        assert_eq!(c1[(0, 0)], re(-2.0 + 1.0));
        assert_eq!(c1[(1, 0)], re(-3.0 + 0.1));
        assert_eq!(c1[(3, 0)], re(-5.0));
        assert_eq!(c1[(2, 3)], re(7.0));
        let short = Recurrence { alpha: vec![], ..rec };
        assert!(matches!(orthobasis_companion(&a, &short), Err(Error::InvalidRecurrence(_))));
    }
}
