//! Pencil duality: verification of `M₁L₀ = M₀L₁`-type relations, the QR and
//! identity-block constructions of duals, the bases-completion construction and the
//! explicit strong-equivalence witness between a pencil and its dual.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use core::f64::consts::PI;

use crate::dense::{
    c, inverse, rank_tolerance, re, sigma_min, singular_values, Lu, Matrix, PivotedQr, C64, EPS,
};
use crate::error::{Error, Result};
use crate::polycore::{HomogeneousEval, HomogeneousPoint, Pencil};

/// `(V, B)` with `[V; W]·[A B] = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisCompletion {
    pub v: Matrix,
    pub b: Matrix,
}

impl BasisCompletion {
    /// `‖[V; W][A B] − I‖_F`.
    pub fn identity_residual(&self, w: &Matrix, a: &Matrix) -> f64 {
        let top = Matrix::vstack(&[&self.v, w]);
        let right = Matrix::hstack(&[a, &self.b]);
        (&(&top * &right) - &Matrix::identity(top.rows())).norm_fro()
    }
}

/// Completes `A` ((m+n)×n, full column rank) and `W` (m×(m+n), full row
/// rank, `WA = 0`) to the pair of inverse matrices `[V; W]` and `[A B]`.
pub fn bases_completion(w: &Matrix, a: &Matrix) -> Result<BasisCompletion> {
    let total = a.rows();
    let n = a.cols();
    let m = w.rows();
    if w.cols() != total || m + n != total {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, A is {}x{}; need m×(m+n) and (m+n)×n",
            w.rows(),
            w.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let sa = singular_values(a);
    let sw = singular_values(w);
    let (amax, wmax) = (sa[0], sw[0]);
    if n > 0 && sa[n - 1] <= rank_tolerance(total, n, amax) {
        return Err(Error::RankDeficient("A does not have full column rank".into()));
    }
    if m > 0 && sw[m - 1] <= rank_tolerance(m, total, wmax) {
        return Err(Error::RankDeficient("W does not have full row rank".into()));
    }
    let wa = (w * a).norm_fro();
    if wa > 1e3 * (total as f64) * EPS * w.norm_fro() * a.norm_fro() {
        return Err(Error::Precondition(format!("‖WA‖ = {wa:e} is not zero")));
    }

    // Orthonormal completions: B̂ ⟂ range(A), V̂ rows ⟂ range(W^*).
    let qa = PivotedQr::new(a).q;
    let b_hat = qa.block(0, n, total, m);
    let qw = PivotedQr::new(&w.adjoint()).q;
    let v_hat = qw.block(0, m, total, n).adjoint();

    let r11 = &v_hat * a;
    let r12 = &v_hat * &b_hat;
    let r22 = w * &b_hat;
    let r11_inv = inverse(&r11).ok_or_else(|| Error::RankDeficient("R11 singular".into()))?;
    let r22_inv = inverse(&r22).ok_or_else(|| Error::RankDeficient("R22 singular".into()))?;
    // B = (B̂ − A R11⁻¹ R12) R22⁻¹, V = R11⁻¹ V̂
    let correction = &(a * &r11_inv) * &r12;
    let b = &(&b_hat - &correction) * &r22_inv;
    let v = &r11_inv * &v_hat;
    Ok(BasisCompletion { v, b })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityTolerance {
    /// Commutation residuals are compared against `relative·‖L‖_F·‖M‖_F`.
    pub relative: f64,
}

impl Default for DualityTolerance {
    fn default() -> Self {
        Self { relative: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    LeftDual,
    RightDual,
    Both,
    Neither,
}

impl Verdict {
    pub fn is_left(self) -> bool {
        matches!(self, Verdict::LeftDual | Verdict::Both)
    }

    pub fn is_right(self) -> bool {
        matches!(self, Verdict::RightDual | Verdict::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LeftDual => "left_dual",
            Verdict::RightDual => "right_dual",
            Verdict::Both => "both",
            Verdict::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityCertificate {
    /// `‖M₁L₀ − M₀L₁‖_F`.
    pub commute_residual: f64,
    /// `‖row{M}·J·col{L}‖_F`; the same matrix as above, rearranged.
    pub j_form_residual: f64,
    /// `‖L₀M₁ − L₁M₀‖_F`.
    pub right_commute_residual: f64,
    pub row_rank_margin: f64,
    pub col_rank_margin: f64,
    /// Threshold the commute residuals were compared against.
    pub tolerance: f64,
    pub rank_tolerance: f64,
    pub verdict: Verdict,
}

pub fn verify_dual(m: &Pencil, l: &Pencil) -> Result<DualityCertificate> {
    verify_dual_with(m, l, DualityTolerance::default())
}

pub fn verify_dual_with(m: &Pencil, l: &Pencil, tol: DualityTolerance) -> Result<DualityCertificate> {
    if m.size() != l.size() {
        return Err(Error::DimensionMismatch(format!("pencil sizes {} and {}", m.size(), l.size())));
    }
    let nn = m.size();
    let commute = &(m.p1() * l.p0()) - &(m.p0() * l.p1());
    let commute_residual = commute.norm_fro();
    let mut jmat = Matrix::zeros(2 * nn, 2 * nn);
    jmat.set_block(0, nn, &Matrix::identity(nn));
    jmat.set_block(nn, 0, &(-&Matrix::identity(nn)));
    let j_form_residual = (&(&m.row_stack() * &jmat) * &l.col_stack()).norm_fro();
    let right_commute_residual = (&(l.p0() * m.p1()) - &(l.p1() * m.p0())).norm_fro();

    let row_sv = singular_values(&m.row_stack());
    let col_sv = singular_values(&m.col_stack());
    let row_rank_margin = row_sv.last().copied().unwrap_or(0.0);
    let col_rank_margin = col_sv.last().copied().unwrap_or(0.0);
    let rank_tol = rank_tolerance(nn, 2 * nn, row_sv[0].max(col_sv[0]));
    let tolerance = tol.relative * m.norm_fro() * l.norm_fro();
    let left = commute_residual <= tolerance && row_rank_margin > rank_tol;
    let right = right_commute_residual <= tolerance && col_rank_margin > rank_tol;
    let verdict = match (left, right) {
        (true, true) => Verdict::Both,
        (true, false) => Verdict::LeftDual,
        (false, true) => Verdict::RightDual,
        (false, false) => Verdict::Neither,
    };
    Ok(DualityCertificate {
        commute_residual,
        j_form_residual,
        right_commute_residual,
        row_rank_margin,
        col_rank_margin,
        tolerance,
        rank_tolerance: rank_tol,
        verdict,
    })
}

/// Trailing `N` columns of the pivoted-QR `Q` of a `2N × N` stack, after
/// checking that the stack has full column rank.
fn stack_complement(stack: &Matrix, what: &str) -> Result<(Matrix, Matrix)> {
    let nn = stack.cols();
    let f = PivotedQr::new(stack);
    if f.rank() < nn {
        return Err(Error::RankDeficient(format!("{what} has rank {} < {nn}", f.rank())));
    }
    Ok((f.q.block(0, nn, nn, nn), f.q.block(nn, nn, nn, nn)))
}

/// Left dual via QR of `[L₀; L₁]`: `M₁ = Q₁₂^*`, `M₀ = −Q₂₂^*`.
pub fn left_dual_qr(l: &Pencil) -> Result<Pencil> {
    let (q12, q22) = stack_complement(&l.col_stack(), "column stack [L0; L1]")?;
    Pencil::new(-&q22.adjoint(), q12.adjoint())
}

/// Right dual via QR of `[L₀ L₁]^*`: `M₁ = Q₁₂`, `M₀ = −Q₂₂`.
pub fn right_dual_qr(l: &Pencil) -> Result<Pencil> {
    let stack = l.row_stack().adjoint();
    let (q12, q22) = stack_complement(&stack, "row stack [L0 L1]")?;
    Pencil::new(-&q22, q12)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityBlockMode {
    /// Selected rows must form `I_N` exactly.
    ExactIdentity,
    /// Selected rows form an invertible `Y`; `X = Z Y⁻¹`.
    InvertY,
}

/// Condition number above which the `InvertY` block is rejected.
pub const MAX_BLOCK_CONDITION: f64 = 1e12;

/// Left dual by enforcing an identity block. `pi[k]` is the row of `[L₀; L₁]`
/// placed at position `k` of `[Y; Z]`, so `[L₀; L₁] = Π [Y; Z]`. Returns the
/// pencil with `[M₁ −M₀] = [−X I] Π⁻¹`.
pub fn dual_identity_block(l: &Pencil, pi: &[usize], mode: IdentityBlockMode) -> Result<Pencil> {
    let nn = l.size();
    check_permutation(pi, 2 * nn)?;
    let stack = l.col_stack();
    let y = stack.select_rows(&pi[..nn]);
    let z = stack.select_rows(&pi[nn..]);
    let x = match mode {
        IdentityBlockMode::ExactIdentity => {
            let deviation = (&y - &Matrix::identity(nn)).max_abs();
            if deviation > 8.0 * EPS {
                return Err(Error::NotIdentityBlock { deviation });
            }
            z
        }
        IdentityBlockMode::InvertY => {
            let sv = singular_values(&y);
            let smin = sv[nn - 1];
            let cond = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
            if cond > MAX_BLOCK_CONDITION {
                return Err(Error::SingularBlock { cond });
            }
            // X = Z Y⁻¹  ⇔  Y^T X^T = Z^T
            let xt = Lu::new(&y.transpose())
                .solve(&z.transpose())
                .ok_or(Error::SingularBlock { cond })?;
            xt.transpose()
        }
    };
    let mut out = Matrix::zeros(nn, 2 * nn);
    for k in 0..nn {
        for i in 0..nn {
            out[(i, pi[k])] = -x[(i, k)];
            out[(i, pi[nn + k])] = if i == k { re(1.0) } else { C64::new(0.0, 0.0) };
        }
    }
    let m1 = out.block(0, 0, nn, nn);
    let m0 = -&out.block(0, nn, nn, nn);
    Pencil::new(m0, m1)
}

/// Expands a 1-based permutation of blocks of size `block` into a 0-based row
/// permutation, e.g. `(1,3,6,4,5,2)` with `block = n`.
pub fn expand_block_permutation(blocks: &[usize], block: usize) -> Result<Vec<usize>> {
    let zero_based: Vec<usize> = blocks.iter().map(|&b| b.wrapping_sub(1)).collect();
    check_permutation(&zero_based, blocks.len())?;
    Ok(zero_based.iter().flat_map(|&b| (0..block).map(move |i| b * block + i)).collect())
}

pub(crate) fn check_permutation(p: &[usize], len: usize) -> Result<()> {
    if p.len() != len {
        return Err(Error::InvalidPermutation(format!("length {} (expected {len})", p.len())));
    }
    let mut seen = alloc::vec![false; len];
    for &i in p {
        if i >= len || seen[i] {
            return Err(Error::InvalidPermutation(format!("{p:?} is not a permutation of 0..{len}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Deterministic anchor grid: 17 real-circle points `(cos θ, sin θ)`,
/// `θ = kπ/17`, followed by 4 points with complex phases.
pub fn anchor_grid() -> Vec<HomogeneousPoint> {
    let mut g: Vec<HomogeneousPoint> =
        (0..17).map(|k| HomogeneousPoint::on_circle(k as f64 * PI / 17.0)).collect();
    for (theta, phi) in [(PI / 4.0, PI / 4.0), (PI / 4.0, 3.0 * PI / 4.0), (PI / 5.0, PI / 3.0), (2.0 * PI / 7.0, -PI / 3.0)] {
        let ph = c(phi.cos(), phi.sin());
        g.push(HomogeneousPoint::new(ph * theta.cos(), re(theta.sin())));
    }
    g
}

/// `σ_min(P(pt)) / ‖P(pt)‖_F`, zero for an exactly singular evaluation.
pub fn relative_sigma_min(p: &dyn HomogeneousEval, pt: &HomogeneousPoint) -> f64 {
    let m = p.eval_at(pt);
    let f = m.norm_fro();
    if f == 0.0 {
        0.0
    } else {
        sigma_min(&m) / f
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceWitness {
    /// `E·M(λ,μ)·F = L(λ,μ)`.
    pub e: Matrix,
    pub f: Matrix,
    pub anchor: HomogeneousPoint,
    /// Largest relative residual of the identity over the check points.
    pub max_residual: f64,
}

/// Explicit constant matrices realizing the strong equivalence between a
/// pencil and its (left or right) dual.
pub fn equivalence_witness(m: &Pencil, l: &Pencil, cert: &DualityCertificate) -> Result<EquivalenceWitness> {
    if m.size() != l.size() {
        return Err(Error::DimensionMismatch("pencil sizes differ".into()));
    }
    if !cert.verdict.is_left() && !cert.verdict.is_right() {
        return Err(Error::Precondition("pencils are not duals of each other".into()));
    }
    let nn = m.size();
    let (anchor, score) = anchor_grid()
        .into_iter()
        .map(|pt| {
            let s = relative_sigma_min(m, &pt).min(relative_sigma_min(l, &pt));
            (pt, s)
        })
        .fold((HomogeneousPoint::zero(), -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if score <= (nn as f64) * EPS {
        return Err(Error::NoAnchor);
    }
    let m_a = m.eval_at(&anchor);
    let l_a = l.eval_at(&anchor);
    let (e, f) = if cert.verdict.is_left() {
        (inverse(&m_a).ok_or(Error::NoAnchor)?, l_a)
    } else {
        (l_a, inverse(&m_a).ok_or(Error::NoAnchor)?)
    };
    let checks = [
        HomogeneousPoint::new(c(0.3, 0.1), re(1.0)),
        HomogeneousPoint::new(re(1.0), c(-0.7, 0.4)),
        HomogeneousPoint::new(c(-1.3, 2.0), c(0.5, -0.2)),
    ];
    let max_residual = checks
        .iter()
        .map(|pt| witness_residual(&e, &f, m, l, pt))
        .fold(0.0, f64::max);
    Ok(EquivalenceWitness { e, f, anchor, max_residual })
}

/// `‖E M(pt) F − L(pt)‖_F / ‖L(pt)‖_F`.
pub fn witness_residual(e: &Matrix, f: &Matrix, m: &Pencil, l: &Pencil, pt: &HomogeneousPoint) -> f64 {
    let lhs = &(e * &m.eval_at(pt)) * f;
    let rhs = l.eval_at(pt);
    (&lhs - &rhs).norm_fro() / rhs.norm_fro().max(f64::MIN_POSITIVE)
}

/// Least-squares `S` with `row{M'} ≈ S·row{M}` and the relative residual.
pub fn left_factor(m_prime: &Pencil, m: &Pencil) -> Option<(Matrix, f64)> {
    let a = m.row_stack().transpose();
    let b = m_prime.row_stack().transpose();
    let st = crate::dense::lstsq(&a, &b)?;
    let s = st.transpose();
    let res = (&(&s * &m.row_stack()) - &m_prime.row_stack()).norm_fro() / m_prime.norm_fro();
    Some((s, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_coordinate_subspaces() {
        let w = Matrix::from_real_rows(&[&[0.0, 1.0]]);
        let a = Matrix::from_real_rows(&[&[1.0], &[0.0]]);
        let bc = bases_completion(&w, &a).unwrap();
        assert!((&bc.v - &Matrix::from_real_rows(&[&[1.0, 0.0]])).max_abs() < 1e-15);
        assert!((&bc.b - &Matrix::from_real_rows(&[&[0.0], &[1.0]])).max_abs() < 1e-15);
    }

    #[test]
    fn completion_orthogonal_direct_sum() {
        let base = Matrix::from_fn(5, 5, |i, j| c((i * j) as f64 * 0.37 - 1.0, (i + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }));
        let q = PivotedQr::new(&base).q;
        let a = q.block(0, 0, 5, 2);
        let w = q.block(0, 2, 5, 3).adjoint();
        let bc = bases_completion(&w, &a).unwrap();
        assert!((&bc.b - &w.adjoint()).max_abs() < 1e-13);
        assert!((&bc.v - &a.adjoint()).max_abs() < 1e-13);
        assert!(bc.identity_residual(&w, &a) < 1e-13);
    }

    #[test]
    fn completion_rejects_bad_input() {
        let w = Matrix::from_real_rows(&[&[1.0, 1.0]]);
        let a = Matrix::from_real_rows(&[&[1.0], &[0.0]]);
        assert!(matches!(bases_completion(&w, &a), Err(Error::Precondition(_))));
        let w0 = Matrix::zeros(1, 2);
        assert!(matches!(bases_completion(&w0, &a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn identity_block_trivial_case() {
        let x = Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let l = Pencil::new(Matrix::identity(2), x.clone()).unwrap();
        let m = dual_identity_block(&l, &[0, 1, 2, 3], IdentityBlockMode::ExactIdentity).unwrap();
        assert_eq!(m.p1(), &(-&x));
        assert_eq!(m.p0(), &(-&Matrix::identity(2)));
        let cert = verify_dual(&m, &l).unwrap();
        assert!(cert.verdict.is_left());
    }

    #[test]
    fn identity_block_errors() {
        let l = Pencil::new(Matrix::identity(2).scale(re(2.0)), Matrix::identity(2)).unwrap();
        assert!(matches!(
            dual_identity_block(&l, &[0, 1, 2, 3], IdentityBlockMode::ExactIdentity),
            Err(Error::NotIdentityBlock { .. })
        ));
        let sing = Pencil::new(Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), Matrix::identity(2)).unwrap();
        assert!(matches!(
            dual_identity_block(&sing, &[0, 1, 2, 3], IdentityBlockMode::InvertY),
            Err(Error::SingularBlock { .. })
        ));
        assert!(matches!(
            dual_identity_block(&l, &[0, 1, 1, 3], IdentityBlockMode::InvertY),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn qr_duals_of_rank_deficient_stacks_fail() {
        let z = Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let l = Pencil::new(z.clone(), z).unwrap();
        assert!(matches!(left_dual_qr(&l), Err(Error::RankDeficient(_))));
        assert!(matches!(right_dual_qr(&l), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn verify_self_duality() {
        let a = Matrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let b = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let l = Pencil::new(a.clone(), b.clone()).unwrap();
        let cert = verify_dual(&l, &l).unwrap();
        let expect = (&(&b * &a) - &(&a * &b)).norm_fro();
        assert!((cert.commute_residual - expect).abs() < 1e-14);
        assert!((cert.commute_residual - cert.j_form_residual).abs() <= 4.0 * EPS * expect);
        assert_eq!(cert.verdict, Verdict::Neither);
        let diag = Pencil::new(Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]), Matrix::identity(2)).unwrap();
        let cert = verify_dual(&diag, &diag).unwrap();
        assert_eq!(cert.commute_residual, 0.0);
        assert_eq!(cert.verdict, Verdict::Both);
    }

    #[test]
    fn block_permutation_expansion() {
        let p = expand_block_permutation(&[1, 3, 2], 2).unwrap();
        assert_eq!(p, alloc::vec![0, 1, 4, 5, 2, 3]);
        assert!(expand_block_permutation(&[1, 1, 2], 2).is_err());
        assert!(expand_block_permutation(&[0, 1, 2], 2).is_err());
    }

    #[test]
    fn grid_has_21_points() {
        let g = anchor_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], HomogeneousPoint::new(re(1.0), re(0.0)));
    }
}
