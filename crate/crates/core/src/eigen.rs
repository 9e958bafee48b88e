//! Generalized eigenproblems for pencils and the maps that carry eigenvectors
//! between a matrix polynomial, its companion form and its W-linearization.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dense::{direction_distance, normalized, sigma_min, svd, vec_norm, Lu, Matrix, C64};
use crate::duality::anchor_grid;
use crate::error::{Error, Result};
use crate::linearize::WLinearization;
use crate::polycore::{chordal_distance, EigenTriple, HomogeneousEval, HomogeneousPoint, MatrixPolynomial, Pencil};
use crate::qz::qz;

#[derive(Clone, Debug)]
pub struct PencilEigenSolution {
    pub triples: Vec<EigenTriple>,
    /// Free-form tag naming the pencil the triples belong to.
    pub source: String,
    /// `max(‖P x‖, ‖y^*P‖) / (|μ|‖P₀‖ + |λ|‖P₁‖)` per triple.
    pub backward_errors: Vec<f64>,
}

impl PencilEigenSolution {
    pub fn eigenvalues(&self) -> Vec<HomogeneousPoint> {
        self.triples.iter().map(|t| t.point).collect()
    }

    pub fn max_backward_error(&self) -> f64 {
        self.backward_errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn solve_pencil(p: &Pencil) -> Result<PencilEigenSolution> {
    solve_pencil_tagged(p, "pencil")
}

/// QZ on `(P₀, P₁)`; eigenvalues come out as `(λ, μ) = (S_kk, T_kk)`.
pub fn solve_pencil_tagged(p: &Pencil, source: &str) -> Result<PencilEigenSolution> {
    let nn = p.size();
    let (n0, n1) = (p.p0().norm_fro(), p.p1().norm_fro());
    if !(p.p0().is_finite() && p.p1().is_finite()) {
        return Err(Error::SingularPencil("non-finite coefficients".into()));
    }
    let schur = qz(p.p0(), p.p1())?;
    let tol = 10.0 * (nn as f64) * crate::dense::EPS;
    let mut triples = Vec::with_capacity(nn);
    for (k, (s, t)) in schur.pairs().into_iter().enumerate() {
        if s.norm() <= tol * n0 && t.norm() <= tol * n1 {
            return Err(Error::SingularPencil(format!("diagonal pair {k} of the generalized Schur form vanishes")));
        }
        let pt = HomogeneousPoint::try_new(s, t)
            .ok_or_else(|| Error::SingularPencil(format!("diagonal pair {k} is zero")))?;
        let x = schur.right_vector(k);
        let y = schur.left_vector(k);
        triples.push(EigenTriple::new(p, pt, &x, &y));
    }
    triples.sort_by(|a, b| {
        let (ka, kb) = (a.point.ordering_key(), b.point.ordering_key());
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let backward_errors = triples
        .iter()
        .map(|t| {
            let scale = t.point.mu().norm() * n0 + t.point.lambda().norm() * n1;
            t.residual_right.max(t.residual_left) / scale.max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(PencilEigenSolution { triples, source: source.into(), backward_errors })
}

/// Relative residual `max(‖A x‖, ‖y^*A‖) / Σ |λ|^i |μ|^{d−i} ‖A_i‖` used to
/// accept an eigentriple of a polynomial.
pub fn polynomial_backward_error(a: &MatrixPolynomial, pt: &HomogeneousPoint, x: &[C64], y: &[C64]) -> f64 {
    let (rr, rl) = crate::polycore::residual_norm(a, pt, &normalized(x), &normalized(y));
    rr.max(rl) / weighted_norm(a, pt).max(f64::MIN_POSITIVE)
}

/// `Σ |λ|^i |μ|^{d−i} ‖A_i‖_F`.
pub fn weighted_norm(a: &MatrixPolynomial, pt: &HomogeneousPoint) -> f64 {
    let (l, m) = (pt.lambda().norm(), pt.mu().norm());
    let d = a.degree() as i32;
    a.coeffs().iter().enumerate().map(|(i, c)| l.powi(i as i32) * m.powi(d - i as i32) * c.norm_fro()).sum()
}

/// Backward error above which `companion_vectors_forward` rejects its input.
pub const EIGENTRIPLE_TOL: f64 = 1e-6;

/// Companion eigenvectors `(x̂, ŷ)` built from an eigentriple of `A`.
///
/// `x̂` uses the `λ ≠ 0` expression when `|λ| ≥ |μ|` and the `μ ≠ 0` one
/// otherwise, with every ratio bounded by one. `ŷ` has blocks
/// `conj(μ^{d−1−k} λ^k) y`.
pub fn companion_vectors_forward(
    a: &MatrixPolynomial,
    x: &[C64],
    y: &[C64],
    pt: &HomogeneousPoint,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let err = polynomial_backward_error(a, pt, x, y);
    if !(err <= EIGENTRIPLE_TOL) {
        return Err(Error::Precondition(format!("not an eigentriple (backward error {err:e})")));
    }
    let x_hat = if pt.lambda().norm() >= pt.mu().norm() {
        companion_x_lambda_branch(a, x, pt)
    } else {
        companion_x_mu_branch(a, x, pt)
    };
    let (n, d) = (a.n(), a.degree());
    let (l, m) = (pt.lambda(), pt.mu());
    let mut y_hat = Vec::with_capacity(n * d);
    for k in 0..d {
        let w = (m.powu((d - 1 - k) as u32) * l.powu(k as u32)).conj();
        y_hat.extend(y.iter().map(|&v| w * v));
    }
    Ok((x_hat, y_hat))
}

/// `x̂` blocks `Σ_{j≤k} (μ/λ)^{k−j} A_j x` for `k ≥ 1`, first block `x`.
pub fn companion_x_lambda_branch(a: &MatrixPolynomial, x: &[C64], pt: &HomogeneousPoint) -> Vec<C64> {
    let s = pt.mu() / pt.lambda();
    let (n, d) = (a.n(), a.degree());
    let mut out = x.to_vec();
    let mut acc = a.coeff(0).mul_vec(x);
    for k in 1..d {
        let ak = a.coeff(k).mul_vec(x);
        acc = acc.iter().zip(&ak).map(|(&p, &q)| p * s + q).collect();
        out.extend_from_slice(&acc);
    }
    debug_assert_eq!(out.len(), n * d);
    out
}

/// `x̂` blocks `−Σ_{j>k} (λ/μ)^{j−k} A_j x` for `k ≥ 1`, first block `x`.
pub fn companion_x_mu_branch(a: &MatrixPolynomial, x: &[C64], pt: &HomogeneousPoint) -> Vec<C64> {
    let t = pt.lambda() / pt.mu();
    let (n, d) = (a.n(), a.degree());
    let mut blocks: Vec<Vec<C64>> = Vec::with_capacity(d);
    let mut acc: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); n];
    for k in (1..d).rev() {
        let ak = a.coeff(k + 1).mul_vec(x);
        acc = acc.iter().zip(&ak).map(|(&p, &q)| (p - q) * t).collect();
        blocks.push(acc.clone());
    }
    let mut out = x.to_vec();
    for b in blocks.into_iter().rev() {
        out.extend(b);
    }
    out
}

/// Polynomial eigentriple read off a companion-pencil triple: `x` is the
/// first block of `x̂`, `y` the first or last block of `ŷ`, whichever carries
/// the larger power.
pub fn companion_to_polynomial(a: &MatrixPolynomial, t: &EigenTriple) -> EigenTriple {
    let (n, d) = (a.n(), a.degree());
    let x = &t.x[..n];
    let y = if t.point.mu().norm() >= t.point.lambda().norm() { &t.y[..n] } else { &t.y[(d - 1) * n..] };
    EigenTriple::new(a, t.point, x, y)
}

/// Right and left null vectors of `A(pt)` from its smallest singular triple.
pub fn polynomial_vectors_by_svd(a: &MatrixPolynomial, pt: &HomogeneousPoint) -> EigenTriple {
    let f = svd(&a.eval_at(pt));
    let last = f.s.len() - 1;
    EigenTriple::new(a, *pt, &f.v.column(last), &f.u.column(last))
}

/// Eigentriples of `A` from QZ on its companion form.
pub fn companion_triples(a: &MatrixPolynomial) -> Result<Vec<EigenTriple>> {
    let c = crate::linearize::companion_second_form(a)?;
    let sol = solve_pencil_tagged(&c, "companion")?;
    Ok(sol.triples.iter().map(|t| companion_to_polynomial(a, t)).collect())
}

/// Grid anchor maximizing `σ_min(A(α,β))`, and the best one at chordal
/// distance at least `separation` from it.
pub fn choose_anchors(a: &dyn HomogeneousEval, separation: f64) -> Result<(HomogeneousPoint, HomogeneousPoint)> {
    let scored: Vec<(HomogeneousPoint, f64)> =
        anchor_grid().into_iter().map(|pt| (pt, sigma_min(&a.eval_at(&pt)))).collect();
    let best = scored
        .iter()
        .copied()
        .fold((HomogeneousPoint::zero(), -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let scale = scored.iter().map(|(pt, _)| a.eval_at(pt).norm_fro()).fold(0.0, f64::max);
    let floor = (a.dim() as f64) * 1e3 * crate::dense::EPS * scale;
    if !(best.1 > floor) {
        return Err(Error::NoAnchor);
    }
    let second = scored
        .iter()
        .copied()
        .filter(|(pt, _)| chordal_distance(pt, &best.0) >= separation)
        .fold((HomogeneousPoint::zero(), -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if !(second.1 > floor) {
        return Err(Error::NoAnchor);
    }
    Ok((best.0, second.0))
}

/// Eigenvectors of `W(λ,μ)` for one anchor, through `C(α,β)x̂`,
/// `W(α,β)^{−*}ŷ` and through the closed forms.
#[derive(Clone, Debug)]
pub struct AnchorRecovery {
    pub anchor: HomogeneousPoint,
    pub x_anchor_route: Vec<C64>,
    pub y_anchor_route: Vec<C64>,
    pub x_closed_form: Vec<C64>,
    pub y_closed_form: Vec<C64>,
}

impl AnchorRecovery {
    /// Sine of the angles between the two routes, `(x, y)`.
    pub fn route_gaps(&self) -> (f64, f64) {
        (
            direction_distance(&self.x_anchor_route, &self.x_closed_form),
            direction_distance(&self.y_anchor_route, &self.y_closed_form),
        )
    }

    /// `‖x̌‖·‖y̌‖` of the closed forms.
    pub fn closed_form_norm_product(&self) -> f64 {
        vec_norm(&self.x_closed_form) * vec_norm(&self.y_closed_form)
    }
}

#[derive(Clone, Debug)]
pub struct WRecovery {
    pub point: HomogeneousPoint,
    pub anchors: [AnchorRecovery; 2],
    /// Closed-form vectors at the first anchor, normalized, as a triple on
    /// the W pencil.
    pub triple: EigenTriple,
    /// Largest sine between the two anchors' directions, `(x, y)`.
    pub anchor_gaps: (f64, f64),
}

impl WRecovery {
    pub fn max_route_gap(&self) -> f64 {
        self.anchors.iter().map(|r| {
            let (gx, gy) = r.route_gaps();
            gx.max(gy)
        })
        .fold(0.0, f64::max)
    }

    /// `max(‖W x̌‖, ‖y̌^*W‖) / (|μ|‖W₀‖ + |λ|‖W₁‖)` for unit vectors.
    pub fn relative_residual(&self, wl: &WLinearization) -> f64 {
        let p = &wl.pencil;
        let scale = self.point.mu().norm() * p.p0().norm_fro() + self.point.lambda().norm() * p.p1().norm_fro();
        self.triple.residual_right.max(self.triple.residual_left) / scale
    }
}

/// `x̌`, `y̌` for an eigentriple `(pt, x, y)` of `A`, computed at two anchors
/// and by both routes.
pub fn recover_w_vectors(wl: &WLinearization, a: &MatrixPolynomial, t: &EigenTriple) -> Result<WRecovery> {
    if wl.n() != a.n() || wl.degree() != a.degree() {
        return Err(Error::DimensionMismatch("W-linearization does not belong to this polynomial".into()));
    }
    let (x_hat, y_hat) = companion_vectors_forward(a, &t.x, &t.y, &t.point)?;
    let c = crate::linearize::companion_second_form(a)?;
    let (first, second) = choose_anchors(a, core::f64::consts::PI / 8.0)?;
    let r1 = recover_at_anchor(wl, a, &c, t, &x_hat, &y_hat, first)?;
    let r2 = recover_at_anchor(wl, a, &c, t, &x_hat, &y_hat, second)?;
    let anchor_gaps = (
        direction_distance(&r1.x_closed_form, &r2.x_closed_form),
        direction_distance(&r1.y_closed_form, &r2.y_closed_form),
    );
    let triple = EigenTriple::new(&wl.pencil, t.point, &r1.x_closed_form, &r1.y_closed_form);
    Ok(WRecovery { point: t.point, anchors: [r1, r2], triple, anchor_gaps })
}

fn recover_at_anchor(
    wl: &WLinearization,
    a: &MatrixPolynomial,
    c: &Pencil,
    t: &EigenTriple,
    x_hat: &[C64],
    y_hat: &[C64],
    anchor: HomogeneousPoint,
) -> Result<AnchorRecovery> {
    let (al, be) = (anchor.lambda(), anchor.mu());
    // C(α,β) = αC₁ − βC₀ is the negated stored evaluation.
    let x_anchor_route: Vec<C64> = c.eval_at(&anchor).mul_vec(x_hat).into_iter().map(|v| -v).collect();
    let w_adj = wl.pencil.eval_at(&anchor).adjoint();
    let y_anchor_route = Lu::new(&w_adj)
        .solve(&Matrix::column_vector(y_hat))
        .ok_or(Error::NoAnchor)?
        .column(0);

    let (l, m) = (t.point.lambda(), t.point.mu());
    let (n, d) = (a.n(), a.degree());
    let factor = be * l - al * m;
    let mut lifted = Vec::with_capacity((d + 1) * n);
    for i in 0..=d {
        let w = (m.powu((d - i) as u32) * l.powu(i as u32)).conj();
        lifted.extend(t.y.iter().map(|&v| w * v));
    }
    let inv = C64::new(1.0, 0.0) / factor;
    let y_closed_form: Vec<C64> =
        wl.completion.b.adjoint().mul_vec(&lifted).into_iter().map(|v| v * inv.conj()).collect();

    let x_closed_form = if l.norm() >= m.norm() {
        let s = m / l;
        let scale = factor / l;
        let mut acc: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); n];
        let mut out = Vec::with_capacity(n * d);
        for k in 0..d {
            let ak = a.coeff(k).mul_vec(&t.x);
            acc = acc.iter().zip(&ak).map(|(&p, &q)| p * s + q).collect();
            out.extend(acc.iter().map(|&v| v * scale));
        }
        out
    } else {
        let tt = l / m;
        let scale = -factor / m;
        let mut blocks: Vec<Vec<C64>> = Vec::with_capacity(d);
        let mut acc: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); n];
        for k in (0..d).rev() {
            let ak = a.coeff(k + 1).mul_vec(&t.x);
            acc = acc.iter().zip(&ak).map(|(&p, &q)| p * tt + q).collect();
            blocks.push(acc.iter().map(|&v| v * scale).collect());
        }
        blocks.into_iter().rev().flatten().collect()
    };
    Ok(AnchorRecovery { anchor, x_anchor_route, y_anchor_route, x_closed_form, y_closed_form })
}
