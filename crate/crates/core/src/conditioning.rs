//! Eigenvalue condition numbers of pencils and matrix polynomials, the
//! constant `T(d)` and the upper bound for `κ_W`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use core::f64::consts::PI;

use rand::Rng;

use crate::dense::{c, dot, singular_values, vec_norm, Matrix, C64, EPS};
use crate::eigen::{recover_w_vectors, solve_pencil};
use crate::error::Result;
use crate::linearize::WLinearization;
use crate::polycore::{chordal_distance, EigenTriple, HomogeneousPoint, MatrixPolynomial, Pencil};

/// Largest singular value of the `d × d` upper-triangular all-ones matrix.
pub fn t_of_d(d: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let m = Matrix::from_fn(d, d, |i, j| if j >= i { c(1.0, 0.0) } else { c(0.0, 0.0) });
    singular_values(&m)[0]
}

/// `1 / (2 sin(π/(2d+2)))`, the closed form as printed. Off at small `d`
/// (`0.707` at `d = 1`).
pub fn t_of_d_printed(d: usize) -> f64 {
    1.0 / (2.0 * (PI / (2.0 * d as f64 + 2.0)).sin())
}

/// `1 / (2 sin(π/(4d+2)))`, which matches the SVD value.
pub fn t_of_d_corrected(d: usize) -> f64 {
    1.0 / (2.0 * (PI / (4.0 * d as f64 + 2.0)).sin())
}

/// `‖|Λ|_{λ,μ}‖₂` with `|Λ| = (|λ|^d, |λ|^{d−1}|μ|, …, |μ|^d)`.
pub fn lambda_norm(pt: &HomogeneousPoint, d: usize) -> f64 {
    let (l, m) = (pt.lambda().norm(), pt.mu().norm());
    (0..=d).map(|i| (l.powi(i as i32) * m.powi((d - i) as i32)).powi(2)).sum::<f64>().sqrt()
}

/// `κ = (|λ|²‖P₁‖² + |μ|²‖P₀‖²)^{1/2} ‖x‖‖y‖ / |y^*(μ̄P₁ + λ̄P₀)x|`.
/// Returns `f64::INFINITY` when the denominator vanishes to roundoff.
pub fn pencil_eig_condition(p: &Pencil, pt: &HomogeneousPoint, x: &[C64], y: &[C64]) -> f64 {
    let (l, m) = (pt.lambda(), pt.mu());
    let (n0, n1) = (p.p0().norm2(), p.p1().norm2());
    let op = &p.p1().scale(m.conj()) + &p.p0().scale(l.conj());
    let den = dot(y, &op.mul_vec(x)).norm();
    let (nx, ny) = (vec_norm(x), vec_norm(y));
    if den <= (p.size() as f64) * EPS * (n0 + n1) * nx * ny {
        return f64::INFINITY;
    }
    (l.norm_sqr() * n1 * n1 + m.norm_sqr() * n0 * n0).sqrt() * nx * ny / den
}

pub fn pencil_triple_condition(p: &Pencil, t: &EigenTriple) -> f64 {
    pencil_eig_condition(p, &t.point, &t.x, &t.y)
}

/// `|y^*(μ̄ ∂_λA − λ̄ ∂_μA)(λ,μ) x|`.
pub fn polynomial_denominator(a: &MatrixPolynomial, pt: &HomogeneousPoint, x: &[C64], y: &[C64]) -> f64 {
    let (dl, dm) = a.partials(pt.lambda(), pt.mu());
    let op = &dl.scale(pt.mu().conj()) - &dm.scale(pt.lambda().conj());
    dot(y, &op.mul_vec(x)).norm()
}

/// Polynomial condition number with weights `(Σ |λ|^{2i}|μ|^{2(d−i)} ‖A_i‖²)^{1/2}`.
pub fn polynomial_eig_condition(a: &MatrixPolynomial, pt: &HomogeneousPoint, x: &[C64], y: &[C64]) -> f64 {
    let (l, m) = (pt.lambda().norm(), pt.mu().norm());
    let d = a.degree();
    let weights: f64 = a
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, ai)| (l.powi(i as i32) * m.powi((d - i) as i32) * ai.norm2()).powi(2))
        .sum::<f64>()
        .sqrt();
    let den = polynomial_denominator(a, pt, x, y);
    let (nx, ny) = (vec_norm(x), vec_norm(y));
    if den <= (a.n() as f64) * EPS * weights * nx * ny {
        return f64::INFINITY;
    }
    weights * nx * ny / den
}

/// Ratio below which `ConditionReport::problematic` is set.
pub const NEAR_ORTHOGONAL_RATIO: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub point: HomogeneousPoint,
    /// `κ_W` evaluated on the recovered `x̌`, `y̌`.
    pub kappa_pencil: f64,
    pub kappa_poly: f64,
    pub bound_general: f64,
    pub bound_orthonormal: Option<f64>,
    pub t_d: f64,
    pub lambda_norm: f64,
    pub denominator: f64,
    /// `Σ |λ|^i|μ|^{d−i}‖A_i‖ / (‖|Λ|‖ ‖col A‖)`.
    pub diagnostic_ratio: f64,
    pub problematic: bool,
}

/// Condition of one eigenvalue of `A` as an eigenvalue of `W(λ,μ)`, next to
/// the bounds in terms of `A`'s data.
pub fn w_condition_bound(a: &MatrixPolynomial, wl: &WLinearization, t: &EigenTriple) -> Result<ConditionReport> {
    let d = a.degree();
    let pt = t.point;
    let rec = recover_w_vectors(wl, a, t)?;
    let xc = &rec.anchors[0].x_closed_form;
    let yc = &rec.anchors[0].y_closed_form;
    let kappa_pencil = pencil_eig_condition(&wl.pencil, &pt, xc, yc);
    let kappa_poly = polynomial_eig_condition(a, &pt, &t.x, &t.y);

    let t_d = t_of_d(d);
    let lnorm = lambda_norm(&pt, d);
    let col_norm = a.col_stack().norm2();
    let b_norm = wl.completion.b.norm2();
    let (w0, w1) = (wl.pencil.p0().norm2(), wl.pencil.p1().norm2());
    let (l, m) = (pt.lambda().norm(), pt.mu().norm());
    let den = polynomial_denominator(a, &pt, &t.x, &t.y);
    let xy = vec_norm(&t.x) * vec_norm(&t.y);
    let tiny = (a.n() as f64) * EPS * col_norm * xy;
    let core_bound = if den <= tiny { f64::INFINITY } else { 2f64.sqrt() * t_d * lnorm * col_norm * xy / den };
    let bound_general = (l * l * w1 * w1 + m * m * w0 * w0).sqrt() * core_bound * b_norm;
    let bound_orthonormal = wl.orthonormal.then_some(core_bound);

    let weighted: f64 = a
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, ai)| l.powi(i as i32) * m.powi((d - i) as i32) * ai.norm2())
        .sum();
    let diagnostic_ratio = weighted / (lnorm * col_norm);
    Ok(ConditionReport {
        point: pt,
        kappa_pencil,
        kappa_poly,
        bound_general,
        bound_orthonormal,
        t_d,
        lambda_norm: lnorm,
        denominator: den,
        diagnostic_ratio,
        problematic: diagnostic_ratio < NEAR_ORTHOGONAL_RATIO,
    })
}

/// Random `n × n` complex matrix with spectral norm one.
pub fn random_unit_matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let s = g.norm2();
    g.scale(c(1.0 / s, 0.0))
}

/// Finite-perturbation estimate of the eigenvalue condition numbers of `p`:
/// over `trials` perturbations `P_i + ε‖P_i‖E_i` with `‖E_i‖₂ = 1`, the
/// largest chordal movement of each eigenvalue (nearest perturbed
/// eigenvalue), divided by `ε`. Entries follow `solve_pencil(p)` order.
pub fn perturbation_estimate<R: Rng>(p: &Pencil, eps: f64, trials: usize, rng: &mut R) -> Result<Vec<f64>> {
    let base = solve_pencil(p)?.eigenvalues();
    let nn = p.size();
    let (n0, n1) = (p.p0().norm2(), p.p1().norm2());
    let mut worst = alloc::vec![0.0f64; base.len()];
    for _ in 0..trials {
        let e0 = random_unit_matrix(nn, rng).scale(c(eps * n0, 0.0));
        let e1 = random_unit_matrix(nn, rng).scale(c(eps * n1, 0.0));
        let q = Pencil::new(p.p0() + &e0, p.p1() + &e1)?;
        let moved = solve_pencil(&q)?.eigenvalues();
        for (w, b) in worst.iter_mut().zip(&base) {
            let dist = moved.iter().map(|m| chordal_distance(b, m)).fold(f64::INFINITY, f64::min);
            *w = w.max(dist);
        }
    }
    Ok(worst.into_iter().map(|w| w / eps).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::re;
    use crate::eigen::companion_triples;
    use crate::linearize::{w_linearization, AnnihilatorMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn t_small_values() {
        assert!((t_of_d(1) - 1.0).abs() < 1e-14);
        assert!((t_of_d(2) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        for d in 1..8 {
            assert!((t_of_d(d) - t_of_d_corrected(d)).abs() < 1e-10);
        }
        assert!((t_of_d_printed(1) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_case_estimate() {
        for k in 0..50 {
            let pt = HomogeneousPoint::new(c((k as f64 * 0.37).cos(), 0.2), c(0.3, (k as f64 * 0.91).sin()));
            let (l, m) = (pt.lambda().norm(), pt.mu().norm());
            if l <= m {
                assert!(l / m <= 1.0 && 1.0 / m <= 2f64.sqrt() + 1e-15);
            } else {
                assert!(m / l <= 1.0 && 1.0 / l <= 2f64.sqrt() + 1e-15);
            }
        }
    }

    #[test]
    fn scale_invariance_and_jordan_sentinel() {
        let p = Pencil::new(Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]), Matrix::identity(2)).unwrap();
        let pt = HomogeneousPoint::from_affine(re(1.0));
        let x = [re(1.0), re(0.0)];
        let k1 = pencil_eig_condition(&p, &pt, &x, &x);
        let k2 = pencil_eig_condition(&p, &pt, &[re(2.0), re(0.0)], &[c(0.0, -3.0), re(0.0)]);
        assert!(k1.is_finite());
        assert!((k1 - k2).abs() <= 4.0 * EPS * k1);
        let jordan = Pencil::new(Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), Matrix::identity(2)).unwrap();
        let k = pencil_eig_condition(&jordan, &pt, &x, &[re(0.0), re(1.0)]);
        assert_eq!(k, f64::INFINITY);
    }

    #[test]
    fn bound_dominates_kappa_w() {
        let a0 = Matrix::from_fn(2, 2, |i, j| c(1.0 + i as f64 - 0.5 * j as f64, 0.3));
        let a1 = Matrix::from_fn(2, 2, |i, j| c(0.2 * (i + j) as f64, -0.4 + i as f64));
        let a2 = Matrix::from_fn(2, 2, |i, j| if i == j { re(1.5) } else { c(0.1, 0.2) });
        let a = MatrixPolynomial::new(alloc::vec![a0, a1, a2]).unwrap();
        let wl = w_linearization(&a, AnnihilatorMode::QrOrthonormal).unwrap();
        for t in companion_triples(&a).unwrap() {
            let r = w_condition_bound(&a, &wl, &t).unwrap();
            assert!(r.kappa_pencil <= r.bound_general * (1.0 + 1e-6));
            let bo = r.bound_orthonormal.unwrap();
            // With orthonormal W the dropped factors are at most one.
            assert!(r.bound_general <= bo * (1.0 + 1e-12));
            assert!(r.kappa_pencil <= bo * (1.0 + 1e-6));
        }
    }

    #[test]
    fn perturbation_matches_kappa() {
        let p = Pencil::new(
            Matrix::from_real_rows(&[&[1.0, 0.5, 0.0], &[0.0, 2.0, 0.3], &[0.1, 0.0, -1.0]]),
            Matrix::from_real_rows(&[&[1.0, 0.0, 0.2], &[0.4, 1.0, 0.0], &[0.0, 0.3, 1.0]]),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = perturbation_estimate(&p, 1e-8, 100, &mut rng).unwrap();
        let sol = solve_pencil(&p).unwrap();
        for (t, e) in sol.triples.iter().zip(&est) {
            let k = pencil_triple_condition(&p, t);
            assert!(*e <= 3.0 * k && *e >= k / 10.0, "{e} {k}");
        }
    }
}
