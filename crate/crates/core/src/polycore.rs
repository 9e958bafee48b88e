//! Homogeneous matrix polynomials, pencils, points on the Riemann sphere and
//! the chordal metric between them.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::dense::{c, re, vec_norm, Matrix, C64, EPS};
use crate::error::{Error, Result};

/// Eigenvalue `(λ, μ)` of a homogeneous problem, stored normalized with
/// `|λ|² + |μ|² = 1` and the larger coordinate real nonnegative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousPoint {
    lambda: C64,
    mu: C64,
}

impl HomogeneousPoint {
    /// Normalizes and canonicalizes `(λ, μ)`. Returns `None` for `(0, 0)` or
    /// non-finite input.
    pub fn try_new(lambda: C64, mu: C64) -> Option<Self> {
        let nrm = lambda.norm().hypot(mu.norm());
        if !(nrm > 0.0 && nrm.is_finite()) {
            return None;
        }
        let (l, m) = (lambda / nrm, mu / nrm);
        // Ties go to λ so that |λ| = |μ| yields a real λ.
        let pivot = if l.norm() >= m.norm() { l } else { m };
        let phase = pivot.conj() / pivot.norm();
        let (mut l, mut m) = (l * phase, m * phase);
        let exact = C64::new(pivot.norm(), 0.0);
        if l.norm() >= m.norm() {
            l = exact;
        } else {
            m = exact;
        }
        Some(Self { lambda: l, mu: m })
    }

    /// Panics on `(0, 0)`.
    pub fn new(lambda: C64, mu: C64) -> Self {
        Self::try_new(lambda, mu).expect("homogeneous point must be nonzero and finite")
    }

    pub fn from_affine(x: C64) -> Self {
        if x.norm() > 1.0 {
            Self::new(re(1.0), re(1.0) / x)
        } else {
            Self::new(x, re(1.0))
        }
    }

    pub fn infinity() -> Self {
        Self { lambda: re(1.0), mu: C64::zero() }
    }

    pub fn zero() -> Self {
        Self { lambda: C64::zero(), mu: re(1.0) }
    }

    /// Point on the real circle, `(cos θ, sin θ)`.
    pub fn on_circle(theta: f64) -> Self {
        Self::new(re(theta.cos()), re(theta.sin()))
    }

    #[inline]
    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    #[inline]
    pub fn mu(&self) -> C64 {
        self.mu
    }

    /// `λ/μ`, or `None` at infinity.
    pub fn affine(&self) -> Option<C64> {
        if self.mu.is_zero() {
            None
        } else {
            Some(self.lambda / self.mu)
        }
    }

    /// `|x| > 1`, i.e. `|λ| > |μ|`.
    pub fn is_outside_unit_disk(&self) -> bool {
        self.lambda.norm() > self.mu.norm()
    }

    pub fn is_infinite(&self) -> bool {
        self.mu.norm() <= 4.0 * EPS
    }

    /// Sort key `(arg x, atan(|x|))`, with `x = ∞` at `(0, π/2)`.
    pub fn ordering_key(&self) -> (f64, f64) {
        let arg = (self.lambda * self.mu.conj()).arg();
        (arg, self.lambda.norm().atan2(self.mu.norm()))
    }

    /// `(α, β)` flattened as `[λ_re, λ_im, μ_re, μ_im]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.lambda.re, self.lambda.im, self.mu.re, self.mu.im]
    }

    /// Inverse of `to_array`. Values that are already canonical (to a few
    /// ulps) are kept bit for bit, anything else goes through `try_new`.
    pub fn from_array(v: [f64; 4]) -> Option<Self> {
        let (l, m) = (C64::new(v[0], v[1]), C64::new(v[2], v[3]));
        let pivot = if l.norm() >= m.norm() { l } else { m };
        let canonical = (l.norm_sqr() + m.norm_sqr() - 1.0).abs() <= 8.0 * EPS && pivot.im == 0.0 && pivot.re >= 0.0;
        if canonical && v.iter().all(|x| x.is_finite()) {
            Some(Self { lambda: l, mu: m })
        } else {
            Self::try_new(l, m)
        }
    }
}

/// Principal angle between the complex lines spanned by `p` and `q`, in
/// `[0, π/2]`. For affine values this equals the angle between `[v; 1]` and
/// `[w; 1]`.
pub fn chordal_distance(p: &HomogeneousPoint, q: &HomogeneousPoint) -> f64 {
    let inner = (p.lambda * q.lambda.conj() + p.mu * q.mu.conj()).norm();
    let cross = (p.lambda * q.mu - p.mu * q.lambda).norm();
    // atan2 form of arccos(|<p,q>|); stays accurate for tiny angles.
    cross.atan2(inner.min(1.0))
}

/// Something that can be evaluated at a homogeneous point to a square matrix.
pub trait HomogeneousEval {
    fn dim(&self) -> usize;
    fn eval(&self, lambda: C64, mu: C64) -> Matrix;

    fn eval_at(&self, pt: &HomogeneousPoint) -> Matrix {
        self.eval(pt.lambda(), pt.mu())
    }
}

/// `A(λ, μ) = Σ A_i λ^i μ^{d−i}` with square `n × n` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    n: usize,
    coeffs: Vec<Matrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<Matrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidPolynomial("no coefficients".into()))?;
        let n = first.rows();
        if n == 0 {
            return Err(Error::InvalidPolynomial("empty coefficient matrices".into()));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if a.rows() != n || a.cols() != n {
                return Err(Error::InvalidPolynomial(format!(
                    "coefficient {i} is {}x{}, expected {n}x{n}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.is_finite() {
                return Err(Error::InvalidPolynomial(format!("coefficient {i} is not finite")));
            }
        }
        if coeffs.iter().all(|a| a.max_abs() == 0.0) {
            return Err(Error::InvalidPolynomial("zero polynomial".into()));
        }
        Ok(Self { n, coeffs })
    }

    /// Scalar polynomial `Σ a_i x^i` as a 1×1 matrix polynomial.
    pub fn scalar(a: &[C64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| Matrix::from_row_major(1, 1, alloc::vec![x])).collect())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Matrix {
        &self.coeffs[i]
    }

    /// Coefficient list reversed: `rev A(λ, μ) = A(μ, λ)`.
    pub fn rev(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { n: self.n, coeffs }
    }

    /// `[A_0; A_1; …; A_d]`, size `(d+1)n × n`.
    pub fn col_stack(&self) -> Matrix {
        let parts: Vec<&Matrix> = self.coeffs.iter().collect();
        Matrix::vstack(&parts)
    }

    /// `[A_0 A_1 … A_d]`, size `n × (d+1)n`.
    pub fn row_stack(&self) -> Matrix {
        let parts: Vec<&Matrix> = self.coeffs.iter().collect();
        Matrix::hstack(&parts)
    }

    /// Spectral norms `‖A_i‖₂`.
    pub fn coeff_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(Matrix::norm2).collect()
    }

    /// Partial derivatives `(∂A/∂λ, ∂A/∂μ)` at `(λ, μ)`.
    pub fn partials(&self, lambda: C64, mu: C64) -> (Matrix, Matrix) {
        let d = self.degree();
        let n = self.n;
        let mut dl = Matrix::zeros(n, n);
        let mut dm = Matrix::zeros(n, n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                let w = lambda.powu(i as u32 - 1) * mu.powu((d - i) as u32) * i as f64;
                dl = &dl + &a.scale(w);
            }
            if i < d {
                let w = lambda.powu(i as u32) * mu.powu((d - i - 1) as u32) * (d - i) as f64;
                dm = &dm + &a.scale(w);
            }
        }
        (dl, dm)
    }

    /// Returns `δ·A(γ·x)`: coefficients `δ γ^i A_i`.
    pub fn substitute_scale(&self, gamma: f64, delta: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.scale(re(delta * gamma.powi(i as i32))))
            .collect();
        Self { n: self.n, coeffs }
    }
}

impl HomogeneousEval for MatrixPolynomial {
    fn dim(&self) -> usize {
        self.n
    }

    /// Horner in the ratio of the smaller to the larger coordinate.
    fn eval(&self, lambda: C64, mu: C64) -> Matrix {
        let d = self.degree();
        if lambda.norm() >= mu.norm() {
            let t = mu / lambda;
            let mut s = self.coeffs[0].clone();
            for a in &self.coeffs[1..] {
                s = &s.scale(t) + a;
            }
            s.scale(lambda.powu(d as u32))
        } else {
            let t = lambda / mu;
            let mut s = self.coeffs[d].clone();
            for a in self.coeffs[..d].iter().rev() {
                s = &s.scale(t) + a;
            }
            s.scale(mu.powu(d as u32))
        }
    }
}

/// Matrix pencil `P(λ, μ) = μ·P₀ − λ·P₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    p0: Matrix,
    p1: Matrix,
}

impl Pencil {
    pub fn new(p0: Matrix, p1: Matrix) -> Result<Self> {
        if !p0.is_square() || !p1.is_square() || p0.rows() != p1.rows() {
            return Err(Error::DimensionMismatch(format!(
                "pencil coefficients {}x{} and {}x{}",
                p0.rows(),
                p0.cols(),
                p1.rows(),
                p1.cols()
            )));
        }
        if p0.rows() == 0 {
            return Err(Error::DimensionMismatch("empty pencil".into()));
        }
        Ok(Self { p0, p1 })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.p0.rows()
    }

    pub fn p0(&self) -> &Matrix {
        &self.p0
    }

    pub fn p1(&self) -> &Matrix {
        &self.p1
    }

    /// `(P₁, P₀)`: the pencil evaluated at swapped coordinates.
    pub fn swapped(&self) -> Self {
        Self { p0: self.p1.clone(), p1: self.p0.clone() }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { p0: self.p0.scale(s), p1: self.p1.scale(s) }
    }

    /// `[P₀ P₁]`.
    pub fn row_stack(&self) -> Matrix {
        Matrix::hstack(&[&self.p0, &self.p1])
    }

    /// `[P₀; P₁]`.
    pub fn col_stack(&self) -> Matrix {
        Matrix::vstack(&[&self.p0, &self.p1])
    }

    pub fn norm_fro(&self) -> f64 {
        self.p0.norm_fro().hypot(self.p1.norm_fro())
    }
}

impl HomogeneousEval for Pencil {
    fn dim(&self) -> usize {
        self.size()
    }

    fn eval(&self, lambda: C64, mu: C64) -> Matrix {
        &self.p0.scale(mu) - &self.p1.scale(lambda)
    }
}

/// Eigenvalue with unit right and left eigenvectors and the residuals
/// `‖P(λ,μ)x‖`, `‖y^*P(λ,μ)‖` against the problem it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTriple {
    pub point: HomogeneousPoint,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    pub residual_right: f64,
    pub residual_left: f64,
}

impl EigenTriple {
    /// Normalizes `x`, `y` and computes residuals against `problem`.
    pub fn new(problem: &dyn HomogeneousEval, point: HomogeneousPoint, x: &[C64], y: &[C64]) -> Self {
        let x = crate::dense::normalized(x);
        let y = crate::dense::normalized(y);
        let (rr, rl) = residual_norm(problem, &point, &x, &y);
        Self { point, x, y, residual_right: rr, residual_left: rl }
    }

    /// Residuals recomputed against `problem`.
    pub fn residuals(&self, problem: &dyn HomogeneousEval) -> (f64, f64) {
        residual_norm(problem, &self.point, &self.x, &self.y)
    }
}

/// `(‖P(pt)x‖₂, ‖y^* P(pt)‖₂)`.
pub fn residual_norm(
    problem: &dyn HomogeneousEval,
    pt: &HomogeneousPoint,
    x: &[C64],
    y: &[C64],
) -> (f64, f64) {
    let m = problem.eval_at(pt);
    (vec_norm(&m.mul_vec(x)), vec_norm(&m.left_mul_adjoint(y)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingReport {
    /// Eigenvalues of the original problem are `gamma ×` those of the scaled one.
    pub gamma: f64,
    pub delta: f64,
}

impl ScalingReport {
    /// Maps an eigenvalue of the scaled problem back to the original one.
    pub fn unscale(&self, p: &HomogeneousPoint) -> HomogeneousPoint {
        HomogeneousPoint::new(p.lambda() * self.gamma, p.mu())
    }
}

/// Fan–Lin–Van Dooren scaling of a quadratic: `x = γ x'`, multiplied by `δ`,
/// `γ = √(‖A₀‖/‖A₂‖)`, `δ = 2/(‖A₀‖ + γ‖A₁‖)`.
pub fn scale_fan_lin_van_dooren(p: &MatrixPolynomial) -> Result<(MatrixPolynomial, ScalingReport)> {
    if p.degree() != 2 {
        return Err(Error::UnsupportedDegree(p.degree()));
    }
    let [n0, n1, n2] = [p.coeff(0).norm2(), p.coeff(1).norm2(), p.coeff(2).norm2()];
    if n0 == 0.0 || n2 == 0.0 {
        return Err(Error::ScalingUndefined(format!("‖A0‖ = {n0:e}, ‖A2‖ = {n2:e}")));
    }
    let gamma = (n0 / n2).sqrt();
    let delta = 2.0 / (n0 + gamma * n1);
    Ok((p.substitute_scale(gamma, delta), ScalingReport { gamma, delta }))
}

/// `(λ, μ)` point on the unit circle of the complex plane at angle `θ`,
/// i.e. `(e^{iθ}, 1)/√2`.
pub fn unit_circle_point(theta: f64) -> HomogeneousPoint {
    HomogeneousPoint::new(c(theta.cos(), theta.sin()), re(1.0))
}
