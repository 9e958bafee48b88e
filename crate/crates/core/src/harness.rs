//! Benchmark pipeline: synthetic problem generation, an independent
//! reference-eigenvalue oracle, optimal eigenvalue pairing and the
//! forward-error comparison between linearization strategies.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{c, householder_qr, re, singular_values, Lu, Matrix, C64, EPS};
use crate::ddouble::{Cdd, Dd};
use crate::eigen::solve_pencil_tagged;
use crate::error::{Error, Result};
use crate::linearize::{companion_second_form, dl_pencil, w_linearization, AnnihilatorMode};
use crate::polycore::{chordal_distance, scale_fan_lin_van_dooren, HomogeneousEval, HomogeneousPoint, MatrixPolynomial, Pencil, ScalingReport};

// ---------------------------------------------------------------------------
// Pairing

/// Minimum-cost perfect matching on a square `n × n` cost matrix (row
/// major). Returns `assign[row] = column`.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "hungarian: cost matrix must be n×n");
    // Potentials formulation, 1-based with a virtual column 0.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// For each reference eigenvalue, the index of the computed eigenvalue
/// paired with it by the assignment minimizing total chordal distance.
pub fn pair_eigenvalues(computed: &[HomogeneousPoint], reference: &[HomogeneousPoint]) -> Result<Vec<usize>> {
    if computed.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} computed vs {} reference eigenvalues",
            computed.len(),
            reference.len()
        )));
    }
    let n = reference.len();
    let mut cost = Vec::with_capacity(n * n);
    for r in reference {
        for cpt in computed {
            cost.push(chordal_distance(r, cpt));
        }
    }
    Ok(hungarian(&cost, n))
}

/// Largest chordal distance under the optimal pairing.
pub fn matching_distance(a: &[HomogeneousPoint], b: &[HomogeneousPoint]) -> Result<f64> {
    let assign = pair_eigenvalues(a, b)?;
    Ok(b.iter().zip(&assign).map(|(r, &k)| chordal_distance(r, &a[k])).fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Oracle

/// Change of variables `(λ, μ) = U (x, 1)` applied before root finding, so
/// that no eigenvalue sits at `x = ∞` and chordal distances are preserved.
const ROTATION: (f64, f64) = (0.61, 0.37);

fn rotation() -> (Cdd, Cdd) {
    let (theta, phi) = ROTATION;
    let cth = Cdd::from(re(theta.cos()));
    let s = Cdd::from(c(theta.sin() * phi.cos(), theta.sin() * phi.sin()));
    (cth, s)
}

/// `A(λ, μ)`, `∂_λA`, `∂_μA` in double-double at `(λ, μ) = (c x − s̄, s x + c)`,
/// together with `dA/dx = c ∂_λA + s ∂_μA`.
fn eval_rotated(a: &MatrixPolynomial, x: Cdd) -> (Vec<Cdd>, Vec<Cdd>) {
    let (cth, s) = rotation();
    let lam = cth * x - s.conj();
    let mu = s * x + cth;
    let (n, d) = (a.n(), a.degree());
    let mut lp = vec![Cdd::ONE; d + 1];
    let mut mp = vec![Cdd::ONE; d + 1];
    for k in 1..=d {
        lp[k] = lp[k - 1] * lam;
        mp[k] = mp[k - 1] * mu;
    }
    let mut val = vec![Cdd::ZERO; n * n];
    let mut der = vec![Cdd::ZERO; n * n];
    for (i, ai) in a.coeffs().iter().enumerate() {
        let w = lp[i] * mp[d - i];
        let dl = if i > 0 { lp[i - 1] * mp[d - i].scale(Dd::new(i as f64)) } else { Cdd::ZERO };
        let dm = if i < d { lp[i] * mp[d - i - 1].scale(Dd::new((d - i) as f64)) } else { Cdd::ZERO };
        let wd = cth * dl + s * dm;
        for (k, &e) in ai.as_slice().iter().enumerate() {
            if e.re == 0.0 && e.im == 0.0 {
                continue;
            }
            let e = Cdd::from(e);
            val[k] = val[k] + e * w;
            der[k] = der[k] + e * wd;
        }
    }
    (val, der)
}

/// `tr(M⁻¹ D)` by partial-pivoting LU in double-double; `None` if `M` is
/// exactly singular.
fn trace_inverse_product(mut m: Vec<Cdd>, mut dmat: Vec<Cdd>, n: usize) -> Option<Cdd> {
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i * n + k].norm1().total_cmp(&m[j * n + k].norm1()))?;
        if m[piv * n + k].is_zero() {
            return None;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
                dmat.swap(k * n + j, piv * n + j);
            }
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                m[i * n + j] = m[i * n + j] - f * m[k * n + j];
            }
            for j in 0..n {
                dmat[i * n + j] = dmat[i * n + j] - f * dmat[k * n + j];
            }
        }
    }
    // Back substitution for the full solution, then the trace.
    let mut sol = vec![Cdd::ZERO; n * n];
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = dmat[i * n + col];
            for j in i + 1..n {
                acc = acc - m[i * n + j] * sol[j * n + col];
            }
            sol[i * n + col] = acc / m[i * n + i];
        }
    }
    Some((0..n).fold(Cdd::ZERO, |t, i| t + sol[i * n + i]))
}

/// `log |det M|` in double precision via LU, `-∞` for singular `M`.
fn log_abs_det(m: &Matrix) -> f64 {
    let lu = Lu::new(m);
    if lu.is_singular() {
        return f64::NEG_INFINITY;
    }
    let d = lu.det();
    if d.norm() > 0.0 && d.norm().is_finite() {
        d.norm().ln()
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub eigenvalues: Vec<HomogeneousPoint>,
    pub iterations: usize,
    /// Largest final Aberth correction relative to `max(1, |x|)`.
    pub final_correction: f64,
}

/// Reference eigenvalues of `A` from simultaneous (Aberth–Ehrlich) iteration
/// on `det A` in double-double arithmetic. The Newton quotient is
/// `1 / tr(A⁻¹ dA/dx)`, so neither determinant coefficients nor any pencil
/// eigensolver are involved.
pub fn oracle_reference(a: &MatrixPolynomial) -> Result<Vec<HomogeneousPoint>> {
    Ok(oracle_reference_detailed(a)?.eigenvalues)
}

pub fn oracle_reference_detailed(a: &MatrixPolynomial) -> Result<OracleOutput> {
    let (n, d) = (a.n(), a.degree());
    let total = n * d;
    if total == 0 {
        return Ok(OracleOutput { eigenvalues: Vec::new(), iterations: 0, final_correction: 0.0 });
    }
    if n * d > 400 {
        return Err(Error::Precondition(format!("oracle limited to nd ≤ 400, got {}", n * d)));
    }
    check_regular(a)?;

    let (cth, s) = rotation();
    let to_point = |x: C64| {
        let (cc, ss) = (cth.to_c64(), s.to_c64());
        HomogeneousPoint::new(cc * x - ss.conj(), ss * x + cc)
    };
    // Geometric mean of the root moduli: |det A(U e₂) / det A(U e₁)|^{1/N}.
    let at = |x: C64, y: C64| a.eval(x, y);
    let lead = log_abs_det(&at(cth.to_c64(), s.to_c64()));
    let tail = log_abs_det(&at(-s.to_c64().conj(), cth.to_c64()));
    let radius = if lead.is_finite() && tail.is_finite() {
        ((tail - lead) / total as f64).exp().clamp(1e-12, 1e12)
    } else {
        1.0
    };
    let mut z: Vec<Cdd> = (0..total)
        .map(|k| {
            let th = 2.0 * core::f64::consts::PI * k as f64 / total as f64 + 0.4;
            Cdd::from(c(radius * th.cos(), radius * th.sin()))
        })
        .collect();

    const MAX_ITER: usize = 500;
    let mut done = vec![false; total];
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let mut worst = 0.0f64;
        for k in 0..total {
            if done[k] {
                continue;
            }
            let (val, der) = eval_rotated(a, z[k]);
            let newton = match trace_inverse_product(val, der, n) {
                Some(t) if !t.is_zero() => Cdd::ONE / t,
                _ => {
                    done[k] = true;
                    continue;
                }
            };
            let mut sum = Cdd::ZERO;
            for j in 0..total {
                if j != k {
                    let diff = z[k] - z[j];
                    if !diff.is_zero() {
                        sum = sum + Cdd::ONE / diff;
                    }
                }
            }
            let w = newton / (Cdd::ONE - newton * sum);
            if !w.is_finite() {
                continue;
            }
            z[k] = z[k] - w;
            let rel = w.norm() / z[k].norm().max(1.0);
            if rel < 1e-30 {
                done[k] = true;
            }
            worst = worst.max(rel);
        }
        last = worst;
        if worst < 1e-28 || done.iter().all(|&f| f) {
            break;
        }
    }
    if !(last < 1e-9) {
        return Err(Error::NoConvergence(iterations));
    }
    let mut eigenvalues: Vec<HomogeneousPoint> = z.iter().map(|x| to_point(x.to_c64())).collect();
    sort_points(&mut eigenvalues);
    Ok(OracleOutput { eigenvalues, iterations, final_correction: last })
}

/// `det A` vanishing at three generic points ⇒ singular polynomial.
fn check_regular(a: &MatrixPolynomial) -> Result<()> {
    let probes = [
        HomogeneousPoint::new(c(0.3141, 0.2718), c(0.9, -0.1)),
        HomogeneousPoint::new(c(-0.77, 0.52), c(0.33, 0.61)),
        HomogeneousPoint::new(c(1.0, 0.0), c(-0.43, -0.29)),
    ];
    let n = a.n();
    let regular = probes.iter().any(|pt| {
        let sv = singular_values(&a.eval_at(pt));
        sv[n - 1] > 1e3 * (n as f64) * EPS * sv[0]
    });
    if regular {
        Ok(())
    } else {
        Err(Error::SingularPolynomial)
    }
}

pub fn sort_points(v: &mut [HomogeneousPoint]) {
    v.sort_by(|a, b| {
        let (ka, kb) = (a.ordering_key(), b.ordering_key());
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
}

// ---------------------------------------------------------------------------
// Problem generation

#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// Entries uniform in `[−1, 1] + i[−1, 1]`.
    RandomDense,
    /// `A_i = U D_i V` with `U`, `V` unitary and diagonal `D_i` whose scalar
    /// polynomials have the given roots (`n·d` of them, consumed `d` at a
    /// time, monic).
    PrescribedSpectrum { eigenvalues: Vec<C64> },
    /// Quadratic with `‖A₁‖ = ratio·(‖A₀‖ + ‖A₂‖)` and all other
    /// eigenvalues close to 0 or ∞.
    LargeMiddle { ratio: f64 },
    /// Random dense with `A₀` and `A_d` of rank `n − deficiency`.
    Degenerate { deficiency: usize },
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::RandomDense => "random",
            Layout::PrescribedSpectrum { .. } => "prescribed",
            Layout::LargeMiddle { .. } => "large_middle",
            Layout::Degenerate { .. } => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub layout: Layout,
    pub seed: u64,
    /// Apply Fan–Lin–Van Dooren scaling (quadratics only).
    pub scaling: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReferenceSource {
    OracleAberth,
}

#[derive(Clone, Debug)]
pub struct BenchmarkProblem {
    pub name: String,
    pub layout: Layout,
    /// The polynomial actually solved (scaled when `scaling` is set).
    pub poly: MatrixPolynomial,
    pub scaling: Option<ScalingReport>,
    pub reference: Vec<HomogeneousPoint>,
    pub reference_source: ReferenceSource,
    pub cond_a0: f64,
    pub cond_ad: f64,
    /// Seed that produced a regular problem (bumped past failures).
    pub seed_used: u64,
    pub notes: Vec<String>,
}

/// Condition-number threshold for `A₀`, `A_d` to admit the DL methods.
pub const ADMISSION_COND: f64 = 1e10;

impl BenchmarkProblem {
    pub fn admits_dl(&self) -> bool {
        self.cond_a0 < ADMISSION_COND && self.cond_ad < ADMISSION_COND
    }
}

pub fn condition_number(m: &Matrix) -> f64 {
    let sv = singular_values(m);
    let smin = sv[sv.len() - 1];
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / smin
    }
}

fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    householder_qr(&random_matrix(n, rng)).0
}

/// Monic polynomial coefficients (lowest first) with the given roots.
fn monic_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![re(1.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (k, &pk) in p.iter().enumerate() {
            next[k + 1] += pk;
            next[k] -= pk * r;
        }
        p = next;
    }
    p
}

fn build_coefficients<R: Rng>(spec: &ProblemSpec, rng: &mut R) -> Result<Vec<Matrix>> {
    let (n, d) = (spec.n, spec.d);
    let coeffs = match &spec.layout {
        Layout::RandomDense => (0..=d).map(|_| random_matrix(n, rng)).collect(),
        Layout::PrescribedSpectrum { eigenvalues } => {
            if eigenvalues.len() != n * d {
                return Err(Error::InvalidConfig(format!(
                    "prescribed spectrum needs {} eigenvalues, got {}",
                    n * d,
                    eigenvalues.len()
                )));
            }
            let u = random_unitary(n, rng);
            let v = random_unitary(n, rng);
            let polys: Vec<Vec<C64>> = eigenvalues.chunks(d).map(monic_from_roots).collect();
            (0..=d)
                .map(|i| {
                    let di = Matrix::from_diag(&polys.iter().map(|p| p[i]).collect::<Vec<_>>());
                    &(&u * &di) * &v
                })
                .collect()
        }
        Layout::LargeMiddle { ratio } => {
            if d != 2 || n < 2 {
                return Err(Error::InvalidConfig("large_middle needs d = 2 and n ≥ 2".into()));
            }
            // Channel 0 carries the large middle coefficient; the others have
            // one root near 0 and one near ∞, so their eigenvectors see only
            // a small part of A₁.
            let mut polys: Vec<Vec<C64>> = Vec::with_capacity(n);
            polys.push(vec![re(1.0), re(0.0), re(1.0)]);
            for _ in 1..n {
                let small = C64::from_polar(10f64.powf(-rng.random_range(2.0..4.0)), rng.random_range(0.0..6.283));
                let large = C64::from_polar(10f64.powf(rng.random_range(2.0..4.0)), rng.random_range(0.0..6.283));
                polys.push(monic_from_roots(&[small, large]));
            }
            let end_norm = |i: usize| polys.iter().map(|p| p[i].norm()).fold(0.0, f64::max);
            let target = ratio * (end_norm(0) + end_norm(2));
            polys[0][1] = re(-target);
            let u = random_unitary(n, rng);
            let v = random_unitary(n, rng);
            (0..=d)
                .map(|i| {
                    let di = Matrix::from_diag(&polys.iter().map(|p| p[i]).collect::<Vec<_>>());
                    &(&u * &di) * &v
                })
                .collect()
        }
        Layout::Degenerate { deficiency } => {
            if *deficiency == 0 || *deficiency > n {
                return Err(Error::InvalidConfig(format!("deficiency {deficiency} out of range 1..={n}")));
            }
            let mut cs: Vec<Matrix> = (0..=d).map(|_| random_matrix(n, rng)).collect();
            for idx in [0, d] {
                let mask: Vec<C64> = (0..n).map(|k| if k + deficiency < n { re(1.0) } else { re(0.0) }).collect();
                let l = random_matrix(n, rng);
                let r = random_matrix(n, rng);
                cs[idx] = &(&l * &Matrix::from_diag(&mask)) * &r;
            }
            cs
        }
    };
    Ok(coeffs)
}

/// Number of seed bumps tried before giving up on a singular draw.
pub const MAX_SEED_BUMPS: u64 = 16;

pub fn generate_problem(spec: &ProblemSpec) -> Result<BenchmarkProblem> {
    if spec.n == 0 || spec.d == 0 {
        return Err(Error::InvalidConfig("n and d must be positive".into()));
    }
    if spec.n * spec.d > 100 {
        return Err(Error::InvalidConfig(format!("n·d = {} exceeds 100", spec.n * spec.d)));
    }
    let mut notes = Vec::new();
    for bump in 0..MAX_SEED_BUMPS {
        let seed = spec.seed.wrapping_add(bump);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = MatrixPolynomial::new(build_coefficients(spec, &mut rng)?)?;
        let (poly, scaling) = if spec.scaling && spec.d == 2 {
            match scale_fan_lin_van_dooren(&raw) {
                Ok((p, r)) => (p, Some(r)),
                Err(e) => {
                    notes.push(format!("scaling skipped: {e}"));
                    (raw, None)
                }
            }
        } else {
            (raw, None)
        };
        match oracle_reference(&poly) {
            Ok(reference) => {
                let cond_a0 = condition_number(poly.coeff(0));
                let cond_ad = condition_number(poly.coeff(spec.d));
                return Ok(BenchmarkProblem {
                    name: spec.name.clone(),
                    layout: spec.layout.clone(),
                    poly,
                    scaling,
                    reference,
                    reference_source: ReferenceSource::OracleAberth,
                    cond_a0,
                    cond_ad,
                    seed_used: seed,
                    notes,
                });
            }
            Err(e) => notes.push(format!("seed {seed} rejected: {e}")),
        }
    }
    Err(Error::InvalidConfig(format!("{}: no regular problem after {MAX_SEED_BUMPS} seeds", spec.name)))
}

// ---------------------------------------------------------------------------
// Comparison

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Companion,
    W,
    DlE1,
    DlEd,
    HmtSwitch,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Companion, Method::W, Method::DlE1, Method::DlEd, Method::HmtSwitch];

    pub fn name(self) -> &'static str {
        match self {
            Method::Companion => "companion",
            Method::W => "w",
            Method::DlE1 => "dl_e1",
            Method::DlEd => "dl_ed",
            Method::HmtSwitch => "hmt_switch",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.iter().copied().find(|m| m.name() == s)
    }

    pub fn needs_dl_admission(self) -> bool {
        matches!(self, Method::DlE1 | Method::DlEd | Method::HmtSwitch)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    /// Chordal forward error against the paired reference eigenvalue.
    Error(f64),
    Failed,
    /// Not run (admission rule).
    Skipped,
}

impl Outcome {
    pub fn error(self) -> Option<f64> {
        match self {
            Outcome::Error(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub problem: String,
    pub index: usize,
    pub reference: HomogeneousPoint,
    /// Aligned with `ComparisonTable::methods`.
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub methods: Vec<Method>,
    pub rows: Vec<ComparisonRow>,
    /// Per-method failures, `problem: method: message`.
    pub notes: Vec<String>,
}

impl ComparisonTable {
    pub fn new(methods: Vec<Method>) -> Self {
        Self { methods, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn extend(&mut self, other: ComparisonTable) {
        self.rows.extend(other.rows);
        self.notes.extend(other.notes);
    }

    /// Finite errors of one method in row order.
    pub fn errors_of(&self, m: Method) -> Vec<f64> {
        match self.methods.iter().position(|&x| x == m) {
            Some(k) => self.rows.iter().filter_map(|r| r.outcomes[k].error()).collect(),
            None => Vec::new(),
        }
    }
}

/// Errors of one method's eigenvalues against the reference, in reference
/// order, plus the paired computed eigenvalues.
fn method_errors(pencil: &Pencil, reference: &[HomogeneousPoint], tag: &str) -> Result<(Vec<f64>, Vec<HomogeneousPoint>)> {
    let computed = solve_pencil_tagged(pencil, tag)?.eigenvalues();
    let assign = pair_eigenvalues(&computed, reference)?;
    let paired: Vec<HomogeneousPoint> = assign.iter().map(|&k| computed[k]).collect();
    let errs = reference.iter().zip(&paired).map(|(r, p)| chordal_distance(r, p)).collect();
    Ok((errs, paired))
}

fn unit_vector(d: usize, k: usize) -> Vec<C64> {
    (0..d).map(|i| if i == k { re(1.0) } else { re(0.0) }).collect()
}

type MethodResult = core::result::Result<(Vec<f64>, Vec<HomogeneousPoint>), String>;

/// Runs every requested method on one problem.
pub fn compare_problem(problem: &BenchmarkProblem, methods: &[Method]) -> ComparisonTable {
    let a = &problem.poly;
    let d = a.degree();
    let reference = &problem.reference;
    let run = |m: Method| -> MethodResult {
        let pencil = match m {
            Method::Companion => companion_second_form(a),
            Method::W => w_linearization(a, AnnihilatorMode::QrOrthonormal).map(|w| w.pencil),
            Method::DlE1 => dl_pencil(a, &unit_vector(d, 0)),
            Method::DlEd => dl_pencil(a, &unit_vector(d, d - 1)),
            Method::HmtSwitch => unreachable!("derived from the DL runs"),
        }
        .map_err(|e| e.to_string())?;
        method_errors(&pencil, reference, m.name()).map_err(|e| e.to_string())
    };

    let admitted = problem.admits_dl();
    let wants_dl = methods.iter().any(|m| m.needs_dl_admission());
    let (dl_e1, dl_ed) = if admitted && wants_dl {
        (Some(run(Method::DlE1)), Some(run(Method::DlEd)))
    } else {
        (None, None)
    };

    let mut table = ComparisonTable::new(methods.to_vec());
    let mut columns: Vec<Vec<Outcome>> = Vec::with_capacity(methods.len());
    for &m in methods {
        let col = if m.needs_dl_admission() && !admitted {
            vec![Outcome::Skipped; reference.len()]
        } else {
            let res: MethodResult = match m {
                Method::DlE1 => dl_e1.clone().unwrap_or_else(|| run(m)),
                Method::DlEd => dl_ed.clone().unwrap_or_else(|| run(m)),
                Method::HmtSwitch => hmt_switch(dl_e1.as_ref(), dl_ed.as_ref()),
                _ => run(m),
            };
            match res {
                Ok((errs, _)) => errs.into_iter().map(Outcome::Error).collect(),
                Err(msg) => {
                    table.notes.push(format!("{}: {}: {msg}", problem.name, m.name()));
                    vec![Outcome::Failed; reference.len()]
                }
            }
        };
        columns.push(col);
    }
    for (i, r) in reference.iter().enumerate() {
        table.rows.push(ComparisonRow {
            problem: problem.name.clone(),
            index: i,
            reference: *r,
            outcomes: columns.iter().map(|c| c[i]).collect(),
        });
    }
    table
}

/// Per eigenvalue: the `dl_e1` error when the `dl_e1` eigenvalue paired with
/// it has `|x| > 1`, the `dl_ed` error otherwise.
fn hmt_switch(e1: Option<&MethodResult>, ed: Option<&MethodResult>) -> MethodResult {
    let (e1, ed) = match (e1, ed) {
        (Some(Ok(a)), Some(Ok(b))) => (a, b),
        (Some(Err(m)), _) | (_, Some(Err(m))) => return Err(format!("component failed: {m}")),
        _ => return Err("DL runs unavailable".into()),
    };
    let errs = e1
        .1
        .iter()
        .enumerate()
        .map(|(i, p)| if p.is_outside_unit_disk() { e1.0[i] } else { ed.0[i] })
        .collect();
    let pts = e1.1.iter().zip(&ed.1).map(|(p, q)| if p.is_outside_unit_disk() { *p } else { *q }).collect();
    Ok((errs, pts))
}

pub fn run_comparison(problems: &[BenchmarkProblem], methods: &[Method]) -> ComparisonTable {
    let mut table = ComparisonTable::new(methods.to_vec());
    for p in problems {
        table.extend(compare_problem(p, methods));
    }
    table
}

// ---------------------------------------------------------------------------
// Suites

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Default,
    Stress,
    Degenerate,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Default => "default",
            Suite::Stress => "stress",
            Suite::Degenerate => "degenerate",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        [Suite::Default, Suite::Stress, Suite::Degenerate].into_iter().find(|x| x.name() == s)
    }
}

/// Per-problem seed derived from the run seed and the problem's position.
pub fn problem_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((index as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

/// Built-in suite composition.
pub fn builtin_suite(suite: Suite, seed: u64, scaling: bool) -> Vec<ProblemSpec> {
    let mut specs = Vec::new();
    let mut push = |name: String, n: usize, d: usize, layout: Layout| {
        let idx = specs.len();
        specs.push(ProblemSpec { name, n, d, layout, seed: problem_seed(seed, idx), scaling });
    };
    match suite {
        Suite::Default => {
            for n in [2, 3, 4, 5, 6, 8] {
                push(format!("random_n{n}"), n, 2, Layout::RandomDense);
            }
            let ints: Vec<C64> = (1..=6).map(|k| re(k as f64)).collect();
            push("prescribed_integers".into(), 3, 2, Layout::PrescribedSpectrum { eigenvalues: ints });
            let ring: Vec<C64> = (0..8)
                .map(|k| {
                    let th = 0.3 + k as f64 * core::f64::consts::PI / 4.0;
                    let r = 0.5 + 0.25 * k as f64;
                    c(r * th.cos(), r * th.sin())
                })
                .collect();
            push("prescribed_spiral".into(), 4, 2, Layout::PrescribedSpectrum { eigenvalues: ring });
            push("random_cubic_n3".into(), 3, 3, Layout::RandomDense);
        }
        Suite::Stress => {
            for n in [2, 3, 4, 5, 6, 8] {
                push(format!("large_middle_n{n}"), n, 2, Layout::LargeMiddle { ratio: 1e6 });
            }
        }
        Suite::Degenerate => {
            for n in [2, 3, 4, 5] {
                push(format!("degenerate_n{n}"), n, 2, Layout::Degenerate { deficiency: 1 });
            }
            push("degenerate_n4_def2".into(), 4, 2, Layout::Degenerate { deficiency: 2 });
        }
    }
    specs
}

// ---------------------------------------------------------------------------
// Summary statistics

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub median_error: Option<f64>,
    pub max_error: Option<f64>,
    pub count: usize,
    pub failed: usize,
    pub skipped: usize,
}

pub fn summarize(table: &ComparisonTable) -> Vec<MethodSummary> {
    table
        .methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let errs = table.errors_of(m);
            let failed = table.rows.iter().filter(|r| r.outcomes[k] == Outcome::Failed).count();
            let skipped = table.rows.iter().filter(|r| r.outcomes[k] == Outcome::Skipped).count();
            MethodSummary {
                method: m,
                median_error: median(&errs),
                max_error: errs.iter().copied().reduce(f64::max),
                count: errs.len(),
                failed,
                skipped,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_small() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = hungarian(&cost, 3);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn oracle_scalar_quadratic() {
        let a = MatrixPolynomial::scalar(&[re(5.0), re(3.0), re(2.0)]).unwrap();
        let roots = oracle_reference(&a).unwrap();
        let disc = 31f64.sqrt() / 4.0;
        let exact = [HomogeneousPoint::from_affine(c(-0.75, disc)), HomogeneousPoint::from_affine(c(-0.75, -disc))];
        assert!(matching_distance(&roots, &exact).unwrap() < 1e-15);
    }

    #[test]
    fn oracle_double_eigenvalue() {
        let i2 = Matrix::identity(2);
        let a = MatrixPolynomial::new(vec![-&i2, i2]).unwrap();
        let roots = oracle_reference(&a).unwrap();
        for r in roots {
            assert!(chordal_distance(&r, &HomogeneousPoint::from_affine(re(1.0))) < 1e-14);
        }
    }

    #[test]
    fn oracle_singular_leading_coefficient() {
        let a0 = Matrix::from_real_rows(&[&[1.0, 2.0], &[0.5, -1.0]]);
        let a1 = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0]]);
        let a2 = Matrix::from_real_rows(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let a = MatrixPolynomial::new(vec![a0, a1, a2]).unwrap();
        let roots = oracle_reference(&a).unwrap();
        let at_inf = roots.iter().filter(|r| chordal_distance(r, &HomogeneousPoint::infinity()) < 1e-12).count();
        assert_eq!(at_inf, 1);
    }

    #[test]
    fn oracle_rejects_singular_polynomial() {
        let z = Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let a = MatrixPolynomial::new(vec![z.clone(), z]).unwrap();
        assert_eq!(oracle_reference(&a).unwrap_err(), Error::SingularPolynomial);
    }

    #[test]
    fn prescribed_spectrum_roundtrip() {
        let eigs: Vec<C64> = (1..=6).map(|k| re(k as f64)).collect();
        let spec = ProblemSpec {
            name: "p".into(),
            n: 3,
            d: 2,
            layout: Layout::PrescribedSpectrum { eigenvalues: eigs.clone() },
            seed: 11,
            scaling: false,
        };
        let p = generate_problem(&spec).unwrap();
        let exact: Vec<HomogeneousPoint> = eigs.iter().map(|&x| HomogeneousPoint::from_affine(x)).collect();
        assert!(matching_distance(&p.reference, &exact).unwrap() < 1e-9);
    }

    #[test]
    fn generation_is_deterministic_and_stress_ratio_holds() {
        let spec = ProblemSpec { name: "s".into(), n: 3, d: 2, layout: Layout::LargeMiddle { ratio: 1e6 }, seed: 5, scaling: false };
        let p = generate_problem(&spec).unwrap();
        let q = generate_problem(&spec).unwrap();
        assert_eq!(p.poly, q.poly);
        let a = &p.poly;
        let ratio = a.coeff(1).norm2() / (a.coeff(0).norm2() + a.coeff(2).norm2());
        assert!((ratio / 1e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
