//! Implementations behind the `linearize`, `dual`, `eig` and `cond`
//! subcommands. Each returns its result instead of printing so it can be
//! tested directly.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use pencilkit_core::conditioning::{perturbation_estimate, w_condition_bound, ConditionReport};
use pencilkit_core::duality::{
    dual_identity_block, expand_block_permutation, left_dual_qr, right_dual_qr, verify_dual, DualityCertificate,
    IdentityBlockMode,
};
use pencilkit_core::eigen::{
    companion_to_polynomial, polynomial_backward_error, polynomial_vectors_by_svd, recover_w_vectors, solve_pencil_tagged,
};
use pencilkit_core::linearize::{
    companion_second_form, dl_pencil, fiedler_pencil, monomial_to_orthobasis, orthobasis_companion, w_linearization,
    AnnihilatorMode, Recurrence,
};
use pencilkit_core::{EigenTriple, MatrixPolynomial, Pencil, C64};

use crate::formats::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Form {
    Companion,
    W,
    Fiedler,
    Dl,
    Ortho,
}

/// Comma-separated list of 1-based indices, e.g. `2,3,1`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("`{t}` is not an index")))
        .collect()
}

/// Comma-separated complex entries, each `re` or `re:im`.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let (r, i) = t.split_once(':').unwrap_or((t, "0"));
            Ok(C64::new(r.trim().parse().with_context(|| format!("bad entry `{t}`"))?, i.trim().parse().with_context(|| format!("bad entry `{t}`"))?))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecurrenceFile {
    alpha: Vec<[f64; 2]>,
    beta: Vec<[f64; 2]>,
    gamma: Vec<[f64; 2]>,
}

/// `monomial`, `chebyshev`, or a JSON file `{alpha, beta, gamma}` with
/// `[re, im]` entries.
pub fn parse_recurrence(spec: &str, d: usize) -> Result<Recurrence> {
    match spec {
        "monomial" => Ok(Recurrence::monomial(d)),
        "chebyshev" => Ok(Recurrence::chebyshev(d)),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading recurrence {path}"))?;
            let f: RecurrenceFile = serde_json::from_str(&text).context("malformed recurrence file")?;
            let conv = |v: &[[f64; 2]]| v.iter().map(|e| C64::new(e[0], e[1])).collect();
            Ok(Recurrence { alpha: conv(&f.alpha), beta: conv(&f.beta), gamma: conv(&f.gamma) })
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinearizeOptions {
    pub sigma: Option<Vec<usize>>,
    pub v: Option<Vec<C64>>,
    pub recurrence: Option<String>,
}

/// Builds the requested pencil. `ortho` reads the file's coefficients as
/// monomial ones and rewrites them in the recurrence basis first, so every
/// form linearizes the same polynomial.
pub fn linearize(a: &MatrixPolynomial, form: Form, opts: &LinearizeOptions) -> Result<Pencil> {
    let d = a.degree();
    Ok(match form {
        Form::Companion => companion_second_form(a)?,
        Form::W => w_linearization(a, AnnihilatorMode::QrOrthonormal)?.pencil,
        Form::Fiedler => {
            let sigma = opts.sigma.clone().unwrap_or_else(|| (1..=d).collect());
            fiedler_pencil(a, &sigma)?
        }
        Form::Dl => {
            let v = opts.v.clone().unwrap_or_else(|| (0..d).map(|i| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect());
            dl_pencil(a, &v)?
        }
        Form::Ortho => {
            let rec = parse_recurrence(opts.recurrence.as_deref().unwrap_or("chebyshev"), d)?;
            orthobasis_companion(&monomial_to_orthobasis(a, &rec)?, &rec)?
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DualMethod {
    Qr,
    IdentityBlock,
}

#[derive(Debug, Serialize)]
pub struct CertificateJson {
    pub commute_residual: f64,
    pub j_form_residual: f64,
    pub right_commute_residual: f64,
    pub row_rank_margin: f64,
    pub col_rank_margin: f64,
    pub tolerance: f64,
    pub rank_tolerance: f64,
    pub verdict: String,
}

impl From<&DualityCertificate> for CertificateJson {
    fn from(c: &DualityCertificate) -> Self {
        Self {
            commute_residual: c.commute_residual,
            j_form_residual: c.j_form_residual,
            right_commute_residual: c.right_commute_residual,
            row_rank_margin: c.row_rank_margin,
            col_rank_margin: c.col_rank_margin,
            tolerance: c.tolerance,
            rank_tolerance: c.rank_tolerance,
            verdict: c.verdict.as_str().into(),
        }
    }
}

fn transposed(p: &Pencil) -> Result<Pencil> {
    Ok(Pencil::new(p.p0().transpose(), p.p1().transpose())?)
}

/// Turns `--pi` into a 0-based row permutation of `[L₀; L₁]`. A list shorter
/// than `2N` is read as a block permutation with equal block sizes.
pub fn row_permutation(pi: &[usize], size: usize) -> Result<Vec<usize>> {
    let rows = 2 * size;
    if pi.is_empty() || rows % pi.len() != 0 {
        bail!("--pi has {} entries, which does not divide 2N = {rows}", pi.len());
    }
    Ok(expand_block_permutation(pi, rows / pi.len())?)
}

/// Computes a dual of `l` and its certificate against `l`.
pub fn dual(l: &Pencil, side: Side, method: DualMethod, pi: Option<&[usize]>, exact: bool) -> Result<(Pencil, DualityCertificate)> {
    let m = match (side, method) {
        (Side::Left, DualMethod::Qr) => left_dual_qr(l)?,
        (Side::Right, DualMethod::Qr) => right_dual_qr(l)?,
        (_, DualMethod::IdentityBlock) => {
            let pi = pi.ok_or_else(|| anyhow!("identity-block needs --pi"))?;
            let rows = row_permutation(pi, l.size())?;
            let mode = if exact { IdentityBlockMode::ExactIdentity } else { IdentityBlockMode::InvertY };
            match side {
                Side::Left => dual_identity_block(l, &rows, mode)?,
                // A right dual of L is the transpose of a left dual of Lᵀ.
                Side::Right => transposed(&dual_identity_block(&transposed(l)?, &rows, mode)?)?,
            }
        }
    };
    let cert = verify_dual(&m, l)?;
    Ok((m, cert))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Via {
    Companion,
    W,
    Fiedler,
    Dl,
}

type Vector = Vec<[f64; 2]>;

fn vec_json(v: &[C64]) -> Vector {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Serialize)]
pub struct VectorsJson {
    pub x: Vector,
    pub y: Vector,
}

#[derive(Debug, Serialize)]
pub struct ResidualJson {
    pub right: f64,
    pub left: f64,
    pub backward_error: f64,
}

#[derive(Debug, Serialize)]
pub struct WVectorsJson {
    pub x: Vector,
    pub y: Vector,
    pub relative_residual: f64,
    pub anchor_gap: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct EigJson {
    pub source: String,
    pub eigenvalues: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<VectorsJson>>,
    pub residuals: Vec<ResidualJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_vectors: Option<Vec<WVectorsJson>>,
}

fn triple_vectors(ts: &[EigenTriple]) -> Vec<VectorsJson> {
    ts.iter().map(|t| VectorsJson { x: vec_json(&t.x), y: vec_json(&t.y) }).collect()
}

/// Eigenvalues (and optionally eigenvectors) of a pencil, or of a
/// polynomial through the chosen linearization.
pub fn eig(problem: &Problem, via: Via, opts: &LinearizeOptions, recover: bool) -> Result<EigJson> {
    match problem {
        Problem::Pencil(p) => {
            let sol = solve_pencil_tagged(p, "pencil")?;
            let residuals = sol
                .triples
                .iter()
                .zip(&sol.backward_errors)
                .map(|(t, &b)| ResidualJson { right: t.residual_right, left: t.residual_left, backward_error: b })
                .collect();
            Ok(EigJson {
                source: sol.source.clone(),
                eigenvalues: sol.triples.iter().map(|t| t.point.to_array()).collect(),
                vectors: recover.then(|| triple_vectors(&sol.triples)),
                residuals,
                w_vectors: None,
            })
        }
        Problem::Polynomial(a) => {
            let form = match via {
                Via::Companion => Form::Companion,
                Via::W => Form::W,
                Via::Fiedler => Form::Fiedler,
                Via::Dl => Form::Dl,
            };
            let pencil = linearize(a, form, opts)?;
            let sol = solve_pencil_tagged(&pencil, &format!("{via:?}").to_lowercase())?;
            let triples: Vec<EigenTriple> = if via == Via::Companion {
                sol.triples.iter().map(|t| companion_to_polynomial(a, t)).collect()
            } else {
                sol.triples.iter().map(|t| polynomial_vectors_by_svd(a, &t.point)).collect()
            };
            let residuals = triples
                .iter()
                .map(|t| ResidualJson {
                    right: t.residual_right,
                    left: t.residual_left,
                    backward_error: polynomial_backward_error(a, &t.point, &t.x, &t.y),
                })
                .collect();
            let w_vectors = if recover && via == Via::W {
                let wl = w_linearization(a, AnnihilatorMode::QrOrthonormal)?;
                let mut out = Vec::with_capacity(triples.len());
                for t in &triples {
                    let r = recover_w_vectors(&wl, a, t)?;
                    out.push(WVectorsJson {
                        x: vec_json(&r.triple.x),
                        y: vec_json(&r.triple.y),
                        relative_residual: r.relative_residual(&wl),
                        anchor_gap: [r.anchor_gaps.0, r.anchor_gaps.1],
                    });
                }
                Some(out)
            } else {
                None
            };
            Ok(EigJson {
                source: sol.source.clone(),
                eigenvalues: triples.iter().map(|t| t.point.to_array()).collect(),
                vectors: recover.then(|| triple_vectors(&triples)),
                residuals,
                w_vectors,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Report {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct ConditionJson {
    pub eigenvalue: [f64; 4],
    pub kappa_w: f64,
    pub kappa_poly: f64,
    pub bound_general: f64,
    pub bound_orthonormal: Option<f64>,
    pub t_d: f64,
    pub lambda_norm: f64,
    pub denominator: f64,
    pub diagnostic_ratio: f64,
    pub problematic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_w_estimate: Option<f64>,
}

impl From<&ConditionReport> for ConditionJson {
    fn from(r: &ConditionReport) -> Self {
        Self {
            eigenvalue: r.point.to_array(),
            kappa_w: r.kappa_pencil,
            kappa_poly: r.kappa_poly,
            bound_general: r.bound_general,
            bound_orthonormal: r.bound_orthonormal,
            t_d: r.t_d,
            lambda_norm: r.lambda_norm,
            denominator: r.denominator,
            diagnostic_ratio: r.diagnostic_ratio,
            problematic: r.problematic,
            kappa_w_estimate: None,
        }
    }
}

/// Condition reports for every eigenvalue of `a` as an eigenvalue of its W
/// linearization. With `trials > 0` each report also carries a Monte-Carlo
/// estimate of `κ_W` from perturbing the W pencil.
pub fn cond(a: &MatrixPolynomial, trials: usize, seed: u64) -> Result<Vec<ConditionJson>> {
    let wl = w_linearization(a, AnnihilatorMode::QrOrthonormal)?;
    let sol = solve_pencil_tagged(&wl.pencil, "w")?;
    let mut out = Vec::with_capacity(sol.triples.len());
    for t in &sol.triples {
        let poly_triple = polynomial_vectors_by_svd(a, &t.point);
        out.push(ConditionJson::from(&w_condition_bound(a, &wl, &poly_triple)?));
    }
    if trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let est = perturbation_estimate(&wl.pencil, 1e-9, trials, &mut rng)?;
        for (j, e) in out.iter_mut().zip(est) {
            j.kappa_w_estimate = Some(e);
        }
    }
    Ok(out)
}

pub fn cond_csv(rows: &[ConditionJson]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "lambda_re",
        "lambda_im",
        "mu_re",
        "mu_im",
        "kappa_w",
        "kappa_poly",
        "bound_general",
        "bound_orthonormal",
        "t_d",
        "diagnostic_ratio",
        "problematic",
        "kappa_w_estimate",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        let e = r.eigenvalue;
        w.write_record([
            format!("{:e}", e[0]),
            format!("{:e}", e[1]),
            format!("{:e}", e[2]),
            format!("{:e}", e[3]),
            format!("{:e}", r.kappa_w),
            format!("{:e}", r.kappa_poly),
            format!("{:e}", r.bound_general),
            opt(r.bound_orthonormal),
            format!("{:e}", r.t_d),
            format!("{:e}", r.diagnostic_ratio),
            r.problematic.to_string(),
            opt(r.kappa_w_estimate),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
