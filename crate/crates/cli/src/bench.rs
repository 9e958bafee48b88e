//! Benchmark runs: suite configuration, parallel execution and the output
//! files (`results.csv`, `plots/*.dat`, `summary.json`).
//!
//! Config grammar (TOML, every key optional):
//!
//! ```toml
//! methods = ["companion", "w", "dl_e1", "dl_ed", "hmt_switch"]
//! scaling = true
//! include_builtin = true      # keep the suite's built-in problems
//!
//! [[problem]]
//! name = "my_quadratic"
//! n = 4
//! d = 2
//! layout = "random"           # random | prescribed | large_middle | degenerate
//! eigenvalues = [[1.0, 0.0], [2.0, 0.0]]   # prescribed: n·d entries [re, im]
//! ratio = 1e6                 # large_middle
//! deficiency = 1              # degenerate
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pencilkit_core::harness::{
    builtin_suite, compare_problem, generate_problem, problem_seed, summarize, BenchmarkProblem, ComparisonRow,
    ComparisonTable, Layout, Method, Outcome, ProblemSpec, Suite,
};
use pencilkit_core::{HomogeneousPoint, C64};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub methods: Option<Vec<String>>,
    pub scaling: Option<bool>,
    pub include_builtin: Option<bool>,
    #[serde(default)]
    pub problem: Vec<ProblemEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemEntry {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub layout: String,
    pub eigenvalues: Option<Vec<[f64; 2]>>,
    pub ratio: Option<f64>,
    pub deficiency: Option<usize>,
}

impl ProblemEntry {
    fn layout(&self) -> Result<Layout> {
        Ok(match self.layout.as_str() {
            "random" => Layout::RandomDense,
            "prescribed" => Layout::PrescribedSpectrum {
                eigenvalues: self
                    .eigenvalues
                    .as_ref()
                    .ok_or_else(|| anyhow!("{}: prescribed layout needs `eigenvalues`", self.name))?
                    .iter()
                    .map(|e| C64::new(e[0], e[1]))
                    .collect(),
            },
            "large_middle" => Layout::LargeMiddle { ratio: self.ratio.unwrap_or(1e6) },
            "degenerate" => Layout::Degenerate { deficiency: self.deficiency.unwrap_or(1) },
            other => bail!("{}: unknown layout `{other}`", self.name),
        })
    }
}

pub fn parse_config(text: &str) -> Result<BenchConfig> {
    toml::from_str(text).context("malformed bench config")
}

pub fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    names.iter().map(|s| Method::parse(s.trim()).ok_or_else(|| anyhow!("unknown method `{s}`"))).collect()
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub suite: Suite,
    pub seed: u64,
    pub methods: Option<Vec<Method>>,
    pub scaling: bool,
    pub config: Option<BenchConfig>,
}

/// Methods run when neither the config nor the command line picks them.
pub fn default_methods(suite: Suite) -> Vec<Method> {
    match suite {
        Suite::Degenerate => vec![Method::Companion, Method::W],
        _ => Method::ALL.to_vec(),
    }
}

pub fn resolve_specs(opts: &BenchOptions) -> Result<(Vec<ProblemSpec>, Vec<Method>)> {
    let cfg = opts.config.clone().unwrap_or_default();
    let scaling = opts.scaling && cfg.scaling.unwrap_or(true);
    let mut specs = if cfg.include_builtin.unwrap_or(true) { builtin_suite(opts.suite, opts.seed, scaling) } else { Vec::new() };
    for entry in &cfg.problem {
        let idx = specs.len();
        specs.push(ProblemSpec {
            name: entry.name.clone(),
            n: entry.n,
            d: entry.d,
            layout: entry.layout()?,
            seed: problem_seed(opts.seed, idx),
            scaling,
        });
    }
    let methods = match (&opts.methods, &cfg.methods) {
        (Some(m), _) => m.clone(),
        (None, Some(names)) => parse_methods(names)?,
        (None, None) => default_methods(opts.suite),
    };
    if methods.is_empty() {
        bail!("no methods selected");
    }
    Ok((specs, methods))
}

pub struct BenchRun {
    pub problems: Vec<BenchmarkProblem>,
    pub table: ComparisonTable,
    /// Problems the generator or oracle could not produce.
    pub rejected: Vec<String>,
}

/// Generates and compares all problems. Work is spread over threads but the
/// result order is that of the suite.
pub fn run(opts: &BenchOptions) -> Result<BenchRun> {
    let (specs, methods) = resolve_specs(opts)?;
    let generated: Vec<_> = specs.par_iter().map(|s| (s.name.clone(), generate_problem(s))).collect();
    let mut problems = Vec::new();
    let mut rejected = Vec::new();
    for (name, res) in generated {
        match res {
            Ok(p) => problems.push(p),
            Err(e) => rejected.push(format!("{name}: {e}")),
        }
    }
    let tables: Vec<ComparisonTable> = problems.par_iter().map(|p| compare_problem(p, &methods)).collect();
    let mut table = ComparisonTable::new(methods);
    for t in tables {
        table.extend(t);
    }
    Ok(BenchRun { problems, table, rejected })
}

// ---------------------------------------------------------------------------
// CSV

pub const CSV_HEADER: [&str; 9] = ["problem", "eigenvalue", "method", "lambda_re", "lambda_im", "mu_re", "mu_im", "error", "status"];

fn status(o: Outcome) -> (&'static str, String) {
    match o {
        Outcome::Error(e) => ("ok", format!("{e:e}")),
        Outcome::Failed => ("failed", String::new()),
        Outcome::Skipped => ("skipped", String::new()),
    }
}

/// One row per (problem, eigenvalue, method). Floats are written with `{:e}`,
/// the shortest representation that parses back to the same value.
pub fn write_csv<W: std::io::Write>(table: &ComparisonTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        let p = row.reference.to_array();
        for (m, &o) in table.methods.iter().zip(&row.outcomes) {
            let (st, err) = status(o);
            w.write_record([
                row.problem.clone(),
                row.index.to_string(),
                m.name().to_string(),
                format!("{:e}", p[0]),
                format!("{:e}", p[1]),
                format!("{:e}", p[2]),
                format!("{:e}", p[3]),
                err,
                st.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn parse_csv<R: Read>(input: R) -> Result<ComparisonTable> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        bail!("unexpected CSV header {header:?}");
    }
    let mut methods: Vec<Method> = Vec::new();
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { rec[i].parse::<f64>().with_context(|| format!("column {}", CSV_HEADER[i])) };
        let problem = rec[0].to_string();
        let index: usize = rec[1].parse()?;
        let method = Method::parse(&rec[2]).ok_or_else(|| anyhow!("unknown method `{}`", &rec[2]))?;
        let point = HomogeneousPoint::from_array([f(3)?, f(4)?, f(5)?, f(6)?]).ok_or_else(|| anyhow!("bad eigenvalue"))?;
        let outcome = match &rec[8] {
            "ok" => Outcome::Error(f(7)?),
            "failed" => Outcome::Failed,
            "skipped" => Outcome::Skipped,
            other => bail!("unknown status `{other}`"),
        };
        let same_row = rows.last().is_some_and(|r| r.problem == problem && r.index == index);
        if !same_row {
            rows.push(ComparisonRow { problem, index, reference: point, outcomes: Vec::new() });
        }
        let first = rows.len() == 1;
        let row = rows.last_mut().expect("row just pushed");
        let k = row.outcomes.len();
        match methods.get(k) {
            Some(&m) if m == method => {}
            None if first => methods.push(method),
            _ => bail!("method columns are not in a consistent order at {} #{}", row.problem, row.index),
        }
        row.outcomes.push(outcome);
    }
    if rows.iter().any(|r| r.outcomes.len() != methods.len()) {
        bail!("rows with missing methods");
    }
    Ok(ComparisonTable { methods, rows, notes: Vec::new() })
}

// ---------------------------------------------------------------------------
// Plot data and summary

/// Whitespace-separated columns: eigenvalue index, then `log10(error)` per
/// method (`nan` when the method did not produce a value).
pub fn plot_data(table: &ComparisonTable, problem: &str) -> String {
    let mut s = String::from("# index");
    for m in &table.methods {
        s.push(' ');
        s.push_str(m.name());
    }
    s.push('\n');
    for row in table.rows.iter().filter(|r| r.problem == problem) {
        s.push_str(&row.index.to_string());
        for o in &row.outcomes {
            match o.error() {
                Some(e) => s.push_str(&format!(" {}", e.max(f64::MIN_POSITIVE).log10())),
                None => s.push_str(" nan"),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Serialize)]
pub struct MethodSummaryJson {
    pub method: String,
    pub median_error: Option<f64>,
    pub max_error: Option<f64>,
    pub count: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Serialize)]
pub struct ProblemSummaryJson {
    pub name: String,
    pub layout: String,
    pub n: usize,
    pub d: usize,
    pub seed_used: u64,
    pub cond_a0: f64,
    pub cond_ad: f64,
    pub dl_admitted: bool,
    pub scaling: Option<[f64; 2]>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct SummaryJson {
    pub suite: String,
    pub seed: u64,
    pub methods: Vec<MethodSummaryJson>,
    pub problems: Vec<ProblemSummaryJson>,
    pub rejected: Vec<String>,
    pub failures: Vec<String>,
}

pub fn summary(run: &BenchRun, suite: Suite, seed: u64) -> SummaryJson {
    let finite = |x: f64| if x.is_finite() { x } else { f64::MAX };
    SummaryJson {
        suite: suite.name().into(),
        seed,
        methods: summarize(&run.table)
            .into_iter()
            .map(|s| MethodSummaryJson {
                method: s.method.name().into(),
                median_error: s.median_error,
                max_error: s.max_error,
                count: s.count,
                failed: s.failed,
                skipped: s.skipped,
            })
            .collect(),
        problems: run
            .problems
            .iter()
            .map(|p| ProblemSummaryJson {
                name: p.name.clone(),
                layout: p.layout.name().into(),
                n: p.poly.n(),
                d: p.poly.degree(),
                seed_used: p.seed_used,
                cond_a0: finite(p.cond_a0),
                cond_ad: finite(p.cond_ad),
                dl_admitted: p.admits_dl(),
                scaling: p.scaling.map(|s| [s.gamma, s.delta]),
                notes: p.notes.clone(),
            })
            .collect(),
        rejected: run.rejected.clone(),
        failures: run.table.notes.clone(),
    }
}

/// Keeps plot file names portable.
fn file_stem(problem: &str) -> String {
    problem.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

pub fn emit_results(run: &BenchRun, suite: Suite, seed: u64, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("plots")).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join("results.csv");
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(&run.table, std::io::BufWriter::new(file))?;
    let mut seen = BTreeMap::new();
    for row in &run.table.rows {
        seen.entry(row.problem.clone()).or_insert(());
    }
    for name in seen.keys() {
        let path = dir.join("plots").join(format!("{}.dat", file_stem(name)));
        fs::write(&path, plot_data(&run.table, name)).with_context(|| format!("writing {}", path.display()))?;
    }
    crate::formats::write_json(&dir.join("summary.json"), &summary(run, suite, seed))
}
