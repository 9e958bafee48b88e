use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pencilkit::bench::{self, BenchOptions};
use pencilkit::commands::{self, CertificateJson, DualMethod, Form, LinearizeOptions, Report, Side, Via};
use pencilkit::formats::{self, Problem};
use pencilkit_core::harness::Suite;

#[derive(Parser)]
#[command(name = "pencilkit", version, about = "Linearizations of matrix polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pencil from a polynomial file.
    Linearize {
        #[arg(long, value_enum)]
        form: Form,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Fiedler permutation, 1-based, e.g. `2,3,1`.
        #[arg(long)]
        sigma: Option<String>,
        /// DL ansatz vector, entries `re` or `re:im`.
        #[arg(long)]
        v: Option<String>,
        /// `monomial`, `chebyshev` or a JSON file with alpha/beta/gamma.
        #[arg(long)]
        recurrence: Option<String>,
    },
    /// Compute a left or right dual pencil and print its certificate.
    Dual {
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long, value_enum)]
        method: DualMethod,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// 1-based row or block permutation for `identity-block`.
        #[arg(long)]
        pi: Option<String>,
        /// Require the selected rows to be exactly the identity.
        #[arg(long)]
        exact: bool,
    },
    /// Eigenvalues of a pencil or of a polynomial through a linearization.
    Eig {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "companion")]
        via: Via,
        #[arg(long)]
        recover_vectors: bool,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        v: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalue condition numbers of the W linearization.
    Cond {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "w")]
        via: CondVia,
        #[arg(long, value_enum, default_value = "json")]
        report: Report,
        /// Monte-Carlo perturbation trials (0 disables the estimate).
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Forward-error benchmark against reference eigenvalues.
    Bench {
        #[arg(long, value_enum, default_value = "default")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of companion,w,dl_e1,dl_ed,hmt_switch.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long)]
        no_scaling: bool,
        /// TOML file controlling suite composition.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CondVia {
    W,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SuiteArg {
    Default,
    Stress,
    Degenerate,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Default => Suite::Default,
            SuiteArg::Stress => Suite::Stress,
            SuiteArg::Degenerate => Suite::Degenerate,
        }
    }
}

fn linearize_options(sigma: Option<String>, v: Option<String>, recurrence: Option<String>) -> Result<LinearizeOptions> {
    Ok(LinearizeOptions {
        sigma: sigma.as_deref().map(commands::parse_index_list).transpose()?,
        v: v.as_deref().map(commands::parse_complex_list).transpose()?,
        recurrence,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Linearize { form, input, output, sigma, v, recurrence } => {
            let a = formats::read_polynomial(&input)?;
            let p = commands::linearize(&a, form, &linearize_options(sigma, v, recurrence)?)?;
            formats::write_pencil(&output, &p)
        }
        Command::Dual { side, method, input, output, pi, exact } => {
            let l = formats::read_pencil(&input)?;
            let pi = pi.as_deref().map(commands::parse_index_list).transpose()?;
            let (m, cert) = commands::dual(&l, side, method, pi.as_deref(), exact)?;
            formats::write_pencil(&output, &m)?;
            println!("{}", serde_json::to_string_pretty(&CertificateJson::from(&cert))?);
            Ok(())
        }
        Command::Eig { input, via, recover_vectors, sigma, v, output } => {
            let problem = formats::read_problem(&input)?;
            let res = commands::eig(&problem, via, &linearize_options(sigma, v, None)?, recover_vectors)?;
            commands::write_text(output.as_deref(), &(serde_json::to_string_pretty(&res)? + "\n"))
        }
        Command::Cond { input, via: CondVia::W, report, trials, seed, output } => {
            let a = match formats::read_problem(&input)? {
                Problem::Polynomial(a) => a,
                Problem::Pencil(_) => anyhow::bail!("cond needs a polynomial file"),
            };
            let rows = commands::cond(&a, trials, seed)?;
            let text = match report {
                Report::Json => serde_json::to_string_pretty(&rows)? + "\n",
                Report::Csv => commands::cond_csv(&rows)?,
            };
            commands::write_text(output.as_deref(), &text)
        }
        Command::Bench { suite, seed, out, methods, no_scaling, config } => {
            let config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    Some(bench::parse_config(&text)?)
                }
                None => None,
            };
            let methods = methods.as_deref().map(bench::parse_methods).transpose()?;
            let suite = Suite::from(suite);
            let opts = BenchOptions { suite, seed, methods, scaling: !no_scaling, config };
            let result = bench::run(&opts)?;
            for r in &result.rejected {
                eprintln!("rejected {r}");
            }
            for n in &result.table.notes {
                eprintln!("failure {n}");
            }
            bench::emit_results(&result, suite, seed, &out)?;
            eprintln!("{} problems, {} rows written to {}", result.problems.len(), result.table.rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
