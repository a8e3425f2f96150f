//! `quadsieve <kind> [flags]`: one experiment per run, CSV to `--out` (or
//! stdout) and a JSON sidecar at `<out>.json`.
//!
//! Input grammar:
//!
//! * `--form`: `diag:a1,...,an`; `gram2:r1;...;rn` with comma-separated rows
//!   of the doubled Gram matrix (so `gram2:2,1;1,-4` is `x1^2+x1*x2-2*x2^2`);
//!   or a space-free homogeneous quadratic such as `x1^2+x2^2-3*x3^2`.
//! * `--cutters`: polynomials in `x1..xn` separated by `;`, e.g. `x1;x2`.
//! * `--q1`: a quadratic polynomial in `x1..xL`, e.g. `2*x1^2+3`.
//! * `--q2`: binary form coefficients `a,b,c` for `a u^2 + b u v + c v^2`.
//! * Grids are comma-separated and strictly increasing.
//!
//! Exit status: 0 all assertions pass, 1 an assertion failed, 2 usage or
//! validation error, 3 budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadric_sieve::experiment::{self, ExperimentSpec, Kind};
use quadric_sieve::{Error, Norm};

#[derive(Parser)]
#[command(name = "quadsieve", version, about = "Point counts and sieve experiments on affine quadrics")]
struct Cli {
    #[command(subcommand)]
    kind: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the points of q(x) = m up to the largest T.
    Enumerate(Flags),
    /// N(T) along the T grid.
    Count(Flags),
    /// Residue class deviations modulo each l.
    Equidist(Flags),
    /// Prime-window tail counts against the shape bound.
    SieveTail(Flags),
    /// Coprimality ratio of two cutters against the Euler product.
    CoprimeDensity(Flags),
    /// Values of Q1 represented by the binary form Q2.
    HalfSieve(Flags),
    /// tau_p = #U(F_p) / #Q(F_p) along the p grid.
    LocalDensity(Flags),
    /// Normalized deviation of #Q(F_p) from p^(n-1).
    LangWeil(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Euclid,
    Sup,
}

#[derive(Args)]
struct Flags {
    /// `diag:a1,...,an`, `gram2:r1;r2;...` (doubled Gram rows) or a polynomial in x1..xn.
    #[arg(long)]
    form: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i128>,
    /// Semicolon-separated polynomials, e.g. `x1;x2`.
    #[arg(long)]
    cutters: Option<String>,
    #[arg(long)]
    codim: Option<usize>,
    #[arg(long = "T-grid", value_delimiter = ',')]
    t_grid: Vec<u64>,
    #[arg(long = "M-grid", value_delimiter = ',')]
    m_grid: Vec<u128>,
    #[arg(long = "l-grid", value_delimiter = ',')]
    l_grid: Vec<u64>,
    #[arg(long = "p-grid", value_delimiter = ',')]
    p_grid: Vec<u128>,
    #[arg(long = "x-grid", value_delimiter = ',')]
    x_grid: Vec<u64>,
    #[arg(long, allow_hyphen_values = true)]
    q1: Option<String>,
    /// Binary form coefficients `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    q2: Option<String>,
    #[arg(long, value_enum, default_value = "euclid")]
    norm: NormArg,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "p-star")]
    p_star: Option<u128>,
    /// CSV path; the sidecar is written next to it as `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<u128>,
}

impl Command {
    fn into_spec(self) -> ExperimentSpec {
        let (kind, f) = match self {
            Command::Enumerate(f) => (Kind::Enumerate, f),
            Command::Count(f) => (Kind::Count, f),
            Command::Equidist(f) => (Kind::Equidist, f),
            Command::SieveTail(f) => (Kind::SieveTail, f),
            Command::CoprimeDensity(f) => (Kind::CoprimeDensity, f),
            Command::HalfSieve(f) => (Kind::HalfSieve, f),
            Command::LocalDensity(f) => (Kind::LocalDensity, f),
            Command::LangWeil(f) => (Kind::LangWeil, f),
        };
        ExperimentSpec {
            kind,
            form: f.form,
            m: f.m,
            cutters: f.cutters,
            codim: f.codim,
            t_grid: f.t_grid,
            m_grid: f.m_grid,
            l_grid: f.l_grid,
            p_grid: f.p_grid,
            x_grid: f.x_grid,
            q1: f.q1,
            q2: f.q2,
            norm: match f.norm {
                NormArg::Euclid => Norm::Euclidean,
                NormArg::Sup => Norm::Sup,
            },
            alpha: f.alpha,
            lambda: f.lambda,
            beta: f.beta,
            gamma: f.gamma,
            p_star: f.p_star,
            out: f.out,
            cache: f.cache,
            seed: f.seed,
            budget: f.budget,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let unknown = e.kind() == clap::error::ErrorKind::InvalidSubcommand;
            let _ = e.print();
            if unknown {
                let valid: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                eprintln!("valid kinds: {}", valid.join(", "));
            }
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let spec = cli.kind.into_spec();
    match experiment::run(&spec) {
        Ok(outcome) => {
            if spec.out.is_none() {
                match outcome.report.to_csv() {
                    Ok(bytes) => print!("{}", String::from_utf8_lossy(&bytes)),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            for a in outcome.report.assertions.iter().filter(|a| !a.pass) {
                eprintln!("assertion failed: {} observed {} bound {} (row {:?})", a.name, a.observed, a.bound, a.row);
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } | Error::EnumerationBudget { .. } | Error::HeightTooLarge => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
