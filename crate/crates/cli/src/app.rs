//! Argument parsing and command dispatch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kothe::classify::{classify, explain};
use kothe::truncation::FinSeq;
use kothe::weights::parse::parse_predicate;
use kothe::weights::parse_file_with;
use kothe::witnesses::{approx_binf, no_split_witness, unbounded_witness};
use kothe::{Error, Limits, Order, WeightFamily};
use num_rational::BigRational;

use crate::suites::{builtin, run_suite, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "kothe", version, about = "Köthe co-echelon algebras: conditions, classification, witnesses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LimitArgs {
    /// Number of levels N examined
    #[arg(long, default_value_t = 20)]
    pub levels: u32,
    /// Number of enumerated indices H examined
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    /// Relative tolerance for approximate comparisons
    #[arg(long, default_value_t = kothe::xpos::DEFAULT_TOL)]
    pub tol: f64,
    /// Largest support size for sign-pattern expansions (at most 24)
    #[arg(long = "j-max", default_value_t = 16)]
    pub j_max: u32,
}

impl LimitArgs {
    pub fn limits(&self) -> kothe::Result<Limits> {
        let l = Limits {
            levels: self.levels,
            horizon: self.horizon,
            tol: self.tol,
            j_max: self.j_max,
        };
        l.validate()?;
        Ok(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Unbounded,
    Nosplit,
    Approx,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every family of a file
    Classify {
        file: PathBuf,
        /// Order p: 0, a positive integer, or inf
        #[arg(long = "p", default_value = "inf")]
        p: Order,
        #[command(flatten)]
        limits: LimitArgs,
        /// Emit JSON reports instead of text
        #[arg(long)]
        json: bool,
    },
    /// Run a randomized invariant suite
    Verify {
        /// rademacher, section, projection-bound, approx or witnesses
        suite: String,
        /// Largest support size for the rademacher suite
        #[arg(long = "J", default_value_t = 12)]
        j: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random cases (suite default when omitted)
        #[arg(long)]
        count: Option<u64>,
        /// Built-in family name or family file
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_parser = parse_rational_arg)]
        eps: Option<BigRational>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Construct and verify a witness for the first family of a file
    Witness {
        file: PathBuf,
        kind: WitnessKind,
        /// The set S of the no-split construction
        #[arg(long = "S", default_value = "none")]
        s: String,
        #[arg(long = "p", default_value = "inf")]
        p: Order,
        /// Length L of the unbounded witness
        #[arg(short = 'L', long = "len", default_value_t = 10)]
        len: u32,
        /// Largest level m checked by the no-split witness
        #[arg(long = "m-max", default_value_t = 10)]
        m_max: u32,
        /// Level n of the approximation
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, value_parser = parse_rational_arg, default_value = "1/10")]
        eps: BigRational,
        /// Finitely supported sequence as JSON, e.g. [[1,"1","0"],[[2,3],"1/2","0"]]
        #[arg(long)]
        a: Option<String>,
        #[command(flatten)]
        limits: LimitArgs,
    },
}

fn parse_rational_arg(s: &str) -> Result<BigRational, String> {
    kothe::xpos::parse_rational(s).ok_or_else(|| format!("not a rational number: {s:?}"))
}

/// Captured result of one command.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn error(e: impl std::fmt::Display) -> Self {
        Output {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 1,
        }
    }
}

fn read_families(path: &Path, limits: &Limits) -> kothe::Result<Vec<WeightFamily>> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_file_with(&src, limits)
}

fn family_arg(name: &str, limits: &Limits) -> kothe::Result<Vec<WeightFamily>> {
    match builtin(name) {
        Some(src) => Ok(vec![kothe::weights::parse_family_with(src, limits)?]),
        None => read_families(Path::new(name), limits),
    }
}

pub fn run(cli: Cli) -> Output {
    let res = match cli.command {
        Command::Classify { file, p, limits, json } => cmd_classify(&file, p, limits, json),
        Command::Verify {
            suite,
            j,
            seed,
            count,
            family,
            eps,
            limits,
        } => cmd_verify(&suite, j, seed, count, family.as_deref(), eps, limits),
        Command::Witness {
            file,
            kind,
            s,
            p,
            len,
            m_max,
            n,
            eps,
            a,
            limits,
        } => cmd_witness(&file, kind, &s, p, len, m_max, n, &eps, a.as_deref(), limits),
    };
    res.unwrap_or_else(Output::error)
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code: 1,
                }
            } else {
                Output {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            }
        }
    }
}

fn cmd_classify(file: &Path, p: Order, limits: LimitArgs, json: bool) -> kothe::Result<Output> {
    let limits = limits.limits()?;
    let families = read_families(file, &limits)?;
    let mut out = Output::default();
    for f in &families {
        let report = classify(f, p, &limits)?;
        if json {
            out.stdout.push_str(&serde_json::to_string_pretty(&report).map_err(|e| Error::Eval(e.to_string()))?);
            out.stdout.push('\n');
        } else {
            out.stdout.push_str(&explain(&report));
        }
        out.code = out.code.max(report.exit_code());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: &str,
    j: u32,
    seed: u64,
    count: Option<u64>,
    family: Option<&str>,
    eps: Option<BigRational>,
    limits: LimitArgs,
) -> kothe::Result<Output> {
    let limits = limits.limits()?;
    if j > Limits::J_MAX_CEILING {
        return Err(Error::InvalidArgument(format!("J must not exceed {}", Limits::J_MAX_CEILING)));
    }
    let families = match family {
        Some(name) => family_arg(name, &limits)?,
        None => Vec::new(),
    };
    let cfg = SuiteConfig {
        seed,
        j,
        count,
        families,
        eps,
        limits,
    };
    let report = run_suite(suite, &cfg)?;
    let mut out = Output {
        stdout: String::new(),
        stderr: String::new(),
        code: if report.passed() { 0 } else { 1 },
    };
    let _ = writeln!(out.stdout, "suite {} (seed {seed})", report.name);
    out.stdout.push_str(&report.render());
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_witness(
    file: &Path,
    kind: WitnessKind,
    s: &str,
    p: Order,
    len: u32,
    m_max: u32,
    n: u32,
    eps: &BigRational,
    a: Option<&str>,
    limits: LimitArgs,
) -> kothe::Result<Output> {
    let limits = limits.limits()?;
    let families = read_families(file, &limits)?;
    let f = families
        .first()
        .ok_or_else(|| Error::InvalidArgument("the file declares no family".into()))?;
    let to_json = |v: serde_json::Result<String>| v.map_err(|e| Error::Eval(e.to_string()));
    let text = match kind {
        WitnessKind::Unbounded => to_json(serde_json::to_string_pretty(&unbounded_witness(f, p, len, &limits)?))?,
        WitnessKind::Nosplit => {
            let pred = parse_predicate(s)?;
            to_json(serde_json::to_string_pretty(&no_split_witness(f, &pred, m_max, &limits)?))?
        }
        WitnessKind::Approx => {
            let a = a.ok_or_else(|| Error::InvalidArgument("approx needs --a".into()))?;
            let a: FinSeq =
                serde_json::from_str(a).map_err(|e| Error::InvalidArgument(format!("bad sequence: {e}")))?;
            a.check_in(f)?;
            to_json(serde_json::to_string_pretty(&approx_binf(f, &a, n, eps, &limits)?))?
        }
    };
    Ok(Output {
        stdout: format!("{text}\n"),
        stderr: String::new(),
        code: 0,
    })
}
