//! Command-line front end: argument parsing, sequence cache, report files.
//!
//! Exit codes: 0 when every check passed, 1 when a check failed or a domain
//! error occurred, 2 when the precision was insufficient for a required
//! decision, 3 for usage and configuration errors.

pub mod cache;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matseq::{MarkoffSequence, SeedPair, SymMat2, DEFAULT_CAP};
use crate::realfield::DEFAULT_GUARD_BITS;

pub use cache::{cache_string, parse_cache, read_cache, write_atomic, write_cache, CACHE_HEADER};
pub use output::{Check, Outcome};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MARKOFF_LAB_OUT";

/// Output directory when neither the flag nor the variable is set.
pub const DEFAULT_OUT: &str = "reports";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExitStatus(pub u8);

impl ExitStatus {
    pub const OK: ExitStatus = ExitStatus(0);
    pub const CHECK_FAILED: ExitStatus = ExitStatus(1);
    pub const PRECISION: ExitStatus = ExitStatus(2);
    pub const USAGE: ExitStatus = ExitStatus(3);

    pub fn code(self) -> u8 {
        self.0
    }

    /// Status a domain error maps to.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::PrecisionExhausted(_) | Error::RadiusTooLarge(_) => ExitStatus::PRECISION,
            Error::Config(_)
            | Error::UnknownEstimate(_)
            | Error::UnknownFamily(_)
            | Error::Format { .. }
            | Error::Io { .. } => ExitStatus::USAGE,
            _ => ExitStatus::CHECK_FAILED,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "markoff-lab", version, about = "Exact and interval laboratory for Markoff extremal numbers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// `canonical` or two matrices as `a,b,c;d,e,f` (entries x0,x1,x2).
    #[arg(long, global = true, default_value = "canonical")]
    pub seed: String,
    /// Load the sequence from a cache file instead of a seed.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Largest index a command may touch.
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Working precision; defaults to the schedule for the command.
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    #[arg(long, global = true, default_value_t = DEFAULT_GUARD_BITS)]
    pub guard_bits: u32,
    /// Output directory for reports.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Lift the hard cap on k.
    #[arg(long, global = true)]
    pub allow_large_k: bool,
    /// Skip writing report files.
    #[arg(long, global = true)]
    pub no_write: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Enumerate commuting seed pairs.
    Seeds {
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// Generate terms and optionally write a cache.
    Gen {
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Check every exact identity family.
    Verify {
        /// Restrict to these family ids.
        #[arg(long)]
        family: Vec<String>,
    },
    /// Audit normalized errors of asymptotic estimates.
    Audit {
        /// Estimate ids; empty means all.
        #[arg(long)]
        id: Vec<String>,
        #[arg(long, default_value_t = 8)]
        k_lo: usize,
        #[arg(long, default_value_t = 20)]
        k_hi: usize,
        /// Polynomial for the estimates that take one.
        #[arg(long)]
        r: Option<String>,
    },
    /// Accumulation points of fractional parts.
    Delta {
        #[arg(long, default_value = "T^3")]
        r: String,
        #[arg(long, default_value_t = 8)]
        k_lo: usize,
        #[arg(long, default_value_t = 20)]
        k_hi: usize,
    },
    /// Convergents of an accumulation point against the sequence.
    Convergents {
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, default_value_t = 16)]
        upto: usize,
    },
    /// Search for the multipliers of the mixed-product condition.
    Mj {
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 4000)]
        m_bound: i64,
        /// Defaults to 50 for j <= 3 and 1e4 above.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = crate::experiments::mj::DEFAULT_WINDOW.0)]
        window_lo: usize,
        #[arg(long, default_value_t = crate::experiments::mj::DEFAULT_WINDOW.1)]
        window_hi: usize,
    },
    /// Degree-6 construction and its quality.
    Deg6 {
        #[arg(long, default_value_t = 8)]
        k_lo: usize,
        #[arg(long, default_value_t = 18)]
        k_hi: usize,
    },
    /// Brute-force lower-bound scan.
    Scan {
        /// `r-only` or `r-plus-p`.
        #[arg(long, default_value = "r-only")]
        mode: String,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 12)]
        height: i64,
        /// Fixed `R` for `r-plus-p`.
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        exclude_q: bool,
        #[arg(long)]
        exponent: Option<f64>,
        #[arg(long, default_value_t = crate::experiments::scan::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Minimum of `n {n xi}` over a window.
    Lagrange {
        #[arg(long, default_value_t = 1_000_000)]
        n_max: u64,
    },
    /// Summarize the reports in the output directory.
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Seeds { .. } => "seeds",
            Command::Gen { .. } => "gen",
            Command::Verify { .. } => "verify",
            Command::Audit { .. } => "audit",
            Command::Delta { .. } => "delta",
            Command::Convergents { .. } => "convergents",
            Command::Mj { .. } => "mj",
            Command::Deg6 { .. } => "deg6",
            Command::Scan { .. } => "scan",
            Command::Lagrange { .. } => "lagrange",
            Command::Report => "report",
        }
    }
}

/// Resolved configuration, echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: String,
    pub cache: Option<String>,
    pub k_max: usize,
    pub bits: Option<u32>,
    pub guard_bits: u32,
    pub out_dir: String,
    pub allow_large_k: bool,
    pub command: Value,
}

/// Default `k_max` when the flag is absent.
pub const DEFAULT_K_MAX: usize = 30;

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let g = &cli.global;
        let k_max = g.k_max.unwrap_or(DEFAULT_K_MAX);
        if k_max > DEFAULT_CAP && !g.allow_large_k {
            return Err(Error::Config(format!(
                "k_max = {k_max} exceeds the cap {DEFAULT_CAP}; pass --allow-large-k to lift it"
            )));
        }
        if k_max < 2 {
            return Err(Error::Config(format!("k_max must be at least 2, got {k_max}")));
        }
        if let Some(b) = g.bits {
            if b < 64 {
                return Err(Error::Config(format!("--bits must be at least 64, got {b}")));
            }
        }
        let out = g
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(RunConfig {
            seed: g.seed.clone(),
            cache: g.cache.as_ref().map(|p| p.display().to_string()),
            k_max,
            bits: g.bits,
            guard_bits: g.guard_bits,
            out_dir: out.display().to_string(),
            allow_large_k: g.allow_large_k,
            command: output::to_value(&cli.command),
        })
    }

    /// Largest index the sequence may materialize.
    pub fn cap(&self) -> usize {
        if self.allow_large_k {
            DEFAULT_CAP.max(self.k_max + 16)
        } else {
            DEFAULT_CAP
        }
    }
}

/// Parses `canonical` or `a,b,c;d,e,f`.
pub fn parse_seed(spec: &str) -> Result<SeedPair> {
    if spec.trim().eq_ignore_ascii_case("canonical") {
        return Ok(SeedPair::canonical());
    }
    let bad = || Error::Config(format!("seed `{spec}` is not `canonical` or `a,b,c;d,e,f`"));
    let mats: Vec<SymMat2> = spec
        .split(';')
        .map(|m| {
            let v: Vec<i64> = m
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            match v[..] {
                [a, b, c] => SymMat2::from_i64(a, b, c),
                _ => Err(bad()),
            }
        })
        .collect::<Result<_>>()?;
    match <[SymMat2; 2]>::try_from(mats) {
        Ok([x1, x2]) => SeedPair::new(x1, x2),
        Err(_) => Err(bad()),
    }
}

fn build_sequence(cfg: &RunConfig) -> Result<MarkoffSequence> {
    let seq = match &cfg.cache {
        Some(p) => read_cache(std::path::Path::new(p))?,
        None => MarkoffSequence::new(parse_seed(&cfg.seed)?),
    };
    let cap = cfg.cap().max(seq.len());
    Ok(seq.with_cap(cap))
}

fn run_parsed(cli: &Cli) -> Result<ExitStatus> {
    let cfg = RunConfig::from_cli(cli)?;
    let seq = build_sequence(&cfg)?;
    let outcome = commands::dispatch(&cli.command, &cfg, &seq)?;
    for l in &outcome.lines {
        println!("{l}");
    }
    for c in &outcome.checks {
        let tag = if c.pass { "pass" } else { "FAIL" };
        println!("{}: {tag} ({})", c.name, c.detail);
    }
    let report = output::Report {
        command: cli.command.name(),
        seed: seq.seed(),
        config: &cfg,
        rows: &outcome.rows,
        summary: &outcome.summary,
        checks: &outcome.checks,
        failures: outcome.failures(),
    };
    if !cli.global.no_write {
        let (json, _) = output::emit(std::path::Path::new(&cfg.out_dir), &report, &outcome.stem)?;
        println!("report: {}", json.display());
    }
    Ok(if report.failures.is_empty() {
        ExitStatus::OK
    } else {
        ExitStatus::CHECK_FAILED
    })
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run_command<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::USAGE } else { ExitStatus::OK };
        }
    };
    match run_parsed(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitStatus::for_error(&e)
        }
    }
}
