//! Command-line front end: single measures, parameter sweeps and
//! verification suites.

pub mod args;
mod measure;
mod svg;
pub mod sweep;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::Parser;
use robust_risk::{PriorDistribution, RiskError};

use args::{Cli, Command, PriorSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

pub fn exit_code(err: &RiskError) -> i32 {
    match err {
        RiskError::Infeasible => EXIT_INFEASIBLE,
        RiskError::MomentUndefined { .. }
        | RiskError::DeltaTooSmall { .. }
        | RiskError::NoConvergence { .. }
        | RiskError::UncertifiedGrowth(_) => EXIT_DOMAIN,
        RiskError::InvalidParameter { .. } | RiskError::Unsupported(_) | RiskError::Parse(_) => EXIT_USAGE,
    }
}

impl From<RiskError> for Failure {
    fn from(err: RiskError) -> Self {
        Self {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

/// `{:.12}` without a sign on zero.
pub fn fmt12(v: f64) -> String {
    let s = format!("{v:.12}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

pub(crate) fn load_prior(src: &PriorSource, draws: Option<usize>, seed: u64) -> Result<PriorDistribution, Failure> {
    let read = |path: &std::path::Path| {
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
    };
    let prior = if let Some(spec) = &src.prior {
        spec.parse::<PriorDistribution>()
            .map_err(|e| Failure::usage(format!("--prior: {e}")))?
    } else if let Some(path) = &src.prior_file {
        PriorDistribution::from_json(&read(path)?).map_err(|e| Failure::usage(format!("--prior-file: {e}")))?
    } else if let Some(path) = &src.samples {
        PriorDistribution::from_csv(read(path)?.as_bytes()).map_err(|e| Failure::usage(format!("--samples: {e}")))?
    } else {
        return Err(Failure::usage("one of --prior, --prior-file, --samples is required"));
    };
    match draws {
        None => Ok(prior),
        Some(n) => {
            let values = prior.sample(n, seed).map_err(|e| Failure::usage(format!("--draws: {e}")))?;
            Ok(PriorDistribution::uniform(&values)?)
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Measure(a) => measure::run(a, out, err),
        Command::Sweep(a) => sweep::run(a, out, err),
        Command::Verify(a) => verify::run(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
