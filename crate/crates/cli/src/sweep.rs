//! `(alpha, delta)` grids of robust expectiles written as CSV.

use std::fs;
use std::io::Write;

use rayon::prelude::*;
use robust_risk::risk_measures::{robust_expectile_ball_detailed, robust_expectile_linear_detailed};
use robust_risk::{expectile, var, PriorDistribution};

use crate::args::{PenaltyKind, SweepArgs};
use crate::{load_prior, svg, Failure, EXIT_INFEASIBLE, EXIT_OK};

pub const HEADER: [&str; 8] = ["alpha", "delta", "robust", "expectile", "var", "mean", "iters", "converged"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub delta: f64,
    pub robust: f64,
    pub expectile: f64,
    pub var: f64,
    pub mean: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Parses `a,b,c` or `start:stop:step`; the result must be nonempty and
/// strictly increasing.
pub fn parse_grid(text: &str, name: &str) -> Result<Vec<f64>, Failure> {
    let bad = |what: &str| Failure::usage(format!("--{name}: {what} in `{text}`"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("non-numeric range bound")))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("range must be start:stop:step"));
        };
        if !(step > 0.0) || !(stop >= start) {
            return Err(bad("empty or descending range"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        text.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("non-numeric entry")))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("grid must be finite and strictly increasing"));
    }
    Ok(values)
}

fn compute_row(prior: &PriorDistribution, penalty: PenaltyKind, alpha: f64, delta: f64) -> SweepRow {
    let classical = expectile(prior, alpha);
    let quantile = var(prior, alpha);
    let mean = prior.mean();
    let robust = match penalty {
        PenaltyKind::Linear => robust_expectile_linear_detailed(prior, alpha, delta),
        PenaltyKind::Ball => robust_expectile_ball_detailed(prior, alpha, delta),
    };
    let (robust, iterations, converged) = match robust {
        Ok(s) => (s.value, s.iterations, s.converged),
        Err(_) => (f64::NAN, 0, false),
    };
    SweepRow {
        alpha,
        delta,
        robust,
        expectile: *classical.as_ref().unwrap_or(&f64::NAN),
        var: quantile.unwrap_or(f64::NAN),
        mean: mean.unwrap_or(f64::NAN),
        iterations,
        converged: converged && classical.is_ok(),
    }
}

/// Pairs admitted by the penalty family, plus human-readable reasons for the
/// skipped ones.
pub fn admissible_pairs(alphas: &[f64], deltas: &[f64], penalty: PenaltyKind) -> (Vec<(f64, f64)>, Vec<String>) {
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for &alpha in alphas {
        for &delta in deltas {
            let bound = alpha.max(1.0 - alpha);
            let reason = match penalty {
                PenaltyKind::Linear if delta <= bound => Some(format!("delta must exceed max(alpha, 1 - alpha) = {bound}")),
                PenaltyKind::Ball if delta < 0.0 => Some("delta must be >= 0".to_string()),
                _ if !(alpha > 0.0 && alpha < 1.0) => Some("alpha must lie in (0, 1)".to_string()),
                _ => None,
            };
            match reason {
                Some(r) => skipped.push(format!("skipped alpha={alpha} delta={delta}: {r}")),
                None => pairs.push((alpha, delta)),
            }
        }
    }
    (pairs, skipped)
}

/// Rows in alpha-major order, computed in parallel.
pub fn compute_rows(prior: &PriorDistribution, penalty: PenaltyKind, pairs: &[(f64, f64)]) -> Vec<SweepRow> {
    pairs
        .par_iter()
        .map(|&(alpha, delta)| compute_row(prior, penalty, alpha, delta))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.delta.to_string(),
            r.robust.to_string(),
            r.expectile.to_string(),
            r.var.to_string(),
            r.mean.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn run(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let prior = load_prior(&args.prior, args.draws, args.seed)?;
    let alphas = parse_grid(&args.alphas, "alpha")?;
    let default_deltas = match args.penalty {
        PenaltyKind::Linear => "1:10:0.5",
        PenaltyKind::Ball => "0:2:0.1",
    };
    let deltas = parse_grid(args.deltas.as_deref().unwrap_or(default_deltas), "delta")?;
    let (pairs, skipped) = admissible_pairs(&alphas, &deltas, args.penalty);
    for line in &skipped {
        let _ = writeln!(err, "{line}");
    }
    let rows = compute_rows(&prior, args.penalty, &pairs);

    let mut buffer = Vec::new();
    write_csv(&rows, &mut buffer).map_err(|e| Failure::usage(e.to_string()))?;
    match &args.out {
        Some(path) => fs::write(path, &buffer).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(&buffer).map_err(|e| Failure::usage(e.to_string()))?,
    }
    if let Some(path) = &args.svg {
        let label = match args.penalty {
            PenaltyKind::Linear => "linear penalty slope",
            PenaltyKind::Ball => "ball radius",
        };
        fs::write(path, svg::render(&rows, label))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    for r in rows.iter().filter(|r| !r.converged) {
        let _ = writeln!(err, "failed alpha={} delta={}", r.alpha, r.delta);
    }
    if rows.iter().any(|r| r.converged) {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "no admissible (alpha, delta) pair produced a value");
        Ok(EXIT_INFEASIBLE)
    }
}
