use std::io::Write;

use robust_risk::losses::PowerLoss;
use robust_risk::risk_measures::{robust_expectile_ball_detailed, robust_expectile_linear_detailed, ExpectileSolution};
use robust_risk::robust::robust_argmin;
use robust_risk::{
    expectile, robust_oce, var, CostExponent, LossSpec, Penalization, PriorDistribution, SearchOptions,
};

use crate::args::{LossKind, MeasureArgs, MeasureKind, PenaltyKind};
use crate::{fmt12, load_prior, Failure, EXIT_OK};

pub(crate) fn build_loss(kind: LossKind, alpha: f64) -> Result<LossSpec, Failure> {
    Ok(match kind {
        LossKind::Pinball => LossSpec::pinball(alpha)?,
        LossKind::AsymQuadratic => LossSpec::asym_quadratic(alpha)?,
        LossKind::ExcessSquare => LossSpec::generalized_quantile(
            alpha,
            PowerLoss::new(1.0, 2.0)?,
            PowerLoss::new(0.0, 2.0)?,
        )?,
    })
}

fn penalization(args: &MeasureArgs) -> Result<Penalization, Failure> {
    if let Some(json) = &args.penalty_json {
        return Penalization::from_json(json).map_err(|e| Failure::usage(format!("--penalty-json: {e}")));
    }
    let kind = args
        .penalty
        .ok_or_else(|| Failure::usage("--penalty (or --penalty-json) is required for this measure"))?;
    let delta = args
        .delta
        .ok_or_else(|| Failure::usage("--delta is required with --penalty"))?;
    let phi = match kind {
        PenaltyKind::Linear => Penalization::linear(delta),
        PenaltyKind::Ball => Penalization::ball(delta),
    };
    phi.map_err(|e| Failure::usage(format!("--delta: {e}")))
}

fn search(args: &MeasureArgs) -> Result<SearchOptions, Failure> {
    if !(args.tol > 0.0) {
        return Err(Failure::usage("--tol must be positive"));
    }
    Ok(SearchOptions {
        restrict_to_support: args.support_search,
        lambda_tol: args.tol,
        m_tol: args.tol,
        ..SearchOptions::default()
    })
}

fn cost(args: &MeasureArgs) -> CostExponent {
    if args.cost_p == 1 {
        CostExponent::ONE
    } else {
        CostExponent::TWO
    }
}

fn robust_expectile(prior: &PriorDistribution, args: &MeasureArgs) -> Result<ExpectileSolution, Failure> {
    let delta = args.delta.ok_or_else(|| Failure::usage("--delta is required"))?;
    match args.penalty {
        Some(PenaltyKind::Linear) => Ok(robust_expectile_linear_detailed(prior, args.alpha, delta)?),
        Some(PenaltyKind::Ball) => Ok(robust_expectile_ball_detailed(prior, args.alpha, delta)?),
        None => Err(Failure::usage("--penalty {linear|ball} is required")),
    }
}

pub(crate) fn run(args: &MeasureArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let prior = load_prior(&args.prior, args.draws, args.seed)?;
    let line = match args.measure {
        MeasureKind::Var => fmt12(var(&prior, args.alpha)?),
        MeasureKind::Expectile => fmt12(expectile(&prior, args.alpha)?),
        MeasureKind::RobustExpectile => {
            let s = robust_expectile(&prior, args)?;
            if args.verbose {
                let _ = writeln!(
                    err,
                    "iterations={} lambda={:?} lambda_at_boundary={}",
                    s.iterations, s.lambda, s.lambda_at_boundary
                );
            }
            fmt12(s.value)
        }
        MeasureKind::Oce => {
            let loss = build_loss(args.loss.unwrap_or(LossKind::ExcessSquare), args.alpha)?;
            let r = robust_oce(&prior, &loss, cost(args), &penalization(args)?, &search(args)?)?;
            if args.verbose {
                let _ = writeln!(
                    err,
                    "argmin_m=[{}, {}] lambda={} lambda_at_boundary={} evaluations={} converged={}",
                    r.argmin_m.lo, r.argmin_m.hi, r.argmin_lambda, r.lambda_at_boundary, r.evaluations, r.converged
                );
            }
            fmt12(r.value)
        }
        MeasureKind::Quantile => {
            let default = if args.cost_p == 1 {
                LossKind::Pinball
            } else {
                LossKind::AsymQuadratic
            };
            let loss = build_loss(args.loss.unwrap_or(default), args.alpha)?;
            let r = robust_argmin(&prior, &loss, cost(args), &penalization(args)?, &search(args)?)?;
            if args.verbose {
                let _ = writeln!(
                    err,
                    "value={} lambda={} lambda_at_boundary={} evaluations={} converged={}",
                    r.value, r.argmin_lambda, r.lambda_at_boundary, r.evaluations, r.converged
                );
            }
            format!("{} {}", fmt12(r.argmin_m.lo), fmt12(r.argmin_m.hi))
        }
    };
    writeln!(out, "{line}").map_err(|e| Failure::usage(e.to_string()))?;
    Ok(EXIT_OK)
}
