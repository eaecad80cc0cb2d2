//! Penalization functions `phi` on `[0, inf)` and their conjugates
//! `phi*(lambda) = sup_{x >= 0} (x lambda - phi(x))`.

use serde::Deserialize;

use crate::error::{invalid, Result, RiskError};

/// One linear piece of a piecewise-linear penalization: `slope` applies from
/// `start` up to the next breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Breakpoint {
    pub start: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Penalization {
    /// `phi(x) = delta x`
    Linear { delta: f64 },
    /// `phi(x) = 0` on `[0, delta]`, `+inf` beyond.
    Ball { delta: f64 },
    /// Convex, nondecreasing, `phi(0) = 0`.
    PiecewiseLinear { breakpoints: Vec<Breakpoint> },
}

#[derive(Deserialize)]
#[serde(tag = "penalty", rename_all = "kebab-case", deny_unknown_fields)]
enum PenaltyJson {
    Linear { delta: f64 },
    Ball { delta: f64 },
    #[serde(alias = "piecewise-linear")]
    Piecewise { breakpoints: Vec<(f64, f64)> },
}

impl Penalization {
    pub fn linear(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(Self::Linear { delta })
        } else {
            Err(invalid("delta", format!("{delta} must be a positive finite real")))
        }
    }

    pub fn ball(delta: f64) -> Result<Self> {
        if delta >= 0.0 && delta.is_finite() {
            Ok(Self::Ball { delta })
        } else {
            Err(invalid("delta", format!("{delta} must be a nonnegative finite real")))
        }
    }

    /// `breakpoints` are `(start, slope)` pairs; the first start must be 0.
    pub fn piecewise_linear(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        let first = breakpoints.first().ok_or_else(|| invalid("breakpoints", "empty"))?;
        if first.start != 0.0 {
            return Err(invalid("breakpoints", "first breakpoint must start at 0"));
        }
        for w in breakpoints.windows(2) {
            if !(w[1].start > w[0].start) {
                return Err(invalid("breakpoints", "starts must be strictly increasing"));
            }
            if w[1].slope < w[0].slope {
                return Err(invalid("breakpoints", "slopes must be nondecreasing"));
            }
        }
        if breakpoints.iter().any(|b| !b.start.is_finite() || !b.slope.is_finite() || b.slope < 0.0) {
            return Err(invalid("breakpoints", "starts and slopes must be finite and slopes >= 0"));
        }
        if breakpoints.iter().all(|b| b.slope == 0.0) {
            return Err(invalid("breakpoints", "at least one slope must be positive"));
        }
        Ok(Self::PiecewiseLinear { breakpoints })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { delta } => Self::linear(*delta).map(drop),
            Self::Ball { delta } => Self::ball(*delta).map(drop),
            Self::PiecewiseLinear { breakpoints } => Self::piecewise_linear(breakpoints.clone()).map(drop),
        }
    }

    /// Parses `{"penalty": "linear" | "ball" | "piecewise", ...}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PenaltyJson = serde_json::from_str(text).map_err(|e| RiskError::Parse(e.to_string()))?;
        match raw {
            PenaltyJson::Linear { delta } => Self::linear(delta),
            PenaltyJson::Ball { delta } => Self::ball(delta),
            PenaltyJson::Piecewise { breakpoints } => Self::piecewise_linear(
                breakpoints
                    .into_iter()
                    .map(|(start, slope)| Breakpoint { start, slope })
                    .collect(),
            ),
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Self::Linear { delta } => delta * x,
            Self::Ball { delta } => {
                if x <= *delta {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::PiecewiseLinear { breakpoints } => {
                let mut value = 0.0;
                for (i, b) in breakpoints.iter().enumerate() {
                    let end = breakpoints.get(i + 1).map_or(f64::INFINITY, |n| n.start);
                    if x <= b.start {
                        break;
                    }
                    value += b.slope * (x.min(end) - b.start);
                }
                value
            }
        }
    }

    pub fn conjugate(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Linear { delta } => {
                if lambda <= *delta {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Ball { delta } => delta * lambda,
            Self::PiecewiseLinear { breakpoints } => {
                if lambda > breakpoints.last().expect("nonempty").slope {
                    return f64::INFINITY;
                }
                breakpoints
                    .iter()
                    .map(|b| b.start * lambda - self.evaluate(b.start))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Largest multiplier with a finite conjugate.
    pub fn conjugate_domain_end(&self) -> f64 {
        match self {
            Self::Linear { delta } => *delta,
            Self::Ball { .. } => f64::INFINITY,
            Self::PiecewiseLinear { breakpoints } => breakpoints.last().expect("nonempty").slope,
        }
    }

    /// `phi* = 0` on its whole (unbounded) domain, i.e. no uncertainty.
    pub fn is_trivial(&self) -> bool {
        matches!(self, Self::Ball { delta } if *delta == 0.0)
    }

    /// Points where `phi*` may fail to be differentiable.
    pub fn conjugate_kinks(&self) -> Vec<f64> {
        match self {
            Self::Linear { delta } => vec![*delta],
            Self::Ball { .. } => vec![],
            Self::PiecewiseLinear { breakpoints } => breakpoints.iter().map(|b| b.slope).collect(),
        }
    }
}
