//! Robust functional `E_phi(l, X, m)` and robust OCE through the dual
//! formula `inf_{lambda >= 0} E[l^{lambda c}(X - m)] + phi*(lambda)`.

use std::cell::Cell;

use crate::distributions::PriorDistribution;
use crate::error::{Result, RiskError};
use crate::losses::{ClosedForm, CostExponent, LossSpec, Side, TransformShape};
use crate::optim::{golden_section, minimize_convex, minimize_convex_on, ConvexSearch, Interval, MAX_DOUBLINGS};
use crate::penalizations::Penalization;

/// Relative distance to a conjugate-domain end below which a dual
/// minimizer is reported as a boundary solution.
const BOUNDARY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Confine the `m` search to `[min, max]` of an empirical prior.
    pub restrict_to_support: bool,
    pub lambda_tol: f64,
    pub m_tol: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restrict_to_support: false,
            lambda_tol: 1e-9,
            m_tol: 1e-9,
            max_iter: 200,
        }
    }
}

impl SearchOptions {
    fn convex_search(&self) -> ConvexSearch {
        ConvexSearch {
            tol: self.m_tol,
            max_iter: self.max_iter,
            ..ConvexSearch::default()
        }
    }
}

/// Minimizer of the inner dual problem at a fixed `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    /// `+inf` when the infimum is the `lambda -> inf` limit.
    pub lambda: f64,
    pub at_boundary: bool,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustValue {
    pub value: f64,
    pub argmin_m: Interval,
    pub argmin_lambda: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Dual minimizer sits on an end of the feasible multiplier range.
    pub lambda_at_boundary: bool,
}

/// `lambda -> E[l^{lambda c}(X - m)]` at a fixed `m`.
enum ExpectedTransform<'a> {
    Closed {
        form: ClosedForm,
        plus_moment: f64,
        minus_moment: f64,
        plus_mass: f64,
        minus_mass: f64,
    },
    Numeric {
        values: &'a [f64],
        weights: &'a [f64],
        loss: &'a LossSpec,
        p: CostExponent,
        m: f64,
    },
}

fn side_term(side: Side, moment: f64, mass: f64) -> f64 {
    match side {
        Side::Indicator if mass > 0.0 => f64::INFINITY,
        Side::Indicator => 0.0,
        Side::Finite(c) if c == 0.0 => 0.0,
        Side::Finite(c) => c * moment,
    }
}

fn mass_above(d: &PriorDistribution, m: f64) -> f64 {
    1.0 - d.cdf(m)
}

fn mass_below(d: &PriorDistribution, m: f64) -> f64 {
    match d {
        PriorDistribution::Empirical(e) => e.cdf_left(m),
        _ => d.cdf(m),
    }
}

fn empirical_only<'a>(d: &'a PriorDistribution, what: &str) -> Result<&'a crate::distributions::Empirical> {
    d.as_empirical()
        .ok_or_else(|| RiskError::Unsupported(format!("{what} requires an empirical prior, got {}", d.family())))
}

impl<'a> ExpectedTransform<'a> {
    fn new(d: &'a PriorDistribution, loss: &'a LossSpec, p: CostExponent, m: f64) -> Result<Self> {
        if let Some(form) = loss.closed_form(p) {
            let (plus_moment, minus_moment) = if form.a == 0.0 && form.b == 0.0 {
                (0.0, 0.0)
            } else {
                d.partial_moments_real(m, p.get())?
            };
            return Ok(Self::Closed {
                form,
                plus_moment,
                minus_moment,
                plus_mass: mass_above(d, m),
                minus_mass: mass_below(d, m),
            });
        }
        let e = empirical_only(d, "a numeric transform")?;
        Ok(Self::Numeric {
            values: e.values(),
            weights: e.weights(),
            loss,
            p,
            m,
        })
    }

    fn at(&self, lambda: f64) -> f64 {
        match self {
            Self::Closed {
                form,
                plus_moment,
                minus_moment,
                plus_mass,
                minus_mass,
            } => match form.shape(lambda) {
                TransformShape::Infinite => f64::INFINITY,
                TransformShape::Sides { plus, minus } => {
                    side_term(plus, *plus_moment, *plus_mass) + side_term(minus, *minus_moment, *minus_mass)
                }
            },
            Self::Numeric {
                values,
                weights,
                loss,
                p,
                m,
            } => {
                let mut total = 0.0;
                for (x, w) in values.iter().zip(weights.iter()) {
                    let t = loss.lambda_c_transform(*p, lambda, x - m);
                    if t == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    total += w * t;
                }
                total
            }
        }
    }
}

/// `E[l(X - m)]`.
pub fn expected_loss(d: &PriorDistribution, loss: &LossSpec, m: f64) -> Result<f64> {
    if let Some(s) = loss.two_sided() {
        let mut total = 0.0;
        for (side, plus) in [(s.plus, true), (s.minus, false)] {
            if side.coefficient == 0.0 {
                continue;
            }
            let (mp, mm) = d.partial_moments_real(m, side.exponent)?;
            total += side.coefficient * if plus { mp } else { mm };
        }
        return Ok(total);
    }
    let e = empirical_only(d, "a custom loss")?;
    Ok(e.atoms().map(|(x, w)| w * loss.eval(x - m)).sum())
}

/// `E_phi(l, X, m)`.
pub fn robust_functional(
    d: &PriorDistribution,
    loss: &LossSpec,
    p: CostExponent,
    phi: &Penalization,
    m: f64,
) -> Result<f64> {
    robust_functional_detailed(d, loss, p, phi, m, &SearchOptions::default()).map(|v| v.value)
}

/// `E_phi(l, X, m)` together with its dual minimizer.
pub fn robust_functional_detailed(
    d: &PriorDistribution,
    loss: &LossSpec,
    p: CostExponent,
    phi: &Penalization,
    m: f64,
    opts: &SearchOptions,
) -> Result<DualValue> {
    let threshold = loss.finiteness_threshold(p)?;
    if phi.is_trivial() {
        return Ok(DualValue {
            value: expected_loss(d, loss, m)?,
            lambda: f64::INFINITY,
            at_boundary: false,
            evaluations: 1,
            converged: true,
        });
    }
    let transform = ExpectedTransform::new(d, loss, p, m)?;
    let evaluations = Cell::new(0usize);
    let objective = |lambda: f64| {
        evaluations.set(evaluations.get() + 1);
        let c = phi.conjugate(lambda);
        if c == f64::INFINITY {
            return f64::INFINITY;
        }
        transform.at(lambda) + c
    };

    let domain_end = phi.conjugate_domain_end();
    if domain_end < threshold {
        return Err(RiskError::Infeasible);
    }
    let hi = if domain_end.is_finite() {
        domain_end
    } else {
        expand_lambda_bracket(&objective, threshold)?
    };

    let mut candidates = vec![(threshold, objective(threshold)), (hi, objective(hi))];
    let mut converged = true;
    if hi > threshold {
        let tol = opts.lambda_tol * (1.0 + threshold.abs());
        let min = golden_section(objective, threshold, hi, tol, opts.max_iter);
        converged = min.converged;
        candidates.push((min.x, min.value));
        for &k in &phi.conjugate_kinks() {
            if k > threshold && k < hi {
                candidates.push((k, objective(k)));
            }
        }
    }
    let (lambda, value) = candidates
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    if value == f64::INFINITY {
        return Err(RiskError::Infeasible);
    }
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL * (1.0 + b.abs());
    Ok(DualValue {
        value,
        lambda,
        at_boundary: near(lambda, threshold) || (domain_end.is_finite() && near(lambda, domain_end)),
        evaluations: evaluations.get(),
        converged,
    })
}

/// Upper multiplier bracket for penalizations with unbounded conjugate
/// domain: doubles the offset above `threshold` until the objective rises.
fn expand_lambda_bracket<F: Fn(f64) -> f64>(objective: &F, threshold: f64) -> Result<f64> {
    let mut step = 1.0;
    let mut current = objective(threshold + step);
    for _ in 0..MAX_DOUBLINGS {
        let next = objective(threshold + 2.0 * step);
        if next.is_finite() && next >= current {
            return Ok(threshold + 2.0 * step);
        }
        current = next;
        step *= 2.0;
    }
    Err(RiskError::NoConvergence {
        stage: "multiplier bracket expansion",
    })
}

fn kinks(d: &PriorDistribution) -> Vec<f64> {
    d.as_empirical().map(|e| e.values().to_vec()).unwrap_or_default()
}

/// Minimizes `m -> offset(m) + inner(m)` where `inner` reports a dual
/// solution at each `m`.
fn minimize_over_m<F>(d: &PriorDistribution, opts: &SearchOptions, with_m: bool, inner: F) -> Result<RobustValue>
where
    F: Fn(f64) -> Result<DualValue>,
{
    let first_error: Cell<Option<RiskError>> = Cell::new(None);
    let evaluations = Cell::new(0usize);
    let all_converged = Cell::new(true);
    let objective = |m: f64| match inner(m) {
        Ok(v) => {
            evaluations.set(evaluations.get() + v.evaluations);
            all_converged.set(all_converged.get() && v.converged);
            if with_m {
                m + v.value
            } else {
                v.value
            }
        }
        Err(RiskError::Infeasible) => f64::INFINITY,
        Err(e) => {
            let prev = first_error.take();
            first_error.set(prev.or(Some(e)));
            f64::INFINITY
        }
    };
    let search = opts.convex_search();
    let knots = kinks(d);
    let result = match (opts.restrict_to_support, d.as_empirical()) {
        (true, Some(e)) => minimize_convex_on(objective, e.min(), e.max(), &knots, &search),
        _ => {
            let (a, b) = d.initial_bracket();
            minimize_convex(objective, a, b, &knots, &search)
        }
    };
    if let Some(e) = first_error.take() {
        return Err(e);
    }
    let min = result?;
    let at_min = inner(min.x)?;
    Ok(RobustValue {
        value: min.value,
        argmin_m: min.argmin,
        argmin_lambda: at_min.lambda,
        evaluations: evaluations.get(),
        converged: min.converged && all_converged.get(),
        lambda_at_boundary: at_min.at_boundary,
    })
}

/// `inf_m { m + E_phi(l, X, m) }`.
pub fn robust_oce(
    d: &PriorDistribution,
    loss: &LossSpec,
    p: CostExponent,
    phi: &Penalization,
    opts: &SearchOptions,
) -> Result<RobustValue> {
    minimize_over_m(d, opts, true, |m| robust_functional_detailed(d, loss, p, phi, m, opts))
}

/// `inf_m { m + E[l(X - m)] }`.
pub fn classical_oce(d: &PriorDistribution, loss: &LossSpec, opts: &SearchOptions) -> Result<RobustValue> {
    minimize_over_m(d, opts, true, |m| {
        Ok(DualValue {
            value: expected_loss(d, loss, m)?,
            lambda: f64::INFINITY,
            at_boundary: false,
            evaluations: 1,
            converged: true,
        })
    })
}

/// `argmin_m E_phi(h, X, m)` with its minimal value.
pub fn robust_argmin(
    d: &PriorDistribution,
    loss: &LossSpec,
    p: CostExponent,
    phi: &Penalization,
    opts: &SearchOptions,
) -> Result<RobustValue> {
    minimize_over_m(d, opts, false, |m| robust_functional_detailed(d, loss, p, phi, m, opts))
}
