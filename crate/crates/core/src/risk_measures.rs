//! VaR, expectiles, robust generalized quantiles and the two robust
//! expectile families (linear and ball penalization).

use crate::distributions::PriorDistribution;
use crate::error::{invalid, Result, RiskError};
use crate::losses::{CostExponent, LossSpec};
use crate::optim::{bisect_increasing, expand_root_bracket, Interval, MAX_DOUBLINGS};
use crate::penalizations::Penalization;
use crate::robust::{robust_argmin, SearchOptions};

/// Bisection cap; the bracket reaches floating-point resolution well before.
const MAX_BISECTIONS: usize = 2_000;

/// Offset above `max(alpha, 1 - alpha)` where the ball-penalized multiplier
/// search starts.
pub const BALL_LAMBDA_OFFSET: f64 = 1e-8;

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(invalid("alpha", format!("{alpha} is not in (0, 1)")))
    }
}

/// Level and slope of the linearly penalized robust expectile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectileLevel {
    alpha: f64,
    delta: f64,
}

impl ExpectileLevel {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        let alpha = check_alpha(alpha)?;
        let bound = alpha.max(1.0 - alpha);
        if !(delta > bound) || delta.is_nan() {
            return Err(RiskError::DeltaTooSmall { delta, bound });
        }
        Ok(Self { alpha, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(A, B)` = `(alpha delta / (delta - alpha), (1 - alpha) delta / (delta - 1 + alpha))`.
    pub fn coefficients(&self) -> (f64, f64) {
        let (a, d) = (self.alpha, self.delta);
        if d.is_infinite() {
            return (a, 1.0 - a);
        }
        (a * d / (d - a), (1.0 - a) * d / (d - (1.0 - a)))
    }

    /// `A / (A + B)`, the classical level with the same expectile.
    pub fn adjusted_alpha(&self) -> f64 {
        adjusted_level(self.alpha, self.delta)
    }
}

/// `A(t) / (A(t) + B(t))` written without the diverging factors.
fn adjusted_level(alpha: f64, t: f64) -> f64 {
    if t.is_infinite() {
        return alpha;
    }
    let up = alpha * (t - (1.0 - alpha));
    let down = (1.0 - alpha) * (t - alpha);
    up / (up + down)
}

/// Outcome of an iterative expectile solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectileSolution {
    pub value: f64,
    pub iterations: usize,
    /// Optimal multiplier (ball penalization only).
    pub lambda: Option<f64>,
    pub lambda_at_boundary: bool,
    pub converged: bool,
}

/// Lower `alpha`-quantile.
pub fn var(d: &PriorDistribution, alpha: f64) -> Result<f64> {
    d.quantile(alpha)
}

fn root_bracket(d: &PriorDistribution) -> (f64, f64) {
    match d.as_empirical() {
        Some(e) => (e.min(), e.max()),
        None => d.initial_bracket(),
    }
}

/// Root of the nondecreasing `g` via bracket expansion and bisection.
fn solve_increasing<G: Fn(f64) -> f64>(d: &PriorDistribution, g: G) -> Result<(f64, usize)> {
    let (lo, hi) = root_bracket(d);
    let (lo, hi) = expand_root_bracket(&g, lo, hi)?;
    if g(lo) == 0.0 {
        return Ok((lo, 1));
    }
    if g(hi) == 0.0 {
        return Ok((hi, 1));
    }
    Ok(bisect_increasing(&g, lo, hi, MAX_BISECTIONS))
}

/// First-order condition `-A E[(X-m)^+] + B E[(X-m)^-]`, nondecreasing in `m`.
fn weighted_foc(d: &PriorDistribution, plus_weight: f64, minus_weight: f64) -> impl Fn(f64) -> f64 + '_ {
    move |m| {
        let (plus, minus) = d.partial_moments(m, 1).expect("moment checked up front");
        minus_weight * minus - plus_weight * plus
    }
}

fn require_second_moment(d: &PriorDistribution) -> Result<()> {
    let centre = root_bracket(d).0;
    d.partial_moments(centre, 2).map(drop)
}

/// Classical `alpha`-expectile.
pub fn expectile(d: &PriorDistribution, alpha: f64) -> Result<f64> {
    expectile_detailed(d, alpha).map(|s| s.value)
}

pub fn expectile_detailed(d: &PriorDistribution, alpha: f64) -> Result<ExpectileSolution> {
    let alpha = check_alpha(alpha)?;
    require_second_moment(d)?;
    let (value, iterations) = solve_increasing(d, weighted_foc(d, alpha, 1.0 - alpha))?;
    Ok(ExpectileSolution {
        value,
        iterations,
        lambda: None,
        lambda_at_boundary: false,
        converged: true,
    })
}

/// Argmin interval of `m -> E_phi(h, X, m)`.
pub fn robust_generalized_quantile(
    d: &PriorDistribution,
    loss: &LossSpec,
    p: CostExponent,
    phi: &Penalization,
) -> Result<Interval> {
    robust_argmin(d, loss, p, phi, &SearchOptions::default()).map(|r| r.argmin_m)
}

/// Robust expectile under the linear penalization `delta x`.
pub fn robust_expectile_linear(d: &PriorDistribution, alpha: f64, delta: f64) -> Result<f64> {
    robust_expectile_linear_detailed(d, alpha, delta).map(|s| s.value)
}

pub fn robust_expectile_linear_detailed(d: &PriorDistribution, alpha: f64, delta: f64) -> Result<ExpectileSolution> {
    let level = ExpectileLevel::new(alpha, delta)?;
    require_second_moment(d)?;
    let (a, b) = level.coefficients();
    let (value, iterations) = solve_increasing(d, weighted_foc(d, 2.0 * a, 2.0 * b))?;
    Ok(ExpectileSolution {
        value,
        iterations,
        lambda: None,
        lambda_at_boundary: false,
        converged: true,
    })
}

/// Robust expectile under the ball penalization of radius `delta`.
pub fn robust_expectile_ball(d: &PriorDistribution, alpha: f64, delta: f64) -> Result<f64> {
    robust_expectile_ball_detailed(d, alpha, delta).map(|s| s.value)
}

/// Minimizes `G(lambda) = min_m g2(m, lambda)` by bisection on its
/// derivative, which by the envelope theorem is
/// `-alpha^2/(lambda-alpha)^2 E[(X-m)^+]^2 - (1-alpha)^2/(lambda-1+alpha)^2 E[(X-m)^-]^2 + delta`
/// at the inner minimizer `m = expectile(adjusted level)`.
pub fn robust_expectile_ball_detailed(d: &PriorDistribution, alpha: f64, delta: f64) -> Result<ExpectileSolution> {
    let alpha = check_alpha(alpha)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("{delta} must be a nonnegative finite real")));
    }
    if delta == 0.0 {
        return expectile_detailed(d, alpha);
    }
    require_second_moment(d)?;

    let inner = |lambda: f64| -> Result<(f64, usize)> {
        let level = adjusted_level(alpha, lambda);
        solve_increasing(d, weighted_foc(d, level, 1.0 - level))
    };
    let iterations = std::cell::Cell::new(0usize);
    let slope = |lambda: f64| -> Result<f64> {
        let (m, its) = inner(lambda)?;
        iterations.set(iterations.get() + its);
        let (plus, minus) = d.partial_moments(m, 2)?;
        let up = alpha / (lambda - alpha);
        let down = (1.0 - alpha) / (lambda - (1.0 - alpha));
        Ok(delta - up * up * plus - down * down * minus)
    };

    let lo = alpha.max(1.0 - alpha) + BALL_LAMBDA_OFFSET;
    let (lambda, at_boundary) = if slope(lo)? >= 0.0 {
        (lo, true)
    } else {
        let mut hi = lo + 1.0;
        let mut doublings = 0;
        while slope(hi)? < 0.0 {
            hi = lo + 2.0 * (hi - lo);
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(RiskError::NoConvergence {
                    stage: "ball multiplier bracket expansion",
                });
            }
        }
        let mut failure = None;
        let (root, _) = bisect_increasing(
            |l| match slope(l) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            MAX_BISECTIONS,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        (root, false)
    };
    let (value, its) = inner(lambda)?;
    Ok(ExpectileSolution {
        value,
        iterations: iterations.get() + its,
        lambda: Some(lambda),
        lambda_at_boundary: at_boundary,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform(v: &[f64]) -> PriorDistribution {
        PriorDistribution::uniform(v).unwrap()
    }

    #[test]
    fn var_examples() {
        assert_eq!(var(&uniform(&[1.0, 2.0, 3.0, 4.0]), 0.5).unwrap(), 2.0);
        assert_abs_diff_eq!(var(&PriorDistribution::normal(1.5, 2.0).unwrap(), 0.5).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            var(&PriorDistribution::exponential(1.0).unwrap(), 0.9).unwrap(),
            10f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn expectile_examples() {
        assert_abs_diff_eq!(expectile(&uniform(&[0.0, 1.0]), 0.75).unwrap(), 0.75, epsilon = 1e-14);
        let d = uniform(&[0.3, 1.7, 4.0, -2.0]);
        assert_abs_diff_eq!(expectile(&d, 0.5).unwrap(), d.mean().unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn expectile_needs_second_moment() {
        let d = PriorDistribution::student_t(1.5, 0.0, 1.0).unwrap();
        assert!(matches!(expectile(&d, 0.7), Err(RiskError::MomentUndefined { .. })));
    }

    #[test]
    fn linear_examples() {
        assert_abs_diff_eq!(robust_expectile_linear(&uniform(&[0.0, 1.0]), 0.75, 1.0).unwrap(), 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!(
            robust_expectile_linear(&uniform(&[1.0, 2.0, 3.0]), 0.75, 1.0).unwrap(),
            30.0 / 11.0,
            epsilon = 1e-14
        );
        let d = PriorDistribution::exponential(2.0).unwrap();
        assert_abs_diff_eq!(robust_expectile_linear(&d, 0.5, 3.0).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn linear_rejects_small_delta() {
        assert_eq!(
            robust_expectile_linear(&uniform(&[0.0, 1.0]), 0.75, 0.75),
            Err(RiskError::DeltaTooSmall { delta: 0.75, bound: 0.75 })
        );
    }

    #[test]
    fn adjusted_level_example() {
        let level = ExpectileLevel::new(0.75, 1.0).unwrap();
        assert_eq!(level.coefficients(), (3.0, 1.0 / 3.0));
        assert_abs_diff_eq!(level.adjusted_alpha(), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn ball_reductions() {
        let d = PriorDistribution::exponential(1.0).unwrap();
        assert_eq!(robust_expectile_ball(&d, 0.7, 0.0).unwrap(), expectile(&d, 0.7).unwrap());
        let d = uniform(&[0.0, 2.0, 7.0]);
        assert_abs_diff_eq!(robust_expectile_ball(&d, 0.5, 0.8).unwrap(), 3.0, epsilon = 1e-12);
    }

    /// Brute-force minimization of `inf_lambda g2(m, lambda)` over a grid of
    /// `m`, with golden-section in `lambda`.
    fn ball_grid_oracle(d: &PriorDistribution, alpha: f64, delta: f64, lo: f64, hi: f64, steps: usize) -> f64 {
        let g2 = |m: f64, lambda: f64| {
            let (plus, minus) = d.partial_moments(m, 2).unwrap();
            let a = alpha * lambda / (lambda - alpha);
            let b = (1.0 - alpha) * lambda / (lambda - (1.0 - alpha));
            a * plus + b * minus + delta * lambda
        };
        let floor = alpha.max(1.0 - alpha);
        let inner = |m: f64| crate::optim::golden_section(|l| g2(m, l), floor + 1e-12, floor + 50.0, 1e-12, 300).value;
        (0..=steps)
            .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
            .map(|m| (inner(m), m))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
            .1
    }

    #[test]
    fn ball_normal_exceeds_expectile() {
        let d = PriorDistribution::normal(0.0, 1.0).unwrap();
        let robust = robust_expectile_ball(&d, 0.75, 0.5).unwrap();
        let classical = expectile(&d, 0.75).unwrap();
        assert!(robust > classical);
        let oracle = ball_grid_oracle(&d, 0.75, 0.5, classical, classical + 1.0, 10_000);
        assert_abs_diff_eq!(robust, oracle, epsilon = 2e-4);
    }

    #[test]
    fn generalized_quantile_examples() {
        let pinball = LossSpec::pinball(0.5).unwrap();
        let d = uniform(&[1.0, 2.0, 3.0, 4.0]);
        let iv = robust_generalized_quantile(&d, &pinball, CostExponent::ONE, &Penalization::linear(2.0).unwrap()).unwrap();
        assert!(iv.contains(2.0));

        let quad = LossSpec::asym_quadratic(0.75).unwrap();
        let iv = robust_generalized_quantile(&uniform(&[0.0, 1.0]), &quad, CostExponent::TWO, &Penalization::ball(0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(iv.lo, 0.75, epsilon = 1e-6);
        assert_abs_diff_eq!(iv.hi, 0.75, epsilon = 1e-6);

        let quad = LossSpec::asym_quadratic(0.5).unwrap();
        let point = PriorDistribution::point_mass(1.25).unwrap();
        let iv = robust_generalized_quantile(&point, &quad, CostExponent::TWO, &Penalization::linear(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(iv.lo, 1.25, epsilon = 1e-6);
        assert_abs_diff_eq!(iv.hi, 1.25, epsilon = 1e-6);
    }
}
