//! Loss functions and their `lambda c`-transforms
//! `l^{lambda c}(x) = sup_y { l(y) - lambda |x - y|^p }`.
//!
//! Two-sided power losses `a (x^+)^q + b (x^-)^q` with `q = p` have exact
//! transforms; everything else goes through a certified numeric supremum.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result, RiskError};
use crate::optim::golden_section;

/// Slack below `l(x)` that the truncated tail of the numeric supremum must
/// stay under.
pub const TAIL_SLACK: f64 = 1e-6;
/// Preferred grid step of the numeric supremum.
pub const GRID_STEP: f64 = 1e-3;
/// Cap on grid points per side of the numeric supremum.
pub const MAX_HALF_GRID: usize = 10_000;
/// Cap on the truncation radius of the numeric supremum.
pub const MAX_RADIUS: f64 = 1e6;

/// Transport cost exponent `p` in `c(x, y) = |x - y|^p`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CostExponent(f64);

impl CostExponent {
    pub const ONE: Self = Self(1.0);
    pub const TWO: Self = Self(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Self(p))
        } else {
            Err(invalid("cost-p", format!("{p} must be a finite real >= 1")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `|x - y|^p`
    pub fn cost(self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        if self.0 == 1.0 {
            d
        } else if self.0 == 2.0 {
            d * d
        } else {
            d.powf(self.0)
        }
    }
}

/// `u -> coefficient * u^exponent` on `u >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLoss {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerLoss {
    pub fn new(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient >= 0.0 && coefficient.is_finite()) {
            return Err(invalid("coefficient", format!("{coefficient} must be >= 0")));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(invalid("exponent", format!("{exponent} must be >= 1")));
        }
        Ok(Self { coefficient, exponent })
    }

    pub fn eval(&self, u: f64) -> f64 {
        if self.coefficient == 0.0 || u == 0.0 {
            0.0
        } else {
            self.coefficient * u.powf(self.exponent)
        }
    }
}

/// A user-supplied convex nondecreasing loss with a growth certificate
/// `l(x) <= C (1 + |x|^q)`.
#[derive(Clone)]
pub struct CustomLoss {
    name: String,
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth_constant: f64,
    growth_power: f64,
}

impl fmt::Debug for CustomLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss")
            .field("name", &self.name)
            .field("growth_constant", &self.growth_constant)
            .field("growth_power", &self.growth_power)
            .finish()
    }
}

impl PartialEq for CustomLoss {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.evaluator, &other.evaluator)
            && self.growth_constant == other.growth_constant
            && self.growth_power == other.growth_power
    }
}

/// Points on which custom growth bounds are checked at construction.
fn certification_grid() -> impl Iterator<Item = f64> {
    let magnitudes = (-6..=12).flat_map(|e| [1.0, 2.5, 5.0].map(|s| s * 10f64.powi(e / 2) * if e % 2 == 0 { 1.0 } else { 3.0 }));
    std::iter::once(0.0).chain(magnitudes.flat_map(|r| [r, -r]))
}

impl CustomLoss {
    pub fn new<F>(name: impl Into<String>, evaluator: F, growth_constant: f64, growth_power: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(growth_constant >= 0.0 && growth_constant.is_finite()) {
            return Err(invalid("growth_constant", format!("{growth_constant} must be >= 0")));
        }
        if !(growth_power >= 1.0 && growth_power.is_finite()) {
            return Err(invalid("growth_power", format!("{growth_power} must be >= 1")));
        }
        for x in certification_grid() {
            let v = evaluator(x);
            let bound = growth_constant * (1.0 + x.abs().powf(growth_power));
            if v.is_nan() || v > bound * (1.0 + 1e-12) + 1e-12 {
                return Err(RiskError::UncertifiedGrowth(format!(
                    "l({x}) = {v} exceeds {growth_constant} (1 + |x|^{growth_power})"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            growth_constant,
            growth_power,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn growth_power(&self) -> f64 {
        self.growth_power
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }
}

/// Loss functions `l` (for OCEs) and `h` (for generalized quantiles).
#[derive(Debug, Clone, PartialEq)]
pub enum LossSpec {
    /// `alpha x^+ + (1 - alpha) x^-`
    Pinball { alpha: f64 },
    /// `alpha (x^+)^2 + (1 - alpha) (x^-)^2`
    AsymQuadratic { alpha: f64 },
    /// `alpha l1(x^+) + (1 - alpha) l2(x^-)`
    GeneralizedQuantile { alpha: f64, l1: PowerLoss, l2: PowerLoss },
    Custom(CustomLoss),
}

/// `a (x^+)^q_a + b (x^-)^q_b`
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TwoSided {
    pub plus: PowerLoss,
    pub minus: PowerLoss,
}

/// One piece of the growth certificate: `|y| = r -> constant + coef r^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GrowthTerm {
    constant: f64,
    coef: f64,
    power: f64,
}

/// `l(y) <= max_i (constant_i + coef_i |y|^power_i)`.
#[derive(Debug, Clone, PartialEq)]
struct GrowthBound(Vec<GrowthTerm>);

impl GrowthBound {
    fn certifies(&self, lambda: f64, p: f64) -> bool {
        self.0.iter().all(|t| t.coef == 0.0 || t.power < p || (t.power == p && lambda > t.coef))
    }

    /// Radius `R` beyond which `l(y) - lambda |x - y|^p < target` for all
    /// `|y - x| >= R`.
    fn truncation_radius(&self, lambda: f64, p: f64, x: f64, target: f64) -> f64 {
        let ax = x.abs();
        let tail_ok = |r: f64| {
            self.0.iter().all(|t| {
                let v = t.constant + t.coef * (ax + r).powf(t.power) - lambda * r.powf(p);
                let slope = t.coef * t.power * (ax + r).powf(t.power - 1.0) - lambda * p * r.powf(p - 1.0);
                v < target && slope < 0.0
            })
        };
        let mut r = 1.0;
        while !tail_ok(r) {
            r *= 2.0;
            if r >= MAX_RADIUS {
                return MAX_RADIUS;
            }
        }
        r
    }
}

/// Closed-form transform `A(lambda) (x^+)^p + B(lambda) (x^-)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ClosedForm {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

/// Coefficient of one side of a closed-form transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Side {
    Finite(f64),
    /// `+inf` on the open half-line of this side, zero elsewhere.
    Indicator,
}

/// Shape of the transform at a given multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TransformShape {
    Infinite,
    Sides { plus: Side, minus: Side },
}

impl ClosedForm {
    pub fn threshold(&self) -> f64 {
        self.a.max(self.b)
    }

    fn side_coefficient(&self, c: f64, lambda: f64) -> f64 {
        if c == 0.0 {
            0.0
        } else if self.p == 1.0 {
            c
        } else if self.p == 2.0 {
            c * lambda / (lambda - c)
        } else {
            let r = (c / lambda).powf(1.0 / (self.p - 1.0));
            c / (1.0 - r).powf(self.p - 1.0)
        }
    }

    pub fn shape(&self, lambda: f64) -> TransformShape {
        let (a, b) = (self.a, self.b);
        let thr = self.threshold();
        if lambda < thr || lambda.is_nan() {
            return TransformShape::Infinite;
        }
        if self.p == 1.0 || lambda > thr {
            return TransformShape::Sides {
                plus: Side::Finite(self.side_coefficient(a, lambda)),
                minus: Side::Finite(self.side_coefficient(b, lambda)),
            };
        }
        // lambda == max(a, b) with p > 1.
        if a == b {
            TransformShape::Infinite
        } else if a > b {
            TransformShape::Sides {
                plus: Side::Indicator,
                minus: Side::Finite(self.side_coefficient(b, lambda)),
            }
        } else {
            TransformShape::Sides {
                plus: Side::Finite(self.side_coefficient(a, lambda)),
                minus: Side::Indicator,
            }
        }
    }

    pub fn eval(&self, lambda: f64, x: f64) -> f64 {
        match self.shape(lambda) {
            TransformShape::Infinite => f64::INFINITY,
            TransformShape::Sides { plus, minus } => {
                let (side, u) = if x > 0.0 {
                    (plus, x)
                } else if x < 0.0 {
                    (minus, -x)
                } else {
                    return 0.0;
                };
                match side {
                    Side::Indicator => f64::INFINITY,
                    Side::Finite(c) => {
                        if c == 0.0 {
                            0.0
                        } else if self.p == 1.0 {
                            c * u
                        } else if self.p == 2.0 {
                            c * u * u
                        } else {
                            c * u.powf(self.p)
                        }
                    }
                }
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(invalid("alpha", format!("{alpha} is not in (0, 1)")))
    }
}

impl LossSpec {
    pub fn pinball(alpha: f64) -> Result<Self> {
        Ok(Self::Pinball { alpha: check_alpha(alpha)? })
    }

    pub fn asym_quadratic(alpha: f64) -> Result<Self> {
        Ok(Self::AsymQuadratic { alpha: check_alpha(alpha)? })
    }

    pub fn generalized_quantile(alpha: f64, l1: PowerLoss, l2: PowerLoss) -> Result<Self> {
        let alpha = check_alpha(alpha)?;
        let l1 = PowerLoss::new(l1.coefficient, l1.exponent)?;
        let l2 = PowerLoss::new(l2.coefficient, l2.exponent)?;
        Ok(Self::GeneralizedQuantile { alpha, l1, l2 })
    }

    pub fn custom(loss: CustomLoss) -> Self {
        Self::Custom(loss)
    }

    /// Re-checks the invariants of a value built directly from the enum.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Pinball { alpha } | Self::AsymQuadratic { alpha } => check_alpha(alpha).map(drop),
            Self::GeneralizedQuantile { alpha, l1, l2 } => Self::generalized_quantile(alpha, l1, l2).map(drop),
            Self::Custom(_) => Ok(()),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Self::Pinball { alpha } | Self::AsymQuadratic { alpha } | Self::GeneralizedQuantile { alpha, .. } => Some(alpha),
            Self::Custom(_) => None,
        }
    }

    pub(crate) fn two_sided(&self) -> Option<TwoSided> {
        match *self {
            Self::Pinball { alpha } => Some(TwoSided {
                plus: PowerLoss { coefficient: alpha, exponent: 1.0 },
                minus: PowerLoss { coefficient: 1.0 - alpha, exponent: 1.0 },
            }),
            Self::AsymQuadratic { alpha } => Some(TwoSided {
                plus: PowerLoss { coefficient: alpha, exponent: 2.0 },
                minus: PowerLoss { coefficient: 1.0 - alpha, exponent: 2.0 },
            }),
            Self::GeneralizedQuantile { alpha, l1, l2 } => Some(TwoSided {
                plus: PowerLoss { coefficient: alpha * l1.coefficient, exponent: l1.exponent },
                minus: PowerLoss { coefficient: (1.0 - alpha) * l2.coefficient, exponent: l2.exponent },
            }),
            Self::Custom(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Custom(c) => c.eval(x),
            _ => {
                let s = self.two_sided().expect("two-sided loss");
                if x >= 0.0 {
                    s.plus.eval(x)
                } else {
                    s.minus.eval(-x)
                }
            }
        }
    }

    fn growth_bound(&self) -> GrowthBound {
        match self {
            Self::Custom(c) => GrowthBound(vec![GrowthTerm {
                constant: c.growth_constant,
                coef: c.growth_constant,
                power: c.growth_power,
            }]),
            _ => {
                let s = self.two_sided().expect("two-sided loss");
                GrowthBound(
                    [s.plus, s.minus]
                        .iter()
                        .map(|side| GrowthTerm {
                            constant: 0.0,
                            coef: side.coefficient,
                            power: side.exponent,
                        })
                        .collect(),
                )
            }
        }
    }

    /// Exact transform when every active side has exponent `p`.
    pub(crate) fn closed_form(&self, p: CostExponent) -> Option<ClosedForm> {
        let s = self.two_sided()?;
        let matches = |side: PowerLoss| side.coefficient == 0.0 || side.exponent == p.get();
        (matches(s.plus) && matches(s.minus)).then_some(ClosedForm {
            a: s.plus.coefficient,
            b: s.minus.coefficient,
            p: p.get(),
        })
    }

    pub fn has_closed_form(&self, p: CostExponent) -> bool {
        self.closed_form(p).is_some()
    }

    /// Infimal multiplier below which the transform is identically `+inf`.
    pub fn finiteness_threshold(&self, p: CostExponent) -> Result<f64> {
        let p = p.get();
        let mut threshold: f64 = 0.0;
        for t in &self.growth_bound().0 {
            if t.coef == 0.0 || t.power < p {
                continue;
            }
            if t.power > p {
                return Err(RiskError::UncertifiedGrowth(format!(
                    "loss grows like |x|^{} but the cost exponent is {p}",
                    t.power
                )));
            }
            threshold = threshold.max(t.coef);
        }
        Ok(threshold)
    }

    /// `l^{lambda c}(x)`, exact when a closed form exists.
    pub fn lambda_c_transform(&self, p: CostExponent, lambda: f64, x: f64) -> f64 {
        match self.closed_form(p) {
            Some(cf) => cf.eval(lambda, x),
            None => self.numeric_transform(p, lambda, x),
        }
    }

    /// Numeric supremum of `l(y) - lambda |x - y|^p`: grid search on a
    /// certified window around `x`, then golden-section refinement around the
    /// best cell. Returns `+inf` when the growth bound does not certify
    /// finiteness at this `lambda`.
    pub fn numeric_transform(&self, p: CostExponent, lambda: f64, x: f64) -> f64 {
        let bound = self.growth_bound();
        if !bound.certifies(lambda, p.get()) {
            return f64::INFINITY;
        }
        let objective = |y: f64| self.eval(y) - lambda * p.cost(x, y);
        let base = self.eval(x);
        let radius = bound.truncation_radius(lambda, p.get(), x, base - TAIL_SLACK);
        let step = GRID_STEP.max(radius / MAX_HALF_GRID as f64);
        let half = (radius / step).ceil() as i64;
        let (mut best_k, mut best) = (0i64, base);
        for k in -half..=half {
            let v = objective(x + k as f64 * step);
            if v > best {
                best = v;
                best_k = k;
            }
        }
        let centre = x + best_k as f64 * step;
        let refined = golden_section(|y| -objective(y), centre - step, centre + step, 1e-12 * (1.0 + centre.abs()), 200);
        best.max(-refined.value)
    }
}

/// Numeric certificate that `l^{lambda c}(x) >= l^{lambda c}(0) + x` at every
/// grid point (membership in the class admitting support-restricted search).
pub fn check_l_membership(loss: &LossSpec, p: CostExponent, lambda: f64, grid: &[f64]) -> bool {
    let at_zero = loss.lambda_c_transform(p, lambda, 0.0);
    if !at_zero.is_finite() {
        return false;
    }
    let tol = if loss.has_closed_form(p) { 1e-12 } else { 10.0 * TAIL_SLACK };
    grid.iter().all(|&x| {
        let v = loss.lambda_c_transform(p, lambda, x);
        v.is_finite() && v >= at_zero + x - tol * (1.0 + x.abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_plus_relu() -> LossSpec {
        LossSpec::custom(CustomLoss::new("1+x^+", |x: f64| 1.0 + x.max(0.0), 1.0, 1.0).unwrap())
    }

    #[test]
    fn pinball_transform_examples() {
        let l = LossSpec::pinball(0.3).unwrap();
        assert_abs_diff_eq!(l.lambda_c_transform(CostExponent::ONE, 0.8, 2.0), 0.6, epsilon = 1e-15);
        assert_eq!(l.lambda_c_transform(CostExponent::ONE, 0.5, 0.0), f64::INFINITY);
        // Closed at the threshold for p = 1.
        assert_abs_diff_eq!(l.lambda_c_transform(CostExponent::ONE, 0.7, -1.0), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn asym_quadratic_transform_examples() {
        let l = LossSpec::asym_quadratic(0.5).unwrap();
        assert_abs_diff_eq!(l.lambda_c_transform(CostExponent::TWO, 1.0, 2.0), 4.0, epsilon = 1e-14);
        let l = LossSpec::asym_quadratic(0.25).unwrap();
        assert_abs_diff_eq!(l.lambda_c_transform(CostExponent::TWO, 2.0, -1.0), 1.2, epsilon = 1e-14);
        let numeric = l.numeric_transform(CostExponent::TWO, 2.0, -1.0);
        assert_abs_diff_eq!(numeric, 1.2, epsilon = 1e-6);
    }

    #[test]
    fn asym_quadratic_boundary_cases() {
        // alpha < 1/2 at lambda = 1 - alpha: indicator on the negative half-line.
        let l = LossSpec::asym_quadratic(0.25).unwrap();
        let p = CostExponent::TWO;
        assert_eq!(l.lambda_c_transform(p, 0.75, -0.1), f64::INFINITY);
        assert_abs_diff_eq!(l.lambda_c_transform(p, 0.75, 2.0), 0.25 * 0.75 / 0.5 * 4.0, epsilon = 1e-14);
        assert_eq!(l.lambda_c_transform(p, 0.75, 0.0), 0.0);
        assert_eq!(l.lambda_c_transform(p, 0.7, 3.0), f64::INFINITY);
        // alpha > 1/2 at lambda = alpha: indicator on the positive half-line.
        let l = LossSpec::asym_quadratic(0.8).unwrap();
        assert_eq!(l.lambda_c_transform(p, 0.8, 0.1), f64::INFINITY);
        assert_abs_diff_eq!(l.lambda_c_transform(p, 0.8, -2.0), 0.2 * 0.8 / 0.6 * 4.0, epsilon = 1e-14);
        // alpha = 1/2: infinite up to and including lambda = 1/2.
        let l = LossSpec::asym_quadratic(0.5).unwrap();
        assert_eq!(l.lambda_c_transform(p, 0.5, 1.0), f64::INFINITY);
        assert_eq!(l.lambda_c_transform(p, 0.5, 0.0), f64::INFINITY);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(LossSpec::pinball(0.7).unwrap().finiteness_threshold(CostExponent::ONE).unwrap(), 0.7);
        assert_eq!(LossSpec::asym_quadratic(0.5).unwrap().finiteness_threshold(CostExponent::TWO).unwrap(), 0.5);
        assert_eq!(LossSpec::asym_quadratic(0.25).unwrap().finiteness_threshold(CostExponent::TWO).unwrap(), 0.75);
        assert_eq!(one_plus_relu().finiteness_threshold(CostExponent::ONE).unwrap(), 1.0);
        assert_eq!(LossSpec::pinball(0.7).unwrap().finiteness_threshold(CostExponent::TWO).unwrap(), 0.0);
        assert!(matches!(
            LossSpec::asym_quadratic(0.5).unwrap().finiteness_threshold(CostExponent::ONE),
            Err(RiskError::UncertifiedGrowth(_))
        ));
    }

    #[test]
    fn membership_examples() {
        let grid: Vec<f64> = (-10..=10).map(f64::from).collect();
        assert!(check_l_membership(&one_plus_relu(), CostExponent::ONE, 2.0, &grid));
        assert!(!check_l_membership(&LossSpec::pinball(0.3).unwrap(), CostExponent::ONE, 1.0, &grid));
        assert!(check_l_membership(&LossSpec::asym_quadratic(0.5).unwrap(), CostExponent::TWO, 1.0, &[0.0]));
    }

    #[test]
    fn custom_growth_is_certified() {
        assert!(matches!(
            CustomLoss::new("exp", f64::exp, 10.0, 2.0),
            Err(RiskError::UncertifiedGrowth(_))
        ));
        assert!(CustomLoss::new("sq+", |x: f64| x.max(0.0).powi(2), 1.0, 2.0).is_ok());
    }

    #[test]
    fn custom_transform_below_growth_constant_is_infinite() {
        let l = one_plus_relu();
        assert_eq!(l.lambda_c_transform(CostExponent::ONE, 1.0, 0.0), f64::INFINITY);
        assert_abs_diff_eq!(l.lambda_c_transform(CostExponent::ONE, 1.5, 0.7), 1.7, epsilon = 1e-9);
    }

    #[test]
    fn general_power_closed_form_matches_numeric() {
        let l = LossSpec::generalized_quantile(0.6, PowerLoss::new(1.0, 3.0).unwrap(), PowerLoss::new(2.0, 3.0).unwrap()).unwrap();
        let p = CostExponent::new(3.0).unwrap();
        assert!(l.has_closed_form(p));
        for &(lambda, x) in &[(1.5, 0.7), (2.0, -0.4), (5.0, 1.3)] {
            let exact = l.lambda_c_transform(p, lambda, x);
            let numeric = l.numeric_transform(p, lambda, x);
            assert_abs_diff_eq!(exact, numeric, epsilon = 1e-6);
        }
    }

    #[test]
    fn invalid_alpha_rejected() {
        assert!(LossSpec::pinball(0.0).is_err());
        assert!(LossSpec::asym_quadratic(1.0).is_err());
        assert!(CostExponent::new(0.5).is_err());
        assert!(PowerLoss::new(-1.0, 2.0).is_err());
    }
}
