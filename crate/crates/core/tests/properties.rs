use proptest::prelude::*;
use robust_risk::losses::PowerLoss;
use robust_risk::{
    dual_expectile_max, expectile, robust_expectile_linear, robust_functional, wasserstein_1d, Breakpoint,
    CostExponent, DensityBand, Direction, Empirical, ExpectileLevel, LossSpec, Penalization, PriorDistribution,
};

fn atoms(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, 0.05..1.0f64), 1..=max)
}

fn empirical(max: usize) -> impl Strategy<Value = Empirical> {
    atoms(max).prop_map(|mut a| {
        let total: f64 = a.iter().map(|x| x.1).sum();
        a.iter_mut().for_each(|x| x.1 /= total);
        Empirical::new(a).unwrap()
    })
}

fn penalization() -> impl Strategy<Value = Penalization> {
    prop_oneof![
        (0.1..10.0f64).prop_map(|d| Penalization::linear(d).unwrap()),
        (0.0..5.0f64).prop_map(|d| Penalization::ball(d).unwrap()),
        (0.01..3.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(|(x1, s0, ds)| {
            Penalization::piecewise_linear(vec![
                Breakpoint { start: 0.0, slope: s0 },
                Breakpoint { start: x1, slope: s0 + ds + 0.1 },
            ])
            .unwrap()
        }),
    ]
}

/// Enumerates every density taking only the two band values, renormalised:
/// the maximum of a linear fractional objective is attained at such a vertex.
fn enumerate_dual(d: &Empirical, band: DensityBand, direction: Direction) -> f64 {
    let sign = if direction == Direction::Max { 1.0 } else { -1.0 };
    let n = d.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, (x, w)) in d.atoms().enumerate() {
            let h = if mask & (1 << i) != 0 { band.upper } else { band.lower };
            num += sign * x * w * h;
            den += w * h;
        }
        best = best.max(num / den);
    }
    sign * best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partial_moments_decompose(e in empirical(30), m in -12.0..12.0f64) {
        let d = PriorDistribution::Empirical(e.clone());
        let (plus, minus) = d.partial_moments(m, 1).unwrap();
        let mean = d.mean().unwrap();
        prop_assert!((plus - minus - (mean - m)).abs() <= 1e-9);
        prop_assert!(plus >= 0.0 && minus >= 0.0);
        let (p2, m2) = d.partial_moments(m, 2).unwrap();
        let second: f64 = e.atoms().map(|(x, w)| w * (x - m) * (x - m)).sum();
        prop_assert!((p2 + m2 - second).abs() <= 1e-9 * (1.0 + second));
    }

    #[test]
    fn fenchel_young(phi in penalization(), x in 0.0..10.0f64, lambda in 0.0..12.0f64) {
        let conj = phi.conjugate(lambda);
        prop_assert!(phi.evaluate(x) + conj >= x * lambda - 1e-9);
    }

    #[test]
    fn biconjugate_recovers_penalty(phi in penalization(), x in 0.0..5.0f64) {
        let end = phi.conjugate_domain_end().min(50.0);
        let sup = (0..=5000)
            .map(|k| end * k as f64 / 5000.0)
            .chain(phi.conjugate_kinks())
            .filter(|l| phi.conjugate(*l).is_finite())
            .map(|l| x * l - phi.conjugate(l))
            .fold(f64::NEG_INFINITY, f64::max);
        let direct = phi.evaluate(x);
        // Ball penalties have an unbounded conjugate domain; the truncated
        // grid only bounds from below there.
        prop_assert!(sup <= direct + 1e-9);
        if !matches!(phi, Penalization::Ball { .. }) {
            prop_assert!((sup - direct).abs() <= 1e-2 * (1.0 + direct));
        }
    }

    #[test]
    fn conjugate_is_convex_and_nondecreasing(phi in penalization(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (fl, fh, fm) = (phi.conjugate(lo), phi.conjugate(hi), phi.conjugate(0.5 * (lo + hi)));
        prop_assert!(fl <= fh || fh.is_infinite());
        if fl.is_finite() && fh.is_finite() {
            prop_assert!(fm <= 0.5 * (fl + fh) + 1e-12);
        }
    }

    #[test]
    fn transform_dominates_and_decreases(alpha in 0.05..0.95f64, p2 in any::<bool>(), gap in 0.0..3.0f64, x in -5.0..5.0f64) {
        let (loss, p) = if p2 {
            (LossSpec::asym_quadratic(alpha).unwrap(), CostExponent::TWO)
        } else {
            (LossSpec::pinball(alpha).unwrap(), CostExponent::ONE)
        };
        let lambda = loss.finiteness_threshold(p).unwrap() + 1e-3 + gap;
        let t = loss.lambda_c_transform(p, lambda, x);
        prop_assert!(t >= loss.eval(x) - 1e-12);
        prop_assert!(loss.lambda_c_transform(p, lambda + 1.0, x) <= t + 1e-12);
        prop_assert!(loss.lambda_c_transform(p, lambda * 0.5, x) >= t - 1e-12);
    }

    #[test]
    fn closed_form_matches_numeric(alpha in 0.1..0.9f64, gap in 0.05..2.0f64, x in -3.0..3.0f64) {
        let loss = LossSpec::generalized_quantile(
            alpha,
            PowerLoss::new(alpha, 1.5).unwrap(),
            PowerLoss::new(1.0 - alpha, 1.5).unwrap(),
        ).unwrap();
        let p = CostExponent::new(1.5).unwrap();
        let lambda = loss.finiteness_threshold(p).unwrap() + gap;
        let closed = loss.lambda_c_transform(p, lambda, x);
        let numeric = loss.numeric_transform(p, lambda, x);
        prop_assert!((closed - numeric).abs() <= 1e-5 * (1.0 + closed.abs()));
    }

    #[test]
    fn robust_functional_is_weakly_dual(e in empirical(8), alpha in 0.1..0.9f64, phi in penalization(),
                                        shift in -1.0..1.0f64, m in -5.0..5.0f64) {
        let loss = LossSpec::asym_quadratic(alpha).unwrap();
        let moved = e.affine(1.0, shift).unwrap();
        let w = wasserstein_1d(&e, &moved, CostExponent::TWO);
        prop_assert!((w - shift * shift).abs() <= 1e-9 * (1.0 + w));
        let primal: f64 = moved.atoms().map(|(y, p)| p * loss.eval(y - m)).sum::<f64>() - phi.evaluate(w);
        match robust_functional(&PriorDistribution::Empirical(e), &loss, CostExponent::TWO, &phi, m) {
            Ok(dual) => prop_assert!(primal <= dual + 1e-8 * (1.0 + dual.abs())),
            Err(err) => prop_assert!(matches!(err, robust_risk::RiskError::Infeasible), "{err}"),
        }
    }

    #[test]
    fn mirror_identity(e in empirical(30), alpha in 0.05..0.95f64, extra in 0.01..10.0f64) {
        let delta = alpha.max(1.0 - alpha) + extra;
        let d = PriorDistribution::Empirical(e.clone());
        let neg = PriorDistribution::Empirical(e.affine(-1.0, 0.0).unwrap());
        let upper = robust_expectile_linear(&d, alpha, delta).unwrap();
        let lower = robust_expectile_linear(&neg, 1.0 - alpha, delta).unwrap();
        prop_assert!((upper + lower).abs() <= 1e-9 * (1.0 + upper.abs()));
    }

    #[test]
    fn adjusted_level_identity(e in empirical(30), alpha in 0.05..0.95f64, extra in 0.01..10.0f64) {
        let delta = alpha.max(1.0 - alpha) + extra;
        let d = PriorDistribution::Empirical(e);
        let level = ExpectileLevel::new(alpha, delta).unwrap().adjusted_alpha();
        let robust = robust_expectile_linear(&d, alpha, delta).unwrap();
        prop_assert!((robust - expectile(&d, level).unwrap()).abs() <= 1e-9 * (1.0 + robust.abs()));
        prop_assert!((alpha - 0.5) * (level - alpha) >= -1e-15);
    }

    #[test]
    fn wasserstein_is_a_metric(a in empirical(12), b in empirical(12), c in empirical(12), p2 in any::<bool>()) {
        let p = if p2 { CostExponent::TWO } else { CostExponent::ONE };
        let root = |v: f64| v.powf(1.0 / p.get());
        let (ab, ba) = (wasserstein_1d(&a, &b, p), wasserstein_1d(&b, &a, p));
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(wasserstein_1d(&a, &a, p).abs() <= 1e-12);
        let (bc, ac) = (wasserstein_1d(&b, &c, p), wasserstein_1d(&a, &c, p));
        prop_assert!(root(ac) <= root(ab) + root(bc) + 1e-9);
    }

    #[test]
    fn greedy_matches_enumeration(e in empirical(10), alpha in 0.05..0.95f64, extra in 0.01..10.0f64) {
        let delta = alpha.max(1.0 - alpha) + extra;
        let band = DensityBand::for_linear(alpha, delta).unwrap();
        for direction in [Direction::Max, Direction::Min] {
            let greedy = dual_expectile_max(&e, band, direction);
            let brute = enumerate_dual(&e, band, direction);
            prop_assert!((greedy - brute).abs() <= 1e-9 * (1.0 + brute.abs()));
        }
    }
}
