//! Seeded property suites printed as `name: PASS` / `name: FAIL (...)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_risk::losses::PowerLoss;
use robust_risk::robust::robust_functional;
use robust_risk::{
    check_l_membership, classical_oce, dual_expectile_max, expectile, robust_expectile_ball, robust_expectile_linear,
    robust_generalized_quantile, robust_oce, var, wasserstein_1d, CostExponent, CustomLoss, DensityBand, Direction,
    Empirical, ExpectileLevel, LossSpec, Penalization, PriorDistribution, SearchOptions,
};

use crate::args::{Suite, VerifyArgs};
use crate::{Failure, EXIT_OK, EXIT_USAGE};

type Outcome = Result<(), String>;

pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn lib<T>(r: robust_risk::Result<T>, context: impl FnOnce() -> String) -> Result<T, String> {
    r.map_err(|e| format!("{}: {e}", context()))
}

/// Values rounded to three decimals on `[-5, 5]` with random weights.
pub fn random_empirical(rng: &mut ChaCha8Rng, max_atoms: usize) -> Empirical {
    let n = rng.random_range(1..=max_atoms);
    let raw: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let v = (rng.random_range(-5.0..5.0) * 1e3_f64).round() / 1e3;
            (v, rng.random_range(0.1..1.0))
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    Empirical::new(raw.into_iter().map(|(v, w)| (v, w / total))).expect("valid random law")
}

/// Outcomes on `n` equally likely states.
fn random_states(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| (rng.random_range(-5.0..5.0) * 1e3_f64).round() / 1e3).collect()
}

fn on_states(values: &[f64]) -> PriorDistribution {
    PriorDistribution::uniform(values).expect("finite states")
}

fn excess_square(alpha: f64) -> LossSpec {
    LossSpec::generalized_quantile(
        alpha,
        PowerLoss::new(1.0, 2.0).expect("valid"),
        PowerLoss::new(0.0, 2.0).expect("valid"),
    )
    .expect("valid level")
}

fn oce(d: &PriorDistribution, loss: &LossSpec, phi: &Penalization) -> Result<f64, String> {
    lib(robust_oce(d, loss, CostExponent::TWO, phi, &SearchOptions::default()), || format!("robust oce of {d:?}"))
        .map(|r| r.value)
}

pub fn axioms(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loss = excess_square(0.7);
    let phi = Penalization::linear(2.0).expect("valid");
    let mut checks = Vec::new();

    let cases: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..50)
        .map(|_| {
            let n = rng.random_range(1..=12);
            (random_states(&mut rng, n), random_states(&mut rng, n), rng.random_range(-10.0..10.0))
        })
        .collect();

    checks.push(Check {
        name: "oce translation invariance",
        outcome: cases.iter().try_for_each(|(xs, _, c)| {
            let x = on_states(xs);
            let shifted = lib(x.affine(1.0, *c), || "shift".into())?;
            let (a, b) = (oce(&x, &loss, &phi)?, oce(&shifted, &loss, &phi)?);
            ensure((b - a - c).abs() <= 1e-7, || format!("X={xs:?} C={c}: {b} != {a} + {c}"))
        }),
    });
    checks.push(Check {
        name: "oce monotonicity",
        outcome: cases.iter().try_for_each(|(xs, ys, _)| {
            let upper: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x.max(*y)).collect();
            let (a, b) = (oce(&on_states(xs), &loss, &phi)?, oce(&on_states(&upper), &loss, &phi)?);
            ensure(a <= b + 1e-9, || format!("X={xs:?} <= Y={upper:?} but {a} > {b}"))
        }),
    });
    checks.push(Check {
        name: "oce convexity",
        outcome: cases.iter().enumerate().try_for_each(|(i, (xs, ys, _))| {
            let t = (i as f64 + 0.5) / cases.len() as f64;
            let mix: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let (a, b, m) = (
                oce(&on_states(xs), &loss, &phi)?,
                oce(&on_states(ys), &loss, &phi)?,
                oce(&on_states(&mix), &loss, &phi)?,
            );
            ensure(m <= t * a + (1.0 - t) * b + 1e-7, || format!("X={xs:?} Y={ys:?} t={t}: {m} > {}", t * a + (1.0 - t) * b))
        }),
    });
    checks.push(Check {
        name: "oce larger loss gives larger value",
        outcome: cases.iter().try_for_each(|(xs, _, _)| {
            let d = on_states(xs);
            let (a, b) = (oce(&d, &excess_square(0.6), &phi)?, oce(&d, &excess_square(0.8), &phi)?);
            ensure(a <= b + 1e-7, || format!("X={xs:?}: {a} > {b}"))
        }),
    });
    checks.push(Check {
        name: "oce larger penalization gives smaller value",
        outcome: cases.iter().try_for_each(|(xs, _, _)| {
            let d = on_states(xs);
            let loose = oce(&d, &loss, &Penalization::linear(1.5).expect("valid"))?;
            let strict = oce(&d, &loss, &Penalization::linear(4.0).expect("valid"))?;
            let classical = lib(classical_oce(&d, &loss, &SearchOptions::default()), || "classical oce".into())?.value;
            ensure(strict <= loose + 1e-7 && classical <= strict + 1e-7, || {
                format!("X={xs:?}: slope 1.5 -> {loose}, slope 4 -> {strict}, classical {classical}")
            })
        }),
    });
    checks.push(Check {
        name: "oce of zero under 1+x^+ equals 1",
        outcome: (|| {
            let l = LossSpec::custom(lib(CustomLoss::new("1+x^+", |x: f64| 1.0 + x.max(0.0), 1.0, 1.0), || "loss".into())?);
            let zero = lib(PriorDistribution::point_mass(0.0), || "point mass".into())?;
            let r = lib(
                robust_oce(&zero, &l, CostExponent::ONE, &Penalization::linear(2.0).expect("valid"), &SearchOptions::default()),
                || "oce".into(),
            )?;
            ensure((r.value - 1.0).abs() <= 1e-9, || format!("value {}", r.value))
        })(),
    });
    checks.push(Check {
        name: "robust expectile coherence",
        outcome: coherence(&mut rng, 200),
    });
    checks
}

fn coherence(rng: &mut ChaCha8Rng, pairs: usize) -> Outcome {
    let e = |xs: &[f64], alpha: f64, delta: f64| {
        lib(robust_expectile_linear(&on_states(xs), alpha, delta), || format!("expectile of {xs:?}"))
    };
    for i in 0..pairs {
        let alpha = [0.6, 0.75, 0.9][i % 3];
        let delta = rng.random_range(alpha + 0.05..10.0);
        let n = rng.random_range(1..=15);
        let (xs, ys) = (random_states(rng, n), random_states(rng, n));
        let c = rng.random_range(-10.0..10.0);
        let (ex, ey) = (e(&xs, alpha, delta)?, e(&ys, alpha, delta)?);
        let ctx = || format!("alpha={alpha} delta={delta} X={xs:?} Y={ys:?}");

        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let v = e(&shifted, alpha, delta)?;
        ensure((v - ex - c).abs() <= 1e-8, || format!("translation {}: {v} vs {}", ctx(), ex + c))?;
        for t in [0.0, 0.5, 2.0, 7.0] {
            let scaled: Vec<f64> = xs.iter().map(|x| t * x).collect();
            let v = e(&scaled, alpha, delta)?;
            ensure((v - t * ex).abs() <= 1e-8 * (1.0 + t), || format!("homogeneity t={t} {}: {v} vs {}", ctx(), t * ex))?;
        }
        let upper: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x.max(*y)).collect();
        let v = e(&upper, alpha, delta)?;
        ensure(ex <= v + 1e-8, || format!("monotonicity {}: {ex} > {v}", ctx()))?;
        let sum: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + y).collect();
        let v = e(&sum, alpha, delta)?;
        ensure(v <= ex + ey + 1e-8, || format!("subadditivity {}: {v} > {}", ctx(), ex + ey))?;
    }
    Ok(())
}

/// Best two-level density over all subsets (not only thresholds).
pub fn vertex_enumeration(d: &Empirical, ratio: f64, direction: Direction) -> f64 {
    let atoms: Vec<(f64, f64)> = d.atoms().collect();
    let n = atoms.len();
    let values = (0u32..1 << n).map(|mask| {
        let (mut mass, mut moment) = (0.0, 0.0);
        for (i, (x, w)) in atoms.iter().enumerate() {
            let r = if mask & (1 << i) != 0 { ratio } else { 1.0 };
            mass += r * w;
            moment += r * w * x;
        }
        moment / mass
    });
    match direction {
        Direction::Max => values.fold(f64::NEG_INFINITY, f64::max),
        Direction::Min => values.fold(f64::INFINITY, f64::min),
    }
}

pub fn duality(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut checks = Vec::new();
    checks.push(Check {
        name: "dual oracle 30/11",
        outcome: (|| {
            let d = lib(Empirical::uniform(&[1.0, 2.0, 3.0]), || "law".into())?;
            let band = lib(DensityBand::for_linear(0.75, 1.0), || "band".into())?;
            let dual = dual_expectile_max(&d, band, Direction::Max);
            let primal = lib(robust_expectile_linear(&PriorDistribution::Empirical(d), 0.75, 1.0), || "expectile".into())?;
            let target = 30.0 / 11.0;
            ensure((dual - target).abs() <= 1e-12 && (primal - target).abs() <= 1e-12, || {
                format!("dual {dual}, primal {primal}")
            })
        })(),
    });
    checks.push(Check {
        name: "dual oracle agreement",
        outcome: (0..50).try_for_each(|_| {
            let d = random_empirical(&mut rng, 50);
            let prior = PriorDistribution::Empirical(d.clone());
            for alpha in [0.6, 0.75, 0.9, 0.1, 0.25, 0.4] {
                for delta in [1.0, 2.0, 10.0] {
                    let band = lib(DensityBand::for_linear(alpha, delta), || "band".into())?;
                    let dual = dual_expectile_max(&d, band, DensityBand::direction(alpha));
                    let primal = lib(robust_expectile_linear(&prior, alpha, delta), || "expectile".into())?;
                    ensure((dual - primal).abs() <= 1e-8, || {
                        format!("alpha={alpha} delta={delta} law={:?}: dual {dual} primal {primal}", d.values())
                    })?;
                }
            }
            Ok(())
        }),
    });
    checks.push(Check {
        name: "threshold greedy equals vertex enumeration",
        outcome: (0..200).try_for_each(|_| {
            let d = random_empirical(&mut rng, 4);
            let band = DensityBand {
                lower: 1.0,
                upper: rng.random_range(1.0..20.0),
            };
            [Direction::Max, Direction::Min].into_iter().try_for_each(|dir| {
                let (g, v) = (dual_expectile_max(&d, band, dir), vertex_enumeration(&d, band.ratio(), dir));
                ensure((g - v).abs() <= 1e-12, || format!("{:?} {dir:?}: greedy {g} vertices {v}", d.atoms().collect::<Vec<_>>()))
            })
        }),
    });
    checks.push(Check {
        name: "weak duality",
        outcome: weak_duality(&mut rng, 100),
    });
    checks
}

fn weak_duality(rng: &mut ChaCha8Rng, cases: usize) -> Outcome {
    for i in 0..cases {
        let base = random_empirical(rng, 8);
        let (loss, p) = if i % 2 == 0 {
            (LossSpec::pinball(rng.random_range(0.1..0.9)).expect("valid"), CostExponent::ONE)
        } else {
            (LossSpec::asym_quadratic(rng.random_range(0.1..0.9)).expect("valid"), CostExponent::TWO)
        };
        let phi = match i % 4 {
            0 | 1 => Penalization::linear(rng.random_range(1.0..4.0)).expect("valid"),
            _ => Penalization::ball(rng.random_range(0.05..1.0)).expect("valid"),
        };
        let scale = rng.random_range(0.01..1.5);
        let moved = Empirical::new(base.atoms().flat_map(|(x, w)| {
            let split = rng.random_range(0.2..0.8);
            let a = x + scale * rng.random_range(-1.0..1.0);
            let b = x + scale * rng.random_range(-1.0..1.0);
            [(a, w * split), (b, w * (1.0 - split))]
        }))
        .map_err(|e| e.to_string())?;
        let m = rng.random_range(-3.0..3.0);
        let cost = wasserstein_1d(&base, &moved, p);
        let primal: f64 = moved.atoms().map(|(y, w)| w * loss.eval(y - m)).sum::<f64>() - phi.evaluate(cost);
        let dual = lib(
            robust_functional(&PriorDistribution::Empirical(base.clone()), &loss, p, &phi, m),
            || "robust functional".into(),
        )?;
        ensure(primal <= dual + 1e-9, || format!("case {i}: primal {primal} > dual {dual} ({loss:?}, {phi:?}, m={m})"))?;
    }
    Ok(())
}

pub fn transforms(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let closed: Vec<(LossSpec, CostExponent)> = vec![
        (LossSpec::pinball(0.3).expect("valid"), CostExponent::ONE),
        (LossSpec::pinball(0.8).expect("valid"), CostExponent::ONE),
        (LossSpec::asym_quadratic(0.25).expect("valid"), CostExponent::TWO),
        (LossSpec::asym_quadratic(0.5).expect("valid"), CostExponent::TWO),
        (LossSpec::asym_quadratic(0.8).expect("valid"), CostExponent::TWO),
    ];
    let probes: Vec<(usize, f64, f64)> = (0..200)
        .map(|k| {
            let (l, p) = &closed[k % closed.len()];
            let thr = l.finiteness_threshold(*p).expect("certified");
            (k % closed.len(), thr + rng.random_range(0.02..3.0), rng.random_range(-5.0..5.0))
        })
        .collect();
    let mut checks = Vec::new();
    checks.push(Check {
        name: "closed-form transforms match numeric supremum",
        outcome: probes.iter().try_for_each(|&(i, lambda, x)| {
            let (l, p) = &closed[i];
            let (exact, numeric) = (l.lambda_c_transform(*p, lambda, x), l.numeric_transform(*p, lambda, x));
            ensure(!exact.is_finite() || !numeric.is_finite() || (exact - numeric).abs() <= 1e-4, || {
                format!("{l:?} lambda={lambda} x={x}: closed {exact} numeric {numeric}")
            })
        }),
    });
    let increasing: Vec<(LossSpec, CostExponent)> = vec![
        (excess_square(0.6), CostExponent::TWO),
        (
            LossSpec::custom(CustomLoss::new("1+x^+", |x: f64| 1.0 + x.max(0.0), 1.0, 1.0).expect("certified")),
            CostExponent::ONE,
        ),
    ];
    let all: Vec<&(LossSpec, CostExponent)> = closed.iter().chain(increasing.iter()).collect();
    let lambda_for = |rng: &mut ChaCha8Rng, l: &LossSpec, p: CostExponent| {
        l.finiteness_threshold(p).expect("certified") + rng.random_range(0.05..3.0)
    };
    checks.push(Check {
        name: "transform dominates the loss",
        outcome: (0..200).try_for_each(|k| {
            let (l, p) = all[k % all.len()];
            let (lambda, x) = (lambda_for(&mut rng, l, *p), rng.random_range(-5.0..5.0));
            let t = l.lambda_c_transform(*p, lambda, x);
            ensure(t >= l.eval(x) - 1e-12, || format!("{l:?} lambda={lambda} x={x}: {t} < {}", l.eval(x)))
        }),
    });
    checks.push(Check {
        name: "transform nondecreasing in x for nondecreasing losses",
        outcome: (0..100).try_for_each(|k| {
            let (l, p) = &increasing[k % increasing.len()];
            let lambda = lambda_for(&mut rng, l, *p);
            let grid: Vec<f64> = (-20..=20).map(|j| j as f64 * 0.25).collect();
            let values: Vec<f64> = grid.iter().map(|&x| l.lambda_c_transform(*p, lambda, x)).collect();
            ensure(values.windows(2).all(|w| w[1] >= w[0] - 1e-9), || format!("{l:?} lambda={lambda}: {values:?}"))
        }),
    });
    checks.push(Check {
        name: "transform nonincreasing in lambda",
        outcome: (0..200).try_for_each(|k| {
            let (l, p) = all[k % all.len()];
            let (lo, x) = (lambda_for(&mut rng, l, *p), rng.random_range(-5.0..5.0));
            let hi = lo + rng.random_range(0.0..2.0);
            let (a, b) = (l.lambda_c_transform(*p, lo, x), l.lambda_c_transform(*p, hi, x));
            ensure(b <= a + 1e-9, || format!("{l:?} x={x}: T({lo})={a} < T({hi})={b}"))
        }),
    });
    checks.push(Check {
        name: "transform jointly convex",
        outcome: (0..200).try_for_each(|k| {
            let (l, p) = all[k % all.len()];
            let (l1, l2) = (lambda_for(&mut rng, l, *p), lambda_for(&mut rng, l, *p));
            let (x1, x2) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let mid = l.lambda_c_transform(*p, 0.5 * (l1 + l2), 0.5 * (x1 + x2));
            let avg = 0.5 * (l.lambda_c_transform(*p, l1, x1) + l.lambda_c_transform(*p, l2, x2));
            let slack = if l.has_closed_form(*p) { 1e-9 } else { 1e-5 };
            ensure(mid <= avg + slack * (1.0 + avg.abs()), || format!("{l:?} ({l1},{x1}) ({l2},{x2}): {mid} > {avg}"))
        }),
    });
    checks.push(Check {
        name: "shifted relu lies in the support-search class",
        outcome: (|| {
            let (l, p) = &increasing[1];
            let grid: Vec<f64> = (-10..=10).map(f64::from).collect();
            ensure(check_l_membership(l, *p, 2.0, &grid), || "membership certificate failed".into())
        })(),
    });
    checks.push(Check {
        name: "fenchel-young inequality",
        outcome: (0..300).try_for_each(|k| {
            let phi = match k % 3 {
                0 => Penalization::linear(rng.random_range(0.5..5.0)).expect("valid"),
                1 => Penalization::ball(rng.random_range(0.0..2.0)).expect("valid"),
                _ => Penalization::piecewise_linear(vec![
                    robust_risk::Breakpoint { start: 0.0, slope: 0.5 },
                    robust_risk::Breakpoint { start: 1.0, slope: 2.0 },
                    robust_risk::Breakpoint { start: 3.0, slope: 4.0 },
                ])
                .expect("valid"),
            };
            let (x, lambda) = (rng.random_range(0.0..5.0), rng.random_range(0.0..6.0));
            let (f, c) = (phi.evaluate(x), phi.conjugate(lambda));
            ensure(!f.is_finite() || !c.is_finite() || x * lambda <= f + c + 1e-12, || {
                format!("{phi:?} x={x} lambda={lambda}: {} > {f} + {c}", x * lambda)
            })
        }),
    });
    checks
}

pub fn reductions(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let parametric = [
        PriorDistribution::normal(0.0, 1.0).expect("valid"),
        PriorDistribution::exponential(1.0).expect("valid"),
        PriorDistribution::student_t(5.0, 0.0, 1.0).expect("valid"),
    ];
    let mut checks = Vec::new();
    checks.push(Check {
        name: "robust-VaR==VaR",
        outcome: (0..25).try_for_each(|_| {
            let d = PriorDistribution::Empirical(random_empirical(&mut rng, 100));
            for k in 1..=9 {
                let alpha = k as f64 / 10.0;
                let h = LossSpec::pinball(alpha).expect("valid");
                let q = lib(var(&d, alpha), || "var".into())?;
                for phi in [Penalization::linear(0.95), Penalization::linear(5.0), Penalization::ball(0.5)] {
                    let phi = phi.expect("valid");
                    let iv = lib(robust_generalized_quantile(&d, &h, CostExponent::ONE, &phi), || "quantile".into())?;
                    ensure(iv.contains(q), || format!("alpha={alpha} {phi:?}: {iv:?} misses VaR {q}"))?;
                }
            }
            Ok(())
        }),
    });
    checks.push(Check {
        name: "ball radius 0 gives the expectile",
        outcome: parametric.iter().try_for_each(|d| {
            [0.2, 0.5, 0.8].into_iter().try_for_each(|alpha| {
                let (r, e) = (
                    lib(robust_expectile_ball(d, alpha, 0.0), || "ball".into())?,
                    lib(expectile(d, alpha), || "expectile".into())?,
                );
                ensure((r - e).abs() <= 1e-8, || format!("{d:?} alpha={alpha}: {r} vs {e}"))
            })
        }),
    });
    checks.push(Check {
        name: "large linear slope approaches the expectile",
        outcome: parametric.iter().try_for_each(|d| {
            [0.2, 0.5, 0.8].into_iter().try_for_each(|alpha| {
                let (r, e) = (
                    lib(robust_expectile_linear(d, alpha, 1e6), || "linear".into())?,
                    lib(expectile(d, alpha), || "expectile".into())?,
                );
                ensure((r - e).abs() <= 1e-4, || format!("{d:?} alpha={alpha}: {r} vs {e}"))
            })
        }),
    });
    checks.push(Check {
        name: "alpha 1/2 gives the mean",
        outcome: parametric.iter().try_for_each(|d| {
            [0.6, 2.0, 10.0].into_iter().try_for_each(|delta| {
                let (r, m) = (
                    lib(robust_expectile_linear(d, 0.5, delta), || "linear".into())?,
                    lib(d.mean(), || "mean".into())?,
                );
                ensure((r - m).abs() <= 1e-10, || format!("{d:?} delta={delta}: {r} vs {m}"))
            })
        }),
    });
    checks.push(Check {
        name: "adjusted-level identity",
        outcome: (0..100).try_for_each(|k| {
            let d = if k % 4 == 3 {
                parametric[k % 3].clone()
            } else {
                PriorDistribution::Empirical(random_empirical(&mut rng, 30))
            };
            let alpha: f64 = rng.random_range(0.05..0.95);
            let delta = alpha.max(1.0 - alpha) + rng.random_range(0.01..10.0);
            let level = lib(ExpectileLevel::new(alpha, delta), || "level".into())?;
            let (r, e) = (
                lib(robust_expectile_linear(&d, alpha, delta), || "linear".into())?,
                lib(expectile(&d, level.adjusted_alpha()), || "expectile".into())?,
            );
            ensure((r - e).abs() <= 1e-9, || format!("{d:?} alpha={alpha} delta={delta}: {r} vs {e}"))
        }),
    });
    checks.push(Check {
        name: "mirror identity",
        outcome: (0..100).try_for_each(|_| {
            let d = random_empirical(&mut rng, 30);
            let alpha: f64 = rng.random_range(0.05..0.95);
            let delta = alpha.max(1.0 - alpha) + rng.random_range(0.01..10.0);
            let neg = lib(d.affine(-1.0, 0.0), || "negation".into())?;
            let (a, b) = (
                lib(robust_expectile_linear(&PriorDistribution::Empirical(d.clone()), alpha, delta), || "linear".into())?,
                lib(robust_expectile_linear(&PriorDistribution::Empirical(neg), 1.0 - alpha, delta), || "linear".into())?,
            );
            ensure((a + b).abs() <= 1e-9, || format!("{:?} alpha={alpha} delta={delta}: {a} vs {}", d.values(), -b))
        }),
    });
    checks
}

fn monotone(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] >= w[0] - 1e-10 } else { w[1] <= w[0] + 1e-10 })
}

pub fn trends(_seed: u64) -> Vec<Check> {
    let priors = [
        ("normal(0,1)", PriorDistribution::normal(0.0, 1.0).expect("valid")),
        ("exponential(1)", PriorDistribution::exponential(1.0).expect("valid")),
        ("t(5)", PriorDistribution::student_t(5.0, 0.0, 1.0).expect("valid")),
    ];
    let slopes: Vec<f64> = (0..19).map(|k| 1.0 + 0.5 * k as f64).collect();
    let radii: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    let levels: Vec<f64> = (1..20).map(|k| 0.05 * k as f64).collect();

    let linear_trend = priors.iter().try_for_each(|(name, d)| {
        for alpha in [0.1, 0.3, 0.7, 0.9] {
            let path: Vec<f64> = slopes
                .iter()
                .map(|&delta| lib(robust_expectile_linear(d, alpha, delta), || format!("{name} linear")))
                .collect::<Result<_, _>>()?;
            let e = lib(expectile(d, alpha), || "expectile".into())?;
            let mean = lib(d.mean(), || "mean".into())?;
            let upper = alpha > 0.5;
            let ordered = if upper {
                path.iter().all(|&v| v >= e - 1e-10) && e >= mean - 1e-10
            } else {
                path.iter().all(|&v| v <= e + 1e-10) && e <= mean + 1e-10
            };
            ensure(monotone(&path, !upper) && ordered, || {
                format!("{name} alpha={alpha}: path {path:?}, expectile {e}, mean {mean}")
            })?;
        }
        Ok(())
    });
    let ball_trend = priors.iter().try_for_each(|(name, d)| {
        for alpha in [0.1, 0.3, 0.7, 0.9] {
            let path: Vec<f64> = radii
                .iter()
                .map(|&delta| lib(robust_expectile_ball(d, alpha, delta), || format!("{name} ball")))
                .collect::<Result<_, _>>()?;
            ensure(monotone(&path, alpha > 0.5), || format!("{name} alpha={alpha}: path {path:?}"))?;
        }
        Ok(())
    });
    let level_trend = priors.iter().try_for_each(|(name, d)| {
        let mut series = [Vec::new(), Vec::new(), Vec::new()];
        for &alpha in &levels {
            series[0].push(lib(expectile(d, alpha), || "expectile".into())?);
            series[1].push(lib(robust_expectile_linear(d, alpha, 2.0), || "linear".into())?);
            series[2].push(lib(robust_expectile_ball(d, alpha, 0.5), || "ball".into())?);
        }
        series
            .iter()
            .zip(["expectile", "linear robust", "ball robust"])
            .try_for_each(|(s, label)| ensure(monotone(s, true), || format!("{name} {label}: {s:?}")))
    });
    vec![
        Check {
            name: "linear robust expectile trend in the slope",
            outcome: linear_trend,
        },
        Check {
            name: "ball robust expectile trend in the radius",
            outcome: ball_trend,
        },
        Check {
            name: "measures nondecreasing in the level",
            outcome: level_trend,
        },
    ]
}

pub fn suite(which: Suite, seed: u64) -> Vec<Check> {
    match which {
        Suite::Axioms => axioms(seed),
        Suite::Duality => duality(seed),
        Suite::Transforms => transforms(seed),
        Suite::Reductions => reductions(seed),
        Suite::Trends => trends(seed),
        Suite::All => [axioms, duality, transforms, reductions, trends]
            .iter()
            .flat_map(|s| s(seed))
            .collect(),
    }
}

pub(crate) fn run(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let checks = suite(args.suite, args.seed);
    let failed = checks.iter().filter(|c| c.outcome.is_err()).count();
    let io = |e: std::io::Error| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    };
    for c in &checks {
        match &c.outcome {
            Ok(()) => writeln!(out, "{}: PASS", c.name).map_err(io)?,
            Err(detail) => writeln!(out, "{}: FAIL ({detail})", c.name).map_err(io)?,
        }
    }
    writeln!(out, "{}/{} checks passed", checks.len() - failed, checks.len()).map_err(io)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_USAGE })
}
