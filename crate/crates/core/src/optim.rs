//! One-dimensional search primitives shared by the solvers.
//!
//! Objectives are extended-real valued: `f64::INFINITY` is a legal value and
//! compares above every finite number. All minimizers here assume convexity.

use crate::error::{Result, RiskError};

/// `(sqrt(5) - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximum number of bracket doublings before giving up.
pub const MAX_DOUBLINGS: usize = 60;

/// Closed interval `[lo, hi]`; endpoints may be infinite when the flat
/// region of a minimized objective is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search for a convex `f` on `[lo, hi]`.
///
/// Only interior points are probed; callers that care about the endpoints
/// evaluate them separately.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let mut iter = 0;
    while b - a > tol && iter < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        iter += 1;
        // Probes collapsed onto each other in floating point.
        if c >= d {
            break;
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum {
        x,
        value,
        evaluations,
        converged: b - a <= tol || c >= d,
    }
}

/// Root of a nondecreasing `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`,
/// refined until the bracket cannot shrink further in floating point.
/// Returns the root and the number of evaluations.
pub fn bisect_increasing<G>(mut g: G, mut lo: f64, mut hi: f64, max_iter: usize) -> (f64, usize)
where
    G: FnMut(f64) -> f64,
{
    let mut evaluations = 0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        evaluations += 1;
        if v == 0.0 {
            return (mid, evaluations);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), evaluations)
}

/// Widens `[lo, hi]` by doubling until `g(lo) <= 0 <= g(hi)` for a
/// nondecreasing `g`.
pub fn expand_root_bracket<G>(mut g: G, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> f64,
{
    let mut width = (hi - lo).max(1.0);
    let mut doublings = 0;
    while g(lo) > 0.0 {
        hi = lo;
        lo -= width;
        width *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(RiskError::NoConvergence {
                stage: "root bracket expansion (lower)",
            });
        }
    }
    let mut width = (hi - lo).max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi += width;
        width *= 2.0;
        doublings += 1;
        if doublings > 2 * MAX_DOUBLINGS {
            return Err(RiskError::NoConvergence {
                stage: "root bracket expansion (upper)",
            });
        }
    }
    Ok((lo, hi))
}

/// Tuning for [`minimize_convex`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexSearch {
    /// Absolute tolerance on the argument.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative objective slack `flat_tol * (1 + |f|)` defining the flat
    /// argmin region.
    pub flat_tol: f64,
    /// Resolution of the argmin-interval boundary scan.
    pub resolution: f64,
    /// Decrease below `plateau_tol * (1 + |f|)` during bracket expansion is
    /// treated as no decrease.
    pub plateau_tol: f64,
}

impl Default for ConvexSearch {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            flat_tol: 1e-13,
            resolution: 1e-6,
            plateau_tol: 1e-12,
        }
    }
}

/// Result of a convex minimization over the line or a closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexMinimum {
    pub x: f64,
    pub value: f64,
    pub argmin: Interval,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(f64) -> f64> Counted<F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }
}

/// Minimizes a convex extended-real `f` over the real line.
///
/// The search starts from `[a, b]` and doubles outward on each side until
/// the objective stops decreasing. `kinks` lists points where `f` may fail
/// to be differentiable (atoms of an empirical law); minimizer and interval
/// endpoints snap onto them when they are at least as good.
pub fn minimize_convex<F>(
    f: F,
    a: f64,
    b: f64,
    kinks: &[f64],
    opts: &ConvexSearch,
) -> Result<ConvexMinimum>
where
    F: FnMut(f64) -> f64,
{
    let mut obj = Counted { f, evaluations: 0 };
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    if b - a < opts.tol {
        let w = 0.5 * (1.0 + a.abs().max(b.abs()));
        a -= w;
        b += w;
    }
    let mut fa = obj.eval(a);
    let mut fb = obj.eval(b);
    if !fa.is_finite() && !fb.is_finite() {
        // Look for any finite point before expanding.
        let probe = (1..16)
            .map(|k| a + (b - a) * k as f64 / 16.0)
            .find(|&x| obj.eval(x).is_finite());
        match probe {
            Some(x) => {
                let w = b - a;
                a = x - w;
                b = x + w;
                fa = obj.eval(a);
                fb = obj.eval(b);
            }
            None => return Err(RiskError::Infeasible),
        }
    }
    let decreased = |from: f64, to: f64, tol: f64| to < from - tol * (1.0 + from.abs().min(1e300));

    // Expand left while the objective keeps decreasing.
    let mut width = b - a;
    for doubling in 0..=MAX_DOUBLINGS {
        let a2 = a - width;
        let f2 = obj.eval(a2);
        if decreased(fa, f2, opts.plateau_tol) {
            b = a;
            fb = fa;
            a = a2;
            fa = f2;
            width *= 2.0;
            if doubling == MAX_DOUBLINGS {
                return Err(RiskError::NoConvergence {
                    stage: "argument bracket expansion (lower)",
                });
            }
        } else {
            a = a2;
            fa = f2;
            break;
        }
    }
    let mut width = b - a;
    for doubling in 0..=MAX_DOUBLINGS {
        let b2 = b + width;
        let f2 = obj.eval(b2);
        if decreased(fb, f2, opts.plateau_tol) {
            a = b;
            fa = fb;
            b = b2;
            fb = f2;
            width *= 2.0;
            if doubling == MAX_DOUBLINGS {
                return Err(RiskError::NoConvergence {
                    stage: "argument bracket expansion (upper)",
                });
            }
        } else {
            b = b2;
            fb = f2;
            break;
        }
    }
    finish_on_bracket(&mut obj, a, b, fa, fb, kinks, opts, None)
}

/// Minimizes a convex extended-real `f` over the closed interval `[lo, hi]`.
pub fn minimize_convex_on<F>(
    f: F,
    lo: f64,
    hi: f64,
    kinks: &[f64],
    opts: &ConvexSearch,
) -> Result<ConvexMinimum>
where
    F: FnMut(f64) -> f64,
{
    let mut obj = Counted { f, evaluations: 0 };
    let flo = obj.eval(lo);
    let fhi = obj.eval(hi);
    finish_on_bracket(&mut obj, lo, hi, flo, fhi, kinks, opts, Some(Interval { lo, hi }))
}

#[allow(clippy::too_many_arguments)]
fn finish_on_bracket<F: FnMut(f64) -> f64>(
    obj: &mut Counted<F>,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    kinks: &[f64],
    opts: &ConvexSearch,
    domain: Option<Interval>,
) -> Result<ConvexMinimum> {
    let mut best = if b > a {
        golden_section(|x| obj.eval(x), a, b, opts.tol, opts.max_iter)
    } else {
        Minimum {
            x: a,
            value: fa,
            evaluations: 0,
            converged: true,
        }
    };
    for (x, v) in [(a, fa), (b, fb)] {
        if v < best.value {
            best.x = x;
            best.value = v;
        }
    }
    // Kinks near the golden-section answer are the exact minimizers of
    // piecewise-linear objectives.
    let window = (b - a).abs().min(4.0 * opts.tol.max(opts.resolution));
    for &k in kinks {
        if (k - best.x).abs() <= window && k >= a && k <= b {
            let v = obj.eval(k);
            if v <= best.value {
                best.x = k;
                best.value = v;
            }
        }
    }
    if !best.value.is_finite() {
        return Err(RiskError::Infeasible);
    }
    let level = best.value + opts.flat_tol * (1.0 + best.value.abs());
    let lo = scan_flat_edge(obj, best.x, -1.0, level, kinks, opts, domain.map(|d| d.lo));
    let hi = scan_flat_edge(obj, best.x, 1.0, level, kinks, opts, domain.map(|d| d.hi));
    Ok(ConvexMinimum {
        x: best.x,
        value: best.value,
        argmin: Interval { lo, hi },
        evaluations: obj.evaluations,
        converged: best.converged,
    })
}

/// Walks from `x0` in `direction` to the edge of `{f <= level}`, returning the
/// outermost point known to be inside (snapped to kinks when they qualify).
fn scan_flat_edge<F: FnMut(f64) -> f64>(
    obj: &mut Counted<F>,
    x0: f64,
    direction: f64,
    level: f64,
    kinks: &[f64],
    opts: &ConvexSearch,
    limit: Option<f64>,
) -> f64 {
    let clamp = |x: f64| match limit {
        Some(l) if direction < 0.0 => x.max(l),
        Some(l) => x.min(l),
        None => x,
    };
    let mut inside = x0;
    let mut step = opts.resolution;
    let outside = loop {
        let probe = clamp(x0 + direction * step);
        if probe == inside {
            return inside;
        }
        if obj.eval(probe) > level {
            break probe;
        }
        inside = probe;
        if step > 2f64.powi(MAX_DOUBLINGS as i32) {
            return direction * f64::INFINITY;
        }
        step *= 2.0;
    };
    let mut out = outside;
    while (out - inside).abs() > opts.resolution {
        let mid = 0.5 * (inside + out);
        if obj.eval(mid) <= level {
            inside = mid;
        } else {
            out = mid;
        }
    }
    let (seg_lo, seg_hi) = if inside < out { (inside, out) } else { (out, inside) };
    for &k in kinks {
        if k > seg_lo && k < seg_hi && (k - x0) * direction > (inside - x0) * direction && obj.eval(k) <= level {
            inside = k;
        }
    }
    inside
}
