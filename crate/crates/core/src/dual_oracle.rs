//! Independent checks: the density-band dual of the linearly penalized
//! robust expectile, and exact one-dimensional transport costs.

use crate::distributions::Empirical;
use crate::error::Result;
use crate::losses::CostExponent;
use crate::risk_measures::ExpectileLevel;

/// Bounds on a scaled density `t dQ/dP`. Only the ratio of the bounds
/// matters once the free scale `t` is eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBand {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Max,
    Min,
}

impl DensityBand {
    /// Band of the linear penalization with slope `delta` at level `alpha`.
    pub fn for_linear(alpha: f64, delta: f64) -> Result<Self> {
        let level = ExpectileLevel::new(alpha, delta)?;
        let (a, b) = level.coefficients();
        Ok(Self {
            lower: 2.0 * b,
            upper: 2.0 * a,
        })
    }

    /// Largest admissible ratio between two density values (at least 1).
    pub fn ratio(&self) -> f64 {
        let r = self.upper / self.lower;
        r.max(1.0 / r)
    }

    /// Direction in which the dual optimization matches the robust
    /// expectile at `alpha`.
    pub fn direction(alpha: f64) -> Direction {
        if alpha >= 0.5 {
            Direction::Max
        } else {
            Direction::Min
        }
    }
}

/// Optimizes `E_Q[X]` over laws `Q << P` whose density ratios stay within
/// the band ratio. The optimum puts density `ratio * c` on the atoms past a
/// threshold and `c` on the rest, so scanning the `n + 1` thresholds is
/// exact. Atoms of an [`Empirical`] are distinct, so no tie handling is
/// needed.
pub fn dual_expectile_max(d: &Empirical, band: DensityBand, direction: Direction) -> f64 {
    let rho = band.ratio();
    let sign = match direction {
        Direction::Max => 1.0,
        Direction::Min => -1.0,
    };
    let n = d.len();
    let mut atoms: Vec<(f64, f64)> = d.atoms().map(|(x, w)| (sign * x, w)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Suffix sums of mass and first moment.
    let mut tail_mass = vec![0.0; n + 1];
    let mut tail_moment = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail_mass[i] = tail_mass[i + 1] + atoms[i].1;
        tail_moment[i] = tail_moment[i + 1] + atoms[i].0 * atoms[i].1;
    }
    let (total_mass, total_moment) = (tail_mass[0], tail_moment[0]);
    let best = (0..=n)
        .map(|k| {
            let head_mass = total_mass - tail_mass[k];
            let head_moment = total_moment - tail_moment[k];
            (head_moment + rho * tail_moment[k]) / (head_mass + rho * tail_mass[k])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    sign * best
}

/// `inf_pi int |x - y|^p d pi` over couplings of `a` and `b`, computed with
/// the monotone (quantile) coupling.
pub fn wasserstein_1d(a: &Empirical, b: &Empirical, p: CostExponent) -> f64 {
    let (xa, wa) = (a.values(), a.weights());
    let (xb, wb) = (b.values(), b.weights());
    let (mut i, mut j) = (0, 0);
    let (mut left_a, mut left_b) = (wa[0], wb[0]);
    let mut total = 0.0;
    loop {
        let mass = left_a.min(left_b);
        total += mass * p.cost(xa[i], xb[j]);
        left_a -= mass;
        left_b -= mass;
        let a_done = left_a <= 0.0 || (i + 1 < xa.len() && left_a < 1e-15);
        let b_done = left_b <= 0.0 || (j + 1 < xb.len() && left_b < 1e-15);
        if a_done {
            i += 1;
        }
        if b_done {
            j += 1;
        }
        if i >= xa.len() || j >= xb.len() {
            break;
        }
        if a_done {
            left_a = wa[i];
        }
        if b_done {
            left_b = wb[j];
        }
    }
    total
}
