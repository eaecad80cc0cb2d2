//! Oracles written independently of the library's solvers.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct sorted atoms with normalized weights.
pub fn random_atoms(rng: &mut ChaCha8Rng, max_atoms: usize) -> Vec<(f64, f64)> {
    let n = rng.random_range(1..=max_atoms);
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(n);
    while atoms.len() < n {
        let v = (rng.random_range(-5.0..5.0) * 1e3_f64).round() / 1e3;
        if atoms.iter().all(|a| a.0 != v) {
            atoms.push((v, rng.random_range(0.1..1.0)));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    atoms.iter_mut().for_each(|a| a.1 /= total);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

/// Smallest atom whose cumulative weight reaches `alpha`.
pub fn quantile(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let mut cum = 0.0;
    for &(x, w) in atoms {
        cum += w;
        if cum >= alpha {
            return x;
        }
    }
    atoms.last().unwrap().0
}

/// Exact expectile of a discrete law: the first-order condition
/// `alpha E(X-m)^+ = (1-alpha) E(m-X)^+` is linear in `m` between atoms.
pub fn expectile(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let foc = |m: f64| {
        atoms
            .iter()
            .map(|&(x, w)| if x > m { alpha * w * (x - m) } else { -(1.0 - alpha) * w * (m - x) })
            .sum::<f64>()
    };
    if atoms.len() == 1 {
        return atoms[0].0;
    }
    for seg in atoms.windows(2) {
        let (lo, hi) = (seg[0].0, seg[1].0);
        let (flo, fhi) = (foc(lo), foc(hi));
        if flo >= 0.0 && fhi <= 0.0 {
            if flo == fhi {
                return lo;
            }
            // Linear on [lo, hi].
            return lo + (hi - lo) * flo / (flo - fhi);
        }
    }
    panic!("no sign change")
}

/// `A / (A + B)` computed from the raw coefficients.
pub fn adjusted_level(alpha: f64, delta: f64) -> f64 {
    let a = alpha * delta / (delta - alpha);
    let b = (1.0 - alpha) * delta / (delta - (1.0 - alpha));
    a / (a + b)
}

pub fn mean(atoms: &[(f64, f64)]) -> f64 {
    atoms.iter().map(|(x, w)| x * w).sum()
}

/// `sup_y l(y) - lambda |x - y|^p` by a dense grid on `[x - r, x + r]`
/// followed by ternary refinement around the best cell.
pub fn numeric_sup(l: &dyn Fn(f64) -> f64, p: f64, lambda: f64, x: f64, r: f64, step: f64) -> f64 {
    let obj = |y: f64| l(y) - lambda * (x - y).abs().powf(p);
    let n = (r / step).ceil() as i64;
    let (mut best_y, mut best) = (x, obj(x));
    for k in -n..=n {
        let y = x + k as f64 * step;
        let v = obj(y);
        if v > best {
            best = v;
            best_y = y;
        }
    }
    let (mut a, mut b) = (best_y - step, best_y + step);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if obj(m1) < obj(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    best.max(obj(0.5 * (a + b)))
}
