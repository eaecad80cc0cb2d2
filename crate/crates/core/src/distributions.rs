//! Prior laws of the loss position and their partial moments.
//!
//! Every risk functional in this crate depends on the loss position only
//! through its law, so [`PriorDistribution`] is the sole representation of a
//! loss `X`.

use std::f64::consts::PI;
use std::io::Read;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution as _;
use serde::Deserialize;
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal, StudentsT as StatrsStudentsT};

use crate::error::{invalid, Result, RiskError};

/// Allowed deviation of empirical weights from a unit total before
/// construction fails.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Discrete law with finitely many atoms, sorted ascending with ties merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    values: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Empirical {
    /// Builds a law from `(value, weight)` atoms. Weights must be positive and
    /// sum to one within [`WEIGHT_SUM_TOL`]; they are renormalized exactly.
    pub fn new<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let atoms: Vec<(f64, f64)> = points.into_iter().collect();
        if atoms.is_empty() {
            return Err(invalid("points", "empirical law needs at least one atom"));
        }
        for &(v, w) in &atoms {
            if !v.is_finite() {
                return Err(invalid("value", format!("atom value {v} is not finite")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("weight", format!("weight {w} is not strictly positive")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid("weight", format!("weights sum to {total}, expected 1")));
        }
        Ok(Self::normalized(atoms))
    }

    fn normalized(mut atoms: Vec<(f64, f64)>) -> Self {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, w) in atoms {
            match values.last() {
                Some(&last) if last == v => *weights.last_mut().unwrap() += w,
                _ => {
                    values.push(v);
                    weights.push(w);
                }
            }
        }
        for w in &mut weights {
            *w /= total;
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Self {
            values,
            weights,
            cumulative,
        }
    }

    /// Equally weighted atoms.
    pub fn uniform(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(invalid("points", "empirical law needs at least one atom"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("value", format!("atom value {v} is not finite")));
        }
        Ok(Self::normalized(values.iter().map(|&v| (v, 1.0)).collect()))
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `P(X <= x)`
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `P(X < x)`
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Law of `a X + b`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(self.atoms().map(|(v, w)| (scale * v + shift, w)))
    }

    fn quantile(&self, alpha: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < alpha);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `sum w ((x - m)^+)^p` and `sum w ((m - x)^+)^p` for real `p >= 1`.
    pub fn partial_moments(&self, m: f64, p: f64) -> (f64, f64) {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (v, w) in self.atoms() {
            let d = v - m;
            if d > 0.0 {
                plus += w * pow(d, p);
            } else if d < 0.0 {
                minus += w * pow(-d, p);
            }
        }
        (plus, minus)
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// Prior law `mu_X` of a loss position.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorDistribution {
    Empirical(Empirical),
    Normal { mean: f64, stddev: f64 },
    Exponential { rate: f64 },
    StudentT { dof: f64, location: f64, scale: f64 },
}

fn positive(field: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} must be a positive finite number")))
    }
}

fn finite(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("{v} is not finite")))
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(invalid("alpha", format!("{alpha} is not in (0, 1)")))
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn std_normal() -> StatrsNormal {
    StatrsNormal::new(0.0, 1.0).expect("standard normal")
}

/// Density of the standard Student-t law with `dof` degrees of freedom.
fn std_t_pdf(dof: f64, t: f64) -> f64 {
    let ln_norm = statrs::function::gamma::ln_gamma(0.5 * (dof + 1.0))
        - statrs::function::gamma::ln_gamma(0.5 * dof)
        - 0.5 * (dof * PI).ln();
    (ln_norm - 0.5 * (dof + 1.0) * (1.0 + t * t / dof).ln()).exp()
}

fn std_t(dof: f64) -> StatrsStudentsT {
    StatrsStudentsT::new(0.0, 1.0, dof).expect("validated Student-t")
}

impl PriorDistribution {
    pub fn empirical<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Result<Self> {
        Empirical::new(points).map(Self::Empirical)
    }

    pub fn uniform(values: &[f64]) -> Result<Self> {
        Empirical::uniform(values).map(Self::Empirical)
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Empirical::point_mass(value).map(Self::Empirical)
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self> {
        Ok(Self::Normal {
            mean: finite("mean", mean)?,
            stddev: positive("stddev", stddev)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential {
            rate: positive("rate", rate)?,
        })
    }

    pub fn student_t(dof: f64, location: f64, scale: f64) -> Result<Self> {
        Ok(Self::StudentT {
            dof: positive("dof", dof)?,
            location: finite("location", location)?,
            scale: positive("scale", scale)?,
        })
    }

    /// Re-checks the invariants of a value built directly from the enum.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Empirical(_) => Ok(()),
            Self::Normal { mean, stddev } => Self::normal(mean, stddev).map(drop),
            Self::Exponential { rate } => Self::exponential(rate).map(drop),
            Self::StudentT { dof, location, scale } => Self::student_t(dof, location, scale).map(drop),
        }
    }

    pub fn as_empirical(&self) -> Option<&Empirical> {
        match self {
            Self::Empirical(e) => Some(e),
            _ => None,
        }
    }

    /// `[min, max]` of the support when it is compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.as_empirical().map(|e| (e.min(), e.max()))
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Empirical(_) => "empirical",
            Self::Normal { .. } => "normal",
            Self::Exponential { .. } => "exponential",
            Self::StudentT { .. } => "student-t",
        }
    }

    fn check_moment(&self, power: u32) -> Result<()> {
        if power == 0 {
            return Err(invalid("power", "partial moments are of order >= 1"));
        }
        match *self {
            Self::StudentT { dof, .. } if dof <= power as f64 => Err(RiskError::MomentUndefined {
                family: format!("student-t(dof = {dof})"),
                power,
            }),
            Self::Normal { .. } | Self::Exponential { .. } | Self::StudentT { .. } if power > 2 => {
                Err(RiskError::Unsupported(format!(
                    "partial moments of order {power} for the {} family",
                    self.family()
                )))
            }
            _ => Ok(()),
        }
    }

    /// `E[((X - m)^+)^power]`.
    pub fn partial_moment_plus(&self, m: f64, power: u32) -> Result<f64> {
        Ok(self.partial_moments(m, power)?.0)
    }

    /// `E[((m - X)^+)^power]`.
    pub fn partial_moment_minus(&self, m: f64, power: u32) -> Result<f64> {
        Ok(self.partial_moments(m, power)?.1)
    }

    /// Upper and lower partial moments of order `power` about `m`.
    pub fn partial_moments(&self, m: f64, power: u32) -> Result<(f64, f64)> {
        self.check_moment(power)?;
        Ok(match *self {
            Self::Empirical(ref e) => e.partial_moments(m, power as f64),
            Self::Normal { mean, stddev } => {
                let z = (m - mean) / stddev;
                let (p, q) = std_normal_partials(z, power);
                let s = if power == 1 { stddev } else { stddev * stddev };
                (s * p, s * q)
            }
            Self::Exponential { rate } => exponential_partials(rate, m, power),
            Self::StudentT { dof, location, scale } => {
                let k = (m - location) / scale;
                let plus = std_t_upper_partial(dof, k, power);
                let minus = std_t_upper_partial(dof, -k, power);
                let s = if power == 1 { scale } else { scale * scale };
                (s * plus, s * minus)
            }
        })
    }

    /// Partial moments for a real order `p`; parametric families support
    /// `p` in {1, 2} only.
    pub fn partial_moments_real(&self, m: f64, p: f64) -> Result<(f64, f64)> {
        match self {
            Self::Empirical(e) => Ok(e.partial_moments(m, p)),
            _ if p == 1.0 => self.partial_moments(m, 1),
            _ if p == 2.0 => self.partial_moments(m, 2),
            _ => Err(RiskError::Unsupported(format!(
                "partial moments of order {p} for the {} family",
                self.family()
            ))),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        match *self {
            Self::Empirical(ref e) => Ok(e.atoms().map(|(v, w)| v * w).sum()),
            Self::Normal { mean, .. } => Ok(mean),
            Self::Exponential { rate } => Ok(1.0 / rate),
            Self::StudentT { location, .. } => {
                self.check_moment(1)?;
                Ok(location)
            }
        }
    }

    /// Lower `alpha`-quantile: the smallest `m` with `P(X <= m) >= alpha`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        let alpha = check_alpha(alpha)?;
        Ok(match *self {
            Self::Empirical(ref e) => e.quantile(alpha),
            Self::Normal { mean, stddev } => mean + stddev * std_normal().inverse_cdf(alpha),
            Self::Exponential { rate } => -(-alpha).ln_1p() / rate,
            Self::StudentT { dof, location, scale } => location + scale * std_t(dof).inverse_cdf(alpha),
        })
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Empirical(ref e) => e.cdf(x),
            Self::Normal { mean, stddev } => std_normal().cdf((x - mean) / stddev),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::StudentT { dof, location, scale } => std_t(dof).cdf((x - location) / scale),
        }
    }

    /// A scale proxy used to seed bracket searches: the standard deviation
    /// when it exists, otherwise the family's scale parameter.
    pub fn spread(&self) -> f64 {
        match *self {
            Self::Empirical(ref e) => (e.max() - e.min()).max(f64::EPSILON),
            Self::Normal { stddev, .. } => stddev,
            Self::Exponential { rate } => 1.0 / rate,
            Self::StudentT { dof, scale, .. } if dof > 2.0 => scale * (dof / (dof - 2.0)).sqrt(),
            Self::StudentT { scale, .. } => scale,
        }
    }

    /// Initial bracket for searches over location-like arguments.
    pub fn initial_bracket(&self) -> (f64, f64) {
        match *self {
            Self::Empirical(ref e) => (e.min(), e.max()),
            Self::Normal { mean, stddev } => (mean - stddev, mean + stddev),
            Self::Exponential { rate } => (0.0, 2.0 / rate),
            Self::StudentT { location, .. } => (location - self.spread(), location + self.spread()),
        }
    }

    /// Law of `scale * X + shift` for `scale > 0` (any sign for empirical laws).
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        match *self {
            Self::Empirical(ref e) => e.affine(scale, shift).map(Self::Empirical),
            _ if scale <= 0.0 => Err(RiskError::Unsupported(format!(
                "non-positive scaling of the {} family",
                self.family()
            ))),
            Self::Normal { mean, stddev } => Self::normal(scale * mean + shift, scale * stddev),
            Self::StudentT { dof, location, scale: s } => Self::student_t(dof, scale * location + shift, scale * s),
            Self::Exponential { rate } if shift == 0.0 => Self::exponential(rate / scale),
            Self::Exponential { .. } => Err(RiskError::Unsupported("shifted exponential law".into())),
        }
    }

    /// `n` deterministic draws for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(invalid("n", "sample size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = match *self {
            Self::Empirical(ref e) => {
                let index = WeightedIndex::new(e.weights()).map_err(|err| invalid("weight", err.to_string()))?;
                (0..n).map(|_| e.values()[index.sample(&mut rng)]).collect()
            }
            Self::Normal { mean, stddev } => {
                let d = rand_distr::Normal::new(mean, stddev).map_err(|err| invalid("stddev", err.to_string()))?;
                d.sample_iter(&mut rng).take(n).collect()
            }
            Self::Exponential { rate } => {
                let d = rand_distr::Exp::new(rate).map_err(|err| invalid("rate", err.to_string()))?;
                d.sample_iter(&mut rng).take(n).collect()
            }
            Self::StudentT { dof, location, scale } => {
                let d = rand_distr::StudentT::new(dof).map_err(|err| invalid("dof", err.to_string()))?;
                d.sample_iter(&mut rng).take(n).map(|t| location + scale * t).collect()
            }
        };
        Ok(draws)
    }

    /// Reads an empirical law from CSV rows `value[,weight]`. A non-numeric
    /// first row is treated as a header; a missing weight column means
    /// uniform weights.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| RiskError::Parse(e.to_string()))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let value = record.get(0).unwrap_or("");
            let parsed = value.parse::<f64>();
            if line == 0 && parsed.is_err() {
                continue;
            }
            let value = parsed.map_err(|_| RiskError::Parse(format!("row {}: bad value `{value}`", line + 1)))?;
            let weight = match record.get(1) {
                Some(w) if !w.is_empty() => Some(
                    w.parse::<f64>()
                        .map_err(|_| RiskError::Parse(format!("row {}: bad weight `{w}`", line + 1)))?,
                ),
                _ => None,
            };
            rows.push((value, weight));
        }
        if rows.is_empty() {
            return Err(RiskError::Parse("no atoms in CSV input".into()));
        }
        let weighted = rows.iter().filter(|r| r.1.is_some()).count();
        if weighted == 0 {
            let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
            Self::uniform(&values)
        } else if weighted == rows.len() {
            Self::empirical(rows.into_iter().map(|(v, w)| (v, w.unwrap())))
        } else {
            Err(RiskError::Parse("weight column present on some rows only".into()))
        }
    }

    /// Parses `{"family": "...", parameters...}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PriorJson = serde_json::from_str(text).map_err(|e| RiskError::Parse(e.to_string()))?;
        spec.build()
    }
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum PriorJson {
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one", alias = "sd")]
        stddev: f64,
    },
    Exponential {
        #[serde(default = "one")]
        rate: f64,
    },
    #[serde(alias = "t", alias = "student_t")]
    StudentT {
        dof: f64,
        #[serde(default)]
        location: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Empirical {
        #[serde(default)]
        values: Option<Vec<f64>>,
        #[serde(default)]
        points: Option<Vec<(f64, f64)>>,
    },
}

fn one() -> f64 {
    1.0
}

impl PriorJson {
    fn build(self) -> Result<PriorDistribution> {
        match self {
            Self::Normal { mean, stddev } => PriorDistribution::normal(mean, stddev),
            Self::Exponential { rate } => PriorDistribution::exponential(rate),
            Self::StudentT { dof, location, scale } => PriorDistribution::student_t(dof, location, scale),
            Self::Empirical { values, points } => match (values, points) {
                (Some(v), None) => PriorDistribution::uniform(&v),
                (None, Some(p)) => PriorDistribution::empirical(p),
                _ => Err(RiskError::Parse(
                    "empirical prior needs exactly one of `values` or `points`".into(),
                )),
            },
        }
    }
}

/// Command-line mini-grammar `family:param1,param2,...`:
/// `normal:mean,sd`, `exponential:rate`, `student-t:dof[,location,scale]`,
/// `empirical:v1,v2,...` (uniform weights).
impl FromStr for PriorDistribution {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if params.trim().is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| RiskError::Parse(format!("prior parameter `{p}` is not a number")))
                })
                .collect::<Result<_>>()?
        };
        let arity = |lo: usize, hi: usize| {
            if nums.len() < lo || nums.len() > hi {
                Err(RiskError::Parse(format!(
                    "prior `{family}` takes {lo}..={hi} parameters, got {}",
                    nums.len()
                )))
            } else {
                Ok(())
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => {
                arity(2, 2)?;
                Self::normal(nums[0], nums[1])
            }
            "exponential" | "exp" => {
                arity(1, 1)?;
                Self::exponential(nums[0])
            }
            "student-t" | "student_t" | "t" => {
                arity(1, 3)?;
                let location = nums.get(1).copied().unwrap_or(0.0);
                let scale = nums.get(2).copied().unwrap_or(1.0);
                Self::student_t(nums[0], location, scale)
            }
            "empirical" | "uniform" => {
                arity(1, usize::MAX)?;
                Self::uniform(&nums)
            }
            other => Err(RiskError::Parse(format!("unknown prior family `{other}`"))),
        }
    }
}

/// Upper/lower partial moments of the standard normal law about `z`.
fn std_normal_partials(z: f64, power: u32) -> (f64, f64) {
    let n = std_normal();
    let pdf = std_normal_pdf(z);
    let sf = n.sf(z);
    let cdf = n.cdf(z);
    match power {
        1 => ((pdf - z * sf).max(0.0), (pdf + z * cdf).max(0.0)),
        _ => (
            ((1.0 + z * z) * sf - z * pdf).max(0.0),
            ((1.0 + z * z) * cdf + z * pdf).max(0.0),
        ),
    }
}

fn exponential_partials(rate: f64, m: f64, power: u32) -> (f64, f64) {
    let u = rate * m;
    match power {
        1 => {
            if m >= 0.0 {
                ((-u).exp() / rate, (u + (-u).exp_m1()) / rate)
            } else {
                (1.0 / rate - m, 0.0)
            }
        }
        _ => {
            let r2 = rate * rate;
            if m >= 0.0 {
                (2.0 * (-u).exp() / r2, (u * u - 2.0 * u - 2.0 * (-u).exp_m1()).max(0.0) / r2)
            } else {
                ((2.0 - 2.0 * u + u * u) / r2, 0.0)
            }
        }
    }
}

/// `E[((T - k)^+)^power]` for a standard Student-t `T`.
///
/// Uses `d/dt[(dof + t^2) f(t)] = -(dof - 1) t f(t)` and
/// `d/dt[t (dof + t^2) f(t)] = dof f(t) - (dof - 2) t^2 f(t)`.
fn std_t_upper_partial(dof: f64, k: f64, power: u32) -> f64 {
    let f = std_t_pdf(dof, k);
    let sf = std_t(dof).sf(k);
    let first = (dof + k * k) * f / (dof - 1.0);
    match power {
        1 => (first - k * sf).max(0.0),
        _ => {
            let second = (dof * sf + k * (dof + k * k) * f) / (dof - 2.0);
            (second - 2.0 * k * first + k * k * sf).max(0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Adaptive Simpson quadrature, independent of the closed forms.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 30)
    }

    fn two_point() -> PriorDistribution {
        PriorDistribution::empirical([(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn empirical_partial_moment_examples() {
        let d = two_point();
        assert_eq!(d.partial_moment_plus(0.0, 1).unwrap(), 0.5);
        assert_eq!(d.partial_moment_minus(1.0, 1).unwrap(), 0.5);
    }

    #[test]
    fn normal_partial_moment_examples() {
        let d = PriorDistribution::normal(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.partial_moment_plus(0.0, 1).unwrap(), 0.398_942_280_4, epsilon = 1e-10);
        assert_abs_diff_eq!(d.partial_moment_plus(0.0, 1).unwrap(), 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.partial_moment_minus(0.0, 2).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn exponential_partial_moment_examples() {
        let d = PriorDistribution::exponential(1.0).unwrap();
        assert_abs_diff_eq!(d.partial_moment_plus(1.0, 2).unwrap(), 2.0 * (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.partial_moment_plus(1.0, 2).unwrap(), 0.735_758_882_3, epsilon = 1e-10);
        assert_eq!(d.partial_moment_minus(0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn student_t_moment_domain() {
        let t1 = PriorDistribution::student_t(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(t1.partial_moment_plus(0.0, 1), Err(RiskError::MomentUndefined { .. })));
        let t2 = PriorDistribution::student_t(2.0, 0.0, 1.0).unwrap();
        assert!(t2.partial_moment_plus(0.0, 1).is_ok());
        assert!(matches!(t2.partial_moment_plus(0.0, 2), Err(RiskError::MomentUndefined { .. })));
    }

    #[test]
    fn student_t_closed_forms_match_quadrature() {
        for &(dof, loc, scale) in &[(5.0, 0.0, 1.0), (3.0, 1.5, 2.0), (2.5, -1.0, 0.5), (30.0, 0.0, 1.0)] {
            let d = PriorDistribution::student_t(dof, loc, scale).unwrap();
            let pdf = |x: f64| std_t_pdf(dof, (x - loc) / scale) / scale;
            for &m in &[-3.0, -0.7, 0.0, 0.4, 2.2, 6.0] {
                // Substitute x = m + s / (1 - s) to map the half-line onto [0, 1).
                for power in [1u32, 2] {
                    let plus = simpson(
                        &|s: f64| {
                            if s >= 1.0 {
                                return 0.0;
                            }
                            let u = s / (1.0 - s);
                            u.powi(power as i32) * pdf(m + u) / ((1.0 - s) * (1.0 - s))
                        },
                        0.0,
                        1.0,
                        1e-13,
                    );
                    let minus = simpson(
                        &|s: f64| {
                            if s >= 1.0 {
                                return 0.0;
                            }
                            let u = s / (1.0 - s);
                            u.powi(power as i32) * pdf(m - u) / ((1.0 - s) * (1.0 - s))
                        },
                        0.0,
                        1.0,
                        1e-13,
                    );
                    let (p, q) = d.partial_moments(m, power).unwrap();
                    // The substituted integrand is stiff near s = 1 when the
                    // second moment barely exists.
                    let tol = if dof < 3.0 && power == 2 { 1e-4 } else { 1e-8 };
                    assert_abs_diff_eq!(p, plus, epsilon = tol);
                    assert_abs_diff_eq!(q, minus, epsilon = tol);
                }
            }
        }
    }

    #[test]
    fn quantile_examples() {
        let d = PriorDistribution::uniform(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        let e = d.as_empirical().unwrap();
        assert!(e.cdf_left(2.0) <= 0.5 && 0.5 <= e.cdf(2.0));
        assert_abs_diff_eq!(PriorDistribution::normal(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.0, epsilon = 1e-15);
        let x = PriorDistribution::exponential(2.0).unwrap();
        assert_abs_diff_eq!(x.quantile(1.0 - (-2f64).exp()).unwrap(), 1.0, epsilon = 1e-12);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn construction_merges_ties_and_sorts() {
        let e = Empirical::new([(3.0, 0.25), (1.0, 0.25), (3.0, 0.5)]).unwrap();
        assert_eq!(e.values(), &[1.0, 3.0]);
        assert_eq!(e.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn construction_rejects_bad_weights() {
        assert!(Empirical::new([(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(Empirical::new([(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(Empirical::new([(0.0, 1.5), (1.0, -0.5)]).is_err());
        assert!(Empirical::new(Vec::<(f64, f64)>::new()).is_err());
        // Within tolerance: renormalized silently.
        let e = Empirical::new([(0.0, 0.5 + 4e-13), (1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(e.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sampling_examples() {
        let d = PriorDistribution::point_mass(7.0).unwrap();
        assert_eq!(d.sample(3, 99).unwrap(), vec![7.0; 3]);
        let n = PriorDistribution::normal(0.0, 1.0).unwrap();
        let xs = n.sample(1_000_000, 42).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.005);
        assert_eq!(n.sample(50, 7).unwrap(), n.sample(50, 7).unwrap());
        assert!(n.sample(0, 7).is_err());
    }

    #[test]
    fn csv_loading() {
        let d = PriorDistribution::from_csv("value,weight\n1,0.25\n2,0.75\n".as_bytes()).unwrap();
        assert_eq!(d.as_empirical().unwrap().weights(), &[0.25, 0.75]);
        let u = PriorDistribution::from_csv("1\n2\n3\n".as_bytes()).unwrap();
        assert_eq!(u.as_empirical().unwrap().len(), 3);
        assert!(PriorDistribution::from_csv("1,0.5\n2\n".as_bytes()).is_err());
        assert!(PriorDistribution::from_csv("1\nabc\n".as_bytes()).is_err());
    }

    #[test]
    fn json_and_grammar_parsing() {
        let n = PriorDistribution::from_json(r#"{"family":"normal","mean":1,"stddev":2}"#).unwrap();
        assert_eq!(n, PriorDistribution::normal(1.0, 2.0).unwrap());
        let t = PriorDistribution::from_json(r#"{"family":"student-t","dof":5}"#).unwrap();
        assert_eq!(t, PriorDistribution::student_t(5.0, 0.0, 1.0).unwrap());
        let e = PriorDistribution::from_json(r#"{"family":"empirical","points":[[0,0.5],[1,0.5]]}"#).unwrap();
        assert_eq!(e, two_point());
        assert!(PriorDistribution::from_json(r#"{"family":"normal","stddev":-1}"#).is_err());
        assert_eq!("normal:0,1".parse::<PriorDistribution>().unwrap(), PriorDistribution::normal(0.0, 1.0).unwrap());
        assert_eq!("exponential:2".parse::<PriorDistribution>().unwrap(), PriorDistribution::exponential(2.0).unwrap());
        assert_eq!("t:5".parse::<PriorDistribution>().unwrap(), PriorDistribution::student_t(5.0, 0.0, 1.0).unwrap());
        assert!("normal:0".parse::<PriorDistribution>().is_err());
        assert!("cauchy:0,1".parse::<PriorDistribution>().is_err());
    }
}
