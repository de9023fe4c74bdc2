//! Monte-Carlo accuracy studies.
//!
//! A sweep varies one model setting, and for each value simulates many
//! independent rating experiments, estimates `β` from each (closed-form
//! start, then least-squares refinement) and summarizes the absolute errors
//! `|β̂ - β|` by their empirical quantiles.
//!
//! Every replication draws from its own seed, derived from the master seed,
//! the sweep index and the replication index, so results do not depend on
//! how replications are scheduled across threads.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::baselines::coefficients;
use crate::coincidence::empirical_stats;
use crate::error::{Error, Result};
use crate::estimators::{default_eps, estimate};
use crate::model::{check_simplex, sample_ratings, AprioriDist, CategorySet, CoderModel, TrueLabeling};
use crate::refine::{refine, RefineOptions};

/// Quantile levels highlighted in the accuracy plots.
pub const DEFAULT_LEVELS: [f64; 6] = [0.5, 0.8, 0.9, 0.95, 0.98, 1.0];

/// Share of failed replications above which a sweep point is flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.01;

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at sweep position `index`:
/// `splitmix64(splitmix64(splitmix64(master) ^ index) ^ rep)`.
pub fn replication_seed(master: u64, index: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ index) ^ rep)
}

/// Model parameters shared by all points of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseModel {
    pub categories: CategorySet,
    pub beta: f64,
    pub tau: Vec<f64>,
    pub p: Vec<f64>,
    pub n_items: usize,
}

impl BaseModel {
    pub fn with_numbered_categories(beta: f64, tau: &[f64], p: &[f64], n_items: usize) -> Result<Self> {
        Ok(Self {
            categories: CategorySet::numbered(tau.len())?,
            beta,
            tau: tau.to_vec(),
            p: p.to_vec(),
            n_items,
        })
    }

    /// Builds the model, apportioning items to categories by largest
    /// remainder when `N·τ` is not integral.
    pub fn build(&self) -> Result<CoderModel> {
        CoderModel::new(
            self.beta,
            TrueLabeling::from_tau_rounded(self.n_items, &self.tau)?,
            AprioriDist::new(self.p.clone())?,
            self.categories.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    /// The largest true-category frequency.
    Tau,
    P,
    Raters,
    Items,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Tau => "tau",
            SweepAxis::P => "p",
            SweepAxis::Raters => "R",
            SweepAxis::Items => "N",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Scalar(x) => write!(f, "{x}"),
            SweepValue::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(";"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: BaseModel,
    pub raters: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
    pub quantile_levels: Vec<f64>,
    /// Append mean S, κ and π columns.
    pub baselines: bool,
    pub refine: RefineOptions,
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(base: BaseModel, raters: usize, axis: SweepAxis, values: Vec<SweepValue>) -> Self {
        Self {
            base,
            raters,
            replications: 1000,
            master_seed: 0,
            axis,
            values,
            quantile_levels: DEFAULT_LEVELS.to_vec(),
            baselines: false,
            refine: RefineOptions::default(),
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidParameter("replications must be >= 1".into()));
        }
        if self.quantile_levels.is_empty()
            || self.quantile_levels.iter().any(|q| !(*q > 0.0 && *q <= 1.0))
        {
            return Err(Error::InvalidParameter("quantile levels must lie in (0,1]".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one value".into()));
        }
        self.refine.validate()?;
        for i in 0..self.values.len() {
            self.point(i)?;
        }
        Ok(())
    }

    /// Resolves sweep position `index` into a concrete model and rater count.
    pub fn point(&self, index: usize) -> Result<ConfigPoint> {
        let mut base = self.base.clone();
        let mut raters = self.raters;
        match (self.axis, &self.values[index]) {
            (SweepAxis::Beta, SweepValue::Scalar(b)) => base.beta = *b,
            (SweepAxis::Tau, SweepValue::Scalar(t)) => base.tau = tau_with_max(&self.base.tau, *t)?,
            (SweepAxis::P, SweepValue::Vector(p)) => base.p = p.clone(),
            (SweepAxis::Raters, SweepValue::Scalar(r)) => raters = whole(*r, "R")?,
            (SweepAxis::Items, SweepValue::Scalar(n)) => base.n_items = whole(*n, "N")?,
            (axis, v) => {
                return Err(Error::InvalidParameter(format!(
                    "sweep value {v} does not fit axis {}",
                    axis.as_str()
                )))
            }
        }
        if raters < 2 {
            return Err(Error::InvalidParameter("need at least two raters".into()));
        }
        Ok(ConfigPoint {
            model: base.build()?,
            raters,
            replications: self.replications,
            master_seed: self.master_seed,
            sweep_index: index as u64,
            refine: self.refine,
            baselines: self.baselines,
            parallel: self.parallel,
        })
    }
}

fn whole(x: f64, name: &str) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} is not a positive integer")))
    }
}

/// True-category frequencies with largest entry `t`, placed where the base
/// vector has its maximum. With three categories the remaining mass goes
/// 2/3 and 1/3 to the others in base order of size, unless that would make
/// one of them exceed `t`, in which case it is split evenly. With other
/// category counts the remaining mass is shared in proportion to the base
/// vector.
pub fn tau_with_max(base: &[f64], t: f64) -> Result<Vec<f64>> {
    let m = base.len();
    if !(t >= 1.0 / m as f64 - 1e-12 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("max(tau) = {t} outside [1/m, 1)")));
    }
    let top = (0..m)
        .max_by(|&a, &b| base[a].total_cmp(&base[b]).then(b.cmp(&a)))
        .expect("non-empty");
    let mut others: Vec<usize> = (0..m).filter(|&c| c != top).collect();
    others.sort_by(|&a, &b| base[b].total_cmp(&base[a]).then(a.cmp(&b)));
    let rest = 1.0 - t;
    let mut tau = vec![0.0; m];
    tau[top] = t;
    if m == 3 {
        let (big, small) = if 2.0 * rest / 3.0 <= t {
            (2.0 * rest / 3.0, rest / 3.0)
        } else {
            (rest / 2.0, rest / 2.0)
        };
        tau[others[0]] = big;
        tau[others[1]] = small;
    } else {
        let base_rest: f64 = others.iter().map(|&c| base[c]).sum();
        for &c in &others {
            tau[c] = if base_rest > 0.0 {
                rest * base[c] / base_rest
            } else {
                rest / (m - 1) as f64
            };
        }
    }
    check_simplex("tau", &tau, 1e-9)?;
    Ok(tau)
}

/// A fully resolved sweep position.
#[derive(Debug, Clone)]
pub struct ConfigPoint {
    pub model: CoderModel,
    pub raters: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub sweep_index: u64,
    pub refine: RefineOptions,
    pub baselines: bool,
    pub parallel: bool,
}

impl ConfigPoint {
    pub fn new(model: CoderModel, raters: usize, replications: usize, master_seed: u64) -> Self {
        Self {
            model,
            raters,
            replications,
            master_seed,
            sweep_index: 0,
            refine: RefineOptions::default(),
            baselines: false,
            parallel: true,
        }
    }
}

/// Mean baseline coefficients over a point's replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineMeans {
    pub s_value: f64,
    pub kappa: f64,
    pub pi: f64,
}

/// Raw outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Replications {
    /// Absolute errors of successful replications, in replication order.
    pub errors: Vec<f64>,
    /// Estimates of successful replications, in replication order.
    pub estimates: Vec<f64>,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub baselines: Option<BaselineMeans>,
}

struct Outcome {
    estimate: Result<f64>,
    baseline: Option<[f64; 3]>,
}

fn replicate(point: &ConfigPoint, rep: usize) -> Outcome {
    let seed = replication_seed(point.master_seed, point.sweep_index, rep as u64);
    let ratings = sample_ratings(&point.model, point.raters, seed);
    let estimate = empirical_stats(&ratings).and_then(|stats| {
        let start = estimate(&stats, default_eps(&stats))?;
        Ok(refine(&stats, &start, &point.refine)?.beta_hat)
    });
    let baseline = point.baselines.then(|| {
        coefficients(&ratings)
            .map(|c| [c.s_value, c.cohen_kappa_mean, c.fleiss_pi])
            .unwrap_or([f64::NAN; 3])
    });
    Outcome { estimate, baseline }
}

/// Simulates and estimates `point.replications` independent experiments.
/// Failed estimations are counted, not dropped silently.
pub fn run_replications(point: &ConfigPoint) -> Replications {
    let outcomes: Vec<Outcome> = if point.parallel {
        (0..point.replications)
            .into_par_iter()
            .map(|rep| replicate(point, rep))
            .collect()
    } else {
        (0..point.replications).map(|rep| replicate(point, rep)).collect()
    };

    let truth = point.model.beta();
    let mut out = Replications {
        errors: Vec::with_capacity(outcomes.len()),
        estimates: Vec::with_capacity(outcomes.len()),
        failures: 0,
        first_failure: None,
        baselines: None,
    };
    let mut sums = [0.0; 3];
    for o in &outcomes {
        match &o.estimate {
            Ok(b) => {
                out.estimates.push(*b);
                out.errors.push((b - truth).abs());
            }
            Err(e) => {
                out.failures += 1;
                out.first_failure.get_or_insert_with(|| e.to_string());
            }
        }
        if let Some(b) = o.baseline {
            sums.iter_mut().zip(b).for_each(|(s, x)| *s += x);
        }
    }
    if point.baselines {
        let n = outcomes.len() as f64;
        out.baselines = Some(BaselineMeans {
            s_value: sums[0] / n,
            kappa: sums[1] / n,
            pi: sums[2] / n,
        });
    }
    out
}

/// Inverse empirical CDF: level `q` maps to the `⌈q·n⌉`-th smallest value
/// (`q = 1` is the maximum).
pub fn quantiles(errors: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::NoSuccessfulReplications);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    levels
        .iter()
        .map(|&q| {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::InvalidParameter(format!("quantile level {q} outside (0,1]")));
            }
            // Guard against q·n landing just above an integer through rounding.
            let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
            Ok(sorted[rank.min(n) - 1])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRow {
    pub sweep_value: SweepValue,
    pub quantiles: Vec<f64>,
    pub n_success: usize,
    pub n_fail: usize,
    /// More than 1% of the replications failed.
    pub flagged: bool,
    pub baselines: Option<BaselineMeans>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileReport {
    pub axis: SweepAxis,
    pub levels: Vec<f64>,
    pub rows: Vec<QuantileRow>,
}

impl QuantileReport {
    /// Quantile at `level` for row `row`, if that level was computed.
    pub fn quantile(&self, row: usize, level: f64) -> Option<f64> {
        let i = self.levels.iter().position(|&l| (l - level).abs() < 1e-12)?;
        Some(self.rows[row].quantiles[i])
    }

    /// `sweep_value,n_success,n_fail,q50,…,q100[,s_value,kappa,pi]`, floats at
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["sweep_value".to_string(), "n_success".into(), "n_fail".into()];
        header.extend(self.levels.iter().map(|&l| level_column(l)));
        let with_baselines = self.rows.iter().any(|r| r.baselines.is_some());
        if with_baselines {
            header.extend(["s_value".into(), "kappa".into(), "pi".into()]);
        }
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let mut cols = vec![
                row.sweep_value.to_string(),
                row.n_success.to_string(),
                row.n_fail.to_string(),
            ];
            cols.extend(row.quantiles.iter().map(|q| format!("{q:.16e}")));
            if with_baselines {
                match row.baselines {
                    Some(b) => cols.extend([b.s_value, b.kappa, b.pi].iter().map(|x| format!("{x:.16e}"))),
                    None => cols.extend([String::new(), String::new(), String::new()]),
                }
            }
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

fn level_column(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("q{}", pct.round() as i64)
    } else {
        format!("q{}", (pct * 1e6).round() / 1e6)
    }
}

/// Runs every point of the sweep in order.
pub fn sweep(config: &SweepConfig) -> Result<QuantileReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.values.len());
    for (i, value) in config.values.iter().enumerate() {
        let point = config.point(i)?;
        let reps = run_replications(&point);
        let quantiles = quantiles(&reps.errors, &config.quantile_levels).map_err(|e| match e {
            Error::NoSuccessfulReplications => match &reps.first_failure {
                Some(why) => Error::Parse(format!(
                    "no successful replications at {}={value}: {why}",
                    config.axis.as_str()
                )),
                None => e,
            },
            other => other,
        })?;
        rows.push(QuantileRow {
            sweep_value: value.clone(),
            quantiles,
            n_success: reps.errors.len(),
            n_fail: reps.failures,
            flagged: reps.failures as f64 > FAILURE_FLAG_RATE * config.replications as f64,
            baselines: reps.baselines,
        });
    }
    Ok(QuantileReport {
        axis: config.axis,
        levels: config.quantile_levels.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_errors() {
        let q = quantiles(&[0.1; 17], &DEFAULT_LEVELS).unwrap();
        assert!(q.iter().all(|&x| x == 0.1));
    }

    #[test]
    fn evenly_spaced_errors() {
        let errors: Vec<f64> = (1..=100).rev().map(|i| i as f64 / 100.0).collect();
        let q = quantiles(&errors, &[0.5, 0.98, 1.0]).unwrap();
        assert_eq!(q, vec![0.50, 0.98, 1.00]);
    }

    #[test]
    fn empty_errors_rejected() {
        let err = quantiles(&[], &DEFAULT_LEVELS).unwrap_err();
        assert!(err.to_string().contains("no successful replications"));
    }

    #[test]
    fn seeds_are_distinct_across_indices() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10 {
            for r in 0..100 {
                assert!(seen.insert(replication_seed(7, i, r)));
            }
        }
    }

    #[test]
    fn tau_axis_split_rule() {
        let base = [0.3, 0.6, 0.1];
        let t = tau_with_max(&base, 0.9).unwrap();
        assert!((t[1] - 0.9).abs() < 1e-15);
        assert!((t[0] - 0.2 / 3.0).abs() < 1e-15 && (t[2] - 0.1 / 3.0).abs() < 1e-15);
        let u = tau_with_max(&base, 1.0 / 3.0).unwrap();
        assert!(u.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!(tau_with_max(&base, 1.0).is_err());
        assert!(tau_with_max(&base, 0.2).is_err());
    }

    #[test]
    fn unanimous_data_gives_zero_error() {
        let model = CoderModel::from_params(1.0, &[0.3, 0.6, 0.1], &[0.33, 0.33, 0.34], 100).unwrap();
        let reps = run_replications(&ConfigPoint::new(model, 5, 1, 3));
        assert_eq!(reps.failures, 0);
        assert_eq!(reps.errors.len(), 1);
        assert!(reps.errors[0] < 1e-12, "{:?}", reps.errors);
    }

    #[test]
    fn mismatched_axis_value_rejected() {
        let base = BaseModel::with_numbered_categories(0.85, &[0.3, 0.6, 0.1], &[0.33, 0.33, 0.34], 100).unwrap();
        let cfg = SweepConfig::new(base, 5, SweepAxis::P, vec![SweepValue::Scalar(0.5)]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let base = BaseModel::with_numbered_categories(0.85, &[0.3, 0.6, 0.1], &[0.33, 0.33, 0.34], 100).unwrap();
        let mut cfg = SweepConfig::new(
            base,
            5,
            SweepAxis::Beta,
            vec![SweepValue::Scalar(0.6), SweepValue::Scalar(0.9)],
        );
        cfg.replications = 40;
        cfg.baselines = true;
        let parallel = sweep(&cfg).unwrap();
        cfg.parallel = false;
        let serial = sweep(&cfg).unwrap();
        assert_eq!(parallel, serial);
        for row in &serial.rows {
            assert!(row.quantiles.windows(2).all(|w| w[0] <= w[1]));
            assert!(row.quantiles.iter().all(|q| (0.0..=1.0).contains(q)));
        }
        let mut csv = Vec::new();
        serial.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("sweep_value,n_success,n_fail,q50,q80,q90,q95,q98,q100,s_value,kappa,pi\n0.6,40,0,"));
    }
}
