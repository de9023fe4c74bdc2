//! Closed-form recovery of the reliability parameter `β` from coincidence
//! statistics.
//!
//! Every estimator here rests on two identities that hold for the exact
//! expectations of a coder model:
//!
//! * the excess `e2[c][c] - e1[c]² = β² τ_c (1 - τ_c)`, and
//! * the triple ratio `(e3[c] - e1[c]³) / (e2[c][c] - e1[c]²) = β(1 + τ_c) + 3(1 - β) p_c`.
//!
//! Which of them can be solved for `β` depends on what is known about `τ`
//! and `p` and on how many categories carry a positive excess (the set C*).
//! On empirical statistics the same formulas act as method-of-moments
//! estimators; values pushed outside their domain by sampling noise are
//! clamped and reported in the diagnostics.

use std::fmt;

use crate::coincidence::{CoincidenceStats, StatsSource};
use crate::error::{Error, Result};
use crate::model::{AprioriDist, CategorySet, CoderModel, TrueLabeling};

/// Excess threshold used for exact (theoretical) statistics, where a zero
/// excess only shows up as rounding noise.
pub const THEORETICAL_EPS: f64 = 1e-12;

/// Which route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    TauKnown,
    PKnown,
    TauEqP,
    TwoStar,
    Triple,
    Pairwise,
    Refined,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TauKnown => "tau_known",
            Method::PKnown => "p_known",
            Method::TauEqP => "tau_eq_p",
            Method::TwoStar => "two_star",
            Method::Triple => "triple",
            Method::Pairwise => "pairwise",
            Method::Refined => "refined",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An estimate of `β`, with whatever else the route could recover.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub beta_hat: f64,
    pub tau_hat: Option<Vec<f64>>,
    pub p_hat: Option<Vec<f64>>,
    /// Category indices with positive excess, as used by the route.
    pub cstar: Vec<usize>,
    pub categories: CategorySet,
    pub method: Method,
    pub diagnostics: Vec<String>,
}

impl EstimateResult {
    fn new(stats: &CoincidenceStats, beta_hat: f64, method: Method) -> Self {
        Self {
            beta_hat,
            tau_hat: None,
            p_hat: None,
            cstar: Vec::new(),
            categories: stats.categories.clone(),
            method,
            diagnostics: Vec::new(),
        }
    }

    pub fn cstar_labels(&self) -> Vec<&str> {
        self.cstar.iter().map(|&c| self.categories.label(c)).collect()
    }

    /// Flat `key=value` record, one key per line.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("beta_hat={:.16e}\n", self.beta_hat));
        out.push_str(&format!("method={}\n", self.method));
        out.push_str(&format!("cstar={}\n", self.cstar_labels().join(";")));
        for (name, values) in [("tau_hat", &self.tau_hat), ("p_hat", &self.p_hat)] {
            if let Some(v) = values {
                for (label, x) in self.categories.labels().iter().zip(v) {
                    out.push_str(&format!("{name}_{label}={x:.16e}\n"));
                }
            }
        }
        out.push_str(&format!("diagnostics={}\n", self.diagnostics.join(" | ")));
        out
    }

    /// Header matching [`csv_row`](Self::csv_row).
    pub fn csv_header(categories: &CategorySet) -> String {
        let mut cols = vec!["beta_hat".to_string(), "method".into(), "cstar".into()];
        for prefix in ["tau_hat", "p_hat"] {
            cols.extend(categories.labels().iter().map(|l| format!("{prefix}_{l}")));
        }
        cols.push("diagnostics".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            format!("{:.16e}", self.beta_hat),
            self.method.to_string(),
            format!("\"{}\"", self.cstar_labels().join(";")),
        ];
        for values in [&self.tau_hat, &self.p_hat] {
            let m = self.categories.len();
            match values {
                Some(v) => cols.extend(v.iter().map(|x| format!("{x:.16e}"))),
                None => cols.extend(std::iter::repeat_n(String::new(), m)),
            }
        }
        cols.push(format!("\"{}\"", self.diagnostics.join(" | ").replace('"', "'")));
        cols.join(",")
    }
}

/// Closed interval of admissible `β` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl BetaInterval {
    pub fn contains(&self, other: &BetaInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Clamps `value` into `[0, 1]`, noting any clamping in `diagnostics`.
fn clamp_unit(value: f64, what: &str, diagnostics: &mut Vec<String>) -> f64 {
    if value.is_nan() {
        diagnostics.push(format!("{what} undefined, set to 0"));
        0.0
    } else if value < 0.0 {
        diagnostics.push(format!("{what} = {value:.6} clamped to 0"));
        0.0
    } else if value > 1.0 {
        diagnostics.push(format!("{what} = {value:.6} clamped to 1"));
        1.0
    } else {
        value
    }
}

/// `√x` with negative arguments mapped to 0 (and noted).
fn root_or_zero(x: f64, what: &str, diagnostics: &mut Vec<String>) -> f64 {
    if x < 0.0 {
        diagnostics.push(format!("negative radicand {x:.3e} in {what}, using 0"));
        0.0
    } else {
        x.sqrt()
    }
}

/// Clips negatives to zero and rescales to sum 1.
fn renormalize(v: &mut [f64]) {
    for x in v.iter_mut() {
        if !x.is_finite() || *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

fn mean_and_spread(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, hi - lo)
}

/// `p̂_c = (e1_c - β̂ τ̂_c) / (1 - β̂)`, clipped onto the simplex. `None` when
/// `β̂ = 1` leaves `p` unidentified.
fn p_from_e1(stats: &CoincidenceStats, beta: f64, tau: &[f64]) -> Option<Vec<f64>> {
    if beta >= 1.0 - 1e-12 {
        return None;
    }
    let mut p: Vec<f64> = stats
        .e1
        .iter()
        .zip(tau)
        .map(|(e, t)| (e - beta * t) / (1.0 - beta))
        .collect();
    renormalize(&mut p);
    Some(p)
}

/// Default C* threshold: `2/√(N·R·(R-1))` for empirical statistics, a
/// rounding-level constant for exact ones.
pub fn default_eps(stats: &CoincidenceStats) -> f64 {
    match stats.source {
        StatsSource::Theoretical => THEORETICAL_EPS,
        StatsSource::Empirical { n_items, n_raters } => {
            let r = n_raters as f64;
            2.0 / (n_items as f64 * r * (r - 1.0)).sqrt()
        }
    }
}

/// Categories whose excess `e2[c][c] - e1[c]²` exceeds `eps`.
pub fn detect_cstar(stats: &CoincidenceStats, eps: f64) -> Vec<usize> {
    (0..stats.m()).filter(|&c| stats.excess(c) > eps).collect()
}

/// `β` when the true category frequencies `τ` are known.
pub fn beta_tau_known(stats: &CoincidenceStats, tau: &[f64]) -> Result<EstimateResult> {
    check_len(stats, tau, "tau")?;
    if let Some(c) = tau.iter().position(|&t| t >= 1.0) {
        return Err(Error::DegenerateTrueDistribution(
            stats.categories.label(c).to_string(),
        ));
    }
    let mut res = EstimateResult::new(stats, 0.0, Method::TauKnown);
    res.tau_hat = Some(tau.to_vec());
    let interior: Vec<usize> = (0..stats.m()).filter(|&c| tau[c] > 0.0).collect();
    let qualifying: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&c| stats.excess(c) > 0.0)
        .collect();
    res.cstar = qualifying.clone();
    if qualifying.is_empty() {
        res.diagnostics.push("no excess: beta = 0".into());
        res.p_hat = Some(stats.e1.clone());
        return Ok(res);
    }
    let per_category: Vec<f64> = qualifying
        .iter()
        .map(|&c| (stats.excess(c) / (tau[c] * (1.0 - tau[c]))).sqrt())
        .collect();
    let (mean, spread) = mean_and_spread(&per_category);
    if qualifying.len() > 1 {
        res.diagnostics
            .push(format!("averaged over {} categories, spread {spread:.3e}", qualifying.len()));
    }
    res.beta_hat = clamp_unit(mean, "beta", &mut res.diagnostics);
    res.p_hat = p_from_e1(stats, res.beta_hat, tau);
    Ok(res)
}

/// Bounds on `β` from bounds `π₀ ≤ p_c ≤ π₁` on the a-priori distribution.
/// With `π₀ = π₁ = 1/m` both ends coincide with the S coefficient's `√S`.
pub fn beta_bounds(stats: &CoincidenceStats, pi0: f64, pi1: f64) -> Result<BetaInterval> {
    if pi1 >= 1.0 {
        return Err(Error::UpperBoundTooLarge);
    }
    if !(0.0..=pi1).contains(&pi0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= pi0 <= pi1, got pi0 = {pi0}, pi1 = {pi1}"
        )));
    }
    let e2 = stats.self_agreement();
    let lo = ((e2 - pi1).max(0.0) / (1.0 - pi1)).sqrt().clamp(0.0, 1.0);
    let hi = ((e2 - pi0).max(0.0) / (1.0 - pi0)).sqrt().clamp(0.0, 1.0);
    Ok(BetaInterval { lo, hi: hi.max(lo) })
}

/// `β` when the a-priori distribution `p` is known.
pub fn beta_p_known(stats: &CoincidenceStats, p: &[f64]) -> Result<EstimateResult> {
    check_len(stats, p, "p")?;
    AprioriDist::new(p.to_vec())?;
    let mut res = EstimateResult::new(stats, 0.0, Method::PKnown);
    res.p_hat = Some(p.to_vec());
    let mut per_category = Vec::new();
    for c in (0..stats.m()).filter(|&c| p[c] > 0.0) {
        let (e1, e2) = (stats.e1[c], stats.e2[c][c]);
        let pc = p[c];
        let b = if pc >= 1.0 {
            if e1 >= 1.0 {
                0.0
            } else {
                (1.0 - 2.0 * e1 + e2) / (1.0 - e1)
            }
        } else {
            // Larger root of p(1-p)y² + L·y + (e1 - e2) = 0 with y = β - 1,
            // written in the cancellation-free form y = -2(e1-e2)/(L + √disc).
            let lin = pc * (1.0 - e1) + e1 * (1.0 - pc);
            let disc = lin * lin - 4.0 * pc * (1.0 - pc) * (e1 - e2);
            let root = root_or_zero(disc, "p-known discriminant", &mut res.diagnostics);
            if lin + root > 0.0 {
                1.0 - 2.0 * (e1 - e2) / (lin + root)
            } else {
                1.0
            }
        };
        per_category.push(b);
    }
    let (mean, spread) = mean_and_spread(&per_category);
    if per_category.len() > 1 {
        res.diagnostics
            .push(format!("averaged over {} categories, spread {spread:.3e}", per_category.len()));
    }
    res.beta_hat = clamp_unit(mean, "beta", &mut res.diagnostics);
    Ok(res)
}

/// `β` for a category whose a-priori probability equals its true frequency.
pub fn beta_tau_eq_p(stats: &CoincidenceStats, c: usize) -> Result<EstimateResult> {
    let e1 = stats.e1[c];
    if e1 <= 0.0 || e1 >= 1.0 {
        return Err(Error::BaseRateDegenerate(
            stats.categories.label(c).to_string(),
            e1,
        ));
    }
    let mut res = EstimateResult::new(stats, 0.0, Method::TauEqP);
    let radicand = stats.excess(c) / (e1 * (1.0 - e1));
    let b = root_or_zero(radicand, "tau=p formula", &mut res.diagnostics);
    res.beta_hat = clamp_unit(b, "beta", &mut res.diagnostics);
    res.cstar = vec![c];
    Ok(res)
}

/// `(e3 - e1³)/(e2 - e1²)` for category `c`.
fn triple_ratio(stats: &CoincidenceStats, e3: &[f64], c: usize) -> f64 {
    let e1 = stats.e1[c];
    (e3[c] - e1 * e1 * e1) / stats.excess(c)
}

/// `τ̂_c = ½(1 - b_c/β̂)` with `b_c = ratio_c - 3 e1_c`, zero outside C*,
/// clipped onto the simplex.
fn tau_from_triples(stats: &CoincidenceStats, e3: &[f64], cstar: &[usize], beta: f64) -> Vec<f64> {
    let mut tau = vec![0.0; stats.m()];
    if beta <= 0.0 {
        return stats.e1.clone();
    }
    for &c in cstar {
        let b = triple_ratio(stats, e3, c) - 3.0 * stats.e1[c];
        tau[c] = (0.5 * (1.0 - b / beta)).clamp(0.0, 1.0);
    }
    renormalize(&mut tau);
    tau
}

/// `β = √(4a + b²)` for exactly two categories with positive excess.
/// `pair[0]` is the category the coefficients `a`, `b` are computed from.
pub fn beta_two_star(stats: &CoincidenceStats, pair: [usize; 2]) -> Result<EstimateResult> {
    let e3 = stats.e3.as_ref().ok_or(Error::NeedTripleCoincidences)?;
    let c = pair[0];
    let mut res = EstimateResult::new(stats, 0.0, Method::TwoStar);
    res.cstar = pair.to_vec();
    res.cstar.sort_unstable();
    let a = stats.excess(c);
    if a <= 0.0 {
        res.diagnostics.push("no excess: beta = 0".into());
        return Ok(res);
    }
    let e1 = stats.e1[c];
    let b = (e3[c] - e1 * e1 * e1) / a - 3.0 * e1;
    let radicand = 4.0 * a + b * b;
    if radicand <= 0.0 {
        res.diagnostics.push("4a + b^2 <= 0: beta = 0".into());
        return Ok(res);
    }
    let beta = clamp_unit(radicand.sqrt(), "beta", &mut res.diagnostics);
    res.beta_hat = beta;
    let mut tau = vec![0.0; stats.m()];
    tau[c] = (0.5 * (1.0 - b / beta)).clamp(0.0, 1.0);
    tau[pair[1]] = 1.0 - tau[c];
    res.p_hat = p_from_e1(stats, beta, &tau);
    res.tau_hat = Some(tau);
    Ok(res)
}

/// `β` from triple coincidences when C* has at least three categories.
pub fn beta_triple(stats: &CoincidenceStats, cstar: &[usize]) -> Result<EstimateResult> {
    let e3 = stats.e3.as_ref().ok_or(Error::NeedTripleCoincidences)?;
    let m_star = cstar.len();
    if m_star < 3 {
        return Err(Error::UseTwoStarPath(m_star));
    }
    if let Some(&c) = cstar.iter().find(|&&c| stats.excess(c) <= 0.0) {
        return Err(Error::NotInCstar(stats.categories.label(c).to_string()));
    }
    let ratio_sum: f64 = cstar.iter().map(|&c| triple_ratio(stats, e3, c)).sum();
    let outside_sum: f64 = (0..stats.m())
        .filter(|c| !cstar.contains(c))
        .map(|c| stats.e1[c])
        .sum();
    let raw = (ratio_sum + 3.0 * outside_sum - 3.0) / (m_star as f64 - 2.0);
    let mut res = EstimateResult::new(stats, 0.0, Method::Triple);
    res.cstar = cstar.to_vec();
    res.beta_hat = clamp_unit(raw, "beta", &mut res.diagnostics);
    let tau = tau_from_triples(stats, e3, cstar, res.beta_hat);
    res.p_hat = p_from_e1(stats, res.beta_hat, &tau);
    res.tau_hat = Some(tau);
    Ok(res)
}

/// `β` from pairwise coincidences alone (C* of size three or more).
///
/// Solves `λ_i ρ_{i,j} = λ_k ρ_{k,j}`, `Σ λ = m* - 1` by forward
/// substitution along the first two columns of `ρ`; `τ̂ = 1 - λ`.
/// Numerically fragile on sampled data, so the dispatcher only uses it as a
/// cross-check when triples are available.
pub fn beta_pairwise(stats: &CoincidenceStats, cstar: &[usize]) -> Result<EstimateResult> {
    let m_star = cstar.len();
    if m_star < 3 {
        return Err(Error::UseTwoStarPath(m_star));
    }
    if let Some(&c) = cstar.iter().find(|&&c| stats.excess(c) <= 0.0) {
        return Err(Error::NotInCstar(stats.categories.label(c).to_string()));
    }
    let rho = pairwise_rho(stats, cstar);

    // Unnormalized: λ_1 = 1, λ_i from column 0 for i >= 2, λ_0 from column 1.
    let mut lambda = vec![0.0; m_star];
    lambda[1] = 1.0;
    for i in 2..m_star {
        lambda[i] = lambda[1] * rho[1][0] / rho[i][0];
    }
    lambda[0] = lambda[2] * rho[2][1] / rho[0][1];
    let scale = (m_star as f64 - 1.0) / lambda.iter().sum::<f64>();
    lambda.iter_mut().for_each(|l| *l *= scale);

    let mut res = EstimateResult::new(stats, 0.0, Method::Pairwise);
    res.cstar = cstar.to_vec();

    // Residual of the full condition set, relative to the largest term.
    let mut worst: f64 = 0.0;
    for j in 0..m_star {
        for i in (0..m_star).filter(|&i| i != j) {
            for k in (0..m_star).filter(|&k| k != j && k != i) {
                let (l, r) = (lambda[i] * rho[i][j], lambda[k] * rho[k][j]);
                worst = worst.max((l - r).abs() / l.abs().max(r.abs()).max(f64::MIN_POSITIVE));
            }
        }
    }
    if worst > 1e-6 {
        res.diagnostics
            .push(format!("ill-conditioned pairwise system: relative residual {worst:.3e}"));
    }

    let denom = 1.0 - lambda.iter().map(|l| (1.0 - l) * (1.0 - l)).sum::<f64>();
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::InconsistentPairwise);
    }
    let total_excess: f64 = (0..stats.m()).map(|c| stats.excess(c)).sum();
    let b = root_or_zero(total_excess / denom, "pairwise formula", &mut res.diagnostics);
    res.beta_hat = clamp_unit(b, "beta", &mut res.diagnostics);
    let mut tau = vec![0.0; stats.m()];
    for (slot, &c) in cstar.iter().enumerate() {
        tau[c] = 1.0 - lambda[slot];
    }
    renormalize(&mut tau);
    res.p_hat = p_from_e1(stats, res.beta_hat, &tau);
    res.tau_hat = Some(tau);
    Ok(res)
}

/// `ρ_{i,j} = (e2[c_i][c_j] - e1[c_i] e1[c_j]) / (e2[c_i][c_i] - e1[c_i]²)`
/// over the categories of `cstar`.
pub fn pairwise_rho(stats: &CoincidenceStats, cstar: &[usize]) -> Vec<Vec<f64>> {
    cstar
        .iter()
        .map(|&ci| {
            let denom = stats.excess(ci);
            cstar
                .iter()
                .map(|&cj| (stats.e2[ci][cj] - stats.e1[ci] * stats.e1[cj]) / denom)
                .collect()
        })
        .collect()
}

/// General-case dispatch when neither `τ` nor `p` is known.
///
/// Empty C* means `β = 0`. A singleton C* (impossible for exact statistics)
/// is padded with the category of next-largest excess. Two categories use
/// [`beta_two_star`]; three or more use [`beta_triple`], with
/// [`beta_pairwise`] recorded as a cross-check. Without triple statistics
/// only the pairwise route is available, and only for `m* ≥ 3`.
pub fn estimate(stats: &CoincidenceStats, eps: f64) -> Result<EstimateResult> {
    let mut cstar = detect_cstar(stats, eps);
    let mut notes = Vec::new();
    if cstar.is_empty() {
        let mut res = EstimateResult::new(stats, 0.0, Method::Triple);
        res.diagnostics.push("no excess".into());
        res.tau_hat = Some(stats.e1.clone());
        res.p_hat = Some(stats.e1.clone());
        return Ok(res);
    }
    if cstar.len() == 1 {
        notes.push("noise-dominated C*".to_string());
        let next = (0..stats.m())
            .filter(|c| !cstar.contains(c))
            .max_by(|&a, &b| stats.excess(a).total_cmp(&stats.excess(b)).then(b.cmp(&a)))
            .expect("at least two categories");
        if stats.excess(next) <= 0.0 {
            let mut res = EstimateResult::new(stats, 0.0, Method::Triple);
            notes.push("no second category with positive excess".into());
            res.diagnostics = notes;
            res.cstar = cstar;
            res.tau_hat = Some(stats.e1.clone());
            res.p_hat = Some(stats.e1.clone());
            return Ok(res);
        }
        cstar.push(next);
        cstar.sort_unstable();
    }

    let mut res = match (cstar.len(), stats.e3.is_some()) {
        (2, false) => return Err(Error::TwoCategoriesNeedThreeRaters),
        (2, true) => {
            // Pivot on the category with the larger excess.
            let pivot = if stats.excess(cstar[0]) >= stats.excess(cstar[1]) {
                [cstar[0], cstar[1]]
            } else {
                [cstar[1], cstar[0]]
            };
            beta_two_star(stats, pivot)?
        }
        (_, true) => {
            let mut res = beta_triple(stats, &cstar)?;
            match beta_pairwise(stats, &cstar) {
                Ok(cross) => res
                    .diagnostics
                    .push(format!("pairwise cross-check beta = {:.6}", cross.beta_hat)),
                Err(e) => res.diagnostics.push(format!("pairwise cross-check failed: {e}")),
            }
            res
        }
        (_, false) => {
            let mut res = beta_pairwise(stats, &cstar)?;
            res.diagnostics
                .push("no triple statistics: pairwise route used".into());
            res
        }
    };
    notes.append(&mut res.diagnostics);
    res.diagnostics = notes;
    Ok(res)
}

fn check_len(stats: &CoincidenceStats, v: &[f64], name: &str) -> Result<()> {
    if v.len() != stats.m() {
        return Err(Error::InvalidParameter(format!(
            "{name} has {} entries, expected {}",
            v.len(),
            stats.m()
        )));
    }
    Ok(())
}

/// An admissible alternative reliability value in the two-category case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternativeBeta {
    /// The integer `n` with `τ' = (n + N)/(2N)`.
    pub n: usize,
    pub beta: f64,
}

/// The set of reliability values indistinguishable from `β` by pairwise
/// statistics when there are two categories.
#[derive(Debug, Clone, PartialEq)]
pub struct IndeterminacyRegion {
    pub intervals: Vec<BetaInterval>,
    pub admissible: Vec<AlternativeBeta>,
}

impl IndeterminacyRegion {
    pub fn contains(&self, beta: f64) -> bool {
        self.intervals
            .iter()
            .any(|iv| iv.lo - 1e-12 <= beta && beta <= iv.hi + 1e-12)
    }
}

/// Continuous region `[2β√(τ(1-τ)), e1 + β²τ(1-τ)/e1] ∩ I` plus the
/// discrete values `β'² = 4β²τ(1-τ)/(1 - n²/N²)`, `n + N` even, that fall
/// inside it and are realizable with `N` items. `e1_max` is the larger of
/// the two single-category frequencies.
pub fn indeterminacy_region(beta: f64, tau: f64, e1_max: f64, n_items: usize) -> IndeterminacyRegion {
    let spread = tau * (1.0 - tau);
    let excess = beta * beta * spread;
    let main = BetaInterval {
        lo: 2.0 * beta * spread.sqrt(),
        hi: e1_max + excess / e1_max,
    };
    let pieces = if e1_max >= 1.0 {
        vec![BetaInterval { lo: 0.0, hi: 1.0 }]
    } else {
        let q = 1.0 - e1_max;
        vec![
            BetaInterval { lo: 0.0, hi: 2.0 * q },
            BetaInterval {
                lo: q + excess / q,
                hi: 1.0,
            },
        ]
    };
    let mut intervals: Vec<BetaInterval> = pieces
        .iter()
        .map(|iv| BetaInterval {
            lo: iv.lo.max(main.lo),
            hi: iv.hi.min(main.hi),
        })
        .filter(|iv| iv.lo <= iv.hi)
        .collect();
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<BetaInterval> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => merged.push(iv),
        }
    }
    let mut region = IndeterminacyRegion {
        intervals: merged,
        admissible: Vec::new(),
    };

    let nf = n_items as f64;
    for n in (1..n_items).filter(|n| (n + n_items).is_multiple_of(2)) {
        let ratio = n as f64 / nf;
        let b = (4.0 * excess / (1.0 - ratio * ratio)).sqrt();
        let duplicate = region
            .admissible
            .last()
            .is_some_and(|prev| prev.beta == b);
        if region.contains(b) && !duplicate {
            region.admissible.push(AlternativeBeta { n, beta: b });
        }
    }
    region
}

/// A two-category model with reliability `β'` (indexed by `n`, see
/// [`indeterminacy_region`]) whose single and pairwise coincidences equal
/// those of `model`.
pub fn two_category_equivalent(model: &CoderModel, n: usize) -> Result<CoderModel> {
    if model.categories().len() != 2 {
        return Err(Error::InvalidParameter("need exactly two categories".into()));
    }
    let n_items = model.n_items();
    if n == 0 || n >= n_items || !(n + n_items).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must be in 1..N with n + N even"
        )));
    }
    let (b, tau, p) = (model.beta(), model.tau(), model.p());
    let e1: Vec<f64> = (0..2).map(|c| b * tau[c] + (1.0 - b) * p[c]).collect();
    let c0 = if e1[0] >= e1[1] { 0 } else { 1 };
    let t = tau[c0];
    let ratio = n as f64 / n_items as f64;
    let beta_prime = (4.0 * b * b * t * (1.0 - t) / (1.0 - ratio * ratio)).sqrt();
    if beta_prime > 1.0 {
        return Err(Error::InvalidParameter(format!("beta' = {beta_prime} exceeds 1")));
    }
    let n_c0 = (n + n_items) / 2;
    let tau_c0 = n_c0 as f64 / n_items as f64;
    let p_c0 = if beta_prime >= 1.0 {
        p[c0]
    } else {
        (e1[c0] - beta_prime * tau_c0) / (1.0 - beta_prime)
    };
    if !(-1e-12..=1.0 + 1e-12).contains(&p_c0) {
        return Err(Error::InvalidParameter(format!(
            "beta' = {beta_prime} needs p' = {p_c0} outside [0,1]"
        )));
    }
    let p_c0 = p_c0.clamp(0.0, 1.0);
    let other = 1 - c0;
    let gamma = (0..n_items).map(|k| if k < n_c0 { c0 } else { other }).collect();
    let mut p_new = vec![0.0; 2];
    p_new[c0] = p_c0;
    p_new[other] = 1.0 - p_c0;
    CoderModel::new(
        beta_prime,
        TrueLabeling::new(gamma, 2)?,
        AprioriDist::new(p_new)?,
        model.categories().clone(),
    )
}

/// For a model whose items all share one true category `c0`, the model
/// `(β', γ, p')` with the same cell distribution. Requires
/// `β' ≤ β + (1-β) p_{c0}`.
pub fn single_category_equivalent(model: &CoderModel, beta_prime: f64) -> Result<CoderModel> {
    let c0 = model
        .tau()
        .iter()
        .position(|&t| t >= 1.0)
        .ok_or_else(|| Error::InvalidParameter("all items must share one category".into()))?;
    let (b, p) = (model.beta(), model.p());
    let limit = b + (1.0 - b) * p[c0];
    if !(0.0..=limit + 1e-15).contains(&beta_prime) {
        return Err(Error::InvalidParameter(format!(
            "beta' = {beta_prime} outside [0, {limit}]"
        )));
    }
    let p_new = if beta_prime >= 1.0 {
        p.to_vec()
    } else {
        let scale = (1.0 - b) / (1.0 - beta_prime);
        let mut v: Vec<f64> = p.iter().map(|&pc| scale * pc).collect();
        v[c0] = ((b - beta_prime + (1.0 - b) * p[c0]) / (1.0 - beta_prime)).clamp(0.0, 1.0);
        v
    };
    CoderModel::new(
        beta_prime,
        model.labeling().clone(),
        AprioriDist::new(p_new)?,
        model.categories().clone(),
    )
}
