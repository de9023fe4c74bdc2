//! Agreement moments: single (`e1`), pairwise (`e2`) and triple (`e3`)
//! coincidence frequencies, either evaluated from model parameters or
//! estimated from an observed ratings matrix.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{CategorySet, CoderModel, RatingsMatrix};

/// Largest `m^R · N` the brute-force oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsSource {
    Theoretical,
    Empirical { n_items: usize, n_raters: usize },
}

/// Coincidence moments over a category set.
///
/// `e2` is the full `m × m` matrix of ordered pair frequencies; `e3` holds
/// only the diagonal triple frequencies and is absent for fewer than three
/// raters.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceStats {
    pub categories: CategorySet,
    pub e1: Vec<f64>,
    pub e2: Vec<Vec<f64>>,
    pub e3: Option<Vec<f64>>,
    pub source: StatsSource,
}

impl CoincidenceStats {
    pub fn m(&self) -> usize {
        self.e1.len()
    }

    /// `e2[c][c] - e1[c]²`, which equals `β² τ_c (1 - τ_c)` in expectation.
    pub fn excess(&self, c: usize) -> f64 {
        self.e2[c][c] - self.e1[c] * self.e1[c]
    }

    /// Total self-agreement `Σ_c e2[c][c]`.
    pub fn self_agreement(&self) -> f64 {
        (0..self.m()).map(|c| self.e2[c][c]).sum()
    }

    /// Writes a sectioned CSV bundle (`SOURCE`, `CATEGORIES`, `E1`, one `E2`
    /// line per row, optional `E3`), floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match self.source {
            StatsSource::Theoretical => writeln!(out, "SOURCE,theoretical")?,
            StatsSource::Empirical { n_items, n_raters } => {
                writeln!(out, "SOURCE,empirical,{n_items},{n_raters}")?
            }
        }
        let labels: Vec<String> = self
            .categories
            .labels()
            .iter()
            .map(|l| format!("\"{}\"", l.replace('"', "\"\"")))
            .collect();
        writeln!(out, "CATEGORIES,{}", labels.join(","))?;
        writeln!(out, "E1,{}", join_floats(&self.e1))?;
        for row in &self.e2 {
            writeln!(out, "E2,{}", join_floats(row))?;
        }
        if let Some(e3) = &self.e3 {
            writeln!(out, "E3,{}", join_floats(e3))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut source = None;
        let mut categories = None;
        let mut e1 = None;
        let mut e2 = Vec::new();
        let mut e3 = None;
        for record in reader.records() {
            let record = record?;
            let fields: Vec<&str> = record.iter().collect();
            match fields.first().copied() {
                Some("SOURCE") => {
                    source = Some(match fields.get(1).copied() {
                        Some("theoretical") => StatsSource::Theoretical,
                        Some("empirical") if fields.len() == 4 => StatsSource::Empirical {
                            n_items: parse_field(fields[2])?,
                            n_raters: parse_field(fields[3])?,
                        },
                        _ => return Err(Error::Parse(format!("bad SOURCE line {fields:?}"))),
                    })
                }
                Some("CATEGORIES") => categories = Some(CategorySet::new(fields[1..].to_vec())?),
                Some("E1") => e1 = Some(parse_floats(&fields[1..])?),
                Some("E2") => e2.push(parse_floats(&fields[1..])?),
                Some("E3") => e3 = Some(parse_floats(&fields[1..])?),
                Some("") | None => {}
                Some(other) => return Err(Error::Parse(format!("unknown section {other:?}"))),
            }
        }
        let categories = categories.ok_or_else(|| Error::Parse("missing CATEGORIES".into()))?;
        let e1 = e1.ok_or_else(|| Error::Parse("missing E1".into()))?;
        let m = categories.len();
        if e1.len() != m
            || e2.len() != m
            || e2.iter().any(|r| r.len() != m)
            || e3.as_ref().is_some_and(|v: &Vec<f64>| v.len() != m)
        {
            return Err(Error::Parse(format!("section sizes do not match {m} categories")));
        }
        Ok(Self {
            categories,
            e1,
            e2,
            e3,
            source: source.ok_or_else(|| Error::Parse("missing SOURCE".into()))?,
        })
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
}

fn parse_floats(fields: &[&str]) -> Result<Vec<f64>> {
    fields.iter().map(|f| parse_field(f)).collect()
}

fn parse_field<T: std::str::FromStr>(f: &str) -> Result<T> {
    f.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {f:?}")))
}

/// `e1_c = β τ_c + (1-β) p_c`.
#[inline]
pub fn e1_term(beta: f64, tau: f64, p: f64) -> f64 {
    beta * tau + (1.0 - beta) * p
}

/// `e2_{c1,c2} = β² δ τ_{c1} + β(1-β)(τ_{c1} p_{c2} + τ_{c2} p_{c1}) + (1-β)² p_{c1} p_{c2}`.
#[inline]
pub fn e2_term(beta: f64, tau: &[f64], p: &[f64], c1: usize, c2: usize) -> f64 {
    let q = 1.0 - beta;
    let diag = if c1 == c2 { beta * beta * tau[c1] } else { 0.0 };
    diag + beta * q * (tau[c1] * p[c2] + tau[c2] * p[c1]) + q * q * p[c1] * p[c2]
}

/// `e3_c = β³ τ + 3β²(1-β) τ p + 3β(1-β)² τ p² + (1-β)³ p³`.
#[inline]
pub fn e3_term(beta: f64, tau: f64, p: f64) -> f64 {
    let q = 1.0 - beta;
    beta * beta * beta * tau
        + 3.0 * beta * beta * q * tau * p
        + 3.0 * beta * q * q * tau * p * p
        + q * q * q * p * p * p
}

/// Exact expectations of the coincidence frequencies under `model`.
pub fn theoretical_stats(model: &CoderModel) -> CoincidenceStats {
    let (b, tau, p) = (model.beta(), model.tau(), model.p());
    let m = tau.len();
    let e1 = (0..m).map(|c| e1_term(b, tau[c], p[c])).collect();
    let e2 = (0..m)
        .map(|c1| (0..m).map(|c2| e2_term(b, tau, p, c1, c2)).collect())
        .collect();
    let e3 = (0..m).map(|c| e3_term(b, tau[c], p[c])).collect();
    CoincidenceStats {
        categories: model.categories().clone(),
        e1,
        e2,
        e3: Some(e3),
        source: StatsSource::Theoretical,
    }
}

/// Pooled plug-in estimates from observed ratings.
///
/// `ê2` averages over all ordered rater pairs and `ê3` over all unordered
/// rater triples; `ê3` is only produced for three or more raters. Counts
/// are accumulated as integers, so the result does not depend on item order.
pub fn empirical_stats(ratings: &RatingsMatrix) -> Result<CoincidenceStats> {
    let r = ratings.n_raters();
    if r < 2 {
        return Err(Error::NeedTwoRaters);
    }
    let n = ratings.n_items();
    let m = ratings.categories().len();

    let mut single = vec![0u64; m];
    let mut pairs = vec![vec![0u64; m]; m];
    let mut triples = vec![0u64; m];
    let mut counts = vec![0u64; m];
    for row in ratings.rows() {
        counts.iter_mut().for_each(|x| *x = 0);
        for &c in row {
            counts[c] += 1;
        }
        for c1 in 0..m {
            let n1 = counts[c1];
            if n1 == 0 {
                continue;
            }
            single[c1] += n1;
            for c2 in 0..m {
                pairs[c1][c2] += if c1 == c2 { n1 * (n1 - 1) } else { n1 * counts[c2] };
            }
            if n1 >= 3 {
                triples[c1] += n1 * (n1 - 1) * (n1 - 2);
            }
        }
    }

    let (nf, rf) = (n as f64, r as f64);
    let e1 = single.iter().map(|&s| s as f64 / (nf * rf)).collect();
    let pair_norm = nf * rf * (rf - 1.0);
    let e2 = pairs
        .iter()
        .map(|row| row.iter().map(|&x| x as f64 / pair_norm).collect())
        .collect();
    // Ordered triple counts; each unordered triple appears 3! times on both
    // sides of the ratio.
    let e3 = (r >= 3).then(|| {
        let norm = nf * rf * (rf - 1.0) * (rf - 2.0);
        triples.iter().map(|&x| x as f64 / norm).collect()
    });
    Ok(CoincidenceStats {
        categories: ratings.categories().clone(),
        e1,
        e2,
        e3,
        source: StatsSource::Empirical {
            n_items: n,
            n_raters: r,
        },
    })
}

/// Brute-force expectations: enumerates every joint rating outcome of
/// `raters` coders on each item and sums probability-weighted indicators
/// with the same pooling as [`empirical_stats`].
pub fn enumerate_stats_oracle(model: &CoderModel, raters: usize) -> Result<CoincidenceStats> {
    let m = model.categories().len();
    let n = model.n_items();
    if raters < 2 {
        return Err(Error::NeedTwoRaters);
    }
    let size = (m as u128)
        .checked_pow(raters as u32)
        .and_then(|x| x.checked_mul(n as u128))
        .unwrap_or(u128::MAX);
    if size > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge(size));
    }

    let rf = raters as f64;
    let n_pairs = rf * (rf - 1.0);
    let n_triples = rf * (rf - 1.0) * (rf - 2.0) / 6.0;
    let mut e1 = vec![0.0; m];
    let mut e2 = vec![vec![0.0; m]; m];
    let mut e3 = vec![0.0; m];

    let outcomes = m.pow(raters as u32);
    let mut x = vec![0usize; raters];
    for item in 0..n {
        for code in 0..outcomes {
            let mut rest = code;
            for slot in x.iter_mut() {
                *slot = rest % m;
                rest /= m;
            }
            let prob: f64 = x.iter().map(|&c| model.cell_prob(item, c)).product();
            if prob == 0.0 {
                continue;
            }
            let w = prob / n as f64;
            for &c in &x {
                e1[c] += w / rf;
            }
            for i in 0..raters {
                for j in 0..raters {
                    if i != j {
                        e2[x[i]][x[j]] += w / n_pairs;
                    }
                }
            }
            for i in 0..raters {
                for j in i + 1..raters {
                    for k in j + 1..raters {
                        if x[i] == x[j] && x[j] == x[k] {
                            e3[x[i]] += w / n_triples;
                        }
                    }
                }
            }
        }
    }
    Ok(CoincidenceStats {
        categories: model.categories().clone(),
        e1,
        e2,
        e3: (raters >= 3).then_some(e3),
        source: StatsSource::Theoretical,
    })
}
