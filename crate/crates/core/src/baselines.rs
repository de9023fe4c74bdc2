//! Classical chance-corrected agreement coefficients, reported alongside
//! `β̂` for comparison.

use crate::error::{Error, Result};
use crate::model::RatingsMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientReport {
    /// Mean over items of the share of agreeing rater pairs.
    pub percent_agreement: f64,
    /// Bennett–Alpert–Goldstein S, chance level `1/m`.
    pub s_value: f64,
    /// Cohen's κ averaged over all rater pairs.
    pub cohen_kappa_mean: f64,
    /// Fleiss' multi-rater π with pooled marginals.
    pub fleiss_pi: f64,
    pub flags: Vec<String>,
}

/// Computes the baseline coefficients. Coefficients whose expected
/// agreement is 1 are reported as 0 and flagged `undefined`.
pub fn coefficients(ratings: &RatingsMatrix) -> Result<CoefficientReport> {
    let r = ratings.n_raters();
    if r < 2 {
        return Err(Error::NeedTwoRaters);
    }
    let m = ratings.categories().len();
    let n = ratings.n_items() as f64;
    let pair_count = (r * (r - 1)) as f64;

    let mut agreeing = 0u64;
    let mut pooled = vec![0u64; m];
    let mut counts = vec![0u64; m];
    for row in ratings.rows() {
        counts.iter_mut().for_each(|x| *x = 0);
        for &c in row {
            counts[c] += 1;
        }
        for (c, &k) in counts.iter().enumerate() {
            pooled[c] += k;
            agreeing += k * k.saturating_sub(1);
        }
    }
    let ao = agreeing as f64 / (n * pair_count);
    let chance = 1.0 / m as f64;
    let s_value = (ao - chance) / (1.0 - chance);

    let mut flags = Vec::new();
    let total = n * r as f64;
    let pe_pooled: f64 = pooled.iter().map(|&k| (k as f64 / total).powi(2)).sum();
    let fleiss_pi = chance_corrected(ao, pe_pooled).unwrap_or_else(|| {
        flags.push("fleiss_pi undefined".to_string());
        0.0
    });

    let marginals: Vec<Vec<f64>> = (0..r)
        .map(|j| {
            let mut v = vec![0.0; m];
            for c in ratings.column(j) {
                v[c] += 1.0 / n;
            }
            v
        })
        .collect();
    let mut kappas = Vec::new();
    let mut undefined_pairs = 0;
    for i in 0..r {
        for j in i + 1..r {
            let po = ratings
                .column(i)
                .zip(ratings.column(j))
                .filter(|(a, b)| a == b)
                .count() as f64
                / n;
            let pe: f64 = marginals[i].iter().zip(&marginals[j]).map(|(a, b)| a * b).sum();
            match chance_corrected(po, pe) {
                Some(k) => kappas.push(k),
                None => {
                    undefined_pairs += 1;
                    kappas.push(0.0);
                }
            }
        }
    }
    if undefined_pairs > 0 {
        flags.push(format!(
            "cohen_kappa undefined for {undefined_pairs} of {} rater pairs",
            kappas.len()
        ));
    }
    let cohen_kappa_mean = kappas.iter().sum::<f64>() / kappas.len() as f64;

    Ok(CoefficientReport {
        percent_agreement: ao,
        s_value,
        cohen_kappa_mean,
        fleiss_pi,
        flags,
    })
}

fn chance_corrected(observed: f64, expected: f64) -> Option<f64> {
    if (1.0 - expected).abs() < 1e-12 {
        None
    } else {
        Some((observed - expected) / (1.0 - expected))
    }
}
