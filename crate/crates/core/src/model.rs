//! Coder model parameters and the generative rating process.
//!
//! A rater looking at item `k` recognizes its true category `γ(k)` with
//! probability `β`; otherwise it emits a draw from the a-priori distribution
//! `p`. Each cell of a [`RatingsMatrix`] is therefore distributed as the
//! mixture `β·δ(γ(k)) + (1-β)·p`, independently of every other cell.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on `Σ p_c = 1` for a-priori distributions.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Ordered, duplicate-free list of category labels (at least two).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategorySet {
    labels: Vec<String>,
}

impl CategorySet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidCategories(format!(
                "need at least two categories, got {}",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidCategories(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Labels `c1, c2, …, cm`.
    pub fn numbered(m: usize) -> Result<Self> {
        Self::new((1..=m).map(|i| format!("c{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn require_index(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownCategory(label.to_string()))
    }
}

/// The latent correct category of every item.
///
/// Categories are stored as indices into a [`CategorySet`] of size `m`;
/// `tau[c]` is the exact relative frequency `N_c / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueLabeling {
    gamma: Vec<usize>,
    tau: Vec<f64>,
}

impl TrueLabeling {
    pub fn new(gamma: Vec<usize>, m: usize) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidParameter("labeling needs at least one item".into()));
        }
        let mut counts = vec![0usize; m];
        for &g in &gamma {
            if g >= m {
                return Err(Error::InvalidParameter(format!(
                    "category index {g} outside 0..{m}"
                )));
            }
            counts[g] += 1;
        }
        let n = gamma.len() as f64;
        let tau = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Self { gamma, tau })
    }

    /// Blocked labeling: the first `counts[0]` items get category 0, and so on.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let gamma = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        Self::new(gamma, counts.len())
    }

    /// Blocked labeling with `N·τ_c` items per category. Fails unless every
    /// `N·τ_c` is an integer (within 1e-9).
    pub fn from_tau(n_items: usize, tau: &[f64]) -> Result<Self> {
        check_simplex("tau", tau, 1e-9)?;
        let mut counts = Vec::with_capacity(tau.len());
        for (c, &t) in tau.iter().enumerate() {
            let exact = t * n_items as f64;
            let rounded = exact.round();
            if (exact - rounded).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "N·tau[{c}] = {exact} is not an integer"
                )));
            }
            counts.push(rounded as usize);
        }
        if counts.iter().sum::<usize>() != n_items {
            return Err(Error::InvalidParameter("category counts do not sum to N".into()));
        }
        Self::from_counts(&counts)
    }

    /// Blocked labeling whose counts apportion `N` by largest remainder, for
    /// frequency vectors such as `(1/3, 1/3, 1/3)` that have no exact
    /// integral realization.
    pub fn from_tau_rounded(n_items: usize, tau: &[f64]) -> Result<Self> {
        check_simplex("tau", tau, 1e-9)?;
        let quotas: Vec<f64> = tau.iter().map(|t| t * n_items as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..tau.len()).collect();
        // Largest remainder first; ties go to the lower index.
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &c in order.iter().take(n_items.saturating_sub(assigned)) {
            counts[c] += 1;
        }
        Self::from_counts(&counts)
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn n_items(&self) -> usize {
        self.gamma.len()
    }

    pub fn n_categories(&self) -> usize {
        self.tau.len()
    }
}

/// Distribution a rater draws from when not certain.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriDist {
    p: Vec<f64>,
}

impl AprioriDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_simplex("p", &p, SIMPLEX_TOL)?;
        Ok(Self { p })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Inverse-CDF lookup over the category order. `u` is uniform on `[0,1)`.
    fn category_at(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (c, &pc) in self.p.iter().enumerate() {
            cum += pc;
            if u < cum {
                return c;
            }
        }
        // Accumulated rounding left Σp slightly below 1.
        self.p.iter().rposition(|&pc| pc > 0.0).unwrap_or(0)
    }
}

pub(crate) fn check_simplex(name: &str, v: &[f64], tol: f64) -> Result<()> {
    if let Some((i, x)) = v
        .iter()
        .enumerate()
        .find(|(_, x)| !x.is_finite() || **x < 0.0 || **x > 1.0)
    {
        return Err(Error::InvalidParameter(format!("{name}[{i}] = {x} outside [0,1]")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// The coder model `(β, γ, p)` over a fixed category set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderModel {
    beta: f64,
    labeling: TrueLabeling,
    apriori: AprioriDist,
    categories: CategorySet,
}

impl CoderModel {
    pub fn new(
        beta: f64,
        labeling: TrueLabeling,
        apriori: AprioriDist,
        categories: CategorySet,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside [0,1]")));
        }
        let m = categories.len();
        if labeling.n_categories() != m || apriori.probs().len() != m {
            return Err(Error::InvalidParameter(format!(
                "labeling ({}) and a-priori ({}) must both cover the {m} categories",
                labeling.n_categories(),
                apriori.probs().len()
            )));
        }
        Ok(Self {
            beta,
            labeling,
            apriori,
            categories,
        })
    }

    /// Convenience constructor with numbered categories and a blocked
    /// labeling; `N·τ_c` must be integral.
    pub fn from_params(beta: f64, tau: &[f64], p: &[f64], n_items: usize) -> Result<Self> {
        let categories = CategorySet::numbered(tau.len())?;
        Self::new(
            beta,
            TrueLabeling::from_tau(n_items, tau)?,
            AprioriDist::new(p.to_vec())?,
            categories,
        )
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> &[f64] {
        self.labeling.tau()
    }

    pub fn p(&self) -> &[f64] {
        self.apriori.probs()
    }

    pub fn labeling(&self) -> &TrueLabeling {
        &self.labeling
    }

    pub fn apriori(&self) -> &AprioriDist {
        &self.apriori
    }

    pub fn categories(&self) -> &CategorySet {
        &self.categories
    }

    pub fn n_items(&self) -> usize {
        self.labeling.n_items()
    }

    /// `Prob(X_k = c) = β·δ(c, γ(k)) + (1-β)·p_c`.
    pub fn cell_prob(&self, item: usize, category: usize) -> f64 {
        let atom = if self.labeling.gamma()[item] == category { 1.0 } else { 0.0 };
        self.beta * atom + (1.0 - self.beta) * self.apriori.probs()[category]
    }

    /// Same model with `beta` replaced.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.labeling.clone(), self.apriori.clone(), self.categories.clone())
    }

    /// The model seen through a category map `Φ`: `(β, Φ∘γ, p')` with
    /// `p'_{c'} = Σ_{Φ(c)=c'} p_c`. `phi` must be defined on every source
    /// category.
    pub fn map_categories(
        &self,
        phi: &BTreeMap<String, String>,
        target: &CategorySet,
    ) -> Result<Self> {
        let index_map = resolve_map(&self.categories, phi, target, |_| true)?;
        let gamma = self
            .labeling
            .gamma()
            .iter()
            .map(|&g| index_map[g].expect("phi is total"))
            .collect();
        let mut p = vec![0.0; target.len()];
        for (c, &pc) in self.apriori.probs().iter().enumerate() {
            p[index_map[c].expect("phi is total")] += pc;
        }
        Self::new(
            self.beta,
            TrueLabeling::new(gamma, target.len())?,
            AprioriDist::new(p)?,
            target.clone(),
        )
    }
}

/// Source-index → target-index table. Categories for which `needed` is true
/// must be mapped into `target`.
fn resolve_map(
    source: &CategorySet,
    phi: &BTreeMap<String, String>,
    target: &CategorySet,
    needed: impl Fn(usize) -> bool,
) -> Result<Vec<Option<usize>>> {
    source
        .labels()
        .iter()
        .enumerate()
        .map(|(c, label)| match phi.get(label) {
            Some(image) => target.require_index(image).map(Some),
            None if needed(c) => Err(Error::UnmappedCategory(label.clone())),
            None => Ok(None),
        })
        .collect()
}

/// `N × R` table of category assignments; row `k` holds the ratings of item
/// `k` by raters `1..=R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingsMatrix {
    entries: Vec<usize>,
    n_items: usize,
    n_raters: usize,
    categories: CategorySet,
}

impl RatingsMatrix {
    /// Builds a matrix from category indices stored row by row.
    pub fn new(
        entries: Vec<usize>,
        n_items: usize,
        n_raters: usize,
        categories: CategorySet,
    ) -> Result<Self> {
        if n_items == 0 || n_raters == 0 {
            return Err(Error::InvalidParameter("ratings need N >= 1 and R >= 1".into()));
        }
        if entries.len() != n_items * n_raters {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not fill a {n_items}x{n_raters} matrix",
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= categories.len()) {
            return Err(Error::InvalidParameter(format!("category index {bad} out of range")));
        }
        Ok(Self {
            entries,
            n_items,
            n_raters,
            categories,
        })
    }

    /// Builds a matrix from label rows.
    pub fn from_labels<S: AsRef<str>>(rows: &[Vec<S>], categories: CategorySet) -> Result<Self> {
        let n_items = rows.len();
        let n_raters = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(n_items * n_raters);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n_raters {
                return Err(Error::InvalidParameter(format!(
                    "row {} has {} ratings, expected {n_raters}",
                    k + 1,
                    row.len()
                )));
            }
            for label in row {
                entries.push(categories.require_index(label.as_ref())?);
            }
        }
        Self::new(entries, n_items, n_raters, categories)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_raters(&self) -> usize {
        self.n_raters
    }

    pub fn categories(&self) -> &CategorySet {
        &self.categories
    }

    pub fn get(&self, item: usize, rater: usize) -> usize {
        self.entries[item * self.n_raters + rater]
    }

    pub fn row(&self, item: usize) -> &[usize] {
        &self.entries[item * self.n_raters..(item + 1) * self.n_raters]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.entries.chunks_exact(self.n_raters)
    }

    pub fn column(&self, rater: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows().map(move |r| r[rater])
    }

    /// Applies `Φ` entrywise. Only labels that actually occur must be mapped.
    pub fn map_categories(
        &self,
        phi: &BTreeMap<String, String>,
        target: &CategorySet,
    ) -> Result<Self> {
        let mut used = vec![false; self.categories.len()];
        for &e in &self.entries {
            used[e] = true;
        }
        let index_map = resolve_map(&self.categories, phi, target, |c| used[c])?;
        let entries = self
            .entries
            .iter()
            .map(|&e| index_map[e].expect("occurring labels are mapped"))
            .collect();
        Self::new(entries, self.n_items, self.n_raters, target.clone())
    }

    /// Writes `item,rater_1,…,rater_R` followed by one row per item, with
    /// 1-based item numbers and quoted category labels.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("item");
        for r in 1..=self.n_raters {
            header.push_str(&format!(",rater_{r}"));
        }
        writeln!(out, "{header}")?;
        for (k, row) in self.rows().enumerate() {
            let mut line = (k + 1).to_string();
            for &c in row {
                line.push_str(",\"");
                line.push_str(&self.categories.label(c).replace('"', "\"\""));
                line.push('"');
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). Without
    /// an explicit category set, labels are collected in order of first
    /// appearance.
    pub fn read_csv<R: Read>(input: R, categories: Option<&CategorySet>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("item") || headers.len() < 2 {
            return Err(Error::Parse("header must start with `item,rater_1`".into()));
        }
        for (r, h) in headers.iter().skip(1).enumerate() {
            if h != format!("rater_{}", r + 1) {
                return Err(Error::Parse(format!("unexpected header column {h:?}")));
            }
        }
        let mut rows: Vec<Vec<String>> = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record?;
            let item: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad item number {:?}", &record[0])))?;
            if item != k + 1 {
                return Err(Error::Parse(format!("row {} has item number {item}", k + 1)));
            }
            rows.push(record.iter().skip(1).map(str::to_string).collect());
        }
        let categories = match categories {
            Some(c) => c.clone(),
            None => {
                let mut labels: Vec<String> = Vec::new();
                for l in rows.iter().flatten() {
                    if !labels.contains(l) {
                        labels.push(l.clone());
                    }
                }
                CategorySet::new(labels)?
            }
        };
        Self::from_labels(&rows, categories)
    }
}

/// Draws an `N × R` ratings matrix from the coder model.
///
/// Uses ChaCha8 seeded via `seed_from_u64(seed)`. Cells are visited row-major
/// (item by item, raters in order); each cell consumes one uniform for the
/// certainty indicator (`u < β` means certain) and, if uncertain, one more
/// uniform for the inverse-CDF draw from `p`.
///
/// # Panics
/// If `raters == 0`.
pub fn sample_ratings(model: &CoderModel, raters: usize, seed: u64) -> RatingsMatrix {
    assert!(raters >= 1, "need at least one rater");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n_items();
    let mut entries = Vec::with_capacity(n * raters);
    for &truth in model.labeling.gamma() {
        for _ in 0..raters {
            let u: f64 = rng.random();
            let c = if u < model.beta {
                truth
            } else {
                model.apriori.category_at(rng.random())
            };
            entries.push(c);
        }
    }
    RatingsMatrix {
        entries,
        n_items: n,
        n_raters: raters,
        categories: model.categories.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(beta: f64) -> CoderModel {
        CoderModel::from_params(beta, &[0.3, 0.6, 0.1], &[0.33, 0.33, 0.34], 100).unwrap()
    }

    #[test]
    fn category_set_rejects_duplicates_and_singletons() {
        assert!(CategorySet::new(["a"]).is_err());
        assert!(CategorySet::new(["a", "b", "a"]).is_err());
        assert_eq!(CategorySet::new(["a", "b"]).unwrap().len(), 2);
    }

    #[test]
    fn tau_constructor_requires_integral_counts() {
        assert!(TrueLabeling::from_tau(10, &[0.25, 0.75]).is_err());
        let l = TrueLabeling::from_tau(100, &[0.3, 0.6, 0.1]).unwrap();
        assert_eq!(l.tau(), &[0.3, 0.6, 0.1]);
        assert_eq!(&l.gamma()[..3], &[0, 0, 0]);
        assert_eq!(l.gamma()[99], 2);
    }

    #[test]
    fn rounded_labeling_apportions_all_items() {
        let l = TrueLabeling::from_tau_rounded(100, &[1.0 / 3.0; 3]).unwrap();
        assert_eq!(l.n_items(), 100);
        let counts: Vec<usize> = (0..3)
            .map(|c| l.gamma().iter().filter(|&&g| g == c).count())
            .collect();
        assert_eq!(counts, vec![34, 33, 33]);
    }

    #[test]
    fn apriori_must_sum_to_one() {
        assert!(AprioriDist::new(vec![0.5, 0.4]).is_err());
        assert!(AprioriDist::new(vec![1.2, -0.2]).is_err());
        assert!(AprioriDist::new(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn beta_one_reproduces_gamma_in_every_column() {
        let m = CoderModel::new(
            1.0,
            TrueLabeling::new(vec![2, 0, 1, 1, 0, 2, 2], 3).unwrap(),
            AprioriDist::new(vec![0.1, 0.2, 0.7]).unwrap(),
            CategorySet::numbered(3).unwrap(),
        )
        .unwrap();
        let r = sample_ratings(&m, 3, 99);
        for rater in 0..3 {
            assert!(r.column(rater).eq(m.labeling().gamma().iter().copied()));
        }
    }

    #[test]
    fn beta_zero_with_atomic_apriori_gives_first_category() {
        let m = CoderModel::from_params(0.0, &[0.5, 0.5], &[1.0, 0.0], 10).unwrap();
        let r = sample_ratings(&m, 2, 7);
        assert!(r.rows().flatten().all(|&c| c == 0));
    }

    #[test]
    fn identical_seed_identical_matrix() {
        let m = reference(0.85);
        assert_eq!(sample_ratings(&m, 5, 1234), sample_ratings(&m, 5, 1234));
        assert_ne!(sample_ratings(&m, 5, 1234), sample_ratings(&m, 5, 1235));
    }

    #[test]
    fn per_rater_frequencies_match_single_coincidences() {
        // e1_c = β τ_c + (1-β) p_c, evaluated independently here.
        let (beta, tau, p) = (0.85, [0.3, 0.6, 0.1], [0.33, 0.33, 0.34]);
        let m = reference(beta);
        let r = sample_ratings(&m, 5, 20240601);
        for c in 0..3 {
            let e1 = beta * tau[c] + (1.0 - beta) * p[c];
            let bound = 4.0 * (e1 * (1.0 - e1) / 100.0).sqrt();
            for rater in 0..5 {
                let freq = r.column(rater).filter(|&x| x == c).count() as f64 / 100.0;
                assert!((freq - e1).abs() <= bound, "rater {rater} cat {c}: {freq} vs {e1}");
            }
        }
    }

    #[test]
    fn raters_are_exchangeable_in_distribution() {
        let m = reference(0.6);
        let mut freq = vec![[0.0f64; 3]; 4];
        let seeds = 200;
        for s in 0..seeds {
            let r = sample_ratings(&m, 4, s);
            for (rater, f) in freq.iter_mut().enumerate() {
                for c in r.column(rater) {
                    f[c] += 1.0 / (100.0 * seeds as f64);
                }
            }
        }
        // Each averaged frequency has standard error below 0.004.
        for c in 0..3 {
            for rater in 1..4 {
                assert!((freq[rater][c] - freq[0][c]).abs() < 0.02);
            }
        }
    }

    #[test]
    fn identity_map_is_identity() {
        let m = reference(0.7);
        let r = sample_ratings(&m, 3, 5);
        let phi: BTreeMap<String, String> = m
            .categories()
            .labels()
            .iter()
            .map(|l| (l.clone(), l.clone()))
            .collect();
        assert_eq!(r.map_categories(&phi, m.categories()).unwrap(), r);
    }

    #[test]
    fn merging_categories_adds_apriori_mass() {
        let m = CoderModel::from_params(0.4, &[0.5, 0.25, 0.25], &[0.2, 0.3, 0.5], 4).unwrap();
        let target = CategorySet::new(["d1", "d2"]).unwrap();
        let phi: BTreeMap<String, String> = [("c1", "d1"), ("c2", "d1"), ("c3", "d2")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let merged = m.map_categories(&phi, &target).unwrap();
        assert_eq!(merged.p(), &[0.5, 0.5]);
        assert_eq!(merged.tau(), &[0.75, 0.25]);
        assert_eq!(merged.beta(), m.beta());

        let r = sample_ratings(&m, 2, 3);
        let mapped = r.map_categories(&phi, &target).unwrap();
        for k in 0..r.n_items() {
            for j in 0..2 {
                let expect = if r.get(k, j) == 2 { 1 } else { 0 };
                assert_eq!(mapped.get(k, j), expect);
            }
        }
    }

    #[test]
    fn unmapped_occurring_label_is_an_error() {
        let m = CoderModel::from_params(1.0, &[0.5, 0.5], &[0.5, 0.5], 2).unwrap();
        let r = sample_ratings(&m, 2, 0);
        let target = CategorySet::new(["x", "y"]).unwrap();
        let phi: BTreeMap<String, String> = [("c1".to_string(), "x".to_string())].into();
        let err = r.map_categories(&phi, &target).unwrap_err();
        assert!(err.to_string().contains("unmapped category"));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cats = CategorySet::new(["yes", "no", "say \"maybe\""]).unwrap();
        let r = RatingsMatrix::new(vec![0, 1, 2, 2, 1, 0], 2, 3, cats.clone()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("item,rater_1,rater_2,rater_3\n1,\"yes\",\"no\""));
        let back = RatingsMatrix::read_csv(&buf[..], Some(&cats)).unwrap();
        assert_eq!(back, r);
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn csv_reader_rejects_bad_header() {
        let err = RatingsMatrix::read_csv(&b"id,a,b\n1,\"x\",\"y\"\n"[..], None).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }
}
