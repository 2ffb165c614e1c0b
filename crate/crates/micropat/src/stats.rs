//! Association and inference statistics: phi coefficients, chi-square
//! tests with Cramér's V and Bonferroni correction, Spearman rank
//! correlation, Mantel permutation tests, and chi-square power analysis.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::catalog::{PatternId, ALL_PATTERNS};
use crate::metrics::CorpusMetrics;
use crate::patterns::PatternMatrix;

/// 2x2 contingency table.
///
/// `n11` counts rows where both variables hold, `n10` where only the
/// first holds, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyTable {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl ContingencyTable {
    pub fn from_flags(a: &[bool], b: &[bool]) -> Self {
        let mut t = ContingencyTable { n11: 0, n10: 0, n01: 0, n00: 0 };
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (true, true) => t.n11 += 1,
                (true, false) => t.n10 += 1,
                (false, true) => t.n01 += 1,
                (false, false) => t.n00 += 1,
            }
        }
        t
    }

    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    fn margins(&self) -> [u64; 4] {
        [
            self.n11 + self.n10,
            self.n01 + self.n00,
            self.n11 + self.n01,
            self.n10 + self.n00,
        ]
    }

    fn has_zero_margin(&self) -> bool {
        self.margins().contains(&0)
    }
}

/// Phi coefficient of a 2x2 table; undefined when any margin is zero.
pub fn phi(t: &ContingencyTable) -> Option<f64> {
    if t.has_zero_margin() {
        return None;
    }
    let num = t.n11 as f64 * t.n00 as f64 - t.n10 as f64 * t.n01 as f64;
    let [r1, r0, c1, c0] = t.margins();
    let den = (r1 as f64 * r0 as f64 * c1 as f64 * c0 as f64).sqrt();
    Some(num / den)
}

/// Association strength band for an absolute phi value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    Weak,
    Moderate,
    ModeratelyStrong,
    Strong,
}

impl Strength {
    pub fn label(self) -> &'static str {
        match self {
            Strength::Weak => "weak",
            Strength::Moderate => "moderate",
            Strength::ModeratelyStrong => "moderately strong",
            Strength::Strong => "strong",
        }
    }
}

impl std::fmt::Display for Strength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classify a correlation by magnitude: below 0.15 weak, up to 0.50
/// moderate, up to 0.635 moderately strong, above that strong.
pub fn classify_strength(value: f64) -> Strength {
    let v = value.abs();
    if v < 0.15 {
        Strength::Weak
    } else if v <= 0.50 {
        Strength::Moderate
    } else if v <= 0.635 {
        Strength::ModeratelyStrong
    } else {
        Strength::Strong
    }
}

/// Square correlation matrix; `None` cells are undefined correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl CorrMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }
}

/// Pairwise phi coefficients between pattern flags over the analyzed
/// rows of a matrix. The diagonal is fixed at 1.
pub fn phi_matrix(matrix: &PatternMatrix) -> CorrMatrix {
    let columns: Vec<Vec<bool>> = ALL_PATTERNS
        .iter()
        .map(|p| {
            matrix
                .analyzed()
                .map(|row| row.flags.as_ref().unwrap()[p.index()])
                .collect()
        })
        .collect();
    let n = ALL_PATTERNS.len();
    let mut cells = vec![vec![None; n]; n];
    for i in 0..n {
        cells[i][i] = Some(1.0);
        for j in i + 1..n {
            let value = phi(&ContingencyTable::from_flags(&columns[i], &columns[j]));
            cells[i][j] = value;
            cells[j][i] = value;
        }
    }
    CorrMatrix {
        labels: ALL_PATTERNS.iter().map(|p| p.display_name().to_string()).collect(),
        cells,
    }
}

/// Outcome of a chi-square test of independence on a 2x2 table.
/// Fields are `None` when the test is undefined (a zero margin).
#[derive(Debug, Clone, PartialEq)]
pub struct Chi2Result {
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub cramers_v: Option<f64>,
    /// Significance threshold the test was evaluated against.
    pub alpha: f64,
    pub significant: Option<bool>,
    /// Cramér's V at or above 0.10.
    pub practically_significant: Option<bool>,
}

/// Pearson chi-square test on a 2x2 table (df = 1), with Cramér's V.
pub fn chi_square_2x2(t: &ContingencyTable, alpha: f64) -> Chi2Result {
    if t.has_zero_margin() {
        return Chi2Result {
            statistic: None,
            p_value: None,
            cramers_v: None,
            alpha,
            significant: None,
            practically_significant: None,
        };
    }
    let n = t.total() as f64;
    let num = t.n11 as f64 * t.n00 as f64 - t.n10 as f64 * t.n01 as f64;
    let [r1, r0, c1, c0] = t.margins();
    let statistic = n * num * num / (r1 as f64 * r0 as f64 * c1 as f64 * c0 as f64);
    let p_value = if statistic > 0.0 { gamma_ur(0.5, statistic / 2.0) } else { 1.0 };
    let cramers_v = (statistic / n).sqrt();
    Chi2Result {
        statistic: Some(statistic),
        p_value: Some(p_value),
        cramers_v: Some(cramers_v),
        alpha,
        significant: Some(p_value < alpha),
        practically_significant: Some(cramers_v >= 0.10),
    }
}

/// Bonferroni-corrected significance threshold for `k` comparisons.
pub fn bonferroni(alpha: f64, k: usize) -> f64 {
    alpha / k as f64
}

/// One between-corpus comparison of a pattern's coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseChi2 {
    pub pattern: PatternId,
    pub corpus_a: String,
    pub corpus_b: String,
    pub table: ContingencyTable,
    pub result: Chi2Result,
}

/// Chi-square tests comparing each pattern's coverage between every
/// pair of corpora, at a Bonferroni-corrected threshold (base alpha
/// over the number of corpus pairs).
pub fn pairwise_corpus_tests(metrics: &[CorpusMetrics], base_alpha: f64) -> Vec<PairwiseChi2> {
    let pairs = metrics.len() * metrics.len().saturating_sub(1) / 2;
    if pairs == 0 {
        return Vec::new();
    }
    let alpha = bonferroni(base_alpha, pairs);
    let mut out = Vec::new();
    for p in ALL_PATTERNS {
        for (i, a) in metrics.iter().enumerate() {
            for b in &metrics[i + 1..] {
                let (sa, sb) = (a.pattern(p), b.pattern(p));
                let table = ContingencyTable {
                    n11: sa.frequency,
                    n10: sa.eligible - sa.frequency,
                    n01: sb.frequency,
                    n00: sb.eligible - sb.frequency,
                };
                out.push(PairwiseChi2 {
                    pattern: p,
                    corpus_a: a.label.clone(),
                    corpus_b: b.label.clone(),
                    table,
                    result: chi_square_2x2(&table, alpha),
                });
            }
        }
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Tied values share the average of the ranks they occupy.
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties. `None` for
/// mismatched lengths, fewer than two points, or a constant input.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    pearson(&ranks(a), &ranks(b))
}

/// Spearman correlation between two corpora's coverage profiles, over
/// the patterns where coverage is defined in both.
pub fn spearman_coverage(a: &CorpusMetrics, b: &CorpusMetrics) -> Option<f64> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for p in ALL_PATTERNS {
        if let (Some(x), Some(y)) = (a.pattern(p).coverage_pct, b.pattern(p).coverage_pct) {
            xs.push(x);
            ys.push(y);
        }
    }
    spearman(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MantelResult {
    pub r: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
    /// Upper-triangle pairs that were defined in both matrices.
    pub pairs_used: usize,
}

/// Mantel test between two square matrices of equal size: Pearson
/// correlation of the upper triangles, with a one-tailed permutation
/// p-value (permuting rows and columns of the second matrix together).
/// Undefined cells are excluded pairwise. `None` when the matrices
/// differ in size or fewer than three defined pairs remain.
pub fn mantel(
    a: &CorrMatrix,
    b: &CorrMatrix,
    permutations: usize,
    seed: u64,
) -> Option<MantelResult> {
    let n = a.size();
    if n != b.size() || n < 3 {
        return None;
    }
    let triangle = |m: &CorrMatrix, perm: &[usize]| -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(m.cells[perm[i]][perm[j]]);
            }
        }
        out
    };
    let identity: Vec<usize> = (0..n).collect();
    let base_a = triangle(a, &identity);

    let correlate = |b_cells: &[Option<f64>]| -> Option<(f64, usize)> {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (&x, &y) in base_a.iter().zip(b_cells) {
            if let (Some(x), Some(y)) = (x, y) {
                xs.push(x);
                ys.push(y);
            }
        }
        if xs.len() < 3 {
            return None;
        }
        pearson(&xs, &ys).map(|r| (r, xs.len()))
    };

    let (r_obs, pairs_used) = correlate(&triangle(b, &identity))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = identity;
    let mut at_least_as_large = 0usize;
    for _ in 0..permutations {
        perm.shuffle(&mut rng);
        if let Some((r_perm, _)) = correlate(&triangle(b, &perm)) {
            if r_perm >= r_obs {
                at_least_as_large += 1;
            }
        }
    }
    Some(MantelResult {
        r: r_obs,
        p_value: (1 + at_least_as_large) as f64 / (1 + permutations) as f64,
        permutations,
        seed,
        pairs_used,
    })
}

/// CDF of the noncentral chi-square distribution, evaluated as a
/// Poisson-weighted mixture of central chi-square CDFs. The series is
/// summed outward from the Poisson mode so large noncentralities
/// converge in O(sqrt(lambda)) terms.
pub fn noncentral_chi2_cdf(x: f64, df: u64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df as f64;
    if lambda <= 0.0 {
        return gamma_lr(k / 2.0, x / 2.0);
    }
    let h = lambda / 2.0;
    let j0 = h.floor() as u64;
    let w0 = (-h + j0 as f64 * h.ln() - ln_gamma(j0 as f64 + 1.0)).exp();
    let term = |j: u64| gamma_lr((k + 2.0 * j as f64) / 2.0, x / 2.0);

    let mut total = w0 * term(j0);
    // Upward from the mode: weights decrease monotonically.
    let mut w = w0;
    let mut j = j0;
    while w > 1e-18 && j < j0 + 1_000_000 {
        j += 1;
        w *= h / j as f64;
        total += w * term(j);
    }
    // Downward from the mode.
    let mut w = w0;
    let mut j = j0;
    while j > 0 && w > 1e-18 {
        w *= j as f64 / h;
        j -= 1;
        total += w * term(j);
    }
    total.min(1.0)
}

/// Power of the chi-square goodness-of-fit / independence test for
/// effect size `w` at sample size `n`. `None` for invalid parameters.
pub fn chi_square_power(w: f64, n: f64, alpha: f64, df: u64) -> Option<f64> {
    // `>` comparisons reject NaN inputs along with out-of-range ones.
    let valid = w > 0.0 && n > 0.0 && alpha > 0.0 && alpha < 1.0 && df > 0;
    if !valid {
        return None;
    }
    let critical = ChiSquared::new(df as f64).ok()?.inverse_cdf(1.0 - alpha);
    Some(1.0 - noncentral_chi2_cdf(critical, df, n * w * w))
}

/// Smallest integer sample size whose chi-square test power reaches
/// `target_power`. `None` for invalid parameters.
pub fn sample_size_chi_square(
    w: f64,
    alpha: f64,
    target_power: f64,
    df: u64,
) -> Option<u64> {
    if !(target_power > 0.0 && target_power < 1.0) {
        return None;
    }
    let power_at = |n: u64| chi_square_power(w, n as f64, alpha, df);
    power_at(1)?;

    let mut hi = 1u64;
    while power_at(hi)? < target_power {
        if hi > 1 << 40 {
            return None;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if power_at(mid)? >= target_power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
