//! Corpus metrics over pattern matrices: per-pattern frequency, coverage,
//! and prevalence; per-entity pattern counts; and cross-corpus coverage
//! aggregates.

use crate::catalog::{PatternId, ALL_PATTERNS};
use crate::patterns::PatternMatrix;

/// Frequency, coverage, and prevalence of one pattern in one corpus.
/// Percentages are unrounded; `None` marks an undefined value (empty
/// eligible set, or no matches at all for prevalence).
#[derive(Debug, Clone, PartialEq)]
pub struct PatternStats {
    pub pattern: PatternId,
    /// Analyzed entities of a kind the pattern is defined over.
    pub eligible: u64,
    /// Eligible entities that match.
    pub frequency: u64,
    pub coverage_pct: Option<f64>,
    pub prevalence_pct: Option<f64>,
}

/// Mean, population standard deviation, and median of the per-entity
/// matched-pattern counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PerEntityStats {
    pub mean: f64,
    pub std_dev: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMetrics {
    pub label: String,
    pub analyzed_entities: u64,
    pub skipped_entities: u64,
    /// One entry per pattern, in catalog order.
    pub per_pattern: Vec<PatternStats>,
    pub per_entity: Option<PerEntityStats>,
    /// Share of analyzed entities matching at least one pattern.
    pub any_pattern_pct: Option<f64>,
}

impl CorpusMetrics {
    pub fn pattern(&self, pattern: PatternId) -> &PatternStats {
        &self.per_pattern[pattern.index()]
    }
}

/// Compute all corpus metrics from a matrix. Skipped rows are excluded
/// from every denominator.
pub fn corpus_metrics(matrix: &PatternMatrix) -> CorpusMetrics {
    let mut eligible = [0u64; ALL_PATTERNS.len()];
    let mut frequency = [0u64; ALL_PATTERNS.len()];
    let mut counts: Vec<u64> = Vec::new();

    for row in matrix.analyzed() {
        let flags = row.flags.as_ref().unwrap();
        counts.push(flags.iter().filter(|&&f| f).count() as u64);
        for p in ALL_PATTERNS {
            if p.eligible(row.kind) {
                eligible[p.index()] += 1;
                if flags[p.index()] {
                    frequency[p.index()] += 1;
                }
            }
        }
    }

    let total_matches: u64 = frequency.iter().sum();
    let per_pattern = ALL_PATTERNS
        .iter()
        .map(|&p| {
            let i = p.index();
            PatternStats {
                pattern: p,
                eligible: eligible[i],
                frequency: frequency[i],
                coverage_pct: coverage_pct(frequency[i], eligible[i]),
                prevalence_pct: (total_matches > 0)
                    .then(|| frequency[i] as f64 / total_matches as f64 * 100.0),
            }
        })
        .collect();

    let count_values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let per_entity = (!counts.is_empty()).then(|| PerEntityStats {
        mean: mean(&count_values),
        std_dev: population_std_dev(&count_values),
        median: median(&count_values),
    });
    let any_pattern_pct = (!counts.is_empty()).then(|| {
        counts.iter().filter(|&&c| c > 0).count() as f64 / counts.len() as f64 * 100.0
    });

    CorpusMetrics {
        label: matrix.label.clone(),
        analyzed_entities: counts.len() as u64,
        skipped_entities: matrix.skipped_count() as u64,
        per_pattern,
        per_entity,
        any_pattern_pct,
    }
}

/// Coverage percentage; undefined when nothing is eligible.
pub fn coverage_pct(frequency: u64, eligible: u64) -> Option<f64> {
    (eligible > 0).then(|| frequency as f64 / eligible as f64 * 100.0)
}

/// Cross-corpus aggregate of one pattern's coverage values.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageAggregate {
    pub pattern: PatternId,
    /// Number of corpora where coverage was defined.
    pub defined_in: usize,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    pub median: Option<f64>,
}

/// Aggregate each pattern's coverage across corpora, over the corpora
/// where it is defined.
pub fn aggregate_coverage(metrics: &[CorpusMetrics]) -> Vec<CoverageAggregate> {
    ALL_PATTERNS
        .iter()
        .map(|&p| {
            let values: Vec<f64> = metrics
                .iter()
                .filter_map(|m| m.pattern(p).coverage_pct)
                .collect();
            CoverageAggregate {
                pattern: p,
                defined_in: values.len(),
                mean: (!values.is_empty()).then(|| mean(&values)),
                std_dev: (!values.is_empty()).then(|| population_std_dev(&values)),
                median: (!values.is_empty()).then(|| median(&values)),
            }
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divisor n).
pub fn population_std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Median with the midpoint rule for even-length inputs.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Round half-up to two decimals (display convention for percentages).
pub fn round2(x: f64) -> f64 {
    ((x * 100.0) + 0.5).floor() / 100.0
}

/// Format a possibly-undefined percentage with two decimals.
pub fn fmt_pct(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", round2(v)),
        None => "n/a".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntityKind;
    use crate::patterns::MatrixRow;

    fn row(name: &str, kind: EntityKind, on: &[PatternId]) -> MatrixRow {
        let mut flags = [false; ALL_PATTERNS.len()];
        for p in on {
            flags[p.index()] = true;
        }
        MatrixRow {
            project_id: "p".into(),
            name: name.into(),
            file_path: format!("p/{name}.sol"),
            compiler_version: "^0.8.0".into(),
            kind,
            flags: Some(flags),
        }
    }

    fn skipped(name: &str) -> MatrixRow {
        MatrixRow {
            project_id: "p".into(),
            name: name.into(),
            file_path: format!("p/{name}.sol"),
            compiler_version: String::new(),
            kind: EntityKind::Contract,
            flags: None,
        }
    }

    #[test]
    fn frequencies_coverage_and_prevalence_add_up() {
        let matrix = PatternMatrix::new(
            "t",
            vec![
                row("A", EntityKind::Contract, &[PatternId::Payable, PatternId::Muted]),
                row("B", EntityKind::Contract, &[PatternId::Payable]),
                row("C", EntityKind::Contract, &[]),
                row("I", EntityKind::Interface, &[PatternId::Reader]),
            ],
        );
        let m = corpus_metrics(&matrix);
        assert_eq!(m.analyzed_entities, 4);

        let payable = m.pattern(PatternId::Payable);
        // Interfaces are not eligible for Payable.
        assert_eq!((payable.eligible, payable.frequency), (3, 2));
        assert!((payable.coverage_pct.unwrap() - 200.0 / 3.0).abs() < 1e-12);

        let reader = m.pattern(PatternId::Reader);
        assert_eq!((reader.eligible, reader.frequency), (4, 1));

        // 4 total matches: Payable twice, Muted once, Reader once.
        assert!((payable.prevalence_pct.unwrap() - 50.0).abs() < 1e-12);
        let sum: f64 = m.per_pattern.iter().filter_map(|s| s.prevalence_pct).sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn skipped_rows_stay_out_of_denominators() {
        let matrix = PatternMatrix::new(
            "t",
            vec![row("A", EntityKind::Contract, &[PatternId::Payable]), skipped("Broken")],
        );
        let m = corpus_metrics(&matrix);
        assert_eq!(m.analyzed_entities, 1);
        assert_eq!(m.skipped_entities, 1);
        assert_eq!(m.pattern(PatternId::Payable).eligible, 1);
        assert_eq!(m.pattern(PatternId::Payable).coverage_pct, Some(100.0));
    }

    #[test]
    fn zero_eligible_is_undefined_not_zero() {
        let matrix =
            PatternMatrix::new("t", vec![row("I", EntityKind::Interface, &[PatternId::Reader])]);
        let m = corpus_metrics(&matrix);
        // No contracts: contract-only patterns have no denominator.
        assert_eq!(m.pattern(PatternId::Payable).coverage_pct, None);
        assert_eq!(fmt_pct(m.pattern(PatternId::Payable).coverage_pct), "n/a");
    }

    #[test]
    fn empty_matrix_yields_undefined_summaries() {
        let m = corpus_metrics(&PatternMatrix::new("t", vec![]));
        assert_eq!(m.analyzed_entities, 0);
        assert!(m.per_entity.is_none());
        assert!(m.any_pattern_pct.is_none());
        assert!(m.per_pattern.iter().all(|s| s.coverage_pct.is_none()));
        assert!(m.per_pattern.iter().all(|s| s.prevalence_pct.is_none()));
    }

    #[test]
    fn per_entity_counts_use_population_statistics() {
        let matrix = PatternMatrix::new(
            "t",
            vec![
                row("A", EntityKind::Contract, &[PatternId::Payable, PatternId::Muted]),
                row("B", EntityKind::Contract, &[PatternId::Payable]),
                row("C", EntityKind::Contract, &[]),
            ],
        );
        let m = corpus_metrics(&matrix);
        let pe = m.per_entity.unwrap();
        assert!((pe.mean - 1.0).abs() < 1e-12);
        assert!((pe.median - 1.0).abs() < 1e-12);
        // Population sigma of [2, 1, 0] is sqrt(2/3).
        assert!((pe.std_dev - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((m.any_pattern_pct.unwrap() - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coverage_aggregates_match_hand_computation() {
        // Five per-corpus coverages; mean/sigma/median computed by hand.
        let values = [2.21, 2.25, 2.25, 1.56, 2.46];
        assert_eq!(round2(mean(&values)), 2.15);
        assert_eq!(round2(population_std_dev(&values)), 0.31);
        assert_eq!(round2(median(&values)), 2.25);

        let wide = [80.47, 91.67, 71.46, 92.64, 86.85];
        assert_eq!(round2(mean(&wide)), 84.62);
        assert_eq!(round2(population_std_dev(&wide)), 7.87);
        assert_eq!(round2(median(&wide)), 86.85);
    }

    #[test]
    fn median_uses_the_midpoint_rule() {
        assert_eq!(median(&[1.0, 3.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0, 4.0, 8.0]), 3.0);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn rounding_is_half_up() {
        // 0.125 is exact in binary, so this pins the half-up direction.
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(2.145), 2.15);
        assert_eq!(round2(1.334999), 1.33);
        assert_eq!(round2(13.429299), 13.43);
        assert_eq!(fmt_pct(Some(1.328)), "1.33");
    }

    #[test]
    fn aggregate_skips_undefined_corpora() {
        let with_interfaces =
            PatternMatrix::new("a", vec![row("I", EntityKind::Interface, &[])]);
        let with_contracts = PatternMatrix::new(
            "b",
            vec![row("C", EntityKind::Contract, &[PatternId::Payable])],
        );
        let metrics = vec![corpus_metrics(&with_interfaces), corpus_metrics(&with_contracts)];
        let agg = aggregate_coverage(&metrics);
        let payable = &agg[PatternId::Payable.index()];
        assert_eq!(payable.defined_in, 1);
        assert_eq!(payable.mean, Some(100.0));
    }
}
