//! Detection of recurring Solidity micro-patterns in source corpora,
//! plus the metrics and statistics used to compare corpora: coverage
//! and prevalence tables, phi association matrices, chi-square tests,
//! Spearman and Mantel correlation, and chi-square power analysis.

pub mod catalog;
pub mod frontend;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod patterns;
pub mod report;
pub mod scan;
pub mod stats;
pub mod version;

pub use catalog::{PatternId, ALL_PATTERNS, PATTERN_COUNT};
pub use patterns::{FlattenOutcome, MatrixRow, PatternMatrix};
pub use scan::{scan_corpus, ScanReport};
