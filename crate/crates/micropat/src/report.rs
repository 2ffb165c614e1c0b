//! Matrix serialization (CSV and JSON) and plain-text rendering of
//! metrics, statistics, and ingest summaries.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{ALL_PATTERNS, PATTERN_COUNT};
use crate::ingest::{ProjectRecord, ProjectStatus};
use crate::metrics::{fmt_pct, CorpusMetrics, CoverageAggregate};
use crate::model::EntityKind;
use crate::patterns::{MatrixRow, PatternMatrix};
use crate::stats::{classify_strength, CorrMatrix, MantelResult, PairwiseChi2};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unexpected csv header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: unknown entity kind `{value}`")]
    BadKind { row: usize, value: String },
    #[error("row {row}: pattern cell must be empty, `0`, or `1`, found `{value}`")]
    BadFlag { row: usize, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    BadShape { row: usize, expected: usize, found: usize },
}

const FIXED_COLUMNS: [&str; 4] = ["name", "file_path", "compiler_version", "kind"];

fn csv_header() -> Vec<&'static str> {
    FIXED_COLUMNS
        .into_iter()
        .chain(ALL_PATTERNS.iter().map(|p| p.display_name()))
        .collect()
}

/// Write a matrix as CSV. Pattern cells are `1`/`0` for analyzed rows
/// and empty for skipped ones; lines end in `\n`.
pub fn write_matrix_csv<W: io::Write>(matrix: &PatternMatrix, writer: W) -> Result<(), ReportError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(csv_header())?;
    for row in &matrix.rows {
        let mut record = vec![
            row.name.clone(),
            row.file_path.clone(),
            row.compiler_version.clone(),
            row.kind.label().to_string(),
        ];
        match &row.flags {
            Some(flags) => record.extend(flags.iter().map(|&f| String::from(if f { "1" } else { "0" }))),
            None => record.extend(std::iter::repeat_n(String::new(), PATTERN_COUNT)),
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a matrix back from CSV. The project id is recovered from the
/// first component of each file path.
pub fn read_matrix_csv<R: io::Read>(label: &str, reader: R) -> Result<PatternMatrix, ReportError> {
    let mut input = csv::Reader::from_reader(reader);
    let found = input.headers()?.iter().collect::<Vec<_>>().join(",");
    let expected = csv_header().join(",");
    if found != expected {
        return Err(ReportError::Header { expected, found });
    }

    let mut rows = Vec::new();
    for (i, record) in input.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, after the header line
        if record.len() != FIXED_COLUMNS.len() + PATTERN_COUNT {
            return Err(ReportError::BadShape {
                row,
                expected: FIXED_COLUMNS.len() + PATTERN_COUNT,
                found: record.len(),
            });
        }
        let kind = EntityKind::parse_label(&record[3]).ok_or_else(|| ReportError::BadKind {
            row,
            value: record[3].to_string(),
        })?;
        let cells = &record.iter().skip(FIXED_COLUMNS.len()).collect::<Vec<_>>();
        let flags = if cells.iter().all(|c| c.is_empty()) {
            None
        } else {
            let mut flags = [false; PATTERN_COUNT];
            for (j, cell) in cells.iter().enumerate() {
                flags[j] = match *cell {
                    "1" => true,
                    "0" => false,
                    other => {
                        return Err(ReportError::BadFlag { row, value: other.to_string() })
                    }
                };
            }
            Some(flags)
        };
        let file_path = record[1].to_string();
        rows.push(MatrixRow {
            project_id: file_path.split('/').next().unwrap_or_default().to_string(),
            name: record[0].to_string(),
            file_path,
            compiler_version: record[2].to_string(),
            kind,
            flags,
        });
    }
    Ok(PatternMatrix::new(label, rows))
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    label: String,
    patterns: Vec<String>,
    rows: Vec<JsonRow>,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    project_id: String,
    name: String,
    file_path: String,
    compiler_version: String,
    kind: String,
    /// `null` for rows that could not be analyzed.
    flags: Option<Vec<bool>>,
}

/// Write a matrix as JSON with native booleans; skipped rows carry
/// `null` flags.
pub fn write_matrix_json<W: io::Write>(matrix: &PatternMatrix, writer: W) -> Result<(), ReportError> {
    let doc = JsonMatrix {
        label: matrix.label.clone(),
        patterns: ALL_PATTERNS.iter().map(|p| p.display_name().to_string()).collect(),
        rows: matrix
            .rows
            .iter()
            .map(|r| JsonRow {
                project_id: r.project_id.clone(),
                name: r.name.clone(),
                file_path: r.file_path.clone(),
                compiler_version: r.compiler_version.clone(),
                kind: r.kind.label().to_string(),
                flags: r.flags.map(|f| f.to_vec()),
            })
            .collect(),
    };
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_matrix_json<R: io::Read>(reader: R) -> Result<PatternMatrix, ReportError> {
    let doc: JsonMatrix = serde_json::from_reader(reader)?;
    let expected: Vec<String> =
        ALL_PATTERNS.iter().map(|p| p.display_name().to_string()).collect();
    if doc.patterns != expected {
        return Err(ReportError::Header {
            expected: expected.join(","),
            found: doc.patterns.join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, r) in doc.rows.into_iter().enumerate() {
        let row = i + 1;
        let kind = EntityKind::parse_label(&r.kind)
            .ok_or_else(|| ReportError::BadKind { row, value: r.kind.clone() })?;
        let flags = match r.flags {
            None => None,
            Some(v) if v.len() == PATTERN_COUNT => {
                let mut flags = [false; PATTERN_COUNT];
                flags.copy_from_slice(&v);
                Some(flags)
            }
            Some(v) => {
                return Err(ReportError::BadShape {
                    row,
                    expected: PATTERN_COUNT,
                    found: v.len(),
                })
            }
        };
        rows.push(MatrixRow {
            project_id: r.project_id,
            name: r.name,
            file_path: r.file_path,
            compiler_version: r.compiler_version,
            kind,
            flags,
        });
    }
    Ok(PatternMatrix::new(doc.label, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// Infer the format from a file extension; anything but `.json`
    /// reads as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        }
    }
}

pub fn save_matrix(matrix: &PatternMatrix, path: &Path, format: MatrixFormat) -> Result<(), ReportError> {
    let file = std::fs::File::create(path)?;
    let writer = io::BufWriter::new(file);
    match format {
        MatrixFormat::Csv => write_matrix_csv(matrix, writer),
        MatrixFormat::Json => write_matrix_json(matrix, writer),
    }
}

/// Load a matrix, inferring the format from the extension. The
/// caller's label always names the corpus, overriding any label a
/// JSON file carries (CSV files do not store one).
pub fn load_matrix(label: &str, path: &Path) -> Result<PatternMatrix, ReportError> {
    let file = std::fs::File::open(path)?;
    let reader = io::BufReader::new(file);
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => read_matrix_csv(label, reader),
        MatrixFormat::Json => {
            let mut matrix = read_matrix_json(reader)?;
            matrix.label = label.to_string();
            Ok(matrix)
        }
    }
}

const NAME_W: usize = 17;

/// Render one corpus's metrics as a plain-text table.
pub fn render_metrics(m: &CorpusMetrics) -> String {
    let mut out = String::new();
    out.push_str(&format!("corpus: {}\n", m.label));
    out.push_str(&format!(
        "entities analyzed: {} (skipped: {})\n",
        m.analyzed_entities, m.skipped_entities
    ));
    out.push_str(&format!(
        "matching at least one pattern: {}%\n",
        fmt_pct(m.any_pattern_pct)
    ));
    if let Some(pe) = &m.per_entity {
        out.push_str(&format!(
            "patterns per entity: mean {:.2}, sd {:.2}, median {:.2}\n",
            pe.mean, pe.std_dev, pe.median
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<NAME_W$} {:<12} {:>9} {:>9} {:>9} {:>11}\n",
        "pattern", "category", "eligible", "matches", "coverage", "prevalence"
    ));
    for s in &m.per_pattern {
        out.push_str(&format!(
            "{:<NAME_W$} {:<12} {:>9} {:>9} {:>8}% {:>10}%\n",
            s.pattern.display_name(),
            s.pattern.category().label(),
            s.eligible,
            s.frequency,
            fmt_pct(s.coverage_pct),
            fmt_pct(s.prevalence_pct),
        ));
    }
    out
}

/// Render the cross-corpus coverage aggregate table.
pub fn render_aggregate(aggregates: &[CoverageAggregate], corpora: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("coverage across {corpora} corpora\n"));
    out.push_str(&format!(
        "{:<NAME_W$} {:>9} {:>9} {:>9}\n",
        "pattern", "mean", "sd", "median"
    ));
    for a in aggregates {
        out.push_str(&format!(
            "{:<NAME_W$} {:>9} {:>9} {:>9}\n",
            a.pattern.display_name(),
            fmt_pct(a.mean),
            fmt_pct(a.std_dev),
            fmt_pct(a.median),
        ));
    }
    out
}

/// Render a correlation matrix plus the associated pairs at or above
/// the moderate threshold, strongest first.
pub fn render_corr_matrix(m: &CorrMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<NAME_W$}", ""));
    for i in 1..=m.size() {
        out.push_str(&format!(" {i:>6}"));
    }
    out.push('\n');
    for (i, label) in m.labels.iter().enumerate() {
        out.push_str(&format!("{:>2} {:<NAME_W$}", i + 1, label));
        for j in 0..m.size() {
            match m.cells[i][j] {
                Some(v) => out.push_str(&format!(" {v:>6.2}")),
                None => out.push_str(&format!(" {:>6}", "n/a")),
            }
        }
        out.push('\n');
    }

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..m.size() {
        for j in i + 1..m.size() {
            if let Some(v) = m.cells[i][j] {
                if v.abs() >= 0.15 {
                    pairs.push((v, i, j));
                }
            }
        }
    }
    pairs.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
    if !pairs.is_empty() {
        out.push_str("\nassociated pairs (|phi| >= 0.15):\n");
        for (v, i, j) in pairs {
            out.push_str(&format!(
                "  {} & {}: {:.2} ({})\n",
                m.labels[i],
                m.labels[j],
                v,
                classify_strength(v)
            ));
        }
    }
    out
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.prec$}"))
}

fn fmt_opt_flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

/// Render the pairwise corpus chi-square comparisons.
pub fn render_pairwise_chi2(tests: &[PairwiseChi2]) -> String {
    let mut out = String::new();
    if let Some(first) = tests.first() {
        out.push_str(&format!(
            "pairwise coverage tests (alpha = {:.4} after correction)\n",
            first.result.alpha
        ));
    }
    out.push_str(&format!(
        "{:<NAME_W$} {:<23} {:>10} {:>10} {:>7} {:>12} {:>10}\n",
        "pattern", "corpora", "chi2", "p", "V", "significant", "practical"
    ));
    for t in tests {
        out.push_str(&format!(
            "{:<NAME_W$} {:<23} {:>10} {:>10} {:>7} {:>12} {:>10}\n",
            t.pattern.display_name(),
            format!("{} vs {}", t.corpus_a, t.corpus_b),
            fmt_opt(t.result.statistic, 2),
            fmt_opt(t.result.p_value.map(|p| (p * 1e4).round() / 1e4), 4),
            fmt_opt(t.result.cramers_v, 3),
            fmt_opt_flag(t.result.significant),
            fmt_opt_flag(t.result.practically_significant),
        ));
    }
    out
}

/// Render Spearman correlations between corpus coverage profiles.
pub fn render_spearman_pairs(pairs: &[(String, String, Option<f64>)]) -> String {
    let mut out = String::from("coverage profile correlation (Spearman)\n");
    for (a, b, rho) in pairs {
        out.push_str(&format!("  {a} vs {b}: rho = {}\n", fmt_opt(*rho, 4)));
    }
    out
}

pub fn render_mantel(label_a: &str, label_b: &str, r: Option<&MantelResult>) -> String {
    match r {
        Some(r) => format!(
            "mantel {a} vs {b}: r = {r:.4}, p = {p:.6} ({n} permutations, seed {seed}, {pairs} pairs)\n",
            a = label_a,
            b = label_b,
            r = r.r,
            p = r.p_value,
            n = r.permutations,
            seed = r.seed,
            pairs = r.pairs_used,
        ),
        None => format!("mantel {label_a} vs {label_b}: undefined (too few comparable pairs)\n"),
    }
}

/// Render the ingest summary: project counts, success rate, and the
/// reason each failed project was rejected.
pub fn render_ingest_summary(projects: &[ProjectRecord]) -> String {
    let total = projects.len();
    let parsed = projects.iter().filter(|p| p.status.is_parsed()).count();
    let mut out = String::new();
    out.push_str(&format!("projects discovered: {total}\n"));
    let rate = if total > 0 {
        fmt_pct(Some(parsed as f64 / total as f64 * 100.0))
    } else {
        "n/a".to_string()
    };
    out.push_str(&format!("parsed successfully: {parsed} ({rate}%)\n"));
    let failed: Vec<_> = projects.iter().filter(|p| !p.status.is_parsed()).collect();
    if !failed.is_empty() {
        out.push_str(&format!("failed: {}\n", failed.len()));
        for p in failed {
            if let ProjectStatus::Failed { reason } = &p.status {
                out.push_str(&format!("  - {}: {reason}\n", p.project_id));
            }
        }
    }
    out
}
