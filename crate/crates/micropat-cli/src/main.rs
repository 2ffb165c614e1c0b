use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use micropat::ingest::load_remap_file;
use micropat::metrics::{aggregate_coverage, corpus_metrics, CorpusMetrics};
use micropat::report::{
    load_matrix, render_aggregate, render_corr_matrix, render_ingest_summary, render_mantel,
    render_metrics, render_pairwise_chi2, render_spearman_pairs, save_matrix, write_matrix_csv,
    write_matrix_json, MatrixFormat,
};
use micropat::stats::{
    mantel, pairwise_corpus_tests, phi_matrix, sample_size_chi_square, spearman_coverage,
};
use micropat::{scan_corpus, PatternMatrix};

#[derive(Parser)]
#[command(name = "micropat", version, about = "Detect Solidity micro-patterns and compare corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// A `label=path` pair naming a previously written matrix file.
#[derive(Clone, Debug)]
struct CorpusArg {
    label: String,
    path: PathBuf,
}

impl FromStr for CorpusArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((label, path)) if !label.is_empty() && !path.is_empty() => {
                Ok(CorpusArg { label: label.to_string(), path: PathBuf::from(path) })
            }
            _ => Err(format!("expected `label=path`, found `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a corpus of Solidity projects and emit the pattern matrix.
    Scan {
        /// Corpus root; each immediate subdirectory is one project.
        root: PathBuf,
        /// File of `prefix=target` import remappings, one per line.
        #[arg(long)]
        remap: Option<PathBuf>,
        /// Write the matrix here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Corpus label stored in JSON output (default: root directory name).
        #[arg(long)]
        label: Option<String>,
    },
    /// Frequency, coverage, and prevalence tables for one or more matrices.
    Metrics {
        /// Matrices as `label=path` (CSV or JSON).
        #[arg(required = true)]
        corpora: Vec<CorpusArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Association and cross-corpus statistics over matrices.
    Stats {
        /// Matrices as `label=path` (CSV or JSON).
        #[arg(required = true)]
        corpora: Vec<CorpusArg>,
        /// Phi coefficient matrix per corpus.
        #[arg(long)]
        phi: bool,
        /// Pairwise chi-square coverage comparisons between corpora.
        #[arg(long)]
        chi2: bool,
        /// Spearman correlation of coverage profiles between corpora.
        #[arg(long)]
        spearman: bool,
        /// Mantel test between per-corpus phi matrices (needs --seed).
        #[arg(long)]
        mantel: bool,
        #[arg(long, default_value_t = 9999)]
        permutations: usize,
        /// RNG seed for the Mantel permutations.
        #[arg(long)]
        seed: Option<u64>,
        /// Base significance level before Bonferroni correction.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chi-square power analysis: sample size for a target power.
    Power {
        /// Effect size w.
        #[arg(long)]
        w: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Target power.
        #[arg(long)]
        power: f64,
        /// Degrees of freedom.
        #[arg(long, default_value_t = 1)]
        df: u64,
    },
}

fn usage_error(message: &str) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, message).exit()
}

/// Exit 1 for operational failures, 2 for empty or insufficient input.
enum CliError {
    Operational(anyhow::Error),
    Empty(String),
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Operational(err)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Operational(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
        Err(CliError::Empty(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Scan { root, remap, out, format, jobs, label } => {
            if jobs > 0 {
                // Ignore the error if a pool already exists (tests).
                let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
            }
            let remaps = match &remap {
                Some(path) => load_remap_file(path)
                    .with_context(|| format!("reading remap file {}", path.display()))?,
                None => Vec::new(),
            };
            let label = label.unwrap_or_else(|| {
                root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into())
            });
            let report = scan_corpus(&label, &root, &remaps)
                .with_context(|| format!("scanning {}", root.display()))
                .map_err(CliError::Operational)?;
            eprint!("{}", render_ingest_summary(&report.projects));
            let format = match format {
                Format::Csv => MatrixFormat::Csv,
                Format::Json => MatrixFormat::Json,
            };
            let write_result = match out {
                Some(path) => save_matrix(&report.matrix, &path, format)
                    .with_context(|| format!("writing {}", path.display())),
                None => {
                    let stdout = std::io::stdout().lock();
                    match format {
                        MatrixFormat::Csv => write_matrix_csv(&report.matrix, stdout),
                        MatrixFormat::Json => write_matrix_json(&report.matrix, stdout),
                    }
                    .context("writing matrix to stdout")
                }
            };
            write_result.map_err(CliError::Operational)?;
            if !report.projects.iter().any(|p| p.status.is_parsed()) {
                return Err(CliError::Empty(format!(
                    "no project under {} could be parsed",
                    root.display()
                )));
            }
            Ok(())
        }
        Command::Metrics { corpora, out } => {
            let metrics = load_metrics(&corpora)?;
            let mut text = String::new();
            for m in &metrics {
                if !text.is_empty() {
                    text.push('\n');
                }
                text.push_str(&render_metrics(m));
            }
            if metrics.len() > 1 {
                let _ = writeln!(text);
                text.push_str(&render_aggregate(&aggregate_coverage(&metrics), metrics.len()));
            }
            Ok(emit(out, &text)?)
        }
        Command::Stats {
            corpora,
            phi,
            chi2,
            spearman,
            mantel: run_mantel,
            permutations,
            seed,
            alpha,
            out,
        } => {
            // With no analysis selected, run everything but Mantel
            // (which needs an explicit seed).
            let default_all = !(phi || chi2 || spearman || run_mantel);
            let (phi, chi2, spearman) =
                (phi || default_all, chi2 || default_all, spearman || default_all);
            if run_mantel && seed.is_none() {
                usage_error("--mantel requires --seed for reproducible permutations");
            }
            if (chi2 || spearman || run_mantel) && corpora.len() < 2 {
                usage_error("cross-corpus statistics require at least two matrices");
            }

            let matrices = load_matrices(&corpora)?;
            let metrics: Vec<CorpusMetrics> = matrices.iter().map(corpus_metrics).collect();
            let mut text = String::new();

            let phis: Vec<_> = matrices.iter().map(phi_matrix).collect();
            if phi {
                for (matrix, corr) in matrices.iter().zip(&phis) {
                    let _ = writeln!(text, "phi matrix: {}", matrix.label);
                    text.push_str(&render_corr_matrix(corr));
                    text.push('\n');
                }
            }
            if chi2 {
                text.push_str(&render_pairwise_chi2(&pairwise_corpus_tests(&metrics, alpha)));
                text.push('\n');
            }
            if spearman {
                let mut pairs = Vec::new();
                for (i, a) in metrics.iter().enumerate() {
                    for b in &metrics[i + 1..] {
                        pairs.push((a.label.clone(), b.label.clone(), spearman_coverage(a, b)));
                    }
                }
                text.push_str(&render_spearman_pairs(&pairs));
                text.push('\n');
            }
            if run_mantel {
                let seed = seed.expect("checked above");
                for (i, a) in phis.iter().enumerate() {
                    for (j, b) in phis.iter().enumerate().skip(i + 1) {
                        let result = mantel(a, b, permutations, seed);
                        text.push_str(&render_mantel(
                            &matrices[i].label,
                            &matrices[j].label,
                            result.as_ref(),
                        ));
                    }
                }
            }
            Ok(emit(out, text.trim_end_matches('\n'))?)
        }
        Command::Power { w, alpha, power, df } => {
            let Some(n) = sample_size_chi_square(w, alpha, power, df) else {
                return Err(CliError::Operational(anyhow::anyhow!(
                    "power analysis needs 0 < w, 0 < alpha < 1, 0 < power < 1, df >= 1"
                )));
            };
            println!("{n}");
            Ok(())
        }
    }
}

fn load_matrices(corpora: &[CorpusArg]) -> anyhow::Result<Vec<PatternMatrix>> {
    corpora
        .iter()
        .map(|c| {
            load_matrix(&c.label, &c.path)
                .with_context(|| format!("loading {}", c.path.display()))
        })
        .collect()
}

fn load_metrics(corpora: &[CorpusArg]) -> anyhow::Result<Vec<CorpusMetrics>> {
    Ok(load_matrices(corpora)?.iter().map(corpus_metrics).collect())
}

fn emit(out: Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    let text = format!("{}\n", text.trim_end_matches('\n'));
    match out {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
