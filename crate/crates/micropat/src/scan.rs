//! The end-to-end corpus pipeline: discover projects, resolve imports,
//! parse, flatten inheritance, and run every detector.

use std::path::Path;

use rayon::prelude::*;

use crate::frontend::parse_project;
use crate::ingest::{discover_projects, resolve_imports, order_by_pragma, IngestError,
    ProjectRecord, ProjectStatus, RemapRule};
use crate::model::flatten;
use crate::patterns::{detect_all, FlattenOutcome, PatternMatrix};

/// Result of scanning one corpus: the per-project ingest records
/// (including failures) and the pattern matrix over the entities of
/// every successfully parsed project.
#[derive(Debug)]
pub struct ScanReport {
    pub projects: Vec<ProjectRecord>,
    pub matrix: PatternMatrix,
}

/// Scan the corpus rooted at `root`. Projects that fail import
/// resolution or parsing are marked failed and contribute no matrix
/// rows; entities that parse but cannot be flattened (for example an
/// inheritance cycle) appear as skipped rows.
pub fn scan_corpus(
    label: &str,
    root: &Path,
    remaps: &[RemapRule],
) -> Result<ScanReport, IngestError> {
    let mut projects = discover_projects(root)?;
    projects.par_iter_mut().for_each(|p| resolve_imports(p, remaps));
    order_by_pragma(&mut projects);

    let parse_results: Vec<_> = projects
        .par_iter()
        .map(|p| p.status.is_parsed().then(|| parse_project(p)))
        .collect();

    let mut outcomes: Vec<FlattenOutcome> = Vec::new();
    for (project, result) in projects.iter_mut().zip(parse_results) {
        let universe = match result {
            None => continue,
            Some(Err(err)) => {
                project.status = ProjectStatus::Failed { reason: err.to_string() };
                continue;
            }
            Some(Ok(universe)) => universe,
        };
        outcomes.par_extend(universe.entities().par_iter().map(|entity| {
            match flatten(entity, &universe) {
                Ok(flat) => FlattenOutcome::Flattened(Box::new(flat)),
                Err(err) => FlattenOutcome::Skipped {
                    project_id: entity.project_id.clone(),
                    name: entity.name.clone(),
                    file_path: entity.file_path.clone(),
                    compiler_version: entity.compiler_version.clone(),
                    kind: entity.kind,
                    reason: err.to_string(),
                },
            }
        }));
    }

    Ok(ScanReport { projects, matrix: detect_all(label, &outcomes) })
}
