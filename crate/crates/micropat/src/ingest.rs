//! Corpus ingestion: project discovery, import extraction and resolution,
//! and pragma-based processing order.
//!
//! A corpus root contains one project per immediate subdirectory; each
//! project is the unit of failure. Name resolution never crosses project
//! boundaries.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::version::{combine_pragmas, ProjectPragma};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read corpus root {path}: {source}")]
    RootUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed remap rule at line {line}: {text:?}")]
    BadRemapRule { line: usize, text: String },
    #[error("cannot read remap file {path}: {source}")]
    RemapUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// `prefix=target`: imports starting with `prefix` map into the
/// project-relative directory `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemapRule {
    pub prefix: String,
    pub target: String,
}

/// Parse remap rules, one per line; `#` comments and blank lines are
/// skipped.
pub fn parse_remap_rules(text: &str) -> Result<Vec<RemapRule>, IngestError> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (prefix, target) = line
            .split_once('=')
            .ok_or_else(|| IngestError::BadRemapRule { line: i + 1, text: line.to_string() })?;
        if prefix.is_empty() {
            return Err(IngestError::BadRemapRule { line: i + 1, text: line.to_string() });
        }
        rules.push(RemapRule { prefix: prefix.to_string(), target: target.to_string() });
    }
    Ok(rules)
}

/// Load and parse a remap file.
pub fn load_remap_file(path: &Path) -> Result<Vec<RemapRule>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::RemapUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_remap_rules(&text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportRef {
    /// The import string as written.
    pub raw: String,
    /// Project-relative path of the resolved file, when resolution
    /// succeeded.
    pub resolved: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub abs_path: PathBuf,
    /// Path relative to the corpus root, forward slashes.
    pub corpus_rel: String,
    /// Path relative to the project root, forward slashes.
    pub project_rel: String,
    pub content: String,
    /// Every `pragma solidity` directive in the file, in order.
    pub pragma_texts: Vec<String>,
    pub imports: Vec<ImportRef>,
}

impl SourceFile {
    /// The pragma shown for this file's entities (first directive).
    pub fn pragma_display(&self) -> &str {
        self.pragma_texts.first().map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectStatus {
    Parsed,
    Failed { reason: String },
}

impl ProjectStatus {
    pub fn is_parsed(&self) -> bool {
        matches!(self, ProjectStatus::Parsed)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectRecord {
    pub project_id: String,
    pub root: PathBuf,
    pub files: Vec<SourceFile>,
    pub status: ProjectStatus,
    pub pragma: ProjectPragma,
}

impl ProjectRecord {
    fn fail(&mut self, reason: String) {
        if self.status.is_parsed() {
            self.status = ProjectStatus::Failed { reason };
        }
    }
}

/// Discover the projects under `root`: every immediate subdirectory
/// holding at least one `.sol` file (recursively). Files are read up
/// front; unreadable projects are marked failed, unreadable roots are an
/// error. Projects come back sorted by id, files by path.
pub fn discover_projects(root: &Path) -> Result<Vec<ProjectRecord>, IngestError> {
    let entries = fs::read_dir(root).map_err(|source| IngestError::RootUnreadable {
        path: root.to_path_buf(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();

    let mut projects = Vec::new();
    for dir in dirs {
        let project_id = match dir.file_name().and_then(|n| n.to_str()) {
            Some(name) => name.to_string(),
            None => continue,
        };
        let mut record = ProjectRecord {
            project_id: project_id.clone(),
            root: dir.clone(),
            files: Vec::new(),
            status: ProjectStatus::Parsed,
            pragma: ProjectPragma::Unconstrained,
        };

        let mut sol_paths: Vec<PathBuf> = Vec::new();
        for entry in walkdir::WalkDir::new(&dir).sort_by_file_name() {
            match entry {
                Ok(e) => {
                    if e.file_type().is_file()
                        && e.path().extension().is_some_and(|x| x == "sol")
                    {
                        sol_paths.push(e.into_path());
                    }
                }
                Err(err) => {
                    record.fail(format!("unreadable directory: {err}"));
                }
            }
        }
        sol_paths.sort();
        if sol_paths.is_empty() && record.status.is_parsed() {
            // Not a project: no Solidity sources at all.
            continue;
        }

        for path in sol_paths {
            let content = match fs::read(&path) {
                Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
                Err(err) => {
                    record.fail(format!("unreadable file {}: {err}", path.display()));
                    continue;
                }
            };
            let (pragma_texts, raw_imports) = scan_directives(&content);
            let corpus_rel = rel_string(&path, root);
            let project_rel = rel_string(&path, &dir);
            record.files.push(SourceFile {
                abs_path: path,
                corpus_rel,
                project_rel,
                content,
                pragma_texts,
                imports: raw_imports
                    .into_iter()
                    .map(|raw| ImportRef { raw, resolved: None })
                    .collect(),
            });
        }

        record.pragma = combine_pragmas(
            record
                .files
                .iter()
                .flat_map(|f| f.pragma_texts.iter())
                .map(String::as_str),
        );
        if matches!(record.pragma, ProjectPragma::Conflict { .. }) {
            record.fail("pragma conflict".to_string());
        }
        projects.push(record);
    }
    Ok(projects)
}

fn rel_string(path: &Path, base: &Path) -> String {
    let rel = path.strip_prefix(base).unwrap_or(path);
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    parts.join("/")
}

/// Resolve every import of every file in the project. Order per import:
/// relative to the importing file, then the longest matching remap prefix,
/// then project-root-relative — each checked lexically against the
/// project's file set. Any unresolved import fails the project (the run
/// continues with other projects). Idempotent.
pub fn resolve_imports(project: &mut ProjectRecord, remaps: &[RemapRule]) {
    let files: HashSet<String> =
        project.files.iter().map(|f| f.project_rel.clone()).collect();
    let mut failure: Option<String> = None;
    for file in &mut project.files {
        let dir = match file.project_rel.rfind('/') {
            Some(i) => &file.project_rel[..i],
            None => "",
        };
        for import in &mut file.imports {
            import.resolved = resolve_one(&import.raw, dir, remaps, &files);
            if import.resolved.is_none() && failure.is_none() {
                failure = Some(format!("unresolved import: {}", import.raw));
            }
        }
    }
    if let Some(reason) = failure {
        project.fail(reason);
    }
}

fn resolve_one(
    raw: &str,
    importing_dir: &str,
    remaps: &[RemapRule],
    files: &HashSet<String>,
) -> Option<String> {
    let candidate = if importing_dir.is_empty() {
        normalize_path(raw)
    } else {
        normalize_path(&format!("{importing_dir}/{raw}"))
    };
    if let Some(p) = candidate {
        if files.contains(&p) {
            return Some(p);
        }
    }
    if let Some(rule) = remaps
        .iter()
        .filter(|r| raw.starts_with(r.prefix.as_str()))
        .max_by_key(|r| r.prefix.len())
    {
        let mapped = format!("{}{}", rule.target, &raw[rule.prefix.len()..]);
        if let Some(p) = normalize_path(&mapped) {
            if files.contains(&p) {
                return Some(p);
            }
        }
    }
    if let Some(p) = normalize_path(raw) {
        if files.contains(&p) {
            return Some(p);
        }
    }
    None
}

/// Lexically resolve `.` and `..` segments; `None` when the path escapes
/// its root.
fn normalize_path(path: &str) -> Option<String> {
    let mut stack: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                stack.pop()?;
            }
            s => stack.push(s),
        }
    }
    Some(stack.join("/"))
}

/// Deterministic processing order: ascending minimum pragma version,
/// unconstrained (and failed) projects last, ties broken by project id.
pub fn order_by_pragma(projects: &mut [ProjectRecord]) {
    projects.sort_by(|a, b| {
        let ka = a.pragma.min_version();
        let kb = b.pragma.min_version();
        match (ka, kb) {
            (Some(va), Some(vb)) => va.cmp(vb).then_with(|| a.project_id.cmp(&b.project_id)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.project_id.cmp(&b.project_id),
        }
    });
}

/// Extract `pragma solidity` texts and import strings, skipping comments
/// and string contents.
fn scan_directives(content: &str) -> (Vec<String>, Vec<String>) {
    let (clean, strings) = blank_comments_and_strings(content);
    let bytes = clean.as_bytes();
    let mut pragmas = Vec::new();
    let mut imports = Vec::new();
    let mut i = 0;

    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'$';
    let word_at = |at: usize, word: &str| -> bool {
        let end = at + word.len();
        if end > bytes.len() || &clean[at..end] != word {
            return false;
        }
        let before_ok = at == 0 || !is_ident(bytes[at - 1]);
        let after_ok = end == bytes.len() || !is_ident(bytes[end]);
        before_ok && after_ok
    };
    let skip_ws = |mut at: usize| {
        while at < bytes.len() && bytes[at].is_ascii_whitespace() {
            at += 1;
        }
        at
    };
    let string_starting = |at: usize| -> Option<&(usize, String)> {
        strings.iter().find(|(start, _)| *start == at)
    };

    while i < bytes.len() {
        if word_at(i, "pragma") {
            let mut j = skip_ws(i + "pragma".len());
            if word_at(j, "solidity") {
                j = skip_ws(j + "solidity".len());
                let start = j;
                while j < bytes.len() && bytes[j] != b';' {
                    j += 1;
                }
                pragmas.push(clean[start..j].trim().to_string());
            }
            i = j + 1;
            continue;
        }
        if word_at(i, "import") {
            let mut j = skip_ws(i + "import".len());
            if j < bytes.len() && (bytes[j] == b'"' || bytes[j] == b'\'') {
                if let Some((_, s)) = string_starting(j) {
                    imports.push(s.clone());
                }
            } else if j < bytes.len() && (bytes[j] == b'{' || bytes[j] == b'*') {
                // `import {A, B} from "..."` / `import * as NS from "..."`:
                // scan ahead for the `from` keyword, then take its string.
                while j < bytes.len() && !word_at(j, "from") && bytes[j] != b';' {
                    j += 1;
                }
                if word_at(j, "from") {
                    j = skip_ws(j + "from".len());
                    if let Some((_, s)) = string_starting(j) {
                        imports.push(s.clone());
                    }
                }
            }
            while j < bytes.len() && bytes[j] != b';' {
                j += 1;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    (pragmas, imports)
}

/// Copy `content` with comments and string interiors blanked to spaces
/// (quotes kept), returning the blanked text plus each string literal's
/// start offset and value.
fn blank_comments_and_strings(content: &str) -> (String, Vec<(usize, String)>) {
    #[derive(PartialEq)]
    enum State {
        Normal,
        Line,
        Block,
        Str(char),
    }
    let mut out = String::with_capacity(content.len());
    let mut strings: Vec<(usize, String)> = Vec::new();
    let mut state = State::Normal;
    let mut current = String::new();
    let mut start = 0usize;
    let mut escaped = false;
    let mut chars = content.char_indices().peekable();

    while let Some((i, c)) = chars.next() {
        match state {
            State::Normal => match c {
                '/' if chars.peek().map(|&(_, n)| n) == Some('/') => {
                    state = State::Line;
                    out.push(' ');
                }
                '/' if chars.peek().map(|&(_, n)| n) == Some('*') => {
                    state = State::Block;
                    out.push(' ');
                }
                '"' | '\'' => {
                    state = State::Str(c);
                    start = i;
                    current.clear();
                    escaped = false;
                    out.push(c);
                }
                _ => out.push(c),
            },
            State::Line => {
                if c == '\n' {
                    state = State::Normal;
                    out.push('\n');
                } else {
                    out.push(' ');
                }
            }
            State::Block => {
                if c == '*' && chars.peek().map(|&(_, n)| n) == Some('/') {
                    chars.next();
                    out.push_str("  ");
                    state = State::Normal;
                } else {
                    out.push(if c == '\n' { '\n' } else { ' ' });
                }
            }
            State::Str(quote) => {
                if escaped {
                    escaped = false;
                    current.push(c);
                    out.push(' ');
                } else if c == '\\' {
                    escaped = true;
                    out.push(' ');
                } else if c == quote {
                    strings.push((start, current.clone()));
                    state = State::Normal;
                    out.push(c);
                } else {
                    current.push(c);
                    out.push(if c == '\n' { '\n' } else { ' ' });
                }
            }
        }
    }
    (out, strings)
}
