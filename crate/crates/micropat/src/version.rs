//! `pragma solidity` constraint handling: parsing the recognized operator
//! subset, combining the constraints of a project's files, and computing
//! the minimum compiler version the combination admits.

use semver::{Version, VersionReq};

/// Operators recognized in pragma text. Anything else (`~`, `||`, hyphen
/// ranges, ...) makes the whole directive unrecognized, which callers
/// treat as "no pragma".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Caret,
    Ge,
    Le,
    Gt,
    Lt,
    Eq,
    Bare,
}

/// A parsed pragma directive: the semver requirement plus the comparator
/// versions it mentions (used to enumerate minimum-version candidates).
#[derive(Debug, Clone)]
pub struct ParsedPragma {
    pub req: VersionReq,
    pub comparator_versions: Vec<(u64, u64, u64)>,
}

/// Parse the text after `pragma solidity` (without the trailing `;`).
/// Space-separated comparators are a conjunction. Returns `None` when any
/// token falls outside the recognized subset.
pub fn parse_pragma(text: &str) -> Option<ParsedPragma> {
    let mut chars = text.trim().chars().peekable();
    let mut parts: Vec<String> = Vec::new();
    let mut versions: Vec<(u64, u64, u64)> = Vec::new();

    while chars.peek().is_some() {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        let op = match c {
            '^' => {
                chars.next();
                Op::Caret
            }
            '>' => {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                    Op::Ge
                } else {
                    Op::Gt
                }
            }
            '<' => {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                    Op::Le
                } else {
                    Op::Lt
                }
            }
            '=' => {
                chars.next();
                Op::Eq
            }
            d if d.is_ascii_digit() => Op::Bare,
            _ => return None,
        };
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut nums: Vec<u64> = Vec::new();
        let mut current = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_ascii_digit() {
                current.push(c);
                chars.next();
            } else if c == '.' && !current.is_empty() && nums.len() < 2 {
                nums.push(current.parse().ok()?);
                current.clear();
                chars.next();
            } else {
                break;
            }
        }
        if current.is_empty() {
            return None;
        }
        nums.push(current.parse().ok()?);
        let written = {
            let strs: Vec<String> = nums.iter().map(u64::to_string).collect();
            strs.join(".")
        };
        versions.push((
            nums[0],
            nums.get(1).copied().unwrap_or(0),
            nums.get(2).copied().unwrap_or(0),
        ));
        parts.push(match op {
            Op::Caret => format!("^{written}"),
            Op::Ge => format!(">={written}"),
            Op::Le => format!("<={written}"),
            Op::Gt => format!(">{written}"),
            Op::Lt => format!("<{written}"),
            // Bare versions pin exactly; semver's default operator would
            // widen them to a caret range.
            Op::Eq | Op::Bare => format!("={written}"),
        });
    }

    if parts.is_empty() {
        return None;
    }
    let req = VersionReq::parse(&parts.join(", ")).ok()?;
    Some(ParsedPragma { req, comparator_versions: versions })
}

/// The smallest version satisfying every requirement, or `None` when the
/// conjunction is unsatisfiable. The minimum of an intersection of ranges
/// over the supported operators is always either a comparator version or
/// one of its patch/minor/major successors, so enumerating those (plus the
/// global floor 0.0.0) is exhaustive.
pub fn min_satisfying(
    reqs: &[&VersionReq],
    comparator_versions: &[(u64, u64, u64)],
) -> Option<Version> {
    let mut candidates: Vec<(u64, u64, u64)> = vec![(0, 0, 0)];
    for &(maj, min, pat) in comparator_versions {
        candidates.push((maj, min, pat));
        candidates.push((maj, min, pat + 1));
        candidates.push((maj, min + 1, 0));
        candidates.push((maj + 1, 0, 0));
    }
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .map(|(maj, min, pat)| Version::new(maj, min, pat))
        .find(|v| reqs.iter().all(|r| r.matches(v)))
}

/// The combined pragma status of one project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectPragma {
    /// No file declared a recognizable pragma.
    Unconstrained,
    /// The conjunction of all file pragmas, with its minimum version.
    Constrained { text: String, min_version: Version },
    /// The files declare mutually unsatisfiable constraints.
    Conflict { text: String },
}

impl ProjectPragma {
    pub fn min_version(&self) -> Option<&Version> {
        match self {
            ProjectPragma::Constrained { min_version, .. } => Some(min_version),
            _ => None,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            ProjectPragma::Unconstrained => "",
            ProjectPragma::Constrained { text, .. } | ProjectPragma::Conflict { text } => text,
        }
    }
}

/// Conjoin the pragma texts of a project's files. Unrecognized directives
/// contribute nothing.
pub fn combine_pragmas<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> ProjectPragma {
    let mut parsed: Vec<ParsedPragma> = Vec::new();
    let mut shown: Vec<String> = Vec::new();
    for text in texts {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(p) = parse_pragma(trimmed) {
            parsed.push(p);
            if !shown.iter().any(|s| s == trimmed) {
                shown.push(trimmed.to_string());
            }
        }
    }
    if parsed.is_empty() {
        return ProjectPragma::Unconstrained;
    }
    let reqs: Vec<&VersionReq> = parsed.iter().map(|p| &p.req).collect();
    let versions: Vec<(u64, u64, u64)> =
        parsed.iter().flat_map(|p| p.comparator_versions.iter().copied()).collect();
    let text = shown.join("; ");
    match min_satisfying(&reqs, &versions) {
        Some(min_version) => ProjectPragma::Constrained { text, min_version },
        None => ProjectPragma::Conflict { text },
    }
}
