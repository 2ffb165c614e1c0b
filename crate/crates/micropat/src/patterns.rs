//! The 18 micro-pattern detectors, run over inheritance-flattened
//! entities, plus the resulting boolean pattern matrix.
//!
//! Every detector quantifies over the entity's functions minus
//! constructors (fallback and receive included); Emitter additionally
//! restricts to functions with bodies. Entities of a kind a pattern is
//! not defined over never match it.

use crate::catalog::{PatternId, ALL_PATTERNS, PATTERN_COUNT};
use crate::model::{
    compute_layout, find_wasted_slot, AssignedValue, EntityKind, FlattenedEntity, FunctionDef,
    FunctionRole, Mutability, SourceFact, TypeDesc, Visibility,
};

/// Outcome of one detector on one entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatch {
    pub pattern: PatternId,
    pub matched: bool,
    /// Witnesses for existential patterns, counterexamples for failed
    /// universal ones.
    pub evidence: Vec<String>,
}

/// One matrix row: entity identity plus its 18 detector verdicts.
/// `flags` is `None` for entities skipped during flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub project_id: String,
    pub name: String,
    pub file_path: String,
    pub compiler_version: String,
    pub kind: EntityKind,
    pub flags: Option<[bool; PATTERN_COUNT]>,
}

impl MatrixRow {
    pub fn flag(&self, pattern: PatternId) -> Option<bool> {
        self.flags.map(|f| f[pattern.index()])
    }
}

/// The boolean entity × pattern matrix for one corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternMatrix {
    pub label: String,
    pub rows: Vec<MatrixRow>,
}

impl PatternMatrix {
    pub fn new(label: impl Into<String>, mut rows: Vec<MatrixRow>) -> Self {
        sort_rows(&mut rows);
        PatternMatrix { label: label.into(), rows }
    }

    /// Rows that were actually analyzed (skipped entities excluded).
    pub fn analyzed(&self) -> impl Iterator<Item = &MatrixRow> {
        self.rows.iter().filter(|r| r.flags.is_some())
    }

    pub fn skipped_count(&self) -> usize {
        self.rows.iter().filter(|r| r.flags.is_none()).count()
    }
}

fn sort_rows(rows: &mut [MatrixRow]) {
    rows.sort_by(|a, b| {
        (&a.project_id, &a.file_path, &a.name).cmp(&(&b.project_id, &b.file_path, &b.name))
    });
}

/// A flattening result destined for the matrix: either an analyzable
/// entity or a skip marker carrying the entity's identity.
#[derive(Debug, Clone)]
pub enum FlattenOutcome {
    Flattened(Box<FlattenedEntity>),
    Skipped {
        project_id: String,
        name: String,
        file_path: String,
        compiler_version: String,
        kind: EntityKind,
        reason: String,
    },
}

/// Run all detectors over every outcome, producing the corpus matrix.
/// Rows are ordered by (project, file, name); skipped entities appear
/// with empty verdicts.
pub fn detect_all(label: impl Into<String>, outcomes: &[FlattenOutcome]) -> PatternMatrix {
    let rows = outcomes
        .iter()
        .map(|outcome| match outcome {
            FlattenOutcome::Flattened(flat) => MatrixRow {
                project_id: flat.entity.project_id.clone(),
                name: flat.entity.name.clone(),
                file_path: flat.entity.file_path.clone(),
                compiler_version: flat.entity.compiler_version.clone(),
                kind: flat.entity.kind,
                flags: Some(detect_flags(flat)),
            },
            FlattenOutcome::Skipped {
                project_id,
                name,
                file_path,
                compiler_version,
                kind,
                ..
            } => MatrixRow {
                project_id: project_id.clone(),
                name: name.clone(),
                file_path: file_path.clone(),
                compiler_version: compiler_version.clone(),
                kind: *kind,
                flags: None,
            },
        })
        .collect();
    PatternMatrix::new(label, rows)
}

/// All 18 verdicts for one entity, in catalog order.
pub fn detect_flags(flat: &FlattenedEntity) -> [bool; PATTERN_COUNT] {
    let mut flags = [false; PATTERN_COUNT];
    for p in ALL_PATTERNS {
        flags[p.index()] = detect(flat, p).matched;
    }
    flags
}

/// Run one detector, gating on the pattern's valid entity kinds first.
pub fn detect(flat: &FlattenedEntity, pattern: PatternId) -> PatternMatch {
    if !pattern.eligible(flat.entity.kind) {
        return PatternMatch { pattern, matched: false, evidence: Vec::new() };
    }
    let (matched, evidence) = match pattern {
        PatternId::Ownable => ownable(flat),
        PatternId::Stoppable => stoppable(flat),
        PatternId::PullPayment => pull_payment(flat),
        PatternId::ReentrancyGuard => reentrancy_guard(flat),
        PatternId::Payable => payable(flat),
        PatternId::Borrower => borrower(flat),
        PatternId::Implementer => implementer(flat),
        PatternId::ModifierUsage => modifier_usage(flat),
        PatternId::StorageSaver => storage_saver(flat),
        PatternId::Reader => universal(flat, "view", |f| f.mutability == Mutability::View),
        PatternId::Operator => universal(flat, "pure", |f| f.mutability == Mutability::Pure),
        PatternId::Provider => {
            universal(flat, "external", |f| f.visibility == Visibility::External)
        }
        PatternId::Supporter => {
            universal(flat, "internal", |f| f.visibility == Visibility::Internal)
        }
        PatternId::Delegator => delegator(flat),
        PatternId::NamedReturn => universal(flat, "named returns", |f| {
            !f.returns.is_empty()
                && f.returns.iter().all(|r| r.name.as_deref().is_some_and(|n| !n.is_empty()))
        }),
        PatternId::Returnless => universal(flat, "no returns", |f| f.returns.is_empty()),
        PatternId::Emitter => emitter(flat),
        PatternId::Muted => universal(flat, "no events", |f| !emits(f)),
    };
    PatternMatch { pattern, matched, evidence }
}

/// The quantification domain: all functions except constructors.
fn domain(flat: &FlattenedEntity) -> impl Iterator<Item = &FunctionDef> {
    flat.functions.iter().filter(|f| f.role != FunctionRole::Constructor)
}

fn fn_label(f: &FunctionDef) -> String {
    if f.name.is_empty() {
        match f.role {
            FunctionRole::Fallback => "fallback".to_string(),
            FunctionRole::Receive => "receive".to_string(),
            _ => "<unnamed>".to_string(),
        }
    } else {
        f.name.clone()
    }
}

/// `∀ f ∈ domain: pred(f)`, false on an empty domain.
fn universal(
    flat: &FlattenedEntity,
    what: &str,
    pred: impl Fn(&FunctionDef) -> bool,
) -> (bool, Vec<String>) {
    let mut any = false;
    for f in domain(flat) {
        any = true;
        if !pred(f) {
            return (false, vec![format!("function `{}` is not {what}", fn_label(f))]);
        }
    }
    if any {
        (true, vec![format!("all functions are {what}")])
    } else {
        (false, vec!["no functions outside constructors".to_string()])
    }
}

fn checks(m: &crate::model::ModifierDef, var: &str) -> bool {
    m.facts
        .iter()
        .any(|f| matches!(f, SourceFact::ConditionalCheck { subject } if subject == var))
}

/// Is `m` invoked by at least one domain function?
fn invoked(flat: &FlattenedEntity, modifier: &str) -> Option<String> {
    domain(flat)
        .find(|f| f.modifiers_invoked.iter().any(|n| n == modifier))
        .map(fn_label)
}

fn ownable(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for v in &flat.vars {
        if v.var.ty != TypeDesc::Address || v.var.visibility != Visibility::Public {
            continue;
        }
        for m in &flat.modifiers {
            if !checks(m, &v.var.name) {
                continue;
            }
            if let Some(user) = invoked(flat, &m.name) {
                return (
                    true,
                    vec![format!(
                        "public address `{}` checked by modifier `{}` used by `{user}`",
                        v.var.name, m.name
                    )],
                );
            }
        }
    }
    (false, Vec::new())
}

fn stoppable(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for v in &flat.vars {
        if v.var.ty != TypeDesc::Bool {
            continue;
        }
        let toggler = domain(flat).find(|f| {
            f.facts.iter().any(|fact| {
                matches!(
                    fact,
                    SourceFact::AssignsVar { subject, value }
                        if subject == &v.var.name
                        && matches!(value, AssignedValue::BoolLiteral(_) | AssignedValue::Negation)
                )
            })
        });
        let Some(toggler) = toggler else { continue };
        for m in &flat.modifiers {
            if !checks(m, &v.var.name) {
                continue;
            }
            if invoked(flat, &m.name).is_some() {
                return (
                    true,
                    vec![format!(
                        "bool flag `{}` checked by modifier `{}` and toggled by `{}`",
                        v.var.name,
                        m.name,
                        fn_label(toggler)
                    )],
                );
            }
        }
    }
    (false, Vec::new())
}

fn pull_payment(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for v in &flat.vars {
        let TypeDesc::Mapping { key, value } = &v.var.ty else { continue };
        if **key != TypeDesc::Address || !value.is_uint() {
            continue;
        }
        for f in domain(flat) {
            let reads = f.facts.iter().any(|fact| {
                matches!(fact, SourceFact::ReadsMsgSenderEntry { subject } if subject == &v.var.name)
            });
            let pays = f.facts.iter().any(|fact| {
                matches!(fact, SourceFact::EtherTransfer { to_msg_sender: true })
            });
            if reads && pays {
                return (
                    true,
                    vec![format!(
                        "`{}` reads `{}[msg.sender]` and transfers to the sender",
                        fn_label(f),
                        v.var.name
                    )],
                );
            }
        }
    }
    (false, Vec::new())
}

fn reentrancy_guard(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for m in &flat.modifiers {
        for v in &flat.vars {
            if !lock_sequence(&m.facts, &v.var.name) {
                continue;
            }
            if let Some(user) = invoked(flat, &m.name) {
                return (
                    true,
                    vec![format!(
                        "modifier `{}` locks on `{}` around the body, used by `{user}`",
                        m.name, v.var.name
                    )],
                );
            }
        }
    }
    (false, Vec::new())
}

/// Ordered subsequence: check(v), assign(v), placeholder, assign(v).
fn lock_sequence(facts: &[SourceFact], var: &str) -> bool {
    let mut stage = 0;
    for fact in facts {
        stage = match (stage, fact) {
            (0, SourceFact::ConditionalCheck { subject }) if subject == var => 1,
            (1, SourceFact::AssignsVar { subject, .. }) if subject == var => 2,
            (2, SourceFact::Placeholder) => 3,
            (3, SourceFact::AssignsVar { subject, .. }) if subject == var => return true,
            _ => stage,
        };
    }
    false
}

fn payable(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    let fallback = flat.functions.iter().any(|f| f.role == FunctionRole::Fallback);
    let receive = flat.functions.iter().any(|f| f.role == FunctionRole::Receive);
    if fallback && receive {
        (true, vec!["declares both a fallback and a receive function".to_string()])
    } else {
        (false, Vec::new())
    }
}

fn borrower(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for f in domain(flat) {
        for fact in &f.facts {
            if let SourceFact::LibraryQualifiedCall { library, member } = fact {
                return (
                    true,
                    vec![format!("`{}` calls `{library}.{member}`", fn_label(f))],
                );
            }
        }
    }
    for (lib, fn_names) in &flat.using_library_functions {
        for f in domain(flat) {
            for fact in &f.facts {
                let member = match fact {
                    SourceFact::ExternalMemberCall { member, .. } => member,
                    _ => continue,
                };
                if fn_names.contains(member) {
                    return (
                        true,
                        vec![format!(
                            "`{}` calls `{member}` attached from `using {lib}`",
                            fn_label(f)
                        )],
                    );
                }
            }
        }
    }
    (false, Vec::new())
}

fn implementer(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    if flat.base_interface_sigs.is_empty() {
        return (false, vec!["no inherited unimplemented signatures".to_string()]);
    }
    let mut any = false;
    for f in domain(flat) {
        any = true;
        if f.has_body && !flat.base_interface_sigs.contains(&f.signature()) {
            return (
                false,
                vec![format!("`{}` does not implement an inherited signature", fn_label(f))],
            );
        }
    }
    if any {
        (true, vec!["every function implements an inherited signature".to_string()])
    } else {
        (false, vec!["no functions outside constructors".to_string()])
    }
}

fn modifier_usage(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for m in &flat.modifiers {
        if let Some(user) = invoked(flat, &m.name) {
            return (true, vec![format!("`{user}` uses modifier `{}`", m.name)]);
        }
    }
    (false, Vec::new())
}

fn storage_saver(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    let layout = compute_layout(&flat.vars);
    match find_wasted_slot(&layout) {
        None => (true, vec![format!("{} slot(s), tightly packed", layout.slots.len())]),
        Some((var_index, earlier_slot)) => (
            false,
            vec![format!(
                "`{}` opens a new slot while slot {earlier_slot} still has room",
                flat.vars[var_index].var.name
            )],
        ),
    }
}

fn delegator(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    for v in &flat.vars {
        if !v.contract_like {
            continue;
        }
        for f in domain(flat) {
            let calls = f.facts.iter().any(|fact| {
                matches!(fact, SourceFact::ExternalMemberCall { receiver, .. } if receiver == &v.var.name)
            });
            if calls {
                return (
                    true,
                    vec![format!(
                        "`{}` calls through contract-typed `{}`",
                        fn_label(f),
                        v.var.name
                    )],
                );
            }
        }
    }
    (false, Vec::new())
}

fn emits(f: &FunctionDef) -> bool {
    f.facts.iter().any(|fact| matches!(fact, SourceFact::EmitEvent { .. }))
}

fn emitter(flat: &FlattenedEntity) -> (bool, Vec<String>) {
    let mut any = false;
    for f in domain(flat).filter(|f| f.has_body) {
        any = true;
        if !emits(f) {
            return (false, vec![format!("`{}` emits no event", fn_label(f))]);
        }
    }
    if any {
        (true, vec!["every implemented function emits an event".to_string()])
    } else {
        (false, vec!["no function bodies outside constructors".to_string()])
    }
}
