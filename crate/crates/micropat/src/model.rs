//! Semantic model for analyzed Solidity sources: entities (contracts,
//! abstract contracts, interfaces, libraries), their members, extracted
//! source facts, inheritance flattening, and storage slot layout.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel subject for facts whose target expression is not a plain
/// identifier (e.g. a member call on the result of another call).
pub const UNRESOLVED: &str = "unresolved";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Contract,
    AbstractContract,
    Interface,
    Library,
}

impl EntityKind {
    /// The label used in reports and matrix files.
    pub fn label(self) -> &'static str {
        match self {
            EntityKind::Contract => "contract",
            EntityKind::AbstractContract => "abstract contract",
            EntityKind::Interface => "interface",
            EntityKind::Library => "library",
        }
    }

    pub fn parse_label(s: &str) -> Option<Self> {
        match s {
            "contract" => Some(EntityKind::Contract),
            "abstract contract" => Some(EntityKind::AbstractContract),
            "interface" => Some(EntityKind::Interface),
            "library" => Some(EntityKind::Library),
            _ => None,
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    External,
    Internal,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutability {
    Nonpayable,
    Payable,
    View,
    Pure,
}

/// Storage classification of a state variable declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMutability {
    Plain,
    Constant,
    Immutable,
}

/// Declared type of a state variable or parameter, reduced to what the
/// detectors and the layout need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDesc {
    Bool,
    Int(u16),
    Uint(u16),
    Address,
    FixedBytes(u8),
    DynamicBytes,
    Str,
    Mapping {
        key: Box<TypeDesc>,
        value: Box<TypeDesc>,
    },
    Array {
        elem: Box<TypeDesc>,
        /// `None` for dynamic arrays, `Some` for fixed-size ones.
        len: Option<u64>,
    },
    /// Function types (`function(...) external returns (...)`).
    FunctionPtr,
    /// A named type: contract, interface, enum, struct, or unresolved.
    Named(String),
    /// Anything the frontend does not model further.
    Other(String),
}

impl TypeDesc {
    /// Canonical rendering used for signature matching.
    pub fn canonical(&self) -> String {
        match self {
            TypeDesc::Bool => "bool".into(),
            TypeDesc::Int(n) => format!("int{n}"),
            TypeDesc::Uint(n) => format!("uint{n}"),
            TypeDesc::Address => "address".into(),
            TypeDesc::FixedBytes(n) => format!("bytes{n}"),
            TypeDesc::DynamicBytes => "bytes".into(),
            TypeDesc::Str => "string".into(),
            TypeDesc::Mapping { key, value } => {
                format!("mapping({}=>{})", key.canonical(), value.canonical())
            }
            TypeDesc::Array { elem, len } => match len {
                Some(n) => format!("{}[{n}]", elem.canonical()),
                None => format!("{}[]", elem.canonical()),
            },
            TypeDesc::FunctionPtr => "function".into(),
            TypeDesc::Named(name) => name.clone(),
            TypeDesc::Other(text) => text.clone(),
        }
    }

    /// True for `uint8` through `uint256`.
    pub fn is_uint(&self) -> bool {
        matches!(self, TypeDesc::Uint(_))
    }
}

/// What an assignment stores, as far as the fact extractor can tell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignedValue {
    BoolLiteral(bool),
    NumberLiteral(String),
    /// Right-hand side is a `!` expression (a toggle when it negates the
    /// assigned variable itself).
    Negation,
    Other,
}

/// A single extracted behavior fact, attributed to the function or modifier
/// body it came from. Facts within one body keep source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceFact {
    /// An identifier read inside a `require(...)` or `if (...)` condition.
    ConditionalCheck { subject: String },
    /// An assignment whose left-hand side is the named identifier.
    AssignsVar { subject: String, value: AssignedValue },
    /// A read of `subject[msg.sender]`.
    ReadsMsgSenderEntry { subject: String },
    /// A member call on a receiver that is not a known project library.
    ExternalMemberCall { receiver: String, member: String },
    /// `L.f(...)` where `L` names a library declared in the same project.
    LibraryQualifiedCall { library: String, member: String },
    /// `.transfer(x)` / `.send(x)` with one argument, or a `call` carrying
    /// a `value`. `to_msg_sender` is true when the recipient expression
    /// mentions `msg.sender`.
    EtherTransfer { to_msg_sender: bool },
    /// `emit E(...)`, or a bare `E(...)` statement resolving to a project
    /// event (pre-0.4.21 syntax).
    EmitEvent { event: String },
    /// The `_;` marker inside a modifier body.
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub ty: TypeDesc,
    pub visibility: Visibility,
    pub mutability: VarMutability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionRole {
    Regular,
    Constructor,
    Fallback,
    Receive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnParam {
    pub ty: TypeDesc,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    /// Empty for unnamed fallback/receive functions.
    pub name: String,
    pub role: FunctionRole,
    pub visibility: Visibility,
    pub mutability: Mutability,
    pub params: Vec<TypeDesc>,
    pub returns: Vec<ReturnParam>,
    /// Names of modifiers invoked in the declaration header.
    pub modifiers_invoked: Vec<String>,
    pub has_body: bool,
    pub facts: Vec<SourceFact>,
}

impl FunctionDef {
    /// `name(type,...)` key used for override resolution and interface
    /// signature matching.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self.params.iter().map(TypeDesc::canonical).collect();
        format!("{}({})", self.name, params.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifierDef {
    pub name: String,
    pub facts: Vec<SourceFact>,
}

impl ModifierDef {
    pub fn has_placeholder(&self) -> bool {
        self.facts.iter().any(|f| matches!(f, SourceFact::Placeholder))
    }
}

/// One declared source-level entity, before inheritance flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub name: String,
    pub kind: EntityKind,
    /// Path relative to the corpus root, forward slashes.
    pub file_path: String,
    /// First path component of `file_path`.
    pub project_id: String,
    /// The file's `pragma solidity` text, empty when absent.
    pub compiler_version: String,
    /// Direct base names as written, left to right.
    pub bases: Vec<String>,
    pub state_vars: Vec<StateVar>,
    pub functions: Vec<FunctionDef>,
    pub modifiers: Vec<ModifierDef>,
    pub events: Vec<String>,
    /// Library names referenced by `using L for T;` directives.
    pub using_libraries: Vec<String>,
}

/// How a named type resolves within a project.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolvedType {
    Entity(EntityKind),
    Enum,
    Struct,
    Unknown,
}

/// All entities of one project plus the project-level type namespace.
/// Name lookup never crosses project boundaries.
#[derive(Debug, Default)]
pub struct Universe {
    entities: Vec<Entity>,
    by_name: HashMap<String, usize>,
    enums: HashSet<String>,
    structs: HashSet<String>,
}

impl Universe {
    pub fn new(entities: Vec<Entity>, enums: HashSet<String>, structs: HashSet<String>) -> Self {
        let mut by_name = HashMap::new();
        for (i, e) in entities.iter().enumerate() {
            // First declaration wins on (rare) duplicate names.
            by_name.entry(e.name.clone()).or_insert(i);
        }
        Universe { entities, by_name, enums, structs }
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.by_name.get(name).map(|&i| &self.entities[i])
    }

    pub fn resolve_type(&self, name: &str) -> ResolvedType {
        if let Some(e) = self.entity(name) {
            return ResolvedType::Entity(e.kind);
        }
        if self.enums.contains(name) {
            return ResolvedType::Enum;
        }
        if self.structs.contains(name) {
            return ResolvedType::Struct;
        }
        ResolvedType::Unknown
    }
}

/// Slot footprint of a state variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotSize {
    /// A value type occupying `n` bytes (1..=32) that may share a slot.
    Bytes(u8),
    /// Reference, mapping, fixed-array, function, or unresolved types:
    /// always opens a fresh slot.
    FullSlot,
}

/// Size a declared type for the packing rule. Unresolved named types
/// default to [`SlotSize::FullSlot`].
pub fn slot_size(ty: &TypeDesc, universe: &Universe) -> SlotSize {
    match ty {
        TypeDesc::Bool => SlotSize::Bytes(1),
        TypeDesc::Int(bits) | TypeDesc::Uint(bits) => SlotSize::Bytes((bits / 8) as u8),
        TypeDesc::Address => SlotSize::Bytes(20),
        TypeDesc::FixedBytes(n) => SlotSize::Bytes(*n),
        TypeDesc::Named(name) => match universe.resolve_type(name) {
            ResolvedType::Entity(EntityKind::Contract)
            | ResolvedType::Entity(EntityKind::AbstractContract)
            | ResolvedType::Entity(EntityKind::Interface) => SlotSize::Bytes(20),
            ResolvedType::Enum => SlotSize::Bytes(1),
            _ => SlotSize::FullSlot,
        },
        TypeDesc::DynamicBytes
        | TypeDesc::Str
        | TypeDesc::Mapping { .. }
        | TypeDesc::Array { .. }
        | TypeDesc::FunctionPtr
        | TypeDesc::Other(_) => SlotSize::FullSlot,
    }
}

/// True when a variable of this declared type holds a contract, interface,
/// or abstract-contract reference. Named types that do not resolve within
/// the project count as contract-like (vendored interfaces are the common
/// unresolved case); known enums, structs, and libraries do not.
pub fn is_contract_like(ty: &TypeDesc, universe: &Universe) -> bool {
    match ty {
        TypeDesc::Named(name) => match universe.resolve_type(name) {
            ResolvedType::Entity(EntityKind::Contract)
            | ResolvedType::Entity(EntityKind::AbstractContract)
            | ResolvedType::Entity(EntityKind::Interface) => true,
            ResolvedType::Entity(EntityKind::Library) | ResolvedType::Enum | ResolvedType::Struct => false,
            ResolvedType::Unknown => true,
        },
        _ => false,
    }
}

/// A state variable in a flattened entity: declaration plus its resolved
/// storage footprint and type class.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatVar {
    pub var: StateVar,
    pub size: SlotSize,
    pub contract_like: bool,
}

/// The inheritance-flattened view of an entity that detectors run on.
#[derive(Debug, Clone)]
pub struct FlattenedEntity {
    pub entity: Entity,
    /// All state variables, bases first, then own, in declaration order.
    pub vars: Vec<FlatVar>,
    /// Override-resolved functions: one per (name, param types), the most
    /// derived definition.
    pub functions: Vec<FunctionDef>,
    /// Modifiers by name, most derived wins.
    pub modifiers: Vec<ModifierDef>,
    /// `using` libraries from the whole lineage.
    pub using_libraries: Vec<String>,
    /// Function names of each known library referenced by a using directive.
    pub using_library_functions: BTreeMap<String, HashSet<String>>,
    /// Bodiless signatures declared by interface or abstract bases.
    pub base_interface_sigs: Vec<String>,
    /// The subset of `base_interface_sigs` never given a body.
    pub inherited_unimplemented: Vec<String>,
    /// Base names that did not resolve within the project.
    pub unresolved_bases: Vec<String>,
}

impl FlattenedEntity {
    pub fn var(&self, name: &str) -> Option<&FlatVar> {
        self.vars.iter().find(|v| v.var.name == name)
    }

    pub fn modifier(&self, name: &str) -> Option<&ModifierDef> {
        self.modifiers.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("inheritance cycle involving `{0}`")]
    Cycle(String),
}

/// Resolve the inheritance hierarchy of `entity` against its project
/// universe. Fails only on inheritance cycles; unresolved bases are
/// recorded and skipped.
pub fn flatten(entity: &Entity, universe: &Universe) -> Result<FlattenedEntity, FlattenError> {
    let mut order: Vec<&Entity> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut unresolved: Vec<String> = Vec::new();
    let mut stack: Vec<&str> = Vec::new();

    // Most-base-first depth-first linearization, first occurrence kept.
    fn visit<'u>(
        name: &str,
        universe: &'u Universe,
        stack: &mut Vec<&'u str>,
        seen: &mut HashSet<&'u str>,
        order: &mut Vec<&'u Entity>,
        unresolved: &mut Vec<String>,
    ) -> Result<(), FlattenError> {
        if stack.contains(&name) {
            return Err(FlattenError::Cycle(name.to_string()));
        }
        let Some(e) = universe.entity(name) else {
            if !unresolved.iter().any(|u| u == name) {
                unresolved.push(name.to_string());
            }
            return Ok(());
        };
        if seen.contains(e.name.as_str()) {
            return Ok(());
        }
        stack.push(&e.name);
        for base in &e.bases {
            visit(base, universe, stack, seen, order, unresolved)?;
        }
        stack.pop();
        if seen.insert(&e.name) {
            order.push(e);
        }
        Ok(())
    }

    visit(&entity.name, universe, &mut stack, &mut seen, &mut order, &mut unresolved)?;
    // The entity itself may be absent from its own universe only if the
    // caller constructed things inconsistently; fall back to it directly.
    if order.is_empty() {
        order.push(entity);
        unresolved.retain(|u| u != &entity.name);
    }

    let mut vars = Vec::new();
    let mut functions: Vec<FunctionDef> = Vec::new();
    let mut fn_index: HashMap<String, usize> = HashMap::new();
    let mut modifiers: Vec<ModifierDef> = Vec::new();
    let mut mod_index: HashMap<String, usize> = HashMap::new();
    let mut using_libraries = Vec::new();
    let mut base_interface_sigs = Vec::new();
    let mut bodied_sigs: HashSet<String> = HashSet::new();

    for e in &order {
        for v in &e.state_vars {
            vars.push(FlatVar {
                var: v.clone(),
                size: slot_size(&v.ty, universe),
                contract_like: is_contract_like(&v.ty, universe),
            });
        }
        for f in &e.functions {
            let sig = f.signature();
            if f.has_body {
                bodied_sigs.insert(sig.clone());
            }
            if e.name != entity.name
                && !f.has_body
                && f.role == FunctionRole::Regular
                && matches!(e.kind, EntityKind::Interface | EntityKind::AbstractContract)
                && !base_interface_sigs.contains(&sig)
            {
                base_interface_sigs.push(sig.clone());
            }
            // Unnamed special functions all share the signature `()`;
            // override resolution must keep them in separate slots (a
            // derived `receive` replaces a base `receive`, never a
            // `fallback`).
            let key = match f.role {
                FunctionRole::Regular => sig,
                FunctionRole::Constructor => format!("@constructor{sig}"),
                FunctionRole::Fallback => "@fallback".to_string(),
                FunctionRole::Receive => "@receive".to_string(),
            };
            match fn_index.get(&key) {
                // Later entries are more derived and win.
                Some(&i) => functions[i] = f.clone(),
                None => {
                    fn_index.insert(key, functions.len());
                    functions.push(f.clone());
                }
            }
        }
        for m in &e.modifiers {
            match mod_index.get(&m.name) {
                Some(&i) => modifiers[i] = m.clone(),
                None => {
                    mod_index.insert(m.name.clone(), modifiers.len());
                    modifiers.push(m.clone());
                }
            }
        }
        for lib in &e.using_libraries {
            if !using_libraries.contains(lib) {
                using_libraries.push(lib.clone());
            }
        }
    }

    let inherited_unimplemented: Vec<String> = base_interface_sigs
        .iter()
        .filter(|sig| !bodied_sigs.contains(*sig))
        .cloned()
        .collect();

    let mut using_library_functions = BTreeMap::new();
    for lib in &using_libraries {
        if let Some(e) = universe.entity(lib) {
            if e.kind == EntityKind::Library {
                let names: HashSet<String> =
                    e.functions.iter().map(|f| f.name.clone()).collect();
                using_library_functions.insert(lib.clone(), names);
            }
        }
    }

    Ok(FlattenedEntity {
        entity: entity.clone(),
        vars,
        functions,
        modifiers,
        using_libraries,
        using_library_functions,
        base_interface_sigs,
        inherited_unimplemented,
        unresolved_bases: unresolved,
    })
}

/// One packed occupant of a storage slot. `bytes` is 32 for full-slot
/// variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotOccupant {
    /// Index into the flattened `vars` list.
    pub var_index: usize,
    pub offset: u8,
    pub bytes: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub occupants: Vec<SlotOccupant>,
    pub free_bytes: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StorageLayout {
    pub slots: Vec<Slot>,
}

/// Sequential slot packing over the plain (non-constant, non-immutable)
/// state variables, in declaration order: a value type of size `s` joins
/// the current slot when `s` fits in its remaining bytes, otherwise it
/// opens a new slot; full-slot types always open a new slot and leave it
/// unshareable.
pub fn compute_layout(vars: &[FlatVar]) -> StorageLayout {
    let mut slots: Vec<Slot> = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if v.var.mutability != VarMutability::Plain {
            continue;
        }
        match v.size {
            SlotSize::FullSlot => slots.push(Slot {
                occupants: vec![SlotOccupant { var_index: i, offset: 0, bytes: 32 }],
                free_bytes: 0,
            }),
            SlotSize::Bytes(s) => {
                let fits = slots
                    .last()
                    .map(|slot| slot.free_bytes >= s)
                    .unwrap_or(false);
                if fits {
                    let slot = slots.last_mut().unwrap();
                    let offset = 32 - slot.free_bytes;
                    slot.occupants.push(SlotOccupant { var_index: i, offset, bytes: s });
                    slot.free_bytes -= s;
                } else {
                    slots.push(Slot {
                        occupants: vec![SlotOccupant { var_index: i, offset: 0, bytes: s }],
                        free_bytes: 32 - s,
                    });
                }
            }
        }
    }
    StorageLayout { slots }
}

/// Find a packing violation: a value-type variable (at most 31 bytes)
/// beginning a slot while some strictly earlier slot still has room for
/// it. Returns the offending variable's index and the earlier slot number.
pub fn find_wasted_slot(layout: &StorageLayout) -> Option<(usize, usize)> {
    for (slot_no, slot) in layout.slots.iter().enumerate() {
        let Some(first) = slot.occupants.first() else { continue };
        if first.offset != 0 || first.bytes > 31 {
            continue;
        }
        for (earlier_no, earlier) in layout.slots[..slot_no].iter().enumerate() {
            if earlier.free_bytes >= first.bytes {
                return Some((first.var_index, earlier_no));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, ty: TypeDesc) -> StateVar {
        StateVar {
            name: name.into(),
            ty,
            visibility: Visibility::Internal,
            mutability: VarMutability::Plain,
        }
    }

    fn entity(name: &str, kind: EntityKind, bases: &[&str]) -> Entity {
        Entity {
            name: name.into(),
            kind,
            file_path: format!("p/{name}.sol"),
            project_id: "p".into(),
            compiler_version: "^0.8.0".into(),
            bases: bases.iter().map(|b| b.to_string()).collect(),
            state_vars: Vec::new(),
            functions: Vec::new(),
            modifiers: Vec::new(),
            events: Vec::new(),
            using_libraries: Vec::new(),
        }
    }

    fn func(name: &str, has_body: bool) -> FunctionDef {
        FunctionDef {
            name: name.into(),
            role: FunctionRole::Regular,
            visibility: Visibility::Public,
            mutability: Mutability::Nonpayable,
            params: Vec::new(),
            returns: Vec::new(),
            modifiers_invoked: Vec::new(),
            has_body,
            facts: Vec::new(),
        }
    }

    fn universe(entities: Vec<Entity>) -> Universe {
        Universe::new(entities, HashSet::new(), HashSet::new())
    }

    fn flat_vars(universe: &Universe, vars: Vec<StateVar>) -> Vec<FlatVar> {
        vars.into_iter()
            .map(|v| FlatVar {
                size: slot_size(&v.ty, universe),
                contract_like: is_contract_like(&v.ty, universe),
                var: v,
            })
            .collect()
    }

    #[test]
    fn value_types_pack_into_shared_slots() {
        let u = universe(vec![]);
        let vars = flat_vars(
            &u,
            vec![
                var("a", TypeDesc::Uint(128)),
                var("b", TypeDesc::Uint(128)),
                var("c", TypeDesc::Uint(256)),
            ],
        );
        let layout = compute_layout(&vars);
        assert_eq!(layout.slots.len(), 2);
        assert_eq!(layout.slots[0].occupants.len(), 2);
        assert_eq!(layout.slots[0].occupants[1].offset, 16);
        assert_eq!(layout.slots[0].free_bytes, 0);
        assert_eq!(find_wasted_slot(&layout), None);
    }

    #[test]
    fn interleaved_declaration_wastes_a_slot() {
        let u = universe(vec![]);
        let vars = flat_vars(
            &u,
            vec![
                var("a", TypeDesc::Uint(128)),
                var("b", TypeDesc::Uint(256)),
                var("c", TypeDesc::Uint(128)),
            ],
        );
        let layout = compute_layout(&vars);
        assert_eq!(layout.slots.len(), 3);
        assert_eq!(find_wasted_slot(&layout), Some((2, 0)));
    }

    #[test]
    fn bool_pair_shares_one_slot() {
        let u = universe(vec![]);
        let vars = flat_vars(&u, vec![var("a", TypeDesc::Bool), var("b", TypeDesc::Uint(8))]);
        let layout = compute_layout(&vars);
        assert_eq!(layout.slots.len(), 1);
        assert_eq!(layout.slots[0].free_bytes, 30);
        assert_eq!(find_wasted_slot(&layout), None);
    }

    #[test]
    fn full_slot_types_never_share() {
        let u = universe(vec![]);
        let vars = flat_vars(
            &u,
            vec![
                var("m", TypeDesc::Mapping {
                    key: Box::new(TypeDesc::Address),
                    value: Box::new(TypeDesc::Uint(256)),
                }),
                var("s", TypeDesc::Str),
                var("flag", TypeDesc::Bool),
            ],
        );
        let layout = compute_layout(&vars);
        assert_eq!(layout.slots.len(), 3);
        // The bool opens a new slot after two full slots; nothing earlier
        // had free bytes, so the layout is still tight.
        assert_eq!(find_wasted_slot(&layout), None);
    }

    #[test]
    fn constants_and_immutables_are_skipped() {
        let u = universe(vec![]);
        let mut c = var("c", TypeDesc::Uint(256));
        c.mutability = VarMutability::Constant;
        let mut im = var("i", TypeDesc::Uint(256));
        im.mutability = VarMutability::Immutable;
        let vars = flat_vars(&u, vec![c, im, var("x", TypeDesc::Bool)]);
        let layout = compute_layout(&vars);
        assert_eq!(layout.slots.len(), 1);
        assert_eq!(layout.slots[0].occupants[0].var_index, 2);
    }

    #[test]
    fn unresolved_named_type_takes_a_full_slot_but_counts_as_contract_like() {
        let u = universe(vec![entity("Known", EntityKind::Contract, &[])]);
        assert_eq!(slot_size(&TypeDesc::Named("Known".into()), &u), SlotSize::Bytes(20));
        assert!(is_contract_like(&TypeDesc::Named("Known".into()), &u));
        assert_eq!(slot_size(&TypeDesc::Named("Mystery".into()), &u), SlotSize::FullSlot);
        assert!(is_contract_like(&TypeDesc::Named("Mystery".into()), &u));
    }

    #[test]
    fn enum_types_resolve_to_one_byte_and_are_not_contract_like() {
        let mut enums = HashSet::new();
        enums.insert("Phase".to_string());
        let u = Universe::new(vec![], enums, HashSet::new());
        assert_eq!(slot_size(&TypeDesc::Named("Phase".into()), &u), SlotSize::Bytes(1));
        assert!(!is_contract_like(&TypeDesc::Named("Phase".into()), &u));
    }

    #[test]
    fn flatten_orders_vars_bases_first() {
        let mut base = entity("Base", EntityKind::Contract, &[]);
        base.state_vars.push(var("inherited", TypeDesc::Uint(256)));
        let mut derived = entity("Derived", EntityKind::Contract, &["Base"]);
        derived.state_vars.push(var("own", TypeDesc::Bool));
        let u = universe(vec![base, derived.clone()]);
        let flat = flatten(&derived, &u).unwrap();
        let names: Vec<&str> = flat.vars.iter().map(|v| v.var.name.as_str()).collect();
        assert_eq!(names, ["inherited", "own"]);
    }

    #[test]
    fn flatten_resolves_overrides_to_most_derived() {
        let mut base = entity("Base", EntityKind::Contract, &[]);
        let mut base_fn = func("f", true);
        base_fn.mutability = Mutability::View;
        base.functions.push(base_fn);
        let mut derived = entity("Derived", EntityKind::Contract, &["Base"]);
        let mut derived_fn = func("f", true);
        derived_fn.mutability = Mutability::Pure;
        derived.functions.push(derived_fn);
        let u = universe(vec![base, derived.clone()]);
        let flat = flatten(&derived, &u).unwrap();
        assert_eq!(flat.functions.len(), 1);
        assert_eq!(flat.functions[0].mutability, Mutability::Pure);
    }

    #[test]
    fn flatten_collects_unimplemented_interface_signatures() {
        let mut iface = entity("IToken", EntityKind::Interface, &[]);
        iface.functions.push(func("transfer", false));
        iface.functions.push(func("balanceOf", false));
        let mut derived = entity("Token", EntityKind::Contract, &["IToken"]);
        derived.functions.push(func("transfer", true));
        let u = universe(vec![iface, derived.clone()]);
        let flat = flatten(&derived, &u).unwrap();
        assert_eq!(flat.base_interface_sigs, vec!["transfer()", "balanceOf()"]);
        assert_eq!(flat.inherited_unimplemented, vec!["balanceOf()"]);
    }

    #[test]
    fn flatten_reports_cycles() {
        let a = entity("A", EntityKind::Contract, &["B"]);
        let b = entity("B", EntityKind::Contract, &["A"]);
        let u = universe(vec![a.clone(), b]);
        assert!(matches!(flatten(&a, &u), Err(FlattenError::Cycle(_))));
    }

    #[test]
    fn flatten_records_unresolved_bases() {
        let d = entity("D", EntityKind::Contract, &["Vendored"]);
        let u = universe(vec![d.clone()]);
        let flat = flatten(&d, &u).unwrap();
        assert_eq!(flat.unresolved_bases, vec!["Vendored"]);
    }

    #[test]
    fn diamond_bases_are_deduplicated() {
        let root = entity("Root", EntityKind::Contract, &[]);
        let left = entity("Left", EntityKind::Contract, &["Root"]);
        let right = entity("Right", EntityKind::Contract, &["Root"]);
        let mut tip = entity("Tip", EntityKind::Contract, &["Left", "Right"]);
        tip.state_vars.push(var("own", TypeDesc::Bool));
        let u = universe(vec![root, left, right, tip.clone()]);
        let flat = flatten(&tip, &u).unwrap();
        assert_eq!(flat.vars.len(), 1);
    }
}
