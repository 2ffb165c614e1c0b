//! Solidity frontend: parses each project's files and lowers the syntax
//! tree into [`crate::model`] entities with extracted source facts.
//!
//! Member calls are classified project-wide at parse time: a call
//! `L.f(...)` where `L` names a library declared anywhere in the project
//! becomes a library-qualified call, everything else an external member
//! call. Bare `E(...)` statements resolve against the project's event
//! names (pre-0.4.21 emit syntax).

use std::collections::HashSet;

use solang_parser::pt;
use thiserror::Error;

use crate::ingest::{ProjectRecord, SourceFile};
use crate::model::{
    AssignedValue, Entity, EntityKind, FunctionDef, FunctionRole, ModifierDef, Mutability,
    ReturnParam, SourceFact, StateVar, TypeDesc, Universe, VarMutability, Visibility, UNRESOLVED,
};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },
}

/// Identifiers that are language builtins when used as a member-access
/// base; facts are never attributed to them.
const BUILTIN_BASES: [&str; 7] = ["msg", "block", "tx", "abi", "this", "super", "type"];

fn is_builtin(name: &str) -> bool {
    BUILTIN_BASES.contains(&name)
}

/// Project-wide namespace collected before fact extraction.
#[derive(Debug, Default)]
struct ProjectContext {
    libraries: HashSet<String>,
    events: HashSet<String>,
    enums: HashSet<String>,
    structs: HashSet<String>,
}

/// Parse every file of a resolved project into its entity universe.
/// Parsing is pure per project: nothing outside the project influences
/// the result.
pub fn parse_project(project: &ProjectRecord) -> Result<Universe, FrontendError> {
    let mut units: Vec<(&SourceFile, pt::SourceUnit)> = Vec::new();
    for (idx, file) in project.files.iter().enumerate() {
        match solang_parser::parse(&file.content, idx) {
            Ok((unit, _comments)) => units.push((file, unit)),
            Err(diagnostics) => {
                let message = diagnostics
                    .first()
                    .map(|d| d.message.clone())
                    .unwrap_or_else(|| "unknown parse error".to_string());
                return Err(FrontendError::Parse { file: file.corpus_rel.clone(), message });
            }
        }
    }

    let mut ctx = ProjectContext::default();
    for (_, unit) in &units {
        collect_names(unit, &mut ctx);
    }

    let mut entities = Vec::new();
    for (file, unit) in &units {
        // File-level `using` directives apply to every entity in the file.
        let mut file_usings = Vec::new();
        for part in &unit.0 {
            if let pt::SourceUnitPart::Using(using) = part {
                if let Some(lib) = using_library(using) {
                    file_usings.push(lib);
                }
            }
        }
        for part in &unit.0 {
            if let pt::SourceUnitPart::ContractDefinition(def) = part {
                if let Some(entity) = build_entity(def, file, project, &file_usings, &ctx) {
                    entities.push(entity);
                }
            }
        }
    }
    Ok(Universe::new(entities, ctx.enums, ctx.structs))
}

fn collect_names(unit: &pt::SourceUnit, ctx: &mut ProjectContext) {
    for part in &unit.0 {
        match part {
            pt::SourceUnitPart::ContractDefinition(def) => {
                if let (pt::ContractTy::Library(_), Some(name)) = (&def.ty, &def.name) {
                    ctx.libraries.insert(name.name.clone());
                }
                for part in &def.parts {
                    match part {
                        pt::ContractPart::EventDefinition(ev) => {
                            if let Some(name) = &ev.name {
                                ctx.events.insert(name.name.clone());
                            }
                        }
                        pt::ContractPart::EnumDefinition(en) => {
                            if let Some(name) = &en.name {
                                ctx.enums.insert(name.name.clone());
                            }
                        }
                        pt::ContractPart::StructDefinition(st) => {
                            if let Some(name) = &st.name {
                                ctx.structs.insert(name.name.clone());
                            }
                        }
                        _ => {}
                    }
                }
            }
            pt::SourceUnitPart::EventDefinition(ev) => {
                if let Some(name) = &ev.name {
                    ctx.events.insert(name.name.clone());
                }
            }
            pt::SourceUnitPart::EnumDefinition(en) => {
                if let Some(name) = &en.name {
                    ctx.enums.insert(name.name.clone());
                }
            }
            pt::SourceUnitPart::StructDefinition(st) => {
                if let Some(name) = &st.name {
                    ctx.structs.insert(name.name.clone());
                }
            }
            _ => {}
        }
    }
}

fn build_entity(
    def: &pt::ContractDefinition,
    file: &SourceFile,
    project: &ProjectRecord,
    file_usings: &[String],
    ctx: &ProjectContext,
) -> Option<Entity> {
    let name = def.name.as_ref()?.name.clone();
    let kind = match def.ty {
        pt::ContractTy::Contract(_) => EntityKind::Contract,
        pt::ContractTy::Abstract(_) => EntityKind::AbstractContract,
        pt::ContractTy::Interface(_) => EntityKind::Interface,
        pt::ContractTy::Library(_) => EntityKind::Library,
    };
    let bases = def
        .base
        .iter()
        .filter_map(|b| b.name.identifiers.last().map(|i| i.name.clone()))
        .collect();

    let mut entity = Entity {
        name: name.clone(),
        kind,
        file_path: file.corpus_rel.clone(),
        project_id: project.project_id.clone(),
        compiler_version: file.pragma_display().to_string(),
        bases,
        state_vars: Vec::new(),
        functions: Vec::new(),
        modifiers: Vec::new(),
        events: Vec::new(),
        using_libraries: file_usings.to_vec(),
    };

    for part in &def.parts {
        match part {
            pt::ContractPart::VariableDefinition(var) => {
                if let Some(v) = state_var(var) {
                    entity.state_vars.push(v);
                }
            }
            pt::ContractPart::FunctionDefinition(fun) => match fun.ty {
                pt::FunctionTy::Modifier => {
                    if let Some(id) = &fun.name {
                        entity.modifiers.push(ModifierDef {
                            name: id.name.clone(),
                            facts: body_facts(fun.body.as_ref(), ctx),
                        });
                    }
                }
                _ => entity.functions.push(function_def(fun, kind, &name, ctx)),
            },
            pt::ContractPart::EventDefinition(ev) => {
                if let Some(id) = &ev.name {
                    entity.events.push(id.name.clone());
                }
            }
            pt::ContractPart::Using(using) => {
                if let Some(lib) = using_library(using) {
                    entity.using_libraries.push(lib);
                }
            }
            _ => {}
        }
    }
    Some(entity)
}

fn using_library(using: &pt::Using) -> Option<String> {
    // Only the `using L for T` form names a library; the function-list
    // form (`using {f, g} for T`) is ignored.
    match &using.list {
        pt::UsingList::Library(path) => path.identifiers.last().map(|i| i.name.clone()),
        _ => None,
    }
}

fn state_var(var: &pt::VariableDefinition) -> Option<StateVar> {
    let name = var.name.as_ref()?.name.clone();
    let mut visibility = Visibility::Internal;
    let mut mutability = VarMutability::Plain;
    for attr in &var.attrs {
        match attr {
            pt::VariableAttribute::Visibility(v) => visibility = visibility_of(v),
            pt::VariableAttribute::Constant(_) => mutability = VarMutability::Constant,
            pt::VariableAttribute::Immutable(_) => mutability = VarMutability::Immutable,
            _ => {}
        }
    }
    Some(StateVar { name, ty: type_desc(&var.ty), visibility, mutability })
}

fn function_def(
    fun: &pt::FunctionDefinition,
    container: EntityKind,
    container_name: &str,
    ctx: &ProjectContext,
) -> FunctionDef {
    let name = fun.name.as_ref().map(|i| i.name.clone()).unwrap_or_default();
    let role = match fun.ty {
        pt::FunctionTy::Constructor => FunctionRole::Constructor,
        pt::FunctionTy::Fallback => FunctionRole::Fallback,
        pt::FunctionTy::Receive => FunctionRole::Receive,
        // Legacy forms: an unnamed `function()` is the fallback, a
        // function named after its contract is the constructor.
        pt::FunctionTy::Function if fun.name.is_none() => FunctionRole::Fallback,
        pt::FunctionTy::Function if name == container_name => FunctionRole::Constructor,
        _ => FunctionRole::Regular,
    };

    let mut visibility = match container {
        EntityKind::Interface => Visibility::External,
        _ => Visibility::Public,
    };
    let mut mutability = Mutability::Nonpayable;
    let mut modifiers_invoked = Vec::new();
    for attr in &fun.attributes {
        match attr {
            pt::FunctionAttribute::Visibility(v) => visibility = visibility_of(v),
            pt::FunctionAttribute::Mutability(m) => {
                mutability = match m {
                    pt::Mutability::Payable(_) => Mutability::Payable,
                    pt::Mutability::Pure(_) => Mutability::Pure,
                    // `constant` is the pre-0.5 spelling of `view`.
                    pt::Mutability::View(_) | pt::Mutability::Constant(_) => Mutability::View,
                }
            }
            pt::FunctionAttribute::BaseOrModifier(_, base) => {
                if let Some(id) = base.name.identifiers.last() {
                    modifiers_invoked.push(id.name.clone());
                }
            }
            _ => {}
        }
    }

    FunctionDef {
        name,
        role,
        visibility,
        mutability,
        params: param_types(&fun.params),
        returns: fun
            .returns
            .iter()
            .filter_map(|(_, p)| p.as_ref())
            .map(|p| ReturnParam {
                ty: type_desc(&p.ty),
                name: p.name.as_ref().map(|i| i.name.clone()),
            })
            .collect(),
        modifiers_invoked,
        has_body: fun.body.is_some(),
        facts: body_facts(fun.body.as_ref(), ctx),
    }
}

fn visibility_of(v: &pt::Visibility) -> Visibility {
    match v {
        pt::Visibility::External(_) => Visibility::External,
        pt::Visibility::Public(_) => Visibility::Public,
        pt::Visibility::Internal(_) => Visibility::Internal,
        pt::Visibility::Private(_) => Visibility::Private,
    }
}

fn param_types(params: &pt::ParameterList) -> Vec<TypeDesc> {
    params
        .iter()
        .filter_map(|(_, p)| p.as_ref())
        .map(|p| type_desc(&p.ty))
        .collect()
}

fn type_desc(expr: &pt::Expression) -> TypeDesc {
    match expr {
        pt::Expression::Type(_, ty) => match ty {
            pt::Type::Bool => TypeDesc::Bool,
            pt::Type::Address | pt::Type::AddressPayable | pt::Type::Payable => TypeDesc::Address,
            pt::Type::Int(bits) => TypeDesc::Int(*bits),
            pt::Type::Uint(bits) => TypeDesc::Uint(*bits),
            pt::Type::Bytes(n) => TypeDesc::FixedBytes(*n),
            pt::Type::DynamicBytes => TypeDesc::DynamicBytes,
            pt::Type::String => TypeDesc::Str,
            pt::Type::Mapping { key, value, .. } => TypeDesc::Mapping {
                key: Box::new(type_desc(key)),
                value: Box::new(type_desc(value)),
            },
            pt::Type::Function { .. } => TypeDesc::FunctionPtr,
            pt::Type::Rational => TypeDesc::Other("rational".into()),
        },
        pt::Expression::Variable(id) => TypeDesc::Named(id.name.clone()),
        // Qualified types (`Lib.Struct`) resolve by their last segment.
        pt::Expression::MemberAccess(_, _, member) => TypeDesc::Named(member.name.clone()),
        pt::Expression::ArraySubscript(_, elem, len) => TypeDesc::Array {
            elem: Box::new(type_desc(elem)),
            // Non-literal lengths (constant expressions) fall back to the
            // dynamic rendering; they still occupy whole slots either way.
            len: len.as_ref().and_then(|l| match l.as_ref() {
                pt::Expression::NumberLiteral(_, v, _, _) => v.replace('_', "").parse().ok(),
                _ => None,
            }),
        },
        other => TypeDesc::Other(format!("{other:?}")),
    }
}

fn body_facts(body: Option<&pt::Statement>, ctx: &ProjectContext) -> Vec<SourceFact> {
    let mut ex = Extractor { ctx, facts: Vec::new() };
    if let Some(stmt) = body {
        ex.stmt(stmt);
    }
    ex.facts
}

/// Statement/expression walker that emits [`SourceFact`]s in source order.
struct Extractor<'a> {
    ctx: &'a ProjectContext,
    facts: Vec<SourceFact>,
}

impl Extractor<'_> {
    fn stmt(&mut self, s: &pt::Statement) {
        use pt::Statement::*;
        match s {
            Block { statements, .. } => statements.iter().for_each(|st| self.stmt(st)),
            If(_, cond, then_branch, else_branch) => {
                self.condition(cond);
                self.expr(cond);
                self.stmt(then_branch);
                if let Some(e) = else_branch {
                    self.stmt(e);
                }
            }
            While(_, cond, body) => {
                self.expr(cond);
                self.stmt(body);
            }
            DoWhile(_, body, cond) => {
                self.stmt(body);
                self.expr(cond);
            }
            For(_, init, cond, update, body) => {
                if let Some(st) = init {
                    self.stmt(st);
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                if let Some(u) = update {
                    self.expr(u);
                }
                if let Some(b) = body {
                    self.stmt(b);
                }
            }
            Expression(_, expr) => {
                if let pt::Expression::Variable(id) = expr {
                    if id.name == "_" {
                        self.facts.push(SourceFact::Placeholder);
                        return;
                    }
                }
                self.expr(expr);
            }
            VariableDefinition(_, _, init) => {
                if let Some(e) = init {
                    self.expr(e);
                }
            }
            Return(_, value) => {
                if let Some(e) = value {
                    self.expr(e);
                }
            }
            Revert(_, _, args) => args.iter().for_each(|e| self.expr(e)),
            RevertNamedArgs(_, _, args) => args.iter().for_each(|a| self.expr(&a.expr)),
            Emit(_, call) => {
                if let pt::Expression::FunctionCall(_, callee, args) = call {
                    if let Some(event) = last_ident(callee) {
                        self.facts.push(SourceFact::EmitEvent { event });
                    }
                    args.iter().for_each(|e| self.expr(e));
                }
            }
            Try(_, expr, returns_clause, catches) => {
                self.expr(expr);
                if let Some((_, body)) = returns_clause {
                    self.stmt(body);
                }
                for catch in catches {
                    match catch {
                        pt::CatchClause::Simple(_, _, body)
                        | pt::CatchClause::Named(_, _, _, body) => self.stmt(body),
                    }
                }
            }
            Args(_, args) => args.iter().for_each(|a| self.expr(&a.expr)),
            Assembly { .. } | Continue(_) | Break(_) | Error(_) => {}
        }
    }

    fn expr(&mut self, e: &pt::Expression) {
        use pt::Expression::*;
        match e {
            FunctionCall(_, callee, args) => self.call(callee, args),
            FunctionCallBlock(_, callee, block) => self.call_block(callee, block),
            NamedFunctionCall(_, callee, args) => {
                if let MemberAccess(_, recv, member) = callee.as_ref() {
                    self.member_call(recv, member, 0);
                }
                args.iter().for_each(|a| self.expr(&a.expr));
            }
            Assign(_, lhs, rhs) => {
                self.assignment(lhs, Some(rhs), false);
                self.expr(rhs);
            }
            AssignOr(_, lhs, rhs)
            | AssignAnd(_, lhs, rhs)
            | AssignXor(_, lhs, rhs)
            | AssignShiftLeft(_, lhs, rhs)
            | AssignShiftRight(_, lhs, rhs)
            | AssignAdd(_, lhs, rhs)
            | AssignSubtract(_, lhs, rhs)
            | AssignMultiply(_, lhs, rhs)
            | AssignDivide(_, lhs, rhs)
            | AssignModulo(_, lhs, rhs) => {
                self.assignment(lhs, None, true);
                self.expr(rhs);
            }
            ArraySubscript(_, base, index) => {
                self.subscript_read(base, index.as_deref());
                self.expr(base);
                if let Some(ix) = index {
                    self.expr(ix);
                }
            }
            MemberAccess(_, base, _) => self.expr(base),
            Delete(_, inner) => {
                if let Variable(id) = inner.as_ref() {
                    self.facts.push(SourceFact::AssignsVar {
                        subject: id.name.clone(),
                        value: AssignedValue::Other,
                    });
                }
                self.expr(inner);
            }
            Not(_, inner)
            | BitwiseNot(_, inner)
            | PreIncrement(_, inner)
            | PreDecrement(_, inner)
            | PostIncrement(_, inner)
            | PostDecrement(_, inner)
            | UnaryPlus(_, inner)
            | Negate(_, inner)
            | Parenthesis(_, inner)
            | New(_, inner) => self.expr(inner),
            Power(_, a, b)
            | Multiply(_, a, b)
            | Divide(_, a, b)
            | Modulo(_, a, b)
            | Add(_, a, b)
            | Subtract(_, a, b)
            | ShiftLeft(_, a, b)
            | ShiftRight(_, a, b)
            | BitwiseAnd(_, a, b)
            | BitwiseXor(_, a, b)
            | BitwiseOr(_, a, b)
            | Less(_, a, b)
            | More(_, a, b)
            | LessEqual(_, a, b)
            | MoreEqual(_, a, b)
            | Equal(_, a, b)
            | NotEqual(_, a, b)
            | And(_, a, b)
            | Or(_, a, b) => {
                self.expr(a);
                self.expr(b);
            }
            ConditionalOperator(_, c, t, f) => {
                self.expr(c);
                self.expr(t);
                self.expr(f);
            }
            ArraySlice(_, base, from, to) => {
                self.expr(base);
                if let Some(e) = from {
                    self.expr(e);
                }
                if let Some(e) = to {
                    self.expr(e);
                }
            }
            ArrayLiteral(_, items) => items.iter().for_each(|e| self.expr(e)),
            List(_, params) => {
                for (_, p) in params {
                    if let Some(p) = p {
                        self.expr(&p.ty);
                    }
                }
            }
            Variable(_) | BoolLiteral(..) | NumberLiteral(..) | RationalNumberLiteral(..)
            | HexNumberLiteral(..) | StringLiteral(..) | Type(..) | HexLiteral(..)
            | AddressLiteral(..) => {}
        }
    }

    fn call(&mut self, callee: &pt::Expression, args: &[pt::Expression]) {
        match callee {
            pt::Expression::Variable(id) if id.name == "require" => {
                if let Some(cond) = args.first() {
                    self.condition(cond);
                    self.expr(cond);
                }
                args.iter().skip(1).for_each(|e| self.expr(e));
            }
            pt::Expression::Variable(id) => {
                // Bare `E(...)` statements are the pre-0.4.21 emit syntax
                // when `E` names an event declared in the project.
                if self.ctx.events.contains(&id.name) {
                    self.facts.push(SourceFact::EmitEvent { event: id.name.clone() });
                }
                args.iter().for_each(|e| self.expr(e));
            }
            pt::Expression::MemberAccess(_, recv, member) => {
                self.member_call(recv, member, args.len());
                args.iter().for_each(|e| self.expr(e));
            }
            _ => {
                self.expr(callee);
                args.iter().for_each(|e| self.expr(e));
            }
        }
    }

    /// `callee{named args}(...)`: an ether transfer when the block carries
    /// a `value` argument.
    fn call_block(&mut self, callee: &pt::Expression, block: &pt::Statement) {
        let carries_value = match block {
            pt::Statement::Args(_, args) => args.iter().any(|a| a.name.name == "value"),
            _ => false,
        };
        if let pt::Expression::MemberAccess(_, recv, member) = callee {
            if carries_value {
                self.facts.push(SourceFact::EtherTransfer {
                    to_msg_sender: mentions_msg_sender(recv),
                });
            }
            self.member_call(recv, member, 0);
        } else {
            self.expr(callee);
        }
        if let pt::Statement::Args(_, args) = block {
            args.iter().for_each(|a| self.expr(&a.expr));
        }
    }

    fn member_call(&mut self, recv: &pt::Expression, member: &pt::Identifier, arg_count: usize) {
        // `x.transfer(v)` / `x.send(v)`: the one-argument forms move ether.
        if (member.name == "transfer" || member.name == "send") && arg_count == 1 {
            self.facts.push(SourceFact::EtherTransfer {
                to_msg_sender: mentions_msg_sender(recv),
            });
        }
        // Legacy `x.call.value(v)(...)`.
        if member.name == "value" {
            if let pt::Expression::MemberAccess(_, base, call_ident) = recv {
                if call_ident.name == "call" {
                    self.facts.push(SourceFact::EtherTransfer {
                        to_msg_sender: mentions_msg_sender(base),
                    });
                }
            }
        }
        match recv {
            pt::Expression::Variable(id) if is_builtin(&id.name) => {}
            pt::Expression::Variable(id) => {
                if self.ctx.libraries.contains(&id.name) {
                    self.facts.push(SourceFact::LibraryQualifiedCall {
                        library: id.name.clone(),
                        member: member.name.clone(),
                    });
                } else {
                    self.facts.push(SourceFact::ExternalMemberCall {
                        receiver: id.name.clone(),
                        member: member.name.clone(),
                    });
                }
            }
            _ => {
                self.facts.push(SourceFact::ExternalMemberCall {
                    receiver: UNRESOLVED.to_string(),
                    member: member.name.clone(),
                });
                self.expr(recv);
            }
        }
    }

    fn assignment(&mut self, lhs: &pt::Expression, rhs: Option<&pt::Expression>, compound: bool) {
        match lhs {
            pt::Expression::Variable(id) => {
                let value = match rhs {
                    Some(pt::Expression::BoolLiteral(_, b)) => AssignedValue::BoolLiteral(*b),
                    Some(pt::Expression::NumberLiteral(_, v, _, _)) => {
                        AssignedValue::NumberLiteral(v.clone())
                    }
                    Some(pt::Expression::Not(..)) => AssignedValue::Negation,
                    _ => AssignedValue::Other,
                };
                self.facts.push(SourceFact::AssignsVar { subject: id.name.clone(), value });
            }
            pt::Expression::ArraySubscript(_, base, index) => {
                // A compound assignment reads the entry before writing it.
                if compound {
                    self.subscript_read(base, index.as_deref());
                }
                if let Some(ix) = index {
                    self.expr(ix);
                }
            }
            pt::Expression::List(_, params) => {
                for (_, p) in params {
                    if let Some(p) = p {
                        if let pt::Expression::Variable(id) = &p.ty {
                            self.facts.push(SourceFact::AssignsVar {
                                subject: id.name.clone(),
                                value: AssignedValue::Other,
                            });
                        }
                    }
                }
            }
            pt::Expression::Parenthesis(_, inner) => self.assignment(inner, rhs, compound),
            _ => {}
        }
    }

    fn subscript_read(&mut self, base: &pt::Expression, index: Option<&pt::Expression>) {
        if let (pt::Expression::Variable(id), Some(ix)) = (base, index) {
            if is_msg_sender(ix) {
                self.facts.push(SourceFact::ReadsMsgSenderEntry { subject: id.name.clone() });
            }
        }
    }

    /// Emit a conditional-check fact for every identifier read inside a
    /// `require`/`if` condition. Callees of function calls are skipped;
    /// their arguments are not.
    fn condition(&mut self, e: &pt::Expression) {
        use pt::Expression::*;
        match e {
            Variable(id) => {
                if id.name != "_" && !is_builtin(&id.name) {
                    self.facts.push(SourceFact::ConditionalCheck { subject: id.name.clone() });
                }
            }
            Not(_, inner) | Parenthesis(_, inner) => self.condition(inner),
            MemberAccess(_, base, _) => {
                if let Some(root) = root_ident(base) {
                    if !is_builtin(&root) {
                        self.facts.push(SourceFact::ConditionalCheck { subject: root });
                    }
                }
            }
            ArraySubscript(_, base, index) => {
                if let Some(root) = root_ident(base) {
                    if !is_builtin(&root) {
                        self.facts.push(SourceFact::ConditionalCheck { subject: root });
                    }
                }
                if let Some(ix) = index {
                    self.condition(ix);
                }
            }
            FunctionCall(_, _, args) => args.iter().for_each(|a| self.condition(a)),
            ConditionalOperator(_, c, t, f) => {
                self.condition(c);
                self.condition(t);
                self.condition(f);
            }
            Power(_, a, b) | Multiply(_, a, b) | Divide(_, a, b) | Modulo(_, a, b)
            | Add(_, a, b) | Subtract(_, a, b) | ShiftLeft(_, a, b) | ShiftRight(_, a, b)
            | BitwiseAnd(_, a, b) | BitwiseXor(_, a, b) | BitwiseOr(_, a, b) | Less(_, a, b)
            | More(_, a, b) | LessEqual(_, a, b) | MoreEqual(_, a, b) | Equal(_, a, b)
            | NotEqual(_, a, b) | And(_, a, b) | Or(_, a, b) => {
                self.condition(a);
                self.condition(b);
            }
            _ => {}
        }
    }
}

fn last_ident(expr: &pt::Expression) -> Option<String> {
    match expr {
        pt::Expression::Variable(id) => Some(id.name.clone()),
        pt::Expression::MemberAccess(_, _, member) => Some(member.name.clone()),
        _ => None,
    }
}

fn root_ident(expr: &pt::Expression) -> Option<String> {
    match expr {
        pt::Expression::Variable(id) => Some(id.name.clone()),
        pt::Expression::MemberAccess(_, base, _)
        | pt::Expression::ArraySubscript(_, base, _)
        | pt::Expression::Parenthesis(_, base) => root_ident(base),
        _ => None,
    }
}

fn is_msg_sender(expr: &pt::Expression) -> bool {
    match expr {
        pt::Expression::MemberAccess(_, base, member) => {
            member.name == "sender"
                && matches!(base.as_ref(), pt::Expression::Variable(id) if id.name == "msg")
        }
        pt::Expression::Parenthesis(_, inner) => is_msg_sender(inner),
        _ => false,
    }
}

fn mentions_msg_sender(expr: &pt::Expression) -> bool {
    if is_msg_sender(expr) {
        return true;
    }
    expr_children(expr).into_iter().any(mentions_msg_sender)
}

fn expr_children(expr: &pt::Expression) -> Vec<&pt::Expression> {
    use pt::Expression::*;
    match expr {
        PostIncrement(_, a) | PostDecrement(_, a) | New(_, a) | Parenthesis(_, a)
        | Not(_, a) | BitwiseNot(_, a) | Delete(_, a) | PreIncrement(_, a)
        | PreDecrement(_, a) | UnaryPlus(_, a) | Negate(_, a) => vec![a],
        MemberAccess(_, a, _) => vec![a],
        ArraySubscript(_, a, b) => {
            let mut v: Vec<&pt::Expression> = vec![a];
            if let Some(b) = b {
                v.push(b);
            }
            v
        }
        ArraySlice(_, a, b, c) => {
            let mut v: Vec<&pt::Expression> = vec![a];
            v.extend(b.as_deref());
            v.extend(c.as_deref());
            v
        }
        FunctionCall(_, callee, args) => {
            let mut v: Vec<&pt::Expression> = vec![callee];
            v.extend(args.iter());
            v
        }
        FunctionCallBlock(_, callee, _) => vec![callee],
        NamedFunctionCall(_, callee, args) => {
            let mut v: Vec<&pt::Expression> = vec![callee];
            v.extend(args.iter().map(|a| &a.expr));
            v
        }
        Power(_, a, b) | Multiply(_, a, b) | Divide(_, a, b) | Modulo(_, a, b) | Add(_, a, b)
        | Subtract(_, a, b) | ShiftLeft(_, a, b) | ShiftRight(_, a, b) | BitwiseAnd(_, a, b)
        | BitwiseXor(_, a, b) | BitwiseOr(_, a, b) | Less(_, a, b) | More(_, a, b)
        | LessEqual(_, a, b) | MoreEqual(_, a, b) | Equal(_, a, b) | NotEqual(_, a, b)
        | And(_, a, b) | Or(_, a, b) | Assign(_, a, b) | AssignOr(_, a, b)
        | AssignAnd(_, a, b) | AssignXor(_, a, b) | AssignShiftLeft(_, a, b)
        | AssignShiftRight(_, a, b) | AssignAdd(_, a, b) | AssignSubtract(_, a, b)
        | AssignMultiply(_, a, b) | AssignDivide(_, a, b) | AssignModulo(_, a, b) => {
            vec![a, b]
        }
        ConditionalOperator(_, a, b, c) => vec![a, b, c],
        ArrayLiteral(_, items) => items.iter().collect(),
        List(_, params) => params.iter().filter_map(|(_, p)| p.as_ref()).map(|p| &p.ty).collect(),
        Variable(_) | BoolLiteral(..) | NumberLiteral(..) | RationalNumberLiteral(..)
        | HexNumberLiteral(..) | StringLiteral(..) | Type(..) | HexLiteral(..)
        | AddressLiteral(..) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ImportRef, ProjectStatus, SourceFile};
    use crate::version::ProjectPragma;
    use std::path::PathBuf;

    fn project_of(files: &[(&str, &str)]) -> ProjectRecord {
        ProjectRecord {
            project_id: "p".into(),
            root: PathBuf::from("/corpus/p"),
            files: files
                .iter()
                .map(|(rel, content)| SourceFile {
                    abs_path: PathBuf::from(format!("/corpus/p/{rel}")),
                    corpus_rel: format!("p/{rel}"),
                    project_rel: rel.to_string(),
                    content: content.to_string(),
                    pragma_texts: Vec::new(),
                    imports: Vec::<ImportRef>::new(),
                })
                .collect(),
            status: ProjectStatus::Parsed,
            pragma: ProjectPragma::Unconstrained,
        }
    }

    fn parse_one(source: &str) -> Universe {
        parse_project(&project_of(&[("Main.sol", source)])).unwrap()
    }

    fn facts_of<'a>(u: &'a Universe, entity: &str, function: &str) -> &'a [SourceFact] {
        let e = u.entity(entity).unwrap();
        &e.functions.iter().find(|f| f.name == function).unwrap().facts
    }

    #[test]
    fn entity_kinds_and_bases_are_lowered() {
        let u = parse_one(
            "abstract contract Base {}\ninterface IThing {}\nlibrary Util {}\ncontract Main is Base, IThing {}",
        );
        assert_eq!(u.entity("Base").unwrap().kind, EntityKind::AbstractContract);
        assert_eq!(u.entity("IThing").unwrap().kind, EntityKind::Interface);
        assert_eq!(u.entity("Util").unwrap().kind, EntityKind::Library);
        assert_eq!(u.entity("Main").unwrap().bases, vec!["Base", "IThing"]);
    }

    #[test]
    fn legacy_constructor_and_fallback_are_classified() {
        let u = parse_one(
            "contract Legacy { function Legacy() public {} function() public payable {} }",
        );
        let e = u.entity("Legacy").unwrap();
        assert_eq!(e.functions[0].role, FunctionRole::Constructor);
        assert_eq!(e.functions[1].role, FunctionRole::Fallback);

        let u = parse_one(
            "contract Modern { constructor() {} fallback() external payable {} receive() external payable {} }",
        );
        let e = u.entity("Modern").unwrap();
        let roles: Vec<FunctionRole> = e.functions.iter().map(|f| f.role).collect();
        assert_eq!(
            roles,
            vec![FunctionRole::Constructor, FunctionRole::Fallback, FunctionRole::Receive]
        );
    }

    #[test]
    fn default_visibility_depends_on_container() {
        let u = parse_one(
            "interface I { function f() external; }\ncontract C { function g() {} uint stored; }",
        );
        assert_eq!(u.entity("I").unwrap().functions[0].visibility, Visibility::External);
        let c = u.entity("C").unwrap();
        assert_eq!(c.functions[0].visibility, Visibility::Public);
        assert_eq!(c.state_vars[0].visibility, Visibility::Internal);
    }

    #[test]
    fn constant_mutability_is_view() {
        let u = parse_one("contract C { function f() public constant returns (uint) { return 1; } }");
        assert_eq!(u.entity("C").unwrap().functions[0].mutability, Mutability::View);
    }

    #[test]
    fn state_var_types_and_storage_classes_are_lowered() {
        let u = parse_one(
            "contract C { address public owner; bool paused; uint128 constant FEE = 1; \
             mapping(address => uint256) credits; uint256[] list; IToken token; }",
        );
        let vars = &u.entity("C").unwrap().state_vars;
        assert_eq!(vars[0].visibility, Visibility::Public);
        assert_eq!(vars[0].ty, TypeDesc::Address);
        assert_eq!(vars[1].ty, TypeDesc::Bool);
        assert_eq!(vars[2].mutability, VarMutability::Constant);
        assert_eq!(
            vars[3].ty,
            TypeDesc::Mapping {
                key: Box::new(TypeDesc::Address),
                value: Box::new(TypeDesc::Uint(256))
            }
        );
        assert_eq!(vars[4].ty, TypeDesc::Array { elem: Box::new(TypeDesc::Uint(256)), len: None });
        assert_eq!(vars[5].ty, TypeDesc::Named("IToken".into()));
    }

    #[test]
    fn require_and_if_conditions_emit_checks() {
        let u = parse_one(
            "contract C { address owner; bool paused; \
             function f() public { require(msg.sender == owner, \"no\"); if (!paused) { owner = msg.sender; } } }",
        );
        let facts = facts_of(&u, "C", "f");
        assert_eq!(
            facts,
            &[
                SourceFact::ConditionalCheck { subject: "owner".into() },
                SourceFact::ConditionalCheck { subject: "paused".into() },
                SourceFact::AssignsVar { subject: "owner".into(), value: AssignedValue::Other },
            ]
        );
    }

    #[test]
    fn assignments_carry_literal_and_negation_detail() {
        let u = parse_one(
            "contract C { bool paused; uint lock; \
             function f() public { paused = true; paused = !paused; lock = 2; } }",
        );
        let facts = facts_of(&u, "C", "f");
        assert_eq!(
            facts,
            &[
                SourceFact::AssignsVar {
                    subject: "paused".into(),
                    value: AssignedValue::BoolLiteral(true)
                },
                SourceFact::AssignsVar { subject: "paused".into(), value: AssignedValue::Negation },
                SourceFact::AssignsVar {
                    subject: "lock".into(),
                    value: AssignedValue::NumberLiteral("2".into())
                },
            ]
        );
    }

    #[test]
    fn modifier_bodies_keep_fact_order_with_placeholder() {
        let u = parse_one(
            "contract C { bool locked; \
             modifier guard() { require(!locked); locked = true; _; locked = false; } }",
        );
        let m = &u.entity("C").unwrap().modifiers[0];
        assert_eq!(m.name, "guard");
        assert_eq!(
            m.facts,
            vec![
                SourceFact::ConditionalCheck { subject: "locked".into() },
                SourceFact::AssignsVar {
                    subject: "locked".into(),
                    value: AssignedValue::BoolLiteral(true)
                },
                SourceFact::Placeholder,
                SourceFact::AssignsVar {
                    subject: "locked".into(),
                    value: AssignedValue::BoolLiteral(false)
                },
            ]
        );
    }

    #[test]
    fn modifier_invocations_are_recorded_on_functions() {
        let u = parse_one(
            "contract C { modifier onlyOwner() { _; } \
             function f() public onlyOwner returns (uint) { return 1; } }",
        );
        let f = &u.entity("C").unwrap().functions[0];
        assert_eq!(f.modifiers_invoked, vec!["onlyOwner"]);
    }

    #[test]
    fn ether_transfer_forms_are_detected() {
        let u = parse_one(
            "contract C { address payable other; \
             function a() public { payable(msg.sender).transfer(1); } \
             function b() public { other.send(2); } \
             function c() public { (bool ok, ) = payable(msg.sender).call{value: 3}(\"\"); require(ok); } \
             function d() public { other.call.value(4)(\"\"); } }",
        );
        let transfer = |f: &str| {
            facts_of(&u, "C", f)
                .iter()
                .find_map(|fact| match fact {
                    SourceFact::EtherTransfer { to_msg_sender } => Some(*to_msg_sender),
                    _ => None,
                })
                .unwrap()
        };
        assert!(transfer("a"));
        assert!(!transfer("b"));
        assert!(transfer("c"));
        assert!(!transfer("d"));
    }

    #[test]
    fn mapping_reads_keyed_by_sender_are_detected() {
        let u = parse_one(
            "contract C { mapping(address => uint256) credits; \
             function w() public { uint256 bal = credits[msg.sender]; credits[msg.sender] = 0; \
             payable(msg.sender).transfer(bal); } \
             function x() public { credits[msg.sender] -= 1; } }",
        );
        let w = facts_of(&u, "C", "w");
        // The plain write `credits[msg.sender] = 0` is not a read.
        assert_eq!(
            w.iter()
                .filter(|f| matches!(f, SourceFact::ReadsMsgSenderEntry { .. }))
                .count(),
            1
        );
        let x = facts_of(&u, "C", "x");
        // A compound assignment reads before writing.
        assert!(x.contains(&SourceFact::ReadsMsgSenderEntry { subject: "credits".into() }));
    }

    #[test]
    fn emits_resolve_through_both_syntaxes() {
        let u = parse_one(
            "contract C { event Done(uint v); event Legacy(); \
             function f() public { emit Done(1); } \
             function g() public { Legacy(); } \
             function h() public { helper(); } \
             function helper() internal {} }",
        );
        assert_eq!(facts_of(&u, "C", "f"), &[SourceFact::EmitEvent { event: "Done".into() }]);
        assert_eq!(facts_of(&u, "C", "g"), &[SourceFact::EmitEvent { event: "Legacy".into() }]);
        assert!(facts_of(&u, "C", "h").is_empty());
    }

    #[test]
    fn events_resolve_across_project_files() {
        let u = parse_project(&project_of(&[
            ("Events.sol", "contract Base { event Ping(); }"),
            ("Main.sol", "contract Main { function f() public { Ping(); } }"),
        ]))
        .unwrap();
        assert_eq!(
            facts_of(&u, "Main", "f"),
            &[SourceFact::EmitEvent { event: "Ping".into() }]
        );
    }

    #[test]
    fn member_calls_classify_against_project_libraries() {
        let u = parse_project(&project_of(&[
            ("SafeMath.sol", "library SafeMath { function add(uint a, uint b) internal pure returns (uint) { return a + b; } }"),
            (
                "Main.sol",
                "contract Main { IToken token; \
                 function f(uint x) public returns (uint) { token.mint(x); return SafeMath.add(x, 1); } }",
            ),
        ]))
        .unwrap();
        let facts = facts_of(&u, "Main", "f");
        assert!(facts.contains(&SourceFact::ExternalMemberCall {
            receiver: "token".into(),
            member: "mint".into()
        }));
        assert!(facts.contains(&SourceFact::LibraryQualifiedCall {
            library: "SafeMath".into(),
            member: "add".into()
        }));
    }

    #[test]
    fn builtin_receivers_are_not_member_calls() {
        let u = parse_one(
            "contract C { function f() public view returns (bytes memory) { return abi.encode(msg.sender, block.timestamp); } }",
        );
        assert!(facts_of(&u, "C", "f").is_empty());
    }

    #[test]
    fn using_directives_collect_library_names() {
        let u = parse_one(
            "library SafeMath {}\ncontract C { using SafeMath for uint256; using Vendored for *; }",
        );
        assert_eq!(u.entity("C").unwrap().using_libraries, vec!["SafeMath", "Vendored"]);
    }

    #[test]
    fn unparseable_files_report_the_failing_file() {
        let err = parse_project(&project_of(&[("Broken.sol", "contract {{{{")])).unwrap_err();
        let FrontendError::Parse { file, .. } = err;
        assert_eq!(file, "p/Broken.sol");
    }

    #[test]
    fn named_returns_are_distinguished() {
        let u = parse_one(
            "contract C { function named() public pure returns (uint total) { total = 1; } \
             function unnamed() public pure returns (uint) { return 1; } }",
        );
        let e = u.entity("C").unwrap();
        assert_eq!(e.functions[0].returns[0].name.as_deref(), Some("total"));
        assert_eq!(e.functions[1].returns[0].name, None);
    }

    #[test]
    fn signatures_use_canonical_param_types() {
        let u = parse_one(
            "contract C { function f(uint256 a, address b, bytes32[] memory c) public {} }",
        );
        assert_eq!(
            u.entity("C").unwrap().functions[0].signature(),
            "f(uint256,address,bytes32[])"
        );
    }

    #[test]
    fn unchecked_blocks_and_loops_are_walked() {
        let u = parse_one(
            "contract C { uint total; \
             function f(uint[] memory xs) public { unchecked { for (uint i = 0; i < xs.length; i++) { total += 1; } } } }",
        );
        assert!(facts_of(&u, "C", "f")
            .contains(&SourceFact::AssignsVar { subject: "total".into(), value: AssignedValue::Other }));
    }
}
