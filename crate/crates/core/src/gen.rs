//! Constraint generation over the syntax tree.
//!
//! Each program or module yields a [`ModuleEntry`] holding the constraints
//! of its own variables and a template per contained function or
//! subroutine. Variables inside a function or a subroutine with parameters
//! get abstract units; everything else gets monomorphic unit variables.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::diag::{Diagnostic, Pos, Provenance, Reason, Span};
use crate::frontend::ast::*;
use crate::intrinsics;
use crate::units::{LitOrVar, Slot, UnitExpr, UnitVar};

/// Issues call ids and literal ids from one counter; 0 is reserved for
/// calls through `external` names.
#[derive(Debug)]
pub struct IdGen {
    next: u64,
}

impl Default for IdGen {
    fn default() -> Self {
        IdGen { next: 1 }
    }
}

impl IdGen {
    pub fn fresh(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// Stored constraints of one function or subroutine.
#[derive(Clone, Debug, PartialEq)]
pub struct Template {
    pub name: String,
    pub arity: usize,
    pub is_function: bool,
    /// Constraints from the body.
    pub body: Vec<Constraint>,
    /// Links between each parameter's unit and its positional slot.
    pub links: Vec<Constraint>,
}

impl Template {
    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.body.iter().chain(self.links.iter())
    }

    pub fn len(&self) -> usize {
        self.body.len() + self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub type TemplateMap = BTreeMap<String, Template>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Program,
    Module,
    /// A function or subroutine outside any module or program.
    Procedure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleEntry {
    pub name: String,
    pub kind: EntryKind,
    pub file: Arc<str>,
    pub constraints: Vec<Constraint>,
    pub templates: TemplateMap,
}

pub type ModuleMap = BTreeMap<String, ModuleEntry>;

/// Shape of a callable name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcSig {
    pub arity: usize,
    pub is_function: bool,
}

/// Names a module makes visible through `use`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModuleInterface {
    pub vars: BTreeSet<String>,
    pub procs: BTreeMap<String, ProcSig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    Variable,
    Parameter,
    Result,
}

/// A declared name whose unit can be reported.
#[derive(Clone, Debug, PartialEq)]
pub struct VarRecord {
    pub file: Arc<str>,
    pub name: String,
    pub pos: Pos,
    /// Start of the statement that declares the name; annotations for it
    /// are inserted before this line.
    pub anchor: Pos,
    pub atom: UnitVar,
    pub role: VarRole,
    /// The polymorphic function or subroutine owning this variable.
    pub owner: Option<String>,
    /// The program unit the name is declared in.
    pub scope: String,
    pub annotated: bool,
}

/// A literal whose unit is a monomorphic unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct LiteralRecord {
    pub file: Arc<str>,
    pub span: Span,
    pub atom: UnitVar,
    /// Part of a larger expression rather than the whole right-hand side
    /// of an assignment.
    pub compound: bool,
    pub text: String,
}

#[derive(Clone, Debug, Default)]
pub struct GenOutput {
    pub modules: ModuleMap,
    /// Entry names in generation order.
    pub order: Vec<String>,
    pub interfaces: BTreeMap<String, ModuleInterface>,
    pub vars: Vec<VarRecord>,
    pub literals: Vec<LiteralRecord>,
    pub diags: Vec<Diagnostic>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Scalar,
    Array,
    External,
    Procedure,
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    kind: Kind,
    unit: UnitExpr,
    sig: Option<ProcSig>,
}

/// Ordered typing environment; later entries shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: Vec<Entry>,
}

impl TypeEnv {
    fn push(&mut self, name: &str, kind: Kind, unit: UnitExpr) {
        self.entries.push(Entry { name: name.to_string(), kind, unit, sig: None });
    }

    fn push_proc(&mut self, name: &str, sig: ProcSig) {
        self.entries.push(Entry { name: name.to_string(), kind: Kind::Procedure, unit: UnitExpr::Unitless, sig: Some(sig) });
    }

    fn lookup(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.name == name)
    }

    fn lookup_mut(&mut self, name: &str) -> Option<&mut Entry> {
        self.entries.iter_mut().rev().find(|e| e.name == name)
    }

    fn lookup_callable(&self, name: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.name == name && matches!(e.kind, Kind::Procedure | Kind::External))
    }

    /// Pushes an entry whose unit is the abstract unit of `x` in `fs`;
    /// used by tests that hand-build environments.
    pub fn push_param(&mut self, fs: &str, x: &str) {
        self.push(x, Kind::Scalar, UnitExpr::Var(UnitVar::param_abs(fs, Slot::Var(x.to_string()))));
    }

    pub fn push_var(&mut self, scope: &str, x: &str) {
        self.push(x, Kind::Scalar, UnitExpr::Var(UnitVar::var(scope, x)));
    }

    /// The function or subroutine for which this is a polymorphic context.
    pub fn poly_owner(&self) -> Option<&str> {
        self.entries.iter().rev().find_map(|e| match &e.unit {
            UnitExpr::Var(UnitVar::ParamAbs { fs, slot: Slot::Var(x) }) if *x == e.name => Some(fs.as_str()),
            _ => None,
        })
    }
}

/// True iff `fs` owns the most recent abstract-unit entry in `env`.
pub fn polycontext(fs: &str, env: &TypeEnv) -> bool {
    env.poly_owner() == Some(fs)
}

type GResult<T> = Result<T, Diagnostic>;

/// Generates constraints for every program unit of a parsed file.
/// `imports` supplies the interfaces of modules defined elsewhere.
pub fn generate_file(
    file: &SourceFile,
    imports: &BTreeMap<String, ModuleInterface>,
    ids: &mut IdGen,
    out: &mut GenOutput,
) {
    let path: Arc<str> = Arc::from(file.path.as_str());
    for pu in &file.units {
        let mut g = Gen { file: path.clone(), ids, out: &mut *out, imports };
        if let Err(d) = g.top_unit(pu) {
            out.diags.push(d);
        }
    }
}

struct Gen<'a> {
    file: Arc<str>,
    ids: &'a mut IdGen,
    out: &'a mut GenOutput,
    imports: &'a BTreeMap<String, ModuleInterface>,
}

/// Mutable state while walking one program unit.
struct Scope {
    /// Name of the program unit.
    name: String,
    /// Owner of abstract units, if polymorphic.
    poly: Option<String>,
    env: TypeEnv,
    /// Names declared by this unit itself.
    own: HashSet<String>,
    constraints: Vec<Constraint>,
    /// Monomorphic variables related to some polymorphic unit.
    tainted: HashSet<UnitVar>,
    /// Index into `out.vars` for each own name.
    records: BTreeMap<String, usize>,
}

impl Scope {
    fn add(&mut self, c: Constraint) {
        let poly = c.lhs.vars().into_iter().chain(c.rhs.vars()).any(|v| v.is_polymorphic());
        if poly {
            for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
                if let UnitVar::LitOrVar(LitOrVar::Var { .. }) = v {
                    self.tainted.insert(v.clone());
                }
            }
        }
        self.constraints.push(c);
    }
}

impl Gen<'_> {
    fn prov(&self, span: Span, reason: Reason) -> Provenance {
        Provenance::new(&self.file, span, reason)
    }

    fn err(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(&self.file, span, msg)
    }

    fn top_unit(&mut self, pu: &ProgramUnit) -> GResult<()> {
        let kind = match pu.kind {
            UnitKind::Program => EntryKind::Program,
            UnitKind::Module => EntryKind::Module,
            _ => EntryKind::Procedure,
        };
        let name = pu.name.name.clone();
        if self.out.modules.contains_key(&name) {
            return Err(self.err(pu.name.span, format!("program unit `{name}` defined more than once")));
        }
        let mut entry =
            ModuleEntry { name: name.clone(), kind, file: self.file.clone(), constraints: vec![], templates: BTreeMap::new() };
        if kind == EntryKind::Procedure {
            let t = self.procedure(pu, &TypeEnv::default())?;
            entry.templates.insert(name.clone(), t);
            self.out.order.push(name.clone());
            self.out.modules.insert(name, entry);
            return Ok(());
        }

        let mut env = TypeEnv::default();
        self.import_uses(pu, &mut env)?;
        let mut iface = ModuleInterface::default();
        for c in &pu.contains {
            let sig = ProcSig { arity: c.params.len(), is_function: matches!(c.kind, UnitKind::Function { .. }) };
            if iface.procs.insert(c.name.name.clone(), sig.clone()).is_some() {
                return Err(self.err(c.name.span, format!("duplicate definition of `{}`", c.name.name)));
            }
            env.push_proc(&c.name.name, sig);
        }
        let mut scope = Scope {
            name: name.clone(),
            poly: None,
            env,
            own: HashSet::new(),
            constraints: vec![],
            tainted: HashSet::new(),
            records: BTreeMap::new(),
        };
        self.declarations(pu, &mut scope)?;
        for v in &scope.own {
            if matches!(scope.env.lookup(v).map(|e| e.kind), Some(Kind::Scalar | Kind::Array)) {
                iface.vars.insert(v.clone());
            }
        }
        // contained procedures see the host's declarations
        let host = scope.env.clone();
        for c in &pu.contains {
            let t = self.procedure(c, &host)?;
            entry.templates.insert(c.name.name.clone(), t);
        }
        self.annotations(pu, &mut scope)?;
        self.initializers(pu, &mut scope)?;
        self.block(&pu.body, &mut scope)?;
        entry.constraints = scope.constraints;
        self.out.interfaces.insert(name.clone(), iface);
        self.out.order.push(name.clone());
        self.out.modules.insert(name, entry);
        Ok(())
    }

    fn import_uses(&mut self, pu: &ProgramUnit, env: &mut TypeEnv) -> GResult<()> {
        for u in &pu.uses {
            let iface = self
                .imports
                .get(&u.name)
                .or_else(|| self.out.interfaces.get(&u.name))
                .ok_or_else(|| self.err(u.span, format!("cannot find module `{}`", u.name)))?
                .clone();
            for v in &iface.vars {
                env.push(v, Kind::Scalar, UnitExpr::Var(UnitVar::var(&u.name, v)));
            }
            for (p, sig) in &iface.procs {
                env.push_proc(p, sig.clone());
            }
        }
        Ok(())
    }

    fn procedure(&mut self, pu: &ProgramUnit, host: &TypeEnv) -> GResult<Template> {
        let name = pu.name.name.clone();
        let is_function = matches!(pu.kind, UnitKind::Function { .. });
        let poly = is_function || !pu.params.is_empty();
        let mut env = host.clone();
        self.import_uses(pu, &mut env)?;
        for c in &pu.contains {
            let sig = ProcSig { arity: c.params.len(), is_function: matches!(c.kind, UnitKind::Function { .. }) };
            env.push_proc(&c.name.name, sig);
        }
        let mut scope = Scope {
            name: name.clone(),
            poly: poly.then(|| name.clone()),
            env,
            own: HashSet::new(),
            constraints: vec![],
            tainted: HashSet::new(),
            records: BTreeMap::new(),
        };
        let unit_of = |x: &str| -> UnitExpr {
            if poly {
                UnitExpr::Var(UnitVar::param_abs(&name, Slot::Var(x.to_string())))
            } else {
                UnitExpr::Var(UnitVar::var(&name, x))
            }
        };
        // result and parameters, in slot order
        let mut slots: Vec<(usize, String, Span)> = vec![];
        if let Some(r) = pu.result_name() {
            scope.env.push(r, Kind::Scalar, unit_of(r));
            scope.own.insert(r.to_string());
            self.record(&mut scope, r, pu.header.start, pu.header.start, unit_of(r), VarRole::Result);
            slots.push((0, r.to_string(), pu.header));
        }
        let mut seen = HashSet::new();
        for (j, p) in pu.params.iter().enumerate() {
            if !seen.insert(p.name.clone()) {
                return Err(self.err(p.span, format!("duplicate parameter `{}`", p.name)));
            }
            scope.env.push(&p.name, Kind::Scalar, unit_of(&p.name));
            scope.own.insert(p.name.clone());
            self.record(&mut scope, &p.name, p.span.start, pu.header.start, unit_of(&p.name), VarRole::Parameter);
            slots.push((j + 1, p.name.clone(), p.span));
        }
        let host_for_children = {
            self.declarations(pu, &mut scope)?;
            scope.env.clone()
        };
        self.annotations(pu, &mut scope)?;
        self.initializers(pu, &mut scope)?;
        self.block(&pu.body, &mut scope)?;
        let mut links = vec![];
        if poly {
            for (k, x, span) in &slots {
                let env_unit = scope.env.lookup(x).map(|e| e.unit.clone()).unwrap_or_else(|| unit_of(x));
                links.push(Constraint::new(
                    env_unit,
                    UnitExpr::Var(UnitVar::param_abs(&name, Slot::Param(*k))),
                    self.prov(*span, Reason::ParameterLink),
                ));
            }
        }
        // nested procedures become templates of the enclosing module entry;
        // they are rare in the subset and are flattened here
        for c in &pu.contains {
            let t = self.procedure(c, &host_for_children)?;
            if self.out.modules.contains_key(&c.name.name) {
                return Err(self.err(c.name.span, format!("program unit `{}` defined more than once", c.name.name)));
            }
            self.out.order.push(c.name.name.clone());
            self.out.modules.entry(c.name.name.clone()).or_insert_with(|| ModuleEntry {
                name: c.name.name.clone(),
                kind: EntryKind::Procedure,
                file: self.file.clone(),
                constraints: vec![],
                templates: BTreeMap::from([(c.name.name.clone(), t)]),
            });
        }
        Ok(Template { name, arity: pu.params.len(), is_function, body: scope.constraints, links })
    }

    fn record(&mut self, scope: &mut Scope, name: &str, pos: Pos, anchor: Pos, unit: UnitExpr, role: VarRole) {
        let UnitExpr::Var(atom) = unit else { return };
        let idx = self.out.vars.len();
        self.out.vars.push(VarRecord {
            file: self.file.clone(),
            name: name.to_string(),
            pos,
            anchor,
            atom,
            role,
            owner: scope.poly.clone(),
            scope: scope.name.clone(),
            annotated: false,
        });
        scope.records.insert(name.to_string(), idx);
    }

    fn fresh_unit(&self, scope: &Scope, x: &str) -> UnitExpr {
        match &scope.poly {
            Some(f) => UnitExpr::Var(UnitVar::param_abs(f, Slot::Var(x.to_string()))),
            None => UnitExpr::Var(UnitVar::var(&scope.name, x)),
        }
    }

    fn declare(&mut self, scope: &mut Scope, name: &Ident, kind: Kind, anchor: Pos) {
        if scope.own.contains(&name.name) {
            if let Some(e) = scope.env.lookup_mut(&name.name) {
                if kind == Kind::Array || e.kind == Kind::Procedure {
                    e.kind = kind;
                }
            }
            // a parameter declared by its type statement is reported there
            if let Some(&idx) = scope.records.get(&name.name) {
                if self.out.vars[idx].role == VarRole::Parameter {
                    self.out.vars[idx].pos = name.span.start;
                    self.out.vars[idx].anchor = anchor;
                }
            }
            return;
        }
        let unit = self.fresh_unit(scope, &name.name);
        scope.env.push(&name.name, kind, unit.clone());
        scope.own.insert(name.name.clone());
        if kind != Kind::External {
            self.record(scope, &name.name, name.span.start, anchor, unit, VarRole::Variable);
        }
    }

    fn declarations(&mut self, pu: &ProgramUnit, scope: &mut Scope) -> GResult<()> {
        for item in &pu.spec {
            match item {
                SpecItem::Decl { entities, span, .. } => {
                    for e in entities {
                        let kind = if e.dims.is_some() { Kind::Array } else { Kind::Scalar };
                        self.declare(scope, &e.name, kind, span.start);
                    }
                }
                SpecItem::Dimension { entities, span } => {
                    for e in entities {
                        self.declare(scope, &e.name, Kind::Array, span.start);
                    }
                }
                SpecItem::External { names, .. } => {
                    for n in names {
                        if scope.own.contains(&n.name) {
                            if let Some(e) = scope.env.lookup_mut(&n.name) {
                                e.kind = Kind::External;
                            }
                        } else {
                            scope.env.push(&n.name, Kind::External, UnitExpr::Unitless);
                            scope.own.insert(n.name.clone());
                        }
                    }
                }
                SpecItem::ImplicitNone(_) | SpecItem::Annotation(_) => {}
            }
        }
        Ok(())
    }

    fn annotations(&mut self, pu: &ProgramUnit, scope: &mut Scope) -> GResult<()> {
        for a in &pu.leading {
            self.annotation(a, scope)?;
        }
        for item in &pu.spec {
            if let SpecItem::Annotation(a) = item {
                self.annotation(a, scope)?;
            }
        }
        Ok(())
    }

    fn annotation(&mut self, a: &Annotation, scope: &mut Scope) -> GResult<()> {
        match &a.kind {
            AnnotationKind::Spec { unit, vars } => {
                let poly_scope = scope.poly.clone().unwrap_or_else(|| scope.name.clone());
                let u = unit.to_expr(&poly_scope);
                for v in vars {
                    if !scope.own.contains(&v.name) {
                        return Err(self.err(v.span, format!("annotation names undeclared variable `{}`", v.name)));
                    }
                    let e = scope.env.lookup(&v.name).expect("own names are in the environment");
                    if matches!(e.kind, Kind::External | Kind::Procedure) {
                        return Err(self.err(v.span, format!("cannot annotate procedure `{}`", v.name)));
                    }
                    let lhs = e.unit.clone();
                    scope.add(Constraint::new(lhs, u.clone(), self.prov(v.span, Reason::Annotation)));
                    if let Some(&idx) = scope.records.get(&v.name) {
                        self.out.vars[idx].annotated = true;
                    }
                }
                Ok(())
            }
            AnnotationKind::Alias { .. } => Ok(()),
            AnnotationKind::Malformed { message } => {
                let mut d = self.err(a.span, format!("malformed annotation ignored: {message}"));
                d.severity = crate::diag::Severity::Info;
                self.out.diags.push(d);
                Ok(())
            }
        }
    }

    fn initializers(&mut self, pu: &ProgramUnit, scope: &mut Scope) -> GResult<()> {
        for item in &pu.spec {
            if let SpecItem::Decl { entities, .. } = item {
                for e in entities {
                    if let Some(init) = &e.init {
                        self.assign(&e.name, None, init, e.span, scope)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt], scope: &mut Scope) -> GResult<()> {
        for s in stmts {
            self.stmt(s, scope)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, scope: &mut Scope) -> GResult<()> {
        match s {
            Stmt::Assign { target, indices, value, span } => self.assign(target, indices.as_deref(), value, *span, scope),
            Stmt::Call { name, args, span } => {
                let arg_units = self.exprs(args, scope)?;
                self.call_units(name, &arg_units, args, *span, false, scope)?;
                Ok(())
            }
            Stmt::If { branches, otherwise, .. } => {
                for (cond, body) in branches {
                    let u = self.expr(cond, scope)?;
                    if u != UnitExpr::Unitless {
                        scope.add(Constraint::new(u, UnitExpr::Unitless, self.prov(cond.span, Reason::Condition)));
                    }
                    self.block(body, scope)?;
                }
                if let Some(b) = otherwise {
                    self.block(b, scope)?;
                }
                Ok(())
            }
            Stmt::DoWhile { cond, body, .. } => {
                // the loop condition's unit is left unconstrained
                self.expr(cond, scope)?;
                self.block(body, scope)
            }
            Stmt::Return(_) => Ok(()),
            Stmt::Annotation(a) => self.annotation(a, scope),
        }
    }

    fn target_unit(&self, target: &Ident, indexed: bool, scope: &Scope) -> GResult<UnitExpr> {
        let e = scope
            .env
            .lookup(&target.name)
            .ok_or_else(|| self.err(target.span, format!("undeclared variable `{}`", target.name)))?;
        match e.kind {
            Kind::Scalar if !indexed => Ok(e.unit.clone()),
            Kind::Array => Ok(e.unit.clone()),
            Kind::Scalar => Err(self.err(target.span, format!("`{}` is not an array", target.name))),
            Kind::External | Kind::Procedure => {
                Err(self.err(target.span, format!("cannot assign to procedure `{}`", target.name)))
            }
        }
    }

    fn assign(
        &mut self,
        target: &Ident,
        indices: Option<&[Expr]>,
        value: &Expr,
        span: Span,
        scope: &mut Scope,
    ) -> GResult<()> {
        let lhs = self.target_unit(target, indices.is_some(), scope)?;
        if let Some(ix) = indices {
            for e in ix {
                let u = self.expr(e, scope)?;
                if u != UnitExpr::Unitless {
                    scope.add(Constraint::new(u, UnitExpr::Unitless, self.prov(e.span, Reason::Subscript)));
                }
            }
        }
        if let Some(lit) = value.as_literal() {
            if lit.is_zero {
                return Ok(());
            }
            if let UnitExpr::Var(v @ UnitVar::LitOrVar(LitOrVar::Var { .. })) = &lhs {
                if !scope.tainted.contains(v) {
                    return Ok(());
                }
            }
        }
        let mark = self.out.literals.len();
        let rhs = self.expr(value, scope)?;
        if value.as_literal().is_some() {
            for l in &mut self.out.literals[mark..] {
                l.compound = false;
            }
        }
        scope.add(Constraint::new(lhs, rhs, self.prov(span, Reason::Assignment)));
        Ok(())
    }

    fn exprs(&mut self, es: &[Expr], scope: &mut Scope) -> GResult<Vec<UnitExpr>> {
        es.iter().map(|e| self.expr(e, scope)).collect()
    }

    fn expr(&mut self, e: &Expr, scope: &mut Scope) -> GResult<UnitExpr> {
        match &e.kind {
            ExprKind::Lit(lit) => Ok(self.literal(lit, e.span, scope)),
            ExprKind::Var(x) => {
                let entry = scope
                    .env
                    .lookup(x)
                    .ok_or_else(|| self.err(e.span, format!("undeclared variable `{x}`")))?;
                match entry.kind {
                    Kind::Scalar | Kind::Array => Ok(entry.unit.clone()),
                    _ => Err(self.err(e.span, format!("procedure `{x}` used as a value"))),
                }
            }
            ExprKind::Paren(inner) | ExprKind::Unary(_, inner) => self.expr(inner, scope),
            ExprKind::Binary(op, a, b) => match op {
                BinOp::Add | BinOp::Sub => {
                    let ua = self.expr(a, scope)?;
                    let ub = self.expr(b, scope)?;
                    scope.add(Constraint::new(ua.clone(), ub, self.prov(e.span, Reason::Addition)));
                    Ok(ua)
                }
                BinOp::Mul | BinOp::Div => {
                    let ua = self.expr(a, scope)?;
                    let ub = self.expr(b, scope)?;
                    Ok(if *op == BinOp::Mul {
                        UnitExpr::product(ua, ub)
                    } else {
                        UnitExpr::product(ua, UnitExpr::inverse(ub))
                    })
                }
                BinOp::Pow => {
                    let n = integer_exponent(b).ok_or_else(|| {
                        self.err(b.span, "unsupported construct: exponent must be an integer literal")
                    })?;
                    let ua = self.expr(a, scope)?;
                    Ok(UnitExpr::power(ua, n))
                }
                _ => {
                    let ua = self.expr(a, scope)?;
                    let ub = self.expr(b, scope)?;
                    scope.add(Constraint::new(ua, ub, self.prov(e.span, Reason::Comparison)));
                    Ok(UnitExpr::Unitless)
                }
            },
            ExprKind::Apply { name, args } => {
                let entry = scope.env.lookup(&name.name);
                if let Some(ent) = entry {
                    if ent.kind == Kind::Array {
                        let unit = ent.unit.clone();
                        for ix in args {
                            let u = self.expr(ix, scope)?;
                            if u != UnitExpr::Unitless {
                                scope.add(Constraint::new(u, UnitExpr::Unitless, self.prov(ix.span, Reason::Subscript)));
                            }
                        }
                        return Ok(unit);
                    }
                    if ent.kind == Kind::Scalar && scope.env.lookup_callable(&name.name).is_none() {
                        return Err(self.err(name.span, format!("`{}` is not an array or a function", name.name)));
                    }
                }
                let arg_units = self.exprs(args, scope)?;
                self.call_units(name, &arg_units, args, e.span, true, scope)
            }
        }
    }

    fn literal(&mut self, lit: &Literal, span: Span, scope: &Scope) -> UnitExpr {
        match scope.env.poly_owner() {
            Some(f) if lit.is_zero => {
                let f = f.to_string();
                UnitExpr::Var(UnitVar::param_abs(&f, Slot::Lit(self.ids.fresh())))
            }
            Some(_) => UnitExpr::Unitless,
            None => {
                let atom = UnitVar::lit(self.ids.fresh());
                self.out.literals.push(LiteralRecord {
                    file: self.file.clone(),
                    span,
                    atom: atom.clone(),
                    compound: !lit.is_zero,
                    text: lit.text.clone(),
                });
                UnitExpr::Var(atom)
            }
        }
    }

    fn call_units(
        &mut self,
        name: &Ident,
        args: &[UnitExpr],
        arg_exprs: &[Expr],
        span: Span,
        want_result: bool,
        scope: &mut Scope,
    ) -> GResult<UnitExpr> {
        let callable = scope.env.lookup_callable(&name.name).cloned();
        let external = matches!(callable.as_ref().map(|e| e.kind), Some(Kind::External));
        let sig = match &callable {
            Some(Entry { sig: Some(sig), .. }) => Some(sig.clone()),
            None => intrinsics::arity(&name.name).map(|arity| ProcSig { arity: arity.unwrap_or(args.len()), is_function: true }),
            _ => None,
        };
        if let Some(sig) = &sig {
            if sig.arity != args.len() {
                return Err(self.err(
                    span,
                    format!("`{}` expects {} argument(s), {} given", name.name, sig.arity, args.len()),
                ));
            }
            if want_result && !sig.is_function {
                return Err(self.err(span, format!("subroutine `{}` used as a function", name.name)));
            }
            if !want_result && sig.is_function {
                return Err(self.err(span, format!("function `{}` invoked with `call`", name.name)));
            }
        }
        let call = if external { 0 } else { self.ids.fresh() };
        for (j, (u, e)) in args.iter().zip(arg_exprs).enumerate() {
            scope.add(Constraint::new(
                u.clone(),
                UnitExpr::Var(UnitVar::param_use(&name.name, Slot::Param(j + 1), call)),
                self.prov(e.span, Reason::CallArgument),
            ));
        }
        Ok(if want_result {
            UnitExpr::Var(UnitVar::param_use(&name.name, Slot::Param(0), call))
        } else {
            UnitExpr::Unitless
        })
    }
}

/// Integer value of a `**` exponent, looking through parentheses and signs.
fn integer_exponent(e: &Expr) -> Option<i64> {
    match &e.kind {
        ExprKind::Lit(l) if l.is_int => l.text.parse().ok(),
        ExprKind::Paren(x) | ExprKind::Unary(UnOp::Plus, x) => integer_exponent(x),
        ExprKind::Unary(UnOp::Neg, x) => integer_exponent(x).map(|n| -n),
        _ => None,
    }
}
