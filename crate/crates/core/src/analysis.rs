//! The whole pipeline over a set of files: parsing, locating used modules,
//! constraint generation, instantiation, solving and reporting.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::diag::{sort_diagnostics, Diagnostic, Pos, Provenance, Reason, Severity, Span};
use crate::frontend::ast::{ProgramUnit, SourceFile, UnitKind};
use crate::frontend::{parse_source, resolve_aliases, SyntaxError};
use crate::gen::{generate_file, EntryKind, GenOutput, IdGen, ModuleInterface, VarRecord, VarRole};
use crate::instantiate::{ExpandStats, Expander, Library};
use crate::int::Int;
use crate::intrinsics::Signature;
use crate::solver::{solve, Solution};
use crate::summary::{ModuleSummary, ProcSummary, SummaryError, EXTENSION};
use crate::units::{parse_unit, print_unit, Atom, PrintAtom, UnitExpr, UnitMap, UnitVar};

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Directories searched for summaries and module sources, in order,
    /// before the directory of the file that uses the module.
    pub include: Vec<PathBuf>,
    /// Reject literals inside expressions whose solved unit is not
    /// unitless.
    pub literal_check: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error("{0}")]
    Setup(Box<Diagnostic>),
}

/// A parsed input file.
#[derive(Clone, Debug)]
pub struct ParsedFile {
    pub path: PathBuf,
    /// The path as shown in reports.
    pub shown: String,
    pub text: String,
    pub ast: SourceFile,
}

#[derive(Clone, Debug)]
pub struct LoadedSummary {
    pub shown: String,
    pub summary: ModuleSummary,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Solved(Box<Solution>),
    Inconsistent,
}

/// One inferred unit, ready to print.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inferred {
    pub pos: Pos,
    pub name: String,
    pub unit: String,
}

pub struct Analysis {
    pub files: Vec<ParsedFile>,
    pub summaries: Vec<LoadedSummary>,
    pub gen: GenOutput,
    pub constraints: Vec<Constraint>,
    pub stats: ExpandStats,
    pub outcome: Outcome,
    pub diags: Vec<Diagnostic>,
    setup_errors: usize,
    names: Namer,
}

pub fn read_file(path: &Path) -> Result<ParsedFile, AnalysisError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| AnalysisError::Io { path: shown.clone(), source })?;
    let mut ast = parse_source(&text, &shown)?;
    resolve_aliases(&mut ast).map_err(|e| {
        let span = match &e {
            crate::frontend::AliasError::Cycle { span, .. } | crate::frontend::AliasError::Duplicate { span, .. } => *span,
        };
        AnalysisError::Setup(Box::new(Diagnostic::error(&Arc::from(shown.as_str()), span, e.to_string())))
    })?;
    Ok(ParsedFile { path: path.to_path_buf(), shown, text, ast })
}

fn all_units(units: &[ProgramUnit]) -> Vec<&ProgramUnit> {
    let mut out = vec![];
    for u in units {
        out.push(u);
        out.extend(all_units(&u.contains));
    }
    out
}

fn setup_error(file: &str, span: Span, msg: String) -> AnalysisError {
    AnalysisError::Setup(Box::new(Diagnostic::error(&Arc::from(file), span, msg)))
}

/// Joins `dir` and `name`, leaving bare names bare.
fn join(dir: &Path, name: &str) -> PathBuf {
    if dir.as_os_str().is_empty() {
        PathBuf::from(name)
    } else {
        dir.join(name)
    }
}

pub fn analyze(paths: &[PathBuf], opts: &Options) -> Result<Analysis, AnalysisError> {
    let mut files = paths.iter().map(|p| read_file(p)).collect::<Result<Vec<_>, _>>()?;
    let mut summaries: Vec<LoadedSummary> = vec![];

    // locate every used module: given files, then summaries, then sources
    let mut defined: HashMap<String, usize> = HashMap::new();
    let mut i = 0;
    while i < files.len() {
        for u in all_units(&files[i].ast.units) {
            if u.kind == UnitKind::Module {
                if let Some(&j) = defined.get(&u.name.name) {
                    if j != i {
                        return Err(setup_error(
                            &files[i].shown,
                            u.name.span,
                            format!("module `{}` is also defined in {}", u.name.name, files[j].shown),
                        ));
                    }
                }
                defined.insert(u.name.name.clone(), i);
            }
        }
        let uses: Vec<_> = all_units(&files[i].ast.units).iter().flat_map(|u| u.uses.clone()).collect();
        for u in uses {
            if defined.contains_key(&u.name) || summaries.iter().any(|s| s.summary.name == u.name) {
                continue;
            }
            let own_dir = files[i].path.parent().map(Path::to_path_buf).unwrap_or_default();
            let dirs: Vec<PathBuf> = opts.include.iter().cloned().chain(std::iter::once(own_dir)).collect();
            let fsmod = dirs.iter().map(|d| join(d, &format!("{}.{EXTENSION}", u.name))).find(|p| p.is_file());
            if let Some(p) = fsmod {
                let summary = ModuleSummary::load(&p)?;
                summaries.push(LoadedSummary { shown: p.display().to_string(), summary });
                continue;
            }
            let src = dirs.iter().map(|d| join(d, &format!("{}.f90", u.name))).find(|p| p.is_file());
            match src {
                Some(p) => {
                    let pf = read_file(&p)?;
                    let before = files.len();
                    files.push(pf);
                    if !all_units(&files[before].ast.units).iter().any(|x| x.kind == UnitKind::Module && x.name.name == u.name) {
                        return Err(setup_error(&files[before].shown, Span::default(), format!("file does not define module `{}`", u.name)));
                    }
                    for x in all_units(&files[before].ast.units) {
                        if x.kind == UnitKind::Module {
                            defined.entry(x.name.name.clone()).or_insert(before);
                        }
                    }
                }
                None => {
                    return Err(setup_error(
                        &files[i].shown,
                        u.span,
                        format!("cannot find module `{}`: no `{0}.{EXTENSION}` summary or `{0}.f90` source on the search path", u.name),
                    ))
                }
            }
        }
        i += 1;
    }

    let order = topo_order(&files, &defined)?;

    let imports: BTreeMap<String, ModuleInterface> =
        summaries.iter().map(|s| (s.summary.name.clone(), s.summary.interface())).collect();
    let mut ids = IdGen::default();
    let mut gen = GenOutput::default();
    for &k in &order {
        generate_file(&files[k].ast, &imports, &mut ids, &mut gen);
    }
    let mut diags = std::mem::take(&mut gen.diags);

    let signatures: Vec<(String, Signature)> = summaries
        .iter()
        .flat_map(|s| s.summary.procs.iter().map(move |p| (p.name.clone(), s.summary.signature(p))))
        .collect();
    let mut lib = Library::default();
    let mut owner_of: HashMap<&str, &str> = HashMap::new();
    for name in &gen.order {
        let entry = &gen.modules[name];
        for t in entry.templates.values() {
            if let Some(prev) = owner_of.insert(&t.name, &entry.name) {
                if prev != entry.name {
                    diags.push(Diagnostic::error(
                        &entry.file,
                        Span::default(),
                        format!("procedure `{}` is defined in both `{prev}` and `{}`", t.name, entry.name),
                    ));
                }
            }
            lib.add_template(t);
        }
    }
    for (name, sig) in &signatures {
        lib.add_summary(name, sig);
    }

    let mut exp = Expander::new(&lib, &mut ids);
    for s in &summaries {
        let file: Arc<str> = Arc::from(s.shown.as_str());
        let cs: Vec<Constraint> = s
            .summary
            .vars
            .iter()
            .map(|(v, u)| {
                Constraint::new(
                    UnitExpr::Var(UnitVar::var(&s.summary.name, v)),
                    u.to_expr(&s.summary.name),
                    Provenance::new(&file, Span::default(), Reason::Summary),
                )
            })
            .collect();
        exp.add_constraints(&cs);
    }
    for name in &gen.order {
        let entry = &gen.modules[name];
        exp.add_constraints(&entry.constraints);
        for t in entry.templates.keys() {
            exp.add_abstract(t);
        }
    }
    let stats = exp.stats;
    diags.append(&mut exp.diags);
    let constraints = std::mem::take(&mut exp.out);
    drop(exp);

    let setup_errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    let mut outcome = match solve(&constraints) {
        Ok(s) => Outcome::Solved(Box::new(s)),
        Err(inc) => {
            diags.push(inconsistency(&constraints, &inc.core, INCONSISTENT));
            Outcome::Inconsistent
        }
    };
    if opts.literal_check {
        if let Outcome::Solved(sol) = &outcome {
            if let Some(d) = literal_check(&gen, &constraints, sol) {
                diags.push(d);
                outcome = Outcome::Inconsistent;
            }
        }
    }
    sort_diagnostics(&mut diags);
    let names = Namer::new(&constraints);
    let mut a = Analysis { files, summaries, gen, constraints, stats, outcome, diags, setup_errors, names };
    a.prepare_names();
    Ok(a)
}

/// Orders files so that each comes after the files defining the modules it uses.
fn topo_order(files: &[ParsedFile], defined: &HashMap<String, usize>) -> Result<Vec<usize>, AnalysisError> {
    let deps: Vec<BTreeSet<usize>> = files
        .iter()
        .enumerate()
        .map(|(i, f)| {
            all_units(&f.ast.units)
                .iter()
                .flat_map(|u| u.uses.iter())
                .filter_map(|u| defined.get(&u.name).copied())
                .filter(|&j| j != i)
                .collect()
        })
        .collect();
    let mut done = vec![false; files.len()];
    let mut order = vec![];
    while order.len() < files.len() {
        let next = (0..files.len()).find(|&i| !done[i] && deps[i].iter().all(|&j| done[j]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let i = (0..files.len()).find(|&i| !done[i]).unwrap();
                return Err(setup_error(&files[i].shown, Span::default(), "cyclic module dependencies".into()));
            }
        }
    }
    Ok(order)
}

fn render_constraint(c: &Constraint) -> String {
    let at = if c.prov.span == Span::default() {
        format!("{}", c.prov.file)
    } else {
        format!("{}:{}", c.prov.file, c.prov.span)
    };
    format!("{at} ({}): {} ≃ {}", c.prov.reason, c.lhs, c.rhs)
}

const INCONSISTENT: &str = "inconsistent units; the following constraints cannot all hold";

fn inconsistency(cs: &[Constraint], core: &[usize], headline: &str) -> Diagnostic {
    let mut members: Vec<&Constraint> = core.iter().map(|&i| &cs[i]).collect();
    members.sort_by(|a, b| (&a.prov.file, a.prov.span.start).cmp(&(&b.prov.file, b.prov.span.start)));
    members.dedup_by(|a, b| a.prov == b.prov && a.lhs == b.lhs && a.rhs == b.rhs);
    let primary = members
        .iter()
        .find(|c| !matches!(c.prov.reason, Reason::Annotation | Reason::Summary | Reason::ParameterLink) && c.prov.span != Span::default())
        .or_else(|| members.iter().find(|c| c.prov.span != Span::default()))
        .or(members.first())
        .copied();
    let (file, span) = primary.map(|c| (c.prov.file.clone(), c.prov.span)).unwrap_or_else(|| (Arc::from("<input>"), Span::default()));
    let mut d = Diagnostic::error(&file, span, headline);
    d.related = members.iter().map(|c| render_constraint(c)).collect();
    d
}

fn literal_check(gen: &GenOutput, cs: &[Constraint], sol: &Solution) -> Option<Diagnostic> {
    let offending: Vec<Constraint> = gen
        .literals
        .iter()
        .filter(|l| l.compound)
        .filter(|l| {
            let v = sol.value(&l.atom);
            !v.is_unitless() && v.iter().all(|(a, _)| a.is_real())
        })
        .map(|l| {
            Constraint::new(
                UnitExpr::Var(l.atom.clone()),
                UnitExpr::Unitless,
                Provenance::new(&l.file, l.span, Reason::LiteralUnitless),
            )
        })
        .collect();
    if offending.is_empty() {
        return None;
    }
    let mut all = cs.to_vec();
    all.extend(offending);
    match solve(&all) {
        Err(inc) => {
            Some(inconsistency(&all, &inc.core, "inconsistent units: a nonzero literal inside an expression must be unitless"))
        }
        Ok(_) => None,
    }
}

/// Names for polymorphic atoms, per owning procedure.
#[derive(Clone, Debug, Default)]
struct Namer {
    /// Explicit names in use, per scope.
    explicit: HashMap<String, BTreeSet<String>>,
    generated: HashMap<String, BTreeMap<Atom, (usize, String)>>,
}

fn letters(mut k: usize) -> String {
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    s
}

impl Namer {
    fn new(cs: &[Constraint]) -> Self {
        let mut explicit: HashMap<String, BTreeSet<String>> = HashMap::new();
        for c in cs {
            for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
                if let UnitVar::ExplicitAbs(p) = v {
                    explicit.entry(p.scope.clone()).or_default().insert(p.name.clone());
                }
            }
        }
        Namer { explicit, generated: HashMap::new() }
    }

    fn printable(atom: &Atom, owner: Option<&str>, scope: &str) -> bool {
        match atom {
            Atom::Base(_) => true,
            Atom::Var(UnitVar::ExplicitAbs(p)) => p.scope == owner.unwrap_or(scope),
            Atom::Var(UnitVar::ParamAbs { fs, .. }) => owner == Some(fs.as_str()),
            Atom::Generated(_) => owner.is_some(),
            Atom::Var(_) => false,
        }
    }

    fn needs_name(atom: &Atom) -> bool {
        matches!(atom, Atom::Generated(_) | Atom::Var(UnitVar::ParamAbs { .. }))
    }

    fn assign(&mut self, owner: &str, value: &UnitMap) {
        if !value.iter().all(|(a, _)| Self::printable(a, Some(owner), owner)) {
            return;
        }
        let used = self.explicit.get(owner).cloned().unwrap_or_default();
        let table = self.generated.entry(owner.to_string()).or_default();
        for (a, _) in value.iter() {
            if !Self::needs_name(a) || table.contains_key(a) {
                continue;
            }
            let mut k = table.len();
            let taken: BTreeSet<&String> = table.values().map(|(_, n)| n).collect();
            let name = loop {
                let n = letters(k);
                if !used.contains(&n) && !taken.contains(&n) {
                    break n;
                }
                k += 1;
            };
            let idx = table.len();
            table.insert(a.clone(), (idx, name));
        }
    }

    fn render(&self, value: &UnitMap, owner: Option<&str>, scope: &str) -> Option<String> {
        let mut items: Vec<((u8, String, usize), PrintAtom)> = vec![];
        for (a, e) in value.iter() {
            if !Self::printable(a, owner, scope) {
                return None;
            }
            let item = match a {
                Atom::Base(n) => ((0, n.clone(), 0), PrintAtom { label: n.clone(), poly: false, exp: e.clone() }),
                Atom::Var(UnitVar::ExplicitAbs(p)) => {
                    ((1, p.name.clone(), 0), PrintAtom { label: format!("'{}", p.name), poly: true, exp: e.clone() })
                }
                _ => {
                    let (idx, name) = self.generated.get(owner?)?.get(a)?;
                    ((2, String::new(), *idx), PrintAtom { label: format!("'{name}"), poly: true, exp: e.clone() })
                }
            };
            items.push(item);
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        let items: Vec<PrintAtom> = items.into_iter().map(|(_, p)| p).collect();
        Some(print_unit(&items))
    }
}

impl Analysis {
    pub fn solution(&self) -> Option<&Solution> {
        match &self.outcome {
            Outcome::Solved(s) => Some(s),
            Outcome::Inconsistent => None,
        }
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self.outcome, Outcome::Solved(_))
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diags.iter().filter(|d| d.severity == Severity::Error)
    }

    /// Errors other than unit inconsistencies (unsupported constructs,
    /// undeclared names, missing definitions).
    pub fn has_setup_errors(&self) -> bool {
        self.setup_errors > 0
    }

    /// Procedures with their slot count, in generation order.
    fn procedures(&self) -> Vec<(&str, usize, bool)> {
        let mut out = vec![];
        for name in &self.gen.order {
            for t in self.gen.modules[name].templates.values() {
                out.push((t.name.as_str(), t.arity, t.is_function));
            }
        }
        out
    }

    fn prepare_names(&mut self) {
        let Some(sol) = self.solution().cloned() else { return };
        let procs: Vec<(String, usize, bool)> =
            self.procedures().into_iter().map(|(n, a, f)| (n.to_string(), a, f)).collect();
        for (name, arity, is_function) in procs {
            let lo = if is_function { 0 } else { 1 };
            for k in lo..=arity {
                let v = sol.value(&UnitVar::param_abs(&name, crate::units::Slot::Param(k)));
                self.names.assign(&name, &v);
            }
        }
        let mut recs: Vec<&VarRecord> = self.gen.vars.iter().filter(|r| r.owner.is_some()).collect();
        recs.sort_by_key(|r| (r.file.clone(), r.pos));
        let pairs: Vec<(String, UnitMap)> = recs.iter().map(|r| (r.owner.clone().unwrap(), sol.value(&r.atom))).collect();
        for (owner, v) in pairs {
            self.names.assign(&owner, &v);
        }
    }

    fn unit_of(&self, r: &VarRecord) -> Option<String> {
        let sol = self.solution()?;
        self.names.render(&sol.value(&r.atom), r.owner.as_deref(), &r.scope)
    }

    fn records_in<'a>(&'a self, file: &'a str) -> impl Iterator<Item = &'a VarRecord> + 'a {
        self.gen.vars.iter().filter(move |r| &*r.file == file)
    }

    /// Inferred units of the named variables of `file`, by position.
    pub fn inferred(&self, file: &str) -> Vec<Inferred> {
        let mut out: Vec<Inferred> = self
            .records_in(file)
            .filter_map(|r| Some(Inferred { pos: r.pos, name: r.name.clone(), unit: self.unit_of(r)? }))
            .collect();
        out.sort_by_key(|i| i.pos);
        out
    }

    /// Named monomorphic variables of `file` whose units are not
    /// determined and would determine others once annotated.
    pub fn suggestions(&self, file: &str) -> Vec<(Pos, String)> {
        let Some(sol) = self.solution() else { return vec![] };
        let critical: HashSet<&UnitVar> = sol.critical.iter().collect();
        let mentioned: HashSet<&UnitVar> =
            self.constraints.iter().flat_map(|c| c.lhs.vars().into_iter().chain(c.rhs.vars())).collect();
        let mut out: Vec<(Pos, String)> = self
            .records_in(file)
            .filter(|r| r.owner.is_none() && r.role == VarRole::Variable)
            .filter(|r| critical.contains(&r.atom) || !mentioned.contains(&r.atom))
            .map(|r| (r.pos, r.name.clone()))
            .collect();
        out.sort();
        out
    }

    /// Source of `file` with annotations inserted for every unannotated
    /// variable whose unit was inferred.
    pub fn synthesize(&self, file: &str) -> Option<String> {
        let pf = self.files.iter().find(|f| f.shown == file)?;
        self.solution()?;
        // per anchor line: (unit, names) groups in order
        let mut groups: BTreeMap<u32, Vec<(String, Vec<String>)>> = BTreeMap::new();
        let mut recs: Vec<&VarRecord> = self.records_in(file).filter(|r| !r.annotated).collect();
        recs.sort_by_key(|r| (r.anchor, r.pos));
        for r in recs {
            let Some(unit) = self.unit_of(r) else { continue };
            let line = groups.entry(r.anchor.line).or_default();
            match line.iter_mut().find(|(u, _)| *u == unit) {
                Some((_, names)) => names.push(r.name.clone()),
                None => line.push((unit, vec![r.name.clone()])),
            }
        }
        let eol = if pf.text.contains("\r\n") { "\r\n" } else { "\n" };
        let mut out = String::with_capacity(pf.text.len() + 64 * groups.len());
        for (i, line) in pf.text.split_inclusive('\n').enumerate() {
            if let Some(gs) = groups.get(&(i as u32 + 1)) {
                let indent: String = line.chars().take_while(|c| *c == ' ' || *c == '\t').collect();
                for (unit, names) in gs {
                    out.push_str(&format!("{indent}!= unit {unit} :: {}{eol}", names.join(", ")));
                }
            }
            out.push_str(line);
        }
        Some(out)
    }

    /// Summary of module `name`: solved variables and slot signatures.
    pub fn summary(&self, module: &str) -> Option<ModuleSummary> {
        let entry = self.gen.modules.get(module)?;
        if entry.kind != EntryKind::Module {
            return None;
        }
        let sol = self.solution()?;
        let mut vars: Vec<(String, crate::units::SurfaceUnit)> = self
            .gen
            .vars
            .iter()
            .filter(|r| r.scope == module && r.owner.is_none() && r.role == VarRole::Variable)
            .filter_map(|r| {
                let u = self.names.render(&sol.value(&r.atom), None, &r.scope)?;
                Some((r.name.clone(), parse_unit(&u).ok()?))
            })
            .collect();
        vars.sort_by(|a, b| a.0.cmp(&b.0));
        let procs = entry
            .templates
            .values()
            .map(|t| {
                let lo = if t.is_function { 0 } else { 1 };
                let slots = (lo..=t.arity)
                    .filter_map(|k| {
                        let v = sol.value(&UnitVar::param_abs(&t.name, crate::units::Slot::Param(k)));
                        let u = self.names.render(&v, Some(&t.name), &t.name)?;
                        Some((k, parse_unit(&u).ok()?))
                    })
                    .collect();
                ProcSummary { name: t.name.clone(), arity: t.arity, is_function: t.is_function, slots }
            })
            .collect();
        Some(ModuleSummary { name: module.to_string(), vars, procs })
    }

    /// Modules defined by `file`.
    pub fn modules_in(&self, file: &str) -> Vec<String> {
        self.gen
            .order
            .iter()
            .filter(|n| {
                let e = &self.gen.modules[*n];
                &*e.file == file && e.kind == EntryKind::Module
            })
            .cloned()
            .collect()
    }

    /// Number of constraints per raw template of `module`.
    pub fn template_size(&self, module: &str) -> usize {
        self.gen.modules.get(module).map_or(0, |e| e.templates.values().map(|t| t.len()).sum())
    }
}

/// Total exponent magnitude, handy for reports and tests.
pub fn unit_weight(m: &UnitMap) -> Int {
    m.iter().fold(Int::ZERO, |acc, (_, e)| &acc + &e.abs())
}
