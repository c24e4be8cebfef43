//! Expansion of polymorphic templates at their call instances.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::diag::{Diagnostic, Provenance, Reason, Span};
use crate::gen::{IdGen, Template};
use crate::intrinsics::{self, Signature};
use crate::units::{Slot, UnitExpr, UnitVar};

/// Rewrites abstract units to their instance at call `i`.
pub fn instantiate(u: &UnitExpr, i: u64) -> UnitExpr {
    u.map_vars(&mut |v| {
        UnitExpr::Var(match v {
            UnitVar::ParamAbs { fs, slot } => UnitVar::ParamUse { fs: fs.clone(), slot: slot.clone(), call: i },
            UnitVar::ExplicitAbs(p) => UnitVar::ExplicitUse(p.clone(), i),
            other => other.clone(),
        })
    })
}

/// Where the constraints of a callable come from.
#[derive(Clone, Debug)]
pub enum Source<'a> {
    Template(&'a Template),
    /// A loaded signature.
    Summary(&'a Signature),
}

/// Lookup of callables available to an analysis.
#[derive(Clone, Debug, Default)]
pub struct Library<'a> {
    pub sources: BTreeMap<String, Source<'a>>,
}

impl<'a> Library<'a> {
    pub fn add_template(&mut self, t: &'a Template) {
        self.sources.insert(t.name.clone(), Source::Template(t));
    }

    pub fn add_summary(&mut self, name: &str, sig: &'a Signature) {
        self.sources.entry(name.to_string()).or_insert(Source::Summary(sig));
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Target {
    Abstract,
    Use(u64),
}

/// Counters gathered while expanding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExpandStats {
    /// Constraints copied out of raw templates.
    pub template_constraints: usize,
    /// Constraints copied out of summaries and intrinsic signatures.
    pub signature_constraints: usize,
    pub instances: usize,
}

pub struct Expander<'a, 'b> {
    lib: &'b Library<'a>,
    ids: &'b mut IdGen,
    pub out: Vec<Constraint>,
    pub diags: Vec<Diagnostic>,
    pub stats: ExpandStats,
    missing: BTreeSet<String>,
    variadic: BTreeMap<(String, u64), usize>,
    summary_file: Arc<str>,
}

impl<'a, 'b> Expander<'a, 'b> {
    pub fn new(lib: &'b Library<'a>, ids: &'b mut IdGen) -> Self {
        Expander {
            lib,
            ids,
            out: vec![],
            diags: vec![],
            stats: ExpandStats::default(),
            missing: BTreeSet::new(),
            variadic: BTreeMap::new(),
            summary_file: Arc::from("<summary>"),
        }
    }

    /// Adds `cs` and expands every call instance they mention.
    pub fn add_constraints(&mut self, cs: &[Constraint]) {
        for c in cs {
            self.push(c.clone());
        }
        for (fs, call, prov) in instances(cs) {
            self.expand(&fs, Target::Use(call), &mut vec![], &prov);
        }
    }

    /// Adds the abstract constraints of a template so that the units of
    /// its own variables can be solved.
    pub fn add_abstract(&mut self, name: &str) {
        let prov = Provenance::new(&self.summary_file, Span::default(), Reason::Summary);
        self.expand(name, Target::Abstract, &mut vec![], &prov);
    }

    fn expand(&mut self, fs: &str, target: Target, path: &mut Vec<(String, Target)>, at: &Provenance) {
        let (raw, poly) = match self.lib.sources.get(fs) {
            Some(Source::Template(t)) => {
                (t.constraints().cloned().collect::<Vec<_>>(), t.is_function || t.arity > 0)
            }
            Some(Source::Summary(sig)) => (self.signature_constraints(fs, sig), true),
            None => match intrinsics::signature(fs, self.arity_seen(fs, &target)) {
                Some(sig) => (self.signature_constraints(fs, &sig), true),
                None => {
                    if self.missing.insert(fs.to_string()) {
                        self.diags.push(Diagnostic::error(
                            &at.file,
                            at.span,
                            format!("missing definition of `{fs}`: no source, summary or intrinsic"),
                        ));
                    }
                    return;
                }
            },
        };
        // a monomorphic subroutine is expanded once, abstractly
        if !poly && target != Target::Abstract {
            return;
        }
        self.stats.instances += 1;
        match self.lib.sources.get(fs) {
            Some(Source::Template(_)) => self.stats.template_constraints += raw.len(),
            _ => self.stats.signature_constraints += raw.len(),
        }
        let mut remap: BTreeMap<(String, u64), u64> = BTreeMap::new();
        let mut pending = vec![];
        path.push((fs.to_string(), target.clone()));
        for c in &raw {
            let c = c.map_units(&mut |u| {
                u.map_vars(&mut |v| {
                    UnitExpr::Var(match v {
                        UnitVar::ParamAbs { fs: g, slot } if g == fs => match &target {
                            Target::Use(i) => UnitVar::ParamUse { fs: g.clone(), slot: slot.clone(), call: *i },
                            Target::Abstract => v.clone(),
                        },
                        UnitVar::ExplicitAbs(p) => match &target {
                            Target::Use(i) => UnitVar::ExplicitUse(p.clone(), *i),
                            Target::Abstract => v.clone(),
                        },
                        UnitVar::ParamUse { fs: g, slot, call } if *call != 0 => {
                            if let Some((_, t)) = path.iter().find(|(h, _)| h == g) {
                                match t {
                                    Target::Abstract => UnitVar::ParamAbs { fs: g.clone(), slot: slot.clone() },
                                    Target::Use(k) => UnitVar::ParamUse { fs: g.clone(), slot: slot.clone(), call: *k },
                                }
                            } else {
                                let key = (g.clone(), *call);
                                let id = *remap.entry(key).or_insert_with(|| {
                                    let id = self.ids.fresh();
                                    pending.push((g.clone(), id));
                                    id
                                });
                                UnitVar::ParamUse { fs: g.clone(), slot: slot.clone(), call: id }
                            }
                        }
                        other => other.clone(),
                    })
                })
            });
            self.push(c);
        }
        for (g, id) in pending {
            self.expand(&g, Target::Use(id), path, at);
        }
        path.pop();
    }

    /// Number of arguments at the instance, used for variadic intrinsics.
    fn arity_seen(&self, fs: &str, target: &Target) -> usize {
        match target {
            Target::Use(i) => self.variadic.get(&(fs.to_string(), *i)).copied().unwrap_or(1),
            Target::Abstract => 1,
        }
    }

    fn push(&mut self, c: Constraint) {
        for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
            if let UnitVar::ParamUse { fs, slot: Slot::Param(k), call } = v {
                if intrinsics::arity(fs) == Some(None) {
                    let e = self.variadic.entry((fs.clone(), *call)).or_insert(0);
                    *e = (*e).max(*k);
                }
            }
        }
        self.out.push(c);
    }

    fn signature_constraints(&self, fs: &str, sig: &Signature) -> Vec<Constraint> {
        let prov = Provenance::new(&self.summary_file, Span::default(), Reason::Summary);
        sig.iter()
            .map(|(k, u)| Constraint::new(UnitExpr::Var(UnitVar::param_abs(fs, Slot::Param(*k))), u.clone(), prov.clone()))
            .collect()
    }
}

/// Distinct call instances `(fs, call id)` mentioned in `cs`, in order of
/// first mention, with the provenance of that mention. External calls
/// (id 0) are not instances.
pub fn instances(cs: &[Constraint]) -> Vec<(String, u64, Provenance)> {
    let mut seen = BTreeSet::new();
    let mut out = vec![];
    for c in cs {
        for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
            if let UnitVar::ParamUse { fs, call, .. } = v {
                if *call != 0 && seen.insert((fs.clone(), *call)) {
                    out.push((fs.clone(), *call, c.prov.clone()));
                }
            }
        }
    }
    out
}
