//! `!= unit ...` comment annotations and alias resolution.

use std::collections::{BTreeMap, HashSet};

use crate::diag::{Pos, Span};
use crate::units::{parse_unit, SurfaceUnit};

use super::ast::{AliasDecl, Annotation, AnnotationKind, Ident, ProgramUnit, SourceFile, SpecItem, Stmt};

/// Parses the text of a comment, without the leading `!`. `at` is the
/// position of the `!`.
pub fn parse_annotation(text: &str, at: Pos) -> Annotation {
    let span = Span::new(at, Pos::new(at.line, at.col + 1 + text.chars().count() as u32));
    let kind = match parse_kind(text, at) {
        Ok(k) => k,
        Err(message) => AnnotationKind::Malformed { message },
    };
    Annotation { kind, span, text: text.to_string() }
}

fn parse_kind(text: &str, at: Pos) -> Result<AnnotationKind, String> {
    let body = text.strip_prefix('=').ok_or("annotation must start with `!=`")?;
    let trimmed = body.trim_start();
    let rest = trimmed.strip_prefix("unit").ok_or("expected keyword `unit`")?;
    if rest.chars().next().is_some_and(|c| !c.is_whitespace() && c != ':') {
        return Err("expected keyword `unit`".into());
    }
    let sep = rest.find("::").ok_or("expected `::`")?;
    let unit_text = &rest[..sep];
    let after = &rest[sep + 2..];
    // column of the first character after `::`, counting from `!`
    let after_offset = 1 + (text.len() - after.len());
    if unit_text.trim().is_empty() {
        let (name, u) = after.split_once('=').ok_or("alias needs the form `unit :: name = unit`")?;
        let name = name.trim();
        if !is_name(name) {
            return Err(format!("invalid alias name `{name}`"));
        }
        let unit = parse_unit(u).map_err(|e| e.to_string())?;
        let mut polys = vec![];
        unit.poly_names(&mut polys);
        if !polys.is_empty() {
            return Err(format!("alias `{name}` must not mention polymorphic units"));
        }
        return Ok(AnnotationKind::Alias { name: name.to_string(), unit });
    }
    let unit = parse_unit(unit_text).map_err(|e| e.to_string())?;
    let mut vars = vec![];
    let mut offset = after_offset;
    for part in after.split(',') {
        let lead = part.len() - part.trim_start().len();
        let name = part.trim();
        if !is_name(name) {
            return Err(format!("invalid variable name `{name}`"));
        }
        let col = at.col + (offset + lead) as u32;
        vars.push(Ident {
            name: name.to_ascii_lowercase(),
            span: Span::new(Pos::new(at.line, col), Pos::new(at.line, col + name.len() as u32)),
        });
        offset += part.len() + 1;
    }
    Ok(AnnotationKind::Spec { unit, vars })
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AliasError {
    #[error("cyclic unit alias involving `{name}`")]
    Cycle { name: String, span: Span },
    #[error("unit alias `{name}` defined twice")]
    Duplicate { name: String, span: Span },
}

/// Substitutes alias bodies into every unit specification, to a fixpoint.
/// Unknown names are left alone and become base units.
pub fn resolve_aliases(file: &mut SourceFile) -> Result<(), AliasError> {
    let mut table: BTreeMap<String, &AliasDecl> = BTreeMap::new();
    for a in &file.aliases {
        if table.insert(a.name.clone(), a).is_some() {
            return Err(AliasError::Duplicate { name: a.name.clone(), span: a.span });
        }
    }
    let mut expanded: BTreeMap<String, SurfaceUnit> = BTreeMap::new();
    for name in table.keys() {
        let mut stack = HashSet::new();
        let u = expand(name, &table, &mut stack, &mut expanded)?;
        expanded.insert(name.clone(), u);
    }
    if expanded.is_empty() {
        return Ok(());
    }
    let mut subst = |u: &SurfaceUnit| u.substitute(&mut |n| expanded.get(n).cloned());
    for unit in &mut file.units {
        rewrite_unit(unit, &mut subst);
    }
    Ok(())
}

fn expand(
    name: &str,
    table: &BTreeMap<String, &AliasDecl>,
    stack: &mut HashSet<String>,
    done: &mut BTreeMap<String, SurfaceUnit>,
) -> Result<SurfaceUnit, AliasError> {
    if let Some(u) = done.get(name) {
        return Ok(u.clone());
    }
    let decl = table[name];
    if !stack.insert(name.to_string()) {
        return Err(AliasError::Cycle { name: name.to_string(), span: decl.span });
    }
    let mut names = vec![];
    decl.unit.names(&mut names);
    let mut sub = BTreeMap::new();
    for n in names {
        if table.contains_key(&n) {
            let u = expand(&n, table, stack, done)?;
            sub.insert(n, u);
        }
    }
    stack.remove(name);
    let out = decl.unit.substitute(&mut |n| sub.get(n).cloned());
    done.insert(name.to_string(), out.clone());
    Ok(out)
}

fn rewrite_annotation(a: &mut Annotation, f: &mut impl FnMut(&SurfaceUnit) -> SurfaceUnit) {
    if let AnnotationKind::Spec { unit, .. } = &mut a.kind {
        *unit = f(unit);
    }
}

fn rewrite_stmts(stmts: &mut [Stmt], f: &mut impl FnMut(&SurfaceUnit) -> SurfaceUnit) {
    for s in stmts {
        match s {
            Stmt::Annotation(a) => rewrite_annotation(a, f),
            Stmt::If { branches, otherwise, .. } => {
                for (_, b) in branches {
                    rewrite_stmts(b, f);
                }
                if let Some(b) = otherwise {
                    rewrite_stmts(b, f);
                }
            }
            Stmt::DoWhile { body, .. } => rewrite_stmts(body, f),
            _ => {}
        }
    }
}

fn rewrite_unit(pu: &mut ProgramUnit, f: &mut impl FnMut(&SurfaceUnit) -> SurfaceUnit) {
    for a in &mut pu.leading {
        rewrite_annotation(a, f);
    }
    for item in &mut pu.spec {
        if let SpecItem::Annotation(a) = item {
            rewrite_annotation(a, f);
        }
    }
    rewrite_stmts(&mut pu.body, f);
    for c in &mut pu.contains {
        rewrite_unit(c, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(text: &str) -> AnnotationKind {
        parse_annotation(text, Pos::new(1, 1)).kind
    }

    #[test]
    fn spec_annotation() {
        match kind("= unit metre :: x0") {
            AnnotationKind::Spec { unit, vars } => {
                assert_eq!(unit, SurfaceUnit::Name("metre".into()));
                assert_eq!(vars.len(), 1);
                assert_eq!(vars[0].name, "x0");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alias_annotation() {
        match kind("= unit :: speed = metre / sec") {
            AnnotationKind::Alias { name, unit } => {
                assert_eq!(name, "speed");
                assert_eq!(unit.to_string(), "metre / sec");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polymorphic_spec_and_var_columns() {
        let a = parse_annotation("= unit 'a :: n, m", Pos::new(3, 5));
        match a.kind {
            AnnotationKind::Spec { unit, vars } => {
                assert_eq!(unit, SurfaceUnit::Poly("a".into()));
                assert_eq!(vars[0].span.start, Pos::new(3, 19));
                assert_eq!(vars[1].name, "m");
                assert_eq!(vars[1].span.start, Pos::new(3, 22));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_annotations_are_reported_not_fatal() {
        assert!(matches!(kind("= unit metre x"), AnnotationKind::Malformed { .. }));
        assert!(matches!(kind("= units metre :: x"), AnnotationKind::Malformed { .. }));
        assert!(matches!(kind("= unit :: s = 'a"), AnnotationKind::Malformed { .. }));
    }
}
