//! Pretty printer. Output re-parses to the same tree modulo spans.

use std::fmt::Write;

use super::ast::*;

pub fn print_source(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, pu) in file.units.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_unit(&mut out, pu, 0);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn line(out: &mut String, depth: usize, text: &str) {
    indent(out, depth);
    out.push_str(text);
    out.push('\n');
}

fn print_unit(out: &mut String, pu: &ProgramUnit, depth: usize) {
    for a in &pu.leading {
        line(out, depth, &format!("!{}", a.text));
    }
    let params = pu.params.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ");
    let (head, word) = match &pu.kind {
        UnitKind::Program => (format!("program {}", pu.name.name), "program"),
        UnitKind::Module => (format!("module {}", pu.name.name), "module"),
        UnitKind::Function { result, ty } => {
            let ty = match ty {
                Some(BaseType::Real) => "real ",
                Some(BaseType::Integer) => "integer ",
                None => "",
            };
            let res = result.as_ref().map(|r| format!(" result({})", r.name)).unwrap_or_default();
            (format!("{ty}function {}({params}){res}", pu.name.name), "function")
        }
        UnitKind::Subroutine => (format!("subroutine {}({params})", pu.name.name), "subroutine"),
    };
    line(out, depth, &head);
    for u in &pu.uses {
        line(out, depth + 1, &format!("use {}", u.name));
    }
    for item in &pu.spec {
        print_spec(out, item, depth + 1);
    }
    print_block(out, &pu.body, depth + 1);
    if !pu.contains.is_empty() {
        line(out, depth, "contains");
        for c in &pu.contains {
            print_unit(out, c, depth + 1);
        }
    }
    line(out, depth, &format!("end {word} {}", pu.name.name));
}

fn print_entity(e: &Entity) -> String {
    let mut s = e.name.name.clone();
    if let Some(d) = &e.dims {
        write!(s, "({})", exprs(d)).unwrap();
    }
    if let Some(init) = &e.init {
        write!(s, " = {}", print_expr(init)).unwrap();
    }
    s
}

fn print_spec(out: &mut String, item: &SpecItem, depth: usize) {
    match item {
        SpecItem::ImplicitNone(_) => line(out, depth, "implicit none"),
        SpecItem::Decl { ty, attrs, double_colon, entities, .. } => {
            let mut s = match ty {
                BaseType::Real => "real".to_string(),
                BaseType::Integer => "integer".to_string(),
            };
            for a in attrs {
                match a {
                    Attr::Parameter => s.push_str(", parameter"),
                    Attr::Save => s.push_str(", save"),
                    Attr::Intent(i) => write!(s, ", intent({i})").unwrap(),
                }
            }
            s.push_str(if *double_colon { " :: " } else { " " });
            s.push_str(&entities.iter().map(print_entity).collect::<Vec<_>>().join(", "));
            line(out, depth, &s);
        }
        SpecItem::Dimension { entities, .. } => {
            let es = entities.iter().map(print_entity).collect::<Vec<_>>().join(", ");
            line(out, depth, &format!("dimension :: {es}"));
        }
        SpecItem::External { names, .. } => {
            let ns = names.iter().map(|n| n.name.as_str()).collect::<Vec<_>>().join(", ");
            line(out, depth, &format!("external :: {ns}"));
        }
        SpecItem::Annotation(a) => line(out, depth, &format!("!{}", a.text)),
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        print_stmt(out, s, depth);
    }
}

fn print_simple(s: &Stmt) -> String {
    match s {
        Stmt::Assign { target, indices, value, .. } => match indices {
            Some(ix) => format!("{}({}) = {}", target.name, exprs(ix), print_expr(value)),
            None => format!("{} = {}", target.name, print_expr(value)),
        },
        Stmt::Call { name, args, .. } => format!("call {}({})", name.name, exprs(args)),
        Stmt::Return(_) => "return".into(),
        _ => unreachable!("compound statement"),
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::If { branches, otherwise, inline: true, .. } if otherwise.is_none() && branches[0].1.len() == 1 => {
            let (c, b) = &branches[0];
            line(out, depth, &format!("if ({}) {}", print_expr(c), print_simple(&b[0])));
        }
        Stmt::If { branches, otherwise, .. } => {
            for (i, (c, b)) in branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "else if" };
                line(out, depth, &format!("{kw} ({}) then", print_expr(c)));
                print_block(out, b, depth + 1);
            }
            if let Some(b) = otherwise {
                line(out, depth, "else");
                print_block(out, b, depth + 1);
            }
            line(out, depth, "end if");
        }
        Stmt::DoWhile { cond, body, .. } => {
            line(out, depth, &format!("do while ({})", print_expr(cond)));
            print_block(out, body, depth + 1);
            line(out, depth, "end do");
        }
        Stmt::Annotation(a) => line(out, depth, &format!("!{}", a.text)),
        simple => line(out, depth, &print_simple(simple)),
    }
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Lit(l) => l.text.clone(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Apply { name, args } => format!("{}({})", name.name, exprs(args)),
        ExprKind::Unary(UnOp::Neg, x) => format!("-{}", print_expr(x)),
        ExprKind::Unary(UnOp::Plus, x) => format!("+{}", print_expr(x)),
        ExprKind::Binary(BinOp::Pow, a, b) => format!("{}**{}", print_expr(a), print_expr(b)),
        ExprKind::Binary(op, a, b) => format!("{} {} {}", print_expr(a), op.symbol(), print_expr(b)),
        ExprKind::Paren(x) => format!("({})", print_expr(x)),
    }
}
