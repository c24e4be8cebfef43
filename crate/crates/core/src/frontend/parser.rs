//! Recursive-descent parser over the token stream.

use crate::diag::{Pos, Span};

use super::annotation::parse_annotation;
use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;

pub fn parse_source(text: &str, file: &str) -> Result<SourceFile, SyntaxError> {
    let lexed = lex(text, file)?;
    let mut p = Parser { toks: lexed.tokens, i: 0, file: file.to_string(), aliases: vec![] };
    let units = p.file()?;
    Ok(SourceFile { path: file.to_string(), units, aliases: p.aliases, comments: lexed.comments })
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    file: String,
    aliases: Vec<AliasDecl>,
}

const END_KEYWORDS: &[&str] =
    &["end", "endif", "enddo", "endprogram", "endmodule", "endfunction", "endsubroutine", "else", "elseif", "contains"];

impl Parser {
    fn tok(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_tok(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn span(&self) -> Span {
        self.toks[self.i].span
    }

    fn prev_end(&self) -> Pos {
        self.toks[self.i.saturating_sub(1)].span.end
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { file: self.file.clone(), pos: self.span().start, message: msg.into() }
    }

    fn unexpected(&self, what: &str) -> SyntaxError {
        self.err_here(format!("expected {what}, found {}", self.tok().describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.tok(), Tok::Ident(s) if s == kw)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_tok(k), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.tok() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, SyntaxError> {
        if self.tok() == &t {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, SyntaxError> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<Ident, SyntaxError> {
        match self.tok().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn end_of_stmt(&mut self) -> Result<(), SyntaxError> {
        match self.tok() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of statement")),
        }
    }

    fn skip_newlines(&mut self) {
        while self.tok() == &Tok::Newline {
            self.bump();
        }
    }

    fn annotation(&mut self) -> Annotation {
        let t = self.bump();
        let Tok::Annotation(text) = t.tok else { unreachable!() };
        let a = parse_annotation(&text, t.span.start);
        if let AnnotationKind::Alias { name, unit } = &a.kind {
            self.aliases.push(AliasDecl { name: name.clone(), unit: unit.clone(), span: a.span });
        }
        a
    }

    fn file(&mut self) -> Result<Vec<ProgramUnit>, SyntaxError> {
        let mut units = vec![];
        let mut pending = vec![];
        loop {
            self.skip_newlines();
            match self.tok() {
                Tok::Eof => break,
                Tok::Annotation(_) => pending.push(self.annotation()),
                _ => units.push(self.program_unit(std::mem::take(&mut pending))?),
            }
        }
        if let Some(a) = pending.first() {
            return Err(SyntaxError {
                file: self.file.clone(),
                pos: a.span.start,
                message: "annotation is not followed by a declaration".into(),
            });
        }
        Ok(units)
    }

    fn starts_procedure(&self) -> bool {
        self.is_kw("function")
            || self.is_kw("subroutine")
            || ((self.is_kw("real") || self.is_kw("integer")) && self.is_kw_at(1, "function"))
    }

    fn program_unit(&mut self, leading: Vec<Annotation>) -> Result<ProgramUnit, SyntaxError> {
        let start = self.span();
        let (kind, name, params) = if self.is_kw("program") || self.is_kw("module") {
            let kind = if self.is_kw("program") { UnitKind::Program } else { UnitKind::Module };
            self.bump();
            (kind, self.ident()?, vec![])
        } else if self.starts_procedure() {
            let ty = if self.is_kw("real") {
                self.bump();
                Some(BaseType::Real)
            } else if self.is_kw("integer") {
                self.bump();
                Some(BaseType::Integer)
            } else {
                None
            };
            let is_fn = self.is_kw("function");
            self.bump();
            let name = self.ident()?;
            let mut params = vec![];
            if self.eat(&Tok::LParen) {
                if self.tok() != &Tok::RParen {
                    loop {
                        params.push(self.ident()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
            } else if is_fn {
                return Err(self.unexpected("`(`"));
            }
            let kind = if is_fn {
                let result = if self.is_kw("result") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let r = self.ident()?;
                    self.expect(Tok::RParen)?;
                    Some(r)
                } else {
                    None
                };
                UnitKind::Function { result, ty }
            } else {
                UnitKind::Subroutine
            };
            (kind, name, params)
        } else {
            return Err(self.unexpected("`program`, `module`, `function` or `subroutine`"));
        };
        let header = start.to(Span::new(start.start, self.prev_end()));
        self.end_of_stmt()?;

        let mut pu = ProgramUnit {
            kind,
            name,
            params,
            leading,
            uses: vec![],
            spec: vec![],
            body: vec![],
            contains: vec![],
            header,
            span: header,
        };
        self.spec_part(&mut pu)?;
        pu.body = self.block()?;
        if self.is_kw("contains") {
            self.bump();
            self.end_of_stmt()?;
            let mut pending = vec![];
            loop {
                self.skip_newlines();
                if let Tok::Annotation(_) = self.tok() {
                    pending.push(self.annotation());
                } else if self.starts_procedure() {
                    pu.contains.push(self.program_unit(std::mem::take(&mut pending))?);
                } else {
                    break;
                }
            }
            if let Some(a) = pending.first() {
                return Err(SyntaxError {
                    file: self.file.clone(),
                    pos: a.span.start,
                    message: "annotation is not followed by a function or subroutine".into(),
                });
            }
        }
        let end = self.end_unit(&pu)?;
        pu.span = pu.header.to(end);
        Ok(pu)
    }

    fn end_unit(&mut self, pu: &ProgramUnit) -> Result<Span, SyntaxError> {
        let word = match &pu.kind {
            UnitKind::Program => "program",
            UnitKind::Module => "module",
            UnitKind::Function { .. } => "function",
            UnitKind::Subroutine => "subroutine",
        };
        let start = self.span();
        let joined = format!("end{word}");
        if self.is_kw(&joined) {
            self.bump();
        } else {
            self.expect_kw("end")?;
            if self.is_kw(word) {
                self.bump();
            } else if matches!(self.tok(), Tok::Ident(_)) {
                return Err(self.unexpected(&format!("`end {word}`")));
            }
        }
        if let Tok::Ident(n) = self.tok().clone() {
            if n != pu.name.name {
                return Err(self.err_here(format!("`end {word}` names `{n}`, expected `{}`", pu.name.name)));
            }
            self.bump();
        }
        let span = start.to(Span::new(start.start, self.prev_end()));
        self.end_of_stmt()?;
        Ok(span)
    }

    fn spec_part(&mut self, pu: &mut ProgramUnit) -> Result<(), SyntaxError> {
        loop {
            self.skip_newlines();
            let start = self.span();
            if let Tok::Annotation(_) = self.tok() {
                // annotations in the spec part may precede declarations or
                // the first executable statement alike
                let a = self.annotation();
                pu.spec.push(SpecItem::Annotation(a));
                continue;
            }
            if self.is_kw("use") {
                self.bump();
                pu.uses.push(self.ident()?);
                // `, only: ...` lists are accepted and ignored
                while !matches!(self.tok(), Tok::Newline | Tok::Eof) {
                    self.bump();
                }
                self.end_of_stmt()?;
            } else if self.is_kw("implicit") {
                self.bump();
                self.expect_kw("none")?;
                pu.spec.push(SpecItem::ImplicitNone(start.to(Span::new(start.start, self.prev_end()))));
                self.end_of_stmt()?;
            } else if (self.is_kw("real") || self.is_kw("integer")) && !self.is_kw_at(1, "function") {
                let item = self.type_decl()?;
                pu.spec.push(item);
            } else if self.is_kw("dimension") {
                self.bump();
                self.eat(&Tok::DoubleColon);
                let mut entities = vec![];
                loop {
                    let e = self.entity(false)?;
                    if e.dims.is_none() {
                        return Err(SyntaxError {
                            file: self.file.clone(),
                            pos: e.span.start,
                            message: "`dimension` entity needs bounds".into(),
                        });
                    }
                    entities.push(e);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                pu.spec.push(SpecItem::Dimension { entities, span: start.to(Span::new(start.start, self.prev_end())) });
                self.end_of_stmt()?;
            } else if self.is_kw("external") {
                self.bump();
                self.eat(&Tok::DoubleColon);
                let mut names = vec![];
                loop {
                    names.push(self.ident()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                pu.spec.push(SpecItem::External { names, span: start.to(Span::new(start.start, self.prev_end())) });
                self.end_of_stmt()?;
            } else {
                return Ok(());
            }
        }
    }

    fn type_decl(&mut self) -> Result<SpecItem, SyntaxError> {
        let start = self.span();
        let ty = if self.is_kw("real") { BaseType::Real } else { BaseType::Integer };
        self.bump();
        // kind selector such as real(8) or real(kind=dp) is skipped
        if self.tok() == &Tok::LParen {
            let mut depth = 0;
            loop {
                match self.tok() {
                    Tok::LParen => depth += 1,
                    Tok::RParen => depth -= 1,
                    Tok::Newline | Tok::Eof => return Err(self.unexpected("`)`")),
                    _ => {}
                }
                self.bump();
                if depth == 0 {
                    break;
                }
            }
        }
        let mut attrs = vec![];
        while self.eat(&Tok::Comma) {
            let a = self.ident()?;
            match a.name.as_str() {
                "parameter" => attrs.push(Attr::Parameter),
                "save" => attrs.push(Attr::Save),
                "intent" => {
                    self.expect(Tok::LParen)?;
                    let mut what = self.ident()?.name;
                    if what == "in" && self.is_kw("out") {
                        self.bump();
                        what = "inout".into();
                    }
                    self.expect(Tok::RParen)?;
                    attrs.push(Attr::Intent(what));
                }
                "dimension" => {
                    return Err(SyntaxError {
                        file: self.file.clone(),
                        pos: a.span.start,
                        message: "the `dimension(...)` attribute is not supported; declare bounds on the entity or \
                                  use a separate `dimension ::` statement"
                            .into(),
                    })
                }
                other => {
                    return Err(SyntaxError {
                        file: self.file.clone(),
                        pos: a.span.start,
                        message: format!("unsupported attribute `{other}`"),
                    })
                }
            }
        }
        let double_colon = self.eat(&Tok::DoubleColon);
        let mut entities = vec![];
        loop {
            entities.push(self.entity(true)?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let span = start.to(Span::new(start.start, self.prev_end()));
        self.end_of_stmt()?;
        Ok(SpecItem::Decl { ty, attrs, double_colon, entities, span })
    }

    fn entity(&mut self, allow_init: bool) -> Result<Entity, SyntaxError> {
        let name = self.ident()?;
        let mut span = name.span;
        let dims = if self.tok() == &Tok::LParen {
            self.bump();
            let d = self.expr_list()?;
            span = span.to(self.expect(Tok::RParen)?);
            Some(d)
        } else {
            None
        };
        let init = if allow_init && self.eat(&Tok::Assign) {
            let e = self.expr()?;
            span = span.to(e.span);
            Some(e)
        } else {
            None
        };
        Ok(Entity { name, dims, init, span })
    }

    fn at_block_end(&self) -> bool {
        match self.tok() {
            Tok::Eof => true,
            Tok::Ident(s) => END_KEYWORDS.contains(&s.as_str()) || self.starts_procedure(),
            _ => false,
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = vec![];
        loop {
            self.skip_newlines();
            if self.at_block_end() {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let start = self.span();
        if let Tok::Annotation(_) = self.tok() {
            return Ok(Stmt::Annotation(self.annotation()));
        }
        let s = self.simple_or_compound()?;
        Ok(match s {
            Some(s) => s,
            None => return Err(SyntaxError { file: self.file.clone(), pos: start.start, message: "unsupported statement".into() }),
        })
    }

    fn simple_or_compound(&mut self) -> Result<Option<Stmt>, SyntaxError> {
        let start = self.span();
        if self.is_kw("if") && self.peek_tok(1) == &Tok::LParen {
            return self.if_stmt().map(Some);
        }
        if self.is_kw("do") && self.is_kw_at(1, "while") {
            self.bump();
            self.bump();
            self.expect(Tok::LParen)?;
            let cond = self.expr()?;
            self.expect(Tok::RParen)?;
            self.end_of_stmt()?;
            let body = self.block()?;
            if self.is_kw("enddo") {
                self.bump();
            } else {
                self.expect_kw("end")?;
                self.expect_kw("do")?;
            }
            let span = start.to(Span::new(start.start, self.prev_end()));
            self.end_of_stmt()?;
            return Ok(Some(Stmt::DoWhile { cond, body, span }));
        }
        let s = self.simple()?;
        self.end_of_stmt()?;
        Ok(s)
    }

    /// Assignment, call or return, without the statement terminator.
    fn simple(&mut self) -> Result<Option<Stmt>, SyntaxError> {
        let start = self.span();
        if self.is_kw("call") && matches!(self.peek_tok(1), Tok::Ident(_)) {
            self.bump();
            let name = self.ident()?;
            let mut args = vec![];
            if self.eat(&Tok::LParen) {
                if self.tok() != &Tok::RParen {
                    args = self.expr_list()?;
                }
                self.expect(Tok::RParen)?;
            }
            let span = start.to(Span::new(start.start, self.prev_end()));
            return Ok(Some(Stmt::Call { name, args, span }));
        }
        if self.is_kw("return") && matches!(self.peek_tok(1), Tok::Newline | Tok::Eof) {
            let span = self.bump().span;
            return Ok(Some(Stmt::Return(span)));
        }
        if let Tok::Ident(_) = self.tok() {
            let target = self.ident()?;
            let indices = if self.tok() == &Tok::LParen {
                self.bump();
                let ix = self.expr_list()?;
                self.expect(Tok::RParen)?;
                Some(ix)
            } else {
                None
            };
            if self.tok() != &Tok::Assign {
                return Err(self.unexpected("`=`"));
            }
            self.bump();
            let value = self.expr()?;
            let span = start.to(value.span);
            return Ok(Some(Stmt::Assign { target, indices, value, span }));
        }
        Ok(None)
    }

    fn if_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let start = self.span();
        self.bump();
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        if !self.is_kw("then") {
            let Some(inner) = self.simple()? else { return Err(self.unexpected("statement")) };
            let span = start.to(inner.span());
            self.end_of_stmt()?;
            return Ok(Stmt::If { branches: vec![(cond, vec![inner])], otherwise: None, inline: true, span });
        }
        self.bump();
        self.end_of_stmt()?;
        let mut branches = vec![(cond, self.block()?)];
        let mut otherwise = None;
        loop {
            let else_if = self.is_kw("elseif") || (self.is_kw("else") && self.is_kw_at(1, "if"));
            if else_if {
                if self.is_kw("else") {
                    self.bump();
                }
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect_kw("then")?;
                self.end_of_stmt()?;
                branches.push((c, self.block()?));
            } else if self.is_kw("else") {
                self.bump();
                self.end_of_stmt()?;
                otherwise = Some(self.block()?);
            } else {
                break;
            }
        }
        if self.is_kw("endif") {
            self.bump();
        } else {
            self.expect_kw("end")?;
            self.expect_kw("if")?;
        }
        let span = start.to(Span::new(start.start, self.prev_end()));
        self.end_of_stmt()?;
        Ok(Stmt::If { branches, otherwise, inline: false, span })
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut out = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.additive()?;
        let op = match self.tok() {
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::DotOp(s) => match s.as_str() {
                "eq" => BinOp::Eq,
                "ne" => BinOp::Ne,
                "lt" => BinOp::Lt,
                "le" => BinOp::Le,
                "gt" => BinOp::Gt,
                "ge" => BinOp::Ge,
                other => return Err(self.err_here(format!("unsupported operator `.{other}.`"))),
            },
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        Ok(binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr, SyntaxError> {
        let start = self.span();
        let mut lhs = match self.tok() {
            Tok::Minus | Tok::Plus => {
                let op = if self.tok() == &Tok::Minus { UnOp::Neg } else { UnOp::Plus };
                self.bump();
                let e = self.multiplicative()?;
                Expr { span: start.to(e.span), kind: ExprKind::Unary(op, Box::new(e)) }
            }
            _ => self.multiplicative()?,
        };
        loop {
            let op = match self.tok() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.tok() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.power()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if self.tok() != &Tok::Pow {
            return Ok(base);
        }
        self.bump();
        let start = self.span();
        let exp = match self.tok() {
            Tok::Minus | Tok::Plus => {
                let op = if self.tok() == &Tok::Minus { UnOp::Neg } else { UnOp::Plus };
                self.bump();
                let e = self.power()?;
                Expr { span: start.to(e.span), kind: ExprKind::Unary(op, Box::new(e)) }
            }
            _ => self.power()?,
        };
        Ok(binary(BinOp::Pow, base, exp))
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.tok().clone();
        let span = self.span();
        match t {
            Tok::Int(text) | Tok::Real(text) => {
                self.bump();
                let is_int = matches!(self.toks[self.i - 1].tok, Tok::Int(_));
                let is_zero = text.parse::<f64>().map(|v| v == 0.0).unwrap_or(false);
                Ok(Expr { kind: ExprKind::Lit(Literal { text, is_int, is_zero }), span })
            }
            Tok::Ident(name) => {
                self.bump();
                if self.tok() == &Tok::LParen {
                    self.bump();
                    let args = if self.tok() == &Tok::RParen { vec![] } else { self.expr_list()? };
                    let end = self.expect(Tok::RParen)?;
                    Ok(Expr { kind: ExprKind::Apply { name: Ident { name, span }, args }, span: span.to(end) })
                } else {
                    Ok(Expr { kind: ExprKind::Var(name), span })
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr { kind: ExprKind::Paren(Box::new(e)), span: span.to(end) })
            }
            Tok::Newline | Tok::Eof => Err(self.err_here("unexpected end of expression")),
            other => Err(self.err_here(format!("unexpected {} in expression", other.describe()))),
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr { span: lhs.span.to(rhs.span), kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)) }
}

/// Parses a single expression; used by tests and tools.
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let lexed = lex(text, "<expr>")?;
    let mut p = Parser { toks: lexed.tokens, i: 0, file: "<expr>".into(), aliases: vec![] };
    let e = p.expr()?;
    p.end_of_stmt()?;
    if p.tok() != &Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}
