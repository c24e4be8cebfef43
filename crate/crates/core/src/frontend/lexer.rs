//! Free-form lexer. Statements are separated by `Newline` tokens; `&`
//! continuations are folded away and comments are split off, except that
//! `!=` annotation comments become tokens of their own.

use crate::diag::{Pos, Span};

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// Lower-cased identifier or keyword.
    Ident(String),
    Int(String),
    Real(String),
    /// `.eq.`, `.and.` and friends, without the dots.
    DotOp(String),
    Plus,
    Minus,
    Star,
    Slash,
    Pow,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    Comma,
    Colon,
    DoubleColon,
    Assign,
    /// Full annotation comment text after the `!`.
    Annotation(String),
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(s) | Tok::Real(s) => format!("`{s}`"),
            Tok::DotOp(s) => format!("`.{s}.`"),
            Tok::Annotation(_) => "annotation".into(),
            Tok::Newline => "end of statement".into(),
            Tok::Eof => "end of file".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Pow => "**",
            Tok::EqEq => "==",
            Tok::NotEq => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::DoubleColon => "::",
            Tok::Assign => "=",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// A plain comment, kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comment {
    pub pos: Pos,
    pub text: String,
}

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

const DOT_OPS: &[&str] = &["eq", "ne", "lt", "le", "gt", "ge", "and", "or", "not", "true", "false"];

struct Lexer<'a> {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    file: &'a str,
    out: Vec<Token>,
    comments: Vec<Comment>,
}

pub fn lex(src: &str, file: &str) -> Result<Lexed, SyntaxError> {
    let mut lx = Lexer { chars: src.chars().collect(), i: 0, line: 1, col: 1, file, out: vec![], comments: vec![] };
    lx.run()?;
    Ok(Lexed { tokens: lx.out, comments: lx.comments })
}

impl Lexer<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn push(&mut self, tok: Tok, start: Pos) {
        let span = Span::new(start, self.pos());
        self.out.push(Token { tok, span });
    }

    fn newline(&mut self, at: Pos) {
        if !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
            self.out.push(Token { tok: Tok::Newline, span: Span::new(at, at) });
        }
    }

    fn err(&self, pos: Pos, msg: String) -> SyntaxError {
        SyntaxError { file: self.file.to_string(), pos, message: msg }
    }

    /// Consumes a comment up to (not including) the newline.
    fn comment(&mut self) -> (Pos, String) {
        let start = self.pos();
        self.bump();
        let mut text = String::new();
        while let Some(c) = self.peek(0) {
            if c == '\n' {
                break;
            }
            text.push(self.bump());
        }
        (start, text.trim_end_matches('\r').to_string())
    }

    fn line_is_blank_before(&self) -> bool {
        matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline))
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        while let Some(c) = self.peek(0) {
            let start = self.pos();
            match c {
                '\n' => {
                    self.bump();
                    self.newline(start);
                }
                ';' => {
                    self.bump();
                    self.newline(start);
                }
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '!' => {
                    let standalone = self.line_is_blank_before();
                    let (pos, text) = self.comment();
                    if text.starts_with('=') {
                        if !standalone {
                            self.newline(pos);
                        }
                        self.out.push(Token { tok: Tok::Annotation(text), span: Span::new(pos, self.pos()) });
                        self.newline(self.pos());
                    } else {
                        self.comments.push(Comment { pos, text });
                    }
                }
                '&' => {
                    self.bump();
                    self.continuation()?;
                }
                c if c.is_ascii_alphabetic() => {
                    let mut s = String::new();
                    while let Some(c) = self.peek(0) {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(self.bump().to_ascii_lowercase());
                        } else {
                            break;
                        }
                    }
                    self.push(Tok::Ident(s), start);
                }
                c if c.is_ascii_digit() => self.number(start)?,
                '.' => {
                    if self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
                        self.number(start)?;
                    } else if let Some(op) = self.dot_op_at(self.i) {
                        for _ in 0..op.len() + 2 {
                            self.bump();
                        }
                        self.push(Tok::DotOp(op), start);
                    } else {
                        return Err(self.err(start, "unexpected `.`".into()));
                    }
                }
                _ => self.punct(start)?,
            }
        }
        let end = self.pos();
        self.newline(end);
        self.out.push(Token { tok: Tok::Eof, span: Span::new(end, end) });
        Ok(())
    }

    /// After `&`: skip to the end of the line (a comment may follow), then
    /// leading blanks, blank/comment lines and an optional leading `&`.
    fn continuation(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek(0) {
                Some(' ' | '\t' | '\r') => {
                    self.bump();
                }
                Some('!') => {
                    let (pos, text) = self.comment();
                    self.comments.push(Comment { pos, text });
                }
                Some('\n') => {
                    self.bump();
                    break;
                }
                None => return Ok(()),
                Some(_) => {
                    let p = self.pos();
                    return Err(self.err(p, "text after continuation `&`".into()));
                }
            }
        }
        loop {
            match self.peek(0) {
                Some(' ' | '\t' | '\r') => {
                    self.bump();
                }
                Some('&') => {
                    self.bump();
                    return Ok(());
                }
                Some('!') => {
                    let (pos, text) = self.comment();
                    self.comments.push(Comment { pos, text });
                }
                Some('\n') => {
                    self.bump();
                }
                _ => return Ok(()),
            }
        }
    }

    fn dot_op_at(&self, i: usize) -> Option<String> {
        let mut j = i + 1;
        let mut s = String::new();
        while let Some(c) = self.chars.get(j) {
            if c.is_ascii_alphabetic() {
                s.push(c.to_ascii_lowercase());
                j += 1;
            } else {
                break;
            }
        }
        (self.chars.get(j) == Some(&'.') && DOT_OPS.contains(&s.as_str())).then_some(s)
    }

    fn digits(&mut self, s: &mut String) {
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() {
                s.push(self.bump());
            } else {
                break;
            }
        }
    }

    fn number(&mut self, start: Pos) -> Result<(), SyntaxError> {
        let mut s = String::new();
        let mut real = false;
        self.digits(&mut s);
        if self.peek(0) == Some('.') && self.dot_op_at(self.i).is_none() {
            real = true;
            s.push(self.bump());
            self.digits(&mut s);
        }
        if let Some('e' | 'E' | 'd' | 'D') = self.peek(0) {
            let sign = matches!(self.peek(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                real = true;
                self.bump();
                s.push('e');
                if sign {
                    s.push(self.bump());
                }
                self.digits(&mut s);
            }
        }
        // kind suffix such as `_8` or `_dp`
        if self.peek(0) == Some('_') && self.peek(1).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.bump();
            while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
        }
        if s == "." {
            return Err(self.err(start, "malformed number".into()));
        }
        self.push(if real { Tok::Real(s) } else { Tok::Int(s) }, start);
        Ok(())
    }

    fn punct(&mut self, start: Pos) -> Result<(), SyntaxError> {
        let c = self.bump();
        let next = self.peek(0);
        let tok = match (c, next) {
            ('*', Some('*')) => {
                self.bump();
                Tok::Pow
            }
            ('=', Some('=')) => {
                self.bump();
                Tok::EqEq
            }
            ('/', Some('=')) => {
                self.bump();
                Tok::NotEq
            }
            ('<', Some('=')) => {
                self.bump();
                Tok::Le
            }
            ('>', Some('=')) => {
                self.bump();
                Tok::Ge
            }
            (':', Some(':')) => {
                self.bump();
                Tok::DoubleColon
            }
            ('+', _) => Tok::Plus,
            ('-', _) => Tok::Minus,
            ('*', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('<', _) => Tok::Lt,
            ('>', _) => Tok::Gt,
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            (',', _) => Tok::Comma,
            (':', _) => Tok::Colon,
            ('=', _) => Tok::Assign,
            (other, _) => return Err(self.err(start, format!("unexpected character `{other}`"))),
        };
        self.push(tok, start);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src, "t.f90").unwrap().tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_statement() {
        assert_eq!(
            toks("X = 0.5 * a"),
            vec![
                Tok::Ident("x".into()),
                Tok::Assign,
                Tok::Real("0.5".into()),
                Tok::Star,
                Tok::Ident("a".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn continuation_and_comments() {
        let l = lex("x = a + & ! note\n    & b\n! plain\n", "t.f90").unwrap();
        let t: Vec<_> = l.tokens.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(t[..5], [Tok::Ident("x".into()), Tok::Assign, Tok::Ident("a".into()), Tok::Plus, Tok::Ident("b".into())]);
        assert_eq!(l.comments.len(), 2);
    }

    #[test]
    fn annotations_are_tokens() {
        let t = toks("  != unit metre :: x\n  real :: x\n");
        assert_eq!(t[0], Tok::Annotation("= unit metre :: x".into()));
        assert_eq!(t[1], Tok::Newline);
    }

    #[test]
    fn dot_operators_and_numbers() {
        assert_eq!(toks("1.eq.2")[..3], [Tok::Int("1".into()), Tok::DotOp("eq".into()), Tok::Int("2".into())]);
        assert_eq!(toks("1.0d-3")[0], Tok::Real("1.0e-3".into()));
        assert_eq!(toks("2.0_dp")[0], Tok::Real("2.0".into()));
        assert_eq!(toks("a /= b")[1], Tok::NotEq);
    }

    #[test]
    fn columns_are_one_based() {
        let l = lex("  real :: x0", "t.f90").unwrap();
        assert_eq!(l.tokens[2].span.start, Pos::new(1, 11));
    }
}
