//! Source positions, constraint provenance and diagnostics.

use std::fmt;
use std::sync::Arc;

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

/// Half-open span `[start, end)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

/// Why a constraint was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reason {
    Addition,
    Comparison,
    Condition,
    Subscript,
    Annotation,
    Assignment,
    CallArgument,
    ParameterLink,
    Summary,
    Intrinsic,
    LiteralUnitless,
    Recursion,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::Addition => "addition-operands",
            Reason::Comparison => "comparison-operands",
            Reason::Condition => "if-condition",
            Reason::Subscript => "array-index",
            Reason::Annotation => "annotation",
            Reason::Assignment => "assignment",
            Reason::CallArgument => "call-argument",
            Reason::ParameterLink => "parameter-link",
            Reason::Summary => "summary",
            Reason::Intrinsic => "intrinsic",
            Reason::LiteralUnitless => "literal-unitless",
            Reason::Recursion => "recursive-call",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub file: Arc<str>,
    pub span: Span,
    pub reason: Reason,
}

impl Provenance {
    pub fn new(file: &Arc<str>, span: Span, reason: Reason) -> Self {
        Provenance { file: file.clone(), span, reason }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} ({})", self.file, self.span, self.reason)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Suggestion,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Suggestion => "suggestion",
            Severity::Info => "info",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: Arc<str>,
    pub span: Span,
    pub message: String,
    /// Rendered constraints with their provenance.
    pub related: Vec<String>,
}

impl Diagnostic {
    pub fn error(file: &Arc<str>, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, file: file.clone(), span, message: message.into(), related: vec![] }
    }

    pub fn sort_key(&self) -> (&str, Pos) {
        (&self.file, self.span.start)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.file, self.span, self.severity, self.message)?;
        for r in &self.related {
            write!(f, "\n    {r}")?;
        }
        Ok(())
    }
}

pub fn sort_diagnostics(ds: &mut [Diagnostic]) {
    ds.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.message.cmp(&b.message)));
}
