//! Syntax tree for the supported Fortran subset.

use crate::diag::Span;
use crate::units::SurfaceUnit;

use super::lexer::Comment;

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceFile {
    pub path: String,
    pub units: Vec<ProgramUnit>,
    /// Alias annotations anywhere in the file, in source order.
    pub aliases: Vec<AliasDecl>,
    pub comments: Vec<Comment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseType {
    Real,
    Integer,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitKind {
    Program,
    Module,
    Function { result: Option<Ident>, ty: Option<BaseType> },
    Subroutine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProgramUnit {
    pub kind: UnitKind,
    pub name: Ident,
    pub params: Vec<Ident>,
    /// Annotations written immediately before the unit's opening statement.
    pub leading: Vec<Annotation>,
    pub uses: Vec<Ident>,
    pub spec: Vec<SpecItem>,
    pub body: Vec<Stmt>,
    pub contains: Vec<ProgramUnit>,
    /// Span of the opening statement only.
    pub header: Span,
    pub span: Span,
}

impl ProgramUnit {
    pub fn is_procedure(&self) -> bool {
        matches!(self.kind, UnitKind::Function { .. } | UnitKind::Subroutine)
    }

    /// The result variable of a function.
    pub fn result_name(&self) -> Option<&str> {
        match &self.kind {
            UnitKind::Function { result: Some(r), .. } => Some(&r.name),
            UnitKind::Function { result: None, .. } => Some(&self.name.name),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Attr {
    Parameter,
    Save,
    Intent(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub name: Ident,
    pub dims: Option<Vec<Expr>>,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpecItem {
    ImplicitNone(Span),
    Decl { ty: BaseType, attrs: Vec<Attr>, double_colon: bool, entities: Vec<Entity>, span: Span },
    Dimension { entities: Vec<Entity>, span: Span },
    External { names: Vec<Ident>, span: Span },
    Annotation(Annotation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub span: Span,
    /// Original comment text after `!`.
    pub text: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnnotationKind {
    Spec { unit: SurfaceUnit, vars: Vec<Ident> },
    Alias { name: String, unit: SurfaceUnit },
    /// A `!=` comment that failed to parse; reported and otherwise ignored.
    Malformed { message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AliasDecl {
    pub name: String,
    pub unit: SurfaceUnit,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign { target: Ident, indices: Option<Vec<Expr>>, value: Expr, span: Span },
    Call { name: Ident, args: Vec<Expr>, span: Span },
    If { branches: Vec<(Expr, Vec<Stmt>)>, otherwise: Option<Vec<Stmt>>, inline: bool, span: Span },
    DoWhile { cond: Expr, body: Vec<Stmt>, span: Span },
    Return(Span),
    Annotation(Annotation),
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Assign { span, .. }
            | Stmt::Call { span, .. }
            | Stmt::If { span, .. }
            | Stmt::DoWhile { span, .. }
            | Stmt::Return(span) => *span,
            Stmt::Annotation(a) => a.span,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "**",
            BinOp::Eq => "==",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Plus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Literal {
    pub text: String,
    pub is_int: bool,
    pub is_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    /// `name(args)`: function call or array subscript, told apart by the
    /// declaration environment.
    Apply { name: Ident, args: Vec<Expr> },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Paren(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    /// Looks through parentheses and unary signs for a bare literal.
    pub fn as_literal(&self) -> Option<&Literal> {
        match &self.kind {
            ExprKind::Lit(l) => Some(l),
            ExprKind::Paren(e) | ExprKind::Unary(_, e) => e.as_literal(),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Lit(_) | ExprKind::Var(_) => vec![],
            ExprKind::Apply { args, .. } => args.iter().collect(),
            ExprKind::Unary(_, e) | ExprKind::Paren(e) => vec![e],
            ExprKind::Binary(_, a, b) => vec![a, b],
        }
    }
}
