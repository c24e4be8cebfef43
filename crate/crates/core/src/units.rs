//! Unit expressions, unit variables and their Abelian-group normal form.

use std::collections::BTreeMap;
use std::fmt;

use crate::int::Int;

/// Identifier of a literal occurrence or a monomorphic variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LitOrVar {
    /// A variable `name` declared in program unit `scope`.
    Var { scope: String, name: String },
    /// A literal occurrence with a unique id.
    Lit(u64),
}

/// What an abstract unit variable belongs to inside a function or subroutine:
/// a positional slot (0 is the result), a local variable or a literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Param(usize),
    Var(String),
    Lit(u64),
}

/// An explicit polymorphic unit name (`'a`), scoped to the program unit that
/// introduced it so that equal spellings in different functions stay apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyName {
    pub name: String,
    pub scope: String,
}

impl PolyName {
    pub fn new(name: impl Into<String>, scope: impl Into<String>) -> Self {
        PolyName { name: name.into(), scope: scope.into() }
    }
}

/// Unit variables. `ParamAbs` and `ExplicitAbs` are universally quantified;
/// the `*Use` forms are their instances at a particular call id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitVar {
    ExplicitAbs(PolyName),
    LitOrVar(LitOrVar),
    ParamAbs { fs: String, slot: Slot },
    ParamUse { fs: String, slot: Slot, call: u64 },
    ExplicitUse(PolyName, u64),
}

impl UnitVar {
    pub fn var(scope: &str, name: &str) -> Self {
        UnitVar::LitOrVar(LitOrVar::Var { scope: scope.into(), name: name.into() })
    }

    pub fn lit(id: u64) -> Self {
        UnitVar::LitOrVar(LitOrVar::Lit(id))
    }

    pub fn param_abs(fs: &str, slot: Slot) -> Self {
        UnitVar::ParamAbs { fs: fs.into(), slot }
    }

    pub fn param_use(fs: &str, slot: Slot, call: u64) -> Self {
        UnitVar::ParamUse { fs: fs.into(), slot, call }
    }

    /// Abstract variables are the ones instantiation rewrites.
    pub fn is_abstract(&self) -> bool {
        matches!(self, UnitVar::ParamAbs { .. } | UnitVar::ExplicitAbs(_))
    }

    /// Parametric polymorphic variables in any form.
    pub fn is_polymorphic(&self) -> bool {
        !matches!(self, UnitVar::LitOrVar(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, UnitVar::LitOrVar(LitOrVar::Lit(_)))
    }

    pub fn call_id(&self) -> Option<u64> {
        match self {
            UnitVar::ParamUse { call, .. } | UnitVar::ExplicitUse(_, call) => Some(*call),
            _ => None,
        }
    }
}

impl fmt::Display for UnitVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn slot(s: &Slot) -> String {
            match s {
                Slot::Param(k) => format!("#{k}"),
                Slot::Var(x) => format!(".{x}"),
                Slot::Lit(l) => format!(".<literal {l}>"),
            }
        }
        match self {
            UnitVar::LitOrVar(LitOrVar::Var { name, .. }) => write!(f, "{name}"),
            UnitVar::LitOrVar(LitOrVar::Lit(l)) => write!(f, "<literal {l}>"),
            UnitVar::ParamAbs { fs, slot: s } => write!(f, "{fs}{}", slot(s)),
            UnitVar::ParamUse { fs, slot: s, call } => write!(f, "{fs}{}[{call}]", slot(s)),
            UnitVar::ExplicitAbs(p) => write!(f, "'{}", p.name),
            UnitVar::ExplicitUse(p, call) => write!(f, "'{}[{call}]", p.name),
        }
    }
}

/// Internal unit terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UnitExpr {
    Base(String),
    Unitless,
    Product(Box<UnitExpr>, Box<UnitExpr>),
    Power(Box<UnitExpr>, Int),
    Var(UnitVar),
}

impl UnitExpr {
    pub fn base(name: impl Into<String>) -> Self {
        UnitExpr::Base(name.into())
    }

    pub fn product(a: UnitExpr, b: UnitExpr) -> Self {
        match (a, b) {
            (UnitExpr::Unitless, b) => b,
            (a, UnitExpr::Unitless) => a,
            (a, b) => UnitExpr::Product(Box::new(a), Box::new(b)),
        }
    }

    /// `u**z`, with `u**0 = 1` and `u**1 = u`.
    pub fn power(u: UnitExpr, z: impl Into<Int>) -> Self {
        let z = z.into();
        if z.is_zero() || u == UnitExpr::Unitless {
            UnitExpr::Unitless
        } else if z.is_one() {
            u
        } else {
            UnitExpr::Power(Box::new(u), z)
        }
    }

    pub fn inverse(u: UnitExpr) -> Self {
        UnitExpr::power(u, -1)
    }

    pub fn normalize(&self) -> UnitMap {
        let mut out = UnitMap::default();
        self.accumulate(&Int::ONE, &mut out);
        out
    }

    fn accumulate(&self, scale: &Int, out: &mut UnitMap) {
        match self {
            UnitExpr::Base(n) => out.add(Atom::Base(n.clone()), scale),
            UnitExpr::Unitless => {}
            UnitExpr::Product(a, b) => {
                a.accumulate(scale, out);
                b.accumulate(scale, out);
            }
            UnitExpr::Power(u, z) => u.accumulate(&(scale * z), out),
            UnitExpr::Var(v) => out.add(Atom::Var(v.clone()), scale),
        }
    }

    /// Rewrites every variable through `f`, structurally.
    pub fn map_vars(&self, f: &mut impl FnMut(&UnitVar) -> UnitExpr) -> UnitExpr {
        match self {
            UnitExpr::Base(_) | UnitExpr::Unitless => self.clone(),
            UnitExpr::Product(a, b) => UnitExpr::Product(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            UnitExpr::Power(u, z) => UnitExpr::Power(Box::new(u.map_vars(f)), z.clone()),
            UnitExpr::Var(v) => f(v),
        }
    }

    pub fn vars(&self) -> Vec<&UnitVar> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a UnitVar>) {
        match self {
            UnitExpr::Product(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            UnitExpr::Power(u, _) => u.collect_vars(out),
            UnitExpr::Var(v) => out.push(v),
            _ => {}
        }
    }

    /// No parametric polymorphic variables anywhere inside.
    pub fn is_monomorphic(&self) -> bool {
        self.vars().iter().all(|v| !v.is_polymorphic())
    }
}

impl From<UnitVar> for UnitExpr {
    fn from(v: UnitVar) -> Self {
        UnitExpr::Var(v)
    }
}

impl fmt::Display for UnitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.normalize())
    }
}

pub fn units_equal(a: &UnitExpr, b: &UnitExpr) -> bool {
    a.normalize() == b.normalize()
}

/// Atoms of the normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Base(String),
    Var(UnitVar),
    /// A polymorphic variable introduced by the solver.
    Generated(u32),
}

impl Atom {
    fn is_poly_display(&self) -> bool {
        matches!(self, Atom::Var(v) if v.is_polymorphic()) || matches!(self, Atom::Generated(_))
    }

    /// Base units and explicit polymorphic names: the rigid atoms of a solution.
    pub fn is_real(&self) -> bool {
        matches!(self, Atom::Base(_) | Atom::Var(UnitVar::ExplicitAbs(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Base(n) => write!(f, "{n}"),
            Atom::Var(v) => write!(f, "{v}"),
            Atom::Generated(k) => write!(f, "'_{k}"),
        }
    }
}

/// Scope given to solver-generated variables when rebuilt as expressions.
pub const GENERATED_SCOPE: &str = "#generated";

/// Finite map from atoms to nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct UnitMap(BTreeMap<Atom, Int>);

impl UnitMap {
    pub fn add(&mut self, atom: Atom, exp: &Int) {
        if exp.is_zero() {
            return;
        }
        let entry = self.0.entry(atom);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(exp.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + exp;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_map(&mut self, other: &UnitMap, scale: &Int) {
        for (a, e) in &other.0 {
            self.add(a.clone(), &(scale * e));
        }
    }

    pub fn is_unitless(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &Int)> {
        self.0.iter()
    }

    pub fn get(&self, atom: &Atom) -> Option<&Int> {
        self.0.get(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rebuilds a unit expression whose normal form is this map.
    pub fn denormalize(&self) -> UnitExpr {
        self.0.iter().fold(UnitExpr::Unitless, |acc, (a, e)| {
            let atom = match a {
                Atom::Base(n) => UnitExpr::Base(n.clone()),
                Atom::Var(v) => UnitExpr::Var(v.clone()),
                Atom::Generated(k) => UnitExpr::Var(UnitVar::ExplicitAbs(PolyName::new(format!("_{k}"), GENERATED_SCOPE))),
            };
            UnitExpr::product(acc, UnitExpr::power(atom, e.clone()))
        })
    }
}

impl FromIterator<(Atom, Int)> for UnitMap {
    fn from_iter<T: IntoIterator<Item = (Atom, Int)>>(iter: T) -> Self {
        let mut m = UnitMap::default();
        for (a, e) in iter {
            m.add(a, &e);
        }
        m
    }
}

impl fmt::Display for UnitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<_> = self
            .0
            .iter()
            .map(|(a, e)| PrintAtom { label: a.to_string(), poly: a.is_poly_display(), exp: e.clone() })
            .collect();
        f.write_str(&print_unit(&items))
    }
}

/// One factor handed to [`print_unit`]. For polymorphic atoms `label`
/// already carries the leading quote.
#[derive(Clone, Debug)]
pub struct PrintAtom {
    pub label: String,
    pub poly: bool,
    pub exp: Int,
}

fn print_factor(a: &PrintAtom, exp: &Int) -> String {
    match (a.poly, exp.is_one()) {
        (_, true) => a.label.clone(),
        (true, false) => format!("({})**{}", a.label, exp),
        (false, false) => format!("{}**{}", a.label, exp),
    }
}

/// Prints factors in the annotation surface syntax, e.g. `metre / (sec**2)`
/// or `('a)**2`. Factors are printed in the order given.
pub fn print_unit(items: &[PrintAtom]) -> String {
    let num: Vec<String> = items
        .iter()
        .filter(|a| a.exp.is_positive())
        .map(|a| print_factor(a, &a.exp))
        .collect();
    let den: Vec<(String, bool)> = items
        .iter()
        .filter(|a| a.exp.is_negative())
        .map(|a| {
            let e = a.exp.abs();
            (print_factor(a, &e), e.is_one())
        })
        .collect();
    let mut out = if num.is_empty() { "1".to_string() } else { num.join(" ") };
    match den.as_slice() {
        [] => {}
        [(single, true)] => {
            out.push_str(" / ");
            out.push_str(single);
        }
        many => {
            out.push_str(" / (");
            out.push_str(&many.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(" "));
            out.push(')');
        }
    }
    out
}

/// Error from the unit surface-syntax parser.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed unit at offset {offset}: {message}")]
pub struct UnitParseError {
    pub offset: usize,
    pub message: String,
}

/// Surface syntax of a unit before variables are resolved: names, `'name`
/// polymorphic names, `1`, juxtaposition, `/` and integer powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceUnit {
    Name(String),
    Poly(String),
    Unitless,
    Mul(Box<SurfaceUnit>, Box<SurfaceUnit>),
    Div(Box<SurfaceUnit>, Box<SurfaceUnit>),
    Pow(Box<SurfaceUnit>, Int),
}

impl SurfaceUnit {
    /// Converts to an internal expression; polymorphic names become
    /// explicit abstract variables scoped to `scope`.
    pub fn to_expr(&self, scope: &str) -> UnitExpr {
        match self {
            SurfaceUnit::Name(n) => UnitExpr::Base(n.clone()),
            SurfaceUnit::Poly(n) => UnitExpr::Var(UnitVar::ExplicitAbs(PolyName::new(n.clone(), scope))),
            SurfaceUnit::Unitless => UnitExpr::Unitless,
            SurfaceUnit::Mul(a, b) => UnitExpr::product(a.to_expr(scope), b.to_expr(scope)),
            SurfaceUnit::Div(a, b) => UnitExpr::product(a.to_expr(scope), UnitExpr::inverse(b.to_expr(scope))),
            SurfaceUnit::Pow(u, z) => UnitExpr::power(u.to_expr(scope), z.clone()),
        }
    }

    pub fn poly_names(&self, out: &mut Vec<String>) {
        match self {
            SurfaceUnit::Poly(n) => out.push(n.clone()),
            SurfaceUnit::Mul(a, b) | SurfaceUnit::Div(a, b) => {
                a.poly_names(out);
                b.poly_names(out);
            }
            SurfaceUnit::Pow(u, _) => u.poly_names(out),
            _ => {}
        }
    }

    /// Replaces names through `f` (alias expansion).
    pub fn substitute(&self, f: &mut impl FnMut(&str) -> Option<SurfaceUnit>) -> SurfaceUnit {
        match self {
            SurfaceUnit::Name(n) => f(n).unwrap_or_else(|| self.clone()),
            SurfaceUnit::Poly(_) | SurfaceUnit::Unitless => self.clone(),
            SurfaceUnit::Mul(a, b) => SurfaceUnit::Mul(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            SurfaceUnit::Div(a, b) => SurfaceUnit::Div(Box::new(a.substitute(f)), Box::new(b.substitute(f))),
            SurfaceUnit::Pow(u, z) => SurfaceUnit::Pow(Box::new(u.substitute(f)), z.clone()),
        }
    }

    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            SurfaceUnit::Name(n) => out.push(n.clone()),
            SurfaceUnit::Mul(a, b) | SurfaceUnit::Div(a, b) => {
                a.names(out);
                b.names(out);
            }
            SurfaceUnit::Pow(u, _) => u.names(out),
            _ => {}
        }
    }
}

impl fmt::Display for SurfaceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceUnit::Name(n) => write!(f, "{n}"),
            SurfaceUnit::Poly(n) => write!(f, "'{n}"),
            SurfaceUnit::Unitless => write!(f, "1"),
            SurfaceUnit::Mul(a, b) => write!(f, "{a} {b}"),
            SurfaceUnit::Div(a, b) => match **b {
                SurfaceUnit::Name(_) | SurfaceUnit::Poly(_) | SurfaceUnit::Unitless => write!(f, "{a} / {b}"),
                _ => write!(f, "{a} / ({b})"),
            },
            SurfaceUnit::Pow(u, z) => match **u {
                SurfaceUnit::Name(_) => write!(f, "{u}**{z}"),
                _ => write!(f, "({u})**{z}"),
            },
        }
    }
}

/// Parses the unit surface grammar. Juxtaposition binds tighter than `/`,
/// which associates to the left; `**` binds tightest.
pub fn parse_unit(src: &str) -> Result<SurfaceUnit, UnitParseError> {
    let mut p = UnitParser { src: src.as_bytes(), pos: 0 };
    let u = p.unit()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(u)
}

struct UnitParser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn is_name_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'-'
}

impl UnitParser<'_> {
    fn err(&self, message: &str) -> UnitParseError {
        UnitParseError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn starts_with(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn unit(&mut self) -> Result<SurfaceUnit, UnitParseError> {
        let mut lhs = self.term()?;
        while self.peek() == Some(b'/') {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = SurfaceUnit::Div(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<SurfaceUnit, UnitParseError> {
        let mut lhs = self.factor()?;
        while matches!(self.peek(), Some(c) if is_name_start(c) || c == b'\'' || c == b'(' || c == b'1') {
            let rhs = self.factor()?;
            lhs = SurfaceUnit::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<SurfaceUnit, UnitParseError> {
        let base = self.primary()?;
        if self.starts_with("**") {
            self.pos += 2;
            let z = self.exponent()?;
            return Ok(SurfaceUnit::Pow(Box::new(base), z));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Int, UnitParseError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let z = self.exponent()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')' after exponent"));
            }
            self.pos += 1;
            return Ok(z);
        }
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits == self.pos {
            return Err(self.err("expected integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap().trim_start_matches('+');
        text.parse::<Int>().map_err(|_| self.err("bad exponent"))
    }

    fn name(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && is_name_char(self.src[self.pos]) {
            // `-` may not swallow the sign of a following exponent
            if self.src[self.pos] == b'-' && self.src.get(self.pos + 1).is_none_or(|c| !is_name_char(*c)) {
                break;
            }
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string()
    }

    fn primary(&mut self) -> Result<SurfaceUnit, UnitParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let u = self.unit()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(u)
            }
            Some(b'\'') => {
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(|c| is_name_start(*c)) {
                    return Err(self.err("expected name after '"));
                }
                Ok(SurfaceUnit::Poly(self.name()))
            }
            Some(b'1') => {
                self.pos += 1;
                if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.err("only the literal 1 may appear in a unit"));
                }
                Ok(SurfaceUnit::Unitless)
            }
            Some(c) if is_name_start(c) => Ok(SurfaceUnit::Name(self.name())),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of unit")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(n: &str) -> UnitExpr {
        UnitExpr::base(n)
    }

    fn map(pairs: &[(&str, i64)]) -> UnitMap {
        pairs.iter().map(|(n, e)| (Atom::Base(n.to_string()), Int::from(*e))).collect()
    }

    #[test]
    fn normalize_examples() {
        let u = parse_unit("metre / (sec**2)").unwrap().to_expr("p");
        assert_eq!(u.normalize(), map(&[("metre", 1), ("sec", -2)]));
        assert!(UnitExpr::Unitless.normalize().is_unitless());
        let cancel = UnitExpr::Product(
            Box::new(UnitExpr::Power(Box::new(b("sec")), 2.into())),
            Box::new(UnitExpr::Power(Box::new(b("sec")), (-2).into())),
        );
        assert!(cancel.normalize().is_unitless());
    }

    #[test]
    fn equality_examples() {
        let ms = UnitExpr::product(b("metre"), b("sec"));
        let sm = UnitExpr::product(b("sec"), b("metre"));
        assert!(units_equal(&ms, &sm));
        let m2m = UnitExpr::product(UnitExpr::power(b("metre"), 2), UnitExpr::inverse(b("metre")));
        assert!(units_equal(&m2m, &b("metre")));
        assert!(!units_equal(&b("metre"), &b("sec")));
    }

    #[test]
    fn power_smart_constructor() {
        assert_eq!(UnitExpr::power(b("m"), 0), UnitExpr::Unitless);
        assert_eq!(UnitExpr::power(b("m"), 1), b("m"));
    }

    #[test]
    fn printer_matches_listing_style() {
        let u = parse_unit("metre / (sec**2)").unwrap().to_expr("p");
        assert_eq!(u.to_string(), "metre / (sec**2)");
        assert_eq!(parse_unit("metre/sec").unwrap().to_expr("p").to_string(), "metre / sec");
        let a2 = parse_unit("'a**2").unwrap().to_expr("f");
        assert_eq!(a2.to_string(), "('a)**2");
        assert_eq!(parse_unit("('a)**2").unwrap().to_expr("f").to_string(), "('a)**2");
        assert_eq!(UnitExpr::Unitless.to_string(), "1");
        assert_eq!(parse_unit("1 / sec").unwrap().to_expr("p").to_string(), "1 / sec");
    }

    #[test]
    fn parser_accepts_grammar_forms() {
        assert_eq!(parse_unit("metre").unwrap(), SurfaceUnit::Name("metre".into()));
        assert_eq!(parse_unit("'a").unwrap(), SurfaceUnit::Poly("a".into()));
        assert_eq!(parse_unit("1").unwrap(), SurfaceUnit::Unitless);
        let e = parse_unit("kg metre**2 / sec**(-1)").unwrap().to_expr("p");
        assert_eq!(e.normalize(), map(&[("kg", 1), ("metre", 2), ("sec", 1)]));
        let e = parse_unit("m**-2").unwrap().to_expr("p");
        assert_eq!(e.normalize(), map(&[("m", -2)]));
        assert!(parse_unit("metre /").is_err());
        assert!(parse_unit("2").is_err());
        assert!(parse_unit("m**x").is_err());
    }

    #[test]
    fn names_may_contain_dashes_and_underscores() {
        assert_eq!(parse_unit("deg_C").unwrap(), SurfaceUnit::Name("deg_C".into()));
        assert_eq!(parse_unit("a-b").unwrap(), SurfaceUnit::Name("a-b".into()));
    }

    fn arb_unit() -> impl Strategy<Value = UnitExpr> {
        let leaf = prop_oneof![
            Just(UnitExpr::Unitless),
            prop::sample::select(vec!["m", "s", "kg", "K"]).prop_map(UnitExpr::base),
            prop::sample::select(vec!["a", "b"])
                .prop_map(|n| UnitExpr::Var(UnitVar::ExplicitAbs(PolyName::new(n, "f")))),
            (0u64..3).prop_map(|l| UnitExpr::Var(UnitVar::lit(l))),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| UnitExpr::Product(Box::new(a), Box::new(b))),
                (inner, -4i64..5).prop_map(|(u, z)| UnitExpr::Power(Box::new(u), z.into())),
            ]
        })
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_unit(), b in arb_unit(), c in arb_unit()) {
            let ab = UnitExpr::product(a.clone(), b.clone());
            let ba = UnitExpr::product(b.clone(), a.clone());
            prop_assert!(units_equal(&ab, &ba));
            let l = UnitExpr::product(ab, c.clone());
            let r = UnitExpr::product(a.clone(), UnitExpr::product(b.clone(), c));
            prop_assert!(units_equal(&l, &r));
            prop_assert!(units_equal(&UnitExpr::product(a.clone(), UnitExpr::Unitless), &a));
            let inv = UnitExpr::Product(Box::new(a.clone()), Box::new(UnitExpr::Power(Box::new(a.clone()), (-1).into())));
            prop_assert!(inv.normalize().is_unitless());
        }

        #[test]
        fn normalize_is_a_homomorphism(a in arb_unit(), b in arb_unit()) {
            let mut sum = a.normalize();
            sum.add_map(&b.normalize(), &Int::ONE);
            prop_assert_eq!(UnitExpr::Product(Box::new(a), Box::new(b)).normalize(), sum);
        }

        #[test]
        fn denormalize_round_trip(a in arb_unit()) {
            let n = a.normalize();
            prop_assert_eq!(n.denormalize().normalize(), n.clone());
            prop_assert!(n.iter().all(|(_, e)| !e.is_zero()));
        }

        #[test]
        fn printed_surface_reparses(a in arb_unit()) {
            // only base units and explicit names have a surface form
            let surface_only = a.map_vars(&mut |v| match v {
                UnitVar::ExplicitAbs(_) => UnitExpr::Var(v.clone()),
                _ => UnitExpr::base("x"),
            });
            let printed = surface_only.to_string();
            let back = parse_unit(&printed).unwrap().to_expr("f");
            prop_assert!(units_equal(&back, &surface_only), "{}", printed);
        }
    }
}
