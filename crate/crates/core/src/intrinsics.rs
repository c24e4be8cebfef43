//! Built-in procedure signatures.

use crate::units::{PolyName, UnitExpr, UnitVar};

/// A signature: the unit of each positional slot, 0 being the result.
/// Polymorphic names are [`UnitVar::ExplicitAbs`] scoped to the procedure.
pub type Signature = Vec<(usize, UnitExpr)>;

const SAME: &[&str] = &["abs", "real", "int", "dble", "nint", "aint", "anint", "float"];
const UNITLESS: &[&str] = &[
    "sin", "cos", "tan", "exp", "log", "asin", "acos", "atan", "log10", "sinh", "cosh", "tanh",
];
const VARIADIC: &[&str] = &["min", "max"];

/// Argument count of an intrinsic. `Some(None)` means any count of two or more.
pub fn arity(name: &str) -> Option<Option<usize>> {
    if SAME.contains(&name) || UNITLESS.contains(&name) || name == "sqrt" {
        Some(Some(1))
    } else if VARIADIC.contains(&name) {
        Some(None)
    } else if matches!(name, "mod" | "transfer" | "atan2" | "sign") {
        Some(Some(2))
    } else {
        None
    }
}

pub fn is_intrinsic(name: &str) -> bool {
    arity(name).is_some()
}

fn poly(fs: &str, n: &str) -> UnitExpr {
    UnitExpr::Var(UnitVar::ExplicitAbs(PolyName::new(n, fs)))
}

/// Signature of intrinsic `name` called with `args` arguments.
pub fn signature(name: &str, args: usize) -> Option<Signature> {
    let a = || poly(name, "a");
    let b = || poly(name, "b");
    let sig = if SAME.contains(&name) {
        vec![(0, a()), (1, a())]
    } else if UNITLESS.contains(&name) {
        vec![(0, UnitExpr::Unitless), (1, UnitExpr::Unitless)]
    } else {
        match name {
            "sqrt" => vec![(0, a()), (1, UnitExpr::power(a(), 2))],
            "transfer" => vec![(0, b()), (1, a()), (2, b())],
            "atan2" => vec![(0, UnitExpr::Unitless), (1, a()), (2, a())],
            "sign" => vec![(0, a()), (1, a()), (2, b())],
            "mod" => vec![(0, a()), (1, a()), (2, a())],
            "min" | "max" => (0..=args).map(|k| (k, a())).collect(),
            _ => return None,
        }
    };
    Some(sig)
}
