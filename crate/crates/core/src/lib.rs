//! Units-of-measure inference and checking for a small Fortran subset.
//!
//! Source files are parsed into a syntax tree, unit equality constraints are
//! generated from it, polymorphic functions are instantiated at each call
//! site, and the resulting system is solved exactly as an integer linear
//! system in Hermite normal form.

pub mod analysis;
pub mod constraint;
pub mod diag;
pub mod frontend;
pub mod gen;
pub mod generator;
pub mod instantiate;
pub mod int;
pub mod intrinsics;
pub mod solver;
pub mod summary;
pub mod units;

pub use constraint::Constraint;
pub use diag::{Diagnostic, Pos, Provenance, Reason, Severity, Span};
pub use int::Int;
pub use units::{parse_unit, units_equal, Atom, LitOrVar, PolyName, Slot, SurfaceUnit, UnitExpr, UnitMap, UnitVar};
