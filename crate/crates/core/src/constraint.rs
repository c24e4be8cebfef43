//! Unit equality constraints.

use std::fmt;

use crate::diag::Provenance;
use crate::units::{UnitExpr, UnitMap};

/// `lhs ≃ rhs`, remembering where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: UnitExpr,
    pub rhs: UnitExpr,
    pub prov: Provenance,
}

impl Constraint {
    pub fn new(lhs: UnitExpr, rhs: UnitExpr, prov: Provenance) -> Self {
        Constraint { lhs, rhs, prov }
    }

    /// Normal form of `lhs / rhs`; the constraint holds iff this is unitless.
    pub fn difference(&self) -> UnitMap {
        let mut m = self.lhs.normalize();
        m.add_map(&self.rhs.normalize(), &(-crate::int::Int::ONE));
        m
    }

    pub fn map_units(&self, f: &mut impl FnMut(&UnitExpr) -> UnitExpr) -> Constraint {
        Constraint { lhs: f(&self.lhs), rhs: f(&self.rhs), prov: self.prov.clone() }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≃ {}", self.lhs, self.rhs)
    }
}
