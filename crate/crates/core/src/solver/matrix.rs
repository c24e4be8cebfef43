//! Conversion of constraints into an augmented integer matrix.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::constraint::Constraint;
use crate::int::Int;
use crate::units::{Atom, LitOrVar, Slot, UnitVar};

use super::hnf::Matrix;

/// Column labels. Unknown columns come first, then unknowns moved to the
/// right-hand side, then rigid atoms, then generated variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    Unknown(UnitVar),
    Moved(UnitVar),
    Real(Atom),
    Generated(u32),
}

impl Column {
    pub fn is_lhs(&self) -> bool {
        matches!(self, Column::Unknown(_))
    }
}

/// Ordering class of an unknown: literals and call instances first, so
/// that named monomorphic variables are the ones left without pivots.
pub fn column_class(v: &UnitVar) -> u8 {
    match v {
        UnitVar::LitOrVar(LitOrVar::Lit(_)) | UnitVar::ParamUse { .. } | UnitVar::ExplicitUse(..) => 0,
        UnitVar::ParamAbs { slot: Slot::Var(_) | Slot::Lit(_), .. } => 1,
        UnitVar::ParamAbs { slot: Slot::Param(0), .. } => 2,
        UnitVar::ParamAbs { slot: Slot::Param(_), .. } => 3,
        UnitVar::LitOrVar(LitOrVar::Var { .. }) => 4,
        UnitVar::ExplicitAbs(_) => 5,
    }
}

/// `[C | B]` for a constraint set.
#[derive(Clone, Debug)]
pub struct AugMatrix {
    pub columns: Vec<Column>,
    pub matrix: Matrix,
}

impl AugMatrix {
    /// Number of unknown (left-hand) columns.
    pub fn lhs_len(&self) -> usize {
        self.columns.iter().take_while(|c| c.is_lhs()).count()
    }

    /// Plain-text grid with column headers, rigid columns after a bar.
    pub fn dump(&self) -> String {
        let heads: Vec<String> = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Unknown(v) | Column::Moved(v) => v.to_string(),
                Column::Real(a) => a.to_string(),
                Column::Generated(k) => format!("'_{k}"),
            })
            .collect();
        let lhs = self.lhs_len();
        let mut width: Vec<usize> = heads.iter().map(|h| h.chars().count()).collect();
        for r in &self.matrix.rows {
            for (w, x) in width.iter_mut().zip(r) {
                *w = (*w).max(x.to_string().len());
            }
        }
        let line = |cells: Vec<String>| {
            let mut s = String::new();
            for (j, c) in cells.iter().enumerate() {
                if j == lhs {
                    s.push_str(" |");
                }
                write!(s, " {:>w$}", c, w = width[j]).unwrap();
            }
            s.trim_end().to_string()
        };
        let mut out = line(heads.clone());
        out.push('\n');
        for r in &self.matrix.rows {
            out.push_str(&line(r.iter().map(Int::to_string).collect()));
            out.push('\n');
        }
        out
    }
}

/// Builds the augmented matrix: one row per constraint, reading
/// `Σ unknowns = Σ rigid atoms`. Unknowns are ordered by class, then by
/// first occurrence; rigid atoms by their natural order.
pub fn constraints_to_matrix(cs: &[Constraint]) -> AugMatrix {
    let mut seen = BTreeSet::new();
    let mut unknowns: Vec<UnitVar> = vec![];
    let mut reals = BTreeSet::new();
    for c in cs {
        for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
            if matches!(v, UnitVar::ExplicitAbs(_)) {
                reals.insert(Atom::Var(v.clone()));
            } else if seen.insert(v.clone()) {
                unknowns.push(v.clone());
            }
        }
        for base in c.lhs.normalize().iter().chain(c.rhs.normalize().iter()).map(|(a, _)| a) {
            if let Atom::Base(_) = base {
                reals.insert(base.clone());
            }
        }
    }
    unknowns.sort_by_key(column_class);
    let mut columns: Vec<Column> = unknowns.into_iter().map(Column::Unknown).collect();
    columns.extend(reals.into_iter().map(Column::Real));
    let index: HashMap<Atom, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            Column::Unknown(v) => (Atom::Var(v.clone()), i),
            Column::Real(a) => (a.clone(), i),
            _ => unreachable!(),
        })
        .collect();
    let mut matrix = Matrix::new(columns.len());
    for c in cs {
        let mut row = vec![Int::ZERO; columns.len()];
        for (a, e) in c.difference().iter() {
            let j = index[a];
            row[j] = if a.is_real() { -e } else { e.clone() };
        }
        matrix.push(row, Default::default());
    }
    AugMatrix { columns, matrix }
}
