//! Exact integer solution of `A z = b` where each `b_i` is a unit map over
//! rigid atoms, by reducing `[Aᵀ | I]` to Hermite normal form.

use crate::int::Int;
use crate::units::{Atom, UnitMap};

use super::hnf::{hnf, Matrix};

/// General solution: `values[j]` is unknown `j` in terms of the rigid atoms
/// of `b` and generated atoms `Generated(first_gen ..)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSolution {
    pub values: Vec<UnitMap>,
    pub generated: u32,
}

fn div_map(m: &UnitMap, by: &Int) -> Option<UnitMap> {
    let mut out = UnitMap::default();
    for (a, e) in m.iter() {
        if !e.divisible_by(by) {
            return None;
        }
        out.add(a.clone(), &e.div_exact(by));
    }
    Some(out)
}

/// Returns `None` when the system has no integer solution.
pub fn solve_lattice(a: &[Vec<Int>], b: &[UnitMap], n: usize, first_gen: u32) -> Option<LatticeSolution> {
    let m = a.len();
    let mut t = Matrix::new(m + n);
    for j in 0..n {
        let mut row: Vec<Int> = (0..m).map(|i| a[i][j].clone()).collect();
        row.extend((0..n).map(|k| if k == j { Int::ONE } else { Int::ZERO }));
        t.push(row, Default::default());
    }
    let pivots = hnf(&mut t);
    debug_assert_eq!(t.rows.len(), n, "[Aᵀ | I] has full row rank");
    let rank = pivots.iter().take_while(|&&c| c < m).count();

    // Hᵀ y = b, forward substitution over the pivot equations
    let mut y: Vec<UnitMap> = Vec::with_capacity(n);
    for i in 0..rank {
        let c = pivots[i];
        let mut rhs = b[c].clone();
        for (k, yk) in y.iter().enumerate() {
            rhs.add_map(yk, &-&t.rows[k][c]);
        }
        y.push(div_map(&rhs, &t.rows[i][c])?);
    }
    for k in 0..m {
        let mut lhs = UnitMap::default();
        for (i, yi) in y.iter().enumerate() {
            lhs.add_map(yi, &t.rows[i][k]);
        }
        if lhs != b[k] {
            return None;
        }
    }
    let mut generated = 0;
    for _ in rank..n {
        let mut g = UnitMap::default();
        g.add(Atom::Generated(first_gen + generated), &Int::ONE);
        y.push(g);
        generated += 1;
    }
    // z = Uᵀ y
    let values = (0..n)
        .map(|j| {
            let mut z = UnitMap::default();
            for (i, yi) in y.iter().enumerate() {
                z.add_map(yi, &t.rows[i][m + j]);
            }
            z
        })
        .collect();
    Some(LatticeSolution { values, generated })
}
