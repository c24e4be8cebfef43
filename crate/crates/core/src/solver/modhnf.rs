//! Hermite normal form extended with generated columns, so that pivots
//! which cannot be scaled to 1 are rewritten in terms of fresh variables.

use std::collections::BTreeSet;

use crate::int::Int;

use super::hnf::{hnf, Matrix};

/// What happened during one run of [`modified_hnf`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModHnfReport {
    pub iterations: usize,
    /// Columns of pivots that could not be scaled to 1, per iteration.
    pub recorded: Vec<Vec<usize>>,
    /// Indices of the columns added on the right, in creation order.
    pub generated: Vec<usize>,
    /// Each appended row as first written, before re-normalization.
    pub appended: Vec<Vec<Int>>,
    /// Recorded pivots after which column `j` lacked a unit pivot, or no
    /// unit pivot appeared right of `j`.
    pub lemma_violations: usize,
}

impl ModHnfReport {
    pub fn recorded_total(&self) -> usize {
        self.recorded.iter().map(Vec::len).sum()
    }
}

fn divides_row(row: &[Int], p: &Int) -> bool {
    row.iter().all(|x| x.divisible_by(p))
}

/// Runs the loop until no pivot needs a generated column. A pivot is
/// recorded only when it and every other nonzero entry of its row lie in
/// columns accepted by `recordable`; other rows are left for the caller.
pub fn modified_hnf(m: &mut Matrix, recordable: impl Fn(usize) -> bool) -> ModHnfReport {
    let mut report = ModHnfReport::default();
    loop {
        report.iterations += 1;
        // H1, with divisible pivots scaled down
        hnf(m);
        let mut recorded = vec![];
        for i in 0..m.rows.len() {
            let j = m.pivot_col(i).expect("hnf removes zero rows");
            let p = m.rows[i][j].clone();
            if p.is_one() {
                continue;
            }
            if divides_row(&m.rows[i], &p) {
                m.scale_down(i, &p);
            } else if recordable(j) && (j + 1..m.ncols).all(|c| m.rows[i][c].is_zero() || recordable(c)) {
                recorded.push((i, j));
            }
        }
        // H2: one extra row and column per recorded pivot
        let extra: Vec<(usize, Int, BTreeSet<u32>)> = recorded
            .iter()
            .map(|&(i, j)| {
                let row = &m.rows[i];
                let a = row[j + 1..]
                    .iter()
                    .filter(|x| !x.is_zero())
                    .map(Int::abs)
                    .min()
                    .expect("a non-dividing pivot has another nonzero entry");
                let d = a.div_exact(&row[j].gcd(&a));
                (j, d, m.prov.as_ref().map(|p| p[i].clone()).unwrap_or_default())
            })
            .collect();
        for (j, d, prov) in extra {
            let col = m.add_column();
            report.generated.push(col);
            let mut row = vec![Int::ZERO; m.ncols];
            row[j] = Int::ONE;
            row[col] = -d;
            report.appended.push(row.clone());
            m.push(row, prov);
        }
        // H3 and the unit-pivot pass
        let pivots = hnf(m);
        unit_pivots(m, &pivots);
        m.remove_zero_rows();
        let cols: Vec<usize> = recorded.iter().map(|&(_, j)| j).collect();
        for &j in &cols {
            let unit_at = |c: usize| (0..m.rows.len()).any(|i| m.pivot_col(i) == Some(c) && m.rows[i][c].is_one());
            let later = (0..m.rows.len()).any(|i| m.pivot_col(i).is_some_and(|c| c > j && m.rows[i][c].is_one()));
            if !unit_at(j) || !later {
                report.lemma_violations += 1;
            }
        }
        let done = cols.is_empty();
        report.recorded.push(cols);
        if done {
            break;
        }
    }
    report
}

/// Scales every pivot that divides its row down to 1 and clears its
/// column above and below, left to right.
fn unit_pivots(m: &mut Matrix, pivots: &[usize]) {
    for (i, &j) in pivots.iter().enumerate() {
        let p = m.rows[i][j].clone();
        if !p.is_one() {
            if !divides_row(&m.rows[i], &p) {
                continue;
            }
            m.scale_down(i, &p);
        }
        for k in 0..m.rows.len() {
            if k != i && !m.rows[k][j].is_zero() {
                let f = -m.rows[k][j].clone();
                m.add_row(k, i, &f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        // v ≃ y, w ≃ y**4, y**4 ≃ x**6 over columns v, w, x, y
        let mut m = Matrix::from_rows(vec![vec![1, 0, 0, -1], vec![0, 1, 0, -4], vec![0, 0, -6, 4]]);
        let r = modified_hnf(&mut m, |_| true);
        assert_eq!(r.appended, vec![vec![0, 0, 1, 0, -2].into_iter().map(Int::from).collect::<Vec<_>>()]);
        assert_eq!(
            m.to_i64(),
            vec![vec![1, 0, 0, 0, -3], vec![0, 1, 0, 0, -12], vec![0, 0, 1, 0, -2], vec![0, 0, 0, 1, -3]]
        );
        assert_eq!(r.iterations, 2);
        assert_eq!(r.lemma_violations, 0);
    }

    #[test]
    fn single_unit_pivot_when_later_entries_are_coprime() {
        // 2a + 5b + c = 0: after one pass column 0 has a unit pivot but the
        // next pivot is 5, and no integer row operation can make it 1
        let mut m = Matrix::from_rows(vec![vec![2, 5, 1]]);
        let r = modified_hnf(&mut m, |_| true);
        assert_eq!(r.recorded[0], vec![0]);
        assert!(r.lemma_violations > 0);
        assert!(m.rows.iter().all(|row| row.iter().all(|x| x.to_i64().is_some())));
    }

    #[test]
    fn unit_pivots_unchanged() {
        let mut m = Matrix::from_rows(vec![vec![1, 0, 2], vec![0, 1, -1]]);
        let before = m.clone();
        let r = modified_hnf(&mut m, |_| true);
        assert_eq!(m, before);
        assert!(r.generated.is_empty());
        assert_eq!(r.iterations, 1);
    }
}
