//! Row-style Hermite normal form over the integers.

use std::collections::BTreeSet;

use crate::int::Int;

/// Dense integer matrix with optional per-row provenance: the set of input
/// rows each row was derived from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub ncols: usize,
    pub rows: Vec<Vec<Int>>,
    pub prov: Option<Vec<BTreeSet<u32>>>,
}

impl Matrix {
    pub fn new(ncols: usize) -> Self {
        Matrix { ncols, rows: vec![], prov: None }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        Matrix { ncols, rows: rows.into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect(), prov: None }
    }

    /// Starts tracking provenance, each row deriving from itself.
    pub fn track(&mut self) {
        self.prov = Some((0..self.rows.len() as u32).map(|i| BTreeSet::from([i])).collect());
    }

    pub fn push(&mut self, row: Vec<Int>, prov: BTreeSet<u32>) {
        debug_assert_eq!(row.len(), self.ncols);
        self.rows.push(row);
        if let Some(p) = &mut self.prov {
            p.push(prov);
        }
    }

    /// Appends a zero column on the right.
    pub fn add_column(&mut self) -> usize {
        for r in &mut self.rows {
            r.push(Int::ZERO);
        }
        self.ncols += 1;
        self.ncols - 1
    }

    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_i64().expect("entry fits in i64")).collect()).collect()
    }

    /// Column of the first nonzero entry.
    pub fn pivot_col(&self, i: usize) -> Option<usize> {
        self.rows[i].iter().position(|x| !x.is_zero())
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.rows.len()).filter_map(|i| self.pivot_col(i)).collect()
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
        if let Some(p) = &mut self.prov {
            p.swap(a, b);
        }
    }

    pub fn negate(&mut self, i: usize) {
        for x in &mut self.rows[i] {
            *x = -&*x;
        }
    }

    /// `row[dst] += f * row[src]`.
    pub fn add_row(&mut self, dst: usize, src: usize, f: &Int) {
        if f.is_zero() {
            return;
        }
        let (d, s) = if dst < src {
            let (lo, hi) = self.rows.split_at_mut(src);
            (&mut lo[dst], &hi[0])
        } else {
            let (lo, hi) = self.rows.split_at_mut(dst);
            (&mut hi[0], &lo[src])
        };
        for (x, y) in d.iter_mut().zip(s.iter()) {
            if !y.is_zero() {
                x.add_mul(f, y);
            }
        }
        if let Some(p) = &mut self.prov {
            let extra = p[src].clone();
            p[dst].extend(extra);
        }
    }

    /// Divides row `i` by an exact divisor of all its entries.
    pub fn scale_down(&mut self, i: usize, by: &Int) {
        for x in &mut self.rows[i] {
            *x = x.div_exact(by);
        }
    }

    /// Drops all-zero rows.
    pub fn remove_zero_rows(&mut self) {
        let keep: Vec<bool> = self.rows.iter().map(|r| r.iter().any(|x| !x.is_zero())).collect();
        let mut k = keep.iter();
        self.rows.retain(|_| *k.next().unwrap());
        if let Some(p) = &mut self.prov {
            let mut k = keep.iter();
            p.retain(|_| *k.next().unwrap());
        }
    }

    /// True iff the Hermite normal form conditions hold: pivots positive and
    /// strictly moving right, zeros below each pivot, entries above a pivot
    /// in `[0, pivot)`, no zero rows.
    pub fn is_hnf(&self) -> bool {
        let mut last = None;
        for i in 0..self.rows.len() {
            let Some(c) = self.pivot_col(i) else { return false };
            if last.is_some_and(|l| c <= l) {
                return false;
            }
            let p = &self.rows[i][c];
            if !p.is_positive() {
                return false;
            }
            for k in 0..i {
                let x = &self.rows[k][c];
                if x.is_negative() || x >= p {
                    return false;
                }
            }
            last = Some(c);
        }
        true
    }
}

/// Brings `m` to Hermite normal form in place using unimodular row
/// operations and removes zero rows. Returns the pivot columns.
pub fn hnf(m: &mut Matrix) -> Vec<usize> {
    let nrows = m.rows.len();
    let mut r = 0;
    let mut pivots = vec![];
    for c in 0..m.ncols {
        if r == nrows {
            break;
        }
        loop {
            let best = (r..nrows)
                .filter(|&k| !m.rows[k][c].is_zero())
                .min_by(|&a, &b| m.rows[a][c].abs().cmp(&m.rows[b][c].abs()));
            let Some(k) = best else { break };
            m.swap(r, k);
            if m.rows[r][c].is_negative() {
                m.negate(r);
            }
            let p = m.rows[r][c].clone();
            let mut clear = true;
            for k in r + 1..nrows {
                if m.rows[k][c].is_zero() {
                    continue;
                }
                let q = m.rows[k][c].div_floor(&p);
                m.add_row(k, r, &-q);
                if !m.rows[k][c].is_zero() {
                    clear = false;
                }
            }
            if clear {
                pivots.push(c);
                r += 1;
                break;
            }
        }
    }
    reduce_above(m, &pivots);
    m.rows.truncate(r);
    if let Some(p) = &mut m.prov {
        p.truncate(r);
    }
    pivots
}

/// Brings entries above each pivot into `[0, pivot)`.
fn reduce_above(m: &mut Matrix, pivots: &[usize]) {
    for (i, &c) in pivots.iter().enumerate() {
        let p = m.rows[i][c].clone();
        for k in 0..i {
            let q = m.rows[k][c].div_floor(&p);
            if !q.is_zero() {
                m.add_row(k, i, &-q);
            }
        }
    }
}

/// Rank of `m` (over the rationals, equal to the HNF row count).
pub fn rank(m: &Matrix) -> usize {
    let mut h = m.clone();
    h.prov = None;
    hnf(&mut h).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed() {
        let mut m = Matrix::from_rows(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let before = m.clone();
        hnf(&mut m);
        assert_eq!(m, before);
    }

    #[test]
    fn small_reduction() {
        let mut m = Matrix::from_rows(vec![vec![2, 4], vec![0, 3]]);
        hnf(&mut m);
        assert_eq!(m.to_i64(), vec![vec![2, 1], vec![0, 3]]);
    }

    #[test]
    fn worked_example_first_form() {
        // v ≃ y, w ≃ y**4, y**4 ≃ x**6 over columns v, w, x, y
        let mut m = Matrix::from_rows(vec![vec![1, 0, 0, -1], vec![0, 1, 0, -4], vec![0, 0, -6, 4]]);
        hnf(&mut m);
        assert_eq!(m.to_i64(), vec![vec![1, 0, 0, -1], vec![0, 1, 0, -4], vec![0, 0, 6, -4]]);
        assert!(m.is_hnf());
    }

    #[test]
    fn provenance_follows_row_operations() {
        let mut m = Matrix::from_rows(vec![vec![1, 1], vec![1, 1]]);
        m.track();
        hnf(&mut m);
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.prov.unwrap()[0], BTreeSet::from([0]));
    }
}
