//! Consistency check, solution extraction and inconsistency cores.

use std::collections::{BTreeSet, HashMap};

use crate::constraint::Constraint;
use crate::int::Int;
use crate::units::{Atom, LitOrVar, Slot, UnitExpr, UnitMap, UnitVar};

use super::hnf::{hnf, Matrix};
use super::lattice::solve_lattice;
use super::matrix::{column_class, constraints_to_matrix, AugMatrix, Column};
use super::modhnf::{modified_hnf, ModHnfReport};

/// A solved constraint system.
#[derive(Clone, Debug, Default)]
pub struct Solution {
    /// Unit of each unknown in terms of rigid atoms, generated atoms,
    /// unknowns moved to the right-hand side and free unknowns.
    pub values: HashMap<UnitVar, UnitMap>,
    /// Named monomorphic variables left without a pivot.
    pub critical: Vec<UnitVar>,
    /// Abstract unknowns treated as rigid.
    pub moved: Vec<UnitVar>,
    pub generated: u32,
    pub report: ModHnfReport,
    /// The exact lattice reader was needed.
    pub used_lattice: bool,
}

impl Solution {
    /// Value of `v`; unknowns absent from the system are free.
    pub fn value(&self, v: &UnitVar) -> UnitMap {
        self.values.get(v).cloned().unwrap_or_else(|| [(Atom::Var(v.clone()), Int::ONE)].into_iter().collect())
    }

    /// Normal form of `u` after substitution.
    pub fn apply(&self, u: &UnitExpr) -> UnitMap {
        let mut out = UnitMap::default();
        for (a, e) in u.normalize().iter() {
            match a {
                Atom::Var(v) if !matches!(v, UnitVar::ExplicitAbs(_)) => out.add_map(&self.value(v), e),
                other => out.add(other.clone(), e),
            }
        }
        out
    }

    pub fn satisfies(&self, c: &Constraint) -> bool {
        self.apply(&c.lhs) == self.apply(&c.rhs)
    }
}

/// The system has no solution; `core` indexes a small unsatisfiable subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistent {
    pub core: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Minimize cores with more constraints than this by deletion.
    pub minimize_above: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { minimize_above: 5 }
    }
}

pub fn solve(cs: &[Constraint]) -> Result<Solution, Inconsistent> {
    solve_with(cs, SolveOptions::default())
}

pub fn solve_with(cs: &[Constraint], opts: SolveOptions) -> Result<Solution, Inconsistent> {
    match attempt(cs, false) {
        Ok(s) => Ok(s),
        Err(_) => Err(Inconsistent { core: core(cs, opts) }),
    }
}

/// Only consistency.
pub fn is_consistent(cs: &[Constraint]) -> bool {
    attempt(cs, false).is_ok()
}

/// Failure witness: the source rows involved, when known.
struct Witness(Option<BTreeSet<u32>>);

fn attempt(cs: &[Constraint], track: bool) -> Result<Solution, Witness> {
    let AugMatrix { columns, mut matrix } = constraints_to_matrix(cs);
    let original = matrix.clone();
    if track {
        matrix.track();
    }
    let lhs = columns.iter().take_while(|c| c.is_lhs()).count();
    let pivots = hnf(&mut matrix);
    if let Some(i) = pivots.iter().position(|&c| c >= lhs) {
        return Err(Witness(matrix.prov.as_ref().map(|p| p[i].clone())));
    }
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    let mut critical = vec![];
    let mut stay = vec![];
    let mut moved = vec![];
    for (j, c) in columns[..lhs].iter().enumerate() {
        let Column::Unknown(v) = c else { unreachable!() };
        let free = !pivot_set.contains(&j);
        if free && column_class(v) == 4 {
            critical.push(v.clone());
        }
        if free && matches!(v, UnitVar::ParamAbs { .. }) {
            moved.push(j);
        } else {
            stay.push(j);
        }
    }
    // unknowns, moved unknowns, rigid atoms
    let order: Vec<usize> = stay.iter().chain(&moved).copied().chain(lhs..columns.len()).collect();
    let mut cols: Vec<Column> = order
        .iter()
        .map(|&j| match &columns[j] {
            Column::Unknown(v) if moved.contains(&j) => Column::Moved(v.clone()),
            c => c.clone(),
        })
        .collect();
    permute(&mut matrix, &order);
    let n_stay = stay.len();
    let first_gen = cols.len();
    let report = modified_hnf(&mut matrix, |c| c < n_stay || c >= first_gen);
    for k in 0..report.generated.len() {
        cols.push(Column::Generated(k as u32));
    }

    let mut values: HashMap<UnitVar, UnitMap> = HashMap::new();
    let mut relation = false;
    for (i, row) in matrix.rows.iter().enumerate() {
        let p = matrix_pivot(row);
        match &cols[p] {
            // a pivot that stayed above 1 ties unknowns to rigid atoms
            Column::Unknown(_) | Column::Moved(_) if !row[p].is_one() => relation = true,
            Column::Unknown(v) | Column::Moved(v) => {
                values.insert(v.clone(), read_row(row, p, &cols));
            }
            Column::Real(_) => {
                if row[p + 1..].iter().zip(&cols[p + 1..]).any(|(x, c)| !x.is_zero() && !matches!(c, Column::Real(_))) {
                    relation = true;
                } else {
                    return Err(Witness(matrix.prov.as_ref().map(|pr| pr[i].clone())));
                }
            }
            Column::Generated(_) => {}
        }
    }
    let mut solution = Solution {
        values,
        critical,
        moved: moved.iter().map(|&j| unknown(&columns[j]).clone()).collect(),
        generated: report.generated.len() as u32,
        report,
        used_lattice: false,
    };
    if !relation && solution.generated > 0 {
        let n = lhs;
        let values: Vec<UnitMap> = columns[..n].iter().map(|c| solution.value(unknown(c))).collect();
        relation = !is_general(&original, n, &values);
    }
    if relation {
        let n = lhs;
        let a: Vec<Vec<Int>> = original.rows.iter().map(|r| r[..n].to_vec()).collect();
        let b: Vec<UnitMap> = original
            .rows
            .iter()
            .map(|r| {
                columns[n..]
                    .iter()
                    .zip(&r[n..])
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(c, x)| match c {
                        Column::Real(at) => (at.clone(), x.clone()),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        let lat = solve_lattice(&a, &b, n, 0).ok_or(Witness(None))?;
        solution.values = columns[..n].iter().map(unknown).cloned().zip(lat.values).collect();
        solution.generated = lat.generated;
        solution.moved.clear();
        solution.used_lattice = true;
    }
    debug_assert!(cs.iter().all(|c| solution.satisfies(c)), "solution violates a constraint");
    Ok(solution)
}

/// Whether `values` reach every integer solution of the homogeneous
/// system. Their parameter lattice lies inside the kernel of `A`; the two
/// are equal when ranks and pivot products of their Hermite forms agree.
fn is_general(original: &Matrix, n: usize, values: &[UnitMap]) -> bool {
    let params: BTreeSet<&Atom> = values.iter().flat_map(|v| v.iter().map(|(a, _)| a)).filter(|a| !a.is_real()).collect();
    let mut image = Matrix::new(n);
    for p in &params {
        image.push(values.iter().map(|v| v.get(p).cloned().unwrap_or(Int::ZERO)).collect(), Default::default());
    }
    let mut kernel_src = Matrix::new(original.rows.len() + n);
    for j in 0..n {
        let mut row: Vec<Int> = original.rows.iter().map(|r| r[j].clone()).collect();
        row.extend((0..n).map(|k| if k == j { Int::ONE } else { Int::ZERO }));
        kernel_src.push(row, Default::default());
    }
    let rank = hnf(&mut kernel_src).iter().take_while(|&&c| c < original.rows.len()).count();
    let mut kernel = Matrix::new(n);
    for r in &kernel_src.rows[rank..] {
        kernel.push(r[original.rows.len()..].to_vec(), Default::default());
    }
    let volume = |m: &mut Matrix| {
        let pivots = hnf(m);
        let product = pivots.iter().enumerate().fold(Int::ONE, |acc, (i, &c)| &acc * &m.rows[i][c].abs());
        (pivots.len(), product)
    };
    volume(&mut image) == volume(&mut kernel)
}

fn unknown(c: &Column) -> &UnitVar {
    match c {
        Column::Unknown(v) | Column::Moved(v) => v,
        _ => unreachable!("not an unknown column"),
    }
}

fn matrix_pivot(row: &[Int]) -> usize {
    row.iter().position(|x| !x.is_zero()).expect("no zero rows")
}

/// `x = Σ rigid − Σ others` for a row with unit pivot at `p`.
fn read_row(row: &[Int], p: usize, cols: &[Column]) -> UnitMap {
    let mut out = UnitMap::default();
    for (j, x) in row.iter().enumerate().skip(p + 1) {
        if x.is_zero() {
            continue;
        }
        match &cols[j] {
            Column::Real(a) => out.add(a.clone(), x),
            Column::Unknown(v) | Column::Moved(v) => out.add(Atom::Var(v.clone()), &-x),
            Column::Generated(k) => out.add(Atom::Generated(*k), &-x),
        }
    }
    out
}

fn permute(m: &mut Matrix, order: &[usize]) {
    for r in &mut m.rows {
        let old = std::mem::take(r);
        *r = order.iter().map(|&j| old[j].clone()).collect();
    }
}

/// An unsatisfiable subset of `cs`, minimal when small enough to refine.
fn core(cs: &[Constraint], opts: SolveOptions) -> Vec<usize> {
    let mut candidates: Vec<usize> = match attempt(cs, true) {
        Err(Witness(Some(rows))) => rows.into_iter().map(|r| r as usize).collect(),
        _ => inconsistent_component(cs),
    };
    let pick = |ix: &[usize]| -> Vec<Constraint> { ix.iter().map(|&i| cs[i].clone()).collect() };
    if is_consistent(&pick(&candidates)) {
        // witness rows alone may rely on parametrizing rows; fall back
        candidates = inconsistent_component(cs);
    }
    if candidates.len() > opts.minimize_above {
        let mut k = 0;
        while k < candidates.len() {
            let mut trial = candidates.clone();
            trial.remove(k);
            if !is_consistent(&pick(&trial)) {
                candidates = trial;
            } else {
                k += 1;
            }
        }
    }
    candidates
}

/// Indices of the smallest connected group of constraints (by shared
/// unknowns) that is inconsistent on its own.
fn inconsistent_component(cs: &[Constraint]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..cs.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut owner: HashMap<UnitVar, usize> = HashMap::new();
    for (i, c) in cs.iter().enumerate() {
        for v in c.lhs.vars().into_iter().chain(c.rhs.vars()) {
            if matches!(v, UnitVar::ExplicitAbs(_)) {
                continue;
            }
            match owner.get(v) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
                None => {
                    owner.insert(v.clone(), i);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..cs.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| (g.len(), g[0]));
    for g in groups {
        let sub: Vec<Constraint> = g.iter().map(|&i| cs[i].clone()).collect();
        if !is_consistent(&sub) {
            return g;
        }
    }
    (0..cs.len()).collect()
}

/// True for a named variable of a program or module.
pub fn is_monomorphic_name(v: &UnitVar) -> bool {
    matches!(v, UnitVar::LitOrVar(LitOrVar::Var { .. }))
}

/// True for a positional slot of `fs`.
pub fn is_slot_of(v: &UnitVar, fs: &str) -> bool {
    matches!(v, UnitVar::ParamAbs { fs: f, slot: Slot::Param(_) } if f == fs)
}
