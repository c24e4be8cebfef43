//! Random constraint systems and a brute-force oracle, shared by the solver
//! property tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use unitcheck_core::solver::{is_consistent, solve};
use unitcheck_core::{units_equal, Atom, Constraint, Int, PolyName, Provenance, Reason, Slot, Span, UnitExpr, UnitMap, UnitVar};

/// Rigid atoms used on right-hand sides: two base units and one explicit
/// polymorphic name.
pub const RIGID: usize = 3;

#[derive(Clone, Debug)]
pub struct SystemSpec {
    /// Whether unknown `j` is a procedure slot rather than a named variable.
    pub slot: Vec<bool>,
    /// Per constraint: exponents of unknowns and of rigid atoms in
    /// `lhs / rhs`.
    pub rows: Vec<(Vec<i64>, Vec<i64>)>,
}

fn exponent() -> impl Strategy<Value = i64> {
    prop_oneof![3 => Just(0i64), 2 => -6..=6i64]
}

pub fn system(max_unknowns: usize) -> impl Strategy<Value = SystemSpec> {
    (1..=max_unknowns, 1..=8usize).prop_flat_map(|(n, m)| {
        let row = (proptest::collection::vec(exponent(), n), proptest::collection::vec(exponent(), RIGID));
        (proptest::collection::vec(prop::bool::weighted(0.25), n), proptest::collection::vec(row, m))
            .prop_map(|(slot, rows)| SystemSpec { slot, rows })
    })
}

pub fn unknown(spec: &SystemSpec, j: usize) -> UnitVar {
    if spec.slot[j] {
        UnitVar::param_abs("f", Slot::Param(j))
    } else {
        UnitVar::var("main", &format!("u{j}"))
    }
}

pub fn rigid(k: usize) -> Atom {
    match k {
        0 => Atom::Base("metre".into()),
        1 => Atom::Base("sec".into()),
        _ => Atom::Var(UnitVar::ExplicitAbs(PolyName::new("p", "f"))),
    }
}

fn rigid_expr(k: usize) -> UnitExpr {
    match rigid(k) {
        Atom::Base(b) => UnitExpr::base(b),
        Atom::Var(v) => UnitExpr::Var(v),
        Atom::Generated(_) => unreachable!(),
    }
}

fn power(u: UnitExpr, e: i64) -> UnitExpr {
    UnitExpr::power(u, e)
}

/// Positive exponents go left, negative ones right, so both sides carry
/// factors.
pub fn constraints(spec: &SystemSpec) -> Vec<Constraint> {
    let file: Arc<str> = Arc::from("random.f90");
    spec.rows
        .iter()
        .map(|(us, rs)| {
            let mut lhs = UnitExpr::Unitless;
            let mut rhs = UnitExpr::Unitless;
            let terms = us
                .iter()
                .enumerate()
                .map(|(j, &e)| (UnitExpr::Var(unknown(spec, j)), e))
                .chain(rs.iter().enumerate().map(|(k, &e)| (rigid_expr(k), e)));
            for (u, e) in terms {
                match e.signum() {
                    1 => lhs = UnitExpr::product(lhs, power(u, e)),
                    -1 => rhs = UnitExpr::product(rhs, power(u, -e)),
                    _ => {}
                }
            }
            Constraint::new(lhs, rhs, Provenance::new(&file, Span::default(), Reason::Assignment))
        })
        .collect()
}

/// All `z` in `[-k, k]^n` with `A z = b`. The last unknown occurring in the
/// system is solved for rather than enumerated.
pub fn brute_force(a: &[Vec<i64>], b: &[i64], n: usize, k: i64) -> Vec<Vec<i64>> {
    let solve_for = (0..n).rev().find(|&j| a.iter().any(|r| r[j] != 0));
    let free: Vec<usize> = (0..n).filter(|&j| Some(j) != solve_for).collect();
    let mut out = vec![];
    let mut z = vec![0i64; n];
    let mut idx = vec![-k; free.len()];
    loop {
        for (t, &j) in free.iter().enumerate() {
            z[j] = idx[t];
        }
        let ok = match solve_for {
            None => true,
            Some(s) => {
                let r = a.iter().position(|r| r[s] != 0).unwrap();
                let rest: i64 = (0..n).filter(|&j| j != s).map(|j| a[r][j] * z[j]).sum();
                let num = b[r] - rest;
                if num % a[r][s] == 0 {
                    z[s] = num / a[r][s];
                    true
                } else {
                    false
                }
            }
        };
        if ok && a.iter().zip(b).all(|(r, &bi)| r.iter().zip(&z).map(|(x, y)| x * y).sum::<i64>() == bi) {
            out.push(z.clone());
        }
        let mut t = 0;
        loop {
            if t == idx.len() {
                return out;
            }
            idx[t] += 1;
            if idx[t] <= k {
                break;
            }
            idx[t] = -k;
            t += 1;
        }
    }
}

fn small(e: &Int) -> i64 {
    e.to_i64().expect("exponent fits in i64")
}

/// Parametric form of a solution, per rigid atom: `z_j = c[j] + Σ m[j][p] t_p`
/// where the `t_p` are the exponents of the parameter atoms.
struct Parametric {
    c: Vec<Vec<i64>>,
    m: Vec<Vec<i64>>,
}

fn parametric(values: &[UnitMap]) -> Parametric {
    let params: BTreeSet<Atom> = values.iter().flat_map(|v| v.iter().map(|(a, _)| a.clone())).filter(|a| !a.is_real()).collect();
    let params: Vec<Atom> = params.into_iter().collect();
    let c = (0..RIGID).map(|k| values.iter().map(|v| v.get(&rigid(k)).map_or(0, small)).collect()).collect();
    let m = values.iter().map(|v| params.iter().map(|p| v.get(p).map_or(0, small)).collect()).collect();
    Parametric { c, m }
}

/// Searches `t ∈ [-r, r]^p` with `c + M t = z`.
fn representable(p: &Parametric, base: usize, z: &[i64], r: i64) -> bool {
    let n = z.len();
    let np = p.m.first().map_or(0, Vec::len);
    let target: Vec<i64> = (0..n).map(|j| z[j] - p.c[base][j]).collect();
    let a: Vec<Vec<i64>> = (0..n).map(|j| p.m[j].clone()).collect();
    if np == 0 {
        return target.iter().all(|&x| x == 0);
    }
    !brute_force(&a, &target, np, r).is_empty()
}

pub const BOX: i64 = 12;

/// Recorded pivots after which the loop body did not leave unit pivots at
/// the recorded column and at some later column.
pub fn lemma_violations(spec: &SystemSpec) -> usize {
    solve(&constraints(spec)).map_or(0, |s| s.report.lemma_violations)
}

/// Checks one system. `oracle` enables the brute-force comparison, meant
/// for systems with at most four unknowns.
pub fn check(spec: &SystemSpec, oracle: bool) -> Result<(), String> {
    let cs = constraints(spec);
    let n = spec.slot.len();
    let result = solve(&cs);
    match &result {
        Ok(sol) => {
            for (i, c) in cs.iter().enumerate() {
                let l = sol.apply(&c.lhs).denormalize();
                let r = sol.apply(&c.rhs).denormalize();
                if !units_equal(&l, &r) {
                    return Err(format!("constraint {i} not satisfied: {l} vs {r}"));
                }
            }
            let rep = &sol.report;
            if rep.iterations > rep.recorded_total() + 1 {
                return Err(format!("{} iterations for {} recorded pivots", rep.iterations, rep.recorded_total()));
            }

        }
        Err(inc) => {
            let core: Vec<Constraint> = inc.core.iter().map(|&i| cs[i].clone()).collect();
            if core.is_empty() || is_consistent(&core) {
                return Err(format!("core {:?} is not itself inconsistent", inc.core));
            }
        }
    }
    if !oracle {
        return Ok(());
    }
    let a: Vec<Vec<i64>> = spec.rows.iter().map(|(us, _)| us.clone()).collect();
    // rows read `A z + B = 0` in exponents, so `A z = -B`
    let bs: Vec<Vec<i64>> = (0..RIGID).map(|k| spec.rows.iter().map(|(_, rs)| -rs[k]).collect()).collect();
    let boxes: Vec<Vec<Vec<i64>>> = bs.iter().map(|b| brute_force(&a, b, n, BOX)).collect();
    match &result {
        Err(_) => {
            if boxes.iter().all(|s| !s.is_empty()) {
                return Err("solver reports inconsistency but every rigid atom has an integer solution".into());
            }
        }
        Ok(sol) => {
            let values: Vec<UnitMap> = (0..n).map(|j| sol.value(&unknown(spec, j))).collect();
            let p = parametric(&values);
            for j in 0..n {
                let determined = p.m[j].iter().all(|&x| x == 0);
                for (k, sols) in boxes.iter().enumerate() {
                    if determined {
                        if let Some(z) = sols.iter().find(|z| z[j] != p.c[k][j]) {
                            return Err(format!("u{j} reported determined as {} but {:?} solves atom {k}", p.c[k][j], z));
                        }
                    } else {
                        // two parameter choices giving different values must both solve
                        let q = p.m[j].iter().position(|&x| x != 0).unwrap();
                        let z0: Vec<i64> = (0..n).map(|i| p.c[k][i]).collect();
                        let z1: Vec<i64> = (0..n).map(|i| p.c[k][i] + p.m[i][q]).collect();
                        for z in [&z0, &z1] {
                            if !a.iter().zip(&bs[k]).all(|(r, &bi)| r.iter().zip(z).map(|(x, y)| x * y).sum::<i64>() == bi) {
                                return Err(format!("parametric witness {z:?} for atom {k} does not solve the system"));
                            }
                        }
                    }
                }
            }
            for (k, sols) in boxes.iter().enumerate() {
                for z in sols.iter().filter(|z| z.iter().all(|x| x.abs() <= 3)).take(8) {
                    if !representable(&p, k, z, BOX) {
                        return Err(format!("oracle solution {z:?} for atom {k} is not an instance of the solver's answer"));
                    }
                }
            }
        }
    }
    Ok(())
}
