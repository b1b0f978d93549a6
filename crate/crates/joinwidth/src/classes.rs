//! Detectors for instance classes with small-width decompositions:
//! functional dependencies, root sets, constraint root sets, hereditary
//! solution bounds, and fixing sets.

use std::collections::{BTreeMap, BTreeSet};

use crate::decomposition::{evaluate, JoinDecomposition, Semantics};
use crate::engines::{find_decomposition_dp_with_limit, SearchVerdict, DEFAULT_CONSTRAINT_SUBSET_LIMIT};
use crate::error::{Error, Result};
use crate::oracle::enumerate_solutions;
use crate::relation::{induced_subinstance, natural_join, project, Constraint, Instance, VarId};
use crate::width::{Omega, TupleBudget};

/// Soft cap on variable count for the hereditary bound check.
pub const DEFAULT_HEREDITARY_LIMIT: usize = 16;

/// True iff no two tuples of `c`, projected onto `given + {v}`, differ only
/// at `v`: the given variables determine `v` within the constraint.
pub fn is_functional_on(c: &Constraint, given: &BTreeSet<VarId>, v: VarId) -> Result<bool> {
    if !c.scope().contains(v) {
        return Err(Error::InvalidScope(format!(
            "variable {v} is not in the constraint scope"
        )));
    }
    let mut window = given.clone();
    window.insert(v);
    let p = project(c, &window);
    let vpos = p.scope().position(v).expect("v kept by projection");
    let mut seen: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    for t in p.tuples() {
        let mut key = t.clone();
        key.remove(vpos);
        match seen.get(&key) {
            Some(&val) if val != t[vpos] => return Ok(false),
            Some(_) => {}
            None => {
                seen.insert(key, t[vpos]);
            }
        }
    }
    Ok(true)
}

/// An order certifying that a variable set is a root set: after the roots,
/// every variable is functionally determined by its prefix through some
/// constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSetWitness {
    pub roots: Vec<VarId>,
    /// All variables: roots first, then the greedily certified rest.
    pub order: Vec<VarId>,
    /// Certifying constraint index per non-root variable.
    pub certificates: BTreeMap<VarId, usize>,
}

/// Greedy witness search. Extending a prefix preserves functionality, so one
/// greedy pass (lowest variable, then lowest certifying constraint index)
/// is complete: it succeeds iff any certifying order does.
pub fn find_root_set_witness(inst: &Instance, roots: &BTreeSet<VarId>) -> Option<RootSetWitness> {
    if !roots.is_subset(inst.variables()) {
        return None;
    }
    let mut order: Vec<VarId> = roots.iter().copied().collect();
    let mut prefix: BTreeSet<VarId> = roots.clone();
    let mut remaining: BTreeSet<VarId> = inst.variables().difference(roots).copied().collect();
    let mut certificates = BTreeMap::new();
    while !remaining.is_empty() {
        let mut advanced = false;
        'vars: for &v in &remaining {
            for (ci, c) in inst.constraints().iter().enumerate() {
                if c.scope().contains(v)
                    && is_functional_on(c, &prefix, v).expect("v is in the scope")
                {
                    order.push(v);
                    prefix.insert(v);
                    certificates.insert(v, ci);
                    advanced = true;
                    break 'vars;
                }
            }
        }
        if !advanced {
            return None;
        }
        let last = *order.last().unwrap();
        remaining.remove(&last);
    }
    Some(RootSetWitness {
        roots: roots.iter().copied().collect(),
        order,
        certificates,
    })
}

#[derive(Clone, Debug)]
pub struct ConstraintRootSet {
    /// Constraint indices whose scopes form the root set.
    pub constraints: Vec<usize>,
    pub witness: RootSetWitness,
    pub decomposition: JoinDecomposition,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Searches lexicographically for `k` constraints whose combined scope is a
/// root set, and builds a decomposition of width at most `k`: the root
/// constraints first, then the certifying constraints in witness order, then
/// the rest. If that linear order overshoots the width bound the subset
/// search is used instead (a width-k decomposition exists whenever the
/// witness does).
pub fn find_constraint_root_set(inst: &Instance, k: usize) -> Result<Option<ConstraintRootSet>> {
    let n = inst.num_constraints();
    if n == 0 || k == 0 {
        return Ok(None);
    }
    let budget = TupleBudget::new(inst.width_base(), Omega::from_integer(k as u64));
    for p in combinations(n, k.min(n)) {
        let mut roots: BTreeSet<VarId> = BTreeSet::new();
        for &ci in &p {
            roots.extend(inst.constraint(ci).scope().vars());
        }
        let Some(witness) = find_root_set_witness(inst, &roots) else {
            continue;
        };
        // Linear order mirroring the witness.
        let mut used: Vec<bool> = vec![false; n];
        let mut order: Vec<usize> = Vec::new();
        for &ci in &p {
            used[ci] = true;
            order.push(ci);
        }
        for v in &witness.order {
            if let Some(&ci) = witness.certificates.get(v) {
                if !used[ci] {
                    used[ci] = true;
                    order.push(ci);
                }
            }
        }
        for ci in 0..n {
            if !used[ci] {
                order.push(ci);
            }
        }
        let dec = JoinDecomposition::linear_from_order(&order)?;
        let report = evaluate(&dec, inst, Semantics::Pruned, None)?;
        if budget.allows(report.peak_tuples) {
            return Ok(Some(ConstraintRootSet {
                constraints: p,
                witness,
                decomposition: dec,
            }));
        }
        // The greedy order can overshoot even though a width-k tree exists;
        // fall back to the exhaustive subset search.
        if n <= DEFAULT_CONSTRAINT_SUBSET_LIMIT {
            let out = find_decomposition_dp_with_limit(
                inst,
                Omega::from_integer(k as u64),
                DEFAULT_CONSTRAINT_SUBSET_LIMIT,
            )?;
            if let SearchVerdict::Found { decomposition, .. } = out.verdict {
                return Ok(Some(ConstraintRootSet {
                    constraints: p,
                    witness,
                    decomposition,
                }));
            }
        }
    }
    Ok(None)
}

/// True iff every induced subinstance has at most `base^k` solutions.
pub fn is_hereditarily_k_bounded(inst: &Instance, k: Omega) -> Result<bool> {
    is_hereditarily_k_bounded_with_limit(inst, k, DEFAULT_HEREDITARY_LIMIT)
}

pub fn is_hereditarily_k_bounded_with_limit(
    inst: &Instance,
    k: Omega,
    limit: usize,
) -> Result<bool> {
    let vars: Vec<VarId> = inst.variables().iter().copied().collect();
    let nv = vars.len();
    if nv > limit || nv > 30 {
        return Err(Error::LimitExceeded {
            what: "variable count for hereditary bound check",
            limit: limit.min(30) as u64,
            actual: nv as u64,
        });
    }
    let budget = TupleBudget::new(inst.width_base(), k);
    for mask in 0u32..(1u32 << nv) {
        let subset: BTreeSet<VarId> = (0..nv)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| vars[i])
            .collect();
        if subset.is_empty() {
            continue;
        }
        let sub = induced_subinstance(inst, &subset)?;
        let sols = enumerate_solutions(&sub)?;
        if !budget.allows(sols.len() as u64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A fixing set per constraint: a set of at most `k` constraints containing
/// it whose full join has at most one tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixingAssignment {
    pub sets: BTreeMap<usize, Vec<usize>>,
}

/// True iff the full join of the given constraints has at most one tuple.
/// Early exits: an empty running join stays empty, and once the remaining
/// constraints introduce no new variables a running join with at most one
/// tuple can only shrink.
fn joins_to_at_most_one(inst: &Instance, set: &[usize]) -> bool {
    let mut acc: Option<Constraint> = None;
    for (pos, &ci) in set.iter().enumerate() {
        let c = inst.constraint(ci);
        acc = Some(match acc {
            None => c.clone(),
            Some(a) => natural_join(&a, c),
        });
        let a = acc.as_ref().unwrap();
        if a.is_empty() {
            return true;
        }
        if a.len() == 1 {
            let covered: BTreeSet<VarId> = a.scope().as_set();
            let rest_covered = set[pos + 1..].iter().all(|&cj| {
                inst.constraint(cj)
                    .scope()
                    .vars()
                    .iter()
                    .all(|v| covered.contains(v))
            });
            if rest_covered {
                return true;
            }
        }
    }
    acc.map(|a| a.len() <= 1).unwrap_or(false)
}

/// For every constraint, searches subsets of size 1..=k containing it (in
/// lexicographic order, smaller sets first) whose join pins everything down.
/// Returns `None` if any constraint has no fixing set of size at most `k`.
pub fn find_fixing_sets(inst: &Instance, k: usize) -> Option<FixingAssignment> {
    let n = inst.num_constraints();
    if n == 0 || k == 0 {
        return None;
    }
    let mut sets = BTreeMap::new();
    for ci in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != ci).collect();
        let mut found: Option<Vec<usize>> = None;
        'size: for size in 1..=k.min(n) {
            for mut picks in combinations(others.len(), size - 1) {
                let mut set: Vec<usize> = picks.drain(..).map(|i| others[i]).collect();
                set.push(ci);
                set.sort_unstable();
                if joins_to_at_most_one(inst, &set) {
                    found = Some(set);
                    break 'size;
                }
            }
        }
        sets.insert(ci, found?);
    }
    Some(FixingAssignment { sets })
}

/// Builds a linear decomposition from fixing sets: for each constraint in
/// index order, its fixing set members are appended as a block (skipping
/// ones already placed).
pub fn decomposition_from_fixing_sets(
    inst: &Instance,
    fix: &FixingAssignment,
) -> Result<JoinDecomposition> {
    let n = inst.num_constraints();
    for ci in 0..n {
        let set = fix
            .sets
            .get(&ci)
            .ok_or_else(|| Error::InvalidSpec(format!("no fixing set for constraint {ci}")))?;
        if !set.contains(&ci) {
            return Err(Error::InvalidSpec(format!(
                "fixing set for constraint {ci} does not contain it"
            )));
        }
        if set.iter().any(|&cj| cj >= n) {
            return Err(Error::InvalidSpec(format!(
                "fixing set for constraint {ci} mentions an unknown constraint"
            )));
        }
    }
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for ci in 0..n {
        for &cj in &fix.sets[&ci] {
            if !used[cj] {
                used[cj] = true;
                order.push(cj);
            }
        }
    }
    debug_assert_eq!(order.len(), n);
    JoinDecomposition::linear_from_order(&order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_star, gen_triangle};
    use crate::relation::Scope;
    use num_rational::Ratio;

    fn c(scope: &[VarId], tuples: &[&[u32]]) -> Constraint {
        Constraint::new(
            Scope::new(scope.to_vec()).unwrap(),
            tuples.iter().map(|t| t.to_vec()),
        )
        .unwrap()
    }

    /// Single constraint over v1..vn whose relation is the n x n identity
    /// matrix rows.
    fn identity_instance(n: usize) -> Instance {
        let tuples: Vec<Vec<u32>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
            .collect();
        Instance::new(
            (1..=n).map(|i| format!("v{i}")).collect(),
            vec!["0".into(), "1".into()],
            vec![Constraint::new(Scope::new((0..n).collect()).unwrap(), tuples).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn functional_examples() {
        // y = x + 1 style: x determines y.
        let con = c(&[0, 1], &[&[0, 1], &[1, 2], &[2, 0]]);
        assert!(is_functional_on(&con, &BTreeSet::from([0]), 1).unwrap());
        assert!(is_functional_on(&con, &BTreeSet::from([1]), 0).unwrap());
        // Two tuples differing only at v.
        let bad = c(&[0, 1], &[&[0, 1], &[0, 2]]);
        assert!(!is_functional_on(&bad, &BTreeSet::from([0]), 1).unwrap());
        // Empty given set: functional iff v is constant.
        let constv = c(&[0, 1], &[&[0, 1], &[1, 1]]);
        assert!(is_functional_on(&constv, &BTreeSet::new(), 1).unwrap());
        assert!(!is_functional_on(&constv, &BTreeSet::new(), 0).unwrap());
        // v outside the scope errors.
        assert!(is_functional_on(&constv, &BTreeSet::new(), 9).is_err());
    }

    #[test]
    fn functionality_monotone_under_extension() {
        let con = c(&[0, 1, 2], &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        for v in 0..3 {
            for small in [BTreeSet::new(), BTreeSet::from([(v + 1) % 3])] {
                if is_functional_on(&con, &small, v).unwrap() {
                    let mut big = small.clone();
                    big.insert((v + 2) % 3);
                    assert!(is_functional_on(&con, &big, v).unwrap());
                }
            }
        }
    }

    #[test]
    fn root_set_witness_on_successor_chain() {
        // x_{i+1} = x_i + 1 mod 3 along a path: once x0 is rooted every
        // later variable is functionally determined by its predecessor.
        let succ = |i: VarId| c(&[i, i + 1], &[&[0, 1], &[1, 2], &[2, 0]]);
        let inst = Instance::new(
            vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
            vec!["0".into(), "1".into(), "2".into()],
            vec![succ(0), succ(1), succ(2)],
        )
        .unwrap();
        let w = find_root_set_witness(&inst, &BTreeSet::from([0])).unwrap();
        assert_eq!(w.order.len(), 4);
        assert_eq!(w.roots, vec![0]);
        // Empty roots: nothing is functionally pinned at the start.
        assert!(find_root_set_witness(&inst, &BTreeSet::new()).is_none());
    }

    #[test]
    fn star_rooted_at_hub() {
        let inst = gen_star(3).unwrap();
        // Rays are not determined by the hub: both (0,0) and (0,1) exist.
        assert!(find_root_set_witness(&inst, &BTreeSet::from([0])).is_none());
        // All rays as roots: hub is determined (constant 0).
        assert!(find_root_set_witness(&inst, &BTreeSet::from([1, 2, 3])).is_some());
    }

    #[test]
    fn identity_matrix_instance_rooting() {
        let n = 6;
        let inst = identity_instance(n);
        // No small variable root set: below n-2 roots the greedy stalls.
        for mask in 0u32..(1 << n) {
            let q: BTreeSet<VarId> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if q.len() < n - 2 {
                assert!(find_root_set_witness(&inst, &q).is_none());
            }
        }
        // But the single constraint is a constraint root set at k = 1.
        let found = find_constraint_root_set(&inst, 1).unwrap().unwrap();
        assert_eq!(found.constraints, vec![0]);
        let report = evaluate(&found.decomposition, &inst, Semantics::Pruned, None).unwrap();
        assert!(report.peak_tuples <= inst.width_base());
    }

    #[test]
    fn constraint_root_set_none_when_absent() {
        let inst = gen_star(3).unwrap();
        // One ray constraint covers x and one v_i; the other rays stay free.
        assert!(find_constraint_root_set(&inst, 1).unwrap().is_none());
        assert!(find_constraint_root_set(&inst, 3).unwrap().is_some());
    }

    #[test]
    fn hereditary_bounds() {
        let star = gen_star(3).unwrap();
        // tup = 2; the full instance has 8 solutions = 2^3.
        assert!(is_hereditarily_k_bounded(&star, Ratio::from_integer(3)).unwrap());
        assert!(!is_hereditarily_k_bounded(&star, Ratio::from_integer(2)).unwrap());
        let tri = gen_triangle(3).unwrap();
        // The full instance has 7 solutions, above tup = 5 but within
        // floor(5^1.5) = 11; proper subinstances stay within tup.
        assert!(!is_hereditarily_k_bounded(&tri, Ratio::from_integer(1)).unwrap());
        assert!(is_hereditarily_k_bounded(&tri, Ratio::new(3, 2)).unwrap());
    }

    #[test]
    fn fixing_sets_on_singletons() {
        // Two singleton-relation constraints: each fixes itself.
        let inst = Instance::new(
            vec!["x".into(), "y".into()],
            vec!["0".into(), "1".into()],
            vec![c(&[0], &[&[1]]), c(&[1], &[&[0]])],
        )
        .unwrap();
        let fix = find_fixing_sets(&inst, 1).unwrap();
        assert_eq!(fix.sets[&0], vec![0]);
        assert_eq!(fix.sets[&1], vec![1]);
        let dec = decomposition_from_fixing_sets(&inst, &fix).unwrap();
        let report = evaluate(&dec, &inst, Semantics::Pruned, None).unwrap();
        assert!(report.peak_tuples <= inst.width_base());
    }

    #[test]
    fn fixing_sets_contradictory_pair() {
        // Joint join is empty; the pair fixes both constraints at k = 2 even
        // though each alone has several tuples.
        let inst = Instance::new(
            vec!["x".into()],
            vec!["0".into(), "1".into(), "2".into()],
            vec![c(&[0], &[&[0], &[1]]), c(&[0], &[&[2]])],
        )
        .unwrap();
        assert!(find_fixing_sets(&inst, 1).is_none());
        let fix = find_fixing_sets(&inst, 2).unwrap();
        assert_eq!(fix.sets[&0], vec![0, 1]);
        // The single-tuple constraint already fixes itself.
        assert_eq!(fix.sets[&1], vec![1]);
    }

    #[test]
    fn fixing_sets_shrinking_filter() {
        // The second constraint filters the first down to one tuple; the
        // early-success check must not reject the pair just because the
        // running join is momentarily larger than one tuple.
        let inst = Instance::new(
            vec!["x".into(), "y".into()],
            vec!["0".into(), "1".into()],
            vec![c(&[0, 1], &[&[0, 0], &[1, 1]]), c(&[0], &[&[0]])],
        )
        .unwrap();
        let fix = find_fixing_sets(&inst, 2).unwrap();
        assert_eq!(fix.sets[&0], vec![0, 1]);
    }

    #[test]
    fn fixing_set_decomposition_validation() {
        let inst = Instance::new(
            vec!["x".into()],
            vec!["0".into()],
            vec![c(&[0], &[&[0]])],
        )
        .unwrap();
        let bad = FixingAssignment {
            sets: BTreeMap::from([(0usize, vec![])]),
        };
        assert!(decomposition_from_fixing_sets(&inst, &bad).is_err());
    }
}
