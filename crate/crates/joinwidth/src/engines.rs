//! Solving engines: evaluation of a given decomposition, decomposition
//! search by a recurrence over constraint subsets, exact join width over the
//! same table, and a decision procedure over variable subsets.

use std::collections::{BTreeMap, BTreeSet};

use crate::decomposition::{
    evaluate, DecompNode, EvaluationReport, JoinDecomposition, Semantics, WidthResult,
};
use crate::error::{Error, Result};
use crate::relation::{
    natural_join, project, prune, Constraint, Instance, Scope, Value, VarId,
};
use crate::width::{Omega, TupleBudget};

/// Soft cap on constraint count for the subset recurrences.
pub const DEFAULT_CONSTRAINT_SUBSET_LIMIT: usize = 20;

/// Soft cap on variable count for the variable-subset recurrence.
pub const DEFAULT_VARIABLE_SUBSET_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveVerdict {
    Sat,
    Unsat,
    /// The width budget pruned the search; no verdict. Only possible when
    /// the instance's join width exceeds the budget.
    WidthExceeded,
}

/// Decides satisfiability by pruned evaluation of a given decomposition.
pub fn solve_with_decomposition(
    inst: &Instance,
    dec: &JoinDecomposition,
) -> Result<(SolveVerdict, EvaluationReport)> {
    let report = evaluate(dec, inst, Semantics::Pruned, None)?;
    let verdict = if report.satisfiable == Some(true) {
        SolveVerdict::Sat
    } else {
        SolveVerdict::Unsat
    };
    Ok((verdict, report))
}

/// Search instrumentation.
#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub subsets_expanded: u64,
    pub relations_materialized: u64,
    pub peak_relation_size: u64,
}

#[derive(Clone, Debug)]
pub enum SearchVerdict {
    Found {
        decomposition: JoinDecomposition,
        width: f64,
        peak_tuples: u64,
    },
    NotFound,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub verdict: SearchVerdict,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn found(&self) -> bool {
        matches!(self.verdict, SearchVerdict::Found { .. })
    }
}

/// Table of the constraint-subset recurrence. `alpha[S]` is the pruned
/// relation a width-bounded partial decomposition covering exactly the
/// constraints of `S` produces over the boundary of `S`, or `None` when no
/// such partial decomposition exists. The relation is independent of which
/// feasible split produced it, so at most one join is materialized per
/// subset.
#[derive(Clone, Debug)]
pub struct ConstraintDpTable {
    num_constraints: usize,
    budget: TupleBudget,
    alpha: Vec<Option<Constraint>>,
    split: Vec<Option<(u32, u32)>>,
    pub stats: SearchStats,
}

impl ConstraintDpTable {
    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn budget(&self) -> &TupleBudget {
        &self.budget
    }

    pub fn alpha_by_mask(&self, mask: u32) -> Option<&Constraint> {
        self.alpha[mask as usize].as_ref()
    }

    /// `alpha` for an explicit subset of constraint indices.
    pub fn alpha(&self, subset: &[usize]) -> Option<&Constraint> {
        let mut mask = 0u32;
        for &i in subset {
            mask |= 1 << i;
        }
        self.alpha_by_mask(mask)
    }

    fn full_mask(&self) -> u32 {
        if self.num_constraints == 32 {
            u32::MAX
        } else {
            (1u32 << self.num_constraints) - 1
        }
    }
}

fn subset_boundary(inst: &Instance, mask: u32) -> BTreeSet<VarId> {
    let mut inside: BTreeSet<VarId> = BTreeSet::new();
    let mut outside: BTreeSet<VarId> = BTreeSet::new();
    for (i, c) in inst.constraints().iter().enumerate() {
        let target = if mask >> i & 1 == 1 {
            &mut inside
        } else {
            &mut outside
        };
        target.extend(c.scope().vars());
    }
    inside.intersection(&outside).copied().collect()
}

/// Runs the constraint-subset recurrence with the `b^omega` tuple cap.
pub fn constraint_dp_table(inst: &Instance, omega: Omega) -> Result<ConstraintDpTable> {
    constraint_dp_table_with_limit(inst, omega, DEFAULT_CONSTRAINT_SUBSET_LIMIT)
}

pub fn constraint_dp_table_with_limit(
    inst: &Instance,
    omega: Omega,
    limit: usize,
) -> Result<ConstraintDpTable> {
    let n = inst.num_constraints();
    if n == 0 {
        return Err(Error::Degenerate("instance has no constraints".into()));
    }
    if n > limit || n > 30 {
        return Err(Error::LimitExceeded {
            what: "constraint count for subset recurrence",
            limit: limit.min(30) as u64,
            actual: n as u64,
        });
    }
    let budget = TupleBudget::new(inst.width_base(), omega);
    let size = 1usize << n;
    let mut table = ConstraintDpTable {
        num_constraints: n,
        budget,
        alpha: vec![None; size],
        split: vec![None; size],
        stats: SearchStats::default(),
    };

    // Subsets in order of increasing size.
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 1..size as u32 {
        by_size[mask.count_ones() as usize].push(mask);
    }

    for masks in &by_size {
        for &mask in masks {
            table.stats.subsets_expanded += 1;
            let boundary = subset_boundary(inst, mask);
            if mask.count_ones() == 1 {
                let ci = mask.trailing_zeros() as usize;
                let rel = prune(&project(inst.constraint(ci), &boundary), inst);
                table.stats.relations_materialized += 1;
                table.stats.peak_relation_size =
                    table.stats.peak_relation_size.max(rel.len() as u64);
                // A leaf is itself a node of any tree containing it, so its
                // relation must fit the budget too.
                if table.budget.allows(rel.len() as u64) {
                    table.alpha[mask as usize] = Some(rel);
                }
                continue;
            }
            // Find one feasible split; the join is computed for at most one.
            let low = mask & mask.wrapping_neg();
            let mut sub = (mask - 1) & mask;
            let mut result: Option<(Constraint, (u32, u32))> = None;
            let mut decided = false;
            while sub != 0 && !decided {
                if sub & low != 0 {
                    let other = mask ^ sub;
                    if table.alpha[sub as usize].is_some() && table.alpha[other as usize].is_some()
                    {
                        let a = table.alpha[sub as usize].as_ref().unwrap();
                        let b = table.alpha[other as usize].as_ref().unwrap();
                        let joined = natural_join(a, b);
                        table.stats.peak_relation_size =
                            table.stats.peak_relation_size.max(joined.len() as u64);
                        let rel = prune(&project(&joined, &boundary), inst);
                        table.stats.relations_materialized += 1;
                        table.stats.peak_relation_size =
                            table.stats.peak_relation_size.max(rel.len() as u64);
                        if table.budget.allows(rel.len() as u64) {
                            result = Some((rel, (sub, other)));
                        }
                        decided = true;
                    }
                }
                sub = (sub - 1) & mask;
            }
            if let Some((rel, split)) = result {
                table.alpha[mask as usize] = Some(rel);
                table.split[mask as usize] = Some(split);
            }
        }
    }
    Ok(table)
}

fn tree_from_splits(split: &[Option<(u32, u32)>], mask: u32, nodes: &mut Vec<DecompNode>) -> usize {
    if mask.count_ones() == 1 {
        nodes.push(DecompNode::Leaf(mask.trailing_zeros() as usize));
        return nodes.len() - 1;
    }
    let (a, b) = split[mask as usize].expect("feasible subset has a recorded split");
    let l = tree_from_splits(split, a, nodes);
    let r = tree_from_splits(split, b, nodes);
    nodes.push(DecompNode::Internal(l, r));
    nodes.len() - 1
}

/// Searches for a join decomposition of width at most `omega`. `Found`
/// exactly when one exists.
pub fn find_decomposition_dp(inst: &Instance, omega: Omega) -> Result<SearchOutcome> {
    find_decomposition_dp_with_limit(inst, omega, DEFAULT_CONSTRAINT_SUBSET_LIMIT)
}

pub fn find_decomposition_dp_with_limit(
    inst: &Instance,
    omega: Omega,
    limit: usize,
) -> Result<SearchOutcome> {
    let table = constraint_dp_table_with_limit(inst, omega, limit)?;
    let full = table.full_mask();
    if table.alpha[full as usize].is_none() {
        return Ok(SearchOutcome {
            verdict: SearchVerdict::NotFound,
            stats: table.stats,
        });
    }
    let mut nodes = Vec::new();
    let root = tree_from_splits(&table.split, full, &mut nodes);
    let dec = JoinDecomposition::from_nodes(nodes, root)?;
    let report = evaluate(&dec, inst, Semantics::Pruned, None)?;
    debug_assert!(table.budget.allows(report.peak_tuples));
    Ok(SearchOutcome {
        verdict: SearchVerdict::Found {
            decomposition: dec,
            width: report.overall_width,
            peak_tuples: report.peak_tuples,
        },
        stats: table.stats,
    })
}

/// Exact join width: minimizes, over all decompositions, the largest node
/// relation, using the same subset recurrence without a cap.
pub fn exact_joinwidth(inst: &Instance) -> Result<WidthResult> {
    exact_joinwidth_with_limit(inst, DEFAULT_CONSTRAINT_SUBSET_LIMIT)
}

pub fn exact_joinwidth_with_limit(inst: &Instance, limit: usize) -> Result<WidthResult> {
    let n = inst.num_constraints();
    if n == 0 {
        return Err(Error::Degenerate("instance has no constraints".into()));
    }
    if n > limit || n > 30 {
        return Err(Error::LimitExceeded {
            what: "constraint count for subset recurrence",
            limit: limit.min(30) as u64,
            actual: n as u64,
        });
    }
    let size = 1usize << n;
    // The pruned relation over a subset's boundary does not depend on the
    // tree shape, so one fixed split suffices to fill alpha.
    let mut alpha: Vec<Option<Constraint>> = vec![None; size];
    let mut cost: Vec<u64> = vec![u64::MAX; size];
    let mut best_split: Vec<Option<(u32, u32)>> = vec![None; size];

    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 1..size as u32 {
        by_size[mask.count_ones() as usize].push(mask);
    }
    for masks in &by_size {
        for &mask in masks {
            let boundary = subset_boundary(inst, mask);
            if mask.count_ones() == 1 {
                let ci = mask.trailing_zeros() as usize;
                let rel = prune(&project(inst.constraint(ci), &boundary), inst);
                cost[mask as usize] = rel.len() as u64;
                alpha[mask as usize] = Some(rel);
                continue;
            }
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let joined = natural_join(
                alpha[low as usize].as_ref().unwrap(),
                alpha[rest as usize].as_ref().unwrap(),
            );
            let rel = prune(&project(&joined, &boundary), inst);
            let here = rel.len() as u64;
            alpha[mask as usize] = Some(rel);

            let mut best = u64::MAX;
            let mut sub = (mask - 1) & mask;
            while sub != 0 {
                if sub & low != 0 {
                    let other = mask ^ sub;
                    let c = cost[sub as usize].max(cost[other as usize]);
                    if c < best {
                        best = c;
                        best_split[mask as usize] = Some((sub, other));
                    }
                }
                sub = (sub - 1) & mask;
            }
            cost[mask as usize] = best.max(here);
        }
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut nodes = Vec::new();
    let root = tree_from_splits(&best_split, full, &mut nodes);
    let dec = JoinDecomposition::from_nodes(nodes, root)?;
    let report = evaluate(&dec, inst, Semantics::Pruned, None)?;
    debug_assert_eq!(report.peak_tuples, cost[full as usize]);
    Ok(WidthResult {
        width: report.overall_width,
        peak_tuples: report.peak_tuples,
        decomposition: dec,
    })
}

/// Decision procedure over variable subsets: computes boundary relations for
/// variable sets bottom-up (scope sets directly, larger sets from pairs of
/// already-feasible covers, subject to the `b^omega` cap). Sound verdicts;
/// `WidthExceeded` only when the join width exceeds `omega`.
pub fn solve_variable_dp(inst: &Instance, omega: Omega) -> Result<SolveVerdict> {
    solve_variable_dp_with_limit(inst, omega, DEFAULT_VARIABLE_SUBSET_LIMIT)
}

pub fn solve_variable_dp_with_limit(
    inst: &Instance,
    omega: Omega,
    limit: usize,
) -> Result<SolveVerdict> {
    if inst.num_constraints() == 0 {
        return Err(Error::Degenerate("instance has no constraints".into()));
    }
    let vars: Vec<VarId> = inst.variables().iter().copied().collect();
    let k = vars.len();
    if k > limit || k > 30 {
        return Err(Error::LimitExceeded {
            what: "variable count for subset recurrence",
            limit: limit.min(30) as u64,
            actual: k as u64,
        });
    }
    let pos_of: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let var_mask = |vs: &[VarId]| -> u32 {
        let mut m = 0u32;
        for v in vs {
            m |= 1 << pos_of[v];
        }
        m
    };
    let scope_masks: Vec<u32> = inst
        .constraints()
        .iter()
        .map(|c| var_mask(c.scope().vars()))
        .collect();

    // Lowest-index constraint per scope set.
    let mut scope_owner: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, &m) in scope_masks.iter().enumerate() {
        scope_owner.entry(m).or_insert(i);
    }

    let budget = TupleBudget::new(inst.width_base(), omega);
    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let size = (full as usize) + 1;
    let mut alpha: Vec<Option<Constraint>> = vec![None; size];

    // Boundary of a variable set: its variables that share a constraint with
    // the outside.
    let boundary_of = |mask: u32| -> BTreeSet<VarId> {
        let mut b: u32 = 0;
        for &sm in &scope_masks {
            if sm & !mask != 0 {
                b |= sm & mask;
            }
        }
        (0..k).filter(|&i| b >> i & 1 == 1).map(|i| vars[i]).collect()
    };

    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); k + 1];
    for mask in 1..=full {
        by_size[mask.count_ones() as usize].push(mask);
    }

    for masks in &by_size {
        for &mask in masks {
            if let Some(&ci) = scope_owner.get(&mask) {
                // Prune on the full scope before projecting to the boundary:
                // a second constraint whose scope sits entirely inside this
                // set still has to filter tuples, and projecting first would
                // drop the columns it needs.
                let boundary = boundary_of(mask);
                let rel = project(&prune(inst.constraint(ci), inst), &boundary);
                alpha[mask as usize] = Some(rel);
                continue;
            }
            // Cover pairs: v0 a proper nonempty subset, v1 covering the rest
            // (overlap allowed), both already feasible. The cap decides on
            // the first feasible pair only.
            let boundary = boundary_of(mask);
            let mut v0 = (mask - 1) & mask;
            'outer: while v0 != 0 {
                if alpha[v0 as usize].is_some() {
                    let rest = mask & !v0;
                    // v1 = rest plus any subset of v0, proper and nonempty.
                    let mut t = v0;
                    loop {
                        let v1 = rest | t;
                        if v1 != mask && v1 != 0 && alpha[v1 as usize].is_some() {
                            let joined = natural_join(
                                alpha[v0 as usize].as_ref().unwrap(),
                                alpha[v1 as usize].as_ref().unwrap(),
                            );
                            let rel = prune(&project(&joined, &boundary), inst);
                            if budget.allows(rel.len() as u64) {
                                alpha[mask as usize] = Some(rel);
                            }
                            break 'outer;
                        }
                        if t == 0 {
                            break;
                        }
                        t = (t - 1) & v0;
                    }
                }
                v0 = (v0 - 1) & mask;
            }
        }
    }

    match alpha[full as usize].as_ref() {
        None => Ok(SolveVerdict::WidthExceeded),
        Some(rel) if rel.is_empty() => Ok(SolveVerdict::Unsat),
        Some(_) => Ok(SolveVerdict::Sat),
    }
}

/// Repeatedly pins variables to values and re-solves, extracting a full
/// satisfying assignment from SAT verdicts. Returns `None` on UNSAT.
pub fn solve_and_extract_witness(
    inst: &Instance,
    omega: Omega,
) -> Result<Option<BTreeMap<VarId, Value>>> {
    match solve_variable_dp(inst, omega)? {
        SolveVerdict::Unsat => return Ok(None),
        SolveVerdict::WidthExceeded => {
            return Err(Error::WidthExceeded(
                "width budget too small to extract a witness".into(),
            ))
        }
        SolveVerdict::Sat => {}
    }
    let mut fixed: BTreeMap<VarId, Value> = BTreeMap::new();
    let mut current = inst.clone();
    for &v in inst.variables() {
        let mut found = false;
        for val in 0..inst.domain_size() as Value {
            let pin = Constraint::new(Scope::new(vec![v])?, [vec![val]])?;
            let candidate = current.with_extra_constraint(pin)?;
            match solve_variable_dp(&candidate, omega)? {
                SolveVerdict::Sat => {
                    fixed.insert(v, val);
                    current = candidate;
                    found = true;
                    break;
                }
                SolveVerdict::Unsat => {}
                SolveVerdict::WidthExceeded => {
                    return Err(Error::WidthExceeded(
                        "width budget too small to extract a witness".into(),
                    ))
                }
            }
        }
        if !found {
            return Err(Error::Unsatisfiable(
                "no value extends the partial witness; verdicts inconsistent".into(),
            ));
        }
    }
    Ok(Some(fixed))
}
