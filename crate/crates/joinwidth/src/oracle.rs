//! Independent ground truth: exhaustive solution enumeration over raw
//! assignments, exhaustive search over all leaf-labeled binary join trees,
//! and exact branchwidth (by tree enumeration at small size, and by a subset
//! recurrence for larger edge counts).

use std::collections::HashSet;

use crate::decomposition::{evaluate, DecompNode, JoinDecomposition, Semantics, WidthResult};
use crate::error::{Error, Result};
use crate::relation::{Constraint, Hypergraph, Instance, Scope, Tuple, VarId};
use crate::width::width_value;

/// Default cap on the number of assignments enumerated.
pub const DEFAULT_ASSIGNMENT_BUDGET: u64 = 10_000_000;

/// Largest leaf count for exhaustive tree enumeration.
pub const TREE_ENUMERATION_LIMIT: usize = 6;

/// Assignment budget, overridable through `JW_ORACLE_BUDGET`.
pub fn default_assignment_budget() -> u64 {
    std::env::var("JW_ORACLE_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_ASSIGNMENT_BUDGET)
}

/// The solution relation over the sorted active variables.
pub type SolutionRelation = Constraint;

/// Enumerates every assignment of the active variables and keeps those
/// satisfying all constraints. Errors when `|D|^|V|` exceeds the budget.
pub fn enumerate_solutions(inst: &Instance) -> Result<SolutionRelation> {
    enumerate_solutions_budgeted(inst, default_assignment_budget())
}

pub fn enumerate_solutions_budgeted(inst: &Instance, budget: u64) -> Result<SolutionRelation> {
    let vars: Vec<VarId> = inst.variables().iter().copied().collect();
    let d = inst.domain_size() as u64;
    let mut total: u64 = 1;
    for _ in &vars {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= budget)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "assignment space {d}^{} exceeds budget {budget}",
                    vars.len()
                ))
            })?;
    }

    // Per constraint: positions of its scope within the sorted variables.
    let checks: Vec<(Vec<usize>, &HashSet<Tuple>)> = inst
        .constraints()
        .iter()
        .map(|c| {
            let pos = c
                .scope()
                .vars()
                .iter()
                .map(|v| vars.binary_search(v).expect("scope within active vars"))
                .collect();
            (pos, c.tuples())
        })
        .collect();

    let mut sols: HashSet<Tuple> = HashSet::new();
    let mut t: Tuple = vec![0; vars.len()];
    for _ in 0..total {
        let ok = checks.iter().all(|(pos, tuples)| {
            let key: Tuple = pos.iter().map(|&p| t[p]).collect();
            tuples.contains(&key)
        });
        if ok {
            sols.insert(t.clone());
        }
        for p in (0..t.len()).rev() {
            t[p] += 1;
            if (t[p] as u64) < d {
                break;
            }
            t[p] = 0;
        }
    }
    Constraint::new(Scope::new(vars)?, sols)
}

/// All rooted binary trees with the given leaf labels, enumerated canonically
/// (the first label always sits in the left subtree), so each unordered shape
/// appears exactly once and in a deterministic order.
pub fn all_join_trees(labels: &[usize]) -> Vec<JoinDecomposition> {
    fn rec(labels: &[usize], out: &mut Vec<Vec<DecompNode>>) {
        if labels.len() == 1 {
            out.push(vec![DecompNode::Leaf(labels[0])]);
            return;
        }
        let first = labels[0];
        let rest = &labels[1..];
        // Left subtree takes the first label plus any proper subset of the rest.
        for pick in 0..(1u32 << rest.len()) - 1 {
            let mut left = vec![first];
            let mut right = Vec::new();
            for (i, &l) in rest.iter().enumerate() {
                if pick >> i & 1 == 1 {
                    left.push(l);
                } else {
                    right.push(l);
                }
            }
            let mut lefts = Vec::new();
            rec(&left, &mut lefts);
            let mut rights = Vec::new();
            rec(&right, &mut rights);
            for lt in &lefts {
                for rt in &rights {
                    let mut nodes = lt.clone();
                    let off = nodes.len();
                    nodes.extend(rt.iter().map(|n| match *n {
                        DecompNode::Leaf(l) => DecompNode::Leaf(l),
                        DecompNode::Internal(a, b) => DecompNode::Internal(a + off, b + off),
                    }));
                    nodes.push(DecompNode::Internal(off - 1, nodes.len() - 1));
                    out.push(nodes);
                }
            }
        }
    }
    assert!(!labels.is_empty());
    let mut shapes = Vec::new();
    rec(labels, &mut shapes);
    shapes
        .into_iter()
        .map(|nodes| {
            let root = nodes.len() - 1;
            JoinDecomposition::from_nodes(nodes, root).expect("enumerated tree is well formed")
        })
        .collect()
}

fn brute_force_joinwidth_impl(inst: &Instance, linear_only: bool) -> Result<WidthResult> {
    let n = inst.num_constraints();
    if n == 0 {
        return Err(Error::Degenerate("instance has no constraints".into()));
    }
    if n > TREE_ENUMERATION_LIMIT {
        return Err(Error::LimitExceeded {
            what: "constraint count for exhaustive tree search",
            limit: TREE_ENUMERATION_LIMIT as u64,
            actual: n as u64,
        });
    }
    let labels: Vec<usize> = (0..n).collect();
    let mut best: Option<WidthResult> = None;
    for dec in all_join_trees(&labels) {
        if linear_only && !dec.is_linear() {
            continue;
        }
        let report = evaluate(&dec, inst, Semantics::Pruned, None)?;
        let better = match &best {
            None => true,
            Some(b) => report.peak_tuples < b.peak_tuples,
        };
        if better {
            best = Some(WidthResult {
                width: report.overall_width,
                peak_tuples: report.peak_tuples,
                decomposition: dec,
            });
        }
    }
    Ok(best.expect("at least one tree enumerated"))
}

/// Minimum pruned width over every join decomposition (ties resolved by
/// enumeration order).
pub fn brute_force_joinwidth(inst: &Instance) -> Result<WidthResult> {
    brute_force_joinwidth_impl(inst, false)
}

/// Minimum pruned width over linear decompositions only.
pub fn brute_force_joinwidth_linear(inst: &Instance) -> Result<WidthResult> {
    brute_force_joinwidth_impl(inst, true)
}

/// Size of the boundary `delta(F)`: vertices lying in an edge of `F` and in
/// an edge outside `F`.
fn cut_size(h: &Hypergraph, in_cut: &[bool]) -> u64 {
    let mut inn: HashSet<VarId> = HashSet::new();
    let mut out: HashSet<VarId> = HashSet::new();
    for (i, e) in h.edges.iter().enumerate() {
        if in_cut[i] {
            inn.extend(e);
        } else {
            out.extend(e);
        }
    }
    inn.intersection(&out).count() as u64
}

/// Exact branchwidth by enumerating branch decompositions (all trees, or
/// caterpillars only). A single-edge hypergraph has branchwidth 0.
pub fn brute_force_branchwidth(h: &Hypergraph, linear_only: bool) -> Result<u64> {
    let m = h.edges.len();
    if m == 0 {
        return Err(Error::Degenerate("hypergraph has no edges".into()));
    }
    if m > TREE_ENUMERATION_LIMIT {
        return Err(Error::LimitExceeded {
            what: "edge count for exhaustive branch decomposition search",
            limit: TREE_ENUMERATION_LIMIT as u64,
            actual: m as u64,
        });
    }
    if m == 1 {
        return Ok(0);
    }
    let labels: Vec<usize> = (0..m).collect();
    let mut best = u64::MAX;
    for dec in all_join_trees(&labels) {
        if linear_only && !dec.is_linear() {
            continue;
        }
        // Leaf sets below every non-root node are the cuts.
        let mut leafsets: Vec<Vec<bool>> = Vec::with_capacity(dec.num_nodes());
        let mut widest = 0;
        for (i, node) in dec.nodes().iter().enumerate() {
            let set = match *node {
                DecompNode::Leaf(l) => {
                    let mut s = vec![false; m];
                    s[l] = true;
                    s
                }
                DecompNode::Internal(a, b) => {
                    let mut s = leafsets[a].clone();
                    for (x, y) in s.iter_mut().zip(&leafsets[b]) {
                        *x = *x || *y;
                    }
                    s
                }
            };
            if i != dec.root() {
                widest = widest.max(cut_size(h, &set));
            }
            leafsets.push(set);
        }
        best = best.min(widest);
    }
    Ok(best)
}

/// Exact branchwidth by a recurrence over edge subsets; handles edge counts
/// beyond the tree-enumeration limit. Cross-checked against the enumeration
/// in tests.
pub fn branchwidth_subset_dp(h: &Hypergraph) -> Result<u64> {
    let m = h.edges.len();
    if m == 0 {
        return Err(Error::Degenerate("hypergraph has no edges".into()));
    }
    if m == 1 {
        return Ok(0);
    }
    if m > 24 {
        return Err(Error::LimitExceeded {
            what: "edge count for branchwidth recurrence",
            limit: 24,
            actual: m as u64,
        });
    }
    let full: u32 = (1u32 << m) - 1;
    let mut delta = vec![0u64; (full + 1) as usize];
    for mask in 1..=full {
        let mut in_cut = vec![false; m];
        for i in 0..m {
            in_cut[i] = mask >> i & 1 == 1;
        }
        delta[mask as usize] = cut_size(h, &in_cut);
    }
    // cost[F] = max(delta(F), min over splits of max child cost)
    let mut cost = vec![u64::MAX; (full + 1) as usize];
    for mask in 1..=full {
        if mask.count_ones() == 1 {
            cost[mask as usize] = delta[mask as usize];
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let mut best = u64::MAX;
        let mut sub = (mask - 1) & mask;
        while sub != 0 {
            if sub & low != 0 && sub != mask {
                let other = mask ^ sub;
                best = best.min(cost[sub as usize].max(cost[other as usize]));
            }
            sub = (sub - 1) & mask;
        }
        cost[mask as usize] = best.max(delta[mask as usize]);
    }
    Ok(cost[full as usize])
}

/// Width (in the instance base) of a relation with `count` tuples.
pub fn width_of_count(inst: &Instance, count: u64) -> f64 {
    width_value(count, inst.width_base())
}
