//! Join decompositions: rooted binary trees whose leaves are labeled
//! bijectively with constraint indices, plus the three evaluation semantics
//! (naive joins, projected, pruned) and their node widths.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::relation::{
    join_limited, natural_join, project, prune, Constraint, Instance, VarId,
};
use crate::width::{width_value, Omega, TupleBudget};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompNode {
    /// Leaf labeled with a constraint index.
    Leaf(usize),
    /// Internal node with two children (arena indices).
    Internal(usize, usize),
}

/// Arena-backed rooted binary tree. Children always precede their parent, so
/// iterating the arena in index order is a valid bottom-up order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinDecomposition {
    nodes: Vec<DecompNode>,
    root: usize,
}

impl JoinDecomposition {
    /// Builds a tree from an arena. Checks tree shape: children precede
    /// parents, every non-root node is referenced exactly once, the root is
    /// referenced never.
    pub fn from_nodes(nodes: Vec<DecompNode>, root: usize) -> Result<Self> {
        let mut violations = Vec::new();
        if root >= nodes.len() {
            return Err(Error::InvalidDecomposition(vec![format!(
                "root index {root} out of range"
            )]));
        }
        let mut refs = vec![0usize; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let DecompNode::Internal(l, r) = *n {
                if l >= i || r >= i {
                    violations.push(format!("node {i} has a child not preceding it"));
                } else {
                    refs[l] += 1;
                    refs[r] += 1;
                }
                if l == r {
                    violations.push(format!("node {i} has identical children"));
                }
            }
        }
        for (i, &r) in refs.iter().enumerate() {
            if i == root && r != 0 {
                violations.push(format!("root {i} is referenced as a child"));
            } else if i != root && r != 1 {
                violations.push(format!("node {i} is referenced {r} times"));
            }
        }
        if violations.is_empty() {
            Ok(Self { nodes, root })
        } else {
            Err(Error::InvalidDecomposition(violations))
        }
    }

    /// Single-leaf tree.
    pub fn single(label: usize) -> Self {
        Self {
            nodes: vec![DecompNode::Leaf(label)],
            root: 0,
        }
    }

    /// Linear (caterpillar) tree: the first two labels join first, every
    /// subsequent label joins the running spine. Labels must be distinct.
    pub fn linear_from_order(order: &[usize]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &l in order {
            if !seen.insert(l) {
                return Err(Error::InvalidDecomposition(vec![format!(
                    "label {l} repeated in linear order"
                )]));
            }
        }
        if order.is_empty() {
            return Err(Error::InvalidDecomposition(vec![
                "linear order is empty".into()
            ]));
        }
        let mut nodes = vec![DecompNode::Leaf(order[0])];
        let mut spine = 0;
        for &l in &order[1..] {
            nodes.push(DecompNode::Leaf(l));
            let leaf = nodes.len() - 1;
            nodes.push(DecompNode::Internal(spine, leaf));
            spine = nodes.len() - 1;
        }
        Ok(Self { nodes, root: spine })
    }

    /// Uniformly-seeded random tree over the given labels.
    pub fn random<R: Rng>(labels: &[usize], rng: &mut R) -> Self {
        fn build<R: Rng>(labels: &mut Vec<usize>, nodes: &mut Vec<DecompNode>, rng: &mut R) -> usize {
            if labels.len() == 1 {
                nodes.push(DecompNode::Leaf(labels[0]));
                return nodes.len() - 1;
            }
            labels.shuffle(rng);
            let cut = rng.gen_range(1..labels.len());
            let mut right: Vec<usize> = labels.split_off(cut);
            let l = build(labels, nodes, rng);
            let r = build(&mut right, nodes, rng);
            nodes.push(DecompNode::Internal(l, r));
            nodes.len() - 1
        }
        assert!(!labels.is_empty());
        let mut labels = labels.to_vec();
        let mut nodes = Vec::new();
        let root = build(&mut labels, &mut nodes, rng);
        Self { nodes, root }
    }

    pub fn nodes(&self) -> &[DecompNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_labels(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                DecompNode::Leaf(l) => Some(*l),
                _ => None,
            })
            .collect()
    }

    /// A linear tree: every internal node has at least one leaf child.
    pub fn is_linear(&self) -> bool {
        self.nodes.iter().all(|n| match *n {
            DecompNode::Leaf(_) => true,
            DecompNode::Internal(l, r) => {
                matches!(self.nodes[l], DecompNode::Leaf(_))
                    || matches!(self.nodes[r], DecompNode::Leaf(_))
            }
        })
    }

    /// Node indices in post-order (left, right, node), ending at the root.
    pub fn postorder(&self) -> Vec<usize> {
        fn walk(nodes: &[DecompNode], at: usize, out: &mut Vec<usize>) {
            if let DecompNode::Internal(l, r) = nodes[at] {
                walk(nodes, l, out);
                walk(nodes, r, out);
            }
            out.push(at);
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        walk(&self.nodes, self.root, &mut out);
        out
    }

    /// Checks the leaf labeling against an instance: labels must be exactly
    /// the constraint indices, each used once.
    pub fn validate(&self, inst: &Instance) -> ValidationReport {
        let mut violations = Vec::new();
        let n = inst.num_constraints();
        let mut used = vec![0usize; n];
        for node in &self.nodes {
            if let DecompNode::Leaf(l) = *node {
                if l >= n {
                    violations.push(format!("leaf label {l} out of range (instance has {n} constraints)"));
                } else {
                    used[l] += 1;
                }
            }
        }
        for (l, &k) in used.iter().enumerate() {
            if k == 0 {
                violations.push(format!("constraint {l} has no leaf"));
            } else if k > 1 {
                violations.push(format!("constraint {l} has {k} leaves"));
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-node index sets: covered constraints `X(j)`, their variables `V(j)`,
/// the variables of the other constraints, and the boundary `S(j)` (the
/// intersection).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSets {
    pub covered: BTreeSet<usize>,
    pub vars: BTreeSet<VarId>,
    pub outside_vars: BTreeSet<VarId>,
    pub boundary: BTreeSet<VarId>,
}

/// Computes `X(j)`, `V(j)`, outside variables and `S(j)` for every node.
pub fn node_sets(dec: &JoinDecomposition, inst: &Instance) -> Result<Vec<NodeSets>> {
    let report = dec.validate(inst);
    if !report.is_valid() {
        return Err(Error::InvalidDecomposition(report.violations));
    }
    let mut sets: Vec<Option<(BTreeSet<usize>, BTreeSet<VarId>)>> = vec![None; dec.num_nodes()];
    for i in 0..dec.num_nodes() {
        let (covered, vars) = match dec.nodes()[i] {
            DecompNode::Leaf(l) => (
                BTreeSet::from([l]),
                inst.constraint(l).scope().as_set(),
            ),
            DecompNode::Internal(a, b) => {
                let (ca, va) = sets[a].as_ref().unwrap();
                let (cb, vb) = sets[b].as_ref().unwrap();
                (
                    ca.union(cb).copied().collect(),
                    va.union(vb).copied().collect(),
                )
            }
        };
        sets[i] = Some((covered, vars));
    }
    Ok(sets
        .into_iter()
        .map(|s| {
            let (covered, vars) = s.unwrap();
            let mut outside_vars = BTreeSet::new();
            for (ci, c) in inst.constraints().iter().enumerate() {
                if !covered.contains(&ci) {
                    outside_vars.extend(c.scope().vars());
                }
            }
            let boundary = vars.intersection(&outside_vars).copied().collect();
            NodeSets {
                covered,
                vars,
                outside_vars,
                boundary,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    /// Pure joins, no projection.
    Naive,
    /// Project each node onto the variables still needed outside it.
    Proj,
    /// Project onto the boundary and semijoin-reduce against the instance.
    Pruned,
}

impl Semantics {
    pub fn name(&self) -> &'static str {
        match self {
            Semantics::Naive => "naive",
            Semantics::Proj => "proj",
            Semantics::Pruned => "pruned",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeEvaluation {
    pub node: usize,
    pub constraint: Constraint,
    pub width: f64,
}

#[derive(Clone, Debug)]
pub struct EvaluationReport {
    pub semantics: Semantics,
    /// Node evaluations in post-order; the last entry is the root.
    pub nodes: Vec<NodeEvaluation>,
    pub overall_width: f64,
    pub peak_tuples: u64,
    /// Pruned evaluation decides satisfiability (root relation nonempty).
    pub satisfiable: Option<bool>,
}

impl EvaluationReport {
    pub fn root_constraint(&self) -> &Constraint {
        &self.nodes.last().expect("report has at least one node").constraint
    }

    pub fn node_constraint(&self, node: usize) -> Option<&Constraint> {
        self.nodes.iter().find(|n| n.node == node).map(|n| &n.constraint)
    }
}

/// Evaluates a decomposition bottom-up under the chosen semantics, streaming
/// node results in post-order through `on_node`. With a width cap, evaluation
/// aborts the moment a node's relation exceeds `floor(b^cap)` tuples.
pub fn evaluate_streaming(
    dec: &JoinDecomposition,
    inst: &Instance,
    semantics: Semantics,
    cap: Option<Omega>,
    mut on_node: impl FnMut(&NodeEvaluation),
) -> Result<EvaluationReport> {
    let sets = node_sets(dec, inst)?;
    let base = inst.width_base();
    let budget = cap.map(|w| TupleBudget::new(base, w));
    let join_cap = budget
        .as_ref()
        .map(|b| b.max_count())
        .unwrap_or(u64::MAX);

    let mut relations: Vec<Option<Constraint>> = vec![None; dec.num_nodes()];
    let mut report_nodes: Vec<NodeEvaluation> = Vec::with_capacity(dec.num_nodes());
    let mut peak: u64 = 0;

    for &j in &dec.postorder() {
        let rel = match dec.nodes()[j] {
            DecompNode::Leaf(l) => {
                let c = inst.constraint(l);
                match semantics {
                    Semantics::Naive => c.clone(),
                    Semantics::Proj => project(c, &sets[j].outside_vars),
                    Semantics::Pruned => prune(&project(c, &sets[j].boundary), inst),
                }
            }
            DecompNode::Internal(a, b) => {
                let ca = relations[a].take().unwrap();
                let cb = relations[b].take().unwrap();
                match semantics {
                    Semantics::Naive => join_limited(&ca, &cb, join_cap).ok_or(
                        Error::WidthCapExceeded {
                            node: j,
                            tuples: join_cap.saturating_add(1),
                            cap: join_cap,
                        },
                    )?,
                    Semantics::Proj => project(&natural_join(&ca, &cb), &sets[j].outside_vars),
                    Semantics::Pruned => {
                        prune(&project(&natural_join(&ca, &cb), &sets[j].boundary), inst)
                    }
                }
            }
        };
        let count = rel.len() as u64;
        if let Some(b) = &budget {
            if !b.allows(count) {
                return Err(Error::WidthCapExceeded {
                    node: j,
                    tuples: count,
                    cap: b.max_count(),
                });
            }
        }
        peak = peak.max(count);
        let eval = NodeEvaluation {
            node: j,
            constraint: rel.clone(),
            width: width_value(count, base),
        };
        on_node(&eval);
        report_nodes.push(eval);
        relations[j] = Some(rel);
    }

    let overall_width = width_value(peak, base);
    let satisfiable = match semantics {
        Semantics::Pruned => Some(!relations[dec.root()].as_ref().unwrap().is_empty()),
        _ => None,
    };
    Ok(EvaluationReport {
        semantics,
        nodes: report_nodes,
        overall_width,
        peak_tuples: peak,
        satisfiable,
    })
}

/// `evaluate_streaming` without a per-node callback.
pub fn evaluate(
    dec: &JoinDecomposition,
    inst: &Instance,
    semantics: Semantics,
    cap: Option<Omega>,
) -> Result<EvaluationReport> {
    evaluate_streaming(dec, inst, semantics, cap, |_| {})
}

/// Result of an exact width computation: the optimal width, the largest node
/// relation size realizing it, and a witnessing decomposition.
#[derive(Clone, Debug)]
pub struct WidthResult {
    pub width: f64,
    pub peak_tuples: u64,
    pub decomposition: JoinDecomposition,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_star, gen_triangle};
    use num_rational::Ratio;

    #[test]
    fn from_nodes_checks_shape() {
        // child after parent
        let r = JoinDecomposition::from_nodes(
            vec![DecompNode::Internal(1, 2), DecompNode::Leaf(0), DecompNode::Leaf(1)],
            0,
        );
        assert!(r.is_err());
        // node referenced twice
        let r = JoinDecomposition::from_nodes(
            vec![
                DecompNode::Leaf(0),
                DecompNode::Internal(0, 0),
            ],
            1,
        );
        assert!(r.is_err());
        let r = JoinDecomposition::from_nodes(
            vec![
                DecompNode::Leaf(0),
                DecompNode::Leaf(1),
                DecompNode::Internal(0, 1),
            ],
            2,
        );
        assert!(r.is_ok());
    }

    #[test]
    fn linear_order_shapes() {
        let d = JoinDecomposition::linear_from_order(&[0, 1, 2]).unwrap();
        assert_eq!(d.num_nodes(), 5);
        assert!(d.is_linear());
        assert_eq!(d.leaf_labels(), vec![0, 1, 2]);
        assert!(JoinDecomposition::linear_from_order(&[0, 0]).is_err());
        assert!(JoinDecomposition::linear_from_order(&[]).is_err());
    }

    #[test]
    fn validate_bijection() {
        let inst = gen_triangle(2).unwrap();
        let good = JoinDecomposition::linear_from_order(&[0, 1, 2]).unwrap();
        assert!(good.validate(&inst).is_valid());
        let missing = JoinDecomposition::linear_from_order(&[0, 1]).unwrap();
        let rep = missing.validate(&inst);
        assert!(!rep.is_valid());
        assert!(rep.violations.iter().any(|v| v.contains("constraint 2")));
        let out_of_range = JoinDecomposition::linear_from_order(&[0, 1, 7]).unwrap();
        assert!(!out_of_range.validate(&inst).is_valid());
    }

    #[test]
    fn node_sets_on_triangle() {
        // Leaves x=(a,b), y=(b,c) joined first, then z=(a,c).
        let inst = gen_triangle(3).unwrap();
        let dec = JoinDecomposition::linear_from_order(&[0, 1, 2]).unwrap();
        let sets = node_sets(&dec, &inst).unwrap();
        // Node 2 is the internal node covering {x, y}.
        assert_eq!(sets[2].covered, BTreeSet::from([0, 1]));
        assert_eq!(sets[2].vars, BTreeSet::from([0, 1, 2]));
        assert_eq!(sets[2].outside_vars, BTreeSet::from([0, 2]));
        assert_eq!(sets[2].boundary, BTreeSet::from([0, 2]));
        // Root covers everything; boundary empty.
        let root = dec.root();
        assert_eq!(sets[root].covered, BTreeSet::from([0, 1, 2]));
        assert!(sets[root].boundary.is_empty());
        // Leaf x: boundary is its full scope (both vars shared).
        assert_eq!(sets[0].boundary, BTreeSet::from([0, 1]));
    }

    #[test]
    fn evaluate_triangle_three_semantics() {
        let inst = gen_triangle(3).unwrap();
        let dec = JoinDecomposition::linear_from_order(&[0, 1, 2]).unwrap();
        let naive = evaluate(&dec, &inst, Semantics::Naive, None).unwrap();
        assert_eq!(naive.node_constraint(2).unwrap().len(), 11);
        assert_eq!(naive.root_constraint().len(), 7);
        let proj = evaluate(&dec, &inst, Semantics::Proj, None).unwrap();
        assert_eq!(proj.node_constraint(2).unwrap().len(), 9);
        let pruned = evaluate(&dec, &inst, Semantics::Pruned, None).unwrap();
        assert_eq!(pruned.node_constraint(2).unwrap().len(), 5);
        assert_eq!(pruned.peak_tuples, 5);
        assert!((pruned.overall_width - 1.0).abs() < 1e-12);
        assert_eq!(pruned.satisfiable, Some(true));
    }

    #[test]
    fn evaluate_star_naive_vs_projected() {
        let inst = gen_star(4).unwrap();
        let dec = JoinDecomposition::linear_from_order(&[0, 1, 2, 3]).unwrap();
        let naive = evaluate(&dec, &inst, Semantics::Naive, None).unwrap();
        assert_eq!(naive.root_constraint().len(), 16);
        assert_eq!(naive.overall_width, 4.0);
        let proj = evaluate(&dec, &inst, Semantics::Proj, None).unwrap();
        assert!(proj.peak_tuples <= 2);
        let pruned = evaluate(&dec, &inst, Semantics::Pruned, None).unwrap();
        assert!(pruned.peak_tuples <= 2);
    }

    #[test]
    fn evaluate_with_cap_aborts() {
        let inst = gen_star(4).unwrap();
        let dec = JoinDecomposition::linear_from_order(&[0, 1, 2, 3]).unwrap();
        let err = evaluate(&dec, &inst, Semantics::Naive, Some(Ratio::from_integer(1))).unwrap_err();
        assert!(matches!(err, Error::WidthCapExceeded { .. }));
        // Pruned evaluation fits within width 1.
        assert!(evaluate(&dec, &inst, Semantics::Pruned, Some(Ratio::from_integer(1))).is_ok());
    }

    #[test]
    fn single_constraint_instance() {
        let one = Instance::new(
            vec!["a".into()],
            vec!["0".into(), "1".into()],
            vec![Constraint::new(
                crate::relation::Scope::new(vec![0]).unwrap(),
                [vec![0], vec![1]],
            )
            .unwrap()],
        )
        .unwrap();
        let dec = JoinDecomposition::single(0);
        let rep = evaluate(&dec, &one, Semantics::Pruned, None).unwrap();
        // Boundary of the only leaf is empty: relation projects to {()}.
        assert_eq!(rep.root_constraint().len(), 1);
        assert_eq!(rep.satisfiable, Some(true));
    }

    #[test]
    fn random_trees_are_well_formed() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..7usize {
            for _ in 0..20 {
                let labels: Vec<usize> = (0..n).collect();
                let d = JoinDecomposition::random(&labels, &mut rng);
                let mut leaves = d.leaf_labels();
                leaves.sort_unstable();
                assert_eq!(leaves, labels);
                assert_eq!(d.num_nodes(), 2 * n - 1);
            }
        }
    }
}
