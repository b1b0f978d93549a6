//! Constraints as ordered scopes with duplicate-free tuple relations, and the
//! relational operations everything else is built from: natural join,
//! projection, pruning (semijoin reduction against a whole instance), induced
//! subinstances, and the scope hypergraph.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};

pub type VarId = usize;
pub type Value = u32;
pub type Tuple = Vec<Value>;

/// Ordered sequence of distinct variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    vars: Vec<VarId>,
}

impl Scope {
    pub fn new(vars: Vec<VarId>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &v in &vars {
            if !seen.insert(v) {
                return Err(Error::InvalidScope(format!("variable {v} repeated in scope")));
            }
        }
        Ok(Self { vars })
    }

    pub fn empty() -> Self {
        Self { vars: Vec::new() }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.contains(&v)
    }

    pub fn position(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&u| u == v)
    }

    pub fn as_set(&self) -> BTreeSet<VarId> {
        self.vars.iter().copied().collect()
    }
}

/// A constraint: an ordered scope plus a duplicate-free relation.
///
/// Empty scopes are legal: the relation is then `{}` (unsatisfiable) or
/// `{()}` (tautology).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    scope: Scope,
    tuples: HashSet<Tuple>,
}

impl Constraint {
    pub fn new(scope: Scope, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let arity = scope.len();
        let mut set = HashSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::InvalidConstraint(format!(
                    "tuple of length {} in constraint of arity {arity}",
                    t.len()
                )));
            }
            set.insert(t);
        }
        Ok(Self { scope, tuples: set })
    }

    /// The empty-scope constraint with relation `{()}`.
    pub fn tautology() -> Self {
        Self {
            scope: Scope::empty(),
            tuples: [Vec::new()].into_iter().collect(),
        }
    }

    /// The empty-scope constraint with relation `{}`.
    pub fn contradiction() -> Self {
        Self {
            scope: Scope::empty(),
            tuples: HashSet::new(),
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn tuples(&self) -> &HashSet<Tuple> {
        &self.tuples
    }

    /// Number of tuples in the relation.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Tuples in lexicographic order, for deterministic output.
    pub fn sorted_tuples(&self) -> Vec<Tuple> {
        let mut ts: Vec<Tuple> = self.tuples.iter().cloned().collect();
        ts.sort();
        ts
    }
}

/// Natural join. The result scope is `S(c1)` followed by `S(c2) \ S(c1)`.
pub fn natural_join(c1: &Constraint, c2: &Constraint) -> Constraint {
    join_limited(c1, c2, u64::MAX).expect("unbounded join cannot exceed the cap")
}

/// Natural join that bails out once the output exceeds `cap` tuples.
pub(crate) fn join_limited(c1: &Constraint, c2: &Constraint, cap: u64) -> Option<Constraint> {
    // Positions of the shared variables, in c1's scope order.
    let mut shared1 = Vec::new();
    let mut shared2 = Vec::new();
    for (p1, &v) in c1.scope.vars().iter().enumerate() {
        if let Some(p2) = c2.scope.position(v) {
            shared1.push(p1);
            shared2.push(p2);
        }
    }
    let extra2: Vec<usize> = (0..c2.scope.len())
        .filter(|p| !shared2.contains(p))
        .collect();

    let mut scope_vars = c1.scope.vars().to_vec();
    scope_vars.extend(extra2.iter().map(|&p| c2.scope.vars()[p]));
    let scope = Scope { vars: scope_vars };

    let mut by_key: HashMap<Tuple, Vec<&Tuple>> = HashMap::new();
    for t in &c2.tuples {
        let key: Tuple = shared2.iter().map(|&p| t[p]).collect();
        by_key.entry(key).or_default().push(t);
    }

    let mut out: HashSet<Tuple> = HashSet::new();
    for t1 in &c1.tuples {
        let key: Tuple = shared1.iter().map(|&p| t1[p]).collect();
        if let Some(matches) = by_key.get(&key) {
            for t2 in matches {
                let mut t = t1.clone();
                t.extend(extra2.iter().map(|&p| t2[p]));
                out.insert(t);
                if out.len() as u64 > cap {
                    return None;
                }
            }
        }
    }
    Some(Constraint { scope, tuples: out })
}

/// Projects a constraint onto the variables of `vars` that occur in its
/// scope, preserving scope order and removing duplicate tuples. Projecting a
/// nonempty relation onto disjoint variables yields the tautology `{()}`;
/// projecting an empty relation yields the empty-scope empty relation.
pub fn project(c: &Constraint, vars: &BTreeSet<VarId>) -> Constraint {
    let keep: Vec<usize> = c
        .scope
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| vars.contains(v))
        .map(|(p, _)| p)
        .collect();
    if keep.len() == c.scope.len() {
        return c.clone();
    }
    let scope = Scope {
        vars: keep.iter().map(|&p| c.scope.vars()[p]).collect(),
    };
    let tuples: HashSet<Tuple> = c
        .tuples
        .iter()
        .map(|t| keep.iter().map(|&p| t[p]).collect())
        .collect();
    Constraint { scope, tuples }
}

/// Semijoin reduction: keeps a tuple of `c` iff for every constraint `c'` of
/// the instance its restriction to the shared variables appears in the
/// projection of `c'` onto `S(c)`.
pub fn prune(c: &Constraint, inst: &Instance) -> Constraint {
    // Per instance constraint: positions of the shared variables in c's
    // scope, plus the allowed value combinations (in the same order).
    let mut filters: Vec<(Vec<usize>, HashSet<Tuple>)> = Vec::new();
    for c2 in &inst.constraints {
        let mut pos_c = Vec::new();
        let mut pos_c2 = Vec::new();
        for (p, &v) in c.scope.vars().iter().enumerate() {
            if let Some(p2) = c2.scope.position(v) {
                pos_c.push(p);
                pos_c2.push(p2);
            }
        }
        if pos_c.is_empty() {
            // Projection onto disjoint variables: {()} if c2 is nonempty
            // (no tuple removed), {} if c2 is empty (every tuple removed).
            if c2.is_empty() {
                return Constraint {
                    scope: c.scope.clone(),
                    tuples: HashSet::new(),
                };
            }
            continue;
        }
        let allowed: HashSet<Tuple> = c2
            .tuples
            .iter()
            .map(|t| pos_c2.iter().map(|&p| t[p]).collect())
            .collect();
        filters.push((pos_c, allowed));
    }
    let tuples: HashSet<Tuple> = c
        .tuples
        .iter()
        .filter(|t| {
            filters.iter().all(|(pos, allowed)| {
                let key: Tuple = pos.iter().map(|&p| t[p]).collect();
                allowed.contains(&key)
            })
        })
        .cloned()
        .collect();
    Constraint {
        scope: c.scope.clone(),
        tuples,
    }
}

/// Reorders a constraint's scope to `order` (a permutation of its scope).
pub fn reordered(c: &Constraint, order: &[VarId]) -> Result<Constraint> {
    if order.len() != c.scope.len() || !order.iter().all(|&v| c.scope.contains(v)) {
        return Err(Error::InvalidScope(
            "reorder target is not a permutation of the scope".into(),
        ));
    }
    let pos: Vec<usize> = order
        .iter()
        .map(|&v| c.scope.position(v).unwrap())
        .collect();
    let tuples: HashSet<Tuple> = c
        .tuples
        .iter()
        .map(|t| pos.iter().map(|&p| t[p]).collect())
        .collect();
    Ok(Constraint {
        scope: Scope {
            vars: order.to_vec(),
        },
        tuples,
    })
}

/// A CSP instance: named variables and domain values, a set of active
/// variables, and an indexed list of constraints. Induced subinstances share
/// the name tables of their parent and restrict the active set.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    variable_names: Vec<String>,
    domain_names: Vec<String>,
    active: BTreeSet<VarId>,
    constraints: Vec<Constraint>,
}

impl Instance {
    /// Builds an instance over all named variables. Every variable must occur
    /// in the scope of at least one constraint, and every value index must be
    /// within the domain.
    pub fn new(
        variable_names: Vec<String>,
        domain_names: Vec<String>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let active: BTreeSet<VarId> = (0..variable_names.len()).collect();
        Self::with_active(variable_names, domain_names, active, constraints)
    }

    pub(crate) fn with_active(
        variable_names: Vec<String>,
        domain_names: Vec<String>,
        active: BTreeSet<VarId>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let num_vals = domain_names.len() as Value;
        let mut occurs: BTreeSet<VarId> = BTreeSet::new();
        for (i, c) in constraints.iter().enumerate() {
            for &v in c.scope().vars() {
                if !active.contains(&v) {
                    return Err(Error::InvalidInstance(format!(
                        "constraint {i} mentions variable {v} outside the instance"
                    )));
                }
                occurs.insert(v);
            }
            for t in c.tuples() {
                for &val in t {
                    if val >= num_vals {
                        return Err(Error::InvalidInstance(format!(
                            "constraint {i} uses value index {val} outside the domain"
                        )));
                    }
                }
            }
        }
        for &v in &active {
            if !occurs.contains(&v) {
                return Err(Error::InvalidInstance(format!(
                    "variable {v} occurs in no constraint scope"
                )));
            }
        }
        if active.iter().any(|&v| v >= variable_names.len()) {
            return Err(Error::InvalidInstance("variable id out of range".into()));
        }
        Ok(Self {
            variable_names,
            domain_names,
            active,
            constraints,
        })
    }

    /// Active variable set `V(I)`.
    pub fn variables(&self) -> &BTreeSet<VarId> {
        &self.active
    }

    pub fn num_variables(&self) -> usize {
        self.active.len()
    }

    pub fn variable_name(&self, v: VarId) -> &str {
        &self.variable_names[v]
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn domain_names(&self) -> &[String] {
        &self.domain_names
    }

    pub fn domain_size(&self) -> usize {
        self.domain_names.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, i: usize) -> &Constraint {
        &self.constraints[i]
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Largest relation size over all constraints. Errors on an instance
    /// with no constraints.
    pub fn max_tuples(&self) -> Result<u64> {
        self.constraints
            .iter()
            .map(|c| c.len() as u64)
            .max()
            .ok_or_else(|| Error::Degenerate("instance has no constraints".into()))
    }

    /// Width base `max(tup, 2)`.
    pub fn width_base(&self) -> u64 {
        self.constraints
            .iter()
            .map(|c| c.len() as u64)
            .max()
            .unwrap_or(0)
            .max(2)
    }

    /// Same instance with one constraint appended (scope must stay within
    /// the active variables).
    pub fn with_extra_constraint(&self, c: Constraint) -> Result<Instance> {
        let mut constraints = self.constraints.clone();
        constraints.push(c);
        Instance::with_active(
            self.variable_names.clone(),
            self.domain_names.clone(),
            self.active.clone(),
            constraints,
        )
    }
}

/// Induced subinstance `I[vars]`: every constraint projected onto `vars`,
/// constraint indices preserved.
pub fn induced_subinstance(inst: &Instance, vars: &BTreeSet<VarId>) -> Result<Instance> {
    if !vars.is_subset(inst.variables()) {
        return Err(Error::InvalidInstance(
            "induced variable set is not a subset of the instance variables".into(),
        ));
    }
    let constraints = inst.constraints.iter().map(|c| project(c, vars)).collect();
    Instance::with_active(
        inst.variable_names.clone(),
        inst.domain_names.clone(),
        vars.clone(),
        constraints,
    )
}

/// The scope hypergraph: vertices are the active variables, edges the scope
/// sets (one per constraint, kept as a multiset).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub vertices: BTreeSet<VarId>,
    pub edges: Vec<BTreeSet<VarId>>,
}

pub fn hypergraph(inst: &Instance) -> Hypergraph {
    Hypergraph {
        vertices: inst.variables().clone(),
        edges: inst
            .constraints
            .iter()
            .map(|c| c.scope().as_set())
            .collect(),
    }
}

/// Joins all constraints (in index order) and reorders the result onto the
/// sorted active variables: the solution relation, computed relationally.
pub fn solutions_via_joins(inst: &Instance) -> Result<Constraint> {
    if inst.constraints.is_empty() {
        return Err(Error::Degenerate("instance has no constraints".into()));
    }
    let mut acc = inst.constraints[0].clone();
    for c in &inst.constraints[1..] {
        acc = natural_join(&acc, c);
    }
    let order: Vec<VarId> = inst.variables().iter().copied().collect();
    reordered(&acc, &order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(scope: &[VarId], tuples: &[&[Value]]) -> Constraint {
        Constraint::new(
            Scope::new(scope.to_vec()).unwrap(),
            tuples.iter().map(|t| t.to_vec()),
        )
        .unwrap()
    }

    fn tupset(ts: &[&[Value]]) -> HashSet<Tuple> {
        ts.iter().map(|t| t.to_vec()).collect()
    }

    /// Three variables a=0, b=1, c=2 over domain {1..n} (0-indexed values),
    /// scopes (a,b), (b,c), (a,c), each relation {(1,i)} ∪ {(i,1)}.
    fn triangle(n: Value) -> Instance {
        let rel: Vec<Vec<Value>> = (0..n)
            .flat_map(|i| [vec![0, i], vec![i, 0]])
            .collect();
        let mk = |s: &[VarId]| {
            Constraint::new(Scope::new(s.to_vec()).unwrap(), rel.iter().cloned()).unwrap()
        };
        Instance::new(
            vec!["a".into(), "b".into(), "c".into()],
            (1..=n).map(|i| i.to_string()).collect(),
            vec![mk(&[0, 1]), mk(&[1, 2]), mk(&[0, 2])],
        )
        .unwrap()
    }

    #[test]
    fn scope_rejects_duplicates() {
        assert!(Scope::new(vec![0, 1, 0]).is_err());
        assert!(Scope::new(vec![0, 1, 2]).is_ok());
    }

    #[test]
    fn constraint_dedups_and_checks_arity() {
        let con = c(&[0, 1], &[&[0, 1], &[0, 1], &[1, 0]]);
        assert_eq!(con.len(), 2);
        assert!(Constraint::new(Scope::new(vec![0]).unwrap(), [vec![0, 1]]).is_err());
    }

    #[test]
    fn join_scope_order_and_matching() {
        let c1 = c(&[0, 1], &[&[0, 0], &[0, 1], &[1, 0]]);
        let c2 = c(&[1, 2], &[&[0, 0], &[1, 1]]);
        let j = natural_join(&c1, &c2);
        assert_eq!(j.scope().vars(), &[0, 1, 2]);
        assert_eq!(
            j.tuples(),
            &tupset(&[&[0, 0, 0], &[0, 1, 1], &[1, 0, 0]])
        );
    }

    #[test]
    fn join_with_tautology_and_contradiction() {
        let c1 = c(&[0], &[&[0], &[1]]);
        let j = natural_join(&c1, &Constraint::tautology());
        assert_eq!(j.scope().vars(), &[0]);
        assert_eq!(j.len(), 2);
        let j = natural_join(&c1, &Constraint::contradiction());
        assert!(j.is_empty());
    }

    #[test]
    fn join_disjoint_is_cross_product() {
        let c1 = c(&[0], &[&[0], &[1]]);
        let c2 = c(&[1], &[&[0], &[1], &[2]]);
        let j = natural_join(&c1, &c2);
        assert_eq!(j.len(), 6);
    }

    #[test]
    fn triangle_root_join_has_eleven_tuples() {
        let inst = triangle(3);
        let xy = natural_join(inst.constraint(0), inst.constraint(1));
        let root = natural_join(&xy, inst.constraint(2));
        assert_eq!(xy.len(), 11);
        assert_eq!(root.len(), 7);
    }

    #[test]
    fn projection_intersects_with_scope() {
        let inst = triangle(3);
        let xy = natural_join(inst.constraint(0), inst.constraint(1));
        // The 11-tuple join over (a,b,c) keeps 9 distinct tuples over (a,c).
        let p = project(&xy, &[0, 2].into_iter().collect());
        assert_eq!(p.scope().vars(), &[0, 2]);
        assert_eq!(p.len(), 9);
    }

    #[test]
    fn projection_empty_scope_rules() {
        let nonempty = c(&[0, 1], &[&[0, 0]]);
        let p = project(&nonempty, &BTreeSet::from([7]));
        assert!(p.scope().is_empty());
        assert_eq!(p.tuples(), &tupset(&[&[]]));

        let empty = c(&[0, 1], &[]);
        let p = project(&empty, &BTreeSet::new());
        assert!(p.scope().is_empty());
        assert!(p.is_empty());
    }

    #[test]
    fn prune_keeps_only_supported_tuples() {
        let inst = triangle(3);
        let xy = natural_join(inst.constraint(0), inst.constraint(1));
        let proj = project(&xy, &[0, 2].into_iter().collect());
        let pruned = prune(&proj, &inst);
        assert_eq!(
            pruned.tuples(),
            &tupset(&[&[0, 0], &[0, 1], &[0, 2], &[1, 0], &[2, 0]])
        );
    }

    #[test]
    fn prune_respects_scope_order_mismatch() {
        // c over (a,b), filter constraint over (b,a): membership must align
        // the variable orders, not compare raw tuples.
        let target = c(&[0, 1], &[&[0, 1], &[1, 0]]);
        let filt = c(&[1, 0], &[&[1, 0]]);
        let inst = Instance::new(
            vec!["a".into(), "b".into()],
            vec!["0".into(), "1".into()],
            vec![target.clone(), filt],
        )
        .unwrap();
        let pruned = prune(&target, &inst);
        assert_eq!(pruned.tuples(), &tupset(&[&[0, 1]]));
    }

    #[test]
    fn prune_against_empty_disjoint_constraint() {
        let target = c(&[0], &[&[0], &[1]]);
        let other = c(&[1], &[]);
        let inst = Instance::new(
            vec!["a".into(), "b".into()],
            vec!["0".into(), "1".into()],
            vec![target.clone(), other],
        )
        .unwrap();
        assert!(prune(&target, &inst).is_empty());
    }

    #[test]
    fn prune_is_idempotent_here() {
        let inst = triangle(2);
        for con in inst.constraints() {
            let once = prune(con, &inst);
            let twice = prune(&once, &inst);
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn instance_validation() {
        // variable with no occurrence
        assert!(Instance::new(
            vec!["a".into(), "b".into()],
            vec!["0".into()],
            vec![c(&[0], &[&[0]])],
        )
        .is_err());
        // value outside domain
        assert!(Instance::new(
            vec!["a".into()],
            vec!["0".into()],
            vec![c(&[0], &[&[1]])],
        )
        .is_err());
    }

    #[test]
    fn induced_subinstance_projects_everything() {
        let inst = triangle(2);
        let sub = induced_subinstance(&inst, &[0, 1].into_iter().collect()).unwrap();
        assert_eq!(sub.variables(), &BTreeSet::from([0, 1]));
        assert_eq!(sub.num_constraints(), 3);
        assert_eq!(sub.constraint(0).scope().vars(), &[0, 1]);
        assert_eq!(sub.constraint(1).scope().vars(), &[1]);
        assert_eq!(sub.constraint(2).scope().vars(), &[0]);
    }

    #[test]
    fn hypergraph_is_scope_multiset() {
        let inst = triangle(2);
        let h = hypergraph(&inst);
        assert_eq!(h.vertices, BTreeSet::from([0, 1, 2]));
        assert_eq!(h.edges.len(), 3);
        assert_eq!(h.edges[0], BTreeSet::from([0, 1]));
    }

    #[test]
    fn max_tuples_and_base() {
        let inst = triangle(3);
        assert_eq!(inst.max_tuples().unwrap(), 5);
        assert_eq!(inst.width_base(), 5);
        let single = triangle(1);
        assert_eq!(single.max_tuples().unwrap(), 1);
        assert_eq!(single.width_base(), 2);
    }

    #[test]
    fn solutions_of_triangle() {
        let sol = solutions_via_joins(&triangle(3)).unwrap();
        assert_eq!(sol.scope().vars(), &[0, 1, 2]);
        assert_eq!(
            sol.tuples(),
            &tupset(&[
                &[0, 0, 0],
                &[0, 0, 1],
                &[0, 0, 2],
                &[0, 1, 0],
                &[0, 2, 0],
                &[1, 0, 0],
                &[2, 0, 0]
            ])
        );
    }

    #[test]
    fn reorder_permutes_tuples() {
        let con = c(&[0, 1], &[&[0, 1]]);
        let r = reordered(&con, &[1, 0]).unwrap();
        assert_eq!(r.scope().vars(), &[1, 0]);
        assert_eq!(r.tuples(), &tupset(&[&[1, 0]]));
        assert!(reordered(&con, &[0, 2]).is_err());
    }
}
