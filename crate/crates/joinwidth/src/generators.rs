//! Instance families used throughout the tests and benchmarks: small
//! handcrafted families with known widths, reductions from graph branchwidth,
//! a chain family solvable by propagation, and a seeded random family.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{natural_join, project, Constraint, Instance, Scope, Tuple, Value, VarId};

fn numeric_domain(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Triangle family: variables a, b, c over domain [n], scopes (a,b), (b,c),
/// (a,c), each relation {(1,i), (i,1) : i in [n]}.
pub fn gen_triangle(n: u32) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidSpec("triangle needs n >= 1".into()));
    }
    let rel: Vec<Tuple> = (0..n).flat_map(|i| [vec![0, i], vec![i, 0]]).collect();
    let mk = |s: Vec<VarId>| Constraint::new(Scope::new(s).unwrap(), rel.iter().cloned()).unwrap();
    Instance::new(
        vec!["a".into(), "b".into(), "c".into()],
        numeric_domain(n as usize),
        vec![mk(vec![0, 1]), mk(vec![1, 2]), mk(vec![0, 2])],
    )
}

/// Star family: a hub x and omega rays v1..v_omega, each constraint over
/// (x, v_i) with relation {(0,1), (0,0)}.
pub fn gen_star(omega: usize) -> Result<Instance> {
    if omega == 0 {
        return Err(Error::InvalidSpec("star needs omega >= 1".into()));
    }
    let mut names = vec!["x".to_string()];
    names.extend((1..=omega).map(|i| format!("v{i}")));
    let constraints = (1..=omega)
        .map(|i| {
            Constraint::new(
                Scope::new(vec![0, i]).unwrap(),
                [vec![0, 1], vec![0, 0]],
            )
            .unwrap()
        })
        .collect();
    Instance::new(names, vec!["0".into(), "1".into()], constraints)
}

fn check_edges(edges: &[(usize, usize)]) -> Result<()> {
    if edges.is_empty() {
        return Err(Error::InvalidSpec("edge list is empty".into()));
    }
    let mut seen = BTreeSet::new();
    for &(u, v) in edges {
        if u == v {
            return Err(Error::InvalidSpec(format!("self loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidSpec(format!("duplicate edge {u}-{v}")));
        }
    }
    Ok(())
}

/// Complete binary constraints over an arbitrary edge list: one variable per
/// vertex that occurs in an edge, one constraint per edge holding all d^2
/// tuples.
pub fn gen_complete_binary(edges: &[(usize, usize)], d: u32) -> Result<Instance> {
    check_edges(edges)?;
    if d == 0 {
        return Err(Error::InvalidSpec("domain size must be >= 1".into()));
    }
    let mut verts: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    verts.sort_unstable();
    verts.dedup();
    let index = |v: usize| verts.binary_search(&v).unwrap();
    let full: Vec<Tuple> = (0..d)
        .flat_map(|a| (0..d).map(move |b| vec![a, b]))
        .collect();
    let constraints = edges
        .iter()
        .map(|&(u, v)| {
            Constraint::new(
                Scope::new(vec![index(u), index(v)]).unwrap(),
                full.iter().cloned(),
            )
            .unwrap()
        })
        .collect();
    Instance::new(
        verts.iter().map(|v| format!("v{v}")).collect(),
        numeric_domain(d as usize),
        constraints,
    )
}

/// Complete binary constraints over a tree. Errors if the edge list is not a
/// tree (connected, |E| = |V| - 1, simple).
pub fn gen_tree_complete(edges: &[(usize, usize)], d: u32) -> Result<Instance> {
    check_edges(edges)?;
    let mut verts: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    verts.sort_unstable();
    verts.dedup();
    if edges.len() + 1 != verts.len() {
        return Err(Error::InvalidSpec("edge list is not a tree".into()));
    }
    // Union-find connectivity check.
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for &(u, v) in edges {
        let iu = verts.binary_search(&u).unwrap();
        let iv = verts.binary_search(&v).unwrap();
        let (ru, rv) = (find(&mut parent, iu), find(&mut parent, iv));
        if ru == rv {
            return Err(Error::InvalidSpec("edge list is not a tree".into()));
        }
        parent[ru] = rv;
    }
    gen_complete_binary(edges, d)
}

/// Branchwidth reduction: encodes a simple graph G so that join width lines
/// up with the branchwidth of G. Variables are the graph vertices plus two
/// extras a and b; each edge {v_i, v_j} yields a ternary constraint over
/// (a, v_i, v_j) whose tuples pick an "active" vertex index l in [n], doubling
/// the endpoint value exactly when l is that endpoint; a unary constraint on b
/// holds all n + omega values so that tup is padded to n + omega for
/// omega >= 2.
pub fn gen_bw_reduction(edges: &[(usize, usize)], omega: usize) -> Result<Instance> {
    check_edges(edges)?;
    if omega == 0 {
        return Err(Error::InvalidSpec("bw reduction needs omega >= 1".into()));
    }
    let mut verts: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    verts.sort_unstable();
    verts.dedup();
    let n = verts.len();
    let dsize = n + omega;
    // Variable ids: graph vertices first, then a, then b.
    let a = n;
    let b = n + 1;
    let index = |v: usize| verts.binary_search(&v).unwrap();

    let mut constraints = Vec::new();
    for &(u, v) in edges {
        let (i, j) = (index(u), index(v));
        let mut tuples = Vec::new();
        for l in 0..n as Value {
            let vi_opts: &[Value] = if l == i as Value { &[0, 1] } else { &[0] };
            let vj_opts: &[Value] = if l == j as Value { &[0, 1] } else { &[0] };
            for &x in vi_opts {
                for &y in vj_opts {
                    tuples.push(vec![l, x, y]);
                }
            }
        }
        constraints.push(Constraint::new(Scope::new(vec![a, i, j]).unwrap(), tuples).unwrap());
    }
    let padding: Vec<Tuple> = (0..dsize as Value).map(|v| vec![v]).collect();
    constraints.push(Constraint::new(Scope::new(vec![b]).unwrap(), padding).unwrap());

    let mut names: Vec<String> = verts.iter().map(|v| format!("v{v}")).collect();
    names.push("a".into());
    names.push("b".into());
    Instance::new(names, numeric_domain(dsize), constraints)
}

/// Binomial coefficient, for the projection-counterexample parameters.
fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Projection-counterexample family: m = 4*omega + 1, one variable per
/// m-subset S of [2m], one constraint per element i of [2m] whose scope is
/// every variable v_S with i in S; the relation is star-shaped, allowing one
/// scope variable at a time to range over [n] (n = C(2m, m)) with all others
/// pinned to 1.
pub fn gen_agm(omega: usize, allow_large: bool) -> Result<Instance> {
    if omega == 0 {
        return Err(Error::InvalidSpec("projection family needs omega >= 1".into()));
    }
    if omega > 1 && !allow_large {
        return Err(Error::LimitExceeded {
            what: "projection family omega (pass allow_large to override)",
            limit: 1,
            actual: omega as u64,
        });
    }
    let m = 4 * omega + 1;
    let n = binom(2 * m, m);

    // All m-subsets of {0..2m-1} in lexicographic order; the subset's rank is
    // its variable id.
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        subsets.push(cur.clone());
        // Advance to the next combination; position i maxes out at m + i.
        let mut advanced = false;
        for i in (0..m).rev() {
            if cur[i] < m + i {
                cur[i] += 1;
                for j in i + 1..m {
                    cur[j] = cur[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    debug_assert_eq!(subsets.len(), n);

    let names: Vec<String> = subsets
        .iter()
        .map(|s| {
            let parts: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
            format!("s{}", parts.join("_"))
        })
        .collect();

    let mut constraints = Vec::with_capacity(2 * m);
    for i in 0..2 * m {
        let scope_vars: Vec<VarId> = (0..n).filter(|&r| subsets[r].contains(&i)).collect();
        let arity = scope_vars.len();
        let mut tuples: Vec<Tuple> = Vec::with_capacity(arity * (n - 1) + 1);
        tuples.push(vec![0; arity]);
        for p in 0..arity {
            for val in 1..n as Value {
                let mut t = vec![0; arity];
                t[p] = val;
                tuples.push(t);
            }
        }
        constraints.push(Constraint::new(Scope::new(scope_vars).unwrap(), tuples).unwrap());
    }
    Instance::new(names, numeric_domain(n), constraints)
}

/// Chain family over n = 16 * omega variables x_1..x_n with domain [n]:
/// adjacent pairs are strictly increasing, all other pairs carry complete
/// constraints. The unique solution is x_i = i.
pub fn gen_chain(omega: usize, allow_large: bool) -> Result<Instance> {
    if omega == 0 {
        return Err(Error::InvalidSpec("chain needs omega >= 1".into()));
    }
    if omega > 1 && !allow_large {
        return Err(Error::LimitExceeded {
            what: "chain omega (pass allow_large to override)",
            limit: 1,
            actual: omega as u64,
        });
    }
    gen_chain_n(16 * omega)
}

/// Chain family at an explicit length n >= 2 (used to scale tests down).
pub fn gen_chain_n(n: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidSpec("chain needs n >= 2".into()));
    }
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut constraints = Vec::new();
    // Adjacent strictly-increasing constraints first, in order.
    for i in 0..n - 1 {
        let tuples: Vec<Tuple> = (0..n as Value)
            .flat_map(|a| (a + 1..n as Value).map(move |b| vec![a, b]))
            .collect();
        constraints.push(Constraint::new(Scope::new(vec![i, i + 1]).unwrap(), tuples).unwrap());
    }
    // Complete constraints on all non-adjacent pairs.
    let full: Vec<Tuple> = (0..n as Value)
        .flat_map(|a| (0..n as Value).map(move |b| vec![a, b]))
        .collect();
    for l in 0..n {
        for m in l + 2..n {
            constraints
                .push(Constraint::new(Scope::new(vec![l, m]).unwrap(), full.iter().cloned()).unwrap());
        }
    }
    Instance::new(names, numeric_domain(n), constraints)
}

/// Solves a chain-family instance by two sweeps of join-project propagation
/// along the adjacent constraints, then verifies the candidate against every
/// constraint. Returns the assignment in variable order.
pub fn solve_chain_by_propagation(inst: &Instance) -> Result<Vec<Value>> {
    let n = inst.num_variables();
    if n < 2 {
        return Err(Error::InvalidSpec("chain instance needs >= 2 variables".into()));
    }
    // Adjacent constraints are identified by their scope (x_i, x_{i+1}).
    let mut chain: Vec<Option<&Constraint>> = vec![None; n - 1];
    for c in inst.constraints() {
        if let [i, j] = *c.scope().vars() {
            if j == i + 1 && chain[i].is_none() {
                chain[i] = Some(c);
            }
        }
    }
    let chain: Vec<&Constraint> = chain
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidSpec("instance is not chain-shaped".into()))?;

    let only = |v: VarId| BTreeSet::from([v]);
    // Upward sweep: what values each variable can take given its prefix.
    let mut up: Vec<Option<Constraint>> = vec![None; n];
    up[1] = Some(project(chain[0], &only(1)));
    for i in 2..n {
        let prev = up[i - 1].as_ref().unwrap();
        up[i] = Some(project(&natural_join(prev, chain[i - 1]), &only(i)));
    }
    // Downward sweep.
    let mut down: Vec<Option<Constraint>> = vec![None; n];
    down[n - 2] = Some(project(chain[n - 2], &only(n - 2)));
    for i in (0..n - 2).rev() {
        let next = down[i + 1].as_ref().unwrap();
        down[i] = Some(project(&natural_join(next, chain[i]), &only(i)));
    }
    // Combine both sweeps per variable and join everything.
    let mut b: Option<Constraint> = None;
    for i in 0..n {
        let bi = match (i, up[i].as_ref(), down[i].as_ref()) {
            (0, _, Some(d)) => d.clone(),
            (i, Some(u), _) if i == n - 1 => u.clone(),
            (_, Some(u), Some(d)) => natural_join(u, d),
            _ => unreachable!("sweeps cover every variable"),
        };
        b = Some(match b {
            None => bi,
            Some(acc) => natural_join(&acc, &bi),
        });
    }
    let mut cand = b.unwrap();
    // Verify by joining every constraint one at a time.
    for (i, c) in inst.constraints().iter().enumerate() {
        cand = natural_join(&cand, c);
        if cand.is_empty() {
            return Err(Error::Unsatisfiable(format!(
                "candidate eliminated while verifying constraint {i}"
            )));
        }
    }
    let t = cand
        .tuples()
        .iter()
        .next()
        .expect("nonempty after verification")
        .clone();
    // cand's scope is x_0.. in order (built left to right).
    let mut out = vec![0; n];
    for (p, &v) in cand.scope().vars().iter().enumerate() {
        out[v] = t[p];
    }
    Ok(out)
}

/// Parameters of the seeded random family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub num_vars: usize,
    pub domain_size: u32,
    pub num_constraints: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    /// Probability that a given tuple over a scope is included.
    pub density: f64,
}

/// Seeded random instance: scopes cover every variable, relations sample
/// each possible tuple with probability `density`. Identical specs produce
/// identical instances.
pub fn gen_random(spec: &RandomSpec) -> Result<Instance> {
    if spec.num_vars == 0 || spec.domain_size == 0 || spec.num_constraints == 0 {
        return Err(Error::InvalidSpec("vars, domain and constraints must be >= 1".into()));
    }
    if spec.min_arity == 0 || spec.min_arity > spec.max_arity || spec.max_arity > spec.num_vars {
        return Err(Error::InvalidSpec(format!(
            "arity range {}..={} invalid for {} variables",
            spec.min_arity, spec.max_arity, spec.num_vars
        )));
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidSpec("density must be in [0, 1]".into()));
    }
    if spec.num_constraints * spec.max_arity < spec.num_vars {
        return Err(Error::InvalidSpec(
            "not enough scope slots to cover every variable".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Sample arities, then raise them round-robin until the total capacity
    // covers every variable.
    let mut arities: Vec<usize> = (0..spec.num_constraints)
        .map(|_| rng.gen_range(spec.min_arity..=spec.max_arity))
        .collect();
    let mut total: usize = arities.iter().sum();
    let mut i = 0;
    while total < spec.num_vars {
        if arities[i] < spec.max_arity {
            arities[i] += 1;
            total += 1;
        }
        i = (i + 1) % arities.len();
    }

    // Deal a shuffled copy of the variables into the scopes so that each
    // variable occurs somewhere, then fill remaining slots randomly.
    let mut deck: Vec<VarId> = (0..spec.num_vars).collect();
    deck.shuffle(&mut rng);
    let mut scopes: Vec<Vec<VarId>> = vec![Vec::new(); spec.num_constraints];
    let mut next = 0;
    'deal: loop {
        for (ci, scope) in scopes.iter_mut().enumerate() {
            if scope.len() < arities[ci] && next < deck.len() {
                scope.push(deck[next]);
                next += 1;
            }
            if next == deck.len() {
                break 'deal;
            }
        }
    }
    for (ci, scope) in scopes.iter_mut().enumerate() {
        while scope.len() < arities[ci] {
            let v = rng.gen_range(0..spec.num_vars);
            if !scope.contains(&v) {
                scope.push(v);
            }
        }
    }

    let constraints = scopes
        .into_iter()
        .map(|scope| {
            let arity = scope.len();
            let mut tuples = Vec::new();
            let count = (spec.domain_size as u64).pow(arity as u32);
            let mut t = vec![0 as Value; arity];
            for _ in 0..count {
                if rng.gen::<f64>() < spec.density {
                    tuples.push(t.clone());
                }
                for p in (0..arity).rev() {
                    t[p] += 1;
                    if t[p] < spec.domain_size {
                        break;
                    }
                    t[p] = 0;
                }
            }
            Constraint::new(Scope::new(scope).unwrap(), tuples).unwrap()
        })
        .collect();
    Instance::new(
        (1..=spec.num_vars).map(|i| format!("x{i}")).collect(),
        numeric_domain(spec.domain_size as usize),
        constraints,
    )
}

/// A tagged instance family, as used by the CLI and the bench harness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Triangle { n: u32 },
    Star { omega: usize },
    TreeComplete { edges: Vec<(usize, usize)>, d: u32 },
    BwReduction { edges: Vec<(usize, usize)>, omega: usize },
    Agm { omega: usize, allow_large: bool },
    Chain { omega: usize, allow_large: bool },
    ChainN { n: usize },
    Random(RandomSpec),
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::Triangle { .. } => "triangle",
            GeneratorSpec::Star { .. } => "star",
            GeneratorSpec::TreeComplete { .. } => "tree_complete",
            GeneratorSpec::BwReduction { .. } => "bw_reduction",
            GeneratorSpec::Agm { .. } => "agm",
            GeneratorSpec::Chain { .. } => "chain",
            GeneratorSpec::ChainN { .. } => "chain",
            GeneratorSpec::Random(_) => "random",
        }
    }

    pub fn build(&self) -> Result<Instance> {
        match self {
            GeneratorSpec::Triangle { n } => gen_triangle(*n),
            GeneratorSpec::Star { omega } => gen_star(*omega),
            GeneratorSpec::TreeComplete { edges, d } => gen_tree_complete(edges, *d),
            GeneratorSpec::BwReduction { edges, omega } => gen_bw_reduction(edges, *omega),
            GeneratorSpec::Agm { omega, allow_large } => gen_agm(*omega, *allow_large),
            GeneratorSpec::Chain { omega, allow_large } => gen_chain(*omega, *allow_large),
            GeneratorSpec::ChainN { n } => gen_chain_n(*n),
            GeneratorSpec::Random(spec) => gen_random(spec),
        }
    }
}
