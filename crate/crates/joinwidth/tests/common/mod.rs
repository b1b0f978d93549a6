//! Shared fixtures for the integration suites: seeded corpora, small-graph
//! enumeration, and a couple of handmade instances.

#![allow(dead_code)]

use std::collections::BTreeSet;

use joinwidth::generators::{gen_random, RandomSpec};
use joinwidth::oracle::{branchwidth_subset_dp, brute_force_branchwidth, TREE_ENUMERATION_LIMIT};
use joinwidth::relation::{Constraint, Hypergraph, Instance, Scope};

/// Deterministic corpus of small random instances: |V| <= 6, |D| <= 3,
/// |C| <= 5. The parameters cycle so the corpus mixes arities and densities.
pub fn small_random_corpus(count: usize) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let num_vars = 2 + (i % 5) as usize; // 2..=6
        let spec = RandomSpec {
            seed: 0xC0FFEE ^ i,
            num_vars,
            domain_size: 2 + (i / 5 % 2) as u32, // 2..=3
            num_constraints: 1 + (i / 10 % 5) as usize, // 1..=5
            min_arity: 1,
            max_arity: 3.min(num_vars),
            density: [0.25, 0.5, 0.75, 0.9][(i / 50 % 4) as usize],
        };
        i += 1;
        // Dealing can leave a constraint empty-relation at low density; that
        // is a legal instance, keep it.
        if let Ok(inst) = gen_random(&spec) {
            out.push(inst);
        }
    }
    out
}

/// Single constraint over v1..vn whose relation is the n x n identity
/// matrix: exactly one variable set to 1.
pub fn identity_instance(n: usize) -> Instance {
    let tuples: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
        .collect();
    Instance::new(
        (1..=n).map(|i| format!("v{i}")).collect(),
        vec!["0".into(), "1".into()],
        vec![Constraint::new(Scope::new((0..n).collect()).unwrap(), tuples).unwrap()],
    )
    .unwrap()
}

/// Decodes a Pruefer sequence over [n] into the edge list of a labeled tree.
fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    assert!(n >= 2 && seq.len() == n - 2);
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut used = vec![false; n];
    for &v in seq {
        let leaf = (0..n).find(|&u| !used[u] && degree[u] == 1).unwrap();
        edges.push((leaf.min(v), leaf.max(v)));
        used[leaf] = true;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| !used[u] && degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// All labeled trees on n vertices (n^(n-2) of them), via Pruefer sequences.
pub fn all_labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 1 {
        return vec![Vec::new()];
    }
    if n == 2 {
        return vec![vec![(0, 1)]];
    }
    let len = n - 2;
    let mut seq = vec![0usize; len];
    let mut out = Vec::new();
    loop {
        out.push(prufer_decode(&seq, n));
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            if pos == 0 {
                return out;
            }
        }
    }
}

fn canonical_edges(edges: &[(usize, usize)], n: usize) -> Vec<(usize, usize)> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in out {
                for v in 0..n {
                    if !p.contains(&v) {
                        let mut q = p.clone();
                        q.push(v);
                        next.push(q);
                    }
                }
            }
            out = next;
        }
        out
    }
    let mut best: Option<Vec<(usize, usize)>> = None;
    for p in perms(n) {
        let mut mapped: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v])))
            .collect();
        mapped.sort_unstable();
        if best.as_ref().map(|b| mapped < *b).unwrap_or(true) {
            best = Some(mapped);
        }
    }
    best.unwrap()
}

/// One representative per isomorphism class of trees with 1..=max_edges
/// edges.
pub fn nonisomorphic_trees(max_edges: usize) -> Vec<Vec<(usize, usize)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 2..=max_edges + 1 {
        for t in all_labeled_trees(n) {
            let canon = canonical_edges(&t, n);
            if seen.insert(canon.clone()) {
                out.push(canon);
            }
        }
    }
    out
}

/// One representative per isomorphism class of simple graphs with a
/// nonempty edge set, no isolated vertices, and at most `max_vertices`
/// vertices.
pub fn nonisomorphic_graphs(max_vertices: usize) -> Vec<Vec<(usize, usize)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 2..=max_vertices {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        for mask in 1u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let covered: BTreeSet<usize> =
                edges.iter().flat_map(|&(u, v)| [u, v]).collect();
            if covered.len() != n {
                continue; // isolated vertices; the smaller n covers this graph
            }
            let canon = canonical_edges(&edges, n);
            if seen.insert(canon.clone()) {
                out.push(canon);
            }
        }
    }
    out
}

/// Exact branchwidth, exhaustive where the tree enumeration allows it and
/// the subset recurrence beyond (the two agree on their overlap; see the
/// oracle unit tests).
pub fn branchwidth(h: &Hypergraph) -> u64 {
    if h.edges.len() <= TREE_ENUMERATION_LIMIT {
        brute_force_branchwidth(h, false).unwrap()
    } else {
        branchwidth_subset_dp(h).unwrap()
    }
}
