//! Rule-level independence by enumerating every overlap of two rules.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::apply::{apply, check_match, DirectDerivation};
use super::independence::{close_diamond, items_parallel_independent, items_sequentially_independent, swap_sequential};
use super::Rule;
use crate::graph::{find_isomorphism, Edge, Graph, Morphism, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConflictKind {
    /// Two applications to the same graph.
    Parallel,
    /// The rule from the first list applied, then the one from the second.
    Sequential,
    /// The rule from the second list applied first.
    SequentialReversed,
}

/// One overlap situation in which independence fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub kind: ConflictKind,
    /// Indices into the two rule lists.
    pub rules: (usize, usize),
    pub overlap: Graph,
    /// Both applications have the same effect (parallel witnesses only).
    pub joinable: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndependenceReport {
    pub independent: bool,
    pub witnesses: Vec<Witness>,
}

/// Options for [`static_rule_set_independence_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct OverlapOptions {
    /// Skip overlaps with two parallel non-loop edges of the same label.
    /// Graphs reachable from simple inputs never contain them.
    pub label_simple: bool,
}

/// Checks every pair `(r1, r2) ∈ p1 × p2` in both application orders.
pub fn static_rule_set_independence(p1: &[Arc<Rule>], p2: &[Arc<Rule>]) -> IndependenceReport {
    static_rule_set_independence_with(p1, p2, OverlapOptions::default())
}

pub fn static_rule_set_independence_with(
    p1: &[Arc<Rule>],
    p2: &[Arc<Rule>],
    opts: OverlapOptions,
) -> IndependenceReport {
    let mut witnesses = Vec::new();
    for (i, r1) in p1.iter().enumerate() {
        for (j, r2) in p2.iter().enumerate() {
            witnesses.extend(pair_witnesses(r1, r2, (i, j), opts));
        }
    }
    IndependenceReport {
        independent: witnesses.is_empty(),
        witnesses,
    }
}

/// Witnesses for one pair of rules: parallel overlaps and both sequential
/// orders.
pub fn pair_witnesses(
    r1: &Arc<Rule>,
    r2: &Arc<Rule>,
    idx: (usize, usize),
    opts: OverlapOptions,
) -> Vec<Witness> {
    let mut out = Vec::new();
    for (o, m1, m2) in overlaps(&r1.left, &r2.left) {
        if opts.label_simple && !label_simple(&o) {
            continue;
        }
        if let Some(w) = parallel_case(r1, r2, o, &m1, &m2) {
            out.push(Witness { rules: idx, ..w });
        }
    }
    for (first, second, flip) in [(r1, r2, false), (r2, r1, true)] {
        for (o, h1, m2) in overlaps(&first.right, &second.left) {
            if opts.label_simple && !label_simple(&o) {
                continue;
            }
            if let Some(overlap) = sequential_case(first, second, o, &h1, &m2) {
                out.push(Witness {
                    kind: if flip {
                        ConflictKind::SequentialReversed
                    } else {
                        ConflictKind::Sequential
                    },
                    rules: idx,
                    overlap,
                    joinable: false,
                });
            }
        }
    }
    out
}

fn label_simple(g: &Graph) -> bool {
    let mut seen = BTreeSet::new();
    g.edges()
        .iter()
        .filter(|e| !e.is_loop())
        .all(|e| seen.insert((e.src, e.tgt, e.label.clone())))
}

fn parallel_case(
    r1: &Arc<Rule>,
    r2: &Arc<Rule>,
    o: Graph,
    m1: &Morphism,
    m2: &Morphism,
) -> Option<Witness> {
    if check_match(r1, &o, m1).is_err() || check_match(r2, &o, m2).is_err() {
        return None;
    }
    let o = Arc::new(o);
    let d1 = apply(r1, &o, m1).ok()?;
    let d2 = apply(r2, &o, m2).ok()?;
    if items_parallel_independent(&d1, &d2) && close_diamond(&d1, &d2).is_ok() {
        return None;
    }
    Some(Witness {
        kind: ConflictKind::Parallel,
        rules: (0, 0),
        overlap: (*o).clone(),
        joinable: same_effect(&d1, &d2),
    })
}

/// Same deleted items and isomorphic results compatible with the kept items.
pub fn same_effect(d1: &DirectDerivation, d2: &DirectDerivation) -> bool {
    if d1.deleted_items() != d2.deleted_items() {
        return false;
    }
    let partial = d1.kept.inverse().expect("injective").then(&d2.kept);
    find_isomorphism(&d1.after, &d2.after, &partial).is_some()
}

fn sequential_case(
    r1: &Arc<Rule>,
    r2: &Arc<Rule>,
    o: Graph,
    h1: &Morphism,
    m2: &Morphism,
) -> Option<Graph> {
    // o must be the result of applying r1: undo it first
    let inv = Arc::new(r1.inverse());
    let o = Arc::new(o);
    let undo = apply(&inv, &o, h1).ok()?;
    let g1 = undo.comatch.clone();
    let d1 = apply(r1, &undo.after, &g1).ok()?;
    // identify o with d1.after
    let mut phi = undo.kept.then(&d1.kept);
    let (cv, ce) = r1.created();
    for v in &cv {
        phi.vertices.insert(h1.vertices[v], d1.comatch.vertices[v]);
    }
    for e in &ce {
        phi.edges.insert(h1.edges[e], d1.comatch.edges[e]);
    }
    let m2 = m2.then(&phi);
    if check_match(r2, &d1.after, &m2).is_err() {
        return None;
    }
    let d2 = apply(r2, &d1.after, &m2).ok()?;
    if items_sequentially_independent(&d1, &d2) && swap_sequential(&d1, &d2).is_ok() {
        return None;
    }
    Some((*o).clone())
}

/// Every gluing of `a` and `b` along a common subgraph: `b` plus the items
/// of `a` outside the chosen partial injective map `a ⇀ b`. Returns the
/// glued graph with both (injective) inclusions.
pub fn overlaps(a: &Graph, b: &Graph) -> Vec<(Graph, Morphism, Morphism)> {
    let mut out = Vec::new();
    let av = a.vertices();
    let mut vmap: Vec<Option<VertexId>> = alloc::vec![None; av.len()];
    vertex_choices(a, b, 0, &mut vmap, &mut BTreeSet::new(), &mut out);
    out
}

fn vertex_choices(
    a: &Graph,
    b: &Graph,
    i: usize,
    vmap: &mut Vec<Option<VertexId>>,
    used: &mut BTreeSet<VertexId>,
    out: &mut Vec<(Graph, Morphism, Morphism)>,
) {
    if i == vmap.len() {
        let mut partial = Morphism::new();
        for (k, &v) in a.vertices().iter().enumerate() {
            if let Some(w) = vmap[k] {
                partial.vertices.insert(v, w);
            }
        }
        let mut emap: Vec<Option<u32>> = alloc::vec![None; a.edge_count()];
        edge_choices(a, b, 0, &partial, &mut emap, &mut BTreeSet::new(), out);
        return;
    }
    vmap[i] = None;
    vertex_choices(a, b, i + 1, vmap, used, out);
    for &w in b.vertices() {
        if used.insert(w) {
            vmap[i] = Some(w);
            vertex_choices(a, b, i + 1, vmap, used, out);
            used.remove(&w);
        }
    }
    vmap[i] = None;
}

fn edge_choices(
    a: &Graph,
    b: &Graph,
    i: usize,
    vpart: &Morphism,
    emap: &mut Vec<Option<u32>>,
    used: &mut BTreeSet<u32>,
    out: &mut Vec<(Graph, Morphism, Morphism)>,
) {
    if i == emap.len() {
        out.push(glue(a, b, vpart, emap));
        return;
    }
    emap[i] = None;
    edge_choices(a, b, i + 1, vpart, emap, used, out);
    let e = &a.edges()[i];
    if let (Some(s), Some(t)) = (vpart.vertex(e.src), vpart.vertex(e.tgt)) {
        for f in b.edges() {
            if f.src == s && f.tgt == t && f.label == e.label && used.insert(f.id) {
                emap[i] = Some(f.id);
                edge_choices(a, b, i + 1, vpart, emap, used, out);
                used.remove(&f.id);
            }
        }
    }
    emap[i] = None;
}

fn glue(a: &Graph, b: &Graph, vpart: &Morphism, emap: &[Option<u32>]) -> (Graph, Morphism, Morphism) {
    let mut o = b.clone();
    let mut ma = vpart.clone();
    for &v in a.vertices() {
        if !ma.vertices.contains_key(&v) {
            let w = o.add_fresh_vertex();
            ma.vertices.insert(v, w);
        }
    }
    for (k, e) in a.edges().iter().enumerate() {
        let id = match emap[k] {
            Some(f) => f,
            None => {
                let Edge { src, tgt, label, .. } = e;
                o.add_fresh_edge(ma.vertices[src], ma.vertices[tgt], label.clone())
                    .expect("endpoints present")
            }
        };
        ma.edges.insert(e.id, id);
    }
    (o, ma, Morphism::identity(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    fn loop_graph(label: &str) -> Graph {
        let mut g = Graph::undirected(&[0], &[]);
        g.add_loop(0, label.into()).unwrap();
        g
    }

    #[test]
    fn overlap_count_of_two_points() {
        let p = Graph::undirected(&[0], &[]);
        // disjoint or glued
        assert_eq!(overlaps(&p, &p).len(), 2);
        let e = Graph::undirected(&[0, 1], &[(0, 1)]);
        // vertex maps: 7 partial injections of 2 into 2; edges add gluings
        let n = overlaps(&e, &e).len();
        assert!(n > 7);
    }

    #[test]
    fn identity_rules_are_independent() {
        let id = Arc::new(Rule::identity("id", &Graph::undirected(&[0], &[])));
        let rep = static_rule_set_independence(&[id.clone()], &[id]);
        assert!(rep.independent);
    }

    #[test]
    fn consuming_rule_conflicts_with_itself() {
        let l = loop_graph("α");
        let k = Graph::undirected(&[0], &[]);
        let r = Arc::new(Rule::by_ids("eat", l, k.clone(), k, None, false).unwrap());
        let rep = static_rule_set_independence(&[r.clone()], &[r]);
        assert!(!rep.independent);
        assert!(rep
            .witnesses
            .iter()
            .any(|w| w.kind == ConflictKind::Parallel && w.joinable));
    }

    #[test]
    fn producer_and_consumer_are_sequentially_dependent() {
        let k = Graph::undirected(&[0], &[]);
        let make = Arc::new(Rule::by_ids("make", k.clone(), k.clone(), loop_graph("α"), None, false).unwrap());
        let eat = Arc::new(Rule::by_ids("eat", loop_graph("α"), k.clone(), k.clone(), None, false).unwrap());
        let rep = static_rule_set_independence(&[make], &[eat]);
        assert!(rep.witnesses.iter().any(|w| w.kind == ConflictKind::Sequential));
        let other = Arc::new(Rule::by_ids("other", loop_graph("β"), k.clone(), k, None, false).unwrap());
        let mark = Arc::new(
            Rule::by_ids("mark", Graph::undirected(&[0], &[]), Graph::undirected(&[0], &[]), loop_graph("γ"), None, false).unwrap(),
        );
        assert!(static_rule_set_independence(&[mark], &[other]).independent);
        let _ = Label::unlabeled();
    }
}
