use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::graph::{exists_morphism, Graph, Morphism, VertexId};
use crate::rewrite::{is_applicable, Rule};

/// Label of the loop that marks the bound component.
pub const BOUND: &str = "bound";

/// Graph class expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphClass {
    /// Every graph.
    All,
    /// No match of any of the listed graphs.
    Forbidden(Vec<Graph>),
    /// Simple, undirected, loop-free and unlabeled.
    Standard,
    Undirected,
    Unlabeled,
    Simple,
    LoopFree,
    /// A single vertex with one bound-loop and `k` unlabeled loops; `None`
    /// accepts any `k`.
    Bound(Option<usize>),
    /// No rule of the set is applicable.
    Reduced(Vec<Arc<Rule>>),
    /// Disjoint union of a member of each class.
    Plus(Box<GraphClass>, Box<GraphClass>),
}

impl GraphClass {
    pub fn plus(a: GraphClass, b: GraphClass) -> GraphClass {
        GraphClass::Plus(Box::new(a), Box::new(b))
    }

    /// `standard + bound(ℕ)`.
    pub fn standard_with_bound() -> GraphClass {
        GraphClass::plus(GraphClass::Standard, GraphClass::Bound(None))
    }

    pub fn contains(&self, g: &Graph) -> bool {
        match self {
            GraphClass::All => true,
            GraphClass::Forbidden(pats) => pats
                .iter()
                .all(|p| !exists_morphism(p, g, false, &Morphism::new())),
            GraphClass::Standard => g.is_standard(),
            GraphClass::Undirected => g.is_undirected(),
            GraphClass::Unlabeled => g.is_unlabeled(),
            GraphClass::Simple => g.is_simple(),
            GraphClass::LoopFree => g.is_loop_free(),
            GraphClass::Bound(k) => match bound_value(g) {
                Some(n) => k.is_none_or(|k| k == n),
                None => false,
            },
            GraphClass::Reduced(rules) => rules.iter().all(|r| !is_applicable(r, g)),
            GraphClass::Plus(a, b) => split_plus(a, b, g).is_some(),
        }
    }
}

/// `k` if `g` is exactly a bound component.
pub fn bound_value(g: &Graph) -> Option<usize> {
    let [v] = g.vertices() else { return None };
    let mut bound = 0;
    let mut plain = 0;
    for e in g.edges() {
        if e.src != *v || e.tgt != *v {
            return None;
        }
        match e.label.as_str() {
            BOUND => bound += 1,
            "*" => plain += 1,
            _ => return None,
        }
    }
    (bound == 1).then_some(plain)
}

/// The vertex carrying a bound-loop, if there is exactly one.
pub fn bound_vertex(g: &Graph) -> Option<VertexId> {
    let mut it = g
        .edges()
        .iter()
        .filter(|e| e.is_loop() && e.label.as_str() == BOUND)
        .map(|e| e.src);
    let v = it.next()?;
    it.next().is_none().then_some(v)
}

/// Partitions the components of `g` into a member of `a` and one of `b`.
/// Returns the vertex sets of the two parts.
pub fn split_plus(
    a: &GraphClass,
    b: &GraphClass,
    g: &Graph,
) -> Option<(Vec<VertexId>, Vec<VertexId>)> {
    let comps = g.components();
    let check = |left: &[usize]| -> Option<(Vec<VertexId>, Vec<VertexId>)> {
        let mut lv = Vec::new();
        let mut rv = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            if left.contains(&i) {
                lv.extend_from_slice(c);
            } else {
                rv.extend_from_slice(c);
            }
        }
        lv.sort_unstable();
        rv.sort_unstable();
        (a.contains(&g.induced(&lv)) && b.contains(&g.induced(&rv))).then_some((lv, rv))
    };
    // a bound side is one component: locate it directly
    let bound_side = |c: &GraphClass| matches!(c, GraphClass::Bound(_));
    if bound_side(a) || bound_side(b) {
        for (i, c) in comps.iter().enumerate() {
            if bound_value(&g.induced(c)).is_none() {
                continue;
            }
            let left: Vec<usize> = if bound_side(a) {
                alloc::vec![i]
            } else {
                (0..comps.len()).filter(|&j| j != i).collect()
            };
            if let Some(r) = check(&left) {
                return Some(r);
            }
        }
        return None;
    }
    if comps.len() > 20 {
        return None;
    }
    (0u32..(1 << comps.len())).find_map(|mask| {
        let left: Vec<usize> = (0..comps.len()).filter(|i| mask & (1 << i) != 0).collect();
        check(&left)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::disjoint_union;

    fn bound(k: usize) -> Graph {
        let mut g = Graph::undirected(&[0], &[]);
        g.add_loop(0, BOUND.into()).unwrap();
        for _ in 0..k {
            g.add_loop(0, "*".into()).unwrap();
        }
        g
    }

    #[test]
    fn standard_plus_bound() {
        let c = GraphClass::standard_with_bound();
        let base = Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (1, 3), (2, 3), (3, 4)]);
        let g = disjoint_union(&base, &bound(3));
        assert!(c.contains(&g));
        assert!(GraphClass::plus(GraphClass::Standard, GraphClass::Bound(Some(3))).contains(&g));
        assert!(!GraphClass::plus(GraphClass::Standard, GraphClass::Bound(Some(2))).contains(&g));
        let mut broken = g.clone();
        let id = broken.edges().iter().find(|e| e.label.as_str() == BOUND).unwrap().id;
        broken.remove_edge(id).unwrap();
        assert!(!c.contains(&broken));
        assert!(c.contains(&bound(0)));
        assert!(!c.contains(&base));
    }

    #[test]
    fn simple_classes() {
        assert!(GraphClass::Standard.contains(&Graph::new()));
        let mut g = Graph::undirected(&[0, 1], &[(0, 1)]);
        assert!(GraphClass::Standard.contains(&g));
        g.add_loop(0, "α".into()).unwrap();
        assert!(!GraphClass::LoopFree.contains(&g));
        assert!(!GraphClass::Unlabeled.contains(&g));
        assert!(GraphClass::Undirected.contains(&g));
        let mut pat = Graph::undirected(&[0], &[]);
        pat.add_loop(0, "α".into()).unwrap();
        assert!(!GraphClass::Forbidden(alloc::vec![pat.clone()]).contains(&g));
        assert!(GraphClass::Forbidden(alloc::vec![pat]).contains(&Graph::new()));
    }

    #[test]
    fn generic_plus_partitions_components() {
        let g = Graph::undirected(&[0, 1, 2], &[(0, 1)]);
        let c = GraphClass::plus(GraphClass::Standard, GraphClass::Standard);
        assert!(c.contains(&g));
        let mut l = g.clone();
        l.add_loop(2, "x".into()).unwrap();
        assert!(!c.contains(&l));
        assert!(GraphClass::plus(GraphClass::Standard, GraphClass::All).contains(&l));
    }
}
