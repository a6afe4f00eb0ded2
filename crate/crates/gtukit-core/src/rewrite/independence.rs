use alloc::collections::BTreeSet;

use thiserror::Error;

use super::apply::{apply, same_graph, ApplyError, DirectDerivation};
use crate::graph::{EdgeId, Morphism, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndependenceError {
    #[error("the two steps do not start at the same graph")]
    DifferentStart,
    #[error("the second step does not start where the first one ends")]
    NotChained,
    #[error("the steps overlap outside preserved items")]
    Overlap,
    #[error("a transported step is not applicable: {0}")]
    Transport(ApplyError),
    #[error("the completed ends could not be identified")]
    Mismatch,
}

type Items = (BTreeSet<VertexId>, BTreeSet<EdgeId>);

fn image(m: &Morphism) -> Items {
    (m.image_vertices(), m.image_edges())
}

fn disjoint(a: &Items, b: &Items) -> bool {
    a.0.is_disjoint(&b.0) && a.1.is_disjoint(&b.1)
}

/// `g1(L1) ∩ g2(L2) ⊆ g1(K1) ∩ g2(K2)`, as item sets of the common graph.
pub fn items_parallel_independent(d1: &DirectDerivation, d2: &DirectDerivation) -> bool {
    disjoint(&d1.deleted_items(), &image(&d2.matching))
        && disjoint(&d2.deleted_items(), &image(&d1.matching))
}

/// `h1(R1) ∩ g2(L2) ⊆ h1(K1) ∩ g2(K2)` for `d1` followed by `d2`.
pub fn items_sequentially_independent(d1: &DirectDerivation, d2: &DirectDerivation) -> bool {
    disjoint(&d1.created_items(), &image(&d2.matching))
        && disjoint(&d2.deleted_items(), &image(&d1.comatch))
}

/// Parallel independence, including the requirement that each match stays
/// applicable (NAC included) after the other step.
pub fn parallel_independent(
    d1: &DirectDerivation,
    d2: &DirectDerivation,
) -> Result<bool, IndependenceError> {
    match close_diamond(d1, d2) {
        Ok(_) => Ok(true),
        Err(IndependenceError::DifferentStart) => Err(IndependenceError::DifferentStart),
        Err(_) => Ok(false),
    }
}

/// Sequential independence, including applicability of the swapped steps.
pub fn sequentially_independent(
    d1: &DirectDerivation,
    d2: &DirectDerivation,
) -> Result<bool, IndependenceError> {
    match swap_sequential(d1, d2) {
        Ok(_) => Ok(true),
        Err(IndependenceError::NotChained) => Err(IndependenceError::NotChained),
        Err(_) => Ok(false),
    }
}

/// Completes `H1 ⇐ G ⇒ H2` to `H1 ⇒ X ⇐ H2`. Returns `(d2 moved onto H1,
/// d1 moved onto H2)`; both end in the same graph value.
pub fn close_diamond(
    d1: &DirectDerivation,
    d2: &DirectDerivation,
) -> Result<(DirectDerivation, DirectDerivation), IndependenceError> {
    if !same_graph(&d1.before, &d2.before) {
        return Err(IndependenceError::DifferentStart);
    }
    if !items_parallel_independent(d1, d2) {
        return Err(IndependenceError::Overlap);
    }
    let d2m = apply(&d2.rule, &d1.after, &d2.matching.then(&d1.kept))
        .map_err(IndependenceError::Transport)?;
    let d1m = apply(&d1.rule, &d2.after, &d1.matching.then(&d2.kept))
        .map_err(IndependenceError::Transport)?;

    // rename d1m.after onto d2m.after
    let mut phi = d2.kept.then(&d1m.kept).inverse().expect("injective").then(&d1.kept.then(&d2m.kept));
    let (cv1, ce1) = d1.rule.created();
    let (cv2, ce2) = d2.rule.created();
    let ok = phi.merge(&restrict(&d1m.comatch, &cv1, &ce1).inverse().expect("fresh").then(
        &restrict(&d1.comatch, &cv1, &ce1).then(&d2m.kept),
    )) && phi.merge(
        &restrict(&d2.comatch, &cv2, &ce2)
            .then(&d1m.kept)
            .inverse()
            .expect("fresh")
            .then(&restrict(&d2m.comatch, &cv2, &ce2)),
    );
    if !ok {
        return Err(IndependenceError::Mismatch);
    }
    let d1m = d1m.renamed(&phi).ok_or(IndependenceError::Mismatch)?;
    if d1m.after != d2m.after {
        return Err(IndependenceError::Mismatch);
    }
    let d1m = DirectDerivation {
        after: d2m.after.clone(),
        ..d1m
    };
    Ok((d2m, d1m))
}

/// Turns `G ⇒_{r1} H1 ⇒_{r2} X` into `G ⇒_{r2} H2 ⇒_{r1} X`, ending at the
/// same value `X`.
pub fn swap_sequential(
    d1: &DirectDerivation,
    d2: &DirectDerivation,
) -> Result<(DirectDerivation, DirectDerivation), IndependenceError> {
    if !same_graph(&d1.after, &d2.before) {
        return Err(IndependenceError::NotChained);
    }
    if !items_sequentially_independent(d1, d2) {
        return Err(IndependenceError::Overlap);
    }
    let back = d1.kept.inverse().expect("kept is injective");
    let m2 = d2.matching.then(&back);
    if m2.vertices.len() != d2.matching.vertices.len() || m2.edges.len() != d2.matching.edges.len() {
        return Err(IndependenceError::Overlap);
    }
    let first = apply(&d2.rule, &d1.before, &m2).map_err(IndependenceError::Transport)?;
    let second = apply(&d1.rule, &first.after, &d1.matching.then(&first.kept))
        .map_err(IndependenceError::Transport)?;

    let mut phi = first
        .kept
        .then(&second.kept)
        .inverse()
        .expect("injective")
        .then(&d1.kept.then(&d2.kept));
    let (cv1, ce1) = d1.rule.created();
    let (cv2, ce2) = d2.rule.created();
    let ok = phi.merge(
        &restrict(&second.comatch, &cv1, &ce1)
            .inverse()
            .expect("fresh")
            .then(&restrict(&d1.comatch, &cv1, &ce1).then(&d2.kept)),
    ) && phi.merge(
        &restrict(&first.comatch, &cv2, &ce2)
            .then(&second.kept)
            .inverse()
            .expect("fresh")
            .then(&restrict(&d2.comatch, &cv2, &ce2)),
    );
    if !ok {
        return Err(IndependenceError::Mismatch);
    }
    let second = second.renamed(&phi).ok_or(IndependenceError::Mismatch)?;
    if second.after != d2.after {
        return Err(IndependenceError::Mismatch);
    }
    let second = DirectDerivation {
        after: d2.after.clone(),
        ..second
    };
    Ok((first, second))
}

fn restrict(m: &Morphism, vs: &BTreeSet<VertexId>, es: &BTreeSet<EdgeId>) -> Morphism {
    Morphism {
        vertices: m
            .vertices
            .iter()
            .filter(|(v, _)| vs.contains(v))
            .map(|(&a, &b)| (a, b))
            .collect(),
        edges: m
            .edges
            .iter()
            .filter(|(e, _)| es.contains(e))
            .map(|(&a, &b)| (a, b))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonical_key, Graph};
    use crate::rewrite::{applicable_matches, Rule};
    use alloc::sync::Arc;

    fn add_loop_rule(label: &str) -> Arc<Rule> {
        let l = Graph::undirected(&[0], &[]);
        let mut r = l.clone();
        r.add_loop(0, label.into()).unwrap();
        Arc::new(Rule::by_ids(label, l.clone(), l, r, None, false).unwrap())
    }

    fn consume_rule(label: &str) -> Arc<Rule> {
        let mut l = Graph::undirected(&[0], &[]);
        l.add_loop(0, label.into()).unwrap();
        let k = Graph::undirected(&[0], &[]);
        Arc::new(Rule::by_ids("consume", l, k.clone(), k, None, false).unwrap())
    }

    #[test]
    fn diamond_at_distinct_vertices() {
        let g = Arc::new(Graph::undirected(&[0, 1, 2], &[(0, 1), (1, 2)]));
        let r = add_loop_rule("α");
        let ms = applicable_matches(&r, &g);
        let d1 = apply(&r, &g, &ms[0]).unwrap();
        let d2 = apply(&r, &g, &ms[2]).unwrap();
        assert!(items_parallel_independent(&d1, &d2));
        let (a, b) = close_diamond(&d1, &d2).unwrap();
        assert_eq!(a.after, b.after);
        assert!(a.verify().is_ok());
        assert!(b.verify().is_ok());
        assert_eq!(a.after.loops_at(0).count() + a.after.loops_at(2).count(), 2);
    }

    #[test]
    fn shared_deletion_is_dependent() {
        let mut g = Graph::undirected(&[0], &[]);
        g.add_loop(0, "α".into()).unwrap();
        let g = Arc::new(g);
        let r = consume_rule("α");
        let m = &applicable_matches(&r, &g)[0];
        let d = apply(&r, &g, m).unwrap();
        assert!(!items_parallel_independent(&d, &d));
        assert_eq!(parallel_independent(&d, &d), Ok(false));
    }

    #[test]
    fn create_then_consume_is_dependent() {
        let g = Arc::new(Graph::undirected(&[0], &[]));
        let mk = add_loop_rule("α");
        let d1 = apply(&mk, &g, &applicable_matches(&mk, &g)[0]).unwrap();
        let eat = consume_rule("α");
        let d2 = apply(&eat, &d1.after, &applicable_matches(&eat, &d1.after)[0]).unwrap();
        assert_eq!(sequentially_independent(&d1, &d2), Ok(false));
        assert_eq!(sequentially_independent(&d1, &d1), Err(IndependenceError::NotChained));
    }

    #[test]
    fn swap_lands_on_the_same_value() {
        let g = Arc::new(Graph::undirected(&[0, 1], &[(0, 1)]));
        let a = add_loop_rule("α");
        let b = add_loop_rule("β");
        let d1 = apply(&a, &g, &applicable_matches(&a, &g)[0]).unwrap();
        let m2 = applicable_matches(&b, &d1.after)[1].clone();
        let d2 = apply(&b, &d1.after, &m2).unwrap();
        let (f, s) = swap_sequential(&d1, &d2).unwrap();
        assert_eq!(s.after, d2.after);
        assert_eq!(f.rule.name, "β");
        assert!(s.verify().is_ok());
        // swapping back returns the original application order
        let (f2, s2) = swap_sequential(&f, &s).unwrap();
        assert_eq!(f2.rule.name, "α");
        assert_eq!(canonical_key(&f2.after), canonical_key(&d1.after));
        assert_eq!(s2.after, d2.after);
    }
}
