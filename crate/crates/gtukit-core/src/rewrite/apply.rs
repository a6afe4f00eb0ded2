use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::Rule;
use crate::graph::{
    exists_morphism, find_isomorphism, for_each_morphism, EdgeId, Graph, Morphism, VertexId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("the match is not a graph morphism from the left-hand side")]
    NotAMorphism,
    #[error("the rule is (inj) but the match identifies items")]
    NotInjective,
    #[error("identification condition violated")]
    Identification,
    #[error("dangling condition violated")]
    Dangling,
    #[error("negative application condition violated")]
    Nac,
}

/// Checks every application condition of `rule` at `m` in `g`.
pub fn check_match(rule: &Rule, g: &Graph, m: &Morphism) -> Result<(), ApplyError> {
    if !m.is_morphism(&rule.left, g) {
        return Err(ApplyError::NotAMorphism);
    }
    if rule.injective && !m.is_injective() {
        return Err(ApplyError::NotInjective);
    }
    let (del_v, del_e) = rule.deleted();
    if !rule.injective {
        let mut seen_v: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for (&a, &b) in &m.vertices {
            if let Some(&other) = seen_v.get(&b) {
                if del_v.contains(&a) || del_v.contains(&other) {
                    return Err(ApplyError::Identification);
                }
            }
            seen_v.insert(b, a);
        }
        let mut seen_e: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
        for (&a, &b) in &m.edges {
            if let Some(&other) = seen_e.get(&b) {
                if del_e.contains(&a) || del_e.contains(&other) {
                    return Err(ApplyError::Identification);
                }
            }
            seen_e.insert(b, a);
        }
    }
    let gone_v: BTreeSet<VertexId> = del_v.iter().map(|v| m.vertices[v]).collect();
    let gone_e: BTreeSet<EdgeId> = del_e.iter().map(|e| m.edges[e]).collect();
    if g
        .edges()
        .iter()
        .any(|e| !gone_e.contains(&e.id) && (gone_v.contains(&e.src) || gone_v.contains(&e.tgt)))
    {
        return Err(ApplyError::Dangling);
    }
    if let Some(nac) = &rule.nac {
        let partial = nac.l_in_n.inverse().expect("NAC inclusion is injective").then(m);
        if exists_morphism(&nac.graph, g, rule.injective, &partial) {
            return Err(ApplyError::Nac);
        }
    }
    Ok(())
}

/// All matches at which `rule` can be applied, in matcher order.
pub fn applicable_matches(rule: &Rule, g: &Graph) -> Vec<Morphism> {
    let mut out = Vec::new();
    for_each_morphism(&rule.left, g, rule.injective, &Morphism::new(), |m| {
        if check_match(rule, g, m).is_ok() {
            out.push(m.clone());
        }
        core::ops::ControlFlow::Continue(())
    });
    out
}

pub fn is_applicable(rule: &Rule, g: &Graph) -> bool {
    let mut found = false;
    for_each_morphism(&rule.left, g, rule.injective, &Morphism::new(), |m| {
        if check_match(rule, g, m).is_ok() {
            found = true;
            return core::ops::ControlFlow::Break(());
        }
        core::ops::ControlFlow::Continue(())
    });
    found
}

/// One rule application `G ⇒ H`.
///
/// `kept` maps every item of `before` that survives to its item in `after`;
/// `comatch` is the right match `R → H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectDerivation {
    pub before: Arc<Graph>,
    pub after: Arc<Graph>,
    pub rule: Arc<Rule>,
    pub matching: Morphism,
    pub comatch: Morphism,
    pub kept: Morphism,
}

/// Applies `rule` at `m`. Kept items keep their ids; created items get ids
/// above every id of `g`.
pub fn apply(rule: &Arc<Rule>, g: &Arc<Graph>, m: &Morphism) -> Result<DirectDerivation, ApplyError> {
    check_match(rule, g, m)?;
    let (del_v, del_e) = rule.deleted();
    let gone_v: BTreeSet<VertexId> = del_v.iter().map(|v| m.vertices[v]).collect();
    let gone_e: BTreeSet<EdgeId> = del_e.iter().map(|e| m.edges[e]).collect();

    let mut h = Graph::new();
    let mut kept = Morphism::new();
    for &v in g.vertices() {
        if !gone_v.contains(&v) {
            h.add_vertex(v).expect("fresh");
            kept.vertices.insert(v, v);
        }
    }
    for e in g.edges() {
        if !gone_e.contains(&e.id) {
            h.add_edge(e.id, e.src, e.tgt, e.label.clone())
                .expect("dangling checked");
            kept.edges.insert(e.id, e.id);
        }
    }

    // K items reach H through L and the match
    let mut comatch = Morphism::new();
    for (&k, &r) in &rule.k_in_r.vertices {
        comatch.vertices.insert(r, m.vertices[&rule.k_in_l.vertices[&k]]);
    }
    for (&k, &r) in &rule.k_in_r.edges {
        comatch.edges.insert(r, m.edges[&rule.k_in_l.edges[&k]]);
    }
    let mut next_v = g.next_vertex_id();
    for &v in rule.right.vertices() {
        if !comatch.vertices.contains_key(&v) {
            h.add_vertex(next_v).expect("fresh");
            comatch.vertices.insert(v, next_v);
            next_v += 1;
        }
    }
    let mut next_e = g.next_edge_id();
    for e in rule.right.edges() {
        if !comatch.edges.contains_key(&e.id) {
            h.add_edge(
                next_e,
                comatch.vertices[&e.src],
                comatch.vertices[&e.tgt],
                e.label.clone(),
            )
            .expect("fresh");
            comatch.edges.insert(e.id, next_e);
            next_e += 1;
        }
    }
    Ok(DirectDerivation {
        before: g.clone(),
        after: Arc::new(h),
        rule: rule.clone(),
        matching: m.clone(),
        comatch,
        kept,
    })
}

/// Same concrete graph value, with a pointer fast path.
pub fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl DirectDerivation {
    /// Items of `before` deleted by the step.
    pub fn deleted_items(&self) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
        (
            self.before
                .vertices()
                .iter()
                .copied()
                .filter(|v| !self.kept.vertices.contains_key(v))
                .collect(),
            self.before
                .edges()
                .iter()
                .map(|e| e.id)
                .filter(|e| !self.kept.edges.contains_key(e))
                .collect(),
        )
    }

    /// Items of `after` created by the step.
    pub fn created_items(&self) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
        let kv = self.kept.image_vertices();
        let ke = self.kept.image_edges();
        (
            self.after
                .vertices()
                .iter()
                .copied()
                .filter(|v| !kv.contains(v))
                .collect(),
            self.after
                .edges()
                .iter()
                .map(|e| e.id)
                .filter(|e| !ke.contains(e))
                .collect(),
        )
    }

    /// Re-applies the rule and checks that `after`, `comatch` and `kept`
    /// agree with a fresh application up to a compatible isomorphism.
    pub fn verify(&self) -> Result<(), ApplyError> {
        let fresh = apply(&self.rule, &self.before, &self.matching)?;
        if !self.kept.vertices.keys().eq(fresh.kept.vertices.keys())
            || !self.kept.edges.keys().eq(fresh.kept.edges.keys())
        {
            return Err(ApplyError::NotAMorphism);
        }
        let mut partial = fresh.kept.inverse().expect("kept is injective").then(&self.kept);
        let (cv, ce) = self.rule.created();
        for v in &cv {
            partial.vertices.insert(fresh.comatch.vertices[v], self.comatch.vertices[v]);
        }
        for e in &ce {
            partial.edges.insert(fresh.comatch.edges[e], self.comatch.edges[e]);
        }
        match find_isomorphism(&fresh.after, &self.after, &partial) {
            Some(phi) if fresh.comatch.then(&phi) == self.comatch => Ok(()),
            _ => Err(ApplyError::NotAMorphism),
        }
    }

    /// Renames `after` by the bijection `phi`.
    pub fn renamed(&self, phi: &Morphism) -> Option<DirectDerivation> {
        let after = self.after.rename(phi).ok()?;
        Some(DirectDerivation {
            before: self.before.clone(),
            after: Arc::new(after),
            rule: self.rule.clone(),
            matching: self.matching.clone(),
            comatch: self.comatch.then(phi),
            kept: self.kept.then(phi),
        })
    }

    /// Renames `before` by the bijection `psi` (the match moves along).
    pub fn renamed_before(&self, psi: &Morphism) -> Option<DirectDerivation> {
        let before = self.before.rename(psi).ok()?;
        Some(DirectDerivation {
            before: Arc::new(before),
            after: self.after.clone(),
            rule: self.rule.clone(),
            matching: self.matching.then(psi),
            comatch: self.comatch.clone(),
            kept: psi.inverse()?.then(&self.kept),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("step {0} does not start at the previous graph")]
    Broken(usize),
}

/// A sequence of direct derivations starting at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    start: Arc<Graph>,
    steps: Vec<DirectDerivation>,
}

impl Derivation {
    pub fn empty(start: Arc<Graph>) -> Derivation {
        Derivation {
            start,
            steps: Vec::new(),
        }
    }

    pub fn from_steps(
        start: Arc<Graph>,
        steps: Vec<DirectDerivation>,
    ) -> Result<Derivation, DerivationError> {
        let mut d = Derivation::empty(start);
        for s in steps {
            d.push(s)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, step: DirectDerivation) -> Result<(), DerivationError> {
        if !same_graph(self.last(), &step.before) {
            return Err(DerivationError::Broken(self.steps.len()));
        }
        // share the allocation with the previous step
        let mut step = step;
        step.before = self.last().clone();
        self.steps.push(step);
        Ok(())
    }

    pub fn first(&self) -> &Arc<Graph> {
        &self.start
    }

    pub fn last(&self) -> &Arc<Graph> {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }

    pub fn steps(&self) -> &[DirectDerivation] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `G_0, …, G_n`.
    pub fn graphs(&self) -> Vec<Arc<Graph>> {
        let mut out = alloc::vec![self.start.clone()];
        out.extend(self.steps.iter().map(|s| s.after.clone()));
        out
    }

    pub fn application_sequence(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.rule.name.clone()).collect()
    }

    /// Sub-derivation of steps `range`.
    pub fn slice(&self, from: usize, to: usize) -> Derivation {
        let start = if from == 0 {
            self.start.clone()
        } else {
            self.steps[from - 1].after.clone()
        };
        Derivation {
            start,
            steps: self.steps[from..to].to_vec(),
        }
    }

    pub fn concat(&self, other: &Derivation) -> Result<Derivation, DerivationError> {
        let mut d = self.clone();
        for s in other.steps() {
            d.push(s.clone())?;
        }
        if other.is_empty() && !same_graph(self.last(), other.first()) {
            return Err(DerivationError::Broken(self.len()));
        }
        Ok(d)
    }

    /// Items of the first graph that survive every step, with their images
    /// in the last graph.
    pub fn tracking(&self) -> Morphism {
        let mut t = Morphism::identity(&self.start);
        for s in &self.steps {
            t = t.then(&s.kept);
        }
        t
    }

    /// Every step verifies and the chain is intact.
    pub fn verify(&self) -> Result<(), (usize, ApplyError)> {
        let mut cur = &self.start;
        for (i, s) in self.steps.iter().enumerate() {
            if !same_graph(cur, &s.before) {
                return Err((i, ApplyError::NotAMorphism));
            }
            s.verify().map_err(|e| (i, e))?;
            cur = &s.after;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    fn loop_rule(from: &str, to: &str) -> Arc<Rule> {
        let mut l = Graph::undirected(&[0], &[]);
        l.add_loop(0, from.into()).unwrap();
        let k = Graph::undirected(&[0], &[]);
        let mut r = k.clone();
        r.add_loop(0, to.into()).unwrap();
        Arc::new(Rule::by_ids(alloc::format!("{from}->{to}"), l, k, r, None, false).unwrap())
    }

    #[test]
    fn replaces_a_loop() {
        let mut g = Graph::undirected(&[1, 2], &[(1, 2)]);
        g.add_loop(2, "α".into()).unwrap();
        let g = Arc::new(g);
        let rule = loop_rule("α", "run");
        let ms = applicable_matches(&rule, &g);
        assert_eq!(ms.len(), 1);
        let d = apply(&rule, &g, &ms[0]).unwrap();
        assert_eq!(d.after.edge_count(), 3);
        assert_eq!(d.after.loops_at(2).next().unwrap().label.as_str(), "run");
        assert_eq!(d.kept.edges.len(), 2);
        assert!(d.verify().is_ok());
        let (cv, ce) = d.created_items();
        assert!(cv.is_empty());
        assert_eq!(ce.len(), 1);
    }

    #[test]
    fn dangling_and_identification() {
        // delete a vertex
        let l = Graph::undirected(&[0], &[]);
        let del = Arc::new(Rule::by_ids("del", l, Graph::new(), Graph::new(), None, false).unwrap());
        let g = Arc::new(Graph::undirected(&[1, 2], &[(1, 2)]));
        let m = find_first(&del.left, &g);
        assert_eq!(apply(&del, &g, &m).unwrap_err(), ApplyError::Dangling);
        // delete two vertices that may be identified
        let l2 = Graph::undirected(&[0, 1], &[]);
        let del2 = Rule::by_ids("del2", l2, Graph::new(), Graph::new(), None, false).unwrap();
        let one = Graph::undirected(&[5], &[]);
        let mut m = Morphism::new();
        m.vertices.insert(0, 5);
        m.vertices.insert(1, 5);
        assert_eq!(check_match(&del2, &one, &m), Err(ApplyError::Identification));
        let mut inj = del2.clone();
        inj.injective = true;
        assert_eq!(check_match(&inj, &one, &m), Err(ApplyError::NotInjective));
    }

    fn find_first(p: &Graph, g: &Graph) -> Morphism {
        crate::graph::find_morphisms(p, g, false).remove(0)
    }

    #[test]
    fn nac_blocks() {
        let l = Graph::undirected(&[0], &[]);
        let mut n = l.clone();
        n.add_loop(0, "α".into()).unwrap();
        let rule = Arc::new(Rule::by_ids("mark", l.clone(), l.clone(), n.clone(), Some(n), false).unwrap());
        let g = Arc::new(Graph::undirected(&[0, 1], &[]));
        let ms = applicable_matches(&rule, &g);
        assert_eq!(ms.len(), 2);
        let d = apply(&rule, &g, &ms[0]).unwrap();
        assert_eq!(applicable_matches(&rule, &d.after).len(), 1);
        assert_eq!(check_match(&rule, &d.after, &ms[0]), Err(ApplyError::Nac));
    }

    #[test]
    fn identity_rule_keeps_graph() {
        let mut g = Graph::undirected(&[0, 1], &[(0, 1)]);
        g.add_loop(0, Label::unlabeled()).unwrap();
        let g = Arc::new(g);
        let p = Graph::undirected(&[0], &[]);
        let id = Arc::new(Rule::identity("id", &p));
        let m = find_first(&p, &g);
        assert_eq!(*apply(&id, &g, &m).unwrap().after, *g);
    }

    #[test]
    fn derivation_chaining() {
        let mut g = Graph::undirected(&[0], &[]);
        g.add_loop(0, "α".into()).unwrap();
        let g = Arc::new(g);
        let a = loop_rule("α", "β");
        let b = loop_rule("β", "γ");
        let d1 = apply(&a, &g, &applicable_matches(&a, &g)[0]).unwrap();
        let d2 = apply(&b, &d1.after, &applicable_matches(&b, &d1.after)[0]).unwrap();
        let mut d = Derivation::empty(g.clone());
        assert!(d.push(d2.clone()).is_err());
        d.push(d1).unwrap();
        d.push(d2).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.tracking().vertices.len(), 1);
        assert!(d.tracking().edges.is_empty());
        assert!(d.verify().is_ok());
        assert_eq!(d.slice(1, 2).first(), &d.steps()[0].after);
    }
}
