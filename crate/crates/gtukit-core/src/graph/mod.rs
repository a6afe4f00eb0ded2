//! Directed edge-labeled graphs, morphisms and isomorphism.
//!
//! Undirected edges are encoded as two opposite directed edges carrying the
//! same label. The engine itself only knows directed edges.

mod canon;
mod morphism;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub use canon::{canonical_form, canonical_key, find_isomorphism, is_isomorphic, CanonicalKey};
pub use morphism::{
    exists_morphism, find_morphisms, find_morphisms_from, for_each_morphism, Morphism,
};

/// Vertex identifier, private to one graph value.
pub type VertexId = u32;
/// Edge identifier, private to one graph value.
pub type EdgeId = u32;

/// The reserved symbol for unlabeled edges.
pub const UNLABELED: &str = "*";

/// An edge label. `"*"` is the unlabeled symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    /// Builds a label, rejecting the empty string.
    pub fn new(text: &str) -> Result<Label, GraphError> {
        if text.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        Ok(Label(Arc::from(text)))
    }

    pub fn unlabeled() -> Label {
        Label(Arc::from(UNLABELED))
    }

    pub fn is_unlabeled(&self) -> bool {
        &*self.0 == UNLABELED
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Panics on the empty string; use [`Label::new`] for untrusted input.
impl From<&str> for Label {
    fn from(text: &str) -> Label {
        Label::new(text).expect("labels are non-empty")
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub tgt: VertexId,
    pub label: Label,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.tgt
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} refers to missing vertex {vertex}")]
    MissingEndpoint { edge: EdgeId, vertex: VertexId },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("vertex {0} still has incident edges")]
    IncidentEdges(VertexId),
    #[error("labels must be non-empty")]
    EmptyLabel,
    #[error("graph is not standard (simple, undirected, loop-free, unlabeled)")]
    NotStandard,
    #[error("renaming is not a bijection on the graph items")]
    BadRenaming,
}

/// A finite directed edge-labeled graph.
///
/// Vertices and edges are kept sorted by id, so two graphs compare equal
/// exactly when they are the same concrete value.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    /// Builds a graph from explicit items, validating ids and endpoints.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Graph, GraphError> {
        let mut g = Graph::new();
        for v in vertices {
            g.add_vertex(v)?;
        }
        for e in edges {
            g.add_edge(e.id, e.src, e.tgt, e.label)?;
        }
        Ok(g)
    }

    /// Standard graph with the given vertices and undirected unlabeled edges.
    pub fn undirected(vertices: &[VertexId], pairs: &[(VertexId, VertexId)]) -> Graph {
        let mut g = Graph::new();
        for &v in vertices {
            g.add_vertex(v).expect("distinct vertex ids");
        }
        for &(u, v) in pairs {
            g.add_undirected(u, v, Label::unlabeled())
                .expect("endpoints are vertices");
        }
        g
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `|V| + |E|`, each directed edge counting once.
    pub fn size(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn has_edge(&self, id: EdgeId) -> bool {
        self.edge(id).is_some()
    }

    pub fn next_vertex_id(&self) -> VertexId {
        self.vertices.last().map_or(0, |v| v + 1)
    }

    pub fn next_edge_id(&self) -> EdgeId {
        self.edges.last().map_or(0, |e| e.id + 1)
    }

    pub fn add_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        match self.vertices.binary_search(&v) {
            Ok(_) => Err(GraphError::DuplicateVertex(v)),
            Err(i) => {
                self.vertices.insert(i, v);
                Ok(())
            }
        }
    }

    pub fn add_fresh_vertex(&mut self) -> VertexId {
        let v = self.next_vertex_id();
        self.vertices.push(v);
        v
    }

    pub fn add_edge(
        &mut self,
        id: EdgeId,
        src: VertexId,
        tgt: VertexId,
        label: Label,
    ) -> Result<(), GraphError> {
        for v in [src, tgt] {
            if !self.has_vertex(v) {
                return Err(GraphError::MissingEndpoint { edge: id, vertex: v });
            }
        }
        match self.edges.binary_search_by_key(&id, |e| e.id) {
            Ok(_) => Err(GraphError::DuplicateEdge(id)),
            Err(i) => {
                self.edges.insert(
                    i,
                    Edge {
                        id,
                        src,
                        tgt,
                        label,
                    },
                );
                Ok(())
            }
        }
    }

    pub fn add_fresh_edge(
        &mut self,
        src: VertexId,
        tgt: VertexId,
        label: Label,
    ) -> Result<EdgeId, GraphError> {
        let id = self.next_edge_id();
        self.add_edge(id, src, tgt, label)?;
        Ok(id)
    }

    /// Adds the two opposite edges of an undirected edge.
    pub fn add_undirected(
        &mut self,
        u: VertexId,
        v: VertexId,
        label: Label,
    ) -> Result<(EdgeId, EdgeId), GraphError> {
        let a = self.add_fresh_edge(u, v, label.clone())?;
        let b = self.add_fresh_edge(v, u, label)?;
        Ok((a, b))
    }

    pub fn add_loop(&mut self, v: VertexId, label: Label) -> Result<EdgeId, GraphError> {
        self.add_fresh_edge(v, v, label)
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<Edge, GraphError> {
        match self.edges.binary_search_by_key(&id, |e| e.id) {
            Ok(i) => Ok(self.edges.remove(i)),
            Err(_) => Err(GraphError::UnknownEdge(id)),
        }
    }

    /// Removes an isolated vertex.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        let i = self
            .vertices
            .binary_search(&v)
            .map_err(|_| GraphError::UnknownVertex(v))?;
        if self.edges.iter().any(|e| e.src == v || e.tgt == v) {
            return Err(GraphError::IncidentEdges(v));
        }
        self.vertices.remove(i);
        Ok(())
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.src == v)
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.tgt == v)
    }

    pub fn loops_at(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.src == v && e.tgt == v)
    }

    /// Applies a bijective renaming of all items.
    pub fn rename(&self, map: &Morphism) -> Result<Graph, GraphError> {
        if map.vertices.len() != self.vertices.len() || map.edges.len() != self.edges.len() {
            return Err(GraphError::BadRenaming);
        }
        let mut g = Graph::new();
        for v in &self.vertices {
            let w = *map.vertices.get(v).ok_or(GraphError::BadRenaming)?;
            g.add_vertex(w).map_err(|_| GraphError::BadRenaming)?;
        }
        for e in &self.edges {
            let id = *map.edges.get(&e.id).ok_or(GraphError::BadRenaming)?;
            g.add_edge(id, map.vertices[&e.src], map.vertices[&e.tgt], e.label.clone())
                .map_err(|_| GraphError::BadRenaming)?;
        }
        Ok(g)
    }

    /// Weakly connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut parent: BTreeMap<VertexId, VertexId> =
            self.vertices.iter().map(|&v| (v, v)).collect();
        fn find(parent: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
            let mut r = v;
            while parent[&r] != r {
                r = parent[&r];
            }
            let mut c = v;
            while parent[&c] != r {
                let next = parent[&c];
                parent.insert(c, r);
                c = next;
            }
            r
        }
        for e in &self.edges {
            let a = find(&mut parent, e.src);
            let b = find(&mut parent, e.tgt);
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent.insert(hi, lo);
            }
        }
        let mut groups: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &v in &self.vertices {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Subgraph induced by a vertex set; item ids are kept.
    pub fn induced(&self, vertices: &[VertexId]) -> Graph {
        let keep: BTreeSet<VertexId> = vertices.iter().copied().collect();
        Graph {
            vertices: self
                .vertices
                .iter()
                .copied()
                .filter(|v| keep.contains(v))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| keep.contains(&e.src) && keep.contains(&e.tgt))
                .cloned()
                .collect(),
        }
    }

    /// Every edge can be paired with a distinct opposite edge of the same label.
    pub fn is_undirected(&self) -> bool {
        let mut pending: BTreeMap<(VertexId, VertexId, &Label), isize> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| !e.is_loop()) {
            let (key, delta) = if e.src < e.tgt {
                ((e.src, e.tgt, &e.label), 1)
            } else {
                ((e.tgt, e.src, &e.label), -1)
            };
            *pending.entry(key).or_insert(0) += delta;
        }
        pending.values().all(|&c| c == 0)
    }

    pub fn is_unlabeled(&self) -> bool {
        self.edges.iter().all(|e| e.label.is_unlabeled())
    }

    /// No two edges share both source and target.
    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|e| seen.insert((e.src, e.tgt)))
    }

    pub fn is_loop_free(&self) -> bool {
        self.edges.iter().all(|e| !e.is_loop())
    }

    /// Simple, undirected, loop-free and unlabeled.
    pub fn is_standard(&self) -> bool {
        self.is_loop_free() && self.is_unlabeled() && self.is_simple() && self.is_undirected()
    }

    /// Undirected neighbour pairs `u < v` of a standard graph.
    pub fn undirected_pairs(&self) -> BTreeSet<(VertexId, VertexId)> {
        self.edges
            .iter()
            .filter(|e| !e.is_loop())
            .map(|e| (e.src.min(e.tgt), e.src.max(e.tgt)))
            .collect()
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph{{V={:?}, E=[", self.vertices)?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}-{}->{}", e.id, e.src, e.label, e.tgt)?;
        }
        f.write_str("]}")
    }
}

/// Disjoint union; `g` keeps its ids and `h` is shifted past them.
pub fn disjoint_union(g: &Graph, h: &Graph) -> Graph {
    let dv = g.next_vertex_id();
    let de = g.next_edge_id();
    let mut out = g.clone();
    for &v in h.vertices() {
        out.vertices.push(v + dv);
    }
    for e in h.edges() {
        out.edges.push(Edge {
            id: e.id + de,
            src: e.src + dv,
            tgt: e.tgt + dv,
            label: e.label.clone(),
        });
    }
    out
}

/// Complement of a standard graph on the same vertex ids.
pub fn complement(g: &Graph) -> Result<Graph, GraphError> {
    if !g.is_standard() {
        return Err(GraphError::NotStandard);
    }
    let present = g.undirected_pairs();
    let vs = g.vertices();
    let mut pairs = Vec::new();
    for (i, &u) in vs.iter().enumerate() {
        for &v in &vs[i + 1..] {
            if !present.contains(&(u, v)) {
                pairs.push((u, v));
            }
        }
    }
    Ok(Graph::undirected(vs, &pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(a: VertexId) -> Graph {
        Graph::undirected(&[a, a + 1, a + 2], &[(a, a + 1), (a + 1, a + 2), (a, a + 2)])
    }

    #[test]
    fn size_counts_directed_edges() {
        assert_eq!(Graph::new().size(), 0);
        let mut g = Graph::new();
        g.add_vertex(0).unwrap();
        g.add_loop(0, "α".into()).unwrap();
        assert_eq!(g.size(), 2);
        let c5 = Graph::undirected(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (3, 4), (3, 5), (1, 5)]);
        assert_eq!(c5.size(), 15);
    }

    #[test]
    fn rejects_bad_items() {
        let mut g = Graph::new();
        g.add_vertex(1).unwrap();
        assert_eq!(g.add_vertex(1), Err(GraphError::DuplicateVertex(1)));
        assert!(matches!(
            g.add_edge(0, 1, 2, Label::unlabeled()),
            Err(GraphError::MissingEndpoint { .. })
        ));
        assert!(Label::new("").is_err());
        g.add_loop(1, "x".into()).unwrap();
        assert_eq!(g.remove_vertex(1), Err(GraphError::IncidentEdges(1)));
    }

    #[test]
    fn standard_predicates() {
        assert!(Graph::new().is_standard());
        let t = triangle(1);
        assert!(t.is_standard());
        let mut d = t.clone();
        d.add_fresh_edge(1, 2, Label::unlabeled()).unwrap();
        assert!(!d.is_undirected());
        assert!(!d.is_simple());
        let mut l = t.clone();
        l.add_loop(1, Label::unlabeled()).unwrap();
        assert!(!l.is_loop_free());
    }

    #[test]
    fn union_and_complement() {
        let one = Graph::undirected(&[0], &[]);
        let two = disjoint_union(&one, &one);
        assert_eq!(two.vertex_count(), 2);
        assert_eq!(two.edge_count(), 0);
        let t = triangle(0);
        assert_eq!(disjoint_union(&t, &Graph::new()), t);
        assert_eq!(disjoint_union(&t, &t).size(), 2 * t.size());

        let g = Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (1, 3), (2, 3), (3, 4)]);
        let c = complement(&g).unwrap();
        let expect: BTreeSet<_> = [(1, 4), (2, 4)].into_iter().collect();
        assert_eq!(c.undirected_pairs(), expect);
        assert!(is_isomorphic(&complement(&c).unwrap(), &g));
        let empty5 = Graph::undirected(&[0, 1, 2, 3, 4], &[]);
        assert_eq!(complement(&empty5).unwrap().undirected_pairs().len(), 10);
        let mut bad = g.clone();
        bad.add_loop(1, Label::unlabeled()).unwrap();
        assert_eq!(complement(&bad), Err(GraphError::NotStandard));
    }

    #[test]
    fn components_are_weak() {
        let mut g = Graph::undirected(&[1, 2, 3, 4], &[(1, 2)]);
        g.add_fresh_edge(3, 4, "d".into()).unwrap();
        assert_eq!(g.components(), alloc::vec![alloc::vec![1, 2], alloc::vec![3, 4]]);
        assert!(!g.is_connected());
        assert!(Graph::new().is_connected());
    }
}
