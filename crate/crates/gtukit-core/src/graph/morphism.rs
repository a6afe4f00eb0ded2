use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::{Edge, EdgeId, Graph, Label, VertexId};

/// A pair of item maps between two graphs.
///
/// The same type doubles as a partial correspondence (for instance the items
/// a rule application keeps). Whether it is a total structure-preserving map
/// is checked against concrete graphs with [`Morphism::is_morphism`].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub vertices: BTreeMap<VertexId, VertexId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
}

impl Morphism {
    pub fn new() -> Morphism {
        Morphism::default()
    }

    pub fn identity(g: &Graph) -> Morphism {
        Morphism {
            vertices: g.vertices().iter().map(|&v| (v, v)).collect(),
            edges: g.edges().iter().map(|e| (e.id, e.id)).collect(),
        }
    }

    pub fn vertex(&self, v: VertexId) -> Option<VertexId> {
        self.vertices.get(&v).copied()
    }

    pub fn edge(&self, e: EdgeId) -> Option<EdgeId> {
        self.edges.get(&e).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    /// `other ∘ self`, defined where both maps are defined.
    pub fn then(&self, other: &Morphism) -> Morphism {
        Morphism {
            vertices: self
                .vertices
                .iter()
                .filter_map(|(&a, b)| other.vertex(*b).map(|c| (a, c)))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter_map(|(&a, b)| other.edge(*b).map(|c| (a, c)))
                .collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        let vs: BTreeSet<_> = self.vertices.values().collect();
        let es: BTreeSet<_> = self.edges.values().collect();
        vs.len() == self.vertices.len() && es.len() == self.edges.len()
    }

    pub fn inverse(&self) -> Option<Morphism> {
        if !self.is_injective() {
            return None;
        }
        Some(Morphism {
            vertices: self.vertices.iter().map(|(&a, &b)| (b, a)).collect(),
            edges: self.edges.iter().map(|(&a, &b)| (b, a)).collect(),
        })
    }

    pub fn image_vertices(&self) -> BTreeSet<VertexId> {
        self.vertices.values().copied().collect()
    }

    pub fn image_edges(&self) -> BTreeSet<EdgeId> {
        self.edges.values().copied().collect()
    }

    /// Adds all entries of `other`; fails if they disagree with existing ones.
    pub fn merge(&mut self, other: &Morphism) -> bool {
        for (&a, &b) in &other.vertices {
            if *self.vertices.entry(a).or_insert(b) != b {
                return false;
            }
        }
        for (&a, &b) in &other.edges {
            if *self.edges.entry(a).or_insert(b) != b {
                return false;
            }
        }
        true
    }

    /// Total on `from`, lands in `to`, and commutes with sources, targets
    /// and labels.
    pub fn is_morphism(&self, from: &Graph, to: &Graph) -> bool {
        if self.vertices.len() != from.vertex_count() || self.edges.len() != from.edge_count() {
            return false;
        }
        for &v in from.vertices() {
            match self.vertex(v) {
                Some(w) if to.has_vertex(w) => {}
                _ => return false,
            }
        }
        for e in from.edges() {
            let Some(f) = self.edge(e.id).and_then(|id| to.edge(id)) else {
                return false;
            };
            if self.vertex(e.src) != Some(f.src)
                || self.vertex(e.tgt) != Some(f.tgt)
                || e.label != f.label
            {
                return false;
            }
        }
        true
    }
}

struct HostIndex<'h> {
    host: &'h Graph,
    by_pair: BTreeMap<(VertexId, VertexId), Vec<usize>>,
    out_deg: BTreeMap<VertexId, usize>,
    in_deg: BTreeMap<VertexId, usize>,
}

impl<'h> HostIndex<'h> {
    fn new(host: &'h Graph) -> Self {
        let mut by_pair: BTreeMap<(VertexId, VertexId), Vec<usize>> = BTreeMap::new();
        let mut out_deg = BTreeMap::new();
        let mut in_deg = BTreeMap::new();
        for (i, e) in host.edges().iter().enumerate() {
            by_pair.entry((e.src, e.tgt)).or_default().push(i);
            *out_deg.entry(e.src).or_insert(0) += 1;
            *in_deg.entry(e.tgt).or_insert(0) += 1;
        }
        HostIndex {
            host,
            by_pair,
            out_deg,
            in_deg,
        }
    }

    fn between(&self, s: VertexId, t: VertexId) -> &[usize] {
        self.by_pair.get(&(s, t)).map_or(&[], |v| v.as_slice())
    }

    fn count_labeled(&self, s: VertexId, t: VertexId, label: &Label) -> usize {
        self.between(s, t)
            .iter()
            .filter(|&&i| self.host.edges()[i].label == *label)
            .count()
    }
}

/// Pattern edges that become checkable once a given vertex is placed,
/// grouped by (source slot, target slot, label) with multiplicity.
type Closing = Vec<(usize, usize, Label, usize)>;

struct Search<'a, 'h, F> {
    pattern: &'a Graph,
    idx: HostIndex<'h>,
    injective: bool,
    partial: &'a Morphism,
    slot_of: BTreeMap<VertexId, usize>,
    closing: Vec<Closing>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    assign: Vec<VertexId>,
    used_v: BTreeSet<VertexId>,
    edge_assign: Vec<EdgeId>,
    used_e: BTreeSet<EdgeId>,
    visit: F,
}

impl<F: FnMut(&Morphism) -> ControlFlow<()>> Search<'_, '_, F> {
    fn vertex_ok(&self, slot: usize, h: VertexId) -> bool {
        if self.injective {
            if self.used_v.contains(&h) {
                return false;
            }
            if self.idx.out_deg.get(&h).copied().unwrap_or(0) < self.out_deg[slot]
                || self.idx.in_deg.get(&h).copied().unwrap_or(0) < self.in_deg[slot]
            {
                return false;
            }
        }
        for (s, t, label, mult) in &self.closing[slot] {
            let hs = if *s == slot { h } else { self.assign[*s] };
            let ht = if *t == slot { h } else { self.assign[*t] };
            let have = self.idx.count_labeled(hs, ht, label);
            let need = if self.injective { *mult } else { 1 };
            if have < need {
                return false;
            }
        }
        true
    }

    fn vertices(&mut self, slot: usize) -> ControlFlow<()> {
        if slot == self.assign.len() {
            return self.edges(0);
        }
        let pv = self.pattern.vertices()[slot];
        let candidates: Vec<VertexId> = match self.partial.vertex(pv) {
            Some(h) if self.idx.host.has_vertex(h) => alloc::vec![h],
            Some(_) => Vec::new(),
            None => self.idx.host.vertices().to_vec(),
        };
        for h in candidates {
            if !self.vertex_ok(slot, h) {
                continue;
            }
            self.assign[slot] = h;
            if self.injective {
                self.used_v.insert(h);
            }
            let r = self.vertices(slot + 1);
            if self.injective {
                self.used_v.remove(&h);
            }
            r?;
        }
        ControlFlow::Continue(())
    }

    fn edges(&mut self, k: usize) -> ControlFlow<()> {
        let pedges = self.pattern.edges();
        if k == pedges.len() {
            let m = Morphism {
                vertices: self
                    .pattern
                    .vertices()
                    .iter()
                    .zip(&self.assign)
                    .map(|(&p, &h)| (p, h))
                    .collect(),
                edges: pedges
                    .iter()
                    .zip(&self.edge_assign)
                    .map(|(e, &h)| (e.id, h))
                    .collect(),
            };
            return (self.visit)(&m);
        }
        let e: &Edge = &pedges[k];
        let hs = self.assign[self.slot_of[&e.src]];
        let ht = self.assign[self.slot_of[&e.tgt]];
        let fixed = self.partial.edge(e.id);
        let cands: Vec<EdgeId> = self
            .idx
            .between(hs, ht)
            .iter()
            .map(|&i| &self.idx.host.edges()[i])
            .filter(|he| he.label == e.label && fixed.is_none_or(|f| f == he.id))
            .map(|he| he.id)
            .collect();
        for h in cands {
            if self.injective && self.used_e.contains(&h) {
                continue;
            }
            self.edge_assign[k] = h;
            if self.injective {
                self.used_e.insert(h);
            }
            let r = self.edges(k + 1);
            if self.injective {
                self.used_e.remove(&h);
            }
            r?;
        }
        ControlFlow::Continue(())
    }
}

/// Visits every morphism `pattern → host` that extends `partial`, in
/// ascending order of vertex assignments (pattern vertices by id, host
/// candidates by id), then edge assignments in the same manner.
pub fn for_each_morphism<F>(
    pattern: &Graph,
    host: &Graph,
    injective: bool,
    partial: &Morphism,
    visit: F,
) where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    let n = pattern.vertex_count();
    let slot_of: BTreeMap<VertexId, usize> = pattern
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut groups: Vec<BTreeMap<(usize, usize, Label), usize>> = alloc::vec![BTreeMap::new(); n];
    let mut out_deg = alloc::vec![0; n];
    let mut in_deg = alloc::vec![0; n];
    for e in pattern.edges() {
        let s = slot_of[&e.src];
        let t = slot_of[&e.tgt];
        out_deg[s] += 1;
        in_deg[t] += 1;
        *groups[s.max(t)].entry((s, t, e.label.clone())).or_insert(0) += 1;
    }
    let closing = groups
        .into_iter()
        .map(|g| g.into_iter().map(|((s, t, l), m)| (s, t, l, m)).collect())
        .collect();
    let mut search = Search {
        pattern,
        idx: HostIndex::new(host),
        injective,
        partial,
        slot_of,
        closing,
        out_deg,
        in_deg,
        assign: alloc::vec![0; n],
        used_v: BTreeSet::new(),
        edge_assign: alloc::vec![0; pattern.edge_count()],
        used_e: BTreeSet::new(),
        visit,
    };
    let _ = search.vertices(0);
}

/// All morphisms `pattern → host`, deterministic order.
pub fn find_morphisms(pattern: &Graph, host: &Graph, injective: bool) -> Vec<Morphism> {
    find_morphisms_from(pattern, host, injective, &Morphism::new())
}

/// All morphisms extending a partial assignment.
pub fn find_morphisms_from(
    pattern: &Graph,
    host: &Graph,
    injective: bool,
    partial: &Morphism,
) -> Vec<Morphism> {
    let mut out = Vec::new();
    for_each_morphism(pattern, host, injective, partial, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out
}

pub fn exists_morphism(pattern: &Graph, host: &Graph, injective: bool, partial: &Morphism) -> bool {
    let mut found = false;
    for_each_morphism(pattern, host, injective, partial, |_| {
        found = true;
        ControlFlow::Break(())
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    fn naive(pattern: &Graph, host: &Graph, injective: bool) -> Vec<Morphism> {
        // every vertex assignment, then every edge assignment, then filter
        let pv = pattern.vertices();
        let hv = host.vertices();
        let mut out = Vec::new();
        let n = pv.len();
        let total = hv.len().pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut vm = BTreeMap::new();
            for &p in pv.iter().rev() {
                vm.insert(p, hv[c % hv.len()]);
                c /= hv.len().max(1);
            }
            if hv.is_empty() && n > 0 {
                continue;
            }
            let pe = pattern.edges();
            let he = host.edges();
            let etotal = he.len().pow(pe.len() as u32);
            for ecode in 0..etotal {
                let mut c = ecode;
                let mut em = BTreeMap::new();
                for e in pe.iter().rev() {
                    em.insert(e.id, he[c % he.len()].id);
                    c /= he.len().max(1);
                }
                let m = Morphism {
                    vertices: vm.clone(),
                    edges: em,
                };
                if m.is_morphism(pattern, host) && (!injective || m.is_injective()) {
                    out.push(m);
                }
            }
        }
        out.sort();
        out
    }

    fn tri() -> Graph {
        Graph::undirected(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)])
    }

    #[test]
    fn single_vertex_pattern() {
        let p = Graph::undirected(&[0], &[]);
        let h = Graph::undirected(&[1, 2, 3, 4, 5], &[(1, 2)]);
        assert_eq!(find_morphisms(&p, &h, false).len(), 5);
    }

    #[test]
    fn undirected_edge_into_triangle() {
        let p = Graph::undirected(&[0, 1], &[(0, 1)]);
        let found = find_morphisms(&p, &tri(), false);
        assert_eq!(found, naive(&p, &tri(), false));
        assert_eq!(found.len(), 6);
        assert_eq!(find_morphisms(&p, &tri(), true).len(), 6);
    }

    #[test]
    fn order_is_ascending() {
        let p = Graph::undirected(&[0, 1], &[]);
        let found = find_morphisms(&p, &tri(), false);
        let mut sorted = found.clone();
        sorted.sort();
        assert_eq!(found, sorted);
        assert_eq!(found.len(), 9);
    }

    #[test]
    fn loops_and_partial() {
        let mut p = Graph::undirected(&[0], &[]);
        p.add_loop(0, "α".into()).unwrap();
        let mut h = Graph::undirected(&[1, 2], &[(1, 2)]);
        h.add_loop(1, "α".into()).unwrap();
        h.add_loop(1, "α".into()).unwrap();
        h.add_loop(2, "β".into()).unwrap();
        assert_eq!(find_morphisms(&p, &h, false), naive(&p, &h, false));
        assert_eq!(find_morphisms(&p, &h, false).len(), 2);
        let mut partial = Morphism::new();
        partial.vertices.insert(0, 2);
        assert!(find_morphisms_from(&p, &h, false, &partial).is_empty());
        // two loops in the pattern, injective needs two host loops
        p.add_loop(0, "α".into()).unwrap();
        assert_eq!(find_morphisms(&p, &h, true).len(), 2);
        assert_eq!(find_morphisms(&p, &h, false).len(), 4);
    }

    #[test]
    fn agrees_with_naive_on_small_cases() {
        let mut host = Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4)]);
        host.add_loop(2, Label::unlabeled()).unwrap();
        host.add_fresh_edge(4, 1, "x".into()).unwrap();
        let mut pats = alloc::vec![
            Graph::undirected(&[0, 1], &[(0, 1)]),
            Graph::undirected(&[0, 1, 2], &[(0, 1), (1, 2)]),
            Graph::undirected(&[0, 1], &[]),
        ];
        let mut lp = Graph::undirected(&[0], &[]);
        lp.add_loop(0, Label::unlabeled()).unwrap();
        pats.push(lp);
        let mut dx = Graph::undirected(&[0, 1], &[]);
        dx.add_fresh_edge(0, 1, "x".into()).unwrap();
        pats.push(dx);
        for p in &pats {
            for inj in [false, true] {
                assert_eq!(find_morphisms(p, &host, inj), naive(p, &host, inj), "{p:?}");
            }
        }
    }
}
