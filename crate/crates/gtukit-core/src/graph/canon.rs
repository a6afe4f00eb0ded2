use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::morphism::for_each_morphism;
use super::{Edge, Graph, Label, Morphism, VertexId};

/// Byte string identifying a graph up to isomorphism.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Short hexadecimal digest, handy for node names.
    pub fn short(&self) -> alloc::string::String {
        // FNV-1a over the key bytes
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in &self.0 {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        alloc::format!("{h:016x}")
    }
}

impl core::fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CanonicalKey({})", self.short())
    }
}

struct Shape {
    n: usize,
    labels: Vec<Label>,
    /// (src slot, tgt slot, label rank) per edge, in edge order.
    edges: Vec<(usize, usize, usize)>,
    out: Vec<Vec<(usize, usize)>>,
    inc: Vec<Vec<(usize, usize)>>,
    loops: Vec<Vec<usize>>,
}

impl Shape {
    fn new(g: &Graph) -> Shape {
        let n = g.vertex_count();
        let slot: BTreeMap<VertexId, usize> =
            g.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut labels: Vec<Label> = g.edges().iter().map(|e| e.label.clone()).collect();
        labels.sort();
        labels.dedup();
        let rank = |l: &Label| labels.binary_search(l).expect("label present");
        let mut out = alloc::vec![Vec::new(); n];
        let mut inc = alloc::vec![Vec::new(); n];
        let mut loops = alloc::vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(g.edge_count());
        for e in g.edges() {
            let (s, t, l) = (slot[&e.src], slot[&e.tgt], rank(&e.label));
            edges.push((s, t, l));
            if s == t {
                loops[s].push(l);
            } else {
                out[s].push((l, t));
                inc[t].push((l, s));
            }
        }
        for l in &mut loops {
            l.sort_unstable();
        }
        Shape {
            n,
            labels,
            edges,
            out,
            inc,
            loops,
        }
    }

    /// Iterated color refinement; colors are dense ranks after each round.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = distinct(&colors);
        loop {
            let sigs: Vec<_> = (0..self.n)
                .map(|v| {
                    let mut o: Vec<_> = self.out[v].iter().map(|&(l, t)| (l, colors[t])).collect();
                    let mut i: Vec<_> = self.inc[v].iter().map(|&(l, s)| (l, colors[s])).collect();
                    o.sort_unstable();
                    i.sort_unstable();
                    (colors[v], self.loops[v].clone(), o, i)
                })
                .collect();
            let mut sorted: Vec<_> = sigs.clone();
            sorted.sort();
            sorted.dedup();
            colors = sigs
                .iter()
                .map(|s| sorted.binary_search(s).expect("present"))
                .collect();
            if sorted.len() == classes {
                return colors;
            }
            classes = sorted.len();
        }
    }

    /// Swapping `a` and `b` is an automorphism.
    fn twins(&self, a: usize, b: usize) -> bool {
        if self.loops[a] != self.loops[b] {
            return false;
        }
        let swap = |x: usize| {
            if x == a {
                b
            } else if x == b {
                a
            } else {
                x
            }
        };
        let norm = |v: usize, list: &[(usize, usize)]| {
            let mut l: Vec<_> = list
                .iter()
                .map(|&(lab, w)| (lab, if v == a { swap(w) } else { w }))
                .collect();
            l.sort_unstable();
            l
        };
        let mut oa = norm(a, &self.out[a]);
        let mut ob: Vec<_> = self.out[b].clone();
        ob.sort_unstable();
        oa.sort_unstable();
        if oa != ob {
            return false;
        }
        let ia = norm(a, &self.inc[a]);
        let mut ib: Vec<_> = self.inc[b].clone();
        ib.sort_unstable();
        ia == ib
    }

    fn encode(&self, pos: &[usize]) -> Vec<(usize, usize, usize)> {
        let mut e: Vec<_> = self
            .edges
            .iter()
            .map(|&(s, t, l)| (pos[s], pos[t], l))
            .collect();
        e.sort_unstable();
        e
    }

    fn search(&self, colors: Vec<usize>, best: &mut Option<(Vec<(usize, usize, usize)>, Vec<usize>)>) {
        let colors = self.refine(colors);
        let mut count = alloc::vec![0usize; self.n];
        for &c in &colors {
            count[c] += 1;
        }
        let Some(cell) = (0..self.n).find(|&c| count[c] > 1) else {
            let enc = self.encode(&colors);
            if best.as_ref().is_none_or(|(b, _)| enc < *b) {
                *best = Some((enc, colors));
            }
            return;
        };
        let members: Vec<usize> = (0..self.n).filter(|&v| colors[v] == cell).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            tried.push(v);
            let next: Vec<usize> = colors
                .iter()
                .enumerate()
                .map(|(u, &c)| if u == v { 2 * c } else { 2 * c + 1 })
                .collect();
            self.search(next, best);
        }
    }

    /// Slot to canonical position.
    fn labeling(&self) -> (Vec<(usize, usize, usize)>, Vec<usize>) {
        let mut best = None;
        self.search(alloc::vec![0; self.n], &mut best);
        best.unwrap_or_default()
    }
}

fn distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn push_u32(out: &mut Vec<u8>, x: usize) {
    out.extend_from_slice(&(x as u32).to_le_bytes());
}

/// Canonical key: equal exactly for isomorphic graphs.
pub fn canonical_key(g: &Graph) -> CanonicalKey {
    let shape = Shape::new(g);
    let (enc, _) = shape.labeling();
    let mut out = Vec::new();
    push_u32(&mut out, shape.n);
    push_u32(&mut out, shape.labels.len());
    for l in &shape.labels {
        push_u32(&mut out, l.as_str().len());
        out.extend_from_slice(l.as_str().as_bytes());
    }
    push_u32(&mut out, enc.len());
    for (s, t, l) in enc {
        push_u32(&mut out, s);
        push_u32(&mut out, t);
        push_u32(&mut out, l);
    }
    CanonicalKey(out)
}

/// The canonical representative (vertices `0..n`, edges `0..m`) and the
/// renaming from `g` onto it.
pub fn canonical_form(g: &Graph) -> (Graph, Morphism) {
    let shape = Shape::new(g);
    let (_, pos) = shape.labeling();
    let mut vmap = BTreeMap::new();
    for (i, &v) in g.vertices().iter().enumerate() {
        vmap.insert(v, pos[i] as VertexId);
    }
    let mut order: Vec<(usize, usize, usize, u32)> = g
        .edges()
        .iter()
        .zip(&shape.edges)
        .map(|(e, &(s, t, l))| (pos[s], pos[t], l, e.id))
        .collect();
    order.sort_unstable();
    let mut emap = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, &(s, t, l, id)) in order.iter().enumerate() {
        emap.insert(id, i as u32);
        edges.push(Edge {
            id: i as u32,
            src: s as VertexId,
            tgt: t as VertexId,
            label: shape.labels[l].clone(),
        });
    }
    let form = Graph::from_parts(0..shape.n as VertexId, edges).expect("well-formed");
    (
        form,
        Morphism {
            vertices: vmap,
            edges: emap,
        },
    )
}

/// An isomorphism `g → h` extending `partial`, if any.
pub fn find_isomorphism(g: &Graph, h: &Graph, partial: &Morphism) -> Option<Morphism> {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return None;
    }
    let mut found = None;
    for_each_morphism(g, h, true, partial, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

pub fn is_isomorphic(g: &Graph, h: &Graph) -> bool {
    find_isomorphism(g, h, &Morphism::new()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_graphs_on(n: u32) -> Vec<Graph> {
        let vs: Vec<u32> = (0..n).collect();
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                pairs.push((a, b));
            }
        }
        (0..1u32 << pairs.len())
            .map(|mask| {
                let chosen: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                Graph::undirected(&vs, &chosen)
            })
            .collect()
    }

    #[test]
    fn eleven_classes_on_four_vertices() {
        let graphs = all_graphs_on(4);
        let mut keys: Vec<_> = graphs.iter().map(canonical_key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 11);
    }

    #[test]
    fn key_agrees_with_isomorphism() {
        let graphs = all_graphs_on(4);
        for a in &graphs {
            for b in &graphs {
                assert_eq!(
                    canonical_key(a) == canonical_key(b),
                    is_isomorphic(a, b),
                    "{a:?} {b:?}"
                );
            }
        }
    }

    #[test]
    fn relabeled_triangle() {
        let t1 = Graph::undirected(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]);
        let t2 = Graph::undirected(&[7, 8, 9], &[(8, 9), (7, 9), (7, 8)]);
        let p3 = Graph::undirected(&[1, 2, 3], &[(1, 2), (2, 3)]);
        assert!(is_isomorphic(&t1, &t2));
        assert!(!is_isomorphic(&t1, &p3));
        assert_eq!(canonical_key(&t1), canonical_key(&t2));
        assert_eq!(canonical_form(&t1).0, canonical_form(&t2).0);
    }

    #[test]
    fn form_renaming_is_an_isomorphism() {
        let mut g = Graph::undirected(&[3, 5, 9], &[(3, 5)]);
        g.add_loop(9, "β".into()).unwrap();
        g.add_loop(9, Label::unlabeled()).unwrap();
        g.add_fresh_edge(5, 9, "x".into()).unwrap();
        let (form, m) = canonical_form(&g);
        assert!(m.is_morphism(&g, &form));
        assert_eq!(g.rename(&m).unwrap(), form);
    }

    #[test]
    fn labels_and_direction_matter() {
        let mut a = Graph::undirected(&[0, 1], &[]);
        a.add_fresh_edge(0, 1, "x".into()).unwrap();
        let mut b = Graph::undirected(&[0, 1], &[]);
        b.add_fresh_edge(1, 0, "x".into()).unwrap();
        let mut c = Graph::undirected(&[0, 1], &[]);
        c.add_fresh_edge(0, 1, "y".into()).unwrap();
        assert_eq!(canonical_key(&a), canonical_key(&b));
        assert_ne!(canonical_key(&a), canonical_key(&c));
        let mut l1 = Graph::undirected(&[0], &[]);
        l1.add_loop(0, Label::unlabeled()).unwrap();
        let mut l2 = l1.clone();
        l2.add_loop(0, Label::unlabeled()).unwrap();
        assert_ne!(canonical_key(&l1), canonical_key(&l2));
    }

    #[test]
    fn symmetric_graphs_stay_fast() {
        let empty = Graph::undirected(&(0..12).collect::<Vec<_>>(), &[]);
        let k = canonical_key(&empty);
        assert_eq!(k, canonical_key(&Graph::undirected(&(5..17).collect::<Vec<_>>(), &[])));
    }
}
