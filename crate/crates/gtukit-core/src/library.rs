//! Problem instances, brute-force deciders and small-graph corpora.
//!
//! The units themselves are transcribed in fixture files and loaded by the
//! `gtukit` crate.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::graph::{canonical_key, disjoint_union, Graph, Label, VertexId};
use crate::unit::{bound_value, split_plus, GraphClass, BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProblemId {
    Hampath,
    /// Spanning tree with vertex degree at most `k ≥ 1`.
    Stwbd(usize),
    IndependentSet,
    Clique,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LibraryError {
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("unknown reduction {0:?}")]
    UnknownReduction(String),
    #[error("stwbd needs k >= 1")]
    BadParameter,
    #[error("instance is malformed: {0}")]
    Malformed(&'static str),
    #[error("instance has no vertices outside the bound component")]
    Empty,
    #[error("instance too large for the brute-force decider ({0} vertices)")]
    TooLarge(usize),
    #[error("{0:?} instances need a bound")]
    MissingBound(ProblemId),
}

impl ProblemId {
    /// `hampath`, `stwbd(2)` or `stwbd-2`, `independent-set`, `clique`.
    pub fn parse(s: &str) -> Result<ProblemId, LibraryError> {
        let unknown = || LibraryError::UnknownProblem(s.to_string());
        match s {
            "hampath" => return Ok(ProblemId::Hampath),
            "independent-set" | "independent_set" => return Ok(ProblemId::IndependentSet),
            "clique" => return Ok(ProblemId::Clique),
            _ => {}
        }
        let rest = s.strip_prefix("stwbd").ok_or_else(unknown)?;
        let k = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| rest.strip_prefix('-'))
            .ok_or_else(unknown)?;
        let k: usize = k.parse().map_err(|_| unknown())?;
        if k == 0 {
            return Err(LibraryError::BadParameter);
        }
        Ok(ProblemId::Stwbd(k))
    }

    pub fn needs_bound(self) -> bool {
        matches!(self, ProblemId::IndependentSet | ProblemId::Clique)
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemId::Hampath => f.write_str("hampath"),
            ProblemId::Stwbd(k) => write!(f, "stwbd({k})"),
            ProblemId::IndependentSet => f.write_str("independent-set"),
            ProblemId::Clique => f.write_str("clique"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReductionId {
    HampathToSpanTree,
    CliqueToIndependentSet,
}

impl ReductionId {
    pub fn parse(s: &str) -> Result<ReductionId, LibraryError> {
        match s {
            "hampath-to-2-bounded-spantree" => Ok(ReductionId::HampathToSpanTree),
            "clique-to-independent-set" => Ok(ReductionId::CliqueToIndependentSet),
            _ => Err(LibraryError::UnknownReduction(s.to_string())),
        }
    }

    pub fn source(self) -> ProblemId {
        match self {
            ReductionId::HampathToSpanTree => ProblemId::Hampath,
            ReductionId::CliqueToIndependentSet => ProblemId::Clique,
        }
    }

    pub fn target(self) -> ProblemId {
        match self {
            ReductionId::HampathToSpanTree => ProblemId::Stwbd(2),
            ReductionId::CliqueToIndependentSet => ProblemId::IndependentSet,
        }
    }
}

impl fmt::Display for ReductionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionId::HampathToSpanTree => "hampath-to-2-bounded-spantree",
            ReductionId::CliqueToIndependentSet => "clique-to-independent-set",
        })
    }
}

/// A single vertex with the bound-loop and `k` unlabeled loops.
pub fn bound_component(k: usize) -> Graph {
    let mut g = Graph::undirected(&[0], &[]);
    g.add_loop(0, Label::from(BOUND)).expect("vertex exists");
    for _ in 0..k {
        g.add_loop(0, Label::unlabeled()).expect("vertex exists");
    }
    g
}

/// `base + bound(k)` for clique and independent-set, `base` otherwise.
pub fn make_instance(kind: ProblemId, base: &Graph, bound: Option<usize>) -> Result<Graph, LibraryError> {
    if !base.is_standard() {
        return Err(LibraryError::Malformed("base graph is not standard"));
    }
    if !kind.needs_bound() {
        return Ok(base.clone());
    }
    let k = bound.ok_or(LibraryError::MissingBound(kind))?;
    Ok(disjoint_union(base, &bound_component(k)))
}

/// Splits `G + bound(k)` into `G` and `k`.
pub fn split_instance(g: &Graph) -> Result<(Graph, usize), LibraryError> {
    let (base, bound) = split_plus(&GraphClass::Standard, &GraphClass::Bound(None), g)
        .ok_or(LibraryError::Malformed("expected standard + bound"))?;
    let k = bound_value(&g.induced(&bound)).expect("bound side");
    Ok((g.induced(&base), k))
}

/// Brute-force decision procedure, independent of the rewriting engine.
pub fn oracle(id: ProblemId, g: &Graph) -> Result<bool, LibraryError> {
    let (base, k) = if id.needs_bound() {
        let (b, k) = split_instance(g)?;
        (b, Some(k))
    } else {
        if !g.is_standard() {
            return Err(LibraryError::Malformed("expected a standard graph"));
        }
        (g.clone(), None)
    };
    let n = base.vertex_count();
    if n == 0 {
        return Err(LibraryError::Empty);
    }
    let adj = adjacency(&base);
    Ok(match id {
        ProblemId::Hampath => {
            if n > 10 {
                return Err(LibraryError::TooLarge(n));
            }
            has_hamiltonian_path(&adj)
        }
        ProblemId::Stwbd(k) => {
            if n > 8 {
                return Err(LibraryError::TooLarge(n));
            }
            has_bounded_spanning_tree(&adj, k)
        }
        ProblemId::Clique => subsets_of_size(n, k.unwrap_or(0))
            .any(|s| pairs(&s).all(|(a, b)| adj[a][b])),
        ProblemId::IndependentSet => subsets_of_size(n, k.unwrap_or(0))
            .any(|s| pairs(&s).all(|(a, b)| !adj[a][b])),
    })
}

fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let idx = |v: VertexId| g.vertices().binary_search(&v).expect("vertex");
    let n = g.vertex_count();
    let mut adj = alloc::vec![alloc::vec![false; n]; n];
    for e in g.edges() {
        adj[idx(e.src)][idx(e.tgt)] = true;
    }
    adj
}

fn has_hamiltonian_path(adj: &[Vec<bool>]) -> bool {
    let mut perm: Vec<usize> = (0..adj.len()).collect();
    loop {
        if perm.windows(2).all(|w| adj[w[0]][w[1]]) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn has_bounded_spanning_tree(adj: &[Vec<bool>], k: usize) -> bool {
    let n = adj.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| adj[a][b])
        .collect();
    subsets_of_size(edges.len(), n - 1).any(|s| {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                p[x] = find(p, p[x]);
            }
            p[x]
        }
        let mut deg = alloc::vec![0usize; n];
        for &i in &s {
            let (a, b) = edges[i];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.iter().all(|&d| d <= k)
    })
}

fn pairs(s: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    s.iter()
        .enumerate()
        .flat_map(move |(i, &a)| s[i + 1..].iter().map(move |&b| (a, b)))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    core::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().expect("present");
        match (0..k).rev().find(|&i| c[i] < n - k + i) {
            Some(i) => {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
            }
            None => cur = None,
        }
        Some(out)
    })
}

/// One representative per isomorphism class of standard graphs with exactly
/// `n` vertices, with vertex ids `1..=n`. Deterministic order.
pub fn standard_graphs(n: usize) -> Vec<Graph> {
    let vs: Vec<VertexId> = (1..=n as VertexId).collect();
    let all: Vec<(VertexId, VertexId)> = vs
        .iter()
        .flat_map(|&a| vs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .collect();
    assert!(all.len() < 32, "corpus too large");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << all.len()) {
        let pairs: Vec<(VertexId, VertexId)> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        let g = Graph::undirected(&vs, &pairs);
        if seen.insert(canonical_key(&g)) {
            out.push(g);
        }
    }
    out
}

/// Standard graphs with `lo..=hi` vertices.
pub fn standard_corpus(lo: usize, hi: usize) -> Vec<Graph> {
    (lo..=hi).flat_map(standard_graphs).collect()
}

/// Connected standard graphs with `lo..=hi` vertices.
pub fn connected_corpus(lo: usize, hi: usize) -> Vec<Graph> {
    standard_corpus(lo, hi).into_iter().filter(Graph::is_connected).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_isomorphic;

    #[test]
    fn corpus_sizes() {
        let counts: Vec<usize> = (0..=5).map(|n| standard_graphs(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 4, 11, 34]);
        let connected: Vec<usize> = (1..=5).map(|n| connected_corpus(n, n).len()).collect();
        assert_eq!(connected, [1, 1, 2, 6, 21]);
    }

    #[test]
    fn subsets() {
        assert_eq!(subsets_of_size(4, 2).count(), 6);
        assert_eq!(subsets_of_size(3, 0).collect::<Vec<_>>(), [Vec::<usize>::new()]);
        assert_eq!(subsets_of_size(2, 3).count(), 0);
    }

    #[test]
    fn small_oracles() {
        let tri_pendant = Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (1, 3), (2, 3), (3, 4)]);
        let g3 = make_instance(ProblemId::Clique, &tri_pendant, Some(3)).unwrap();
        let g4 = make_instance(ProblemId::Clique, &tri_pendant, Some(4)).unwrap();
        assert!(oracle(ProblemId::Clique, &g3).unwrap());
        assert!(!oracle(ProblemId::Clique, &g4).unwrap());
        assert!(oracle(ProblemId::IndependentSet, &g3.clone()).is_ok());
        let fig1c = Graph::undirected(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (3, 4), (3, 5), (1, 5)]);
        assert!(oracle(ProblemId::Hampath, &fig1c).unwrap());
        for g in connected_corpus(3, 3) {
            assert!(!oracle(ProblemId::Stwbd(1), &g).unwrap());
        }
        let star = Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (1, 3), (1, 4)]);
        assert!(!oracle(ProblemId::Hampath, &star).unwrap());
        assert!(!oracle(ProblemId::Stwbd(2), &star).unwrap());
        assert!(oracle(ProblemId::Stwbd(3), &star).unwrap());
        assert_eq!(oracle(ProblemId::Hampath, &Graph::new()), Err(LibraryError::Empty));
        assert!(matches!(oracle(ProblemId::Clique, &fig1c), Err(LibraryError::Malformed(_))));
    }

    #[test]
    fn instances() {
        let g = Graph::undirected(&[1, 2], &[(1, 2)]);
        assert_eq!(make_instance(ProblemId::Hampath, &g, None).unwrap(), g);
        assert_eq!(
            make_instance(ProblemId::Clique, &g, None),
            Err(LibraryError::MissingBound(ProblemId::Clique))
        );
        let i = make_instance(ProblemId::IndependentSet, &g, Some(0)).unwrap();
        let (base, k) = split_instance(&i).unwrap();
        assert_eq!(k, 0);
        assert!(is_isomorphic(&base, &g));
        assert_eq!(ProblemId::parse("stwbd(2)").unwrap(), ProblemId::Stwbd(2));
        assert_eq!(ProblemId::parse("stwbd-3").unwrap(), ProblemId::Stwbd(3));
        assert_eq!(ProblemId::parse("stwbd(0)"), Err(LibraryError::BadParameter));
        assert_eq!(ProblemId::parse(&ProblemId::Stwbd(2).to_string()).unwrap(), ProblemId::Stwbd(2));
    }
}
