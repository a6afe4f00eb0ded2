use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::apply::{apply, same_graph, ApplyError, Derivation, DirectDerivation};
use super::independence::{close_diamond, swap_sequential, IndependenceError};
use crate::graph::{find_isomorphism, Graph, Morphism};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("the embedding is not an injective morphism into the extension")]
    BadEmbedding,
    #[error("step {step} cannot be extended: {cause}")]
    Step { step: usize, cause: ApplyError },
}

/// A derivation transported into a larger graph, with the embedding of
/// every graph of the original into the corresponding extended graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extended {
    pub derivation: Derivation,
    pub embeddings: Vec<Morphism>,
}

/// Embedding of `d.after` into `ext.after`, given the embedding of the
/// starting graphs.
pub fn next_embedding(d: &DirectDerivation, ext: &DirectDerivation, e: &Morphism) -> Morphism {
    let mut out = d.kept.inverse().expect("kept is injective").then(e).then(&ext.kept);
    let (cv, ce) = d.rule.created();
    for v in cv {
        out.vertices.insert(d.comatch.vertices[&v], ext.comatch.vertices[&v]);
    }
    for x in ce {
        out.edges.insert(d.comatch.edges[&x], ext.comatch.edges[&x]);
    }
    out
}

/// Applies the steps of `d` inside `host`, where `e` embeds `d.first()`.
pub fn extend_derivation(
    d: &Derivation,
    host: &Arc<Graph>,
    e: &Morphism,
) -> Result<Extended, ExtensionError> {
    if !e.is_morphism(d.first(), host) || !e.is_injective() {
        return Err(ExtensionError::BadEmbedding);
    }
    let mut out = Derivation::empty(host.clone());
    let mut embeddings = alloc::vec![e.clone()];
    for (i, step) in d.steps().iter().enumerate() {
        let cur = embeddings.last().expect("non-empty");
        let ext = apply(&step.rule, out.last(), &step.matching.then(cur))
            .map_err(|cause| ExtensionError::Step { step: i, cause })?;
        let next = next_embedding(step, &ext, cur);
        out.push(ext).expect("chained");
        embeddings.push(next);
    }
    Ok(Extended {
        derivation: out,
        embeddings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("forward moves need a common first graph")]
    NotCoinitial,
    #[error("backward moves need the mover to start where the guide ends")]
    NotConsecutive,
    #[error("guide step {guide_step} and mover step {mover_step} are not independent: {cause}")]
    Dependent {
        guide_step: usize,
        mover_step: usize,
        cause: IndependenceError,
    },
}

/// Transports `mover` to the other end of `guide`.
///
/// Forward: both start at the same graph; the result starts at
/// `guide.last()`. Backward: `mover` starts at `guide.last()`; the result
/// starts at `guide.first()`, and `guide` transported along it ends at
/// `mover.last()`.
pub fn move_variant(
    guide: &Derivation,
    mover: &Derivation,
    direction: Direction,
) -> Result<Derivation, MoveError> {
    match direction {
        Direction::Forward => {
            if !same_graph(guide.first(), mover.first()) {
                return Err(MoveError::NotCoinitial);
            }
            let mut cur = mover.clone();
            for (i, g) in guide.steps().iter().enumerate() {
                let mut along = g.clone();
                let mut moved = Derivation::empty(g.after.clone());
                for (j, m) in cur.steps().iter().enumerate() {
                    let (m2, g2) = close_diamond(&along, m).map_err(|cause| MoveError::Dependent {
                        guide_step: i,
                        mover_step: j,
                        cause,
                    })?;
                    moved.push(m2).expect("chained");
                    along = g2;
                }
                cur = moved;
            }
            Ok(cur)
        }
        Direction::Backward => {
            if !same_graph(guide.last(), mover.first()) {
                return Err(MoveError::NotConsecutive);
            }
            let mut cur = mover.clone();
            for (i, g) in guide.steps().iter().enumerate().rev() {
                let mut along = g.clone();
                let mut moved = Derivation::empty(g.before.clone());
                for (j, m) in cur.steps().iter().enumerate() {
                    let (m2, g2) = swap_sequential(&along, m).map_err(|cause| MoveError::Dependent {
                        guide_step: i,
                        mover_step: j,
                        cause,
                    })?;
                    moved.push(m2).expect("chained");
                    along = g2;
                }
                cur = moved;
            }
            Ok(cur)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("the legs of a span must start at the same graph")]
    DifferentStart,
    #[error("the two derivations of a pair must start at the same graph")]
    PairStart,
    #[error("the two derivations of a pair must end in isomorphic graphs")]
    PairEnd,
}

/// Two direct derivations from the same graph `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub left: DirectDerivation,
    pub right: DirectDerivation,
}

impl Span {
    pub fn new(left: DirectDerivation, right: DirectDerivation) -> Result<Span, SpanError> {
        if !same_graph(&left.before, &right.before) {
            return Err(SpanError::DifferentStart);
        }
        Ok(Span { left, right })
    }

    pub fn source(&self) -> &Arc<Graph> {
        &self.left.before
    }

    /// Both legs apply the same rule shape at the same match.
    pub fn is_identity(&self) -> bool {
        self.left.rule.same_shape(&self.right.rule) && self.left.matching == self.right.matching
    }

    pub fn reversed(&self) -> Span {
        Span {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

/// Two derivations from the same graph to isomorphic graphs. `last_iso`
/// maps `second.last()` onto `first.last()` compatibly with the items both
/// derivations keep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationPair {
    pub first: Derivation,
    pub second: Derivation,
    pub last_iso: Morphism,
}

impl DerivationPair {
    pub fn new(first: Derivation, second: Derivation) -> Result<DerivationPair, SpanError> {
        if !same_graph(first.first(), second.first()) {
            return Err(SpanError::PairStart);
        }
        let t1 = first.tracking();
        let t2 = second.tracking();
        let mut partial = Morphism::new();
        for (v, a) in &t2.vertices {
            if let Some(b) = t1.vertices.get(v) {
                partial.vertices.insert(*a, *b);
            }
        }
        for (e, a) in &t2.edges {
            if let Some(b) = t1.edges.get(e) {
                partial.edges.insert(*a, *b);
            }
        }
        let last_iso =
            find_isomorphism(second.last(), first.last(), &partial).ok_or(SpanError::PairEnd)?;
        Ok(DerivationPair {
            first,
            second,
            last_iso,
        })
    }
}
