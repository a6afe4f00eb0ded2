//! Derivation structures: directed graphs whose nodes are concrete graphs
//! and whose arcs are direct derivations between them.
//!
//! Nodes are identified by value, so two operations that produce equal
//! graphs meet in one node. Isomorphic but different graphs stay apart.
//! Operations only ever add nodes and arcs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::graph::{canonical_key, find_isomorphism, find_morphisms_from, Graph, Morphism};
use crate::rewrite::{
    apply, close_diamond, extend_derivation, next_embedding, swap_sequential, ApplyError, Derivation, DerivationPair,
    DirectDerivation, ExtensionError, IndependenceError, Span,
};
use crate::unit::{run_functional, RunError, Unit};

pub type NodeId = usize;
pub type ArcId = usize;

/// How an arc entered the structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Given,
    /// Read from a file; never used as an anchor for extensions.
    Loaded,
    Conflux,
    Interchange,
    Sprout,
    Couple,
    Associate,
}

impl Origin {
    pub const ALL: [Origin; 7] = [
        Origin::Given,
        Origin::Loaded,
        Origin::Conflux,
        Origin::Interchange,
        Origin::Sprout,
        Origin::Couple,
        Origin::Associate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Given => "given",
            Origin::Loaded => "loaded",
            Origin::Conflux => "conflux",
            Origin::Interchange => "interchange",
            Origin::Sprout => "sprout",
            Origin::Couple => "couple",
            Origin::Associate => "associate",
        }
    }

    pub fn parse(s: &str) -> Option<Origin> {
        Origin::ALL.into_iter().find(|o| o.as_str() == s)
    }

    fn color(self) -> &'static str {
        match self {
            Origin::Given => "black",
            Origin::Loaded => "gray50",
            Origin::Conflux => "blue",
            Origin::Interchange => "darkgreen",
            Origin::Sprout => "orange",
            Origin::Couple => "red",
            Origin::Associate => "purple",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsArc {
    pub from: NodeId,
    pub to: NodeId,
    pub step: DirectDerivation,
    pub origin: Origin,
    /// For couple and associate arcs: the embedding of the template graph
    /// into `from`.
    pub embedding: Option<Morphism>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsError {
    #[error("no arc {0}")]
    UnknownArc(ArcId),
    #[error("no node {0}")]
    UnknownNode(NodeId),
    #[error("arcs {0} and {1} do not start at the same node")]
    NotCoinitial(ArcId, ArcId),
    #[error("arc {1} does not start where arc {0} ends")]
    NotChained(ArcId, ArcId),
    #[error("arcs {0} and {1} are not independent: {2}")]
    Dependent(ArcId, ArcId, IndependenceError),
    #[error("sprout failed: {0}")]
    Sprout(RunError),
    #[error("arc {0} was loaded from a file and carries no verified embedding")]
    Untrusted(ArcId),
    #[error("the given arcs do not extend the template under the embedding")]
    NotExtension,
    #[error("the extension is undefined: {0}")]
    Undefined(ExtensionError),
    #[error("the extension of the second derivation does not end in the path's last node")]
    PairEnd,
    #[error("the path is empty or broken")]
    BadPath,
}

/// A derivation structure. Cloning is cheap relative to the graphs, which
/// are shared.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivationStructure {
    nodes: Vec<Arc<Graph>>,
    index: BTreeMap<Arc<Graph>, NodeId>,
    arcs: Vec<DsArc>,
    /// Arcs read back from a file; their recorded origin is not trusted.
    untrusted: BTreeSet<ArcId>,
}

impl DerivationStructure {
    pub fn new() -> DerivationStructure {
        DerivationStructure::default()
    }

    pub fn nodes(&self) -> &[Arc<Graph>] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[DsArc] {
        &self.arcs
    }

    pub fn node(&self, id: NodeId) -> Result<&Arc<Graph>, DsError> {
        self.nodes.get(id).ok_or(DsError::UnknownNode(id))
    }

    pub fn arc(&self, id: ArcId) -> Result<&DsArc, DsError> {
        self.arcs.get(id).ok_or(DsError::UnknownArc(id))
    }

    pub fn node_of(&self, g: &Graph) -> Option<NodeId> {
        self.index.get(g).copied()
    }

    pub fn add_node(&mut self, g: Arc<Graph>) -> NodeId {
        if let Some(&id) = self.index.get(&g) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(g.clone());
        self.index.insert(g, id);
        id
    }

    /// Adds a direct derivation; an arc with the same rule, match and end
    /// nodes is reused.
    pub fn add_arc(&mut self, step: DirectDerivation, origin: Origin, embedding: Option<Morphism>) -> ArcId {
        let from = self.add_node(step.before.clone());
        let to = self.add_node(step.after.clone());
        if let Some(id) = self.arcs.iter().position(|a| {
            a.from == from && a.to == to && Arc::ptr_eq(&a.step.rule, &step.rule) && a.step.matching == step.matching
        }) {
            return id;
        }
        let step = DirectDerivation {
            before: self.nodes[from].clone(),
            after: self.nodes[to].clone(),
            ..step
        };
        self.arcs.push(DsArc {
            from,
            to,
            step,
            origin,
            embedding,
        });
        self.arcs.len() - 1
    }

    /// Adds an arc read from a file. It keeps its recorded origin but never
    /// anchors a couple or associate.
    pub fn add_untrusted_arc(&mut self, step: DirectDerivation, origin: Origin, embedding: Option<Morphism>) -> ArcId {
        let id = self.add_arc(step, origin, embedding);
        self.untrusted.insert(id);
        id
    }

    pub fn is_trusted(&self, id: ArcId) -> bool {
        self.arcs.get(id).is_some_and(|a| a.origin != Origin::Loaded) && !self.untrusted.contains(&id)
    }

    pub fn add_derivation(&mut self, d: &Derivation, origin: Origin) -> Vec<ArcId> {
        self.add_node(d.first().clone());
        d.steps().iter().map(|s| self.add_arc(s.clone(), origin, None)).collect()
    }

    pub fn out_arcs(&self, node: NodeId) -> impl Iterator<Item = ArcId> + '_ {
        self.arcs.iter().enumerate().filter(move |(_, a)| a.from == node).map(|(i, _)| i)
    }

    /// The derivation along consecutive arcs starting at `start`.
    pub fn path(&self, start: NodeId, arcs: &[ArcId]) -> Result<Derivation, DsError> {
        let mut d = Derivation::empty(self.node(start)?.clone());
        let mut at = start;
        for (i, &a) in arcs.iter().enumerate() {
            let arc = self.arc(a)?;
            if arc.from != at {
                return Err(if i == 0 { DsError::BadPath } else { DsError::NotChained(arcs[i - 1], a) });
            }
            d.push(arc.step.clone()).map_err(|_| DsError::BadPath)?;
            at = arc.to;
        }
        Ok(d)
    }

    /// Arc ids of the steps of `d`, when all of them are present.
    pub fn find_derivation(&self, d: &Derivation) -> Option<Vec<ArcId>> {
        d.steps()
            .iter()
            .map(|s| {
                let from = self.node_of(&s.before)?;
                let to = self.node_of(&s.after)?;
                self.arcs.iter().position(|a| {
                    a.from == from && a.to == to && a.step.matching == s.matching && *a.step.rule == *s.rule
                })
            })
            .collect()
    }

    /// Completes a parallel independent pair to a diamond. Returns the arc
    /// applying `a2`'s rule after `a1` and the one applying `a1`'s rule
    /// after `a2`; both end in the same node.
    pub fn apply_conflux(&mut self, a1: ArcId, a2: ArcId) -> Result<[ArcId; 2], DsError> {
        let (d1, d2) = (self.arc(a1)?, self.arc(a2)?);
        if d1.from != d2.from {
            return Err(DsError::NotCoinitial(a1, a2));
        }
        let (d2m, d1m) = close_diamond(&d1.step, &d2.step).map_err(|e| DsError::Dependent(a1, a2, e))?;
        let x = self.add_arc(d2m, Origin::Conflux, None);
        let y = self.add_arc(d1m, Origin::Conflux, None);
        Ok([x, y])
    }

    /// Swaps a sequentially independent pair `a1; a2`. Returns the arcs of
    /// `a2`'s rule first and `a1`'s rule second, ending where `a2` ends.
    pub fn apply_interchange(&mut self, a1: ArcId, a2: ArcId) -> Result<[ArcId; 2], DsError> {
        let (d1, d2) = (self.arc(a1)?, self.arc(a2)?);
        if d1.to != d2.from {
            return Err(DsError::NotChained(a1, a2));
        }
        let (first, second) = swap_sequential(&d1.step, &d2.step).map_err(|e| DsError::Dependent(a1, a2, e))?;
        let x = self.add_arc(first, Origin::Interchange, None);
        let y = self.add_arc(second, Origin::Interchange, None);
        Ok([x, y])
    }

    /// Attaches the greedy run of `funct` at `node`. Returns the new arcs
    /// and the end node.
    pub fn apply_sprout(&mut self, funct: &Unit, node: NodeId) -> Result<(Vec<ArcId>, NodeId), DsError> {
        let g = self.node(node)?.clone();
        let run = run_functional(funct, &g).map_err(DsError::Sprout)?;
        let arcs = self.add_derivation(&run.derivation, Origin::Sprout);
        let end = self.node_of(&run.result).expect("added");
        Ok((arcs, end))
    }

    /// Adds the extension of `span.right` along `e`, given that `anchor`
    /// extends `span.left` along `e`.
    pub fn apply_couple(&mut self, span: &Span, anchor: ArcId, e: &Morphism) -> Result<ArcId, DsError> {
        let a = self.arc(anchor)?;
        if !self.is_trusted(anchor) {
            return Err(DsError::Untrusted(anchor));
        }
        if !extends_step(&span.left, &a.step, e) {
            return Err(DsError::NotExtension);
        }
        let step = apply(&span.right.rule, &a.step.before, &span.right.matching.then(e))
            .map_err(|cause| DsError::Undefined(ExtensionError::Step { step: 0, cause }))?;
        Ok(self.add_arc(step, Origin::Couple, Some(e.clone())))
    }

    /// Adds the extension of `pair.second` between the end nodes of `path`,
    /// given that `path` extends `pair.first` along `e`.
    pub fn apply_associate(&mut self, pair: &DerivationPair, path: &[ArcId], e: &Morphism) -> Result<Vec<ArcId>, DsError> {
        let start = self.arc(*path.first().ok_or(DsError::BadPath)?)?.from;
        for &a in path {
            self.arc(a)?;
            if !self.is_trusted(a) {
                return Err(DsError::Untrusted(a));
            }
        }
        let hat1 = self.path(start, path)?;
        let emb1 = follow_extension(&pair.first, &hat1, e).ok_or(DsError::NotExtension)?;
        let ext2 = extend_derivation(&pair.second, hat1.first(), e).map_err(DsError::Undefined)?;
        if ext2.derivation.is_empty() {
            return Ok(Vec::new());
        }
        // rename the end of the second extension onto the path's end
        let (t1, t2) = (hat1.tracking(), ext2.derivation.tracking());
        let (last1, last2) = (emb1.last().expect("non-empty"), ext2.embeddings.last().expect("non-empty"));
        let mut partial = Morphism::new();
        for (v, a) in &t2.vertices {
            if let Some(b) = t1.vertices.get(v) {
                partial.vertices.insert(*a, *b);
            }
        }
        for (x, a) in &t2.edges {
            if let Some(b) = t1.edges.get(x) {
                partial.edges.insert(*a, *b);
            }
        }
        let pattern = pair.last_iso.then(last1);
        for (y, a) in &last2.vertices {
            if let Some(b) = pattern.vertices.get(y) {
                partial.vertices.insert(*a, *b);
            }
        }
        for (y, a) in &last2.edges {
            if let Some(b) = pattern.edges.get(y) {
                partial.edges.insert(*a, *b);
            }
        }
        let phi = find_isomorphism(ext2.derivation.last(), hat1.last(), &partial).ok_or(DsError::PairEnd)?;
        let mut steps = ext2.derivation.steps().to_vec();
        let last = steps.pop().expect("non-empty").renamed(&phi).ok_or(DsError::PairEnd)?;
        if *last.after != **hat1.last() {
            return Err(DsError::PairEnd);
        }
        steps.push(last);
        Ok(steps
            .into_iter()
            .zip(ext2.embeddings)
            .map(|(s, emb)| self.add_arc(s, Origin::Associate, Some(emb)))
            .collect())
    }
}

/// `step` applies the rule of `template` at the match transported by `e`.
pub fn extends_step(template: &DirectDerivation, step: &DirectDerivation, e: &Morphism) -> bool {
    *template.rule == *step.rule
        && e.is_injective()
        && e.is_morphism(&template.before, &step.before)
        && template.matching.then(e) == step.matching
}

/// Every injective embedding of `template.before` into `step.before` under
/// which `step` extends `template`.
pub fn template_embeddings(template: &DirectDerivation, step: &DirectDerivation) -> Vec<Morphism> {
    if *template.rule != *step.rule {
        return Vec::new();
    }
    let Some(inv) = template.matching.inverse() else {
        return Vec::new();
    };
    let partial = inv.then(&step.matching);
    if partial.vertices.len() != template.matching.vertices.len() || partial.edges.len() != template.matching.edges.len() {
        return Vec::new();
    }
    find_morphisms_from(&template.before, &step.before, true, &partial)
        .into_iter()
        .filter(|e| template.matching.then(e) == step.matching)
        .collect()
}

/// Checks that `hat` applies the steps of `template` at the matches
/// transported by `e`, returning the embeddings of all graphs of `template`.
/// Result graphs of `hat` may carry other ids than fresh applications.
pub fn follow_extension(template: &Derivation, hat: &Derivation, e: &Morphism) -> Option<Vec<Morphism>> {
    if template.len() != hat.len() || !e.is_injective() || !e.is_morphism(template.first(), hat.first()) {
        return None;
    }
    let mut out = alloc::vec![e.clone()];
    for (t, h) in template.steps().iter().zip(hat.steps()) {
        let cur = out.last().expect("non-empty");
        if *t.rule != *h.rule || t.matching.then(cur) != h.matching {
            return None;
        }
        let next = next_embedding(t, h, cur);
        out.push(next);
    }
    Some(out)
}

/// Every embedding of `pair.first.first()` into the start of `path` under
/// which `path` extends `pair.first`.
pub fn pair_embeddings(ds: &DerivationStructure, pair: &DerivationPair, path: &[ArcId]) -> Vec<Morphism> {
    if path.len() != pair.first.len() || path.is_empty() {
        return Vec::new();
    }
    let Ok(start) = ds.arc(path[0]).map(|a| a.from) else {
        return Vec::new();
    };
    let Ok(hat) = ds.path(start, path) else {
        return Vec::new();
    };
    template_embeddings(&pair.first.steps()[0], &hat.steps()[0])
        .into_iter()
        .filter(|e| follow_extension(&pair.first, &hat, e).is_some())
        .collect()
}

pub fn ds_from(derivations: &[Derivation]) -> DerivationStructure {
    let mut ds = DerivationStructure::new();
    for d in derivations {
        ds.add_derivation(d, Origin::Given);
    }
    ds
}

macro_rules! persistent {
    ($(#[$doc:meta])* $name:ident => $method:ident($($arg:ident: $ty:ty),*) -> $out:ty) => {
        $(#[$doc])*
        pub fn $name(ds: &DerivationStructure, $($arg: $ty),*) -> Result<(DerivationStructure, $out), DsError> {
            let mut next = ds.clone();
            let out = next.$method($($arg),*)?;
            Ok((next, out))
        }
    };
}

persistent!(
    /// [`DerivationStructure::apply_conflux`] on a copy.
    conflux => apply_conflux(a1: ArcId, a2: ArcId) -> [ArcId; 2]
);
persistent!(
    /// [`DerivationStructure::apply_interchange`] on a copy.
    interchange => apply_interchange(a1: ArcId, a2: ArcId) -> [ArcId; 2]
);
persistent!(sprout => apply_sprout(funct: &Unit, node: NodeId) -> (Vec<ArcId>, NodeId));
persistent!(couple => apply_couple(span: &Span, anchor: ArcId, e: &Morphism) -> ArcId);
persistent!(associate => apply_associate(pair: &DerivationPair, path: &[ArcId], e: &Morphism) -> Vec<ArcId>);

/// Deterministic DOT text. Nodes are labeled with `aliases` or a short
/// canonical key; arcs with the rule name, colored by origin.
pub fn export_dot(ds: &DerivationStructure, aliases: &BTreeMap<NodeId, String>) -> String {
    let mut out = String::from("digraph ds {\n  node [shape=box];\n");
    for (i, g) in ds.nodes.iter().enumerate() {
        let label = aliases.get(&i).cloned().unwrap_or_else(|| canonical_key(g).short());
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", escape(&label));
    }
    for a in &ds.arcs {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\", color={}];",
            a.from,
            a.to,
            escape(&a.step.rule.name),
            a.origin.color()
        );
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Checks every arc against its end nodes and replays it.
pub fn verify(ds: &DerivationStructure) -> Result<(), (ArcId, ApplyError)> {
    for (i, a) in ds.arcs.iter().enumerate() {
        if *a.step.before != *ds.nodes[a.from] || *a.step.after != *ds.nodes[a.to] {
            return Err((i, ApplyError::NotAMorphism));
        }
        a.step.verify().map_err(|e| (i, e))?;
    }
    Ok(())
}

impl core::fmt::Display for DerivationStructure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} nodes, {} arcs", self.nodes.len(), self.arcs.len())
    }
}

/// Short description used in logs.
pub fn describe_arc(ds: &DerivationStructure, id: ArcId) -> String {
    match ds.arc(id) {
        Ok(a) => format!("n{} ={}=> n{} ({})", a.from, a.step.rule.name, a.to, a.origin.as_str()),
        Err(e) => e.to_string(),
    }
}
