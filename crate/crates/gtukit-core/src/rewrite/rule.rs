use alloc::collections::BTreeSet;
use alloc::string::String;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, Morphism, VertexId};

/// A negative application condition: a supergraph `N` of the left-hand side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Nac {
    pub graph: Graph,
    pub l_in_n: Morphism,
}

/// A rule `L ⊇ K ⊆ R`, optionally with a NAC and the `(inj)` flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub left: Graph,
    pub gluing: Graph,
    pub right: Graph,
    pub k_in_l: Morphism,
    pub k_in_r: Morphism,
    pub nac: Option<Nac>,
    pub injective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {0}: gluing graph is not a subgraph of the left-hand side")]
    GluingNotInLeft(String),
    #[error("rule {0}: gluing graph is not a subgraph of the right-hand side")]
    GluingNotInRight(String),
    #[error("rule {0}: the NAC does not contain the left-hand side")]
    NacNotOverLeft(String),
}

fn is_embedding(m: &Morphism, from: &Graph, to: &Graph) -> bool {
    m.is_morphism(from, to) && m.is_injective()
}

impl Rule {
    pub fn new(
        name: impl Into<String>,
        left: Graph,
        gluing: Graph,
        right: Graph,
        k_in_l: Morphism,
        k_in_r: Morphism,
        nac: Option<Nac>,
        injective: bool,
    ) -> Result<Rule, RuleError> {
        let name = name.into();
        if !is_embedding(&k_in_l, &gluing, &left) {
            return Err(RuleError::GluingNotInLeft(name));
        }
        if !is_embedding(&k_in_r, &gluing, &right) {
            return Err(RuleError::GluingNotInRight(name));
        }
        if let Some(n) = &nac {
            if !is_embedding(&n.l_in_n, &left, &n.graph) {
                return Err(RuleError::NacNotOverLeft(name));
            }
        }
        Ok(Rule {
            name,
            left,
            gluing,
            right,
            k_in_l,
            k_in_r,
            nac,
            injective,
        })
    }

    /// `K` shares ids with `L` and `R`.
    pub fn by_ids(
        name: impl Into<String>,
        left: Graph,
        gluing: Graph,
        right: Graph,
        nac: Option<Graph>,
        injective: bool,
    ) -> Result<Rule, RuleError> {
        let id = Morphism::identity(&gluing);
        let nac = nac.map(|graph| Nac {
            l_in_n: Morphism::identity(&left),
            graph,
        });
        Rule::new(name, left, gluing, right, id.clone(), id, nac, injective)
    }

    /// `L = K = R = g`.
    pub fn identity(name: impl Into<String>, g: &Graph) -> Rule {
        Rule::by_ids(name, g.clone(), g.clone(), g.clone(), None, false).expect("identity")
    }

    /// `R ⊇ K ⊆ L`, without NAC.
    pub fn inverse(&self) -> Rule {
        Rule {
            name: alloc::format!("{}^-1", self.name),
            left: self.right.clone(),
            gluing: self.gluing.clone(),
            right: self.left.clone(),
            k_in_l: self.k_in_r.clone(),
            k_in_r: self.k_in_l.clone(),
            nac: None,
            injective: self.injective,
        }
    }

    /// Vertices and edges of `L` outside the image of `K`.
    pub fn deleted(&self) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
        outside(&self.left, &self.k_in_l)
    }

    /// Vertices and edges of `R` outside the image of `K`.
    pub fn created(&self) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
        outside(&self.right, &self.k_in_r)
    }

    /// Same rule structure; the name is ignored.
    pub fn same_shape(&self, other: &Rule) -> bool {
        self.left == other.left
            && self.gluing == other.gluing
            && self.right == other.right
            && self.k_in_l == other.k_in_l
            && self.k_in_r == other.k_in_r
            && self.nac == other.nac
            && self.injective == other.injective
    }

    pub fn is_identity(&self) -> bool {
        let (dv, de) = self.deleted();
        let (cv, ce) = self.created();
        dv.is_empty() && de.is_empty() && cv.is_empty() && ce.is_empty() && self.nac.is_none()
    }
}

fn outside(g: &Graph, k: &Morphism) -> (BTreeSet<VertexId>, BTreeSet<EdgeId>) {
    let iv = k.image_vertices();
    let ie = k.image_edges();
    (
        g.vertices().iter().copied().filter(|v| !iv.contains(v)).collect(),
        g.edges().iter().map(|e| e.id).filter(|e| !ie.contains(e)).collect(),
    )
}
