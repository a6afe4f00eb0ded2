//! DOT rendering and derivation-structure files.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use gtukit_core::ds::{DerivationStructure, Origin};
use gtukit_core::graph::{find_isomorphism, Edge, Graph, Morphism};
use gtukit_core::rewrite::{apply, DirectDerivation, Rule};

use crate::format::{invalid, parse_json, FormatError, GraphDto, MorphismDto, Params, RuleDto};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Splits the edges into undirected pairs (two opposite edges with one
/// label) and the rest, smallest ids first.
fn pair_up(g: &Graph) -> (Vec<(&Edge, &Edge)>, Vec<&Edge>) {
    let mut taken = vec![false; g.edges().len()];
    let mut pairs = Vec::new();
    let mut single = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let partner = (!e.is_loop())
            .then(|| {
                g.edges().iter().enumerate().position(|(j, f)| {
                    !taken[j] && f.src == e.tgt && f.tgt == e.src && f.label == e.label
                })
            })
            .flatten();
        match partner {
            Some(j) => {
                taken[j] = true;
                pairs.push((e, &g.edges()[j]));
            }
            None => single.push(e),
        }
    }
    (pairs, single)
}

/// DOT text for a graph. Undirected pairs become one edge without arrow;
/// unlabeled items carry no label.
pub fn graph_dot(g: &Graph, name: &str) -> String {
    let mut out = format!("digraph {} {{\n", quote(name));
    for v in g.vertices() {
        let _ = writeln!(out, "  {v};");
    }
    let attrs = |e: &Edge, undirected: bool| {
        let mut a = Vec::new();
        if !e.label.is_unlabeled() {
            a.push(format!("label={}", quote(e.label.as_str())));
        }
        if undirected {
            a.push("dir=none".to_string());
        }
        if a.is_empty() {
            String::new()
        } else {
            format!(" [{}]", a.join(", "))
        }
    };
    let (pairs, single) = pair_up(g);
    for (e, _) in pairs {
        let _ = writeln!(out, "  {} -> {}{};", e.src, e.tgt, attrs(e, true));
    }
    for e in single {
        let _ = writeln!(out, "  {} -> {}{};", e.src, e.tgt, attrs(e, false));
    }
    out.push_str("}\n");
    out
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DsNodeDto {
    pub id: usize,
    pub graph: GraphDto,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DsArcDto {
    pub from: usize,
    pub to: usize,
    /// Index into the rule table.
    pub rule: usize,
    #[serde(rename = "match")]
    pub matching: MorphismDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comatch: Option<MorphismDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept: Option<MorphismDto>,
    pub origin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<MorphismDto>,
}

/// Rules are stored once in a table since names repeat across units.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DsDto {
    pub rules: Vec<RuleDto>,
    pub nodes: Vec<DsNodeDto>,
    pub arcs: Vec<DsArcDto>,
}

impl DsDto {
    pub fn from_ds(ds: &DerivationStructure) -> DsDto {
        let mut rules: Vec<Arc<Rule>> = Vec::new();
        let mut arcs = Vec::new();
        for a in ds.arcs() {
            let rule = match rules.iter().position(|r| Arc::ptr_eq(r, &a.step.rule) || **r == *a.step.rule) {
                Some(i) => i,
                None => {
                    rules.push(a.step.rule.clone());
                    rules.len() - 1
                }
            };
            arcs.push(DsArcDto {
                from: a.from,
                to: a.to,
                rule,
                matching: MorphismDto::from_morphism(&a.step.matching),
                comatch: Some(MorphismDto::from_morphism(&a.step.comatch)),
                kept: Some(MorphismDto::from_morphism(&a.step.kept)),
                origin: a.origin.as_str().to_string(),
                embedding: a.embedding.as_ref().map(MorphismDto::from_morphism),
            });
        }
        DsDto {
            rules: rules.iter().map(|r| RuleDto::from_rule(r)).collect(),
            nodes: ds
                .nodes()
                .iter()
                .enumerate()
                .map(|(id, g)| DsNodeDto {
                    id,
                    graph: GraphDto::from_graph(g),
                })
                .collect(),
            arcs,
        }
    }

    /// Rebuilds the structure. Every arc is replayed; all arcs come back
    /// untrusted.
    pub fn to_ds(&self) -> Result<DerivationStructure, FormatError> {
        let params = Params::new();
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_rule(&format!("/rules/{i}"), &params).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        let mut nodes = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let g = Arc::new(n.graph.to_graph(&format!("/nodes/{i}/graph"), &params)?);
            if nodes.insert(n.id, g).is_some() {
                return Err(invalid(&format!("/nodes/{i}/id"), "duplicate node id"));
            }
        }
        let mut ds = DerivationStructure::new();
        let mut order: Vec<usize> = nodes.keys().copied().collect();
        order.sort_unstable();
        for id in &order {
            let got = ds.add_node(nodes[id].clone());
            if got != *id {
                return Err(invalid("/nodes", "node ids must be 0..n with distinct graphs"));
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let at = format!("/arcs/{i}");
            let rule = rules.get(a.rule).ok_or_else(|| invalid(&format!("{at}/rule"), "no such rule"))?;
            let from = nodes.get(&a.from).ok_or_else(|| invalid(&format!("{at}/from"), "no such node"))?;
            let to = nodes.get(&a.to).ok_or_else(|| invalid(&format!("{at}/to"), "no such node"))?;
            let matching = a.matching.to_morphism(&format!("{at}/match"))?;
            let step = match (&a.comatch, &a.kept) {
                (Some(c), Some(k)) => DirectDerivation {
                    before: from.clone(),
                    after: to.clone(),
                    rule: rule.clone(),
                    matching,
                    comatch: c.to_morphism(&format!("{at}/comatch"))?,
                    kept: k.to_morphism(&format!("{at}/kept"))?,
                },
                _ => {
                    let fresh = apply(rule, from, &matching).map_err(|e| invalid(&at, e))?;
                    let phi = find_isomorphism(&fresh.after, to, &Morphism::new())
                        .ok_or_else(|| invalid(&format!("{at}/to"), "result graph does not match"))?;
                    let renamed = fresh.renamed(&phi).ok_or_else(|| invalid(&at, "bad renaming"))?;
                    DirectDerivation {
                        after: to.clone(),
                        ..renamed
                    }
                }
            };
            step.verify().map_err(|e| invalid(&at, e))?;
            let origin = Origin::parse(&a.origin).ok_or_else(|| invalid(&format!("{at}/origin"), "unknown origin"))?;
            let embedding = a.embedding.as_ref().map(|m| m.to_morphism(&format!("{at}/embedding"))).transpose()?;
            ds.add_untrusted_arc(step, origin, embedding);
        }
        Ok(ds)
    }
}

pub fn load_ds_text(text: &str) -> Result<DerivationStructure, FormatError> {
    parse_json::<DsDto>(text)?.to_ds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::load_graph;
    use crate::format::to_json;
    use gtukit_core::ds::ds_from;

    #[test]
    fn fig1c_has_five_undirected_edges() {
        let dot = graph_dot(&load_graph("fig1c").unwrap(), "fig1c");
        assert_eq!(dot.matches("dir=none").count(), 5);
        assert_eq!(dot.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("->")).count(), 5);
    }

    #[test]
    fn loops_keep_labels() {
        let dot = graph_dot(&load_graph("fig2d").unwrap(), "g");
        assert!(dot.contains("5 -> 5 [label=\"bound\"]"));
        assert_eq!(dot.matches("5 -> 5;").count(), 3);
    }

    #[test]
    fn ds_round_trip() {
        let f = crate::fixtures::figure_derivation("fig2d").unwrap();
        let ds = ds_from(&[f.derivation]);
        let text = to_json(&DsDto::from_ds(&ds));
        let back = load_ds_text(&text).unwrap();
        assert_eq!(back.nodes(), ds.nodes());
        assert_eq!(to_json(&DsDto::from_ds(&back)), text);
        assert!(!back.is_trusted(0));
    }
}
