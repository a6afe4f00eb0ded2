//! Proof configurations: a reduction with spans, derivation pairs and
//! functional sections, plus an instance and witnesses to run it on.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use gtukit_core::graph::Graph;
use gtukit_core::proof::{transport_derivation, ProofConfig, Section, Side};
use gtukit_core::rewrite::{Derivation, DerivationPair, Span};
use gtukit_core::unit::{run_functional, GraphClass, Unit};

use crate::fixtures::{figure_derivation, fixture_text, load_graph, read_file, reduction_by_name};
use crate::format::{find_rule, invalid, parse_json, replay_steps, FormatError, GraphDto, Params, StepDto};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SpanDto {
    pub name: String,
    pub graph: GraphDto,
    /// A step of the source unit.
    pub left: StepDto,
    /// A step of the target unit.
    pub right: StepDto,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PairDto {
    pub name: String,
    pub graph: GraphDto,
    pub first: Vec<StepDto>,
    pub second: Vec<StepDto>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SideDto {
    Source,
    Target,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SectionDto {
    pub owner: SideDto,
    pub rules: Vec<String>,
    pub cond: String,
    pub trigger: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ProofDto {
    pub name: String,
    pub reduction: String,
    /// Reduction rules applied before the others.
    #[serde(default)]
    pub first_part: Vec<String>,
    /// Pairs are on the target side.
    #[serde(default)]
    pub spans: Vec<SpanDto>,
    #[serde(default)]
    pub pairs: Vec<PairDto>,
    #[serde(default)]
    pub sections: Vec<SectionDto>,
    /// Instance file or built-in instance name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    /// Derivation fixtures used as witnesses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward_witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward_witness: Option<String>,
    /// A target witness that needs preprocessing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rearrange_witness: Option<String>,
}

/// A loaded configuration with its instance and witnesses, the latter
/// already placed on the instance and on its reduction result.
pub struct LoadedProof {
    pub name: String,
    pub cfg: ProofConfig,
    pub instance: Option<Arc<Graph>>,
    pub forward_witness: Option<Derivation>,
    pub backward_witness: Option<Derivation>,
    pub rearrange_witness: Option<Derivation>,
}

fn rule_pos(unit: &Unit, name: &str, path: &str) -> Result<usize, FormatError> {
    find_rule(&unit.rules, name).ok_or_else(|| invalid(path, format!("no rule {name:?} in {}", unit.name)))
}

fn one_step(start: &Arc<Graph>, step: &StepDto, unit: &Unit, path: &str) -> Result<gtukit_core::rewrite::DirectDerivation, FormatError> {
    let d = replay_steps(start.clone(), std::slice::from_ref(step), &unit.rules, path)?;
    Ok(d.steps()[0].clone())
}

impl ProofDto {
    pub fn to_config(&self) -> Result<ProofConfig, FormatError> {
        let red = reduction_by_name(&self.reduction)?;
        let first_part = self
            .first_part
            .iter()
            .enumerate()
            .map(|(i, r)| rule_pos(&red.unit, r, &format!("/first_part/{i}")))
            .collect::<Result<_, _>>()?;
        let mut spans = Vec::new();
        for (i, s) in self.spans.iter().enumerate() {
            let at = format!("/spans/{i}");
            let g = Arc::new(s.graph.to_graph(&format!("{at}/graph"), &Params::new())?);
            let left = one_step(&g, &s.left, &red.source, &format!("{at}/left"))?;
            let right = one_step(&g, &s.right, &red.target, &format!("{at}/right"))?;
            spans.push(Span::new(left, right).map_err(|e| invalid(&at, e))?);
        }
        let mut pairs = Vec::new();
        for (i, p) in self.pairs.iter().enumerate() {
            let at = format!("/pairs/{i}");
            let g = Arc::new(p.graph.to_graph(&format!("{at}/graph"), &Params::new())?);
            let first = replay_steps(g.clone(), &p.first, &red.target.rules, &format!("{at}/first"))?;
            let second = replay_steps(g, &p.second, &red.target.rules, &format!("{at}/second"))?;
            pairs.push(DerivationPair::new(first, second).map_err(|e| invalid(&at, e))?);
        }
        let mut sections = Vec::new();
        for (i, s) in self.sections.iter().enumerate() {
            let at = format!("/sections/{i}");
            let (owner, unit) = match s.owner {
                SideDto::Source => (Side::Source, &red.source),
                SideDto::Target => (Side::Target, &red.target),
            };
            let keep = s
                .rules
                .iter()
                .enumerate()
                .map(|(j, r)| rule_pos(unit, r, &format!("{at}/rules/{j}")))
                .collect::<Result<Vec<_>, _>>()?;
            let funct = Unit::new(
                format!("{}[{}]", unit.name, s.cond),
                GraphClass::All,
                keep.iter().map(|&k| unit.rules[k].clone()).collect(),
                Some(&s.cond),
                GraphClass::All,
            )
            .map_err(|e| invalid(&format!("{at}/cond"), e))?;
            let trigger = rule_pos(unit, &s.trigger, &format!("{at}/trigger"))?;
            sections.push(Section { owner, funct, trigger });
        }
        let cfg = ProofConfig {
            source: red.source,
            target: red.target,
            red: red.unit,
            first_part,
            spans,
            pairs,
            sections,
        };
        cfg.validate().map_err(|e| invalid("", e))?;
        Ok(cfg)
    }
}

fn witness_on(name: &str, onto: &Arc<Graph>, field: &str) -> Result<Derivation, FormatError> {
    let f = figure_derivation(name)?;
    transport_derivation(&f.derivation, onto)
        .ok_or_else(|| invalid(field, format!("{name} does not start at a graph isomorphic to the instance")))
}

pub fn load_proof_text(text: &str) -> Result<LoadedProof, FormatError> {
    let dto: ProofDto = parse_json(text)?;
    let cfg = dto.to_config()?;
    let instance = dto.instance.as_deref().map(load_graph).transpose()?.map(Arc::new);
    let (mut fw, mut bw, mut rw) = (None, None, None);
    if let Some(g) = &instance {
        let reduced = run_functional(&cfg.red, g).map_err(|e| invalid("/instance", e))?.result;
        if let Some(n) = &dto.forward_witness {
            fw = Some(witness_on(n, g, "/forward_witness")?);
        }
        if let Some(n) = &dto.backward_witness {
            bw = Some(witness_on(n, &reduced, "/backward_witness")?);
        }
        if let Some(n) = &dto.rearrange_witness {
            rw = Some(witness_on(n, &reduced, "/rearrange_witness")?);
        }
    }
    Ok(LoadedProof {
        name: dto.name,
        cfg,
        instance,
        forward_witness: fw,
        backward_witness: bw,
        rearrange_witness: rw,
    })
}

/// `example8`, `example9` or a file path.
pub fn load_proof(name: &str) -> Result<LoadedProof, FormatError> {
    let p = Path::new(name);
    if p.is_file() {
        return load_proof_text(&read_file(p)?);
    }
    let rel = format!("proofs/{name}.json");
    load_proof_text(&fixture_text(&rel)?).map_err(|e| match e {
        FormatError::Invalid { path, msg } => FormatError::Invalid { path: format!("{rel}#{path}"), msg },
        other => other,
    })
}
