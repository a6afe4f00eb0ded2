//! JSON formats for graphs, rules, units, derivations and structures.
//!
//! Fixture files may use shorthand edge entries: `{"id":1,"pair":[u,v]}`
//! for an undirected edge (ids `id`, `id+1`) and
//! `{"id":3,"loops":v,"labels":"*,*,β"}` for a list of loops (consecutive
//! ids). A `"repeat"` field repeats the loop list, either a number or the
//! name of a unit parameter. Saved files always use the plain form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use gtukit_core::graph::{Edge, Graph, Label, Morphism};
use gtukit_core::rewrite::{apply, applicable_matches, Derivation, Nac, Rule};
use gtukit_core::unit::{GraphClass, Unit};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("{0}")]
    Json(String),
    #[error("fixture {0:?} not found")]
    Missing(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub fn invalid(path: &str, msg: impl fmt::Display) -> FormatError {
    FormatError::Invalid {
        path: if path.is_empty() { "/".into() } else { path.into() },
        msg: msg.to_string(),
    }
}

/// Deserializes with the JSON pointer of the failing value in the error.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        use serde_path_to_error::Segment;
        let mut pointer = String::new();
        for seg in e.path().iter() {
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{key}")),
                Segment::Enum { variant } => pointer.push_str(&format!("/{variant}")),
                Segment::Unknown => pointer.push_str("/?"),
            }
        }
        if pointer.is_empty() {
            pointer.push('/');
        }
        FormatError::Json(format!("{pointer}: {}", e.inner()))
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Unit parameters such as `k`.
pub type Params = BTreeMap<String, usize>;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EdgeDto {
    pub id: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub src: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tgt: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loops: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphDto {
    pub vertices: Vec<u32>,
    #[serde(default)]
    pub edges: Vec<EdgeDto>,
}

fn label(path: &str, s: &str) -> Result<Label, FormatError> {
    Label::new(s).map_err(|e| invalid(path, e))
}

fn repeat_count(path: &str, v: &Option<serde_json::Value>, params: &Params) -> Result<usize, FormatError> {
    match v {
        None => Ok(1),
        Some(serde_json::Value::Number(n)) => n
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| invalid(path, "repeat must be a natural number")),
        Some(serde_json::Value::String(p)) => params
            .get(p)
            .copied()
            .ok_or_else(|| invalid(path, format!("unbound parameter {p:?}"))),
        Some(_) => Err(invalid(path, "repeat must be a number or a parameter name")),
    }
}

impl GraphDto {
    pub fn from_graph(g: &Graph) -> GraphDto {
        GraphDto {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDto {
                    id: e.id,
                    src: Some(e.src),
                    tgt: Some(e.tgt),
                    label: Some(e.label.as_str().to_string()),
                    ..Default::default()
                })
                .collect(),
        }
    }

    pub fn to_graph(&self, path: &str, params: &Params) -> Result<Graph, FormatError> {
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let p = format!("{path}/edges/{i}");
            let shapes = [e.src.is_some() || e.tgt.is_some(), e.pair.is_some(), e.loops.is_some()];
            if shapes.iter().filter(|&&b| b).count() != 1 {
                return Err(invalid(&p, "an edge needs exactly one of src/tgt, pair or loops"));
            }
            if let Some([u, v]) = e.pair {
                if e.labels.is_some() || e.repeat.is_some() {
                    return Err(invalid(&p, "labels/repeat only apply to loops"));
                }
                let l = label(&p, e.label.as_deref().unwrap_or("*"))?;
                edges.push(Edge { id: e.id, src: u, tgt: v, label: l.clone() });
                edges.push(Edge { id: e.id + 1, src: v, tgt: u, label: l });
            } else if let Some(v) = e.loops {
                if e.label.is_some() {
                    return Err(invalid(&p, "loop lists use \"labels\""));
                }
                let list = e.labels.as_deref().unwrap_or("*");
                let times = repeat_count(&p, &e.repeat, params)?;
                let mut id = e.id;
                for _ in 0..times {
                    for l in list.split(',') {
                        edges.push(Edge { id, src: v, tgt: v, label: label(&p, l.trim())? });
                        id += 1;
                    }
                }
            } else {
                let (Some(src), Some(tgt)) = (e.src, e.tgt) else {
                    return Err(invalid(&p, "an edge needs both src and tgt"));
                };
                if e.labels.is_some() || e.repeat.is_some() {
                    return Err(invalid(&p, "labels/repeat only apply to loops"));
                }
                edges.push(Edge { id: e.id, src, tgt, label: label(&p, e.label.as_deref().unwrap_or("*"))? });
            }
        }
        Graph::from_parts(self.vertices.iter().copied(), edges).map_err(|e| invalid(path, e))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MorphismDto {
    #[serde(default)]
    pub vertices: Vec<[u32; 2]>,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
}

impl MorphismDto {
    pub fn from_morphism(m: &Morphism) -> MorphismDto {
        MorphismDto {
            vertices: m.vertices.iter().map(|(&a, &b)| [a, b]).collect(),
            edges: m.edges.iter().map(|(&a, &b)| [a, b]).collect(),
        }
    }

    pub fn to_morphism(&self, path: &str) -> Result<Morphism, FormatError> {
        let mut m = Morphism::new();
        for (i, [a, b]) in self.vertices.iter().enumerate() {
            if m.vertices.insert(*a, *b).is_some() {
                return Err(invalid(&format!("{path}/vertices/{i}"), "vertex mapped twice"));
            }
        }
        for (i, [a, b]) in self.edges.iter().enumerate() {
            if m.edges.insert(*a, *b).is_some() {
                return Err(invalid(&format!("{path}/edges/{i}"), "edge mapped twice"));
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NacDto {
    pub graph: GraphDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_in_n: Option<MorphismDto>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RuleDto {
    pub name: String,
    #[serde(rename = "L")]
    pub left: GraphDto,
    #[serde(rename = "K")]
    pub gluing: GraphDto,
    #[serde(rename = "R")]
    pub right: GraphDto,
    /// Defaults to the identity on `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_in_l: Option<MorphismDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_in_r: Option<MorphismDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nac: Option<NacDto>,
    #[serde(default)]
    pub injective: bool,
}

impl RuleDto {
    pub fn from_rule(r: &Rule) -> RuleDto {
        RuleDto {
            name: r.name.clone(),
            left: GraphDto::from_graph(&r.left),
            gluing: GraphDto::from_graph(&r.gluing),
            right: GraphDto::from_graph(&r.right),
            k_in_l: Some(MorphismDto::from_morphism(&r.k_in_l)),
            k_in_r: Some(MorphismDto::from_morphism(&r.k_in_r)),
            nac: r.nac.as_ref().map(|n| NacDto {
                graph: GraphDto::from_graph(&n.graph),
                l_in_n: Some(MorphismDto::from_morphism(&n.l_in_n)),
            }),
            injective: r.injective,
        }
    }

    pub fn to_rule(&self, path: &str, params: &Params) -> Result<Rule, FormatError> {
        let left = self.left.to_graph(&format!("{path}/L"), params)?;
        let gluing = self.gluing.to_graph(&format!("{path}/K"), params)?;
        let right = self.right.to_graph(&format!("{path}/R"), params)?;
        let id_k = Morphism::identity(&gluing);
        let k_in_l = match &self.k_in_l {
            Some(m) => m.to_morphism(&format!("{path}/k_in_l"))?,
            None => id_k.clone(),
        };
        let k_in_r = match &self.k_in_r {
            Some(m) => m.to_morphism(&format!("{path}/k_in_r"))?,
            None => id_k,
        };
        let nac = match &self.nac {
            Some(n) => Some(Nac {
                graph: n.graph.to_graph(&format!("{path}/nac/graph"), params)?,
                l_in_n: match &n.l_in_n {
                    Some(m) => m.to_morphism(&format!("{path}/nac/l_in_n"))?,
                    None => Morphism::identity(&left),
                },
            }),
            None => None,
        };
        Rule::new(self.name.clone(), left, gluing, right, k_in_l, k_in_r, nac, self.injective)
            .map_err(|e| invalid(path, e))
    }
}

/// Graph class expressions: a string such as `"standard + bound"`, or an
/// object `{"forbidden":[...]}`, `{"plus":[a,b]}`, `{"reduced":[rules]}`,
/// `{"bound":k}`, `{"initial_of":"clique"}`, `{"terminal_of":"clique"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ClassDto {
    Name(String),
    Object(ClassObject),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassObject {
    Forbidden(Vec<GraphDto>),
    Plus(Box<[ClassDto; 2]>),
    Reduced(Vec<RuleDto>),
    Bound(usize),
    InitialOf(String),
    TerminalOf(String),
}

/// Resolves `initial_of` / `terminal_of` references.
pub trait UnitResolver {
    fn unit(&self, name: &str) -> Result<Unit, FormatError>;
}

pub struct NoResolver;

impl UnitResolver for NoResolver {
    fn unit(&self, name: &str) -> Result<Unit, FormatError> {
        Err(FormatError::Missing(name.to_string()))
    }
}

fn class_name(path: &str, s: &str, rules: &[Arc<Rule>]) -> Result<GraphClass, FormatError> {
    let parts: Vec<&str> = s.split('+').map(str::trim).collect();
    if parts.len() > 1 {
        let mut it = parts.iter().rev();
        let mut acc = class_name(path, it.next().unwrap(), rules)?;
        for p in it {
            acc = GraphClass::plus(class_name(path, p, rules)?, acc);
        }
        return Ok(acc);
    }
    Ok(match s {
        "all" => GraphClass::All,
        "standard" => GraphClass::Standard,
        "undirected" => GraphClass::Undirected,
        "unlabeled" => GraphClass::Unlabeled,
        "simple" => GraphClass::Simple,
        "loop-free" => GraphClass::LoopFree,
        "bound" => GraphClass::Bound(None),
        "reduced" => GraphClass::Reduced(rules.to_vec()),
        _ => {
            if let Some(k) = s.strip_prefix("bound(").and_then(|r| r.strip_suffix(')')) {
                return k
                    .trim()
                    .parse()
                    .map(|k| GraphClass::Bound(Some(k)))
                    .map_err(|_| invalid(path, format!("bad bound {k:?}")));
            }
            return Err(invalid(path, format!("unknown class {s:?}")));
        }
    })
}

impl ClassDto {
    /// `rules` are the unit's own rules, used by a bare `"reduced"`.
    pub fn to_class(
        &self,
        path: &str,
        params: &Params,
        rules: &[Arc<Rule>],
        resolver: &dyn UnitResolver,
    ) -> Result<GraphClass, FormatError> {
        match self {
            ClassDto::Name(s) => class_name(path, s, rules),
            ClassDto::Object(o) => match o {
                ClassObject::Forbidden(gs) => Ok(GraphClass::Forbidden(
                    gs.iter()
                        .enumerate()
                        .map(|(i, g)| g.to_graph(&format!("{path}/forbidden/{i}"), params))
                        .collect::<Result<_, _>>()?,
                )),
                ClassObject::Plus(ab) => Ok(GraphClass::plus(
                    ab[0].to_class(&format!("{path}/plus/0"), params, rules, resolver)?,
                    ab[1].to_class(&format!("{path}/plus/1"), params, rules, resolver)?,
                )),
                ClassObject::Reduced(rs) => Ok(GraphClass::Reduced(
                    rs.iter()
                        .enumerate()
                        .map(|(i, r)| r.to_rule(&format!("{path}/reduced/{i}"), params).map(Arc::new))
                        .collect::<Result<_, _>>()?,
                )),
                ClassObject::Bound(k) => Ok(GraphClass::Bound(Some(*k))),
                ClassObject::InitialOf(u) => Ok(resolver.unit(u)?.initial),
                ClassObject::TerminalOf(u) => Ok(resolver.unit(u)?.terminal),
            },
        }
    }

    pub fn from_class(c: &GraphClass) -> ClassDto {
        let name = |s: &str| ClassDto::Name(s.to_string());
        match c {
            GraphClass::All => name("all"),
            GraphClass::Standard => name("standard"),
            GraphClass::Undirected => name("undirected"),
            GraphClass::Unlabeled => name("unlabeled"),
            GraphClass::Simple => name("simple"),
            GraphClass::LoopFree => name("loop-free"),
            GraphClass::Bound(None) => name("bound"),
            GraphClass::Bound(Some(k)) => ClassDto::Object(ClassObject::Bound(*k)),
            GraphClass::Forbidden(gs) => {
                ClassDto::Object(ClassObject::Forbidden(gs.iter().map(GraphDto::from_graph).collect()))
            }
            GraphClass::Reduced(rs) => {
                ClassDto::Object(ClassObject::Reduced(rs.iter().map(|r| RuleDto::from_rule(r)).collect()))
            }
            GraphClass::Plus(a, b) => ClassDto::Object(ClassObject::Plus(Box::new([
                ClassDto::from_class(a),
                ClassDto::from_class(b),
            ]))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct UnitDto {
    pub name: String,
    /// Parameter names such as `["k"]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    pub initial: ClassDto,
    #[serde(default)]
    pub rules: Vec<RuleDto>,
    /// Missing means `(1|…|n)*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<String>,
    pub terminal: ClassDto,
}

impl UnitDto {
    pub fn from_unit(u: &Unit) -> UnitDto {
        UnitDto {
            name: u.name.clone(),
            params: Vec::new(),
            initial: ClassDto::from_class(&u.initial),
            rules: u.rules.iter().map(|r| RuleDto::from_rule(r)).collect(),
            cond: Some(u.control.expr.to_string()),
            terminal: ClassDto::from_class(&u.terminal),
        }
    }

    pub fn to_unit(&self, params: &Params, resolver: &dyn UnitResolver) -> Result<Unit, FormatError> {
        for p in &self.params {
            if !params.contains_key(p) {
                return Err(invalid("/params", format!("parameter {p:?} needs a value")));
            }
        }
        let rules: Vec<Arc<Rule>> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_rule(&format!("/rules/{i}"), params).map(Arc::new))
            .collect::<Result<_, _>>()?;
        let initial = self.initial.to_class("/initial", params, &rules, resolver)?;
        let terminal = self.terminal.to_class("/terminal", params, &rules, resolver)?;
        let name = if self.params.is_empty() {
            self.name.clone()
        } else {
            let vals: Vec<String> = self.params.iter().map(|p| params[p].to_string()).collect();
            format!("{}({})", self.name, vals.join(","))
        };
        Unit::new(name, initial, rules, self.cond.as_deref(), terminal).map_err(|e| invalid("/cond", e))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct StepDto {
    /// Rule name or 1-based position.
    pub rule: String,
    /// May be partial in fixtures; the first applicable match extending it
    /// is used.
    #[serde(rename = "match")]
    pub matching: MorphismDto,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DerivationDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub start: GraphDto,
    pub steps: Vec<StepDto>,
    /// Expected last graph up to isomorphism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last: Option<GraphDto>,
}

/// Looks a rule up by name, then by 1-based position.
pub fn find_rule(rules: &[Arc<Rule>], name: &str) -> Option<usize> {
    rules.iter().position(|r| r.name == name).or_else(|| {
        name.parse::<usize>()
            .ok()
            .filter(|k| (1..=rules.len()).contains(k))
            .map(|k| k - 1)
    })
}

impl DerivationDto {
    pub fn from_derivation(unit: Option<&str>, d: &Derivation) -> DerivationDto {
        DerivationDto {
            unit: unit.map(str::to_string),
            start: GraphDto::from_graph(d.first()),
            steps: d
                .steps()
                .iter()
                .map(|s| StepDto {
                    rule: s.rule.name.clone(),
                    matching: MorphismDto::from_morphism(&s.matching),
                })
                .collect(),
            last: None,
        }
    }

    /// Replays the steps with `rules`, completing partial matches.
    pub fn replay(&self, rules: &[Arc<Rule>]) -> Result<Derivation, FormatError> {
        let start = Arc::new(self.start.to_graph("/start", &Params::new())?);
        replay_steps(start, &self.steps, rules, "/steps")
    }
}

/// Applies `steps` from `start`; partial matches are completed to the first
/// applicable match that extends them.
pub fn replay_steps(start: Arc<Graph>, steps: &[StepDto], rules: &[Arc<Rule>], at: &str) -> Result<Derivation, FormatError> {
    let mut d = Derivation::empty(start);
    for (i, s) in steps.iter().enumerate() {
        let path = format!("{at}/{i}");
        let r = find_rule(rules, &s.rule).ok_or_else(|| invalid(&path, format!("unknown rule {:?}", s.rule)))?;
        let partial = s.matching.to_morphism(&format!("{path}/match"))?;
        let rule = &rules[r];
        let m = applicable_matches(rule, d.last())
            .into_iter()
            .find(|m| {
                partial.vertices.iter().all(|(a, b)| m.vertices.get(a) == Some(b))
                    && partial.edges.iter().all(|(a, b)| m.edges.get(a) == Some(b))
            })
            .ok_or_else(|| invalid(&path, "no applicable match extends the given one"))?;
        let step = apply(rule, d.last(), &m).map_err(|e| invalid(&path, e))?;
        d.push(step).expect("chained");
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_expansion() {
        let dto: GraphDto = parse_json(
            r#"{"vertices":[1,2],"edges":[{"id":1,"pair":[1,2]},{"id":3,"loops":1,"labels":"*,*,β"},
               {"id":6,"loops":2,"labels":"*","repeat":"k"}]}"#,
        )
        .unwrap();
        let mut p = Params::new();
        p.insert("k".into(), 2);
        let g = dto.to_graph("", &p).unwrap();
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.loops_at(1).count(), 3);
        assert_eq!(g.loops_at(2).count(), 2);
        let back = GraphDto::from_graph(&g);
        assert_eq!(back.to_graph("", &Params::new()).unwrap(), g);
        assert!(dto.to_graph("", &Params::new()).is_err());
    }

    #[test]
    fn errors_carry_pointers() {
        let err = parse_json::<GraphDto>(r#"{"vertices":[1],"edges":[{"id":"x"}]}"#).unwrap_err();
        assert!(err.to_string().starts_with("/edges/0/id"), "{err}");
        let dto: GraphDto = parse_json(r#"{"vertices":[1],"edges":[{"id":0,"src":1,"tgt":9}]}"#).unwrap();
        let err = dto.to_graph("/start", &Params::new()).unwrap_err();
        assert!(err.to_string().starts_with("/start"), "{err}");
    }

    #[test]
    fn class_strings() {
        let c = ClassDto::Name("standard + bound".into())
            .to_class("", &Params::new(), &[], &NoResolver)
            .unwrap();
        assert_eq!(c, GraphClass::standard_with_bound());
        assert_eq!(ClassDto::from_class(&GraphClass::Bound(Some(2))), ClassDto::Object(ClassObject::Bound(2)));
    }
}
