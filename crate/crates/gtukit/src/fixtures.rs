//! Built-in fixtures, embedded at compile time.
//!
//! Setting `GTUKIT_FIXTURES` to a directory makes files found there take
//! precedence over the embedded copies.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use gtukit_core::graph::Graph;
use gtukit_core::library::{ProblemId, ReductionId};
use gtukit_core::rewrite::Derivation;
use gtukit_core::unit::Unit;

use crate::format::{
    invalid, parse_json, DerivationDto, FormatError, GraphDto, Params, UnitDto, UnitResolver,
};

pub const FIXTURES_ENV: &str = "GTUKIT_FIXTURES";

macro_rules! embedded {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!("../fixtures/", $path)))),*]
    };
}

static EMBEDDED: &[(&str, &str)] = embedded![
    "units/hampath.json",
    "units/stwbd.json",
    "units/independent-set.json",
    "units/clique.json",
    "reductions/hampath-to-2-bounded-spantree.json",
    "reductions/clique-to-independent-set.json",
    "instances/fig1c.json",
    "instances/fig2c.json",
    "instances/fig2d.json",
    "instances/empty.json",
    "instances/k13.json",
    "derivations/fig1c.json",
    "derivations/fig1d.json",
    "derivations/fig2c.json",
    "derivations/fig2d.json",
    "derivations/fig3c.json",
    "derivations/ex9-reroot.json",
    "proofs/example8.json",
    "proofs/example9.json",
];

/// Names of the embedded fixture files, relative to the fixture root.
pub fn embedded_names() -> impl Iterator<Item = &'static str> {
    EMBEDDED.iter().map(|(p, _)| *p)
}

fn override_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from)
}

/// Text of a fixture such as `units/hampath.json`.
pub fn fixture_text(rel: &str) -> Result<String, FormatError> {
    if let Some(dir) = override_dir() {
        let p = dir.join(rel);
        if p.is_file() {
            return read_file(&p);
        }
    }
    EMBEDDED
        .iter()
        .find(|(p, _)| *p == rel)
        .map(|(_, t)| t.to_string())
        .ok_or_else(|| FormatError::Missing(rel.to_string()))
}

pub fn read_file(p: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(p).map_err(|e| FormatError::Io {
        path: p.display().to_string(),
        msg: e.to_string(),
    })
}

fn with_file<T>(rel: &str, r: Result<T, FormatError>) -> Result<T, FormatError> {
    r.map_err(|e| match e {
        FormatError::Invalid { path, msg } => FormatError::Invalid { path: format!("{rel}#{path}"), msg },
        FormatError::Json(m) => FormatError::Json(format!("{rel}#{m}")),
        other => other,
    })
}

/// Resolves problem names (`hampath`, `stwbd(2)`, …) to built-in units.
pub struct Builtins;

impl UnitResolver for Builtins {
    fn unit(&self, name: &str) -> Result<Unit, FormatError> {
        let id = ProblemId::parse(name).map_err(|e| invalid("", e))?;
        builtin_unit(id)
    }
}

fn problem_file(id: ProblemId) -> (&'static str, Params) {
    let mut params = Params::new();
    let file = match id {
        ProblemId::Hampath => "units/hampath.json",
        ProblemId::Stwbd(k) => {
            params.insert("k".into(), k);
            "units/stwbd.json"
        }
        ProblemId::IndependentSet => "units/independent-set.json",
        ProblemId::Clique => "units/clique.json",
    };
    (file, params)
}

pub fn builtin_unit(id: ProblemId) -> Result<Unit, FormatError> {
    if let ProblemId::Stwbd(0) = id {
        return Err(invalid("/params/k", "stwbd needs k >= 1"));
    }
    let (file, params) = problem_file(id);
    let text = fixture_text(file)?;
    with_file(file, parse_json::<UnitDto>(&text).and_then(|d| d.to_unit(&params, &Builtins)))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ReductionDto {
    pub name: String,
    pub source: String,
    pub target: String,
    pub unit: UnitDto,
}

/// A reduction unit with the problems it connects.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub name: String,
    pub source: Unit,
    pub target: Unit,
    pub unit: Unit,
}

pub fn load_reduction_text(text: &str) -> Result<Reduction, FormatError> {
    let dto: ReductionDto = parse_json(text)?;
    Ok(Reduction {
        name: dto.name.clone(),
        source: Builtins.unit(&dto.source)?,
        target: Builtins.unit(&dto.target)?,
        unit: dto.unit.to_unit(&Params::new(), &Builtins)?,
    })
}

pub fn reduction(id: ReductionId) -> Result<Reduction, FormatError> {
    let file = format!("reductions/{id}.json");
    let text = fixture_text(&file)?;
    with_file(&file, load_reduction_text(&text))
}

pub fn builtin_reduction(id: ReductionId) -> Result<Unit, FormatError> {
    reduction(id).map(|r| r.unit)
}

/// A built-in problem or reduction by name, or a unit file path.
pub fn unit_by_name(name: &str) -> Result<Unit, FormatError> {
    if let Ok(id) = ProblemId::parse(name) {
        return builtin_unit(id);
    }
    if let Ok(id) = ReductionId::parse(name) {
        return builtin_reduction(id);
    }
    let p = Path::new(name);
    if p.is_file() {
        let text = read_file(p)?;
        return with_file(name, parse_json::<UnitDto>(&text).and_then(|d| d.to_unit(&Params::new(), &Builtins)));
    }
    Err(FormatError::Missing(name.to_string()))
}

/// A reduction by built-in name or file path.
pub fn reduction_by_name(name: &str) -> Result<Reduction, FormatError> {
    if let Ok(id) = ReductionId::parse(name) {
        return reduction(id);
    }
    let text = read_file(Path::new(name))?;
    with_file(name, load_reduction_text(&text))
}

pub fn graph_from_text(text: &str) -> Result<Graph, FormatError> {
    parse_json::<GraphDto>(text).and_then(|d| d.to_graph("", &Params::new()))
}

/// A graph file, or the name of a built-in instance such as `fig2d`.
pub fn load_graph(name: &str) -> Result<Graph, FormatError> {
    let p = Path::new(name);
    if p.is_file() {
        return with_file(name, graph_from_text(&read_file(p)?));
    }
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let rel = format!("instances/{stem}.json");
    let text = fixture_text(&rel).map_err(|_| FormatError::Missing(name.to_string()))?;
    with_file(&rel, graph_from_text(&text))
}

/// A replayed figure derivation with its unit and the expected last graph.
pub struct FigureDerivation {
    pub unit: Unit,
    pub derivation: Derivation,
    pub last: Option<Graph>,
}

pub fn load_derivation_text(text: &str) -> Result<FigureDerivation, FormatError> {
    let dto: DerivationDto = parse_json(text)?;
    let unit_name = dto.unit.as_deref().ok_or_else(|| invalid("/unit", "missing unit"))?;
    let unit = unit_by_name(unit_name)?;
    let derivation = dto.replay(&unit.rules)?;
    let last = dto.last.as_ref().map(|g| g.to_graph("/last", &Params::new())).transpose()?;
    Ok(FigureDerivation { unit, derivation, last })
}

/// A derivation fixture such as `fig1c` or `ex9-reroot`.
pub fn figure_derivation(name: &str) -> Result<FigureDerivation, FormatError> {
    let rel = format!("derivations/{name}.json");
    let text = fixture_text(&rel)?;
    with_file(&rel, load_derivation_text(&text))
}

pub fn arc_graph(g: Graph) -> Arc<Graph> {
    Arc::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gtukit_core::unit::{check_successful, ControlExpr};

    #[test]
    fn every_builtin_loads() {
        for id in [ProblemId::Hampath, ProblemId::Stwbd(1), ProblemId::Stwbd(3), ProblemId::IndependentSet, ProblemId::Clique] {
            builtin_unit(id).unwrap();
        }
        assert!(builtin_unit(ProblemId::Stwbd(0)).is_err());
        for id in [ReductionId::HampathToSpanTree, ReductionId::CliqueToIndependentSet] {
            builtin_reduction(id).unwrap();
        }
    }

    #[test]
    fn unit_shapes() {
        let h = builtin_unit(ProblemId::Hampath).unwrap();
        assert_eq!(h.rules.len(), 3);
        assert!(h.rules[0].nac.is_some());
        let s = builtin_unit(ProblemId::Stwbd(2)).unwrap();
        assert_eq!(s.rules[0].right.loops_at(1).count(), 3);
        assert_eq!(s.name, "stwbd(2)");
        let c = builtin_unit(ProblemId::Clique).unwrap();
        assert_eq!(c.control.expr.to_string(), "1!; 2!");
        let r = builtin_reduction(ReductionId::HampathToSpanTree).unwrap();
        assert!(r.rules.is_empty());
        assert_eq!(r.control.expr, ControlExpr::Epsilon);
        let r = builtin_reduction(ReductionId::CliqueToIndependentSet).unwrap();
        assert_eq!(r.rules.len(), 3);
        assert!(r.rules[0].injective && r.rules[0].nac.is_some());
    }

    #[test]
    fn figures_replay() {
        for name in ["fig1c", "fig1d", "fig2c", "fig2d", "fig3c"] {
            let f = figure_derivation(name).unwrap();
            f.derivation.verify().unwrap();
            check_successful(&f.unit, &f.derivation).unwrap_or_else(|e| panic!("{name}: {e}"));
            let last = f.last.unwrap();
            assert!(gtukit_core::graph::is_isomorphic(f.derivation.last(), &last), "{name}");
        }
    }
}
