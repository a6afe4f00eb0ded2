//! Command-line surface.
//!
//! Exit codes: 0 for TRUE or a passed check, 1 for FALSE or a failed check,
//! 2 for usage and input errors, 3 for internal errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use gtukit_core::ds::{export_dot, DerivationStructure};
use gtukit_core::graph::Graph;
use gtukit_core::library::{connected_corpus, make_instance, standard_corpus, ProblemId};
use gtukit_core::proof::{backward_prove, backward_prove_preprocessed, forward_prove, ProofRun};
use gtukit_core::rewrite::{static_rule_set_independence, Derivation};
use gtukit_core::unit::{decide_with, run_functional, DecideError, SearchOptions, Unit};

use crate::export::{graph_dot, load_ds_text, DsDto};
use crate::fixtures::{load_derivation_text, load_graph, read_file, reduction_by_name, unit_by_name};
use crate::format::{to_json, DerivationDto, FormatError, GraphDto};
use crate::proofs::{load_proof, LoadedProof};
use crate::sweep::{reduction_sweep, ReductionCase};

#[derive(Parser, Debug)]
#[command(name = "gtukit", version, about = "Graph transformation units: decisions, reductions and their proofs")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a successful derivation exists.
    Decide {
        /// Problem name (hampath, stwbd(k), clique, independent-set) or unit file.
        #[arg(long)]
        unit: String,
        /// Graph file or built-in instance name.
        #[arg(long)]
        graph: String,
        /// Maximal derivation length; defaults to 4·size(G)².
        #[arg(long)]
        budget: Option<usize>,
        /// Shuffle the search order with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a reduction unit and print the resulting instance.
    Reduce {
        #[arg(long)]
        red: String,
        #[arg(long)]
        graph: String,
        /// Write the resulting graph here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the forward proof procedure.
    ProveForward(ProveArgs),
    /// Run the backward proof procedure.
    ProveBackward {
        #[command(flatten)]
        args: ProveArgs,
        /// Rearrange the witness first when a derivation pair applies.
        #[arg(long)]
        preprocess: bool,
    },
    /// Compare decisions and run both proofs over a corpus.
    CheckReduction {
        /// Proof configuration (example8, example9 or a file).
        #[arg(long)]
        proof: String,
        /// `standard:LO-HI` or `connected:LO-HI`.
        #[arg(long)]
        corpus: String,
        /// Bound range `LO-HI` for problems with a bound component.
        #[arg(long, default_value = "0-4")]
        bounds: String,
        /// Only the first N instances after an optional shuffle.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for one DOT file of the forward structure per instance.
        #[arg(long)]
        emit_ds: Option<PathBuf>,
    },
    /// Check rule-level independence of two rule sets.
    Independence {
        #[arg(long)]
        unit: String,
        /// Second unit; defaults to the first.
        #[arg(long)]
        with: Option<String>,
    },
    /// Export a graph, a derivation structure or a report.
    Export {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        /// Graph name or file, structure file (or `empty`), or report file.
        #[arg(long)]
        input: String,
    },
}

#[derive(clap::Args, Debug)]
pub struct ProveArgs {
    #[arg(long)]
    pub proof: String,
    /// Instance; defaults to the one named in the configuration.
    #[arg(long)]
    pub graph: Option<String>,
    /// Derivation file; defaults to the configured witness or a search.
    #[arg(long)]
    pub witness: Option<String>,
    /// Write the derivation structure as DOT (or JSON with a .json name).
    #[arg(long)]
    pub emit_ds: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum What {
    Graph,
    Ds,
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Dot,
    Json,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(#[from] FormatError),
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Usage(_) => 2,
            CliError::Internal(_) | CliError::Io(_) => 3,
        }
    }
}

/// Verdict of a command: TRUE/passed or FALSE/failed.
pub type Outcome = Result<bool, CliError>;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Decide {
            unit,
            graph,
            budget,
            seed,
        } => cmd_decide(cli.json, unit, graph, *budget, *seed, out),
        Command::Reduce { red, graph, out: file } => cmd_reduce(cli.json, red, graph, file.as_deref(), out),
        Command::ProveForward(a) => cmd_prove(cli.json, a, Direction::Forward, out),
        Command::ProveBackward { args, preprocess } => {
            let d = if *preprocess { Direction::BackwardPreprocessed } else { Direction::Backward };
            cmd_prove(cli.json, args, d, out)
        }
        Command::CheckReduction {
            proof,
            corpus,
            bounds,
            limit,
            seed,
            jobs,
            emit_ds,
        } => cmd_check(cli.json, proof, corpus, bounds, *limit, *seed, *jobs, emit_ds.as_deref(), out),
        Command::Independence { unit, with } => cmd_independence(cli.json, unit, with.as_deref(), out),
        Command::Export { what, format, input } => cmd_export(*what, *format, input, out),
    }
}

fn graph_arg(name: &str) -> Result<Arc<Graph>, CliError> {
    Ok(Arc::new(load_graph(name)?))
}

fn cmd_decide(
    json: bool,
    unit: &str,
    graph: &str,
    budget: Option<usize>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Outcome {
    let u = unit_by_name(unit)?;
    let g = graph_arg(graph)?;
    let d = match decide_with(&u, &g, SearchOptions { budget, shuffle: seed }) {
        Ok(d) => d,
        Err(DecideError::NotInitial) => {
            return Err(CliError::Usage(format!("the graph is not in the initial class of {}", u.name)))
        }
        Err(e) => return Err(CliError::Internal(e.to_string())),
    };
    let len = d.witness.as_ref().map(Derivation::len);
    if json {
        let v = json!({
            "unit": u.name,
            "value": d.value,
            "explored": d.explored,
            "witness_length": len,
            "witness": d.witness.as_ref().map(|w| DerivationDto::from_derivation(Some(&u.name), w)),
        });
        out.write_all(to_json(&v).as_bytes())?;
    } else {
        match len {
            Some(n) => writeln!(out, "TRUE (witness length {n}, {} states)", d.explored)?,
            None => writeln!(out, "FALSE ({} states)", d.explored)?,
        }
    }
    Ok(d.value)
}

fn cmd_reduce(json: bool, red: &str, graph: &str, file: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let r = reduction_by_name(red)?;
    let g = graph_arg(graph)?;
    let run = run_functional(&r.unit, &g).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = to_json(&GraphDto::from_graph(&run.result));
    if let Some(p) = file {
        std::fs::write(p, &text)?;
    }
    if json {
        let v = json!({
            "reduction": r.name,
            "length": run.derivation.len(),
            "result": GraphDto::from_graph(&run.result),
        });
        out.write_all(to_json(&v).as_bytes())?;
    } else {
        writeln!(out, "derivation length {}", run.derivation.len())?;
        if file.is_none() {
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
    BackwardPreprocessed,
}

fn witness_for(p: &LoadedProof, g: &Arc<Graph>, dir: Direction, file: Option<&str>) -> Result<Derivation, CliError> {
    let (unit, start): (&Unit, Arc<Graph>) = match dir {
        Direction::Forward => (&p.cfg.source, g.clone()),
        _ => {
            let r = run_functional(&p.cfg.red, g).map_err(|e| CliError::Usage(e.to_string()))?;
            (&p.cfg.target, r.result)
        }
    };
    if let Some(f) = file {
        let d = load_derivation_text(&read_file(Path::new(f))?)?.derivation;
        return gtukit_core::proof::transport_derivation(&d, &start)
            .ok_or_else(|| CliError::Usage("the witness does not start at the expected graph".into()));
    }
    let configured = match dir {
        Direction::Forward => p.forward_witness.clone(),
        _ => p.backward_witness.clone(),
    };
    if let Some(w) = configured.filter(|w| w.first() == &start) {
        return Ok(w);
    }
    let d = gtukit_core::unit::decide(unit, &start).map_err(|e| CliError::Usage(e.to_string()))?;
    d.witness
        .ok_or_else(|| CliError::Usage(format!("{} has no successful derivation on this graph", unit.name)))
}

fn emit_ds(path: &Path, ds: &DerivationStructure) -> Result<(), CliError> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        to_json(&DsDto::from_ds(ds))
    } else {
        export_dot(ds, &BTreeMap::new())
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct ProveReport {
    ok: bool,
    verdict: String,
    constructed: Vec<String>,
    nodes: usize,
    arcs: usize,
    operations: usize,
    preprocessed: bool,
}

fn report(run: &ProofRun) -> ProveReport {
    ProveReport {
        ok: run.ok(),
        verdict: match &run.verdict {
            Ok(()) => "ok".into(),
            Err(e) => e.to_string(),
        },
        constructed: run.constructed.application_sequence(),
        nodes: run.trace.ds.nodes().len(),
        arcs: run.trace.ds.arcs().len(),
        operations: run.trace.log.len(),
        preprocessed: run.preprocessed.is_some(),
    }
}

fn cmd_prove(json: bool, a: &ProveArgs, dir: Direction, out: &mut dyn Write) -> Outcome {
    let p = load_proof(&a.proof)?;
    let g = match (&a.graph, &p.instance) {
        (Some(name), _) => graph_arg(name)?,
        (None, Some(g)) => g.clone(),
        (None, None) => return Err(CliError::Usage("no instance: pass --graph".into())),
    };
    let w = witness_for(&p, &g, dir, a.witness.as_deref())?;
    let run = match dir {
        Direction::Forward => forward_prove(&p.cfg, &g, &w),
        Direction::Backward => backward_prove(&p.cfg, &g, &w),
        Direction::BackwardPreprocessed => backward_prove_preprocessed(&p.cfg, &g, &w),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(path) = &a.emit_ds {
        emit_ds(path, &run.trace.ds)?;
    }
    let r = report(&run);
    if json {
        out.write_all(to_json(&r).as_bytes())?;
    } else {
        writeln!(out, "{}: {}", p.name, r.verdict)?;
        writeln!(out, "constructed: {} ({} steps)", r.constructed.join(" "), r.constructed.len())?;
        writeln!(out, "structure: {} nodes, {} arcs, {} operations", r.nodes, r.arcs, r.operations)?;
    }
    Ok(run.ok())
}

fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("expected a range LO-HI, got {s:?}"));
    let (a, b) = s.split_once('-').ok_or_else(bad)?;
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Base graphs from `standard:LO-HI` or `connected:LO-HI`, with bound
/// components added when `source` needs them.
pub fn corpus_instances(corpus: &str, bounds: &str, source: &Unit) -> Result<Vec<Graph>, CliError> {
    let (kind, range) = corpus
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("expected standard:LO-HI or connected:LO-HI, got {corpus:?}")))?;
    let (lo, hi) = parse_range(range)?;
    let base = match kind {
        "standard" => standard_corpus(lo, hi),
        "connected" => connected_corpus(lo, hi),
        _ => return Err(CliError::Usage(format!("unknown corpus kind {kind:?}"))),
    };
    let id = ProblemId::parse(&source.name).ok();
    match id.filter(|i| i.needs_bound()) {
        Some(id) => {
            let (blo, bhi) = parse_range(bounds)?;
            let mut out = Vec::new();
            for g in &base {
                for k in blo..=bhi {
                    out.push(make_instance(id, g, Some(k)).map_err(|e| CliError::Internal(e.to_string()))?);
                }
            }
            Ok(out)
        }
        None => Ok(base),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    json: bool,
    proof: &str,
    corpus: &str,
    bounds: &str,
    limit: Option<usize>,
    seed: Option<u64>,
    jobs: Option<usize>,
    emit: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let p = load_proof(proof)?;
    let mut instances = corpus_instances(corpus, bounds, &p.cfg.source)?;
    if let Some(s) = seed {
        instances.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    if let Some(n) = limit {
        instances.truncate(n);
    }
    let cases = reduction_sweep(&p.cfg, &instances, jobs);
    if let Some(dir) = emit {
        std::fs::create_dir_all(dir)?;
        for (i, g) in instances.iter().enumerate() {
            let g = Arc::new(g.clone());
            let Ok(d) = gtukit_core::unit::decide(&p.cfg.source, &g) else {
                continue;
            };
            if let Some(w) = d.witness {
                if let Ok(run) = forward_prove(&p.cfg, &g, &w) {
                    emit_ds(&dir.join(format!("instance-{i}.dot")), &run.trace.ds)?;
                }
            }
        }
    }
    let failed: Vec<&ReductionCase> = cases.iter().filter(|c| !c.passed).collect();
    if json {
        out.write_all(to_json(&cases).as_bytes())?;
    } else {
        let yes = cases.iter().filter(|c| c.source == Ok(true)).count();
        let pre = cases.iter().filter(|c| c.preprocessed).count();
        writeln!(
            out,
            "{} instances, {} yes-instances, {} needed preprocessing, {} failed",
            cases.len(),
            yes,
            pre,
            failed.len()
        )?;
        for c in &failed {
            writeln!(out, "  instance {}: source {:?}, target {:?}, forward {:?}, backward {:?}", c.index, c.source, c.target, c.forward, c.backward)?;
        }
    }
    Ok(failed.is_empty())
}

fn cmd_independence(json: bool, unit: &str, with: Option<&str>, out: &mut dyn Write) -> Outcome {
    let a = unit_by_name(unit)?;
    let b = match with {
        Some(n) => unit_by_name(n)?,
        None => a.clone(),
    };
    let r = static_rule_set_independence(&a.rules, &b.rules);
    if json {
        let ws: Vec<_> = r
            .witnesses
            .iter()
            .map(|w| {
                json!({
                    "kind": format!("{:?}", w.kind).to_lowercase(),
                    "rules": [a.rules[w.rules.0].name, b.rules[w.rules.1].name],
                    "joinable": w.joinable,
                    "overlap": GraphDto::from_graph(&w.overlap),
                })
            })
            .collect();
        out.write_all(to_json(&json!({"independent": r.independent, "witnesses": ws})).as_bytes())?;
    } else if r.independent {
        writeln!(out, "independent")?;
    } else {
        writeln!(out, "{} conflicting overlaps", r.witnesses.len())?;
        for w in &r.witnesses {
            writeln!(
                out,
                "  {:?} {} / {}{}",
                w.kind,
                a.rules[w.rules.0].name,
                b.rules[w.rules.1].name,
                if w.joinable { " (same effect)" } else { "" }
            )?;
        }
    }
    Ok(r.independent)
}

fn cmd_export(what: What, format: Format, input: &str, out: &mut dyn Write) -> Outcome {
    let text = match (what, format) {
        (What::Graph, Format::Dot) => {
            let g = load_graph(input)?;
            let name = Path::new(input).file_stem().and_then(|s| s.to_str()).unwrap_or("g");
            graph_dot(&g, name)
        }
        (What::Graph, Format::Json) => to_json(&GraphDto::from_graph(&load_graph(input)?)),
        (What::Ds, f) => {
            let ds = if input == "empty" {
                DerivationStructure::new()
            } else {
                load_ds_text(&read_file(Path::new(input))?)?
            };
            match f {
                Format::Dot => export_dot(&ds, &BTreeMap::new()),
                Format::Json => to_json(&DsDto::from_ds(&ds)),
            }
        }
        (What::Report, Format::Json) => {
            let v: serde_json::Value = crate::format::parse_json(&read_file(Path::new(input))?)?;
            to_json(&v)
        }
        (What::Report, Format::Dot) => return Err(CliError::Usage("reports export only as json".into())),
    };
    out.write_all(text.as_bytes())?;
    Ok(true)
}
