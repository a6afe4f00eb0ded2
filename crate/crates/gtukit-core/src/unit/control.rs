//! Control conditions: regular expressions over rule names with `r!`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::graph::Graph;
use crate::rewrite::{is_applicable, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlExpr {
    Epsilon,
    Rule(String),
    /// `r!`: apply `r` as long as possible.
    Maximal(String),
    Seq(Vec<ControlExpr>),
    Alt(Vec<ControlExpr>),
    Star(Box<ControlExpr>),
}

impl fmt::Display for ControlExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlExpr::Epsilon => f.write_str("ε"),
            ControlExpr::Rule(r) => f.write_str(r),
            ControlExpr::Maximal(r) => write!(f, "{r}!"),
            ControlExpr::Seq(xs) => join(f, xs, "; "),
            ControlExpr::Alt(xs) => {
                f.write_str("(")?;
                join(f, xs, " | ")?;
                f.write_str(")")
            }
            ControlExpr::Star(x) => match **x {
                ControlExpr::Rule(_) => write!(f, "{x}*"),
                _ => write!(f, "({x})*"),
            },
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, xs: &[ControlExpr], sep: &str) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("control syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("control mentions unknown rule {0:?}")]
    UnknownRule(String),
}

fn syntax(pos: usize, msg: &str) -> ControlError {
    ControlError::Syntax {
        pos,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.get(self.at).is_some_and(|(_, c)| c.is_whitespace()) {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.src.len(), |&(p, _)| p)
    }

    fn alt(&mut self) -> Result<ControlExpr, ControlError> {
        let mut xs = alloc::vec![self.seq()?];
        while self.peek() == Some('|') {
            self.at += 1;
            xs.push(self.seq()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { ControlExpr::Alt(xs) })
    }

    fn seq(&mut self) -> Result<ControlExpr, ControlError> {
        let mut xs = alloc::vec![self.postfix()?];
        while self.peek() == Some(';') {
            self.at += 1;
            xs.push(self.postfix()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { ControlExpr::Seq(xs) })
    }

    fn postfix(&mut self) -> Result<ControlExpr, ControlError> {
        let mut x = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.at += 1;
                    x = ControlExpr::Star(Box::new(x));
                }
                Some('!') => {
                    let pos = self.pos();
                    self.at += 1;
                    x = match x {
                        ControlExpr::Rule(r) => ControlExpr::Maximal(r),
                        _ => return Err(syntax(pos, "'!' applies only to a rule name")),
                    };
                }
                _ => return Ok(x),
            }
        }
    }

    fn atom(&mut self) -> Result<ControlExpr, ControlError> {
        let pos = self.pos();
        match self.peek() {
            Some('(') => {
                self.at += 1;
                let x = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(syntax(self.pos(), "expected ')'"));
                }
                self.at += 1;
                Ok(x)
            }
            Some('ε') => {
                self.at += 1;
                Ok(ControlExpr::Epsilon)
            }
            Some(c) if is_name_char(c) => {
                let mut name = String::new();
                while let Some(&(_, c)) = self.chars.get(self.at) {
                    if !is_name_char(c) {
                        break;
                    }
                    name.push(c);
                    self.at += 1;
                }
                Ok(if name == "eps" { ControlExpr::Epsilon } else { ControlExpr::Rule(name) })
            }
            Some(_) => Err(syntax(pos, "expected a rule name, 'ε' or '('")),
            None => Err(syntax(pos, "unexpected end of expression")),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() && c != 'ε' || matches!(c, '_' | '-' | '\'' | '′' | '.')
}

/// Parses a control expression. The empty string means `ε`.
pub fn parse_control(src: &str) -> Result<ControlExpr, ControlError> {
    let mut p = Parser {
        chars: src.char_indices().collect(),
        at: 0,
        src,
    };
    if p.peek().is_none() {
        return Ok(ControlExpr::Epsilon);
    }
    let x = p.alt()?;
    if p.peek().is_some() {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Transition {
    Epsilon,
    Rule(usize),
    /// Taken only when the rule has no applicable match.
    Guard(usize),
}

/// Automaton configurations are sets of states.
pub type Config = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlAutomaton {
    pub expr: ControlExpr,
    /// `(from, label, to)`, sorted.
    pub transitions: Vec<(usize, Transition, usize)>,
    pub start: usize,
    pub accept: usize,
    pub states: usize,
}

/// Compiles `src`, resolving names against `rule_names` first and then as
/// 1-based positions.
pub fn compile_control(src: &str, rule_names: &[String]) -> Result<ControlAutomaton, ControlError> {
    let expr = parse_control(src)?;
    ControlAutomaton::new(expr, rule_names)
}

impl ControlAutomaton {
    pub fn new(expr: ControlExpr, rule_names: &[String]) -> Result<ControlAutomaton, ControlError> {
        let mut b = Builder {
            transitions: Vec::new(),
            states: 0,
            names: rule_names,
        };
        let start = b.fresh();
        let accept = b.fresh();
        b.build(&expr, start, accept)?;
        let mut transitions = b.transitions;
        transitions.sort_unstable();
        transitions.dedup();
        Ok(ControlAutomaton {
            expr,
            transitions,
            start,
            accept,
            states: b.states,
        })
    }

    /// `(1 | … | n)*`.
    pub fn any_order(rule_count: usize) -> ControlAutomaton {
        let names: Vec<String> = (1..=rule_count).map(|i| i.to_string()).collect();
        let expr = if rule_count == 0 {
            ControlExpr::Epsilon
        } else {
            ControlExpr::Star(Box::new(ControlExpr::Alt(
                names.iter().cloned().map(ControlExpr::Rule).collect(),
            )))
        };
        ControlAutomaton::new(expr, &names).expect("positions resolve")
    }

    /// The initial configuration, closed under ε.
    pub fn initial(&self) -> Config {
        self.eps_closure(core::iter::once(self.start).collect())
    }

    fn closure_by(&self, mut set: Config, mut take: impl FnMut(Transition) -> bool) -> Config {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &(from, t, to) in &self.transitions {
                if from == s && take(t) && set.insert(to) {
                    stack.push(to);
                }
            }
        }
        set
    }

    pub fn eps_closure(&self, set: Config) -> Config {
        self.closure_by(set, |t| t == Transition::Epsilon)
    }

    /// Closure under ε and the guards that hold at `g`.
    pub fn resolve(&self, set: &Config, rules: &[alloc::sync::Arc<Rule>], g: &Graph) -> Config {
        let mut cache: Vec<Option<bool>> = alloc::vec![None; rules.len()];
        self.closure_by(set.clone(), |t| match t {
            Transition::Epsilon => true,
            Transition::Guard(r) => {
                !*cache[r].get_or_insert_with(|| is_applicable(&rules[r], g))
            }
            Transition::Rule(_) => false,
        })
    }

    /// Closure under ε and every guard, ignoring whether it holds.
    pub fn resolve_all(&self, set: &Config) -> Config {
        self.closure_by(set.clone(), |t| !matches!(t, Transition::Rule(_)))
    }

    /// Rules with a transition out of a resolved configuration.
    pub fn enabled(&self, resolved: &Config) -> BTreeSet<usize> {
        self.transitions
            .iter()
            .filter_map(|&(from, t, _)| match t {
                Transition::Rule(r) if resolved.contains(&from) => Some(r),
                _ => None,
            })
            .collect()
    }

    /// Configuration after applying rule `r` from a resolved configuration.
    pub fn step(&self, resolved: &Config, r: usize) -> Config {
        let next: Config = self
            .transitions
            .iter()
            .filter(|&&(from, t, _)| t == Transition::Rule(r) && resolved.contains(&from))
            .map(|&(_, _, to)| to)
            .collect();
        self.eps_closure(next)
    }

    pub fn is_accepting(&self, resolved: &Config) -> bool {
        resolved.contains(&self.accept)
    }

    /// Guard-free check of an application sequence (guards assumed to hold).
    pub fn accepts_word(&self, word: &[usize]) -> bool {
        let mut c = self.resolve_all(&self.initial());
        for &r in word {
            c = self.resolve_all(&self.step(&c, r));
            if c.is_empty() {
                return false;
            }
        }
        self.is_accepting(&c)
    }

    /// Rule pairs that can both fire from one configuration. A rule behind
    /// the guard of another is only reachable once that rule is
    /// inapplicable, so the two never compete.
    pub fn competing_pairs(&self, rule_count: usize) -> BTreeSet<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        if rule_count > 12 {
            for c in self.reachable_configs(rule_count) {
                let en: Vec<usize> = self.enabled(&c).into_iter().collect();
                for (i, &a) in en.iter().enumerate() {
                    pairs.extend(en[i..].iter().map(|&b| (a, b)));
                }
            }
            return pairs;
        }
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![self.initial()];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            for failed in 0u32..(1 << rule_count) {
                let holds = |r: usize| failed & (1 << r) != 0;
                let resolved = self.closure_by(c.clone(), |t| match t {
                    Transition::Epsilon => true,
                    Transition::Guard(r) => holds(r),
                    Transition::Rule(_) => false,
                });
                let en: Vec<usize> = self.enabled(&resolved).into_iter().filter(|&r| !holds(r)).collect();
                for (i, &a) in en.iter().enumerate() {
                    pairs.extend(en[i..].iter().map(|&b| (a, b)));
                }
                for &r in &en {
                    stack.push(self.step(&resolved, r));
                }
            }
        }
        pairs
    }

    /// Every configuration reachable while ignoring guard conditions.
    pub fn reachable_configs(&self, rule_count: usize) -> Vec<Config> {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![self.resolve_all(&self.initial())];
        while let Some(c) = stack.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            for r in 0..rule_count {
                let n = self.resolve_all(&self.step(&c, r));
                if !n.is_empty() {
                    stack.push(n);
                }
            }
        }
        seen.into_iter().collect()
    }
}

struct Builder<'a> {
    transitions: Vec<(usize, Transition, usize)>,
    states: usize,
    names: &'a [String],
}

impl Builder<'_> {
    fn fresh(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn resolve(&self, name: &str) -> Result<usize, ControlError> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(k) if (1..=self.names.len()).contains(&k) => Ok(k - 1),
            _ => Err(ControlError::UnknownRule(name.to_string())),
        }
    }

    fn build(&mut self, e: &ControlExpr, from: usize, to: usize) -> Result<(), ControlError> {
        match e {
            ControlExpr::Epsilon => self.transitions.push((from, Transition::Epsilon, to)),
            ControlExpr::Rule(r) => {
                let r = self.resolve(r)?;
                self.transitions.push((from, Transition::Rule(r), to));
            }
            ControlExpr::Maximal(r) => {
                let r = self.resolve(r)?;
                let s = self.fresh();
                self.transitions.push((from, Transition::Epsilon, s));
                self.transitions.push((s, Transition::Rule(r), s));
                self.transitions.push((s, Transition::Guard(r), to));
            }
            ControlExpr::Seq(xs) => {
                let mut cur = from;
                for (i, x) in xs.iter().enumerate() {
                    let next = if i + 1 == xs.len() { to } else { self.fresh() };
                    self.build(x, cur, next)?;
                    cur = next;
                }
            }
            ControlExpr::Alt(xs) => {
                for x in xs {
                    let a = self.fresh();
                    let b = self.fresh();
                    self.transitions.push((from, Transition::Epsilon, a));
                    self.build(x, a, b)?;
                    self.transitions.push((b, Transition::Epsilon, to));
                }
            }
            ControlExpr::Star(x) => {
                let s = self.fresh();
                let t = self.fresh();
                self.transitions.push((from, Transition::Epsilon, s));
                self.build(x, s, t)?;
                self.transitions.push((t, Transition::Epsilon, s));
                self.transitions.push((s, Transition::Epsilon, to));
            }
        }
        Ok(())
    }
}
