//! Temporal checks over a [`ReachGraph`].
//!
//! Implication queries `always (A => next C)` / `always (A => eventually C)`
//! are checked at every reachable node. Atoms of `A` that name environment
//! signals are not state properties; they restrict which outgoing edges are
//! considered for the first step. General CTL is evaluated at the initial
//! node.

mod ctl;
mod trace;

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

pub use ctl::{check_ctl, label, Ctl};
pub use trace::{Trace, TraceStep};

use crate::bdd::{BddManager, BddRef};
use crate::error::QueryError;
use crate::exec::{self, Exec};
use crate::formula::{BoolExpr, Symbol};
use crate::frontend::QueryItem;
use crate::reach::ReachGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryMode {
    Next,
    /// On every path.
    Eventually,
    /// On some path.
    ExistsEventually,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub name: String,
    pub antecedent: BoolExpr,
    pub mode: QueryMode,
    pub consequent: BoolExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// No reachable node satisfied the antecedent.
    pub vacuous: bool,
    pub trace: Option<Trace>,
}

/// The antecedent split into a state predicate and an edge condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAntecedent {
    pub state_part: BoolExpr,
    pub env_part: BoolExpr,
}

fn symbol_name(rg: &ReachGraph, s: Symbol) -> String {
    if rg.symbols.contains(s) {
        rg.symbols.name(s).to_owned()
    } else {
        format!("#{}", s.index())
    }
}

/// Validates `q` against the graph and splits its antecedent.
pub fn split_query(rg: &ReachGraph, q: &Query) -> Result<SplitAntecedent, QueryError> {
    if let Some(s) = q.consequent.atoms().into_iter().find(|s| !rg.produced.contains(s)) {
        return Err(QueryError::EnvInConsequent { query: q.name.clone(), symbol: symbol_name(rg, s) });
    }
    let mut state = Vec::new();
    let mut env = Vec::new();
    for c in q.antecedent.conjuncts() {
        let atoms = c.atoms();
        let produced = atoms.iter().filter(|s| rg.produced.contains(s)).count();
        if produced == atoms.len() {
            state.push(c.clone());
        } else if produced == 0 {
            env.push(c.clone());
        } else {
            return Err(QueryError::MixedConjunct {
                query: q.name.clone(),
                conjunct: c.display(&rg.symbols).to_string(),
            });
        }
    }
    Ok(SplitAntecedent { state_part: BoolExpr::and_all(state), env_part: BoolExpr::and_all(env) })
}

/// Shared BDD context for edge conditioning: environment symbols plus any
/// extra atoms the query brings.
struct EdgeContext {
    mgr: BddManager,
    vars: HashMap<Symbol, BddRef>,
}

impl EdgeContext {
    fn new(rg: &ReachGraph, extra: &BTreeSet<Symbol>) -> Self {
        let (mut mgr, mut vars) = rg.env_manager();
        for &s in extra {
            vars.entry(s).or_insert_with(|| mgr.mk_var(&format!("x{}", s.index())));
        }
        EdgeContext { mgr, vars }
    }

    fn bdd(&mut self, e: &BoolExpr) -> BddRef {
        let vars = &self.vars;
        self.mgr.from_expr(e, &|s| vars.get(&s).copied()).expect("all atoms mapped")
    }

    /// Symbols present in one satisfying valuation of `f`.
    fn witness(&self, f: BddRef, rg: &ReachGraph) -> Vec<String> {
        let cube = self.mgr.pick_cube(f).unwrap_or_default();
        let mut names: Vec<(Symbol, String)> = self
            .vars
            .iter()
            .filter(|(_, &v)| cube.iter().any(|&(cv, val)| val && self.mgr.top_var(v) == Some(cv)))
            .map(|(&s, _)| (s, symbol_name(rg, s)))
            .collect();
        names.sort();
        names.into_iter().map(|(_, n)| n).collect()
    }
}

/// Checks an implication query at every reachable node.
pub fn check_query(rg: &ReachGraph, q: &Query) -> Result<Verdict, QueryError> {
    let split = split_query(rg, q)?;
    let mut ctx = EdgeContext::new(rg, &split.env_part.atoms());
    let env_cond = ctx.bdd(&split.env_part);

    let target: Vec<bool> = rg.nodes.iter().map(|n| q.consequent.eval(&n.outputs)).collect();
    let good_after: Vec<bool> = match q.mode {
        QueryMode::Next => target.clone(),
        QueryMode::Eventually => ctl::af(rg, &target),
        QueryMode::ExistsEventually => ctl::ef(rg, &target),
    };

    let mut vacuous = true;
    for (s, node) in rg.nodes.iter().enumerate() {
        if !split.state_part.eval(&node.outputs) {
            continue;
        }
        vacuous = false;
        let mut conditioned = Vec::new();
        for &ei in rg.out_edges(s) {
            let g = ctx.bdd(&rg.edges[ei].guard);
            let both = ctx.mgr.and(g, env_cond);
            if !both.is_false() {
                conditioned.push((ei, both));
            }
        }
        let ok = match q.mode {
            QueryMode::ExistsEventually => conditioned.iter().any(|&(ei, _)| good_after[rg.edges[ei].dst]),
            _ => !conditioned.is_empty() && conditioned.iter().all(|&(ei, _)| good_after[rg.edges[ei].dst]),
        };
        if ok {
            continue;
        }
        let trace = match conditioned.iter().find(|&&(ei, _)| !good_after[rg.edges[ei].dst]) {
            None => Trace::from_path(rg, &[s], &[], None),
            Some(&(ei, cond)) => {
                let first_env = ctx.witness(cond, rg);
                let dst = rg.edges[ei].dst;
                match q.mode {
                    QueryMode::Next => Trace::from_path(rg, &[s, dst], &[first_env], None),
                    _ => {
                        // the consequent can be avoided forever from dst
                        let avoid: Vec<bool> = target.iter().map(|t| !t).collect();
                        let (path, envs, loop_start) = trace::lasso(rg, &mut ctx.mgr, &ctx.vars, dst, &ctl::eg(rg, &avoid));
                        let mut nodes = vec![s];
                        nodes.extend(path);
                        let mut all_env = vec![first_env];
                        all_env.extend(envs);
                        Trace::from_path(rg, &nodes, &all_env, loop_start.map(|l| l + 1))
                    }
                }
            }
        };
        return Ok(Verdict { holds: false, vacuous: false, trace: Some(trace) });
    }
    Ok(Verdict { holds: true, vacuous, trace: None })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn all_hold(&self) -> bool {
        self.failed == 0
    }
}

/// Checks every item; the first validation error aborts the suite.
pub fn check_suite(rg: &ReachGraph, items: &[QueryItem]) -> Result<SuiteReport, QueryError> {
    check_suite_with(rg, items, Exec::default())
}

pub fn check_suite_with(rg: &ReachGraph, items: &[QueryItem], exec: Exec) -> Result<SuiteReport, QueryError> {
    let results = exec::map(exec, items, |it| match it {
        QueryItem::Implication(q) => check_query(rg, q),
        QueryItem::Ctl { name, formula } => check_ctl(rg, name, formula),
    });
    let mut entries = Vec::with_capacity(items.len());
    for (it, r) in items.iter().zip(results) {
        entries.push(SuiteEntry { name: it.name().to_owned(), verdict: r? });
    }
    let passed = entries.iter().filter(|e| e.verdict.holds).count();
    let failed = entries.len() - passed;
    Ok(SuiteReport { entries, passed, failed })
}

impl SuiteReport {
    /// Plain-text summary, one line per query.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = if e.verdict.holds { "true" } else { "FALSE" };
            let vac = if e.verdict.vacuous { " (vacuous)" } else { "" };
            out.push_str(&format!("{}: {status}{vac}\n", e.name));
            if let Some(t) = &e.verdict.trace {
                out.push_str(&t.render());
            }
        }
        out.push_str(&format!("{}/{} queries hold\n", self.passed, self.entries.len()));
        out
    }
}
