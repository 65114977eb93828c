//! Structural validation and modelling lints for a [`System`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::bdd::{BddManager, BddRef};
use crate::formula::Symbol;
use crate::model::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// What a lint is about, so front ends can attach source positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    System,
    Machine(usize),
    Initial(usize),
    State(usize, usize),
    Arc(usize, usize),
    Symbol(Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LintKind {
    DuplicateMachine,
    DuplicateState,
    UnknownInitial,
    UnknownState,
    EmptyMachine,
    UnregisteredSymbol,
    MultipleProducers,
    CoverageGap,
    OverlappingGuards,
    SuspiciousEnvSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lint {
    pub severity: Severity,
    pub kind: LintKind,
    pub message: String,
    pub location: Location,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LintReport {
    pub lints: Vec<Lint>,
}

impl LintReport {
    pub fn errors(&self) -> impl Iterator<Item = &Lint> {
        self.lints.iter().filter(|l| l.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Lint> {
        self.lints.iter().filter(|l| l.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }
}

fn error(kind: LintKind, location: Location, message: String) -> Lint {
    Lint { severity: Severity::Error, kind, message, location }
}

fn warning(kind: LintKind, location: Location, message: String) -> Lint {
    Lint { severity: Severity::Warning, kind, message, location }
}

pub(crate) fn structural_errors(system: &System) -> Vec<Lint> {
    let mut out = Vec::new();
    let mut machine_names = HashSet::new();
    for (mi, m) in system.machines.iter().enumerate() {
        if !machine_names.insert(m.name()) {
            out.push(error(
                LintKind::DuplicateMachine,
                Location::Machine(mi),
                format!("duplicate machine name `{}`", m.name()),
            ));
        }
        if m.states().is_empty() {
            out.push(error(LintKind::EmptyMachine, Location::Machine(mi), format!("machine `{}` has no states", m.name())));
        }
        let mut state_names = HashSet::new();
        for (si, s) in m.states().iter().enumerate() {
            if !state_names.insert(s.name.as_str()) {
                out.push(error(
                    LintKind::DuplicateState,
                    Location::State(mi, si),
                    format!("duplicate state `{}` in machine `{}`", s.name, m.name()),
                ));
            }
            for &sym in &s.outputs {
                if !system.symbols.contains(sym) {
                    out.push(error(
                        LintKind::UnregisteredSymbol,
                        Location::State(mi, si),
                        format!("state `{}` outputs an unregistered symbol", s.name),
                    ));
                }
            }
        }
        if m.state_index(m.initial_name()).is_none() {
            out.push(error(
                LintKind::UnknownInitial,
                Location::Initial(mi),
                format!("initial state `{}` of machine `{}` does not exist", m.initial_name(), m.name()),
            ));
        }
        for (ai, a) in m.arcs().iter().enumerate() {
            for end in [&a.src, &a.dst] {
                if m.state_index(end).is_none() {
                    out.push(error(
                        LintKind::UnknownState,
                        Location::Arc(mi, ai),
                        format!("arc refers to unknown state `{}` in machine `{}`", end, m.name()),
                    ));
                }
            }
            if system.symbols.check(&a.guard).is_err() {
                out.push(error(
                    LintKind::UnregisteredSymbol,
                    Location::Arc(mi, ai),
                    format!("guard of arc `{}` -> `{}` uses an unregistered symbol", a.src, a.dst),
                ));
            }
        }
    }
    out
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Full validation: structural errors plus modelling warnings. Pure.
pub fn validate(system: &System) -> LintReport {
    let mut lints = structural_errors(system);
    if !lints.is_empty() {
        return LintReport { lints };
    }

    let mut producers: BTreeMap<Symbol, Vec<usize>> = BTreeMap::new();
    for (mi, m) in system.machines.iter().enumerate() {
        for sym in m.produced() {
            producers.entry(sym).or_default().push(mi);
        }
    }
    for (sym, ms) in &producers {
        if ms.len() > 1 {
            let names: Vec<&str> = ms.iter().map(|&i| system.machines[i].name()).collect();
            lints.push(warning(
                LintKind::MultipleProducers,
                Location::Symbol(*sym),
                format!("symbol `{}` is produced by several machines: {}", system.symbols.name(*sym), names.join(", ")),
            ));
        }
    }

    let mut mgr = BddManager::new();
    let vars: HashMap<Symbol, BddRef> = system.symbols.symbols().map(|s| (s, mgr.mk_var(system.symbols.name(s)))).collect();
    let lookup = |s: Symbol| vars.get(&s).copied();
    for (mi, m) in system.machines.iter().enumerate() {
        let guards: Vec<BddRef> = m
            .arcs()
            .iter()
            .map(|a| mgr.from_expr(&a.guard, &lookup).expect("registered symbols"))
            .collect();
        for (si, s) in m.states().iter().enumerate() {
            let out = m.outgoing(si);
            let cover = mgr.or_all(out.iter().map(|&a| guards[a]));
            if !cover.is_true() {
                lints.push(warning(
                    LintKind::CoverageGap,
                    Location::State(mi, si),
                    format!(
                        "state `{}` of `{}`: outgoing guards do not cover every valuation; the machine stays put when none holds",
                        s.name,
                        m.name()
                    ),
                ));
            }
            let mut pairs = Vec::new();
            for (i, &a) in out.iter().enumerate() {
                for &b in &out[i + 1..] {
                    if !mgr.and(guards[a], guards[b]).is_false() {
                        pairs.push(format!("->{} / ->{}", m.arcs()[a].dst, m.arcs()[b].dst));
                    }
                }
            }
            if !pairs.is_empty() {
                lints.push(warning(
                    LintKind::OverlappingGuards,
                    Location::State(mi, si),
                    format!("state `{}` of `{}` has overlapping guards ({})", s.name, m.name(), pairs.join(", ")),
                ));
            }
        }
    }

    let produced: BTreeSet<Symbol> = producers.keys().copied().collect();
    for env in system.env_alphabet() {
        let name = system.symbols.name(env);
        let near: Vec<&str> = produced
            .iter()
            .map(|&p| system.symbols.name(p))
            .filter(|p| edit_distance(name, p) <= 1 || p.eq_ignore_ascii_case(name))
            .collect();
        if !near.is_empty() {
            lints.push(warning(
                LintKind::SuspiciousEnvSymbol,
                Location::Symbol(env),
                format!(
                    "`{name}` is never produced and becomes an environment input; did you mean `{}`?",
                    near.join("` or `")
                ),
            ));
        }
    }
    LintReport { lints }
}
