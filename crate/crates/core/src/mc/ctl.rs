use crate::error::QueryError;
use crate::formula::Symbol;
use crate::reach::ReachGraph;

use super::trace::{edge_env, path_to, Trace};
use super::Verdict;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ctl {
    Const(bool),
    Atom(Symbol),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    AX(Box<Ctl>),
    EX(Box<Ctl>),
    AF(Box<Ctl>),
    EF(Box<Ctl>),
    AG(Box<Ctl>),
    EG(Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
}

/// Adequate basis every formula is rewritten into before labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Basis {
    Const(bool),
    Atom(Symbol),
    Not(Box<Basis>),
    And(Box<Basis>, Box<Basis>),
    EX(Box<Basis>),
    EU(Box<Basis>, Box<Basis>),
    EG(Box<Basis>),
}

fn not(b: Basis) -> Basis {
    match b {
        Basis::Not(inner) => *inner,
        Basis::Const(c) => Basis::Const(!c),
        b => Basis::Not(Box::new(b)),
    }
}

fn and(a: Basis, b: Basis) -> Basis {
    Basis::And(Box::new(a), Box::new(b))
}

fn or(a: Basis, b: Basis) -> Basis {
    not(and(not(a), not(b)))
}

fn eu_basis(a: Basis, b: Basis) -> Basis {
    Basis::EU(Box::new(a), Box::new(b))
}

fn eg_basis(a: Basis) -> Basis {
    Basis::EG(Box::new(a))
}

impl Ctl {
    pub fn atoms(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Symbol>) {
        match self {
            Ctl::Const(_) => {}
            Ctl::Atom(s) => out.push(*s),
            Ctl::Not(a) | Ctl::AX(a) | Ctl::EX(a) | Ctl::AF(a) | Ctl::EF(a) | Ctl::AG(a) | Ctl::EG(a) => a.collect(out),
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::AU(a, b) | Ctl::EU(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    fn to_basis(&self) -> Basis {
        match self {
            Ctl::Const(c) => Basis::Const(*c),
            Ctl::Atom(s) => Basis::Atom(*s),
            Ctl::Not(a) => not(a.to_basis()),
            Ctl::And(a, b) => and(a.to_basis(), b.to_basis()),
            Ctl::Or(a, b) => or(a.to_basis(), b.to_basis()),
            Ctl::Implies(a, b) => or(not(a.to_basis()), b.to_basis()),
            Ctl::EX(a) => Basis::EX(Box::new(a.to_basis())),
            Ctl::AX(a) => not(Basis::EX(Box::new(not(a.to_basis())))),
            Ctl::EF(a) => eu_basis(Basis::Const(true), a.to_basis()),
            Ctl::AF(a) => not(eg_basis(not(a.to_basis()))),
            Ctl::EG(a) => eg_basis(a.to_basis()),
            Ctl::AG(a) => not(eu_basis(Basis::Const(true), not(a.to_basis()))),
            Ctl::EU(a, b) => eu_basis(a.to_basis(), b.to_basis()),
            Ctl::AU(a, b) => {
                // A[a U b] = !(E[!b U (!a & !b)] | EG !b)
                let (a, b) = (a.to_basis(), b.to_basis());
                let nb = not(b);
                let bad = or(eu_basis(nb.clone(), and(not(a), nb.clone())), eg_basis(nb));
                not(bad)
            }
        }
    }
}

pub(crate) fn ex(rg: &ReachGraph, set: &[bool]) -> Vec<bool> {
    (0..rg.node_count()).map(|n| rg.successors(n).any(|d| set[d])).collect()
}

/// Least fixpoint `b | (a & EX z)`, by backward search from `b`.
pub(crate) fn eu_set(rg: &ReachGraph, a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut z = b.to_vec();
    let mut stack: Vec<usize> = (0..z.len()).filter(|&n| z[n]).collect();
    while let Some(n) = stack.pop() {
        for p in rg.predecessors(n) {
            if !z[p] && a[p] {
                z[p] = true;
                stack.push(p);
            }
        }
    }
    z
}

/// Greatest fixpoint `a & EX z`: drop nodes with no successor left in z.
pub(crate) fn eg(rg: &ReachGraph, a: &[bool]) -> Vec<bool> {
    let mut z = a.to_vec();
    loop {
        let mut changed = false;
        for n in 0..z.len() {
            if z[n] && !rg.successors(n).any(|d| z[d]) {
                z[n] = false;
                changed = true;
            }
        }
        if !changed {
            return z;
        }
    }
}

pub(crate) fn ef(rg: &ReachGraph, target: &[bool]) -> Vec<bool> {
    eu_set(rg, &vec![true; target.len()], target)
}

/// All paths eventually hit `target`, as the complement of `EG !target`.
pub(crate) fn af(rg: &ReachGraph, target: &[bool]) -> Vec<bool> {
    let avoid: Vec<bool> = target.iter().map(|t| !t).collect();
    eg(rg, &avoid).into_iter().map(|x| !x).collect()
}

fn label_basis(rg: &ReachGraph, f: &Basis) -> Vec<bool> {
    let n = rg.node_count();
    match f {
        Basis::Const(c) => vec![*c; n],
        Basis::Atom(s) => rg.nodes.iter().map(|node| node.outputs.contains(s)).collect(),
        Basis::Not(a) => label_basis(rg, a).into_iter().map(|x| !x).collect(),
        Basis::And(a, b) => {
            let (a, b) = (label_basis(rg, a), label_basis(rg, b));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Basis::EX(a) => ex(rg, &label_basis(rg, a)),
        Basis::EU(a, b) => eu_set(rg, &label_basis(rg, a), &label_basis(rg, b)),
        Basis::EG(a) => eg(rg, &label_basis(rg, a)),
    }
}

/// Satisfaction set of `f` over all nodes.
pub fn label(rg: &ReachGraph, f: &Ctl) -> Vec<bool> {
    label_basis(rg, &f.to_basis())
}

/// Evaluates `f` at the initial node. Failing `AG`/`AX` formulas and failing
/// state formulas come with a counterexample path.
pub fn check_ctl(rg: &ReachGraph, name: &str, f: &Ctl) -> Result<Verdict, QueryError> {
    if let Some(s) = f.atoms().into_iter().find(|s| !rg.produced.contains(s)) {
        let symbol = if rg.symbols.contains(s) { rg.symbols.name(s).to_owned() } else { format!("#{}", s.index()) };
        return Err(QueryError::NonOutputAtom { query: name.to_owned(), symbol });
    }
    let holds = label(rg, f)[0];
    let trace = if holds {
        None
    } else {
        let (mut mgr, vars) = rg.env_manager();
        match f {
            Ctl::AG(inner) => {
                let bad: Vec<bool> = label(rg, inner).into_iter().map(|x| !x).collect();
                path_to(rg, &bad).map(|(nodes, edges)| {
                    let envs: Vec<_> = edges.iter().map(|&e| edge_env(rg, &mut mgr, &vars, e)).collect();
                    Trace::from_path(rg, &nodes, &envs, None)
                })
            }
            Ctl::AX(inner) => {
                let sat = label(rg, inner);
                rg.out_edges(0).iter().find(|&&e| !sat[rg.edges[e].dst]).map(|&e| {
                    let env = edge_env(rg, &mut mgr, &vars, e);
                    Trace::from_path(rg, &[0, rg.edges[e].dst], &[env], None)
                })
            }
            _ => Some(Trace::from_path(rg, &[0], &[], None)),
        }
    };
    Ok(Verdict { holds, vacuous: false, trace })
}
