//! Reachability graphs: the synchronous product of all machines under every
//! environment valuation.

mod export;
mod symbolic;

use std::collections::{BTreeSet, HashMap};

pub use export::{RgDump, RgDumpEdge, RgDumpNode};
pub use symbolic::{build_rg_symbolic, MachineEncoding, SymbolicReachability};

use crate::bdd::{BddManager, BddRef};
use crate::error::InvalidSystem;
use crate::exec::{self, Exec};
use crate::formula::{BoolExpr, Symbol, SymbolTable, Valuation};
use crate::model::{GlobalState, System};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgNode {
    pub state: GlobalState,
    pub state_names: Vec<String>,
    pub outputs: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgEdge {
    pub src: usize,
    pub dst: usize,
    /// Over environment symbols only.
    pub guard: BoolExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub system_name: String,
    pub machine_names: Vec<String>,
    pub symbols: SymbolTable,
    pub env: BTreeSet<Symbol>,
    pub produced: BTreeSet<Symbol>,
    /// Node 0 is the initial state; ids follow BFS discovery order.
    pub nodes: Vec<RgNode>,
    pub edges: Vec<RgEdge>,
    pub product_size: u128,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl ReachGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edge ids of `node`.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.pred[node]
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[node].iter().map(|&e| self.edges[e].dst)
    }

    pub fn predecessors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.pred[node].iter().map(|&e| self.edges[e].src)
    }

    pub fn find(&self, state: &GlobalState) -> Option<usize> {
        self.nodes.iter().position(|n| &n.state == state)
    }

    pub fn display_node(&self, node: usize) -> String {
        format!("({})", self.nodes[node].state_names.join(", "))
    }

    /// Fresh manager holding one variable per environment symbol.
    pub fn env_manager(&self) -> (BddManager, HashMap<Symbol, BddRef>) {
        env_manager(&self.symbols, &self.env)
    }

    /// Nodes whose only behaviour is staying put under every environment
    /// valuation.
    pub fn quiescent_nodes(&self) -> Vec<usize> {
        let (mut mgr, vars) = self.env_manager();
        (0..self.nodes.len())
            .filter(|&n| {
                let out = &self.succ[n];
                out.len() == 1 && self.edges[out[0]].dst == n && {
                    let g = mgr.from_expr(&self.edges[out[0]].guard, &|s| vars.get(&s).copied()).expect("env-only guard");
                    g.is_true()
                }
            })
            .collect()
    }

    fn from_parts(system: &System, nodes: Vec<RgNode>, edges: Vec<RgEdge>) -> Self {
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            succ[e.src].push(i);
            pred[e.dst].push(i);
        }
        ReachGraph {
            system_name: system.name.clone(),
            machine_names: system.machines.iter().map(|m| m.name().to_owned()).collect(),
            symbols: system.symbols.clone(),
            env: system.env_alphabet(),
            produced: system.produced(),
            nodes,
            edges,
            product_size: system.product_size(),
            succ,
            pred,
        }
    }

    /// Builds a graph from raw parts, for tests and external tooling.
    pub fn from_edges(system: &System, states: Vec<GlobalState>, edges: Vec<RgEdge>) -> Self {
        let nodes = states.into_iter().map(|s| make_node(system, s)).collect();
        Self::from_parts(system, nodes, edges)
    }
}

fn env_manager(symbols: &SymbolTable, env: &BTreeSet<Symbol>) -> (BddManager, HashMap<Symbol, BddRef>) {
    let mut mgr = BddManager::new();
    let vars = env.iter().map(|&s| (s, mgr.mk_var(symbols.name(s)))).collect();
    (mgr, vars)
}

fn make_node(system: &System, state: GlobalState) -> RgNode {
    RgNode {
        state_names: system.state_names(&state).into_iter().map(str::to_owned).collect(),
        outputs: system.output_valuation(&state),
        state,
    }
}

struct Move {
    dst: usize,
    guard: BoolExpr,
    bdd: BddRef,
}

/// Successors of one node with merged guards, in first-seen order.
fn expand(system: &System, env: &BTreeSet<Symbol>, mgr: &mut BddManager, vars: &HashMap<Symbol, BddRef>, g: &GlobalState) -> Vec<(GlobalState, BoolExpr)> {
    let outputs = system.output_valuation(g);
    // closed world: every non-environment symbol is decided by the outputs
    let fixed = |s: Symbol| if env.contains(&s) { None } else { Some(outputs.contains(&s)) };
    let lookup = |s: Symbol| vars.get(&s).copied();

    let mut per_machine: Vec<Vec<Move>> = Vec::with_capacity(system.machines.len());
    for (m, &cur) in system.machines.iter().zip(&g.0) {
        let mut moves = Vec::new();
        let mut cover = BddRef::FALSE;
        let mut residuals = Vec::new();
        for &ai in m.outgoing(cur) {
            let r = m.arcs()[ai].guard.residual_with(&fixed);
            let bdd = mgr.from_expr(&r, &lookup).expect("residual mentions environment symbols only");
            if bdd.is_false() {
                continue;
            }
            cover = mgr.or(cover, bdd);
            residuals.push(r.clone());
            moves.push(Move { dst: m.arc_ends(ai).1, guard: r, bdd });
        }
        if !cover.is_true() {
            let stay = BoolExpr::or_all(residuals).negate();
            let bdd = mgr.not(cover);
            moves.push(Move { dst: cur, guard: stay, bdd });
        }
        per_machine.push(moves);
    }

    let mut order: Vec<GlobalState> = Vec::new();
    let mut merged: HashMap<GlobalState, (Vec<BoolExpr>, BddRef)> = HashMap::new();
    let mut choice = vec![0usize; per_machine.len()];
    // depth-first over move tuples, pruning unsatisfiable prefixes
    fn rec(
        k: usize,
        acc: BddRef,
        per: &[Vec<Move>],
        choice: &mut Vec<usize>,
        mgr: &mut BddManager,
        emit: &mut dyn FnMut(&[usize], BddRef),
    ) {
        if k == per.len() {
            emit(choice, acc);
            return;
        }
        for (i, mv) in per[k].iter().enumerate() {
            let next = mgr.and(acc, mv.bdd);
            if next.is_false() {
                continue;
            }
            choice[k] = i;
            rec(k + 1, next, per, choice, mgr, emit);
        }
    }
    let mut found: Vec<(Vec<usize>, BddRef)> = Vec::new();
    rec(0, BddRef::TRUE, &per_machine, &mut choice, mgr, &mut |c, b| found.push((c.to_vec(), b)));
    for (c, bdd) in found {
        let dst = GlobalState(c.iter().enumerate().map(|(k, &i)| per_machine[k][i].dst).collect());
        let guard = BoolExpr::and_all(c.iter().enumerate().map(|(k, &i)| per_machine[k][i].guard.clone()));
        match merged.get_mut(&dst) {
            Some((gs, b)) => {
                gs.push(guard);
                *b = mgr.or(*b, bdd);
            }
            None => {
                order.push(dst.clone());
                merged.insert(dst, (vec![guard], bdd));
            }
        }
    }
    order
        .into_iter()
        .map(|dst| {
            let (gs, b) = merged.remove(&dst).expect("recorded");
            let guard = if b.is_true() { BoolExpr::TRUE } else { BoolExpr::or_all(gs) };
            (dst, guard)
        })
        .collect()
}

/// Explicit-state breadth-first construction.
pub fn build_rg_explicit(system: &System) -> Result<ReachGraph, InvalidSystem> {
    build_rg_explicit_with(system, Exec::default())
}

/// Like [`build_rg_explicit`] with an explicit execution mode. Each BFS
/// level is expanded as one batch; ids are assigned in frontier order so
/// the graph is the same under either mode.
pub fn build_rg_explicit_with(system: &System, exec: Exec) -> Result<ReachGraph, InvalidSystem> {
    system.check_structure()?;
    let env = system.env_alphabet();
    let init = system.initial_state();
    let mut ids: HashMap<GlobalState, usize> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init];
    let mut edges = Vec::new();
    let mut frontier: Vec<usize> = vec![0];
    while !frontier.is_empty() {
        let batch: Vec<GlobalState> = frontier.iter().map(|&i| states[i].clone()).collect();
        let expanded = exec::map_init(
            exec,
            &batch,
            || env_manager(&system.symbols, &env),
            |(mgr, vars), g| expand(system, &env, mgr, vars, g),
        );
        let mut next = Vec::new();
        for (&src, succs) in frontier.iter().zip(expanded) {
            for (dst, guard) in succs {
                let id = *ids.entry(dst.clone()).or_insert_with(|| {
                    states.push(dst);
                    next.push(states.len() - 1);
                    states.len() - 1
                });
                edges.push(RgEdge { src, dst: id, guard });
            }
        }
        frontier = next;
    }
    let nodes = states.into_iter().map(|s| make_node(system, s)).collect();
    Ok(ReachGraph::from_parts(system, nodes, edges))
}
