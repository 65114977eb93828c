use std::collections::HashMap;

use serde::Serialize;

use crate::bdd::{BddManager, BddRef};
use crate::formula::Symbol;
use crate::reach::ReachGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub node: usize,
    pub states: Vec<String>,
    pub outputs: Vec<String>,
    /// Environment signals present when leaving this node; empty on the
    /// last step of a finite trace.
    pub env: Vec<String>,
}

/// A path through the reachability graph. With `loop_start` set, the last
/// step continues back to that index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub loop_start: Option<usize>,
}

impl Trace {
    pub(crate) fn from_path(rg: &ReachGraph, nodes: &[usize], envs: &[Vec<String>], loop_start: Option<usize>) -> Trace {
        let steps = nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| TraceStep {
                node: n,
                states: rg.nodes[n].state_names.clone(),
                outputs: rg.symbols.names_of(&rg.nodes[n].outputs),
                env: envs.get(i).cloned().unwrap_or_default(),
            })
            .collect();
        Trace { steps, loop_start }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let marker = if self.loop_start == Some(i) { "*" } else { " " };
            out.push_str(&format!("  {marker}{i:>3}: ({}) [{}]", s.states.join(", "), s.outputs.join(" ")));
            if !s.env.is_empty() || i + 1 < self.steps.len() || self.loop_start.is_some() {
                out.push_str(&format!("  env {{{}}}", s.env.join(", ")));
            }
            out.push('\n');
        }
        if let Some(l) = self.loop_start {
            out.push_str(&format!("  (loops back to step {l})\n"));
        }
        out
    }
}

pub(crate) fn edge_env(rg: &ReachGraph, mgr: &mut BddManager, vars: &HashMap<Symbol, BddRef>, edge: usize) -> Vec<String> {
    let g = mgr.from_expr(&rg.edges[edge].guard, &|s| vars.get(&s).copied()).expect("env-only guard");
    let cube = mgr.pick_cube(g).unwrap_or_default();
    rg.env
        .iter()
        .filter(|s| {
            let v = vars.get(s).and_then(|&b| mgr.top_var(b));
            cube.iter().any(|&(cv, val)| val && Some(cv) == v)
        })
        .map(|&s| rg.symbols.name(s).to_owned())
        .collect()
}

/// Follows edges inside `stay_in` from `start` until a node repeats.
/// Returns the nodes, the env valuation taken at each of them (including
/// the closing edge) and the index the loop returns to.
pub(crate) fn lasso(
    rg: &ReachGraph,
    mgr: &mut BddManager,
    vars: &HashMap<Symbol, BddRef>,
    start: usize,
    stay_in: &[bool],
) -> (Vec<usize>, Vec<Vec<String>>, Option<usize>) {
    let mut path = vec![start];
    let mut envs = Vec::new();
    let mut seen = HashMap::from([(start, 0usize)]);
    let mut cur = start;
    loop {
        let Some(&e) = rg.out_edges(cur).iter().find(|&&e| stay_in[rg.edges[e].dst]) else {
            return (path, envs, None);
        };
        envs.push(edge_env(rg, mgr, vars, e));
        let next = rg.edges[e].dst;
        if let Some(&i) = seen.get(&next) {
            return (path, envs, Some(i));
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

/// Shortest path from node 0 to some node in `goal`, by BFS.
pub(crate) fn path_to(rg: &ReachGraph, goal: &[bool]) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; rg.node_count()];
    let mut seen = vec![false; rg.node_count()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(n) = queue.pop_front() {
        if goal[n] {
            let mut nodes = vec![n];
            let mut edges = Vec::new();
            let mut cur = n;
            while let Some((p, e)) = parent[cur] {
                nodes.push(p);
                edges.push(e);
                cur = p;
            }
            nodes.reverse();
            edges.reverse();
            return Some((nodes, edges));
        }
        for &e in rg.out_edges(n) {
            let d = rg.edges[e].dst;
            if !seen[d] {
                seen[d] = true;
                parent[d] = Some((n, e));
                queue.push_back(d);
            }
        }
    }
    None
}
