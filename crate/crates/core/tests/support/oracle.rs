use std::collections::{BTreeSet, HashMap, VecDeque};

use cosma_core::reach::ReachGraph;
use cosma_core::{BoolExpr, Ctl, Query, QueryMode, Symbol, System, Trace};

/// Reachable states and successor sets computed straight from the machine
/// definitions, by name, without the crate's step function.
pub struct Oracle {
    pub states: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    pub outputs: Vec<BTreeSet<Symbol>>,
    /// Per node and env valuation, the successor nodes.
    pub steps: Vec<Vec<(BTreeSet<Symbol>, BTreeSet<usize>)>>,
}

pub fn env_valuations(env: &[Symbol]) -> Vec<BTreeSet<Symbol>> {
    (0..1u32 << env.len()).map(|m| env.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &s)| s).collect()).collect()
}

pub fn outputs_of(sys: &System, g: &[usize]) -> BTreeSet<Symbol> {
    sys.machines.iter().zip(g).flat_map(|(m, &s)| m.states()[s].outputs.iter().copied()).collect()
}

pub fn step(sys: &System, g: &[usize], env: &BTreeSet<Symbol>) -> Vec<Vec<usize>> {
    let mut val = outputs_of(sys, g);
    val.extend(env);
    let mut tuples = vec![vec![]];
    for (m, &cur) in sys.machines.iter().zip(g) {
        let here = &m.states()[cur].name;
        let mut dsts: BTreeSet<usize> = m
            .arcs()
            .iter()
            .filter(|a| &a.src == here && a.guard.eval(&val))
            .map(|a| m.states().iter().position(|s| s.name == a.dst).unwrap())
            .collect();
        if dsts.is_empty() {
            dsts.insert(cur);
        }
        tuples = tuples
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                dsts.iter().map(move |&d| {
                    let mut t = t.clone();
                    t.push(d);
                    t
                })
            })
            .collect();
    }
    tuples
}

impl Oracle {
    pub fn new(sys: &System) -> Oracle {
        let env: Vec<Symbol> = sys.env_alphabet().into_iter().collect();
        let envs = env_valuations(&env);
        let init: Vec<usize> = sys.machines.iter().map(|m| m.state_index(m.initial_name()).unwrap()).collect();
        let mut o = Oracle { states: vec![], index: HashMap::new(), outputs: vec![], steps: vec![] };
        o.add(sys, init);
        let mut queue = VecDeque::from([0]);
        while let Some(n) = queue.pop_front() {
            let g = o.states[n].clone();
            let mut row = Vec::new();
            for e in &envs {
                let mut succ = BTreeSet::new();
                for t in step(sys, &g, e) {
                    let (id, new) = o.add(sys, t);
                    if new {
                        queue.push_back(id);
                    }
                    succ.insert(id);
                }
                row.push((e.clone(), succ));
            }
            o.steps.push(row);
        }
        o
    }

    fn add(&mut self, sys: &System, g: Vec<usize>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&g) {
            return (i, false);
        }
        let i = self.states.len();
        self.outputs.push(outputs_of(sys, &g));
        self.index.insert(g.clone(), i);
        self.states.push(g);
        (i, true)
    }

    pub fn succ(&self, n: usize) -> BTreeSet<usize> {
        self.steps[n].iter().flat_map(|(_, s)| s.iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Every path of `depth` nodes from `start` meets `target`.
    pub fn all_paths_hit(&self, start: usize, target: &[bool], depth: usize) -> bool {
        if target[start] {
            return true;
        }
        if depth <= 1 {
            return false;
        }
        self.succ(start).into_iter().all(|d| self.all_paths_hit(d, target, depth - 1))
    }

    pub fn label(&self, f: &Ctl) -> Vec<bool> {
        let n = self.len();
        let pre_e = |z: &[bool]| -> Vec<bool> { (0..n).map(|s| self.succ(s).iter().any(|&d| z[d])).collect() };
        let pre_a = |z: &[bool]| -> Vec<bool> { (0..n).map(|s| self.succ(s).iter().all(|&d| z[d])).collect() };
        let lfp = |a: &[bool], b: &[bool], pre: &dyn Fn(&[bool]) -> Vec<bool>| {
            let mut z = vec![false; n];
            loop {
                let p = pre(&z);
                let next: Vec<bool> = (0..n).map(|s| b[s] || (a[s] && p[s])).collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        };
        let gfp = |a: &[bool], pre: &dyn Fn(&[bool]) -> Vec<bool>| {
            let mut z = vec![true; n];
            loop {
                let p = pre(&z);
                let next: Vec<bool> = (0..n).map(|s| a[s] && p[s]).collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        };
        let t = vec![true; n];
        match f {
            Ctl::Const(c) => vec![*c; n],
            Ctl::Atom(s) => self.outputs.iter().map(|o| o.contains(s)).collect(),
            Ctl::Not(a) => self.label(a).iter().map(|x| !x).collect(),
            Ctl::And(a, b) => self.label(a).iter().zip(self.label(b)).map(|(x, y)| *x && y).collect(),
            Ctl::Or(a, b) => self.label(a).iter().zip(self.label(b)).map(|(x, y)| *x || y).collect(),
            Ctl::Implies(a, b) => self.label(a).iter().zip(self.label(b)).map(|(x, y)| !*x || y).collect(),
            Ctl::EX(a) => pre_e(&self.label(a)),
            Ctl::AX(a) => pre_a(&self.label(a)),
            Ctl::EF(a) => lfp(&t, &self.label(a), &pre_e),
            Ctl::AF(a) => lfp(&t, &self.label(a), &pre_a),
            Ctl::EU(a, b) => lfp(&self.label(a), &self.label(b), &pre_e),
            Ctl::AU(a, b) => lfp(&self.label(a), &self.label(b), &pre_a),
            Ctl::EG(a) => gfp(&self.label(a), &pre_e),
            Ctl::AG(a) => gfp(&self.label(a), &pre_a),
        }
    }
}

/// Node `i` of the oracle is node `map[i]` of the graph.
pub fn node_map(o: &Oracle, rg: &ReachGraph) -> Vec<usize> {
    o.states.iter().map(|g| rg.nodes.iter().position(|n| &n.state.0 == g).expect("oracle state in graph")).collect()
}


/// (holds, vacuous) from direct enumeration of environment valuations.
pub fn oracle_verdict(o: &Oracle, q: &Query, env_part: &BoolExpr, state_part: &BoolExpr) -> (bool, bool) {
    let target: Vec<bool> = o.outputs.iter().map(|v| q.consequent.eval(v)).collect();
    let depth = o.len() + 1;
    let mut vacuous = true;
    for n in 0..o.len() {
        if !state_part.eval(&o.outputs[n]) {
            continue;
        }
        vacuous = false;
        let dsts: BTreeSet<usize> =
            o.steps[n].iter().filter(|(e, _)| env_part.eval(e)).flat_map(|(_, s)| s.iter().copied()).collect();
        let ok = !dsts.is_empty()
            && dsts.iter().all(|&d| match q.mode {
                QueryMode::Next => target[d],
                _ => o.all_paths_hit(d, &target, depth),
            });
        if !ok {
            return (false, false);
        }
    }
    (true, vacuous)
}

pub fn replays(sys: &System, rg: &ReachGraph, trace: &Trace) -> bool {
    let mut pairs: Vec<(usize, usize)> = trace.steps.windows(2).enumerate().map(|(i, w)| (i, w[1].node)).collect();
    if let Some(l) = trace.loop_start {
        pairs.push((trace.steps.len() - 1, trace.steps[l].node));
    }
    pairs.into_iter().all(|(i, next)| {
        let env: BTreeSet<_> = trace.steps[i].env.iter().map(|n| sys.symbols.lookup(n).unwrap()).collect();
        sys.successors(&rg.nodes[trace.steps[i].node].state, &env).contains(&rg.nodes[next].state)
    })
}
