//! System generators for randomized testing and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{BoolExpr, Symbol, SymbolTable};
use crate::model::{Arc, Machine, State, System};

#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub max_machines: usize,
    pub max_states: usize,
    pub max_env: usize,
    pub max_arcs_per_state: usize,
    pub guard_depth: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { max_machines: 3, max_states: 4, max_env: 3, max_arcs_per_state: 3, guard_depth: 2 }
    }
}

pub fn random_guard(rng: &mut impl Rng, atoms: &[Symbol], depth: usize) -> BoolExpr {
    if atoms.is_empty() {
        return BoolExpr::Const(rng.gen_bool(0.7));
    }
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return if rng.gen_bool(0.1) { BoolExpr::TRUE } else { BoolExpr::atom(*atoms.choose(rng).unwrap()) };
    }
    match rng.gen_range(0..3) {
        0 => BoolExpr::not(random_guard(rng, atoms, depth - 1)),
        1 => BoolExpr::and(random_guard(rng, atoms, depth - 1), random_guard(rng, atoms, depth - 1)),
        _ => BoolExpr::or(random_guard(rng, atoms, depth - 1), random_guard(rng, atoms, depth - 1)),
    }
}

/// A random well-formed system. Each machine produces its own output
/// symbols, so no symbol has two producers.
pub fn random_system(rng: &mut impl Rng, spec: &RandomSpec) -> System {
    let mut symbols = SymbolTable::new();
    let env: Vec<Symbol> = (0..rng.gen_range(0..=spec.max_env)).map(|i| symbols.intern(&format!("e{i}"))).collect();
    let n_machines = rng.gen_range(1..=spec.max_machines.max(1));
    let outputs: Vec<Vec<Symbol>> = (0..n_machines)
        .map(|m| (0..rng.gen_range(1..=2)).map(|j| symbols.intern(&format!("o{m}_{j}"))).collect())
        .collect();
    let mut atoms = env.clone();
    atoms.extend(outputs.iter().flatten());

    let machines = (0..n_machines)
        .map(|m| {
            let n_states = rng.gen_range(1..=spec.max_states.max(1));
            let names: Vec<String> = (0..n_states).map(|s| format!("s{s}")).collect();
            let mut emitted: Vec<Vec<Symbol>> =
                names.iter().map(|_| outputs[m].iter().copied().filter(|_| rng.gen_bool(0.5)).collect()).collect();
            // an output nobody emits would turn into an environment symbol
            for &o in &outputs[m] {
                if !emitted.iter().any(|e| e.contains(&o)) {
                    let s = rng.gen_range(0..n_states);
                    emitted[s].push(o);
                    emitted[s].sort();
                }
            }
            let states = names.iter().zip(emitted).map(|(n, e)| State::new(n.clone(), e)).collect();
            let mut arcs = Vec::new();
            for src in &names {
                for _ in 0..rng.gen_range(0..=spec.max_arcs_per_state) {
                    let dst = names.choose(rng).unwrap().clone();
                    arcs.push(Arc::new(src.clone(), dst, random_guard(rng, &atoms, spec.guard_depth)));
                }
            }
            Machine::new(format!("M{m}"), states, "s0", arcs)
        })
        .collect();
    System::new("Random", machines, symbols)
}

/// `n` counters of `k` states each. Counter `i` advances on its own tick
/// `t{i}` while the previous counter is away from its first state, so the
/// reachable set grows with both `n` and `k`.
pub fn counter_chain(n: usize, k: usize) -> System {
    let mut symbols = SymbolTable::new();
    let busy: Vec<Symbol> = (0..n).map(|i| symbols.intern(&format!("busy{i}"))).collect();
    let ticks: Vec<Symbol> = (0..n).map(|i| symbols.intern(&format!("t{i}"))).collect();
    let machines = (0..n)
        .map(|i| {
            let states = (0..k).map(|s| State::new(format!("c{s}"), if s == 0 { vec![] } else { vec![busy[i]] })).collect();
            let mut go = BoolExpr::atom(ticks[i]);
            if i > 0 {
                go = BoolExpr::and(go, BoolExpr::atom(busy[i - 1]));
            }
            let arcs = (0..k)
                .flat_map(|s| {
                    let next = format!("c{}", (s + 1) % k);
                    [Arc::new(format!("c{s}"), next, go.clone()), Arc::new(format!("c{s}"), format!("c{s}"), go.clone().negate())]
                })
                .collect();
            Machine::new(format!("C{i}"), states, "c0", arcs)
        })
        .collect();
    System::new(format!("Chain{n}x{k}"), machines, symbols)
}
