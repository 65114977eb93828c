use std::collections::{BTreeSet, HashMap};

use crate::bdd::{BddManager, BddRef, VarId};
use crate::error::InvalidSystem;
use crate::formula::Symbol;
use crate::model::{GlobalState, System};

/// State bits of one machine: `current[i]` and `next[i]` are adjacent in
/// the variable order. Bit 0 is the least significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineEncoding {
    pub machine: String,
    pub states: usize,
    pub current: Vec<VarId>,
    pub next: Vec<VarId>,
}

fn bits_for(states: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < states {
        bits += 1;
    }
    bits
}

#[derive(Debug)]
pub struct SymbolicReachability {
    pub encoding: Vec<MachineEncoding>,
    pub env_vars: Vec<(Symbol, VarId)>,
    pub manager: BddManager,
    pub transition: BddRef,
    pub initial: BddRef,
    pub reachable: BddRef,
    /// Image steps until the fixpoint was reached.
    pub iterations: usize,
    pub reachable_count: u128,
}

impl SymbolicReachability {
    pub fn current_vars(&self) -> Vec<VarId> {
        self.encoding.iter().flat_map(|e| e.current.iter().copied()).collect()
    }

    /// Decodes the reachable set into explicit global states (sorted).
    pub fn reachable_states(&self) -> Vec<GlobalState> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.encoding.len()];
        loop {
            let truth = |v: VarId| {
                for (e, &s) in self.encoding.iter().zip(&idx) {
                    if let Some(bit) = e.current.iter().position(|&c| c == v) {
                        return (s >> bit) & 1 == 1;
                    }
                }
                false
            };
            if self.manager.eval(self.reachable, truth) {
                out.push(GlobalState(idx.clone()));
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < self.encoding[k].states {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
        out.sort();
        out
    }
}

fn encode(mgr: &mut BddManager, bits: &[VarId], value: usize) -> BddRef {
    let lits: Vec<BddRef> = bits
        .iter()
        .enumerate()
        .map(|(i, &v)| if (value >> i) & 1 == 1 { mgr.var(v) } else { mgr.nvar(v) })
        .collect();
    mgr.and_all(lits)
}

/// Least-fixpoint reachability over a binary state encoding with
/// interleaved current/next bits.
pub fn build_rg_symbolic(system: &System) -> Result<SymbolicReachability, InvalidSystem> {
    system.check_structure()?;
    let mut mgr = BddManager::new();
    let mut encoding = Vec::new();
    for (mi, m) in system.machines.iter().enumerate() {
        let n = bits_for(m.states().len());
        let mut current = Vec::with_capacity(n);
        let mut next = Vec::with_capacity(n);
        for b in 0..n {
            current.push(mgr.declare(&format!("m{mi}.{b}")));
            next.push(mgr.declare(&format!("m{mi}.{b}'")));
        }
        encoding.push(MachineEncoding { machine: m.name().to_owned(), states: m.states().len(), current, next });
    }
    let env: BTreeSet<Symbol> = system.env_alphabet();
    let env_vars: Vec<(Symbol, VarId)> = env.iter().map(|&s| (s, mgr.declare(system.symbols.name(s)))).collect();

    // produced symbols become functions of the current-state bits
    let mut signal: HashMap<Symbol, BddRef> = HashMap::new();
    for &(s, v) in &env_vars {
        let b = mgr.var(v);
        signal.insert(s, b);
    }
    for (m, enc) in system.machines.iter().zip(&encoding) {
        for (si, st) in m.states().iter().enumerate() {
            let here = encode(&mut mgr, &enc.current, si);
            for &o in &st.outputs {
                let prev = signal.get(&o).copied().unwrap_or(BddRef::FALSE);
                let b = mgr.or(prev, here);
                signal.insert(o, b);
            }
        }
    }
    let lookup = |s: Symbol| Some(signal.get(&s).copied().unwrap_or(BddRef::FALSE));

    let mut transition = BddRef::TRUE;
    let mut initial = BddRef::TRUE;
    let mut valid = BddRef::TRUE;
    for (m, enc) in system.machines.iter().zip(&encoding) {
        let mut rel = BddRef::FALSE;
        let mut any_state = BddRef::FALSE;
        for si in 0..m.states().len() {
            let here = encode(&mut mgr, &enc.current, si);
            any_state = mgr.or(any_state, here);
            let mut moves = BddRef::FALSE;
            let mut cover = BddRef::FALSE;
            for &ai in m.outgoing(si) {
                let g = mgr.from_expr(&m.arcs()[ai].guard, &lookup).expect("every atom has a signal");
                cover = mgr.or(cover, g);
                let dst = encode(&mut mgr, &enc.next, m.arc_ends(ai).1);
                let mv = mgr.and(g, dst);
                moves = mgr.or(moves, mv);
            }
            let stay_target = encode(&mut mgr, &enc.next, si);
            let uncovered = mgr.not(cover);
            let stay = mgr.and(uncovered, stay_target);
            moves = mgr.or(moves, stay);
            let from_here = mgr.and(here, moves);
            rel = mgr.or(rel, from_here);
        }
        transition = mgr.and(transition, rel);
        valid = mgr.and(valid, any_state);
        let init = encode(&mut mgr, &enc.current, m.initial());
        initial = mgr.and(initial, init);
    }

    let mut quantified: BTreeSet<VarId> = encoding.iter().flat_map(|e| e.current.iter().copied()).collect();
    quantified.extend(env_vars.iter().map(|&(_, v)| v));
    let rename: HashMap<VarId, VarId> = encoding
        .iter()
        .flat_map(|e| e.next.iter().copied().zip(e.current.iter().copied()))
        .collect();

    let mut reachable = initial;
    let mut iterations = 0;
    loop {
        let step = mgr.and(reachable, transition);
        let image_next = mgr.exists(&quantified, step);
        let image = mgr.rename(image_next, &rename);
        let grown = mgr.or(reachable, image);
        iterations += 1;
        if grown == reachable {
            break;
        }
        reachable = grown;
    }
    let masked = mgr.and(reachable, valid);
    let current: Vec<VarId> = encoding.iter().flat_map(|e| e.current.iter().copied()).collect();
    let reachable_count = mgr.sat_count_over(masked, &current);

    Ok(SymbolicReachability { encoding, env_vars, manager: mgr, transition, initial, reachable: masked, iterations, reachable_count })
}
