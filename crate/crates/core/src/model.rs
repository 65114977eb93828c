//! Concurrent State Machine systems: Moore-style components with guarded
//! arcs, composed by a synchronous step over a shared valuation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::InvalidSystem;
use crate::formula::{BoolExpr, Symbol, SymbolTable, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    /// Symbols emitted while the machine is in this state.
    pub outputs: BTreeSet<Symbol>,
}

impl State {
    pub fn new(name: impl Into<String>, outputs: impl IntoIterator<Item = Symbol>) -> Self {
        State { name: name.into(), outputs: outputs.into_iter().collect() }
    }
}

/// A guarded arc. `src == dst` is a stay condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub src: String,
    pub dst: String,
    pub guard: BoolExpr,
}

impl Arc {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, guard: BoolExpr) -> Self {
        Arc { src: src.into(), dst: dst.into(), guard }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    name: String,
    states: Vec<State>,
    initial: String,
    arcs: Vec<Arc>,
    // derived; first occurrence wins for duplicate state names
    index: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
    ends: Vec<(Option<usize>, Option<usize>)>,
}

impl Machine {
    pub fn new(name: impl Into<String>, states: Vec<State>, initial: impl Into<String>, arcs: Vec<Arc>) -> Self {
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            index.entry(s.name.clone()).or_insert(i);
        }
        let mut outgoing = vec![Vec::new(); states.len()];
        let ends: Vec<_> = arcs
            .iter()
            .map(|a| (index.get(&a.src).copied(), index.get(&a.dst).copied()))
            .collect();
        for (ai, (src, _)) in ends.iter().enumerate() {
            if let Some(s) = src {
                outgoing[*s].push(ai);
            }
        }
        Machine { name: name.into(), states, initial: initial.into(), arcs, index, outgoing, ends }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &State {
        &self.states[idx]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn initial_name(&self) -> &str {
        &self.initial
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Index of the initial state. Panics on a structurally invalid machine.
    pub fn initial(&self) -> usize {
        self.state_index(&self.initial).expect("initial state exists in a validated machine")
    }

    /// Arc indices leaving `state`, in declaration order.
    pub fn outgoing(&self, state: usize) -> &[usize] {
        &self.outgoing[state]
    }

    /// Resolved (src, dst) of an arc.
    pub fn arc_ends(&self, arc: usize) -> (usize, usize) {
        let (s, d) = self.ends[arc];
        (s.expect("arc source resolved"), d.expect("arc target resolved"))
    }

    /// Arcs leaving `state` whose guard holds under `valuation`, in
    /// declaration order.
    pub fn enabled_arcs(&self, state: usize, valuation: &Valuation) -> Vec<&Arc> {
        self.enabled_arc_indices(state, valuation).into_iter().map(|i| &self.arcs[i]).collect()
    }

    pub fn enabled_arc_indices(&self, state: usize, valuation: &Valuation) -> Vec<usize> {
        self.outgoing[state].iter().copied().filter(|&i| self.arcs[i].guard.eval(valuation)).collect()
    }

    /// Possible next states under `valuation`; a machine with no enabled arc
    /// stays where it is.
    pub fn next_states(&self, state: usize, valuation: &Valuation) -> BTreeSet<usize> {
        let next: BTreeSet<usize> = self
            .enabled_arc_indices(state, valuation)
            .into_iter()
            .map(|i| self.arc_ends(i).1)
            .collect();
        if next.is_empty() {
            [state].into()
        } else {
            next
        }
    }

    /// Symbols read by this machine's guards.
    pub fn inputs(&self) -> BTreeSet<Symbol> {
        self.arcs.iter().flat_map(|a| a.guard.atoms()).collect()
    }

    /// Symbols emitted by some state of this machine.
    pub fn produced(&self) -> BTreeSet<Symbol> {
        self.states.iter().flat_map(|s| s.outputs.iter().copied()).collect()
    }
}

/// One component-state index per machine, in machine order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState(pub Vec<usize>);

impl GlobalState {
    pub fn get(&self, machine: usize) -> usize {
        self.0[machine]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub machines: Vec<Machine>,
    pub symbols: SymbolTable,
}

impl System {
    pub fn new(name: impl Into<String>, machines: Vec<Machine>, symbols: SymbolTable) -> Self {
        System { name: name.into(), machines, symbols }
    }

    pub fn machine(&self, name: &str) -> Option<&Machine> {
        self.machines.iter().find(|m| m.name == name)
    }

    pub fn produced(&self) -> BTreeSet<Symbol> {
        self.machines.iter().flat_map(|m| m.produced()).collect()
    }

    pub fn consumed(&self) -> BTreeSet<Symbol> {
        self.machines.iter().flat_map(|m| m.inputs()).collect()
    }

    /// Symbols read by some guard but emitted by no state.
    pub fn env_alphabet(&self) -> BTreeSet<Symbol> {
        let produced = self.produced();
        self.consumed().into_iter().filter(|s| !produced.contains(s)).collect()
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState(self.machines.iter().map(Machine::initial).collect())
    }

    /// Size of the Cartesian product of component state sets.
    pub fn product_size(&self) -> u128 {
        self.machines.iter().map(|m| m.states.len() as u128).product()
    }

    pub fn output_valuation(&self, g: &GlobalState) -> Valuation {
        self.machines
            .iter()
            .zip(&g.0)
            .flat_map(|(m, &s)| m.states[s].outputs.iter().copied())
            .collect()
    }

    /// All global successors of `g` when the environment presents `env`.
    /// Every machine moves under the same valuation `outputs(g) ∪ env`.
    pub fn successors(&self, g: &GlobalState, env: &Valuation) -> BTreeSet<GlobalState> {
        let mut valuation = self.output_valuation(g);
        valuation.extend(env.iter().copied());
        let choices: Vec<Vec<usize>> = self
            .machines
            .iter()
            .zip(&g.0)
            .map(|(m, &s)| m.next_states(s, &valuation).into_iter().collect())
            .collect();
        let mut out = BTreeSet::new();
        let mut cur = vec![0usize; choices.len()];
        loop {
            out.insert(GlobalState(cur.iter().zip(&choices).map(|(&i, c)| c[i]).collect()));
            // odometer over the per-machine choices
            let mut k = 0;
            while k < cur.len() {
                cur[k] += 1;
                if cur[k] < choices[k].len() {
                    break;
                }
                cur[k] = 0;
                k += 1;
            }
            if k == cur.len() {
                break;
            }
        }
        out
    }

    /// Cheap structural check required before any analysis.
    pub fn check_structure(&self) -> Result<(), InvalidSystem> {
        let errors: Vec<String> = crate::lint::structural_errors(self).into_iter().map(|l| l.message).collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(InvalidSystem(errors))
        }
    }

    pub fn state_names(&self, g: &GlobalState) -> Vec<&str> {
        self.machines.iter().zip(&g.0).map(|(m, &s)| m.states[s].name.as_str()).collect()
    }

    pub fn display_state(&self, g: &GlobalState) -> String {
        format!("({})", self.state_names(g).join(", "))
    }

    /// Renders the system back into the DSL.
    pub fn to_dsl(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {} {{", self.name)?;
        for m in &self.machines {
            writeln!(f, "  machine {} {{", m.name)?;
            writeln!(f, "    init {};", m.initial)?;
            for (si, s) in m.states.iter().enumerate() {
                writeln!(f, "    state {} {{", s.name)?;
                if !s.outputs.is_empty() {
                    writeln!(f, "      out {};", self.symbols.names_of(&s.outputs).join(", "))?;
                }
                for &ai in &m.outgoing[si] {
                    let a = &m.arcs[ai];
                    writeln!(f, "      -> {} when {};", a.dst, a.guard.display(&self.symbols))?;
                }
                writeln!(f, "    }}")?;
            }
            writeln!(f, "  }}")?;
        }
        writeln!(f, "}}")
    }
}
