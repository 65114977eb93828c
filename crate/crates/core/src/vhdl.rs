//! VHDL generation.
//!
//! One entity for the whole system; environment symbols become `in BIT`
//! ports and produced symbols `out BIT` ports. Each machine is a process
//! that keeps its state in a bit-vector variable, prepares the next state
//! and a `new<Sym>` value for each of its outputs in a `case` over the
//! current state, then latches everything and waits for the next cycle.
//! Outputs are taken from the destination state (Moore).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::bdd::{BddManager, BddRef};
use crate::error::VhdlError;
use crate::formula::{BoolExpr, Symbol};
use crate::model::{Machine, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateEncoding {
    /// Minimal width, state index in binary.
    #[default]
    Binary,
    OneHot,
    /// Binary code in a fixed number of bits.
    Width(usize),
}

impl StateEncoding {
    pub fn width(self, states: usize) -> usize {
        match self {
            StateEncoding::Binary => {
                let mut w = 1;
                while (1usize << w) < states {
                    w += 1;
                }
                w
            }
            StateEncoding::OneHot => states.max(1),
            StateEncoding::Width(w) => w,
        }
    }

    /// Code of state `index`, most significant bit first.
    pub fn code(self, index: usize, states: usize) -> String {
        let w = self.width(states);
        match self {
            StateEncoding::OneHot => (0..w).rev().map(|b| if b == index { '1' } else { '0' }).collect(),
            _ => (0..w).rev().map(|b| if (index >> b) & 1 == 1 { '1' } else { '0' }).collect(),
        }
    }

    fn label(self) -> String {
        match self {
            StateEncoding::Binary => "binary".into(),
            StateEncoding::OneHot => "onehot".into(),
            StateEncoding::Width(w) => format!("width:{w}"),
        }
    }

    fn parse_label(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(StateEncoding::Binary),
            "onehot" => Some(StateEncoding::OneHot),
            _ => s.strip_prefix("width:")?.parse().ok().map(StateEncoding::Width),
        }
    }
}

impl std::str::FromStr for StateEncoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_label(s).ok_or_else(|| format!("unknown state encoding `{s}` (binary, onehot, width:N)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenOptions {
    pub encoding: StateEncoding,
    pub delay_ns: u64,
    /// Defaults to the system name.
    pub entity_name: Option<String>,
    /// Latch on a rising edge of a `clk` input instead of a fixed delay.
    pub clock: bool,
}

impl Default for CodegenOptions {
    fn default() -> Self {
        CodegenOptions { encoding: StateEncoding::Binary, delay_ns: 10, entity_name: None, clock: false }
    }
}

const RESERVED: &[&str] = &[
    "abs", "access", "after", "alias", "all", "and", "architecture", "array", "assert", "attribute", "begin", "block",
    "body", "buffer", "bus", "case", "component", "configuration", "constant", "disconnect", "downto", "else",
    "elsif", "end", "entity", "exit", "file", "for", "function", "generate", "generic", "group", "guarded", "if",
    "impure", "in", "inertial", "inout", "is", "label", "library", "linkage", "literal", "loop", "map", "mod",
    "nand", "new", "next", "nor", "not", "null", "of", "on", "open", "or", "others", "out", "package", "port",
    "postponed", "procedure", "process", "pure", "range", "record", "register", "reject", "rem", "report",
    "return", "rol", "ror", "select", "severity", "shared", "signal", "sla", "sll", "sra", "srl", "subtype",
    "then", "to", "transport", "type", "unaffected", "units", "until", "use", "variable", "wait", "when", "while",
    "with", "xnor", "xor",
];

fn vhdl_identifier(name: &str) -> Result<(), VhdlError> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.contains("__")
        && !name.ends_with('_')
        && !RESERVED.contains(&name.to_ascii_lowercase().as_str());
    if ok {
        return Ok(());
    }
    let mut s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    let s = s.trim_matches('_').to_owned();
    let mut suggestion = if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) { s } else { format!("s_{s}") };
    if RESERVED.contains(&suggestion.to_ascii_lowercase().as_str()) {
        suggestion.push_str("_sig");
    }
    Err(VhdlError::IllegalIdentifier { name: name.to_owned(), suggestion })
}

/// VHDL expression for a guard. `and`/`or` chains are flattened; mixing
/// them is always parenthesised since VHDL gives them equal precedence.
pub fn guard_to_vhdl(e: &BoolExpr, names: &impl Fn(Symbol) -> String) -> String {
    fn chain<'a>(e: &'a BoolExpr, and: bool, out: &mut Vec<&'a BoolExpr>) {
        match (e, and) {
            (BoolExpr::And(a, b), true) | (BoolExpr::Or(a, b), false) => {
                chain(a, and, out);
                chain(b, and, out);
            }
            _ => out.push(e),
        }
    }
    fn go(e: &BoolExpr, names: &dyn Fn(Symbol) -> String, nested: bool) -> String {
        match e {
            BoolExpr::Const(true) => "TRUE".into(),
            BoolExpr::Const(false) => "FALSE".into(),
            BoolExpr::Atom(s) => format!("({}='1')", names(*s)),
            BoolExpr::Not(inner) => match **inner {
                BoolExpr::Atom(_) | BoolExpr::Const(_) => format!("not {}", go(inner, names, true)),
                _ => format!("not ({})", go(inner, names, false)),
            },
            BoolExpr::And(..) | BoolExpr::Or(..) => {
                let is_and = matches!(e, BoolExpr::And(..));
                let mut parts = Vec::new();
                chain(e, is_and, &mut parts);
                let body = parts
                    .iter()
                    .map(|p| go(p, names, true))
                    .collect::<Vec<_>>()
                    .join(if is_and { " and " } else { " or " });
                if nested {
                    format!("({body})")
                } else {
                    body
                }
            }
        }
    }
    go(e, names, false)
}

struct MachinePlan<'a> {
    machine: &'a Machine,
    width: usize,
    outputs: Vec<Symbol>,
}

/// Generates the VHDL text for `system`.
pub fn generate(system: &System, opts: &CodegenOptions) -> Result<String, VhdlError> {
    system.check_structure()?;
    let entity = opts.entity_name.clone().unwrap_or_else(|| system.name.clone());
    let name = |s: Symbol| system.symbols.name(s).to_owned();
    let env = system.env_alphabet();
    let produced = system.produced();

    // every generated name must be legal and distinct ignoring case
    let mut taken: HashMap<String, String> = HashMap::new();
    let mut claim = |n: &str| -> Result<(), VhdlError> {
        vhdl_identifier(n)?;
        match taken.insert(n.to_ascii_lowercase(), n.to_owned()) {
            Some(_) => Err(VhdlError::NameClash(n.to_owned())),
            None => Ok(()),
        }
    };
    claim(&entity)?;
    claim("current_state")?;
    claim("newstate")?;
    if opts.clock {
        claim("clk")?;
    }
    for s in env.iter().chain(&produced) {
        claim(&name(*s))?;
        if produced.contains(s) {
            claim(&format!("new{}", name(*s)))?;
        }
    }
    for m in &system.machines {
        claim(m.name())?;
    }

    let mut plans = Vec::new();
    let mut owner: HashMap<Symbol, &str> = HashMap::new();
    for m in &system.machines {
        let width = opts.encoding.width(m.states().len());
        let fits = match opts.encoding {
            StateEncoding::Width(w) => w >= 1 && w < usize::BITS as usize && (1usize << w) >= m.states().len(),
            _ => true,
        };
        if !fits {
            return Err(VhdlError::WidthOverflow { machine: m.name().to_owned(), states: m.states().len(), width });
        }
        let outputs: Vec<Symbol> = m.produced().into_iter().collect();
        for &o in &outputs {
            if owner.insert(o, m.name()).is_some() {
                return Err(VhdlError::NameClash(format!("{} (driven by several machines)", name(o))));
            }
        }
        plans.push(MachinePlan { machine: m, width, outputs });
    }

    let mut mgr = BddManager::new();
    let vars: HashMap<Symbol, BddRef> = system.symbols.symbols().map(|s| (s, mgr.mk_var(system.symbols.name(s)))).collect();

    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "-- generated by cosma from system {}", system.name).unwrap();
    writeln!(w, "-- state encoding: {}", opts.encoding.label()).unwrap();
    writeln!(w).unwrap();
    writeln!(w, "entity {entity} is").unwrap();
    let mut ports: Vec<String> = Vec::new();
    if opts.clock {
        ports.push("clk : in BIT".into());
    }
    ports.extend(env.iter().map(|&s| format!("{} : in BIT", name(s))));
    ports.extend(produced.iter().map(|&s| format!("{} : out BIT", name(s))));
    if !ports.is_empty() {
        writeln!(w, "  port (").unwrap();
        for (i, p) in ports.iter().enumerate() {
            let sep = if i + 1 < ports.len() { ";" } else { "" };
            writeln!(w, "    {p}{sep}").unwrap();
        }
        writeln!(w, "  );").unwrap();
    }
    writeln!(w, "end {entity};").unwrap();
    writeln!(w).unwrap();
    writeln!(w, "architecture {entity} of {entity} is").unwrap();
    writeln!(w, "begin").unwrap();

    for plan in &plans {
        let m = plan.machine;
        let n = m.states().len();
        let hi = plan.width - 1;
        let init = opts.encoding.code(m.initial(), n);
        let init_outputs = &m.state(m.initial()).outputs;
        writeln!(w).unwrap();
        writeln!(w, "  {} : process", m.name()).unwrap();
        writeln!(w, "    variable current_state : BIT_VECTOR ({hi} downto 0) :=\"{init}\";").unwrap();
        writeln!(w, "    variable newstate : BIT_VECTOR ({hi} downto 0) :=\"{init}\";").unwrap();
        for &o in &plan.outputs {
            let v = if init_outputs.contains(&o) { '1' } else { '0' };
            writeln!(w, "    variable new{} : BIT := '{v}';", name(o)).unwrap();
        }
        writeln!(w, "  begin").unwrap();
        writeln!(w, "    loop").unwrap();
        writeln!(w, "      case current_state is").unwrap();

        let guards: Vec<BddRef> = m
            .arcs()
            .iter()
            .map(|a| mgr.from_expr(&a.guard, &|s| vars.get(&s).copied()).expect("registered symbols"))
            .collect();
        let assign = |w: &mut String, dst: usize, indent: &str| {
            writeln!(w, "{indent}newstate := \"{}\";", opts.encoding.code(dst, n)).unwrap();
            let outs = &m.state(dst).outputs;
            for &o in &plan.outputs {
                let v = if outs.contains(&o) { '1' } else { '0' };
                writeln!(w, "{indent}new{} := '{v}';", name(o)).unwrap();
            }
        };
        for si in 0..n {
            writeln!(w, "        when \"{}\" =>", opts.encoding.code(si, n)).unwrap();
            let arcs = m.outgoing(si);
            let overlap = arcs
                .iter()
                .enumerate()
                .any(|(i, &a)| arcs[i + 1..].iter().any(|&b| !mgr.and(guards[a], guards[b]).is_false()));
            if overlap {
                writeln!(w, "          -- overlapping guards: the first matching arc wins").unwrap();
            }
            let cover = mgr.or_all(arcs.iter().map(|&a| guards[a]));
            match arcs {
                [] => assign(w, si, "          "),
                [only] if m.arcs()[*only].guard == BoolExpr::TRUE => assign(w, m.arc_ends(*only).1, "          "),
                _ => {
                    for (i, &a) in arcs.iter().enumerate() {
                        let kw = if i == 0 { "if" } else { "elsif" };
                        writeln!(w, "          {kw} {} then", guard_to_vhdl(&m.arcs()[a].guard, &name)).unwrap();
                        assign(w, m.arc_ends(a).1, "            ");
                    }
                    if !cover.is_true() {
                        writeln!(w, "          else").unwrap();
                        assign(w, si, "            ");
                    }
                    writeln!(w, "          end if;").unwrap();
                }
            }
        }
        let complete = plan.width < usize::BITS as usize && (1usize << plan.width) == n && opts.encoding != StateEncoding::OneHot;
        if !complete {
            writeln!(w, "        when others =>").unwrap();
            writeln!(w, "          null;").unwrap();
        }
        writeln!(w, "      end case;").unwrap();
        writeln!(w, "      current_state := newstate;").unwrap();
        for &o in &plan.outputs {
            writeln!(w, "      {} <= new{};", name(o), name(o)).unwrap();
        }
        if opts.clock {
            writeln!(w, "      wait until clk'event and clk = '1';").unwrap();
        } else {
            writeln!(w, "      wait for {} ns;", opts.delay_ns).unwrap();
        }
        writeln!(w, "    end loop;").unwrap();
        writeln!(w, "  end process {};", m.name()).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(w, "end {entity};").unwrap();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    pub processes: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Token-level self-check of generated text against the system it came
/// from.
pub fn structural_audit(vhdl: &str, system: &System) -> AuditReport {
    let mut report = AuditReport::default();
    let fail = |r: &mut AuditReport, msg: String| r.failures.push(msg);
    let lines: Vec<&str> = vhdl.lines().map(str::trim).collect();

    let encoding = lines
        .iter()
        .find_map(|l| l.strip_prefix("-- state encoding: "))
        .and_then(StateEncoding::parse_label);
    let Some(encoding) = encoding else {
        fail(&mut report, "missing state encoding header".into());
        return report;
    };

    // block nesting
    let mut stack: Vec<&str> = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        let opener = if l.starts_with("if ") && l.ends_with(" then") {
            Some("if")
        } else if l.starts_with("case ") && l.ends_with(" is") {
            Some("case")
        } else if l.ends_with(": process") {
            Some("process")
        } else if *l == "loop" {
            Some("loop")
        } else {
            None
        };
        let closer = if *l == "end if;" {
            Some("if")
        } else if *l == "end case;" {
            Some("case")
        } else if l.starts_with("end process") {
            Some("process")
        } else if *l == "end loop;" {
            Some("loop")
        } else {
            None
        };
        if let Some(o) = opener {
            stack.push(o);
        }
        if let Some(c) = closer {
            match stack.pop() {
                Some(o) if o == c => {}
                other => fail(&mut report, format!("line {}: `{l}` closes {:?}", i + 1, other.unwrap_or("nothing"))),
            }
        }
    }
    for open in &stack {
        fail(&mut report, format!("unclosed `{open}` block"));
    }

    // ports
    let env = system.env_alphabet();
    let produced = system.produced();
    for s in env.iter().chain(&produced) {
        let n = system.symbols.name(*s);
        let dir = if produced.contains(s) { "out" } else { "in" };
        let decl = format!("{n} : {dir} BIT");
        let count = lines.iter().filter(|l| l.trim_end_matches(';') == decl).count();
        if count != 1 {
            fail(&mut report, format!("port `{n}` declared {count} times"));
        }
    }

    // processes and their state branches
    report.processes = lines.iter().filter(|l| l.ends_with(": process")).count();
    if report.processes != system.machines.len() {
        let msg = format!("{} processes for {} machines", report.processes, system.machines.len());
        fail(&mut report, msg);
    }
    for m in &system.machines {
        let head = format!("{} : process", m.name());
        let tail = format!("end process {};", m.name());
        let (Some(start), Some(end)) = (lines.iter().position(|l| *l == head), lines.iter().position(|l| *l == tail)) else {
            fail(&mut report, format!("machine `{}`: process not found", m.name()));
            continue;
        };
        let body = &lines[start..end];
        let n = m.states().len();
        for (si, st) in m.states().iter().enumerate() {
            let branch = format!("when \"{}\" =>", encoding.code(si, n));
            let count = body.iter().filter(|l| **l == branch).count();
            if count != 1 {
                fail(&mut report, format!("machine `{}` state `{}`: {count} `when` branches", m.name(), st.name));
            }
        }
        let branches = body.iter().filter(|l| l.starts_with("when \"")).count();
        if branches != n {
            fail(&mut report, format!("machine `{}`: {branches} state branches for {n} states", m.name()));
        }
        for o in m.produced() {
            let latch = format!("{0} <= new{0};", system.symbols.name(o));
            let count = body.iter().filter(|l| **l == latch).count();
            if count != 1 {
                fail(&mut report, format!("machine `{}`: output `{}` latched {count} times", m.name(), system.symbols.name(o)));
            }
        }
    }
    report
}

/// Symbols mentioned anywhere in generated ports, for callers that want to
/// cross-check the interface.
pub fn port_symbols(system: &System) -> BTreeSet<Symbol> {
    let mut s = system.env_alphabet();
    s.extend(system.produced());
    s
}
