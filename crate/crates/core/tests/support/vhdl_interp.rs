use std::collections::{BTreeMap, BTreeSet};

use cosma_core::{generate, structural_audit, CodegenOptions, GlobalState, StateEncoding, System};

/// Guard expression over `(Sym='1')` atoms.
pub fn eval_cond(text: &str, signals: &BTreeMap<String, bool>) -> bool {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let toks: Vec<&str> = spaced.split_whitespace().collect();
    let mut pos = 0;
    let v = expr(&toks, &mut pos, signals);
    assert_eq!(pos, toks.len(), "trailing tokens in `{text}`");
    v
}

fn expr(t: &[&str], pos: &mut usize, s: &BTreeMap<String, bool>) -> bool {
    let mut acc = unary(t, pos, s);
    let mut op: Option<&str> = None;
    while *pos < t.len() && (t[*pos] == "and" || t[*pos] == "or") {
        let this = t[*pos];
        assert!(op.is_none_or(|o| o == this), "mixed and/or without parentheses");
        op = Some(this);
        *pos += 1;
        let rhs = unary(t, pos, s);
        acc = if this == "and" { acc && rhs } else { acc || rhs };
    }
    acc
}

fn unary(t: &[&str], pos: &mut usize, s: &BTreeMap<String, bool>) -> bool {
    match t[*pos] {
        "not" => {
            *pos += 1;
            !unary(t, pos, s)
        }
        "TRUE" => {
            *pos += 1;
            true
        }
        "FALSE" => {
            *pos += 1;
            false
        }
        "(" => {
            *pos += 1;
            let v = if let Some(name) = t[*pos].strip_suffix("='1'") {
                *pos += 1;
                *s.get(name).unwrap_or_else(|| panic!("unknown signal {name}"))
            } else {
                expr(t, pos, s)
            };
            assert_eq!(t[*pos], ")");
            *pos += 1;
            v
        }
        other => panic!("unexpected token {other}"),
    }
}

pub struct Process {
    pub init_state: String,
    pub init_outputs: BTreeMap<String, char>,
    /// code -> branch lines (trimmed)
    pub branches: BTreeMap<String, Vec<String>>,
}

pub fn processes(vhdl: &str) -> BTreeMap<String, Process> {
    let lines: Vec<&str> = vhdl.lines().map(str::trim).collect();
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < lines.len() {
        let Some(name) = lines[i].strip_suffix(" : process") else {
            i += 1;
            continue;
        };
        let mut p = Process { init_state: String::new(), init_outputs: BTreeMap::new(), branches: BTreeMap::new() };
        let mut current: Option<String> = None;
        i += 1;
        while !lines[i].starts_with("end process") {
            let l = lines[i];
            if let Some(rest) = l.strip_prefix("variable current_state : ") {
                p.init_state = rest.split('"').nth(1).unwrap().to_owned();
            } else if let Some(rest) = l.strip_prefix("variable new").filter(|_| !l.contains("newstate")) {
                let (sig, val) = rest.split_once(" : BIT := '").unwrap();
                p.init_outputs.insert(sig.to_owned(), val.chars().next().unwrap());
            } else if let Some(rest) = l.strip_prefix("when \"") {
                let code = rest.split('"').next().unwrap().to_owned();
                p.branches.insert(code.clone(), vec![]);
                current = Some(code);
            } else if l == "when others =>" || l == "end case;" {
                current = None;
            } else if let Some(c) = &current {
                p.branches.get_mut(c).unwrap().push(l.to_owned());
            }
            i += 1;
        }
        out.insert(name.to_owned(), p);
    }
    out
}

/// Runs one state branch: the assignments of the first true arm.
pub fn run_branch(lines: &[String], signals: &BTreeMap<String, bool>) -> BTreeMap<String, String> {
    let mut taken = false;
    let mut active = true;
    let mut assigned = BTreeMap::new();
    for l in lines {
        if l.starts_with("--") || l == "end if;" {
            continue;
        }
        if let Some(c) = l.strip_prefix("if ").or_else(|| l.strip_prefix("elsif ")) {
            let c = c.strip_suffix(" then").unwrap();
            active = !taken && eval_cond(c, signals);
            taken |= active;
        } else if l == "else" {
            active = !taken;
            taken = true;
        } else if active {
            let (lhs, rhs) = l.trim_end_matches(';').split_once(" := ").unwrap();
            assigned.insert(lhs.to_owned(), rhs.trim_matches(|c| c == '"' || c == '\'').to_owned());
        }
    }
    assigned
}

pub fn decode(code: &str, enc: StateEncoding) -> usize {
    match enc {
        StateEncoding::OneHot => code.len() - 1 - code.find('1').unwrap(),
        _ => usize::from_str_radix(code, 2).unwrap(),
    }
}

/// Steps every process once from `g` under `env` and returns the next
/// global state plus the latched output signals.
pub fn cycle(sys: &System, vhdl: &str, enc: StateEncoding, g: &GlobalState, env: &BTreeSet<String>) -> (GlobalState, BTreeSet<String>) {
    let outputs: BTreeSet<String> = sys.output_valuation(g).iter().map(|&s| sys.symbols.name(s).to_owned()).collect();
    let mut signals: BTreeMap<String, bool> = BTreeMap::new();
    for s in sys.symbols.symbols() {
        let n = sys.symbols.name(s).to_owned();
        signals.insert(n.clone(), outputs.contains(&n) || env.contains(&n));
    }
    let procs = processes(vhdl);
    let mut next = Vec::new();
    let mut latched = BTreeSet::new();
    for (mi, m) in sys.machines.iter().enumerate() {
        let p = &procs[m.name()];
        let code = p.branches.keys().find(|c| decode(c, enc) == g.0[mi]).expect("state has a branch");
        let assigned = run_branch(&p.branches[code], &signals);
        next.push(decode(&assigned["newstate"], enc));
        for (sig, _) in &p.init_outputs {
            if assigned[&format!("new{sig}")] == "1" {
                latched.insert(sig.clone());
            }
        }
    }
    (GlobalState(next), latched)
}

pub fn all_states(sys: &System) -> Vec<GlobalState> {
    let mut out = vec![vec![]];
    for m in &sys.machines {
        out = out.into_iter().flat_map(|p: Vec<usize>| (0..m.states().len()).map(move |s| [p.clone(), vec![s]].concat())).collect();
    }
    out.into_iter().map(GlobalState).collect()
}

pub fn env_sets(sys: &System) -> Vec<BTreeSet<String>> {
    let env: Vec<String> = sys.env_alphabet().iter().map(|&s| sys.symbols.name(s).to_owned()).collect();
    (0..1u32 << env.len()).map(|m| env.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, n)| n.clone()).collect()).collect()
}

pub fn check_against_model(sys: &System, enc: StateEncoding, exact: bool) {
    let opts = CodegenOptions { encoding: enc, ..Default::default() };
    let vhdl = generate(sys, &opts).unwrap();
    let audit = structural_audit(&vhdl, sys);
    assert!(audit.passed(), "{:?}\n{vhdl}", audit.failures);
    let procs = processes(&vhdl);
    for (mi, m) in sys.machines.iter().enumerate() {
        let p = &procs[m.name()];
        assert_eq!(decode(&p.init_state, enc), m.initial());
        let init_out = &m.state(m.initial()).outputs;
        for (sig, v) in &p.init_outputs {
            assert_eq!(*v == '1', init_out.contains(&sys.symbols.lookup(sig).unwrap()), "{sig} in machine {mi}");
        }
    }
    for g in all_states(sys) {
        for env in env_sets(sys) {
            let env_syms: BTreeSet<_> = env.iter().map(|n| sys.symbols.lookup(n).unwrap()).collect();
            let succ = sys.successors(&g, &env_syms);
            let (next, latched) = cycle(sys, &vhdl, enc, &g, &env);
            if exact {
                assert_eq!(succ.len(), 1, "model is deterministic");
            }
            assert!(succ.contains(&next), "{} under {env:?}", sys.display_state(&g));
            let want: BTreeSet<String> = sys.output_valuation(&next).iter().map(|&s| sys.symbols.name(s).to_owned()).collect();
            assert_eq!(latched, want);
        }
    }
}
