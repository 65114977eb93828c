mod support;

use std::collections::BTreeSet;

use cosma_core::mc::label;
use cosma_core::reach::build_rg_explicit_with;
use cosma_core::synth::{random_guard, random_system, RandomSpec};
use cosma_core::{
    build_rg_explicit, build_rg_symbolic, check_ctl, check_query, BoolExpr, Ctl, Exec, Query, QueryMode, Symbol, System,
};
use support::oracle::{node_map, oracle_verdict, replays, Oracle};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn systems(count: usize, seed: u64) -> Vec<System> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_system(&mut rng, &RandomSpec::default())).collect()
}

fn random_query(rng: &mut StdRng, sys: &System, mode: QueryMode) -> Query {
    let produced: Vec<Symbol> = sys.produced().into_iter().collect();
    let env: Vec<Symbol> = sys.env_alphabet().into_iter().collect();
    let state_part = random_guard(rng, &produced, 2);
    let antecedent = if !env.is_empty() && rng.gen_bool(0.6) {
        BoolExpr::and(state_part, random_guard(rng, &env, 1))
    } else {
        state_part
    };
    Query { name: "r".into(), antecedent, mode, consequent: random_guard(rng, &produced, 2) }
}



#[test]
fn engines_agree_with_oracle_on_random_systems() {
    for (i, sys) in systems(60, 11).iter().enumerate() {
        let oracle = Oracle::new(sys);
        let rg = build_rg_explicit(sys).unwrap();
        let sym = build_rg_symbolic(sys).unwrap();
        assert_eq!(rg.node_count(), oracle.len(), "system {i}:\n{sys}");
        assert_eq!(sym.reachable_count, oracle.len() as u128, "system {i}:\n{sys}");
        let a: BTreeSet<_> = rg.nodes.iter().map(|n| n.state.0.clone()).collect();
        let b: BTreeSet<_> = sym.reachable_states().into_iter().map(|g| g.0).collect();
        let c: BTreeSet<_> = oracle.states.iter().cloned().collect();
        assert_eq!(a, c);
        assert_eq!(b, c);
        // edges: one per (src, dst) pair that some valuation produces
        let map = node_map(&oracle, &rg);
        let expected: BTreeSet<(usize, usize)> =
            (0..oracle.len()).flat_map(|n| oracle.succ(n).into_iter().map(move |d| (n, d))).map(|(s, d)| (map[s], map[d])).collect();
        let got: BTreeSet<(usize, usize)> = rg.edges.iter().map(|e| (e.src, e.dst)).collect();
        assert_eq!(got, expected, "system {i}");
        assert_eq!(got.len(), rg.edge_count(), "parallel edges must be merged");
    }
}

#[test]
fn edge_guards_are_exact() {
    for sys in systems(25, 12) {
        let oracle = Oracle::new(&sys);
        let rg = build_rg_explicit(&sys).unwrap();
        let map = node_map(&oracle, &rg);
        for (n, row) in oracle.steps.iter().enumerate() {
            for (env, succ) in row {
                for &e in rg.out_edges(map[n]) {
                    let edge = &rg.edges[e];
                    let reached = succ.iter().any(|&d| map[d] == edge.dst);
                    assert_eq!(edge.guard.eval(env), reached);
                }
            }
        }
    }
}

#[test]
fn sequential_and_parallel_builds_are_identical() {
    for sys in systems(20, 13) {
        let a = build_rg_explicit_with(&sys, Exec::Sequential).unwrap();
        let b = build_rg_explicit_with(&sys, Exec::Parallel).unwrap();
        assert_eq!(a.dump(), b.dump());
    }
}

#[test]
fn next_queries_match_enumeration() {
    let mut rng = StdRng::seed_from_u64(21);
    let mut seen = [0usize; 3];
    for sys in systems(40, 14) {
        let oracle = Oracle::new(&sys);
        let rg = build_rg_explicit(&sys).unwrap();
        for _ in 0..10 {
            let q = random_query(&mut rng, &sys, QueryMode::Next);
            let split = cosma_core::mc::split_query(&rg, &q).unwrap();
            let v = check_query(&rg, &q).unwrap();
            let expect = oracle_verdict(&oracle, &q, &split.env_part, &split.state_part);
            assert_eq!((v.holds, v.vacuous), expect, "query {:?}\n{sys}", q);
            seen[usize::from(v.holds) + usize::from(v.vacuous)] += 1;
            if let Some(t) = &v.trace {
                assert!(split.state_part.eval(&rg.nodes[t.steps[0].node].outputs));
                assert!(replays(&sys, &rg, t));
            }
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "outcomes too uniform: {seen:?}");
}

#[test]
fn eventually_queries_match_bounded_paths() {
    let mut rng = StdRng::seed_from_u64(31);
    let mut checked = 0;
    let mut failing = 0;
    for sys in systems(200, 15) {
        let oracle = Oracle::new(&sys);
        if oracle.len() > 8 {
            continue;
        }
        let rg = build_rg_explicit(&sys).unwrap();
        for _ in 0..5 {
            let q = random_query(&mut rng, &sys, QueryMode::Eventually);
            let split = cosma_core::mc::split_query(&rg, &q).unwrap();
            let v = check_query(&rg, &q).unwrap();
            assert_eq!((v.holds, v.vacuous), oracle_verdict(&oracle, &q, &split.env_part, &split.state_part), "{q:?}\n{sys}");
            if let Some(t) = &v.trace {
                failing += 1;
                assert!(replays(&sys, &rg, t), "{q:?}\n{sys}");
                // after the first step the lasso never meets the consequent
                if t.steps.len() > 1 && t.loop_start.is_some() {
                    assert!(t.steps[1..].iter().all(|s| !q.consequent.eval(&rg.nodes[s.node].outputs)));
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 100 && failing > 0, "checked {checked}, failing {failing}");
}

fn random_ctl(rng: &mut StdRng, atoms: &[Symbol], depth: usize) -> Ctl {
    if depth == 0 || rng.gen_bool(0.25) {
        return if atoms.is_empty() || rng.gen_bool(0.1) { Ctl::Const(rng.gen()) } else { Ctl::Atom(atoms[rng.gen_range(0..atoms.len())]) };
    }
    let op = rng.gen_range(0..14);
    let mut sub = || Box::new(random_ctl(rng, atoms, depth - 1));
    match op {
        0 => Ctl::Not(sub()),
        1 => Ctl::And(sub(), sub()),
        2 => Ctl::Or(sub(), sub()),
        3 => Ctl::Implies(sub(), sub()),
        4 => Ctl::AX(sub()),
        5 => Ctl::EX(sub()),
        6 => Ctl::AF(sub()),
        7 => Ctl::EF(sub()),
        8 => Ctl::AG(sub()),
        9 => Ctl::EG(sub()),
        10 => Ctl::AU(sub(), sub()),
        11 => Ctl::EU(sub(), sub()),
        _ => Ctl::Not(sub()),
    }
}

#[test]
fn ctl_labelling_matches_direct_fixpoints() {
    let mut rng = StdRng::seed_from_u64(41);
    for sys in systems(40, 16) {
        let oracle = Oracle::new(&sys);
        let rg = build_rg_explicit(&sys).unwrap();
        let map = node_map(&oracle, &rg);
        let atoms: Vec<Symbol> = sys.produced().into_iter().collect();
        for _ in 0..10 {
            let f = random_ctl(&mut rng, &atoms, 4);
            let got = label(&rg, &f);
            let want = oracle.label(&f);
            for n in 0..oracle.len() {
                assert_eq!(got[map[n]], want[n], "{f:?}\n{sys}");
            }
            let v = check_ctl(&rg, "f", &f).unwrap();
            assert_eq!(v.holds, want[0]);
        }
    }
}

#[test]
fn ctl_dualities() {
    let mut rng = StdRng::seed_from_u64(51);
    let not = |f: Ctl| Ctl::Not(Box::new(f));
    for sys in systems(30, 17) {
        let rg = build_rg_explicit(&sys).unwrap();
        let atoms: Vec<Symbol> = sys.produced().into_iter().collect();
        for _ in 0..5 {
            let p = random_ctl(&mut rng, &atoms, 2);
            let b = || Box::new(p.clone());
            let nb = || Box::new(not(p.clone()));
            assert_eq!(label(&rg, &Ctl::AF(b())), label(&rg, &not(Ctl::EG(nb()))));
            assert_eq!(label(&rg, &Ctl::AX(b())), label(&rg, &not(Ctl::EX(nb()))));
            assert_eq!(label(&rg, &Ctl::AG(b())), label(&rg, &not(Ctl::EF(nb()))));
        }
    }
}

#[test]
fn failing_ag_traces_replay() {
    let mut rng = StdRng::seed_from_u64(61);
    let mut failures = 0;
    for sys in systems(40, 18) {
        let rg = build_rg_explicit(&sys).unwrap();
        let atoms: Vec<Symbol> = sys.produced().into_iter().collect();
        let f = Ctl::AG(Box::new(Ctl::from_expr_for_test(&random_guard(&mut rng, &atoms, 2))));
        let v = check_ctl(&rg, "ag", &f).unwrap();
        if let Some(t) = v.trace {
            failures += 1;
            assert!(replays(&sys, &rg, &t));
            assert_eq!(t.steps[0].node, 0);
        }
    }
    assert!(failures > 0);
}

trait FromExpr {
    fn from_expr_for_test(e: &BoolExpr) -> Ctl;
}

impl FromExpr for Ctl {
    fn from_expr_for_test(e: &BoolExpr) -> Ctl {
        match e {
            BoolExpr::Const(c) => Ctl::Const(*c),
            BoolExpr::Atom(s) => Ctl::Atom(*s),
            BoolExpr::Not(a) => Ctl::Not(Box::new(Self::from_expr_for_test(a))),
            BoolExpr::And(a, b) => Ctl::And(Box::new(Self::from_expr_for_test(a)), Box::new(Self::from_expr_for_test(b))),
            BoolExpr::Or(a, b) => Ctl::Or(Box::new(Self::from_expr_for_test(a)), Box::new(Self::from_expr_for_test(b))),
        }
    }
}
