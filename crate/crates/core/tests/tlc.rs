use std::collections::BTreeSet;

use cosma_core::assets::{TLC_CAR_CSM, TLC_CSM, TLC_QUERIES};
use cosma_core::mc::check_suite;
use cosma_core::reach::ReachGraph;
use cosma_core::{
    build_rg_explicit, build_rg_symbolic, check_ctl, check_query, parse_queries, parse_system, Ctl, QueryItem, System,
    Trace,
};

fn load(text: &str) -> System {
    parse_system(text, "tlc.csm").expect("asset parses").system
}

fn queries(sys: &System) -> Vec<QueryItem> {
    parse_queries(TLC_QUERIES, "tlc_queries.tq", Some(&sys.symbols)).unwrap().items
}

/// Steps the system along the trace and checks each recorded node is a
/// successor of the previous one under the recorded environment.
fn replays(sys: &System, rg: &ReachGraph, trace: &Trace) -> bool {
    let mut pairs: Vec<(usize, usize)> = trace.steps.windows(2).enumerate().map(|(i, w)| (i, w[1].node)).collect();
    if let Some(l) = trace.loop_start {
        pairs.push((trace.steps.len() - 1, trace.steps[l].node));
    }
    pairs.into_iter().all(|(i, next)| {
        let env: BTreeSet<_> = trace.steps[i].env.iter().map(|n| sys.symbols.lookup(n).unwrap()).collect();
        sys.successors(&rg.nodes[trace.steps[i].node].state, &env).contains(&rg.nodes[next].state)
    })
}

#[test]
fn tlc_structure() {
    let sys = load(TLC_CSM);
    let sizes: Vec<usize> = sys.machines.iter().map(|m| m.states().len()).collect();
    assert_eq!(sizes, [4, 3, 3]);
    assert_eq!(sys.product_size(), 36);
    let env: Vec<&str> = sys.env_alphabet().iter().map(|&s| sys.symbols.name(s)).collect();
    assert_eq!(env, ["Car", "tauTS", "tauTL"]);
    let init: Vec<&str> = sys.output_valuation(&sys.initial_state()).iter().map(|&s| sys.symbols.name(s)).collect();
    assert_eq!(init, ["HG", "FR", "StartTL"]);
}

#[test]
fn tlc_has_thirteen_reachable_states() {
    let sys = load(TLC_CSM);
    let rg = build_rg_explicit(&sys).unwrap();
    assert_eq!(rg.node_count(), 13);
    let sym = build_rg_symbolic(&sys).unwrap();
    assert_eq!(sym.reachable_count, 13);
    let explicit: BTreeSet<_> = rg.nodes.iter().map(|n| n.state.clone()).collect();
    let symbolic: BTreeSet<_> = sym.reachable_states().into_iter().collect();
    assert_eq!(explicit, symbolic);
    assert_eq!(rg.to_dot().lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 13);
}

#[test]
fn tlc_car_engines_agree() {
    let sys = load(TLC_CAR_CSM);
    let env: Vec<&str> = sys.env_alphabet().iter().map(|&s| sys.symbols.name(s)).collect();
    assert_eq!(env, ["tauTS", "tauTL", "carOn"]);
    let rg = build_rg_explicit(&sys).unwrap();
    assert_eq!(build_rg_symbolic(&sys).unwrap().reachable_count, rg.node_count() as u128);
    assert_eq!(rg.node_count(), 15);
}

#[test]
fn bundled_suite_holds_on_both_variants() {
    // With CAR, Car never drops once raised and sFG is only entered after
    // it, so the `FG * !Car` queries have no matching state.
    for (text, vacuous) in [(TLC_CSM, vec![]), (TLC_CAR_CSM, vec!["q3", "q7"])] {
        let sys = load(text);
        let rg = build_rg_explicit(&sys).unwrap();
        let report = check_suite(&rg, &queries(&sys)).unwrap();
        assert_eq!(report.entries.len(), 10);
        assert!(report.all_hold(), "{}", report.render());
        let got: Vec<&str> = report.entries.iter().filter(|e| e.verdict.vacuous).map(|e| e.name.as_str()).collect();
        assert_eq!(got, vacuous, "{}", report.render());
    }
}

#[test]
fn exists_eventually_agrees_with_eventually_on_tlc() {
    let sys = load(TLC_CSM);
    let rg = build_rg_explicit(&sys).unwrap();
    let weak = TLC_QUERIES.replace("=> eventually", "=> exists eventually");
    let items = parse_queries(&weak, "weak.tq", Some(&sys.symbols)).unwrap().items;
    assert!(check_suite(&rg, &items).unwrap().all_hold());
}

#[test]
fn hg_next_fg_fails_by_staying() {
    let sys = load(TLC_CSM);
    let rg = build_rg_explicit(&sys).unwrap();
    let items = parse_queries("bad: always (HG => next FG);", "q.tq", Some(&sys.symbols)).unwrap().items;
    let QueryItem::Implication(q) = &items[0] else { unreachable!() };
    let v = check_query(&rg, q).unwrap();
    assert!(!v.holds);
    let t = v.trace.unwrap();
    assert_eq!(t.steps.len(), 2);
    assert!(t.steps[0].outputs.contains(&"HG".to_owned()));
    assert!(t.steps[1].outputs.contains(&"HG".to_owned()));
    assert!(replays(&sys, &rg, &t));
}

#[test]
fn deleting_hy_to_fg_breaks_q2_and_q6() {
    let mutated = TLC_CSM.replacen("-> sFG when TimTS;", "", 1);
    let sys = load(&mutated);
    let rg = build_rg_explicit(&sys).unwrap();
    let report = check_suite(&rg, &queries(&sys)).unwrap();
    let failed: Vec<&str> = report.entries.iter().filter(|e| !e.verdict.holds).map(|e| e.name.as_str()).collect();
    assert!(failed.contains(&"q2") && failed.contains(&"q6"), "{failed:?}");
    for e in report.entries.iter().filter(|e| !e.verdict.holds) {
        let t = e.verdict.trace.as_ref().unwrap();
        assert!(replays(&sys, &rg, t), "{} trace does not replay", e.name);
    }
    let q6 = report.entries.iter().find(|e| e.name == "q6").unwrap();
    assert!(q6.verdict.trace.as_ref().unwrap().loop_start.is_some());
}

#[test]
fn q1_edge_conditioning_matches_car_machine() {
    let verdict = |text: &str| {
        let sys = load(text);
        let rg = build_rg_explicit(&sys).unwrap();
        let items = queries(&sys);
        let QueryItem::Implication(q) = &items[0] else { unreachable!() };
        check_query(&rg, q).unwrap()
    };
    let plain = verdict(TLC_CSM);
    let car = verdict(TLC_CAR_CSM);
    assert!(plain.holds && car.holds);
    assert_eq!(plain.vacuous, car.vacuous);
}

#[test]
fn some_highway_light_is_always_on() {
    let sys = load(TLC_CSM);
    let rg = build_rg_explicit(&sys).unwrap();
    let a = |n: &str| Ctl::Atom(sys.symbols.lookup(n).unwrap());
    let f = Ctl::AG(Box::new(Ctl::Or(Box::new(Ctl::Or(Box::new(a("HG")), Box::new(a("HY")))), Box::new(a("HR")))));
    assert!(check_ctl(&rg, "hw", &f).unwrap().holds);
    let never_fg = Ctl::AG(Box::new(Ctl::Not(Box::new(a("FG")))));
    let v = check_ctl(&rg, "no_fg", &never_fg).unwrap();
    assert!(!v.holds);
    let t = v.trace.unwrap();
    assert!(t.steps.last().unwrap().outputs.contains(&"FG".to_owned()));
    assert!(replays(&sys, &rg, &t));
}
