use std::sync::Arc;

use fedcheck::explgen::{bounded_mass, enumerate_explanations, ExplGrammar};
use fedcheck::fed::Op;
use fedcheck::frontends::{parse_pctl, PctlChecker, ReachProvider, RmcQuery};
use fedcheck::model::{parse_dtmc, parse_rmc};
use fedcheck::simulate::{simulate_reach, simulate_rmc_exit, simulate_until, SimConfig};
use fedcheck::symbol::Sym;
use fedcheck::{analyze, EngineConfig};

const FIG1: &str = include_str!("../models/fig1.dtmc");
const KY: &str = include_str!("../models/knuth_yao.dtmc");
const LEADER: &str = include_str!("../models/leader_N3K2.dtmc");
const FIG5: &str = include_str!("../models/fig5.rmc");

fn reach_grammar(text: &str, from: &str, to: &str) -> (ExplGrammar, fedcheck::explgen::Goal) {
    let mut p = ReachProvider::new(Arc::new(parse_dtmc(text).unwrap()));
    let g = p.goal(Sym::new(from), Sym::new(to)).unwrap();
    (ExplGrammar::new(p), g)
}

#[test]
fn dynamic_mass_equals_enumerated_mass_at_small_bounds() {
    for (text, from, to) in [(FIG1, "s0", "s3"), (KY, "s0", "d3"), (LEADER, "init", "elected")] {
        for n in 1..=12 {
            let (mut g, goal) = reach_grammar(text, from, to);
            let e = enumerate_explanations(&mut g, goal, n).unwrap();
            let m = bounded_mass(&mut g, goal, n).unwrap();
            assert!(
                (e.total_probability() - m).abs() < 1e-12,
                "{from}->{to} at {n}: {} vs {m}",
                e.total_probability()
            );
        }
    }
}

#[test]
fn reach_agrees_with_simulation() {
    let cfg = SimConfig {
        runs: 50_000,
        seed: 11,
        ..SimConfig::default()
    };
    for (text, from, to) in [(FIG1, "s0", "s3"), (FIG1, "s0", "s2"), (KY, "s0", "d5")] {
        let (g, goal) = reach_grammar(text, from, to);
        let p = analyze(g, &[goal], Op::Or, &EngineConfig::default())
            .unwrap()
            .probability;
        let m = parse_dtmc(text).unwrap();
        let e = simulate_reach(&m, Sym::new(from), &[Sym::new(to)], &cfg).unwrap();
        assert!((p - e.value).abs() < e.tolerance(), "{from}->{to}: {p} vs {e:?}");
    }
}

#[test]
fn leader_election_agrees_with_simulation() {
    let m = Arc::new(parse_dtmc(LEADER).unwrap());
    let mut c = PctlChecker::new(m.clone(), EngineConfig::default());
    let f = parse_pctl("pr(until(tt,prop(elected)),geq,1)").unwrap();
    let (_, a) = c.check(&f, Sym::new("init")).unwrap();
    let right: Vec<bool> = m
        .states()
        .iter()
        .map(|&s| m.has_label(s, Sym::new("elected")))
        .collect();
    let cfg = SimConfig {
        runs: 20_000,
        seed: 3,
        ..SimConfig::default()
    };
    let e = simulate_until(&m, None, &right, Sym::new("init"), &cfg).unwrap();
    assert!((a.unwrap().probability - e.value).abs() < e.tolerance(), "{e:?}");
}

#[test]
fn rmc_exits_agree_with_simulation() {
    let rmc = Arc::new(parse_rmc(FIG5).unwrap());
    let q = RmcQuery::new(rmc.clone(), EngineConfig::default()).unwrap();
    let cfg = SimConfig {
        runs: 50_000,
        seed: 5,
        ..SimConfig::default()
    };
    for c in ["A", "B"] {
        for exit in 1..=2 {
            let p = q.analyze(Sym::new(c), None, exit).unwrap().probability;
            let e = simulate_rmc_exit(&rmc, Sym::new(c), None, exit, &cfg).unwrap();
            assert!((p - e.value).abs() < e.tolerance(), "{c} exit {exit}: {p} vs {e:?}");
        }
    }
}
