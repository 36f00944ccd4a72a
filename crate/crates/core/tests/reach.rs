use std::sync::Arc;

use fedcheck::explgen::{enumerate_explanations, ExplGrammar};
use fedcheck::fed::Op;
use fedcheck::frontends::ReachProvider;
use fedcheck::model::parse_dtmc;
use fedcheck::symbol::Sym;
use fedcheck::{analyze, EngineConfig};

const FIG1: &str = include_str!("../models/fig1.dtmc");

fn reach(from: &str, to: &[&str], op: Op) -> fedcheck::Analysis {
    let dtmc = Arc::new(parse_dtmc(FIG1).unwrap());
    let mut p = ReachProvider::new(dtmc);
    let goals: Vec<_> = to
        .iter()
        .map(|t| p.goal(Sym::new(from), Sym::new(t)).unwrap())
        .collect();
    analyze(ExplGrammar::new(p), &goals, op, &EngineConfig::default()).unwrap()
}

#[test]
fn running_example_values() {
    let a = reach("s0", &["s3"], Op::Or);
    assert!((a.probability - 0.6).abs() < 1e-9, "{}", a.probability);
    assert!((reach("s3", &["s3"], Op::Or).probability - 1.0).abs() < 1e-12);
    assert!((reach("s0", &["s2"], Op::Or).probability - 0.4).abs() < 1e-9);
    assert_eq!(reach("s2", &["s3"], Op::Or).probability, 0.0);
}

#[test]
fn running_example_equations() {
    let a = reach("s0", &["s3"], Op::Or);
    let text = a.equations_text();
    let expected = "\
# x0: reach(s0,s3)
# x1: reach(s1,s3)
# x2: reach(s3,s3)
# x3: reach(s4,s3)
x0 = 0.5*x0 + 0.3*x1
x1 = 0.4*x1 + 0.1*x2 + 0.5*x3
x2 = 1
x3 = 1*x2
";
    assert_eq!(text, expected);
    assert_eq!(a.grammar.production_count(), 7);
}

#[test]
fn union_of_targets_uses_event_inclusion() {
    let a = reach("s0", &["s3", "s4"], Op::Or);
    assert!((a.probability - 0.6).abs() < 1e-9, "{}", a.probability);
}

#[test]
fn enumeration_finds_first_explanation() {
    let dtmc = Arc::new(parse_dtmc(FIG1).unwrap());
    let mut p = ReachProvider::new(dtmc);
    let g = p.goal(Sym::new("s0"), Sym::new("s3")).unwrap();
    let mut grammar = ExplGrammar::new(p);
    let e = enumerate_explanations(&mut grammar, g, 3).unwrap();
    assert!(e
        .explanations
        .iter()
        .any(|x| x.atoms.len() == 2 && (x.prob - 0.03).abs() < 1e-12));
    let total = enumerate_explanations(&mut grammar, g, 40).unwrap().total_probability();
    assert!((0.599..=0.6).contains(&total), "{total}");
}
