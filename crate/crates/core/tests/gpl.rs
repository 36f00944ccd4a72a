use std::sync::Arc;

use fedcheck::explgen::enumerate_explanations;
use fedcheck::frontends::{parse_gpl_defs, parse_gpl_query, GplChecker, GplDefs, GplQuery};
use fedcheck::model::parse_rplts;
use fedcheck::symbol::Sym;
use fedcheck::{EngineConfig, Error};

const DEMO: &str = include_str!("../models/gpl_demo.rplts");
const DEFS: &str = include_str!("../models/gpl_demo.gpl");

fn checker(model: &str, defs: &str) -> GplChecker {
    GplChecker::new(
        Arc::new(parse_rplts(model).unwrap()),
        Arc::new(parse_gpl_defs(defs).unwrap()),
        EngineConfig::default(),
    )
}

fn prob(c: &GplChecker, q: &str, state: &str) -> f64 {
    let GplQuery::Path(pf) = parse_gpl_query(q).unwrap() else {
        panic!("not a fuzzy formula")
    };
    c.analyze(&pf, Sym::new(state)).unwrap().probability
}

#[test]
fn conjunction_over_one_switch_is_empty() {
    let c = checker(DEMO, DEFS);
    let p = prob(&c, "and(diam(a, sf(prop(p))), diam(a, sf(prop(q))))", "s");
    assert_eq!(p, 0.0);
    let either = prob(&c, "or(diam(a, sf(prop(p))), diam(a, sf(prop(q))))", "s");
    assert!((either - 1.0).abs() < 1e-12, "{either}");
}

#[test]
fn conjunction_is_idempotent() {
    let c = checker(DEMO, DEFS);
    for f in [
        "diam(a, sf(prop(p)))",
        "or(diam(a, sf(prop(p))), diam(a, sf(prop(q))))",
        "form(always_p)",
    ] {
        for s in ["s", "w"] {
            let single = prob(&c, f, s);
            let twice = prob(&c, &format!("and({f}, {f})"), s);
            assert!((single - twice).abs() < 1e-9, "{f} at {s}: {single} vs {twice}");
        }
    }
}

#[test]
fn true_formula() {
    let c = checker(DEMO, DEFS);
    assert_eq!(prob(&c, "tt", "s"), 1.0);
    assert_eq!(prob(&c, "ff", "s"), 0.0);
}

#[test]
fn fixpoint_duality_on_a_loop() {
    let c = checker(DEMO, DEFS);
    assert_eq!(prob(&c, "form(always_p)", "w"), 1.0);
    assert_eq!(prob(&c, "form(eventually_never)", "w"), 0.0);
}

#[test]
fn box_without_action_holds() {
    let c = checker(DEMO, DEFS);
    assert_eq!(prob(&c, "box(zz, ff)", "s"), 1.0);
    assert_eq!(prob(&c, "diam(zz, tt)", "s"), 0.0);
    assert!((prob(&c, "box(a, sf(prop(p)))", "s") - 0.5).abs() < 1e-12);
}

#[test]
fn pr_queries_and_nested_pr() {
    let c = checker(DEMO, DEFS);
    let q = parse_gpl_query("pr(diam(a, sf(prop(p))), geq, 0.5)").unwrap();
    let (verdict, a) = c.check(&q, Sym::new("s")).unwrap();
    assert_eq!(verdict, Some(true));
    assert!((a.probability - 0.5).abs() < 1e-12);
    let nested = "diam(a, sf(or(prop(q), pr(form(always_p), geq, 1))))";
    assert!((prob(&c, nested, "s") - 0.5).abs() < 1e-12);
}

#[test]
fn stratified_gfp_over_lfp() {
    // u reaches goal with probability 1/2 per attempt; v keeps looping on l
    // while the inner least fixpoint holds with probability one
    let model = "\
state u; state g label goal; state d;
state v;
trans u a: g 0.5, u 0.5;
trans v l: v 1;
trans v k: u 1;
";
    let defs = "\
def(reach_goal, lfp(or(sf(prop(goal)), diam(a, form(reach_goal))))).
def(loop_while, gfp(and(diam(l, form(loop_while)), diam(k, form(reach_goal))))).
";
    let c = checker(model, defs);
    assert!((prob(&c, "form(reach_goal)", "u") - 1.0).abs() < 1e-9);
    assert!((prob(&c, "form(loop_while)", "v") - 1.0).abs() < 1e-9);
}

#[test]
fn alternation_is_rejected() {
    let err = parse_gpl_defs("def(x, lfp(diam(a, form(y)))).\ndef(y, gfp(diam(a, form(x)))).").unwrap_err();
    assert!(matches!(err, Error::Alternation(_)), "{err}");
    let err = parse_gpl_defs("def(x, lfp(diam(a, form(z)))).").unwrap_err();
    assert!(err.to_string().contains("no definition"), "{err}");
}

#[test]
fn defs_round_trip() {
    let d = parse_gpl_defs(DEFS).unwrap();
    let again: GplDefs = parse_gpl_defs(&d.to_string()).unwrap();
    assert_eq!(d, again);
}

#[test]
fn unguarded_recursion_is_reported() {
    let c = checker(DEMO, "def(x, lfp(or(form(x), tt))).");
    let GplQuery::Path(pf) = parse_gpl_query("form(x)").unwrap() else {
        panic!()
    };
    match c.analyze(&pf, Sym::new("s")) {
        Err(Error::FactoringDiverged(_)) => {}
        Err(e) => panic!("{e}"),
        Ok(a) => panic!("unexpected value {}", a.probability),
    }
}

#[test]
fn enumeration_agrees_on_shared_switch() {
    let c = checker(DEMO, DEFS);
    let GplQuery::Path(pf) = parse_gpl_query("or(diam(a, sf(prop(p))), diam(a, sf(prop(q))))").unwrap() else {
        panic!()
    };
    let mut a = c.analyze(&pf, Sym::new("s")).unwrap();
    let start = a.grammar.goals()[0];
    let e = enumerate_explanations(&mut a.grammar, start, 10).unwrap();
    assert_eq!(e.explanations.len(), 2);
    assert!((e.total_probability() - a.probability).abs() < 1e-12);
}
