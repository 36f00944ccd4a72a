use std::sync::Arc;

use fedcheck::frontends::{parse_pctl, PctlChecker};
use fedcheck::model::{parse_dtmc, Dtmc};
use fedcheck::symbol::Sym;
use fedcheck::EngineConfig;

fn checker(text: &str) -> (Arc<Dtmc>, PctlChecker) {
    let m = Arc::new(parse_dtmc(text).unwrap());
    (m.clone(), PctlChecker::new(m, EngineConfig::default()))
}

const FIG1: &str = include_str!("../models/fig1.dtmc");
const KY: &str = include_str!("../models/knuth_yao.dtmc");
const LEADER: &str = include_str!("../models/leader_N3K2.dtmc");

/// Independent oracle: Gaussian elimination on the reachability system
/// restricted to states that can reach the target.
fn linear_reach(m: &Dtmc, target: &[usize]) -> Vec<f64> {
    let n = m.len();
    let can = m.can_reach(target);
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        a[i][i] = 1.0;
        if target.contains(&i) {
            a[i][n] = 1.0;
        } else if can[i] {
            for &(u, p) in m.switch_at(i).map(|d| d.outcomes()).unwrap_or(&[]) {
                a[i][m.index_of(u).unwrap()] -= p;
            }
        }
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        let d = a[c][c];
        for k in c..=n {
            a[c][k] /= d;
        }
        for r in 0..n {
            if r != c && a[r][c] != 0.0 {
                let f = a[r][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}

#[test]
fn until_on_running_example() {
    let (_, mut c) = checker(FIG1);
    let f = parse_pctl("pr(until(tt, prop(at_s3)), geq, 0.6)").unwrap();
    let (holds, a) = c.check(&f, Sym::new("s0")).unwrap();
    let a = a.unwrap();
    assert!((a.probability - 0.6).abs() < 1e-9);
    assert_eq!(holds, a.probability >= 0.6);
    assert!(a.assembly.system.is_linear());
}

#[test]
fn next_reads_off_one_step() {
    let (_, mut c) = checker(FIG1);
    let f = parse_pctl("pr(next(prop(b)), geq, 0.3)").unwrap();
    let (holds, a) = c.check(&f, Sym::new("s0")).unwrap();
    assert!(holds);
    assert!((a.unwrap().probability - 0.3).abs() < 1e-12);
    let g = parse_pctl("pr(next(prop(b)), gt, 0.5)").unwrap();
    assert!(!c.check(&g, Sym::new("s0")).unwrap().0);
}

#[test]
fn negation_at_unlabeled_state() {
    let (_, mut c) = checker(FIG1);
    assert!(c.holds(&parse_pctl("neg(prop(b))").unwrap(), Sym::new("s0")).unwrap());
    assert!(!c.holds(&parse_pctl("neg(prop(b))").unwrap(), Sym::new("s1")).unwrap());
}

#[test]
fn nested_probability_operator() {
    let (_, mut c) = checker(FIG1);
    // states from which s3 is reached with probability above 0.6: s1, s3, s4
    let f = parse_pctl("pr(until(tt, pr(until(tt, prop(at_s3)), gt, 0.6)), geq, 0)").unwrap();
    let (_, a) = c.check(&f, Sym::new("s0")).unwrap();
    // reaching {s1,s3,s4} from s0: x = .5x + .3
    assert!((a.unwrap().probability - 0.6).abs() < 1e-9);
}

#[test]
fn unknown_proposition_is_rejected() {
    let (_, mut c) = checker(FIG1);
    let f = parse_pctl("pr(until(tt, prop(nowhere)), geq, 0.5)").unwrap();
    assert!(c.check(&f, Sym::new("s0")).is_err());
}

#[test]
fn knuth_yao_faces() {
    let (m, mut c) = checker(KY);
    for k in 1..=6 {
        let f = parse_pctl(&format!("pr(until(tt, prop(die_{k})), geq, 1/6)")).unwrap();
        let (_, a) = c.check(&f, Sym::new("s0")).unwrap();
        let p = a.unwrap().probability;
        let target = m.index_of(Sym::new(&format!("d{k}"))).unwrap();
        let oracle = linear_reach(&m, &[target])[0];
        assert!((oracle - 1.0 / 6.0).abs() < 1e-12);
        assert!((p - 1.0 / 6.0).abs() < 1e-9, "face {k}: {p}");
    }
}

#[test]
fn leader_elected_with_probability_one() {
    let (m, mut c) = checker(LEADER);
    let f = parse_pctl("pr(until(tt, prop(elected)), geq, 1)").unwrap();
    let (holds, a) = c.check(&f, Sym::new("init")).unwrap();
    let p = a.unwrap().probability;
    assert!((p - 1.0).abs() < 1e-6, "{p}");
    let oracle = linear_reach(&m, &[m.index_of(Sym::new("elected")).unwrap()]);
    assert!((oracle[0] - 1.0).abs() < 1e-12);
    assert_eq!(holds, p >= 1.0);
}

#[test]
fn formula_spelling_round_trips() {
    for text in ["pr(until(tt,prop(a)),gt,0.5)", "and(neg(prop(a)),pr(next(ff),geq,0))"] {
        assert_eq!(parse_pctl(text).unwrap().to_string(), text);
    }
    assert!(parse_pctl("pr(until(tt,prop(a)),lt,0.5)").is_err());
    assert!(parse_pctl("pr(until(tt,prop(a)),gt,1.5)").is_err());
}
