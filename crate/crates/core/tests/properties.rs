use std::fmt::Write as _;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fedcheck::explgen::{bounded_mass, ExplGrammar, Goal};
use fedcheck::fed::{FedId, FedLimits, FedStore, Op};
use fedcheck::frontends::ReachProvider;
use fedcheck::model::{parse_dtmc, Dtmc};
use fedcheck::symbol::Sym;
use fedcheck::{analyze, EngineConfig};

/// Random chain over `n` states: each non-absorbing state moves to one to
/// three successors with integer weights.
fn random_dtmc(n: usize, rng: &mut ChaCha8Rng) -> Dtmc {
    let mut text = String::new();
    for i in 0..n {
        writeln!(text, "state s{i};").unwrap();
    }
    for i in 0..n {
        if rng.gen_bool(0.2) {
            continue;
        }
        let k = rng.gen_range(1..=3);
        let mut succ: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        succ.sort();
        succ.dedup();
        let w: Vec<u32> = succ.iter().map(|_| rng.gen_range(1..=4)).collect();
        let total: u32 = w.iter().sum();
        let outs: Vec<String> = succ
            .iter()
            .zip(&w)
            .map(|(s, &x)| format!("s{s} {}", f64::from(x) / f64::from(total)))
            .collect();
        writeln!(text, "trans s{i}: {};", outs.join(", ")).unwrap();
    }
    parse_dtmc(&text).unwrap()
}

fn sym(i: usize) -> Sym {
    Sym::new(&format!("s{i}"))
}

/// Probability of ever entering `targets`, by Gaussian elimination.
fn linear_reach(m: &Dtmc, targets: &[usize]) -> Vec<f64> {
    let n = m.len();
    let can = m.can_reach(targets);
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        a[i][i] = 1.0;
        if targets.contains(&i) {
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

struct Built {
    grammar: ExplGrammar,
    store: FedStore,
    roots: Vec<FedId>,
}

fn build(m: &Arc<Dtmc>, from: usize, targets: &[usize]) -> Built {
    let mut p = ReachProvider::new(m.clone());
    let goals: Vec<Goal> = targets.iter().map(|&t| p.goal(sym(from), sym(t)).unwrap()).collect();
    let mut grammar = ExplGrammar::new(p);
    let mut store = FedStore::new(FedLimits::default());
    store.saturate(&mut grammar, &goals).unwrap();
    let roots = goals.iter().map(|&g| store.goal_fed(g).unwrap()).collect();
    Built { grammar, store, roots }
}

#[test]
fn path_order_holds_on_random_chains() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_dtmc(10, &mut rng));
        let from = rng.gen_range(0..10);
        let targets: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..10)).collect();
        let mut b = build(&m, from, &targets);
        let mut combined = Vec::new();
        for op in [Op::Or, Op::And] {
            let mut r = match op {
                Op::Or => FedId::FF,
                Op::And => FedId::TT,
            };
            for &x in &b.roots {
                r = b.store.apply(op, r, x).unwrap();
            }
            b.store.saturate_root(&mut b.grammar, r).unwrap();
            combined.push(r);
        }
        let all: Vec<FedId> = b.store.built().into_iter().map(|(_, f)| f).chain(combined).collect();
        for f in all {
            if let Err(e) = b.store.check_path_order(f) {
                panic!("seed {seed}: {e}");
            }
        }
    }
}

#[test]
fn union_of_targets_matches_linear_oracle_on_random_chains() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let m = Arc::new(random_dtmc(10, &mut rng));
        let from = rng.gen_range(0..10);
        let mut targets: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..10)).collect();
        targets.sort();
        targets.dedup();
        let mut p = ReachProvider::new(m.clone());
        let goals: Vec<Goal> = targets.iter().map(|&t| p.goal(sym(from), sym(t)).unwrap()).collect();
        let got = analyze(ExplGrammar::new(p), &goals, Op::Or, &EngineConfig::default())
            .unwrap()
            .probability;
        let want = linear_reach(&m, &targets)[from];
        assert!((got - want).abs() < 1e-8, "seed {seed}: {got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn repeated_operand_leaves_probability_unchanged(seed in any::<u64>(), from in 0usize..8, t1 in 0usize..8, t2 in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_dtmc(8, &mut rng));
        for op in [Op::Or, Op::And] {
            let mut p = ReachProvider::new(m.clone());
            let g1 = p.goal(sym(from), sym(t1)).unwrap();
            let g2 = p.goal(sym(from), sym(t2)).unwrap();
            let once = analyze(ExplGrammar::new(p), &[g1, g2], op, &EngineConfig::default()).unwrap().probability;
            let mut p = ReachProvider::new(m.clone());
            let g1 = p.goal(sym(from), sym(t1)).unwrap();
            let g2 = p.goal(sym(from), sym(t2)).unwrap();
            let twice = analyze(ExplGrammar::new(p), &[g1, g2, g2, g1], op, &EngineConfig::default()).unwrap().probability;
            prop_assert!((once - twice).abs() < 1e-9, "{:?}: {} vs {}", op, once, twice);
        }
    }

    #[test]
    fn bounded_mass_is_monotone_and_below_solution(seed in any::<u64>(), from in 0usize..8, to in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_dtmc(8, &mut rng));
        let mut p = ReachProvider::new(m.clone());
        let g = p.goal(sym(from), sym(to)).unwrap();
        let mut grammar = ExplGrammar::new(p);
        let solved = linear_reach(&m, &[to])[from];
        let mut last = 0.0;
        for n in [1, 2, 5, 10, 20, 40, 60] {
            let mass = bounded_mass(&mut grammar, g, n).unwrap();
            prop_assert!(mass >= last - 1e-15, "bound {}: {} < {}", n, mass, last);
            prop_assert!(mass <= solved + 1e-9, "bound {}: {} > {}", n, mass, solved);
            last = mass;
        }
    }

    #[test]
    fn apply_commutes_and_is_idempotent(seed in any::<u64>(), from in 0usize..8, t1 in 0usize..8, t2 in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_dtmc(8, &mut rng));
        let mut b = build(&m, from, &[t1, t2]);
        let (x, y) = (b.roots[0], b.roots[1]);
        for op in [Op::Or, Op::And] {
            let xy = b.store.apply(op, x, y).unwrap();
            let yx = b.store.apply(op, y, x).unwrap();
            prop_assert_eq!(xy, yx);
            prop_assert_eq!(b.store.apply(op, x, x).unwrap(), x);
            prop_assert_eq!(b.store.apply(op, xy, xy).unwrap(), xy);
        }
    }
}
