//! Acceptance suite: one PASS/FAIL line per criterion. Criteria listed in
//! `EXPECTED_RED` are known to fail for reasons recorded in the decisions
//! ledger; the run fails if any other criterion fails or a listed one
//! starts passing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use fedcheck::eqsolve::{parse_system, solve, SolverConfig};
use fedcheck::explgen::{bounded_mass, ExplGrammar, FixKind, Goal};
use fedcheck::fed::{FedId, FedLimits, FedStore, Op};
use fedcheck::frontends::{
    parse_gpl_defs, parse_gpl_query, parse_pctl, GplChecker, GplQuery, PctlChecker, ReachProvider, RmcQuery,
};
use fedcheck::model::{parse_dtmc, parse_rmc, parse_rplts, Dtmc, Port, Rmc};
use fedcheck::symbol::Sym;
use fedcheck::{analyze, Analysis, EngineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bound 60 is too short for the leader-election and recursive-chain
/// grammars; see the ledger.
const EXPECTED_RED: &[usize] = &[3];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/models")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn read(name: &str) -> String {
    std::fs::read_to_string(models().join(name)).unwrap()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_json(args: &[&str]) -> Result<serde_json::Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fedcheck"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

const RUNNING_EXAMPLE_SYSTEM: &str = "\
# x0: reach(s0,s3)
# x1: reach(s1,s3)
# x2: reach(s3,s3)
# x3: reach(s4,s3)
x0 = 0.5*x0 + 0.3*x1
x1 = 0.4*x1 + 0.1*x2 + 0.5*x3
x2 = 1
x3 = 1*x2
";

fn motivating_example() -> Outcome {
    let t = Instant::now();
    let v = cli_json(&["--json", "--dump-eqns", "reach", &model("fig1.dtmc"), "s0", "s3"])?;
    let elapsed = t.elapsed().as_secs_f64();
    let p = v["probability"].as_f64().ok_or("no probability")?;
    check((p - 0.6).abs() < 1e-9, || format!("P = {p}"))?;
    let eqns = v["equations"].as_str().ok_or("no equations")?;
    check(eqns == RUNNING_EXAMPLE_SYSTEM, || format!("equations differ:\n{eqns}"))?;
    check(elapsed < 0.1, || format!("took {elapsed:.3} s"))?;
    Ok(format!("P = {p}, equations match, {elapsed:.4} s end to end"))
}

fn fed_goldens() -> Outcome {
    let dot_path = std::env::temp_dir().join(format!("fedcheck-acceptance-{}.dot", std::process::id()));
    cli_json(&[
        "--json",
        "--dump-feds",
        dot_path.to_str().unwrap(),
        "reach",
        &model("fig1.dtmc"),
        "s0",
        "s3",
    ])?;
    let dot = std::fs::read_to_string(&dot_path).map_err(|e| e.to_string())?;
    std::fs::remove_file(&dot_path).ok();
    check(dot == read("golden/fig1_reach.dot"), || {
        "DOT differs from golden".into()
    })?;
    let clusters: Vec<&str> = dot.split("subgraph ").skip(1).collect();
    let counts: Vec<String> = clusters
        .iter()
        .map(|c| {
            let label = c.lines().nth(1).unwrap_or("");
            label
                .trim()
                .trim_start_matches("label=\"")
                .trim_end_matches("\";")
                .to_string()
        })
        .collect();
    let want = [
        "expl(reach(s0,s3),H) nodes=5 edges=7",
        "expl(reach(s1,s3),H) nodes=6 edges=9",
        "expl(reach(s3,s3),H) nodes=1 edges=0",
        "expl(reach(s4,s3),H) nodes=4 edges=3",
    ];
    check(counts == want, || format!("clusters {counts:?}"))?;
    // reach(s3,s3) is the tt leaf alone
    let s3: Vec<&str> = clusters[2].lines().filter(|l| l.contains("[label=")).collect();
    check(s3.len() == 1 && s3[0].contains("label=\"tt\""), || {
        format!("reach(s3,s3): {s3:?}")
    })?;
    // reach(s0,s3) is rooted at msw(t(s0),H) and sends s2 to ff
    let c0 = clusters[0];
    let root = c0
        .lines()
        .find(|l| l.contains("label=\"t(s0)@H\""))
        .ok_or("no msw(t(s0),H) node")?
        .trim()
        .split(' ')
        .next()
        .unwrap();
    let has_parent = c0.lines().any(|l| l.contains(&format!("-> {root} ")));
    check(!has_parent, || "msw(t(s0),H) is not the root".into())?;
    let ff = c0
        .lines()
        .find(|l| l.contains("label=\"ff\""))
        .and_then(|l| l.trim().split(' ').next())
        .ok_or("no ff leaf")?;
    check(c0.contains(&format!("{root} -> {ff} [label=\"s2\"]")), || {
        "s2 does not lead to ff".into()
    })?;
    Ok(format!(
        "topology and node/edge counts match golden ({})",
        counts.join("; ")
    ))
}

/// Every least-fixpoint query over the bundled models.
fn bundled_queries() -> Vec<(String, Analysis)> {
    let cfg = EngineConfig::default();
    let mut out = Vec::new();
    let fig1 = Arc::new(parse_dtmc(&read("fig1.dtmc")).unwrap());
    for (from, to) in [("s0", "s3"), ("s0", "s2"), ("s1", "s3")] {
        let mut p = ReachProvider::new(fig1.clone());
        let g = p.goal(Sym::new(from), Sym::new(to)).unwrap();
        out.push((
            format!("fig1 reach({from},{to})"),
            analyze(ExplGrammar::new(p), &[g], Op::Or, &cfg).unwrap(),
        ));
    }
    let ky = Arc::new(parse_dtmc(&read("knuth_yao.dtmc")).unwrap());
    for k in 1..=6 {
        let mut c = PctlChecker::new(ky.clone(), cfg);
        let f = parse_pctl(&format!("pr(until(tt,prop(die_{k})),geq,0)")).unwrap();
        out.push((
            format!("knuth_yao die_{k}"),
            c.check(&f, Sym::new("s0")).unwrap().1.unwrap(),
        ));
    }
    let leader = Arc::new(parse_dtmc(&read("leader_N3K2.dtmc")).unwrap());
    let mut c = PctlChecker::new(leader, cfg);
    let f = parse_pctl("pr(until(tt,prop(elected)),geq,1)").unwrap();
    out.push((
        "leader elected".into(),
        c.check(&f, Sym::new("init")).unwrap().1.unwrap(),
    ));
    let gpl = GplChecker::new(
        Arc::new(parse_rplts(&read("gpl_demo.rplts")).unwrap()),
        Arc::new(parse_gpl_defs(&read("gpl_demo.gpl")).unwrap()),
        cfg,
    );
    for (q, s) in [("diam(a, sf(prop(p)))", "s"), ("form(eventually_never)", "w")] {
        let GplQuery::Path(pf) = parse_gpl_query(q).unwrap() else {
            unreachable!()
        };
        out.push((format!("gpl {q} at {s}"), gpl.analyze(&pf, Sym::new(s)).unwrap()));
    }
    let rmc = RmcQuery::new(Arc::new(parse_rmc(&read("fig5.rmc")).unwrap()), cfg).unwrap();
    for c in ["A", "B"] {
        for exit in 1..=2 {
            out.push((
                format!("fig5 {c} exit {exit}"),
                rmc.analyze(Sym::new(c), None, exit).unwrap(),
            ));
        }
    }
    out
}

fn oracle_convergence() -> Outcome {
    let mut misses = Vec::new();
    let mut n = 0;
    for (name, mut a) in bundled_queries() {
        let g = a.goals[0];
        if a.grammar.kind(g) != FixKind::Lfp {
            continue;
        }
        n += 1;
        let solved = a.probability;
        let mut last = 0.0;
        for bound in 1..=60 {
            let m = bounded_mass(&mut a.grammar, g, bound).map_err(|e| e.to_string())?;
            check(m >= last - 1e-15, || format!("{name}: not monotone at bound {bound}"))?;
            check(m <= solved + 1e-9, || format!("{name}: {m} exceeds solved {solved}"))?;
            last = m;
        }
        if solved - last > 1e-3 {
            misses.push(format!("{name} {last:.6} vs {solved:.6}"));
        }
    }
    if misses.is_empty() {
        Ok(format!("{n} grammars within 1e-3 at bound 60, all monotone"))
    } else {
        Err(format!("monotone everywhere; short at bound 60: {}", misses.join(", ")))
    }
}

fn random_dtmc(n: usize, rng: &mut ChaCha8Rng) -> Dtmc {
    let mut text = String::new();
    for i in 0..n {
        writeln!(text, "state s{i};").unwrap();
    }
    for i in 0..n {
        if rng.gen_bool(0.2) {
            continue;
        }
        let mut succ: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
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

fn path_order() -> Outcome {
    let mut checked = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Arc::new(random_dtmc(10, &mut rng));
        let from = Sym::new(&format!("s{}", rng.gen_range(0..10)));
        let targets: Vec<Sym> = (0..rng.gen_range(1..=3))
            .map(|_| Sym::new(&format!("s{}", rng.gen_range(0..10))))
            .collect();
        let mut p = ReachProvider::new(m);
        let goals: Vec<Goal> = targets.iter().map(|&t| p.goal(from, t).unwrap()).collect();
        let mut grammar = ExplGrammar::new(p);
        let mut store = FedStore::new(FedLimits::default());
        store.saturate(&mut grammar, &goals).map_err(|e| e.to_string())?;
        let roots: Vec<FedId> = goals.iter().map(|&g| store.goal_fed(g).unwrap()).collect();
        let mut combined = Vec::new();
        for (op, unit) in [(Op::Or, FedId::FF), (Op::And, FedId::TT)] {
            let mut r = unit;
            for &x in &roots {
                r = store.apply(op, r, x).map_err(|e| e.to_string())?;
            }
            store.saturate_root(&mut grammar, r).map_err(|e| e.to_string())?;
            combined.push(r);
        }
        for f in store.built().into_iter().map(|(_, f)| f).chain(combined) {
            store.check_path_order(f).map_err(|e| format!("seed {seed}: {e}"))?;
            checked += 1;
        }
    }
    Ok(format!(
        "100 seeds, {checked} diagrams, no repeated (r,h) and strictly increasing order"
    ))
}

fn gpl_dependence() -> Outcome {
    let c = GplChecker::new(
        Arc::new(parse_rplts(&read("gpl_demo.rplts")).unwrap()),
        Arc::new(parse_gpl_defs(&read("gpl_demo.gpl")).unwrap()),
        EngineConfig::default(),
    );
    let prob = |q: &str, s: &str| -> Result<f64, String> {
        let GplQuery::Path(pf) = parse_gpl_query(q).map_err(|e| e.to_string())? else {
            return Err(format!("{q} is not a fuzzy formula"));
        };
        c.analyze(&pf, Sym::new(s))
            .map(|a| a.probability)
            .map_err(|e| e.to_string())
    };
    let both = prob("and(diam(a, sf(prop(p))), diam(a, sf(prop(q))))", "s")?;
    check(both == 0.0, || format!("conjunction over one switch gave {both}"))?;
    let mut worst: f64 = 0.0;
    for f in [
        "diam(a, sf(prop(p)))",
        "or(diam(a, sf(prop(p))), diam(a, sf(prop(q))))",
        "form(always_p)",
    ] {
        for s in ["s", "w"] {
            let d = (prob(f, s)? - prob(&format!("and({f}, {f})"), s)?).abs();
            check(d < 1e-9, || {
                format!("P(F and F) differs from P(F) for {f} at {s} by {d}")
            })?;
            worst = worst.max(d);
        }
    }
    Ok(format!("P = {both}; max |P(F and F) - P(F)| = {worst:e}"))
}

/// Kleene iteration on the recursive chain's own termination system.
fn native_exits(rmc: &Rmc) -> HashMap<(Sym, Port, usize), f64> {
    let mut x: HashMap<(Sym, Port, usize), f64> = HashMap::new();
    let mut keys = Vec::new();
    for c in rmc.components() {
        let mut ports: Vec<Port> = c.nodes.iter().map(|&n| Port::Node(n)).collect();
        for b in &c.boxes {
            ports.push(Port::Call(b.name));
            let k = rmc.component(b.callee).unwrap().exits.len();
            ports.extend((1..=k).map(|j| Port::Ret(b.name, j)));
        }
        for p in ports {
            for i in 1..=c.exits.len() {
                keys.push((c.name, p, i));
                x.insert((c.name, p, i), 0.0);
            }
        }
    }
    for _ in 0..2_000_000 {
        let old = x.clone();
        let mut delta: f64 = 0.0;
        for &(cn, port, i) in &keys {
            let c = rmc.component(cn).unwrap();
            let v = match port {
                Port::Node(n) if c.exit_index(n).is_some() => f64::from(u8::from(c.exit_index(n) == Some(i))),
                Port::Call(b) => {
                    let callee = rmc.component(c.find_box(b).unwrap().callee).unwrap();
                    (1..=callee.exits.len())
                        .map(|j| old[&(callee.name, Port::Node(callee.entry), j)] * old[&(cn, Port::Ret(b, j), i)])
                        .sum()
                }
                src => c.trans.get(&src).map_or(0.0, |d| {
                    d.outcomes()
                        .iter()
                        .map(|&(t, p)| p * old[&(cn, Port::parse(t.as_str()).unwrap(), i)])
                        .sum()
                }),
            };
            delta = delta.max((v - old[&(cn, port, i)]).abs());
            x.insert((cn, port, i), v);
        }
        if delta < 1e-15 {
            break;
        }
    }
    x
}

fn rmc_termination() -> Outcome {
    let rmc = Arc::new(parse_rmc(&read("fig5.rmc")).unwrap());
    let native = native_exits(&rmc);
    let q = RmcQuery::new(rmc.clone(), EngineConfig::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for c in rmc.components() {
        let mut total = 0.0;
        for i in 1..=c.exits.len() {
            let p = q.analyze(c.name, None, i).map_err(|e| e.to_string())?.probability;
            let want = native[&(c.name, Port::Node(c.entry), i)];
            check((p - want).abs() < 1e-6, || {
                format!("{} exit {i}: {p} vs native {want}", c.name)
            })?;
            worst = worst.max((p - want).abs());
            total += p;
        }
        check(total <= 1.0 + 1e-9, || format!("{}: exits sum to {total}", c.name))?;
    }
    let sys = parse_system("x = 0.5*x*x + 0.5\n").map_err(|e| e.to_string())?;
    let sol = solve(&sys, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let x = sol.values[0];
    check((x - 1.0).abs() < 1e-6, || format!("x = .5x^2 + .5 gave {x}"))?;
    check(sol.iterations <= 1_000_000, || format!("{} iterations", sol.iterations))?;
    Ok(format!(
        "max deviation from native {worst:.1e}, exit sums <= 1, x = .5x^2 + .5 -> {x} in {} iterations",
        sol.iterations
    ))
}

fn pctl_desk_scale() -> Outcome {
    let ky = Arc::new(parse_dtmc(&read("knuth_yao.dtmc")).unwrap());
    let mut c = PctlChecker::new(ky, EngineConfig::default());
    let mut worst: f64 = 0.0;
    for k in 1..=6 {
        let f = parse_pctl(&format!("pr(until(tt,prop(die_{k})),geq,0)")).map_err(|e| e.to_string())?;
        let p = c
            .check(&f, Sym::new("s0"))
            .map_err(|e| e.to_string())?
            .1
            .unwrap()
            .probability;
        check((p - 1.0 / 6.0).abs() < 1e-9, || format!("die_{k}: {p}"))?;
        worst = worst.max((p - 1.0 / 6.0).abs());
    }
    let v = cli_json(&[
        "--json",
        "pctl",
        &model("leader_N3K2.dtmc"),
        "pr(until(tt,prop(elected)),geq,1)",
        "init",
    ])?;
    let p = v["probability"].as_f64().ok_or("no probability")?;
    check((p - 1.0).abs() < 1e-6, || format!("leader election: {p}"))?;
    check(v["holds"] == true, || "leader verdict false".into())?;
    Ok(format!("die faces within {worst:.1e} of 1/6; leader election P = {p}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("motivating example", motivating_example),
        ("FED goldens", fed_goldens),
        ("oracle convergence", oracle_convergence),
        ("path-order invariant", path_order),
        ("GPL dependence", gpl_dependence),
        ("RMC termination", rmc_termination),
        ("PCTL at desk scale", pctl_desk_scale),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        let red = EXPECTED_RED.contains(&n);
        match f() {
            Ok(detail) => {
                println!("criterion {n} ({name}): PASS - {detail}");
                if red {
                    unexpected.push(format!("criterion {n} passes but is listed as expected red"));
                }
            }
            Err(why) => {
                let tag = if red { " (expected, see ledger)" } else { "" };
                println!("criterion {n} ({name}): FAIL{tag} - {why}");
                if !red {
                    unexpected.push(format!("criterion {n} failed"));
                }
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}", unexpected.join("\n"));
        ExitCode::FAILURE
    }
}
