mod bench;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fedcheck::eqsolve::{parse_system, solve, Method, SolverConfig};
use fedcheck::explgen::{bounded_mass, ExplGrammar, FixKind};
use fedcheck::fed::{FedLimits, Op};
use fedcheck::frontends::{
    parse_gpl_defs, parse_gpl_query, parse_pctl, GplChecker, PathFormula, PctlChecker, ReachProvider, RmcQuery,
    StateFormula,
};
use fedcheck::model::{parse_dtmc, parse_rmc, parse_rplts};
use fedcheck::simulate::{simulate_next, simulate_reach, simulate_rmc_exit, simulate_until, Estimate, SimConfig};
use fedcheck::symbol::Sym;
use fedcheck::{analyze, Analysis, EngineConfig};

use report::{variables, OracleValue, Report};

#[derive(Parser, Debug)]
#[command(
    name = "fedcheck",
    version,
    about = "Probabilistic model checking with factored explanation diagrams"
)]
struct Cli {
    /// Solver stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive_f64)]
    epsilon: f64,
    /// Iteration cap per strongly connected component.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = positive_usize)]
    max_iters: usize,
    /// Cap on distinct merge placeholders.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = positive_usize)]
    merge_cap: usize,
    /// Solution method.
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Newton)]
    method: MethodArg,
    /// Print the explanation-generator grammar.
    #[arg(long, global = true)]
    dump_grammar: bool,
    /// Write the diagrams as DOT to this file.
    #[arg(long, global = true, value_name = "DOT_PATH")]
    dump_feds: Option<PathBuf>,
    /// Print the equation system.
    #[arg(long, global = true)]
    dump_eqns: bool,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Cross-check with the enumeration and Monte Carlo oracles.
    #[arg(long, global = true)]
    oracle: bool,
    /// Derivation-length bound for the enumeration oracle.
    #[arg(long, global = true, default_value_t = 60)]
    oracle_bound: usize,
    /// Runs for the Monte Carlo oracle.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = positive_usize)]
    runs: usize,
    /// Seed for the Monte Carlo oracle.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Newton,
    Kleene,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Probability of reaching a target state of a DTMC.
    Reach {
        model: PathBuf,
        from: String,
        to: String,
        /// Further targets; the query is their disjunction.
        #[arg(long)]
        also: Vec<String>,
    },
    /// PCTL state formula at a state of a DTMC.
    Pctl {
        model: PathBuf,
        /// Formula text, or a file holding it.
        formula: String,
        state: String,
    },
    /// GPL query at a state of an RPLTS.
    Gpl {
        model: PathBuf,
        defs: PathBuf,
        state: String,
        /// Fuzzy formula such as form(x1), or a pr(..) state formula.
        query: String,
    },
    /// Probability that an RMC component terminates at a given exit.
    Rmc {
        model: PathBuf,
        component: String,
        /// 1-based exit index.
        exit: usize,
        /// Start node (the component's entry by default).
        #[arg(long)]
        node: Option<String>,
    },
    /// Solve an equation file directly.
    Solve { eqns: PathBuf },
    /// Time the bundled queries and print CSV.
    Bench {
        /// Repetitions per query.
        #[arg(long, default_value_t = 5, value_parser = positive_usize)]
        repeat: usize,
    },
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("{s} is not a positive number")),
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(x) if x > 0 => Ok(x),
        _ => Err(format!("{s} is not a positive integer")),
    }
}

impl Cli {
    fn engine(&self) -> EngineConfig {
        EngineConfig {
            solver: SolverConfig {
                epsilon: self.epsilon,
                max_iters: self.max_iters,
                method: match self.method {
                    MethodArg::Newton => Method::Newton,
                    MethodArg::Kleene => Method::Kleene,
                },
            },
            limits: FedLimits {
                merge_cap: self.merge_cap,
                ..FedLimits::default()
            },
        }
    }

    fn sim(&self) -> SimConfig {
        SimConfig {
            runs: self.runs,
            seed: self.seed,
            ..SimConfig::default()
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn sampled(e: Estimate, cfg: &SimConfig) -> OracleValue {
    OracleValue {
        method: format!("monte-carlo({} runs, seed {})", e.runs, cfg.seed),
        value: e.value,
        tolerance: Some(e.tolerance()),
    }
}

/// Enumeration oracle for a single least-fixpoint goal.
fn enumerated(cli: &Cli, a: &mut Analysis) -> Result<Option<OracleValue>> {
    let [g] = a.goals[..] else { return Ok(None) };
    if a.grammar.kind(g) != FixKind::Lfp {
        return Ok(None);
    }
    let v = bounded_mass(&mut a.grammar, g, cli.oracle_bound)?;
    Ok(Some(OracleValue {
        method: format!("bounded-mass({})", cli.oracle_bound),
        value: v,
        tolerance: None,
    }))
}

/// Fills the dump fields and writes the DOT file.
fn finish(cli: &Cli, mut report: Report, analysis: Option<&mut Analysis>) -> Result<Report> {
    if let Some(a) = analysis {
        if cli.dump_grammar {
            report.grammar = Some(a.grammar_text());
        }
        if cli.dump_eqns {
            report.equations = Some(a.equations_text());
        }
        if let Some(path) = &cli.dump_feds {
            let dot = a.feds_dot()?;
            std::fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?;
        }
    } else if cli.dump_grammar || cli.dump_eqns || cli.dump_feds.is_some() {
        log::warn!("query involves no equation system; nothing to dump");
    }
    Ok(report)
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = cli.engine();
    let start = Instant::now();
    // wall time covers parsing and analysis, not oracles or dumps
    let report = match &cli.cmd {
        Cmd::Reach { model, from, to, also } => {
            let dtmc = Arc::new(parse_dtmc(&read(model)?)?);
            let targets: Vec<Sym> = std::iter::once(to).chain(also).map(|t| Sym::new(t)).collect();
            let mut p = ReachProvider::new(dtmc.clone());
            let goals = targets
                .iter()
                .map(|&t| p.goal(Sym::new(from), t))
                .collect::<fedcheck::Result<Vec<_>>>()?;
            let mut a = analyze(ExplGrammar::new(p), &goals, Op::Or, &cfg)?;
            let spelled: Vec<String> = targets.iter().map(|t| format!("reach({from},{t})")).collect();
            let query = if let [one] = &spelled[..] {
                one.clone()
            } else {
                format!("or({})", spelled.join(","))
            };
            let mut r = Report::from_analysis(query, &a, start.elapsed());
            if cli.oracle {
                r.oracle.extend(enumerated(cli, &mut a)?);
                let e = simulate_reach(&dtmc, Sym::new(from), &targets, &cli.sim())?;
                r.oracle.push(sampled(e, &cli.sim()));
            }
            finish(cli, r, Some(&mut a))?
        }
        Cmd::Pctl { model, formula, state } => {
            let dtmc = Arc::new(parse_dtmc(&read(model)?)?);
            let text = if Path::new(formula).is_file() {
                read(Path::new(formula))?
            } else {
                formula.clone()
            };
            let f = parse_pctl(&text)?;
            let mut checker = PctlChecker::new(dtmc.clone(), cfg);
            let (holds, analysis) = checker.check(&f, Sym::new(state))?;
            let query = format!("{f} at {state}");
            match analysis {
                Some(mut a) => {
                    let mut r = Report::from_analysis(query, &a, start.elapsed());
                    r.holds = Some(holds);
                    if cli.oracle {
                        r.oracle.extend(enumerated(cli, &mut a)?);
                        if let StateFormula::Pr(pf, ..) = &f {
                            let e = match pf.as_ref() {
                                PathFormula::Until(l, rt) => {
                                    let (l, rt) = (checker.sat_set(l)?, checker.sat_set(rt)?);
                                    simulate_until(&dtmc, Some(&l), &rt, Sym::new(state), &cli.sim())?
                                }
                                PathFormula::Next(rt) => {
                                    let rt = checker.sat_set(rt)?;
                                    simulate_next(&dtmc, &rt, Sym::new(state), &cli.sim())?
                                }
                            };
                            r.oracle.push(sampled(e, &cli.sim()));
                        }
                    }
                    finish(cli, r, Some(&mut a))?
                }
                None => finish(
                    cli,
                    Report {
                        query,
                        holds: Some(holds),
                        wall_time_s: start.elapsed().as_secs_f64(),
                        ..Report::default()
                    },
                    None,
                )?,
            }
        }
        Cmd::Gpl {
            model,
            defs,
            state,
            query,
        } => {
            let rplts = Arc::new(parse_rplts(&read(model)?)?);
            let defs = Arc::new(parse_gpl_defs(&read(defs)?)?);
            let q = parse_gpl_query(query)?;
            let checker = GplChecker::new(rplts, defs, cfg);
            let (holds, mut a) = checker.check(&q, Sym::new(state))?;
            let mut r = Report::from_analysis(format!("{} at {state}", query.trim()), &a, start.elapsed());
            r.holds = holds;
            if cli.oracle {
                r.oracle.extend(enumerated(cli, &mut a)?);
            }
            finish(cli, r, Some(&mut a))?
        }
        Cmd::Rmc {
            model,
            component,
            exit,
            node,
        } => {
            let rmc = Arc::new(parse_rmc(&read(model)?)?);
            let q = RmcQuery::new(rmc.clone(), cfg)?;
            let node = node.as_deref().map(Sym::new);
            let mut a = q.analyze(Sym::new(component), node, *exit)?;
            let at = node.map_or(String::new(), |n| format!(" from {n}"));
            let mut r = Report::from_analysis(format!("exit {exit} of {component}{at}"), &a, start.elapsed());
            if cli.oracle {
                r.oracle.extend(enumerated(cli, &mut a)?);
                let e = simulate_rmc_exit(&rmc, Sym::new(component), node, *exit, &cli.sim())?;
                r.oracle.push(sampled(e, &cli.sim()));
            }
            finish(cli, r, Some(&mut a))?
        }
        Cmd::Solve { eqns } => {
            let sys = parse_system(&read(eqns)?)?;
            let sol = solve(&sys, &cfg.solver)?;
            Report {
                query: format!("solve {}", eqns.display()),
                iterations: sol.iterations,
                residual: sol.residual,
                counts: report::Counts {
                    vars: sys.var_count(),
                    ..report::Counts::default()
                },
                variables: variables(&sys, &sol),
                wall_time_s: start.elapsed().as_secs_f64(),
                ..Report::default()
            }
        }
        Cmd::Bench { .. } => bail!("bench writes CSV directly"),
    };
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let outcome = match &cli.cmd {
        Cmd::Bench { repeat } => bench::run(&cli.engine(), *repeat, &mut std::io::stdout()),
        _ => run(&cli).and_then(|r| {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", r.to_text());
                if matches!(cli.cmd, Cmd::Solve { .. }) {
                    for v in &r.variables {
                        println!("{} = {} ({}, {})", v.var, v.value, v.kind, v.goal);
                    }
                }
            }
            Ok(())
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
