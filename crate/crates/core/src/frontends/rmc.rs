use std::collections::BTreeSet;
use std::sync::Arc;

use super::gpl::{Def, GplChecker, GplDefs, GplPath};
use crate::engine::{Analysis, EngineConfig};
use crate::error::{Error, Result};
use crate::explgen::FixKind;
use crate::model::{Distribution, Port, Rmc, Rplts};
use crate::symbol::Sym;

/// RPLTS state standing for `port` of component `comp`.
pub fn rmc_state(comp: Sym, port: Port) -> Sym {
    Sym::new(&format!("{comp}.{port}"))
}

fn action(prefix: &str, i: usize) -> Sym {
    Sym::new(&format!("{prefix}{i}"))
}

/// Reactive system of an RMC: a state per node and per box port; `p` moves
/// copy the probabilistic transitions, a call port offers `c` to the callee
/// entry and `r<i>` to its i-th return port, and exit i loops on `e<i>`.
pub fn rmc_to_rplts(rmc: &Rmc) -> Result<Rplts> {
    let mut states = Vec::new();
    let mut trans = Vec::new();
    let p = Sym::new("p");
    for c in rmc.components() {
        for &n in &c.nodes {
            let s = rmc_state(c.name, Port::Node(n));
            states.push((s, BTreeSet::new()));
            if let Some(i) = c.exit_index(n) {
                trans.push((s, action("e", i), Distribution::dirac(s)));
            }
        }
        for b in &c.boxes {
            let callee = rmc
                .component(b.callee)
                .ok_or_else(|| Error::Model(format!("unknown component {}", b.callee)))?;
            let call = rmc_state(c.name, Port::Call(b.name));
            states.push((call, BTreeSet::new()));
            trans.push((
                call,
                Sym::new("c"),
                Distribution::dirac(rmc_state(callee.name, Port::Node(callee.entry))),
            ));
            for k in 1..=callee.exits.len() {
                let ret = rmc_state(c.name, Port::Ret(b.name, k));
                states.push((ret, BTreeSet::new()));
                trans.push((call, action("r", k), Distribution::dirac(ret)));
            }
        }
        for (src, dist) in &c.trans {
            let outcomes = dist
                .outcomes()
                .iter()
                .map(|&(t, q)| {
                    let port = Port::parse(t.as_str()).expect("validated port");
                    (rmc_state(c.name, port), q)
                })
                .collect();
            trans.push((rmc_state(c.name, *src), p, Distribution::new(outcomes)?));
        }
    }
    Rplts::new(states, trans)
}

/// `x<i> = lfp(or(diam(e<i>,tt), or(diam(p,form(x<i>)), or over j of
/// and(diam(c,form(x<j>)), diam(r<j>,form(x<i>))))))` for i in 1..=n.
pub fn rmc_exit_formulae(n: usize) -> GplDefs {
    let x = |i: usize| GplPath::Form(action("x", i));
    let or = |a: GplPath, b: GplPath| GplPath::Or(Box::new(a), Box::new(b));
    let diam = |a: Sym, f: GplPath| GplPath::Diam(a, Box::new(f));
    let defs = (1..=n)
        .map(|i| {
            let calls = (1..=n)
                .map(|j| {
                    GplPath::And(
                        Box::new(diam(Sym::new("c"), x(j))),
                        Box::new(diam(action("r", j), x(i))),
                    )
                })
                .rev()
                .reduce(|acc, call| or(call, acc))
                .expect("n >= 1");
            let body = or(diam(action("e", i), GplPath::Tt), or(diam(Sym::new("p"), x(i)), calls));
            Def {
                name: action("x", i),
                kind: FixKind::Lfp,
                body,
            }
        })
        .collect();
    GplDefs::new(defs).expect("exit formulae are closed and alternation-free")
}

/// Probability that the RMC, started at `node` of `component` (its entry
/// by default), terminates at exit `exit` of that component.
pub struct RmcQuery {
    rmc: Arc<Rmc>,
    rplts: Arc<Rplts>,
    checker: GplChecker,
}

impl RmcQuery {
    pub fn new(rmc: Arc<Rmc>, cfg: EngineConfig) -> Result<RmcQuery> {
        let rplts = Arc::new(rmc_to_rplts(&rmc)?);
        let defs = Arc::new(rmc_exit_formulae(rmc.max_exits().max(1)));
        let checker = GplChecker::new(rplts.clone(), defs, cfg);
        Ok(RmcQuery { rmc, rplts, checker })
    }

    pub fn rplts(&self) -> &Rplts {
        &self.rplts
    }

    pub fn defs(&self) -> &GplDefs {
        self.checker.defs()
    }

    pub fn analyze(&self, component: Sym, node: Option<Sym>, exit: usize) -> Result<Analysis> {
        let c = self
            .rmc
            .component(component)
            .ok_or_else(|| Error::Model(format!("unknown component {component}")))?;
        if exit == 0 || exit > c.exits.len() {
            return Err(Error::Formula(format!(
                "{component} has {} exit(s), asked for exit {exit}",
                c.exits.len()
            )));
        }
        let n = node.unwrap_or(c.entry);
        let state = rmc_state(component, Port::Node(n));
        self.checker.analyze(&GplPath::Form(action("x", exit)), state)
    }
}
