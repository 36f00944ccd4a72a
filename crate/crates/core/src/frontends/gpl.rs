use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::pctl::{bound_of, Cmp};
use super::term::{parse_term, Term};
use crate::engine::{analyze, Analysis, EngineConfig};
use crate::error::{Error, Result};
use crate::explgen::{BodySym, ExplGrammar, FixKind, Goal, GoalProvider, Instance, Production};
use crate::fed::Op;
use crate::model::{Distribution, Rplts};
use crate::symbol::{atom, Sym};

/// Two-valued state formulae of the fuzzy logic.
#[derive(Clone, Debug, PartialEq)]
pub enum GplState {
    Tt,
    Ff,
    Prop(Sym),
    NegProp(Sym),
    And(Box<GplState>, Box<GplState>),
    Or(Box<GplState>, Box<GplState>),
    Pr(Box<GplPath>, Cmp, f64),
}

/// Fuzzy formulae, whose value at a state is a probability.
#[derive(Clone, Debug, PartialEq)]
pub enum GplPath {
    Tt,
    Ff,
    Sf(GplState),
    Form(Sym),
    And(Box<GplPath>, Box<GplPath>),
    Or(Box<GplPath>, Box<GplPath>),
    Diam(Sym, Box<GplPath>),
    Box(Sym, Box<GplPath>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Def {
    pub name: Sym,
    pub kind: FixKind,
    pub body: GplPath,
}

impl fmt::Display for GplState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GplState::Tt => f.write_str("tt"),
            GplState::Ff => f.write_str("ff"),
            GplState::Prop(a) => write!(f, "prop({})", atom(a.as_str())),
            GplState::NegProp(a) => write!(f, "neg(prop({}))", atom(a.as_str())),
            GplState::And(a, b) => write!(f, "and({a},{b})"),
            GplState::Or(a, b) => write!(f, "or({a},{b})"),
            GplState::Pr(pf, c, b) => write!(f, "pr({pf},{c},{b})"),
        }
    }
}

impl fmt::Display for GplPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GplPath::Tt => f.write_str("tt"),
            GplPath::Ff => f.write_str("ff"),
            GplPath::Sf(s) => write!(f, "sf({s})"),
            GplPath::Form(x) => write!(f, "form({})", atom(x.as_str())),
            GplPath::And(a, b) => write!(f, "and({a},{b})"),
            GplPath::Or(a, b) => write!(f, "or({a},{b})"),
            GplPath::Diam(a, p) => write!(f, "diam({},{p})", atom(a.as_str())),
            GplPath::Box(a, p) => write!(f, "box({},{p})", atom(a.as_str())),
        }
    }
}

impl fmt::Display for Def {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            FixKind::Lfp => "lfp",
            FixKind::Gfp => "gfp",
        };
        write!(f, "def({},{k}({}))", atom(self.name.as_str()), self.body)
    }
}

fn bad(t: &Term, what: &str) -> Error {
    Error::Formula(format!("{t} is not a {what}"))
}

fn name_of(t: &Term, what: &str) -> Result<Sym> {
    t.name().map(Sym::new).ok_or_else(|| bad(t, what))
}

fn gpl_state(t: &Term) -> Result<GplState> {
    let a = t.args();
    Ok(match t.functor().ok_or_else(|| bad(t, "state formula"))? {
        ("tt", 0) => GplState::Tt,
        ("ff", 0) => GplState::Ff,
        ("prop", 1) => GplState::Prop(name_of(&a[0], "proposition")?),
        ("neg", 1) => match a[0].functor() {
            Some(("prop", 1)) => GplState::NegProp(name_of(&a[0].args()[0], "proposition")?),
            _ => return Err(bad(t, "negated proposition")),
        },
        ("and", 2) => GplState::And(Box::new(gpl_state(&a[0])?), Box::new(gpl_state(&a[1])?)),
        ("or", 2) => GplState::Or(Box::new(gpl_state(&a[0])?), Box::new(gpl_state(&a[1])?)),
        ("pr", 3) => {
            let cmp = a[1]
                .name()
                .and_then(Cmp::parse)
                .ok_or_else(|| bad(&a[1], "comparison"))?;
            GplState::Pr(Box::new(gpl_path(&a[0])?), cmp, bound_of(&a[2])?)
        }
        _ => return Err(bad(t, "state formula")),
    })
}

fn gpl_path(t: &Term) -> Result<GplPath> {
    let a = t.args();
    Ok(match t.functor().ok_or_else(|| bad(t, "fuzzy formula"))? {
        ("tt", 0) => GplPath::Tt,
        ("ff", 0) => GplPath::Ff,
        ("sf", 1) => GplPath::Sf(gpl_state(&a[0])?),
        ("form", 1) => GplPath::Form(name_of(&a[0], "definition name")?),
        ("and", 2) => GplPath::And(Box::new(gpl_path(&a[0])?), Box::new(gpl_path(&a[1])?)),
        ("or", 2) => GplPath::Or(Box::new(gpl_path(&a[0])?), Box::new(gpl_path(&a[1])?)),
        ("diam", 2) => GplPath::Diam(name_of(&a[0], "action")?, Box::new(gpl_path(&a[1])?)),
        ("box", 2) => GplPath::Box(name_of(&a[0], "action")?, Box::new(gpl_path(&a[1])?)),
        _ => return Err(bad(t, "fuzzy formula")),
    })
}

/// A query is either a state formula rooted at `pr`, answered two-valued,
/// or a fuzzy formula, answered with its probability.
#[derive(Clone, Debug, PartialEq)]
pub enum GplQuery {
    State(GplState),
    Path(GplPath),
}

pub fn parse_gpl_query(text: &str) -> Result<GplQuery> {
    let t = parse_term(text.trim(), 1)?;
    if matches!(t.functor(), Some(("pr", 3))) {
        Ok(GplQuery::State(gpl_state(&t)?))
    } else {
        Ok(GplQuery::Path(gpl_path(&t)?))
    }
}

/// Fixpoint definitions, checked closed and alternation-free.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GplDefs {
    defs: Vec<Def>,
    index: HashMap<Sym, usize>,
}

fn forms(pf: &GplPath, out: &mut Vec<Sym>) {
    match pf {
        GplPath::Form(x) => out.push(*x),
        GplPath::And(a, b) | GplPath::Or(a, b) => {
            forms(a, out);
            forms(b, out);
        }
        GplPath::Diam(_, p) | GplPath::Box(_, p) => forms(p, out),
        GplPath::Sf(s) => state_forms(s, out),
        GplPath::Tt | GplPath::Ff => {}
    }
}

fn state_forms(sf: &GplState, out: &mut Vec<Sym>) {
    match sf {
        GplState::And(a, b) | GplState::Or(a, b) => {
            state_forms(a, out);
            state_forms(b, out);
        }
        GplState::Pr(p, _, _) => forms(p, out),
        _ => {}
    }
}

impl GplDefs {
    pub fn new(defs: Vec<Def>) -> Result<GplDefs> {
        let mut index = HashMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name, i).is_some() {
                return Err(Error::Formula(format!("{} defined twice", d.name)));
            }
        }
        let out = GplDefs { defs, index };
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..out.defs.len()).map(|i| graph.add_node(i)).collect();
        for (i, d) in out.defs.iter().enumerate() {
            let mut used = Vec::new();
            forms(&d.body, &mut used);
            for x in used {
                let j = out.require(x)?;
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
        for scc in tarjan_scc(&graph) {
            let kinds: Vec<&Def> = scc.iter().map(|&n| &out.defs[graph[n]]).collect();
            if let Some(other) = kinds.iter().find(|d| d.kind != kinds[0].kind) {
                return Err(Error::Alternation(format!(
                    "{} and {} are mutually recursive with different fixpoints",
                    kinds[0].name, other.name
                )));
            }
        }
        Ok(out)
    }

    pub fn defs(&self) -> &[Def] {
        &self.defs
    }

    pub fn get(&self, x: Sym) -> Option<&Def> {
        self.index.get(&x).map(|&i| &self.defs[i])
    }

    fn require(&self, x: Sym) -> Result<usize> {
        self.index
            .get(&x)
            .copied()
            .ok_or_else(|| Error::Formula(format!("form({x}) has no definition")))
    }

    /// Every `form(X)` in `pf` resolves.
    pub fn check_closed(&self, pf: &GplPath) -> Result<()> {
        let mut used = Vec::new();
        forms(pf, &mut used);
        used.into_iter().try_for_each(|x| self.require(x).map(|_| ()))
    }
}

impl fmt::Display for GplDefs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.defs {
            writeln!(f, "{d}.")?;
        }
        Ok(())
    }
}

/// One `def(X, lfp(PF))` or `def(X, gfp(PF))` per line, optionally ending
/// in a period; `#` starts a comment.
pub fn parse_gpl_defs(text: &str) -> Result<GplDefs> {
    let mut defs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let line = line.strip_suffix('.').unwrap_or(line).trim();
        if line.is_empty() {
            continue;
        }
        let t = parse_term(line, i + 1)?;
        let at = |e: Error| match e {
            Error::Formula(m) => Error::Syntax {
                line: i + 1,
                col: 1,
                msg: m,
            },
            other => other,
        };
        if t.functor() != Some(("def", 2)) {
            return Err(at(bad(&t, "definition")));
        }
        let name = name_of(&t.args()[0], "definition name").map_err(at)?;
        let fix = &t.args()[1];
        let kind = match fix.functor() {
            Some(("lfp", 1)) => FixKind::Lfp,
            Some(("gfp", 1)) => FixKind::Gfp,
            _ => return Err(at(bad(fix, "fixpoint (lfp or gfp)"))),
        };
        let body = gpl_path(&fix.args()[0]).map_err(at)?;
        defs.push(Def { name, kind, body });
    }
    GplDefs::new(defs)
}

/// Branch token for taking outcome `t` of switch `sw`.
pub fn outcome_token(t: Sym, sw: Sym) -> Sym {
    Sym::new(&format!("({t},{sw})"))
}

/// Evaluates fuzzy formulae over an RPLTS. `pr` subqueries inside `sf(..)`
/// are solved as separate queries and memoized per (state, formula).
#[derive(Clone)]
pub struct GplChecker {
    rplts: Arc<Rplts>,
    defs: Arc<GplDefs>,
    cfg: EngineConfig,
    probs: Rc<RefCell<HashMap<(usize, String), f64>>>,
}

impl GplChecker {
    pub fn new(rplts: Arc<Rplts>, defs: Arc<GplDefs>, cfg: EngineConfig) -> GplChecker {
        GplChecker {
            rplts,
            defs,
            cfg,
            probs: Rc::new(RefCell::new(HashMap::new())),
        }
    }

    pub fn defs(&self) -> &GplDefs {
        &self.defs
    }

    /// Goal `pmodels(state, pf)` and its analysis.
    pub fn analyze(&self, pf: &GplPath, state: Sym) -> Result<Analysis> {
        self.defs.check_closed(pf)?;
        let s = self.rplts.require(state)?;
        let mut provider = GplProvider::new(self.clone());
        let g = provider.goal(s, pf);
        let a = analyze(ExplGrammar::new(provider), &[g], Op::Or, &self.cfg)?;
        self.probs.borrow_mut().insert((s, pf.to_string()), a.probability);
        Ok(a)
    }

    pub fn probability(&self, pf: &GplPath, state: Sym) -> Result<f64> {
        let s = self.rplts.require(state)?;
        if let Some(&p) = self.probs.borrow().get(&(s, pf.to_string())) {
            return Ok(p);
        }
        Ok(self.analyze(pf, state)?.probability)
    }

    pub fn smodels(&self, sf: &GplState, state: Sym) -> Result<bool> {
        Ok(match sf {
            GplState::Tt => true,
            GplState::Ff => false,
            GplState::Prop(a) => self.has_label(state, *a)?,
            GplState::NegProp(a) => !self.has_label(state, *a)?,
            GplState::And(a, b) => self.smodels(a, state)? && self.smodels(b, state)?,
            GplState::Or(a, b) => self.smodels(a, state)? || self.smodels(b, state)?,
            GplState::Pr(pf, cmp, bound) => cmp.holds(self.probability(pf, state)?, *bound),
        })
    }

    fn has_label(&self, state: Sym, a: Sym) -> Result<bool> {
        self.rplts.require(state)?;
        Ok(self.rplts.has_label(state, a))
    }

    /// Answers a query at `state`: the verdict (for `pr` queries) and the
    /// analysis of the fuzzy formula involved.
    pub fn check(&self, q: &GplQuery, state: Sym) -> Result<(Option<bool>, Analysis)> {
        match q {
            GplQuery::Path(pf) => Ok((None, self.analyze(pf, state)?)),
            GplQuery::State(GplState::Pr(pf, cmp, bound)) => {
                let a = self.analyze(pf, state)?;
                Ok((Some(cmp.holds(a.probability, *bound)), a))
            }
            GplQuery::State(other) => Err(Error::Formula(format!("query {other} is not rooted at pr"))),
        }
    }
}

/// Goals `pmodels(s,PF)` over an RPLTS.
struct GplProvider {
    checker: GplChecker,
    goals: HashMap<Goal, (usize, GplPath)>,
    kinds: HashMap<String, FixKind>,
    processes: HashMap<Sym, (Sym, Sym)>,
}

fn subformulas<'a>(pf: &'a GplPath, out: &mut Vec<&'a GplPath>) {
    out.push(pf);
    match pf {
        GplPath::And(a, b) | GplPath::Or(a, b) => {
            subformulas(a, out);
            subformulas(b, out);
        }
        GplPath::Diam(_, p) | GplPath::Box(_, p) => subformulas(p, out),
        _ => {}
    }
}

impl GplProvider {
    fn new(checker: GplChecker) -> GplProvider {
        // a subformula takes the fixpoint kind of the first definition
        // containing it; form(X) takes X's own kind
        let mut kinds = HashMap::new();
        for d in checker.defs.defs() {
            let mut subs = Vec::new();
            subformulas(&d.body, &mut subs);
            for s in subs {
                kinds.entry(s.to_string()).or_insert(d.kind);
            }
        }
        for d in checker.defs.defs() {
            kinds.insert(GplPath::Form(d.name).to_string(), d.kind);
        }
        let mut processes = HashMap::new();
        for &s in checker.rplts.states() {
            for &a in checker.rplts.actions(s).into_iter().flat_map(|m| m.keys()) {
                processes.insert(Rplts::process(s, a), (s, a));
            }
        }
        GplProvider {
            checker,
            goals: HashMap::new(),
            kinds,
            processes,
        }
    }

    fn goal(&mut self, s: usize, pf: &GplPath) -> Goal {
        let state = self.checker.rplts.states()[s];
        let g = Goal::new(&format!("pmodels({},{pf})", atom(state.as_str())));
        self.goals.entry(g).or_insert_with(|| (s, pf.clone()));
        g
    }

    fn body(&mut self, head: Goal, s: usize, pf: &GplPath) -> Result<Vec<Production>> {
        let rplts = self.checker.rplts.clone();
        let state = rplts.states()[s];
        let empty = || vec![Production::new(head, Vec::new())];
        Ok(match pf {
            GplPath::Tt => empty(),
            GplPath::Ff => Vec::new(),
            GplPath::Sf(sf) => {
                if self.checker.smodels(sf, state)? {
                    empty()
                } else {
                    Vec::new()
                }
            }
            GplPath::Form(x) => {
                let body = self
                    .checker
                    .defs
                    .get(*x)
                    .ok_or_else(|| Error::Formula(format!("form({x}) has no definition")))?
                    .body
                    .clone();
                self.body(head, s, &body)?
            }
            GplPath::And(a, b) => {
                let (ga, gb) = (self.goal(s, a), self.goal(s, b));
                vec![Production::new(
                    head,
                    vec![BodySym::expl(ga, Instance::base()), BodySym::expl(gb, Instance::base())],
                )]
            }
            GplPath::Or(a, b) => {
                let (ga, gb) = (self.goal(s, a), self.goal(s, b));
                vec![
                    Production::new(head, vec![BodySym::expl(ga, Instance::base())]),
                    Production::new(head, vec![BodySym::expl(gb, Instance::base())]),
                ]
            }
            GplPath::Diam(a, p) | GplPath::Box(a, p) => match rplts.switch(state, *a) {
                None if matches!(pf, GplPath::Box(..)) => empty(),
                None => Vec::new(),
                Some(dist) => {
                    let sw = Rplts::process(state, *a);
                    let mut out = Vec::new();
                    for &(t, prob) in dist.outcomes() {
                        if prob == 0.0 {
                            continue;
                        }
                        let ti = rplts.index_of(t).expect("validated successor");
                        let sub = self.goal(ti, p);
                        out.push(Production::new(
                            head,
                            vec![
                                BodySym::msw(sw, Instance::base(), t),
                                BodySym::expl(sub, Instance::base().child(outcome_token(t, sw))),
                            ],
                        ));
                    }
                    out
                }
            },
        })
    }
}

impl GoalProvider for GplProvider {
    fn expand(&mut self, goal: Goal) -> Result<Vec<Production>> {
        let (s, pf) = self.goals.get(&goal).cloned().ok_or_else(|| Error::Expansion {
            goal: goal.to_string(),
            msg: "not a formula goal of this query".into(),
        })?;
        self.body(goal, s, &pf)
    }

    fn distribution(&self, process: Sym) -> Option<Distribution> {
        let &(s, a) = self.processes.get(&process)?;
        self.checker.rplts.switch(s, a).cloned()
    }

    fn kind(&self, goal: Goal) -> FixKind {
        self.goals
            .get(&goal)
            .and_then(|(_, pf)| self.kinds.get(&pf.to_string()).copied())
            .unwrap_or(FixKind::Lfp)
    }
}
