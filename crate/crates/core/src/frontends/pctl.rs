use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::reach::next_token;
use super::term::{parse_term, Term};
use crate::engine::{analyze, Analysis, EngineConfig};
use crate::error::{Error, Result};
use crate::explgen::{BodySym, ExplGrammar, Goal, GoalProvider, Instance, Production};
use crate::fed::{GoalRef, Op};
use crate::model::{Distribution, Dtmc};
use crate::symbol::{atom, Sym};

/// Probability bound comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Gt,
    Geq,
    Lt,
    Leq,
}

impl Cmp {
    pub fn parse(name: &str) -> Option<Cmp> {
        Some(match name {
            "gt" => Cmp::Gt,
            "geq" => Cmp::Geq,
            "lt" => Cmp::Lt,
            "leq" => Cmp::Leq,
            _ => return None,
        })
    }

    /// `p ⋈ bound`, compared exactly.
    pub fn holds(self, p: f64, bound: f64) -> bool {
        match self {
            Cmp::Gt => p > bound,
            Cmp::Geq => p >= bound,
            Cmp::Lt => p < bound,
            Cmp::Leq => p <= bound,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Gt => "gt",
            Cmp::Geq => "geq",
            Cmp::Lt => "lt",
            Cmp::Leq => "leq",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateFormula {
    Tt,
    Ff,
    Prop(Sym),
    Neg(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Pr(Box<PathFormula>, Cmp, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathFormula {
    Until(StateFormula, StateFormula),
    Next(StateFormula),
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::Tt => f.write_str("tt"),
            StateFormula::Ff => f.write_str("ff"),
            StateFormula::Prop(a) => write!(f, "prop({})", atom(a.as_str())),
            StateFormula::Neg(x) => write!(f, "neg({x})"),
            StateFormula::And(a, b) => write!(f, "and({a},{b})"),
            StateFormula::Pr(pf, c, b) => write!(f, "pr({pf},{c},{b})"),
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Until(a, b) => write!(f, "until({a},{b})"),
            PathFormula::Next(a) => write!(f, "next({a})"),
        }
    }
}

fn bad(t: &Term, what: &str) -> Error {
    Error::Formula(format!("{t} is not a {what}"))
}

pub(crate) fn bound_of(t: &Term) -> Result<f64> {
    match t.number() {
        Some(b) if (0.0..=1.0).contains(&b) => Ok(b),
        _ => Err(Error::Formula(format!("probability bound {t} is not in [0,1]"))),
    }
}

fn state_formula(t: &Term) -> Result<StateFormula> {
    let Some((f, n)) = t.functor() else {
        return Err(bad(t, "state formula"));
    };
    let a = t.args();
    Ok(match (f, n) {
        ("tt", 0) => StateFormula::Tt,
        ("ff", 0) => StateFormula::Ff,
        ("prop", 1) => StateFormula::Prop(Sym::new(a[0].name().ok_or_else(|| bad(&a[0], "proposition"))?)),
        ("neg", 1) => StateFormula::Neg(Box::new(state_formula(&a[0])?)),
        ("and", 2) => StateFormula::And(Box::new(state_formula(&a[0])?), Box::new(state_formula(&a[1])?)),
        ("pr", 3) => {
            let cmp = a[1]
                .name()
                .and_then(Cmp::parse)
                .filter(|c| matches!(c, Cmp::Gt | Cmp::Geq))
                .ok_or_else(|| bad(&a[1], "comparison (gt or geq)"))?;
            StateFormula::Pr(Box::new(path_formula(&a[0])?), cmp, bound_of(&a[2])?)
        }
        _ => return Err(bad(t, "state formula")),
    })
}

fn path_formula(t: &Term) -> Result<PathFormula> {
    match t.functor() {
        Some(("until", 2)) => Ok(PathFormula::Until(
            state_formula(&t.args()[0])?,
            state_formula(&t.args()[1])?,
        )),
        Some(("next", 1)) => Ok(PathFormula::Next(state_formula(&t.args()[0])?)),
        _ => Err(bad(t, "path formula")),
    }
}

/// Parses `SF ::= tt | ff | prop(A) | neg(SF) | and(SF,SF) | pr(PF,gt|geq,B)`
/// with `PF ::= until(SF,SF) | next(SF)`.
pub fn parse_pctl(text: &str) -> Result<StateFormula> {
    state_formula(&parse_term(text.trim(), 1)?)
}

/// Path-formula goals `pmodels(s,PF)` over a chain, given the satisfaction
/// sets of the path formula's state subformulae.
struct PathProvider {
    dtmc: Arc<Dtmc>,
    pf: PathFormula,
    /// until: (left, right); next: (unused, operand)
    left: Arc<Vec<bool>>,
    right: Arc<Vec<bool>>,
    goals: HashMap<Goal, usize>,
    by_state: Vec<Goal>,
    processes: HashMap<Sym, usize>,
}

impl GoalProvider for PathProvider {
    fn expand(&mut self, goal: Goal) -> Result<Vec<Production>> {
        let &s = self.goals.get(&goal).ok_or_else(|| Error::Expansion {
            goal: goal.to_string(),
            msg: "not a path goal of this query".into(),
        })?;
        let Some(dist) = self.dtmc.switch_at(s) else {
            let done = matches!(self.pf, PathFormula::Until(..)) && self.right[s];
            return Ok(if done {
                vec![Production::new(goal, Vec::new())]
            } else {
                Vec::new()
            });
        };
        let process = Dtmc::process(self.dtmc.states()[s]);
        let next = Instance::base().child(next_token());
        let mut out = Vec::new();
        match self.pf {
            PathFormula::Until(..) => {
                if self.right[s] {
                    out.push(Production::new(goal, Vec::new()));
                } else if self.left[s] {
                    for &(u, p) in dist.outcomes() {
                        if p == 0.0 {
                            continue;
                        }
                        let ui = self.dtmc.index_of(u).expect("validated successor");
                        out.push(Production::new(
                            goal,
                            vec![
                                BodySym::msw(process, Instance::base(), u),
                                BodySym::expl(self.by_state[ui], next.clone()),
                            ],
                        ));
                    }
                }
            }
            PathFormula::Next(_) => {
                for &(u, p) in dist.outcomes() {
                    let ui = self.dtmc.index_of(u).expect("validated successor");
                    if p > 0.0 && self.right[ui] {
                        out.push(Production::new(goal, vec![BodySym::msw(process, Instance::base(), u)]));
                    }
                }
            }
        }
        Ok(out)
    }

    fn distribution(&self, process: Sym) -> Option<Distribution> {
        let &i = self.processes.get(&process)?;
        self.dtmc.switch_at(i).cloned()
    }
}

/// Two-valued PCTL evaluation; `pr` subformulae are answered by solving the
/// path formula's equation system. Results are memoized per formula.
pub struct PctlChecker {
    dtmc: Arc<Dtmc>,
    cfg: EngineConfig,
    sat: HashMap<String, Arc<Vec<bool>>>,
    probs: HashMap<String, Vec<Option<f64>>>,
}

impl PctlChecker {
    pub fn new(dtmc: Arc<Dtmc>, cfg: EngineConfig) -> PctlChecker {
        PctlChecker {
            dtmc,
            cfg,
            sat: HashMap::new(),
            probs: HashMap::new(),
        }
    }

    /// Satisfaction of `sf` at every state, in state order.
    pub fn sat_set(&mut self, sf: &StateFormula) -> Result<Arc<Vec<bool>>> {
        let key = sf.to_string();
        if let Some(s) = self.sat.get(&key) {
            return Ok(s.clone());
        }
        let n = self.dtmc.len();
        let v: Vec<bool> = match sf {
            StateFormula::Tt => vec![true; n],
            StateFormula::Ff => vec![false; n],
            StateFormula::Prop(a) => {
                if !self.dtmc.alphabet().contains(a) {
                    return Err(Error::Formula(format!("unknown proposition {a}")));
                }
                (0..n).map(|i| self.dtmc.labels_at(i).contains(a)).collect()
            }
            StateFormula::Neg(x) => self.sat_set(x)?.iter().map(|b| !b).collect(),
            StateFormula::And(a, b) => {
                let (a, b) = (self.sat_set(a)?, self.sat_set(b)?);
                a.iter().zip(b.iter()).map(|(x, y)| *x && *y).collect()
            }
            StateFormula::Pr(pf, cmp, bound) => {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let p = self.probability_at(pf, i)?;
                    out.push(cmp.holds(p, *bound));
                }
                out
            }
        };
        let v = Arc::new(v);
        self.sat.insert(key, v.clone());
        Ok(v)
    }

    pub fn holds(&mut self, sf: &StateFormula, state: Sym) -> Result<bool> {
        let i = self.dtmc.require(state)?;
        Ok(match sf {
            StateFormula::Pr(pf, cmp, bound) => cmp.holds(self.probability_at(pf, i)?, *bound),
            StateFormula::Neg(x) => !self.holds(x, state)?,
            StateFormula::And(a, b) => self.holds(a, state)? && self.holds(b, state)?,
            other => self.sat_set(other)?[i],
        })
    }

    fn probability_at(&mut self, pf: &PathFormula, i: usize) -> Result<f64> {
        let key = pf.to_string();
        if let Some(Some(p)) = self.probs.get(&key).map(|v| v[i]) {
            return Ok(p);
        }
        Ok(self.analyze_at(pf, i)?.probability)
    }

    /// Full analysis of `pf` from state `i`; also caches the values it
    /// determines for other states.
    fn analyze_at(&mut self, pf: &PathFormula, i: usize) -> Result<Analysis> {
        let (left, right) = match pf {
            PathFormula::Until(a, b) => (self.sat_set(a)?, self.sat_set(b)?),
            PathFormula::Next(b) => (Arc::new(Vec::new()), self.sat_set(b)?),
        };
        let spelled = pf.to_string();
        let by_state: Vec<Goal> = self
            .dtmc
            .states()
            .iter()
            .map(|s| Goal::new(&format!("pmodels({},{spelled})", atom(s.as_str()))))
            .collect();
        let provider = PathProvider {
            dtmc: self.dtmc.clone(),
            pf: pf.clone(),
            left,
            right,
            goals: by_state.iter().enumerate().map(|(i, &g)| (g, i)).collect(),
            by_state: by_state.clone(),
            processes: self
                .dtmc
                .states()
                .iter()
                .enumerate()
                .map(|(i, &s)| (Dtmc::process(s), i))
                .collect(),
        };
        let analysis = analyze(ExplGrammar::new(provider), &[by_state[i]], Op::Or, &self.cfg)?;
        let cache = self.probs.entry(spelled).or_insert_with(|| vec![None; by_state.len()]);
        for (j, g) in by_state.iter().enumerate() {
            if let Some(v) = analysis.value_of(GoalRef::Goal(*g)) {
                cache[j] = Some(v);
            }
        }
        cache[i] = Some(analysis.probability);
        Ok(analysis)
    }

    /// Answers a query at `state`: for a `pr` formula, the verdict together
    /// with the path formula's analysis.
    pub fn check(&mut self, sf: &StateFormula, state: Sym) -> Result<(bool, Option<Analysis>)> {
        if let StateFormula::Pr(pf, cmp, bound) = sf {
            let i = self.dtmc.require(state)?;
            let a = self.analyze_at(pf, i)?;
            return Ok((cmp.holds(a.probability, *bound), Some(a)));
        }
        Ok((self.holds(sf, state)?, None))
    }
}
