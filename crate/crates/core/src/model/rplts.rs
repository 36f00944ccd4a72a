use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::dist::Distribution;
use super::dtmc::{at_line, line_of};
use super::lexer::Cursor;
use crate::error::{Error, Result};
use crate::symbol::{atom, Sym};

/// Reactive probabilistic labeled transition system: every state offers a
/// set of distinct actions, each resolved by its own distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Rplts {
    states: Vec<Sym>,
    index: HashMap<Sym, usize>,
    actions: Vec<BTreeMap<Sym, Distribution>>,
    labels: Vec<BTreeSet<Sym>>,
}

impl Rplts {
    pub fn new(states: Vec<(Sym, BTreeSet<Sym>)>, transitions: Vec<(Sym, Sym, Distribution)>) -> Result<Rplts> {
        let mut index = HashMap::new();
        let mut names = Vec::new();
        let mut labels = Vec::new();
        for (s, l) in states {
            if index.insert(s, names.len()).is_some() {
                return Err(Error::Model(format!("duplicate state {s}")));
            }
            names.push(s);
            labels.push(l);
        }
        let mut actions = vec![BTreeMap::new(); names.len()];
        for (s, a, dist) in transitions {
            let Some(&i) = index.get(&s) else {
                return Err(Error::Model(format!("unknown state {s}")));
            };
            if let Some(&(u, _)) = dist.outcomes().iter().find(|(u, _)| !index.contains_key(u)) {
                return Err(Error::Model(format!("unknown state {u}")));
            }
            if actions[i].insert(a, dist).is_some() {
                return Err(Error::Model(format!("duplicate action {a} at state {s}")));
            }
        }
        Ok(Rplts {
            states: names,
            index,
            actions,
            labels,
        })
    }

    pub fn states(&self) -> &[Sym] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: Sym) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn require(&self, s: Sym) -> Result<usize> {
        self.index_of(s)
            .ok_or_else(|| Error::Model(format!("unknown state {s}")))
    }

    pub fn actions(&self, s: Sym) -> Option<&BTreeMap<Sym, Distribution>> {
        self.index_of(s).map(|i| &self.actions[i])
    }

    pub fn switch(&self, s: Sym, a: Sym) -> Option<&Distribution> {
        self.actions(s).and_then(|m| m.get(&a))
    }

    pub fn has_label(&self, s: Sym, p: Sym) -> bool {
        self.index_of(s).is_some_and(|i| self.labels[i].contains(&p))
    }

    pub fn labels(&self, s: Sym) -> Option<&BTreeSet<Sym>> {
        self.index_of(s).map(|i| &self.labels[i])
    }

    pub fn transition_count(&self) -> usize {
        self.actions.iter().map(BTreeMap::len).sum()
    }

    /// Random process name of the `a`-switch of `s`.
    pub fn process(s: Sym, a: Sym) -> Sym {
        Sym::new(&format!("t({},{})", atom(s.as_str()), atom(a.as_str())))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.states.iter().enumerate() {
            let _ = write!(out, "state {s}");
            if !self.labels[i].is_empty() {
                let l: Vec<_> = self.labels[i].iter().map(|p| p.as_str()).collect();
                let _ = write!(out, " label {}", l.join(","));
            }
            out.push_str(";\n");
        }
        for (i, s) in self.states.iter().enumerate() {
            for (a, d) in &self.actions[i] {
                let _ = writeln!(out, "trans {s} {a}: {d};");
            }
        }
        out
    }
}

/// Same format as the chain parser with an action after the source:
/// `trans <id> <act>: <id> <prob>, ... ;`
pub fn parse_rplts(text: &str) -> Result<Rplts> {
    let mut cur = Cursor::new(text)?;
    let mut states = Vec::new();
    let mut trans = Vec::new();
    let mut seen: BTreeSet<(Sym, Sym)> = BTreeSet::new();
    while !cur.at_end() {
        if cur.eat_keyword("state") {
            let s = cur.word("state name")?;
            let mut labels = BTreeSet::new();
            if cur.eat_keyword("label") {
                loop {
                    labels.insert(Sym::new(&cur.word("proposition")?));
                    if !cur.eat(',') {
                        break;
                    }
                }
            }
            cur.punct(';')?;
            states.push((Sym::new(&s), labels));
        } else if cur.eat_keyword("trans") {
            let line = line_of(&cur);
            let s = Sym::new(&cur.word("source state")?);
            let a = Sym::new(&cur.word("action")?);
            cur.punct(':')?;
            if !seen.insert((s, a)) {
                return Err(Error::Model(format!("line {line}: duplicate action {a} at state {s}")));
            }
            let outcomes = cur.outcome_list()?;
            let dist = Distribution::new(outcomes.into_iter().map(|(u, p)| (Sym::new(&u), p)).collect())
                .map_err(|e| at_line(line, e))?;
            trans.push((line, s, a, dist));
        } else {
            return cur.error("expected 'state' or 'trans'");
        }
    }
    let declared: BTreeSet<Sym> = states.iter().map(|(s, _)| *s).collect();
    for (line, s, _, d) in &trans {
        for u in std::iter::once(*s).chain(d.outcomes().iter().map(|&(u, _)| u)) {
            if !declared.contains(&u) {
                return Err(at_line(*line, Error::Model(format!("unknown state {u}"))));
            }
        }
    }
    Rplts::new(states, trans.into_iter().map(|(_, s, a, d)| (s, a, d)).collect())
}
