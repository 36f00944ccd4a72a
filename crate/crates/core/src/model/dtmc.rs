use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::dist::Distribution;
use super::lexer::Cursor;
use crate::error::{Error, Result};
use crate::symbol::Sym;

/// Discrete-time Markov chain. States without a switch are absorbing.
#[derive(Clone, Debug, PartialEq)]
pub struct Dtmc {
    states: Vec<Sym>,
    index: HashMap<Sym, usize>,
    switches: Vec<Option<Distribution>>,
    labels: Vec<BTreeSet<Sym>>,
}

impl Dtmc {
    /// Builds a chain from declared states (with labels) and per-state
    /// successor distributions.
    pub fn new(states: Vec<(Sym, BTreeSet<Sym>)>, transitions: Vec<(Sym, Distribution)>) -> Result<Dtmc> {
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
        let mut switches = vec![None; names.len()];
        for (s, dist) in transitions {
            let Some(&i) = index.get(&s) else {
                return Err(Error::Model(format!("unknown state {s}")));
            };
            for &(u, _) in dist.outcomes() {
                if !index.contains_key(&u) {
                    return Err(Error::Model(format!("unknown state {u}")));
                }
            }
            if switches[i].is_some() {
                return Err(Error::Model(format!("duplicate transitions for {s}")));
            }
            switches[i] = Some(dist);
        }
        Ok(Dtmc {
            states: names,
            index,
            switches,
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

    pub fn switch(&self, s: Sym) -> Option<&Distribution> {
        self.index_of(s).and_then(|i| self.switches[i].as_ref())
    }

    pub fn switch_at(&self, i: usize) -> Option<&Distribution> {
        self.switches[i].as_ref()
    }

    pub fn labels(&self, s: Sym) -> Option<&BTreeSet<Sym>> {
        self.index_of(s).map(|i| &self.labels[i])
    }

    pub fn labels_at(&self, i: usize) -> &BTreeSet<Sym> {
        &self.labels[i]
    }

    pub fn has_label(&self, s: Sym, p: Sym) -> bool {
        self.labels(s).is_some_and(|l| l.contains(&p))
    }

    /// Every proposition used anywhere in the chain.
    pub fn alphabet(&self) -> BTreeSet<Sym> {
        self.labels.iter().flatten().copied().collect()
    }

    /// Random process name of the switch leaving `s`.
    pub fn process(s: Sym) -> Sym {
        Sym::new(&format!("t({})", crate::symbol::atom(s.as_str())))
    }

    /// States from which `target` is reachable (including `target`).
    pub fn can_reach(&self, targets: &[usize]) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for (i, sw) in self.switches.iter().enumerate() {
            if let Some(d) = sw {
                for &(u, p) in d.outcomes() {
                    if p > 0.0 {
                        preds[self.index[&u]].push(i);
                    }
                }
            }
        }
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.to_vec();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &p in &preds[v] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
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
            if let Some(d) = &self.switches[i] {
                let _ = writeln!(out, "trans {s}: {d};");
            }
        }
        out
    }
}

/// Parses the line-oriented chain format:
///
/// ```text
/// state <id> [label <p1>,<p2>,...];
/// trans <id>: <id> <prob>, <id> <prob>, ... ;
/// ```
pub fn parse_dtmc(text: &str) -> Result<Dtmc> {
    let mut cur = Cursor::new(text)?;
    let mut states = Vec::new();
    let mut trans = Vec::new();
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
            let s = cur.word("source state")?;
            let line = line_of(&cur);
            cur.punct(':')?;
            let outcomes = cur.outcome_list()?;
            let dist = Distribution::new(outcomes.into_iter().map(|(u, p)| (Sym::new(&u), p)).collect())
                .map_err(|e| at_line(line, e))?;
            trans.push((line, Sym::new(&s), dist));
        } else {
            return cur.error("expected 'state' or 'trans'");
        }
    }
    let declared: BTreeSet<Sym> = states.iter().map(|(s, _)| *s).collect();
    for (line, s, d) in &trans {
        for u in std::iter::once(*s).chain(d.outcomes().iter().map(|&(u, _)| u)) {
            if !declared.contains(&u) {
                return Err(at_line(*line, Error::Model(format!("unknown state {u}"))));
            }
        }
    }
    Dtmc::new(states, trans.into_iter().map(|(_, s, d)| (s, d)).collect())
}

pub(crate) fn line_of(cur: &Cursor) -> usize {
    match cur.error::<()>("") {
        Err(Error::Syntax { line, .. }) => line,
        _ => 0,
    }
}

pub(crate) fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Model(m) => Error::Model(format!("line {line}: {m}")),
        other => other,
    }
}
