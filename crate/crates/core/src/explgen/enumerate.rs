//! Brute-force explanation oracles. These walk the grammar directly and
//! never touch diagrams or equation systems.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::grammar::{BodySym, ExplGrammar, Goal};
use super::instance::Instance;
use crate::error::Result;
use crate::symbol::Sym;

/// A ground random-switch valuation `msw(r, h, v)` at an absolute instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub process: Sym,
    pub at: Instance,
    pub outcome: Sym,
}

#[derive(Clone, Debug)]
pub struct Explanation {
    pub atoms: BTreeSet<Atom>,
    pub prob: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub explanations: Vec<Explanation>,
    /// Some derivation was cut by the step bound or the work cap.
    pub truncated: bool,
}

impl Enumeration {
    pub fn total_probability(&self) -> f64 {
        self.explanations.iter().map(|e| e.prob).sum()
    }

    pub fn contains(&self, atoms: &BTreeSet<Atom>) -> bool {
        self.explanations.iter().any(|e| &e.atoms == atoms)
    }
}

/// Derivation visits before the enumerator gives up and reports truncation.
pub const ENUMERATION_WORK_CAP: usize = 2_000_000;

#[derive(Clone)]
enum Item {
    Msw(Atom),
    Expl(Goal, Instance),
}

struct Walker<'g> {
    grammar: &'g mut ExplGrammar,
    max_steps: usize,
    found: BTreeMap<BTreeSet<Atom>, f64>,
    truncated: bool,
    work: usize,
}

impl Walker<'_> {
    fn walk(&mut self, mut pending: Vec<Item>, mut atoms: BTreeMap<(Sym, Instance), Sym>, steps: usize) -> Result<()> {
        self.work += 1;
        if self.work > ENUMERATION_WORK_CAP {
            self.truncated = true;
            return Ok(());
        }
        // `pending` is a stack: the leftmost symbol is last.
        while let Some(item) = pending.pop() {
            match item {
                Item::Msw(a) => match atoms.get(&(a.process, a.at.clone())) {
                    Some(&v) if v != a.outcome => return Ok(()),
                    Some(_) => {}
                    None => {
                        atoms.insert((a.process, a.at), a.outcome);
                    }
                },
                Item::Expl(goal, at) => {
                    let group = self.grammar.expand(goal)?;
                    for p in group.iter() {
                        if steps + 1 > self.max_steps {
                            self.truncated = true;
                            continue;
                        }
                        let mut next = pending.clone();
                        for b in p.body.iter().rev() {
                            next.push(match b {
                                BodySym::Msw {
                                    process,
                                    at: loc,
                                    outcome,
                                } => Item::Msw(Atom {
                                    process: *process,
                                    at: at.join(&loc.path),
                                    outcome: *outcome,
                                }),
                                BodySym::Expl { goal, at: loc } => Item::Expl(*goal, at.join(&loc.path)),
                            });
                        }
                        self.walk(next, atoms.clone(), steps + 1)?;
                    }
                    return Ok(());
                }
            }
        }
        let set: BTreeSet<Atom> = atoms
            .into_iter()
            .map(|((process, at), outcome)| Atom { process, at, outcome })
            .collect();
        if !self.found.contains_key(&set) {
            let mut prob = 1.0;
            for a in &set {
                prob *= self.grammar.distribution(a.process)?.prob(a.outcome);
            }
            self.found.insert(set, prob);
        }
        Ok(())
    }
}

/// Every consistent explanation derivable from `start` (at the base
/// instance) using at most `max_steps` production applications. Identical
/// atom sets are reported once.
pub fn enumerate_explanations(grammar: &mut ExplGrammar, start: Goal, max_steps: usize) -> Result<Enumeration> {
    let mut w = Walker {
        grammar,
        max_steps,
        found: BTreeMap::new(),
        truncated: false,
        work: 0,
    };
    w.walk(vec![Item::Expl(start, Instance::base())], BTreeMap::new(), 0)?;
    Ok(Enumeration {
        explanations: w
            .found
            .into_iter()
            .map(|(atoms, prob)| Explanation { atoms, prob })
            .collect(),
        truncated: w.truncated,
    })
}

/// Total string probability over all derivations of `start` that use at
/// most `max_steps` production applications, computed by dynamic
/// programming on derivation length. Agrees with the enumerator on grammars
/// whose strings never repeat or contradict a switch instance (the chain
/// front-ends), and stays tractable where materializing explanations does not.
pub fn bounded_mass(grammar: &mut ExplGrammar, start: Goal, max_steps: usize) -> Result<f64> {
    grammar.close(&[start])?;
    let goals: Vec<Goal> = grammar.goals().to_vec();
    let index: HashMap<Goal, usize> = goals.iter().enumerate().map(|(i, &g)| (g, i)).collect();

    // (weight, children) per production, per goal
    let mut shapes: Vec<Vec<(f64, Vec<usize>)>> = Vec::with_capacity(goals.len());
    for &g in &goals {
        let group = grammar.group(g).expect("closed grammar").clone();
        let mut prods = Vec::new();
        for p in group.iter() {
            let mut w = 1.0;
            let mut kids = Vec::new();
            for b in &p.body {
                match b {
                    BodySym::Msw { process, outcome, .. } => w *= grammar.distribution(*process)?.prob(*outcome),
                    BodySym::Expl { goal, .. } => kids.push(index[goal]),
                }
            }
            prods.push((w, kids));
        }
        shapes.push(prods);
    }

    // exact[g][j]: mass of derivations of g with exactly j steps
    let n = max_steps;
    let mut exact = vec![vec![0.0f64; n + 1]; goals.len()];
    for j in 1..=n {
        for (gi, prods) in shapes.iter().enumerate() {
            let mut total = 0.0;
            for (w, kids) in prods {
                if *w == 0.0 {
                    continue;
                }
                // distribute j - 1 steps among the children
                let mut conv = vec![0.0f64; j];
                conv[0] = 1.0;
                for &k in kids {
                    let mut next = vec![0.0f64; j];
                    for (a, &ca) in conv.iter().enumerate() {
                        if ca == 0.0 {
                            continue;
                        }
                        for b in 1..j - a {
                            next[a + b] += ca * exact[k][b];
                        }
                    }
                    conv = next;
                }
                total += w * conv[j - 1];
            }
            exact[gi][j] = total;
        }
    }
    Ok(exact[index[&start]].iter().sum())
}
