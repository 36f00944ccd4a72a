use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::instance::Instance;
use crate::error::{Error, Result};
use crate::model::Distribution;
use crate::symbol::Sym;

/// An abstracted derived process: a ground term with its instance erased.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Goal(Sym);

impl Goal {
    pub fn new(spelling: &str) -> Goal {
        Goal(Sym::new(spelling))
    }

    pub fn sym(self) -> Sym {
        self.0
    }

    pub fn as_str(self) -> &'static str {
        self.0.as_str()
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.as_str())
    }
}

impl fmt::Debug for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Goal({})", self.0.as_str())
    }
}

/// Which extremal solution a goal's equation takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FixKind {
    Lfp,
    Gfp,
}

/// An instance written relative to a named base variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loc {
    pub var: Sym,
    pub path: Instance,
}

impl Loc {
    pub fn base_var() -> Sym {
        Sym::new("H")
    }

    pub fn at(path: Instance) -> Loc {
        Loc {
            var: Loc::base_var(),
            path,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_base() {
            return write!(f, "{}", self.var);
        }
        f.write_str("[")?;
        // innermost token first, like [T,SW|H]
        for (i, t) in self.path.tokens().iter().rev().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "|{}]", self.var)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BodySym {
    Msw { process: Sym, at: Loc, outcome: Sym },
    Expl { goal: Goal, at: Loc },
}

impl BodySym {
    pub fn msw(process: Sym, at: Instance, outcome: Sym) -> BodySym {
        BodySym::Msw {
            process,
            at: Loc::at(at),
            outcome,
        }
    }

    pub fn expl(goal: Goal, at: Instance) -> BodySym {
        BodySym::Expl { goal, at: Loc::at(at) }
    }

    pub fn loc(&self) -> &Loc {
        match self {
            BodySym::Msw { at, .. } | BodySym::Expl { at, .. } => at,
        }
    }
}

impl fmt::Display for BodySym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySym::Msw { process, at, outcome } => write!(f, "[msw({process},{at},{outcome})]"),
            BodySym::Expl { goal, at } => write!(f, "expl({goal},{at})"),
        }
    }
}

/// `expl(head, H) --> body.`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    pub head: Goal,
    pub var: Sym,
    pub body: Vec<BodySym>,
}

impl Production {
    pub fn new(head: Goal, body: Vec<BodySym>) -> Production {
        Production {
            head,
            var: Loc::base_var(),
            body,
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expl({},{}) --> ", self.head, self.var)?;
        if self.body.is_empty() {
            f.write_str("[]")?;
        }
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

/// Supplies productions for goals on demand. Front-ends implement this.
pub trait GoalProvider {
    /// All productions whose head is `goal`.
    fn expand(&mut self, goal: Goal) -> Result<Vec<Production>>;

    fn distribution(&self, process: Sym) -> Option<Distribution>;

    fn kind(&self, _goal: Goal) -> FixKind {
        FixKind::Lfp
    }
}

/// A provider backed by an explicit production table.
#[derive(Default, Clone)]
pub struct TableProvider {
    pub productions: HashMap<Goal, Vec<Production>>,
    pub distributions: HashMap<Sym, Distribution>,
    pub kinds: HashMap<Goal, FixKind>,
}

impl TableProvider {
    pub fn add(&mut self, p: Production) {
        self.productions.entry(p.head).or_default().push(p);
    }

    pub fn declare(&mut self, goal: Goal) {
        self.productions.entry(goal).or_default();
    }
}

impl GoalProvider for TableProvider {
    fn expand(&mut self, goal: Goal) -> Result<Vec<Production>> {
        self.productions.get(&goal).cloned().ok_or_else(|| Error::Expansion {
            goal: goal.to_string(),
            msg: "no such goal".into(),
        })
    }

    fn distribution(&self, process: Sym) -> Option<Distribution> {
        self.distributions.get(&process).cloned()
    }

    fn kind(&self, goal: Goal) -> FixKind {
        self.kinds.get(&goal).copied().unwrap_or(FixKind::Lfp)
    }
}

/// Explanation generator: production groups keyed by goal, expanded lazily
/// and memoized.
pub struct ExplGrammar {
    provider: Box<dyn GoalProvider>,
    groups: HashMap<Goal, Arc<[Production]>>,
    order: Vec<Goal>,
    dists: HashMap<Sym, Distribution>,
}

impl ExplGrammar {
    pub fn new(provider: impl GoalProvider + 'static) -> ExplGrammar {
        ExplGrammar::from_boxed(Box::new(provider))
    }

    pub fn from_boxed(provider: Box<dyn GoalProvider>) -> ExplGrammar {
        ExplGrammar {
            provider,
            groups: HashMap::new(),
            order: Vec::new(),
            dists: HashMap::new(),
        }
    }

    /// Productions headed by `goal`; the same group is returned on every call.
    pub fn expand(&mut self, goal: Goal) -> Result<Arc<[Production]>> {
        if let Some(g) = self.groups.get(&goal) {
            return Ok(g.clone());
        }
        let prods = self.provider.expand(goal).map_err(|e| match e {
            e @ Error::Expansion { .. } => e,
            other => Error::Expansion {
                goal: goal.to_string(),
                msg: other.to_string(),
            },
        })?;
        if let Some(p) = prods.iter().find(|p| p.head != goal) {
            return Err(Error::Expansion {
                goal: goal.to_string(),
                msg: format!("provider returned production for {}", p.head),
            });
        }
        let group: Arc<[Production]> = prods.into();
        self.groups.insert(goal, group.clone());
        self.order.push(goal);
        Ok(group)
    }

    pub fn distribution(&mut self, process: Sym) -> Result<&Distribution> {
        if !self.dists.contains_key(&process) {
            let d = self
                .provider
                .distribution(process)
                .ok_or_else(|| Error::Model(format!("unknown random process {process}")))?;
            self.dists.insert(process, d);
        }
        Ok(&self.dists[&process])
    }

    pub fn kind(&self, goal: Goal) -> FixKind {
        self.provider.kind(goal)
    }

    /// Expands every goal reachable from `start`.
    pub fn close(&mut self, start: &[Goal]) -> Result<()> {
        let mut seen: HashSet<Goal> = start.iter().copied().collect();
        let mut queue: VecDeque<Goal> = start.iter().copied().collect();
        while let Some(g) = queue.pop_front() {
            for p in self.expand(g)?.iter() {
                for b in &p.body {
                    match b {
                        BodySym::Expl { goal, .. } => {
                            if seen.insert(*goal) {
                                queue.push_back(*goal);
                            }
                        }
                        BodySym::Msw { process, .. } => {
                            self.distribution(*process)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Expanded goals in discovery order.
    pub fn goals(&self) -> &[Goal] {
        &self.order
    }

    pub fn group(&self, goal: Goal) -> Option<&Arc<[Production]>> {
        self.groups.get(&goal)
    }

    pub fn production_count(&self) -> usize {
        self.groups.values().map(|g| g.len()).sum()
    }

    /// All expanded productions, one per line, in discovery order.
    pub fn dcg_text(&self) -> String {
        let mut out = String::new();
        for g in &self.order {
            for p in self.groups[g].iter() {
                out.push_str(&p.to_string());
                out.push('\n');
            }
        }
        out
    }
}
