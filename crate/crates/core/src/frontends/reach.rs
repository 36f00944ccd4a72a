use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::explgen::{BodySym, Goal, GoalProvider, Instance, Production};
use crate::model::{Distribution, Dtmc};
use crate::symbol::{atom, Sym};

/// Branch token for one step of a chain.
pub fn next_token() -> Sym {
    Sym::new("next")
}

/// Goals `reach(s,t)`: one production per successor `u` of `s` that can
/// still reach `t`, `[msw(t(s),H,u)], expl(reach(u,t),[next|H])`, plus the
/// empty production when `s = t`.
pub struct ReachProvider {
    dtmc: Arc<Dtmc>,
    goals: HashMap<Goal, (usize, usize)>,
    processes: HashMap<Sym, usize>,
    can_reach: HashMap<usize, Vec<bool>>,
}

impl ReachProvider {
    pub fn new(dtmc: Arc<Dtmc>) -> ReachProvider {
        let processes = dtmc
            .states()
            .iter()
            .enumerate()
            .map(|(i, &s)| (Dtmc::process(s), i))
            .collect();
        ReachProvider {
            dtmc,
            goals: HashMap::new(),
            processes,
            can_reach: HashMap::new(),
        }
    }

    /// The goal `reach(from,to)`; registers it for expansion.
    pub fn goal(&mut self, from: Sym, to: Sym) -> Result<Goal> {
        let s = self.dtmc.require(from)?;
        let t = self.dtmc.require(to)?;
        Ok(self.goal_at(s, t))
    }

    fn goal_at(&mut self, s: usize, t: usize) -> Goal {
        let states = self.dtmc.states();
        let g = Goal::new(&format!(
            "reach({},{})",
            atom(states[s].as_str()),
            atom(states[t].as_str())
        ));
        self.goals.insert(g, (s, t));
        g
    }
}

impl GoalProvider for ReachProvider {
    fn expand(&mut self, goal: Goal) -> Result<Vec<Production>> {
        let &(s, t) = self.goals.get(&goal).ok_or_else(|| Error::Expansion {
            goal: goal.to_string(),
            msg: "not a reachability goal of this chain".into(),
        })?;
        let dtmc = self.dtmc.clone();
        let reach = self.can_reach.entry(t).or_insert_with(|| dtmc.can_reach(&[t])).clone();
        // reaching the target ends the derivation; continuing would only
        // produce supersets of the empty explanation
        if s == t {
            return Ok(vec![Production::new(goal, Vec::new())]);
        }
        let mut out = Vec::new();
        if let Some(dist) = dtmc.switch_at(s) {
            let process = Dtmc::process(dtmc.states()[s]);
            let next = Instance::base().child(next_token());
            for &(u, p) in dist.outcomes() {
                let ui = dtmc.index_of(u).expect("validated successor");
                if p == 0.0 || !reach[ui] {
                    continue;
                }
                let sub = self.goal_at(ui, t);
                out.push(Production::new(
                    goal,
                    vec![
                        BodySym::msw(process, Instance::base(), u),
                        BodySym::expl(sub, next.clone()),
                    ],
                ));
            }
        }
        Ok(out)
    }

    fn distribution(&self, process: Sym) -> Option<Distribution> {
        let &i = self.processes.get(&process)?;
        self.dtmc.switch_at(i).cloned()
    }
}
