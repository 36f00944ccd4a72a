use std::fmt;

use super::grammar::{BodySym, ExplGrammar, Production};
use crate::symbol::is_ground_spelling;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub production: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.production, self.reason)
    }
}

/// Checks every expanded production for temporal well-formedness: each body
/// instance extends the head's base, and all non-instance arguments are
/// ground. An empty report means the grammar is well formed.
pub fn validate_temporal(grammar: &ExplGrammar) -> Vec<Violation> {
    let mut report = Vec::new();
    for &g in grammar.goals() {
        if let Some(group) = grammar.group(g) {
            for p in group.iter() {
                check_production(p, &mut report);
            }
        }
    }
    report
}

pub fn check_production(p: &Production, report: &mut Vec<Violation>) {
    let mut flag = |reason: String| {
        report.push(Violation {
            production: p.to_string(),
            reason,
        })
    };
    if !is_ground_spelling(p.head.as_str()) {
        flag(format!("head {} is not ground", p.head));
    }
    for b in &p.body {
        let loc = b.loc();
        if loc.var != p.var {
            flag(format!("instance {loc} does not extend the head instance {}", p.var));
        }
        if let Some(t) = loc.path.tokens().iter().find(|t| !is_ground_spelling(t.as_str())) {
            flag(format!("instance token {t} is not ground"));
        }
        match b {
            BodySym::Msw { process, outcome, .. } => {
                if !is_ground_spelling(process.as_str()) {
                    flag(format!("random process {process} is not ground"));
                }
                if !is_ground_spelling(outcome.as_str()) {
                    flag(format!("outcome {outcome} is not ground"));
                }
            }
            BodySym::Expl { goal, .. } => {
                if !is_ground_spelling(goal.as_str()) {
                    flag(format!("goal {goal} is not ground"));
                }
            }
        }
    }
}
