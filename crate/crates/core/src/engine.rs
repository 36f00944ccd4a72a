//! End-to-end query evaluation: expand, factor, assemble, solve.

use crate::eqsolve::{assemble, format_system, solve, Assembly, Solution, SolverConfig};
use crate::error::Result;
use crate::explgen::{ExplGrammar, Goal};
use crate::fed::{to_dot, FedId, FedLimits, FedStore, GoalRef, Op, VarKey};

#[derive(Clone, Copy, Debug, Default)]
pub struct EngineConfig {
    pub solver: SolverConfig,
    pub limits: FedLimits,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub productions: usize,
    pub fed_nodes: usize,
    pub merges: usize,
    pub vars: usize,
}

/// Everything computed for one query, kept for dumps and cross-checks.
pub struct Analysis {
    pub grammar: ExplGrammar,
    pub store: FedStore,
    pub assembly: Assembly,
    pub solution: Solution,
    /// The query's goals, at the base instance.
    pub goals: Vec<Goal>,
    /// Diagram of the whole query (the combination of its goals).
    pub root: FedId,
    pub probability: f64,
}

/// Probability that the combination under `op` of `goals` (all at the base
/// instance) has an explanation.
pub fn analyze(mut grammar: ExplGrammar, goals: &[Goal], op: Op, cfg: &EngineConfig) -> Result<Analysis> {
    let mut store = FedStore::new(cfg.limits);
    store.saturate(&mut grammar, goals)?;
    let (root, starts) = if let [g] = goals {
        (store.goal_fed(*g).expect("saturated"), vec![VarKey::Goal(*g)])
    } else {
        let unit = match op {
            Op::And => FedId::TT,
            Op::Or => FedId::FF,
        };
        let mut root = unit;
        for g in goals {
            let f = store.goal_fed(*g).expect("saturated");
            root = store.apply(op, root, f)?;
        }
        store.saturate_root(&mut grammar, root)?;
        (root, store.keys_of(root))
    };
    let mut assembly = assemble(&store, &mut grammar, &starts)?;
    let root_expr = assembly.poly_of(&store, &mut grammar, root)?;
    let solution = solve(&assembly.system, &cfg.solver)?;
    let probability = assembly.system.eval(root_expr, &solution.values).clamp(0.0, 1.0);
    Ok(Analysis {
        grammar,
        store,
        assembly,
        solution,
        goals: goals.to_vec(),
        root,
        probability,
    })
}

impl Analysis {
    pub fn counts(&self) -> Counts {
        Counts {
            productions: self.grammar.production_count(),
            fed_nodes: self.store.node_count(),
            merges: self.store.merge_count(),
            vars: self.assembly.system.var_count(),
        }
    }

    /// Solved value of a goal's variable.
    pub fn value_of(&self, g: GoalRef) -> Option<f64> {
        self.assembly
            .var_of(self.store.var_key(g))
            .map(|v| self.solution.values[v])
    }

    pub fn grammar_text(&self) -> String {
        self.grammar.dcg_text()
    }

    pub fn equations_text(&self) -> String {
        format_system(&self.assembly.system)
    }

    /// One DOT cluster per equation variable, titled `expl(goal,H)`, in
    /// variable order.
    pub fn feds_dot(&mut self) -> Result<String> {
        let roots: Vec<(String, FedId)> = self
            .assembly
            .vars
            .iter()
            .map(|&g| {
                (
                    format!("expl({},H)", self.store.var_sym(g)),
                    self.store.fed_of(g).expect("assembled goal has a diagram"),
                )
            })
            .collect();
        to_dot(&self.store, &mut self.grammar, &roots)
    }
}
