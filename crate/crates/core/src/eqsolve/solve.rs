use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::system::{Expr, ExprId, PolySystem};
use crate::error::{Error, Result};
use crate::explgen::FixKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Plain fixpoint iteration everywhere.
    Kleene,
    /// Newton's method on least-fixpoint components whose equations have
    /// nonnegative coefficients and no complements; iteration elsewhere.
    Newton,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Per strongly connected component.
    pub max_iters: usize,
    pub method: Method,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-10,
            max_iters: 1_000_000,
            method: Method::Newton,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Solution {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// max over variables of |x − P(x)| at the returned point
    pub residual: f64,
    pub components: usize,
    /// Non-monotone steps and other diagnostics.
    pub warnings: Vec<String>,
}

/// Largest dense Jacobian (expression nodes × component size) Newton builds.
const NEWTON_WORK_LIMIT: usize = 50_000_000;
const NEWTON_MAX_STEPS: usize = 500;
const MONOTONE_SLACK: f64 = 1e-12;

struct Component<'a> {
    sys: &'a PolySystem,
    vars: Vec<usize>,
    roots: Vec<ExprId>,
    order: Vec<ExprId>,
    kind: FixKind,
}

impl Component<'_> {
    fn apply(&self, x: &[f64], scratch: &mut [f64]) -> Vec<f64> {
        self.sys.eval_into(&self.order, x, scratch);
        self.roots.iter().map(|r| scratch[r.index()]).collect()
    }

    fn newton_eligible(&self) -> bool {
        self.order.iter().all(|&id| match self.sys.expr(id) {
            Expr::Const(c) => *c >= 0.0,
            Expr::Sum(ts) => ts.iter().all(|t| t.0 >= 0.0),
            Expr::Complement(_) => false,
            _ => true,
        })
    }
}

/// Solves every component in dependency order. Least-fixpoint variables
/// start at 0 and greatest-fixpoint variables at 1; values are clamped to
/// [0,1]. A component must not mix the two kinds.
pub fn solve(sys: &PolySystem, cfg: &SolverConfig) -> Result<Solution> {
    if cfg.epsilon.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Formula("epsilon must be positive".into()));
    }
    let n = sys.var_count();
    let mut graph = DiGraph::<usize, ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|v| graph.add_node(v)).collect();
    for v in 0..n {
        let eq = sys
            .equation(v)
            .ok_or_else(|| Error::Formula(format!("variable {} has no equation", sys.vars()[v].name)))?;
        for d in sys.vars_of(eq) {
            graph.add_edge(nodes[v], nodes[d], ());
        }
    }

    let mut sol = Solution {
        values: vec![0.0; n],
        ..Solution::default()
    };
    let mut scratch = vec![0.0; sys.expr_count()];
    // tarjan_scc yields components with their dependencies first
    for scc in tarjan_scc(&graph) {
        let vars: Vec<usize> = scc.iter().map(|&i| graph[i]).collect();
        let kind = sys.vars()[vars[0]].kind;
        if let Some(&other) = vars.iter().find(|&&v| sys.vars()[v].kind != kind) {
            return Err(Error::Alternation(format!(
                "{} and {} are mutually dependent but take different fixpoints",
                sys.vars()[vars[0]].meaning,
                sys.vars()[other].meaning
            )));
        }
        let roots: Vec<ExprId> = vars.iter().map(|&v| sys.equation(v).unwrap()).collect();
        let comp = Component {
            sys,
            order: sys.closure(&roots),
            vars,
            roots,
            kind,
        };
        sol.components += 1;
        let cyclic = comp.vars.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if !cyclic {
            let v = comp.apply(&sol.values, &mut scratch)[0];
            sol.values[comp.vars[0]] = v.clamp(0.0, 1.0);
            continue;
        }
        let newton = cfg.method == Method::Newton
            && kind == FixKind::Lfp
            && comp.newton_eligible()
            && comp.order.len().saturating_mul(comp.vars.len()) <= NEWTON_WORK_LIMIT;
        if newton {
            solve_newton(&comp, cfg, &mut sol, &mut scratch)?;
        } else {
            let start = if kind == FixKind::Lfp { 0.0 } else { 1.0 };
            for &v in &comp.vars {
                sol.values[v] = start;
            }
            kleene(&comp, cfg, cfg.max_iters, &mut sol, &mut scratch)?;
        }
    }

    let all: Vec<ExprId> = (0..n).map(|v| sys.equation(v).unwrap()).collect();
    let order = sys.closure(&all);
    sys.eval_into(&order, &sol.values, &mut scratch);
    sol.residual = all
        .iter()
        .enumerate()
        .map(|(v, r)| (scratch[r.index()] - sol.values[v]).abs())
        .fold(0.0, f64::max);
    Ok(sol)
}

/// Iterates x ← P(x) on the component from the current values. Returns
/// whether the tolerance was met within `budget` steps; a miss with the full
/// budget is an error.
fn kleene(
    comp: &Component,
    cfg: &SolverConfig,
    budget: usize,
    sol: &mut Solution,
    scratch: &mut [f64],
) -> Result<bool> {
    let mut warned = false;
    let mut residual = f64::INFINITY;
    for _ in 0..budget {
        let next = comp.apply(&sol.values, scratch);
        sol.iterations += 1;
        residual = 0.0;
        for (&v, &y) in comp.vars.iter().zip(&next) {
            let y = y.clamp(0.0, 1.0);
            let x = sol.values[v];
            let wrong_way = match comp.kind {
                FixKind::Lfp => y < x - MONOTONE_SLACK,
                FixKind::Gfp => y > x + MONOTONE_SLACK,
            };
            if wrong_way && !warned {
                warned = true;
                let msg = format!("non-monotone step at {} ({x} -> {y})", comp.sys.vars()[v].meaning);
                log::warn!("{msg}");
                sol.warnings.push(msg);
            }
            residual = f64::max(residual, (y - x).abs());
            sol.values[v] = y;
        }
        if residual <= cfg.epsilon {
            return Ok(true);
        }
    }
    if budget < cfg.max_iters {
        return Ok(false);
    }
    Err(Error::NotConverged {
        iterations: sol.iterations,
        residual,
        last: sol.values.clone(),
    })
}

/// Decomposed Newton: Kleene steps first, as many as the component has
/// variables, so every variable with a positive least solution is already
/// positive; the rest are fixed at 0. Newton steps from below then converge
/// monotonically for monotone polynomial systems. Falls back to iteration
/// if the linear system becomes singular.
fn solve_newton(comp: &Component, cfg: &SolverConfig, sol: &mut Solution, scratch: &mut [f64]) -> Result<()> {
    for &v in &comp.vars {
        sol.values[v] = 0.0;
    }
    if kleene(comp, cfg, comp.vars.len().min(cfg.max_iters), sol, scratch)? {
        return Ok(());
    }
    let active: Vec<usize> = (0..comp.vars.len())
        .filter(|&i| sol.values[comp.vars[i]] > 0.0)
        .collect();
    if active.is_empty() {
        return Ok(());
    }
    let mut local = vec![usize::MAX; comp.sys.var_count()];
    for (k, &i) in active.iter().enumerate() {
        local[comp.vars[i]] = k;
    }
    let m = active.len();
    let mut grads: Vec<Vec<f64>> = vec![Vec::new(); comp.sys.expr_count()];
    for _ in 0..NEWTON_MAX_STEPS {
        comp.sys.eval_into(&comp.order, &sol.values, scratch);
        jacobian(comp, &local, m, scratch, &mut grads);
        sol.iterations += 1;
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut b = DVector::<f64>::zeros(m);
        let mut residual: f64 = 0.0;
        for (k, &i) in active.iter().enumerate() {
            let r = comp.roots[i];
            let px = scratch[r.index()];
            b[k] = px - sol.values[comp.vars[i]];
            residual = residual.max(b[k].abs());
            for (j, g) in grads[r.index()].iter().enumerate() {
                a[(k, j)] -= g;
            }
        }
        let Some(d) = a.lu().solve(&b) else {
            log::debug!("singular Newton system; continuing by iteration");
            break;
        };
        let mut step: f64 = 0.0;
        for (k, &i) in active.iter().enumerate() {
            let v = comp.vars[i];
            let y = (sol.values[v] + d[k]).clamp(0.0, 1.0);
            step = step.max((y - sol.values[v]).abs());
            if y < sol.values[v] - MONOTONE_SLACK {
                let msg = format!(
                    "non-monotone Newton step at {} ({} -> {y})",
                    comp.sys.vars()[v].meaning,
                    sol.values[v]
                );
                log::warn!("{msg}");
                sol.warnings.push(msg);
            }
            sol.values[v] = y;
        }
        if step.max(residual) <= cfg.epsilon {
            return Ok(());
        }
        if !step.is_finite() {
            break;
        }
    }
    let budget = cfg.max_iters.saturating_sub(comp.vars.len()).max(1);
    kleene(comp, cfg, budget, sol, scratch).map(|_| ())
}

/// Forward-mode derivatives of every expression in the component with
/// respect to the active variables.
fn jacobian(comp: &Component, local: &[usize], m: usize, vals: &[f64], grads: &mut [Vec<f64>]) {
    for &id in &comp.order {
        let mut g = vec![0.0; m];
        match comp.sys.expr(id) {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if local[*v] != usize::MAX {
                    g[local[*v]] = 1.0;
                }
            }
            Expr::Sum(ts) => {
                for &(c, e) in ts {
                    for (gi, ge) in g.iter_mut().zip(&grads[e.index()]) {
                        *gi += c * ge;
                    }
                }
            }
            Expr::Prod(fs) => {
                for (i, f) in fs.iter().enumerate() {
                    let others: f64 = fs
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, e)| vals[e.index()])
                        .product();
                    if others == 0.0 {
                        continue;
                    }
                    for (gi, ge) in g.iter_mut().zip(&grads[f.index()]) {
                        *gi += others * ge;
                    }
                }
            }
            Expr::Complement(e) => {
                for (gi, ge) in g.iter_mut().zip(&grads[e.index()]) {
                    *gi = -ge;
                }
            }
        }
        grads[id.index()] = g;
    }
}
