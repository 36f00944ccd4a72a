use std::collections::{HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::system::{ExprId, PolySystem};
use crate::error::{Error, Result};
use crate::explgen::{ExplGrammar, FixKind};
use crate::fed::{FedId, FedNode, FedStore, GoalRef, VarKey};

/// The equation system of a saturated store plus the maps between goals,
/// variables, and diagram polynomials.
pub struct Assembly {
    pub system: PolySystem,
    pub vars: Vec<VarKey>,
    var_index: HashMap<VarKey, usize>,
    var_exprs: Vec<ExprId>,
    fed_exprs: HashMap<FedId, ExprId>,
}

impl Assembly {
    pub fn var_of(&self, k: VarKey) -> Option<usize> {
        self.var_index.get(&k).copied()
    }

    fn var_expr(&self, store: &FedStore, g: GoalRef) -> Result<ExprId> {
        let v = *self
            .var_index
            .get(&store.var_key(g))
            .ok_or_else(|| Error::Model(format!("no variable for {}", store.goal_sym(g))))?;
        Ok(self.var_exprs[v])
    }

    /// Polynomial of a diagram: ff ↦ 0, tt ↦ 1, msw ↦ Σ p·P(child),
    /// expl ↦ x·P(hi) + (1 − x)·P(lo), joint ↦ Σ_T q(T)·Σ_{S⊆T} ±P(kid_S)
    /// with q(T) the conjunction variable of the goal subset T. Memoized per
    /// node. Every goal the diagram references must already have a
    /// variable.
    pub fn poly_of(&mut self, store: &FedStore, grammar: &mut ExplGrammar, root: FedId) -> Result<ExprId> {
        for id in store.reachable(root) {
            if self.fed_exprs.contains_key(&id) {
                continue;
            }
            let sys = &mut self.system;
            let e = match store.node(id) {
                FedNode::Tt => sys.constant(1.0),
                FedNode::Ff => sys.constant(0.0),
                FedNode::Msw { process, alts, .. } => {
                    let dist = grammar.distribution(*process)?;
                    let terms = dist
                        .outcomes()
                        .iter()
                        .zip(alts)
                        .map(|((_, p), c)| (*p, self.fed_exprs[c]))
                        .collect();
                    sys.sum(terms)
                }
                FedNode::Expl { goal, lo, hi, .. } => {
                    let x = self.var_expr(store, *goal)?;
                    let sys = &mut self.system;
                    let (lo, hi) = (self.fed_exprs[lo], self.fed_exprs[hi]);
                    let on = sys.prod(vec![x, hi]);
                    if sys.const_value(lo) == Some(0.0) {
                        on
                    } else {
                        let nx = sys.complement(x);
                        let off = sys.prod(vec![nx, lo]);
                        sys.sum(vec![(1.0, on), (1.0, off)])
                    }
                }
                FedNode::Joint {
                    goals, joints, kids, ..
                } => {
                    let k = goals.len();
                    let mut q = vec![None; 1 << k];
                    let mut rest = joints.iter();
                    for (t, slot) in q.iter_mut().enumerate().skip(1) {
                        let g = if t.count_ones() == 1 {
                            goals[t.trailing_zeros() as usize]
                        } else {
                            *rest.next().expect("one conjunction per subset")
                        };
                        *slot = Some(self.var_expr(store, g)?);
                    }
                    let sys = &mut self.system;
                    let mut terms = Vec::new();
                    #[allow(clippy::needless_range_loop)]
                    for t in 0..1usize << k {
                        let mut sub = t;
                        loop {
                            let sign = if (t ^ sub).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                            let kid = self.fed_exprs[&kids[sub]];
                            let e = match q[t] {
                                Some(qt) => sys.prod(vec![qt, kid]),
                                None => kid,
                            };
                            terms.push((sign, e));
                            if sub == 0 {
                                break;
                            }
                            sub = (sub - 1) & t;
                        }
                    }
                    sys.sum(terms)
                }
            };
            self.fed_exprs.insert(id, e);
        }
        Ok(self.fed_exprs[&root])
    }
}

/// One variable per goal or merge reachable from `starts` through expl
/// nodes, numbered in discovery order, each with the equation of its
/// diagram. Merges take the fixpoint kind of the goals they are mutually
/// recursive with (least if none).
pub fn assemble(store: &FedStore, grammar: &mut ExplGrammar, starts: &[VarKey]) -> Result<Assembly> {
    let mut asm = Assembly {
        system: PolySystem::new(),
        vars: Vec::new(),
        var_index: HashMap::new(),
        var_exprs: Vec::new(),
        fed_exprs: HashMap::new(),
    };
    let mut queue: VecDeque<VarKey> = VecDeque::new();
    let add = |asm: &mut Assembly, g: VarKey, queue: &mut VecDeque<VarKey>| {
        if asm.var_index.contains_key(&g) {
            return;
        }
        let kind = match g {
            VarKey::Goal(goal) => grammar.kind(goal),
            VarKey::Merge(_) => FixKind::Lfp,
        };
        let v = asm
            .system
            .add_var(format!("x{}", asm.vars.len()), store.var_sym(g).to_string(), kind);
        asm.vars.push(g);
        asm.var_index.insert(g, v);
        let e = asm.system.var(v);
        asm.var_exprs.push(e);
        queue.push_back(g);
    };
    for &g in starts {
        add(&mut asm, g, &mut queue);
    }
    let mut feds = Vec::new();
    while let Some(g) = queue.pop_front() {
        let fed = store
            .fed_of(g)
            .ok_or_else(|| Error::Model(format!("no diagram built for {}", store.var_sym(g))))?;
        for r in store.keys_of(fed) {
            add(&mut asm, r, &mut queue);
        }
        feds.push((g, fed));
    }
    for (g, fed) in feds {
        let e = asm.poly_of(store, grammar, fed)?;
        asm.system.set_equation(asm.var_index[&g], e);
    }
    propagate_merge_kinds(&mut asm);
    Ok(asm)
}

fn propagate_merge_kinds(asm: &mut Assembly) {
    let sys = &asm.system;
    let n = sys.var_count();
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..n).map(|v| graph.add_node(v)).collect();
    for v in 0..n {
        for d in sys.vars_of(sys.equation(v).expect("every variable has an equation")) {
            graph.add_edge(nodes[v], nodes[d], ());
        }
    }
    let mut gfp = Vec::new();
    for scc in tarjan_scc(&graph) {
        let vars: Vec<usize> = scc.iter().map(|&i| graph[i]).collect();
        if vars.iter().any(|&v| sys.vars()[v].kind == FixKind::Gfp) {
            gfp.extend(vars.into_iter().filter(|&v| matches!(asm.vars[v], VarKey::Merge(_))));
        }
    }
    for v in gfp {
        asm.system.set_kind(v, FixKind::Gfp);
    }
}
