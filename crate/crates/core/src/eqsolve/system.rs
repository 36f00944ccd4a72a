use std::collections::BTreeSet;

use crate::explgen::FixKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(pub(crate) u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Polynomial expression node. Children always have smaller ids than their
/// parent, so increasing id order is a valid evaluation order.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    /// Σ coefficient·child
    Sum(Vec<(f64, ExprId)>),
    Prod(Vec<ExprId>),
    /// 1 − child
    Complement(ExprId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub name: String,
    /// What the variable stands for, e.g. the goal term.
    pub meaning: String,
    pub kind: FixKind,
}

/// One equation `var = expr` per variable, expressions shared as a DAG.
#[derive(Clone, Debug, Default)]
pub struct PolySystem {
    exprs: Vec<Expr>,
    vars: Vec<VarInfo>,
    eqs: Vec<Option<ExprId>>,
}

impl PolySystem {
    pub fn new() -> PolySystem {
        PolySystem::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, meaning: impl Into<String>, kind: FixKind) -> usize {
        self.vars.push(VarInfo {
            name: name.into(),
            meaning: meaning.into(),
            kind,
        });
        self.eqs.push(None);
        self.vars.len() - 1
    }

    pub fn set_equation(&mut self, var: usize, rhs: ExprId) {
        self.eqs[var] = Some(rhs);
    }

    pub fn set_kind(&mut self, var: usize, kind: FixKind) {
        self.vars[var].kind = kind;
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn equation(&self, var: usize) -> Option<ExprId> {
        self.eqs[var]
    }

    pub fn expr(&self, id: ExprId) -> &Expr {
        &self.exprs[id.index()]
    }

    pub fn expr_count(&self) -> usize {
        self.exprs.len()
    }

    fn push(&mut self, e: Expr) -> ExprId {
        self.exprs.push(e);
        ExprId(self.exprs.len() as u32 - 1)
    }

    pub fn constant(&mut self, c: f64) -> ExprId {
        self.push(Expr::Const(c))
    }

    pub fn var(&mut self, v: usize) -> ExprId {
        self.push(Expr::Var(v))
    }

    pub fn const_value(&self, id: ExprId) -> Option<f64> {
        match self.expr(id) {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Σ c·e, dropping zero terms and folding constant children into one
    /// trailing constant. Single nonconstant terms keep their coefficient.
    pub fn sum(&mut self, terms: Vec<(f64, ExprId)>) -> ExprId {
        let mut kept = Vec::new();
        let mut constant = 0.0;
        let mut has_constant = false;
        for (c, e) in terms {
            if c == 0.0 {
                continue;
            }
            match self.const_value(e) {
                Some(0.0) => {}
                Some(k) => {
                    constant += c * k;
                    has_constant = true;
                }
                None => kept.push((c, e)),
            }
        }
        if kept.is_empty() {
            return self.constant(constant);
        }
        if has_constant && constant != 0.0 {
            let k = self.constant(1.0);
            kept.push((constant, k));
        }
        self.push(Expr::Sum(kept))
    }

    /// Product, dropping unit factors; a zero factor gives the constant 0.
    pub fn prod(&mut self, factors: Vec<ExprId>) -> ExprId {
        let mut kept = Vec::new();
        let mut scale = 1.0;
        for f in factors {
            match self.const_value(f) {
                Some(k) => scale *= k,
                None => kept.push(f),
            }
        }
        if scale == 0.0 || kept.is_empty() {
            return self.constant(scale);
        }
        let p = if kept.len() == 1 {
            kept[0]
        } else {
            self.push(Expr::Prod(kept))
        };
        if scale == 1.0 {
            p
        } else {
            self.push(Expr::Sum(vec![(scale, p)]))
        }
    }

    pub fn complement(&mut self, e: ExprId) -> ExprId {
        match self.const_value(e) {
            Some(k) => self.constant(1.0 - k),
            None => self.push(Expr::Complement(e)),
        }
    }

    /// Variables occurring in `root`.
    pub fn vars_of(&self, root: ExprId) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for id in self.closure(&[root]) {
            if let Expr::Var(v) = self.expr(id) {
                out.insert(*v);
            }
        }
        out
    }

    /// Expression ids reachable from `roots`, ascending.
    pub fn closure(&self, roots: &[ExprId]) -> Vec<ExprId> {
        let mut seen = vec![false; self.exprs.len()];
        let mut stack: Vec<ExprId> = roots.to_vec();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.index()], true) {
                continue;
            }
            match self.expr(id) {
                Expr::Sum(ts) => stack.extend(ts.iter().map(|t| t.1)),
                Expr::Prod(fs) => stack.extend(fs.iter().copied()),
                Expr::Complement(e) => stack.push(*e),
                _ => {}
            }
        }
        (0..self.exprs.len())
            .filter(|&i| seen[i])
            .map(|i| ExprId(i as u32))
            .collect()
    }

    /// Evaluates the nodes `order` (ascending ids) under `x`, writing into
    /// `scratch` indexed by expression id.
    pub(crate) fn eval_into(&self, order: &[ExprId], x: &[f64], scratch: &mut [f64]) {
        for &id in order {
            scratch[id.index()] = match self.expr(id) {
                Expr::Const(c) => *c,
                Expr::Var(v) => x[*v],
                Expr::Sum(ts) => ts.iter().map(|&(c, e)| c * scratch[e.index()]).sum(),
                Expr::Prod(fs) => fs.iter().map(|e| scratch[e.index()]).product(),
                Expr::Complement(e) => 1.0 - scratch[e.index()],
            };
        }
    }

    /// Value of `root` under the assignment `x`.
    pub fn eval(&self, root: ExprId, x: &[f64]) -> f64 {
        let order = self.closure(&[root]);
        let mut scratch = vec![0.0; self.exprs.len()];
        self.eval_into(&order, x, &mut scratch);
        scratch[root.index()]
    }

    /// True when no equation multiplies one variable-dependent term by
    /// another.
    pub fn is_linear(&self) -> bool {
        let roots: Vec<ExprId> = self.eqs.iter().flatten().copied().collect();
        let closure = self.closure(&roots);
        let mut has_var = vec![false; self.exprs.len()];
        for id in closure {
            has_var[id.index()] = match self.expr(id) {
                Expr::Const(_) => false,
                Expr::Var(_) => true,
                Expr::Sum(ts) => ts.iter().any(|t| has_var[t.1.index()]),
                Expr::Prod(fs) => {
                    if fs.iter().filter(|f| has_var[f.index()]).count() > 1 {
                        return false;
                    }
                    fs.iter().any(|f| has_var[f.index()])
                }
                Expr::Complement(e) => has_var[e.index()],
            };
        }
        true
    }
}
