use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::order::{node_order, NodeOrder};
use super::store::{
    is_rank_token, rank_token, FedId, FedNode, FedStore, GoalRef, MergeGoal, MergeId, MergeRef, MergeRefId, Op,
    RelocId, VarKey,
};
use crate::error::{Error, Result};
use crate::explgen::{BodySym, ExplGrammar, Goal, Instance};
use crate::symbol::Sym;

/// Largest number of goals one joint node branches on.
const JOINT_CAP: usize = 4;

impl FedStore {
    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > self.limits.depth_cap {
            self.depth = 0;
            return Err(Error::FactoringDiverged(format!(
                "recursion depth exceeded {}",
                self.limits.depth_cap
            )));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth = self.depth.saturating_sub(1);
    }

    /// `a op b`, following the node order; unordered roots become a merge
    /// placeholder.
    pub fn apply(&mut self, op: Op, a: FedId, b: FedId) -> Result<FedId> {
        for (x, y) in [(a, b), (b, a)] {
            match (op, x) {
                (Op::Or, FedId::TT) => return Ok(FedId::TT),
                (Op::And, FedId::TT) => return Ok(y),
                (Op::And, FedId::FF) => return Ok(FedId::FF),
                (Op::Or, FedId::FF) => return Ok(y),
                _ => {}
            }
        }
        if a == b {
            return Ok(a);
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&r) = self.apply_memo.get(&key) {
            return Ok(r);
        }
        self.enter()?;
        let result = self.apply_nodes(op, a, b);
        self.leave();
        let r = result?;
        self.apply_memo.insert(key, r);
        Ok(r)
    }

    fn apply_nodes(&mut self, op: Op, a: FedId, b: FedId) -> Result<FedId> {
        let order = {
            let (ha, hb) = (self.header(a).unwrap(), self.header(b).unwrap());
            node_order(ha, hb)
        };
        let na = self.node(a).clone();
        let nb = self.node(b).clone();
        let kids = match order {
            NodeOrder::Less => {
                let mut kids = Vec::new();
                for c in na.children() {
                    kids.push(self.apply(op, c, b)?);
                }
                return Ok(self.mk(na.with_children(kids)));
            }
            NodeOrder::Greater => {
                let mut kids = Vec::new();
                for c in nb.children() {
                    kids.push(self.apply(op, a, c)?);
                }
                return Ok(self.mk(nb.with_children(kids)));
            }
            NodeOrder::Equal => {
                let (ca, cb) = (na.children(), nb.children());
                if ca.len() != cb.len() {
                    return Err(Error::Model(format!("nodes {a:?} and {b:?} disagree on outcome count")));
                }
                let mut kids = Vec::new();
                for (x, y) in ca.into_iter().zip(cb) {
                    kids.push(self.apply(op, x, y)?);
                }
                kids
            }
            NodeOrder::Incomparable => {
                if let Some(r) = self.try_joint(op, a, b)? {
                    return Ok(r);
                }
                return self.merge_node(op, a, b);
            }
        };
        Ok(self.mk(na.with_children(kids)))
    }

    fn joint_parts(&self, id: FedId) -> Option<(Vec<GoalRef>, Instance, Vec<FedId>)> {
        match self.node(id) {
            FedNode::Expl { goal, at, lo, hi } => Some((vec![*goal], at.clone(), vec![*lo, *hi])),
            FedNode::Joint { goals, at, kids, .. } => Some((goals.clone(), at.clone(), kids.clone())),
            _ => None,
        }
    }

    /// Combines two expl-rooted diagrams on different goals at one instance
    /// by branching on the goals' joint outcome. Their children live at
    /// instances incomparable with that instance, so they are independent
    /// of the goals. Pairs with only leaf children stay plain merges.
    fn try_joint(&mut self, op: Op, a: FedId, b: FedId) -> Result<Option<FedId>> {
        let (Some((ga, at, ka)), Some((gb, bt, kb))) = (self.joint_parts(a), self.joint_parts(b)) else {
            return Ok(None);
        };
        if at != bt || ka.iter().chain(&kb).all(|k| k.is_leaf()) {
            return Ok(None);
        }
        let mut goals: Vec<GoalRef> = ga.iter().chain(&gb).copied().collect();
        goals.sort();
        goals.dedup();
        if goals.len() > JOINT_CAP {
            return Ok(None);
        }
        let proj = |m: usize, sub: &[GoalRef]| -> usize {
            sub.iter()
                .enumerate()
                .filter(|(_, g)| m >> goals.binary_search(g).expect("goal in union") & 1 == 1)
                .map(|(j, _)| 1 << j)
                .sum()
        };
        let mut kids = Vec::with_capacity(1 << goals.len());
        for m in 0..1usize << goals.len() {
            kids.push(self.apply(op, ka[proj(m, &ga)], kb[proj(m, &gb)])?);
        }
        self.mk_joint(goals, at, kids).map(Some)
    }

    /// Joint node with goals the children do not depend on dropped; one
    /// goal gives a plain expl node and none gives the shared child.
    fn mk_joint(&mut self, mut goals: Vec<GoalRef>, at: Instance, mut kids: Vec<FedId>) -> Result<FedId> {
        let mut i = 0;
        while i < goals.len() {
            let bit = 1 << i;
            if (0..kids.len()).all(|m| kids[m] == kids[m ^ bit]) {
                kids = (0..kids.len()).filter(|m| m & bit == 0).map(|m| kids[m]).collect();
                goals.remove(i);
            } else {
                i += 1;
            }
        }
        match goals.len() {
            0 => Ok(kids[0]),
            1 => Ok(self.mk(FedNode::Expl {
                goal: goals[0],
                at,
                lo: kids[0],
                hi: kids[1],
            })),
            k => {
                let mut joints = Vec::new();
                for m in (0..1usize << k).filter(|m| m.count_ones() >= 2) {
                    let sub: Vec<GoalRef> = (0..k).filter(|i| m >> i & 1 == 1).map(|i| goals[i]).collect();
                    joints.push(self.joint_ref(&sub)?);
                }
                let key = self.joint_key(&goals);
                Ok(self.mk(FedNode::Joint {
                    key,
                    goals,
                    joints,
                    at,
                    kids,
                }))
            }
        }
    }

    fn joint_key(&self, goals: &[GoalRef]) -> Sym {
        let names: Vec<&str> = goals.iter().map(|g| self.goal_sym(*g).as_str()).collect();
        Sym::new(&format!("joint({})", names.join(";")))
    }

    /// Merge goal standing for the conjunction of `goals`, all placed at the
    /// same instance.
    fn joint_ref(&mut self, goals: &[GoalRef]) -> Result<GoalRef> {
        if let [g] = goals {
            return Ok(*g);
        }
        if let Some(&r) = self.joint_memo.get(goals) {
            return Ok(r);
        }
        let first = self.deferred(goals[0], Instance::base());
        let rest_ref = self.joint_ref(&goals[1..])?;
        let rest = self.deferred(rest_ref, Instance::base());
        let node = self.merge_node(Op::And, first, rest)?;
        let FedNode::Expl { goal, .. } = self.node(node) else {
            unreachable!("merge_node returns a placeholder")
        };
        let g = *goal;
        self.joint_memo.insert(goals.to_vec(), g);
        Ok(g)
    }

    /// `expl(merge(op,a,b),h)?[0:ff,1:tt]` with `h` the common part of all
    /// instances in both operands. Operands are stored relative to `h` in
    /// canonical form, so placements differing only in concrete paths share
    /// one merge goal.
    fn merge_node(&mut self, op: Op, a: FedId, b: FedId) -> Result<FedId> {
        let la = self.instance_lcp(a).unwrap_or_default();
        let lb = self.instance_lcp(b).unwrap_or_default();
        let h = la.common_prefix(&lb);
        let sa = self.strip(a, h.len());
        let sb = self.strip(b, h.len());
        let (ca, cb, pairs) = self.canonicalize(sa, sb);
        let m = self.intern_merge(MergeGoal {
            op,
            left: ca.min(cb),
            right: ca.max(cb),
        })?;
        let reloc = self.intern_reloc(pairs);
        let r = self.intern_merge_ref(MergeRef { merge: m, reloc });
        Ok(self.deferred(GoalRef::Merge(r), h))
    }

    /// Rewrites the instances of `a` and `b` into canonical form. The top
    /// instances (those not strictly below an expl node's instance) are
    /// closed under common prefixes and each edge of the resulting
    /// compressed tree is relabelled by its rank among its siblings.
    /// Instances below an expl node keep their path relative to it, so the
    /// rewrite preserves prefix, incomparability and lexicographic order.
    /// Returns the rewritten operands and the (canonical, actual) pairs of
    /// the compressed tree.
    fn canonicalize(&mut self, a: FedId, b: FedId) -> (FedId, FedId, Vec<(Instance, Instance)>) {
        let mut insts = BTreeSet::new();
        let mut expl = HashSet::new();
        for id in self.reachable(a).into_iter().chain(self.reachable(b)) {
            match self.node(id) {
                FedNode::Msw { at, .. } => {
                    insts.insert(at.clone());
                }
                FedNode::Expl { at, .. } | FedNode::Joint { at, .. } => {
                    insts.insert(at.clone());
                    expl.insert(at.clone());
                }
                _ => {}
            }
        }
        let expl_prefix = |s: &Instance| {
            (0..s.len()).find(|&k| expl.contains(&Instance::from_tokens(s.tokens()[..k].iter().copied())))
        };
        let tops: Vec<Instance> = insts.iter().filter(|s| expl_prefix(s).is_none()).cloned().collect();
        let mut nodes: BTreeSet<Instance> = tops.iter().cloned().collect();
        nodes.insert(Instance::base());
        for w in tops.windows(2) {
            nodes.insert(w[0].common_prefix(&w[1]));
        }
        let mut canon: HashMap<Instance, Instance> = HashMap::new();
        let mut ranks: HashMap<Instance, usize> = HashMap::new();
        let mut stack: Vec<Instance> = Vec::new();
        for n in &nodes {
            while stack.last().is_some_and(|p| !p.is_prefix_of(n)) {
                stack.pop();
            }
            let c = match stack.last() {
                None => Instance::base(),
                Some(p) => {
                    let k = ranks.entry(p.clone()).or_default();
                    let c = canon[p].child(rank_token(*k));
                    *k += 1;
                    c
                }
            };
            canon.insert(n.clone(), c);
            stack.push(n.clone());
        }
        let pairs: Vec<(Instance, Instance)> = {
            let mut v: Vec<_> = canon.iter().map(|(k, c)| (c.clone(), k.clone())).collect();
            v.sort();
            v
        };
        let map = |s: &Instance| -> Instance {
            if let Some(c) = canon.get(s) {
                return c.clone();
            }
            let k = expl_prefix(s).expect("non-top instance lies below an expl instance");
            let e = Instance::from_tokens(s.tokens()[..k].iter().copied());
            canon[&e].join(&Instance::from_tokens(s.tokens()[k..].iter().copied()))
        };
        if pairs.iter().all(|(c, k)| c == k) {
            return (a, b, pairs);
        }
        let mut memo = HashMap::new();
        let ca = self.relocate(a, &map, &mut memo);
        let cb = self.relocate(b, &map, &mut memo);
        (ca, cb, pairs)
    }

    /// Copy of the diagram with every instance mapped through `f`. Merge
    /// placements are re-expressed so they keep denoting the same paths.
    fn relocate(&mut self, id: FedId, f: &dyn Fn(&Instance) -> Instance, memo: &mut HashMap<FedId, FedId>) -> FedId {
        if id.is_leaf() {
            return id;
        }
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        let node = self.node(id).clone();
        let kids: Vec<FedId> = node.children().into_iter().map(|c| self.relocate(c, f, memo)).collect();
        let at = node.at().expect("decision node");
        let new_at = f(at);
        let node = match node.with_children(kids) {
            FedNode::Expl { goal, lo, hi, .. } => FedNode::Expl {
                goal: self.relocate_ref(goal, at, &new_at, f),
                at: new_at,
                lo,
                hi,
            },
            FedNode::Joint {
                goals, joints, kids, ..
            } => {
                let goals: Vec<GoalRef> = goals.iter().map(|&g| self.relocate_ref(g, at, &new_at, f)).collect();
                let joints = joints.iter().map(|&g| self.relocate_ref(g, at, &new_at, f)).collect();
                FedNode::Joint {
                    key: self.joint_key(&goals),
                    goals,
                    joints,
                    at: new_at,
                    kids,
                }
            }
            n => n.with_at(new_at),
        };
        let r = self.mk(node);
        memo.insert(id, r);
        r
    }

    /// A merge placement at `at` re-expressed for the node's new instance
    /// `new_at` after mapping every path through `f`.
    fn relocate_ref(
        &mut self,
        g: GoalRef,
        at: &Instance,
        new_at: &Instance,
        f: &dyn Fn(&Instance) -> Instance,
    ) -> GoalRef {
        let GoalRef::Merge(r) = g else {
            return g;
        };
        let mr = self.merge_ref(r);
        let mut pairs: Vec<(Instance, Instance)> = self
            .reloc(mr.reloc)
            .iter()
            .map(|(k, v)| {
                let moved = f(&at.join(v));
                let rel = moved.strip_prefix(new_at).expect("relocation preserves prefixes");
                (k.clone(), rel)
            })
            .collect();
        pairs.sort();
        let reloc = self.intern_reloc(pairs);
        GoalRef::Merge(self.intern_merge_ref(MergeRef { merge: mr.merge, reloc }))
    }

    fn intern_merge(&mut self, mg: MergeGoal) -> Result<MergeId> {
        if let Some(&m) = self.merge_index.get(&mg) {
            return Ok(m);
        }
        if self.merges.len() >= self.limits.merge_cap {
            return Err(Error::FactoringDiverged(format!(
                "more than {} merge goals",
                self.limits.merge_cap
            )));
        }
        let m = MergeId(self.merges.len() as u32);
        self.merges.push(mg);
        self.merge_syms.push(Sym::new(&format!(
            "merge({},{},{})",
            mg.op,
            mg.left.index(),
            mg.right.index()
        )));
        self.merge_index.insert(mg, m);
        Ok(m)
    }

    fn intern_reloc(&mut self, pairs: Vec<(Instance, Instance)>) -> RelocId {
        if let Some(&r) = self.reloc_index.get(&pairs) {
            return r;
        }
        let r = RelocId(self.relocs.len() as u32);
        self.relocs.push(pairs.iter().cloned().collect());
        self.reloc_index.insert(pairs, r);
        r
    }

    fn intern_merge_ref(&mut self, mr: MergeRef) -> MergeRefId {
        if let Some(&r) = self.merge_ref_index.get(&mr) {
            return r;
        }
        let r = MergeRefId(self.merge_refs.len() as u32);
        let identity = self.reloc(mr.reloc).iter().all(|(k, v)| k == v);
        let base = self.merge_syms[mr.merge.index()];
        let sym = if identity {
            base
        } else {
            Sym::new(&format!("{}/r{}", base.as_str(), mr.reloc.0))
        };
        self.merge_refs.push(mr);
        self.merge_ref_syms.push(sym);
        self.merge_ref_index.insert(mr, r);
        r
    }

    /// Diagram of a merge placement relative to its instance: the canonical
    /// merge diagram with canonical paths mapped back through the
    /// relocation.
    fn placed_merge(&mut self, grammar: &mut ExplGrammar, r: MergeRefId) -> Result<FedId> {
        if let Some(&f) = self.placed_memo.get(&r) {
            return Ok(f);
        }
        let mr = self.merge_ref(r);
        let full = self.expand_merge(grammar, mr.merge)?;
        let map = self.reloc(mr.reloc).clone();
        let f = if map.iter().all(|(k, v)| k == v) {
            full
        } else {
            let back = |c: &Instance| -> Instance {
                let toks = c.tokens();
                let run = toks.iter().take_while(|t| is_rank_token(**t)).count();
                for n in (0..=run).rev() {
                    let head = Instance::from_tokens(toks[..n].iter().copied());
                    if let Some(v) = map.get(&head) {
                        return v.join(&Instance::from_tokens(toks[n..].iter().copied()));
                    }
                }
                c.clone()
            };
            let mut memo = HashMap::new();
            self.relocate(full, &back, &mut memo)
        };
        self.placed_memo.insert(r, f);
        Ok(f)
    }

    /// Diagram for `goal` at `at` relative to the construction base: a
    /// deferred leaf-form node for strict extensions, the full diagram at
    /// the base.
    pub fn fed_at(&mut self, grammar: &mut ExplGrammar, goal: Goal, at: &Instance) -> Result<FedId> {
        if at.is_base() {
            self.build_fed(grammar, goal)
        } else {
            Ok(self.deferred(GoalRef::Goal(goal), at.clone()))
        }
    }

    /// Full diagram of `goal` at the base instance: the disjunction over its
    /// productions of the conjunction of their body symbols.
    pub fn build_fed(&mut self, grammar: &mut ExplGrammar, goal: Goal) -> Result<FedId> {
        if let Some(&f) = self.goal_feds.get(&goal) {
            return Ok(f);
        }
        if !self.in_progress.insert(goal) {
            return Err(Error::FactoringDiverged(format!(
                "unguarded recursion: {goal} depends on itself at the same instance"
            )));
        }
        self.enter()?;
        let result = self.build_productions(grammar, goal);
        self.leave();
        self.in_progress.remove(&goal);
        let f = result?;
        self.goal_feds.insert(goal, f);
        self.built.push(VarKey::Goal(goal));
        Ok(f)
    }

    fn build_productions(&mut self, grammar: &mut ExplGrammar, goal: Goal) -> Result<FedId> {
        let group = grammar.expand(goal)?;
        let mut acc = FedId::FF;
        for p in group.iter() {
            let mut conj = FedId::TT;
            for b in &p.body {
                let f = self.body_fed(grammar, b)?;
                conj = self.apply(Op::And, conj, f)?;
                if conj == FedId::FF {
                    break;
                }
            }
            acc = self.apply(Op::Or, acc, conj)?;
        }
        Ok(acc)
    }

    fn body_fed(&mut self, grammar: &mut ExplGrammar, b: &BodySym) -> Result<FedId> {
        match b {
            BodySym::Msw { process, at, outcome } => {
                let dist = grammar.distribution(*process)?;
                let Some(pos) = dist.position(*outcome) else {
                    return Err(Error::Model(format!("{outcome} is not an outcome of {process}")));
                };
                let alts = (0..dist.len())
                    .map(|i| if i == pos { FedId::TT } else { FedId::FF })
                    .collect();
                Ok(self.mk(FedNode::Msw {
                    process: *process,
                    at: at.path.clone(),
                    alts,
                }))
            }
            BodySym::Expl { goal, at } => self.fed_at(grammar, *goal, &at.path),
        }
    }

    /// Diagram of a merge placeholder: inline one expl-rooted operand (its
    /// full diagram at its instance, leaves grafted onto the node's 0/1
    /// children) and combine with the other operand.
    pub fn expand_merge(&mut self, grammar: &mut ExplGrammar, m: MergeId) -> Result<FedId> {
        if let Some(&f) = self.merge_feds.get(&m) {
            return Ok(f);
        }
        if !self.merge_in_progress.insert(m) {
            return Err(Error::FactoringDiverged(format!(
                "merge {} depends on itself",
                self.var_sym(VarKey::Merge(m))
            )));
        }
        self.enter()?;
        let result = self.expand_merge_inner(grammar, m);
        self.leave();
        self.merge_in_progress.remove(&m);
        let f = result?;
        self.merge_feds.insert(m, f);
        self.built.push(VarKey::Merge(m));
        Ok(f)
    }

    fn expand_merge_inner(&mut self, grammar: &mut ExplGrammar, m: MergeId) -> Result<FedId> {
        let mg = self.merge(m);
        // Prefer plain goals at the earliest instance; merges last.
        let rank = |s: &FedStore, id: FedId| match s.node(id) {
            FedNode::Expl {
                goal: GoalRef::Goal(_),
                at,
                ..
            } => Some((0, at.len())),
            FedNode::Joint { at, .. } => Some((1, at.len())),
            FedNode::Expl {
                goal: GoalRef::Merge(_),
                at,
                ..
            } => Some((2, at.len())),
            _ => None,
        };
        let (side, other) = match (rank(self, mg.left), rank(self, mg.right)) {
            (Some(l), Some(r)) if r < l => (mg.right, mg.left),
            (Some(_), _) => (mg.left, mg.right),
            (None, Some(_)) => (mg.right, mg.left),
            (None, None) => {
                return Err(Error::FactoringDiverged(format!(
                    "merge {} has no expl-rooted operand",
                    self.var_sym(VarKey::Merge(m))
                )))
            }
        };
        let inlined = match self.node(side).clone() {
            FedNode::Expl { goal, at, lo, hi } => {
                let full = self.full_of(grammar, goal)?;
                let shifted = self.shift(full, &at);
                self.graft(shifted, lo, hi)
            }
            FedNode::Joint { goals, at, kids, .. } => self.inline_joint(grammar, &goals, &at, &kids)?,
            _ => unreachable!(),
        };
        self.apply(mg.op, inlined, other)
    }

    fn full_of(&mut self, grammar: &mut ExplGrammar, g: GoalRef) -> Result<FedId> {
        match g {
            GoalRef::Goal(g) => self.build_fed(grammar, g),
            GoalRef::Merge(r) => self.placed_merge(grammar, r),
        }
    }

    /// A joint node spelled out: the disjunction over outcomes of the
    /// goals' diagrams (or their negations) conjoined with the child.
    fn inline_joint(
        &mut self,
        grammar: &mut ExplGrammar,
        goals: &[GoalRef],
        at: &Instance,
        kids: &[FedId],
    ) -> Result<FedId> {
        let mut lits = Vec::new();
        for &g in goals {
            let full = self.full_of(grammar, g)?;
            let pos = self.shift(full, at);
            let neg = self.graft(pos, FedId::TT, FedId::FF);
            lits.push((neg, pos));
        }
        let mut acc = FedId::FF;
        for (m, &kid) in kids.iter().enumerate() {
            let mut term = kid;
            for (i, &(neg, pos)) in lits.iter().enumerate() {
                if term == FedId::FF {
                    break;
                }
                term = self.apply(Op::And, term, if m >> i & 1 == 1 { pos } else { neg })?;
            }
            acc = self.apply(Op::Or, acc, term)?;
        }
        Ok(acc)
    }

    /// Builds diagrams for `starts` and for every goal and merge they
    /// reference until the set saturates.
    pub fn saturate(&mut self, grammar: &mut ExplGrammar, starts: &[Goal]) -> Result<()> {
        let keys: Vec<VarKey> = starts.iter().map(|&g| VarKey::Goal(g)).collect();
        self.saturate_keys(grammar, keys)
    }

    /// Builds diagrams for every goal and merge referenced under `root`,
    /// transitively.
    pub fn saturate_root(&mut self, grammar: &mut ExplGrammar, root: FedId) -> Result<()> {
        let keys = self.keys_of(root);
        self.saturate_keys(grammar, keys)
    }

    fn saturate_keys(&mut self, grammar: &mut ExplGrammar, keys: Vec<VarKey>) -> Result<()> {
        let mut queued: HashSet<VarKey> = keys.iter().copied().collect();
        let mut queue: VecDeque<VarKey> = keys.into();
        while let Some(item) = queue.pop_front() {
            let root = match item {
                VarKey::Goal(g) => self.build_fed(grammar, g)?,
                VarKey::Merge(m) => self.expand_merge(grammar, m)?,
            };
            for k in self.keys_of(root) {
                if queued.insert(k) {
                    queue.push_back(k);
                }
            }
        }
        Ok(())
    }

    /// Goals and merges named by expl nodes under `root`, in depth-first
    /// preorder following child order.
    pub fn refs_of(&self, root: FedId) -> Vec<GoalRef> {
        let mut seen_nodes = HashSet::new();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !seen_nodes.insert(id) {
                continue;
            }
            let node = self.node(id);
            match node {
                FedNode::Expl { goal, .. } => {
                    if seen.insert(*goal) {
                        out.push(*goal);
                    }
                }
                FedNode::Joint { goals, joints, .. } => {
                    for g in goals.iter().chain(joints) {
                        if seen.insert(*g) {
                            out.push(*g);
                        }
                    }
                }
                _ => {}
            }
            stack.extend(node.children().into_iter().rev());
        }
        out
    }

    /// Variables named by expl nodes under `root`, first occurrence order.
    pub fn keys_of(&self, root: FedId) -> Vec<VarKey> {
        let mut seen = HashSet::new();
        self.refs_of(root)
            .into_iter()
            .map(|g| self.var_key(g))
            .filter(|k| seen.insert(*k))
            .collect()
    }

    /// Verifies the ordering invariant on every edge between decision nodes
    /// under `root`, and that no msw node repeats an (r,h) pair among its
    /// descendants. Returns a description of the first violation.
    pub fn check_path_order(&self, root: FedId) -> std::result::Result<(), String> {
        let order = self.reachable(root);
        let mut below: HashMap<FedId, BTreeSet<(Sym, Instance)>> = HashMap::new();
        for id in order {
            let node = self.node(id);
            let mut keys = BTreeSet::new();
            for c in node.children() {
                if let (Some(hp), Some(hc)) = (self.header(id), self.header(c)) {
                    let o = node_order(hp, hc);
                    if o != NodeOrder::Less {
                        return Err(format!("edge {id:?} -> {c:?} has order {o:?}"));
                    }
                }
                keys.extend(below[&c].iter().cloned());
            }
            if let FedNode::Msw { process, at, .. } = node {
                if !keys.insert((*process, at.clone())) {
                    return Err(format!("msw({process},{at}) repeats below {id:?}"));
                }
            }
            below.insert(id, keys);
        }
        Ok(())
    }
}
