use std::collections::{HashMap, HashSet};
use std::fmt;

use super::order::{Header, NodeKind};
use crate::explgen::{Goal, Instance};
use crate::symbol::Sym;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FedId(pub(crate) u32);

impl FedId {
    pub const TT: FedId = FedId(0);
    pub const FF: FedId = FedId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_leaf(self) -> bool {
        self == FedId::TT || self == FedId::FF
    }
}

impl fmt::Debug for FedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FedId::TT => f.write_str("tt"),
            FedId::FF => f.write_str("ff"),
            FedId(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    And,
    Or,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::And => "and",
            Op::Or => "or",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MergeId(pub(crate) u32);

impl MergeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Placeholder for `op(left, right)`, both operands written relative to the
/// merge node's own instance and with instances in canonical form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MergeGoal {
    pub op: Op,
    pub left: FedId,
    pub right: FedId,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RelocId(pub(crate) u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MergeRefId(pub(crate) u32);

/// A canonical merge placed in concrete coordinates: the relocation maps each
/// node of the merge's compressed instance tree to the path it stands for,
/// relative to the placeholder's instance.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MergeRef {
    pub merge: MergeId,
    pub reloc: RelocId,
}

/// What an expl node stands for: a grammar goal or a pending merge.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GoalRef {
    Goal(Goal),
    Merge(MergeRefId),
}

/// What an equation variable stands for. Placements of one canonical merge
/// share its variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum VarKey {
    Goal(Goal),
    Merge(MergeId),
}

/// Spelling prefix of the rank tokens used in canonical instances.
pub(crate) const RANK_PREFIX: char = '~';

pub(crate) fn rank_token(i: usize) -> Sym {
    Sym::new(&format!("{RANK_PREFIX}{i:06}"))
}

pub(crate) fn is_rank_token(t: Sym) -> bool {
    t.as_str().starts_with(RANK_PREFIX)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FedNode {
    Tt,
    Ff,
    /// Children in the order of the process distribution's outcomes.
    Msw {
        process: Sym,
        at: Instance,
        alts: Vec<FedId>,
    },
    Expl {
        goal: GoalRef,
        at: Instance,
        lo: FedId,
        hi: FedId,
    },
    /// Branch on the joint outcome of several goals at one instance. Child
    /// `kids[m]` applies when exactly the goals whose bit is set in `m`
    /// hold. `joints` names the conjunction of every subset of two or more
    /// goals, in increasing mask order.
    Joint {
        key: Sym,
        goals: Vec<GoalRef>,
        joints: Vec<GoalRef>,
        at: Instance,
        kids: Vec<FedId>,
    },
}

impl FedNode {
    pub fn at(&self) -> Option<&Instance> {
        match self {
            FedNode::Msw { at, .. } | FedNode::Expl { at, .. } | FedNode::Joint { at, .. } => Some(at),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<FedId> {
        match self {
            FedNode::Tt | FedNode::Ff => Vec::new(),
            FedNode::Msw { alts, .. } => alts.clone(),
            FedNode::Expl { lo, hi, .. } => vec![*lo, *hi],
            FedNode::Joint { kids, .. } => kids.clone(),
        }
    }

    pub(crate) fn with_children(&self, kids: Vec<FedId>) -> FedNode {
        match self {
            FedNode::Msw { process, at, .. } => FedNode::Msw {
                process: *process,
                at: at.clone(),
                alts: kids,
            },
            FedNode::Expl { goal, at, .. } => FedNode::Expl {
                goal: *goal,
                at: at.clone(),
                lo: kids[0],
                hi: kids[1],
            },
            FedNode::Joint {
                key, goals, joints, at, ..
            } => FedNode::Joint {
                key: *key,
                goals: goals.clone(),
                joints: joints.clone(),
                at: at.clone(),
                kids,
            },
            leaf => leaf.clone(),
        }
    }

    pub(crate) fn with_at(&self, at: Instance) -> FedNode {
        match self {
            FedNode::Msw { process, alts, .. } => FedNode::Msw {
                process: *process,
                at,
                alts: alts.clone(),
            },
            FedNode::Expl { goal, lo, hi, .. } => FedNode::Expl {
                goal: *goal,
                at,
                lo: *lo,
                hi: *hi,
            },
            FedNode::Joint {
                key,
                goals,
                joints,
                kids,
                ..
            } => FedNode::Joint {
                key: *key,
                goals: goals.clone(),
                joints: joints.clone(),
                at,
                kids: kids.clone(),
            },
            leaf => leaf.clone(),
        }
    }
}

/// Caps guarding construction on programs that do not saturate.
#[derive(Clone, Copy, Debug)]
pub struct FedLimits {
    pub merge_cap: usize,
    pub depth_cap: usize,
}

impl Default for FedLimits {
    fn default() -> Self {
        FedLimits {
            merge_cap: 100_000,
            depth_cap: 100_000,
        }
    }
}

/// Hash-consed store of diagram nodes plus the construction tables.
pub struct FedStore {
    pub(crate) nodes: Vec<FedNode>,
    pub(crate) unique: HashMap<FedNode, FedId>,
    pub(crate) merges: Vec<MergeGoal>,
    pub(crate) merge_syms: Vec<Sym>,
    pub(crate) merge_index: HashMap<MergeGoal, MergeId>,
    pub(crate) merge_refs: Vec<MergeRef>,
    pub(crate) merge_ref_syms: Vec<Sym>,
    pub(crate) merge_ref_index: HashMap<MergeRef, MergeRefId>,
    pub(crate) relocs: Vec<HashMap<Instance, Instance>>,
    pub(crate) reloc_index: HashMap<Vec<(Instance, Instance)>, RelocId>,
    pub(crate) placed_memo: HashMap<MergeRefId, FedId>,
    pub(crate) joint_memo: HashMap<Vec<GoalRef>, GoalRef>,
    pub(crate) apply_memo: HashMap<(Op, FedId, FedId), FedId>,
    shift_memo: HashMap<(FedId, Instance), FedId>,
    strip_memo: HashMap<(FedId, usize), FedId>,
    graft_memo: HashMap<(FedId, FedId, FedId), FedId>,
    lcp_memo: HashMap<FedId, Option<Instance>>,
    pub(crate) goal_feds: HashMap<Goal, FedId>,
    pub(crate) merge_feds: HashMap<MergeId, FedId>,
    /// Goals and merges in the order their diagrams were completed.
    pub(crate) built: Vec<VarKey>,
    pub(crate) in_progress: HashSet<Goal>,
    pub(crate) merge_in_progress: HashSet<MergeId>,
    pub(crate) limits: FedLimits,
    pub(crate) depth: usize,
}

impl Default for FedStore {
    fn default() -> Self {
        FedStore::new(FedLimits::default())
    }
}

impl FedStore {
    pub fn new(limits: FedLimits) -> FedStore {
        let mut s = FedStore {
            nodes: Vec::new(),
            unique: HashMap::new(),
            merges: Vec::new(),
            merge_syms: Vec::new(),
            merge_index: HashMap::new(),
            merge_refs: Vec::new(),
            merge_ref_syms: Vec::new(),
            merge_ref_index: HashMap::new(),
            relocs: Vec::new(),
            reloc_index: HashMap::new(),
            placed_memo: HashMap::new(),
            joint_memo: HashMap::new(),
            apply_memo: HashMap::new(),
            shift_memo: HashMap::new(),
            strip_memo: HashMap::new(),
            graft_memo: HashMap::new(),
            lcp_memo: HashMap::new(),
            goal_feds: HashMap::new(),
            merge_feds: HashMap::new(),
            built: Vec::new(),
            in_progress: HashSet::new(),
            merge_in_progress: HashSet::new(),
            limits,
            depth: 0,
        };
        let tt = s.mk(FedNode::Tt);
        let ff = s.mk(FedNode::Ff);
        debug_assert_eq!((tt, ff), (FedId::TT, FedId::FF));
        s
    }

    /// Canonical id for a node structure. A decision with several branches
    /// that all lead to the same diagram is replaced by that diagram.
    pub fn mk(&mut self, node: FedNode) -> FedId {
        let kids = node.children();
        if let Some((&first, rest)) = kids.split_first() {
            if !rest.is_empty() && rest.iter().all(|&k| k == first) {
                return first;
            }
        }
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = FedId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.unique.insert(node, id);
        id
    }

    pub fn node(&self, id: FedId) -> &FedNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn merge(&self, m: MergeId) -> MergeGoal {
        self.merges[m.index()]
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn merge_ref(&self, r: MergeRefId) -> MergeRef {
        self.merge_refs[r.0 as usize]
    }

    pub fn reloc(&self, r: RelocId) -> &HashMap<Instance, Instance> {
        &self.relocs[r.0 as usize]
    }

    pub fn var_key(&self, g: GoalRef) -> VarKey {
        match g {
            GoalRef::Goal(g) => VarKey::Goal(g),
            GoalRef::Merge(r) => VarKey::Merge(self.merge_ref(r).merge),
        }
    }

    /// Term spelling of a goal reference; merges spell as `merge(op,#l,#r)`
    /// with a `/rK` suffix naming the relocation.
    pub fn goal_sym(&self, g: GoalRef) -> Sym {
        match g {
            GoalRef::Goal(g) => g.sym(),
            GoalRef::Merge(r) => self.merge_ref_syms[r.0 as usize],
        }
    }

    pub fn var_sym(&self, k: VarKey) -> Sym {
        match k {
            VarKey::Goal(g) => g.sym(),
            VarKey::Merge(m) => self.merge_syms[m.index()],
        }
    }

    pub fn goal_fed(&self, g: Goal) -> Option<FedId> {
        self.goal_feds.get(&g).copied()
    }

    pub fn merge_fed(&self, m: MergeId) -> Option<FedId> {
        self.merge_feds.get(&m).copied()
    }

    pub fn fed_of(&self, k: VarKey) -> Option<FedId> {
        match k {
            VarKey::Goal(g) => self.goal_fed(g),
            VarKey::Merge(m) => self.merge_fed(m),
        }
    }

    /// Completed (goal-or-merge, diagram) pairs in completion order.
    pub fn built(&self) -> Vec<(VarKey, FedId)> {
        self.built
            .iter()
            .map(|&k| (k, self.fed_of(k).expect("built entry has a diagram")))
            .collect()
    }

    pub fn header(&self, id: FedId) -> Option<Header<'_>> {
        match self.node(id) {
            FedNode::Msw { process, at, .. } => Some(Header {
                kind: NodeKind::Msw,
                key: *process,
                tag: *process,
                at,
            }),
            FedNode::Expl { goal, at, .. } => Some(Header {
                kind: NodeKind::Expl,
                key: self.goal_sym(*goal),
                tag: self.goal_sym(*goal),
                at,
            }),
            // sorts with its least goal, so it stays ahead of what both
            // joined nodes were ahead of
            FedNode::Joint { key, goals, at, .. } => Some(Header {
                kind: NodeKind::Expl,
                key: goals
                    .iter()
                    .map(|g| self.goal_sym(*g))
                    .min()
                    .expect("joint over several goals"),
                tag: *key,
                at,
            }),
            _ => None,
        }
    }

    /// Leaf-form deferred node `expl(g,h)?[0:ff,1:tt]`.
    pub fn deferred(&mut self, goal: GoalRef, at: Instance) -> FedId {
        self.mk(FedNode::Expl {
            goal,
            at,
            lo: FedId::FF,
            hi: FedId::TT,
        })
    }

    /// Prepends `prefix` to every instance in the diagram.
    pub fn shift(&mut self, id: FedId, prefix: &Instance) -> FedId {
        if prefix.is_base() || id.is_leaf() {
            return id;
        }
        if let Some(&r) = self.shift_memo.get(&(id, prefix.clone())) {
            return r;
        }
        let node = self.node(id).clone();
        let kids: Vec<FedId> = node.children().into_iter().map(|c| self.shift(c, prefix)).collect();
        let at = prefix.join(node.at().expect("decision node"));
        let r = self.mk(node.with_children(kids).with_at(at));
        self.shift_memo.insert((id, prefix.clone()), r);
        r
    }

    /// Drops the first `k` tokens of every instance. Every instance in the
    /// diagram must have at least `k` tokens.
    pub fn strip(&mut self, id: FedId, k: usize) -> FedId {
        if k == 0 || id.is_leaf() {
            return id;
        }
        if let Some(&r) = self.strip_memo.get(&(id, k)) {
            return r;
        }
        let node = self.node(id).clone();
        let kids: Vec<FedId> = node.children().into_iter().map(|c| self.strip(c, k)).collect();
        let at = Instance::from_tokens(node.at().expect("decision node").tokens()[k..].iter().copied());
        let r = self.mk(node.with_children(kids).with_at(at));
        self.strip_memo.insert((id, k), r);
        r
    }

    /// Replaces the `ff` leaves by `lo` and the `tt` leaves by `hi`.
    pub fn graft(&mut self, id: FedId, lo: FedId, hi: FedId) -> FedId {
        if lo == FedId::FF && hi == FedId::TT {
            return id;
        }
        match id {
            FedId::TT => return hi,
            FedId::FF => return lo,
            _ => {}
        }
        if let Some(&r) = self.graft_memo.get(&(id, lo, hi)) {
            return r;
        }
        let node = self.node(id).clone();
        let kids: Vec<FedId> = node.children().into_iter().map(|c| self.graft(c, lo, hi)).collect();
        let r = self.mk(node.with_children(kids));
        self.graft_memo.insert((id, lo, hi), r);
        r
    }

    /// Longest common prefix of every instance in the diagram.
    pub fn instance_lcp(&mut self, id: FedId) -> Option<Instance> {
        if id.is_leaf() {
            return None;
        }
        if let Some(r) = self.lcp_memo.get(&id) {
            return r.clone();
        }
        let node = self.node(id).clone();
        let mut acc = node.at().cloned();
        for c in node.children() {
            if let Some(ci) = self.instance_lcp(c) {
                acc = Some(match acc {
                    Some(a) => a.common_prefix(&ci),
                    None => ci,
                });
            }
        }
        self.lcp_memo.insert(id, acc.clone());
        acc
    }

    /// Ids reachable from `root` (root included), children before parents.
    pub fn reachable(&self, root: FedId) -> Vec<FedId> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            if !seen.insert(id) {
                continue;
            }
            stack.push((id, true));
            for c in self.node(id).children().into_iter().rev() {
                if !seen.contains(&c) {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// (node count, edge count) of the sub-diagram rooted at `root`.
    pub fn stats(&self, root: FedId) -> (usize, usize) {
        let ids = self.reachable(root);
        let edges = ids.iter().map(|&i| self.node(i).children().len()).sum();
        (ids.len(), edges)
    }
}
