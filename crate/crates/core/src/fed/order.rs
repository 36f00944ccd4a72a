use std::cmp::Ordering;

use crate::explgen::{Instance, InstanceRel};
use crate::symbol::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Msw,
    Expl,
}

/// The ordering-relevant part of a decision node: kind, the process or
/// goal term it sorts by, the term that identifies it, and the instance.
#[derive(Clone, Copy, Debug)]
pub struct Header<'a> {
    pub kind: NodeKind,
    pub key: Sym,
    pub tag: Sym,
    pub at: &'a Instance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl NodeOrder {
    fn from_ordering(o: Ordering) -> NodeOrder {
        match o {
            Ordering::Less => NodeOrder::Less,
            Ordering::Equal => NodeOrder::Equal,
            Ordering::Greater => NodeOrder::Greater,
        }
    }

    pub fn reverse(self) -> NodeOrder {
        match self {
            NodeOrder::Less => NodeOrder::Greater,
            NodeOrder::Greater => NodeOrder::Less,
            o => o,
        }
    }
}

/// Partial order on decision nodes. Nodes it orders are independent.
///
/// * msw/msw: earlier instance first; otherwise by process term, then by
///   token path. Total on msw pairs.
/// * msw/expl: the msw node is first when its instance is strictly earlier
///   than or incomparable with the expl instance. At an equal or later
///   instance the derived process may use that very switch, so the pair is
///   left unordered.
/// * expl/expl: equal when instance and identity agree; otherwise ordered
///   only across incomparable instances, by goal term and then token path.
pub fn node_order(a: Header<'_>, b: Header<'_>) -> NodeOrder {
    let rel = a.at.relation(b.at);
    match (a.kind, b.kind) {
        (NodeKind::Msw, NodeKind::Msw) => match rel {
            InstanceRel::Earlier => NodeOrder::Less,
            InstanceRel::Later => NodeOrder::Greater,
            InstanceRel::Equal | InstanceRel::Incomparable => {
                NodeOrder::from_ordering(a.key.cmp(&b.key).then_with(|| a.at.cmp(b.at)))
            }
        },
        (NodeKind::Msw, NodeKind::Expl) => match rel {
            InstanceRel::Earlier | InstanceRel::Incomparable => NodeOrder::Less,
            InstanceRel::Equal | InstanceRel::Later => NodeOrder::Incomparable,
        },
        (NodeKind::Expl, NodeKind::Msw) => node_order(b, a).reverse(),
        (NodeKind::Expl, NodeKind::Expl) => match rel {
            InstanceRel::Equal if a.tag == b.tag => NodeOrder::Equal,
            InstanceRel::Incomparable => NodeOrder::from_ordering(a.key.cmp(&b.key).then_with(|| a.at.cmp(b.at))),
            _ => NodeOrder::Incomparable,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(toks: &[&str]) -> Instance {
        Instance::from_tokens(toks.iter().map(|t| Sym::new(t)))
    }

    fn msw<'a>(r: &str, at: &'a Instance) -> Header<'a> {
        Header {
            kind: NodeKind::Msw,
            key: Sym::new(r),
            tag: Sym::new(r),
            at,
        }
    }

    fn expl<'a>(g: &str, at: &'a Instance) -> Header<'a> {
        Header {
            kind: NodeKind::Expl,
            key: Sym::new(g),
            tag: Sym::new(g),
            at,
        }
    }

    #[test]
    fn msw_before_later_msw() {
        let (h0, h1) = (inst(&[]), inst(&["next"]));
        assert_eq!(node_order(msw("t(s0)", &h0), msw("t(s1)", &h1)), NodeOrder::Less);
        assert_eq!(node_order(msw("t(s1)", &h1), msw("t(s0)", &h0)), NodeOrder::Greater);
    }

    #[test]
    fn msw_before_later_expl() {
        let (h0, h1) = (inst(&[]), inst(&["next"]));
        assert_eq!(
            node_order(msw("t(s0)", &h0), expl("reach(s1,s3)", &h1)),
            NodeOrder::Less
        );
    }

    #[test]
    fn msw_and_expl_at_same_instance_unordered() {
        let h = inst(&[]);
        assert_eq!(node_order(expl("g1", &h), msw("r", &h)), NodeOrder::Incomparable);
        assert_eq!(node_order(msw("r", &h), expl("g1", &h)), NodeOrder::Incomparable);
    }

    #[test]
    fn expl_pairs() {
        let (a, b, ab) = (inst(&["a"]), inst(&["b"]), inst(&["a", "b"]));
        assert_eq!(node_order(expl("g", &a), expl("h", &b)), NodeOrder::Less);
        assert_eq!(node_order(expl("h", &a), expl("g", &b)), NodeOrder::Greater);
        assert_eq!(node_order(expl("g", &a), expl("g", &b)), NodeOrder::Less);
        assert_eq!(node_order(expl("g", &a), expl("g", &a)), NodeOrder::Equal);
        assert_eq!(node_order(expl("g", &a), expl("h", &a)), NodeOrder::Incomparable);
        assert_eq!(node_order(expl("g", &a), expl("g", &ab)), NodeOrder::Incomparable);
    }

    #[test]
    fn msw_total() {
        let (a, b) = (inst(&["a"]), inst(&["b"]));
        assert_eq!(node_order(msw("r", &a), msw("r", &b)), NodeOrder::Less);
        assert_eq!(node_order(msw("r", &a), msw("r", &a)), NodeOrder::Equal);
        assert_eq!(node_order(msw("q", &b), msw("r", &a)), NodeOrder::Less);
    }
}
