use std::fmt;

use crate::symbol::Sym;

/// A time position in the branching process: a finite path of branch tokens
/// extending an implicit base instance. The empty path is the base itself.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance(Vec<Sym>);

/// How two instances relate in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceRel {
    Earlier,
    Equal,
    Later,
    /// Divergent branches (`h1 ∼ h2`).
    Incomparable,
}

impl Instance {
    pub fn base() -> Instance {
        Instance(Vec::new())
    }

    pub fn from_tokens(tokens: impl IntoIterator<Item = Sym>) -> Instance {
        Instance(tokens.into_iter().collect())
    }

    pub fn tokens(&self) -> &[Sym] {
        &self.0
    }

    pub fn is_base(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, token: Sym) -> Instance {
        let mut v = self.0.clone();
        v.push(token);
        Instance(v)
    }

    /// `self` followed by the tokens of `rest`.
    pub fn join(&self, rest: &Instance) -> Instance {
        if rest.is_base() {
            return self.clone();
        }
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        Instance(v)
    }

    pub fn is_prefix_of(&self, other: &Instance) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn strip_prefix(&self, prefix: &Instance) -> Option<Instance> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|r| Instance(r.to_vec()))
    }

    /// Strict time order: `self` is a proper prefix of `other`.
    pub fn earlier(&self, other: &Instance) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    pub fn relation(&self, other: &Instance) -> InstanceRel {
        if self == other {
            InstanceRel::Equal
        } else if self.earlier(other) {
            InstanceRel::Earlier
        } else if other.earlier(self) {
            InstanceRel::Later
        } else {
            InstanceRel::Incomparable
        }
    }

    /// Longest common prefix.
    pub fn common_prefix(&self, other: &Instance) -> Instance {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        Instance(self.0[..n].to_vec())
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(s: &str) -> Instance {
        Instance::from_tokens(s.chars().map(|c| Sym::new(&c.to_string())))
    }

    #[test]
    fn relations() {
        assert_eq!(inst("").relation(&inst("a")), InstanceRel::Earlier);
        assert_eq!(inst("ab").relation(&inst("a")), InstanceRel::Later);
        assert_eq!(inst("ab").relation(&inst("ac")), InstanceRel::Incomparable);
        assert_eq!(inst("ab").relation(&inst("ab")), InstanceRel::Equal);
        assert_eq!(inst("abc").common_prefix(&inst("abd")), inst("ab"));
        assert_eq!(inst("abc").strip_prefix(&inst("a")), Some(inst("bc")));
        assert_eq!(inst("abc").strip_prefix(&inst("b")), None);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        proptest::collection::vec(0u8..3, 0..5)
            .prop_map(|v| Instance::from_tokens(v.into_iter().map(|t| Sym::new(&format!("k{t}")))))
    }

    proptest! {
        #[test]
        fn prefix_order_laws(a in arb_instance(), b in arb_instance(), c in arb_instance()) {
            prop_assert!(!a.earlier(&a));
            if a.earlier(&b) && b.earlier(&c) {
                prop_assert!(a.earlier(&c));
            }
            let cases = [a.earlier(&b), b.earlier(&a), a == b,
                         a.relation(&b) == InstanceRel::Incomparable];
            prop_assert_eq!(cases.iter().filter(|&&x| x).count(), 1);
            if a.earlier(&b) {
                prop_assert!(!b.earlier(&a));
            }
        }
    }
}
