use std::fmt;

use crate::error::{Error, Result};
use crate::symbol::Sym;

pub const SUM_TOLERANCE: f64 = 1e-9;

/// A finite distribution over symbolic outcomes, in declaration order.
#[derive(Clone, PartialEq)]
pub struct Distribution {
    outcomes: Vec<(Sym, f64)>,
}

impl Distribution {
    pub fn new(outcomes: Vec<(Sym, f64)>) -> Result<Distribution> {
        if outcomes.is_empty() {
            return Err(Error::Model("distribution has no outcomes".into()));
        }
        for (i, &(v, p)) in outcomes.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Model(format!("probability {p} of outcome {v} is outside [0,1]")));
            }
            if outcomes[..i].iter().any(|&(w, _)| w == v) {
                return Err(Error::Model(format!("duplicate outcome {v}")));
            }
        }
        let sum: f64 = outcomes.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Model(format!("distribution sums to {sum}")));
        }
        Ok(Distribution { outcomes })
    }

    /// Point mass on a single outcome.
    pub fn dirac(v: Sym) -> Distribution {
        Distribution {
            outcomes: vec![(v, 1.0)],
        }
    }

    pub fn outcomes(&self) -> &[(Sym, f64)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn prob(&self, v: Sym) -> f64 {
        self.outcomes.iter().find(|&&(w, _)| w == v).map_or(0.0, |&(_, p)| p)
    }

    pub fn position(&self, v: Sym) -> Option<usize> {
        self.outcomes.iter().position(|&(w, _)| w == v)
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.outcomes.iter().map(|(v, p)| (v, p)))
            .finish()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, p)) in self.outcomes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} {p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(&str, f64)]) -> Result<Distribution> {
        Distribution::new(pairs.iter().map(|&(v, p)| (Sym::new(v), p)).collect())
    }

    #[test]
    fn rejects_bad_sum() {
        let err = d(&[("a", 0.5), ("b", 0.4)]).unwrap_err();
        assert!(err.to_string().contains("distribution sums to 0.9"), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_negative() {
        assert!(d(&[("a", 0.5), ("a", 0.5)]).is_err());
        assert!(d(&[("a", -0.5), ("b", 1.5)]).is_err());
    }

    #[test]
    fn tolerates_rounding() {
        let dist = d(&[("a", 0.1), ("b", 0.2), ("c", 0.7)]).unwrap();
        assert_eq!(dist.prob(Sym::new("b")), 0.2);
        assert_eq!(dist.prob(Sym::new("zz")), 0.0);
    }
}
