use std::fmt::Write as _;
use std::time::Duration;

use fedcheck::eqsolve::{PolySystem, Solution};
use fedcheck::explgen::FixKind;
use fedcheck::Analysis;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub productions: usize,
    pub fed_nodes: usize,
    pub merges: usize,
    pub vars: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub var: String,
    pub goal: String,
    pub value: f64,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub method: String,
    pub value: f64,
    /// Expected deviation bound for sampled estimates.
    pub tolerance: Option<f64>,
}

/// Outcome of one invocation, printed as text or JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub query: String,
    pub probability: Option<f64>,
    /// Verdict of a `pr`-rooted query.
    pub holds: Option<bool>,
    pub iterations: usize,
    pub residual: f64,
    pub counts: Counts,
    pub wall_time_s: f64,
    pub variables: Vec<Variable>,
    pub oracle: Vec<OracleValue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grammar: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equations: Option<String>,
}

fn kind_name(k: FixKind) -> &'static str {
    match k {
        FixKind::Lfp => "lfp",
        FixKind::Gfp => "gfp",
    }
}

pub fn variables(sys: &PolySystem, sol: &Solution) -> Vec<Variable> {
    sys.vars()
        .iter()
        .zip(&sol.values)
        .map(|(v, &value)| Variable {
            var: v.name.clone(),
            goal: v.meaning.clone(),
            value,
            kind: kind_name(v.kind).to_string(),
        })
        .collect()
}

impl Report {
    pub fn from_analysis(query: String, a: &Analysis, elapsed: Duration) -> Report {
        let c = a.counts();
        Report {
            query,
            probability: Some(a.probability),
            iterations: a.solution.iterations,
            residual: a.solution.residual,
            counts: Counts {
                productions: c.productions,
                fed_nodes: c.fed_nodes,
                merges: c.merges,
                vars: c.vars,
            },
            variables: variables(&a.assembly.system, &a.solution),
            wall_time_s: elapsed.as_secs_f64(),
            ..Report::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(g) = &self.grammar {
            out.push_str(g);
            out.push('\n');
        }
        if let Some(e) = &self.equations {
            out.push_str(e);
            out.push('\n');
        }
        writeln!(out, "query: {}", self.query).unwrap();
        if let Some(p) = self.probability {
            writeln!(out, "probability: {p}").unwrap();
        }
        if let Some(h) = self.holds {
            writeln!(out, "holds: {h}").unwrap();
        }
        writeln!(out, "iterations: {}, residual: {:e}", self.iterations, self.residual).unwrap();
        let c = &self.counts;
        writeln!(
            out,
            "productions: {}, fed nodes: {}, merges: {}, vars: {}",
            c.productions, c.fed_nodes, c.merges, c.vars
        )
        .unwrap();
        for o in &self.oracle {
            match o.tolerance {
                Some(t) => writeln!(out, "oracle {}: {} (+/- {t:.2e})", o.method, o.value).unwrap(),
                None => writeln!(out, "oracle {}: {}", o.method, o.value).unwrap(),
            }
        }
        writeln!(out, "time: {:.6} s", self.wall_time_s).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trips() {
        let r = Report {
            query: "reach(s0,s3)".into(),
            probability: Some(0.6),
            holds: Some(true),
            iterations: 3,
            residual: 1e-12,
            counts: Counts {
                productions: 7,
                fed_nodes: 9,
                merges: 0,
                vars: 4,
            },
            wall_time_s: 0.001,
            variables: vec![Variable {
                var: "x0".into(),
                goal: "reach(s0,s3)".into(),
                value: 0.6,
                kind: "lfp".into(),
            }],
            oracle: vec![OracleValue {
                method: "bounded-mass(60)".into(),
                value: 0.59,
                tolerance: None,
            }],
            grammar: None,
            equations: Some("x0 = 1\n".into()),
        };
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
    }
}
