use std::collections::BTreeSet;
use std::fmt::Write;

use super::store::{FedId, FedNode, FedStore};
use crate::error::Result;
use crate::explgen::{ExplGrammar, Loc};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering of the given (title, root) diagrams. Each root gets
/// its own cluster; nodes are numbered by store id so shared sub-diagrams
/// appear once per cluster.
pub fn to_dot(store: &FedStore, grammar: &mut ExplGrammar, roots: &[(String, FedId)]) -> Result<String> {
    let mut out = String::from("digraph fed {\n  node [fontname=\"monospace\"];\n");
    for (ci, (title, root)) in roots.iter().enumerate() {
        let (nodes, edges) = store.stats(*root);
        let _ = writeln!(out, "  subgraph cluster_{ci} {{");
        let _ = writeln!(
            out,
            "    label={};",
            quote(&format!("{title} nodes={nodes} edges={edges}"))
        );
        let ids: BTreeSet<FedId> = store.reachable(*root).into_iter().collect();
        let name = |id: FedId| format!("c{ci}_{}", id.index());
        for &id in &ids {
            let (label, shape) = match store.node(id) {
                FedNode::Tt => ("tt".to_string(), "box, peripheries=2"),
                FedNode::Ff => ("ff".to_string(), "box, peripheries=2"),
                FedNode::Msw { process, at, .. } => (format!("{process}@{}", Loc::at(at.clone())), "ellipse"),
                FedNode::Expl { goal, at, .. } => (
                    format!("expl({},{})", store.goal_sym(*goal), Loc::at(at.clone())),
                    "box",
                ),
                FedNode::Joint { goals, at, .. } => {
                    let names: Vec<String> = goals.iter().map(|g| format!("expl({})", store.goal_sym(*g))).collect();
                    (format!("joint({},{})", names.join(","), Loc::at(at.clone())), "box")
                }
            };
            let _ = writeln!(out, "    {} [label={}, shape={shape}];", name(id), quote(&label));
        }
        for &id in &ids {
            match store.node(id) {
                FedNode::Msw { process, alts, .. } => {
                    let outcomes: Vec<String> = grammar
                        .distribution(*process)?
                        .outcomes()
                        .iter()
                        .map(|(v, _)| v.to_string())
                        .collect();
                    for (v, c) in outcomes.iter().zip(alts) {
                        let _ = writeln!(out, "    {} -> {} [label={}];", name(id), name(*c), quote(v));
                    }
                }
                FedNode::Expl { lo, hi, .. } => {
                    let _ = writeln!(out, "    {} -> {} [label=\"0\"];", name(id), name(*lo));
                    let _ = writeln!(out, "    {} -> {} [label=\"1\"];", name(id), name(*hi));
                }
                FedNode::Joint { goals, kids, .. } => {
                    for (m, c) in kids.iter().enumerate() {
                        let bits: String = (0..goals.len())
                            .map(|i| if m >> i & 1 == 1 { '1' } else { '0' })
                            .collect();
                        let _ = writeln!(out, "    {} -> {} [label={}];", name(id), name(*c), quote(&bits));
                    }
                }
                _ => {}
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}
