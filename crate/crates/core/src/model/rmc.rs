use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use super::dist::Distribution;
use super::dtmc::{at_line, line_of};
use super::lexer::Cursor;
use crate::error::{Error, Result};
use crate::symbol::Sym;

/// A location inside a component: a node or a port of one of its boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    Node(Sym),
    Call(Sym),
    /// Return port, 1-based exit index of the callee.
    Ret(Sym, usize),
}

impl Port {
    pub fn parse(spelling: &str) -> Option<Port> {
        match spelling.split_once('.') {
            None => Some(Port::Node(Sym::new(spelling))),
            Some((b, "call")) => Some(Port::Call(Sym::new(b))),
            Some((b, rest)) => {
                let k: usize = rest.strip_prefix("ret")?.parse().ok()?;
                (k >= 1).then(|| Port::Ret(Sym::new(b), k))
            }
        }
    }

    pub fn sym(self) -> Sym {
        Sym::new(&self.to_string())
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Node(n) => write!(f, "{n}"),
            Port::Call(b) => write!(f, "{b}.call"),
            Port::Ret(b, k) => write!(f, "{b}.ret{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmcBox {
    pub name: Sym,
    pub callee: Sym,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: Sym,
    pub entry: Sym,
    pub exits: Vec<Sym>,
    /// All nodes in declaration order, entry and exits included.
    pub nodes: Vec<Sym>,
    pub boxes: Vec<RmcBox>,
    /// Probabilistic transitions keyed by source; outcomes spell target ports.
    pub trans: BTreeMap<Port, Distribution>,
}

impl Component {
    pub fn find_box(&self, b: Sym) -> Option<&RmcBox> {
        self.boxes.iter().find(|x| x.name == b)
    }

    pub fn exit_index(&self, n: Sym) -> Option<usize> {
        self.exits.iter().position(|&x| x == n).map(|i| i + 1)
    }
}

/// Recursive Markov chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Rmc {
    components: Vec<Component>,
    index: HashMap<Sym, usize>,
}

impl Rmc {
    pub fn new(components: Vec<Component>) -> Result<Rmc> {
        let mut index = HashMap::new();
        for (i, c) in components.iter().enumerate() {
            if index.insert(c.name, i).is_some() {
                return Err(Error::Model(format!("duplicate component {}", c.name)));
            }
        }
        let rmc = Rmc { components, index };
        for c in &rmc.components {
            rmc.validate_component(c)?;
        }
        Ok(rmc)
    }

    fn validate_component(&self, c: &Component) -> Result<()> {
        let has_node = |n: Sym| c.nodes.contains(&n);
        if !has_node(c.entry) {
            return Err(Error::Model(format!("{}: entry {} is not a node", c.name, c.entry)));
        }
        for b in &c.boxes {
            if !self.index.contains_key(&b.callee) {
                return Err(Error::Model(format!(
                    "{}: box {} calls unknown component {}",
                    c.name, b.name, b.callee
                )));
            }
        }
        let check_port = |p: Port, as_source: bool| -> Result<()> {
            match p {
                Port::Node(n) if has_node(n) => {
                    if as_source && c.exits.contains(&n) {
                        Err(Error::Model(format!("{}: exit {n} has outgoing transitions", c.name)))
                    } else {
                        Ok(())
                    }
                }
                Port::Node(n) => Err(Error::Model(format!("{}: dangling port {n}", c.name))),
                Port::Call(b) | Port::Ret(b, _) if c.find_box(b).is_none() => {
                    Err(Error::Model(format!("{}: dangling port {p}", c.name)))
                }
                Port::Call(_) if as_source => Err(Error::Model(format!(
                    "{}: call port {p} cannot have probabilistic transitions",
                    c.name
                ))),
                Port::Ret(_, _) if !as_source => Err(Error::Model(format!(
                    "{}: return port {p} cannot be a transition target",
                    c.name
                ))),
                Port::Ret(b, k) => {
                    let callee = &self.components[self.index[&c.find_box(b).unwrap().callee]];
                    if k > callee.exits.len() {
                        Err(Error::Model(format!(
                            "{}: arity mismatch: {p} but {} has {} exit(s)",
                            c.name,
                            callee.name,
                            callee.exits.len()
                        )))
                    } else {
                        Ok(())
                    }
                }
                Port::Call(_) => Ok(()),
            }
        };
        for (src, dist) in &c.trans {
            check_port(*src, true)?;
            for &(t, _) in dist.outcomes() {
                let port =
                    Port::parse(t.as_str()).ok_or_else(|| Error::Model(format!("{}: malformed port {t}", c.name)))?;
                check_port(port, false)?;
            }
        }
        Ok(())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, name: Sym) -> Option<&Component> {
        self.index.get(&name).map(|&i| &self.components[i])
    }

    /// Largest exit count over all components.
    pub fn max_exits(&self) -> usize {
        self.components.iter().map(|c| c.exits.len()).max().unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.components {
            let _ = writeln!(out, "component {} {{", c.name);
            let _ = writeln!(out, "  entry {};", c.entry);
            if !c.exits.is_empty() {
                let ex: Vec<_> = c.exits.iter().map(|x| x.as_str()).collect();
                let _ = writeln!(out, "  exit {};", ex.join(", "));
            }
            for n in &c.nodes {
                if *n != c.entry && !c.exits.contains(n) {
                    let _ = writeln!(out, "  node {n};");
                }
            }
            for b in &c.boxes {
                let _ = writeln!(out, "  box {} calls {};", b.name, b.callee);
            }
            for (src, d) in &c.trans {
                let _ = writeln!(out, "  trans {src}: {d};");
            }
            out.push_str("}\n");
        }
        out
    }
}

/// ```text
/// component <id> { entry <n>; exit <n1>,<n2>; node <n>; box <b> calls <comp>;
///                  trans <n>: <port> <prob>, ... ; }
/// ```
pub fn parse_rmc(text: &str) -> Result<Rmc> {
    let mut cur = Cursor::new(text)?;
    let mut comps = Vec::new();
    while !cur.at_end() {
        cur.keyword("component")?;
        let name = Sym::new(&cur.word("component name")?);
        cur.punct('{')?;
        let mut entry = None;
        let mut exits = Vec::new();
        let mut nodes: Vec<Sym> = Vec::new();
        let mut boxes = Vec::new();
        let mut trans = BTreeMap::new();
        let add_node = |nodes: &mut Vec<Sym>, n: Sym| {
            if !nodes.contains(&n) {
                nodes.push(n);
            }
        };
        while !cur.eat('}') {
            if cur.at_end() {
                return cur.error("unterminated component");
            }
            if cur.eat_keyword("entry") {
                if entry.is_some() {
                    return cur.error_prev("duplicate entry");
                }
                let n = node_name(&mut cur)?;
                add_node(&mut nodes, n);
                entry = Some(n);
                cur.punct(';')?;
            } else if cur.eat_keyword("exit") {
                loop {
                    let n = node_name(&mut cur)?;
                    add_node(&mut nodes, n);
                    exits.push(n);
                    if !cur.eat(',') {
                        break;
                    }
                }
                cur.punct(';')?;
            } else if cur.eat_keyword("node") {
                loop {
                    let n = node_name(&mut cur)?;
                    add_node(&mut nodes, n);
                    if !cur.eat(',') {
                        break;
                    }
                }
                cur.punct(';')?;
            } else if cur.eat_keyword("box") {
                let b = Sym::new(&cur.word("box name")?);
                cur.keyword("calls")?;
                let callee = Sym::new(&cur.word("component name")?);
                cur.punct(';')?;
                boxes.push(RmcBox { name: b, callee });
            } else if cur.eat_keyword("trans") {
                let line = line_of(&cur);
                let src_text = cur.word("source")?;
                let Some(src) = Port::parse(&src_text) else {
                    return cur.error_prev(format!("malformed port {src_text}"));
                };
                cur.punct(':')?;
                let outcomes = cur.outcome_list()?;
                let mut targets = Vec::new();
                for (t, p) in outcomes {
                    let Some(port) = Port::parse(&t) else {
                        return Err(Error::Model(format!("line {line}: malformed port {t}")));
                    };
                    targets.push((port.sym(), p));
                }
                let dist = Distribution::new(targets).map_err(|e| at_line(line, e))?;
                if trans.insert(src, dist).is_some() {
                    return Err(Error::Model(format!("line {line}: duplicate transitions for {src}")));
                }
            } else {
                return cur.error("expected entry, exit, node, box, trans or '}'");
            }
        }
        let Some(entry) = entry else {
            return Err(Error::Model(format!("component {name} has no entry")));
        };
        comps.push(Component {
            name,
            entry,
            exits,
            nodes,
            boxes,
            trans,
        });
    }
    Rmc::new(comps)
}

fn node_name(cur: &mut Cursor) -> Result<Sym> {
    let n = cur.word("node name")?;
    if n.contains('.') {
        return cur.error_prev(format!("node name {n} may not contain '.'"));
    }
    Ok(Sym::new(&n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_mismatch() {
        let text = "\
component a { entry en; exit x; box b calls c; trans en: b.call 1; trans b.ret2: x 1; }
component c { entry e; exit f; trans e: f 1; }";
        let err = parse_rmc(text).unwrap_err();
        assert!(err.to_string().contains("arity mismatch"), "{err}");
    }

    #[test]
    fn dangling_port() {
        let text = "component a { entry en; exit x; trans en: zz.call 1; }";
        let err = parse_rmc(text).unwrap_err();
        assert!(err.to_string().contains("dangling port"), "{err}");
    }

    #[test]
    fn entry_is_exit() {
        let m = parse_rmc("component a { entry n; exit n; }").unwrap();
        let c = m.component(Sym::new("a")).unwrap();
        assert_eq!(c.nodes.len(), 1);
        assert_eq!(c.exit_index(Sym::new("n")), Some(1));
        assert_eq!(m.max_exits(), 1);
    }

    #[test]
    fn port_spelling() {
        assert_eq!(Port::parse("b1.ret2"), Some(Port::Ret(Sym::new("b1"), 2)));
        assert_eq!(Port::parse("b1.call"), Some(Port::Call(Sym::new("b1"))));
        assert_eq!(Port::parse("b1.ret0"), None);
        assert_eq!(Port::parse("b1.foo"), None);
    }
}
