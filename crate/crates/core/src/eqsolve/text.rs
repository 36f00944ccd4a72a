use std::collections::HashMap;
use std::fmt::Write as _;

use super::system::{Expr, ExprId, PolySystem};
use crate::error::{Error, Result};
use crate::explgen::FixKind;

/// Equations one per line, `x = poly`, preceded by a legend of what each
/// variable stands for. Subexpressions used more than once are written as
/// auxiliary `_e<id>` equations so the output stays linear in the DAG size.
pub fn format_system(sys: &PolySystem) -> String {
    let roots: Vec<ExprId> = (0..sys.var_count()).filter_map(|v| sys.equation(v)).collect();
    let mut parents: HashMap<ExprId, usize> = HashMap::new();
    for id in sys.closure(&roots) {
        for c in children(sys.expr(id)) {
            *parents.entry(c).or_default() += 1;
        }
    }
    for r in &roots {
        *parents.entry(*r).or_default() += 1;
    }
    let shared = |id: ExprId| {
        parents.get(&id).copied().unwrap_or(0) > 1
            && matches!(sys.expr(id), Expr::Sum(_) | Expr::Prod(_) | Expr::Complement(_))
    };

    let mut out = String::new();
    for v in sys.vars() {
        let _ = writeln!(out, "# {}: {}", v.name, v.meaning);
    }
    let mut aux = Vec::new();
    for (var, info) in sys.vars().iter().enumerate() {
        let Some(root) = sys.equation(var) else { continue };
        let body = write_expr(sys, root, &shared, &mut aux, true);
        let prefix = if info.kind == FixKind::Gfp { "gfp " } else { "" };
        let _ = writeln!(out, "{prefix}{} = {body}", info.name);
    }
    let mut done = std::collections::HashSet::new();
    while let Some(id) = aux.pop() {
        if !done.insert(id) {
            continue;
        }
        let body = write_expr(sys, id, &shared, &mut aux, true);
        let _ = writeln!(out, "_e{} = {body}", id.index());
    }
    out
}

fn children(e: &Expr) -> Vec<ExprId> {
    match e {
        Expr::Sum(ts) => ts.iter().map(|t| t.1).collect(),
        Expr::Prod(fs) => fs.clone(),
        Expr::Complement(c) => vec![*c],
        _ => Vec::new(),
    }
}

fn number(c: f64) -> String {
    format!("{c}")
}

fn write_expr(
    sys: &PolySystem,
    id: ExprId,
    shared: &dyn Fn(ExprId) -> bool,
    aux: &mut Vec<ExprId>,
    top: bool,
) -> String {
    if !top && shared(id) {
        aux.push(id);
        return format!("_e{}", id.index());
    }
    match sys.expr(id) {
        Expr::Const(c) => number(*c),
        Expr::Var(v) => sys.vars()[*v].name.clone(),
        Expr::Sum(ts) => {
            let parts: Vec<String> = ts
                .iter()
                .map(|&(c, e)| {
                    if sys.const_value(e) == Some(1.0) {
                        return number(c);
                    }
                    let inner = write_expr(sys, e, shared, aux, false);
                    let inner = match sys.expr(e) {
                        Expr::Sum(_) if !shared(e) => format!("({inner})"),
                        _ => inner,
                    };
                    format!("{}*{inner}", number(c))
                })
                .collect();
            parts.join(" + ")
        }
        Expr::Prod(fs) => fs
            .iter()
            .map(|&f| {
                let inner = write_expr(sys, f, shared, aux, false);
                match sys.expr(f) {
                    Expr::Sum(_) if !shared(f) => format!("({inner})"),
                    _ => inner,
                }
            })
            .collect::<Vec<_>>()
            .join("*"),
        Expr::Complement(e) => {
            let inner = write_expr(sys, *e, shared, aux, false);
            match sys.expr(*e) {
                Expr::Var(_) | Expr::Const(_) => format!("(1 - {inner})"),
                _ if shared(*e) => format!("(1 - {inner})"),
                _ => format!("(1 - ({inner}))"),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                line: lineno,
                col: start + 1,
                msg: format!("bad number {s}"),
            })?;
            out.push((Tok::Num(v), start + 1));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start + 1));
        } else if "=+-*()".contains(c) {
            out.push((Tok::Sym(c), i + 1));
            i += 1;
        } else {
            return Err(Error::Syntax {
                line: lineno,
                col: i + 1,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    names: &'a mut HashMap<String, usize>,
    sys: &'a mut PolySystem,
}

impl LineParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let col = self.toks.get(self.pos).map_or(0, |t| t.1);
        Err(Error::Syntax {
            line: self.line,
            col,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.names.get(name) {
            return v;
        }
        let v = self.sys.add_var(name, name, FixKind::Lfp);
        self.names.insert(name.to_string(), v);
        v
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<ExprId> {
        let mut terms = vec![self.term()?];
        loop {
            let sign = match self.peek() {
                Some(Tok::Sym('+')) => 1.0,
                Some(Tok::Sym('-')) => -1.0,
                _ => break,
            };
            self.pos += 1;
            let t = self.term()?;
            terms.push(Term {
                coeff: sign * t.coeff,
                explicit: true,
                ..t
            });
        }
        if let [t] = terms.as_slice() {
            if !t.explicit {
                return Ok(t.body);
            }
        }
        let terms = terms.into_iter().map(|t| (t.coeff, t.body)).collect();
        Ok(self.sys.sum(terms))
    }

    // term := '-'* factor ('*' factor)*; numeric factors form the coefficient
    fn term(&mut self) -> Result<Term> {
        let mut coeff = 1.0;
        let mut explicit = false;
        let mut factors = Vec::new();
        while self.peek() == Some(&Tok::Sym('-')) {
            self.pos += 1;
            coeff = -coeff;
            explicit = true;
        }
        loop {
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    self.pos += 1;
                    coeff *= v;
                    explicit = true;
                }
                Some(Tok::Ident(name)) => {
                    self.pos += 1;
                    let v = self.var(&name);
                    factors.push(self.sys.var(v));
                }
                Some(Tok::Sym('(')) => {
                    self.pos += 1;
                    let e = self.expr()?;
                    if self.peek() != Some(&Tok::Sym(')')) {
                        return self.err("expected ')'");
                    }
                    self.pos += 1;
                    factors.push(e);
                }
                _ => return self.err("expected a number, variable or '('"),
            }
            if self.peek() == Some(&Tok::Sym('*')) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let body = match factors.len() {
            0 => self.sys.constant(1.0),
            1 => factors[0],
            _ => self.sys.prod(factors),
        };
        Ok(Term { coeff, explicit, body })
    }
}

struct Term {
    coeff: f64,
    explicit: bool,
    body: ExprId,
}

/// Parses equations written as by [`format_system`]: `[lfp|gfp] x = poly`,
/// `#` comments, `+ - *` and parentheses. `1 - e` is read as a sum with a
/// negative coefficient.
pub fn parse_system(text: &str) -> Result<PolySystem> {
    let mut sys = PolySystem::new();
    let mut names = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let toks = lex(line, lineno)?;
        let mut p = LineParser {
            toks,
            pos: 0,
            line: lineno,
            names: &mut names,
            sys: &mut sys,
        };
        let mut kind = FixKind::Lfp;
        if let Some(Tok::Ident(k)) = p.peek() {
            if (k == "lfp" || k == "gfp") && matches!(p.toks.get(1), Some((Tok::Ident(_), _))) {
                kind = if k == "gfp" { FixKind::Gfp } else { FixKind::Lfp };
                p.pos += 1;
            }
        }
        let Some(Tok::Ident(name)) = p.peek().cloned() else {
            return p.err("expected a variable name");
        };
        p.pos += 1;
        if p.peek() != Some(&Tok::Sym('=')) {
            return p.err("expected '='");
        }
        p.pos += 1;
        let v = p.var(&name);
        let rhs = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        if sys.equation(v).is_some() {
            return Err(Error::Syntax {
                line: lineno,
                col: 1,
                msg: format!("second equation for {name}"),
            });
        }
        sys.set_equation(v, rhs);
        sys.set_kind(v, kind);
    }
    for v in 0..sys.var_count() {
        if sys.equation(v).is_none() {
            return Err(Error::Formula(format!(
                "variable {} has no equation",
                sys.vars()[v].name
            )));
        }
    }
    Ok(sys)
}
