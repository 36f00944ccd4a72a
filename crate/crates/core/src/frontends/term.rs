use std::fmt;

use crate::error::{Error, Result};
use crate::symbol::atom;

/// Ground term read from formula text: `f(a, g(b), 0.5)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Num(f64),
    App(String, Vec<Term>),
}

impl Term {
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::App(f, args) => Some((f, args.len())),
            Term::Num(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Num(_) => &[],
        }
    }

    /// A constant name (zero-arity application).
    pub fn name(&self) -> Option<&str> {
        match self {
            Term::App(f, args) if args.is_empty() => Some(f),
            _ => None,
        }
    }

    pub fn number(&self) -> Option<f64> {
        match self {
            Term::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                f.write_str(&atom(name))?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

struct Reader<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    src: &'a str,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            col: self.pos + 1,
            msg: format!("{} in {:?}", msg.into(), self.src),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return self.err("unexpected end of formula");
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        let name = if c == '\'' {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|c| c != '\'') {
                self.pos += 1;
            }
            if self.peek().is_none() {
                return self.err("unterminated quoted name");
            }
            let n: String = self.chars[start..self.pos].iter().collect();
            self.pos += 1;
            n
        } else if c.is_alphanumeric() || c == '_' {
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '.') {
                self.pos += 1;
            }
            self.chars[start..self.pos].iter().collect()
        } else {
            return self.err(format!("unexpected {c:?}"));
        };
        self.skip_ws();
        let mut args = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                args.push(self.term()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected ',' or ')'"),
                }
            }
        }
        Ok(Term::App(name, args))
    }

    // decimal, optionally followed by '/' denominator
    fn number(&mut self) -> Result<Term> {
        let read = |r: &mut Self| -> Result<f64> {
            let start = r.pos;
            while r
                .peek()
                .is_some_and(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
                || (r.peek().is_some_and(|c| c == '-' || c == '+')
                    && matches!(r.chars.get(r.pos.wrapping_sub(1)), Some('e' | 'E')))
            {
                r.pos += 1;
            }
            let s: String = r.chars[start..r.pos].iter().collect();
            match s.parse::<f64>() {
                Ok(v) => Ok(v),
                Err(_) => r.err(format!("bad number {s:?}")),
            }
        };
        let mut v = read(self)?;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            let d = read(self)?;
            if d == 0.0 {
                return self.err("zero denominator");
            }
            v /= d;
        }
        Ok(Term::Num(v))
    }
}

/// Parses one term; `line` is reported in syntax errors.
pub fn parse_term(text: &str, line: usize) -> Result<Term> {
    let mut r = Reader {
        chars: text.chars().collect(),
        pos: 0,
        line,
        src: text,
    };
    let t = r.term()?;
    r.skip_ws();
    if r.pos != r.chars.len() {
        return r.err("trailing input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_terms_and_numbers() {
        let t = parse_term("pr(until(tt, prop(a)), geq, 1/6)", 1).unwrap();
        assert_eq!(t.functor(), Some(("pr", 3)));
        assert!((t.args()[2].number().unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(t.args()[0].to_string(), "until(tt,prop(a))");
        assert_eq!(parse_term("'W'", 1).unwrap().name(), Some("W"));
        assert!(parse_term("f(a,", 3).is_err());
        assert!(parse_term("f(a) g", 1).is_err());
    }
}
