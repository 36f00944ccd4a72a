//! Line-oriented tokenizer shared by the model file formats.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '\''
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if matches!(c, ';' | ':' | ',' | '{' | '}') {
                out.push(Token {
                    tok: Tok::Punct(c),
                    line: lineno + 1,
                    col,
                });
                i += 1;
            } else if is_word_char(c) || c == '-' || c == '+' {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exponent_sign =
                        (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E') && chars[start].is_ascii_digit();
                    if is_word_char(d) || exponent_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line: lineno + 1,
                    col,
                });
            } else {
                return Err(Error::Syntax {
                    line: lineno + 1,
                    col,
                    msg: format!("unexpected character '{c}'"),
                });
            }
        }
    }
    Ok(out)
}

/// Cursor over a token stream with position-aware errors.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Cursor> {
        let toks = tokenize(text)?;
        let last_line = text.lines().count().max(1);
        Ok(Cursor {
            toks,
            pos: 0,
            last_line,
        })
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.last_line, 1),
        };
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    /// Error positioned at the token just consumed.
    pub fn error_prev<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos.saturating_sub(1).min(self.toks.len() - 1)];
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    pub fn word(&mut self, what: &str) -> Result<String> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Word(w), .. }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected '{kw}'")),
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(w)) if w == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn punct(&mut self, p: char) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.error(format!("expected '{p}'"))
        }
    }

    pub fn eat(&mut self, p: char) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn prob(&mut self) -> Result<f64> {
        let w = self.word("probability")?;
        match w.parse::<f64>() {
            Ok(p) if p.is_finite() => Ok(p),
            _ => self.error_prev(format!("invalid probability '{w}'")),
        }
    }

    /// `<id> <prob>, <id> <prob>, ... ;`
    pub fn outcome_list(&mut self) -> Result<Vec<(String, f64)>> {
        let mut outcomes = Vec::new();
        loop {
            let target = self.word("target")?;
            let p = self.prob()?;
            outcomes.push((target, p));
            if self.eat(';') {
                return Ok(outcomes);
            }
            self.punct(',')?;
        }
    }
}
