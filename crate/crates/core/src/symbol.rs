//! Process-wide interned identifiers.
//!
//! States, actions, propositions, processes and goal spellings are all
//! interned once and compared by index. Ordering follows the spelling, so
//! any collection keyed by `Sym` iterates in lexicographic order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sym(u32);

struct Interner {
    names: Vec<&'static str>,
    index: HashMap<&'static str, u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static TABLE: OnceLock<Mutex<Interner>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Mutex::new(Interner {
            names: Vec::new(),
            index: HashMap::new(),
        })
    })
}

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut table = interner().lock().expect("symbol table poisoned");
        if let Some(&id) = table.index.get(name) {
            return Sym(id);
        }
        // Interned names live for the rest of the process.
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = table.names.len() as u32;
        table.names.push(leaked);
        table.index.insert(leaked, id);
        Sym(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().lock().expect("symbol table poisoned").names[self.0 as usize]
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Sym) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Sym) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

/// Spells an identifier as a ground atom, quoting names that would read as
/// logic variables (leading uppercase letter or underscore).
pub fn atom(name: &str) -> String {
    let needs_quote = name.chars().next().is_none_or(|c| c.is_ascii_uppercase() || c == '_');
    if needs_quote {
        format!("'{}'", name.replace('\'', "\\'"))
    } else {
        name.to_owned()
    }
}

/// True when the term spelling contains no unquoted variable identifier.
pub fn is_ground_spelling(spelling: &str) -> bool {
    let mut chars = spelling.chars().peekable();
    let mut at_word_start = true;
    while let Some(c) = chars.next() {
        if c == '\'' {
            // skip quoted atom
            while let Some(q) = chars.next() {
                if q == '\\' {
                    chars.next();
                } else if q == '\'' {
                    break;
                }
            }
            at_word_start = false;
            continue;
        }
        let word_char = c.is_ascii_alphanumeric() || c == '_' || c == '.';
        if word_char && at_word_start && (c.is_ascii_uppercase() || c == '_') {
            return false;
        }
        at_word_start = !word_char;
    }
    true
}
