//! Text format for SLPs.
//!
//! ```text
//! start: S0
//! S0 -> A B
//! A -> 'a' 'b'
//! B -> 'c'
//! ```
//!
//! Terminals are single characters in single quotes; anything else on a
//! right-hand side is a nonterminal name. `#` starts a comment line.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{CnfSlp, Rule, Slp, Symbol};
use crate::error::{Error, Result};

enum Token {
    Name(String),
    Terminal(char),
}

fn tokenize(rhs: &str, line: usize) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = rhs.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '\'' {
            chars.next();
            let sym = chars
                .next()
                .ok_or_else(|| Error::format(line, "unterminated terminal"))?;
            if chars.next() != Some('\'') {
                return Err(Error::format(line, "a terminal is one character in single quotes"));
            }
            out.push(Token::Terminal(sym));
        } else {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '\'' {
                    break;
                }
                name.push(c);
                chars.next();
            }
            out.push(Token::Name(name));
        }
    }
    Ok(out)
}

impl FromStr for Slp {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut start: Option<(usize, String)> = None;
        let mut defs: Vec<(usize, String, Vec<Token>)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("start:") {
                if start.is_some() {
                    return Err(Error::format(line_no, "duplicate `start:` line"));
                }
                let name = rest.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::format(line_no, "`start:` takes one nonterminal name"));
                }
                start = Some((line_no, name.to_string()));
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::format(line_no, "expected a rule `A -> ...` or `start: A`"))?;
            let lhs = lhs.trim();
            if lhs.is_empty() || lhs.contains(char::is_whitespace) || lhs.contains('\'') {
                return Err(Error::format(line_no, format!("bad nonterminal name `{lhs}`")));
            }
            if index.insert(lhs.to_string(), defs.len()).is_some() {
                return Err(Error::format(line_no, format!("duplicate rule for `{lhs}`")));
            }
            let tokens = tokenize(rhs, line_no)?;
            if tokens.is_empty() {
                return Err(Error::format(line_no, format!("empty right-hand side for `{lhs}`")));
            }
            defs.push((line_no, lhs.to_string(), tokens));
        }
        let (start_line, start_name) = start.ok_or_else(|| Error::format(0, "missing `start:` line"))?;
        let start = *index
            .get(&start_name)
            .ok_or_else(|| Error::format(start_line, format!("start symbol `{start_name}` has no rule")))?;
        let mut names = Vec::with_capacity(defs.len());
        let mut rules = Vec::with_capacity(defs.len());
        for (line_no, name, tokens) in defs {
            let rhs = tokens
                .into_iter()
                .map(|t| match t {
                    Token::Terminal(c) => Ok(Symbol::Terminal(c)),
                    Token::Name(n) => index
                        .get(&n)
                        .map(|&j| Symbol::Nonterminal(j))
                        .ok_or_else(|| Error::format(line_no, format!("undefined nonterminal `{n}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            names.push(name);
            rules.push(rhs);
        }
        Slp::new(names, rules, start).map_err(|e| Error::format(0, e.to_string()))
    }
}

impl FromStr for CnfSlp {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        text.parse::<Slp>()?.to_cnf()
    }
}

fn quote(c: char) -> String {
    format!("'{c}'")
}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.names[self.start])?;
        for (name, rhs) in self.names.iter().zip(&self.rules) {
            let parts: Vec<String> = rhs
                .iter()
                .map(|s| match s {
                    Symbol::Terminal(c) => quote(*c),
                    Symbol::Nonterminal(j) => self.names[*j].clone(),
                })
                .collect();
            writeln!(f, "{name} -> {}", parts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for CnfSlp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.names[self.start])?;
        for (id, name) in self.names.iter().enumerate() {
            match self.rules[id] {
                Rule::Terminal(c) => writeln!(f, "{name} -> {}", quote(c))?,
                Rule::Pair(b, c) => writeln!(f, "{name} -> {} {}", self.names[b], self.names[c])?,
            }
        }
        let mut aliases: Vec<(&String, &usize)> =
            self.by_name.iter().filter(|(n, &id)| self.names[id] != **n).collect();
        aliases.sort();
        for (alias, &id) in aliases {
            writeln!(f, "{alias} -> {}", self.names[id])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::tests::{example_slp, EXAMPLE_SLP};

    fn line_of(text: &str) -> Option<usize> {
        match text.parse::<Slp>() {
            Err(Error::Format { line, .. }) => Some(line),
            _ => None,
        }
    }

    #[test]
    fn round_trip() {
        let g = example_slp();
        let again: CnfSlp = g.to_string().parse().unwrap();
        assert_eq!(again.expand_start(100).unwrap(), "abababcab");
        assert_eq!(again, g);
        let slp: Slp = EXAMPLE_SLP.parse().unwrap();
        assert_eq!(slp.to_string().parse::<Slp>().unwrap(), slp);
    }

    #[test]
    fn rejects_bad_grammars() {
        assert_eq!(line_of("start: A\nA -> B\nB -> A\n"), Some(0));
        assert_eq!(line_of("start: A\nA -> 'a'\nA -> 'b'\n"), Some(3));
        assert_eq!(line_of("A -> 'a'\n"), Some(0));
        assert_eq!(line_of("start: A\nA -> B\n"), Some(2));
        assert_eq!(line_of("start: A\nA -> 'ab'\n"), Some(2));
        assert_eq!(line_of("start: Z\nA -> 'a'\n"), Some(1));
        assert_eq!(line_of("start: A\nA ->\n"), Some(2));
        assert_eq!(line_of("start: A\nA 'a'\n"), Some(2));
    }

    #[test]
    fn quoted_whitespace_and_comments() {
        let g: CnfSlp = "# x\nstart: A\n\nA -> ' ' 'b'\n".parse().unwrap();
        assert_eq!(g.expand_start(10).unwrap(), " b");
    }
}
