//! Line-oriented text format for automata.
//!
//! ```text
//! # running example
//! alphabet: a b c
//! vars: x1 x2
//! states: q0 q1 q2
//! initial: q0
//! final: q2
//! q0 a {} q0
//! q0 a {x1} q1
//! q0 c {x1,x2} q2
//! ```
//!
//! Header lines may come in any order but each appears once; every other
//! non-blank, non-comment line is a transition `p <symbol> {vars} q`.

use std::fmt;
use std::str::FromStr;

use super::{StateId, Transition, VsetAutomaton};
use crate::error::{Error, Result};
use crate::model::{VarMask, VariableSet};

const HEADERS: [&str; 5] = ["alphabet", "vars", "states", "initial", "final"];

impl FromStr for VsetAutomaton {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut headers: [Option<(usize, Vec<String>)>; 5] = Default::default();
        let mut transition_lines = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let header = line.split_once(':').and_then(|(key, rest)| {
                let key = key.trim();
                HEADERS.iter().position(|h| *h == key).map(|i| (i, rest))
            });
            match header {
                Some((i, rest)) => {
                    if headers[i].is_some() {
                        return Err(Error::format(line_no, format!("duplicate `{}:` header", HEADERS[i])));
                    }
                    headers[i] = Some((line_no, rest.split_whitespace().map(String::from).collect()));
                }
                None => transition_lines.push((line_no, line)),
            }
        }

        let take = |i: usize| -> Result<(usize, Vec<String>)> {
            headers[i]
                .clone()
                .ok_or_else(|| Error::format(0, format!("missing `{}:` header", HEADERS[i])))
        };
        let (alpha_line, alpha_tokens) = take(0)?;
        let (vars_line, var_tokens) = take(1)?;
        let (states_line, state_tokens) = take(2)?;
        let (init_line, init_tokens) = take(3)?;
        let (final_line, final_tokens) = take(4)?;

        let mut alphabet = Vec::new();
        for tok in &alpha_tokens {
            let mut chars = tok.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => alphabet.push(c),
                _ => {
                    return Err(Error::format(
                        alpha_line,
                        format!("alphabet symbols must be single characters, got `{tok}`"),
                    ))
                }
            }
        }
        let vars = VariableSet::new(var_tokens).map_err(|e| Error::format(vars_line, e.to_string()))?;
        if state_tokens.is_empty() {
            return Err(Error::format(states_line, "no states declared"));
        }
        let state_of = |name: &str, line: usize| -> Result<StateId> {
            state_tokens
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::format(line, format!("undeclared state `{name}`")))
        };
        let initial = init_tokens
            .iter()
            .map(|s| state_of(s, init_line))
            .collect::<Result<Vec<_>>>()?;
        let finals = final_tokens
            .iter()
            .map(|s| state_of(s, final_line))
            .collect::<Result<Vec<_>>>()?;

        let mut transitions = Vec::new();
        for (line_no, line) in transition_lines {
            let (open, close) = match (line.find('{'), line.rfind('}')) {
                (Some(o), Some(c)) if o < c => (o, c),
                _ => {
                    return Err(Error::format(
                        line_no,
                        "expected a transition `p <symbol> {vars} q`",
                    ))
                }
            };
            let head: Vec<&str> = line[..open].split_whitespace().collect();
            let tail: Vec<&str> = line[close + 1..].split_whitespace().collect();
            let (from, symbol, to) = match (head.as_slice(), tail.as_slice()) {
                ([p, a], [q]) => (*p, *a, *q),
                _ => {
                    return Err(Error::format(
                        line_no,
                        "expected a transition `p <symbol> {vars} q`",
                    ))
                }
            };
            let mut chars = symbol.chars();
            let symbol = match (chars.next(), chars.next()) {
                (Some(c), None) if alphabet.contains(&c) => c,
                _ => return Err(Error::format(line_no, format!("`{symbol}` is not an alphabet symbol"))),
            };
            let mut mask = VarMask::EMPTY;
            for name in line[open + 1..close].split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let v = vars
                    .lookup(name)
                    .ok_or_else(|| Error::format(line_no, format!("undeclared variable `{name}`")))?;
                mask = mask.with(v);
            }
            transitions.push(Transition {
                from: state_of(from, line_no)?,
                symbol,
                vars: mask,
                to: state_of(to, line_no)?,
            });
        }

        VsetAutomaton::new(alphabet, vars, state_tokens, transitions, initial, finals)
            .map_err(|e| Error::format(0, e.to_string()))
    }
}

impl fmt::Display for VsetAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |items: Vec<String>| items.join(" ");
        writeln!(f, "alphabet: {}", join(self.alphabet.iter().map(char::to_string).collect()))?;
        writeln!(f, "vars: {}", self.vars.names().join(" "))?;
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "initial: {}", join(self.initial.iter().map(|&q| self.states[q].clone()).collect()))?;
        writeln!(f, "final: {}", join(self.finals.iter().map(|&q| self.states[q].clone()).collect()))?;
        for t in &self.transitions {
            writeln!(
                f,
                "{} {} {} {}",
                self.states[t.from],
                t.symbol,
                self.vars.display_mask(t.vars),
                self.states[t.to]
            )?;
        }
        Ok(())
    }
}
