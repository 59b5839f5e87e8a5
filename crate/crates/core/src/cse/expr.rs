//! Edit expressions: syntax tree, prefix text syntax, and a plain string
//! evaluator used as a reference.
//!
//! ```text
//! (insertop (concat d1 d2) (extract d1 3 7) 4)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CseExpr {
    Name(String),
    Concat(Box<CseExpr>, Box<CseExpr>),
    /// `ψ[l, r]`
    Extract(Box<CseExpr>, Nat, Nat),
    /// `ψ[1, l-1] · ψ[r+1..]`
    Delete(Box<CseExpr>, Nat, Nat),
    /// `ψ1[1, k-1] · ψ2 · ψ1[k..]`
    InsertOp(Box<CseExpr>, Box<CseExpr>, Nat),
    /// `ψ[1, k-1] · ψ[l, r] · ψ[k..]`
    CopyOp(Box<CseExpr>, Nat, Nat, Nat),
}

impl CseExpr {
    pub fn name(n: impl Into<String>) -> Self {
        CseExpr::Name(n.into())
    }

    pub fn concat(a: CseExpr, b: CseExpr) -> Self {
        CseExpr::Concat(Box::new(a), Box::new(b))
    }

    pub fn extract(a: CseExpr, l: impl Into<Nat>, r: impl Into<Nat>) -> Self {
        CseExpr::Extract(Box::new(a), l.into(), r.into())
    }

    pub fn delete(a: CseExpr, l: impl Into<Nat>, r: impl Into<Nat>) -> Self {
        CseExpr::Delete(Box::new(a), l.into(), r.into())
    }

    pub fn insertop(a: CseExpr, b: CseExpr, k: impl Into<Nat>) -> Self {
        CseExpr::InsertOp(Box::new(a), Box::new(b), k.into())
    }

    pub fn copyop(a: CseExpr, l: impl Into<Nat>, r: impl Into<Nat>, k: impl Into<Nat>) -> Self {
        CseExpr::CopyOp(Box::new(a), l.into(), r.into(), k.into())
    }

    /// Height of the syntax tree; a bare name has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            CseExpr::Name(_) => 0,
            CseExpr::Concat(a, b) | CseExpr::InsertOp(a, b, _) => 1 + a.depth().max(b.depth()),
            CseExpr::Extract(a, ..) | CseExpr::Delete(a, ..) | CseExpr::CopyOp(a, ..) => 1 + a.depth(),
        }
    }

    /// Number of operations.
    pub fn size(&self) -> usize {
        match self {
            CseExpr::Name(_) => 0,
            CseExpr::Concat(a, b) | CseExpr::InsertOp(a, b, _) => 1 + a.size() + b.size(),
            CseExpr::Extract(a, ..) | CseExpr::Delete(a, ..) | CseExpr::CopyOp(a, ..) => 1 + a.size(),
        }
    }

    /// Evaluates directly on strings.
    pub fn eval_text(&self, db: &HashMap<String, String>) -> Result<String> {
        let chars = self.eval_chars(db)?;
        Ok(chars.into_iter().collect())
    }

    fn eval_chars(&self, db: &HashMap<String, String>) -> Result<Vec<char>> {
        let idx = |n: &Nat| n.to_usize().unwrap_or(usize::MAX);
        Ok(match self {
            CseExpr::Name(n) => db
                .get(n)
                .ok_or_else(|| Error::domain(format!("unknown string `{n}`")))?
                .chars()
                .collect(),
            CseExpr::Concat(a, b) => {
                let mut x = a.eval_chars(db)?;
                x.extend(b.eval_chars(db)?);
                x
            }
            CseExpr::Extract(a, l, r) => {
                let x = a.eval_chars(db)?;
                check_range(self, l, r, &Nat::from(x.len()))?;
                x[idx(l) - 1..idx(r)].to_vec()
            }
            CseExpr::Delete(a, l, r) => {
                let mut x = a.eval_chars(db)?;
                check_range(self, l, r, &Nat::from(x.len()))?;
                x.drain(idx(l) - 1..idx(r));
                x
            }
            CseExpr::InsertOp(a, b, k) => {
                let mut x = a.eval_chars(db)?;
                let y = b.eval_chars(db)?;
                check_slot(self, k, &Nat::from(x.len()))?;
                let k = idx(k);
                x.splice(k - 1..k - 1, y);
                x
            }
            CseExpr::CopyOp(a, l, r, k) => {
                let mut x = a.eval_chars(db)?;
                check_range(self, l, r, &Nat::from(x.len()))?;
                check_slot(self, k, &Nat::from(x.len()))?;
                let piece = x[idx(l) - 1..idx(r)].to_vec();
                let k = idx(k);
                x.splice(k - 1..k - 1, piece);
                x
            }
        })
    }
}

/// `1 ≤ l ≤ r ≤ len`.
pub(crate) fn check_range(expr: &CseExpr, l: &Nat, r: &Nat, len: &Nat) -> Result<()> {
    if l.is_zero() || l > r || r > len {
        return Err(Error::EditIndex {
            expr: expr.to_string(),
            message: format!("range [{l},{r}] does not fit a string of length {len}"),
        });
    }
    Ok(())
}

/// `1 ≤ k ≤ len + 1`.
pub(crate) fn check_slot(expr: &CseExpr, k: &Nat, len: &Nat) -> Result<()> {
    if k.is_zero() || *k > len + 1 {
        return Err(Error::EditIndex {
            expr: expr.to_string(),
            message: format!("insertion point {k} does not fit a string of length {len}"),
        });
    }
    Ok(())
}

impl fmt::Display for CseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CseExpr::Name(n) => f.write_str(n),
            CseExpr::Concat(a, b) => write!(f, "(concat {a} {b})"),
            CseExpr::Extract(a, l, r) => write!(f, "(extract {a} {l} {r})"),
            CseExpr::Delete(a, l, r) => write!(f, "(delete {a} {l} {r})"),
            CseExpr::InsertOp(a, b, k) => write!(f, "(insertop {a} {b} {k})"),
            CseExpr::CopyOp(a, l, r, k) => write!(f, "(copyop {a} {l} {r} {k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map(|t| t.0)
            .unwrap_or(1)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .map(|t| t.1.clone())
            .ok_or_else(|| Error::format(self.line(), "unexpected end of expression"))?;
        self.pos += 1;
        Ok(t)
    }

    fn number(&mut self) -> Result<Nat> {
        let line = self.line();
        match self.next()? {
            Tok::Atom(a) => a
                .parse::<Nat>()
                .map_err(|_| Error::format(line, format!("expected a number, got `{a}`"))),
            _ => Err(Error::format(line, "expected a number")),
        }
    }

    fn close(&mut self) -> Result<()> {
        let line = self.line();
        match self.next()? {
            Tok::Close => Ok(()),
            _ => Err(Error::format(line, "expected `)`")),
        }
    }

    fn expr(&mut self) -> Result<CseExpr> {
        let line = self.line();
        match self.next()? {
            Tok::Atom(a) => {
                if a.chars().all(|c| c.is_ascii_digit()) {
                    return Err(Error::format(line, format!("expected a string name, got `{a}`")));
                }
                Ok(CseExpr::Name(a))
            }
            Tok::Close => Err(Error::format(line, "unexpected `)`")),
            Tok::Open => {
                let op = match self.next()? {
                    Tok::Atom(op) => op,
                    _ => return Err(Error::format(line, "expected an operation name after `(`")),
                };
                let e = match op.as_str() {
                    "concat" => {
                        let a = self.expr()?;
                        CseExpr::concat(a, self.expr()?)
                    }
                    "extract" => {
                        let a = self.expr()?;
                        let l = self.number()?;
                        CseExpr::extract(a, l, self.number()?)
                    }
                    "delete" => {
                        let a = self.expr()?;
                        let l = self.number()?;
                        CseExpr::delete(a, l, self.number()?)
                    }
                    "insertop" => {
                        let a = self.expr()?;
                        let b = self.expr()?;
                        CseExpr::insertop(a, b, self.number()?)
                    }
                    "copyop" => {
                        let a = self.expr()?;
                        let l = self.number()?;
                        let r = self.number()?;
                        CseExpr::copyop(a, l, r, self.number()?)
                    }
                    other => return Err(Error::format(line, format!("unknown operation `{other}`"))),
                };
                self.close()?;
                Ok(e)
            }
        }
    }
}

impl FromStr for CseExpr {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut toks = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let spaced = line.replace('(', " ( ").replace(')', " ) ");
            for w in spaced.split_whitespace() {
                let t = match w {
                    "(" => Tok::Open,
                    ")" => Tok::Close,
                    a => Tok::Atom(a.to_string()),
                };
                toks.push((i + 1, t));
            }
        }
        if toks.is_empty() {
            return Err(Error::format(1, "empty expression"));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos < p.toks.len() {
            return Err(Error::format(p.line(), "trailing input after expression"));
        }
        Ok(e)
    }
}
