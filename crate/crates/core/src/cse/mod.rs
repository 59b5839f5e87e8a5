//! String databases edited by expressions, with the access structures kept
//! up to date as new grammar rules appear.
//!
//! All named strings live in one shared, append-only grammar pool. Edits
//! never change existing rules; they add `O(height)` rules per primitive
//! and return a new root, so the database itself is unchanged afterwards.

mod expr;

use std::collections::{BTreeMap, HashMap};

pub use expr::CseExpr;
use expr::{check_range, check_slot};

use crate::automaton::VsetAutomaton;
use crate::error::{Error, Result};
use crate::model::Mapping;
use crate::nat::Nat;
use crate::slp::avl::{join_opt, split_opt};
use crate::slp::{CnfSlp, GrammarBuilder, NtId};
use crate::slp_index::SlpIndex;

/// Parses a rooting file: lines `d1 = A`.
pub fn parse_rooting(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, nt) = line
            .split_once('=')
            .map(|(a, b)| (a.trim(), b.trim()))
            .filter(|(a, b)| !a.is_empty() && !b.is_empty() && !a.contains(' ') && !b.contains(' '))
            .ok_or_else(|| Error::format(i + 1, "expected `name = Nonterminal`"))?;
        if out.iter().any(|(n, _)| n == name) {
            return Err(Error::format(i + 1, format!("`{name}` is rooted twice")));
        }
        out.push((name.to_string(), nt.to_string()));
    }
    Ok(out)
}

/// Named strings, each the expansion of a strongly balanced nonterminal of
/// one shared grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringDatabase {
    grammar: CnfSlp,
    roots: BTreeMap<String, NtId>,
}

impl StringDatabase {
    /// Rebalances `grammar` and roots each name at the given nonterminal.
    pub fn new(grammar: &CnfSlp, rooting: &[(String, String)]) -> Result<Self> {
        let grammar = grammar.strongly_balance();
        let mut roots = BTreeMap::new();
        for (name, nt) in rooting {
            let id = grammar
                .lookup(nt)
                .ok_or_else(|| Error::domain(format!("`{name}` is rooted at unknown nonterminal `{nt}`")))?;
            roots.insert(name.clone(), id);
        }
        Ok(StringDatabase { grammar, roots })
    }

    /// Builds a pool from plain strings.
    pub fn from_texts<S: AsRef<str>>(texts: &[(S, S)]) -> Result<Self> {
        let mut pool = CnfSlp::empty();
        let mut roots = BTreeMap::new();
        for (name, text) in texts {
            let w: Vec<char> = text.as_ref().chars().collect();
            if w.is_empty() {
                return Err(Error::domain(format!("`{}` is empty", name.as_ref())));
            }
            let root = add_balanced(&mut pool, &w);
            roots.insert(name.as_ref().to_string(), root);
        }
        Ok(StringDatabase { grammar: pool, roots })
    }

    pub fn grammar(&self) -> &CnfSlp {
        &self.grammar
    }

    pub fn roots(&self) -> &BTreeMap<String, NtId> {
        &self.roots
    }

    /// All strings, expanded.
    pub fn texts(&self, limit: usize) -> Result<HashMap<String, String>> {
        self.roots
            .iter()
            .map(|(n, &id)| Ok((n.clone(), self.grammar.expand(id, limit)?)))
            .collect()
    }

    /// Evaluates `expr` into the pool.
    pub fn evaluate(&mut self, expr: &CseExpr) -> Result<EditResult> {
        evaluate(&mut self.grammar, &self.roots, expr)
    }
}

fn add_balanced(g: &mut CnfSlp, w: &[char]) -> NtId {
    if w.len() == 1 {
        return g.leaf(w[0]);
    }
    let m = w.len().div_ceil(2);
    let b = add_balanced(g, &w[..m]);
    let c = add_balanced(g, &w[m..]);
    g.pair(b, c)
}

/// Outcome of evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditResult {
    /// Root of the result, `None` for the empty string.
    pub root: Option<NtId>,
    /// Rules added to the pool.
    pub fresh: usize,
    /// Longest string produced by any sub-expression.
    pub max_len: Nat,
}

/// Evaluates `expr` with balanced concatenation and splitting in `g`.
pub fn evaluate<G: GrammarBuilder + ?Sized>(
    g: &mut G,
    roots: &BTreeMap<String, NtId>,
    expr: &CseExpr,
) -> Result<EditResult> {
    let before = g.grammar().num_nonterminals();
    let mut max_len = Nat::ZERO;
    let root = eval(g, roots, expr, &mut max_len)?;
    Ok(EditResult {
        root,
        fresh: g.grammar().num_nonterminals() - before,
        max_len,
    })
}

fn len_of<G: GrammarBuilder + ?Sized>(g: &G, v: Option<NtId>) -> Nat {
    v.map(|id| g.grammar().len_of(id).clone()).unwrap_or(Nat::ZERO)
}

fn split_at<G: GrammarBuilder + ?Sized>(g: &mut G, v: Option<NtId>, p: &Nat) -> (Option<NtId>, Option<NtId>) {
    match v {
        None => (None, None),
        Some(id) => split_opt(g, id, p).expect("indices are checked before splitting"),
    }
}

/// `v[l, r]`, given valid indices.
fn cut<G: GrammarBuilder + ?Sized>(g: &mut G, v: Option<NtId>, l: &Nat, r: &Nat) -> Option<NtId> {
    let (_, rest) = split_at(g, v, &(l - 1));
    let (piece, _) = split_at(g, rest, &(&(r - l) + 1));
    piece
}

fn eval<G: GrammarBuilder + ?Sized>(
    g: &mut G,
    roots: &BTreeMap<String, NtId>,
    expr: &CseExpr,
    max_len: &mut Nat,
) -> Result<Option<NtId>> {
    let out = match expr {
        CseExpr::Name(n) => Some(
            *roots
                .get(n)
                .ok_or_else(|| Error::domain(format!("unknown string `{n}`")))?,
        ),
        CseExpr::Concat(a, b) => {
            let x = eval(g, roots, a, max_len)?;
            let y = eval(g, roots, b, max_len)?;
            join_opt(g, x, y)
        }
        CseExpr::Extract(a, l, r) => {
            let x = eval(g, roots, a, max_len)?;
            check_range(expr, l, r, &len_of(g, x))?;
            cut(g, x, l, r)
        }
        CseExpr::Delete(a, l, r) => {
            let x = eval(g, roots, a, max_len)?;
            check_range(expr, l, r, &len_of(g, x))?;
            let (left, rest) = split_at(g, x, &(l - 1));
            let (_, right) = split_at(g, rest, &(&(r - l) + 1));
            join_opt(g, left, right)
        }
        CseExpr::InsertOp(a, b, k) => {
            let x = eval(g, roots, a, max_len)?;
            let y = eval(g, roots, b, max_len)?;
            check_slot(expr, k, &len_of(g, x))?;
            let (left, right) = split_at(g, x, &(k - 1));
            let left = join_opt(g, left, y);
            join_opt(g, left, right)
        }
        CseExpr::CopyOp(a, l, r, k) => {
            let x = eval(g, roots, a, max_len)?;
            let len = len_of(g, x);
            check_range(expr, l, r, &len)?;
            check_slot(expr, k, &len)?;
            let piece = cut(g, x, l, r);
            let (left, right) = split_at(g, x, &(k - 1));
            let left = join_opt(g, left, piece);
            join_opt(g, left, right)
        }
    };
    let len = len_of(g, out);
    if len > *max_len {
        *max_len = len;
    }
    Ok(out)
}

/// A string database together with direct-access structures over its pool.
#[derive(Debug, Clone)]
pub struct EditableIndex {
    index: SlpIndex,
    roots: BTreeMap<String, NtId>,
}

impl EditableIndex {
    pub fn new(automaton: &VsetAutomaton, db: &StringDatabase) -> Result<Self> {
        Ok(EditableIndex {
            index: SlpIndex::build(automaton, &db.grammar)?,
            roots: db.roots.clone(),
        })
    }

    pub fn index(&self) -> &SlpIndex {
        &self.index
    }

    pub fn roots(&self) -> &BTreeMap<String, NtId> {
        &self.roots
    }

    /// Evaluates `expr`; every new rule is annotated in every structure.
    pub fn evaluate(&mut self, expr: &CseExpr) -> Result<EditResult> {
        evaluate(&mut self.index, &self.roots, expr)
    }

    /// Number of answers over an edit result.
    pub fn count(&self, result: &EditResult) -> Nat {
        match result.root {
            Some(root) => self.index.count_root(root),
            None => self.empty_count(),
        }
    }

    /// Answers over the empty string: one (the empty mapping) exactly when
    /// there are no variables and some initial state is final.
    fn empty_count(&self) -> Nat {
        let a = self.index.automaton();
        let accepts = a.initial().iter().any(|q| a.finals().contains(q));
        Nat::from(u64::from(a.vars().is_empty() && accepts))
    }

    pub fn access(&mut self, result: &EditResult, t: &Nat) -> Result<Mapping> {
        let order = self.index.order().clone();
        match result.root {
            Some(root) => self.index.access_root(root, t, &order),
            None => {
                let total = self.empty_count();
                if *t != Nat::ONE || total.is_zero() {
                    return Err(Error::OutOfRange { index: t.clone(), total });
                }
                Mapping::new(Vec::new())
            }
        }
    }

    pub fn edit_and_access(&mut self, expr: &CseExpr, t: &Nat) -> Result<Mapping> {
        let result = self.evaluate(expr)?;
        self.access(&result, t)
    }
}
