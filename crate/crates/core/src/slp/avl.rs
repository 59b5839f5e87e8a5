//! Balanced concatenation and splitting of grammar-represented strings.
//!
//! Every nonterminal is treated as an AVL tree whose leaves are terminals:
//! inputs must be strongly balanced (sibling heights differ by at most one)
//! and so are all outputs. Both operations only create `O(height)` new
//! nonterminals and never modify existing ones.

use super::{CnfSlp, NtId};
use crate::error::{Error, Result};
use crate::nat::Nat;

/// Something that owns a grammar and can add binary rules to it.
pub trait GrammarBuilder {
    fn grammar(&self) -> &CnfSlp;
    /// The nonterminal `→ b c`, reusing an existing one when possible.
    fn pair(&mut self, b: NtId, c: NtId) -> NtId;
}

fn height<G: GrammarBuilder + ?Sized>(g: &G, id: NtId) -> u32 {
    g.grammar().height(id)
}

fn children<G: GrammarBuilder + ?Sized>(g: &G, id: NtId) -> (NtId, NtId) {
    g.grammar().children(id).expect("a node above height 0 is binary")
}

/// A nonterminal for `str(a)·str(b)`.
pub fn join<G: GrammarBuilder + ?Sized>(g: &mut G, a: NtId, b: NtId) -> NtId {
    let (ha, hb) = (height(g, a), height(g, b));
    if ha.abs_diff(hb) <= 1 {
        return g.pair(a, b);
    }
    if ha > hb {
        let (l, c) = children(g, a);
        let t = join(g, c, b);
        if height(g, t) <= height(g, l) + 1 {
            return g.pair(l, t);
        }
        let (t1, t2) = children(g, t);
        if height(g, t1) <= height(g, t2) {
            let left = g.pair(l, t1);
            g.pair(left, t2)
        } else {
            let (u1, u2) = children(g, t1);
            let left = g.pair(l, u1);
            let right = g.pair(u2, t2);
            g.pair(left, right)
        }
    } else {
        let (c, r) = children(g, b);
        let t = join(g, a, c);
        if height(g, t) <= height(g, r) + 1 {
            return g.pair(t, r);
        }
        let (t1, t2) = children(g, t);
        if height(g, t2) <= height(g, t1) {
            let right = g.pair(t2, r);
            g.pair(t1, right)
        } else {
            let (u1, u2) = children(g, t2);
            let left = g.pair(t1, u1);
            let right = g.pair(u2, r);
            g.pair(left, right)
        }
    }
}

/// [`join`] lifted to possibly empty operands.
pub fn join_opt<G: GrammarBuilder + ?Sized>(g: &mut G, a: Option<NtId>, b: Option<NtId>) -> Option<NtId> {
    match (a, b) {
        (Some(a), Some(b)) => Some(join(g, a, b)),
        (x, None) | (None, x) => x,
    }
}

/// `str(a)[1,p]` and `str(a)[p+1..]`, either of which may be empty.
pub fn split_opt<G: GrammarBuilder + ?Sized>(g: &mut G, a: NtId, p: &Nat) -> Result<(Option<NtId>, Option<NtId>)> {
    let len = g.grammar().len_of(a).clone();
    if *p > len {
        return Err(Error::domain(format!("cannot split a string of length {len} after position {p}")));
    }
    Ok(split_rec(g, a, p))
}

fn split_rec<G: GrammarBuilder + ?Sized>(g: &mut G, a: NtId, p: &Nat) -> (Option<NtId>, Option<NtId>) {
    if p.is_zero() {
        return (None, Some(a));
    }
    if p == g.grammar().len_of(a) {
        return (Some(a), None);
    }
    let (b, c) = children(g, a);
    let lb = g.grammar().len_of(b).clone();
    if *p <= lb {
        let (x, y) = split_rec(g, b, p);
        (x, join_opt(g, y, Some(c)))
    } else {
        let (x, y) = split_rec(g, c, &(p - &lb));
        (join_opt(g, Some(b), x), y)
    }
}

/// Splits into two non-empty parts; needs `1 ≤ p < |str(a)|`.
pub fn split<G: GrammarBuilder + ?Sized>(g: &mut G, a: NtId, p: &Nat) -> Result<(NtId, NtId)> {
    match split_opt(g, a, p)? {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(Error::domain(format!(
            "split position {p} must lie strictly inside 1..{}",
            g.grammar().len_of(a)
        ))),
    }
}
