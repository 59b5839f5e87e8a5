//! Direct access over a plain string.
//!
//! For an order `y1 ≺ … ≺ yk` the index keeps `k + 1` balanced trees over the
//! positions `1..=n`. Tree `T_i` allows only `y_{i+1}, …, y_k`; each node
//! `⟨l,r⟩` stores the count matrix of partial runs over `w[l..=r]`. An access
//! fixes one variable at a time by binary search down the trees, updating
//! later trees as it goes, and then rolls the updates back.

use std::collections::HashMap;

use crate::automaton::{DeltaCache, VsetAutomaton};
use crate::error::{Error, Result};
use crate::matrix::{CountMatrix, MulCounter};
use crate::model::{Mapping, Order, Var, VarMask};
use crate::nat::Nat;

/// `⌊(l + r) / 2⌋`, the split point of a node `⟨l,r⟩` with `l < r`.
pub fn mid(l: usize, r: usize) -> Result<usize> {
    if l >= r {
        return Err(Error::domain(format!("mid({l},{r}) needs l < r")));
    }
    Ok(l + (r - l) / 2)
}

/// Shape of one node; identical for every tree built over the same string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShape {
    pub l: usize,
    pub r: usize,
    /// Arena indices of the children, `None` for leaves.
    pub children: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTree {
    allowed: VarMask,
    matrices: Vec<CountMatrix>,
    /// Variables allowed at each leaf, by position (index 0 is position 1).
    leaf_vars: Vec<VarMask>,
}

impl IndexTree {
    /// Variables this tree lets open anywhere.
    pub fn allowed(&self) -> VarMask {
        self.allowed
    }

    pub fn matrix(&self, node: usize) -> &CountMatrix {
        &self.matrices[node]
    }

    pub fn root(&self) -> &CountMatrix {
        &self.matrices[0]
    }

    pub fn leaf_vars(&self, pos: usize) -> VarMask {
        self.leaf_vars[pos - 1]
    }
}

#[derive(Debug, Clone)]
enum JournalEntry {
    Matrix { tree: usize, node: usize, prev: CountMatrix },
    LeafVars { tree: usize, pos: usize, prev: VarMask },
}

/// Prior values of everything an access overwrote.
#[derive(Debug, Clone, Default)]
pub struct Journal(Vec<JournalEntry>);

impl Journal {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct StringIndex {
    automaton: VsetAutomaton,
    text: Vec<char>,
    shape: Vec<NodeShape>,
    trees: Vec<IndexTree>,
    by_mask: HashMap<VarMask, usize>,
    order: Order,
    deltas: DeltaCache,
    mults: MulCounter,
}

impl PartialEq for StringIndex {
    fn eq(&self, other: &Self) -> bool {
        self.automaton == other.automaton
            && self.text == other.text
            && self.shape == other.shape
            && self.trees == other.trees
            && self.order == other.order
    }
}

impl StringIndex {
    /// Trees `T_0..T_k` for the default variable order.
    pub fn build(automaton: &VsetAutomaton, text: &[char]) -> Result<Self> {
        StringIndex::build_with_order(automaton, text, &automaton.vars().default_order())
    }

    /// Trees `T_0..T_k` for `order`.
    pub fn build_with_order(automaton: &VsetAutomaton, text: &[char], order: &Order) -> Result<Self> {
        check_order(automaton, order)?;
        let masks = (0..=order.len()).map(|i| order.suffix_mask(i)).collect();
        StringIndex::build_masks(automaton, text, masks, order.clone())
    }

    /// One tree per subset of the variables, so any order can be served.
    pub fn build_all_orders(automaton: &VsetAutomaton, text: &[char]) -> Result<Self> {
        let k = automaton.vars().len();
        if k > 16 {
            return Err(Error::Size(format!("2^{k} trees are too many")));
        }
        let masks = (0..1u64 << k).map(VarMask).collect();
        StringIndex::build_masks(automaton, text, masks, automaton.vars().default_order())
    }

    fn build_masks(automaton: &VsetAutomaton, text: &[char], masks: Vec<VarMask>, order: Order) -> Result<Self> {
        automaton.require_countable()?;
        if text.is_empty() {
            return Err(Error::domain("cannot index the empty string"));
        }
        if let Some(c) = text.iter().find(|c| !automaton.has_symbol(**c)) {
            return Err(Error::domain(format!("symbol `{c}` is not in the alphabet")));
        }
        let mut shape = Vec::with_capacity(2 * text.len() - 1);
        build_shape(&mut shape, 1, text.len());
        let mut index = StringIndex {
            automaton: automaton.clone(),
            text: text.to_vec(),
            shape,
            trees: Vec::new(),
            by_mask: HashMap::new(),
            order,
            deltas: DeltaCache::new(),
            mults: MulCounter::default(),
        };
        for mask in masks {
            let tree = index.build_tree(mask)?;
            index.by_mask.insert(mask, index.trees.len());
            index.trees.push(tree);
        }
        Ok(index)
    }

    fn build_tree(&mut self, allowed: VarMask) -> Result<IndexTree> {
        let mut matrices = vec![CountMatrix::zero(0); self.shape.len()];
        // Children always follow their parent in the arena.
        for node in (0..self.shape.len()).rev() {
            matrices[node] = match self.shape[node].children {
                None => self.deltas.get(&self.automaton, self.text[self.shape[node].l - 1], allowed)?,
                Some((a, b)) => self.mults.multiply(&matrices[a], &matrices[b]),
            };
        }
        Ok(IndexTree {
            allowed,
            matrices,
            leaf_vars: vec![allowed; self.text.len()],
        })
    }

    pub fn automaton(&self) -> &VsetAutomaton {
        &self.automaton
    }

    pub fn text(&self) -> &[char] {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// The order the index was built for.
    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn shape(&self) -> &[NodeShape] {
        &self.shape
    }

    pub fn trees(&self) -> &[IndexTree] {
        &self.trees
    }

    /// The tree that allows exactly `allowed`, if it was built.
    pub fn tree_for(&self, allowed: VarMask) -> Option<&IndexTree> {
        self.by_mask.get(&allowed).map(|&i| &self.trees[i])
    }

    /// Arena index of node `⟨l,r⟩`, if it exists.
    pub fn node(&self, l: usize, r: usize) -> Option<usize> {
        let mut node = 0;
        loop {
            let s = &self.shape[node];
            if (s.l, s.r) == (l, r) {
                return Some(node);
            }
            let (a, b) = s.children?;
            node = if r <= self.shape[a].r {
                a
            } else if l >= self.shape[b].l {
                b
            } else {
                return None;
            };
        }
    }

    pub fn multiplications(&self) -> &MulCounter {
        &self.mults
    }

    /// Number of answers.
    pub fn count(&self) -> Nat {
        self.count_tree(self.by_mask[&self.automaton.vars().all()])
    }

    fn count_tree(&self, tree: usize) -> Nat {
        self.trees[tree]
            .root()
            .answer_count(self.automaton.initial(), self.automaton.finals())
    }

    /// Allows `var` at position `s` in tree `tree`, recomputing the path.
    pub fn update(&mut self, tree: usize, var: Var, s: usize, journal: &mut Journal) -> Result<()> {
        if s == 0 || s > self.text.len() {
            return Err(Error::domain(format!("position {s} is outside 1..={}", self.text.len())));
        }
        let mut path = vec![0];
        while let Some((a, b)) = self.shape[*path.last().unwrap()].children {
            path.push(if s <= self.shape[a].r { a } else { b });
        }
        let t = &mut self.trees[tree];
        let prev = t.leaf_vars[s - 1];
        journal.0.push(JournalEntry::LeafVars { tree, pos: s, prev });
        t.leaf_vars[s - 1] = prev.with(var);
        let leaf = *path.last().unwrap();
        let m = self.deltas.get(&self.automaton, self.text[s - 1], t.leaf_vars[s - 1])?;
        let old = std::mem::replace(&mut t.matrices[leaf], m);
        journal.0.push(JournalEntry::Matrix { tree, node: leaf, prev: old });
        for &node in path.iter().rev().skip(1) {
            let (a, b) = self.shape[node].children.expect("internal");
            let m = self.mults.multiply(&t.matrices[a], &t.matrices[b]);
            let old = std::mem::replace(&mut t.matrices[node], m);
            journal.0.push(JournalEntry::Matrix { tree, node, prev: old });
        }
        Ok(())
    }

    /// Undoes every change recorded in `journal`, newest first.
    pub fn restore(&mut self, journal: Journal) {
        for entry in journal.0.into_iter().rev() {
            match entry {
                JournalEntry::Matrix { tree, node, prev } => self.trees[tree].matrices[node] = prev,
                JournalEntry::LeafVars { tree, pos, prev } => self.trees[tree].leaf_vars[pos - 1] = prev,
            }
        }
    }

    /// The t-th answer (1-based) under the order the index was built for.
    pub fn access(&mut self, t: &Nat) -> Result<Mapping> {
        let order = self.order.clone();
        self.access_with_order(t, &order)
    }

    /// The t-th answer under `order`; needs the trees of that order's chain.
    pub fn access_with_order(&mut self, t: &Nat, order: &Order) -> Result<Mapping> {
        check_order(&self.automaton, order)?;
        let chain = (0..=order.len())
            .map(|i| {
                self.by_mask.get(&order.suffix_mask(i)).copied().ok_or_else(|| {
                    Error::domain("the index was not built for this variable order")
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total = self.count_tree(chain[0]);
        if t.is_zero() || *t > total {
            return Err(Error::OutOfRange { index: t.clone(), total });
        }
        let mut journal = Journal::default();
        let result = self.access_chain(t.clone(), order, &chain, &mut journal);
        self.restore(journal);
        result
    }

    fn access_chain(&mut self, mut t: Nat, order: &Order, chain: &[usize], journal: &mut Journal) -> Result<Mapping> {
        let k = order.len();
        let dim = self.automaton.num_states();
        let mut positions = vec![Nat::ZERO; k];
        for i in 1..=k {
            let (left, right) = (chain[i - 1], chain[i]);
            let mut ml = CountMatrix::identity(dim);
            let mut mr = CountMatrix::identity(dim);
            let mut node = 0;
            while let Some((a, b)) = self.shape[node].children {
                let below = self.mults.multiply(&ml, self.trees[left].matrix(a));
                let below = self.mults.multiply(&below, self.trees[right].matrix(b));
                let below = self.mults.multiply(&below, &mr);
                if t <= self.answer(&below) {
                    mr = self.mults.multiply(self.trees[right].matrix(b), &mr);
                    node = a;
                } else {
                    ml = self.mults.multiply(&ml, self.trees[left].matrix(a));
                    node = b;
                }
            }
            let s = self.shape[node].l;
            let before = self.mults.multiply(&ml, self.trees[right].matrix(node));
            let before = self.mults.multiply(&before, &mr);
            t = t
                .checked_sub(&self.answer(&before))
                .expect("answers before the leaf never exceed t");
            let var = order.vars()[i - 1];
            positions[var.0] = Nat::from(s);
            for &tree in &chain[i..] {
                self.update(tree, var, s, journal)?;
            }
        }
        Mapping::new(positions)
    }

    fn answer(&self, m: &CountMatrix) -> Nat {
        m.answer_count(self.automaton.initial(), self.automaton.finals())
    }
}

fn check_order(automaton: &VsetAutomaton, order: &Order) -> Result<()> {
    if order.len() != automaton.vars().len() {
        return Err(Error::domain("order does not match the automaton's variables"));
    }
    Ok(())
}

fn build_shape(shape: &mut Vec<NodeShape>, l: usize, r: usize) -> usize {
    let id = shape.len();
    shape.push(NodeShape { l, r, children: None });
    if l < r {
        let m = l + (r - l) / 2;
        let a = build_shape(shape, l, m);
        let b = build_shape(shape, m + 1, r);
        shape[id].children = Some((a, b));
    }
    id
}
