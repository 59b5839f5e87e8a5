//! Direct access over a string given as an SLP.
//!
//! Structure `D_i` annotates every nonterminal with the count matrix of its
//! string under `τ_{>i}`; since a nonterminal's matrix does not depend on
//! where it occurs, the DAG needs one matrix per nonterminal. Placing a
//! variable at a position copies the root-to-leaf path into a per-structure
//! overlay instead of touching shared entries, and the overlay is dropped
//! when the access finishes.

use std::collections::HashMap;

use crate::automaton::{DeltaCache, VsetAutomaton};
use crate::error::{Error, Result};
use crate::matrix::{CountMatrix, MulCounter};
use crate::model::{Mapping, Order, Var, VarMask};
use crate::nat::Nat;
use crate::slp::{CnfSlp, GrammarBuilder, NtId, Rule};

/// A node of one structure: a shared nonterminal or a path copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Base(NtId),
    Overlay(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayNode {
    /// The nonterminal this node copies.
    pub orig: NtId,
    pub children: Option<(NodeRef, NodeRef)>,
    /// Variables allowed at this leaf (leaves only).
    pub vars: VarMask,
    pub matrix: CountMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    allowed: VarMask,
    matrices: Vec<CountMatrix>,
    overlay: Vec<OverlayNode>,
}

impl Structure {
    pub fn allowed(&self) -> VarMask {
        self.allowed
    }

    /// Matrix of a base nonterminal.
    pub fn base(&self, id: NtId) -> &CountMatrix {
        &self.matrices[id]
    }

    pub fn overlay(&self) -> &[OverlayNode] {
        &self.overlay
    }

    pub fn matrix(&self, node: NodeRef) -> &CountMatrix {
        match node {
            NodeRef::Base(id) => &self.matrices[id],
            NodeRef::Overlay(i) => &self.overlay[i].matrix,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlpIndex {
    automaton: VsetAutomaton,
    grammar: CnfSlp,
    structures: Vec<Structure>,
    by_mask: HashMap<VarMask, usize>,
    order: Order,
    deltas: DeltaCache,
    mults: MulCounter,
    last_overlay: usize,
}

impl PartialEq for SlpIndex {
    fn eq(&self, other: &Self) -> bool {
        self.automaton == other.automaton
            && self.grammar == other.grammar
            && self.structures == other.structures
            && self.order == other.order
    }
}

impl SlpIndex {
    /// Structures `D_0..D_k` for the default order.
    pub fn build(automaton: &VsetAutomaton, grammar: &CnfSlp) -> Result<Self> {
        SlpIndex::build_with_order(automaton, grammar, &automaton.vars().default_order())
    }

    pub fn build_with_order(automaton: &VsetAutomaton, grammar: &CnfSlp, order: &Order) -> Result<Self> {
        if order.len() != automaton.vars().len() {
            return Err(Error::domain("order does not match the automaton's variables"));
        }
        let masks = (0..=order.len()).map(|i| order.suffix_mask(i)).collect();
        SlpIndex::build_masks(automaton, grammar, masks, order.clone())
    }

    /// One structure per subset of the variables.
    pub fn build_all_orders(automaton: &VsetAutomaton, grammar: &CnfSlp) -> Result<Self> {
        let k = automaton.vars().len();
        if k > 16 {
            return Err(Error::Size(format!("2^{k} structures are too many")));
        }
        let masks = (0..1u64 << k).map(VarMask).collect();
        SlpIndex::build_masks(automaton, grammar, masks, automaton.vars().default_order())
    }

    fn build_masks(automaton: &VsetAutomaton, grammar: &CnfSlp, masks: Vec<VarMask>, order: Order) -> Result<Self> {
        automaton.require_countable()?;
        if let Some(c) = grammar.terminals().find(|c| !automaton.has_symbol(*c)) {
            return Err(Error::domain(format!("symbol `{c}` is not in the alphabet")));
        }
        let len = grammar.len();
        if grammar.depth() as u64 > 2 * len.bits() + 2 {
            log::warn!(
                "grammar depth {} is large for a string of length {len}; access will be slow (balance it first)",
                grammar.depth()
            );
        }
        let mut index = SlpIndex {
            automaton: automaton.clone(),
            grammar: grammar.clone(),
            structures: Vec::new(),
            by_mask: HashMap::new(),
            order,
            deltas: DeltaCache::new(),
            mults: MulCounter::default(),
            last_overlay: 0,
        };
        for mask in masks {
            let mut s = Structure { allowed: mask, matrices: Vec::with_capacity(grammar.num_nonterminals()), overlay: Vec::new() };
            for id in 0..grammar.num_nonterminals() {
                let m = index.annotate(&s.matrices, mask, id)?;
                s.matrices.push(m);
            }
            index.by_mask.insert(mask, index.structures.len());
            index.structures.push(s);
        }
        Ok(index)
    }

    fn annotate(&mut self, done: &[CountMatrix], allowed: VarMask, id: NtId) -> Result<CountMatrix> {
        match self.grammar.rule(id) {
            Rule::Terminal(c) => self.deltas.get(&self.automaton, c, allowed),
            Rule::Pair(b, c) => Ok(self.mults.multiply(&done[b], &done[c])),
        }
    }

    pub fn automaton(&self) -> &VsetAutomaton {
        &self.automaton
    }

    pub fn grammar(&self) -> &CnfSlp {
        &self.grammar
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    pub fn structure_for(&self, allowed: VarMask) -> Option<&Structure> {
        self.by_mask.get(&allowed).map(|&i| &self.structures[i])
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn multiplications(&self) -> &MulCounter {
        &self.mults
    }

    fn answer(&self, m: &CountMatrix) -> Nat {
        m.answer_count(self.automaton.initial(), self.automaton.finals())
    }

    /// Answers over `str(start)`.
    pub fn count(&self) -> Nat {
        self.count_root(self.grammar.start())
    }

    /// Answers over `str(root)`.
    pub fn count_root(&self, root: NtId) -> Nat {
        self.count_in(self.by_mask[&self.automaton.vars().all()], root)
    }

    fn count_in(&self, structure: usize, root: NtId) -> Nat {
        self.answer(&self.structures[structure].matrices[root])
    }

    fn children(&self, structure: usize, node: NodeRef) -> Option<(NodeRef, NodeRef)> {
        match node {
            NodeRef::Base(id) => self.grammar.children(id).map(|(b, c)| (NodeRef::Base(b), NodeRef::Base(c))),
            NodeRef::Overlay(i) => self.structures[structure].overlay[i].children,
        }
    }

    fn orig(&self, structure: usize, node: NodeRef) -> NtId {
        match node {
            NodeRef::Base(id) => id,
            NodeRef::Overlay(i) => self.structures[structure].overlay[i].orig,
        }
    }

    /// Allows `var` at position `s` of the string below `root` in structure
    /// `structure` by copying the path to `s`. Returns the new root.
    pub fn slp_update(&mut self, structure: usize, root: NodeRef, var: Var, s: &Nat) -> Result<NodeRef> {
        let len = self.grammar.len_of(self.orig(structure, root)).clone();
        if s.is_zero() || *s > len {
            return Err(Error::domain(format!("position {s} is outside 1..={len}")));
        }
        // Path from root to the leaf at s, with the side taken at each step.
        let mut path: Vec<(NodeRef, bool)> = Vec::new();
        let mut node = root;
        let mut p = s.clone();
        while let Some((b, c)) = self.children(structure, node) {
            let lb = self.grammar.len_of(self.orig(structure, b)).clone();
            if p <= lb {
                path.push((node, false));
                node = b;
            } else {
                path.push((node, true));
                p = &p - &lb;
                node = c;
            }
        }
        let leaf_orig = self.orig(structure, node);
        let vars = match node {
            NodeRef::Base(_) => self.structures[structure].allowed,
            NodeRef::Overlay(i) => self.structures[structure].overlay[i].vars,
        }
        .with(var);
        let Rule::Terminal(c) = self.grammar.rule(leaf_orig) else { unreachable!("paths end at terminals") };
        let matrix = self.deltas.get(&self.automaton, c, vars)?;
        let st = &mut self.structures[structure];
        st.overlay.push(OverlayNode { orig: leaf_orig, children: None, vars, matrix });
        let mut below = NodeRef::Overlay(st.overlay.len() - 1);
        for (node, went_right) in path.into_iter().rev() {
            let (orig, (b, c)) = match node {
                NodeRef::Base(id) => {
                    let (b, c) = self.grammar.children(id).expect("internal");
                    (id, (NodeRef::Base(b), NodeRef::Base(c)))
                }
                NodeRef::Overlay(i) => {
                    let o = &self.structures[structure].overlay[i];
                    (o.orig, o.children.expect("internal"))
                }
            };
            let children = if went_right { (b, below) } else { (below, c) };
            let st = &self.structures[structure];
            let matrix = self.mults.multiply(st.matrix(children.0), st.matrix(children.1));
            let st = &mut self.structures[structure];
            st.overlay.push(OverlayNode { orig, children: Some(children), vars: VarMask::EMPTY, matrix });
            below = NodeRef::Overlay(st.overlay.len() - 1);
        }
        Ok(below)
    }

    /// Path copies made by the most recent access, over all structures.
    pub fn last_overlay_size(&self) -> usize {
        self.last_overlay
    }

    /// Drops every path copy.
    pub fn discard_overlays(&mut self) {
        for s in &mut self.structures {
            s.overlay.clear();
        }
    }

    /// The t-th answer over `str(start)`.
    pub fn access(&mut self, t: &Nat) -> Result<Mapping> {
        let order = self.order.clone();
        self.access_root(self.grammar.start(), t, &order)
    }

    pub fn access_with_order(&mut self, t: &Nat, order: &Order) -> Result<Mapping> {
        self.access_root(self.grammar.start(), t, order)
    }

    /// The t-th answer under `order` over `str(root)`.
    pub fn access_root(&mut self, root: NtId, t: &Nat, order: &Order) -> Result<Mapping> {
        if order.len() != self.automaton.vars().len() {
            return Err(Error::domain("order does not match the automaton's variables"));
        }
        let chain = (0..=order.len())
            .map(|i| {
                self.by_mask
                    .get(&order.suffix_mask(i))
                    .copied()
                    .ok_or_else(|| Error::domain("the index was not built for this variable order"))
            })
            .collect::<Result<Vec<_>>>()?;
        let total = self.count_in(chain[0], root);
        if t.is_zero() || *t > total {
            return Err(Error::OutOfRange { index: t.clone(), total });
        }
        let result = self.access_chain(root, t.clone(), order, &chain);
        self.last_overlay = self.structures.iter().map(|s| s.overlay.len()).sum();
        self.discard_overlays();
        result
    }

    fn access_chain(&mut self, root: NtId, mut t: Nat, order: &Order, chain: &[usize]) -> Result<Mapping> {
        let k = order.len();
        let dim = self.automaton.num_states();
        let mut roots = vec![NodeRef::Base(root); k + 1];
        let mut positions = vec![Nat::ZERO; k];
        for i in 1..=k {
            let (left, right) = (chain[i - 1], chain[i]);
            let mut ml = CountMatrix::identity(dim);
            let mut mr = CountMatrix::identity(dim);
            let (mut nl, mut nr) = (roots[i - 1], roots[i]);
            let mut l = Nat::ONE;
            while let (Some((bl, cl)), Some((br, cr))) = (self.children(left, nl), self.children(right, nr)) {
                debug_assert_eq!(self.orig(left, nl), self.orig(right, nr));
                let m_left = self.structures[left].matrix(bl).clone();
                let m_right = self.structures[right].matrix(cr).clone();
                let below = self.mults.multiply(&ml, &m_left);
                let below = self.mults.multiply(&below, &m_right);
                let below = self.mults.multiply(&below, &mr);
                if t <= self.answer(&below) {
                    mr = self.mults.multiply(&m_right, &mr);
                    (nl, nr) = (bl, br);
                } else {
                    ml = self.mults.multiply(&ml, &m_left);
                    l = &l + self.grammar.len_of(self.orig(left, bl));
                    (nl, nr) = (cl, cr);
                }
            }
            let before = self.mults.multiply(&ml, self.structures[right].matrix(nr));
            let before = self.mults.multiply(&before, &mr);
            t = t
                .checked_sub(&self.answer(&before))
                .expect("answers before the leaf never exceed t");
            let var = order.vars()[i - 1];
            for j in i..=k {
                roots[j] = self.slp_update(chain[j], roots[j], var, &l)?;
            }
            positions[var.0] = l;
        }
        Mapping::new(positions)
    }

    /// Checks that every base matrix is the product of its children's (or
    /// the restricted transition matrix for terminals).
    pub fn is_coherent(&self) -> bool {
        let mut deltas = DeltaCache::new();
        self.structures.iter().all(|s| {
            (0..self.grammar.num_nonterminals()).all(|id| {
                let expect = match self.grammar.rule(id) {
                    Rule::Terminal(c) => deltas.get(&self.automaton, c, s.allowed).ok(),
                    Rule::Pair(b, c) => s.matrices[b].multiply(&s.matrices[c]).ok(),
                };
                expect.as_ref() == Some(&s.matrices[id])
            })
        })
    }

    /// Adds the rule `→ c` to the grammar, annotating it in every structure.
    pub fn leaf(&mut self, c: char) -> Result<NtId> {
        if !self.automaton.has_symbol(c) {
            return Err(Error::domain(format!("symbol `{c}` is not in the alphabet")));
        }
        let before = self.grammar.num_nonterminals();
        let id = self.grammar.leaf(c);
        if id == before {
            for s in 0..self.structures.len() {
                let m = self.deltas.get(&self.automaton, c, self.structures[s].allowed)?;
                self.structures[s].matrices.push(m);
            }
        }
        Ok(id)
    }
}

impl GrammarBuilder for SlpIndex {
    fn grammar(&self) -> &CnfSlp {
        &self.grammar
    }

    fn pair(&mut self, b: NtId, c: NtId) -> NtId {
        let before = self.grammar.num_nonterminals();
        let id = self.grammar.pair(b, c);
        if id == before {
            for s in &mut self.structures {
                let m = self.mults.multiply(&s.matrices[b], &s.matrices[c]);
                s.matrices.push(m);
            }
        }
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PositionSet, RuleSet};
    use crate::oracle::{oracle_matrix, slice_count};
    use crate::slp::tests::example_slp;
    use crate::string_index::StringIndex;
    use crate::testing::{running_example, W0};

    fn mat(rows: [[u64; 3]; 3]) -> CountMatrix {
        CountMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn index() -> SlpIndex {
        SlpIndex::build(&running_example(), &example_slp()).unwrap()
    }

    #[test]
    fn annotations_of_example_slp() {
        let idx = index();
        let g = idx.grammar();
        let id = |n| g.lookup(n).unwrap();
        let d = idx.structures();
        assert_eq!(*d[0].base(id("S0")), mat([[1, 1, 8], [0, 0, 3], [0, 0, 1]]));
        assert_eq!(*d[0].base(id("B")), mat([[1, 1, 3], [0, 0, 1], [0, 0, 1]]));
        assert_eq!(*d[0].base(id("D")), mat([[1, 1, 1], [0, 1, 1], [0, 0, 1]]));
        assert_eq!(*d[1].base(id("S0")), mat([[1, 0, 0], [0, 0, 3], [0, 0, 1]]));
        assert_eq!(*d[2].base(id("Sc")), mat([[1, 0, 0], [0, 0, 0], [0, 0, 1]]));
        assert_eq!(idx.count(), 8u64);
        assert!(idx.is_coherent());
    }

    #[test]
    fn annotations_agree_with_partial_run_counts() {
        // Every occurrence of a nonterminal sees the same matrix.
        let a = running_example();
        let w: Vec<char> = W0.chars().collect();
        let idx = index();
        let g = idx.grammar();
        let mut occurrences = Vec::new();
        let mut stack = vec![(g.start(), 1usize)];
        while let Some((id, l)) = stack.pop() {
            occurrences.push((id, l, l + g.len_of(id).to_usize().unwrap() - 1));
            if let Some((b, c)) = g.children(id) {
                stack.push((b, l));
                stack.push((c, l + g.len_of(b).to_usize().unwrap()));
            }
        }
        for (i, s) in idx.structures().iter().enumerate() {
            let rules = RuleSet::from_rules(2, (0..i).map(|j| (Var(j), PositionSet::Empty))).unwrap();
            for &(id, l, r) in &occurrences {
                assert_eq!(*s.base(id), oracle_matrix(&a, &w, l, r, &rules).unwrap());
            }
        }
    }

    #[test]
    fn update_duplicates_the_path() {
        let mut idx = index();
        let g = idx.grammar().clone();
        let id = |n| g.lookup(n).unwrap();
        let root = idx.slp_update(1, NodeRef::Base(g.start()), Var(0), &Nat::from(3u64)).unwrap();
        let d1 = &idx.structures()[1];
        assert_eq!(*d1.matrix(root), mat([[1, 0, 2], [0, 0, 3], [0, 0, 1]]));
        assert_eq!(d1.overlay().len(), 4);
        let origs: Vec<&str> = d1.overlay().iter().map(|o| g.name(o.orig)).collect();
        assert_eq!(origs, ["Sa", "D", "A", "S0"]);
        // S0' -> A' B, A' -> D D', D' -> Sa' Sb
        let s0 = &d1.overlay()[3];
        assert_eq!(s0.children, Some((NodeRef::Overlay(2), NodeRef::Base(id("B")))));
        let a = &d1.overlay()[2];
        assert_eq!(a.children, Some((NodeRef::Base(id("D")), NodeRef::Overlay(1))));
        assert_eq!(a.matrix, mat([[1, 1, 1], [0, 1, 2], [0, 0, 1]]));
        let dd = &d1.overlay()[1];
        assert_eq!(dd.children, Some((NodeRef::Overlay(0), NodeRef::Base(id("Sb")))));
        let leaf = &d1.overlay()[0];
        assert_eq!(leaf.vars, VarMask(0b11));

        let rules = RuleSet::from_rules(2, [(Var(0), PositionSet::Singleton(Nat::from(3u64)))]).unwrap();
        let w: Vec<char> = W0.chars().collect();
        assert_eq!(d1.matrix(root).answer_count(&[0], &[2]), slice_count(&running_example(), &w, &rules).unwrap());
        idx.discard_overlays();
        assert_eq!(idx, index());
    }

    #[test]
    fn update_at_first_position_keeps_right_children() {
        let mut idx = index();
        let start = idx.grammar().start();
        let root = idx.slp_update(1, NodeRef::Base(start), Var(0), &Nat::ONE).unwrap();
        let d1 = &idx.structures()[1];
        for o in d1.overlay() {
            if let Some((_, right)) = o.children {
                assert!(matches!(right, NodeRef::Base(_)));
            }
        }
        assert_eq!(d1.matrix(root).answer_count(&[0], &[2]), 3u64);
        assert!(idx.slp_update(1, root, Var(1), &Nat::from(10u64)).is_err());
    }

    #[test]
    fn access_matches_running_example() {
        let mut idx = index();
        let expected = [(1, 2), (1, 4), (1, 6), (3, 4), (3, 6), (5, 6), (7, 7), (8, 9)];
        for (t, (x1, x2)) in expected.into_iter().enumerate() {
            assert_eq!(idx.access(&Nat::from(t + 1)).unwrap(), Mapping::from_u64(&[x1, x2]).unwrap());
        }
        assert!(matches!(idx.access(&Nat::from(9u64)), Err(Error::OutOfRange { .. })));
        assert_eq!(idx, index());
    }

    #[test]
    fn doubling_grammar_of_ab() {
        let mut text = "start: S10\nSa -> 'a'\nSb -> 'b'\nS0 -> Sa Sb\n".to_string();
        for i in 1..=10 {
            text.push_str(&format!("S{i} -> S{} S{}\n", i - 1, i - 1));
        }
        let g: CnfSlp = text.parse().unwrap();
        let a = running_example();
        let mut idx = SlpIndex::build(&a, &g).unwrap();
        let w: Vec<char> = g.expand_start(4096).unwrap().chars().collect();
        let mut plain = StringIndex::build(&a, &w).unwrap();
        // Pairs i < j with x1 on an `a` and x2 on a later `b`: 1024·1025/2.
        assert_eq!(idx.count(), 524_800u64);
        assert_eq!(plain.count(), idx.count());
        for t in [1u64, 2, 1000, 262_144, 524_800] {
            let t = Nat::from(t);
            assert_eq!(idx.access(&t).unwrap(), plain.access(&t).unwrap());
        }
    }

    #[test]
    fn reversed_order() {
        let a = running_example();
        let order = a.vars().order_from_names(&["x2", "x1"]).unwrap();
        let mut all = SlpIndex::build_all_orders(&a, &example_slp()).unwrap();
        let mut plain = StringIndex::build_with_order(&a, &W0.chars().collect::<Vec<_>>(), &order).unwrap();
        for t in 1..=8u64 {
            let t = Nat::from(t);
            assert_eq!(all.access_with_order(&t, &order).unwrap(), plain.access(&t).unwrap());
        }
    }

    #[test]
    fn builder_annotates_new_rules() {
        let mut idx = index();
        let g = idx.grammar().clone();
        let b = g.lookup("B").unwrap();
        let a = g.lookup("A").unwrap();
        let ba = GrammarBuilder::pair(&mut idx, b, a);
        assert_eq!(ba, g.num_nonterminals());
        assert!(idx.is_coherent());
        let c = idx.leaf('c').unwrap();
        assert_eq!(c, g.lookup("Sc").unwrap());
        assert!(idx.leaf('z').is_err());
        // "abcababab"
        assert_eq!(idx.count_root(ba), 8u64);
    }
}
