//! Straight-line programs: grammars with one rule per nonterminal and an
//! acyclic rule graph, each deriving a single string.

pub mod avl;
mod format;

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::nat::Nat;

pub use avl::GrammarBuilder;

/// Index of a nonterminal in a [`CnfSlp`]. Children always have smaller ids.
pub type NtId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Terminal(char),
    Pair(NtId, NtId),
}

/// A right-hand-side symbol of a general [`Slp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Nonterminal(usize),
    Terminal(char),
}

/// An SLP with arbitrary non-empty right-hand sides, as read from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    names: Vec<String>,
    rules: Vec<Vec<Symbol>>,
    start: usize,
}

impl Slp {
    /// Checks that every rule is non-empty, references declared
    /// nonterminals, and that the rule graph has no cycle.
    pub fn new(names: Vec<String>, rules: Vec<Vec<Symbol>>, start: usize) -> Result<Self> {
        if names.len() != rules.len() {
            return Err(Error::domain("one rule per nonterminal is required"));
        }
        if start >= names.len() {
            return Err(Error::domain("start symbol is not a nonterminal"));
        }
        let slp = Slp { names, rules, start };
        for (i, rhs) in slp.rules.iter().enumerate() {
            if rhs.is_empty() {
                return Err(Error::domain(format!("rule for `{}` is empty", slp.names[i])));
            }
            for s in rhs {
                if let Symbol::Nonterminal(j) = s {
                    if *j >= slp.names.len() {
                        return Err(Error::domain(format!("rule for `{}` uses an undeclared nonterminal", slp.names[i])));
                    }
                }
            }
        }
        slp.topological()?;
        Ok(slp)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rules(&self) -> &[Vec<Symbol>] {
        &self.rules
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Nonterminals with every one after the nonterminals it uses.
    fn topological(&self) -> Result<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark = vec![Mark::New; self.names.len()];
        let mut order = Vec::with_capacity(self.names.len());
        for root in 0..self.names.len() {
            if mark[root] != Mark::New {
                continue;
            }
            // Iterative DFS: (node, next child to visit).
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Active;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                let child = self.rules[node][*next..].iter().position(|s| matches!(s, Symbol::Nonterminal(_)));
                match child {
                    Some(off) => {
                        let idx = *next + off;
                        *next = idx + 1;
                        let Symbol::Nonterminal(c) = self.rules[node][idx] else { unreachable!() };
                        match mark[c] {
                            Mark::Active => {
                                return Err(Error::domain(format!(
                                    "rules are cyclic through `{}`",
                                    self.names[c]
                                )))
                            }
                            Mark::New => {
                                mark[c] = Mark::Active;
                                stack.push((c, 0));
                            }
                            Mark::Done => {}
                        }
                    }
                    None => {
                        mark[node] = Mark::Done;
                        order.push(node);
                        stack.pop();
                    }
                }
            }
        }
        Ok(order)
    }

    /// Chomsky normal form: long right-hand sides are folded left with fresh
    /// nonterminals, rules `A → B` become aliases, and terminals inside long
    /// rules get (shared) leaf nonterminals.
    pub fn to_cnf(&self) -> Result<CnfSlp> {
        let order = self.topological()?;
        let mut out = CnfSlp::empty();
        out.reserved.extend(self.names.iter().cloned());
        let mut image = vec![usize::MAX; self.names.len()];
        for nt in order {
            let name = &self.names[nt];
            let rhs = &self.rules[nt];
            image[nt] = match rhs.as_slice() {
                [Symbol::Terminal(c)] => out.push(Rule::Terminal(*c), Some(name.clone())),
                [Symbol::Nonterminal(b)] => {
                    out.by_name.insert(name.clone(), image[*b]);
                    image[*b]
                }
                _ => {
                    let ids: Vec<NtId> = rhs
                        .iter()
                        .map(|s| match s {
                            Symbol::Nonterminal(b) => image[*b],
                            Symbol::Terminal(c) => out.leaf(*c),
                        })
                        .collect();
                    let mut acc = ids[0];
                    for &id in &ids[1..ids.len() - 1] {
                        acc = out.pair(acc, id);
                    }
                    out.push(Rule::Pair(acc, ids[ids.len() - 1]), Some(name.clone()))
                }
            };
        }
        out.start = image[self.start];
        Ok(out)
    }
}

/// An SLP in Chomsky normal form: every rule is `A → B C` or `A → a`.
///
/// Nonterminals are stored in topological order, with lengths and heights
/// cached. Builder operations hash-cons, so equal rules share a nonterminal.
#[derive(Debug, Clone)]
pub struct CnfSlp {
    rules: Vec<Rule>,
    lens: Vec<Nat>,
    heights: Vec<u32>,
    names: Vec<String>,
    by_name: HashMap<String, NtId>,
    start: NtId,
    pairs: HashMap<(NtId, NtId), NtId>,
    leaves: HashMap<char, NtId>,
    reserved: HashSet<String>,
    next_fresh: usize,
}

impl PartialEq for CnfSlp {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.names == other.names && self.by_name == other.by_name && self.start == other.start
    }
}

impl Eq for CnfSlp {}

/// Prefix of generated nonterminal names.
pub const FRESH_PREFIX: char = '_';

impl CnfSlp {
    pub(crate) fn empty() -> Self {
        CnfSlp {
            rules: Vec::new(),
            lens: Vec::new(),
            heights: Vec::new(),
            names: Vec::new(),
            by_name: HashMap::new(),
            start: 0,
            pairs: HashMap::new(),
            leaves: HashMap::new(),
            reserved: HashSet::new(),
            next_fresh: 0,
        }
    }

    fn fresh_name(&mut self) -> String {
        loop {
            let name = format!("{FRESH_PREFIX}{}", self.next_fresh);
            self.next_fresh += 1;
            if !self.by_name.contains_key(&name) && !self.reserved.contains(&name) {
                return name;
            }
        }
    }

    fn push(&mut self, rule: Rule, name: Option<String>) -> NtId {
        let id = self.rules.len();
        let (len, height) = match rule {
            Rule::Terminal(_) => (Nat::ONE, 0),
            Rule::Pair(b, c) => (&self.lens[b] + &self.lens[c], 1 + self.heights[b].max(self.heights[c])),
        };
        match rule {
            Rule::Terminal(c) => {
                self.leaves.entry(c).or_insert(id);
            }
            Rule::Pair(b, c) => {
                self.pairs.entry((b, c)).or_insert(id);
            }
        }
        let name = name.unwrap_or_else(|| self.fresh_name());
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.rules.push(rule);
        self.lens.push(len);
        self.heights.push(height);
        id
    }

    /// The nonterminal `→ c`, created if needed.
    pub fn leaf(&mut self, c: char) -> NtId {
        match self.leaves.get(&c) {
            Some(&id) => id,
            None => self.push(Rule::Terminal(c), None),
        }
    }

    /// The nonterminal `→ b c`, created if needed.
    pub fn pair(&mut self, b: NtId, c: NtId) -> NtId {
        match self.pairs.get(&(b, c)) {
            Some(&id) => id,
            None => self.push(Rule::Pair(b, c), None),
        }
    }

    pub fn num_nonterminals(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, id: NtId) -> Rule {
        self.rules[id]
    }

    pub fn children(&self, id: NtId) -> Option<(NtId, NtId)> {
        match self.rules[id] {
            Rule::Pair(b, c) => Some((b, c)),
            Rule::Terminal(_) => None,
        }
    }

    pub fn name(&self, id: NtId) -> &str {
        &self.names[id]
    }

    /// Looks up a nonterminal by name, following aliases.
    pub fn lookup(&self, name: &str) -> Option<NtId> {
        self.by_name.get(name).copied()
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn with_start(mut self, start: NtId) -> Result<Self> {
        if start >= self.rules.len() {
            return Err(Error::domain(format!("no nonterminal with id {start}")));
        }
        self.start = start;
        Ok(self)
    }

    /// `|str(A)|`.
    pub fn len_of(&self, id: NtId) -> &Nat {
        &self.lens[id]
    }

    /// Length of the derived string.
    pub fn len(&self) -> &Nat {
        &self.lens[self.start]
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Height of `A`'s derivation tree; terminal rules have height 0.
    pub fn height(&self, id: NtId) -> u32 {
        self.heights[id]
    }

    pub fn depth(&self) -> u32 {
        self.heights[self.start]
    }

    /// Symbol at 1-based position `p` of `str(A)`.
    pub fn char_at(&self, id: NtId, p: &Nat) -> Result<char> {
        if p.is_zero() || p > &self.lens[id] {
            return Err(Error::domain(format!(
                "position {p} is outside 1..={}",
                self.lens[id]
            )));
        }
        let mut node = id;
        let mut p = p.clone();
        loop {
            match self.rules[node] {
                Rule::Terminal(c) => return Ok(c),
                Rule::Pair(b, c) => {
                    if p <= self.lens[b] {
                        node = b;
                    } else {
                        p = &p - &self.lens[b];
                        node = c;
                    }
                }
            }
        }
    }

    /// `str(A)`, refusing anything longer than `limit`.
    pub fn expand(&self, id: NtId, limit: usize) -> Result<String> {
        if self.lens[id] > Nat::from(limit) {
            return Err(Error::Size(format!(
                "`{}` derives {} symbols, above the limit {limit}",
                self.names[id], self.lens[id]
            )));
        }
        let mut out = String::new();
        let mut stack = vec![id];
        while let Some(node) = stack.pop() {
            match self.rules[node] {
                Rule::Terminal(c) => out.push(c),
                Rule::Pair(b, c) => {
                    stack.push(c);
                    stack.push(b);
                }
            }
        }
        Ok(out)
    }

    pub fn expand_start(&self, limit: usize) -> Result<String> {
        self.expand(self.start, limit)
    }

    /// Terminal symbols occurring in any rule.
    pub fn terminals(&self) -> impl Iterator<Item = char> + '_ {
        self.rules.iter().filter_map(|r| match r {
            Rule::Terminal(c) => Some(*c),
            Rule::Pair(..) => None,
        })
    }

    /// Ids reachable from `roots`, ascending.
    pub fn reachable(&self, roots: &[NtId]) -> Vec<NtId> {
        let mut seen = vec![false; self.rules.len()];
        for &r in roots {
            seen[r] = true;
        }
        // Ids are topological, so one descending sweep suffices.
        for id in (0..self.rules.len()).rev() {
            if let (true, Rule::Pair(b, c)) = (seen[id], self.rules[id]) {
                seen[b] = true;
                seen[c] = true;
            }
        }
        (0..self.rules.len()).filter(|&i| seen[i]).collect()
    }

    /// Whether every rule reachable from `root` joins children whose heights
    /// differ by at most one.
    pub fn is_strongly_balanced(&self, root: NtId) -> bool {
        self.reachable(&[root]).into_iter().all(|id| self.pair_is_balanced(id))
    }

    fn pair_is_balanced(&self, id: NtId) -> bool {
        match self.rules[id] {
            Rule::Terminal(_) => true,
            Rule::Pair(b, c) => self.heights[b].abs_diff(self.heights[c]) <= 1,
        }
    }

    /// An equivalent grammar of logarithmic depth.
    pub fn balance(&self) -> CnfSlp {
        self.strongly_balance()
    }

    /// An equivalent grammar in which every rule is strongly balanced.
    ///
    /// Rebuilds each rule bottom-up by balanced concatenation, so the size
    /// can grow by a logarithmic factor. Names are kept.
    pub fn strongly_balance(&self) -> CnfSlp {
        if (0..self.rules.len()).all(|id| self.pair_is_balanced(id)) {
            return self.clone();
        }
        let mut out = CnfSlp::empty();
        out.reserved.extend(self.by_name.keys().cloned());
        let mut image = vec![0; self.rules.len()];
        for (id, rule) in self.rules.iter().enumerate() {
            image[id] = match *rule {
                Rule::Terminal(c) => out.leaf(c),
                Rule::Pair(b, c) => avl::join(&mut out, image[b], image[c]),
            };
        }
        let mut generated = vec![true; out.rules.len()];
        for (id, &img) in image.iter().enumerate() {
            if generated[img] {
                let old = std::mem::replace(&mut out.names[img], self.names[id].clone());
                out.by_name.remove(&old);
                generated[img] = false;
            }
            out.by_name.insert(self.names[id].clone(), img);
        }
        for (name, &id) in &self.by_name {
            out.by_name.insert(name.clone(), image[id]);
        }
        out.start = image[self.start];
        let roots: Vec<NtId> = image.clone();
        out.compact(&roots)
    }

    /// Keeps only nonterminals reachable from `roots` (and the start).
    pub fn compact(&self, roots: &[NtId]) -> CnfSlp {
        let mut all = roots.to_vec();
        all.push(self.start);
        let keep = self.reachable(&all);
        let mut renumber = vec![usize::MAX; self.rules.len()];
        let mut out = CnfSlp::empty();
        out.reserved = self.reserved.clone();
        out.next_fresh = self.next_fresh;
        for &id in &keep {
            let rule = match self.rules[id] {
                Rule::Terminal(c) => Rule::Terminal(c),
                Rule::Pair(b, c) => Rule::Pair(renumber[b], renumber[c]),
            };
            renumber[id] = out.push(rule, Some(self.names[id].clone()));
        }
        for (name, &id) in &self.by_name {
            if renumber[id] != usize::MAX {
                out.by_name.insert(name.clone(), renumber[id]);
            }
        }
        out.start = renumber[self.start];
        out
    }

    /// A strongly balanced grammar for `w`, built by halving with shared
    /// subtrees. The start symbol is named `S`.
    pub fn make_strongly_balanced(w: &[char]) -> Result<CnfSlp> {
        if w.is_empty() {
            return Err(Error::domain("an SLP cannot derive the empty string"));
        }
        let mut out = CnfSlp::empty();
        out.reserved.insert("S".to_string());
        fn build(g: &mut CnfSlp, w: &[char]) -> NtId {
            if w.len() == 1 {
                return g.leaf(w[0]);
            }
            let m = w.len().div_ceil(2);
            let b = build(g, &w[..m]);
            let c = build(g, &w[m..]);
            g.pair(b, c)
        }
        let root = build(&mut out, w);
        let old = std::mem::replace(&mut out.names[root], "S".to_string());
        out.by_name.remove(&old);
        out.by_name.insert("S".to_string(), root);
        out.start = root;
        Ok(out)
    }

    /// All names with the nonterminal they denote, aliases included.
    pub fn named(&self) -> impl Iterator<Item = (&str, NtId)> {
        self.by_name.iter().map(|(n, &id)| (n.as_str(), id))
    }
}

impl GrammarBuilder for CnfSlp {
    fn grammar(&self) -> &CnfSlp {
        self
    }

    fn pair(&mut self, b: NtId, c: NtId) -> NtId {
        CnfSlp::pair(self, b, c)
    }
}
