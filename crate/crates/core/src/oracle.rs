//! Brute-force references: explicit run enumeration and the slice-count
//! binary search. Exponential in the worst case; meant for small inputs.

use std::collections::BTreeSet;

use crate::automaton::VsetAutomaton;
use crate::error::{Error, Result};
use crate::matrix::CountMatrix;
use crate::model::{compare, respects, Mapping, Order, PositionSet, RuleSet, Var, VarMask};
use crate::nat::Nat;

/// Longest string the oracle accepts by default.
pub const DEFAULT_BOUND: usize = 64;

fn check_input(a: &VsetAutomaton, w: &[char], bound: usize) -> Result<()> {
    if w.len() > bound {
        return Err(Error::Size(format!(
            "oracle input has length {}, above the bound {bound}",
            w.len()
        )));
    }
    if let Some(c) = w.iter().find(|c| !a.has_symbol(**c)) {
        return Err(Error::domain(format!("symbol `{c}` is not in the alphabet")));
    }
    Ok(())
}

/// Calls `visit` with the per-position variable labels of every accepting
/// run of `a` over `w`.
fn accepting_runs(a: &VsetAutomaton, w: &[char], visit: &mut dyn FnMut(&[VarMask])) {
    let n = w.len();
    let q = a.num_states();
    // alive[i][p]: from p, having read i symbols, a final state is reachable.
    let mut alive = vec![vec![false; q]; n + 1];
    for &f in a.finals() {
        alive[n][f] = true;
    }
    for i in (0..n).rev() {
        for t in a.transitions() {
            if t.symbol == w[i] && alive[i + 1][t.to] {
                alive[i][t.from] = true;
            }
        }
    }
    let mut labels = Vec::with_capacity(n);
    fn dfs(
        a: &VsetAutomaton,
        w: &[char],
        alive: &[Vec<bool>],
        state: usize,
        labels: &mut Vec<VarMask>,
        visit: &mut dyn FnMut(&[VarMask]),
    ) {
        let i = labels.len();
        if i == w.len() {
            visit(labels);
            return;
        }
        for t in a.transitions() {
            if t.from == state && t.symbol == w[i] && alive[i + 1][t.to] {
                labels.push(t.vars);
                dfs(a, w, alive, t.to, labels, visit);
                labels.pop();
            }
        }
    }
    for &p in a.initial() {
        if alive[0][p] {
            dfs(a, w, &alive, p, &mut labels, visit);
        }
    }
}

/// The mapping of a run given its labels, if the run is valid.
fn mapping_of(labels: &[VarMask], k: usize) -> Option<Mapping> {
    let mut pos = vec![None; k];
    for (i, m) in labels.iter().enumerate() {
        for v in m.iter() {
            if pos[v.0].replace(Nat::from(i + 1)).is_some() {
                return None;
            }
        }
    }
    Mapping::new(pos.into_iter().collect::<Option<Vec<_>>>()?).ok()
}

/// All accepting valid runs, as mappings, with multiplicity.
pub fn run_mappings(a: &VsetAutomaton, w: &[char], bound: usize) -> Result<Vec<Mapping>> {
    check_input(a, w, bound)?;
    let k = a.vars().len();
    let mut out = Vec::new();
    accepting_runs(a, w, &mut |labels| {
        if let Some(m) = mapping_of(labels, k) {
            out.push(m);
        }
    });
    Ok(out)
}

/// `⟦A⟧(w)` sorted under `order`.
pub fn enumerate(a: &VsetAutomaton, w: &[char], order: &Order) -> Result<Vec<Mapping>> {
    enumerate_bounded(a, w, order, DEFAULT_BOUND)
}

pub fn enumerate_bounded(a: &VsetAutomaton, w: &[char], order: &Order, bound: usize) -> Result<Vec<Mapping>> {
    if order.len() != a.vars().len() {
        return Err(Error::domain("order does not match the automaton's variables"));
    }
    let distinct: BTreeSet<Vec<Nat>> = run_mappings(a, w, bound)?
        .into_iter()
        .map(|m| m.positions().to_vec())
        .collect();
    let mut list: Vec<Mapping> = distinct.into_iter().map(|p| Mapping::new(p).expect("1-based")).collect();
    list.sort_by(|x, y| compare(x, y, order).expect("same variables"));
    Ok(list)
}

/// `#⟦A⟧(w)⟨τ⟩`: answers respecting `rules`.
pub fn slice_count(a: &VsetAutomaton, w: &[char], rules: &RuleSet) -> Result<Nat> {
    slice_count_bounded(a, w, rules, DEFAULT_BOUND)
}

pub fn slice_count_bounded(a: &VsetAutomaton, w: &[char], rules: &RuleSet, bound: usize) -> Result<Nat> {
    Ok(Answers::bounded(a, w, bound)?.slice_count(rules))
}

/// `M⟨l,r:τ⟩`: entry `(p, q)` counts transition sequences from `p` to `q`
/// reading `w[l..=r]` (1-based) in which every opened variable sits at a
/// position its rule allows. Variables may repeat; the tree matrices count
/// the same thing.
pub fn oracle_matrix(a: &VsetAutomaton, w: &[char], l: usize, r: usize, rules: &RuleSet) -> Result<CountMatrix> {
    check_input(a, w, DEFAULT_BOUND)?;
    if l == 0 || l > r || r > w.len() {
        return Err(Error::domain(format!("[{l},{r}] is not a range of positions in 1..={}", w.len())));
    }
    let mut m = CountMatrix::zero(a.num_states());
    #[allow(clippy::too_many_arguments)]
    fn dfs(a: &VsetAutomaton, w: &[char], rules: &RuleSet, pos: usize, r: usize, start: usize, state: usize, m: &mut CountMatrix) {
        if pos > r {
            m.increment(start, state);
            return;
        }
        let p = Nat::from(pos);
        for t in a.transitions() {
            if t.from == state && t.symbol == w[pos - 1] && t.vars.iter().all(|v| rules.allows(v, &p)) {
                dfs(a, w, rules, pos + 1, r, start, t.to, m);
            }
        }
    }
    for p in 0..a.num_states() {
        dfs(a, w, rules, l, r, p, p, &mut m);
    }
    Ok(m)
}

/// The t-th answer (1-based) under `order`, found by binary search over
/// slice counts, one variable at a time.
pub fn template_access(a: &VsetAutomaton, w: &[char], order: &Order, t: &Nat) -> Result<Mapping> {
    Answers::new(a, w)?.template_access(order, t)
}

/// An answer set enumerated once, for repeated slice counting.
#[derive(Debug, Clone)]
pub struct Answers {
    n: usize,
    k: usize,
    list: Vec<Mapping>,
}

impl Answers {
    pub fn new(a: &VsetAutomaton, w: &[char]) -> Result<Self> {
        Answers::bounded(a, w, DEFAULT_BOUND)
    }

    pub fn bounded(a: &VsetAutomaton, w: &[char], bound: usize) -> Result<Self> {
        let list = enumerate_bounded(a, w, &a.vars().default_order(), bound)?;
        Ok(Answers { n: w.len(), k: a.vars().len(), list })
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// Sorted under the default order.
    pub fn list(&self) -> &[Mapping] {
        &self.list
    }

    pub fn slice_count(&self, rules: &RuleSet) -> Nat {
        Nat::from(self.list.iter().filter(|m| respects(m, rules)).count())
    }

    pub fn template_access(&self, order: &Order, t: &Nat) -> Result<Mapping> {
        let total = Nat::from(self.list.len());
        if t.is_zero() || *t > total {
            return Err(Error::OutOfRange { index: t.clone(), total });
        }
        let mut t = t.clone();
        let mut rules = RuleSet::unrestricted(self.k);
        let mut positions = vec![Nat::ZERO; self.k];
        for &v in order.vars() {
            // Smallest m with #⟨…, v ↦ [1,m]⟩ ≥ t.
            let (mut lo, mut hi) = (1usize, self.n);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if self.slice_count(&with_rule(&rules, v, 1, mid)) >= t {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            if lo > 1 {
                t = &t - &self.slice_count(&with_rule(&rules, v, 1, lo - 1));
            }
            rules.set(v, PositionSet::Singleton(Nat::from(lo)));
            positions[v.0] = Nat::from(lo);
        }
        Mapping::new(positions)
    }
}

fn with_rule(rules: &RuleSet, v: Var, l: usize, r: usize) -> RuleSet {
    let mut out = rules.clone();
    out.set(v, PositionSet::range(Nat::from(l), Nat::from(r)).expect("l ≤ r"));
    out
}
