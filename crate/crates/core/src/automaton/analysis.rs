//! Functionality and ambiguity checks, and disambiguation by determinization
//! over the extended alphabet `Σ × 2^X`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{StateId, Transition, VsetAutomaton};
use crate::error::{Error, Result};
use crate::model::{Mapping, VarMask};
use crate::nat::Nat;

/// A concrete run: `states[0] --labels[0]--> states[1] --…--> states[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunWitness {
    pub states: Vec<StateId>,
    pub labels: Vec<(char, VarMask)>,
}

impl RunWitness {
    fn from_transitions(start: StateId, steps: &[Transition]) -> Self {
        let mut states = vec![start];
        states.extend(steps.iter().map(|t| t.to));
        RunWitness {
            states,
            labels: steps.iter().map(|t| (t.symbol, t.vars)).collect(),
        }
    }

    /// The string the run reads.
    pub fn word(&self) -> String {
        self.labels.iter().map(|(a, _)| a).collect()
    }

    /// The run's mapping, if it opens each of the `k` variables exactly once.
    pub fn mapping(&self, k: usize) -> Option<Mapping> {
        let mut pos: Vec<Option<Nat>> = vec![None; k];
        for (i, (_, vars)) in self.labels.iter().enumerate() {
            for v in vars.iter() {
                if v.0 >= k || pos[v.0].replace(Nat::from(i + 1)).is_some() {
                    return None;
                }
            }
        }
        pos.into_iter().collect::<Option<Vec<_>>>().and_then(|p| Mapping::new(p).ok())
    }

    /// Renders the run with state names, e.g. `q0 -a{x1}-> q1`.
    pub fn describe(&self, a: &VsetAutomaton) -> String {
        let mut out = a.state_name(self.states[0]).to_string();
        for ((sym, vars), q) in self.labels.iter().zip(&self.states[1..]) {
            out.push_str(&format!(" -{sym}{}-> {}", a.vars().display_mask(*vars), a.state_name(*q)));
        }
        out
    }
}

/// Variables seen so far on a run; `None` once some variable repeats.
type Seen = Option<VarMask>;

/// Breadth-first search with parent pointers over an implicit graph.
struct Bfs<N, E> {
    parent: HashMap<N, Option<(N, E)>>,
    queue: VecDeque<N>,
}

impl<N: Copy + Eq + std::hash::Hash, E: Copy> Bfs<N, E> {
    fn new(starts: impl IntoIterator<Item = N>) -> Self {
        let mut parent = HashMap::new();
        let mut queue = VecDeque::new();
        for s in starts {
            if parent.insert(s, None).is_none() {
                queue.push_back(s);
            }
        }
        Bfs { parent, queue }
    }

    fn visit(&mut self, node: N, from: N, via: E) {
        if let std::collections::hash_map::Entry::Vacant(e) = self.parent.entry(node) {
            e.insert(Some((from, via)));
            self.queue.push_back(node);
        }
    }

    /// The start node and edges leading to `node`.
    fn path_to(&self, mut node: N) -> (N, Vec<E>) {
        let mut steps = Vec::new();
        while let Some(Some((prev, e))) = self.parent.get(&node) {
            steps.push(*e);
            node = *prev;
        }
        steps.reverse();
        (node, steps)
    }
}

impl VsetAutomaton {
    fn outgoing(&self) -> Vec<Vec<Transition>> {
        let mut out = vec![Vec::new(); self.num_states()];
        for t in &self.transitions {
            out[t.from].push(*t);
        }
        out
    }

    /// States that can reach a final state.
    fn coreachable(&self) -> Vec<bool> {
        let mut good = vec![false; self.num_states()];
        for &f in &self.finals {
            good[f] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for t in &self.transitions {
                if good[t.to] && !good[t.from] {
                    good[t.from] = true;
                    changed = true;
                }
            }
        }
        good
    }

    /// Looks for an accepting run that is not valid, i.e. that repeats or
    /// misses a variable. `None` means the automaton is functional.
    ///
    /// Explores `Q × (2^X ∪ {⊥})`, so the witness found is a shortest one.
    pub fn check_functional(&self) -> Option<RunWitness> {
        let all = self.vars.all();
        let out = self.outgoing();
        let mut bfs: Bfs<(StateId, Seen), Transition> = Bfs::new(self.initial.iter().map(|&q| (q, Some(VarMask::EMPTY))));
        while let Some(node @ (q, seen)) = bfs.queue.pop_front() {
            if self.finals.contains(&q) && seen != Some(all) {
                let (start, steps) = bfs.path_to(node);
                return Some(RunWitness::from_transitions(start.0, &steps));
            }
            for t in &out[q] {
                let next = match seen {
                    Some(s) if !s.intersects(t.vars) => Some(s.union(t.vars)),
                    _ => None,
                };
                bfs.visit((t.to, next), node, *t);
            }
        }
        None
    }

    pub fn is_functional(&self) -> bool {
        self.check_functional().is_none()
    }

    /// Looks for two distinct accepting runs reading the same extended word
    /// (same string, same variable placement). `None` means unambiguous.
    ///
    /// Works on the trimmed self-product: the automaton is ambiguous exactly
    /// when some useful product state `(p, q)` has `p ≠ q`.
    pub fn check_unambiguous(&self) -> Option<(RunWitness, RunWitness)> {
        let out = self.outgoing();
        let useful = self.coreachable();
        let is_final = |q: StateId| self.finals.contains(&q);
        let both_final = |(p, q): (StateId, StateId)| is_final(p) && is_final(q);

        let pairs = |(p, q): (StateId, StateId)| {
            let mut next = Vec::new();
            for t in &out[p] {
                for u in &out[q] {
                    if t.symbol == u.symbol && t.vars == u.vars && useful[t.to] && useful[u.to] {
                        next.push((*t, *u));
                    }
                }
            }
            next
        };

        let starts: Vec<(StateId, StateId)> = self
            .initial
            .iter()
            .flat_map(|&p| self.initial.iter().map(move |&q| (p, q)))
            .filter(|&(p, q)| useful[p] && useful[q])
            .collect();
        let mut fwd: Bfs<(StateId, StateId), (Transition, Transition)> = Bfs::new(starts);
        let mut reached = Vec::new();
        while let Some(node) = fwd.queue.pop_front() {
            reached.push(node);
            for (t, u) in pairs(node) {
                fwd.visit((t.to, u.to), node, (t, u));
            }
        }

        // Distance to F × F inside the reachable product.
        let mut dist: HashMap<(StateId, StateId), usize> =
            reached.iter().copied().filter(|&n| both_final(n)).map(|n| (n, 0)).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for &node in &reached {
                let best = pairs(node)
                    .iter()
                    .filter_map(|(t, u)| dist.get(&(t.to, u.to)).map(|d| d + 1))
                    .min();
                if let Some(b) = best {
                    if dist.get(&node).is_none_or(|&d| b < d) {
                        dist.insert(node, b);
                        changed = true;
                    }
                }
            }
        }

        let culprit = reached
            .iter()
            .copied()
            .find(|&(p, q)| p != q && dist.contains_key(&(p, q)))?;

        let (start, mut steps) = fwd.path_to(culprit);
        let mut node = culprit;
        while dist[&node] > 0 {
            let d = dist[&node];
            let (t, u) = pairs(node)
                .into_iter()
                .find(|(t, u)| dist.get(&(t.to, u.to)) == Some(&(d - 1)))
                .expect("a product state at distance d has a successor at d-1");
            steps.push((t, u));
            node = (t.to, u.to);
        }
        let left: Vec<Transition> = steps.iter().map(|s| s.0).collect();
        let right: Vec<Transition> = steps.iter().map(|s| s.1).collect();
        Some((
            RunWitness::from_transitions(start.0, &left),
            RunWitness::from_transitions(start.1, &right),
        ))
    }

    pub fn is_unambiguous(&self) -> bool {
        self.check_unambiguous().is_none()
    }

    /// An equivalent automaton that is deterministic over `Σ × 2^X` (hence
    /// unambiguous), built by the subset construction and trimmed.
    ///
    /// The output can have up to `2^|Q|` states. Singleton subsets keep the
    /// original state name, so deterministic inputs come back isomorphic.
    pub fn disambiguate(&self) -> Result<VsetAutomaton> {
        if let Some(w) = self.check_functional() {
            return Err(Error::domain(format!(
                "disambiguation requires a functional automaton; run {} is accepting but invalid",
                w.describe(self)
            )));
        }
        let out = self.outgoing();
        let start: BTreeSet<StateId> = self.initial.iter().copied().collect();
        let mut index: BTreeMap<BTreeSet<StateId>, usize> = BTreeMap::new();
        let mut subsets = vec![start.clone()];
        index.insert(start, 0);
        let mut transitions = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            let mut by_label: BTreeMap<(char, VarMask), BTreeSet<StateId>> = BTreeMap::new();
            for &p in &subsets[i] {
                for t in &out[p] {
                    by_label.entry((t.symbol, t.vars)).or_default().insert(t.to);
                }
            }
            for ((symbol, vars), target) in by_label {
                let to = *index.entry(target.clone()).or_insert_with(|| {
                    subsets.push(target);
                    subsets.len() - 1
                });
                transitions.push(Transition { from: i, symbol, vars, to });
            }
            i += 1;
        }
        let finals: Vec<usize> = (0..subsets.len())
            .filter(|&s| subsets[s].iter().any(|q| self.finals.contains(q)))
            .collect();
        let names: Vec<String> = subsets
            .iter()
            .map(|s| {
                if s.len() == 1 {
                    self.states[*s.iter().next().unwrap()].clone()
                } else {
                    let parts: Vec<&str> = s.iter().map(|&q| self.states[q].as_str()).collect();
                    format!("{{{}}}", parts.join(","))
                }
            })
            .collect();
        let det = VsetAutomaton::new(self.alphabet.clone(), self.vars.clone(), names, transitions, [0], finals)?;
        det.trim()
    }

    /// Removes states that cannot reach a final state (the first initial
    /// state is always kept so the result stays well formed).
    pub fn trim(&self) -> Result<VsetAutomaton> {
        let mut keep = self.coreachable();
        let mut reach = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.initial.clone();
        for &q in &stack {
            reach[q] = true;
        }
        let out = self.outgoing();
        while let Some(q) = stack.pop() {
            for t in &out[q] {
                if !reach[t.to] {
                    reach[t.to] = true;
                    stack.push(t.to);
                }
            }
        }
        for q in 0..keep.len() {
            keep[q] &= reach[q];
        }
        if let Some(&i0) = self.initial.first() {
            keep[i0] = true;
        } else {
            keep[0] = true;
        }
        let mut renumber = vec![usize::MAX; self.num_states()];
        let mut names = Vec::new();
        for q in 0..self.num_states() {
            if keep[q] {
                renumber[q] = names.len();
                names.push(self.states[q].clone());
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| keep[t.from] && keep[t.to])
            .map(|t| Transition { from: renumber[t.from], to: renumber[t.to], ..*t });
        VsetAutomaton::new(
            self.alphabet.clone(),
            self.vars.clone(),
            names,
            transitions,
            self.initial.iter().filter(|&&q| keep[q]).map(|&q| renumber[q]),
            self.finals.iter().filter(|&&q| keep[q]).map(|&q| renumber[q]),
        )
    }
}
