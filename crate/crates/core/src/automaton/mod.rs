//! Variable-set automata: the query formalism.
//!
//! A [`VsetAutomaton`] reads a string one symbol at a time; every transition
//! additionally "opens" a set of variables at the current position. A run
//! that opens each variable exactly once and ends in a final state yields a
//! [`Mapping`](crate::model::Mapping) from variables to positions.

mod analysis;
mod format;

use std::collections::{BTreeSet, HashMap};

pub use analysis::RunWitness;

use crate::error::{Error, Result};
use crate::matrix::CountMatrix;
use crate::model::{VarMask, VariableSet};

/// Index of a state; matrices are indexed by it.
pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateId,
    pub symbol: char,
    pub vars: VarMask,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VsetAutomaton {
    alphabet: Vec<char>,
    states: Vec<String>,
    vars: VariableSet,
    transitions: Vec<Transition>,
    initial: Vec<StateId>,
    finals: Vec<StateId>,
}

impl VsetAutomaton {
    /// Assembles an automaton, checking that transitions only mention
    /// declared states, symbols and variables. Duplicate transitions collapse.
    pub fn new(
        alphabet: Vec<char>,
        vars: VariableSet,
        states: Vec<String>,
        transitions: impl IntoIterator<Item = Transition>,
        initial: impl IntoIterator<Item = StateId>,
        finals: impl IntoIterator<Item = StateId>,
    ) -> Result<Self> {
        let distinct: BTreeSet<char> = alphabet.iter().copied().collect();
        if distinct.len() != alphabet.len() {
            return Err(Error::domain("alphabet symbols must be distinct"));
        }
        let names: BTreeSet<&String> = states.iter().collect();
        if names.len() != states.len() {
            return Err(Error::domain("state names must be distinct"));
        }
        if states.is_empty() {
            return Err(Error::domain("an automaton needs at least one state"));
        }
        let all_vars = vars.all();
        let check_state = |q: StateId| {
            if q < states.len() {
                Ok(q)
            } else {
                Err(Error::domain(format!("state index {q} is not declared")))
            }
        };
        let mut ts = BTreeSet::new();
        for t in transitions {
            check_state(t.from)?;
            check_state(t.to)?;
            if !distinct.contains(&t.symbol) {
                return Err(Error::domain(format!("symbol `{}` is not in the alphabet", t.symbol)));
            }
            if !t.vars.is_subset_of(all_vars) {
                return Err(Error::domain("transition opens an undeclared variable"));
            }
            ts.insert(t);
        }
        let initial: BTreeSet<StateId> = initial.into_iter().map(check_state).collect::<Result<_>>()?;
        let finals: BTreeSet<StateId> = finals.into_iter().map(check_state).collect::<Result<_>>()?;
        Ok(VsetAutomaton {
            alphabet,
            states,
            vars,
            transitions: ts.into_iter().collect(),
            initial: initial.into_iter().collect(),
            finals: finals.into_iter().collect(),
        })
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn has_symbol(&self, a: char) -> bool {
        self.alphabet.contains(&a)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn finals(&self) -> &[StateId] {
        &self.finals
    }

    /// Same automaton with a different final-state set.
    pub fn with_finals(&self, finals: impl IntoIterator<Item = StateId>) -> Result<Self> {
        VsetAutomaton::new(
            self.alphabet.clone(),
            self.vars.clone(),
            self.states.clone(),
            self.transitions.iter().copied(),
            self.initial.iter().copied(),
            finals,
        )
    }

    /// Same automaton with extra transitions (and states) added.
    pub fn with_transitions(
        &self,
        extra_states: &[&str],
        extra: impl IntoIterator<Item = Transition>,
    ) -> Result<Self> {
        let mut states = self.states.clone();
        states.extend(extra_states.iter().map(|s| s.to_string()));
        VsetAutomaton::new(
            self.alphabet.clone(),
            self.vars.clone(),
            states,
            self.transitions.iter().copied().chain(extra),
            self.initial.iter().copied(),
            self.finals.iter().copied(),
        )
    }

    /// The restricted transition matrix `Δ_a^Y`: entry `(p, q)` counts the
    /// transitions `p --(a, S)--> q` with `S ⊆ Y`.
    pub fn transition_matrix(&self, a: char, allowed: VarMask) -> Result<CountMatrix> {
        if !self.has_symbol(a) {
            return Err(Error::domain(format!("symbol `{a}` is not in the alphabet")));
        }
        let mut m = CountMatrix::zero(self.num_states());
        for t in &self.transitions {
            if t.symbol == a && t.vars.is_subset_of(allowed) {
                m.increment(t.from, t.to);
            }
        }
        Ok(m)
    }

    /// Fails unless the automaton is both functional and unambiguous, the
    /// two properties run counting relies on.
    pub fn require_countable(&self) -> Result<()> {
        if let Some(w) = self.check_functional() {
            return Err(Error::domain(format!(
                "automaton is not functional: accepting run over \"{}\" does not place every variable exactly once",
                w.word()
            )));
        }
        if let Some((w, _)) = self.check_unambiguous() {
            return Err(Error::domain(format!(
                "automaton is ambiguous: two runs over \"{}\" produce the same mapping (try disambiguating first)",
                w.word()
            )));
        }
        Ok(())
    }
}

/// Memoized `Δ_a^Y` lookups for index construction.
#[derive(Debug, Clone)]
pub(crate) struct DeltaCache {
    table: HashMap<(char, VarMask), CountMatrix>,
}

impl DeltaCache {
    pub(crate) fn new() -> Self {
        DeltaCache { table: HashMap::new() }
    }

    pub(crate) fn get(
        &mut self,
        automaton: &VsetAutomaton,
        a: char,
        allowed: VarMask,
    ) -> Result<CountMatrix> {
        if let Some(m) = self.table.get(&(a, allowed)) {
            return Ok(m.clone());
        }
        let m = automaton.transition_matrix(a, allowed)?;
        self.table.insert((a, allowed), m.clone());
        Ok(m)
    }
}
