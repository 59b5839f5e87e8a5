//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use rankspan::cse::CseExpr;
use rankspan::slp::{CnfSlp, Slp, Symbol};
use rankspan::{Nat, Transition, VarMask, VariableSet, VsetAutomaton};

pub const RUNNING_EXAMPLE: &str = include_str!("../../../../data/aex.vset");
pub const EXAMPLE_SLP: &str = include_str!("../../../../data/w0.slp");
pub const W0: &str = "abababcab";

pub fn running_example() -> VsetAutomaton {
    RUNNING_EXAMPLE.parse().unwrap()
}

pub fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

pub fn alphabet(sigma: usize) -> Vec<char> {
    ['a', 'b', 'c', 'd'][..sigma].to_vec()
}

/// A functional automaton, usually ambiguous. Every state carries the set
/// of variables opened on the way to it, so accepting runs open each
/// variable exactly once.
pub fn functional_automaton<R: Rng>(rng: &mut R, states: usize, k: usize, sigma: usize) -> VsetAutomaton {
    let full = VarMask::full(k);
    let mut masks: Vec<VarMask> = (0..states).map(|_| VarMask(rng.gen_range(0..=full.0))).collect();
    masks[0] = VarMask(0);
    let last = states - 1;
    masks[last] = full;
    let sigma = alphabet(sigma);
    let mut ts = Vec::new();
    for _ in 0..rng.gen_range(states..=4 * states) {
        let (p, q) = (rng.gen_range(0..states), rng.gen_range(0..states));
        if !masks[p].is_subset_of(masks[q]) {
            continue;
        }
        let vars = VarMask(masks[q].0 & !masks[p].0);
        ts.push(Transition { from: p, symbol: *sigma.choose(rng).unwrap(), vars, to: q });
    }
    // Loops keep most random words accepted somewhere.
    for (q, &m) in masks.iter().enumerate() {
        let p = if q == 0 || m == full { 0.9 } else { 0.6 };
        for &c in &sigma {
            if rng.gen_bool(p) {
                ts.push(Transition { from: q, symbol: c, vars: VarMask(0), to: q });
            }
        }
    }
    let names = (1..=k).map(|i| format!("x{i}"));
    let finals: Vec<usize> = (0..states).filter(|&q| masks[q] == full && (q == last || rng.gen_bool(0.3))).collect();
    VsetAutomaton::new(
        sigma,
        VariableSet::new(names).unwrap(),
        (0..states).map(|q| format!("q{q}")).collect(),
        ts,
        [0],
        finals,
    )
    .unwrap()
}

/// Disambiguated functional automaton with at most `max_states` states,
/// drawn by resampling.
pub fn unambiguous_automaton<R: Rng>(rng: &mut R, k: usize, sigma: usize, max_states: usize) -> VsetAutomaton {
    loop {
        let states = rng.gen_range(2..=5);
        let a = functional_automaton(rng, states, k, sigma).disambiguate().unwrap();
        if a.num_states() <= max_states {
            return a;
        }
    }
}

pub fn word<R: Rng>(rng: &mut R, sigma: &[char], len: usize) -> Vec<char> {
    (0..len).map(|_| *sigma.choose(rng).unwrap()).collect()
}

/// A random grammar whose start symbol expands to at most `max_len`
/// symbols. Right-hand sides have one to three symbols and often reuse
/// earlier nonterminals, so derivation trees are unbalanced and shared.
pub fn random_slp<R: Rng>(rng: &mut R, sigma: &[char], max_len: usize) -> CnfSlp {
    let mut names = Vec::new();
    let mut rules: Vec<Vec<Symbol>> = Vec::new();
    let mut lens: Vec<usize> = Vec::new();
    let target = rng.gen_range(1..=max_len);
    loop {
        let mut rhs = Vec::new();
        let mut len = 0;
        for _ in 0..rng.gen_range(1..=3) {
            if !lens.is_empty() && rng.gen_bool(0.7) {
                let j = if rng.gen_bool(0.5) { lens.len() - 1 } else { rng.gen_range(0..lens.len()) };
                if len + lens[j] <= max_len {
                    rhs.push(Symbol::Nonterminal(j));
                    len += lens[j];
                    continue;
                }
            }
            if len < max_len {
                rhs.push(Symbol::Terminal(*sigma.choose(rng).unwrap()));
                len += 1;
            }
        }
        names.push(format!("N{}", names.len()));
        rules.push(rhs);
        lens.push(len);
        if len >= target || names.len() >= 60 {
            break;
        }
    }
    let start = names.len() - 1;
    Slp::new(names, rules, start).unwrap().to_cnf().unwrap()
}

/// A random valid edit expression over strings of the given lengths,
/// returned with the length of its value. Every intermediate stays at or
/// below `max_len`.
pub fn random_expr<R: Rng>(rng: &mut R, lens: &HashMap<String, usize>, depth: usize, max_len: usize) -> (CseExpr, usize) {
    let mut names: Vec<&String> = lens.keys().collect();
    names.sort();
    let leaf = |rng: &mut R| {
        let n = names.choose(rng).unwrap();
        (CseExpr::Name((*n).clone()), lens[*n])
    };
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng);
    }
    let (a, la) = random_expr(rng, lens, depth - 1, max_len);
    let nat = |v: usize| Nat::from(v);
    let range = |rng: &mut R, len: usize| {
        let l = rng.gen_range(1..=len);
        (l, rng.gen_range(l..=len))
    };
    for _ in 0..8 {
        match rng.gen_range(0..5) {
            0 => {
                let (b, lb) = random_expr(rng, lens, depth - 1, max_len);
                if la + lb <= max_len {
                    return (CseExpr::Concat(Box::new(a), Box::new(b)), la + lb);
                }
            }
            1 if la > 0 => {
                let (l, r) = range(rng, la);
                return (CseExpr::Extract(Box::new(a), nat(l), nat(r)), r - l + 1);
            }
            2 if la > 0 => {
                let (l, r) = range(rng, la);
                return (CseExpr::Delete(Box::new(a), nat(l), nat(r)), la - (r - l + 1));
            }
            3 => {
                let (b, lb) = random_expr(rng, lens, depth - 1, max_len);
                if la + lb <= max_len {
                    let k = rng.gen_range(1..=la + 1);
                    return (CseExpr::InsertOp(Box::new(a), Box::new(b), nat(k)), la + lb);
                }
            }
            4 if la > 0 => {
                let (l, r) = range(rng, la);
                if la + r - l < max_len {
                    let k = rng.gen_range(1..=la + 1);
                    return (CseExpr::CopyOp(Box::new(a), nat(l), nat(r), nat(k)), la + r - l + 1);
                }
            }
            _ => {}
        }
    }
    (a, la)
}
