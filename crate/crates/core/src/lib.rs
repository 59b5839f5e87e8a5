//! Ranked direct access to the answers of a vset automaton over a string,
//! a grammar-compressed string, or a document built by edit expressions.

pub mod automaton;
pub mod cse;
pub mod error;
pub mod matrix;
pub mod model;
pub mod nat;
pub mod oracle;
pub mod slp;
pub mod slp_index;
pub mod string_index;

#[cfg(test)]
mod testing;

pub use automaton::{RunWitness, StateId, Transition, VsetAutomaton};
pub use error::{Error, Result};
pub use matrix::{CountMatrix, MulCounter};
pub use model::{compare, compose, respects, Mapping, Order, PositionSet, RuleSet, Var, VarMask, VariableSet};
pub use nat::Nat;
