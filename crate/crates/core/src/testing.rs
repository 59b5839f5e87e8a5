//! Shared fixtures for unit tests.

use crate::automaton::VsetAutomaton;

pub(crate) const RUNNING_EXAMPLE: &str = "\
alphabet: a b c
vars: x1 x2
states: q0 q1 q2
initial: q0
final: q2
q0 a {} q0
q0 b {} q0
q0 c {} q0
q0 a {x1} q1
q0 c {x1,x2} q2
q1 a {} q1
q1 b {} q1
q1 b {x2} q2
q2 a {} q2
q2 b {} q2
q2 c {} q2
";

pub(crate) const W0: &str = "abababcab";

pub(crate) fn running_example() -> VsetAutomaton {
    RUNNING_EXAMPLE.parse().expect("fixture parses")
}
