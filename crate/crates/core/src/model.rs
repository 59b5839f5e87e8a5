//! Variables, mappings, their lexicographic order, and mapping-rule sets.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::nat::Nat;

/// Index of a variable inside its [`VariableSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

/// Maximum number of variables; subsets are stored as 64-bit masks.
pub const MAX_VARS: usize = 64;

/// A subset of the variables of a [`VariableSet`], as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarMask(pub u64);

impl VarMask {
    pub const EMPTY: VarMask = VarMask(0);

    pub fn full(k: usize) -> VarMask {
        if k >= 64 {
            VarMask(u64::MAX)
        } else {
            VarMask((1u64 << k) - 1)
        }
    }

    pub fn single(v: Var) -> VarMask {
        VarMask(1u64 << v.0)
    }

    pub fn of(vars: impl IntoIterator<Item = Var>) -> VarMask {
        vars.into_iter()
            .fold(VarMask::EMPTY, |m, v| m.with(v))
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1u64 << v.0) != 0
    }

    pub fn with(self, v: Var) -> VarMask {
        VarMask(self.0 | (1u64 << v.0))
    }

    pub fn union(self, other: VarMask) -> VarMask {
        VarMask(self.0 | other.0)
    }

    pub fn intersects(self, other: VarMask) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: VarMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        (0..64).filter(move |i| self.0 & (1u64 << i) != 0).map(Var)
    }
}

/// An ordered set of distinct variable names `x1..xk`.
///
/// The stored sequence is the default variable order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariableSet {
    names: Vec<String>,
    by_name: HashMap<String, Var>,
}

impl VariableSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut set = VariableSet::default();
        for name in names {
            let name = name.into();
            if set.by_name.contains_key(&name) {
                return Err(Error::domain(format!("duplicate variable `{name}`")));
            }
            if set.names.len() == MAX_VARS {
                return Err(Error::domain(format!("at most {MAX_VARS} variables are supported")));
            }
            set.by_name.insert(name.clone(), Var(set.names.len()));
            set.names.push(name);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.names.len()).map(Var)
    }

    pub fn all(&self) -> VarMask {
        VarMask::full(self.len())
    }

    /// The default order `x1 ≺ … ≺ xk`.
    pub fn default_order(&self) -> Order {
        Order(self.vars().collect())
    }

    /// Parses an order given as variable names, e.g. `["x2", "x1"]`.
    pub fn order_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Order> {
        let vars = names
            .iter()
            .map(|n| {
                self.lookup(n.as_ref())
                    .ok_or_else(|| Error::domain(format!("unknown variable `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Order::new(vars, self.len())
    }

    pub fn display_mask(&self, mask: VarMask) -> String {
        let names: Vec<&str> = mask.iter().map(|v| self.name(v)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// A permutation of the variables, `y1 ≺ … ≺ yk`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Order(Vec<Var>);

impl Order {
    pub fn new(vars: Vec<Var>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        if vars.len() != k {
            return Err(Error::domain(format!(
                "an order must list all {k} variables, got {}",
                vars.len()
            )));
        }
        for v in &vars {
            if v.0 >= k || std::mem::replace(&mut seen[v.0], true) {
                return Err(Error::domain("an order must be a permutation of the variables"));
            }
        }
        Ok(Order(vars))
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Variables ranked strictly after position `i` (0-based), i.e. `{y_{i+1}, …, y_k}`.
    pub fn suffix_mask(&self, i: usize) -> VarMask {
        VarMask::of(self.0[i..].iter().copied())
    }
}

/// A total assignment of variables to 1-based string positions.
///
/// Positions are indexed by [`Var`], i.e. in the variable set's default order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping(Vec<Nat>);

impl Mapping {
    pub fn new(positions: Vec<Nat>) -> Result<Self> {
        if positions.iter().any(Nat::is_zero) {
            return Err(Error::domain("mapping positions are 1-based"));
        }
        Ok(Mapping(positions))
    }

    pub fn from_u64(positions: &[u64]) -> Result<Self> {
        Mapping::new(positions.iter().map(|&p| Nat::from(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: Var) -> &Nat {
        &self.0[v.0]
    }

    pub fn positions(&self) -> &[Nat] {
        &self.0
    }

    /// Renders as `x1=3 x2=6`.
    pub fn display<'a>(&'a self, vars: &'a VariableSet) -> impl fmt::Display + 'a {
        MappingDisplay { mapping: self, vars }
    }
}

struct MappingDisplay<'a> {
    mapping: &'a Mapping,
    vars: &'a VariableSet,
}

impl fmt::Display for MappingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pos) in self.mapping.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}={}", self.vars.name(Var(i)), pos)?;
        }
        Ok(())
    }
}

/// Lexicographic comparison of two mappings, scanning variables in `order`.
pub fn compare(a: &Mapping, b: &Mapping, order: &Order) -> Result<Ordering> {
    if a.len() != b.len() || a.len() != order.len() {
        return Err(Error::domain(format!(
            "cannot compare mappings over {} and {} variables under an order of {}",
            a.len(),
            b.len(),
            order.len()
        )));
    }
    Ok(order
        .vars()
        .iter()
        .map(|&v| a.get(v).cmp(b.get(v)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal))
}

/// The set of positions a rule allows for one variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PositionSet {
    Empty,
    Singleton(Nat),
    /// Inclusive range `[l, r]` with `l ≤ r`.
    Range(Nat, Nat),
    /// Every position.
    Full,
}

impl PositionSet {
    pub fn range(l: Nat, r: Nat) -> Result<Self> {
        match l.cmp(&r) {
            Ordering::Less => Ok(PositionSet::Range(l, r)),
            Ordering::Equal => Ok(PositionSet::Singleton(l)),
            Ordering::Greater => Err(Error::domain(format!("empty range [{l},{r}]"))),
        }
    }

    pub fn contains(&self, p: &Nat) -> bool {
        match self {
            PositionSet::Empty => false,
            PositionSet::Singleton(s) => s == p,
            PositionSet::Range(l, r) => l <= p && p <= r,
            PositionSet::Full => true,
        }
    }

    fn bounds(&self) -> Option<(&Nat, &Nat)> {
        match self {
            PositionSet::Singleton(s) => Some((s, s)),
            PositionSet::Range(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Exact union, when it is again representable.
    pub fn union(&self, other: &PositionSet) -> Result<PositionSet> {
        use PositionSet::*;
        match (self, other) {
            (Empty, x) | (x, Empty) => Ok(x.clone()),
            (Full, _) | (_, Full) => Ok(Full),
            _ => {
                let (l1, r1) = self.bounds().expect("bounded");
                let (l2, r2) = other.bounds().expect("bounded");
                let (first, second) = if l1 <= l2 { ((l1, r1), (l2, r2)) } else { ((l2, r2), (l1, r1)) };
                // Mergeable when the second interval starts at most one past the first.
                if second.0 <= &(first.1 + 1) {
                    let hi = std::cmp::max(first.1, second.1).clone();
                    PositionSet::range(first.0.clone(), hi)
                } else {
                    Err(Error::domain(format!(
                        "union of {self} and {other} is not a single range"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionSet::Empty => f.write_str("∅"),
            PositionSet::Singleton(s) => write!(f, "{{{s}}}"),
            PositionSet::Range(l, r) => write!(f, "[{l},{r}]"),
            PositionSet::Full => f.write_str("*"),
        }
    }
}

/// A set of mapping rules `x ↦ α`, at most one per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleSet(Vec<Option<PositionSet>>);

impl RuleSet {
    /// No rules over `k` variables.
    pub fn unrestricted(k: usize) -> Self {
        RuleSet(vec![None; k])
    }

    pub fn from_rules(k: usize, rules: impl IntoIterator<Item = (Var, PositionSet)>) -> Result<Self> {
        let mut set = RuleSet::unrestricted(k);
        for (v, alpha) in rules {
            if v.0 >= k {
                return Err(Error::domain(format!("variable index {} out of range", v.0)));
            }
            if set.0[v.0].replace(alpha).is_some() {
                return Err(Error::domain(format!("two rules for variable index {}", v.0)));
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rule(&self, v: Var) -> Option<&PositionSet> {
        self.0[v.0].as_ref()
    }

    pub fn set(&mut self, v: Var, alpha: PositionSet) {
        self.0[v.0] = Some(alpha);
    }

    /// A rule set is functional when it mentions every variable.
    pub fn is_functional(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    /// Whether position `p` is allowed for `v` (variables without a rule are free).
    pub fn allows(&self, v: Var, p: &Nat) -> bool {
        self.0[v.0].as_ref().is_none_or(|alpha| alpha.contains(p))
    }
}

/// Per-variable union `τL·τR` of two functional rule sets.
///
/// Callers pair a set inside `[l,m]` with one inside `[m+1,r]`; the result is
/// then inside `[l,r]`.
pub fn compose(left: &RuleSet, right: &RuleSet) -> Result<RuleSet> {
    if left.len() != right.len() {
        return Err(Error::domain("rule sets over different variable sets"));
    }
    if !left.is_functional() || !right.is_functional() {
        return Err(Error::domain("composition requires functional rule sets"));
    }
    left.0
        .iter()
        .zip(&right.0)
        .map(|(a, b)| {
            let (a, b) = (a.as_ref().expect("functional"), b.as_ref().expect("functional"));
            a.union(b).map(Some)
        })
        .collect::<Result<Vec<_>>>()
        .map(RuleSet)
}

/// Whether `mapping(x) ∈ α` for every rule `x ↦ α`.
pub fn respects(mapping: &Mapping, rules: &RuleSet) -> bool {
    mapping.len() == rules.len()
        && (0..rules.len()).all(|i| rules.allows(Var(i), mapping.get(Var(i))))
}
