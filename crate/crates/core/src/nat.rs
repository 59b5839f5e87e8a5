//! Unbounded natural numbers with an inline fast path.
//!
//! Counts, positions and string lengths can all exceed machine words once a
//! string is given as a straight-line program, yet almost every value seen in
//! practice is small. [`Nat`] keeps values up to `u64::MAX` inline and only
//! spills to a heap-allocated [`BigUint`] above that.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// A non-negative integer of unbounded size.
///
/// The representation is canonical: a value that fits in a `u64` is always
/// stored inline, so derived equality and hashing agree with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nat(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(u64),
    Big(BigUint),
}

impl Nat {
    pub const ZERO: Nat = Nat(Repr::Small(0));
    pub const ONE: Nat = Nat(Repr::Small(1));

    fn from_big(value: BigUint) -> Nat {
        match value.to_u64() {
            Some(v) => Nat(Repr::Small(v)),
            None => Nat(Repr::Big(value)),
        }
    }

    fn from_u128(value: u128) -> Nat {
        match u64::try_from(value) {
            Ok(v) => Nat(Repr::Small(v)),
            Err(_) => Nat(Repr::Big(BigUint::from(value))),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    /// `self - rhs`, or `None` when the result would be negative.
    pub fn checked_sub(&self, rhs: &Nat) -> Option<Nat> {
        match (&self.0, &rhs.0) {
            (Repr::Small(a), Repr::Small(b)) => a.checked_sub(*b).map(Nat::from),
            _ => {
                if self < rhs {
                    None
                } else {
                    Some(Nat::from_big(self.to_biguint() - rhs.to_biguint()))
                }
            }
        }
    }

    /// Number of bits needed to write the value (0 for zero).
    pub fn bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(v) => 64 - u64::from(v.leading_zeros()),
            Repr::Big(b) => b.bits(),
        }
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat(Repr::Small(v))
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat(Repr::Small(u64::from(v)))
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat::from_u128(v as u128)
    }
}

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat::from_big(v)
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(_)) => Ordering::Less,
            (Repr::Big(_), Repr::Small(_)) => Ordering::Greater,
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq<u64> for Nat {
    fn eq(&self, other: &u64) -> bool {
        matches!(self.0, Repr::Small(v) if v == *other)
    }
}

impl PartialOrd<u64> for Nat {
    fn partial_cmp(&self, other: &u64) -> Option<std::cmp::Ordering> {
        Some(match self.0 {
            Repr::Small(v) => v.cmp(other),
            Repr::Big(_) => std::cmp::Ordering::Greater,
        })
    }
}

impl Add<&Nat> for &Nat {
    type Output = Nat;
    fn add(self, rhs: &Nat) -> Nat {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            return Nat::from_u128(u128::from(*a) + u128::from(*b));
        }
        Nat::from_big(self.to_biguint() + rhs.to_biguint())
    }
}

impl Add for Nat {
    type Output = Nat;
    fn add(self, rhs: Nat) -> Nat {
        &self + &rhs
    }
}

impl Add<u64> for &Nat {
    type Output = Nat;
    fn add(self, rhs: u64) -> Nat {
        self + &Nat::from(rhs)
    }
}

impl AddAssign<&Nat> for Nat {
    fn add_assign(&mut self, rhs: &Nat) {
        *self = &*self + rhs;
    }
}

impl Sub<&Nat> for &Nat {
    type Output = Nat;
    /// Panics on underflow; use [`Nat::checked_sub`] when that is possible.
    fn sub(self, rhs: &Nat) -> Nat {
        self.checked_sub(rhs).expect("Nat subtraction underflow")
    }
}

impl Sub<u64> for &Nat {
    type Output = Nat;
    fn sub(self, rhs: u64) -> Nat {
        self - &Nat::from(rhs)
    }
}

impl Mul<&Nat> for &Nat {
    type Output = Nat;
    fn mul(self, rhs: &Nat) -> Nat {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            return Nat::from_u128(u128::from(*a) * u128::from(*b));
        }
        Nat::from_big(self.to_biguint() * rhs.to_biguint())
    }
}

impl std::iter::Sum for Nat {
    fn sum<I: Iterator<Item = Nat>>(iter: I) -> Nat {
        let mut acc = SumOfProducts::default();
        for v in iter {
            acc.add(&v);
        }
        acc.finish()
    }
}

impl<'a> std::iter::Sum<&'a Nat> for Nat {
    fn sum<I: Iterator<Item = &'a Nat>>(iter: I) -> Nat {
        let mut acc = SumOfProducts::default();
        for v in iter {
            acc.add(v);
        }
        acc.finish()
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => fmt::Display::fmt(v, f),
            Repr::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNatError;

impl fmt::Display for ParseNatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("not a decimal natural number")
    }
}

impl std::error::Error for ParseNatError {}

impl FromStr for Nat {
    type Err = ParseNatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError);
        }
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Nat::from(v));
        }
        BigUint::from_str(s).map(Nat::from_big).map_err(|_| ParseNatError)
    }
}

/// Accumulates `Σ aᵢ·bᵢ` in a `u128` until it overflows, then in a `BigUint`.
///
/// This is the inner loop of every matrix product, so the common all-small
/// case never allocates.
#[derive(Default)]
pub(crate) struct SumOfProducts {
    small: u128,
    big: Option<BigUint>,
}

impl SumOfProducts {
    pub(crate) fn add_product(&mut self, a: &Nat, b: &Nat) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        if let (Repr::Small(x), Repr::Small(y)) = (&a.0, &b.0) {
            let p = u128::from(*x) * u128::from(*y);
            match self.small.checked_add(p) {
                Some(s) => self.small = s,
                None => self.spill(BigUint::from(p)),
            }
        } else {
            self.spill(a.to_biguint() * b.to_biguint());
        }
    }

    pub(crate) fn add(&mut self, a: &Nat) {
        self.add_product(a, &Nat::ONE);
    }

    fn spill(&mut self, v: BigUint) {
        let big = self.big.get_or_insert_with(BigUint::zero);
        *big += v;
    }

    pub(crate) fn finish(self) -> Nat {
        match self.big {
            None => Nat::from_u128(self.small),
            Some(b) => Nat::from_big(b + BigUint::from(self.small)),
        }
    }
}
