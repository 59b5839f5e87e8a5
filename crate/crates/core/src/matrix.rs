//! Square matrices of unbounded naturals indexed by automaton states.
//!
//! Entry `(p, q)` of the matrix for a substring counts the partial runs that
//! read the substring from `p` to `q` under some variable restriction. Counts
//! for adjacent substrings compose by ordinary matrix product.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::nat::{Nat, SumOfProducts};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CountMatrix {
    dim: usize,
    entries: Vec<Nat>,
}

impl CountMatrix {
    pub fn zero(dim: usize) -> Self {
        CountMatrix {
            dim,
            entries: vec![Nat::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CountMatrix::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Nat::ONE;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows<T: Into<Nat> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::domain("matrix rows must form a square"));
            }
            entries.extend(row.iter().cloned().map(Into::into));
        }
        Ok(CountMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, q: usize) -> &Nat {
        &self.entries[p * self.dim + q]
    }

    pub fn set(&mut self, p: usize, q: usize, value: Nat) {
        self.entries[p * self.dim + q] = value;
    }

    pub fn increment(&mut self, p: usize, q: usize) {
        let e = &mut self.entries[p * self.dim + q];
        *e = &*e + 1;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Nat]> {
        self.entries.chunks(self.dim.max(1))
    }

    /// Standard product over `(ℕ, +, ×)`.
    pub fn multiply(&self, other: &CountMatrix) -> Result<CountMatrix> {
        if self.dim != other.dim {
            return Err(Error::domain(format!(
                "cannot multiply {0}x{0} by {1}x{1} matrices",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            for j in 0..n {
                let mut acc = SumOfProducts::default();
                for (k, a) in row.iter().enumerate() {
                    acc.add_product(a, &other.entries[k * n + j]);
                }
                entries.push(acc.finish());
            }
        }
        Ok(CountMatrix { dim: n, entries })
    }

    /// `Σ_{p ∈ from, q ∈ to} M(p, q)`.
    pub fn answer_count(&self, from: &[usize], to: &[usize]) -> Nat {
        let mut acc = SumOfProducts::default();
        for &p in from {
            for &q in to {
                acc.add(self.get(p, q));
            }
        }
        acc.finish()
    }

    /// Entrywise `self ≤ other`.
    pub fn le(&self, other: &CountMatrix) -> bool {
        self.dim == other.dim && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }
}

impl fmt::Debug for CountMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl fmt::Display for CountMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Counts matrix multiplications performed on behalf of an index.
///
/// Atomic only so that indexes stay `Sync`; all updates happen under `&mut`
/// or single-threaded access anyway.
#[derive(Debug, Default)]
pub struct MulCounter(AtomicU64);

impl MulCounter {
    pub fn multiply(&self, a: &CountMatrix, b: &CountMatrix) -> CountMatrix {
        self.0.fetch_add(1, Ordering::Relaxed);
        a.multiply(b).expect("index matrices share one dimension")
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

impl Clone for MulCounter {
    fn clone(&self) -> Self {
        MulCounter(AtomicU64::new(self.get()))
    }
}
