//! Sparse matrices over Z[1/2].
//!
//! Storage is column-major: a matrix is the list of images of the source basis
//! vectors, which is the shape chain maps and differentials naturally come in.
//! Rows index the target, columns the source, so composition is `f.compose(&g)`
//! for "f after g".

use std::collections::BTreeMap;
use std::fmt;

use crate::ring::Dyadic;

pub type SparseVec = BTreeMap<usize, Dyadic>;

pub fn vec_add_scaled(dst: &mut SparseVec, src: &SparseVec, c: &Dyadic) {
    if c.is_zero() {
        return;
    }
    for (i, v) in src {
        let entry = dst.entry(*i).or_insert_with(Dyadic::zero);
        *entry += &(v * c);
        if entry.is_zero() {
            dst.remove(i);
        }
    }
}

pub fn vec_dot(a: &SparseVec, b: &SparseVec) -> Dyadic {
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = Dyadic::zero();
    for (i, v) in small {
        if let Some(w) = big.get(i) {
            acc += &(v * w);
        }
    }
    acc
}

#[derive(Clone, PartialEq, Eq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    by_col: Vec<SparseVec>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMat { rows, cols, by_col: vec![SparseVec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseMat::new(n, n);
        for i in 0..n {
            m.set(i, i, Dyadic::one());
        }
        m
    }

    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Dyadic)>,
    {
        let mut m = SparseMat::new(rows, cols);
        for (i, j, v) in entries {
            m.add_to(i, j, v);
        }
        m
    }

    pub fn from_int_entries<I>(rows: usize, cols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, i64)>,
    {
        Self::from_entries(rows, cols, entries.into_iter().map(|(i, j, v)| (i, j, Dyadic::from_int(v))))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Dyadic {
        self.by_col[j].get(&i).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Dyadic) {
        assert!(i < self.rows && j < self.cols);
        if v.is_zero() {
            self.by_col[j].remove(&i);
        } else {
            self.by_col[j].insert(i, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: Dyadic) {
        assert!(i < self.rows && j < self.cols);
        if v.is_zero() {
            return;
        }
        let entry = self.by_col[j].entry(i).or_insert_with(Dyadic::zero);
        *entry += &v;
        if entry.is_zero() {
            self.by_col[j].remove(&i);
        }
    }

    pub fn col(&self, j: usize) -> &SparseVec {
        &self.by_col[j]
    }

    pub fn set_col(&mut self, j: usize, v: SparseVec) {
        debug_assert!(v.keys().all(|&i| i < self.rows));
        debug_assert!(v.values().all(|x| !x.is_zero()));
        self.by_col[j] = v;
    }

    /// Entries in deterministic (column, row) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Dyadic)> {
        self.by_col
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.by_col.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.by_col.iter().all(|c| c.is_empty())
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, c) in v {
            vec_add_scaled(&mut out, &self.by_col[*j], c);
        }
        out
    }

    /// `self ∘ g`: first `g`, then `self`.
    pub fn compose(&self, g: &SparseMat) -> SparseMat {
        assert_eq!(self.cols, g.rows, "composition dimension mismatch");
        let mut out = SparseMat::new(self.rows, g.cols);
        for (j, gcol) in g.by_col.iter().enumerate() {
            out.by_col[j] = self.apply(gcol);
        }
        out
    }

    pub fn add(&self, other: &SparseMat) -> SparseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (i, j, v) in other.entries() {
            out.add_to(i, j, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &SparseMat) -> SparseMat {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparseMat {
        self.scale(&Dyadic::from_int(-1))
    }

    pub fn scale(&self, c: &Dyadic) -> SparseMat {
        if c.is_zero() {
            return SparseMat::new(self.rows, self.cols);
        }
        let mut out = SparseMat::new(self.rows, self.cols);
        for (i, j, v) in self.entries() {
            out.set(i, j, v * c);
        }
        out
    }

    pub fn transpose(&self) -> SparseMat {
        let mut out = SparseMat::new(self.cols, self.rows);
        for (i, j, v) in self.entries() {
            out.set(j, i, v.clone());
        }
        out
    }

    /// Restriction to subsets of rows and columns, given by old -> new index maps.
    pub fn submatrix(
        &self,
        new_rows: usize,
        new_cols: usize,
        row_map: &BTreeMap<usize, usize>,
        col_map: &BTreeMap<usize, usize>,
    ) -> SparseMat {
        let mut out = SparseMat::new(new_rows, new_cols);
        for (old_j, new_j) in col_map {
            for (old_i, v) in &self.by_col[*old_j] {
                if let Some(new_i) = row_map.get(old_i) {
                    out.set(*new_i, *new_j, v.clone());
                }
            }
        }
        out
    }

    /// Smallest power of two that clears every denominator.
    pub fn denominator_exp(&self) -> i64 {
        self.entries().map(|(_, _, v)| v.exp2()).max().unwrap_or(0).max(0)
    }
}

impl fmt::Debug for SparseMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SparseMat {}x{} [", self.rows, self.cols)?;
        for (i, j, v) in self.entries() {
            writeln!(f, "  ({}, {}) = {}", i, j, v)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_apply() {
        // f = [[1,2],[0,1]], g = [[1,0],[3,1]]
        let f = SparseMat::from_int_entries(2, 2, [(0, 0, 1), (0, 1, 2), (1, 1, 1)]);
        let g = SparseMat::from_int_entries(2, 2, [(0, 0, 1), (1, 0, 3), (1, 1, 1)]);
        let fg = f.compose(&g);
        assert_eq!(fg, SparseMat::from_int_entries(2, 2, [(0, 0, 7), (1, 0, 3), (0, 1, 2), (1, 1, 1)]));
        let v: SparseVec = [(0usize, Dyadic::from_int(1)), (1, Dyadic::from_int(-1))].into_iter().collect();
        let w = f.apply(&v);
        assert_eq!(w.get(&0), Some(&Dyadic::from_int(-1)));
        assert_eq!(w.get(&1), Some(&Dyadic::from_int(-1)));
    }

    #[test]
    fn cancellation_drops_entries() {
        let mut m = SparseMat::new(2, 2);
        m.add_to(0, 0, Dyadic::from_int(5));
        m.add_to(0, 0, Dyadic::from_int(-5));
        assert!(m.is_zero());
        assert_eq!(m.nnz(), 0);
    }
}
