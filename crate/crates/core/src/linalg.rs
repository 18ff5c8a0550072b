//! Exact linear algebra for cube differentials: sparse integer matrices reduced
//! over a prime field or over Q.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::field::{inv_mod, reduce, Field};

/// Below this many columns, ranks mod p are computed densely.
pub const DENSE_COLUMN_LIMIT: usize = 512;

/// Column-major sparse matrix with small signed integer entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `columns[c]` holds `(row, value)` pairs with distinct rows and nonzero values.
    pub columns: Vec<Vec<(u32, i64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn push(&mut self, row: usize, col: usize, value: i64) {
        debug_assert!(row < self.rows && col < self.cols);
        let column = &mut self.columns[col];
        match column.iter_mut().find(|(r, _)| *r as usize == row) {
            Some(entry) => entry.1 += value,
            None => column.push((row as u32, value)),
        }
        column.retain(|&(_, v)| v != 0);
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.columns[col]
            .iter()
            .find(|(r, _)| *r as usize == row)
            .map_or(0, |&(_, v)| v)
    }

    pub fn to_dense_mod(&self, p: u64) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols, p);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                let x = d.get(r as usize, c);
                d.set(r as usize, c, (x + reduce(v, p)) % p);
            }
        }
        d
    }

    /// `self * other` over the integers.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = SparseMatrix::zeros(self.rows, other.cols);
        for (c, col) in other.columns.iter().enumerate() {
            let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
            for &(k, v) in col {
                for &(r, w) in &self.columns[k as usize] {
                    *acc.entry(r).or_default() += v * w;
                }
            }
            out.columns[c] = acc.into_iter().filter(|&(_, v)| v != 0).collect();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn is_zero_mod(&self, p: u64) -> bool {
        self.columns.iter().all(|c| c.iter().all(|&(_, v)| reduce(v, p) == 0))
    }

    pub fn rank(&self, field: Field) -> usize {
        match field {
            Field::Prime(p) => rank_mod_p(self, p),
            Field::Rational => rank_rational(self),
        }
    }
}

pub fn rank_mod_p(m: &SparseMatrix, p: u64) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    if m.cols < DENSE_COLUMN_LIMIT {
        return m.to_dense_mod(p).rank();
    }
    sparse_rank_mod_p(m, p)
}

/// Column-by-column elimination; each new pivot is taken in the lightest row of
/// the reduced column, which keeps fill low on cube differentials.
pub fn sparse_rank_mod_p(m: &SparseMatrix, p: u64) -> usize {
    let mut row_weight = vec![0u32; m.rows];
    for col in &m.columns {
        for &(r, _) in col {
            row_weight[r as usize] += 1;
        }
    }
    let mut pivot_of_row: Vec<u32> = vec![u32::MAX; m.rows];
    let mut pivots: Vec<(u32, Vec<(u32, u64)>)> = Vec::new();
    let mut work = vec![0u64; m.rows];
    let mut touched: Vec<u32> = Vec::new();
    let mut seen = vec![false; m.rows];
    let mut heap: BinaryHeap<Reverse<u32>> = BinaryHeap::new();

    for col in &m.columns {
        for &(r, v) in col {
            let x = reduce(v, p);
            if x == 0 {
                continue;
            }
            let r = r as usize;
            if !seen[r] {
                seen[r] = true;
                touched.push(r as u32);
            }
            work[r] = (work[r] + x) % p;
            if pivot_of_row[r] != u32::MAX {
                heap.push(Reverse(pivot_of_row[r]));
            }
        }
        while let Some(Reverse(k)) = heap.pop() {
            let (prow, ref entries) = pivots[k as usize];
            let a = work[prow as usize];
            if a == 0 {
                continue;
            }
            for &(r, v) in entries {
                let r = r as usize;
                if !seen[r] {
                    seen[r] = true;
                    touched.push(r as u32);
                }
                let before = work[r];
                work[r] = (before + p - a * v % p) % p;
                if before == 0 && work[r] != 0 && pivot_of_row[r] != u32::MAX {
                    heap.push(Reverse(pivot_of_row[r]));
                }
            }
        }
        let mut best: Option<u32> = None;
        for &r in &touched {
            if work[r as usize] != 0 {
                let better = match best {
                    None => true,
                    Some(b) => (row_weight[r as usize], r) < (row_weight[b as usize], b),
                };
                if better {
                    best = Some(r);
                }
            }
        }
        if let Some(prow) = best {
            let inv = inv_mod(work[prow as usize], p);
            let entries: Vec<(u32, u64)> = touched
                .iter()
                .filter(|&&r| work[r as usize] != 0)
                .map(|&r| (r, work[r as usize] * inv % p))
                .collect();
            pivot_of_row[prow as usize] = pivots.len() as u32;
            pivots.push((prow, entries));
        }
        for &r in &touched {
            work[r as usize] = 0;
            seen[r as usize] = false;
        }
        touched.clear();
    }
    pivots.len()
}

/// Fraction-free sparse elimination over Z, which gives the rank over Q.
pub fn rank_rational(m: &SparseMatrix) -> usize {
    let mut pivot_of_row: BTreeMap<u32, usize> = BTreeMap::new();
    let mut pivots: Vec<(u32, BTreeMap<u32, BigInt>)> = Vec::new();
    for col in &m.columns {
        let mut work: BTreeMap<u32, BigInt> = col
            .iter()
            .filter(|&&(_, v)| v != 0)
            .map(|&(r, v)| (r, BigInt::from(v)))
            .collect();
        loop {
            // eliminate the earliest pivot present; later pivots never reintroduce it
            let next = work
                .keys()
                .filter_map(|r| pivot_of_row.get(r).copied())
                .min();
            let Some(k) = next else { break };
            let (prow, ref pcol) = pivots[k];
            let a = work[&prow].clone();
            let b = pcol[&prow].clone();
            for v in work.values_mut() {
                *v *= &b;
            }
            for (r, v) in pcol {
                let e = work.entry(*r).or_insert_with(BigInt::zero);
                *e -= &a * v;
            }
            work.retain(|_, v| !v.is_zero());
            let g = work.values().fold(BigInt::zero(), |g, v| g.gcd(v));
            if !g.is_zero() && !g.is_one() {
                for v in work.values_mut() {
                    *v /= &g;
                }
            }
        }
        if let Some((&prow, _)) = work.iter().min_by_key(|(r, v)| (v.abs(), **r)) {
            pivot_of_row.insert(prow, pivots.len());
            pivots.push((prow, work));
        }
    }
    pivots.len()
}

/// Dense matrix over `F_p`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub p: u64,
    pub data: Vec<u64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Self {
        DenseMatrix { rows, cols, p, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = DenseMatrix::zeros(n, n, p);
        for i in 0..n {
            m.set(i, i, 1 % p);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let p = self.p;
        let mut out = DenseMatrix::zeros(self.rows, other.cols, p);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = (out.data[idx] + a * other.get(k, j)) % p;
                }
            }
        }
        out
    }

    pub fn add_scaled_identity(&self, s: u64) -> DenseMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = (m.get(i, i) + s) % self.p;
            m.set(i, i, v);
        }
        m
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&other.data) {
            *x = (*x + y) % self.p;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = inv_mod(self.get(r, c), p);
            for j in 0..self.cols {
                let v = self.get(r, j) * inv % p;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i == r || f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = (self.get(i, j) + p - f * self.get(r, j) % p) % p;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        if self.rows < self.cols {
            self.transpose().rref().len()
        } else {
            self.clone().rref().len()
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows, self.p);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Basis of `{x : self * x = 0}`, one vector per entry.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.cols];
            v[free] = 1 % p;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m.get(r, free)) % p;
            }
            basis.push(v);
        }
        basis
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * b) % p)
            })
            .collect()
    }
}

/// Incrementally built echelon basis over `F_p` whose vectors carry a tag
/// vector, so that reducing a vector also reports the tag combination used.
#[derive(Clone, Debug)]
pub struct TaggedEchelon {
    p: u64,
    tag_len: usize,
    vectors: Vec<(usize, Vec<u64>, Vec<u64>)>,
}

impl TaggedEchelon {
    pub fn new(p: u64, tag_len: usize) -> Self {
        TaggedEchelon { p, tag_len, vectors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Reduces `v` in place and returns the tag combination subtracted.
    pub fn reduce(&self, v: &mut [u64]) -> Vec<u64> {
        let p = self.p;
        let mut tag = vec![0u64; self.tag_len];
        for (pivot, vec, t) in &self.vectors {
            let a = v[*pivot];
            if a == 0 {
                continue;
            }
            for (x, y) in v.iter_mut().zip(vec) {
                *x = (*x + p - a * y % p) % p;
            }
            for (x, y) in tag.iter_mut().zip(t) {
                *x = (*x + a * y) % p;
            }
        }
        tag
    }

    /// Inserts `v` with tag `tag`; returns the reduced remainder if it was independent.
    pub fn insert(&mut self, mut v: Vec<u64>, tag: Vec<u64>) -> Option<Vec<u64>> {
        let p = self.p;
        let used = self.reduce(&mut v);
        let pivot = v.iter().position(|&x| x != 0)?;
        let remainder = v.clone();
        let inv = inv_mod(v[pivot], p);
        for x in v.iter_mut() {
            *x = *x * inv % p;
        }
        let mut t: Vec<u64> = tag
            .iter()
            .zip(&used)
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        for x in t.iter_mut() {
            *x = *x * inv % p;
        }
        self.vectors.push((pivot, v, t));
        Some(remainder)
    }
}
