//! Multi-way contingency tables with dense or sparse cell storage.
//!
//! Cells are addressed by a mixed-radix linear index with the first dimension
//! varying fastest, so for a table laid out as `(x, y, z_1, .., z_k)` every
//! conditioning combination `z` owns the contiguous block
//! `[z * dx * dy, (z + 1) * dx * dy)`.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Tables with at most this many cells are stored densely.
pub const DENSE_THRESHOLD: usize = 1 << 24;

#[derive(Debug, Clone)]
enum Cells {
    Dense(Vec<u64>),
    /// Sorted by index, counts strictly positive.
    Sparse(Vec<(usize, u64)>),
}

#[derive(Debug, Clone)]
pub struct ContingencyTable {
    dims: Vec<usize>,
    n_cells: usize,
    cells: Cells,
    total: u64,
}

/// Number of cells of a table with the given dimensions, if it fits in `usize`.
pub fn cell_count(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

impl ContingencyTable {
    /// Dense table from counts in linear (first-dimension-fastest) order.
    pub fn from_counts(dims: Vec<usize>, counts: Vec<u64>) -> Result<Self> {
        let n_cells = checked_cells(&dims)?;
        if counts.len() != n_cells {
            return Err(Error::ShapeMismatch { expected: n_cells, found: counts.len() });
        }
        let total = counts.iter().sum();
        Ok(Self { dims, n_cells, cells: Cells::Dense(counts), total })
    }

    /// Sparse table from `(linear index, count)` pairs. Pairs may come in any
    /// order and repeat; repeated indices are summed, zero counts dropped.
    pub fn from_entries(dims: Vec<usize>, mut entries: Vec<(usize, u64)>) -> Result<Self> {
        let n_cells = checked_cells(&dims)?;
        if let Some(&(idx, _)) = entries.iter().find(|(i, _)| *i >= n_cells) {
            return Err(Error::ShapeMismatch { expected: n_cells, found: idx + 1 });
        }
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(usize, u64)> = Vec::with_capacity(entries.len());
        for (idx, count) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 += count,
                _ => merged.push((idx, count)),
            }
        }
        merged.retain(|e| e.1 > 0);
        let total = merged.iter().map(|e| e.1).sum();
        Ok(Self { dims, n_cells, cells: Cells::Sparse(merged), total })
    }

    pub(crate) fn from_sorted_indices(dims: Vec<usize>, n_cells: usize, sorted: &[usize]) -> Self {
        let mut entries: Vec<(usize, u64)> = Vec::new();
        for &idx in sorted {
            match entries.last_mut() {
                Some(last) if last.0 == idx => last.1 += 1,
                _ => entries.push((idx, 1)),
            }
        }
        Self { dims, n_cells, cells: Cells::Sparse(entries), total: sorted.len() as u64 }
    }

    pub(crate) fn from_dense_unchecked(dims: Vec<usize>, counts: Vec<u64>, total: u64) -> Self {
        let n_cells = counts.len();
        Self { dims, n_cells, cells: Cells::Dense(counts), total }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.cells, Cells::Dense(_))
    }

    /// Number of cells with a positive count.
    pub fn occupied_cells(&self) -> usize {
        match &self.cells {
            Cells::Dense(c) => c.iter().filter(|&&n| n > 0).count(),
            Cells::Sparse(e) => e.len(),
        }
    }

    /// Linear index of a multi-index, or `None` if out of range.
    pub fn linear_index(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.dims.len() {
            return None;
        }
        let mut linear = 0;
        let mut stride = 1;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return None;
            }
            linear += i * stride;
            stride *= d;
        }
        Some(linear)
    }

    /// Multi-index of a linear index.
    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let i = linear % d;
                linear /= d;
                i
            })
            .collect()
    }

    /// Count at a multi-index; 0 when out of range.
    pub fn get(&self, index: &[usize]) -> u64 {
        self.linear_index(index).map_or(0, |i| self.get_linear(i))
    }

    pub fn get_linear(&self, linear: usize) -> u64 {
        match &self.cells {
            Cells::Dense(c) => c.get(linear).copied().unwrap_or(0),
            Cells::Sparse(e) => e.binary_search_by_key(&linear, |x| x.0).map_or(0, |pos| e[pos].1),
        }
    }

    /// Occupied cells as `(linear index, count)` in increasing index order.
    pub fn occupied(&self) -> Occupied<'_> {
        match &self.cells {
            Cells::Dense(c) => Occupied::Dense { counts: c, pos: 0 },
            Cells::Sparse(e) => Occupied::Sparse(e.iter()),
        }
    }

    /// Counts of the cells `[start, start + len)`, borrowed when the table is dense.
    pub fn block(&self, start: usize, len: usize) -> Cow<'_, [u64]> {
        match &self.cells {
            Cells::Dense(c) => Cow::Borrowed(&c[start..start + len]),
            Cells::Sparse(e) => {
                let mut out = vec![0; len];
                let lo = e.partition_point(|x| x.0 < start);
                for &(idx, count) in e[lo..].iter().take_while(|x| x.0 < start + len) {
                    out[idx - start] = count;
                }
                Cow::Owned(out)
            }
        }
    }

    /// All counts in linear order.
    pub fn to_dense_counts(&self) -> Vec<u64> {
        match &self.cells {
            Cells::Dense(c) => c.clone(),
            Cells::Sparse(e) => {
                let mut out = vec![0; self.n_cells];
                for &(idx, count) in e {
                    out[idx] = count;
                }
                out
            }
        }
    }

    pub fn to_sparse(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            n_cells: self.n_cells,
            cells: Cells::Sparse(self.occupied().collect()),
            total: self.total,
        }
    }

    pub fn to_dense(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            n_cells: self.n_cells,
            cells: Cells::Dense(self.to_dense_counts()),
            total: self.total,
        }
    }
}

/// Cell-by-cell equality, independent of storage.
impl PartialEq for ContingencyTable {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.total == other.total && self.occupied().eq(other.occupied())
    }
}

impl Eq for ContingencyTable {}

pub enum Occupied<'a> {
    Dense { counts: &'a [u64], pos: usize },
    Sparse(core::slice::Iter<'a, (usize, u64)>),
}

impl Iterator for Occupied<'_> {
    type Item = (usize, u64);

    fn next(&mut self) -> Option<(usize, u64)> {
        match self {
            Occupied::Dense { counts, pos } => {
                while *pos < counts.len() {
                    let i = *pos;
                    *pos += 1;
                    if counts[i] > 0 {
                        return Some((i, counts[i]));
                    }
                }
                None
            }
            Occupied::Sparse(it) => it.next().copied(),
        }
    }
}

fn checked_cells(dims: &[usize]) -> Result<usize> {
    cell_count(dims).ok_or(Error::TableTooLarge { cells: None, limit: usize::MAX })
}
