//! Single-pass tabulation, per-stratum marginals and expected frequencies.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::check_variables;
use crate::table::{cell_count, ContingencyTable, DENSE_THRESHOLD};
use crate::{Dataset, Error, Result};

/// Cross-tabulates `vars` (in that order) over every row of `data`.
///
/// An empty `vars` gives the scalar table holding `n_rows`.
pub fn build_table(data: &Dataset, vars: &[usize]) -> Result<ContingencyTable> {
    build_table_with_threshold(data, vars, DENSE_THRESHOLD)
}

/// As [`build_table`], storing the table sparsely when it has more than
/// `dense_threshold` cells.
pub fn build_table_with_threshold(data: &Dataset, vars: &[usize], dense_threshold: usize) -> Result<ContingencyTable> {
    check_variables(vars, data.n_cols())?;
    let columns: Vec<_> = vars.iter().map(|&v| &data.columns()[v]).collect();
    let dims: Vec<usize> = columns.iter().map(|c| c.levels()).collect();
    let n_cells = cell_count(&dims).ok_or(Error::TableTooLarge { cells: None, limit: usize::MAX })?;
    let n = data.n_rows();

    let mut strides = Vec::with_capacity(dims.len());
    let mut stride = 1usize;
    for &d in &dims {
        strides.push(stride);
        stride = stride.saturating_mul(d);
    }
    let codes: Vec<&[crate::Code]> = columns.iter().map(|c| c.codes()).collect();

    // Dense tables index through a u32 buffer.
    if n_cells <= dense_threshold && n_cells.saturating_sub(1) <= u32::MAX as usize {
        const BLOCK: usize = 1024;
        let strides: Vec<u32> = strides.iter().map(|&s| s as u32).collect();
        let mut counts = vec![0u64; n_cells];
        let mut buf = [0u32; BLOCK];
        for start in (0..n).step_by(BLOCK) {
            let out = &mut buf[..BLOCK.min(n - start)];
            out.fill(0);
            for (col, &s) in codes.iter().zip(&strides) {
                for (acc, &code) in out.iter_mut().zip(&col[start..]) {
                    *acc += code * s;
                }
            }
            for &i in out.iter() {
                counts[i as usize] += 1;
            }
        }
        Ok(ContingencyTable::from_dense_unchecked(dims, counts, n as u64))
    } else {
        let mut index = vec![0usize; n];
        for (col, &s) in codes.iter().zip(&strides) {
            for (acc, &code) in index.iter_mut().zip(col.iter()) {
                *acc += code as usize * s;
            }
        }
        index.sort_unstable();
        Ok(ContingencyTable::from_sorted_indices(dims, n_cells, &index))
    }
}

/// Marginal counts `N_{x+z}`, `N_{+yz}` and `N_{++z}` of every occupied
/// conditioning stratum `z` of a table laid out as `(x, y, z_1, .., z_k)`.
///
/// Strata with `N_{++z} = 0` are not stored; [`SliceMarginals::empty_strata`]
/// counts them.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMarginals {
    dims: Vec<usize>,
    n_strata: usize,
    total: u64,
    z: Vec<usize>,
    n_x: Vec<u64>,
    n_y: Vec<u64>,
    n: Vec<u64>,
}

/// Marginals of one stratum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceView<'a> {
    /// Stratum index (mixed-radix over `z_1..z_k`, `z_1` fastest).
    pub z: usize,
    pub n_x: &'a [u64],
    pub n_y: &'a [u64],
    pub n: u64,
}

impl SliceMarginals {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn levels_x(&self) -> usize {
        self.dims[0]
    }

    pub fn levels_y(&self) -> usize {
        self.dims[1]
    }

    /// Number of conditioning combinations, `∏ |Z_i|` (1 when unconditional).
    pub fn n_strata(&self) -> usize {
        self.n_strata
    }

    pub fn occupied_strata(&self) -> usize {
        self.z.len()
    }

    pub fn empty_strata(&self) -> usize {
        self.n_strata - self.z.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Occupied strata in increasing `z`.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = SliceView<'_>> + '_ {
        let (dx, dy) = (self.dims[0], self.dims[1]);
        (0..self.z.len()).map(move |s| SliceView {
            z: self.z[s],
            n_x: &self.n_x[s * dx..(s + 1) * dx],
            n_y: &self.n_y[s * dy..(s + 1) * dy],
            n: self.n[s],
        })
    }

    /// Marginals of stratum `z`, or `None` if it is empty or out of range.
    pub fn slice(&self, z: usize) -> Option<SliceView<'_>> {
        let s = self.z.binary_search(&z).ok()?;
        self.iter().nth(s)
    }
}

/// Per-stratum marginals of a table whose first two dimensions are `x` and `y`.
pub fn slice_marginals(table: &ContingencyTable) -> Result<SliceMarginals> {
    let dims = table.dims();
    if dims.len() < 2 {
        return Err(Error::TooFewDims { needed: 2, found: dims.len() });
    }
    let (dx, dy) = (dims[0], dims[1]);
    let block = dx * dy;
    let mut out = SliceMarginals {
        dims: dims.to_vec(),
        n_strata: dims[2..].iter().product(),
        total: table.total(),
        z: Vec::new(),
        n_x: Vec::new(),
        n_y: Vec::new(),
        n: Vec::new(),
    };
    if table.is_dense() {
        let counts = table.block(0, table.n_cells());
        for (z, cells) in counts.chunks_exact(block).enumerate() {
            let n: u64 = cells.iter().sum();
            if n == 0 {
                continue;
            }
            out.z.push(z);
            out.n.push(n);
            let start = out.n_x.len();
            out.n_x.resize(start + dx, 0);
            for row in cells.chunks_exact(dx) {
                for (acc, &c) in out.n_x[start..].iter_mut().zip(row) {
                    *acc += c;
                }
                out.n_y.push(row.iter().sum());
            }
        }
        return Ok(out);
    }
    for (idx, count) in table.occupied() {
        let z = idx / block;
        let within = idx % block;
        if out.z.last() != Some(&z) {
            out.z.push(z);
            out.n_x.resize(out.n_x.len() + dx, 0);
            out.n_y.resize(out.n_y.len() + dy, 0);
            out.n.push(0);
        }
        let s = out.z.len() - 1;
        out.n_x[s * dx + within % dx] += count;
        out.n_y[s * dy + within / dx] += count;
        out.n[s] += count;
    }
    Ok(out)
}

/// Dense array of expected frequencies, in the cell order of the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl Expected {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n = cell_count(&dims).ok_or(Error::TableTooLarge { cells: None, limit: usize::MAX })?;
        if n != values.len() {
            return Err(Error::ShapeMismatch { expected: n, found: values.len() });
        }
        Ok(Self { dims, values })
    }

    /// Expected counts equal to the observed counts of `table`.
    pub fn from_table(table: &ContingencyTable) -> Self {
        let values = table.to_dense_counts().into_iter().map(|c| c as f64).collect();
        Self { dims: table.dims().to_vec(), values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Expected frequencies under conditional independence,
/// `E[x,y,z] = N_{x+z} N_{+yz} / N_{++z}`, and 0 in empty strata.
///
/// Allocates the full table shape; fails with [`Error::TableTooLarge`] above
/// [`DENSE_THRESHOLD`] cells.
pub fn expected_ci(marginals: &SliceMarginals) -> Result<Expected> {
    let n_cells = cell_count(&marginals.dims).ok_or(Error::TableTooLarge { cells: None, limit: DENSE_THRESHOLD })?;
    if n_cells > DENSE_THRESHOLD {
        return Err(Error::TableTooLarge { cells: Some(n_cells), limit: DENSE_THRESHOLD });
    }
    let (dx, dy) = (marginals.levels_x(), marginals.levels_y());
    let mut values = vec![0.0; n_cells];
    for slice in marginals.iter() {
        let base = slice.z * dx * dy;
        let n = slice.n as f64;
        for (y, &ny) in slice.n_y.iter().enumerate() {
            for (x, &nx) in slice.n_x.iter().enumerate() {
                values[base + y * dx + x] = nx as f64 * ny as f64 / n;
            }
        }
    }
    Ok(Expected { dims: marginals.dims.clone(), values })
}
