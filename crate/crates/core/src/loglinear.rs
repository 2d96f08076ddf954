//! Hierarchical Poisson log-linear models fitted by iterative proportional
//! fitting (IPF).
//!
//! A model is given by its generating classes: the maximal interaction terms,
//! each a set of table dimensions. The model contains every main effect and
//! interaction that is a subset of some class. The conditional independence
//! model for a table laid out as `(x, y, z_1, .., z_k)` has the two classes
//! `{x, z_1..z_k}` and `{y, z_1..z_k}`; it contains every interaction except
//! those involving both `x` and `y`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::{ContingencyTable, Error, Result, DENSE_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogLinearModel {
    classes: Vec<Vec<usize>>,
}

impl LogLinearModel {
    /// Validates and normalizes (sorts) the generating classes.
    ///
    /// Classes must be non-redundant: none may be a subset of another.
    pub fn new(classes: Vec<Vec<usize>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidModel { reason: "no generating classes" });
        }
        let mut sorted = Vec::with_capacity(classes.len());
        for mut class in classes {
            class.sort_unstable();
            if class.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidModel { reason: "repeated variable in a class" });
            }
            if class.last().is_some_and(|&v| v >= 64) {
                return Err(Error::InvalidModel { reason: "variable index above 63" });
            }
            sorted.push(class);
        }
        for (i, a) in sorted.iter().enumerate() {
            for (j, b) in sorted.iter().enumerate() {
                if i != j && a.iter().all(|v| b.contains(v)) {
                    return Err(Error::InvalidModel { reason: "class contained in another class" });
                }
            }
        }
        Ok(Self { classes: sorted })
    }

    /// The saturated model over `n_dims` variables.
    pub fn saturated(n_dims: usize) -> Self {
        Self { classes: vec![(0..n_dims).collect()] }
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.classes.iter().flatten().any(|&v| v >= dims.len()) {
            return Err(Error::InvalidModel { reason: "class refers to a missing dimension" });
        }
        Ok(())
    }
}

/// Conditional independence model of the first two dimensions given the next `k`.
pub fn ci_model(k: usize) -> LogLinearModel {
    let zs = 2..k + 2;
    LogLinearModel {
        classes: vec![core::iter::once(0).chain(zs.clone()).collect(), core::iter::once(1).chain(zs).collect()],
    }
}

/// Residual degrees of freedom: cells minus free parameters, where every
/// distinct subset `S` of a generating class contributes `∏_{i∈S} (d_i − 1)`.
pub fn model_dof(dims: &[usize], model: &LogLinearModel) -> Result<u64> {
    model.check_dims(dims)?;
    let mut terms: BTreeSet<u64> = BTreeSet::new();
    for class in &model.classes {
        let m = class.len();
        for subset in 0u64..(1u64 << m) {
            let mask = (0..m).filter(|&b| subset >> b & 1 == 1).fold(0u64, |acc, b| acc | 1 << class[b]);
            terms.insert(mask);
        }
    }
    let params = terms.iter().fold(0u64, |acc, &mask| {
        let term = (0..dims.len())
            .filter(|&v| mask >> v & 1 == 1)
            .fold(1u64, |p, v| p.saturating_mul(dims[v].saturating_sub(1) as u64));
        acc.saturating_add(term)
    });
    let cells = dims.iter().fold(1u64, |acc, &d| acc.saturating_mul(d as u64));
    Ok(cells.saturating_sub(params))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpfOptions {
    /// Convergence threshold on the largest absolute margin discrepancy.
    pub tol: f64,
    /// Maximum number of full cycles over the generating classes.
    pub max_iter: usize,
}

impl Default for IpfOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub dims: Vec<usize>,
    /// Fitted means in the table's linear cell order.
    pub fitted: Vec<f64>,
    /// `2 Σ_{N>0} N ln(N / fitted)`.
    pub deviance: f64,
    /// `Σ_{fitted>0} (N − fitted)² / fitted`.
    pub pearson: f64,
    /// Completed IPF cycles.
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute difference between fitted and observed class margins.
    pub max_discrepancy: f64,
    pub model_dof: u64,
}

/// Maps each cell to its cell in the margin over one generating class.
struct Margin {
    index: Vec<u32>,
    observed: Vec<f64>,
    fitted: Vec<f64>,
}

impl Margin {
    fn new(dims: &[usize], class: &[usize], observed: &[f64]) -> Self {
        let mut mstride = vec![0usize; dims.len()];
        let mut size = 1usize;
        for &v in class {
            mstride[v] = size;
            size *= dims[v];
        }
        let n_cells = observed.len();
        let mut index = Vec::with_capacity(n_cells);
        let mut digits = vec![0usize; dims.len()];
        let mut m = 0usize;
        for _ in 0..n_cells {
            index.push(m as u32);
            for ax in 0..dims.len() {
                digits[ax] += 1;
                m += mstride[ax];
                if digits[ax] < dims[ax] {
                    break;
                }
                m -= mstride[ax] * dims[ax];
                digits[ax] = 0;
            }
        }
        let mut margin = Self { index, observed: vec![0.0; size], fitted: vec![0.0; size] };
        margin.observed = margin.sum(observed);
        margin
    }

    fn sum(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.observed.len()];
        for (&m, &v) in self.index.iter().zip(values) {
            out[m as usize] += v;
        }
        out
    }

    fn discrepancy(&mut self, fitted: &[f64]) -> f64 {
        self.fitted = self.sum(fitted);
        self.fitted.iter().zip(&self.observed).fold(0.0, |acc: f64, (f, o)| acc.max((f - o).abs()))
    }

    fn rescale(&mut self, fitted: &mut [f64]) {
        self.fitted = self.sum(fitted);
        let ratio: Vec<f64> =
            self.observed.iter().zip(&self.fitted).map(|(&o, &f)| if f > 0.0 { o / f } else { 0.0 }).collect();
        for (&m, v) in self.index.iter().zip(fitted.iter_mut()) {
            *v *= ratio[m as usize];
        }
    }
}

/// Fits `model` to `table` by IPF starting from all-ones means.
///
/// Returns a result with `converged == false` when `max_iter` cycles do not
/// reach `tol`. Tables above [`DENSE_THRESHOLD`] cells are rejected.
pub fn ipf_fit(table: &ContingencyTable, model: &LogLinearModel, options: IpfOptions) -> Result<FitResult> {
    let dims = table.dims();
    model.check_dims(dims)?;
    if table.total() == 0 {
        return Err(Error::EmptyTable);
    }
    if table.n_cells() > DENSE_THRESHOLD {
        return Err(Error::TableTooLarge { cells: Some(table.n_cells()), limit: DENSE_THRESHOLD });
    }
    let observed: Vec<f64> = table.to_dense_counts().into_iter().map(|c| c as f64).collect();
    let mut margins: Vec<Margin> = model.classes.iter().map(|c| Margin::new(dims, c, &observed)).collect();

    // Cells lying in a zero observed margin of any class stay at zero.
    let mut fitted = vec![1.0; observed.len()];
    for margin in &margins {
        for (&m, v) in margin.index.iter().zip(fitted.iter_mut()) {
            if margin.observed[m as usize] == 0.0 {
                *v = 0.0;
            }
        }
    }

    let mut iterations = 0;
    let mut discrepancy = f64::INFINITY;
    while iterations < options.max_iter {
        for margin in margins.iter_mut() {
            margin.rescale(&mut fitted);
        }
        iterations += 1;
        discrepancy = margins.iter_mut().fold(0.0, |acc, m| acc.max(m.discrepancy(&fitted)));
        if discrepancy < options.tol {
            break;
        }
    }

    let mut deviance = 0.0;
    let mut pearson = 0.0;
    for (&n, &f) in observed.iter().zip(&fitted) {
        if n > 0.0 {
            deviance += n * libm::log(n / f);
        }
        if f > 0.0 {
            pearson += (n - f) * (n - f) / f;
        }
    }

    Ok(FitResult {
        dims: dims.to_vec(),
        fitted,
        deviance: (2.0 * deviance).max(0.0),
        pearson,
        iterations,
        converged: discrepancy < options.tol,
        max_discrepancy: discrepancy,
        model_dof: model_dof(dims, model)?,
    })
}
