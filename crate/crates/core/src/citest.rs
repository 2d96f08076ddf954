//! G² and Pearson χ² tests of (conditional) independence.

use alloc::vec::Vec;

use crate::loglinear::{ci_model, ipf_fit, IpfOptions};
use crate::special::log_sf_chisq;
use crate::tabulate::{build_table, slice_marginals, Expected, SliceMarginals};
use crate::{validate_spec, ContingencyTable, Dataset, Error, Result, TestSpec};

/// How expected frequencies are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Per-stratum marginal products.
    #[default]
    ClosedForm,
    /// Iterative proportional fit of the log-linear model `{X,Z}, {Y,Z}`.
    Ipf,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Ipf => "ipf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TestOptions {
    pub method: Method,
    /// Use `dof_adjusted` (occupied strata only) for the p-values.
    pub adjust_dof: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub g2: f64,
    pub chi2: f64,
    /// `(|X|-1)(|Y|-1) ∏|Z_i|`.
    pub dof: u64,
    /// `(|X|-1)(|Y|-1) · #{z : N_{++z} > 0}`.
    pub dof_adjusted: u64,
    /// Natural-log p-value of `g2` under the selected dof.
    pub log_p_g2: f64,
    pub log_p_chi2: f64,
    pub empty_strata: u64,
    pub method: Method,
    /// The selected dof is 0; p-values are 1 by convention.
    pub degenerate: bool,
}

impl TestResult {
    /// Linear p-value of the G² statistic.
    pub fn p_value(&self) -> f64 {
        libm::exp(self.log_p_g2)
    }

    pub fn p_value_chi2(&self) -> f64 {
        libm::exp(self.log_p_chi2)
    }
}

/// `2 Σ N ln(N / E)` over cells with `N > 0`.
pub fn g2_statistic(observed: &ContingencyTable, expected: &Expected) -> Result<f64> {
    check_shape(observed, expected)?;
    let e = expected.values();
    let mut terms = Vec::with_capacity(observed.occupied_cells());
    for (cell, count) in observed.occupied() {
        if e[cell] <= 0.0 {
            return Err(Error::ZeroExpected { cell });
        }
        let n = count as f64;
        terms.push(n * libm::log(n / e[cell]));
    }
    Ok((2.0 * order_free_sum(&terms)).max(0.0))
}

/// `Σ (N − E)² / E` over cells with `E > 0`.
pub fn chi2_statistic(observed: &ContingencyTable, expected: &Expected) -> Result<f64> {
    check_shape(observed, expected)?;
    let counts = observed.block(0, observed.n_cells());
    let mut terms = Vec::with_capacity(counts.len());
    for (cell, (&count, &e)) in counts.iter().zip(expected.values()).enumerate() {
        if e > 0.0 {
            let d = count as f64 - e;
            terms.push(d * d / e);
        } else if count > 0 {
            return Err(Error::ZeroExpected { cell });
        }
    }
    Ok(order_free_sum(&terms))
}

/// A sum that depends only on the multiset of terms: each term is truncated
/// to a fixed-point grid set by the largest magnitude and the integers are
/// added exactly. Relabeling the levels of any variable permutes the cell
/// terms, so both statistics come out bit-identical.
fn order_free_sum(terms: &[f64]) -> f64 {
    let max = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if max == 0.0 || !max.is_finite() {
        return terms.iter().sum();
    }
    let shift = 62 - libm::frexp(max).1;
    let scale = libm::scalbn(1.0, shift);
    // every scaled term is below 2^62 in magnitude
    let total: i128 = if scale.is_normal() {
        terms.iter().map(|&t| i128::from((t * scale) as i64)).sum()
    } else {
        terms.iter().map(|&t| i128::from(libm::scalbn(t, shift) as i64)).sum()
    };
    libm::scalbn(total as f64, -shift)
}

fn check_shape(observed: &ContingencyTable, expected: &Expected) -> Result<()> {
    if observed.dims() != expected.dims() {
        return Err(Error::ShapeMismatch { expected: observed.n_cells(), found: expected.values().len() });
    }
    Ok(())
}

/// Nominal degrees of freedom `(|X|-1)(|Y|-1) ∏|Z_i|`.
pub fn dof(levels_x: usize, levels_y: usize, levels_cs: &[usize]) -> u64 {
    let strata = levels_cs.iter().fold(1u64, |acc, &l| acc.saturating_mul(l as u64));
    pair_dof(levels_x, levels_y).saturating_mul(strata)
}

/// Degrees of freedom counting occupied strata only.
pub fn dof_adjusted(levels_x: usize, levels_y: usize, marginals: &SliceMarginals) -> u64 {
    pair_dof(levels_x, levels_y).saturating_mul(marginals.occupied_strata() as u64)
}

fn pair_dof(levels_x: usize, levels_y: usize) -> u64 {
    (levels_x.saturating_sub(1) as u64).saturating_mul(levels_y.saturating_sub(1) as u64)
}

/// Tests `data[x] ⊥ data[y] | data[cs]`.
pub fn ci_test(data: &Dataset, spec: &TestSpec, options: TestOptions) -> Result<TestResult> {
    validate_spec(spec, data)?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let table = build_table(data, &spec.variables())?;
    ci_test_table(&table, options)
}

/// Tests the first two dimensions of `table` for independence given the rest.
pub fn ci_test_table(table: &ContingencyTable, options: TestOptions) -> Result<TestResult> {
    if table.total() == 0 {
        return Err(Error::EmptyTable);
    }
    let marginals = slice_marginals(table)?;
    let dims = table.dims();
    let (dx, dy) = (dims[0], dims[1]);

    let (mut g2, mut chi2) = match options.method {
        Method::ClosedForm => closed_form_statistics(table, &marginals),
        Method::Ipf => {
            let fit = ipf_fit(table, &ci_model(dims.len() - 2), IpfOptions::default())?;
            if !fit.converged {
                return Err(Error::NotConverged { iterations: fit.iterations, discrepancy: fit.max_discrepancy });
            }
            (fit.deviance, fit.pearson)
        }
    };

    let nominal = dof(dx, dy, &dims[2..]);
    let adjusted = dof_adjusted(dx, dy, &marginals);
    let selected = if options.adjust_dof { adjusted } else { nominal };
    if dx == 1 || dy == 1 {
        g2 = 0.0;
        chi2 = 0.0;
    }
    let degenerate = selected == 0;
    let (log_p_g2, log_p_chi2) =
        if degenerate { (0.0, 0.0) } else { (log_sf_chisq(g2, selected)?, log_sf_chisq(chi2, selected)?) };

    Ok(TestResult {
        g2,
        chi2,
        dof: nominal,
        dof_adjusted: adjusted,
        log_p_g2,
        log_p_chi2,
        empty_strata: marginals.empty_strata() as u64,
        method: options.method,
        degenerate,
    })
}

/// Both statistics from the occupied strata, without materializing the
/// expected-frequency array.
fn closed_form_statistics(table: &ContingencyTable, marginals: &SliceMarginals) -> (f64, f64) {
    let (dx, dy) = (marginals.levels_x(), marginals.levels_y());
    let block = dx * dy;
    let cells = marginals.occupied_strata() * block;
    let mut g2 = Vec::with_capacity(cells);
    let mut chi2 = Vec::with_capacity(cells);
    for slice in marginals.iter() {
        let counts = table.block(slice.z * block, block);
        let n = slice.n as f64;
        for (row, &ny) in counts.chunks_exact(dx).zip(slice.n_y) {
            let share = ny as f64 / n;
            for (&count, &nx) in row.iter().zip(slice.n_x) {
                let e = nx as f64 * share;
                if count > 0 {
                    let c = count as f64;
                    let r = c / e;
                    g2.push(c * libm::log(r));
                    // (c - e)^2 / e
                    chi2.push((c - e) * (r - 1.0));
                } else {
                    chi2.push(e);
                }
            }
        }
    }
    ((2.0 * order_free_sum(&g2)).max(0.0), order_free_sum(&chi2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabulate::expected_ci;
    use crate::CategoricalColumn;
    use alloc::vec;

    fn table(dims: Vec<usize>, counts: Vec<u64>) -> ContingencyTable {
        ContingencyTable::from_counts(dims, counts).unwrap()
    }

    #[test]
    fn statistics_of_small_tables() {
        let t = table(vec![2, 2], vec![10; 4]);
        let e = expected_ci(&slice_marginals(&t).unwrap()).unwrap();
        assert_eq!(g2_statistic(&t, &e).unwrap(), 0.0);

        let t = table(vec![2, 2], vec![20, 30, 30, 20]);
        let e = expected_ci(&slice_marginals(&t).unwrap()).unwrap();
        let oracle = 2.0 * (40.0 * libm::log(0.8) + 60.0 * libm::log(1.2));
        assert!((g2_statistic(&t, &e).unwrap() - oracle).abs() < 1e-12);
        assert!((g2_statistic(&t, &e).unwrap() - 4.0272).abs() < 1e-3);
        assert!((chi2_statistic(&t, &e).unwrap() - 4.0).abs() < 1e-12);

        // any table against its own counts
        let t = table(vec![3, 2], vec![4, 0, 9, 1, 1, 7]);
        let own = Expected::from_table(&t);
        assert_eq!(g2_statistic(&t, &own).unwrap(), 0.0);
        assert_eq!(chi2_statistic(&t, &own).unwrap(), 0.0);
    }

    #[test]
    fn empty_slice_contributes_nothing() {
        // 2x2 by 2 strata; second stratum empty
        let t = table(vec![2, 2, 2], vec![20, 30, 30, 20, 0, 0, 0, 0]);
        let e = expected_ci(&slice_marginals(&t).unwrap()).unwrap();
        assert!((chi2_statistic(&t, &e).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_expected_with_positive_count_is_error() {
        let t = table(vec![2, 1], vec![1, 1]);
        let e = Expected::new(vec![2, 1], vec![2.0, 0.0]).unwrap();
        assert_eq!(g2_statistic(&t, &e), Err(Error::ZeroExpected { cell: 1 }));
        assert_eq!(chi2_statistic(&t, &e), Err(Error::ZeroExpected { cell: 1 }));
        let wrong = Expected::new(vec![1, 2], vec![1.0, 1.0]).unwrap();
        assert!(matches!(g2_statistic(&t, &wrong), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn nominal_dof() {
        assert_eq!(dof(3, 4, &[2]), 12);
        assert_eq!(dof(3, 4, &[2, 4]), 48);
        assert_eq!(dof(3, 4, &[2, 4, 4]), 192);
        assert_eq!(dof(3, 4, &[]), 6);
        assert_eq!(dof(1, 4, &[3]), 0);
    }

    #[test]
    fn adjusted_dof() {
        let full = table(vec![2, 2, 3], vec![1; 12]);
        let m = slice_marginals(&full).unwrap();
        assert_eq!(dof_adjusted(2, 2, &m), dof(2, 2, &[3]));
        let mut counts = vec![0; 12];
        counts[8] = 5;
        let one = table(vec![2, 2, 3], counts);
        assert_eq!(dof_adjusted(2, 2, &slice_marginals(&one).unwrap()), 1);
    }

    #[test]
    fn diagonal_table_chi2_is_twice_n() {
        let codes: Vec<u32> = (0..300).map(|i| (i % 3) as u32).collect();
        let data = Dataset::new(vec![
            CategoricalColumn::from_codes("x", codes.clone()).unwrap(),
            CategoricalColumn::from_codes("y", codes).unwrap(),
        ])
        .unwrap();
        let r = ci_test(&data, &TestSpec::unconditional(0, 1), TestOptions::default()).unwrap();
        assert!((r.chi2 - 600.0).abs() < 1e-9);
        assert_eq!(r.dof, 4);
        let ipf =
            ci_test(&data, &TestSpec::unconditional(0, 1), TestOptions { method: Method::Ipf, adjust_dof: false })
                .unwrap();
        assert!((ipf.g2 - r.g2).abs() <= 1e-8 * r.g2);
    }

    #[test]
    fn degenerate_column() {
        let data = Dataset::new(vec![
            CategoricalColumn::from_codes("x", vec![0, 0, 0, 0]).unwrap(),
            CategoricalColumn::from_codes("y", vec![0, 1, 1, 0]).unwrap(),
        ])
        .unwrap();
        let r = ci_test(&data, &TestSpec::unconditional(0, 1), TestOptions::default()).unwrap();
        assert_eq!((r.g2, r.chi2, r.dof), (0.0, 0.0, 0));
        assert!(r.degenerate);
        assert_eq!(r.p_value(), 1.0);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let data = Dataset::new(vec![
            CategoricalColumn::from_codes("x", vec![]).unwrap(),
            CategoricalColumn::from_codes("y", vec![]).unwrap(),
        ])
        .unwrap();
        assert_eq!(ci_test(&data, &TestSpec::unconditional(0, 1), TestOptions::default()), Err(Error::EmptyDataset));
        assert_eq!(
            ci_test(&data, &TestSpec::unconditional(1, 1), TestOptions::default()),
            Err(Error::OverlappingIndex { index: 1 })
        );
    }

    #[test]
    fn order_free_sum_ignores_order() {
        let terms = [1e-9, -3.25, 7.0e3, 0.1, 0.2, 0.3, -1e-12, 42.0];
        let mut rev = terms;
        rev.reverse();
        let a = order_free_sum(&terms);
        assert_eq!(a.to_bits(), order_free_sum(&rev).to_bits());
        let naive: f64 = terms.iter().sum();
        assert!((a - naive).abs() < 1e-12 * naive.abs());
        assert_eq!(order_free_sum(&[]), 0.0);
        assert_eq!(order_free_sum(&[0.0, 0.0]), 0.0);
        assert_eq!(order_free_sum(&[1e-300, 2e-300]), 3e-300);
        assert_eq!(order_free_sum(&[1e300, 1e300]), 2e300);
    }
}
