use catci_core::{
    build_table, build_table_with_threshold, ci_model, ci_test_table, dof, expected_ci, ipf_fit, log_sf_chisq,
    model_dof, slice_marginals, CategoricalColumn, ContingencyTable, Dataset, IpfOptions, Method, TestOptions,
};
use proptest::prelude::*;

fn table_strategy(max_k: usize) -> impl Strategy<Value = ContingencyTable> {
    prop::collection::vec(2usize..5, 2..max_k + 3).prop_flat_map(|dims| {
        let n: usize = dims.iter().product();
        prop::collection::vec(prop_oneof![Just(0u64), 0u64..40], n)
            .prop_filter("non-empty", |c| c.iter().any(|&v| v > 0))
            .prop_map(move |counts| ContingencyTable::from_counts(dims.clone(), counts).unwrap())
    })
}

/// Applies `perm` to the levels of dimension `axis`.
fn relabel(table: &ContingencyTable, axis: usize, perm: &[usize]) -> ContingencyTable {
    let mut counts = vec![0; table.n_cells()];
    for (cell, count) in table.occupied() {
        let mut idx = table.multi_index(cell);
        idx[axis] = perm[idx[axis]];
        counts[table.linear_index(&idx).unwrap()] = count;
    }
    ContingencyTable::from_counts(table.dims().to_vec(), counts).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

proptest! {
    #[test]
    fn factorize_round_trip(tokens in prop::collection::vec("[a-d]{1,2}", 0..60)) {
        let col = CategoricalColumn::factorize("t", tokens.iter().map(String::as_str));
        let back: Vec<&str> = col.codes().iter().map(|&c| col.label(c).unwrap()).collect();
        prop_assert_eq!(back, tokens.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn dense_and_sparse_tabulation_agree(
        rows in prop::collection::vec((0u32..3, 0u32..4, 0u32..2), 1..200)
    ) {
        let cols = vec![
            CategoricalColumn::with_numeric_labels("a", 3, rows.iter().map(|r| r.0).collect()).unwrap(),
            CategoricalColumn::with_numeric_labels("b", 4, rows.iter().map(|r| r.1).collect()).unwrap(),
            CategoricalColumn::with_numeric_labels("c", 2, rows.iter().map(|r| r.2).collect()).unwrap(),
        ];
        let data = Dataset::new(cols).unwrap();
        let dense = build_table(&data, &[0, 1, 2]).unwrap();
        let sparse = build_table_with_threshold(&data, &[0, 1, 2], 0).unwrap();
        prop_assert_eq!(&dense, &sparse);
        prop_assert_eq!(dense.total(), rows.len() as u64);
        let m = slice_marginals(&sparse).unwrap();
        prop_assert_eq!(&slice_marginals(&dense).unwrap(), &m);
        prop_assert_eq!(m.iter().map(|s| s.n).sum::<u64>(), rows.len() as u64);
    }

    #[test]
    fn expected_preserves_margins(table in table_strategy(2)) {
        let m = slice_marginals(&table).unwrap();
        let e = expected_ci(&m).unwrap();
        let (dx, dy) = (table.dims()[0], table.dims()[1]);
        for s in m.iter() {
            let base = s.z * dx * dy;
            for x in 0..dx {
                let row: f64 = (0..dy).map(|y| e.values()[base + y * dx + x]).sum();
                prop_assert!(close(row, s.n_x[x] as f64, 1e-9));
            }
            for y in 0..dy {
                let col: f64 = (0..dx).map(|x| e.values()[base + y * dx + x]).sum();
                prop_assert!(close(col, s.n_y[y] as f64, 1e-9));
            }
        }
    }

    #[test]
    fn relabeling_leaves_result_unchanged(table in table_strategy(2), seed in any::<u64>()) {
        let before = ci_test_table(&table, TestOptions::default()).unwrap();
        for axis in 0..table.dims().len() {
            let d = table.dims()[axis];
            // rotation by a seed-dependent offset
            let perm: Vec<usize> = (0..d).map(|i| (i + seed as usize % d) % d).collect();
            let after = ci_test_table(&relabel(&table, axis, &perm), TestOptions::default()).unwrap();
            prop_assert_eq!(&after, &before);
        }
    }

    #[test]
    fn slice_additivity(table in table_strategy(2)) {
        let whole = ci_test_table(&table, TestOptions::default()).unwrap();
        let (dx, dy) = (table.dims()[0], table.dims()[1]);
        let block = dx * dy;
        let (mut g2, mut chi2) = (0.0, 0.0);
        for z in 0..table.n_cells() / block {
            let counts = table.block(z * block, block).into_owned();
            if counts.iter().all(|&c| c == 0) {
                continue;
            }
            let slice = ContingencyTable::from_counts(vec![dx, dy], counts).unwrap();
            let r = ci_test_table(&slice, TestOptions::default()).unwrap();
            g2 += r.g2;
            chi2 += r.chi2;
        }
        prop_assert!(close(whole.g2, g2, 1e-9));
        prop_assert!(close(whole.chi2, chi2, 1e-9));
    }

    #[test]
    fn methods_agree(table in table_strategy(3)) {
        let closed = ci_test_table(&table, TestOptions::default()).unwrap();
        let ipf = ci_test_table(&table, TestOptions { method: Method::Ipf, adjust_dof: false }).unwrap();
        prop_assert!(close(ipf.g2, closed.g2, 1e-8));
        prop_assert!(close(ipf.chi2, closed.chi2, 1e-8));
        prop_assert_eq!(ipf.dof, closed.dof);
        prop_assert_eq!(ipf.empty_strata, closed.empty_strata);
    }

    #[test]
    fn fit_margins_and_total(table in table_strategy(3)) {
        let k = table.dims().len() - 2;
        let fit = ipf_fit(&table, &ci_model(k), IpfOptions::default()).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(fit.max_discrepancy < 1e-8);
        prop_assert!(fit.fitted.iter().all(|&f| f >= 0.0));
        let total: f64 = fit.fitted.iter().sum();
        prop_assert!(close(total, table.total() as f64, 1e-12));
        prop_assert!(fit.deviance >= 0.0);
    }

    #[test]
    fn ci_model_dof_is_nominal_formula(dims in prop::collection::vec(2usize..7, 2..7)) {
        let k = dims.len() - 2;
        prop_assert_eq!(model_dof(&dims, &ci_model(k)).unwrap(), dof(dims[0], dims[1], &dims[2..]));
    }

    #[test]
    fn log_sf_is_monotone(dof in 1u64..200, a in 0.0f64..500.0, b in 0.0f64..500.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let (l, h) = (log_sf_chisq(lo, dof).unwrap(), log_sf_chisq(hi, dof).unwrap());
        prop_assert!(h < l);
        prop_assert!(l <= 0.0);
        prop_assert!(log_sf_chisq(hi, dof + 1).unwrap() > h);
    }
}
