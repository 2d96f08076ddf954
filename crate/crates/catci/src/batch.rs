//! Many independent tests on one dataset, optionally across worker threads.

use catci_core::{ci_test, Dataset, TestOptions, TestResult, TestSpec};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BatchError {
    #[error("spec #{position}: {source}")]
    InvalidSpec { position: usize, source: catci_core::Error },
    #[error("test #{position}: {source}")]
    Test { position: usize, source: catci_core::Error },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// All pairs `(i, j)`, `i < j`, of columns outside `cs`, each conditioned on `cs`.
pub fn all_pairs(n_cols: usize, cs: &[usize]) -> Vec<TestSpec> {
    let free: Vec<usize> = (0..n_cols).filter(|c| !cs.contains(c)).collect();
    let mut specs = Vec::with_capacity(free.len() * free.len().saturating_sub(1) / 2);
    for (a, &x) in free.iter().enumerate() {
        for &y in &free[a + 1..] {
            specs.push(TestSpec::new(x, y, cs.to_vec()));
        }
    }
    specs
}

/// Runs every spec through [`ci_test`]. Results are in input order and do not
/// depend on `workers`; `workers <= 1` runs on the calling thread.
///
/// Every spec is validated before any test runs; the first invalid one is
/// reported with its position.
pub fn batch_screen(
    data: &Dataset,
    specs: &[TestSpec],
    options: TestOptions,
    workers: usize,
) -> Result<Vec<TestResult>, BatchError> {
    for (position, spec) in specs.iter().enumerate() {
        spec.validate(data.n_cols()).map_err(|source| BatchError::InvalidSpec { position, source })?;
    }
    let run = |spec: &TestSpec| ci_test(data, spec, options);
    let results: Vec<_> = if workers <= 1 {
        specs.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| BatchError::Pool(e.to_string()))?
            .install(|| specs.par_iter().map(run).collect())
    };
    results
        .into_iter()
        .enumerate()
        .map(|(position, r)| r.map_err(|source| BatchError::Test { position, source }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate, Dependence, GenConfig};

    #[test]
    fn pairs_skip_conditioning_columns() {
        assert_eq!(all_pairs(5, &[]).len(), 10);
        let specs = all_pairs(5, &[2]);
        assert_eq!(specs.len(), 6);
        assert!(specs.iter().all(|s| s.x != 2 && s.y != 2 && s.cs == [2]));
    }

    #[test]
    fn first_invalid_spec_is_reported() {
        let data =
            generate(&GenConfig { n: 50, levels: vec![2, 3, 2], dependence: Dependence::NullCi, seed: 1 }).unwrap();
        let specs = vec![TestSpec::unconditional(0, 1), TestSpec::new(0, 1, vec![1]), TestSpec::unconditional(0, 9)];
        assert_eq!(
            batch_screen(&data, &specs, TestOptions::default(), 2),
            Err(BatchError::InvalidSpec { position: 1, source: catci_core::Error::OverlappingIndex { index: 1 } })
        );
    }

    #[test]
    fn singleton_batch_equals_single_test() {
        let data =
            generate(&GenConfig { n: 300, levels: vec![3, 2, 2], dependence: Dependence::Dependent, seed: 4 }).unwrap();
        let spec = TestSpec::new(0, 1, vec![2]);
        let single = ci_test(&data, &spec, TestOptions::default()).unwrap();
        let batch = batch_screen(&data, &[spec], TestOptions::default(), 3).unwrap();
        assert_eq!(batch, vec![single]);
    }
}
