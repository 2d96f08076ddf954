use catci::batch::{all_pairs, batch_screen, BatchError};
use catci::io::{generate, Dependence, GenConfig};
use catci_core::{ci_test, Method, TestOptions, TestSpec};

fn six_columns() -> catci_core::Dataset {
    generate(&GenConfig { n: 4000, levels: vec![3, 4, 2, 3, 2, 4], dependence: Dependence::Dependent, seed: 21 })
        .unwrap()
}

#[test]
fn batch_equals_looped_single_tests() {
    let data = six_columns();
    for method in [Method::ClosedForm, Method::Ipf] {
        let options = TestOptions { method, adjust_dof: true };
        let mut specs = all_pairs(6, &[]);
        specs.extend(all_pairs(6, &[2, 5]));
        specs.push(TestSpec::new(4, 0, vec![1, 3, 2]));
        let looped: Vec<_> = specs.iter().map(|s| ci_test(&data, s, options).unwrap()).collect();
        for workers in [1, 3] {
            assert_eq!(batch_screen(&data, &specs, options, workers).unwrap(), looped);
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let data = six_columns();
    let specs = all_pairs(6, &[3]);
    let one = batch_screen(&data, &specs, TestOptions::default(), 1).unwrap();
    let eight = batch_screen(&data, &specs, TestOptions::default(), 8).unwrap();
    let bits = |rs: &[catci_core::TestResult]| {
        rs.iter().map(|r| (r.g2.to_bits(), r.chi2.to_bits(), r.log_p_g2.to_bits())).collect::<Vec<_>>()
    };
    assert_eq!(bits(&one), bits(&eight));
}

#[test]
fn empty_batch_and_bad_spec() {
    let data = six_columns();
    assert_eq!(batch_screen(&data, &[], TestOptions::default(), 4).unwrap(), vec![]);
    let specs = [TestSpec::unconditional(0, 1), TestSpec::new(0, 1, vec![6])];
    assert!(matches!(
        batch_screen(&data, &specs, TestOptions::default(), 4),
        Err(BatchError::InvalidSpec { position: 1, .. })
    ));
}
