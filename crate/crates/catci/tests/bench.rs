use catci::bench::{emit_report, parse_tsv, run_bench, BenchConfig, BenchMethod, ReportFormat, Scenario};
use catci_core::Method;

fn config(test_counts: Vec<usize>, repetitions: usize) -> BenchConfig {
    BenchConfig {
        test_counts,
        sample_sizes: vec![1000, 2000],
        scenarios: vec![Scenario::new(3, 4, vec![2]), Scenario::new(3, 4, vec![2, 4])],
        repetitions,
        methods: vec![BenchMethod::Sequential(Method::ClosedForm), BenchMethod::Sequential(Method::Ipf)],
        seed: 1,
    }
}

#[test]
fn record_count_and_order() {
    let records = run_bench(&config(vec![2, 3, 5], 1)).unwrap();
    assert_eq!(records.len(), 2 * 2 * 3 * 2);
    let keys: Vec<_> = records.iter().map(|r| (r.scenario.clone(), r.n, r.tests, r.method.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| (&a.0, a.1, a.2).cmp(&(&b.0, b.1, b.2)));
    assert_eq!(keys, sorted);
    for group in records.chunks(2) {
        assert_eq!(group[0].method, "closed_form");
        assert_eq!(group[0].normalized, 1.0);
        assert!(group.iter().all(|r| r.mean_seconds > 0.0));
    }
}

#[test]
fn default_grid_cardinality() {
    let c = BenchConfig::default();
    let cells = c.scenarios.len() * c.sample_sizes.len() * c.test_counts.len() * c.methods.len();
    assert_eq!(cells, 3 * 3 * 5 * 2);
    assert_eq!(c.repetitions, 50);
}

#[test]
fn tsv_round_trip_at_report_precision() {
    let records = run_bench(&config(vec![2], 1)).unwrap();
    let tsv = emit_report(&records, ReportFormat::Tsv).unwrap();
    let back = parse_tsv(&tsv).unwrap();
    assert_eq!(back.len(), records.len());
    for (a, b) in records.iter().zip(&back) {
        assert_eq!((&a.scenario, a.n, a.tests, &a.method), (&b.scenario, b.n, b.tests, &b.method));
        assert!((a.normalized - b.normalized).abs() <= 5e-4);
        assert!((a.mean_seconds - b.mean_seconds).abs() <= 5e-4 * a.mean_seconds);
    }
    assert_eq!(emit_report(&back, ReportFormat::Tsv).unwrap(), tsv);
}

#[test]
fn doubling_tests_doubles_time() {
    let mut c = config(vec![200, 400], 5);
    c.scenarios.truncate(1);
    c.sample_sizes = vec![3000];
    c.methods.truncate(1);
    let records = run_bench(&c).unwrap();
    let ratio = records[1].mean_seconds / records[0].mean_seconds;
    assert!((1.5..=2.5).contains(&ratio), "time ratio {ratio}");
}
