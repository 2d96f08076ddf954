use catci::io::{generate, Dependence, GenConfig};
use catci_core::{ci_test, TestOptions, TestSpec};

fn run(levels: &[usize], n: usize, dependence: Dependence, seed: u64) -> f64 {
    let data = generate(&GenConfig { n, levels: levels.to_vec(), dependence, seed }).unwrap();
    let spec = TestSpec::new(0, 1, (2..levels.len()).collect());
    ci_test(&data, &spec, TestOptions::default()).unwrap().log_p_g2
}

#[test]
fn same_seed_same_data() {
    let cfg = GenConfig { n: 500, levels: vec![3, 4, 2], dependence: Dependence::Dependent, seed: 9 };
    assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    let data = generate(&cfg).unwrap();
    let levels: Vec<usize> = (0..data.n_cols()).map(|j| data.levels(j).unwrap()).collect();
    assert_eq!(levels, cfg.levels);
    assert!(data.columns().iter().zip(&cfg.levels).all(|(c, &l)| c.codes().iter().all(|&v| (v as usize) < l)));
    let other = GenConfig { seed: 10, ..cfg.clone() };
    assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
}

#[test]
fn null_rejection_rate_near_nominal() {
    let seeds = 1000;
    let rejected = (0..seeds).filter(|&s| run(&[3, 4, 2], 50_000, Dependence::NullCi, s) < 0.05f64.ln()).count();
    let rate = rejected as f64 / seeds as f64;
    assert!((0.03..=0.07).contains(&rate), "rejection rate {rate}");
}

#[test]
fn dependent_mode_is_detected() {
    let seeds = 200;
    let detected = (0..seeds).filter(|&s| run(&[3, 4, 2], 5000, Dependence::Dependent, s) < 1e-6f64.ln()).count();
    assert!(detected as f64 / seeds as f64 > 0.99, "detected {detected}/{seeds}");
}
