//! Wall-clock timing of repeated tests over a grid of scenarios, sample sizes
//! and test counts, with times normalized to the closed-form method.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use catci_core::{ci_test, Method, TestOptions, TestSpec};
use thiserror::Error;

use crate::batch::{batch_screen, BatchError};
use crate::io::{generate, Dependence, GenConfig, GenError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Test(#[from] catci_core::Error),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error("no records to report")]
    Empty,
    #[error("report line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Level counts of one benchmark scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub levels_x: usize,
    pub levels_y: usize,
    pub levels_cs: Vec<usize>,
}

impl Scenario {
    pub fn new(levels_x: usize, levels_y: usize, levels_cs: Vec<usize>) -> Self {
        Self { levels_x, levels_y, levels_cs }
    }

    /// Conditioning levels joined by `x`, e.g. `2x4x4`; `none` when unconditional.
    pub fn id(&self) -> String {
        if self.levels_cs.is_empty() {
            return "none".to_string();
        }
        self.levels_cs.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
    }

    pub fn dof(&self) -> u64 {
        catci_core::dof(self.levels_x, self.levels_y, &self.levels_cs)
    }

    fn levels(&self) -> Vec<usize> {
        let mut levels = vec![self.levels_x, self.levels_y];
        levels.extend_from_slice(&self.levels_cs);
        levels
    }

    fn spec(&self) -> TestSpec {
        TestSpec::new(0, 1, (2..2 + self.levels_cs.len()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    /// `T` back-to-back [`ci_test`] calls on one thread.
    Sequential(Method),
    /// One [`batch_screen`] call over `T` copies of the spec.
    Batch { method: Method, workers: usize },
}

impl BenchMethod {
    pub fn label(&self) -> String {
        match self {
            BenchMethod::Sequential(m) => m.as_str().to_string(),
            BenchMethod::Batch { method, workers } => format!("{}@{}w", method.as_str(), workers),
        }
    }
}

const BASELINE: BenchMethod = BenchMethod::Sequential(Method::ClosedForm);

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub test_counts: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    pub repetitions: usize,
    /// Must contain the closed-form sequential baseline.
    pub methods: Vec<BenchMethod>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            test_counts: vec![500, 1000, 2000, 3000, 5000],
            sample_sizes: vec![3000, 5000, 10000],
            scenarios: vec![
                Scenario::new(3, 4, vec![2]),
                Scenario::new(3, 4, vec![2, 4]),
                Scenario::new(3, 4, vec![2, 4, 4]),
            ],
            repetitions: 50,
            methods: vec![BASELINE, BenchMethod::Sequential(Method::Ipf)],
            seed: 2017,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.test_counts.is_empty() || self.test_counts.contains(&0) {
            return Err(BenchError::Config("test counts must be positive"));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(BenchError::Config("sample sizes must be positive"));
        }
        if self.scenarios.is_empty() {
            return Err(BenchError::Config("no scenarios"));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be positive"));
        }
        if !self.methods.contains(&BASELINE) {
            return Err(BenchError::Config("methods must include the closed_form baseline"));
        }
        if self.methods.iter().any(|m| matches!(m, BenchMethod::Batch { workers: 0, .. })) {
            return Err(BenchError::Config("worker count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scenario: String,
    pub n: usize,
    pub tests: usize,
    pub method: String,
    pub mean_seconds: f64,
    /// `mean_seconds` divided by the closed-form mean of the same (scenario, n, T).
    pub normalized: f64,
}

fn dataset_seed(base: u64, scenario: usize, n: usize, rep: usize) -> u64 {
    // SplitMix64 finalizer over the combined coordinates
    let mut z = base
        ^ (scenario as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (n as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (rep as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn time_method(
    data: &catci_core::Dataset,
    spec: &TestSpec,
    tests: usize,
    method: BenchMethod,
) -> Result<f64, BenchError> {
    let start = Instant::now();
    match method {
        BenchMethod::Sequential(m) => {
            let options = TestOptions { method: m, adjust_dof: false };
            for _ in 0..tests {
                black_box(ci_test(black_box(data), spec, options)?);
            }
        }
        BenchMethod::Batch { method, workers } => {
            let options = TestOptions { method, adjust_dof: false };
            let specs = vec![spec.clone(); tests];
            black_box(batch_screen(data, &specs, options, workers)?);
        }
    }
    Ok(start.elapsed().as_secs_f64())
}

/// Runs the whole grid. Records come out ordered by (scenario, n, T, method)
/// in configuration order. Data generation is outside the timed region.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    config.validate()?;
    let mut records = Vec::new();
    for (s, scenario) in config.scenarios.iter().enumerate() {
        let spec = scenario.spec();
        for &n in &config.sample_sizes {
            let gen = |rep: usize| {
                generate(&GenConfig {
                    n,
                    levels: scenario.levels(),
                    dependence: Dependence::NullCi,
                    seed: dataset_seed(config.seed, s, n, rep),
                })
            };

            let warm = gen(usize::MAX)?;
            for &tests in &config.test_counts {
                for &method in &config.methods {
                    time_method(&warm, &spec, tests, method)?;
                }
            }

            let mut sums = vec![vec![0.0; config.methods.len()]; config.test_counts.len()];
            for rep in 0..config.repetitions {
                let data = gen(rep)?;
                for (t, &tests) in config.test_counts.iter().enumerate() {
                    // alternate the method order so drift and cache warmth even out
                    let mut order: Vec<usize> = (0..config.methods.len()).collect();
                    if rep % 2 == 1 {
                        order.reverse();
                    }
                    for m in order {
                        sums[t][m] += time_method(&data, &spec, tests, config.methods[m])?;
                    }
                }
            }

            let baseline = config.methods.iter().position(|&m| m == BASELINE).expect("validated");
            for (t, &tests) in config.test_counts.iter().enumerate() {
                let reps = config.repetitions as f64;
                let base_mean = sums[t][baseline] / reps;
                for (m, method) in config.methods.iter().enumerate() {
                    let mean = sums[t][m] / reps;
                    records.push(BenchRecord {
                        scenario: scenario.id(),
                        n,
                        tests,
                        method: method.label(),
                        mean_seconds: mean,
                        normalized: if m == baseline { 1.0 } else { mean / base_mean },
                    });
                }
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

pub const TSV_HEADER: &str = "scenario\tn\tT\tmethod\tmean_seconds\tnormalized";

/// Stable sort key: first-appearance rank of scenario and method, then n and T.
fn ordered(records: &[BenchRecord]) -> Vec<&BenchRecord> {
    let rank = |key: &dyn Fn(&BenchRecord) -> &str, r: &BenchRecord| {
        records.iter().position(|o| key(o) == key(r)).unwrap_or(0)
    };
    let mut out: Vec<&BenchRecord> = records.iter().collect();
    out.sort_by_key(|r| (rank(&|x| x.scenario.as_str(), r), r.n, r.tests, rank(&|x| x.method.as_str(), r)));
    out
}

/// Formats records. TSV has one line per record with `mean_seconds` in
/// scientific notation and `normalized` to 3 decimals; markdown has one row
/// per (scenario, n, T) with the baseline mean time and one normalized column
/// per method.
pub fn emit_report(records: &[BenchRecord], format: ReportFormat) -> Result<String, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let rows = ordered(records);
    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            out.push_str(TSV_HEADER);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{:.3e}\t{:.3}",
                    r.scenario, r.n, r.tests, r.method, r.mean_seconds, r.normalized
                );
            }
        }
        ReportFormat::Markdown => {
            let mut methods: Vec<&str> = Vec::new();
            for r in &rows {
                if !methods.contains(&r.method.as_str()) {
                    methods.push(&r.method);
                }
            }
            let _ = write!(out, "| scenario | n | T | {} mean (s) |", BASELINE.label());
            for m in &methods {
                let _ = write!(out, " {m} |");
            }
            out.push_str("\n|---|---:|---:|---:|");
            out.push_str(&"---:|".repeat(methods.len()));
            out.push('\n');
            let mut i = 0;
            while i < rows.len() {
                let head = rows[i];
                let group: Vec<&BenchRecord> = rows[i..]
                    .iter()
                    .take_while(|r| r.scenario == head.scenario && r.n == head.n && r.tests == head.tests)
                    .copied()
                    .collect();
                i += group.len();
                let base = group
                    .iter()
                    .find(|r| r.method == BASELINE.label())
                    .map_or(String::from("-"), |r| format!("{:.3e}", r.mean_seconds));
                let _ = write!(out, "| {} | {} | {} | {} |", head.scenario, head.n, head.tests, base);
                for m in &methods {
                    match group.iter().find(|r| r.method == *m) {
                        Some(r) => {
                            let _ = write!(out, " {:.3} |", r.normalized);
                        }
                        None => out.push_str(" - |"),
                    }
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Parses a TSV report produced by [`emit_report`].
pub fn parse_tsv(text: &str) -> Result<Vec<BenchRecord>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TSV_HEADER => {}
        _ => return Err(BenchError::Parse { line: 1, reason: "missing header".into() }),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let line_no = i + 1;
            let bad = |reason: &str| BenchError::Parse { line: line_no, reason: reason.into() };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            Ok(BenchRecord {
                scenario: f[0].to_string(),
                n: f[1].parse().map_err(|_| bad("bad n"))?,
                tests: f[2].parse().map_err(|_| bad("bad T"))?,
                method: f[3].to_string(),
                mean_seconds: f[4].parse().map_err(|_| bad("bad mean_seconds"))?,
                normalized: f[5].parse().map_err(|_| bad("bad normalized"))?,
            })
        })
        .collect()
}
