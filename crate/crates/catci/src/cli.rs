//! The `catci` command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (unreadable or malformed
//! input, failed computation), 4 test-specification error (unknown column,
//! index out of range, overlapping variables).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use catci_core::{ci_test, Dataset, Method, TestOptions, TestSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::batch::{all_pairs, batch_screen, BatchError};
use crate::bench::{emit_report, run_bench, BenchConfig, BenchError, BenchMethod, ReportFormat, Scenario};
use crate::io::{generate, read_delimited_path, write_delimited, DelimitedOptions, Dependence, GenConfig};
use crate::report::ResultRow;

#[derive(Debug, Parser)]
#[command(name = "catci", version, about = "Conditional independence tests for categorical data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one pair X ⊥ Y | CS.
    Test(TestArgs),
    /// Test many pairs on one dataset.
    Batch(BatchArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
    /// Time repeated tests and report normalized times.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Delimited input file.
    #[arg(long)]
    data: PathBuf,
    /// Field delimiter: a single character, or `tab`.
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: char,
    /// The first line is data, not column names (columns become V1, V2, ...).
    #[arg(long)]
    no_header: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(alias = "closed_form")]
    Closed,
    Ipf,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => Method::ClosedForm,
            MethodArg::Ipf => Method::Ipf,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Column name or 0-based index.
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Comma-separated conditioning columns.
    #[arg(long, value_delimiter = ',')]
    cs: Vec<String>,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    /// Count only occupied strata in the degrees of freedom.
    #[arg(long)]
    adjust_dof: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: TestFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestFormat {
    Json,
    Tsv,
}

#[derive(Debug, Args)]
struct BatchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `all` for every pair of non-conditioning columns, or a file with one
    /// `x,y[,z...]` spec per line.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Conditioning columns added to every pair.
    #[arg(long, value_delimiter = ',')]
    cs: Vec<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    #[arg(long)]
    adjust_dof: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: BatchFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BatchFormat {
    Jsonl,
    Tsv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Null,
    Dependent,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated level counts of X, Y, Z1, ...
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<usize>,
    #[arg(long, value_enum, default_value = "null")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: char,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    test_counts: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    sample_sizes: Option<Vec<usize>>,
    /// Conditioning level sets separated by `;`, e.g. `2;2,4;2,4,4`.
    #[arg(long, value_parser = parse_scenarios)]
    scenarios: Option<Scenarios>,
    #[arg(long, default_value_t = 3)]
    x_levels: usize,
    #[arg(long, default_value_t = 4)]
    y_levels: usize,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["closed", "ipf"])]
    methods: Vec<MethodArg>,
    /// Also time batch screening of the T tests with this many workers.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: BenchFormat,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchFormat {
    Tsv,
    Markdown,
}

fn parse_delimiter(s: &str) -> Result<char, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok('\t'),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(format!("delimiter must be one character or `tab`, got `{s}`")),
            }
        }
    }
}

// An alias so clap treats the whole list as one value.
type Scenarios = Vec<Vec<usize>>;

fn parse_scenarios(s: &str) -> Result<Scenarios, String> {
    s.split(';')
        .map(|part| {
            let part = part.trim();
            if part.is_empty() || part == "none" {
                return Ok(Vec::new());
            }
            part.split(',').map(|l| l.trim().parse::<usize>().map_err(|e| format!("bad level `{l}`: {e}"))).collect()
        })
        .collect()
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Spec(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Spec(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Spec(m) => m,
        }
    }
}

impl From<catci_core::Error> for CliError {
    fn from(e: catci_core::Error) -> Self {
        match e {
            catci_core::Error::IndexOutOfRange { .. } | catci_core::Error::OverlappingIndex { .. } => {
                CliError::Spec(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        match e {
            BatchError::InvalidSpec { .. } => CliError::Spec(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a, out),
        Command::Batch(a) => cmd_batch(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn load(args: &DataArgs) -> Result<Dataset, CliError> {
    let options = DelimitedOptions { delimiter: args.delimiter, has_header: !args.no_header };
    read_delimited_path(&args.data, options).map_err(|e| CliError::Data(format!("{}: {e}", args.data.display())))
}

/// Column by name first, then by 0-based index.
fn resolve(data: &Dataset, token: &str) -> Result<usize, CliError> {
    let token = token.trim();
    data.column_index(token)
        .or_else(|| token.parse().ok())
        .ok_or_else(|| CliError::Spec(format!("unknown column `{token}`")))
}

fn resolve_all(data: &Dataset, tokens: &[String]) -> Result<Vec<usize>, CliError> {
    tokens.iter().filter(|t| !t.trim().is_empty()).map(|t| resolve(data, t)).collect()
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("write failed: {e}")))
}

fn cmd_test(args: TestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data = load(&args.data)?;
    let spec = TestSpec::new(resolve(&data, &args.x)?, resolve(&data, &args.y)?, resolve_all(&data, &args.cs)?);
    let options = TestOptions { method: args.method.into(), adjust_dof: args.adjust_dof };
    let result = ci_test(&data, &spec, options)?;
    let mut row = ResultRow::new(&data, &spec, &result).with_p(&result);
    if !args.adjust_dof {
        row = row.without_adjusted();
    }
    let text = match args.format {
        TestFormat::Json => format!("{}\n", row.to_json()),
        TestFormat::Tsv => format!("{}\n{}\n", row.tsv_header(), row.to_tsv()),
    };
    write_out(out, &text)
}

fn read_pairs(data: &Dataset, path: &str, cs: &[usize]) -> Result<Vec<TestSpec>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{path}: {e}")))?;
    let mut specs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = line.split(',').map(str::to_string).collect();
        if cols.len() < 2 {
            return Err(CliError::Spec(format!("{path} line {}: need at least x,y", i + 1)));
        }
        let idx = resolve_all(data, &cols)?;
        let mut spec_cs = idx[2..].to_vec();
        spec_cs.extend_from_slice(cs);
        specs.push(TestSpec::new(idx[0], idx[1], spec_cs));
    }
    Ok(specs)
}

fn cmd_batch(args: BatchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let data = load(&args.data)?;
    let cs = resolve_all(&data, &args.cs)?;
    let specs = if args.pairs == "all" {
        if let Some(&bad) = cs.iter().find(|&&c| c >= data.n_cols()) {
            return Err(catci_core::Error::IndexOutOfRange { index: bad, columns: data.n_cols() }.into());
        }
        all_pairs(data.n_cols(), &cs)
    } else {
        read_pairs(&data, &args.pairs, &cs)?
    };
    let options = TestOptions { method: args.method.into(), adjust_dof: args.adjust_dof };
    let results = batch_screen(&data, &specs, options, args.workers)?;
    let mut text = String::new();
    for (i, (spec, result)) in specs.iter().zip(&results).enumerate() {
        let row = ResultRow::new(&data, spec, result);
        match args.format {
            BatchFormat::Jsonl => text.push_str(&row.to_json()),
            BatchFormat::Tsv => {
                if i == 0 {
                    text.push_str(&row.tsv_header());
                    text.push('\n');
                }
                text.push_str(&row.to_tsv());
            }
        }
        text.push('\n');
    }
    write_out(out, &text)
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = GenConfig {
        n: args.n,
        levels: args.levels,
        dependence: match args.mode {
            ModeArg::Null => Dependence::NullCi,
            ModeArg::Dependent => Dependence::Dependent,
        },
        seed: args.seed,
    };
    let data = generate(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    let written = match &args.out {
        Some(path) => fs::File::create(path).and_then(|f| write_delimited(&data, f, args.delimiter)),
        None => write_delimited(&data, &mut *out, args.delimiter),
    };
    written.map_err(|e| CliError::Data(format!("write failed: {e}")))
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut config = BenchConfig::default();
    if let Some(t) = args.test_counts {
        config.test_counts = t;
    }
    if let Some(n) = args.sample_sizes {
        config.sample_sizes = n;
    }
    if let Some(s) = args.scenarios {
        config.scenarios = s.into_iter().map(|cs| Scenario::new(args.x_levels, args.y_levels, cs)).collect();
    } else {
        for s in &mut config.scenarios {
            s.levels_x = args.x_levels;
            s.levels_y = args.y_levels;
        }
    }
    if let Some(r) = args.repetitions {
        config.repetitions = r;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let methods: Vec<Method> = args.methods.into_iter().map(Method::from).collect();
    config.methods = methods.iter().map(|&m| BenchMethod::Sequential(m)).collect();
    if let Some(workers) = args.workers {
        config.methods.extend(methods.iter().map(|&method| BenchMethod::Batch { method, workers }));
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if config.scenarios.iter().any(|s| s.levels_x < 2 || s.levels_y < 2 || s.levels_cs.contains(&0)) {
        return Err(CliError::Usage("scenario level counts must be at least 2 (1 for none)".into()));
    }

    let records = run_bench(&config).map_err(|e| match e {
        BenchError::Config(_) | BenchError::Generate(_) => CliError::Usage(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;
    let format = match args.format {
        BenchFormat::Tsv => ReportFormat::Tsv,
        BenchFormat::Markdown => ReportFormat::Markdown,
    };
    let text = emit_report(&records, format).map_err(|e| CliError::Data(e.to_string()))?;
    match args.out {
        Some(path) => fs::write(&path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => write_out(out, &text),
    }
}
