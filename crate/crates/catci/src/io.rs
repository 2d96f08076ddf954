//! Delimited text files and synthetic data.
//!
//! The file format is one observation per line, fields separated by a single
//! delimiter character (comma by default, tab optional), with an optional
//! header line of column names. Fields are raw tokens: there is no quoting,
//! so a token may not contain the delimiter. Every column is factorized in
//! first-appearance order. Empty lines are skipped; a trailing `\r` is
//! stripped.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use catci_core::{CategoricalColumn, Code, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("input has no data rows")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}: field {column} is empty")]
    MissingField { line: usize, column: usize },
    #[error(transparent)]
    Data(#[from] catci_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelimitedOptions {
    pub delimiter: char,
    pub has_header: bool,
}

impl Default for DelimitedOptions {
    fn default() -> Self {
        Self { delimiter: ',', has_header: true }
    }
}

/// Reads a dataset. Without a header, columns are named `V1`, `V2`, ...
pub fn read_delimited<R: Read>(mut reader: R, options: DelimitedOptions) -> Result<Dataset, ReadError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty());

    let header: Option<Vec<&str>> = if options.has_header {
        Some(lines.next().ok_or(ReadError::Empty)?.1.split(options.delimiter).collect())
    } else {
        None
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut fields: Vec<Vec<&str>> = Vec::new();
    for (line, content) in lines {
        let row: Vec<&str> = content.split(options.delimiter).collect();
        let expected = *width.get_or_insert(row.len());
        if row.len() != expected {
            return Err(ReadError::Ragged { line, expected, found: row.len() });
        }
        if let Some(column) = row.iter().position(|f| f.is_empty()) {
            return Err(ReadError::MissingField { line, column: column + 1 });
        }
        if fields.is_empty() {
            fields.resize_with(expected, Vec::new);
        }
        for (col, tok) in fields.iter_mut().zip(row) {
            col.push(tok);
        }
    }
    if fields.is_empty() {
        return Err(ReadError::Empty);
    }

    let names: Vec<String> = match header {
        Some(h) => h.into_iter().map(str::to_string).collect(),
        None => (1..=fields.len()).map(|i| format!("V{i}")).collect(),
    };
    let columns = names.into_iter().zip(fields).map(|(name, toks)| CategoricalColumn::factorize(name, toks)).collect();
    Ok(Dataset::new(columns)?)
}

pub fn read_delimited_path(path: &Path, options: DelimitedOptions) -> Result<Dataset, ReadError> {
    read_delimited(File::open(path)?, options)
}

/// Writes a header of column names and one line per row, using labels where
/// a column has them and numeric codes otherwise.
pub fn write_delimited<W: Write>(data: &Dataset, writer: W, delimiter: char) -> io::Result<()> {
    let mut out = BufWriter::new(writer);
    let sep = delimiter.to_string();
    let names: Vec<&str> = data.columns().iter().map(CategoricalColumn::name).collect();
    writeln!(out, "{}", names.join(&sep))?;
    let mut line = String::new();
    for row in 0..data.n_rows() {
        line.clear();
        for (j, col) in data.columns().iter().enumerate() {
            if j > 0 {
                line.push(delimiter);
            }
            let code = col.codes()[row];
            match col.label(code) {
                Some(label) => line.push_str(label),
                None => line.push_str(&code.to_string()),
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn write_delimited_path(data: &Dataset, path: &Path, delimiter: char) -> io::Result<()> {
    write_delimited(data, File::create(path)?, delimiter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    /// `X ⊥ Y | Z` holds by construction.
    NullCi,
    /// `Y` is pulled toward a function of `X` within every stratum.
    Dependent,
}

/// Mixing weight toward `Y = X mod |Y|` for [`Dependence::Dependent`].
pub const DEPENDENT_MIX: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub n: usize,
    /// Level counts of `X`, `Y`, `Z_1`, ..., `Z_k`.
    pub levels: Vec<usize>,
    pub dependence: Dependence,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("need level counts for at least X and Y, got {0}")]
    TooFewVariables(usize),
    #[error("variable {index} has {levels} levels; at least 2 are required")]
    TooFewLevels { index: usize, levels: usize },
    #[error("level count {0} is too large")]
    TooManyLevels(usize),
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::EmptySample);
        }
        if self.levels.len() < 2 {
            return Err(GenError::TooFewVariables(self.levels.len()));
        }
        if let Some((index, &levels)) = self.levels.iter().enumerate().find(|(_, &l)| l < 2) {
            return Err(GenError::TooFewLevels { index, levels });
        }
        if let Some(&l) = self.levels.iter().find(|&&l| l > u32::MAX as usize) {
            return Err(GenError::TooManyLevels(l));
        }
        Ok(())
    }
}

/// Cumulative weights of `P(X | z)` and `P(Y | z)` for one stratum.
struct StratumTables {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl StratumTables {
    /// Normalized independent uniforms on `(0, 1]`, drawn from ChaCha8 stream
    /// `z + 1` of `seed` (the row draws use stream 0).
    fn draw(seed: u64, z: u64, lx: usize, ly: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(z + 1);
        let mut cumulative = |levels: usize| {
            let weights: Vec<f64> = (0..levels).map(|_| 1.0 - rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            weights
                .iter()
                .scan(0.0, |acc, w| {
                    *acc += w / total;
                    Some(*acc)
                })
                .collect()
        };
        let x = cumulative(lx);
        let y = cumulative(ly);
        Self { x, y }
    }
}

fn sample(cumulative: &[f64], u: f64) -> Code {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as Code
}

/// Generates columns `V1` (X), `V2` (Y), `Z1`..`Zk`.
///
/// The stream is ChaCha8 seeded with `seed`, so output is bit-identical
/// across platforms. Per row, in this order: each `Z_i` uniform on its levels,
/// then `X ~ P(X | z)`, then `Y`. Under [`Dependence::NullCi`] `Y ~ P(Y | z)`
/// independently of `X`. Under [`Dependence::Dependent`] a uniform draw below
/// [`DEPENDENT_MIX`] sets `Y = X mod |Y|`, otherwise `Y ~ P(Y | z)`. The
/// conditional tables of stratum `z` depend only on `(seed, z)`.
pub fn generate(config: &GenConfig) -> Result<Dataset, GenError> {
    config.validate()?;
    let (lx, ly) = (config.levels[0], config.levels[1]);
    let z_levels = &config.levels[2..];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tables: BTreeMap<u64, StratumTables> = BTreeMap::new();

    let mut x = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    let mut zs: Vec<Vec<Code>> = vec![Vec::with_capacity(config.n); z_levels.len()];
    for _ in 0..config.n {
        let mut stratum = 0u64;
        let mut stride = 1u64;
        for (col, &l) in zs.iter_mut().zip(z_levels) {
            let code = rng.random_range(0..l as u32);
            col.push(code);
            stratum = stratum.wrapping_add(code as u64 * stride);
            stride = stride.wrapping_mul(l as u64);
        }
        let t = tables.entry(stratum).or_insert_with(|| StratumTables::draw(config.seed, stratum, lx, ly));
        let xv = sample(&t.x, rng.random::<f64>());
        let yv = match config.dependence {
            Dependence::NullCi => sample(&t.y, rng.random::<f64>()),
            Dependence::Dependent => {
                if rng.random::<f64>() < DEPENDENT_MIX {
                    xv % ly as Code
                } else {
                    sample(&t.y, rng.random::<f64>())
                }
            }
        };
        x.push(xv);
        y.push(yv);
    }

    let mut columns = Vec::with_capacity(config.levels.len());
    columns.push(CategoricalColumn::with_numeric_labels("V1", lx, x).expect("codes below levels"));
    columns.push(CategoricalColumn::with_numeric_labels("V2", ly, y).expect("codes below levels"));
    for (i, (codes, &l)) in zs.into_iter().zip(z_levels).enumerate() {
        columns
            .push(CategoricalColumn::with_numeric_labels(format!("Z{}", i + 1), l, codes).expect("codes below levels"));
    }
    Ok(Dataset::new(columns).expect("equal column lengths"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_header_and_factorizes() {
        let data = read_delimited("a,b\nx,1\ny,1\nx,2\n".as_bytes(), DelimitedOptions::default()).unwrap();
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.levels(0), Some(2));
        assert_eq!(data.levels(1), Some(2));
        assert_eq!(data.column(0).unwrap().codes(), &[0, 1, 0]);
        assert_eq!(data.column(1).unwrap().codes(), &[0, 0, 1]);
        assert_eq!(data.column(1).unwrap().name(), "b");
    }

    #[test]
    fn headerless_names_and_tabs() {
        let opts = DelimitedOptions { delimiter: '\t', has_header: false };
        let data = read_delimited("p\tq\r\np\tr\r\n".as_bytes(), opts).unwrap();
        assert_eq!(data.column_index("V2"), Some(1));
        assert_eq!(data.column(1).unwrap().codes(), &[0, 1]);
    }

    #[test]
    fn read_errors() {
        let opts = DelimitedOptions::default();
        assert!(matches!(read_delimited("".as_bytes(), opts), Err(ReadError::Empty)));
        assert!(matches!(read_delimited("a,b\n".as_bytes(), opts), Err(ReadError::Empty)));
        assert!(matches!(
            read_delimited("a,b\n1,2\n1\n".as_bytes(), opts),
            Err(ReadError::Ragged { line: 3, expected: 2, found: 1 })
        ));
        assert!(matches!(
            read_delimited("a,b\n1,\n".as_bytes(), opts),
            Err(ReadError::MissingField { line: 2, column: 2 })
        ));
    }

    #[test]
    fn unlabeled_columns_write_codes() {
        let data = Dataset::new(vec![
            CategoricalColumn::from_codes("a", vec![1, 0]).unwrap(),
            CategoricalColumn::factorize("b", ["u", "v"]),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_delimited(&data, &mut buf, ',').unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,u\n0,v\n");
    }

    #[test]
    fn generator_is_deterministic() {
        let config = GenConfig { n: 500, levels: vec![3, 4, 2], dependence: Dependence::NullCi, seed: 9 };
        assert_eq!(generate(&config).unwrap(), generate(&config).unwrap());
        let other = GenConfig { seed: 10, ..config.clone() };
        assert_ne!(generate(&config).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn generator_config_errors() {
        let mut config = GenConfig { n: 0, levels: vec![3, 4], dependence: Dependence::NullCi, seed: 1 };
        assert_eq!(generate(&config), Err(GenError::EmptySample));
        config.n = 10;
        config.levels = vec![3];
        assert_eq!(generate(&config), Err(GenError::TooFewVariables(1)));
        config.levels = vec![3, 1];
        assert_eq!(generate(&config), Err(GenError::TooFewLevels { index: 1, levels: 1 }));
    }

    #[test]
    fn generated_levels_match_config() {
        let config = GenConfig { n: 1600, levels: vec![3, 4, 2, 4, 4], dependence: Dependence::Dependent, seed: 3 };
        let data = generate(&config).unwrap();
        let names: Vec<&str> = data.columns().iter().map(|c| c.name()).collect();
        assert_eq!(names, ["V1", "V2", "Z1", "Z2", "Z3"]);
        for (col, &l) in data.columns().iter().zip(&config.levels) {
            assert_eq!(col.levels(), l);
            let used: std::collections::BTreeSet<_> = col.codes().iter().collect();
            assert_eq!(used.len(), l);
        }
    }
}
