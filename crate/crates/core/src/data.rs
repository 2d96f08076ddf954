//! Integer-coded categorical datasets and test specifications.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// A 0-based level code.
pub type Code = u32;

/// One categorical variable: a vector of level codes plus optional labels.
///
/// Codes are contiguous and 0-based. Without labels the level count is
/// `max(code) + 1`; with labels it is `labels.len()`, which allows levels that
/// never occur in the data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalColumn {
    name: String,
    levels: usize,
    codes: Vec<Code>,
    labels: Option<Vec<String>>,
}

impl CategoricalColumn {
    /// Column from raw codes, with the level count inferred from the largest code.
    pub fn from_codes(name: impl Into<String>, codes: Vec<Code>) -> Result<Self> {
        let levels = codes.iter().max().map_or(1, |&m| m as usize + 1);
        Ok(Self { name: name.into(), levels, codes, labels: None })
    }

    /// Column with explicit labels; `labels[c]` names code `c`.
    pub fn with_labels(name: impl Into<String>, codes: Vec<Code>, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if labels.is_empty() {
            return Err(Error::InvalidColumn { column: name, reason: "at least one level required" });
        }
        let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidColumn { column: name, reason: "duplicate level labels" });
        }
        let levels = labels.len();
        if let Some((row, &code)) = codes.iter().enumerate().find(|(_, &c)| c as usize >= levels) {
            return Err(Error::CodeOutOfRange { column: name, row, code, levels });
        }
        Ok(Self { name, levels, codes, labels: Some(labels) })
    }

    /// Column with `levels` levels labelled `"0"`, `"1"`, ...
    pub fn with_numeric_labels(name: impl Into<String>, levels: usize, codes: Vec<Code>) -> Result<Self> {
        let labels = (0..levels).map(|l| l.to_string()).collect();
        Self::with_labels(name, codes, labels)
    }

    /// Encodes tokens as codes in order of first appearance.
    pub fn factorize<'a, I>(name: impl Into<String>, tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut index: BTreeMap<&'a str, Code> = BTreeMap::new();
        let mut labels: Vec<String> = Vec::new();
        let codes = tokens
            .into_iter()
            .map(|tok| {
                *index.entry(tok).or_insert_with(|| {
                    labels.push(tok.to_string());
                    (labels.len() - 1) as Code
                })
            })
            .collect();
        let levels = labels.len().max(1);
        let labels = if labels.is_empty() { None } else { Some(labels) };
        Self { name: name.into(), levels, codes, labels }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn codes(&self) -> &[Code] {
        &self.codes
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of `code`, if labels are present.
    pub fn label(&self, code: Code) -> Option<&str> {
        self.labels.as_ref()?.get(code as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Columnar table of categorical observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n_rows: usize,
    columns: Vec<CategoricalColumn>,
}

impl Dataset {
    pub fn new(columns: Vec<CategoricalColumn>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, CategoricalColumn::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::RaggedColumn { column: bad.name.clone(), expected: n_rows, found: bad.len() });
        }
        Ok(Self { n_rows, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[CategoricalColumn] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> Option<&CategoricalColumn> {
        self.columns.get(index)
    }

    /// Index of the first column called `name`.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn levels(&self, index: usize) -> Option<usize> {
        self.columns.get(index).map(CategoricalColumn::levels)
    }
}

/// Which variables to test: `x ⊥ y | cs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestSpec {
    pub x: usize,
    pub y: usize,
    pub cs: Vec<usize>,
}

impl TestSpec {
    pub fn new(x: usize, y: usize, cs: Vec<usize>) -> Self {
        Self { x, y, cs }
    }

    pub fn unconditional(x: usize, y: usize) -> Self {
        Self { x, y, cs: Vec::new() }
    }

    /// Table layout `(x, y, z_1, .., z_k)`.
    pub fn variables(&self) -> Vec<usize> {
        let mut vars = Vec::with_capacity(self.cs.len() + 2);
        vars.push(self.x);
        vars.push(self.y);
        vars.extend_from_slice(&self.cs);
        vars
    }

    /// Checks that every index is below `n_cols` and that all indices are distinct.
    pub fn validate(&self, n_cols: usize) -> Result<()> {
        check_variables(&self.variables(), n_cols)
    }
}

/// Checks `spec` against the columns of `data`.
pub fn validate_spec(spec: &TestSpec, data: &Dataset) -> Result<()> {
    spec.validate(data.n_cols())
}

pub(crate) fn check_variables(vars: &[usize], n_cols: usize) -> Result<()> {
    if let Some(&index) = vars.iter().find(|&&v| v >= n_cols) {
        return Err(Error::IndexOutOfRange { index, columns: n_cols });
    }
    let mut seen = BTreeSet::new();
    for &v in vars {
        if !seen.insert(v) {
            return Err(Error::OverlappingIndex { index: v });
        }
    }
    Ok(())
}
