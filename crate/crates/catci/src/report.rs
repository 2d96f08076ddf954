//! JSON / JSONL / TSV rendering of test results.
//!
//! JSON carries every real at full precision. TSV prints statistics and
//! log p-values with 6 decimals and the linear p-value in scientific notation
//! with 6 significant decimals.

use catci_core::{Dataset, TestResult, TestSpec};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub x: String,
    pub y: String,
    pub cs: Vec<String>,
    pub g2: f64,
    pub chi2: f64,
    pub dof: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof_adjusted: Option<u64>,
    pub log_p_g2: f64,
    pub log_p_chi2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub empty_strata: u64,
    pub method: &'static str,
}

impl ResultRow {
    pub fn new(data: &Dataset, spec: &TestSpec, result: &TestResult) -> Self {
        let name = |i: usize| data.column(i).map_or_else(|| i.to_string(), |c| c.name().to_string());
        Self {
            x: name(spec.x),
            y: name(spec.y),
            cs: spec.cs.iter().map(|&c| name(c)).collect(),
            g2: result.g2,
            chi2: result.chi2,
            dof: result.dof,
            dof_adjusted: Some(result.dof_adjusted),
            log_p_g2: result.log_p_g2,
            log_p_chi2: result.log_p_chi2,
            p: None,
            empty_strata: result.empty_strata,
            method: result.method.as_str(),
        }
    }

    pub fn with_p(mut self, result: &TestResult) -> Self {
        self.p = Some(result.p_value());
        self
    }

    pub fn without_adjusted(mut self) -> Self {
        self.dof_adjusted = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn tsv_header(&self) -> String {
        let mut cols = vec!["x", "y", "cs", "g2", "chi2", "dof"];
        if self.dof_adjusted.is_some() {
            cols.push("dof_adjusted");
        }
        cols.extend(["log_p_g2", "log_p_chi2"]);
        if self.p.is_some() {
            cols.push("p");
        }
        cols.extend(["empty_strata", "method"]);
        cols.join("\t")
    }

    pub fn to_tsv(&self) -> String {
        let mut f = vec![
            self.x.clone(),
            self.y.clone(),
            self.cs.join(","),
            format!("{:.6}", self.g2),
            format!("{:.6}", self.chi2),
            self.dof.to_string(),
        ];
        if let Some(a) = self.dof_adjusted {
            f.push(a.to_string());
        }
        f.push(format!("{:.6}", self.log_p_g2));
        f.push(format!("{:.6}", self.log_p_chi2));
        if let Some(p) = self.p {
            f.push(format!("{p:.6e}"));
        }
        f.push(self.empty_strata.to_string());
        f.push(self.method.to_string());
        f.join("\t")
    }
}
