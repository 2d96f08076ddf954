//! Conditional independence tests for categorical data.
//!
//! Tests whether two categorical variables `X` and `Y` are independent given a
//! conditioning set `Z = (Z_1, .., Z_k)`, `k >= 0`, using the likelihood-ratio
//! (G²) and Pearson (χ²) statistics. Both statistics are available through two
//! routes that agree to floating-point rounding:
//!
//! - [`Method::ClosedForm`]: expected counts `N_{x+z} N_{+yz} / N_{++z}` computed
//!   slice by slice from the marginals of a single joint tabulation;
//! - [`Method::Ipf`]: a hierarchical Poisson log-linear model with generating
//!   classes `{X} ∪ Z` and `{Y} ∪ Z`, fitted by iterative proportional fitting.
//!   Its deviance is the G² statistic.
//!
//! p-values are reported on the natural-log scale so that screening many
//! tests does not underflow.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, data
//! generation, parallel batch screening and the command-line tool live in the
//! `catci` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;

pub mod citest;
pub mod data;
pub mod loglinear;
pub mod special;
pub mod table;
pub mod tabulate;

pub use citest::{
    chi2_statistic, ci_test, ci_test_table, dof, dof_adjusted, g2_statistic, Method, TestOptions, TestResult,
};
pub use data::{validate_spec, CategoricalColumn, Code, Dataset, TestSpec};
pub use error::{Error, Result};
pub use loglinear::{ci_model, ipf_fit, model_dof, FitResult, IpfOptions, LogLinearModel};
pub use special::{ln_gamma, log_sf_chisq, ChiSquaredDist};
pub use table::{ContingencyTable, DENSE_THRESHOLD};
pub use tabulate::{
    build_table, build_table_with_threshold, expected_ci, slice_marginals, Expected, SliceMarginals, SliceView,
};
