//! Chi-squared upper tail on the log scale.
//!
//! `ln P(χ²_k > s) = ln Q(k/2, s/2)` where `Q` is the regularized upper
//! incomplete gamma function. `Q` is evaluated by the power series of the
//! lower function when `x < a + 1` and by a Lentz continued fraction
//! otherwise; both branches stay in log space so that tails far below the
//! smallest positive `f64` are still representable.

use crate::{Error, Result};

const EPS: f64 = 1e-17;
const TINY: f64 = 1e-300;
const MAX_TERMS: usize = 100_000;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Natural log of the upper tail probability of a chi-squared variable with
/// `dof` degrees of freedom at `stat`.
///
/// `dof = 0` is rejected with [`Error::ZeroDof`]; callers treat it as a
/// degenerate test.
pub fn log_sf_chisq(stat: f64, dof: u64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::ZeroDof);
    }
    if stat.is_nan() || stat < 0.0 {
        return Err(Error::InvalidStatistic);
    }
    if stat == 0.0 {
        return Ok(0.0);
    }
    if stat == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if dof == 2 {
        return Ok(-stat / 2.0);
    }
    Ok(ln_gamma_q(dof as f64 / 2.0, stat / 2.0))
}

/// `ln Q(a, x)` for `a > 0`, `x > 0`.
fn ln_gamma_q(a: f64, x: f64) -> f64 {
    let ln_prefix = a * libm::log(x) - x - ln_gamma(a);
    if x < a + 1.0 {
        // P(a, x) = x^a e^{-x} / Γ(a) · Σ_n x^n / (a (a+1) .. (a+n))
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_TERMS {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        ln_one_minus_exp(ln_prefix + libm::log(sum))
    } else {
        // Q(a, x) = x^a e^{-x} / Γ(a) · 1 / (x + 1 - a - 1·(1-a) / (x + 3 - a - ...))
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_TERMS {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        ln_prefix + libm::log(h)
    }
}

/// `ln(1 - e^v)` for `v <= 0`.
fn ln_one_minus_exp(v: f64) -> f64 {
    if v >= 0.0 {
        f64::NEG_INFINITY
    } else if v > -core::f64::consts::LN_2 {
        libm::log(-libm::expm1(v))
    } else {
        libm::log1p(-libm::exp(v))
    }
}

/// Chi-squared reference distribution of a test with `dof >= 1` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChiSquaredDist {
    dof: u64,
}

impl ChiSquaredDist {
    pub fn new(dof: u64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::ZeroDof);
        }
        Ok(Self { dof })
    }

    pub fn dof(&self) -> u64 {
        self.dof
    }

    pub fn log_sf(&self, stat: f64) -> Result<f64> {
        log_sf_chisq(stat, self.dof)
    }

    pub fn sf(&self, stat: f64) -> Result<f64> {
        self.log_sf(stat).map(libm::exp)
    }
}
