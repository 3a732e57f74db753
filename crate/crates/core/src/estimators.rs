//! Tail-index estimators built on the log-spacings of the top order
//! statistics, plus the coordinates of the QQ and diagnostic plots.
//!
//! All formulas use the 1-based depth notation: `X_{n-j+1,n}` is the j-th
//! largest value, read through [`OrderedSample::top`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::OrderedSample;
use crate::sum::{sum, CompensatedSum};

/// Weighted log-spacings `V_j = j log(X_{n-j+1,n} / X_{n-j,n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpacings {
    /// `v[j - 1]` holds `V_j`.
    pub v: Vec<f64>,
}

impl LogSpacings {
    pub fn kmax(&self) -> usize {
        self.v.len()
    }

    /// `V_j` for `1 <= j <= kmax`.
    pub fn get(&self, j: usize) -> f64 {
        self.v[j - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Hill,
    GeneralizedHill,
}

/// An estimator evaluated over a range of `k` at a fixed trimming level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillPath {
    pub kind: EstimatorKind,
    pub k0: usize,
    /// `values[i]` is the estimate at `k = k0 + 1 + i`.
    pub values: Vec<f64>,
}

impl HillPath {
    pub fn at(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.k0 + 1)
            .and_then(|i| self.values.get(i).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QqKind {
    Exponential,
    Pareto,
    Generalized,
}

/// `GH_{k0,k}` for `k0 = 0..=k0_max` at one value of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub k: usize,
    /// `values[k0]` holds `GH_{k0,k}`.
    pub values: Vec<f64>,
}

fn positive_count(s: &OrderedSample) -> usize {
    let v = s.values();
    v.len() - v.partition_point(|&x| x <= 0.0)
}

/// Every order statistic down to depth `deepest` must be positive.
fn require_positive(s: &OrderedSample, deepest: usize) -> Result<()> {
    let value = s.top(deepest);
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            depth: deepest,
            value,
            max_k: positive_count(s).saturating_sub(1),
        })
    }
}

fn check_k(s: &OrderedSample, k: usize, max: usize, name: &str) -> Result<()> {
    if k == 0 || k > max {
        return Err(Error::argument(format!(
            "{name} must lie in 1..={max} for n = {}, got {k}",
            s.len()
        )));
    }
    Ok(())
}

fn check_trim(k0: usize, k: usize) -> Result<()> {
    if k0 >= k {
        return Err(Error::argument(format!(
            "trimming level k0 = {k0} must be smaller than k = {k}"
        )));
    }
    Ok(())
}

pub fn log_spacings(s: &OrderedSample, kmax: usize) -> Result<LogSpacings> {
    check_k(s, kmax, s.len() - 1, "kmax")?;
    require_positive(s, kmax + 1)?;
    let v = (1..=kmax)
        .map(|j| j as f64 * (s.top(j) / s.top(j + 1)).ln())
        .collect();
    Ok(LogSpacings { v })
}

/// Hill estimator `H_k`.
pub fn hill(s: &OrderedSample, k: usize) -> Result<f64> {
    trimmed_hill(s, 0, k)
}

/// Trimmed Hill statistic `H_{k0,k}`, the mean of `V_{k0+1}..V_k`, computed
/// in its log-quotient form.
pub fn trimmed_hill(s: &OrderedSample, k0: usize, k: usize) -> Result<f64> {
    check_k(s, k, s.len() - 1, "k")?;
    check_trim(k0, k)?;
    require_positive(s, k + 1)?;
    let m = (k - k0) as f64;
    let log_anchor = s.top(k + 1).ln();
    let mut acc = CompensatedSum::new();
    acc.add(k0 as f64 * (s.top(k0 + 1).ln() - log_anchor));
    for i in k0 + 1..=k {
        acc.add(s.top(i).ln() - log_anchor);
    }
    Ok(acc.value() / m)
}

/// Hill-type estimator on the observations `X_{n-j,n}..X_{n-k0,n}`:
/// `(1/(j-k0)) sum_{i=k0+1..j} log X_{n-i+1,n} - log X_{n-j,n}`.
pub fn trimmed_hill_inner(s: &OrderedSample, k0: usize, j: usize) -> Result<f64> {
    check_k(s, j, s.len() - 1, "j")?;
    check_trim(k0, j)?;
    require_positive(s, j + 1)?;
    let log_anchor = s.top(j + 1).ln();
    let mean = sum((k0 + 1..=j).map(|i| s.top(i).ln() - log_anchor)) / (j - k0) as f64;
    Ok(mean)
}

/// `H_{k0,j}` for `j = k0+1..=k+1`, by a running sum over the top block.
fn inner_hill_run(s: &OrderedSample, k0: usize, k: usize) -> Result<Vec<f64>> {
    let mut logs = CompensatedSum::new();
    let mut out = Vec::with_capacity(k + 1 - k0);
    for j in k0 + 1..=k + 1 {
        logs.add(s.top(j).ln());
        let h = logs.value() / (j - k0) as f64 - s.top(j + 1).ln();
        if h.is_nan() || h <= 0.0 {
            return Err(Error::Tie { depth: j + 1 });
        }
        out.push(h);
    }
    Ok(out)
}

/// Generalized Hill estimator `GH_k`, consistent for tail indices of any sign.
pub fn generalized_hill(s: &OrderedSample, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::argument(format!(
            "generalized Hill needs k >= 2, got {k}"
        )));
    }
    trimmed_generalized_hill(s, 0, k)
}

/// Trimmed generalized Hill estimator `GH_{k0,k}`.
pub fn trimmed_generalized_hill(s: &OrderedSample, k0: usize, k: usize) -> Result<f64> {
    check_k(s, k, s.len().saturating_sub(2), "k")?;
    check_trim(k0, k)?;
    require_positive(s, k + 2)?;
    let h = inner_hill_run(s, k0, k)?;
    // h[j - k0 - 1] = H_{k0,j}
    let mean = sum((k0 + 1..=k).map(|j| s.top(j).ln() + h[j - k0 - 1].ln())) / (k - k0) as f64;
    Ok(mean - s.top(k + 1).ln() - h[k - k0].ln())
}

/// Evaluates an estimator for every `k` in `k0+1..=kmax`.
pub fn hill_path(
    s: &OrderedSample,
    kind: EstimatorKind,
    k0: usize,
    kmax: usize,
) -> Result<HillPath> {
    let values = (k0 + 1..=kmax)
        .map(|k| match kind {
            EstimatorKind::Hill => trimmed_hill(s, k0, k),
            EstimatorKind::GeneralizedHill => trimmed_generalized_hill(s, k0, k),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HillPath { kind, k0, values })
}

/// QQ-plot coordinates, ordered from the largest observation down.
///
/// - Exponential: `(-log(j/(n+1)), X_{n-j+1,n})`, `j = 1..n`
/// - Pareto: `(-log(j/(n+1)), log X_{n-j+1,n})`, `j = 1..n`
/// - Generalized: `(log((j+1)/(n+1)), log(X_{n-j+1,n} H_j))`, `j = 1..n-1`
pub fn qq_points(s: &OrderedSample, kind: QqKind) -> Result<Vec<(f64, f64)>> {
    let n = s.len();
    let np1 = (n + 1) as f64;
    match kind {
        QqKind::Exponential => Ok((1..=n)
            .map(|j| (-(j as f64 / np1).ln(), s.top(j)))
            .collect()),
        QqKind::Pareto => {
            require_positive(s, n)?;
            Ok((1..=n)
                .map(|j| (-(j as f64 / np1).ln(), s.top(j).ln()))
                .collect())
        }
        QqKind::Generalized => {
            require_positive(s, n)?;
            let h = inner_hill_run(s, 0, n - 2)?;
            Ok((1..n)
                .map(|j| (((j + 1) as f64 / np1).ln(), (s.top(j) * h[j - 1]).ln()))
                .collect())
        }
    }
}

/// Data for the diagnostic plot of `GH_{k0,k}` against `k0`.
pub fn diagnostic_k0_series(
    s: &OrderedSample,
    k_values: &[usize],
    k0_max: usize,
) -> Result<Vec<DiagnosticSeries>> {
    k_values
        .iter()
        .map(|&k| {
            let values = (0..=k0_max)
                .map(|k0| {
                    trimmed_generalized_hill(s, k0, k).map_err(|e| Error::Cell {
                        k,
                        k0,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DiagnosticSeries { k, values })
        })
        .collect()
}
