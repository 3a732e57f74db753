//! Samplers for the three max-domains, outlier injection and the Monte Carlo
//! harness.
//!
//! Every replication `r` of a study draws from its own ChaCha stream
//! `(master_seed, r)`, so the metrics do not depend on the order in which
//! replications run or on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution as _, LogNormal, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dast::{detect, DastConfig};
use crate::error::{Error, Result};
use crate::estimators::generalized_hill;
use crate::sample::{ingest, OrderedSample};

/// Sampling models. All parameters must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    /// `|T|` for a Student t with `nu` degrees of freedom.
    StudentT {
        nu: f64,
    },
    /// Survival `(eta / (eta + x^tau))^lambda`.
    Burr {
        eta: f64,
        lambda: f64,
        tau: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Survival `exp(-lambda x^tau)`.
    Weibull {
        lambda: f64,
        tau: f64,
    },
    /// Beta on `(0, 1)`; right endpoint 1.
    Beta {
        p: f64,
        q: f64,
    },
    /// `endpoint - 1/W` with `W ~ Burr(eta, lambda, tau)`.
    ReverseBurr {
        eta: f64,
        lambda: f64,
        tau: f64,
        endpoint: f64,
    },
    /// Survival `x^-alpha` on `x >= 1`.
    Pareto {
        alpha: f64,
    },
}

impl Distribution {
    pub fn true_xi(&self) -> f64 {
        match *self {
            Distribution::StudentT { nu } => 1.0 / nu,
            Distribution::Burr { lambda, tau, .. } => 1.0 / (lambda * tau),
            Distribution::Lognormal { .. }
            | Distribution::Normal { .. }
            | Distribution::Weibull { .. } => 0.0,
            Distribution::Beta { q, .. } => -1.0 / q,
            Distribution::ReverseBurr { lambda, tau, .. } => -1.0 / (lambda * tau),
            Distribution::Pareto { alpha } => 1.0 / alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: Vec<(&str, f64)> = match *self {
            Distribution::StudentT { nu } => vec![("nu", nu)],
            Distribution::Burr { eta, lambda, tau } => {
                vec![("eta", eta), ("lambda", lambda), ("tau", tau)]
            }
            Distribution::Lognormal { sigma, .. } | Distribution::Normal { sigma, .. } => {
                vec![("sigma", sigma)]
            }
            Distribution::Weibull { lambda, tau } => vec![("lambda", lambda), ("tau", tau)],
            Distribution::Beta { p, q } => vec![("p", p), ("q", q)],
            Distribution::ReverseBurr {
                eta, lambda, tau, ..
            } => {
                vec![("eta", eta), ("lambda", lambda), ("tau", tau)]
            }
            Distribution::Pareto { alpha } => vec![("alpha", alpha)],
        };
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::argument(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        let location = match *self {
            Distribution::Lognormal { mu, .. } | Distribution::Normal { mu, .. } => mu,
            Distribution::ReverseBurr { endpoint, .. } => endpoint,
            _ => 0.0,
        };
        if !location.is_finite() {
            return Err(Error::argument(format!(
                "location must be finite, got {location}"
            )));
        }
        Ok(())
    }

    /// One draw. Assumes [`validate`](Self::validate) passed.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 - u lies in (0, 1]
        let mut uniform = || 1.0 - rng.random::<f64>();
        match *self {
            Distribution::StudentT { nu } => StudentT::new(nu).unwrap().sample(rng).abs(),
            Distribution::Burr { eta, lambda, tau } => burr_quantile(uniform(), eta, lambda, tau),
            Distribution::Lognormal { mu, sigma } => LogNormal::new(mu, sigma).unwrap().sample(rng),
            Distribution::Normal { mu, sigma } => Normal::new(mu, sigma).unwrap().sample(rng),
            Distribution::Weibull { lambda, tau } => (-uniform().ln() / lambda).powf(1.0 / tau),
            Distribution::Beta { p, q } => Beta::new(p, q).unwrap().sample(rng),
            Distribution::ReverseBurr {
                eta,
                lambda,
                tau,
                endpoint,
            } => endpoint - 1.0 / burr_quantile(uniform(), eta, lambda, tau),
            Distribution::Pareto { alpha } => uniform().powf(-1.0 / alpha),
        }
    }
}

/// Inverse survival function of the Burr law at `u`.
fn burr_quantile(u: f64, eta: f64, lambda: f64, tau: f64) -> f64 {
    (eta * (u.powf(-1.0 / lambda) - 1.0)).powf(1.0 / tau)
}

fn draw_values<R: Rng>(dist: &Distribution, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.draw(rng)).collect()
}

/// `n` i.i.d. draws from `dist`, sorted.
pub fn sample(dist: &Distribution, n: usize, seed: u64) -> Result<OrderedSample> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OrderedSample::from_values(draw_values(dist, n, &mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Injection {
    /// `X <- A (X / A)^l` around the anchor `A = X_{n-k0,n}`.
    Exponentiated { l: f64 },
    /// `X <- A + c (X - A)`.
    Scaled { c: f64 },
}

impl Injection {
    pub fn intensity(&self) -> f64 {
        match *self {
            Injection::Exponentiated { l } => l,
            Injection::Scaled { c } => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub kind: Injection,
    /// Number of top order statistics perturbed.
    pub k0: usize,
}

/// Perturbs the top `k0` order statistics. Unit intensity returns the sample
/// unchanged.
pub fn inject(s: &OrderedSample, spec: &InjectionSpec) -> Result<OrderedSample> {
    let n = s.len();
    let intensity = spec.kind.intensity();
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::argument(format!(
            "intensity must be positive and finite, got {intensity}"
        )));
    }
    if spec.k0 >= n {
        return Err(Error::argument(format!(
            "k0 must be below n = {n}, got {}",
            spec.k0
        )));
    }
    if spec.k0 == 0 || intensity == 1.0 {
        return Ok(s.clone());
    }
    let anchor = s.values()[n - spec.k0 - 1];
    let mut values = s.values().to_vec();
    match spec.kind {
        Injection::Exponentiated { l } => {
            if anchor <= 0.0 {
                let positives = s.values().iter().filter(|&&x| x > 0.0).count();
                return Err(Error::Domain {
                    depth: spec.k0 + 1,
                    value: anchor,
                    max_k: positives.saturating_sub(1),
                });
            }
            for x in &mut values[n - spec.k0..] {
                *x = anchor * (*x / anchor).powf(l);
            }
        }
        Injection::Scaled { c } => {
            for x in &mut values[n - spec.k0..] {
                *x = anchor + c * (*x - anchor);
            }
        }
    }
    s.with_values(values)
}

/// Replications in a cell may fail at most this often before the cell is
/// dropped.
pub const MAX_FAILURE_RATE: f64 = 0.05;

fn replication_rng(master_seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(r);
    rng
}

/// Monte Carlo variance of `GH_k` for one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCell {
    pub k: usize,
    /// `None` when too many replications failed.
    pub variance: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KOptEstimate {
    pub k_opt: usize,
    pub cells: Vec<KCell>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

/// The `k` on `grid` at which `GH_k` has the smallest Monte Carlo variance
/// (smallest `k` on ties). All grid points share the same `reps` samples.
pub fn estimate_k_opt(
    dist: &Distribution,
    n: usize,
    grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<KOptEstimate> {
    dist.validate()?;
    if grid.is_empty() {
        return Err(Error::argument("the k grid is empty"));
    }
    if reps < 2 {
        return Err(Error::argument(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    if let Some(&k) = grid.iter().find(|&&k| k < 2 || k + 2 > n) {
        return Err(Error::argument(format!(
            "grid value {k} outside 2..={} for n = {n}",
            n.saturating_sub(2)
        )));
    }

    let per_rep: Vec<Vec<Option<f64>>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(seed, r);
            let s = OrderedSample::from_values(draw_values(dist, n, &mut rng));
            grid.iter()
                .map(|&k| s.as_ref().ok().and_then(|s| generalized_hill(s, k).ok()))
                .collect()
        })
        .collect();

    let cells: Vec<KCell> = grid
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let ok: Vec<f64> = per_rep.iter().filter_map(|row| row[i]).collect();
            let failures = reps - ok.len();
            let variance = (failures as f64 <= MAX_FAILURE_RATE * reps as f64 && ok.len() >= 2)
                .then(|| mean_sd(&ok).1.powi(2));
            KCell {
                k,
                variance,
                failures,
            }
        })
        .collect();

    let k_opt = cells
        .iter()
        .filter_map(|c| c.variance.map(|v| (c.k, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Study("every grid cell exceeded the failure limit".into()))?;
    Ok(KOptEstimate { k_opt, cells })
}

/// Performance of DAST over a batch of replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMetrics {
    pub reps: usize,
    pub successes: usize,
    pub failures: usize,
    /// Share of successful replications with at least one outlier flagged.
    pub type1_rate: f64,
    pub mean_k0: f64,
    pub sd_k0: f64,
    /// `histogram[m]` counts successful replications with `m` outliers.
    pub histogram: Vec<usize>,
    /// Message of the first failed replication, if any.
    pub first_failure: Option<String>,
}

fn replicate(
    dist: &Distribution,
    injection: Option<&InjectionSpec>,
    cfg: &DastConfig,
    n: usize,
    master_seed: u64,
    r: u64,
) -> Result<usize> {
    let mut rng = replication_rng(master_seed, r);
    let raw = draw_values(dist, n, &mut rng);
    let dither_seed: u64 = rng.random();
    let mut s = if cfg.dither_halfwidth > 0.0 {
        ingest(&raw, cfg.dither_halfwidth, dither_seed)?
    } else {
        OrderedSample::from_values(raw)?
    };
    if let Some(spec) = injection {
        s = inject(&s, spec)?;
    }
    Ok(detect(&s, cfg)?.k0_stage1)
}

/// Runs `reps` replications of sample, optional injection and detection.
pub fn run_study(
    dist: &Distribution,
    injection: Option<&InjectionSpec>,
    cfg: &DastConfig,
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<StudyMetrics> {
    dist.validate()?;
    if reps == 0 {
        return Err(Error::argument("need at least one replication"));
    }
    cfg.validate(n)?;

    let outcomes: Vec<Result<usize>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| replicate(dist, injection, cfg, n, master_seed, r))
        .collect();

    let counts: Vec<usize> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().ok().copied())
        .collect();
    let first_failure = outcomes
        .iter()
        .find_map(|o| o.as_ref().err().map(|e| e.to_string()));
    if counts.is_empty() {
        return Err(Error::Study(format!(
            "all {reps} replications failed; first: {}",
            first_failure.unwrap_or_default()
        )));
    }
    let mut histogram = vec![0; counts.iter().max().unwrap() + 1];
    for &m in &counts {
        histogram[m] += 1;
    }
    let as_f64: Vec<f64> = counts.iter().map(|&m| m as f64).collect();
    let (mean_k0, sd_k0) = mean_sd(&as_f64);
    Ok(StudyMetrics {
        reps,
        successes: counts.len(),
        failures: reps - counts.len(),
        type1_rate: counts.iter().filter(|&&m| m > 0).count() as f64 / counts.len() as f64,
        mean_k0,
        sd_k0,
        histogram,
        first_failure,
    })
}
