//! Domain adapted sequential testing (DAST) and the tail-adjusted boxplot.
//!
//! The scan works in terms of *depth*: flagging depth `j` means the `j`
//! largest observations separate from the rest of the tail. The evidence for
//! depth `j` is the test on the spacing just below the j-th largest
//! observation, i.e. `U_{j-1,k}` judged at level `alpha_{j-1}`, so the
//! levels `alpha_0 > alpha_1 > ...` are spent from the maximum downwards and
//! the whole scan has family-wise level `q` under the no-outlier hypothesis.
//!
//! A run has two stages. A crude tail index `GH_{k0*,k*}` drives a first
//! scan whose result `k0^(0)` fixes the trimming of the revised index
//! `GH_{k0^(0),k*}`; the second scan under that index yields the final
//! number of outliers and the significant depths from which the outlier
//! regimes are cut.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::trimmed_generalized_hill;
use crate::outlier_test::{
    alpha_schedule, test_statistic, AlphaSchedule, EvidenceSide, TestStatistic,
};
use crate::sample::{
    quartiles, transform_lower, LowerTransform, OrderedSample, Provenance, QuartileSummary,
};

/// Which tails a run examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Upper,
    Lower,
    #[default]
    Both,
}

/// Tuning of a DAST run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DastConfig {
    /// Number of top order statistics entering the test statistics.
    pub k: usize,
    /// Number of top order statistics entering the tail-index estimates.
    pub k_star: usize,
    /// Largest number of outliers considered.
    pub k0_star: usize,
    /// Upper bound on the number of outlier regimes.
    pub regimes_max: usize,
    pub a: f64,
    pub q: f64,
    /// Known tail index; replaces both estimated indices when set.
    pub xi_override: Option<f64>,
    pub tail: Tail,
    pub lower_transform: LowerTransform,
    pub dither_halfwidth: f64,
    pub seed: u64,
}

/// Default multiplier and exponent of the `k0* = c (k*)^p` rule.
pub const K0_STAR_FACTOR: f64 = 7.0;
pub const K0_STAR_EXPONENT: f64 = 1.0 / 3.0;

/// `floor(c (k*)^p)`, clamped to `k - 2` and below `k*`.
pub fn default_k0_star(k_star: usize, k: usize, factor: f64, exponent: f64) -> usize {
    // the epsilon keeps exact cubes such as 7 * 1000^(1/3) = 70 from rounding down
    let raw = (factor * (k_star as f64).powf(exponent) + 1e-9)
        .floor()
        .max(0.0) as usize;
    raw.min(k.saturating_sub(2)).min(k_star.saturating_sub(1))
}

impl DastConfig {
    /// Defaults: `a = 1.2`, `q = 0.05`, one regime, `k0* = 7 (k*)^{1/3}`.
    pub fn new(k: usize, k_star: usize) -> Self {
        Self {
            k,
            k_star,
            k0_star: default_k0_star(k_star, k, K0_STAR_FACTOR, K0_STAR_EXPONENT),
            regimes_max: 1,
            a: 1.2,
            q: 0.05,
            xi_override: None,
            tail: Tail::Both,
            lower_transform: LowerTransform::Auto,
            dither_halfwidth: 0.0,
            seed: 0,
        }
    }

    pub fn with_k0_star(mut self, k0_star: usize) -> Self {
        self.k0_star = k0_star;
        self
    }

    pub fn with_regimes(mut self, regimes_max: usize) -> Self {
        self.regimes_max = regimes_max;
        self
    }

    pub fn with_xi(mut self, xi: Option<f64>) -> Self {
        self.xi_override = xi;
        self
    }

    /// Checks the configuration against a sample of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::argument(msg));
        if self.k < 2 || self.k + 2 > n {
            return fail(format!(
                "k must lie in 2..={} for n = {n}, got {}",
                n.saturating_sub(2),
                self.k
            ));
        }
        if self.k_star < 2 || self.k_star + 2 > n {
            return fail(format!(
                "k* must lie in 2..={} for n = {n}, got {}",
                n.saturating_sub(2),
                self.k_star
            ));
        }
        if self.k0_star + 2 > self.k {
            return fail(format!(
                "k0* must not exceed k - 2 = {}, got {}",
                self.k - 2,
                self.k0_star
            ));
        }
        if self.k0_star >= self.k_star {
            return fail(format!(
                "k0* must be smaller than k* = {}, got {}",
                self.k_star, self.k0_star
            ));
        }
        if self.regimes_max == 0 {
            return fail("the number of regimes must be at least 1".into());
        }
        if !(self.a > 1.0 && self.a.is_finite()) {
            return fail(format!("a must exceed 1, got {}", self.a));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return fail(format!("q must lie in (0, 1), got {}", self.q));
        }
        if let Some(xi) = self.xi_override {
            if !xi.is_finite() {
                return fail(format!("known tail index must be finite, got {xi}"));
            }
        }
        Ok(())
    }
}

/// A block of consecutive extreme observations, as depths `(lo, hi]` counted
/// from the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub lo: usize,
    pub hi: usize,
    /// `U` at depth `hi` under the revised tail index. Large values mean
    /// strong evidence.
    pub score: f64,
    pub side: EvidenceSide,
}

impl Regime {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn contains(&self, depth: usize) -> bool {
        depth > self.lo && depth <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialEstimates {
    /// `GH_{k0*,k*}`, or the known index.
    pub xi_initial: f64,
    pub k0_stage0: usize,
    /// `GH_{k0^(0),k*}`, or the known index.
    pub xi_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DastResult {
    pub xi_initial: f64,
    pub k0_stage0: usize,
    pub xi_hat: f64,
    /// Final number of outliers.
    pub k0_stage1: usize,
    /// Depths `j <= k0_stage1` whose test rejects, ascending.
    pub significant_set: Vec<usize>,
    pub regimes: Vec<Regime>,
    /// `u_trace[j - 1]` is the evidence at depth `j` under `xi_hat`,
    /// `j = 1..=k0*`.
    pub u_trace: Vec<f64>,
    /// `thresholds[j - 1] = 1 - alpha_{j-1}`.
    pub thresholds: Vec<f64>,
    /// Depths at which the `xi < 0` branch saturated to `E = +inf`.
    pub clamped_depths: Vec<usize>,
}

impl DastResult {
    pub fn outlier_count(&self) -> usize {
        self.k0_stage1
    }
}

fn scan(s: &OrderedSample, cfg: &DastConfig, xi: f64) -> Result<Vec<TestStatistic>> {
    (1..=cfg.k0_star)
        .map(|depth| test_statistic(s, depth - 1, cfg.k, xi))
        .collect()
}

fn significant_depths(stats: &[TestStatistic], schedule: &AlphaSchedule) -> Vec<usize> {
    stats
        .iter()
        .enumerate()
        .filter(|(i, st)| st.u > schedule.threshold(*i))
        .map(|(i, _)| i + 1)
        .collect()
}

fn estimate_xi(s: &OrderedSample, cfg: &DastConfig, k0: usize) -> Result<f64> {
    match cfg.xi_override {
        Some(xi) => Ok(xi),
        None => trimmed_generalized_hill(s, k0, cfg.k_star),
    }
}

fn initial_with_schedule(
    s: &OrderedSample,
    cfg: &DastConfig,
    schedule: &AlphaSchedule,
) -> Result<InitialEstimates> {
    let xi_initial =
        estimate_xi(s, cfg, cfg.k0_star).map_err(|e| e.at_stage("initial tail index"))?;
    let stats = scan(s, cfg, xi_initial).map_err(|e| e.at_stage("first scan"))?;
    let k0_stage0 = significant_depths(&stats, schedule)
        .last()
        .copied()
        .unwrap_or(0);
    let xi_hat = estimate_xi(s, cfg, k0_stage0).map_err(|e| e.at_stage("revised tail index"))?;
    Ok(InitialEstimates {
        xi_initial,
        k0_stage0,
        xi_hat,
    })
}

/// First scan and revised tail index.
pub fn initial_estimates(s: &OrderedSample, cfg: &DastConfig) -> Result<InitialEstimates> {
    cfg.validate(s.len())?;
    let schedule = alpha_schedule(cfg.k, cfg.a, cfg.q)?;
    initial_with_schedule(s, cfg, &schedule)
}

/// Cuts `(0, v_last]` at the significant depths into at most `regimes_max`
/// blocks; the last block absorbs the remaining depths.
fn build_regimes(
    significant: &[usize],
    regimes_max: usize,
    stats: &[TestStatistic],
) -> Vec<Regime> {
    let count = significant.len().min(regimes_max);
    if count == 0 {
        return Vec::new();
    }
    let mut bounds: Vec<usize> = Vec::with_capacity(count + 1);
    bounds.push(0);
    bounds.extend_from_slice(&significant[..count - 1]);
    bounds.push(*significant.last().unwrap());
    bounds
        .windows(2)
        .map(|w| {
            let st = &stats[w[1] - 1];
            Regime {
                lo: w[0],
                hi: w[1],
                score: st.u,
                side: st.side,
            }
        })
        .collect()
}

/// Runs the two-stage sequential test on the upper tail of `s`.
pub fn detect(s: &OrderedSample, cfg: &DastConfig) -> Result<DastResult> {
    cfg.validate(s.len())?;
    let schedule = alpha_schedule(cfg.k, cfg.a, cfg.q)?;
    let initial = initial_with_schedule(s, cfg, &schedule)?;
    let stats = scan(s, cfg, initial.xi_hat).map_err(|e| e.at_stage("second scan"))?;

    let significant_set = significant_depths(&stats, &schedule);
    let k0_stage1 = significant_set.last().copied().unwrap_or(0);
    let regimes = build_regimes(&significant_set, cfg.regimes_max, &stats);

    Ok(DastResult {
        xi_initial: initial.xi_initial,
        k0_stage0: initial.k0_stage0,
        xi_hat: initial.xi_hat,
        k0_stage1,
        significant_set,
        regimes,
        u_trace: stats.iter().map(|st| st.u).collect(),
        thresholds: (0..cfg.k0_star).map(|j| schedule.threshold(j)).collect(),
        clamped_depths: stats
            .iter()
            .enumerate()
            .filter(|(_, st)| st.clamped)
            .map(|(i, _)| i + 1)
            .collect(),
    })
}

/// Detection outcome for one tail, expressed on the original sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailOutliers {
    pub result: DastResult,
    /// Most extreme observation that is not an outlier.
    pub whisker: f64,
    /// Sorted positions of the outliers in the analysed sample, ascending.
    pub outliers: Vec<usize>,
    /// Transform applied before detection (lower tail only).
    pub transform: Option<Provenance>,
}

pub fn upper_tail(s: &OrderedSample, cfg: &DastConfig) -> Result<TailOutliers> {
    let result = detect(s, cfg)?;
    let n = s.len();
    let k0 = result.k0_stage1;
    Ok(TailOutliers {
        whisker: s.values()[n - k0 - 1],
        outliers: (n - k0..n).collect(),
        transform: None,
        result,
    })
}

/// Lower-tail detection through [`transform_lower`]; depths count from the
/// minimum of `s`.
pub fn lower_tail(s: &OrderedSample, cfg: &DastConfig) -> Result<TailOutliers> {
    let transformed = transform_lower(s, cfg.lower_transform)?;
    let result = detect(&transformed, cfg)?;
    let k0 = result.k0_stage1;
    Ok(TailOutliers {
        whisker: s.values()[k0],
        outliers: (0..k0).collect(),
        transform: Some(transformed.provenance()),
        result,
    })
}

/// Boxplot whose whiskers stop at the most extreme non-outlying observation
/// of each tail. A failure in one tail does not affect the other.
#[derive(Debug, Clone, PartialEq)]
pub struct TailAdjustedBoxplot {
    pub quartiles: QuartileSummary,
    pub upper: Result<TailOutliers>,
    pub lower: Result<TailOutliers>,
}

pub fn tail_adjusted_boxplot(
    s: &OrderedSample,
    cfg_upper: &DastConfig,
    cfg_lower: &DastConfig,
) -> TailAdjustedBoxplot {
    let (upper, lower) = rayon::join(|| upper_tail(s, cfg_upper), || lower_tail(s, cfg_lower));
    TailAdjustedBoxplot {
        quartiles: quartiles(s),
        upper,
        lower,
    }
}
