//! The JSON document written by `dast analyze`.

use std::collections::BTreeMap;

use dast_core::{
    DastResult, EvidenceSide, OrderedSample, Provenance, QuartileSummary, TailOutliers,
};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub column: String,
    pub n: usize,
    pub dither: f64,
    pub seed: u64,
}

/// An observation, located by its 0-based data row in the input.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Observation {
    pub row: usize,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct Classical {
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub lower: Vec<Observation>,
    pub upper: Vec<Observation>,
}

#[derive(Debug, Serialize)]
pub struct RegimeReport {
    /// Depths `(lo, hi]` counted from the extreme.
    pub lo: usize,
    pub hi: usize,
    /// `U` at depth `hi`; values near 1 are strong evidence.
    pub significance_score: f64,
    pub side: EvidenceSide,
    pub members: Vec<Observation>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailReport {
    Ok {
        transform: Option<Provenance>,
        xi_initial: f64,
        k0_stage0: usize,
        xi_hat: f64,
        outlier_count: usize,
        whisker: Observation,
        outliers: Vec<Observation>,
        regimes: Vec<RegimeReport>,
        significant_set: Vec<usize>,
        u_trace: Vec<f64>,
        thresholds: Vec<f64>,
        clamped_depths: Vec<usize>,
    },
    Error {
        kind: &'static str,
        message: String,
    },
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub input: InputInfo,
    /// Effective settings, replayable as a configuration file.
    pub config: BTreeMap<String, String>,
    pub quartiles: QuartileSummary,
    pub classical: Classical,
    pub upper: Option<TailReport>,
    pub lower: Option<TailReport>,
}

/// Maps sorted positions of the analysed sample back to input rows.
pub struct Locator<'a> {
    pub sample: &'a OrderedSample,
    pub raw: &'a [f64],
}

impl Locator<'_> {
    pub fn at(&self, position: usize) -> Observation {
        let row = self.sample.origin()[position];
        Observation {
            row,
            value: self.raw[row],
        }
    }

    fn position_of_depth(&self, depth: usize, upper: bool) -> usize {
        if upper {
            self.sample.len() - depth
        } else {
            depth - 1
        }
    }

    pub fn tail(
        &self,
        outcome: &Result<TailOutliers, dast_core::Error>,
        upper: bool,
    ) -> TailReport {
        let t = match outcome {
            Ok(t) => t,
            Err(e) => {
                let kind = match CliError::from(e.clone()) {
                    CliError::Input(_) => "input",
                    CliError::Config(_) => "config",
                    CliError::Numeric(_) => "numeric",
                };
                return TailReport::Error {
                    kind,
                    message: e.to_string(),
                };
            }
        };
        let r: &DastResult = &t.result;
        let n = self.sample.len();
        let whisker_pos = if upper {
            n - 1 - r.k0_stage1
        } else {
            r.k0_stage1
        };
        let regimes = r
            .regimes
            .iter()
            .map(|g| RegimeReport {
                lo: g.lo,
                hi: g.hi,
                significance_score: g.score,
                side: g.side,
                members: (g.lo + 1..=g.hi)
                    .map(|d| self.at(self.position_of_depth(d, upper)))
                    .collect(),
            })
            .collect();
        TailReport::Ok {
            transform: t.transform,
            xi_initial: r.xi_initial,
            k0_stage0: r.k0_stage0,
            xi_hat: r.xi_hat,
            outlier_count: r.k0_stage1,
            whisker: self.at(whisker_pos),
            outliers: t.outliers.iter().map(|&p| self.at(p)).collect(),
            regimes,
            significant_set: r.significant_set.clone(),
            u_trace: r.u_trace.clone(),
            thresholds: r.thresholds.clone(),
            clamped_depths: r.clamped_depths.clone(),
        }
    }
}
