//! Marginal dip-test screening.
//!
//! Every feature's marginal is dip-tested at a common level `alpha_tilde`; the
//! features whose unimodality is rejected form the selected set. With the
//! default [`Correction::Joint`], `alpha_tilde = alpha / (n d)`, which bounds
//! the chance of any false selection among unimodal features by `alpha / n`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{CriticalValueTable, MIN_TEST_N};
use crate::data::Dataset;
use crate::dip::{dip_sorted, DipWorkspace};
use crate::error::{Error, Result};

/// How the per-feature level is derived from `alpha`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    /// `alpha / (n d)`, written `paper` in configs and on the command line.
    #[default]
    #[serde(rename = "paper")]
    Joint,
    /// `alpha` for every feature, independent of `n` and `d`.
    PerFeature,
}

impl Correction {
    pub fn level(self, alpha: f64, n: usize, d: usize) -> f64 {
        match self {
            Correction::Joint => alpha / (n as f64 * d as f64),
            Correction::PerFeature => alpha,
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::Joint => "paper",
            Correction::PerFeature => "per-feature",
        })
    }
}

impl FromStr for Correction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Correction::Joint),
            "per-feature" => Ok(Correction::PerFeature),
            other => Err(Error::input(format!(
                "unknown correction {other:?} (expected paper or per-feature)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureDiagnostic {
    pub feature: usize,
    pub dip: f64,
    pub critical: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Rejected features, ascending, 0-based.
    pub selected: Vec<usize>,
    pub per_feature: Vec<FeatureDiagnostic>,
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub correction: Correction,
    pub n: usize,
    pub d: usize,
}

impl SelectionResult {
    /// Writes `feature,dip,critical,reject`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for row in &self.per_feature {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn screen_features(
    data: &Dataset,
    alpha: f64,
    correction: Correction,
    table: &CriticalValueTable,
) -> Result<SelectionResult> {
    let (n, d) = (data.n(), data.d());
    if n < MIN_TEST_N {
        return Err(Error::input(format!(
            "screening needs at least {MIN_TEST_N} observations, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::input("screening needs at least one feature"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let alpha_tilde = correction.level(alpha, n, d);
    let critical = table.get(n, alpha_tilde)?;

    let per_feature: Vec<FeatureDiagnostic> = (0..d)
        .into_par_iter()
        .map_init(DipWorkspace::new, |ws, j| {
            let mut column = data.feature(j).to_vec();
            column.sort_by(f64::total_cmp);
            let dip = dip_sorted(&column, ws).statistic;
            FeatureDiagnostic {
                feature: j,
                dip,
                critical,
                reject: dip > critical,
            }
        })
        .collect();

    let selected = per_feature
        .iter()
        .filter(|f| f.reject)
        .map(|f| f.feature)
        .collect();
    Ok(SelectionResult {
        selected,
        per_feature,
        alpha,
        alpha_tilde,
        correction,
        n,
        d,
    })
}

/// The slowly increasing factor `c_n` in the detectability threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlowRate {
    LogN,
    LogLogN,
}

/// `sqrt(2 c_n log(2 n d) / n)`: a feature whose population dip exceeds this
/// is detectable by the screen.
pub fn signature_threshold(n: usize, d: usize, rate: SlowRate) -> Result<f64> {
    if n < 2 || d < 1 {
        return Err(Error::input(format!(
            "threshold needs n >= 2 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let nf = n as f64;
    let c_n = match rate {
        SlowRate::LogN => nf.ln(),
        SlowRate::LogLogN => nf.ln().ln(),
    };
    if c_n <= 0.0 {
        return Err(Error::input(format!("log log n is not positive for n = {n}")));
    }
    Ok((2.0 * c_n * (2.0 * nf * d as f64).ln() / nf).sqrt())
}
