//! The synthetic studies: dip-test power, support recovery, the full method on
//! a 20-dimensional mixture, and the convergence of estimated modes.
//!
//! Each grid cell draws its seed from the master seed and the cell's own
//! parameters, so growing a grid leaves existing cells untouched. Replicate
//! `r` of a cell uses `derive_seed(cell_seed, [r])`.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;

use crate::calibration::{CriticalValueTable, MIN_TEST_N};
use crate::density::{bandwidth_wand, DensityModel};
use crate::dip::dip_statistic;
use crate::error::{Error, Result};
use crate::metrics::{clustering_loss, hausdorff, support_recovery, LossReport};
use crate::modeclust::{find_modes_and_assign, ClusterParams};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineReport};
use crate::rng::derive_seed;
use crate::screening::{screen_features, Correction};
use crate::synth::{true_mode_assignment_with, Builtin, FlowParams};

pub const DEFAULT_REPS: usize = 1000;

/// One aggregated line of a sweep's CSV output.
pub trait SweepRow {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<R> {
    pub rows: Vec<R>,
    pub master_seed: u64,
}

impl<R: SweepRow> SweepResult<R> {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(R::header())?;
        for row in &self.rows {
            wtr.write_record(row.record())?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn rate(count: usize, reps: usize) -> f64 {
    count as f64 / reps as f64
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::input("a sweep needs at least one replicate"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipPowerRow {
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    /// Replicates where unimodality was not rejected.
    pub failures: usize,
}

impl DipPowerRow {
    pub fn false_negative_rate(&self) -> f64 {
        rate(self.failures, self.reps)
    }
}

impl SweepRow for DipPowerRow {
    fn header() -> &'static [&'static str] {
        &["n", "alpha", "reps", "false_negative_rate"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.alpha.to_string(),
            self.reps.to_string(),
            self.false_negative_rate().to_string(),
        ]
    }
}

/// False-negative rate of the dip test on the two-component 1-d mixture.
/// For a given `n` every level is applied to the same samples.
pub fn experiment_dip_power(
    n_grid: &[usize],
    alpha_grid: &[f64],
    reps: usize,
    seed: u64,
    table: &CriticalValueTable,
) -> Result<SweepResult<DipPowerRow>> {
    if n_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::input("dip power grids must be non-empty"));
    }
    check_reps(reps)?;
    if let Some(&n) = n_grid.iter().find(|&&n| n < MIN_TEST_N) {
        return Err(Error::input(format!("sample size {n} is below {MIN_TEST_N}")));
    }
    let spec = Builtin::Bimodal1d.spec()?;
    let mut rows = Vec::with_capacity(n_grid.len() * alpha_grid.len());
    for &n in n_grid {
        table.prefill(n, alpha_grid)?;
        let critical: Vec<f64> = alpha_grid.iter().map(|&a| table.get(n, a)).collect::<Result<_>>()?;
        let cell_seed = derive_seed(seed, &[n as u64]);
        let dips: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let sample = spec.sample(n, derive_seed(cell_seed, &[r as u64]));
                dip_statistic(sample.data.as_slice().expect("standard layout")).map(|d| d.statistic)
            })
            .collect::<Result<_>>()?;
        for (&alpha, &c) in alpha_grid.iter().zip(&critical) {
            rows.push(DipPowerRow {
                n,
                alpha,
                reps,
                failures: dips.iter().filter(|&&d| !(d > c)).count(),
            });
        }
    }
    Ok(SweepResult { rows, master_seed: seed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportRow {
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub reps: usize,
    /// Replicates with `R = S`.
    pub exact: usize,
    /// Replicates with `R ⊆ S`.
    pub subset: usize,
}

impl SupportRow {
    pub fn exact_rate(&self) -> f64 {
        rate(self.exact, self.reps)
    }

    pub fn subset_rate(&self) -> f64 {
        rate(self.subset, self.reps)
    }
}

impl SweepRow for SupportRow {
    fn header() -> &'static [&'static str] {
        &["d", "s", "n", "reps", "exact_rate", "subset_rate"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.s.to_string(),
            self.n.to_string(),
            self.reps.to_string(),
            self.exact_rate().to_string(),
            self.subset_rate().to_string(),
        ]
    }
}

/// Screening on `twocomp(s, d)` samples with the `alpha / (n d)` level.
/// Cells with `s > d` are skipped.
pub fn experiment_support_recovery(
    d_grid: &[usize],
    s_grid: &[usize],
    n_grid: &[usize],
    alpha: f64,
    reps: usize,
    seed: u64,
    table: &CriticalValueTable,
) -> Result<SweepResult<SupportRow>> {
    if d_grid.is_empty() || s_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::input("support recovery grids must be non-empty"));
    }
    check_reps(reps)?;
    let mut rows = Vec::new();
    for &d in d_grid {
        for &s in s_grid.iter().filter(|&&s| s >= 1 && s <= d) {
            let builtin = Builtin::TwoComp { s, d };
            let spec = builtin.spec()?;
            let support = builtin.support();
            for &n in n_grid {
                // simulate the critical value once, outside the parallel loop
                table.get(n, Correction::Joint.level(alpha, n, d))?;
                let cell_seed = derive_seed(seed, &[d as u64, s as u64, n as u64]);
                let outcomes: Vec<(bool, bool)> = (0..reps)
                    .into_par_iter()
                    .map(|r| {
                        let data = spec.sample(n, derive_seed(cell_seed, &[r as u64])).to_dataset()?;
                        let sel = screen_features(&data, alpha, Correction::Joint, table)?;
                        let report = support_recovery(&sel.selected, &support);
                        Ok((report.exact, report.subset))
                    })
                    .collect::<Result<_>>()?;
                rows.push(SupportRow {
                    d,
                    s,
                    n,
                    reps,
                    exact: outcomes.iter().filter(|o| o.0).count(),
                    subset: outcomes.iter().filter(|o| o.1).count(),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::input("no grid cell satisfies 1 <= s <= d"));
    }
    Ok(SweepResult { rows, master_seed: seed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullResult {
    pub report: PipelineReport,
    /// Against the population clustering on the selected coordinates; `None`
    /// when nothing was selected.
    pub loss: Option<LossReport>,
    pub hausdorff: Option<f64>,
    /// Modes of the true density's marginal on the selected coordinates.
    pub true_modes: Option<Array2<f64>>,
    /// Points whose population flow did not converge, left out of the loss.
    pub unlabeled: usize,
}

impl FullResult {
    /// Writes `loss,hausdorff,k`; undefined metrics are left empty.
    pub fn write_metrics_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["loss", "hausdorff", "k"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        wtr.write_record([
            opt(self.loss.map(|l| l.clustering_loss)),
            opt(self.hausdorff),
            self.report.clustering.k().to_string(),
        ])?;
        wtr.flush()?;
        Ok(())
    }

    /// Pipeline outputs plus `metrics.csv` in the directory `prefix`.
    pub fn write_outputs(&self, prefix: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let mut written = self.report.write_outputs(&prefix)?;
        let path = prefix.as_ref().join("metrics.csv");
        self.write_metrics_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        written.push(path);
        Ok(written)
    }
}

/// The full method on an `n`-point sample of the three-component,
/// 20-dimensional mixture.
pub fn experiment_full_clustering(
    n: usize,
    config: &PipelineConfig,
    seed: u64,
    table: &CriticalValueTable,
) -> Result<FullResult> {
    let spec = Builtin::ThreeComp20.spec()?;
    let data = spec.sample(n, seed).to_dataset()?;
    let report = run_pipeline(&data, config, table)?;
    let selected = report.selection.selected.clone();
    if selected.is_empty() {
        return Ok(FullResult {
            report,
            loss: None,
            hausdorff: None,
            true_modes: None,
            unlabeled: 0,
        });
    }
    let marginal = spec.marginal(&selected)?;
    let projected = data.project(&selected)?;
    let flow = FlowParams::default();
    let truth = true_mode_assignment_with(&marginal, projected.view(), &flow)?;
    let true_modes = marginal.modes(&flow)?;

    let (t, p): (Vec<usize>, Vec<usize>) = truth
        .labels
        .iter()
        .zip(&report.clustering.labels)
        .filter_map(|(t, &p)| t.map(|t| (t, p)))
        .unzip();
    let loss = if t.len() >= 2 { Some(clustering_loss(&t, &p)?) } else { None };
    let h = hausdorff(report.clustering.modes.view(), true_modes.view())?;
    Ok(FullResult {
        unlabeled: truth.labels.iter().filter(|l| l.is_none()).count(),
        report,
        loss,
        hausdorff: Some(h),
        true_modes: Some(true_modes),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub n: usize,
    pub reps: usize,
    /// Hausdorff distance between estimated and true modes, per replicate.
    pub distances: Vec<f64>,
}

impl ConsistencyRow {
    pub fn median(&self) -> f64 {
        let mut v = self.distances.clone();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        }
    }
}

impl SweepRow for ConsistencyRow {
    fn header() -> &'static [&'static str] {
        &["n", "reps", "median_hausdorff"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.n.to_string(), self.reps.to_string(), self.median().to_string()]
    }
}

/// Mode clustering of 1-d two-component samples with the Wand bandwidth;
/// records how far the estimated modes are from the true ones.
pub fn experiment_mode_consistency(n_grid: &[usize], reps: usize, seed: u64) -> Result<SweepResult<ConsistencyRow>> {
    if n_grid.is_empty() {
        return Err(Error::input("consistency grid must be non-empty"));
    }
    check_reps(reps)?;
    let spec = Builtin::Bimodal1d.spec()?;
    let true_modes = spec.modes(&FlowParams::default())?;
    let rows = n_grid
        .iter()
        .map(|&n| {
            let cell_seed = derive_seed(seed, &[n as u64]);
            let distances = (0..reps)
                .map(|r| {
                    let points = spec.sample(n, derive_seed(cell_seed, &[r as u64])).data;
                    let h = bandwidth_wand(points.view())?;
                    let model = DensityModel::new(points, h)?;
                    let clustering = find_modes_and_assign(&model, &ClusterParams::for_bandwidth(h))?;
                    hausdorff(clustering.modes.view(), true_modes.view())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ConsistencyRow { n, reps, distances })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows, master_seed: seed })
}
