//! Screen, project, estimate the density, cluster by its modes.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::calibration::{CriticalValueTable, DEFAULT_SEED};
use crate::data::Dataset;
use crate::density::{sample_std, BandwidthRule, DensityModel};
use crate::error::{Error, Result};
use crate::modeclust::{
    find_modes_and_assign, ClusterParams, Clustering, DEFAULT_MAX_ITER, DEFAULT_MERGE_FACTOR,
    DEFAULT_TOLERANCE_FACTOR,
};
use crate::screening::{screen_features, Correction, SelectionResult};

/// Run configuration. In TOML every key is optional:
///
/// ```toml
/// alpha = 0.1
/// correction = "paper"        # or "per-feature"
/// bandwidth = "wand"          # or "quantile:0.05", "fixed:0.06"
/// merge_radius_factor = 0.5   # merge radius = factor * h
/// tolerance = 1e-7            # step tolerance = tolerance * h
/// max_iter = 500
/// seed = 1985
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub correction: Correction,
    pub bandwidth: BandwidthRule,
    pub merge_radius_factor: f64,
    /// Relative to the bandwidth.
    pub tolerance: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            correction: Correction::Joint,
            bandwidth: BandwidthRule::Wand,
            merge_radius_factor: DEFAULT_MERGE_FACTOR,
            tolerance: DEFAULT_TOLERANCE_FACTOR,
            max_iter: DEFAULT_MAX_ITER,
            seed: DEFAULT_SEED,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.merge_radius_factor > 0.0) {
            return Err(Error::Config("merge_radius_factor must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn cluster_params(&self, h: f64) -> ClusterParams {
        ClusterParams {
            bandwidth: h,
            tolerance: self.tolerance * h,
            max_iter: self.max_iter,
            merge_radius: self.merge_radius_factor * h,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub selection: SelectionResult,
    /// Names of the selected features, in projection order.
    pub selected_names: Vec<String>,
    /// `None` when nothing was selected.
    pub bandwidth_used: Option<f64>,
    pub clustering: Clustering,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

pub fn run_pipeline(data: &Dataset, config: &PipelineConfig, table: &CriticalValueTable) -> Result<PipelineReport> {
    config.validate()?;
    let selection = screen_features(data, config.alpha, config.correction, table)?;
    let selected = &selection.selected;
    let selected_names: Vec<String> = selected.iter().map(|&j| data.names()[j].clone()).collect();
    let mut warnings = Vec::new();

    if selected.is_empty() {
        warnings.push("no feature rejected unimodality; returning a single cluster".to_string());
        return Ok(PipelineReport {
            clustering: Clustering::trivial(data.n(), config.cluster_params(0.0)),
            selection,
            selected_names,
            bandwidth_used: None,
            warnings,
            config: config.clone(),
        });
    }

    for &j in selected {
        if sample_std(data.feature(j).iter().copied()) == 0.0 {
            return Err(Error::Degenerate("selected feature is constant".into()).for_feature(j));
        }
    }
    let projected = data.project(selected)?;
    let h = config.bandwidth.select(projected.view(), config.seed).map_err(|e| match selected[..] {
        [j] => e.for_feature(j),
        _ => e,
    })?;
    let model = DensityModel::new(projected, h)?;
    let clustering = find_modes_and_assign(&model, &config.cluster_params(h))?;
    let stuck = clustering.nonconverged();
    if stuck > 0 {
        warnings.push(format!(
            "{stuck} trajectories hit the iteration cap of {}",
            config.max_iter
        ));
    }
    Ok(PipelineReport {
        selection,
        selected_names,
        bandwidth_used: Some(h),
        clustering,
        warnings,
        config: config.clone(),
    })
}

impl PipelineReport {
    /// Flat key-value summary.
    pub fn summary(&self) -> Map<String, Value> {
        let sel = &self.selection;
        let selected: Vec<String> = sel.selected.iter().map(|j| j.to_string()).collect();
        let fields = [
            ("n", json!(sel.n)),
            ("d", json!(sel.d)),
            ("alpha", json!(sel.alpha)),
            ("alpha_tilde", json!(sel.alpha_tilde)),
            ("correction", json!(sel.correction.to_string())),
            ("selected", json!(selected.join(","))),
            ("bandwidth_rule", json!(self.config.bandwidth.to_string())),
            ("bandwidth_used", json!(self.bandwidth_used)),
            ("modes", json!(self.clustering.k())),
            ("nonconverged", json!(self.clustering.nonconverged())),
            ("seed", json!(self.config.seed)),
            ("warnings", json!(self.warnings.join("; "))),
        ];
        fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Writes `selection.csv`, `labels.csv`, `modes.csv` and `report.json`
    /// into the directory `prefix`, creating it if needed.
    pub fn write_outputs(&self, prefix: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = prefix.as_ref();
        fs::create_dir_all(dir)?;
        let path = |name: &str| dir.join(name);
        let create = |p: &PathBuf| -> Result<BufWriter<fs::File>> { Ok(BufWriter::new(fs::File::create(p)?)) };

        let written = vec![
            path("selection.csv"),
            path("labels.csv"),
            path("modes.csv"),
            path("report.json"),
        ];
        self.selection.write_csv(create(&written[0])?)?;
        self.clustering.write_labels_csv(create(&written[1])?, &self.selected_names)?;
        self.clustering.write_modes_csv(create(&written[2])?, &self.selected_names)?;
        let mut json = serde_json::to_string_pretty(&self.summary())?;
        json.push('\n');
        fs::write(&written[3], json)?;
        Ok(written)
    }
}
