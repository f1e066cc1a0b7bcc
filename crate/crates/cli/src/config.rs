//! Pipeline configuration: a JSON file mirroring the CLI flags, with flags
//! taking precedence over file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use seqvpr_core::{DminMode, Metric, SadConfig};

use crate::errors::CliError;
use crate::io::read_bytes;

pub const DEFAULT_WEIGHT: f64 = 0.99;
pub const DEFAULT_SEQ_LEN: usize = 2;
pub const DEFAULT_TOLERANCE: usize = 1;
pub const DEFAULT_AUC_RECALL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DminModeArg {
    Global,
    Running,
}

impl From<DminModeArg> for DminMode {
    fn from(m: DminModeArg) -> DminMode {
        match m {
            DminModeArg::Global => DminMode::Global,
            DminModeArg::Running => DminMode::Running,
        }
    }
}

/// On-disk pipeline configuration. Every field is optional; unset fields
/// fall back to the CLI flags and then to the documented defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Directory of reference images (input mode: images).
    pub ref_images: Option<PathBuf>,
    /// Directory of query images (input mode: images).
    pub query_images: Option<PathBuf>,
    /// Reference descriptor file (input mode: descriptors).
    pub refs: Option<PathBuf>,
    /// Query descriptor file (input mode: descriptors).
    pub queries: Option<PathBuf>,
    /// Precomputed distance matrix (input mode: distance-matrix).
    pub distmat: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub metric: Option<MetricArg>,
    pub weight: Option<f64>,
    pub seq_len: Option<usize>,
    pub dmin_mode: Option<DminModeArg>,
    pub tolerance: Option<usize>,
    pub auc_recall: Option<f64>,
    pub seed: Option<u64>,
    pub sad_width: Option<usize>,
    pub sad_height: Option<usize>,
    pub patch_width: Option<usize>,
    pub patch_height: Option<usize>,
    pub report_out: Option<PathBuf>,
    pub curve_out: Option<PathBuf>,
    pub pred_out: Option<PathBuf>,
    pub matches_out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let bytes = read_bytes(path)?;
        serde_json::from_slice(&bytes).map_err(|e| {
            CliError::Validation(format!("config: {}: {e}", path.display()))
        })
    }

    /// Overlays `self` (flags) on top of `base` (file): any field set here
    /// wins.
    pub fn over(self, base: PipelineConfig) -> PipelineConfig {
        PipelineConfig {
            ref_images: self.ref_images.or(base.ref_images),
            query_images: self.query_images.or(base.query_images),
            refs: self.refs.or(base.refs),
            queries: self.queries.or(base.queries),
            distmat: self.distmat.or(base.distmat),
            gt: self.gt.or(base.gt),
            metric: self.metric.or(base.metric),
            weight: self.weight.or(base.weight),
            seq_len: self.seq_len.or(base.seq_len),
            dmin_mode: self.dmin_mode.or(base.dmin_mode),
            tolerance: self.tolerance.or(base.tolerance),
            auc_recall: self.auc_recall.or(base.auc_recall),
            seed: self.seed.or(base.seed),
            sad_width: self.sad_width.or(base.sad_width),
            sad_height: self.sad_height.or(base.sad_height),
            patch_width: self.patch_width.or(base.patch_width),
            patch_height: self.patch_height.or(base.patch_height),
            report_out: self.report_out.or(base.report_out),
            curve_out: self.curve_out.or(base.curve_out),
            pred_out: self.pred_out.or(base.pred_out),
            matches_out: self.matches_out.or(base.matches_out),
        }
    }

    pub fn sad_config(&self) -> SadConfig {
        let d = SadConfig::default();
        SadConfig {
            width: self.sad_width.unwrap_or(d.width),
            height: self.sad_height.unwrap_or(d.height),
            patch_width: self.patch_width.unwrap_or(d.patch_width),
            patch_height: self.patch_height.unwrap_or(d.patch_height),
        }
    }
}

/// One of the three ways to feed the pipeline.
#[derive(Debug, Clone)]
pub enum InputMode {
    Images { refs: PathBuf, queries: PathBuf },
    Descriptors { refs: PathBuf, queries: PathBuf },
    DistanceMatrix { path: PathBuf },
}

impl InputMode {
    /// Picks exactly one input mode from the merged config.
    pub fn resolve(cfg: &PipelineConfig) -> Result<InputMode, CliError> {
        let mut modes = Vec::new();
        match (&cfg.ref_images, &cfg.query_images) {
            (Some(r), Some(q)) => modes.push(InputMode::Images {
                refs: r.clone(),
                queries: q.clone(),
            }),
            (None, None) => {}
            _ => {
                return Err(CliError::Validation(
                    "config: --ref-images and --query-images must be given together".into(),
                ))
            }
        }
        match (&cfg.refs, &cfg.queries) {
            (Some(r), Some(q)) => modes.push(InputMode::Descriptors {
                refs: r.clone(),
                queries: q.clone(),
            }),
            (None, None) => {}
            _ => {
                return Err(CliError::Validation(
                    "config: --refs and --queries must be given together".into(),
                ))
            }
        }
        if let Some(p) = &cfg.distmat {
            modes.push(InputMode::DistanceMatrix { path: p.clone() });
        }
        match modes.len() {
            0 => Err(CliError::Validation(
                "config: no input given (use image directories, descriptor files, or a distance matrix)"
                    .into(),
            )),
            1 => Ok(modes.pop().expect("one mode")),
            _ => Err(CliError::Validation(
                "config: more than one input mode given; pick images, descriptors, or a distance matrix"
                    .into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = PipelineConfig {
            weight: Some(0.5),
            seq_len: Some(4),
            ..Default::default()
        };
        let flags = PipelineConfig {
            weight: Some(0.9),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.weight, Some(0.9));
        assert_eq!(merged.seq_len, Some(4));
    }

    #[test]
    fn exactly_one_input_mode() {
        let none = PipelineConfig::default();
        assert!(InputMode::resolve(&none).is_err());

        let two = PipelineConfig {
            refs: Some("a.csv".into()),
            queries: Some("b.csv".into()),
            distmat: Some("d.csv".into()),
            ..Default::default()
        };
        assert!(InputMode::resolve(&two).is_err());

        let half = PipelineConfig {
            refs: Some("a.csv".into()),
            ..Default::default()
        };
        assert!(InputMode::resolve(&half).is_err());

        let ok = PipelineConfig {
            distmat: Some("d.csv".into()),
            ..Default::default()
        };
        assert!(matches!(
            InputMode::resolve(&ok),
            Ok(InputMode::DistanceMatrix { .. })
        ));
    }

    #[test]
    fn config_json_round_trips() {
        let cfg = PipelineConfig {
            distmat: Some("d.bin".into()),
            gt: Some("gt.csv".into()),
            metric: Some(MetricArg::Cosine),
            weight: Some(0.99),
            dmin_mode: Some(DminModeArg::Running),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.metric, Some(MetricArg::Cosine));
        assert_eq!(back.dmin_mode, Some(DminModeArg::Running));
        assert!(serde_json::from_str::<PipelineConfig>("{\"bogus\":1}").is_err());
    }
}
