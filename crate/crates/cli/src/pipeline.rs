//! End-to-end pipeline: input -> distance matrix -> consensus prediction ->
//! weighted sequence matching -> PR evaluation.

use seqvpr_core::{
    best_sequence_matches, consensus_predict, eval_report, pr_curve, sequence_scores,
    weight_matrix, DescriptorKind, DistanceMatrix, DminMode, EvalReport, GradientMatrix,
    MatchCandidate, Metric, SadConfig, ScoreDirection,
};

use crate::config::{InputMode, MetricArg};
use crate::errors::{stage, CliError};
use crate::io;

/// Fully resolved pipeline parameters (defaults applied, one input mode).
#[derive(Debug, Clone)]
pub struct PipelineParams {
    pub input: InputMode,
    pub gt: std::path::PathBuf,
    /// `None` picks euclidean for the SAD front-end and cosine for external
    /// descriptors; irrelevant for injected distance matrices.
    pub metric: Option<MetricArg>,
    pub weight: f64,
    pub seq_len: usize,
    pub dmin_mode: DminMode,
    pub tolerance: usize,
    pub auc_recall: f64,
    pub sad: SadConfig,
}

/// Everything a pipeline run produces, before serialization.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: EvalReport,
    /// Consensus prediction mask, one bit per query.
    pub predictions: Vec<bool>,
    /// Best weighted-sequence match per query.
    pub matches: Vec<MatchCandidate>,
    /// The metric actually used (`None` when a distance matrix was injected).
    pub metric: Option<MetricArg>,
    pub n_refs: usize,
    pub n_queries: usize,
}

/// Loads or computes the distance matrix for the configured input mode.
pub fn load_distance_matrix(
    input: &InputMode,
    metric: Option<MetricArg>,
    sad: &SadConfig,
) -> Result<(DistanceMatrix, Option<MetricArg>), CliError> {
    match input {
        InputMode::Images { refs, queries } => {
            let metric = metric.unwrap_or(MetricArg::Euclidean);
            let r = io::load_image_descriptors(refs, sad)?;
            let q = io::load_image_descriptors(queries, sad)?;
            let d = stage(
                "matching",
                DistanceMatrix::compute(&r, &q, Metric::from(metric)),
            )?;
            Ok((d, Some(metric)))
        }
        InputMode::Descriptors { refs, queries } => {
            let metric = metric.unwrap_or(MetricArg::Cosine);
            let r = io::read_descriptor_set(refs, DescriptorKind::External)?;
            let q = io::read_descriptor_set(queries, DescriptorKind::External)?;
            let d = stage(
                "matching",
                DistanceMatrix::compute(&r, &q, Metric::from(metric)),
            )?;
            Ok((d, Some(metric)))
        }
        InputMode::DistanceMatrix { path } => {
            let d = io::read_distance_matrix(path, Metric::Euclidean)?;
            Ok((d, None))
        }
    }
}

/// Runs the full pipeline and evaluates the weighted-sequence matches.
///
/// `weight = 1` is rejected here: it collapses every predicted-good score to
/// the matrix minimum, which makes a threshold sweep meaningless. Use a
/// weight just below one (0.99 by default) for PR generation.
pub fn run_pipeline(params: &PipelineParams) -> Result<PipelineOutput, CliError> {
    if params.weight >= 1.0 {
        return Err(CliError::Validation(format!(
            "seqmatch: weight {} is not usable for PR generation; use a weight < 1 (e.g. 0.99)",
            params.weight
        )));
    }
    let (d, metric) = load_distance_matrix(&params.input, params.metric, &params.sad)?;
    let gt = io::read_ground_truth(&params.gt, params.tolerance)?;
    if gt.len() != d.n_queries() {
        return Err(CliError::Validation(format!(
            "eval: ground truth has {} entries but the matrix has {} queries",
            gt.len(),
            d.n_queries()
        )));
    }
    stage("eval", gt.validate_refs(d.n_refs()))?;

    let g = stage("predictor", GradientMatrix::from_distance(&d))?;
    let pred = stage("predictor", consensus_predict(&d, &g))?;
    let dw = stage(
        "seqmatch",
        weight_matrix(&d, pred.flags(), params.weight, params.dmin_mode),
    )?;
    let s = stage("seqmatch", sequence_scores(&dw, params.seq_len))?;
    let matches: Vec<MatchCandidate> = best_sequence_matches(&s)
        .into_iter()
        .map(|m| m.to_candidate())
        .collect();

    let curve = stage(
        "eval",
        pr_curve(&matches, &[], &gt, ScoreDirection::MinIsBest),
    )?;
    let report = stage("eval", eval_report(curve, params.auc_recall, params.tolerance))?;

    Ok(PipelineOutput {
        report,
        predictions: pred.flags().to_vec(),
        matches,
        metric,
        n_refs: d.n_refs(),
        n_queries: d.n_queries(),
    })
}
