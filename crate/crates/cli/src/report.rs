//! JSON and CSV shaping of evaluation and benchmark outputs.

use serde::Serialize;

use seqvpr_core::{EvalReport, PRCurve};

use crate::config::{DminModeArg, MetricArg};

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    /// `None` when a precomputed distance matrix was injected or when the
    /// standalone `eval` subcommand never saw one.
    pub metric: Option<MetricArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmin_mode: Option<DminModeArg>,
    pub tolerance: usize,
    pub auc_recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountsJson {
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointJson {
    pub recall: f64,
    pub precision: f64,
    pub threshold: f64,
}

/// The emitted evaluation report: curve samples, bounded-recall AUC,
/// confusion counts at selected operating points, the prediction mask, and
/// an echo of the configuration that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub config: ConfigEcho,
    pub n_refs: usize,
    pub n_queries: usize,
    pub auc: f64,
    pub auc_recall: f64,
    pub max_recall: f64,
    pub operating_points: Vec<CountsJson>,
    pub predictions: Vec<u8>,
    pub curve: Vec<PointJson>,
}

impl ReportJson {
    pub fn new(
        config: ConfigEcho,
        n_refs: usize,
        n_queries: usize,
        report: &EvalReport,
        predictions: &[bool],
    ) -> Self {
        ReportJson {
            config,
            n_refs,
            n_queries,
            auc: report.auc,
            auc_recall: report.auc_recall,
            max_recall: report.curve.max_recall(),
            operating_points: report
                .operating_points
                .iter()
                .map(|op| CountsJson {
                    threshold: op.threshold,
                    tp: op.counts.tp,
                    fp: op.counts.fp,
                    fn_count: op.counts.fn_count,
                    precision: op.precision,
                    recall: op.recall,
                })
                .collect(),
            predictions: predictions.iter().map(|&b| b as u8).collect(),
            curve: report
                .curve
                .points
                .iter()
                .map(|p| PointJson {
                    recall: p.recall,
                    precision: p.precision,
                    threshold: p.threshold,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Plot-ready curve CSV with a `recall,precision` header.
pub fn curve_csv(curve: &PRCurve) -> String {
    let mut out = String::from("recall,precision\n");
    for p in &curve.points {
        out.push_str(&format!("{},{}\n", p.recall, p.precision));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqvpr_core::{pr_curve, GroundTruth, MatchCandidate, ScoreDirection};

    #[test]
    fn curve_csv_has_header_and_rows() {
        let gt = GroundTruth::new(vec![0, 1], 0).unwrap();
        let matches = [
            MatchCandidate {
                query: 0,
                reference: 0,
                score: 0.1,
            },
            MatchCandidate {
                query: 1,
                reference: 1,
                score: 0.2,
            },
        ];
        let curve = pr_curve(&matches, &[], &gt, ScoreDirection::MinIsBest).unwrap();
        let csv = curve_csv(&curve);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "recall,precision");
        assert_eq!(lines.len(), 3);
    }
}
