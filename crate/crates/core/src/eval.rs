//! Ground-truth comparison, PR curves, and area under the curve up to a
//! recall bound.
//!
//! A matched query within the frame tolerance of ground truth is a true
//! positive; a matched query outside it is a false positive. An abstained
//! query whose discarded candidate was in-tolerance is a false negative
//! (a good match that was thrown away); abstentions with out-of-tolerance
//! candidates stay out of both ratios.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matching::MatchCandidate;

/// True reference index per query, plus the frame tolerance that defines an
/// in-tolerance ("good") match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    refs: Vec<usize>,
    tolerance: usize,
}

impl GroundTruth {
    pub fn new(refs: Vec<usize>, tolerance: usize) -> Result<Self> {
        if refs.is_empty() {
            return Err(Error::Empty("ground truth"));
        }
        Ok(GroundTruth { refs, tolerance })
    }

    /// Checks every true index against a reference count.
    pub fn validate_refs(&self, n_refs: usize) -> Result<()> {
        for (j, &r) in self.refs.iter().enumerate() {
            if r >= n_refs {
                return Err(Error::IndexOutOfRange {
                    what: "ground-truth reference",
                    index: r,
                    len: n_refs,
                });
            }
            let _ = j;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn tolerance(&self) -> usize {
        self.tolerance
    }

    pub fn refs(&self) -> &[usize] {
        &self.refs
    }

    /// Whether `reference` is within tolerance of the truth for `query`.
    pub fn in_tolerance(&self, query: usize, reference: usize) -> bool {
        reference.abs_diff(self.refs[query]) <= self.tolerance
    }
}

/// A query whose candidate match was discarded, keeping the candidate so
/// false negatives can be counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Abstention {
    pub query: usize,
    /// The reference the discarded candidate pointed at.
    pub candidate: usize,
}

/// Confusion counts per the precision/recall definitions used here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

impl Confusion {
    /// `TP / (TP + FP)`; 0 when nothing was accepted.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// `TP / (TP + FN)`; 0 when no good matches exist.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_count == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_count) as f64
        }
    }
}

/// Tallies matches and abstentions against ground truth.
///
/// Every query `0..gt.len()` must appear exactly once across the two lists;
/// duplicates or gaps are rejected.
pub fn confusion(
    matches: &[MatchCandidate],
    abstentions: &[Abstention],
    gt: &GroundTruth,
) -> Result<Confusion> {
    let m = gt.len();
    let mut seen = alloc::vec![false; m];
    let mut mark = |query: usize| -> Result<()> {
        if query >= m {
            return Err(Error::IndexOutOfRange {
                what: "query",
                index: query,
                len: m,
            });
        }
        if seen[query] {
            return Err(Error::QueryPartition {
                query,
                message: "query counted twice",
            });
        }
        seen[query] = true;
        Ok(())
    };
    let mut counts = Confusion::default();
    for c in matches {
        mark(c.query)?;
        if gt.in_tolerance(c.query, c.reference) {
            counts.tp += 1;
        } else {
            counts.fp += 1;
        }
    }
    for a in abstentions {
        mark(a.query)?;
        if gt.in_tolerance(a.query, a.candidate) {
            counts.fn_count += 1;
        }
        // Out-of-tolerance abstentions are true rejections and uncounted.
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::QueryPartition {
            query: missing,
            message: "query neither matched nor abstained",
        });
    }
    Ok(counts)
}

/// Whether lower or higher scores indicate a better match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDirection {
    /// Distances and sequence scores: accept `score <= threshold`.
    MinIsBest,
    /// Gradient magnitudes: accept `score >= threshold`.
    MaxIsBest,
}

/// One PR-curve sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PRPoint {
    pub recall: f64,
    pub precision: f64,
    pub threshold: f64,
    pub counts: Confusion,
}

/// Precision/recall curve swept over match scores, tightest threshold first.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub points: Vec<PRPoint>,
    /// Area under the curve up to 20% recall, normalized to `[0, 1]`.
    pub auc_20r: f64,
}

impl PRCurve {
    /// Highest recall the curve reaches (it may stay below 1 when a
    /// prediction mask permanently discards good matches).
    pub fn max_recall(&self) -> f64 {
        self.points.last().map(|p| p.recall).unwrap_or(0.0)
    }
}

/// Sweeps the acceptance threshold over the sorted unique match scores.
///
/// At each threshold the matches on the "best" side are accepted; rejected
/// matches count as abstentions with their candidate retained, on top of the
/// permanent `abstentions` (queries removed by a prediction mask before the
/// sweep, which cap the achievable recall).
pub fn pr_curve(
    matches: &[MatchCandidate],
    abstentions: &[Abstention],
    gt: &GroundTruth,
    direction: ScoreDirection,
) -> Result<PRCurve> {
    if matches.is_empty() {
        return Err(Error::Empty("match scores"));
    }
    // Validate the query partition (and surface duplicate queries) once.
    confusion(matches, abstentions, gt)?;

    let abstained_good = abstentions
        .iter()
        .filter(|a| gt.in_tolerance(a.query, a.candidate))
        .count();
    let matched_good = matches
        .iter()
        .filter(|c| gt.in_tolerance(c.query, c.reference))
        .count();
    // TP + FN is constant along the sweep: rejected good matches move from
    // TP to FN one for one.
    let good_total = matched_good + abstained_good;

    let mut order: Vec<&MatchCandidate> = matches.iter().collect();
    match direction {
        ScoreDirection::MinIsBest => order.sort_by(|a, b| a.score.total_cmp(&b.score)),
        ScoreDirection::MaxIsBest => order.sort_by(|a, b| b.score.total_cmp(&a.score)),
    }

    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut accepted = 0usize;
    let mut k = 0usize;
    while k < order.len() {
        let threshold = order[k].score;
        // Absorb the whole tie group before emitting a point.
        while k < order.len() && order[k].score == threshold {
            accepted += 1;
            if gt.in_tolerance(order[k].query, order[k].reference) {
                tp += 1;
            }
            k += 1;
        }
        let counts = Confusion {
            tp,
            fp: accepted - tp,
            fn_count: good_total - tp,
        };
        points.push(PRPoint {
            recall: counts.recall(),
            precision: counts.precision(),
            threshold,
            counts,
        });
    }
    let auc_20r = auc_at_recall_points(&points, 0.2)?;
    Ok(PRCurve { points, auc_20r })
}

/// Normalized area under the precision-recall curve up to `r_max`.
///
/// The curve is extended to recall 0 by replicating the first point's
/// precision, integrated trapezoidally over `[0, min(r_max, max recall)]`,
/// and divided by `r_max`, so curves that cannot reach `r_max` are penalized
/// by the missing mass and a perfect curve scores 1.
pub fn auc_at_recall(curve: &PRCurve, r_max: f64) -> Result<f64> {
    auc_at_recall_points(&curve.points, r_max)
}

fn auc_at_recall_points(points: &[PRPoint], r_max: f64) -> Result<f64> {
    if r_max.is_nan() || r_max <= 0.0 || !r_max.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "r_max",
            value: r_max,
            min: f64::MIN_POSITIVE,
            max: 1.0,
        });
    }
    if points.is_empty() {
        return Err(Error::Empty("pr curve"));
    }
    let limit = r_max.min(points[points.len() - 1].recall);
    let mut area = 0.0;
    let mut prev = (0.0, points[0].precision);
    for p in points {
        let (r0, p0) = prev;
        let (r1, p1) = (p.recall, p.precision);
        if r1 <= limit {
            area += (r1 - r0) * 0.5 * (p0 + p1);
            prev = (r1, p1);
        } else {
            if r0 < limit {
                let t = (limit - r0) / (r1 - r0);
                let p_at = p0 + t * (p1 - p0);
                area += (limit - r0) * 0.5 * (p0 + p_at);
            }
            break;
        }
    }
    Ok((area / r_max).clamp(0.0, 1.0))
}

/// Counts at one curve threshold, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub counts: Confusion,
    pub precision: f64,
    pub recall: f64,
}

impl From<&PRPoint> for OperatingPoint {
    fn from(p: &PRPoint) -> Self {
        OperatingPoint {
            threshold: p.threshold,
            counts: p.counts,
            precision: p.precision,
            recall: p.recall,
        }
    }
}

/// Full evaluation output for one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub curve: PRCurve,
    /// Counts at the first point reaching the AUC recall bound (when the
    /// curve gets there) and at the loosest threshold.
    pub operating_points: Vec<OperatingPoint>,
    /// Area under the curve up to `auc_recall`, normalized.
    pub auc: f64,
    pub auc_recall: f64,
    pub tolerance: usize,
}

/// Builds an [`EvalReport`] from a swept curve.
pub fn eval_report(curve: PRCurve, auc_recall: f64, tolerance: usize) -> Result<EvalReport> {
    let auc = auc_at_recall(&curve, auc_recall)?;
    let mut operating_points = Vec::new();
    if let Some(at_bound) = curve.points.iter().find(|p| p.recall >= auc_recall) {
        operating_points.push(OperatingPoint::from(at_bound));
    }
    if let Some(last) = curve.points.last() {
        let op = OperatingPoint::from(last);
        if operating_points.last() != Some(&op) {
            operating_points.push(op);
        }
    }
    Ok(EvalReport {
        curve,
        operating_points,
        auc,
        auc_recall,
        tolerance,
    })
}
