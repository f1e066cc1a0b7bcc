//! One-query-at-a-time processing.
//!
//! The whole method is causal: the gradient smoothing window covers the
//! current and two previous query columns, weighting targets the running
//! minimum, and sequence scores are trailing diagonal sums. This pipeline
//! therefore produces bitwise the same predictions and sequence matches as
//! batch processing with [`DminMode::Running`], which the tests assert.
//!
//! A query can be processed in one call ([`StreamingMatcher::push`]) or in
//! two ([`StreamingMatcher::push_prediction`] then
//! [`StreamingMatcher::push_sequence`]) when the caller wants the prediction
//! early or wants to account for the two stages separately. The stages must
//! alternate; a prediction step can only be completed once because the
//! sequence stage consumes it.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::{argmax, argmin};
use crate::matching::MatchCandidate;
use crate::predictor::{consensus_flag, gradient_vector, smooth_column};
use crate::seqmatch::{sequence_score_column, weighted_entry, DminMode, SequenceMatch};

/// Prediction-stage output for one query, carrying what the sequence stage
/// still needs.
#[derive(Debug, Clone)]
pub struct PredictionStep {
    pub query: usize,
    /// Single-frame candidate (`i_d0`, `d_0`).
    pub candidate: MatchCandidate,
    /// Smoothed-gradient argmax (`i_g0`).
    pub gradient_argmax: usize,
    /// Consensus prediction for this query.
    pub predicted_good: bool,
    distances: Vec<f64>,
}

/// Everything produced for one pushed query column.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamStep {
    pub query: usize,
    /// Single-frame candidate (`i_d0`, `d_0`).
    pub candidate: MatchCandidate,
    /// Smoothed-gradient argmax (`i_g0`).
    pub gradient_argmax: usize,
    /// Consensus prediction for this query.
    pub predicted_good: bool,
    /// Best sequence candidate on the weighted trailing window.
    pub sequence: SequenceMatch,
}

/// Streaming counterpart of the distance -> prediction -> weighted-sequence
/// pipeline. Holds the last two raw gradient columns and the trailing window
/// of weighted columns.
#[derive(Debug, Clone)]
pub struct StreamingMatcher {
    n_refs: usize,
    weight: f64,
    seq_len: usize,
    raw_prev1: Option<Vec<f64>>,
    raw_prev2: Option<Vec<f64>>,
    weighted_window: VecDeque<Vec<f64>>,
    running_min: f64,
    predicted: usize,
    sequenced: usize,
}

impl StreamingMatcher {
    /// `weight` and `seq_len` follow the same bounds as the batch pipeline;
    /// the weighting target is always the running minimum because the global
    /// minimum is unknowable online.
    pub fn new(n_refs: usize, weight: f64, seq_len: usize) -> Result<Self> {
        if n_refs < 2 {
            return Err(Error::IndexOutOfRange {
                what: "reference count (need >= 2)",
                index: n_refs,
                len: 2,
            });
        }
        if !(0.0..=1.0).contains(&weight) || !weight.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "weight",
                value: weight,
                min: 0.0,
                max: 1.0,
            });
        }
        if seq_len < 1 || seq_len > n_refs {
            return Err(Error::IndexOutOfRange {
                what: "sequence length",
                index: seq_len,
                len: n_refs,
            });
        }
        Ok(StreamingMatcher {
            n_refs,
            weight,
            seq_len,
            raw_prev1: None,
            raw_prev2: None,
            weighted_window: VecDeque::with_capacity(seq_len),
            running_min: f64::INFINITY,
            predicted: 0,
            sequenced: 0,
        })
    }

    pub fn dmin_mode(&self) -> DminMode {
        DminMode::Running
    }

    pub fn queries_seen(&self) -> usize {
        self.sequenced
    }

    /// Prediction stage: gradient, causal smoothing, consensus flag.
    pub fn push_prediction(&mut self, distances: &[f64]) -> Result<PredictionStep> {
        if self.predicted != self.sequenced {
            return Err(Error::QueryPartition {
                query: self.predicted,
                message: "previous prediction step not yet completed by push_sequence",
            });
        }
        if distances.len() != self.n_refs {
            return Err(Error::SizeMismatch {
                what: "distance column vs reference count",
                left: distances.len(),
                right: self.n_refs,
            });
        }
        for (i, v) in distances.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Parse {
                    row: i,
                    col: self.predicted,
                    message: alloc::format!("invalid distance {v}"),
                });
            }
        }
        let query = self.predicted;

        let i_d0 = argmin(distances).expect("n_refs >= 2");
        let candidate = MatchCandidate {
            query,
            reference: i_d0,
            score: distances[i_d0],
        };

        let raw = gradient_vector(distances)?;
        let smoothed = smooth_column(self.raw_prev2.as_deref(), self.raw_prev1.as_deref(), &raw);
        let i_g0 = argmax(&smoothed).expect("n_refs >= 2");

        self.raw_prev2 = self.raw_prev1.take();
        self.raw_prev1 = Some(raw);
        self.predicted += 1;

        Ok(PredictionStep {
            query,
            candidate,
            gradient_argmax: i_g0,
            predicted_good: consensus_flag(i_d0, i_g0),
            distances: distances.to_vec(),
        })
    }

    /// Sequence stage: running-minimum weighting, trailing diagonal scores,
    /// best sequence candidate.
    pub fn push_sequence(&mut self, step: PredictionStep) -> Result<StreamStep> {
        if step.query != self.sequenced || self.predicted != self.sequenced + 1 {
            return Err(Error::QueryPartition {
                query: step.query,
                message: "sequence step out of order with prediction step",
            });
        }
        let PredictionStep {
            query,
            candidate,
            gradient_argmax,
            predicted_good,
            mut distances,
        } = step;

        self.running_min = self.running_min.min(candidate.score);
        if predicted_good {
            distances[candidate.reference] =
                weighted_entry(candidate.score, self.running_min, self.weight);
        }
        self.weighted_window.push_back(distances);
        if self.weighted_window.len() > self.seq_len {
            self.weighted_window.pop_front();
        }

        let len = self.weighted_window.len();
        let window: Vec<&[f64]> = (0..self.seq_len)
            .map(|k| {
                // Column max(query - k, 0): past the buffered history every
                // missing column clamps to the oldest one (column 0).
                let idx = if k < len { len - 1 - k } else { 0 };
                self.weighted_window[idx].as_slice()
            })
            .collect();
        let scores = sequence_score_column(&window);
        let i_0 = argmin(&scores).expect("n_refs >= 2");
        self.sequenced += 1;

        Ok(StreamStep {
            query,
            candidate,
            gradient_argmax,
            predicted_good,
            sequence: SequenceMatch {
                query,
                reference: i_0,
                score: scores[i_0],
            },
        })
    }

    /// Both stages in one call.
    pub fn push(&mut self, distances: &[f64]) -> Result<StreamStep> {
        let step = self.push_prediction(distances)?;
        self.push_sequence(step)
    }
}
