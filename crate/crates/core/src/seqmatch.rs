//! Prediction-weighted sequence matching.
//!
//! Queries predicted in-tolerance get their column minimum pulled toward the
//! matrix minimum before sequence scoring, which anchors sequences around
//! trusted frames. Sequence scores are trailing diagonal sums so that the
//! score at `(i, j)` depends only on the current and past query frames.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::{argmin, Matrix};
use crate::matching::DistanceMatrix;

/// How the weighting target `D_min` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DminMode {
    /// Minimum over the full distance matrix (offline / batch evaluation).
    Global,
    /// Running minimum over the query columns seen so far, which is the only
    /// value available online. Matches the streaming pipeline bitwise.
    Running,
}

/// Distance matrix after prediction-based weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDistanceMatrix {
    values: Matrix,
    weight: f64,
    d_min: f64,
    mode: DminMode,
}

impl WeightedDistanceMatrix {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Global minimum of the source distance matrix. Every entry of the
    /// weighted matrix is at least this value.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn mode(&self) -> DminMode {
        self.mode
    }

    pub fn n_refs(&self) -> usize {
        self.values.rows()
    }

    pub fn n_queries(&self) -> usize {
        self.values.cols()
    }
}

/// Applies the weighting rule to the minimum entry of one column.
///
/// `w = 1` pins the entry to `d_min` exactly; otherwise the entry is
/// `d0 - w * (d0 - d_min)`, clamped to stay at or above `d_min` so rounding
/// can never undershoot the target.
#[inline]
pub(crate) fn weighted_entry(d0: f64, d_min: f64, w: f64) -> f64 {
    if w == 1.0 {
        d_min
    } else {
        (d0 - w * (d0 - d_min)).max(d_min)
    }
}

/// Weights the column minimum of every predicted-good query.
///
/// For a query `j` with `mask[j]` set, the entry at the column argmin is
/// replaced by `d0 - w * (d0 - D_min)`; every other entry, including whole
/// columns with `mask[j]` unset, is copied unchanged. `D_min` is the global
/// matrix minimum in [`DminMode::Global`], or the minimum over columns
/// `0..=j` of the unweighted matrix in [`DminMode::Running`].
pub fn weight_matrix(
    d: &DistanceMatrix,
    mask: &[bool],
    w: f64,
    mode: DminMode,
) -> Result<WeightedDistanceMatrix> {
    if !(0.0..=1.0).contains(&w) || !w.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "weight",
            value: w,
            min: 0.0,
            max: 1.0,
        });
    }
    if mask.len() != d.n_queries() {
        return Err(Error::SizeMismatch {
            what: "prediction mask vs query count",
            left: mask.len(),
            right: d.n_queries(),
        });
    }
    let mut values = d.values().clone();
    let mut running_min = f64::INFINITY;
    let global_min = d.min_value();
    for (j, &flagged) in mask.iter().enumerate() {
        let col = d.values().col(j);
        let i_d0 = argmin(&col).expect("n_refs >= 2");
        running_min = running_min.min(col[i_d0]);
        if flagged {
            let d_min = match mode {
                DminMode::Global => global_min,
                DminMode::Running => running_min,
            };
            values.set(i_d0, j, weighted_entry(col[i_d0], d_min, w));
        }
    }
    Ok(WeightedDistanceMatrix {
        values,
        weight: w,
        d_min: global_min,
        mode,
    })
}

/// Diagonal-sum sequence scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceScoreMatrix {
    values: Matrix,
    seq_len: usize,
}

impl SequenceScoreMatrix {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn n_refs(&self) -> usize {
        self.values.rows()
    }

    pub fn n_queries(&self) -> usize {
        self.values.cols()
    }
}

/// Scores one output column from the trailing window of weighted columns.
///
/// `window[k]` must be the weighted column at query `max(j - k, 0)` for
/// `k = 0..L-1`. Entry `i` of the result is the diagonal sum
/// `sum_k window[k][max(i - k, 0)]`, so every score is a sum of exactly `L`
/// terms with edge replication at the low boundaries.
pub(crate) fn sequence_score_column(window: &[&[f64]]) -> Vec<f64> {
    let n = window[0].len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = 0.0;
        for (k, col) in window.iter().enumerate() {
            acc += col[i.saturating_sub(k)];
        }
        out.push(acc);
    }
    out
}

/// Convolves the weighted matrix with an `L`-long identity kernel, anchored
/// at the trailing (current) frame: `values[i][j]` is the sum of
/// `Dw[i-k][j-k]` for `k = 0..L-1` with indices clamped at 0.
pub fn sequence_scores(dw: &WeightedDistanceMatrix, seq_len: usize) -> Result<SequenceScoreMatrix> {
    let (n, m) = (dw.n_refs(), dw.n_queries());
    if seq_len < 1 || seq_len > n.min(m) {
        return Err(Error::IndexOutOfRange {
            what: "sequence length",
            index: seq_len,
            len: n.min(m),
        });
    }
    let cols: Vec<Vec<f64>> = (0..m).map(|j| dw.values().col(j)).collect();
    let mut values = Matrix::zeros(n, m);
    let mut window: Vec<&[f64]> = Vec::with_capacity(seq_len);
    for j in 0..m {
        window.clear();
        for k in 0..seq_len {
            window.push(&cols[j.saturating_sub(k)]);
        }
        values.set_col(j, &sequence_score_column(&window));
    }
    Ok(SequenceScoreMatrix { values, seq_len })
}

/// Best sequence candidate for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceMatch {
    pub query: usize,
    pub reference: usize,
    /// Minimum sequence score of the query column.
    pub score: f64,
}

impl SequenceMatch {
    /// View as a plain scored match for evaluation.
    pub fn to_candidate(self) -> crate::matching::MatchCandidate {
        crate::matching::MatchCandidate {
            query: self.query,
            reference: self.reference,
            score: self.score,
        }
    }
}

/// Smallest-index argmin of the sequence-score column for query `j`.
pub fn best_sequence_match(s: &SequenceScoreMatrix, query: usize) -> Result<SequenceMatch> {
    if query >= s.n_queries() {
        return Err(Error::IndexOutOfRange {
            what: "query",
            index: query,
            len: s.n_queries(),
        });
    }
    let col = s.values().col(query);
    let reference = argmin(&col).expect("n_refs >= 1");
    Ok(SequenceMatch {
        query,
        reference,
        score: col[reference],
    })
}

/// [`best_sequence_match`] for every query column.
pub fn best_sequence_matches(s: &SequenceScoreMatrix) -> Vec<SequenceMatch> {
    (0..s.n_queries())
        .map(|j| best_sequence_match(s, j).expect("query in range"))
        .collect()
}
