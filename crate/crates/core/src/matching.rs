//! Distance matrix construction and single-frame matching.
//!
//! The distance matrix `D` holds the feature distance between every
//! reference (row) and query (column); the per-query candidate match is the
//! row with the minimum distance in that query's column.

use alloc::vec::Vec;

use crate::descriptors::DescriptorSet;
use crate::error::{Error, Result};
use crate::mat::{argmin, Matrix};
use crate::math;

/// Feature distance metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// `1 - cosine similarity`, clamped to `[0, 2]`. A zero-norm vector is
    /// treated as orthogonal to everything (distance 1) and counted in
    /// [`DistanceMatrix::zero_norm_pairs`].
    Cosine,
}

/// `n x m` matrix of feature distances between `n` references and `m`
/// queries. Entries are finite and non-negative; `n >= 2` so that gradients
/// are defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Matrix,
    metric: Metric,
    zero_norm_pairs: usize,
}

impl DistanceMatrix {
    /// Computes the full distance matrix between two descriptor sets.
    pub fn compute(refs: &DescriptorSet, queries: &DescriptorSet, metric: Metric) -> Result<Self> {
        if refs.len() < 2 {
            return Err(Error::IndexOutOfRange {
                what: "reference count (need >= 2)",
                index: refs.len(),
                len: 2,
            });
        }
        if queries.is_empty() {
            return Err(Error::Empty("query descriptor set"));
        }
        if refs.dim() != queries.dim() {
            return Err(Error::SizeMismatch {
                what: "descriptor dimensionality",
                left: refs.dim(),
                right: queries.dim(),
            });
        }
        let (n, m) = (refs.len(), queries.len());
        let mut values = Matrix::zeros(n, m);
        let mut zero_norm_pairs = 0usize;
        for i in 0..n {
            let a = refs.values(i);
            for j in 0..m {
                let b = queries.values(j);
                let d = match metric {
                    Metric::Euclidean => euclidean(a, b),
                    Metric::Cosine => {
                        let (d, zero) = cosine(a, b);
                        if zero {
                            zero_norm_pairs += 1;
                        }
                        d
                    }
                };
                values.set(i, j, d);
            }
        }
        Ok(DistanceMatrix {
            values,
            metric,
            zero_norm_pairs,
        })
    }

    /// Wraps an externally produced matrix (rows = references, columns =
    /// queries), validating the type invariants.
    pub fn from_matrix(values: Matrix, metric: Metric) -> Result<Self> {
        if values.rows() < 2 {
            return Err(Error::IndexOutOfRange {
                what: "reference count (need >= 2)",
                index: values.rows(),
                len: 2,
            });
        }
        for i in 0..values.rows() {
            for j in 0..values.cols() {
                let v = values.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Parse {
                        row: i,
                        col: j,
                        message: alloc::format!("invalid distance {v}"),
                    });
                }
            }
        }
        Ok(DistanceMatrix {
            values,
            metric,
            zero_norm_pairs: 0,
        })
    }

    pub fn n_refs(&self) -> usize {
        self.values.rows()
    }

    pub fn n_queries(&self) -> usize {
        self.values.cols()
    }

    pub fn get(&self, reference: usize, query: usize) -> f64 {
        self.values.get(reference, query)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of cosine comparisons that involved a zero-norm vector.
    pub fn zero_norm_pairs(&self) -> usize {
        self.zero_norm_pairs
    }

    /// Global minimum of the matrix (the offline `D_min` used by weighting).
    pub fn min_value(&self) -> f64 {
        self.values.min_value()
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    math::sqrt(acc)
}

/// Returns the cosine distance and whether a zero-norm vector was involved.
pub(crate) fn cosine(a: &[f64], b: &[f64]) -> (f64, bool) {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return (1.0, true);
    }
    let d = 1.0 - dot / (math::sqrt(na) * math::sqrt(nb));
    (d.clamp(0.0, 2.0), false)
}

/// A single-frame candidate match for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchCandidate {
    pub query: usize,
    pub reference: usize,
    /// The minimum distance `d_0` for this query.
    pub score: f64,
}

/// Candidate best match for query `j`: the smallest-index row attaining the
/// column minimum.
pub fn best_match(d: &DistanceMatrix, query: usize) -> Result<MatchCandidate> {
    if query >= d.n_queries() {
        return Err(Error::IndexOutOfRange {
            what: "query",
            index: query,
            len: d.n_queries(),
        });
    }
    let col = d.values().col(query);
    let reference = argmin(&col).expect("n_refs >= 2");
    Ok(MatchCandidate {
        query,
        reference,
        score: col[reference],
    })
}

/// [`best_match`] for every query column.
pub fn best_matches(d: &DistanceMatrix) -> Vec<MatchCandidate> {
    (0..d.n_queries())
        .map(|j| best_match(d, j).expect("query in range"))
        .collect()
}
