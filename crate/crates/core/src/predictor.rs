//! Unsupervised localization-quality prediction.
//!
//! For each query the distance column is differentiated with a modified
//! average gradient, smoothed with a causal 3x3 box kernel, and the smoothed
//! maximum is compared against the distance minimum. When the two candidates
//! agree within one frame the match is predicted in-tolerance.
//!
//! The smoothing window covers the current and two previous query columns
//! only, so batch and one-query-at-a-time processing produce bitwise
//! identical results. For the first two queries the missing past columns are
//! synthesized as constant columns holding the mean of the current raw
//! gradient column; prediction quality for those two frames is accordingly
//! reduced. Rows are edge-replicated at both ends of the reference axis.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::eval::Abstention;
use crate::mat::{argmax, argmin, Matrix};
use crate::matching::{DistanceMatrix, MatchCandidate};

/// Modified average gradient of one distance column.
///
/// Interior points get `(d[i+1] + d[i-1]) / 2 - d[i]`; the endpoints use the
/// one-sided forms `d[1] - d[0]` and `d[n-2] - d[n-1]`.
pub fn gradient_vector(d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::IndexOutOfRange {
            what: "distance column length (need >= 2)",
            index: n,
            len: 2,
        });
    }
    let mut g = Vec::with_capacity(n);
    g.push(d[1] - d[0]);
    for i in 1..n - 1 {
        g.push(0.5 * (d[i + 1] + d[i - 1]) - d[i]);
    }
    g.push(d[n - 2] - d[n - 1]);
    Ok(g)
}

/// The 3x3 smoothing kernel applied to the raw gradient (normalized box).
pub const SMOOTHING_KERNEL: [[f64; 3]; 3] = [
    [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
    [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
    [1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0],
];

/// Smooths one raw gradient column given the two previous raw columns.
///
/// `prev1`/`prev2` are the raw columns at `j-1`/`j-2`; `None` stands for a
/// missing past column, replaced by a constant column holding the mean of
/// `cur`. Rows are clamped at the edges. Terms are accumulated oldest column
/// first so every call site sums in the same order.
pub(crate) fn smooth_column(
    prev2: Option<&[f64]>,
    prev1: Option<&[f64]>,
    cur: &[f64],
) -> Vec<f64> {
    let n = cur.len();
    let mean = cur.iter().sum::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        let mut acc = 0.0;
        for col in [prev2, prev1, Some(cur)] {
            match col {
                Some(c) => {
                    acc += c[lo] + c[i] + c[hi];
                }
                None => acc += 3.0 * mean,
            }
        }
        out.push(acc / 9.0);
    }
    out
}

/// Applies [`smooth_column`] to every column of a raw gradient matrix.
pub fn smooth_gradient(raw: &Matrix) -> Matrix {
    let (n, m) = (raw.rows(), raw.cols());
    let cols: Vec<Vec<f64>> = (0..m).map(|j| raw.col(j)).collect();
    let mut out = Matrix::zeros(n, m);
    for j in 0..m {
        let prev1 = if j >= 1 { Some(cols[j - 1].as_slice()) } else { None };
        let prev2 = if j >= 2 { Some(cols[j - 2].as_slice()) } else { None };
        out.set_col(j, &smooth_column(prev2, prev1, &cols[j]));
    }
    out
}

/// Raw and smoothed gradient matrices aligned with a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    values: Matrix,
    raw: Matrix,
}

impl GradientMatrix {
    /// Differentiates every column of `d` and smooths the result.
    pub fn from_distance(d: &DistanceMatrix) -> Result<Self> {
        let (n, m) = (d.n_refs(), d.n_queries());
        let mut raw = Matrix::zeros(n, m);
        for j in 0..m {
            let g = gradient_vector(&d.values().col(j))?;
            raw.set_col(j, &g);
        }
        let values = smooth_gradient(&raw);
        Ok(GradientMatrix { values, raw })
    }

    /// Smoothed gradient matrix (what predictions are computed from).
    pub fn smoothed(&self) -> &Matrix {
        &self.values
    }

    /// Pre-smoothing gradient matrix.
    pub fn raw(&self) -> &Matrix {
        &self.raw
    }

    /// The 3x3 kernel that was applied.
    pub fn kernel(&self) -> [[f64; 3]; 3] {
        SMOOTHING_KERNEL
    }

    pub fn n_refs(&self) -> usize {
        self.values.rows()
    }

    pub fn n_queries(&self) -> usize {
        self.values.cols()
    }
}

#[inline]
pub(crate) fn consensus_flag(distance_argmin: usize, gradient_argmax: usize) -> bool {
    distance_argmin.abs_diff(gradient_argmax) <= 1
}

/// Per-query consensus predictions: the binary flag is 1 exactly when the
/// distance argmin and smoothed-gradient argmax agree within one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    flags: Vec<bool>,
    distance_argmin: Vec<usize>,
    gradient_argmax: Vec<usize>,
}

impl PredictionVector {
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Binary prediction mask (`true` = predicted in-tolerance).
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// `i_d0` for each query.
    pub fn distance_argmin(&self) -> &[usize] {
        &self.distance_argmin
    }

    /// `i_g0` for each query.
    pub fn gradient_argmax(&self) -> &[usize] {
        &self.gradient_argmax
    }
}

/// Compares distance argmin against smoothed-gradient argmax per query.
pub fn consensus_predict(d: &DistanceMatrix, g: &GradientMatrix) -> Result<PredictionVector> {
    if d.n_refs() != g.n_refs() || d.n_queries() != g.n_queries() {
        return Err(Error::SizeMismatch {
            what: "distance vs gradient matrix shape",
            left: d.n_refs() * d.n_queries(),
            right: g.n_refs() * g.n_queries(),
        });
    }
    let m = d.n_queries();
    let mut flags = Vec::with_capacity(m);
    let mut distance_argmin = Vec::with_capacity(m);
    let mut gradient_argmax = Vec::with_capacity(m);
    for j in 0..m {
        let i_d0 = argmin(&d.values().col(j)).expect("n_refs >= 2");
        let i_g0 = argmax(&g.smoothed().col(j)).expect("n_refs >= 2");
        flags.push(consensus_flag(i_d0, i_g0));
        distance_argmin.push(i_d0);
        gradient_argmax.push(i_g0);
    }
    Ok(PredictionVector {
        flags,
        distance_argmin,
        gradient_argmax,
    })
}

/// Alternative match using only the smoothed gradient: the smallest-index
/// row attaining the column maximum.
pub fn gradient_only_match(g: &GradientMatrix, query: usize) -> Result<MatchCandidate> {
    if query >= g.n_queries() {
        return Err(Error::IndexOutOfRange {
            what: "query",
            index: query,
            len: g.n_queries(),
        });
    }
    let col = g.smoothed().col(query);
    let reference = argmax(&col).expect("n_refs >= 2");
    Ok(MatchCandidate {
        query,
        reference,
        score: col[reference],
    })
}

/// Splits candidates into retained matches (mask `true`) and abstentions
/// (mask `false`, keeping the discarded candidate for false-negative
/// accounting).
pub fn mask_matches(
    candidates: &[MatchCandidate],
    mask: &[bool],
) -> Result<(Vec<MatchCandidate>, Vec<Abstention>)> {
    if candidates.len() != mask.len() {
        return Err(Error::SizeMismatch {
            what: "candidates vs prediction mask",
            left: candidates.len(),
            right: mask.len(),
        });
    }
    let mut retained = Vec::new();
    let mut abstained = Vec::new();
    for (c, &keep) in candidates.iter().zip(mask) {
        if keep {
            retained.push(*c);
        } else {
            abstained.push(Abstention {
                query: c.query,
                candidate: c.reference,
            });
        }
    }
    Ok((retained, abstained))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::Metric;

    fn dmat(rows: usize, cols: usize, data: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::from_matrix(Matrix::from_vec(rows, cols, data).unwrap(), Metric::Euclidean)
            .unwrap()
    }

    #[test]
    fn gradient_of_v_notch() {
        assert_eq!(gradient_vector(&[1.0, 0.0, 1.0]).unwrap(), vec![-1.0, 1.0, -1.0]);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        assert_eq!(gradient_vector(&[2.0; 5]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn gradient_hand_example() {
        assert_eq!(
            gradient_vector(&[0.0, 1.0, 2.0, 4.0]).unwrap(),
            vec![1.0, 0.0, 0.5, -2.0]
        );
    }

    #[test]
    fn gradient_needs_two_points() {
        assert!(gradient_vector(&[1.0]).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let raw = Matrix::from_vec(4, 3, vec![2.5; 12]).unwrap();
        let s = smooth_gradient(&raw);
        for i in 0..4 {
            for j in 0..3 {
                assert!((s.get(i, j) - 2.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_column_smoothing_uses_column_mean() {
        // Scalar reimplementation: both missing columns contribute the mean.
        let col = [1.0, 4.0, -2.0, 0.5];
        let raw = Matrix::from_vec(4, 1, col.to_vec()).unwrap();
        let s = smooth_gradient(&raw);
        let mean: f64 = col.iter().sum::<f64>() / 4.0;
        for i in 0..4usize {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(3);
            let expect = (6.0 * mean + col[lo] + col[i] + col[hi]) / 9.0;
            assert!((s.get(i, 0) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn lone_spike_matches_window_oracle() {
        // Brute-force oracle over every output cell for a spike at (1, 3).
        let (n, m) = (5, 6);
        let mut raw = Matrix::zeros(n, m);
        raw.set(1, 3, 9.0);
        let s = smooth_gradient(&raw);
        let col_mean = |j: usize| raw.col(j).iter().sum::<f64>() / n as f64;
        for j in 0..m {
            for i in 0..n {
                let mut expect = 0.0;
                for dc in [2usize, 1, 0] {
                    for di in [-1i64, 0, 1] {
                        let r = (i as i64 + di).clamp(0, n as i64 - 1) as usize;
                        expect += if j < dc {
                            col_mean(j)
                        } else {
                            raw.get(r, j - dc)
                        };
                    }
                }
                expect /= 9.0;
                assert!(
                    (s.get(i, j) - expect).abs() < 1e-15,
                    "mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn smoothing_is_linear() {
        let mut rng = crate::synth::SplitMix64::new(3);
        let mut rand_mat = || {
            Matrix::from_vec(
                6,
                5,
                (0..30).map(|_| rng.next_f64() * 4.0 - 2.0).collect(),
            )
            .unwrap()
        };
        let x = rand_mat();
        let y = rand_mat();
        let (a, b) = (1.7, -0.4);
        let mut combo = Matrix::zeros(6, 5);
        for i in 0..6 {
            for j in 0..5 {
                combo.set(i, j, a * x.get(i, j) + b * y.get(i, j));
            }
        }
        let sx = smooth_gradient(&x);
        let sy = smooth_gradient(&y);
        let sc = smooth_gradient(&combo);
        for i in 0..6 {
            for j in 0..5 {
                assert!((sc.get(i, j) - (a * sx.get(i, j) + b * sy.get(i, j))).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn consensus_flag_boundary() {
        assert!(consensus_flag(2, 3));
        assert!(consensus_flag(3, 2));
        assert!(consensus_flag(2, 2));
        assert!(!consensus_flag(2, 7));
        assert!(!consensus_flag(2, 4));
    }

    #[test]
    fn consensus_is_shift_invariant() {
        let mut rng = crate::synth::SplitMix64::new(19);
        let data: Vec<f64> = (0..8 * 6).map(|_| rng.next_f64()).collect();
        let d = dmat(8, 6, data.clone());
        let shifted = dmat(8, 6, data.iter().map(|v| v + 3.25).collect());
        let p = consensus_predict(&d, &GradientMatrix::from_distance(&d).unwrap()).unwrap();
        let q = consensus_predict(&shifted, &GradientMatrix::from_distance(&shifted).unwrap())
            .unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn eq1_matches_scalar_oracle_on_random_vectors() {
        let mut rng = crate::synth::SplitMix64::new(5);
        for _ in 0..50 {
            let n = 2 + (rng.next_u64() % 40) as usize;
            let d: Vec<f64> = (0..n).map(|_| rng.next_f64() * 10.0).collect();
            let g = gradient_vector(&d).unwrap();
            for i in 0..n {
                let expect = if i == 0 {
                    d[1] - d[0]
                } else if i == n - 1 {
                    d[n - 2] - d[n - 1]
                } else {
                    0.5 * (d[i + 1] + d[i - 1]) - d[i]
                };
                assert!((g[i] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_only_match_finds_linear_v_notch() {
        // Linear slopes have zero second difference, so the notch holds the
        // only positive gradient and survives smoothing in place.
        let d = dmat(5, 1, vec![2.0, 1.0, 0.0, 1.0, 2.0]);
        let g = GradientMatrix::from_distance(&d).unwrap();
        assert_eq!(gradient_only_match(&g, 0).unwrap().reference, 2);
    }

    #[test]
    fn consensus_rejects_shape_mismatch() {
        let mut rng = crate::synth::SplitMix64::new(37);
        let d5 = dmat(5, 4, (0..20).map(|_| rng.next_f64()).collect());
        let d6 = dmat(6, 4, (0..24).map(|_| rng.next_f64()).collect());
        let g = GradientMatrix::from_distance(&d5).unwrap();
        assert!(matches!(
            consensus_predict(&d6, &g),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn prediction_vector_invariant_holds() {
        let mut rng = crate::synth::SplitMix64::new(53);
        let d = dmat(12, 9, (0..108).map(|_| rng.next_f64()).collect());
        let g = GradientMatrix::from_distance(&d).unwrap();
        let pred = consensus_predict(&d, &g).unwrap();
        for j in 0..pred.len() {
            let expect = pred.distance_argmin()[j].abs_diff(pred.gradient_argmax()[j]) <= 1;
            assert_eq!(pred.flags()[j], expect);
        }
    }

    #[test]
    fn gradient_only_match_agrees_with_scan() {
        let mut rng = crate::synth::SplitMix64::new(23);
        let d = dmat(10, 1, (0..10).map(|_| rng.next_f64()).collect());
        let g = GradientMatrix::from_distance(&d).unwrap();
        let col = g.smoothed().col(0);
        let mut best = 0;
        for i in 1..10 {
            if col[i] > col[best] {
                best = i;
            }
        }
        let c = gradient_only_match(&g, 0).unwrap();
        assert_eq!(c.reference, best);
        assert_eq!(c.score, col[best]);
    }

    #[test]
    fn gradient_only_match_constant_ties_low() {
        let d = dmat(4, 1, vec![1.0; 4]);
        let g = GradientMatrix::from_distance(&d).unwrap();
        assert_eq!(gradient_only_match(&g, 0).unwrap().reference, 0);
    }

    #[test]
    fn mask_matches_splits_by_flag() {
        let candidates: Vec<MatchCandidate> = (0..3)
            .map(|q| MatchCandidate {
                query: q,
                reference: q,
                score: 0.1,
            })
            .collect();
        let (kept, abst) = mask_matches(&candidates, &[true, false, true]).unwrap();
        assert_eq!(kept.iter().map(|c| c.query).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(abst.len(), 1);
        assert_eq!(abst[0].query, 1);
        assert_eq!(abst[0].candidate, 1);

        let (kept, abst) = mask_matches(&candidates, &[true; 3]).unwrap();
        assert_eq!(kept.len(), 3);
        assert!(abst.is_empty());

        let (kept, abst) = mask_matches(&candidates, &[false; 3]).unwrap();
        assert!(kept.is_empty());
        assert_eq!(abst.len(), 3);

        assert!(mask_matches(&candidates, &[true]).is_err());
    }
}
