//! Consensus-based localization quality prediction and prediction-weighted
//! sequence matching for visual place recognition, plus the evaluation
//! pieces (PR curves, bounded-recall AUC, synthetic traverses) needed to
//! measure them.
//!
//! The pipeline is: build a distance matrix between reference and query
//! descriptors ([`matching`]), differentiate and smooth each distance column
//! and flag queries where the distance minimum and gradient maximum agree
//! within one frame ([`predictor`]), pull the flagged minima toward the
//! matrix minimum and score trailing diagonals ([`seqmatch`]), and sweep the
//! scores into precision/recall curves ([`eval`]). [`stream`] runs the same
//! math one query at a time with bitwise identical results.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature and enable `libm` for the float routines. File IO, the
//! CLI, and the latency benchmark live in the companion `seqvpr-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("seqvpr-core needs either the `std` or the `libm` feature");

pub mod descriptors;
pub mod error;
pub mod eval;
pub mod formats;
pub mod mat;
pub mod matching;
mod math;
pub mod predictor;
pub mod seqmatch;
pub mod stream;
pub mod synth;

pub use descriptors::{
    sad_descriptor, Descriptor, DescriptorKind, DescriptorSet, ImageFrame, SadConfig,
};
pub use error::{Error, Result};
pub use eval::{
    auc_at_recall, confusion, eval_report, pr_curve, Abstention, Confusion, EvalReport,
    GroundTruth, OperatingPoint, PRCurve, PRPoint, ScoreDirection,
};
pub use mat::Matrix;
pub use matching::{best_match, best_matches, DistanceMatrix, MatchCandidate, Metric};
pub use predictor::{
    consensus_predict, gradient_only_match, gradient_vector, mask_matches, smooth_gradient,
    GradientMatrix, PredictionVector,
};
pub use seqmatch::{
    best_sequence_match, best_sequence_matches, sequence_scores, weight_matrix, DminMode,
    SequenceMatch, SequenceScoreMatrix, WeightedDistanceMatrix,
};
pub use stream::{PredictionStep, StreamStep, StreamingMatcher};
pub use synth::{
    degrade_predictions, generate_traverse, perfect_predictions, PredictorQualityConfig,
    SplitMix64, SynthConfig,
};
