//! Synthetic traverses with known ground truth.
//!
//! Reference descriptors follow a random walk so consecutive frames are
//! correlated the way real traverses are (i.i.d. references would make the
//! consensus predictor trivially perfect). Each query is its true reference
//! plus Gaussian noise; a configurable fraction is relocated onto a distant
//! stretch of the route to synthesize visual aliasing. Aliasing comes in
//! coherent runs of consecutive queries that track consecutive wrong
//! references, the way a repeated corridor fools a camera for several frames
//! in a row; isolated single-frame aliases would be trivially repaired by
//! any sequence matcher. Everything is driven by an explicit seeded
//! generator, so repeated runs are bitwise identical.

use alloc::vec::Vec;

use crate::descriptors::{DescriptorKind, DescriptorSet};
use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::math;
use crate::matching::MatchCandidate;

/// SplitMix64 pseudo-random generator (Steele, Lea & Flood 2014).
///
/// `state += 0x9E3779B97F4A7C15`, then the state is mixed with two
/// xor-shift-multiply rounds (`0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`).
/// The algorithm is fixed across releases so seeded outputs never change.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, n)` via the multiply-high reduction.
    pub fn next_range(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal draw (Box-Muller, cosine branch; consumes two
    /// uniforms per call).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1] keeps ln finite
        let u2 = self.next_f64();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
    }
}

/// Configuration for [`generate_traverse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Number of reference frames (one query is generated per reference).
    pub n_refs: usize,
    pub descriptor_dim: usize,
    /// Per-dimension standard deviation of query noise.
    pub noise_sigma: f64,
    /// Fraction of queries relocated onto a distant reference so that their
    /// nearest descriptor is a wrong one.
    pub alias_rate: f64,
    /// Maximum frame offset between query `j` and its true reference.
    pub drift: usize,
    pub seed: u64,
    /// Per-dimension random-walk step between consecutive references.
    /// `None` picks twice the per-dimension noise (0.1 when noiseless):
    /// queries then sit in a clear notch at the true frame while neighbors
    /// stay close enough that prediction is not trivial. Steps below the
    /// noise level flatten the notch and starve the consensus predictor.
    pub walk_step: Option<f64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_refs: 500,
            descriptor_dim: 64,
            noise_sigma: 0.2,
            alias_rate: 0.0,
            drift: 0,
            seed: 42,
            walk_step: None,
        }
    }
}

impl SynthConfig {
    pub fn effective_walk_step(&self) -> f64 {
        match self.walk_step {
            Some(s) => s,
            None => {
                if self.noise_sigma > 0.0 {
                    2.0 * self.noise_sigma
                } else {
                    0.1
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_refs < 2 {
            return Err(Error::IndexOutOfRange {
                what: "n_refs (need >= 2)",
                index: self.n_refs,
                len: 2,
            });
        }
        if self.descriptor_dim == 0 {
            return Err(Error::Empty("descriptor_dim"));
        }
        if !(0.0..=1.0).contains(&self.alias_rate) || !self.alias_rate.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "alias_rate",
                value: self.alias_rate,
                min: 0.0,
                max: 1.0,
            });
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 || !self.noise_sigma.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "noise_sigma",
                value: self.noise_sigma,
                min: 0.0,
                max: f64::MAX,
            });
        }
        if let Some(s) = self.walk_step {
            if s.is_nan() || s <= 0.0 || !s.is_finite() {
                return Err(Error::ParamOutOfRange {
                    name: "walk_step",
                    value: s,
                    min: f64::MIN_POSITIVE,
                    max: f64::MAX,
                });
            }
        }
        Ok(())
    }
}

/// Aliased runs cover 2 to 6 consecutive queries.
const ALIAS_RUN_MIN: usize = 2;
const ALIAS_RUN_MAX: usize = 6;

/// Generates a reference/query traverse pair with ground truth (tolerance 1).
///
/// Queries take their values from the reference at their true index plus
/// Gaussian noise. Aliased queries instead take their values from a distant
/// stretch of the route: a run of `2..=6` consecutive queries tracks
/// consecutive references starting at least `max(2, n/10)` frames away (plus
/// run length and drift), with run starts drawn so the expected aliased
/// fraction matches `alias_rate`. Ground truth always records the true
/// index, so every aliased query's nearest descriptor is a wrong reference.
pub fn generate_traverse(cfg: &SynthConfig) -> Result<(DescriptorSet, DescriptorSet, GroundTruth)> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let (n, dim) = (cfg.n_refs, cfg.descriptor_dim);
    let step = cfg.effective_walk_step();

    let mut refs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut current: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
    refs.push(current.clone());
    for _ in 1..n {
        for v in current.iter_mut() {
            *v += step * rng.next_gaussian();
        }
        refs.push(current.clone());
    }

    let mean_run = (ALIAS_RUN_MIN + ALIAS_RUN_MAX) as f64 / 2.0;
    // Renewal process: aliased fraction = E[run] / (E[run] + E[gap]) with a
    // geometric gap of mean (1-p)/p, which solves to the start probability
    // p = rate / (rate + E[run] * (1 - rate)).
    let run_start_prob = if cfg.alias_rate >= 1.0 {
        1.0
    } else {
        cfg.alias_rate / (cfg.alias_rate + mean_run * (1.0 - cfg.alias_rate))
    };
    let alias_margin = (n / 10).max(2) + ALIAS_RUN_MAX + cfg.drift;

    let mut queries: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut gt = Vec::with_capacity(n);
    // Offset of the current aliased run (source minus true index) and how
    // many frames of it remain.
    let mut run_remaining = 0usize;
    let mut run_offset = 0i64;
    for j in 0..n {
        let true_ref = if cfg.drift > 0 {
            let offset = rng.next_range(2 * cfg.drift + 1) as i64 - cfg.drift as i64;
            (j as i64 + offset).clamp(0, n as i64 - 1) as usize
        } else {
            j
        };
        gt.push(true_ref);
        if run_remaining == 0
            && cfg.alias_rate > 0.0
            && n > 2 * (alias_margin + 1)
            && rng.next_f64() < run_start_prob
        {
            run_remaining = ALIAS_RUN_MIN + rng.next_range(ALIAS_RUN_MAX - ALIAS_RUN_MIN + 1);
            let k0 = loop {
                let k = rng.next_range(n);
                if k.abs_diff(j) > alias_margin {
                    break k;
                }
            };
            run_offset = k0 as i64 - j as i64;
        }
        let source = if run_remaining > 0 {
            run_remaining -= 1;
            (j as i64 + run_offset).clamp(0, n as i64 - 1) as usize
        } else {
            true_ref
        };
        let mut q = refs[source].clone();
        if cfg.noise_sigma > 0.0 {
            for v in q.iter_mut() {
                *v += cfg.noise_sigma * rng.next_gaussian();
            }
        }
        queries.push(q);
    }

    let refs = DescriptorSet::from_rows(DescriptorKind::External, refs)?;
    let queries = DescriptorSet::from_rows(DescriptorKind::External, queries)?;
    let gt = GroundTruth::new(gt, 1)?;
    Ok((refs, queries, gt))
}

/// Probabilities for corrupting a prediction mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorQualityConfig {
    /// Probability of flipping a predicted-good query to predicted-bad.
    pub flip_good_to_bad: f64,
    /// Probability of flipping a predicted-bad query to predicted-good.
    pub flip_bad_to_good: f64,
    pub seed: u64,
}

/// Randomly flips prediction bits to synthesize predictors of controlled
/// quality. One uniform is drawn per query regardless of its bit.
pub fn degrade_predictions(mask: &[bool], cfg: &PredictorQualityConfig) -> Result<Vec<bool>> {
    for (name, p) in [
        ("flip_good_to_bad", cfg.flip_good_to_bad),
        ("flip_bad_to_good", cfg.flip_bad_to_good),
    ] {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::ParamOutOfRange {
                name,
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
    }
    let mut rng = SplitMix64::new(cfg.seed);
    Ok(mask
        .iter()
        .map(|&bit| {
            let u = rng.next_f64();
            let flip = u < if bit {
                cfg.flip_good_to_bad
            } else {
                cfg.flip_bad_to_good
            };
            bit != flip
        })
        .collect())
}

/// The oracle mask: 1 exactly where the candidate match is in-tolerance.
/// Used for perfect-prediction upper bounds.
pub fn perfect_predictions(candidates: &[MatchCandidate], gt: &GroundTruth) -> Result<Vec<bool>> {
    if candidates.len() != gt.len() {
        return Err(Error::SizeMismatch {
            what: "candidates vs ground truth",
            left: candidates.len(),
            right: gt.len(),
        });
    }
    Ok(candidates
        .iter()
        .map(|c| gt.in_tolerance(c.query, c.reference))
        .collect())
}
