//! Per-query latency benchmark for the prediction and weighted-sequence
//! stages, with a linear fit over the reference-set size to check that
//! inference cost scales linearly.
//!
//! Work is synthetic (seeded random distance columns) and file IO and
//! descriptor extraction are excluded from the timed region; only the
//! per-query inference math is measured. Runs single-threaded by default;
//! `parallel` measures the same per-query latency while every available
//! core runs an independent pipeline, i.e. under full contention.

use std::time::Instant;

use serde::Serialize;

use seqvpr_core::{SplitMix64, StreamingMatcher};

use crate::errors::CliError;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Reference-set sizes to sweep.
    pub ref_sizes: Vec<usize>,
    /// Repetitions per size (>= 3; the samples are pooled).
    pub reps: usize,
    /// Timed queries per repetition.
    pub queries: usize,
    /// Untimed queries run first to warm caches.
    pub warmup: usize,
    pub seq_len: usize,
    pub weight: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ref_sizes: vec![200, 600, 1000, 1400, 1800],
            reps: 5,
            queries: 256,
            warmup: 32,
            seq_len: 3,
            weight: 0.99,
            seed: 42,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StageStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
}

impl StageStats {
    fn from_samples(samples: &mut [f64]) -> StageStats {
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let median = samples[n / 2];
        let p99 = samples[((n as f64 * 0.99).ceil() as usize).min(n) - 1];
        StageStats {
            mean_ms: mean,
            median_ms: median,
            p99_ms: p99,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchEntry {
    pub n_refs: usize,
    /// Gradient + smoothing + consensus stage.
    pub predict: StageStats,
    /// Weighting + sequence scoring stage.
    pub seqmatch: StageStats,
    /// Both stages per query.
    pub combined: StageStats,
    /// Sum of best sequence references, to confirm repeated runs perform
    /// identical work.
    pub work_checksum: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    /// Milliseconds of combined per-query time per additional reference.
    pub slope_ms_per_ref: f64,
    pub intercept_ms: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub entries: Vec<BenchEntry>,
    pub fit: Option<LinearFit>,
    pub reps: usize,
    pub queries_per_rep: usize,
    pub seq_len: usize,
    pub weight: f64,
    pub seed: u64,
    pub parallel: bool,
    pub threads: usize,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench report serializes")
    }
}

fn make_columns(n_refs: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| (0..n_refs).map(|_| rng.next_f64() + 1e-3).collect())
        .collect()
}

struct RepOutcome {
    predict_s: Vec<f64>,
    seqmatch_s: Vec<f64>,
    checksum: u64,
}

fn run_rep(cfg: &BenchConfig, n_refs: usize, columns: &[Vec<f64>]) -> Result<RepOutcome, CliError> {
    let mut matcher = StreamingMatcher::new(n_refs, cfg.weight, cfg.seq_len)
        .map_err(|e| CliError::Validation(format!("bench: {e}")))?;
    let mut predict_s = Vec::with_capacity(cfg.queries);
    let mut seqmatch_s = Vec::with_capacity(cfg.queries);
    let mut checksum = 0u64;
    for (q, col) in columns.iter().enumerate() {
        let timed = q >= cfg.warmup;
        let t0 = Instant::now();
        let pred = matcher
            .push_prediction(col)
            .map_err(|e| CliError::Validation(format!("bench: {e}")))?;
        let t1 = Instant::now();
        let step = matcher
            .push_sequence(pred)
            .map_err(|e| CliError::Validation(format!("bench: {e}")))?;
        let t2 = Instant::now();
        if timed {
            predict_s.push((t1 - t0).as_secs_f64());
            seqmatch_s.push((t2 - t1).as_secs_f64());
        }
        checksum = checksum.wrapping_add(step.sequence.reference as u64);
    }
    Ok(RepOutcome {
        predict_s,
        seqmatch_s,
        checksum,
    })
}

/// Runs the sweep and fits combined mean time against the reference count.
pub fn bench(cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    if cfg.reps < 3 {
        return Err(CliError::Validation(format!(
            "bench: reps must be >= 3, got {}",
            cfg.reps
        )));
    }
    if cfg.ref_sizes.is_empty() {
        return Err(CliError::Validation("bench: no reference sizes given".into()));
    }
    if cfg.queries == 0 {
        return Err(CliError::Validation("bench: queries must be > 0".into()));
    }
    let threads = if cfg.parallel {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        1
    };

    let mut entries = Vec::with_capacity(cfg.ref_sizes.len());
    for &n_refs in &cfg.ref_sizes {
        let columns = make_columns(n_refs, cfg.warmup + cfg.queries, cfg.seed ^ n_refs as u64);
        let mut predict_s = Vec::new();
        let mut seqmatch_s = Vec::new();
        let mut checksum = 0u64;
        for _ in 0..cfg.reps {
            if threads > 1 {
                let outcomes = std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..threads)
                        .map(|_| scope.spawn(|| run_rep(cfg, n_refs, &columns)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("bench thread"))
                        .collect::<Vec<_>>()
                });
                for outcome in outcomes {
                    let outcome = outcome?;
                    predict_s.extend(outcome.predict_s);
                    seqmatch_s.extend(outcome.seqmatch_s);
                    checksum = outcome.checksum;
                }
            } else {
                let outcome = run_rep(cfg, n_refs, &columns)?;
                predict_s.extend(outcome.predict_s);
                seqmatch_s.extend(outcome.seqmatch_s);
                checksum = outcome.checksum;
            }
        }
        let mut combined_s: Vec<f64> = predict_s
            .iter()
            .zip(&seqmatch_s)
            .map(|(a, b)| a + b)
            .collect();
        let to_ms = |mut v: Vec<f64>| {
            for x in v.iter_mut() {
                *x *= 1e3;
            }
            v
        };
        entries.push(BenchEntry {
            n_refs,
            predict: StageStats::from_samples(&mut to_ms(predict_s)),
            seqmatch: StageStats::from_samples(&mut to_ms(seqmatch_s)),
            combined: StageStats::from_samples(&mut {
                for x in combined_s.iter_mut() {
                    *x *= 1e3;
                }
                combined_s
            }),
            work_checksum: checksum,
        });
    }

    let fit = if entries.len() >= 2 {
        Some(fit_linear(
            &entries
                .iter()
                .map(|e| (e.n_refs as f64, e.combined.mean_ms))
                .collect::<Vec<_>>(),
        ))
    } else {
        None
    };

    Ok(BenchReport {
        entries,
        fit,
        reps: cfg.reps,
        queries_per_rep: cfg.queries,
        seq_len: cfg.seq_len,
        weight: cfg.weight,
        seed: cfg.seed,
        parallel: cfg.parallel,
        threads,
    })
}

fn fit_linear(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope_ms_per_ref: slope,
        intercept_ms: intercept,
        r_squared,
    }
}
