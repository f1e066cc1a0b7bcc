use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqvpr_core::{
    best_matches, consensus_predict, eval_report, generate_traverse, gradient_only_match,
    mask_matches, pr_curve, sequence_scores, weight_matrix, GradientMatrix, MatchCandidate,
    Metric, SadConfig, ScoreDirection, SynthConfig,
};

use seqvpr_cli::bench::{bench, BenchConfig};
use seqvpr_cli::config::{
    DminModeArg, InputMode, MetricArg, PipelineConfig, DEFAULT_AUC_RECALL, DEFAULT_SEQ_LEN,
    DEFAULT_TOLERANCE, DEFAULT_WEIGHT,
};
use seqvpr_cli::errors::{stage, CliError};
use seqvpr_cli::io::{self, FileFormat};
use seqvpr_cli::pipeline::{run_pipeline, PipelineParams};
use seqvpr_cli::report::{curve_csv, ConfigEcho, ReportJson};

#[derive(Parser)]
#[command(
    name = "seqvpr",
    version,
    about = "Visual place recognition with consensus quality prediction and weighted sequence matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Compute a reference x query distance matrix from images or descriptors
    Distmat(DistmatArgs),
    /// Emit per-query in-tolerance predictions for a distance matrix
    Predict(PredictArgs),
    /// Weight a distance matrix with predictions and score sequences
    Seqmatch(SeqmatchArgs),
    /// PR curve, confusion counts, and bounded-recall AUC for match lists
    Eval(EvalArgs),
    /// Generate a synthetic traverse with known ground truth
    Synth(SynthArgs),
    /// Measure per-query inference latency over reference-set sizes
    Bench(BenchArgs),
    /// Run the full pipeline end to end and write the evaluation report
    Run(RunArgs),
}

#[derive(Args, Clone)]
struct SadArgs {
    /// Downsampled image width for the SAD front-end
    #[arg(long, default_value_t = 64)]
    sad_width: usize,
    /// Downsampled image height for the SAD front-end
    #[arg(long, default_value_t = 32)]
    sad_height: usize,
    /// Patch width for per-patch normalization
    #[arg(long, default_value_t = 8)]
    patch_width: usize,
    /// Patch height for per-patch normalization
    #[arg(long, default_value_t = 8)]
    patch_height: usize,
}

impl SadArgs {
    fn to_config(&self) -> SadConfig {
        SadConfig {
            width: self.sad_width,
            height: self.sad_height,
            patch_width: self.patch_width,
            patch_height: self.patch_height,
        }
    }
}

#[derive(Args)]
struct DistmatArgs {
    /// Directory of reference images (lexicographic order)
    #[arg(long, conflicts_with = "refs")]
    ref_images: Option<PathBuf>,
    /// Directory of query images (lexicographic order)
    #[arg(long, conflicts_with = "queries")]
    query_images: Option<PathBuf>,
    /// Reference descriptor file (CSV or VPRD binary)
    #[arg(long)]
    refs: Option<PathBuf>,
    /// Query descriptor file (CSV or VPRD binary)
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Distance metric (default: euclidean for images, cosine for descriptors)
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[command(flatten)]
    sad: SadArgs,
    /// Output path for the distance matrix
    #[arg(long)]
    out: PathBuf,
    /// Output file format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct PredictArgs {
    /// Distance matrix (CSV or VPRD binary)
    #[arg(long)]
    distmat: PathBuf,
    /// Output path for the 0/1 prediction vector
    #[arg(long)]
    out: PathBuf,
    /// Also write single-frame matches as query,reference,score,accepted
    #[arg(long)]
    matches_out: Option<PathBuf>,
    /// Also write gradient-only matches (maximum smoothed gradient)
    #[arg(long)]
    gradient_matches_out: Option<PathBuf>,
}

#[derive(Args)]
struct SeqmatchArgs {
    /// Distance matrix (CSV or VPRD binary)
    #[arg(long)]
    distmat: PathBuf,
    /// Prediction vector CSV; computed by consensus when omitted
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WEIGHT)]
    weight: f64,
    #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
    seq_len: usize,
    #[arg(long, value_enum, default_value = "global")]
    dmin_mode: DminModeArg,
    /// Output path for the sequence-score matrix
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Output path for best sequence matches per query
    #[arg(long)]
    matches_out: Option<PathBuf>,
    /// Output file format for the score matrix
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct EvalArgs {
    /// Match list (query,reference,score,accepted rows)
    #[arg(long)]
    matches: PathBuf,
    /// Ground-truth CSV, one true reference index per line
    #[arg(long)]
    gt: PathBuf,
    /// In-tolerance window in frames
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: usize,
    /// Recall bound for the normalized AUC
    #[arg(long, default_value_t = DEFAULT_AUC_RECALL)]
    auc_recall: f64,
    /// Whether lower or higher scores are better
    #[arg(long, value_enum, default_value = "min")]
    direction: DirectionArg,
    /// Report JSON output path (stdout when omitted)
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Plot-ready recall,precision CSV output path
    #[arg(long)]
    curve_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of reference frames (and queries)
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Descriptor dimensionality
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Per-dimension Gaussian noise sigma
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Fraction of queries relocated onto a distant reference
    #[arg(long, default_value_t = 0.1)]
    alias: f64,
    /// Maximum frame offset between a query and its true reference
    #[arg(long, default_value_t = 0)]
    drift: usize,
    /// Per-dimension random-walk step (default: twice sigma)
    #[arg(long)]
    walk_step: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory for refs, queries, and gt files
    #[arg(long)]
    out: PathBuf,
    /// Output file format for the descriptor files
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct BenchArgs {
    /// Reference-set sizes to sweep
    #[arg(long = "refs", value_delimiter = ',', default_values_t = vec![200, 600, 1000, 1400, 1800])]
    ref_sizes: Vec<usize>,
    /// Repetitions per size (>= 3)
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Timed queries per repetition
    #[arg(long, default_value_t = 256)]
    queries: usize,
    /// Untimed warmup queries per repetition
    #[arg(long, default_value_t = 32)]
    warmup: usize,
    #[arg(long, default_value_t = 3)]
    seq_len: usize,
    #[arg(long, default_value_t = DEFAULT_WEIGHT)]
    weight: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run one pipeline per core instead of single-threaded
    #[arg(long)]
    parallel: bool,
    /// Report JSON output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file mirroring these flags (flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ref_images: Option<PathBuf>,
    #[arg(long)]
    query_images: Option<PathBuf>,
    #[arg(long)]
    refs: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    distmat: Option<PathBuf>,
    /// Ground-truth CSV, one true reference index per line
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Weighting factor in [0, 1); 1 is rejected for PR generation
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    seq_len: Option<usize>,
    #[arg(long, value_enum)]
    dmin_mode: Option<DminModeArg>,
    #[arg(long)]
    tolerance: Option<usize>,
    #[arg(long)]
    auc_recall: Option<f64>,
    /// Echoed into the report for provenance
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sad_width: Option<usize>,
    #[arg(long)]
    sad_height: Option<usize>,
    #[arg(long)]
    patch_width: Option<usize>,
    #[arg(long)]
    patch_height: Option<usize>,
    /// Report JSON output path (printed to stdout when omitted)
    #[arg(long)]
    report_out: Option<PathBuf>,
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Prediction vector CSV output path
    #[arg(long)]
    pred_out: Option<PathBuf>,
    /// Sequence match list output path
    #[arg(long)]
    matches_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

impl From<FormatArg> for FileFormat {
    fn from(f: FormatArg) -> FileFormat {
        match f {
            FormatArg::Csv => FileFormat::Csv,
            FormatArg::Bin => FileFormat::Bin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum DirectionArg {
    /// Lower scores are better (distances, sequence scores)
    Min,
    /// Higher scores are better (gradient maxima)
    Max,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Distmat(args) => cmd_distmat(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Seqmatch(args) => cmd_seqmatch(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn cmd_distmat(args: DistmatArgs) -> Result<(), CliError> {
    let cfg = PipelineConfig {
        ref_images: args.ref_images,
        query_images: args.query_images,
        refs: args.refs,
        queries: args.queries,
        ..Default::default()
    };
    let input = InputMode::resolve(&cfg)?;
    let (d, metric) =
        seqvpr_cli::pipeline::load_distance_matrix(&input, args.metric, &args.sad.to_config())?;
    io::write_table(
        &args.out,
        d.n_refs(),
        d.n_queries(),
        d.values().data(),
        args.format.into(),
    )?;
    eprintln!(
        "wrote {} x {} distance matrix ({:?}) to {}",
        d.n_refs(),
        d.n_queries(),
        metric.unwrap_or(MetricArg::Euclidean),
        args.out.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let d = io::read_distance_matrix(&args.distmat, Metric::Euclidean)?;
    let g = stage("predictor", GradientMatrix::from_distance(&d))?;
    let pred = stage("predictor", consensus_predict(&d, &g))?;
    io::write_mask(&args.out, pred.flags())?;
    if let Some(path) = &args.matches_out {
        let candidates = best_matches(&d);
        io::write_matches(path, &candidates, pred.flags())?;
    }
    if let Some(path) = &args.gradient_matches_out {
        let candidates: Vec<MatchCandidate> = (0..d.n_queries())
            .map(|j| stage("predictor", gradient_only_match(&g, j)))
            .collect::<Result<_, _>>()?;
        let accepted = vec![true; candidates.len()];
        io::write_matches(path, &candidates, &accepted)?;
    }
    eprintln!(
        "predicted {} of {} queries in-tolerance",
        pred.flags().iter().filter(|&&b| b).count(),
        pred.len()
    );
    Ok(())
}

fn cmd_seqmatch(args: SeqmatchArgs) -> Result<(), CliError> {
    let d = io::read_distance_matrix(&args.distmat, Metric::Euclidean)?;
    let mask = match &args.predictions {
        Some(path) => {
            let mask = io::read_mask(path)?;
            if mask.len() != d.n_queries() {
                return Err(CliError::Validation(format!(
                    "seqmatch: prediction vector has {} entries but the matrix has {} queries",
                    mask.len(),
                    d.n_queries()
                )));
            }
            mask
        }
        None => {
            let g = stage("predictor", GradientMatrix::from_distance(&d))?;
            stage("predictor", consensus_predict(&d, &g))?
                .flags()
                .to_vec()
        }
    };
    let dw = stage(
        "seqmatch",
        weight_matrix(&d, &mask, args.weight, args.dmin_mode.into()),
    )?;
    let s = stage("seqmatch", sequence_scores(&dw, args.seq_len))?;
    if let Some(path) = &args.scores_out {
        io::write_table(
            path,
            s.n_refs(),
            s.n_queries(),
            s.values().data(),
            args.format.into(),
        )?;
    }
    if let Some(path) = &args.matches_out {
        let matches: Vec<MatchCandidate> = seqvpr_core::best_sequence_matches(&s)
            .into_iter()
            .map(|m| m.to_candidate())
            .collect();
        let accepted = vec![true; matches.len()];
        io::write_matches(path, &matches, &accepted)?;
    }
    if args.scores_out.is_none() && args.matches_out.is_none() {
        return Err(CliError::Validation(
            "seqmatch: nothing to do; pass --scores-out and/or --matches-out".into(),
        ));
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let (all, accepted) = io::read_matches(&args.matches)?;
    let gt = io::read_ground_truth(&args.gt, args.tolerance)?;
    let (matches, abstentions) = stage("eval", mask_matches(&all, &accepted))?;
    let direction = match args.direction {
        DirectionArg::Min => ScoreDirection::MinIsBest,
        DirectionArg::Max => ScoreDirection::MaxIsBest,
    };
    let curve = stage("eval", pr_curve(&matches, &abstentions, &gt, direction))?;
    let report = stage("eval", eval_report(curve, args.auc_recall, args.tolerance))?;
    let json = ReportJson::new(
        ConfigEcho {
            metric: None,
            weight: None,
            seq_len: None,
            dmin_mode: None,
            tolerance: args.tolerance,
            auc_recall: args.auc_recall,
            seed: None,
        },
        0,
        gt.len(),
        &report,
        &accepted,
    );
    match &args.report_out {
        Some(path) => io::write_string(path, &json.to_json())?,
        None => println!("{}", json.to_json()),
    }
    if let Some(path) = &args.curve_out {
        io::write_string(path, &curve_csv(&report.curve))?;
    }
    eprintln!(
        "auc@{:.0}%R = {:.4} (max recall {:.4})",
        args.auc_recall * 100.0,
        report.auc,
        report.curve.max_recall()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = SynthConfig {
        n_refs: args.n,
        descriptor_dim: args.dim,
        noise_sigma: args.sigma,
        alias_rate: args.alias,
        drift: args.drift,
        seed: args.seed,
        walk_step: args.walk_step,
    };
    let (refs, queries, gt) = stage("synth", generate_traverse(&cfg))?;
    let format: FileFormat = args.format.into();
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let refs_path = args.out.join(format!("refs.{}", format.extension()));
    let queries_path = args.out.join(format!("queries.{}", format.extension()));
    let gt_path = args.out.join("gt.csv");
    io::write_descriptor_set(&refs_path, &refs, format)?;
    io::write_descriptor_set(&queries_path, &queries, format)?;
    io::write_ground_truth(&gt_path, &gt)?;
    eprintln!(
        "wrote {} references and {} queries (dim {}) to {}",
        refs.len(),
        queries.len(),
        refs.dim(),
        args.out.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let cfg = BenchConfig {
        ref_sizes: args.ref_sizes,
        reps: args.reps,
        queries: args.queries,
        warmup: args.warmup,
        seq_len: args.seq_len,
        weight: args.weight,
        seed: args.seed,
        parallel: args.parallel,
    };
    let report = bench(&cfg)?;
    let json = report.to_json();
    match &args.out {
        Some(path) => io::write_string(path, &json)?,
        None => println!("{json}"),
    }
    for e in &report.entries {
        eprintln!(
            "n={:5}  predict {:.4} ms  seqmatch {:.4} ms  combined {:.4} ms (mean/query)",
            e.n_refs, e.predict.mean_ms, e.seqmatch.mean_ms, e.combined.mean_ms
        );
    }
    if let Some(fit) = &report.fit {
        eprintln!(
            "linear fit: {:.3e} ms/ref, intercept {:.4} ms, R^2 {:.4}",
            fit.slope_ms_per_ref, fit.intercept_ms, fit.r_squared
        );
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let file_cfg = match &args.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    let flag_cfg = PipelineConfig {
        ref_images: args.ref_images,
        query_images: args.query_images,
        refs: args.refs,
        queries: args.queries,
        distmat: args.distmat,
        gt: args.gt,
        metric: args.metric,
        weight: args.weight,
        seq_len: args.seq_len,
        dmin_mode: args.dmin_mode,
        tolerance: args.tolerance,
        auc_recall: args.auc_recall,
        seed: args.seed,
        sad_width: args.sad_width,
        sad_height: args.sad_height,
        patch_width: args.patch_width,
        patch_height: args.patch_height,
        report_out: args.report_out,
        curve_out: args.curve_out,
        pred_out: args.pred_out,
        matches_out: args.matches_out,
    };
    let cfg = flag_cfg.over(file_cfg);

    let input = InputMode::resolve(&cfg)?;
    let gt = cfg
        .gt
        .clone()
        .ok_or_else(|| CliError::Validation("config: --gt is required".into()))?;
    let params = PipelineParams {
        input,
        gt,
        metric: cfg.metric,
        weight: cfg.weight.unwrap_or(DEFAULT_WEIGHT),
        seq_len: cfg.seq_len.unwrap_or(DEFAULT_SEQ_LEN),
        dmin_mode: cfg
            .dmin_mode
            .map(Into::into)
            .unwrap_or(seqvpr_core::DminMode::Global),
        tolerance: cfg.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        auc_recall: cfg.auc_recall.unwrap_or(DEFAULT_AUC_RECALL),
        sad: cfg.sad_config(),
    };
    let output = run_pipeline(&params)?;

    let echo = ConfigEcho {
        metric: output.metric,
        weight: Some(params.weight),
        seq_len: Some(params.seq_len),
        dmin_mode: Some(match params.dmin_mode {
            seqvpr_core::DminMode::Global => DminModeArg::Global,
            seqvpr_core::DminMode::Running => DminModeArg::Running,
        }),
        tolerance: params.tolerance,
        auc_recall: params.auc_recall,
        seed: cfg.seed,
    };
    let json = ReportJson::new(
        echo,
        output.n_refs,
        output.n_queries,
        &output.report,
        &output.predictions,
    );
    if let Some(path) = &cfg.report_out {
        io::write_string(path, &json.to_json())?;
    }
    if let Some(path) = &cfg.curve_out {
        io::write_string(path, &curve_csv(&output.report.curve))?;
    }
    if let Some(path) = &cfg.pred_out {
        io::write_mask(path, &output.predictions)?;
    }
    if let Some(path) = &cfg.matches_out {
        let accepted = vec![true; output.matches.len()];
        io::write_matches(path, &output.matches, &accepted)?;
    }
    if cfg.report_out.is_none() {
        println!("{}", json.to_json());
    } else {
        println!(
            "auc@{:.0}%R = {:.4} over {} queries ({} predicted good)",
            params.auc_recall * 100.0,
            output.report.auc,
            output.n_queries,
            output.predictions.iter().filter(|&&b| b).count()
        );
    }
    Ok(())
}
