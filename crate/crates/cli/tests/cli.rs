//! End-to-end tests of the `seqvpr` binary: subcommand composition, output
//! determinism, exit codes, and image ingestion.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqvpr"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seqvpr-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn seqvpr");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json_field(report: &Path, field: &str) -> f64 {
    let text = std::fs::read_to_string(report).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value[field].as_f64().unwrap_or_else(|| panic!("field {field} in {report:?}"))
}

#[test]
fn subcommand_chain_matches_run() {
    let dir = tmp("chain");
    run_ok(bin().args([
        "synth", "--n", "150", "--dim", "16", "--sigma", "0.1", "--alias", "0.2", "--seed",
        "9", "--out",
    ]).arg(&dir));

    // Stage by stage.
    let distmat = dir.join("d.csv");
    run_ok(bin()
        .args(["distmat", "--metric", "euclidean", "--refs"])
        .arg(dir.join("refs.csv"))
        .arg("--queries")
        .arg(dir.join("queries.csv"))
        .arg("--out")
        .arg(&distmat));
    let pred = dir.join("pred.csv");
    run_ok(bin()
        .arg("predict")
        .arg("--distmat")
        .arg(&distmat)
        .arg("--out")
        .arg(&pred));
    let matches = dir.join("seq_matches.csv");
    run_ok(bin()
        .arg("seqmatch")
        .arg("--distmat")
        .arg(&distmat)
        .args(["--weight", "0.99", "--seq-len", "2", "--dmin-mode", "global"])
        .arg("--matches-out")
        .arg(&matches));
    let report_chain = dir.join("report_chain.json");
    run_ok(bin()
        .arg("eval")
        .arg("--matches")
        .arg(&matches)
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .args(["--tolerance", "1", "--auc-recall", "0.2"])
        .arg("--report-out")
        .arg(&report_chain));

    // One-shot pipeline over the same inputs.
    let report_run = dir.join("report_run.json");
    run_ok(bin()
        .arg("run")
        .arg("--refs")
        .arg(dir.join("refs.csv"))
        .arg("--queries")
        .arg(dir.join("queries.csv"))
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .args(["--metric", "euclidean", "--weight", "0.99", "--seq-len", "2"])
        .arg("--report-out")
        .arg(&report_run));

    let auc_chain = json_field(&report_chain, "auc");
    let auc_run = json_field(&report_run, "auc");
    assert_eq!(auc_chain.to_bits(), auc_run.to_bits());

    // Injecting the saved distance matrix must reproduce the same report.
    let report_dm = dir.join("report_dm.json");
    run_ok(bin()
        .arg("run")
        .arg("--distmat")
        .arg(&distmat)
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .args(["--weight", "0.99", "--seq-len", "2"])
        .arg("--report-out")
        .arg(&report_dm));
    assert_eq!(json_field(&report_dm, "auc").to_bits(), auc_run.to_bits());

    // And the binary is a thin layer over the library: direct calls with the
    // same parameters give the same number.
    let params = seqvpr_cli::pipeline::PipelineParams {
        input: seqvpr_cli::config::InputMode::Descriptors {
            refs: dir.join("refs.csv"),
            queries: dir.join("queries.csv"),
        },
        gt: dir.join("gt.csv"),
        metric: Some(seqvpr_cli::config::MetricArg::Euclidean),
        weight: 0.99,
        seq_len: 2,
        dmin_mode: seqvpr_core::DminMode::Global,
        tolerance: 1,
        auc_recall: 0.2,
        sad: seqvpr_core::SadConfig::default(),
    };
    let lib = seqvpr_cli::pipeline::run_pipeline(&params).unwrap();
    assert_eq!(lib.report.auc.to_bits(), auc_run.to_bits());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_is_deterministic() {
    let dir = tmp("det");
    run_ok(bin().args([
        "synth", "--n", "80", "--dim", "8", "--sigma", "0.2", "--alias", "0.1", "--seed", "4",
        "--out",
    ]).arg(&dir));
    for name in ["a.json", "b.json"] {
        run_ok(bin()
            .arg("run")
            .arg("--refs")
            .arg(dir.join("refs.csv"))
            .arg("--queries")
            .arg(dir.join("queries.csv"))
            .arg("--gt")
            .arg(dir.join("gt.csv"))
            .args(["--metric", "euclidean"])
            .arg("--report-out")
            .arg(dir.join(name))
            .arg("--curve-out")
            .arg(dir.join(name).with_extension("csv")));
    }
    let a = std::fs::read(dir.join("a.json")).unwrap();
    let b = std::fs::read(dir.join("b.json")).unwrap();
    assert_eq!(a, b, "same config and inputs must produce identical reports");
    let ac = std::fs::read(dir.join("a.csv")).unwrap();
    let bc = std::fs::read(dir.join("b.csv")).unwrap();
    assert_eq!(ac, bc);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn synth_binary_format_round_trips() {
    let dir = tmp("binfmt");
    run_ok(bin().args([
        "synth", "--n", "40", "--dim", "6", "--sigma", "0.1", "--seed", "2", "--format", "bin",
        "--out",
    ]).arg(&dir));
    assert!(dir.join("refs.bin").exists());
    // The binary file must start with the magic.
    let bytes = std::fs::read(dir.join("refs.bin")).unwrap();
    assert_eq!(&bytes[0..4], b"VPRD");
    // And feed back into the pipeline unchanged.
    run_ok(bin()
        .arg("run")
        .arg("--refs")
        .arg(dir.join("refs.bin"))
        .arg("--queries")
        .arg(dir.join("queries.bin"))
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .arg("--report-out")
        .arg(dir.join("r.json")));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validation_errors_exit_one() {
    let dir = tmp("exit1");
    run_ok(bin().args([
        "synth", "--n", "30", "--dim", "4", "--sigma", "0.1", "--seed", "1", "--out",
    ]).arg(&dir));
    // Weight 1.0 is rejected for PR generation.
    let out = bin()
        .arg("run")
        .arg("--refs")
        .arg(dir.join("refs.csv"))
        .arg("--queries")
        .arg(dir.join("queries.csv"))
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .args(["--weight", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("weight"), "stderr: {stderr}");

    // Malformed descriptor file names the offending row.
    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "nan,1.0\n2.0,3.0\n").unwrap();
    let out = bin()
        .arg("run")
        .arg("--refs")
        .arg(&bad)
        .arg("--queries")
        .arg(dir.join("queries.csv"))
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 0"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn io_errors_exit_two() {
    let out = bin()
        .arg("predict")
        .args(["--distmat", "/nonexistent/never.csv", "--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undecodable_image_exits_one() {
    let dir = tmp("badimg");
    let refs_dir = dir.join("refs");
    std::fs::create_dir_all(&refs_dir).unwrap();
    std::fs::write(refs_dir.join("a.png"), b"this is not a png").unwrap();
    std::fs::write(refs_dir.join("b.png"), b"neither is this").unwrap();
    std::fs::write(dir.join("gt.csv"), "0\n1\n").unwrap();
    let out = bin()
        .arg("run")
        .arg("--ref-images")
        .arg(&refs_dir)
        .arg("--query-images")
        .arg(&refs_dir)
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("decode"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_flags_exit_one() {
    let out = bin().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["distmat", "predict", "seqmatch", "eval", "synth", "bench", "run"] {
        assert!(help.contains(sub), "help must document {sub}");
    }
}

#[test]
fn config_file_drives_run_and_flags_override() {
    let dir = tmp("cfg");
    run_ok(bin().args([
        "synth", "--n", "60", "--dim", "8", "--sigma", "0.1", "--alias", "0.1", "--seed", "3",
        "--out",
    ]).arg(&dir));
    let config = serde_json::json!({
        "refs": dir.join("refs.csv"),
        "queries": dir.join("queries.csv"),
        "gt": dir.join("gt.csv"),
        "metric": "euclidean",
        "weight": 0.5,
        "seq_len": 2,
        "report_out": dir.join("from_file.json"),
    });
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    run_ok(bin().arg("run").arg("--config").arg(&cfg_path));
    assert!(dir.join("from_file.json").exists());

    // A flag overrides the file value; echoes must reflect it.
    run_ok(bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .args(["--weight", "0.25"])
        .arg("--report-out")
        .arg(dir.join("override.json")));
    let text = std::fs::read_to_string(dir.join("override.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["weight"].as_f64(), Some(0.25));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn image_directories_feed_the_pipeline() {
    let dir = tmp("imgs");
    let refs_dir = dir.join("refs");
    let queries_dir = dir.join("queries");
    std::fs::create_dir_all(&refs_dir).unwrap();
    std::fs::create_dir_all(&queries_dir).unwrap();

    // Six distinctive frames; queries reuse the reference scenes so ground
    // truth is the identity.
    for k in 0..6u32 {
        let img = image::RgbImage::from_fn(128, 64, |x, y| {
            let phase = (x + k * 17) as f32 * 0.2 + y as f32 * 0.1;
            let v = ((phase.sin() * 0.5 + 0.5) * 255.0) as u8;
            image::Rgb([v, v / 2 + (k * 30) as u8 % 128, 255 - v])
        });
        img.save(refs_dir.join(format!("frame_{k:03}.png"))).unwrap();
        img.save(queries_dir.join(format!("frame_{k:03}.png"))).unwrap();
    }
    std::fs::write(dir.join("gt.csv"), "0\n1\n2\n3\n4\n5\n").unwrap();

    let report = dir.join("report.json");
    run_ok(bin()
        .arg("run")
        .arg("--ref-images")
        .arg(&refs_dir)
        .arg("--query-images")
        .arg(&queries_dir)
        .arg("--gt")
        .arg(dir.join("gt.csv"))
        .args(["--seq-len", "1", "--weight", "0.0"])
        .arg("--report-out")
        .arg(&report));
    // Identical images match exactly, so the report must show perfect
    // precision at full recall.
    let auc = json_field(&report, "auc");
    assert_eq!(auc, 1.0);
    let text = std::fs::read_to_string(&report).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let last = v["operating_points"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["fp"].as_u64(), Some(0));
    assert_eq!(last["recall"].as_f64(), Some(1.0));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn w0_l1_equals_single_frame_baseline() {
    let dir = tmp("base");
    run_ok(bin().args([
        "synth", "--n", "100", "--dim", "8", "--sigma", "0.15", "--alias", "0.2", "--seed",
        "12", "--out",
    ]).arg(&dir));
    let distmat = dir.join("d.csv");
    run_ok(bin()
        .args(["distmat", "--metric", "euclidean", "--refs"])
        .arg(dir.join("refs.csv"))
        .arg("--queries")
        .arg(dir.join("queries.csv"))
        .arg("--out")
        .arg(&distmat));

    // Single-frame matches (mask forced to all-ones via seqmatch weight 0,
    // L=1, which must reduce to the raw distance argmin per query).
    let seq_matches = dir.join("seq.csv");
    run_ok(bin()
        .arg("seqmatch")
        .arg("--distmat")
        .arg(&distmat)
        .args(["--weight", "0.0", "--seq-len", "1"])
        .arg("--matches-out")
        .arg(&seq_matches));
    let single_matches = dir.join("single.csv");
    run_ok(bin()
        .arg("predict")
        .arg("--distmat")
        .arg(&distmat)
        .arg("--out")
        .arg(dir.join("pred.csv"))
        .arg("--matches-out")
        .arg(&single_matches));

    let seq = std::fs::read_to_string(&seq_matches).unwrap();
    let single = std::fs::read_to_string(&single_matches).unwrap();
    // Columns query,reference,score must agree line by line (the accepted
    // bit differs: predict writes the mask, seqmatch accepts everything).
    for (a, b) in seq.lines().zip(single.lines()) {
        let a: Vec<&str> = a.split(',').collect();
        let b: Vec<&str> = b.split(',').collect();
        assert_eq!(a[..3], b[..3]);
    }
    std::fs::remove_dir_all(&dir).ok();
}
