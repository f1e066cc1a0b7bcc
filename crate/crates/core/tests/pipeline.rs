//! Cross-module flows through the public API: masked single-frame
//! evaluation with false-negative accounting, gradient-only comparison, and
//! curve properties on generated traverses.

use seqvpr_core::*;

fn instance(seed: u64, alias: f64) -> (DistanceMatrix, GroundTruth) {
    let cfg = SynthConfig {
        n_refs: 150,
        descriptor_dim: 16,
        noise_sigma: 0.12,
        alias_rate: alias,
        drift: 0,
        seed,
        walk_step: None,
    };
    let (refs, queries, gt) = generate_traverse(&cfg).unwrap();
    let d = DistanceMatrix::compute(&refs, &queries, Metric::Euclidean).unwrap();
    (d, gt)
}

#[test]
fn masked_single_frame_truncates_recall_and_counts_false_negatives() {
    let (d, gt) = instance(21, 0.25);
    let g = GradientMatrix::from_distance(&d).unwrap();
    let pred = consensus_predict(&d, &g).unwrap();
    let candidates = best_matches(&d);
    let (kept, abstained) = mask_matches(&candidates, pred.flags()).unwrap();
    assert!(!kept.is_empty());
    assert!(!abstained.is_empty());

    let counts = confusion(&kept, &abstained, &gt).unwrap();
    let good_discarded = abstained
        .iter()
        .filter(|a| gt.in_tolerance(a.query, a.candidate))
        .count();
    assert_eq!(counts.fn_count, good_discarded);

    let curve = pr_curve(&kept, &abstained, &gt, ScoreDirection::MinIsBest).unwrap();
    // Recall can never reach 1 once a good candidate has been discarded;
    // the curve is truncated at the retained-good fraction exactly.
    assert!(good_discarded > 0);
    assert!(curve.max_recall() < 1.0);
    let retained_good = kept
        .iter()
        .filter(|c| gt.in_tolerance(c.query, c.reference))
        .count();
    let expect = retained_good as f64 / (retained_good + good_discarded) as f64;
    assert!((curve.max_recall() - expect).abs() < 1e-12);
}

#[test]
fn perfect_mask_gives_unit_precision_curve() {
    let (d, gt) = instance(33, 0.3);
    let candidates = best_matches(&d);
    let mask = perfect_predictions(&candidates, &gt).unwrap();
    let (kept, abstained) = mask_matches(&candidates, &mask).unwrap();
    let curve = pr_curve(&kept, &abstained, &gt, ScoreDirection::MinIsBest).unwrap();
    for p in &curve.points {
        assert_eq!(p.precision, 1.0);
    }
    assert!((auc_at_recall(&curve, 0.2).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn gradient_only_matching_is_a_weaker_single_frame_system() {
    // The gradient argmax alone is a usable but noisier matcher; its curve
    // must at least produce valid points swept in the max-is-best direction.
    let (d, gt) = instance(8, 0.1);
    let g = GradientMatrix::from_distance(&d).unwrap();
    let matches: Vec<MatchCandidate> = (0..d.n_queries())
        .map(|j| gradient_only_match(&g, j).unwrap())
        .collect();
    let curve = pr_curve(&matches, &[], &gt, ScoreDirection::MaxIsBest).unwrap();
    let mut prev_recall = 0.0;
    let mut prev_threshold = f64::INFINITY;
    for p in &curve.points {
        assert!(p.recall >= prev_recall);
        assert!(p.threshold <= prev_threshold);
        prev_recall = p.recall;
        prev_threshold = p.threshold;
    }
}

#[test]
fn auc_is_one_exactly_when_precision_is_one_up_to_the_bound() {
    let (d, gt) = instance(5, 0.2);
    let matches = best_matches(&d);
    let curve = pr_curve(&matches, &[], &gt, ScoreDirection::MinIsBest).unwrap();
    let auc = auc_at_recall(&curve, 0.2).unwrap();
    let perfect_prefix = curve
        .points
        .iter()
        .take_while(|p| p.recall <= 0.2)
        .all(|p| p.precision == 1.0)
        && curve.max_recall() >= 0.2
        && curve
            .points
            .iter()
            .find(|p| p.recall >= 0.2)
            .map(|p| p.precision == 1.0)
            .unwrap_or(false);
    if perfect_prefix {
        assert!((auc - 1.0).abs() < 1e-9);
    } else {
        assert!(auc < 1.0 + 1e-12);
    }
    assert!((0.0..=1.0).contains(&auc));
}

#[test]
fn weighted_sequence_beats_baseline_with_perfect_predictions() {
    // The composition example: moderate aliasing, perfect predictions,
    // weighted AUC at least matches the unweighted sequence.
    let (d, gt) = instance(14, 0.25);
    let candidates = best_matches(&d);
    let mask = perfect_predictions(&candidates, &gt).unwrap();
    let auc = |mask: &[bool], w: f64| {
        let dw = weight_matrix(&d, mask, w, DminMode::Global).unwrap();
        let s = sequence_scores(&dw, 2).unwrap();
        let matches: Vec<MatchCandidate> = best_sequence_matches(&s)
            .into_iter()
            .map(|m| m.to_candidate())
            .collect();
        pr_curve(&matches, &[], &gt, ScoreDirection::MinIsBest)
            .unwrap()
            .auc_20r
    };
    let baseline = auc(&vec![false; d.n_queries()], 0.0);
    let weighted = auc(&mask, 0.99);
    assert!(weighted >= baseline, "weighted {weighted} < baseline {baseline}");
}

#[test]
fn ground_truth_reference_bounds_are_validated() {
    let gt = GroundTruth::new(vec![0, 5, 2], 1).unwrap();
    assert!(gt.validate_refs(6).is_ok());
    assert!(gt.validate_refs(5).is_err());
}
