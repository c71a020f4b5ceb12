//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (visible with --nocapture).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lexforge::anchors::{filter_anchor_points, AnchorConfig, PathPoint};
use lexforge::binvec::BinaryVector;
use lexforge::dtw::dtw_match;
use lexforge::pipeline::{emit_outputs, evaluate, run_pipeline, PipelineConfig};
use lexforge::posvec::{candidate_pairs, DiffVector, PrefilterConfig, WordSignal};
use lexforge::synth::{generate, write_fixture, PairKind, SynthConfig};
use lexforge::Stage;

fn pass(criterion: usize, name: &str, details: &str) {
    println!("acceptance criterion {criterion} ({name}): PASS — {details}");
}

/// Exhaustive oracle for criterion 1: minimum cost over every monotone
/// continuous path, found by plain recursion.
fn enumerate_min_cost(v1: &[u64], v2: &[u64], i: usize, j: usize) -> f64 {
    let local = v1[i - 1].abs_diff(v2[j - 1]) as f64;
    if i == v1.len() && j == v2.len() {
        return local;
    }
    let mut best = f64::INFINITY;
    if i < v1.len() {
        best = best.min(enumerate_min_cost(v1, v2, i + 1, j));
    }
    if j < v2.len() {
        best = best.min(enumerate_min_cost(v1, v2, i, j + 1));
    }
    if i < v1.len() && j < v2.len() {
        best = best.min(enumerate_min_cost(v1, v2, i + 1, j + 1));
    }
    local + best
}

#[test]
fn criterion_1_dtw_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD7);
    for round in 0..1000 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=6);
        let v1: Vec<u64> = (0..n).map(|_| rng.random_range(1..1_000_000)).collect();
        let v2: Vec<u64> = (0..m).map(|_| rng.random_range(1..1_000_000)).collect();
        let res = dtw_match(
            &DiffVector {
                word: "a".into(),
                values: v1.clone(),
            },
            &DiffVector {
                word: "b".into(),
                values: v2.clone(),
            },
        )
        .unwrap();
        let expected = enumerate_min_cost(&v1, &v2, 1, 1);
        assert_eq!(
            res.raw_cost, expected,
            "round {round}: v1={v1:?} v2={v2:?}"
        );
        assert!(res.path_is_valid(n, m), "round {round}: bad path");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "oracle comparison took {elapsed:?}"
    );
    pass(
        1,
        "dtw oracle equivalence",
        &format!("1000 random pairs exact in {elapsed:?} (< 10 s)"),
    );
}

#[test]
fn criterion_2_mutual_information_closed_forms() {
    let bits = [14usize, 29, 41, 47, 193, 275, 321, 360];
    let v = BinaryVector::from_segments("w", "w", bits.iter().copied(), 388).unwrap();
    let m = lexforge::binvec::mutual_info(&v, &v).unwrap();
    assert!((m - 5.600).abs() <= 0.001, "identical-vector m = {m}");

    let a = BinaryVector::from_segments("a", "a", [1usize, 2, 3].into_iter(), 388).unwrap();
    let b = BinaryVector::from_segments("b", "b", [10usize, 20, 30].into_iter(), 388).unwrap();
    let disjoint = lexforge::binvec::mutual_info(&a, &b).unwrap();
    assert_eq!(disjoint, f64::NEG_INFINITY);
    pass(
        2,
        "mutual information closed forms",
        &format!("identical 8-bit vectors m = {m:.4} (5.600 ± 0.001); disjoint m = -inf"),
    );
}

#[test]
fn criterion_3_worked_example_formulas() {
    let a = BinaryVector::from_segments(
        "prosperity",
        "prosperity",
        [20usize, 27, 41, 47, 193, 321, 360].into_iter(),
        388,
    )
    .unwrap();
    let b = BinaryVector::from_segments(
        "fanrong",
        "fanrong",
        [14usize, 29, 41, 47, 193, 275, 321, 360].into_iter(),
        388,
    )
    .unwrap();
    assert_eq!(a.ones(), 7);
    assert_eq!(b.ones(), 8);
    assert_eq!(a.overlap(&b).unwrap(), 5);

    let m = lexforge::binvec::mutual_info(&a, &b).unwrap();
    let t = lexforge::binvec::t_score(&a, &b).unwrap();
    assert!((m - 5.1145).abs() <= 0.001, "m = {m}");
    assert!((t - 2.171).abs() <= 0.001, "t = {t}");
    pass(
        3,
        "worked example formulas",
        &format!("7/8 set bits, overlap 5, L = 388: m = {m:.4} (5.1145 ± 0.001), t = {t:.4} (2.171 ± 0.001)"),
    );
}

/// Independent second implementation of the anchor keep-scan for
/// criterion 4: indexed while-loop, no iterator combinators.
fn second_scan(
    points: &[PathPoint],
    cfg: &AnchorConfig,
    source_len: usize,
    target_len: usize,
) -> Vec<PathPoint> {
    let mut sorted: Vec<PathPoint> = points.to_vec();
    sorted.sort_by(|a, b| if a.i != b.i { a.i.cmp(&b.i) } else { a.j.cmp(&b.j) });
    let slope = target_len as f64 / source_len as f64;
    let band = cfg.slope_band_fraction * target_len as f64;
    let min_gap = if cfg.min_gap_source < 1 { 1 } else { cfg.min_gap_source };

    let mut kept: Vec<PathPoint> = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let p = sorted[k];
        k += 1;
        let deviation = p.j as f64 - p.i as f64 * slope;
        if deviation > band || deviation < -band {
            continue;
        }
        if let Some(q) = kept.last() {
            if p.i < q.i + min_gap || p.j <= q.j || p.j - q.j > cfg.max_jump_target {
                continue;
            }
        }
        kept.push(p);
    }
    kept
}

#[test]
fn criterion_4_anchor_filter_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let started = Instant::now();
    let mut total_points = 0usize;
    for round in 0..10_000 {
        let source_len = rng.random_range(500..20_000);
        let target_len = rng.random_range(500..20_000);
        let n = rng.random_range(10..300);
        let slope = target_len as f64 / source_len as f64;
        let points: Vec<PathPoint> = (0..n)
            .map(|_| {
                let i = rng.random_range(0..source_len);
                let noise = rng.random_range(0..2000) as i64 - 1000;
                let j = ((i as f64 * slope) as i64 + noise)
                    .clamp(0, target_len as i64 - 1) as usize;
                PathPoint { i, j }
            })
            .collect();
        total_points += n;
        let cfg = AnchorConfig {
            slope_band_fraction: [0.02, 0.05, 0.1, 0.3][round % 4],
            min_gap_source: rng.random_range(1..100),
            max_jump_target: rng.random_range(50..2000),
        };
        let scan = filter_anchor_points(&points, &cfg, source_len, target_len);
        assert!(
            scan.anchors.is_strictly_monotone(),
            "round {round}: output not strictly monotone"
        );
        let expected = second_scan(&points, &cfg, source_len, target_len);
        assert_eq!(
            scan.anchors.points(),
            expected.as_slice(),
            "round {round}: filter disagrees with second implementation"
        );
    }
    pass(
        4,
        "anchor filter invariants",
        &format!(
            "10000 random clouds ({total_points} points) strictly monotone and oracle-equal in {:?}",
            started.elapsed()
        ),
    );
}

#[test]
fn criterion_5_synthetic_end_to_end() {
    // 100k tokens per side, 150 high + 50 low planted pairs, jitter
    // +/- 15 tokens, 5% one-sided noise blocks.
    let synth = SynthConfig::default();
    assert_eq!(synth.tokens, 100_000);
    assert_eq!(synth.pairs, 200);
    assert_eq!(synth.jitter, 15);
    assert_eq!(synth.noise_fraction, 0.05);
    let corpus = generate(&synth);
    assert_eq!(corpus.planted_of_kind(PairKind::HighFrequency).len(), 150);
    assert_eq!(corpus.planted_of_kind(PairKind::LowFrequency).len(), 50);

    let dir = tempfile::tempdir().unwrap();
    write_fixture(&corpus, dir.path()).unwrap();

    let cfg = PipelineConfig::default();
    let started = Instant::now();
    let out = run_pipeline(
        &cfg,
        &dir.path().join("source.txt"),
        &dir.path().join("target.txt"),
    )
    .unwrap();
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "pipeline took {elapsed:?}");

    let gold = corpus.gold_map();

    // Primary precision@1 over recovered planted high-frequency words.
    let high: BTreeSet<String> = corpus
        .planted_of_kind(PairKind::HighFrequency)
        .iter()
        .map(|p| p.source_word.to_lowercase())
        .collect();
    let recovered: Vec<_> = out
        .lexicon
        .iter()
        .filter(|e| e.stage == Stage::Primary && high.contains(&e.source_key()))
        .cloned()
        .collect();
    assert!(!recovered.is_empty(), "no high-frequency words recovered");
    let primary_report = evaluate(&recovered, &gold, 1);
    let primary_p1 = primary_report.primary.precision();
    assert!(
        primary_p1 >= 0.90,
        "primary precision@1 = {primary_p1:.3} over {} recovered words",
        recovered.len()
    );

    // Secondary: planted low-frequency pairs found in the top three.
    let low = corpus.planted_of_kind(PairKind::LowFrequency);
    let secondary_by_key: BTreeMap<String, &lexforge::LexiconEntry> = out
        .lexicon
        .iter()
        .filter(|e| e.stage == Stage::Secondary)
        .map(|e| (e.source_key(), e))
        .collect();
    let mut low_hits = 0;
    for pair in &low {
        let key = pair.source_word.to_lowercase();
        if let Some(entry) = secondary_by_key.get(&key) {
            if entry
                .candidates
                .iter()
                .filter(|c| c.rank <= 3)
                .any(|c| c.target_word == pair.target_word)
            {
                low_hits += 1;
            }
        }
    }
    let secondary_p3 = low_hits as f64 / low.len() as f64;
    assert!(
        secondary_p3 >= 0.70,
        "secondary top-3 recovery = {secondary_p3:.3} ({low_hits}/{})",
        low.len()
    );

    pass(
        5,
        "synthetic end-to-end",
        &format!(
            "primary precision@1 = {primary_p1:.3} over {} recovered (>= 0.90); \
             secondary top-3 = {secondary_p3:.3} ({low_hits}/{}) (>= 0.70); wall {elapsed:?} (< 60 s)",
            recovered.len(),
            low.len()
        ),
    );
}

#[test]
fn criterion_6_determinism() {
    let corpus = generate(&SynthConfig {
        seed: 6,
        tokens: 30_000,
        pairs: 60,
        ..SynthConfig::default()
    });
    let dir = tempfile::tempdir().unwrap();
    write_fixture(&corpus, dir.path()).unwrap();
    let source = dir.path().join("source.txt");
    let target = dir.path().join("target.txt");
    let cfg = PipelineConfig::default();

    let mut snapshots = Vec::new();
    for run in 0..2 {
        let out = run_pipeline(&cfg, &source, &target).unwrap();
        let out_dir = dir.path().join(format!("run{run}"));
        emit_outputs(&out, &cfg, &out_dir).unwrap();
        let lexicon = std::fs::read(out_dir.join("lexicon.tsv")).unwrap();
        let report = std::fs::read(out_dir.join("report.txt")).unwrap();
        snapshots.push((lexicon, report));
    }
    assert_eq!(snapshots[0].0, snapshots[1].0, "lexicon TSV differs");
    assert_eq!(snapshots[0].1, snapshots[1].1, "report differs");
    pass(
        6,
        "determinism",
        &format!(
            "two runs produced byte-identical lexicon ({} bytes) and report ({} bytes)",
            snapshots[0].0.len(),
            snapshots[0].1.len()
        ),
    );
}

#[test]
fn criterion_7_partition_property() {
    let mut checked_offsets = 0usize;
    for seed in [7u64, 70, 700] {
        let corpus = generate(&SynthConfig {
            seed,
            tokens: 10_000,
            pairs: 20,
            ..SynthConfig::default()
        });
        let out =
            lexforge::pipeline::run_on_sides(&PipelineConfig::default(), &corpus.source, &corpus.target)
                .unwrap();
        let seg = &out.segmentation;
        let count = seg.segment_count();

        let source_spans: Vec<_> = (0..count).map(|k| seg.source_span(k).unwrap()).collect();
        let target_spans: Vec<_> = (0..count).map(|k| seg.target_span(k).unwrap()).collect();
        assert_eq!(source_spans.len(), target_spans.len(), "side segment counts differ");

        for offset in 0..seg.source_len() {
            let k = seg.source_segment_of(offset);
            assert!(source_spans[k].contains(&offset));
            let owners = source_spans.iter().filter(|s| s.contains(&offset)).count();
            assert_eq!(owners, 1, "source offset {offset} in {owners} segments");
        }
        for offset in 0..seg.target_len() {
            let k = seg.target_segment_of(offset);
            assert!(target_spans[k].contains(&offset));
            let owners = target_spans.iter().filter(|s| s.contains(&offset)).count();
            assert_eq!(owners, 1, "target offset {offset} in {owners} segments");
        }
        checked_offsets += seg.source_len() + seg.target_len();
    }
    pass(
        7,
        "partition property",
        &format!("{checked_offsets} offsets over 3 fixture runs each in exactly one segment"),
    );
}

/// Longhand four-condition check for criterion 8.
fn brute_force_prefilter(
    source: &BTreeMap<String, WordSignal>,
    source_len: usize,
    target: &BTreeMap<String, WordSignal>,
    target_len: usize,
    cfg: &PrefilterConfig,
) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (sw, s) in source {
        for (tw, t) in target {
            if s.count < cfg.min_frequency || t.count < cfg.min_frequency {
                continue;
            }
            let hi = s.count.max(t.count) as f64;
            let lo = s.count.min(t.count) as f64;
            if hi / lo > cfg.max_freq_ratio {
                continue;
            }
            let ds = s.first_position as f64 / source_len as f64
                - t.first_position as f64 / target_len as f64;
            if ds.abs() > cfg.max_start_offset_ratio {
                continue;
            }
            let dm = s.stats.mean - t.stats.mean;
            let dd = s.stats.std - t.stats.std;
            if (dm * dm + dd * dd).sqrt() > cfg.euclid_threshold {
                continue;
            }
            out.push((sw.clone(), tw.clone()));
        }
    }
    out
}

fn random_signal_universe(seed: u64, n: usize, len: usize) -> BTreeMap<String, WordSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = BTreeMap::new();
    for k in 0..n {
        let count = rng.random_range(2..60);
        let mut positions: Vec<usize> = (0..count).map(|_| rng.random_range(0..len)).collect();
        positions.sort_unstable();
        positions.dedup();
        if positions.len() < 2 {
            positions = vec![k, k + len / 2];
        }
        let word = format!("w{k:03}");
        let pv = lexforge::corpus::PositionVector {
            word: word.clone(),
            display: word.clone(),
            positions,
        };
        let diffs = lexforge::posvec::diff_vector(&pv).unwrap();
        let stats = lexforge::posvec::stats(&diffs);
        map.insert(
            word.clone(),
            WordSignal {
                word,
                display: pv.display.clone(),
                count: pv.count(),
                first_position: pv.first(),
                diffs,
                stats,
            },
        );
    }
    map
}

#[test]
fn criterion_8_prefilter_monotonicity_and_oracle() {
    let source = random_signal_universe(81, 50, 40_000);
    let target = random_signal_universe(82, 50, 36_000);

    let mut previous: Option<BTreeSet<(String, String)>> = None;
    let mut checked = 0usize;
    for threshold in [0.0, 5.0, 25.0, 100.0, 400.0, 1500.0, 6000.0, f64::MAX] {
        let cfg = PrefilterConfig {
            min_frequency: 4,
            max_freq_ratio: 3.0,
            max_start_offset_ratio: 0.4,
            euclid_threshold: threshold,
        };
        let got = candidate_pairs(&source, 40_000, &target, 36_000, &cfg);
        let expected = brute_force_prefilter(&source, 40_000, &target, 36_000, &cfg);
        assert_eq!(got, expected, "mismatch at threshold {threshold}");

        let as_set: BTreeSet<(String, String)> = got.into_iter().collect();
        if let Some(prev) = &previous {
            assert!(
                prev.is_subset(&as_set),
                "raising threshold to {threshold} removed pairs"
            );
        }
        checked += as_set.len();
        previous = Some(as_set);
    }
    pass(
        8,
        "prefilter monotonicity and oracle",
        &format!(
            "8 thresholds over a 50x50 universe: brute-force equal, monotone ({checked} pair checks)"
        ),
    );
}
