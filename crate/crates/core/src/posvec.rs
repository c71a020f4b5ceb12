//! Positional difference vectors and the statistical prefilter.
//!
//! A word's occurrence offsets become a vector of consecutive gaps, the
//! signal later matched by time warping. Before any matching, cheap
//! frequency and distribution checks cut the pair universe down:
//! occurrence-count floor and ratio, normalized starting-offset agreement,
//! and the Euclidean distance between (mean, std) of the gap vectors.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::PositionVector;
use crate::error::{Error, Result};

/// Consecutive position gaps of one word; the matching signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffVector {
    pub word: String,
    /// Token-offset gaps, every value >= 1.
    pub values: Vec<u64>,
}

impl DiffVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Gap distribution summary used by the Euclidean prefilter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Builds the difference vector of a position vector.
///
/// Needs at least two occurrences; the result has one entry per gap, so
/// its dimension is the occurrence count minus one.
pub fn diff_vector(p: &PositionVector) -> Result<DiffVector> {
    if p.count() < 2 {
        return Err(Error::InsufficientFrequency {
            word: p.word.clone(),
            count: p.count(),
            required: 2,
        });
    }
    let values = p
        .positions
        .windows(2)
        .map(|w| (w[1] - w[0]) as u64)
        .collect();
    Ok(DiffVector {
        word: p.word.clone(),
        values,
    })
}

/// Mean and population standard deviation of the gaps.
pub fn stats(v: &DiffVector) -> VectorStats {
    let n = v.values.len() as f64;
    let sum: f64 = v.values.iter().map(|&x| x as f64).sum();
    let sum_sq: f64 = v.values.iter().map(|&x| (x as f64) * (x as f64)).sum();
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0);
    VectorStats {
        mean,
        std: variance.sqrt(),
    }
}

/// Distance between two gap distributions in (mean, std) space.
pub fn euclid_distance(a: &VectorStats, b: &VectorStats) -> f64 {
    let dm = a.mean - b.mean;
    let ds = a.std - b.std;
    (dm * dm + ds * ds).sqrt()
}

/// Everything the prefilter needs to know about one word.
#[derive(Debug, Clone)]
pub struct WordSignal {
    pub word: String,
    pub display: String,
    pub count: usize,
    pub first_position: usize,
    pub diffs: DiffVector,
    pub stats: VectorStats,
}

/// Builds prefilter signals for every word with at least two occurrences.
pub fn build_signals(positions: &BTreeMap<String, PositionVector>) -> BTreeMap<String, WordSignal> {
    positions
        .iter()
        .filter(|(_, p)| p.count() >= 2)
        .map(|(word, p)| {
            let diffs = diff_vector(p).expect("count >= 2 checked");
            let stats = stats(&diffs);
            (
                word.clone(),
                WordSignal {
                    word: word.clone(),
                    display: p.display.clone(),
                    count: p.count(),
                    first_position: p.first(),
                    diffs,
                    stats,
                },
            )
        })
        .collect()
}

/// Thresholds for the four-condition pair prefilter.
#[derive(Debug, Clone, Copy)]
pub struct PrefilterConfig {
    pub min_frequency: usize,
    pub max_freq_ratio: f64,
    pub max_start_offset_ratio: f64,
    pub euclid_threshold: f64,
}

impl PrefilterConfig {
    /// True when a single source/target pair passes all four conditions.
    pub fn admits(
        &self,
        src: &WordSignal,
        source_len: usize,
        tgt: &WordSignal,
        target_len: usize,
    ) -> bool {
        if src.count < self.min_frequency || tgt.count < self.min_frequency {
            return false;
        }
        let (hi, lo) = if src.count >= tgt.count {
            (src.count, tgt.count)
        } else {
            (tgt.count, src.count)
        };
        if hi as f64 / lo as f64 > self.max_freq_ratio {
            return false;
        }
        let src_start = src.first_position as f64 / source_len as f64;
        let tgt_start = tgt.first_position as f64 / target_len as f64;
        if (src_start - tgt_start).abs() > self.max_start_offset_ratio {
            return false;
        }
        euclid_distance(&src.stats, &tgt.stats) <= self.euclid_threshold
    }
}

/// Runs the prefilter over the source x target word universe.
///
/// Output is the admitted subset of the cross product in lexicographic
/// (source, target) order, independent of evaluation partitioning.
pub fn candidate_pairs(
    source: &BTreeMap<String, WordSignal>,
    source_len: usize,
    target: &BTreeMap<String, WordSignal>,
    target_len: usize,
    cfg: &PrefilterConfig,
) -> Vec<(String, String)> {
    let sources: Vec<&WordSignal> = source.values().collect();
    sources
        .par_iter()
        .map(|src| {
            target
                .values()
                .filter(|tgt| cfg.admits(src, source_len, tgt, target_len))
                .map(|tgt| (src.word.clone(), tgt.word.clone()))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(word: &str, positions: Vec<usize>) -> PositionVector {
        PositionVector {
            word: word.to_string(),
            display: word.to_string(),
            positions,
        }
    }

    fn signal_from_positions(word: &str, positions: Vec<usize>) -> WordSignal {
        let p = pv(word, positions);
        let diffs = diff_vector(&p).unwrap();
        let stats = stats(&diffs);
        WordSignal {
            word: word.to_string(),
            display: word.to_string(),
            count: p.count(),
            first_position: p.first(),
            diffs,
            stats,
        }
    }

    #[test]
    fn single_gap() {
        for d in [1usize, 2, 17, 3000] {
            let v = diff_vector(&pv("w", vec![5, 5 + d])).unwrap();
            assert_eq!(v.values, vec![d as u64]);
            assert_eq!(v.dim(), 1);
        }
    }

    #[test]
    fn gap_between_first_two_occurrences() {
        // Oracle: direct subtraction of the listed offsets.
        let v = diff_vector(&pv("prosperity", vec![2178, 5322])).unwrap();
        assert_eq!(v.values, vec![5322 - 2178]);
        assert_eq!(v.values, vec![3144]);
    }

    #[test]
    fn uniform_spacing() {
        let v = diff_vector(&pv("w", vec![0, 1, 2, 3])).unwrap();
        assert_eq!(v.values, vec![1, 1, 1]);
    }

    #[test]
    fn single_occurrence_is_insufficient() {
        let err = diff_vector(&pv("rare", vec![42])).unwrap_err();
        assert!(matches!(err, Error::InsufficientFrequency { count: 1, .. }));
    }

    #[test]
    fn stats_constant_vector() {
        let v = DiffVector {
            word: "w".into(),
            values: vec![7, 7, 7],
        };
        let s = stats(&v);
        assert_eq!(s.mean, 7.0);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn stats_closed_form() {
        let v = DiffVector {
            word: "w".into(),
            values: vec![1, 3],
        };
        let s = stats(&v);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn stats_matches_two_pass_oracle() {
        // Oracle: two-pass mean then centered variance, unlike the
        // single-pass sums used by the implementation.
        let values: Vec<u64> = vec![
            312, 4, 998, 57, 57, 1023, 4096, 12, 700, 700, 699, 1, 88, 3000, 2999, 45, 46, 47,
            2048, 511,
        ];
        let v = DiffVector {
            word: "w".into(),
            values: values.clone(),
        };
        let s = stats(&v);

        let n = values.len() as f64;
        let mean: f64 = values.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var: f64 = values
            .iter()
            .map(|&x| {
                let d = x as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let std = var.sqrt();

        assert!((s.mean - mean).abs() <= 1e-9 * mean.abs());
        assert!((s.std - std).abs() <= 1e-9 * std.abs());
    }

    #[test]
    fn euclid_identity_and_triangle() {
        let a = VectorStats {
            mean: 100.0,
            std: 50.0,
        };
        assert_eq!(euclid_distance(&a, &a), 0.0);
        let b = VectorStats {
            mean: 103.0,
            std: 54.0,
        };
        assert_eq!(euclid_distance(&a, &b), 5.0);
    }

    proptest! {
        #[test]
        fn euclid_is_symmetric(m1 in 0.0f64..1e5, s1 in 0.0f64..1e4, m2 in 0.0f64..1e5, s2 in 0.0f64..1e4) {
            let a = VectorStats { mean: m1, std: s1 };
            let b = VectorStats { mean: m2, std: s2 };
            prop_assert_eq!(euclid_distance(&a, &b), euclid_distance(&b, &a));
        }

        #[test]
        fn cumulative_sum_reconstructs_positions(start in 0usize..1000, gaps in proptest::collection::vec(1usize..500, 1..40)) {
            let mut positions = vec![start];
            for g in &gaps {
                positions.push(positions.last().unwrap() + g);
            }
            let p = pv("w", positions.clone());
            let v = diff_vector(&p).unwrap();
            let mut rebuilt = vec![p.positions[0]];
            for d in &v.values {
                rebuilt.push(rebuilt.last().unwrap() + *d as usize);
            }
            prop_assert_eq!(rebuilt, positions);
        }
    }

    fn default_cfg() -> PrefilterConfig {
        PrefilterConfig {
            min_frequency: 2,
            max_freq_ratio: 2.0,
            max_start_offset_ratio: 0.3,
            euclid_threshold: 100.0,
        }
    }

    #[test]
    fn euclid_threshold_excludes_distant_pair() {
        let src = signal_from_positions("s", vec![0, 10, 20, 30]);
        let tgt = signal_from_positions("t", vec![0, 500, 1000, 1500]);
        let mut source = BTreeMap::new();
        source.insert("s".to_string(), src);
        let mut target = BTreeMap::new();
        target.insert("t".to_string(), tgt);
        let got = candidate_pairs(&source, 2000, &target, 2000, &default_cfg());
        assert!(got.is_empty());
    }

    #[test]
    fn identical_signal_pair_is_included_for_any_positive_threshold() {
        let positions = vec![3, 40, 98, 200, 455];
        let mut source = BTreeMap::new();
        source.insert("s".to_string(), signal_from_positions("s", positions.clone()));
        let mut target = BTreeMap::new();
        target.insert("t".to_string(), signal_from_positions("t", positions));
        for threshold in [1e-12, 0.1, 5.0] {
            let cfg = PrefilterConfig {
                euclid_threshold: threshold,
                ..default_cfg()
            };
            let got = candidate_pairs(&source, 500, &target, 500, &cfg);
            assert_eq!(got, vec![("s".to_string(), "t".to_string())]);
        }
    }

    /// Brute-force oracle: re-checks every pair of the cross product with
    /// the four conditions spelled out longhand.
    pub(crate) fn brute_force_pairs(
        source: &BTreeMap<String, WordSignal>,
        source_len: usize,
        target: &BTreeMap<String, WordSignal>,
        target_len: usize,
        cfg: &PrefilterConfig,
    ) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (sw, s) in source {
            for (tw, t) in target {
                let freq_ok = s.count >= cfg.min_frequency && t.count >= cfg.min_frequency;
                let ratio = s.count.max(t.count) as f64 / s.count.min(t.count) as f64;
                let ratio_ok = ratio <= cfg.max_freq_ratio;
                let start_ok = (s.first_position as f64 / source_len as f64
                    - t.first_position as f64 / target_len as f64)
                    .abs()
                    <= cfg.max_start_offset_ratio;
                let dm = s.stats.mean - t.stats.mean;
                let ds = s.stats.std - t.stats.std;
                let euclid_ok = (dm * dm + ds * ds).sqrt() <= cfg.euclid_threshold;
                if freq_ok && ratio_ok && start_ok && euclid_ok {
                    out.push((sw.clone(), tw.clone()));
                }
            }
        }
        out
    }

    fn random_universe(seed: u64, n: usize) -> (BTreeMap<String, WordSignal>, usize) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let len = 20_000;
        let mut map = BTreeMap::new();
        for k in 0..n {
            let count = rng.random_range(2..40);
            let mut positions: Vec<usize> = (0..count).map(|_| rng.random_range(0..len)).collect();
            positions.sort_unstable();
            positions.dedup();
            if positions.len() < 2 {
                positions = vec![0, 1];
            }
            let word = format!("w{k:03}");
            map.insert(word.clone(), signal_from_positions(&word, positions));
        }
        (map, len)
    }

    #[test]
    fn random_universe_matches_brute_force_oracle() {
        let (source, source_len) = random_universe(11, 50);
        let (target, target_len) = random_universe(23, 50);
        let cfg = PrefilterConfig {
            min_frequency: 5,
            max_freq_ratio: 2.0,
            max_start_offset_ratio: 0.3,
            euclid_threshold: 400.0,
        };
        let got = candidate_pairs(&source, source_len, &target, target_len, &cfg);
        let expected = brute_force_pairs(&source, source_len, &target, target_len, &cfg);
        assert_eq!(got, expected);
        assert!(!got.is_empty(), "oracle comparison should exercise matches");
    }

    #[test]
    fn raising_threshold_never_removes_pairs() {
        let (source, source_len) = random_universe(7, 40);
        let (target, target_len) = random_universe(8, 40);
        let mut previous: Option<Vec<(String, String)>> = None;
        for threshold in [0.0, 10.0, 50.0, 200.0, 1000.0, f64::INFINITY] {
            let cfg = PrefilterConfig {
                min_frequency: 2,
                max_freq_ratio: 4.0,
                max_start_offset_ratio: 0.5,
                euclid_threshold: threshold,
            };
            let got = candidate_pairs(&source, source_len, &target, target_len, &cfg);
            if let Some(prev) = &previous {
                for pair in prev {
                    assert!(got.contains(pair), "pair {pair:?} lost at threshold {threshold}");
                }
            }
            previous = Some(got);
        }
    }
}
