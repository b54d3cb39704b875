//! Stability of a relative series under random lexicon subsampling.
//!
//! Each trial draws a random m-word subset of the lexicon, recounts the
//! corpus against it, rebuilds the binned series, and re-centers on that
//! trial's own bin mean. The per-bin spread across trials shows how much
//! the series depends on any particular lexicon words.
//!
//! Restricting a count vector to the subset's word positions is exactly a
//! recount against the sub-lexicon (tokenization is lexicon-independent),
//! so trials reuse the full-lexicon bin counts instead of re-reading text.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::score::FrequencyVector;
use crate::series::{bin_vectors, bin_vectors_seq, DocumentRecord, SeriesKey};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Five-number summary with Tukey-style outliers.
///
/// Quartiles interpolate linearly between order statistics at positions
/// p*(n-1). Whiskers sit on the most extreme data points within 1.5 IQR of
/// the quartiles; outliers are the points strictly outside the whiskers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    /// Ascending.
    pub outliers: Vec<f64>,
}

/// Summarizes a non-empty sample of finite values.
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Argument("cannot summarize an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("sample contains a non-finite value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        let h = p * (sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let q1 = q(0.25);
    let median = q(0.5);
    let q3 = q(0.75);
    let iqr = q3 - q1;
    let fence_lo = q1 - 1.5 * iqr;
    let fence_hi = q3 + 1.5 * iqr;
    let whisker_lo = *sorted
        .iter()
        .find(|&&v| v >= fence_lo)
        .expect("q1 is inside the fences");
    let whisker_hi = *sorted
        .iter()
        .rev()
        .find(|&&v| v <= fence_hi)
        .expect("q3 is inside the fences");
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < whisker_lo || v > whisker_hi)
        .collect();
    Ok(BoxStats {
        q1,
        median,
        q3,
        whisker_lo,
        whisker_hi,
        outliers,
    })
}

/// Result of a subsampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRun {
    pub subset_size: usize,
    /// Trials requested (dropped ones included).
    pub num_subsets: usize,
    pub seed: u64,
    /// Spread of re-centered bin scores, one entry per bin that was valid
    /// in the full-lexicon run, in bin order.
    pub per_bin: Vec<(String, BoxStats)>,
    /// Each retained trial's own centering mean, in trial order.
    pub v_avg_distribution: Vec<f64>,
    /// Last-bin minus first-bin re-centered score per retained trial with
    /// at least two valid bins; a cheap trend-direction diagnostic.
    pub trend_deltas: Vec<f64>,
    /// Trials whose subset left every bin below the threshold.
    pub dropped_subsets: usize,
}

struct TrialOutcome {
    v_avg: f64,
    /// Re-centered score per full-run-valid bin; `None` where the trial's
    /// subset left that bin below threshold.
    rel: Vec<Option<f64>>,
    trend: Option<f64>,
}

/// One bin's counts from the full-lexicon run.
struct BinCounts {
    key: String,
    counts: Vec<u64>,
}

/// Runs `num_subsets` subsampling trials over the series defined by `key`
/// and `threshold`.
///
/// Per-trial generators are seeded from a master ChaCha8 stream keyed on
/// `seed`, so the outcome is independent of thread scheduling and identical
/// across runs.
pub fn bootstrap_series(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
    threshold: u64,
    subset_size: usize,
    num_subsets: usize,
    seed: u64,
) -> Result<RobustnessRun> {
    let groups = bin_vectors(docs, lex, key);
    run_trials(groups, lex, threshold, subset_size, num_subsets, seed, true)
}

/// Single-threaded reference path for [`bootstrap_series`].
pub fn bootstrap_series_seq(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
    threshold: u64,
    subset_size: usize,
    num_subsets: usize,
    seed: u64,
) -> Result<RobustnessRun> {
    let groups = bin_vectors_seq(docs, lex, key);
    run_trials(groups, lex, threshold, subset_size, num_subsets, seed, false)
}

fn run_trials(
    groups: std::collections::BTreeMap<String, (FrequencyVector, u64)>,
    lex: &Lexicon,
    threshold: u64,
    subset_size: usize,
    num_subsets: usize,
    seed: u64,
    parallel: bool,
) -> Result<RobustnessRun> {
    if threshold < 1 {
        return Err(Error::Argument("threshold must be at least 1".into()));
    }
    if subset_size < 1 || subset_size > lex.n() {
        return Err(Error::Argument(format!(
            "subset size {subset_size} outside 1..={}",
            lex.n()
        )));
    }
    if num_subsets < 1 {
        return Err(Error::Argument("need at least one subset".into()));
    }

    // Only bins valid under the full lexicon matter: a subset count is
    // pointwise <= the full count, so no bin can become valid by shrinking
    // the lexicon.
    let bins: Vec<BinCounts> = groups
        .into_iter()
        .filter(|(_, (vec, _))| vec.total_anew() >= threshold)
        .map(|(key, (vec, _))| BinCounts {
            key,
            counts: vec.counts().to_vec(),
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::NoValidBins(
            "the full-lexicon series has no valid bins".into(),
        ));
    }

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let trial_seeds: Vec<u64> = (0..num_subsets).map(|_| master.next_u64()).collect();

    let run_one = |&trial_seed: &u64| -> Option<TrialOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let mut subset: Vec<usize> =
            rand::seq::index::sample(&mut rng, lex.n(), subset_size).into_vec();
        subset.sort_unstable();
        evaluate_trial(&bins, lex, threshold, &subset)
    };

    let outcomes: Vec<Option<TrialOutcome>> = if parallel {
        #[cfg(feature = "parallel")]
        {
            trial_seeds.par_iter().map(run_one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            trial_seeds.iter().map(run_one).collect()
        }
    } else {
        trial_seeds.iter().map(run_one).collect()
    };

    let mut v_avg_distribution = Vec::new();
    let mut trend_deltas = Vec::new();
    let mut per_bin_values: Vec<Vec<f64>> = vec![Vec::new(); bins.len()];
    let mut dropped_subsets = 0;
    for outcome in outcomes {
        match outcome {
            Some(t) => {
                v_avg_distribution.push(t.v_avg);
                if let Some(trend) = t.trend {
                    trend_deltas.push(trend);
                }
                for (slot, rel) in per_bin_values.iter_mut().zip(&t.rel) {
                    if let Some(r) = rel {
                        slot.push(*r);
                    }
                }
            }
            None => dropped_subsets += 1,
        }
    }
    if v_avg_distribution.is_empty() {
        return Err(Error::NoValidBins(
            "every lexicon subset left the series without valid bins".into(),
        ));
    }
    if dropped_subsets > 0 {
        log::warn!("{dropped_subsets} of {num_subsets} lexicon subsets were dropped");
    }

    let mut per_bin = Vec::with_capacity(bins.len());
    for (bin, values) in bins.iter().zip(per_bin_values) {
        if values.is_empty() {
            log::warn!("bin {}: no subset reached the threshold", bin.key);
            continue;
        }
        per_bin.push((bin.key.clone(), box_stats(&values)?));
    }

    Ok(RobustnessRun {
        subset_size,
        num_subsets,
        seed,
        per_bin,
        v_avg_distribution,
        trend_deltas,
        dropped_subsets,
    })
}

/// Scores every bin against one subset of lexicon word positions
/// (ascending), then re-centers. Returns `None` when no bin stays valid.
fn evaluate_trial(
    bins: &[BinCounts],
    lex: &Lexicon,
    threshold: u64,
    subset: &[usize],
) -> Option<TrialOutcome> {
    let scores: Vec<Option<f64>> = bins
        .iter()
        .map(|bin| {
            let mut anew = 0u64;
            let mut num = 0.0;
            let mut den = 0.0;
            for &i in subset {
                let c = bin.counts[i];
                if c > 0 {
                    anew += c;
                    let f = c as f64;
                    num += lex.valence_at(i) * f;
                    den += f;
                }
            }
            (anew >= threshold).then(|| num / den)
        })
        .collect();
    let valid: Vec<f64> = scores.iter().filter_map(|s| *s).collect();
    if valid.is_empty() {
        return None;
    }
    let v_avg = valid.iter().sum::<f64>() / valid.len() as f64;
    let rel: Vec<Option<f64>> = scores.iter().map(|s| s.map(|v| v - v_avg)).collect();
    let centered: Vec<f64> = rel.iter().filter_map(|r| *r).collect();
    let trend = (centered.len() >= 2)
        .then(|| centered[centered.len() - 1] - centered[0]);
    Some(TrialOutcome { v_avg, rel, trend })
}

/// Fraction of trials whose trend direction matches `full_trend`. A quick
/// supermajority check that subsampling preserves the shape of the series.
pub fn trend_sign_agreement(run: &RobustnessRun, full_trend: f64) -> f64 {
    if run.trend_deltas.is_empty() {
        return 0.0;
    }
    let want = full_trend.signum();
    let hits = run
        .trend_deltas
        .iter()
        .filter(|t| t.signum() == want)
        .count();
    hits as f64 / run.trend_deltas.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::bin_series;
    use crate::testutil::entry;
    use crate::Lexicon;

    #[test]
    fn box_stats_odd_sample_by_hand() {
        let b = box_stats(&[3.0, 1.0, 4.0, 2.0, 5.0]).unwrap();
        assert_eq!(b.q1, 2.0);
        assert_eq!(b.median, 3.0);
        assert_eq!(b.q3, 4.0);
        assert_eq!(b.whisker_lo, 1.0);
        assert_eq!(b.whisker_hi, 5.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn box_stats_flags_the_far_point() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.q1, 2.0);
        assert_eq!(b.median, 3.0);
        assert_eq!(b.q3, 4.0);
        // Fences at q3 + 1.5*2 = 7: the whisker stops at the last point
        // inside, and 100 is out.
        assert_eq!(b.whisker_hi, 4.0);
        assert_eq!(b.whisker_lo, 1.0);
        assert_eq!(b.outliers, vec![100.0]);
    }

    #[test]
    fn box_stats_single_value_collapses() {
        let b = box_stats(&[2.5]).unwrap();
        assert_eq!(
            (b.q1, b.median, b.q3, b.whisker_lo, b.whisker_hi),
            (2.5, 2.5, 2.5, 2.5, 2.5)
        );
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn box_stats_interpolates_between_order_statistics() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((b.q1 - 1.75).abs() < 1e-12);
        assert!((b.median - 2.5).abs() < 1e-12);
        assert!((b.q3 - 3.25).abs() < 1e-12);
    }

    #[test]
    fn box_stats_rejects_bad_samples() {
        assert!(box_stats(&[]).is_err());
        assert!(box_stats(&[1.0, f64::NAN]).is_err());
        assert!(box_stats(&[f64::INFINITY]).is_err());
    }

    fn six_word_lexicon() -> Lexicon {
        Lexicon::from_entries(vec![
            entry("awful", 2.0),
            entry("bad", 3.2),
            entry("plain", 5.0),
            entry("fine", 6.1),
            entry("good", 7.4),
            entry("great", 8.6),
        ])
        .unwrap()
    }

    fn two_bin_corpus() -> Vec<DocumentRecord> {
        let mut docs = Vec::new();
        let mk = |year: &str, text: &str| {
            DocumentRecord::new(text).with_meta("year", year)
        };
        // Early bin leans positive, late bin leans negative; every word
        // appears in both bins so any subset can score them.
        docs.push(mk("2000", "great great good good fine plain bad awful"));
        docs.push(mk("2000", "great good fine fine plain plain bad awful"));
        docs.push(mk("2001", "awful awful bad bad plain fine good great"));
        docs.push(mk("2001", "awful bad bad plain plain fine good great"));
        docs
    }

    #[test]
    fn full_subset_collapses_to_the_full_run() {
        let lex = six_word_lexicon();
        let docs = two_bin_corpus();
        let key = SeriesKey::Year;
        let run = bootstrap_series(&docs, &lex, &key, 1, lex.n(), 50, 9).unwrap();
        assert_eq!(run.dropped_subsets, 0);
        assert_eq!(run.v_avg_distribution.len(), 50);

        let bins = bin_series(&docs, &lex, &key, 1).unwrap();
        let rel = crate::series::relative_series(&bins).unwrap();
        for ((key_run, stats), (key_full, value)) in run.per_bin.iter().zip(&rel.points) {
            assert_eq!(key_run, key_full);
            assert!((stats.median - value).abs() < 1e-12);
            assert_eq!(stats.q1, stats.q3);
            assert!(stats.outliers.is_empty());
        }
        for v in &run.v_avg_distribution {
            assert!((v - rel.v_avg).abs() < 1e-12);
        }
    }

    #[test]
    fn single_trial_collapses_quartiles() {
        let lex = six_word_lexicon();
        let run =
            bootstrap_series(&two_bin_corpus(), &lex, &SeriesKey::Year, 1, 3, 1, 4).unwrap();
        assert_eq!(run.v_avg_distribution.len(), 1);
        for (_, stats) in &run.per_bin {
            assert_eq!(stats.q1, stats.median);
            assert_eq!(stats.median, stats.q3);
        }
    }

    #[test]
    fn runs_are_reproducible_and_match_sequential() {
        let lex = six_word_lexicon();
        let docs = two_bin_corpus();
        let key = SeriesKey::Year;
        let a = bootstrap_series(&docs, &lex, &key, 1, 3, 200, 77).unwrap();
        let b = bootstrap_series(&docs, &lex, &key, 1, 3, 200, 77).unwrap();
        let c = bootstrap_series_seq(&docs, &lex, &key, 1, 3, 200, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = bootstrap_series(&docs, &lex, &key, 1, 3, 200, 78).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn starving_subsets_are_dropped_not_fatal() {
        let lex = six_word_lexicon();
        // One bin whose only lexicon words are "great": subsets that miss
        // it see no valid bin at all.
        let docs = vec![DocumentRecord::new("great great xyz").with_meta("year", "2000")];
        let run = bootstrap_series(&docs, &lex, &SeriesKey::Year, 1, 1, 600, 5).unwrap();
        assert!(run.dropped_subsets > 0, "expected some dropped trials");
        assert_eq!(
            run.dropped_subsets + run.v_avg_distribution.len(),
            600
        );
        // Retained trials all picked {great}; the single bin centers to 0.
        assert_eq!(run.per_bin.len(), 1);
        assert_eq!(run.per_bin[0].1.median, 0.0);
    }

    #[test]
    fn all_subsets_starving_is_an_error() {
        let lex = six_word_lexicon();
        let docs = vec![DocumentRecord::new("nothing matches").with_meta("year", "2000")];
        assert!(matches!(
            bootstrap_series(&docs, &lex, &SeriesKey::Year, 1, 3, 10, 5),
            Err(Error::NoValidBins(_))
        ));
    }

    #[test]
    fn argument_checks() {
        let lex = six_word_lexicon();
        let docs = two_bin_corpus();
        let key = SeriesKey::Year;
        assert!(bootstrap_series(&docs, &lex, &key, 0, 3, 10, 5).is_err());
        assert!(bootstrap_series(&docs, &lex, &key, 1, 0, 10, 5).is_err());
        assert!(bootstrap_series(&docs, &lex, &key, 1, 7, 10, 5).is_err());
        assert!(bootstrap_series(&docs, &lex, &key, 1, 3, 0, 5).is_err());
    }

    #[test]
    fn trend_sign_agreement_counts_matching_trials() {
        let run = RobustnessRun {
            subset_size: 3,
            num_subsets: 4,
            seed: 0,
            per_bin: Vec::new(),
            v_avg_distribution: vec![5.0; 4],
            trend_deltas: vec![-0.5, -0.2, 0.1, -0.4],
            dropped_subsets: 0,
        };
        assert!((trend_sign_agreement(&run, -1.0) - 0.75).abs() < 1e-12);
        assert!((trend_sign_agreement(&run, 1.0) - 0.25).abs() < 1e-12);
    }
}
