//! Acceptance gate: one test per shipping criterion, each ending in a
//! single PASS line with the measured quantity (run with `--nocapture` to
//! see the numbers). A failed assert is the FAIL line.
//!
//! Every oracle here is computed by an independent route from the code
//! under test: hand-enumerated subsets, token-by-token maps, or external
//! recomputation from raw counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use hedono_core::ingest::{dedup_day, passes_feel_filter};
use hedono_core::robustness::bootstrap_series;
use hedono_core::score::{count_documents, count_documents_seq, score, top_words};
use hedono_core::series::{adaptive_age_bins, bin_series, relative_series};
use hedono_core::shift::shift;
use hedono_core::tokenize::tokenize;
use hedono_core::{DocumentRecord, FrequencyVector, Lexicon, LexiconEntry, Quadrant, SeriesKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn entry(word: &str, valence: f64) -> LexiconEntry {
    LexiconEntry {
        word: word.to_string(),
        valence,
        valence_sd: None,
    }
}

/// Digit-free synthetic word (digits would split under tokenization).
fn wname(i: usize) -> String {
    let (a, b, c) = (i / 676, (i / 26) % 26, i % 26);
    format!(
        "w{}{}{}",
        (b'a' + a as u8) as char,
        (b'a' + b as u8) as char,
        (b'a' + c as u8) as char
    )
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

/// `counts[i]` repeats of word `i`, in index order.
fn text_of_counts(lex: &Lexicon, counts: &[u64]) -> String {
    let mut t = String::new();
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            t.push_str(lex.word_at(i));
            t.push(' ');
        }
    }
    t
}

#[test]
fn pangram_fragment_scores_close_to_six_point_two() {
    let t0 = Instant::now();
    let lex = Lexicon::from_entries(vec![
        entry("quick", 6.64),
        entry("lazy", 4.38),
        entry("dog", 7.57),
    ])
    .unwrap();
    let v = FrequencyVector::from_text("The quick brown fox jumps over the lazy dog.", &lex);
    let s = score(&v, &lex).unwrap();
    let err = (s.value - 6.1967).abs();
    assert!(err <= 0.005, "score {} is off by {err}", s.value);
    assert_eq!(v.total_words(), 9);
    assert_eq!(s.anew_words, 3);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("PASS 1/8 pangram scores {:.4} (err {err:.2e} <= 5e-3) in {elapsed:?}", s.value);
}

#[test]
fn shift_contributions_sum_to_signed_100_on_1000_random_pairs() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut percent_pairs = 0u32;
    let mut raw_pairs = 0u32;
    for round in 0..1000 {
        let n = rng.random_range(3..=16);
        let lex = Lexicon::from_entries(
            (0..n)
                .map(|i| entry(&wname(i), rng.random_range(1.0..=9.0)))
                .collect(),
        )
        .unwrap();
        let mut ca: Vec<u64> = (0..n).map(|_| rng.random_range(0..=40)).collect();
        ca[rng.random_range(0..n)] = ca[rng.random_range(0..n)].max(1);
        let mut cb: Vec<u64> = (0..n).map(|_| rng.random_range(0..=40)).collect();
        cb[rng.random_range(0..n)] = cb[rng.random_range(0..n)].max(1);
        // Exercise the degenerate branches on a schedule: identical counts
        // and proportional counts must both fall back to raw mode.
        if round % 13 == 0 {
            cb = ca.clone();
        } else if round % 7 == 0 {
            let k = rng.random_range(2..=4);
            cb = ca.iter().map(|&c| c * k).collect();
        }
        let a = FrequencyVector::from_text(&text_of_counts(&lex, &ca), &lex);
        let b = FrequencyVector::from_text(&text_of_counts(&lex, &cb), &lex);
        let r = shift(&a, &b, &lex).unwrap();

        // Independent recomputation of the abundance differences.
        let (ta, tb) = (a.total_anew() as f64, b.total_anew() as f64);
        let dp: Vec<f64> = (0..n)
            .map(|i| {
                cb[i] as f64 / tb - ca[i] as f64 / ta
            })
            .collect();
        let same_profile = dp.iter().all(|&d| d == 0.0);
        assert_eq!(
            r.percentages,
            r.delta != 0.0 && !same_profile,
            "round {round}: mode flag disagrees with raw counts"
        );

        let sum: f64 = r.contributions.iter().map(|c| c.delta_pct).sum();
        if r.percentages {
            percent_pairs += 1;
            let target = 100.0 * r.delta.signum();
            assert!(
                (sum - target).abs() <= 1e-9 * 100.0,
                "round {round}: sum {sum} target {target}"
            );
        } else {
            raw_pairs += 1;
            assert!(sum.abs() <= 1e-9, "round {round}: raw sum {sum}");
        }

        let by_word: BTreeMap<&str, &hedono_core::WordContribution> =
            r.contributions.iter().map(|c| (c.word.as_str(), c)).collect();
        for i in 0..n {
            if ca[i] == 0 && cb[i] == 0 {
                continue;
            }
            let c = by_word[lex.word_at(i)];
            assert_eq!(c.abundance_rel, sign(dp[i]), "round {round} word {i}");
            assert_eq!(
                c.valence_rel,
                sign(lex.valence_at(i) - r.v_a),
                "round {round} word {i}"
            );
            let expected = if c.delta_pct == 0.0 {
                Quadrant::Zero
            } else {
                match (c.valence_rel > 0, c.abundance_rel > 0) {
                    (true, true) => Quadrant::PosUp,
                    (true, false) => Quadrant::PosDown,
                    (false, true) => Quadrant::NegUp,
                    (false, false) => Quadrant::NegDown,
                }
            };
            assert_eq!(c.quadrant, expected, "round {round} word {i}");
        }
        for w in r.contributions.windows(2) {
            assert!(
                w[0].delta_pct.abs() >= w[1].delta_pct.abs(),
                "round {round}: not sorted by magnitude"
            );
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "PASS 2/8 sum identity and quadrants on 1000 pairs \
         ({percent_pairs} percent-mode, {raw_pairs} raw-mode) in {elapsed:?}"
    );
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[test]
fn optimized_counting_matches_naive_token_by_token_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let lex = Lexicon::from_entries(
        (0..40)
            .map(|i| entry(&wname(i), rng.random_range(1.0..=9.0)))
            .collect(),
    )
    .unwrap();
    let seps = [" ", ", ", "! ", "\n", " 42 ", "... ", "\t"];
    let noise = ["zzz", "kk'k", "fox", "brown", "the"];

    let mut docs: Vec<String> = Vec::new();
    for _ in 0..100 {
        let mut doc = String::new();
        for _ in 0..rng.random_range(0..400) {
            let w = if rng.random_bool(0.7) {
                lex.word_at(rng.random_range(0..lex.n())).to_string()
            } else {
                noise[rng.random_range(0..noise.len())].to_string()
            };
            let w = if rng.random_bool(0.2) { w.to_uppercase() } else { w };
            doc.push_str(&w);
            doc.push_str(seps[rng.random_range(0..seps.len())]);
        }
        docs.push(doc);
    }

    // Naive route: one token at a time into an ordered map, then a sum in
    // map order (the lexicon is sorted, so map order == index order).
    let mut pooled_naive: BTreeMap<String, u64> = BTreeMap::new();
    for doc in &docs {
        let mut naive: BTreeMap<String, u64> = BTreeMap::new();
        for tok in tokenize(doc) {
            if lex.lookup(&tok).is_some() {
                *naive.entry(tok).or_insert(0) += 1;
            }
        }
        let fast = FrequencyVector::from_text(doc, &lex);
        for i in 0..lex.n() {
            let w = lex.word_at(i);
            assert_eq!(
                fast.count_of(w, &lex).unwrap(),
                naive.get(w).copied().unwrap_or(0),
                "word {w:?}"
            );
        }
        for (w, c) in naive {
            *pooled_naive.entry(w).or_insert(0) += c;
        }
    }

    let pooled = count_documents(&docs, &lex);
    let pooled_seq = count_documents_seq(&docs, &lex);
    assert_eq!(pooled, pooled_seq, "parallel and sequential counts differ");
    for i in 0..lex.n() {
        let w = lex.word_at(i);
        assert_eq!(
            pooled.count_of(w, &lex).unwrap(),
            pooled_naive.get(w).copied().unwrap_or(0)
        );
    }

    let (mut num, mut den) = (0.0_f64, 0.0_f64);
    for (w, &c) in &pooled_naive {
        num += lex.lookup(w).unwrap() * c as f64;
        den += c as f64;
    }
    let naive_score = num / den;
    let fast_score = score(&pooled, &lex).unwrap().value;
    assert_eq!(
        fast_score.to_bits(),
        naive_score.to_bits(),
        "scores differ past the fixed summation order: {fast_score} vs {naive_score}"
    );
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("PASS 3/8 naive oracle matches on 100 docs (score bits equal) in {elapsed:?}");
}

#[test]
fn sampled_subsets_match_exhaustive_enumeration() {
    let t0 = Instant::now();
    let lex = six_word_lexicon();
    let threshold = 10u64;
    // Three bins with opposite lean so the re-centered scores spread out.
    let bin_counts: [(&str, [u64; 6]); 3] = [
        ("2001", [30, 25, 20, 15, 12, 10]),
        ("2002", [18, 18, 20, 20, 18, 18]),
        ("2003", [10, 12, 15, 20, 25, 30]),
    ];
    let docs: Vec<DocumentRecord> = bin_counts
        .iter()
        .map(|(year, counts)| {
            DocumentRecord::new(text_of_counts(&lex, counts)).with_meta("year", *year)
        })
        .collect();

    // Every 3-of-6 subset, scored by genuinely recounting the corpus with
    // the sub-lexicon. Trials center on their own mean like the sampler.
    let mut enumerated: Vec<Vec<f64>> = vec![Vec::new(); 3];
    let mut n_subsets = 0;
    for i in 0..6 {
        for j in (i + 1)..6 {
            for k in (j + 1)..6 {
                n_subsets += 1;
                let sub = Lexicon::from_entries(vec![
                    lex.entries()[i].clone(),
                    lex.entries()[j].clone(),
                    lex.entries()[k].clone(),
                ])
                .unwrap();
                let mut scores = Vec::new();
                for doc in &docs {
                    let v = FrequencyVector::from_text(&doc.text, &sub);
                    assert!(v.total_anew() >= threshold, "fixture keeps all bins valid");
                    scores.push(score(&v, &sub).unwrap().value);
                }
                let v_avg = scores.iter().sum::<f64>() / scores.len() as f64;
                for (b, s) in scores.iter().enumerate() {
                    enumerated[b].push(s - v_avg);
                }
            }
        }
    }
    assert_eq!(n_subsets, 20);
    let enum_medians: Vec<f64> = enumerated
        .iter_mut()
        .map(|xs| {
            xs.sort_by(f64::total_cmp);
            (xs[9] + xs[10]) / 2.0
        })
        .collect();

    let run = bootstrap_series(
        &docs,
        &lex,
        &SeriesKey::parse("year"),
        threshold,
        3,
        2000,
        42,
    )
    .unwrap();
    assert_eq!(run.dropped_subsets, 0);
    assert_eq!(run.per_bin.len(), 3);
    let mut detail = String::new();
    for (b, (key, stats)) in run.per_bin.iter().enumerate() {
        let err = (stats.median - enum_medians[b]).abs();
        assert!(
            err <= 0.05,
            "bin {key}: sampled median {} vs enumerated {} (err {err})",
            stats.median,
            enum_medians[b]
        );
        let _ = write!(detail, " {key}:{err:.3}");
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("PASS 4/8 sampled medians within 0.05 of 20-subset enumeration ({detail} ) in {elapsed:?}");
}

#[test]
fn threshold_binning_and_relative_centering_behave() {
    let t0 = Instant::now();
    let lex = six_word_lexicon();

    // Exactly one lexicon token below the validity threshold.
    let docs = vec![
        DocumentRecord::new("good ".repeat(999)).with_meta("year", "1999"),
        DocumentRecord::new("good ".repeat(1000)).with_meta("year", "2000"),
    ];
    let bins = bin_series(&docs, &lex, &SeriesKey::parse("year"), 1000).unwrap();
    assert_eq!(bins[0].anew_words, 999);
    assert!(!bins[0].valid, "999 words must not clear a threshold of 1000");
    assert_eq!(bins[1].anew_words, 1000);
    assert!(bins[1].valid, "1000 words must clear a threshold of 1000");

    // Adaptive age bins widen until each holds at least min_anew words.
    let min_anew = 120u64;
    let mut docs = Vec::new();
    for age in 13..=60u32 {
        let words = if age < 20 { 40 } else { 15 };
        docs.push(
            DocumentRecord::new("fine ".repeat(words)).with_meta("age", age.to_string()),
        );
    }
    let bins = adaptive_age_bins(&docs, &lex, min_anew).unwrap();
    assert!(bins.len() >= 2, "fixture should split into several bins");
    for b in &bins {
        assert!(
            b.anew_words >= min_anew,
            "bin {} has only {} words",
            b.key,
            b.anew_words
        );
    }

    // Relative series re-centers to a zero sum.
    let moods = [
        [9u64, 1, 1, 1, 9, 9],
        [1, 9, 1, 9, 1, 9],
        [9, 9, 9, 1, 1, 1],
        [1, 1, 9, 9, 9, 1],
        [5, 5, 5, 5, 5, 5],
    ];
    let docs: Vec<DocumentRecord> = moods
        .iter()
        .enumerate()
        .map(|(i, counts)| {
            DocumentRecord::new(text_of_counts(&lex, counts))
                .with_meta("year", (2000 + i).to_string())
        })
        .collect();
    let bins = bin_series(&docs, &lex, &SeriesKey::parse("year"), 10).unwrap();
    let rel = relative_series(&bins).unwrap();
    assert_eq!(rel.points.len(), 5);
    let sum: f64 = rel.points.iter().map(|(_, v)| v).sum();
    assert!(sum.abs() <= 1e-9, "relative series sums to {sum}");

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "PASS 5/8 threshold boundary, {} adaptive bins >= {min_anew}, relative sum {sum:.2e} in {elapsed:?}",
        bins.len()
    );
}

#[test]
fn preparation_rules_match_documented_decisions_on_50_sentences() {
    let t0 = Instant::now();
    // 50 sentences with known pronoun/feel composition, including traps:
    // derived forms ("feelingly"), contractions ("I'm"), and case noise.
    let pronouns = ["I", "We", "me", "MY", "our", "us"];
    let non_pronouns = ["They", "You", "The cat", "Everyone"];
    let feels = ["feel", "feels", "felt", "FEELING", "feelings"];
    let non_feels = ["think", "run", "feelingly", "unfeeling"];
    let mut fixture: Vec<(String, bool)> = Vec::new();
    for i in 0..48 {
        let has_pron = i % 2 == 0;
        let has_feel = i % 3 == 0;
        let subject = if has_pron {
            pronouns[i % pronouns.len()]
        } else {
            non_pronouns[i % non_pronouns.len()]
        };
        let verb = if has_feel {
            feels[i % feels.len()]
        } else {
            non_feels[i % non_feels.len()]
        };
        let sentence = format!("{subject} {verb} number {} today.", wname(i));
        fixture.push((sentence, has_pron && has_feel));
    }
    // Contractions are single tokens, so they are not the bare pronoun.
    fixture.push(("I'm sure this feels wrong.".to_string(), false));
    fixture.push(("Somehow we all felt it.".to_string(), true));
    assert_eq!(fixture.len(), 50);

    for (sentence, expected) in &fixture {
        assert_eq!(
            passes_feel_filter(sentence),
            *expected,
            "sentence {sentence:?}"
        );
    }
    let kept = fixture.iter().filter(|(_, e)| *e).count();

    // Same-day 6-token duplicates collapse to one; the 5-token duplicate
    // and the cross-day repeat both survive.
    let long = "one two three four five six";
    let short = "one two three four five";
    let day = |d: &str, text: &str| DocumentRecord::new(text).with_meta("date", d.to_string());
    let input = vec![
        day("2024-03-01", long),
        day("2024-03-01", long),
        day("2024-03-01", short),
        day("2024-03-01", short),
        day("2024-03-02", long),
    ];
    let out: Vec<DocumentRecord> = dedup_day(input.into_iter()).collect();
    let texts: Vec<&str> = out.iter().map(|d| d.text.as_str()).collect();
    assert_eq!(
        texts,
        [long, short, short, long],
        "dedup decisions are wrong"
    );

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("PASS 6/8 feel-filter matched all 50 fixtures ({kept} kept), dedup kept 4 of 5 in {elapsed:?}");
}

#[test]
fn cli_output_is_byte_identical_across_jobs() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, content: &str| -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, content).unwrap();
        p
    };
    let lex = write(
        "six.tsv",
        "word\tvalence\nawful\t2.0\nbad\t3.2\nplain\t5.0\nfine\t6.1\ngood\t7.4\ngreat\t8.6\n",
    );
    let mut week = String::new();
    for day in 1..=7 {
        for d in 0..6 {
            let mood = ["good great fine", "bad awful plain", "fine fine good"][d % 3];
            let _ = writeln!(
                week,
                "{{\"text\": \"{mood} {mood}\", \"date\": \"2024-01-{day:02}T0{d}:00:00\"}}"
            );
        }
    }
    let week = write("week.jsonl", &week);
    let a = write("a.jsonl", "{\"text\": \"good good great fine plain awful\"}\n");
    let b = write("b.jsonl", "{\"text\": \"bad bad awful plain fine good\"}\n");
    let raw = write(
        "raw.jsonl",
        concat!(
            "{\"text\": \"I feel fine about all of this today. Plain and dull and gray it was. Plain and dull and gray it was.\", \"date\": \"2024-03-01\"}\n",
            "{\"text\": \"We felt awful about the bad news. Nothing else.\", \"date\": \"2024-03-02\"}\n",
        ),
    );

    // (label, args, side-effect files to compare as well)
    let svg1 = dir.path().join("s1.svg");
    let svg4 = dir.path().join("s4.svg");
    let csv1 = dir.path().join("c1.csv");
    let csv4 = dir.path().join("c4.csv");
    let means1 = dir.path().join("m1.csv");
    let means4 = dir.path().join("m4.csv");
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<String>, Vec<String>, Vec<(PathBuf, PathBuf)>)> = vec![
        (
            "score",
            vec!["score".into(), s(&week), "--lexicon".into(), s(&lex), "--format".into(), "json".into()],
            vec![],
            vec![],
        ),
        (
            "shift",
            vec!["shift".into(), s(&a), s(&b), "--lexicon".into(), s(&lex)],
            vec![
                "--svg".into(), s(&svg1), "--csv".into(), s(&csv1),
            ],
            vec![(svg1.clone(), svg4.clone()), (csv1.clone(), csv4.clone())],
        ),
        (
            "series",
            vec![
                "series".into(), s(&week), "--lexicon".into(), s(&lex),
                "--by".into(), "weekday".into(), "--threshold".into(), "5".into(), "--relative".into(),
            ],
            vec![],
            vec![],
        ),
        (
            "bootstrap",
            vec![
                "bootstrap".into(), s(&week), "--lexicon".into(), s(&lex),
                "--by".into(), "weekday".into(), "--threshold".into(), "3".into(),
                "-m".into(), "3".into(), "-N".into(), "80".into(), "--seed".into(), "9".into(),
            ],
            vec!["--means-out".into(), s(&means1)],
            vec![(means1.clone(), means4.clone())],
        ),
        (
            "prepare",
            vec![
                "prepare".into(), s(&raw),
                "--sentences".into(), "--feel-filter".into(), "--dedup".into(),
            ],
            vec![],
            vec![],
        ),
    ];

    for (label, args, side1, files) in commands {
        // The jobs-4 run writes its side files to different paths so the
        // two runs never race on the same file.
        let side4: Vec<String> = side1
            .iter()
            .map(|v| {
                files
                    .iter()
                    .find(|(one, _)| v == one.to_str().unwrap())
                    .map(|(_, four)| four.to_str().unwrap().to_string())
                    .unwrap_or_else(|| v.clone())
            })
            .collect();
        let run = |jobs: &str, side: &[String]| {
            let out = Command::new(env!("CARGO_BIN_EXE_hedono"))
                .env_remove("HEDONO_CONFIG")
                .args(&args)
                .args(side)
                .args(["--jobs", jobs])
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{label} --jobs {jobs}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let out1 = run("1", &side1);
        let out4 = run("4", &side4);
        assert_eq!(out1, out4, "{label}: stdout differs between --jobs 1 and 4");
        for (f1, f4) in &files {
            assert_eq!(
                std::fs::read(f1).unwrap(),
                std::fs::read(f4).unwrap(),
                "{label}: side file differs between --jobs 1 and 4"
            );
        }
    }
    println!("PASS 7/8 all five commands byte-identical for jobs in {{1, 4}}");
}

#[test]
fn ten_million_words_score_in_under_ten_seconds_single_threaded() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lex = Lexicon::from_entries(
        (0..1000)
            .map(|i| entry(&wname(i), rng.random_range(1.0..=9.0)))
            .collect(),
    )
    .unwrap();
    // 10_000 docs x 1000 words; half the tokens miss the lexicon.
    let vocab: Vec<String> = (0..2000).map(wname).collect();
    let docs: Vec<String> = (0..10_000)
        .map(|_| {
            let mut d = String::with_capacity(5 * 1000);
            for _ in 0..1000 {
                d.push_str(&vocab[rng.random_range(0..vocab.len())]);
                d.push(' ');
            }
            d
        })
        .collect();
    let total_words: u64 = 10_000 * 1000;

    let t0 = Instant::now();
    let v = count_documents_seq(&docs, &lex);
    let s = score(&v, &lex).unwrap();
    let elapsed = t0.elapsed();

    assert_eq!(v.total_words(), total_words);
    assert!(s.anew_words > 0);
    let _ = top_words(&v, &lex, 5).unwrap();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "scored {total_words} words in {elapsed:?}"
    );
    let rate = total_words as f64 / elapsed.as_secs_f64() / 1e6;
    println!(
        "PASS 8/8 ten million words scored single-threaded in {elapsed:?} ({rate:.1} M words/s), score {:.4}",
        s.value
    );
}
