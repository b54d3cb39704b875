//! Binning scored corpora into series: by date parts, metadata fields, or
//! adaptive age ranges.
//!
//! A bin's score is the score of the pooled word counts of its member
//! documents, not a mean of per-document scores, so merging documents into
//! bins is associative. Bins whose lexicon-word count falls below a
//! threshold are flagged invalid rather than dropped.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::score::{score, FrequencyVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sentinel bin key for documents with a missing or unusable label.
pub const UNKNOWN_KEY: &str = "unknown";

/// One document plus free-form metadata. Recognized metadata keys carry
/// typed interpretations: `date` (ISO-8601), `year`, `age` (non-negative
/// integer), `latitude` (degrees in [-90, 90]); everything else is an
/// opaque string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentRecord {
    pub text: String,
    pub meta: BTreeMap<String, String>,
}

impl DocumentRecord {
    pub fn new(text: impl Into<String>) -> Self {
        DocumentRecord {
            text: text.into(),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn date(&self) -> Option<&str> {
        self.meta.get("date").map(String::as_str)
    }
}

/// How documents map to bin labels.
///
/// Date-derived keys read the `date` field, a full ISO-8601 date or
/// datetime; the calendar date is taken as written in the stamp's own
/// offset (UTC when none is given). Numeric labels are zero-padded so that
/// the sorted-by-label output is also numerically ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesKey {
    /// `year` field, else the year of `date`.
    Year,
    /// "YYYY-MM" from `date`.
    Month,
    /// "YYYY-MM-DD" from `date`.
    Day,
    /// "1-mon" through "7-sun" from `date`.
    Weekday,
    /// Zero-padded `age` field.
    Age,
    /// Ten-degree absolute-latitude band from `latitude`, "00-10" .. "80-90".
    Latitude,
    /// Verbatim value of an arbitrary metadata field.
    Meta(String),
}

impl SeriesKey {
    /// Maps a CLI-style name to a key; anything unrecognized is a metadata
    /// field name.
    pub fn parse(name: &str) -> SeriesKey {
        match name {
            "year" => SeriesKey::Year,
            "month" => SeriesKey::Month,
            "day" => SeriesKey::Day,
            "weekday" => SeriesKey::Weekday,
            "age" => SeriesKey::Age,
            "latitude" => SeriesKey::Latitude,
            other => SeriesKey::Meta(other.to_string()),
        }
    }

    /// The document's bin label, or `None` when the needed field is missing
    /// or unusable.
    pub fn label(&self, doc: &DocumentRecord) -> Option<String> {
        match self {
            SeriesKey::Year => {
                if let Some(y) = doc.meta.get("year") {
                    let y = y.trim();
                    y.parse::<i64>().ok().map(|_| y.to_string())
                } else {
                    calendar_date(doc.date()?).map(|d| format!("{:04}", d.year()))
                }
            }
            SeriesKey::Month => {
                let d = calendar_date(doc.date()?)?;
                Some(format!("{:04}-{:02}", d.year(), d.month()))
            }
            SeriesKey::Day => {
                let d = calendar_date(doc.date()?)?;
                Some(format!("{:04}-{:02}-{:02}", d.year(), d.month(), d.day()))
            }
            SeriesKey::Weekday => {
                let d = calendar_date(doc.date()?)?;
                Some(WEEKDAY_LABELS[d.weekday().num_days_from_monday() as usize].to_string())
            }
            SeriesKey::Age => {
                let age: u32 = doc.meta.get("age")?.trim().parse().ok()?;
                Some(format!("{age:03}"))
            }
            SeriesKey::Latitude => {
                let lat: f64 = doc.meta.get("latitude")?.trim().parse().ok()?;
                if !lat.is_finite() || lat.abs() > 90.0 {
                    return None;
                }
                let lo = (lat.abs() / 10.0).floor().min(8.0) as u32 * 10;
                Some(format!("{:02}-{:02}", lo, lo + 10))
            }
            SeriesKey::Meta(field) => {
                let v = doc.meta.get(field)?.trim();
                if v.is_empty() {
                    None
                } else {
                    Some(v.to_string())
                }
            }
        }
    }
}

pub const WEEKDAY_LABELS: [&str; 7] = [
    "1-mon", "2-tue", "3-wed", "4-thu", "5-fri", "6-sat", "7-sun",
];

/// The calendar date written in an ISO-8601 date or datetime string: the
/// date component in the stamp's own timezone, so no offset conversion.
fn calendar_date(stamp: &str) -> Option<NaiveDate> {
    let date_part = stamp.get(..10)?;
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()
}

/// One series bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBin {
    pub key: String,
    /// Pooled score of all member documents; `None` when the bin contains
    /// no lexicon words at all.
    pub score: Option<f64>,
    pub anew_words: u64,
    pub docs: u64,
    /// anew_words >= threshold.
    pub valid: bool,
}

/// Pooled counts per bin, keyed and sorted by label. Shared by plain
/// binning and the subsampling machinery.
pub(crate) fn bin_vectors(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
) -> BTreeMap<String, (FrequencyVector, u64)> {
    #[cfg(feature = "parallel")]
    {
        docs.par_iter()
            .fold(BTreeMap::new, |mut m, d| {
                add_doc(&mut m, d, lex, key);
                m
            })
            .reduce(BTreeMap::new, merge_bin_maps)
    }
    #[cfg(not(feature = "parallel"))]
    {
        bin_vectors_seq(docs, lex, key)
    }
}

pub(crate) fn bin_vectors_seq(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
) -> BTreeMap<String, (FrequencyVector, u64)> {
    let mut m = BTreeMap::new();
    for d in docs {
        add_doc(&mut m, d, lex, key);
    }
    m
}

fn add_doc(
    m: &mut BTreeMap<String, (FrequencyVector, u64)>,
    doc: &DocumentRecord,
    lex: &Lexicon,
    key: &SeriesKey,
) {
    let label = key.label(doc).unwrap_or_else(|| UNKNOWN_KEY.to_string());
    let slot = m
        .entry(label)
        .or_insert_with(|| (FrequencyVector::empty(lex), 0));
    slot.0.add_text(&doc.text, lex);
    slot.1 += 1;
}

#[cfg(feature = "parallel")]
fn merge_bin_maps(
    mut a: BTreeMap<String, (FrequencyVector, u64)>,
    b: BTreeMap<String, (FrequencyVector, u64)>,
) -> BTreeMap<String, (FrequencyVector, u64)> {
    for (k, (vec, n)) in b {
        match a.remove(&k) {
            Some((mine, m)) => {
                a.insert(k, (mine.merge_unchecked(vec), m + n));
            }
            None => {
                a.insert(k, (vec, n));
            }
        }
    }
    a
}

fn finalize(
    groups: BTreeMap<String, (FrequencyVector, u64)>,
    lex: &Lexicon,
    threshold: u64,
) -> Vec<SeriesBin> {
    groups
        .into_iter()
        .map(|(key, (vec, docs))| {
            let anew_words = vec.total_anew();
            SeriesBin {
                key,
                score: score(&vec, lex).ok().map(|s| s.value),
                anew_words,
                docs,
                valid: anew_words >= threshold,
            }
        })
        .collect()
}

/// Bins documents by label and scores each bin's pooled counts. Every
/// document lands in exactly one bin; unlabeled documents land in
/// [`UNKNOWN_KEY`]. Bins come back sorted by key.
pub fn bin_series(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
    threshold: u64,
) -> Result<Vec<SeriesBin>> {
    check_threshold(threshold)?;
    Ok(finalize(bin_vectors(docs, lex, key), lex, threshold))
}

/// Single-threaded reference path for [`bin_series`].
pub fn bin_series_seq(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    key: &SeriesKey,
    threshold: u64,
) -> Result<Vec<SeriesBin>> {
    check_threshold(threshold)?;
    Ok(finalize(bin_vectors_seq(docs, lex, key), lex, threshold))
}

fn check_threshold(threshold: u64) -> Result<()> {
    if threshold < 1 {
        return Err(Error::Argument("threshold must be at least 1".into()));
    }
    Ok(())
}

/// A series re-centered on the unweighted mean of its valid bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSeries {
    /// Unweighted mean score of the valid bins.
    pub v_avg: f64,
    /// (key, score - v_avg) for valid bins only, in bin order.
    pub points: Vec<(String, f64)>,
}

/// Centers the valid bins of a series on their unweighted mean, so points
/// sum to zero.
pub fn relative_series(bins: &[SeriesBin]) -> Result<RelativeSeries> {
    let valid: Vec<(&str, f64)> = bins
        .iter()
        .filter(|b| b.valid)
        .filter_map(|b| b.score.map(|s| (b.key.as_str(), s)))
        .collect();
    if valid.is_empty() {
        return Err(Error::NoValidBins(
            "every bin fell below the word threshold".into(),
        ));
    }
    let v_avg = valid.iter().map(|(_, s)| s).sum::<f64>() / valid.len() as f64;
    Ok(RelativeSeries {
        v_avg,
        points: valid
            .into_iter()
            .map(|(k, s)| (k.to_string(), s - v_avg))
            .collect(),
    })
}

/// Bins documents by integer age, growing each bin until it holds at least
/// `min_anew` lexicon words.
///
/// The scan runs over ascending ages; a bin closes at the smallest upper
/// age that reaches `min_anew`, and a trailing partial bin merges into its
/// predecessor. When the whole corpus cannot reach `min_anew`, a single
/// invalid bin covering the full age range is returned. Labels are
/// zero-padded "lo-hi" ranges, inclusive on both ends.
pub fn adaptive_age_bins(
    docs: &[DocumentRecord],
    lex: &Lexicon,
    min_anew: u64,
) -> Result<Vec<SeriesBin>> {
    if min_anew < 1 {
        return Err(Error::Argument("min-anew must be at least 1".into()));
    }
    let mut by_age: BTreeMap<u32, (FrequencyVector, u64)> = BTreeMap::new();
    let mut skipped = 0u64;
    for d in docs {
        let age = d.meta.get("age").and_then(|a| a.trim().parse::<u32>().ok());
        match age {
            Some(age) => {
                let slot = by_age
                    .entry(age)
                    .or_insert_with(|| (FrequencyVector::empty(lex), 0));
                slot.0.add_text(&d.text, lex);
                slot.1 += 1;
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} documents lacked a usable age and were left out");
    }
    if by_age.is_empty() {
        return Err(Error::Unscorable(
            "no documents carry a usable age field".into(),
        ));
    }

    struct Open {
        lo: u32,
        hi: u32,
        vec: FrequencyVector,
        docs: u64,
    }
    let mut bins: Vec<Open> = Vec::new();
    let mut open: Option<Open> = None;
    for (age, (vec, docs)) in by_age {
        let acc = match open.as_mut() {
            Some(acc) => {
                acc.hi = age;
                acc.vec.merge_in_place(&vec).expect("same lexicon");
                acc.docs += docs;
                acc
            }
            None => {
                open = Some(Open {
                    lo: age,
                    hi: age,
                    vec,
                    docs,
                });
                open.as_mut().unwrap()
            }
        };
        if acc.vec.total_anew() >= min_anew {
            bins.push(open.take().unwrap());
        }
    }
    // A trailing partial bin joins its predecessor; with no predecessor the
    // whole corpus is below the floor and comes back as one invalid bin.
    if let Some(partial) = open {
        match bins.last_mut() {
            Some(last) => {
                last.hi = partial.hi;
                last.vec.merge_in_place(&partial.vec).expect("same lexicon");
                last.docs += partial.docs;
            }
            None => bins.push(partial),
        }
    }

    Ok(bins
        .into_iter()
        .map(|b| {
            let anew_words = b.vec.total_anew();
            SeriesBin {
                key: format!("{:03}-{:03}", b.lo, b.hi),
                score: score(&b.vec, lex).ok().map(|s| s.value),
                anew_words,
                docs: b.docs,
                valid: anew_words >= min_anew,
            }
        })
        .collect())
}

/// Top and bottom `k` groups by score.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroups {
    /// Best first.
    pub top: Vec<SeriesBin>,
    /// Worst first.
    pub bottom: Vec<SeriesBin>,
}

/// Ranks bins by score after dropping groups with too few documents or
/// lexicon words. Ties break alphabetically by key. Asking for more groups
/// than survive the floors returns them all.
pub fn rank_groups(
    bins: &[SeriesBin],
    min_docs: u64,
    min_anew: u64,
    top_k: usize,
) -> Result<RankedGroups> {
    if top_k < 1 {
        return Err(Error::Argument("top-k must be at least 1".into()));
    }
    let mut eligible: Vec<&SeriesBin> = bins
        .iter()
        .filter(|b| b.valid && b.docs >= min_docs && b.anew_words >= min_anew && b.score.is_some())
        .collect();
    eligible.sort_by(|a, b| {
        b.score
            .unwrap()
            .total_cmp(&a.score.unwrap())
            .then_with(|| a.key.cmp(&b.key))
    });
    let k = top_k.min(eligible.len());
    let top = eligible[..k].iter().map(|b| (*b).clone()).collect();
    let bottom = eligible[eligible.len() - k..]
        .iter()
        .rev()
        .map(|b| (*b).clone())
        .collect();
    Ok(RankedGroups { top, bottom })
}
