//! Valence lexicon: words rated for emotional positivity on a 1-9 scale.
//!
//! The on-disk format is delimited UTF-8 text (tab or comma, auto-detected
//! from the header row) with columns named `word` and `valence`, plus an
//! optional `valence_sd` column. Other columns are ignored. Words are
//! case-folded at load time and must be unique after folding.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inclusive bounds of the rating scale.
pub const MIN_VALENCE: f64 = 1.0;
pub const MAX_VALENCE: f64 = 9.0;

/// Content fingerprint of a lexicon.
///
/// Frequency vectors remember the fingerprint of the lexicon they were
/// counted against; vectors counted against different lexica refuse to
/// merge or score together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LexiconId(u64);

/// One lexicon row.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    /// Case-folded word; never empty, never contains whitespace.
    pub word: String,
    /// Mean rating, within [`MIN_VALENCE`, `MAX_VALENCE`].
    pub valence: f64,
    /// Standard deviation of the individual ratings, when the source has one.
    pub valence_sd: Option<f64>,
}

/// Immutable valence lexicon, sorted by word.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: HashMap<String, u32>,
    id: LexiconId,
}

impl Lexicon {
    /// Builds a lexicon from raw entries. Words are case-folded here;
    /// duplicates after folding are rejected.
    pub fn from_entries(mut entries: Vec<LexiconEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("lexicon has no entries".into()));
        }
        for e in &mut entries {
            if e.word.is_empty() {
                return Err(Error::Validation("empty word in lexicon".into()));
            }
            if e.word.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!(
                    "word {:?} contains whitespace",
                    e.word
                )));
            }
            e.word = e.word.to_lowercase();
            if !e.valence.is_finite() || e.valence < MIN_VALENCE || e.valence > MAX_VALENCE {
                return Err(Error::Validation(format!(
                    "valence {} for word {:?} outside [{MIN_VALENCE}, {MAX_VALENCE}]",
                    e.valence, e.word
                )));
            }
            if let Some(sd) = e.valence_sd {
                if !sd.is_finite() || sd < 0.0 {
                    return Err(Error::Validation(format!(
                        "valence_sd {} for word {:?} is not a non-negative number",
                        sd, e.word
                    )));
                }
            }
        }
        entries.sort_by(|a, b| a.word.cmp(&b.word));
        for pair in entries.windows(2) {
            if pair[0].word == pair[1].word {
                return Err(Error::Validation(format!(
                    "duplicate word {:?}",
                    pair[0].word
                )));
            }
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.word.clone(), i as u32))
            .collect();
        let id = fingerprint(&entries);
        Ok(Lexicon { entries, index, id })
    }

    /// Parses delimited text. The delimiter is taken from the header row:
    /// tab if present, else comma.
    pub fn parse(text: &str) -> Result<Self> {
        let header = text
            .lines()
            .next()
            .ok_or_else(|| Error::Validation("lexicon file is empty".into()))?;
        let delimiter = if header.contains('\t') {
            b'\t'
        } else if header.contains(',') {
            b','
        } else {
            return Err(Error::Validation(
                "cannot detect delimiter: header row has neither tab nor comma".into(),
            ));
        };

        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());

        let headers = reader.headers().map_err(csv_error)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
        };
        let word_col = col("word").ok_or_else(|| {
            Error::Validation("header row has no `word` column".into())
        })?;
        let valence_col = col("valence").ok_or_else(|| {
            Error::Validation("header row has no `valence` column".into())
        })?;
        let sd_col = col("valence_sd");

        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            let word = record.get(word_col).unwrap_or("");
            if word.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty word".into(),
                });
            }
            let raw = record.get(valence_col).unwrap_or("");
            let valence: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("valence {raw:?} is not a number"),
            })?;
            let valence_sd = match sd_col.map(|c| record.get(c).unwrap_or("")) {
                None | Some("") => None,
                Some(raw) => Some(raw.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("valence_sd {raw:?} is not a number"),
                })?),
            };
            entries.push(LexiconEntry {
                word: word.to_string(),
                valence,
                valence_sd,
            });
        }
        Lexicon::from_entries(entries)
    }

    /// Loads a lexicon file. Invalid UTF-8 bytes are replaced with U+FFFD
    /// and logged.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let text = match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => {
                log::warn!(
                    "{}: invalid UTF-8, replacing offending bytes",
                    path.display()
                );
                String::from_utf8_lossy(e.as_bytes()).into_owned()
            }
        };
        Lexicon::parse(&text)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Word at position `i` in ascending word order.
    pub fn word_at(&self, i: usize) -> &str {
        &self.entries[i].word
    }

    pub fn valence_at(&self, i: usize) -> f64 {
        self.entries[i].valence
    }

    /// Mean valence for `word`, case-folding the query.
    pub fn lookup(&self, word: &str) -> Option<f64> {
        let key = word.to_lowercase();
        self.index.get(&key).map(|&i| self.entries[i as usize].valence)
    }

    /// Position of an already-folded token. The counting hot path; no
    /// allocation, no case-folding.
    pub(crate) fn lookup_index(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn id(&self) -> LexiconId {
        self.id
    }

    /// Draws a uniform random `m`-word subset, without replacement.
    ///
    /// The generator is ChaCha8 seeded with `seed`, and the subset is drawn
    /// with a partial Fisher-Yates index sampler, so identical inputs always
    /// produce the identical sub-lexicon.
    pub fn subsample(&self, m: usize, seed: u64) -> Result<Lexicon> {
        if m < 1 || m > self.n() {
            return Err(Error::Argument(format!(
                "subset size {m} outside 1..={}",
                self.n()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = rand::seq::index::sample(&mut rng, self.n(), m);
        let entries = picked.iter().map(|i| self.entries[i].clone()).collect();
        Lexicon::from_entries(entries)
    }

    /// Counts entries per valence bin. `edges` must be strictly ascending
    /// and cover the full rating scale. A value exactly on an interior edge
    /// goes to the higher bin; a value equal to the final edge goes to the
    /// last bin.
    pub fn valence_histogram(&self, edges: &[f64]) -> Result<Vec<u64>> {
        if edges.len() < 2 {
            return Err(Error::Argument("need at least two bin edges".into()));
        }
        if !edges.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Argument(
                "bin edges must be strictly ascending".into(),
            ));
        }
        if edges[0] > MIN_VALENCE || edges[edges.len() - 1] < MAX_VALENCE {
            return Err(Error::Argument(format!(
                "bin edges must cover [{MIN_VALENCE}, {MAX_VALENCE}]"
            )));
        }
        let mut counts = vec![0u64; edges.len() - 1];
        for e in &self.entries {
            let k = edges.partition_point(|&edge| edge <= e.valence);
            let bin = if k >= edges.len() { edges.len() - 2 } else { k - 1 };
            counts[bin] += 1;
        }
        Ok(counts)
    }

    /// Canonical tab-separated form: sorted rows, header included. Parsing
    /// the output reproduces the lexicon exactly.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word\tvalence\tvalence_sd\n");
        for e in &self.entries {
            let _ = write!(out, "{}\t{}\t", e.word, e.valence);
            if let Some(sd) = e.valence_sd {
                let _ = write!(out, "{sd}");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

fn fingerprint(entries: &[LexiconEntry]) -> LexiconId {
    // FNV-1a over the sorted entries. Stable across runs and platforms.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    for e in entries {
        eat(e.word.as_bytes());
        eat(&[0xff]);
        eat(&e.valence.to_bits().to_le_bytes());
        match e.valence_sd {
            Some(sd) => eat(&sd.to_bits().to_le_bytes()),
            None => eat(&[0xfe]),
        }
    }
    LexiconId(h)
}
