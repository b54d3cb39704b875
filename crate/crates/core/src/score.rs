//! Token counting against a lexicon and the frequency-weighted valence score.
//!
//! Counts live in dense per-lexicon-word vectors that merge by pointwise
//! addition, so merging is associative and commutative and parallel
//! counting is exact. Scores are computed after merging, walking words in
//! ascending order, which pins the float summation order.

use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, LexiconId};
use crate::tokenize::for_each_token;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Word counts for a document, group, or whole corpus, tied to the lexicon
/// they were counted against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyVector {
    counts: Vec<u64>,
    total_anew: u64,
    total_words: u64,
    lexicon_id: LexiconId,
}

impl FrequencyVector {
    /// The merge identity: zero counts everywhere.
    pub fn empty(lex: &Lexicon) -> Self {
        FrequencyVector {
            counts: vec![0; lex.n()],
            total_anew: 0,
            total_words: 0,
            lexicon_id: lex.id(),
        }
    }

    /// Counts a normalized token sequence. Tokens are looked up verbatim;
    /// run them through [`tokenize`](crate::tokenize::tokenize) first.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S], lex: &Lexicon) -> Self {
        let mut v = FrequencyVector::empty(lex);
        for tok in tokens {
            v.add_token(tok.as_ref(), lex);
        }
        v
    }

    /// Tokenizes and counts in one pass.
    pub fn from_text(text: &str, lex: &Lexicon) -> Self {
        let mut v = FrequencyVector::empty(lex);
        v.add_text(text, lex);
        v
    }

    pub(crate) fn add_text(&mut self, text: &str, lex: &Lexicon) {
        debug_assert_eq!(self.lexicon_id, lex.id());
        for_each_token(text, |tok| {
            self.total_words += 1;
            if let Some(i) = lex.lookup_index(tok) {
                self.counts[i as usize] += 1;
                self.total_anew += 1;
            }
        });
    }

    fn add_token(&mut self, token: &str, lex: &Lexicon) {
        self.total_words += 1;
        if let Some(i) = lex.lookup_index(token) {
            self.counts[i as usize] += 1;
            self.total_anew += 1;
        }
    }

    /// Pointwise sum of two vectors counted against the same lexicon.
    pub fn merge(&self, other: &FrequencyVector) -> Result<FrequencyVector> {
        let mut out = self.clone();
        out.merge_in_place(other)?;
        Ok(out)
    }

    pub fn merge_in_place(&mut self, other: &FrequencyVector) -> Result<()> {
        if self.lexicon_id != other.lexicon_id {
            return Err(Error::LexiconMismatch(
                "cannot merge counts taken against different lexica".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_anew += other.total_anew;
        self.total_words += other.total_words;
        Ok(())
    }

    pub(crate) fn merge_unchecked(mut self, other: FrequencyVector) -> FrequencyVector {
        debug_assert_eq!(self.lexicon_id, other.lexicon_id);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_anew += other.total_anew;
        self.total_words += other.total_words;
        self
    }

    /// Count of one word, case-folding the query.
    pub fn count_of(&self, word: &str, lex: &Lexicon) -> Result<u64> {
        self.check_lexicon(lex)?;
        let key = word.to_lowercase();
        Ok(lex
            .lookup_index(&key)
            .map_or(0, |i| self.counts[i as usize]))
    }

    /// Fraction of counted lexicon words that are `word`. The denominator is
    /// `total_anew`, not `total_words`.
    pub fn relative_abundance(&self, word: &str, lex: &Lexicon) -> Result<f64> {
        if self.total_anew == 0 {
            return Err(Error::Unscorable(
                "no lexicon words counted; relative abundance undefined".into(),
            ));
        }
        Ok(self.count_of(word, lex)? as f64 / self.total_anew as f64)
    }

    /// Tokens that matched the lexicon.
    pub fn total_anew(&self) -> u64 {
        self.total_anew
    }

    /// All tokens, matched or not.
    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    /// Lexicon words with a nonzero count.
    pub fn distinct_anew(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn lexicon_id(&self) -> LexiconId {
        self.lexicon_id
    }

    pub(crate) fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub(crate) fn check_lexicon(&self, lex: &Lexicon) -> Result<()> {
        if self.lexicon_id != lex.id() {
            return Err(Error::LexiconMismatch(
                "counts were taken against a different lexicon".into(),
            ));
        }
        Ok(())
    }
}

/// Counts a batch of documents into one vector, in parallel when the
/// `parallel` feature is on. Counts are integers, so the split never
/// changes the result.
#[cfg(feature = "parallel")]
pub fn count_documents<S: AsRef<str> + Sync>(docs: &[S], lex: &Lexicon) -> FrequencyVector {
    docs.par_iter()
        .fold(
            || FrequencyVector::empty(lex),
            |mut acc, d| {
                acc.add_text(d.as_ref(), lex);
                acc
            },
        )
        .reduce(|| FrequencyVector::empty(lex), FrequencyVector::merge_unchecked)
}

#[cfg(not(feature = "parallel"))]
pub fn count_documents<S: AsRef<str> + Sync>(docs: &[S], lex: &Lexicon) -> FrequencyVector {
    count_documents_seq(docs, lex)
}

/// Single-threaded reference path for [`count_documents`].
pub fn count_documents_seq<S: AsRef<str>>(docs: &[S], lex: &Lexicon) -> FrequencyVector {
    let mut acc = FrequencyVector::empty(lex);
    for d in docs {
        acc.add_text(d.as_ref(), lex);
    }
    acc
}

/// Frequency-weighted average valence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValenceScore {
    /// sum(valence_i * count_i) / sum(count_i) over lexicon words.
    pub value: f64,
    pub anew_words: u64,
    pub distinct_anew: usize,
}

/// Group score plus the population variance of valence over the counted
/// lexicon word tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupScore {
    pub score: ValenceScore,
    pub variance: f64,
}

/// One row of a most-frequent-lexicon-words table.
#[derive(Debug, Clone, PartialEq)]
pub struct TopWord {
    pub word: String,
    pub count: u64,
    /// Percentage of all counted lexicon words.
    pub pct: f64,
}

/// Scores a frequency vector: the count-weighted mean valence, summed in
/// ascending word order.
pub fn score(v: &FrequencyVector, lex: &Lexicon) -> Result<ValenceScore> {
    v.check_lexicon(lex)?;
    if v.total_anew() == 0 {
        return Err(Error::Unscorable("no lexicon words in input".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &c) in v.counts().iter().enumerate() {
        if c > 0 {
            let f = c as f64;
            num += lex.valence_at(i) * f;
            den += f;
        }
    }
    Ok(ValenceScore {
        value: num / den,
        anew_words: v.total_anew(),
        distinct_anew: v.distinct_anew(),
    })
}

/// Scores a group and reports the spread: population variance of valence
/// across the individual counted tokens (each token contributes its word's
/// valence once).
pub fn score_group(v: &FrequencyVector, lex: &Lexicon) -> Result<GroupScore> {
    let s = score(v, lex)?;
    let mut acc = 0.0;
    let mut den = 0.0;
    for (i, &c) in v.counts().iter().enumerate() {
        if c > 0 {
            let d = lex.valence_at(i) - s.value;
            acc += c as f64 * d * d;
            den += c as f64;
        }
    }
    Ok(GroupScore {
        score: s,
        variance: acc / den,
    })
}

/// The `k` most frequent lexicon words, ties broken alphabetically.
pub fn top_words(v: &FrequencyVector, lex: &Lexicon, k: usize) -> Result<Vec<TopWord>> {
    v.check_lexicon(lex)?;
    if k < 1 {
        return Err(Error::Argument("top-k must be at least 1".into()));
    }
    let mut rows: Vec<(u64, &str)> = v
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (c, lex.word_at(i)))
        .collect();
    rows.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    rows.truncate(k);
    let total = v.total_anew() as f64;
    Ok(rows
        .into_iter()
        .map(|(count, word)| TopWord {
            word: word.to_string(),
            count,
            pct: 100.0 * count as f64 / total,
        })
        .collect())
}
