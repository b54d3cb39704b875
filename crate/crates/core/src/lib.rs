//! Corpus valence measurement.
//!
//! The crate scores text against a valence lexicon (a word list rated for
//! emotional positivity on a 1-9 scale), decomposes the score difference
//! between two corpora into per-word contributions, bins scored corpora
//! into date or metadata series, and checks series stability under random
//! lexicon subsampling.
//!
//! Counting merges by integer addition and every float accumulation walks
//! words in a fixed ascending order, so results are bit-identical no matter
//! how the work is split across threads.

pub mod error;
pub mod ingest;
pub mod lexicon;
pub mod render;
pub mod robustness;
pub mod score;
pub mod series;
pub mod shift;
pub mod tokenize;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use lexicon::{Lexicon, LexiconEntry, LexiconId};
pub use robustness::{BoxStats, RobustnessRun};
pub use score::{FrequencyVector, GroupScore, TopWord, ValenceScore};
pub use series::{DocumentRecord, RankedGroups, RelativeSeries, SeriesBin, SeriesKey};
pub use shift::{Quadrant, ShiftResult, WordContribution};

/// Caps the worker-thread count for parallel stages. Call once, before any
/// parallel work. A no-op in sequential builds. Thread count never affects
/// output bytes, only wall time.
pub fn set_jobs(n: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
