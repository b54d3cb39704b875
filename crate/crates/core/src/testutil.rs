//! Shared fixtures for unit tests.

use crate::lexicon::{Lexicon, LexiconEntry};

pub(crate) const PANGRAM: &str = "The quick brown fox jumps over the lazy dog.";

pub(crate) fn entry(word: &str, valence: f64) -> LexiconEntry {
    LexiconEntry {
        word: word.into(),
        valence,
        valence_sd: None,
    }
}

/// Digit-free synthetic word names ("waa", "wab", ...) — generated text
/// must survive tokenization, which splits on digits.
pub(crate) fn wname(i: usize) -> String {
    assert!(i < 26 * 26);
    format!(
        "w{}{}",
        (b'a' + (i / 26) as u8) as char,
        (b'a' + (i % 26) as u8) as char
    )
}

/// Three-word lexicon covering the pangram: quick 6.64, lazy 4.38, dog 7.57.
pub(crate) fn pangram_lexicon() -> Lexicon {
    Lexicon::from_entries(vec![
        entry("quick", 6.64),
        entry("lazy", 4.38),
        entry("dog", 7.57),
    ])
    .unwrap()
}
