use std::io;

use thiserror::Error;

/// Crate-wide error type.
///
/// `Unscorable` and `NoValidBins` mean the input data was insufficient for
/// the requested measurement; everything else is a usage, parse, or
/// validation problem. The CLI maps the two kinds to different exit codes.
#[derive(Error, Debug)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("unscorable input: {0}")]
    Unscorable(String),

    #[error("no valid bins: {0}")]
    NoValidBins(String),

    #[error("lexicon mismatch: {0}")]
    LexiconMismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True when the error signals insufficient data rather than misuse.
    pub fn is_data_insufficiency(&self) -> bool {
        matches!(self, Error::Unscorable(_) | Error::NoValidBins(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
