//! Corpus readers and preparation filters.
//!
//! Two input shapes: JSON Lines (one object per line, `text` plus optional
//! metadata fields) and plain directories (one UTF-8 text file per
//! document, metadata encoded in the filename as `key=value__` segments).
//! The JSONL reader is an iterator and never holds more than one line, so
//! arbitrarily large corpora stream in bounded memory.
//!
//! Preparation filters reproduce common blog-sentence hygiene: sentence
//! segmentation, a first-person "feeling" sentence filter, and same-day
//! exact-duplicate removal.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::DocumentRecord;
use crate::tokenize::tokenize;

/// Corpus input shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    PlainDir,
}

/// Streaming JSONL reader. Malformed lines are skipped, logged with their
/// line number, and counted in [`skipped`](JsonlReader::skipped).
pub struct JsonlReader<R: BufRead> {
    reader: R,
    line_no: u64,
    skipped: u64,
    buf: String,
}

impl<R: BufRead> JsonlReader<R> {
    pub fn new(reader: R) -> Self {
        JsonlReader {
            reader,
            line_no: 0,
            skipped: 0,
            buf: String::new(),
        }
    }

    /// Lines dropped so far for being unparseable.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    fn parse_line(&mut self) -> Option<DocumentRecord> {
        let line = self.buf.trim();
        if line.is_empty() {
            return None;
        }
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("line {}: invalid JSON ({e}), skipping", self.line_no);
                self.skipped += 1;
                return None;
            }
        };
        let Some(obj) = value.as_object() else {
            log::warn!("line {}: not a JSON object, skipping", self.line_no);
            self.skipped += 1;
            return None;
        };
        let Some(text) = obj.get("text").and_then(|t| t.as_str()) else {
            log::warn!("line {}: no string `text` field, skipping", self.line_no);
            self.skipped += 1;
            return None;
        };
        let mut doc = DocumentRecord::new(text);
        for (key, val) in obj {
            if key == "text" {
                continue;
            }
            match scalar_to_string(val) {
                Some(s) => {
                    doc.meta.insert(key.clone(), s);
                }
                None => log::warn!(
                    "line {}: field {key:?} is not a scalar, ignoring it",
                    self.line_no
                ),
            }
        }
        Some(doc)
    }
}

impl<R: BufRead> Iterator for JsonlReader<R> {
    type Item = DocumentRecord;

    fn next(&mut self) -> Option<DocumentRecord> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line_no += 1;
                    if let Some(doc) = self.parse_line() {
                        return Some(doc);
                    }
                }
                Err(e) => {
                    log::warn!("line {}: read error ({e}), stopping", self.line_no + 1);
                    self.skipped += 1;
                    return None;
                }
            }
        }
    }
}

fn scalar_to_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(i.to_string())
            } else if let Some(u) = n.as_u64() {
                Some(u.to_string())
            } else {
                let f = n.as_f64()?;
                // Integer-valued floats print as integers so "year": 2008.0
                // and "year": 2008 label the same bin.
                if f.fract() == 0.0 && f.abs() < 9e15 {
                    Some(format!("{}", f as i64))
                } else {
                    Some(f.to_string())
                }
            }
        }
        _ => None,
    }
}

/// Opens a JSONL corpus file as a streaming reader.
pub fn read_jsonl_path(path: &Path) -> Result<JsonlReader<BufReader<File>>> {
    Ok(JsonlReader::new(BufReader::new(File::open(path)?)))
}

/// Reads a plain directory corpus: every `.txt` file below `dir`, walked in
/// sorted order, one document per file. Filename stems contribute metadata
/// through `key=value` segments separated by `__`, e.g.
/// `artist=abba__year=1976__title.txt`. Invalid UTF-8 is replaced and
/// logged.
pub fn read_plain_dir(dir: &Path) -> Result<Vec<DocumentRecord>> {
    if !dir.is_dir() {
        return Err(Error::Argument(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut docs = Vec::new();
    let walker = walkdir::WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok());
    for entry in walker {
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "txt") {
            continue;
        }
        let bytes = std::fs::read(path)?;
        let text = match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{}: invalid UTF-8, replacing offending bytes", path.display());
                String::from_utf8_lossy(e.as_bytes()).into_owned()
            }
        };
        let mut doc = DocumentRecord::new(text);
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            for segment in stem.split("__") {
                if let Some((key, value)) = segment.split_once('=') {
                    if !key.is_empty() && !value.is_empty() {
                        doc.meta.insert(key.to_string(), value.to_string());
                    }
                }
            }
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Loads a whole corpus into memory, picking the format from the path:
/// directories are plain-dir corpora, files are JSONL.
pub fn read_corpus(path: &Path) -> Result<Vec<DocumentRecord>> {
    if path.is_dir() {
        read_plain_dir(path)
    } else {
        let mut reader = read_jsonl_path(path)?;
        let docs: Vec<DocumentRecord> = reader.by_ref().collect();
        if reader.skipped() > 0 {
            log::warn!("{}: skipped {} malformed lines", path.display(), reader.skipped());
        }
        Ok(docs)
    }
}

/// Splits text into sentences on `.`, `!`, or `?` followed by whitespace or
/// end of text. Terminators stay with their sentence; blank results are
/// dropped.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_boundary = match chars.peek() {
                None => true,
                Some((_, next)) => next.is_whitespace(),
            };
            if at_boundary {
                let end = i + c.len_utf8();
                let sentence = text[start..end].trim();
                if !sentence.is_empty() {
                    out.push(sentence.to_string());
                }
                start = end;
            }
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

/// Explodes a document into one record per sentence, each inheriting the
/// parent's metadata.
pub fn explode_sentences(doc: &DocumentRecord) -> Vec<DocumentRecord> {
    segment_sentences(&doc.text)
        .into_iter()
        .map(|sentence| DocumentRecord {
            text: sentence,
            meta: doc.meta.clone(),
        })
        .collect()
}

const FIRST_PERSON: [&str; 6] = ["i", "we", "me", "my", "our", "us"];
const FEEL_FORMS: [&str; 5] = ["feel", "feels", "felt", "feeling", "feelings"];

/// True for sentences that speak in the first person about feeling: at
/// least one of {i, we, me, my, our, us} and one of {feel, feels, felt,
/// feeling, feelings} among the normalized tokens.
pub fn passes_feel_filter(sentence: &str) -> bool {
    let mut has_person = false;
    let mut has_feel = false;
    crate::tokenize::for_each_token(sentence, |tok| {
        has_person = has_person || FIRST_PERSON.contains(&tok);
        has_feel = has_feel || FEEL_FORMS.contains(&tok);
    });
    has_person && has_feel
}

/// Keeps only first-person feeling sentences.
pub fn feel_filter<I>(docs: I) -> impl Iterator<Item = DocumentRecord>
where
    I: Iterator<Item = DocumentRecord>,
{
    docs.filter(|d| passes_feel_filter(&d.text))
}

/// Drops repeats of a sentence within one calendar day.
///
/// Two records collide when they share the date part of their `date` field
/// and their normalized token sequences are identical and at least six
/// tokens long. The first occurrence survives; shorter sentences always
/// pass. Records without a parseable date pass through with a warning.
pub fn dedup_day<I>(docs: I) -> impl Iterator<Item = DocumentRecord>
where
    I: Iterator<Item = DocumentRecord>,
{
    let mut seen: HashMap<String, HashSet<String>> = HashMap::new();
    docs.filter(move |doc| {
        let tokens = tokenize(&doc.text);
        if tokens.len() < 6 {
            return true;
        }
        let Some(day) = doc.date().and_then(|d| d.get(..10)).map(str::to_string) else {
            log::warn!("record without a date passes deduplication unchecked");
            return true;
        };
        seen.entry(day).or_default().insert(tokens.join("\x1f"))
    })
}
