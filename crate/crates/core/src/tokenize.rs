//! Word extraction.
//!
//! A token is a maximal run of alphabetic characters and apostrophes, with
//! leading and trailing apostrophes stripped and the rest case-folded.
//! Digits, hyphens, and all other punctuation separate tokens, so
//! "well-known" splits in two and "don't" stays whole.

/// Splits `text` into normalized tokens.
///
/// ```
/// use hedono_core::tokenize::tokenize;
/// assert_eq!(tokenize("don't STOP!! 99 problems"), vec!["don't", "stop", "problems"]);
/// ```
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |tok| out.push(tok.to_string()));
    out
}

/// Calls `f` once per normalized token. The counting hot path: common-case
/// tokens are passed through as slices without allocating.
pub fn for_each_token<F: FnMut(&str)>(text: &str, mut f: F) {
    let mut buf = String::with_capacity(32);
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        let in_token = c.is_alphabetic() || c == '\'';
        match (in_token, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                emit(&text[s..i], &mut buf, &mut f);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        emit(&text[s..], &mut buf, &mut f);
    }
}

fn emit<F: FnMut(&str)>(run: &str, buf: &mut String, f: &mut F) {
    let token = run.trim_matches('\'');
    if token.is_empty() {
        return;
    }
    if token
        .bytes()
        .all(|b| b.is_ascii_lowercase() || b == b'\'')
    {
        f(token);
    } else {
        buf.clear();
        for c in token.chars() {
            for lc in c.to_lowercase() {
                buf.push(lc);
            }
        }
        f(buf);
    }
}
