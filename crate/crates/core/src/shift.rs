//! Word shift: decomposes the valence difference between a reference
//! corpus `a` and a comparison corpus `b` into per-word contributions.
//!
//! With delta = v_b - v_a, each word contributes
//!
//! ```text
//! delta_pct_i = 100 * (p_ib - p_ia) * (v_i - v_a) / |delta|
//! ```
//!
//! where p is relative abundance among counted lexicon words. The
//! contributions sum to +100 when the comparison corpus scored higher and
//! -100 when it scored lower; a positive contribution always means the word
//! pushed the comparison score up relative to the reference. When delta is
//! exactly zero the percentage scale is undefined, so contributions are
//! reported raw and flagged. Corpora with identical abundance profiles
//! (every p_ib = p_ia, e.g. one is a doubled copy of the other) get the
//! same raw treatment: their true difference is zero even when the two
//! independently rounded scores disagree in the last bit, and dividing
//! rounding residue by itself would manufacture arbitrary percentages.

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::score::{score, FrequencyVector};

/// Which corner of the shift a word falls in: valence side relative to the
/// reference score, crossed with abundance direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    PosUp,
    PosDown,
    NegUp,
    NegDown,
    /// Contribution is exactly zero: abundance unchanged or valence equal
    /// to the reference score.
    Zero,
}

impl Quadrant {
    pub fn label(self) -> &'static str {
        match self {
            Quadrant::PosUp => "pos-up",
            Quadrant::PosDown => "pos-down",
            Quadrant::NegUp => "neg-up",
            Quadrant::NegDown => "neg-down",
            Quadrant::Zero => "zero",
        }
    }
}

/// One word's share of the shift.
#[derive(Debug, Clone, PartialEq)]
pub struct WordContribution {
    pub word: String,
    /// Percentage of |delta| (raw product when the result is not
    /// percent-scaled).
    pub delta_pct: f64,
    /// Sign of (v_i - v_a): +1 above the reference score, -1 below, 0 equal.
    pub valence_rel: i8,
    /// Sign of (p_ib - p_ia): +1 more abundant in the comparison corpus.
    pub abundance_rel: i8,
    pub quadrant: Quadrant,
}

/// Full decomposition of one corpus pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    pub v_a: f64,
    pub v_b: f64,
    /// v_b - v_a, exactly.
    pub delta: f64,
    /// False when delta is exactly zero or the abundance profiles are
    /// identical; contributions are then raw (p_ib - p_ia)(v_i - v_a)
    /// products instead of percentages.
    pub percentages: bool,
    /// Sorted by |delta_pct| descending, ties alphabetical.
    pub contributions: Vec<WordContribution>,
}

/// Decomposes v_b - v_a into per-word contributions. `a` is the reference
/// corpus; the result is asymmetric in (a, b) by construction.
pub fn shift(a: &FrequencyVector, b: &FrequencyVector, lex: &Lexicon) -> Result<ShiftResult> {
    a.check_lexicon(lex)?;
    b.check_lexicon(lex)?;
    if a.total_anew() == 0 || b.total_anew() == 0 {
        return Err(Error::Unscorable(
            "both corpora must contain at least one lexicon word".into(),
        ));
    }
    let v_a = score(a, lex)?.value;
    let v_b = score(b, lex)?.value;
    let delta = v_b - v_a;

    let ta = a.total_anew() as f64;
    let tb = b.total_anew() as f64;
    let active: Vec<(usize, f64)> = a
        .counts()
        .iter()
        .zip(b.counts())
        .enumerate()
        .filter(|(_, (&ca, &cb))| ca > 0 || cb > 0)
        .map(|(i, (&ca, &cb))| (i, cb as f64 / tb - ca as f64 / ta))
        .collect();
    let same_profile = active.iter().all(|&(_, dp)| dp == 0.0);
    let percentages = delta != 0.0 && !same_profile;
    let scale = if percentages { 100.0 / delta.abs() } else { 1.0 };

    let mut contributions = Vec::new();
    for &(i, dp) in &active {
        let dv = lex.valence_at(i) - v_a;
        let delta_pct = dp * dv * scale;
        let valence_rel = sign(dv);
        let abundance_rel = sign(dp);
        let quadrant = match (valence_rel, abundance_rel) {
            (0, _) | (_, 0) => Quadrant::Zero,
            (1, 1) => Quadrant::PosUp,
            (1, _) => Quadrant::PosDown,
            (_, 1) => Quadrant::NegUp,
            _ => Quadrant::NegDown,
        };
        contributions.push(WordContribution {
            word: lex.word_at(i).to_string(),
            delta_pct,
            valence_rel,
            abundance_rel,
            quadrant,
        });
    }
    contributions.sort_by(|x, y| {
        y.delta_pct
            .abs()
            .total_cmp(&x.delta_pct.abs())
            .then_with(|| x.word.cmp(&y.word))
    });
    Ok(ShiftResult {
        v_a,
        v_b,
        delta,
        percentages,
        contributions,
    })
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
