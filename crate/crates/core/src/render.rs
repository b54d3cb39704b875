//! Text and SVG renderings of a word shift.
//!
//! Both renderers draw the same horizontal bar chart: words ranked by
//! |contribution|, bars signed left/right, labels carrying the quadrant.
//! The text form encodes valence side by case (UPPER above the reference
//! score, lower below) and abundance direction by a +/- prefix; the SVG
//! form uses red italics for high-valence words and upright blue for
//! low-valence ones. Output is deterministic byte-for-byte: fixed decimal
//! widths, no timestamps, no randomness.

use crate::error::{Error, Result};
use crate::shift::{ShiftResult, WordContribution};

const BAR_COLS: usize = 36;
const SVG_HALF_WIDTH: f64 = 220.0;
const COLOR_HIGH: &str = "#c0392b";
const COLOR_LOW: &str = "#2980b9";
const COLOR_ZERO: &str = "#7f8c8d";

/// Rows to draw: ranked prefix of the contributions, zero rows dropped
/// unless asked for. Rows are kept even when every one is zero-valued so a
/// raw-mode chart still shows which words were present.
fn select(
    r: &ShiftResult,
    top_k: usize,
    include_zeros: bool,
) -> Result<Vec<&WordContribution>> {
    if top_k == 0 {
        return Err(Error::Argument("top_k must be at least 1".into()));
    }
    Ok(r.contributions
        .iter()
        .filter(|c| include_zeros || c.delta_pct != 0.0)
        .take(top_k)
        .collect())
}

fn marker(c: &WordContribution) -> &'static str {
    match c.abundance_rel {
        1 => "+",
        -1 => "-",
        _ => " ",
    }
}

/// "+LAZY" style label: case gives the valence side, prefix the abundance
/// direction.
fn text_label(c: &WordContribution) -> String {
    let word = if c.valence_rel > 0 {
        c.word.to_uppercase()
    } else {
        c.word.clone()
    };
    format!("{}{}", marker(c), word)
}

fn bar_cells(value: f64, max_abs: f64, cols: usize) -> usize {
    if max_abs <= 0.0 {
        return 0;
    }
    (value.abs() / max_abs * cols as f64).round() as usize
}

// -0.0 would render as "-0.00"; zero is zero.
fn display_val(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Plain-text shift chart.
pub fn render_text(r: &ShiftResult, top_k: usize, include_zeros: bool) -> Result<String> {
    let rows = select(r, top_k, include_zeros)?;
    let mut out = String::new();
    out.push_str(&format!(
        "word shift: reference {:.4} -> comparison {:.4}  (delta {:+.4})\n",
        r.v_a, r.v_b, r.delta
    ));
    if r.percentages {
        out.push_str("contribution of each word, % of |delta|\n");
    } else {
        out.push_str("delta is zero: raw contributions, not percentages\n");
    }
    out.push_str(
        "case: UPPER above reference valence / lower below; +/-: more/less abundant\n\n",
    );
    let max_abs = rows
        .iter()
        .map(|c| c.delta_pct.abs())
        .fold(0.0f64, f64::max);
    let label_width = rows.iter().map(|c| text_label(c).len()).max().unwrap_or(0);
    let cols = BAR_COLS;
    for (rank, c) in rows.iter().enumerate() {
        let cells = bar_cells(c.delta_pct, max_abs, cols);
        let (left, right) = if c.delta_pct < 0.0 {
            (format!("{:>cols$}", "#".repeat(cells)), String::new())
        } else {
            (format!("{:>cols$}", ""), "#".repeat(cells))
        };
        out.push_str(&format!(
            "{:>4}  {:<label_width$}  {:>9.2}  {left}|{right}\n",
            rank + 1,
            text_label(c),
            display_val(c.delta_pct),
        ));
    }
    if rows.is_empty() {
        out.push_str("(no nonzero contributions)\n");
    }
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG shift chart: one horizontal bar per word around a central axis,
/// red italic labels for words above the reference valence, upright blue
/// below, gray for zero rows.
pub fn render_svg(r: &ShiftResult, top_k: usize, include_zeros: bool) -> Result<String> {
    let rows = select(r, top_k, include_zeros)?;
    let row_h = 22.0;
    let top = 58.0;
    let width = 640.0;
    let height = top + rows.len().max(1) as f64 * row_h + 16.0;
    let axis_x = width / 2.0;
    let max_abs = rows
        .iter()
        .map(|c| c.delta_pct.abs())
        .fold(0.0f64, f64::max);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"monospace\" font-size=\"13\">\n"
    ));
    s.push_str(&format!(
        "  <title>word shift: {:.4} to {:.4}</title>\n",
        r.v_a, r.v_b
    ));
    s.push_str(&format!(
        "  <text x=\"16\" y=\"22\">word shift: reference {:.4} -&gt; comparison {:.4} (delta {:+.4})</text>\n",
        r.v_a, r.v_b, r.delta
    ));
    let subtitle = if r.percentages {
        "contribution of each word, % of |delta|"
    } else {
        "delta is zero: raw contributions, not percentages"
    };
    s.push_str(&format!("  <text x=\"16\" y=\"40\">{subtitle}</text>\n"));
    s.push_str(&format!(
        "  <line x1=\"{axis_x:.2}\" y1=\"{:.2}\" x2=\"{axis_x:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        top - 8.0,
        height - 10.0
    ));
    for (i, c) in rows.iter().enumerate() {
        let y = top + i as f64 * row_h;
        let half = if max_abs > 0.0 {
            c.delta_pct.abs() / max_abs * SVG_HALF_WIDTH
        } else {
            0.0
        };
        let (bar_x, anchor, label_x) = if c.delta_pct < 0.0 {
            (axis_x - half, "end", axis_x - half - 6.0)
        } else {
            (axis_x, "start", axis_x + half + 6.0)
        };
        let color = match c.valence_rel {
            1 => COLOR_HIGH,
            -1 => COLOR_LOW,
            _ => COLOR_ZERO,
        };
        let style = if c.valence_rel > 0 { " font-style=\"italic\"" } else { "" };
        s.push_str(&format!(
            "  <rect x=\"{bar_x:.2}\" y=\"{:.2}\" width=\"{half:.2}\" height=\"14\" fill=\"{color}\" fill-opacity=\"0.55\"/>\n",
            y
        ));
        s.push_str(&format!(
            "  <text x=\"{label_x:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\" fill=\"{color}\"{style}>{} {:.2}</text>\n",
            y + 11.5,
            xml_escape(&format!("{}{}", marker(c), c.word)),
            display_val(c.delta_pct)
        ));
    }
    if rows.is_empty() {
        s.push_str(&format!(
            "  <text x=\"16\" y=\"{top:.2}\" fill=\"{COLOR_ZERO}\">(no nonzero contributions)</text>\n"
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
