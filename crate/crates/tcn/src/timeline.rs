//! Timeline charts: stacked per-frame label bars, one row per sequence, as
//! static SVG or plain text. Colors and glyphs come from fixed palettes
//! indexed by class id, so the same labels always render the same bytes.

use crate::error::{Result, TcnError};
use crate::metrics::labels_to_segments;
use crate::LabelSequence;
use std::fmt::Write as _;

/// One horizontal bar: a name shown on the left and its per-frame labels.
#[derive(Debug, Clone)]
pub struct TimelineRow {
    pub name: String,
    pub labels: LabelSequence,
}

impl TimelineRow {
    pub fn new(name: impl Into<String>, labels: LabelSequence) -> Self {
        TimelineRow {
            name: name.into(),
            labels,
        }
    }
}

/// Fill colors, reused cyclically when there are more classes than entries.
pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b4", "#59a14f", "#edc949", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

pub fn class_color(class_id: usize) -> &'static str {
    PALETTE[class_id % PALETTE.len()]
}

/// Letter used for a class in text renderings: A-Z then a-z, cycling.
pub fn class_glyph(class_id: usize) -> char {
    const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    GLYPHS[class_id % GLYPHS.len()] as char
}

fn check_rows(rows: &[TimelineRow]) -> Result<usize> {
    let first = rows
        .first()
        .ok_or_else(|| TcnError::data("timeline needs at least one row"))?;
    let frames = first.labels.len();
    if frames == 0 {
        return Err(TcnError::data("timeline rows must not be empty"));
    }
    for row in rows {
        if row.labels.len() != frames {
            return Err(TcnError::data(format!(
                "row {:?} has {} frames, row {:?} has {}",
                row.name,
                row.labels.len(),
                first.name,
                frames
            )));
        }
    }
    Ok(frames)
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const LABEL_WIDTH: u32 = 120;
const FRAME_PX: u32 = 4;
const ROW_HEIGHT: u32 = 24;
const ROW_GAP: u32 = 10;
const MARGIN: u32 = 10;

/// Renders all rows as one SVG document. One `<rect>` per label segment,
/// integer pixel coordinates only, so equal inputs give equal bytes.
pub fn render_svg(rows: &[TimelineRow]) -> Result<String> {
    let frames = check_rows(rows)? as u32;
    let width = LABEL_WIDTH + frames * FRAME_PX + MARGIN;
    let height = MARGIN + rows.len() as u32 * (ROW_HEIGHT + ROW_GAP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    for (i, row) in rows.iter().enumerate() {
        let y = MARGIN + i as u32 * (ROW_HEIGHT + ROW_GAP);
        let _ = writeln!(
            svg,
            "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\">{}</text>",
            y + ROW_HEIGHT / 2 + 4,
            escape_xml(&row.name)
        );
        for seg in labels_to_segments(&row.labels) {
            let x = LABEL_WIDTH + seg.start as u32 * FRAME_PX;
            let w = seg.len() as u32 * FRAME_PX;
            let _ = writeln!(
                svg,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{ROW_HEIGHT}\" fill=\"{}\">\
                 <title>{}</title></rect>",
                class_color(seg.class_id),
                seg.class_id
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders all rows as text, one line per row plus a glyph legend. Rows
/// longer than `max_width` columns are downsampled by point sampling.
pub fn render_ascii(rows: &[TimelineRow], max_width: usize) -> Result<String> {
    let frames = check_rows(rows)?;
    if max_width == 0 {
        return Err(TcnError::config("timeline width must be at least 1"));
    }
    let cols = frames.min(max_width);
    let name_width = rows
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(0);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = String::new();
    for row in rows {
        let _ = write!(out, "{:<name_width$} |", row.name);
        for c in 0..cols {
            let t = c * frames / cols;
            seen.insert(row.labels[t]);
            out.push(class_glyph(row.labels[t]));
        }
        out.push_str("|\n");
    }
    let legend: Vec<String> = seen
        .into_iter()
        .map(|id| format!("{}={id}", class_glyph(id)))
        .collect();
    let _ = writeln!(out, "legend: {}", legend.join(" "));
    Ok(out)
}
