//! Deterministic SVG heatmaps.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    /// Low values blue, high values red.
    BlueRed,
    /// Low values green, high values red.
    GreenRed,
}

impl Palette {
    fn stops(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Palette::BlueRed => ([49.0, 54.0, 149.0], [215.0, 48.0, 39.0]),
            Palette::GreenRed => ([0.0, 104.0, 55.0], [215.0, 48.0, 39.0]),
        }
    }

    /// Hex color at `t` in `[0, 1]`.
    pub fn color(self, t: f64) -> String {
        let t = if t.is_finite() {
            t.clamp(0.0, 1.0)
        } else {
            0.5
        };
        let (lo, hi) = self.stops();
        let mix = |i: usize| (lo[i] + (hi[i] - lo[i]) * t).round() as u8;
        format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
    }
}

const CELL_W: usize = 56;
const CELL_H: usize = 28;
const MARGIN_L: usize = 120;
const MARGIN_T: usize = 48;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Grid of colored cells, `values[row][col]`; `None` cells are drawn grey
/// and labeled `null`. Colors scale linearly over `[lo, hi]`.
pub fn heatmap_svg(
    title: &str,
    row_labels: &[String],
    col_labels: &[String],
    values: &[Vec<Option<f64>>],
    (lo, hi): (f64, f64),
    palette: Palette,
) -> String {
    let width = MARGIN_L + CELL_W * col_labels.len() + 16;
    let height = MARGIN_T + CELL_H * row_labels.len() + 16;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="8" y="18" font-size="13">{}</text>"#,
        escape(title)
    );
    for (c, label) in col_labels.iter().enumerate() {
        let x = MARGIN_L + c * CELL_W + CELL_W / 2;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_T - 8,
            escape(label)
        );
    }
    let span = hi - lo;
    for (r, label) in row_labels.iter().enumerate() {
        let y = MARGIN_T + r * CELL_H;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6,
            y + CELL_H / 2 + 4,
            escape(label)
        );
        for c in 0..col_labels.len() {
            let x = MARGIN_L + c * CELL_W;
            let cell = values.get(r).and_then(|row| row.get(c)).copied().flatten();
            let (fill, text) = match cell {
                Some(v) => {
                    let t = if span > 0.0 { (v - lo) / span } else { 0.5 };
                    (palette.color(t), format!("{v:.3}"))
                }
                None => ("#bdbdbd".to_string(), "null".to_string()),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="#ffffff"/>"##
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{}" text-anchor="middle" fill="#ffffff">{text}</text>"##,
                x + CELL_W / 2,
                y + CELL_H / 2 + 4
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
