//! Minimal hand-written SVG: line charts with shaded bands and grid panels.

use std::fmt::Write;

use crate::target::GridImage;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub name: &'a str,
    pub y: &'a [f64],
    /// Half-width of the shaded band around `y`.
    pub band: Option<&'a [f64]>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of `series` against their index.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let len = series.iter().map(|s| s.y.len()).max().unwrap_or(0).max(2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for (i, &y) in s.y.iter().enumerate() {
            let d = s.band.map_or(0.0, |b| b[i]);
            lo = lo.min(y - d);
            hi = hi.max(y + d);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    lo = lo.min(0.0);
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let px = |i: usize| LEFT + pw * i as f64 / (len - 1) as f64;
    let py = |y: f64| TOP + ph * (1.0 - (y - lo) / (hi - lo));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in 0..=4 {
        let y = lo + (hi - lo) * t as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{:.4}</text>"##,
            LEFT + pw,
            py(y),
            py(y),
            LEFT - 6.0,
            py(y) + 4.0,
            y
        );
    }
    for t in 0..=4 {
        let i = (len - 1) * t / 4;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{i}</text>"#,
            px(i),
            TOP + ph + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(band) = s.band {
            let mut pts: Vec<String> = s
                .y
                .iter()
                .zip(band)
                .enumerate()
                .map(|(i, (y, d))| format!("{:.1},{:.1}", px(i), py(y + d)))
                .collect();
            pts.extend(
                s.y.iter()
                    .zip(band)
                    .enumerate()
                    .rev()
                    .map(|(i, (y, d))| format!("{:.1},{:.1}", px(i), py(y - d))),
            );
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> = s
            .y
            .iter()
            .enumerate()
            .map(|(i, y)| format!("{:.1},{:.1}", px(i), py(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0,
            W - RIGHT + 36.0,
            ly + 4.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grids side by side, each with a caption.
pub fn grid_panels(title: &str, panels: &[(String, GridImage)]) -> String {
    let cell = 10.0;
    let pw = crate::target::GRID_COLS as f64 * cell;
    let ph = crate::target::GRID_ROWS as f64 * cell;
    let gap = 20.0;
    let width = gap + panels.len() as f64 * (pw + gap);
    let height = ph + 80.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{gap}" y="20" font-size="14">{}</text>"#, escape(title));
    for (k, (caption, grid)) in panels.iter().enumerate() {
        let x0 = gap + k as f64 * (pw + gap);
        let y0 = 36.0;
        let _ = writeln!(
            out,
            r##"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="white" stroke="#999"/>"##
        );
        for r in 0..crate::target::GRID_ROWS {
            for c in 0..crate::target::GRID_COLS {
                if grid.get(r, c) {
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="black"/>"#,
                        x0 + c as f64 * cell,
                        y0 + r as f64 * cell
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x0 + pw / 2.0,
            y0 + ph + 18.0,
            escape(caption)
        );
    }
    out.push_str("</svg>\n");
    out
}
