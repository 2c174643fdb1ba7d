//! ASCII and SVG renderers for profiles, avalanche rasters and transducer
//! diagrams. Output bytes depend only on the input.

use std::fmt::Write;

use kspm::{Config, Transducer};

/// Tallest ASCII staircase before heights are scaled down.
pub const MAX_ROWS: i64 = 24;

/// Side of one raster cell, in SVG user units.
pub const CELL: usize = 6;

const FIRED: &str = "#c6dbef";
const PEAK: &str = "#08306b";
const DENSITY: &str = "#000000";
const MAX_COLUMN: &str = "#cb181d";

/// Staircase profile of a configuration, one `#` per grain row.
pub fn staircase(cfg: &Config) -> String {
    let heights = cfg.heights();
    let top = heights.first().copied().unwrap_or(0);
    let scale = if top > MAX_ROWS { (top + MAX_ROWS - 1) / MAX_ROWS } else { 1 };
    let rows = (top + scale - 1) / scale;
    let mut out = String::new();
    for r in (1..=rows).rev() {
        let line: String = heights.iter().map(|&h| if (h + scale - 1) / scale >= r { '#' } else { ' ' }).collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(&"-".repeat(heights.len().max(1)));
    out.push('\n');
    if scale > 1 {
        let _ = writeln!(out, "scale: one row = {scale} grains");
    }
    out
}

/// One panel per firing: the profile after the grain addition, then after
/// each fired column.
pub fn avalanche_panels(start: &Config, fired: &[usize]) -> String {
    let mut out = String::new();
    let mut cfg = start.clone();
    let _ = writeln!(out, "add one grain on column 0: {cfg}");
    out.push_str(&staircase(&cfg));
    for (step, &c) in fired.iter().enumerate() {
        cfg.fire(c).expect("recorded firing is legal");
        let _ = writeln!(out, "\nstep {}: fire column {c}: {cfg}", step + 1);
        out.push_str(&staircase(&cfg));
        let _ = writeln!(out, "{}^", " ".repeat(c));
    }
    out
}

/// One raster row: an avalanche with the horizon curves after it.
#[derive(Clone, Debug)]
pub struct RasterRow {
    pub fired: Vec<usize>,
    pub peaks: Vec<usize>,
    /// `𝓛(D, k)`.
    pub global_density: usize,
    /// Number of non-empty columns of `π(k)`.
    pub width: usize,
}

fn raster_columns(rows: &[RasterRow]) -> usize {
    rows.iter().map(|r| r.width.max(r.fired.iter().max().map_or(0, |m| m + 1))).max().unwrap_or(0).max(1)
}

/// One text line per avalanche: `o` fired, `#` peak, `|` global density
/// column when not fired.
pub fn raster_ascii(rows: &[RasterRow]) -> String {
    let cols = raster_columns(rows);
    let mut out = String::new();
    for (k, row) in rows.iter().enumerate() {
        let mut line = vec![' '; cols];
        line[row.global_density] = '|';
        for &c in &row.fired {
            line[c] = 'o';
        }
        for &p in &row.peaks {
            line[p] = '#';
        }
        let text: String = line.into_iter().collect();
        let _ = writeln!(out, "{:>6} {}", k + 1, text.trim_end());
    }
    out
}

fn staircase_path(rows: &[RasterRow], x: impl Fn(&RasterRow) -> usize) -> String {
    let mut d = String::new();
    for (k, row) in rows.iter().enumerate() {
        let xk = x(row) * CELL;
        if k == 0 {
            let _ = write!(d, "M{xk} 0");
        } else {
            let _ = write!(d, " H{xk}");
        }
        let _ = write!(d, " V{}", (k + 1) * CELL);
    }
    d
}

/// Layered SVG 1.1 raster, one avalanche per row, first avalanche on top.
pub fn raster_svg(rows: &[RasterRow]) -> String {
    let cols = raster_columns(rows);
    let (w, h) = (cols * CELL, rows.len().max(1) * CELL);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    let cells = |out: &mut String, id: &str, fill: &str, pick: &dyn Fn(&RasterRow) -> &[usize]| {
        let _ = writeln!(out, r#"<g id="{id}" fill="{fill}">"#);
        for (k, row) in rows.iter().enumerate() {
            for &c in pick(row) {
                let _ = writeln!(out, r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}"/>"#, c * CELL, k * CELL);
            }
        }
        let _ = writeln!(out, "</g>");
    };
    cells(&mut out, "fired", FIRED, &|r| &r.fired);
    cells(&mut out, "peaks", PEAK, &|r| &r.peaks);
    if !rows.is_empty() {
        let _ = writeln!(
            out,
            r#"<path id="global-density" d="{}" fill="none" stroke="{DENSITY}" stroke-width="1"/>"#,
            staircase_path(rows, |r| r.global_density)
        );
        let _ = writeln!(
            out,
            r#"<path id="max-column" d="{}" fill="none" stroke="{MAX_COLUMN}" stroke-width="1" stroke-dasharray="3 2"/>"#,
            staircase_path(rows, |r| r.width)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// States on a circle, initial state first; one labelled arrow per edge.
pub fn transducer_svg(t: &Transducer) -> String {
    let d = t.d();
    let mut states = t.states().to_vec();
    states.sort();
    let n = states.len();
    let radius = 40.0 + 18.0 * n as f64;
    let size = 2.0 * radius + 120.0;
    let c = size / 2.0;
    let pos = |s: &kspm::IntervalState| {
        let i = states.iter().position(|x| x == s).expect("known state");
        let angle = -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        (c + radius * angle.cos(), c + radius * angle.sin())
    };
    let label = |w: &kspm::TraceWord| if w.is_empty() { "ε".to_string() } else { w.render(d) };
    let letter = |a: u8| kspm::TraceWord::from(vec![a]).render(d);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        out,
        r##"<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="7" refY="3" orient="auto"><path d="M0,0 L7,3 L0,6 z" fill="#000000"/></marker></defs>"##
    );
    let _ = writeln!(out, r#"<g id="edges" stroke="{DENSITY}" fill="none">"#);
    let mut labels = String::new();
    for e in t.edges() {
        let (x1, y1) = pos(&e.from);
        let (x2, y2) = pos(&e.to);
        let text = escape(&format!("{}|{}", letter(e.input), label(&e.output)));
        if e.from == e.to {
            let _ = writeln!(
                out,
                r#"<path d="M{:.1},{:.1} c-20,-40 20,-40 0,-14" marker-end="url(#arrow)"/>"#,
                x1 - 4.0,
                y1 - 14.0
            );
            let _ = writeln!(
                labels,
                r#"<text x="{:.1}" y="{:.1}">{text}</text>"#,
                x1 + 10.0,
                y1 - 40.0 + 8.0 * e.input as f64
            );
            continue;
        }
        let (dx, dy) = (x2 - x1, y2 - y1);
        let len = (dx * dx + dy * dy).sqrt();
        let (ux, uy) = (dx / len, dy / len);
        // Shift each direction sideways so opposite edges do not overlap.
        let (ox, oy) = (-uy * 4.0, ux * 4.0);
        let (sx, sy) = (x1 + ux * 16.0 + ox, y1 + uy * 16.0 + oy);
        let (tx, ty) = (x2 - ux * 16.0 + ox, y2 - uy * 16.0 + oy);
        let _ =
            writeln!(out, r#"<line x1="{sx:.1}" y1="{sy:.1}" x2="{tx:.1}" y2="{ty:.1}" marker-end="url(#arrow)"/>"#);
        let t = 0.35 + 0.1 * e.input as f64;
        let _ = writeln!(
            labels,
            r#"<text x="{:.1}" y="{:.1}">{text}</text>"#,
            sx + (tx - sx) * t + ox * 2.0,
            sy + (ty - sy) * t + oy * 2.0
        );
    }
    out.push_str("</g>\n<g id=\"labels\">\n");
    out.push_str(&labels);
    out.push_str("</g>\n<g id=\"states\">\n");
    for s in &states {
        let (x, y) = pos(s);
        let fill = if s == t.initial() { "#dddddd" } else { "#ffffff" };
        let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="15" fill="{fill}" stroke="{DENSITY}"/>"#);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{s}</text>"#, y + 3.0);
    }
    out.push_str("</g>\n</svg>\n");
    out
}
