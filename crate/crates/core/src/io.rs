//! File formats the harness emits and re-reads: fixed-schema CSV tables,
//! two-column plot data, stored scalar fields, and a dependency-free SVG
//! line chart. Every renderer is a pure function of its inputs, so
//! identical runs produce byte-identical files; floats are written through
//! `Display`, whose output parses back to the identical bit pattern.

use std::fmt::Write as _;

use crate::grid::{DiscreteField, Grid};
use crate::threshold::Regime;
use crate::{Error, Result};

pub const VERDICTS_HEADER: &str = "p,q,alpha,n,regime,margin";
pub const SWEEP_HEADER: &str =
    "q,converged,iterations,energy,holder_exponent,holder_fit,s_order,C,residual";
pub const MOSER_HEADER: &str = "i,t_i";
pub const FIELD_HEADER: &str = "node,x1,x2,value";
pub const METRICS_HEADER: &str = "p,q,alpha,regime,s_order,C,holder_exponent,fit_quality";

/// One classifier output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictRow {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub n: u32,
    pub regime: Regime,
    pub margin: f64,
}

/// One sweep-experiment output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub q: f64,
    pub converged: bool,
    pub iterations: u64,
    pub energy: f64,
    pub holder_exponent: f64,
    pub holder_fit: f64,
    pub s_order: f64,
    pub c: f64,
    pub residual: f64,
}

/// One stored-field measurement row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub regime: Regime,
    pub s_order: f64,
    pub c: f64,
    pub holder_exponent: f64,
    pub fit_quality: f64,
}

pub fn render_verdicts(rows: &[VerdictRow]) -> String {
    let mut out = String::from(VERDICTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.p, r.q, r.alpha, r.n, r.regime, r.margin);
    }
    out
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.q,
            r.converged,
            r.iterations,
            r.energy,
            r.holder_exponent,
            r.holder_fit,
            r.s_order,
            r.c,
            r.residual
        );
    }
    out
}

pub fn render_moser(t: &[f64]) -> String {
    let mut out = String::from(MOSER_HEADER);
    out.push('\n');
    for (i, ti) in t.iter().enumerate() {
        let _ = writeln!(out, "{i},{ti}");
    }
    out
}

pub fn render_metrics(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.p, r.q, r.alpha, r.regime, r.s_order, r.c, r.holder_exponent, r.fit_quality
        );
    }
    out
}

/// Serializes a nodal field as `node,x1,x2,value` rows in node order.
pub fn render_field(field: &DiscreteField) -> String {
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    let grid = field.grid();
    for j in 0..grid.nodes_per_side() {
        for i in 0..grid.nodes_per_side() {
            let x = grid.node_point(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                grid.node_index(i, j),
                x[0],
                x[1],
                field.get(i, j)
            );
        }
    }
    out
}

struct CsvLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    columns: usize,
}

impl<'a> CsvLines<'a> {
    fn open(text: &'a str, header: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first == header => {}
            Some((_, first)) => {
                return Err(parse_err(1, format!("expected header {header:?}, got {first:?}")));
            }
            None => return Err(parse_err(1, "empty input")),
        }
        Ok(CsvLines { lines, columns: header.split(',').count() })
    }

    fn next_row(&mut self) -> Result<Option<(usize, Vec<&'a str>)>> {
        for (idx, raw) in self.lines.by_ref() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != self.columns {
                return Err(parse_err(
                    line,
                    format!("expected {} columns, got {}", self.columns, fields.len()),
                ));
            }
            return Ok(Some((line, fields)));
        }
        Ok(None)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field.parse().map_err(|_| parse_err(line, format!("bad float {field:?}")))
}

fn parse_int<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| parse_err(line, format!("bad integer {field:?}")))
}

pub fn parse_verdicts(text: &str) -> Result<Vec<VerdictRow>> {
    let mut csv = CsvLines::open(text, VERDICTS_HEADER)?;
    let mut rows = Vec::new();
    while let Some((line, f)) = csv.next_row()? {
        rows.push(VerdictRow {
            p: parse_f64(line, f[0])?,
            q: parse_f64(line, f[1])?,
            alpha: parse_f64(line, f[2])?,
            n: parse_int(line, f[3])?,
            regime: f[4].parse().map_err(|_| parse_err(line, format!("bad regime {:?}", f[4])))?,
            margin: parse_f64(line, f[5])?,
        });
    }
    Ok(rows)
}

pub fn parse_sweep(text: &str) -> Result<Vec<SweepRow>> {
    let mut csv = CsvLines::open(text, SWEEP_HEADER)?;
    let mut rows = Vec::new();
    while let Some((line, f)) = csv.next_row()? {
        let converged = match f[1] {
            "true" => true,
            "false" => false,
            other => return Err(parse_err(line, format!("bad bool {other:?}"))),
        };
        rows.push(SweepRow {
            q: parse_f64(line, f[0])?,
            converged,
            iterations: parse_int(line, f[2])?,
            energy: parse_f64(line, f[3])?,
            holder_exponent: parse_f64(line, f[4])?,
            holder_fit: parse_f64(line, f[5])?,
            s_order: parse_f64(line, f[6])?,
            c: parse_f64(line, f[7])?,
            residual: parse_f64(line, f[8])?,
        });
    }
    Ok(rows)
}

pub fn parse_moser(text: &str) -> Result<Vec<f64>> {
    let mut csv = CsvLines::open(text, MOSER_HEADER)?;
    let mut t = Vec::new();
    while let Some((line, f)) = csv.next_row()? {
        let i: usize = parse_int(line, f[0])?;
        if i != t.len() {
            return Err(parse_err(line, format!("index {i} out of order, expected {}", t.len())));
        }
        t.push(parse_f64(line, f[1])?);
    }
    Ok(t)
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut csv = CsvLines::open(text, METRICS_HEADER)?;
    let mut rows = Vec::new();
    while let Some((line, f)) = csv.next_row()? {
        rows.push(MetricsRow {
            p: parse_f64(line, f[0])?,
            q: parse_f64(line, f[1])?,
            alpha: parse_f64(line, f[2])?,
            regime: f[3].parse().map_err(|_| parse_err(line, format!("bad regime {:?}", f[3])))?,
            s_order: parse_f64(line, f[4])?,
            c: parse_f64(line, f[5])?,
            holder_exponent: parse_f64(line, f[6])?,
            fit_quality: parse_f64(line, f[7])?,
        });
    }
    Ok(rows)
}

/// Reconstructs a nodal field from `node,x1,x2,value` rows. The row count
/// must be a full node set `(m+1)^2` for some `m >= 4`, indices must arrive
/// in node order, and the stored coordinates must match the grid's own.
pub fn parse_field(text: &str) -> Result<DiscreteField> {
    let mut csv = CsvLines::open(text, FIELD_HEADER)?;
    let mut values = Vec::new();
    let mut coords = Vec::new();
    while let Some((line, f)) = csv.next_row()? {
        let node: usize = parse_int(line, f[0])?;
        if node != values.len() {
            return Err(parse_err(
                line,
                format!("node {node} out of order, expected {}", values.len()),
            ));
        }
        coords.push((line, parse_f64(line, f[1])?, parse_f64(line, f[2])?));
        values.push(parse_f64(line, f[3])?);
    }
    let count = values.len();
    let side = (count as f64).sqrt().round() as usize;
    if side * side != count || side < 5 {
        return Err(parse_err(
            1,
            format!("{count} rows do not form a full node set of a grid with m >= 4"),
        ));
    }
    let grid = Grid::new(side - 1)?;
    for j in 0..side {
        for i in 0..side {
            let (line, x1, x2) = coords[grid.node_index(i, j)];
            let x = grid.node_point(i, j);
            if (x1 - x[0]).abs() > 1e-9 || (x2 - x[1]).abs() > 1e-9 {
                return Err(parse_err(
                    line,
                    format!(
                        "node ({i}, {j}) coordinates ({x1}, {x2}) do not match the grid ({}, {})",
                        x[0], x[1]
                    ),
                ));
            }
        }
    }
    DiscreteField::from_values(grid, values)
}

/// Two-column plot data, one `x y` pair per line.
pub fn render_xy(pairs: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in pairs {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

pub fn parse_xy(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut it = raw.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(line, "expected two columns"));
        };
        pairs.push((parse_f64(line, x)?, parse_f64(line, y)?));
    }
    Ok(pairs)
}

const SVG_PALETTE: [&str; 4] = ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad"];

/// Renders labeled series as a self-contained SVG line chart. Points with
/// non-finite coordinates are dropped from the drawing.
pub fn render_svg_chart(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (width, height) = (640.0, 480.0);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 50.0);
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !finite.is_empty() {
        x0 = finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y1 = finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (width - left - right);
    let sy = |y: f64| height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        width / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        out,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>",
        width - left - right,
        height - top - bottom
    );
    for (label, x, anchor) in
        [(x0, left, "start"), (x1, width - right, "end")].map(|(v, x, a)| (v, x, a))
    {
        let _ = writeln!(
            out,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"{anchor}\">{label:.4}</text>",
            height - bottom + 18.0
        );
    }
    for (label, y) in [(y0, height - bottom), (y1, top)] {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label:.4}</text>",
            left - 6.0,
            y + 4.0
        );
    }
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = SVG_PALETTE[k % SVG_PALETTE.len()];
        let mut coords = String::new();
        for (x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(coords, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            coords.trim_end()
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>",
            left + 10.0,
            top + 16.0 + 16.0 * k as f64,
            xml_escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
