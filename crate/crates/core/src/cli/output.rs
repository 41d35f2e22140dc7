//! CSV tables and deterministic SVG line plots.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Named numeric columns sharing one row count.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    /// Header plus one line per row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Tick positions at 1-2-5 multiples of a power of ten covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Range padded so a constant series still gets a visible band.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo > 1e-300 * (lo.abs() + hi.abs()).max(1.0) {
        (lo, hi)
    } else {
        let w = lo.abs().max(1.0) * 0.5;
        (lo - w, hi + w)
    }
}

/// Plot every column after the first against the first.
pub fn table_to_svg(table: &Table) -> String {
    let x = table.column(0);
    let series: Vec<(String, Vec<f64>)> = (1..table.columns.len()).map(|i| (table.columns[i].clone(), table.column(i))).collect();
    svg_plot(&x, &series)
}

pub fn svg_plot(x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let finite = |v: &&f64| v.is_finite();
    let (xmin, xmax) = x.iter().filter(finite).fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| (a.0.min(v), a.1.max(v)));
    let (ymin, ymax) = series
        .iter()
        .flat_map(|s| s.1.iter())
        .filter(finite)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| (a.0.min(v), a.1.max(v)));
    let (xmin, xmax) = if xmin.is_finite() { padded(xmin, xmax) } else { (0.0, 1.0) };
    let (ymin, ymax) = if ymin.is_finite() { padded(ymin, ymax) } else { (0.0, 1.0) };
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |v: f64| MARGIN_L + (v - xmin) / (xmax - xmin) * pw;
    let sy = |v: f64| MARGIN_T + (ymax - v) / (ymax - ymin) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(out, r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="#444444"/>"##);
    for tx in ticks(xmin, xmax) {
        let px = sx(tx);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444444"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_T + ph,
            MARGIN_T + ph + 5.0,
            MARGIN_T + ph + 18.0,
            tick_label(tx)
        );
    }
    for ty in ticks(ymin, ymax) {
        let py = sy(ty);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_L}" y2="{py:.2}" stroke="#444444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            py + 4.0,
            tick_label(ty)
        );
    }
    for (i, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = String::new();
        for (&xv, &yv) in x.iter().zip(ys) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(xv), sy(yv));
            }
        }
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        let lx = MARGIN_L + pw - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write the plot of `table` to `path`.
pub fn emit_plot(table: &Table, path: &Path) -> io::Result<()> {
    if table.rows.is_empty() || table.columns.len() < 2 {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "nothing to plot"));
    }
    std::fs::write(path, table_to_svg(table))
}
