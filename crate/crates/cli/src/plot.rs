//! Static SVG rendering of agreement curves over shaded reference bands.
//!
//! Output depends only on the input values: coordinates are printed with a
//! fixed number of decimals and axis ticks follow a 1-2-5 progression.

use std::fmt::Write as _;

use seqrank::ingest::Document;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 48.0;

const CURVE_COLORS: [&str; 6] = ["#000000", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"];
const BAND_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#7f7f7f", "#bcbd22"];

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    Empty,
    #[error("depth ranges differ: {first} has {expected} depths but {other} has {found}")]
    MismatchedRange { first: String, expected: usize, other: String, found: usize },
    #[error("{0} is a band; pass it with --band")]
    BandAsCurve(String),
    #[error("{0} is a curve; bands must be reference band files")]
    CurveAsBand(String),
}

pub struct Series {
    pub name: String,
    pub doc: Document<f64>,
}

/// Step from the 1-2-5 progression that splits `span` into at most `max_ticks` intervals.
pub fn nice_step(span: f64, max_ticks: usize) -> f64 {
    if span.is_nan() || span <= 0.0 {
        return 1.0;
    }
    let raw = span / max_ticks as f64;
    let mut magnitude = 10f64.powf(raw.log10().floor());
    loop {
        for m in [1.0, 2.0, 5.0] {
            if m * magnitude >= raw {
                return m * magnitude;
            }
        }
        magnitude *= 10.0;
    }
}

fn decimals_for(step: f64) -> usize {
    if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    depth: usize,
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, depth: f64) -> f64 {
        LEFT + (depth - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, value: f64) -> f64 {
        HEIGHT - BOTTOM - value / self.y_max * (HEIGHT - TOP - BOTTOM)
    }

    fn point(&self, depth: usize, value: f64) -> String {
        format!("{:.2},{:.2}", self.x(depth as f64), self.y(value))
    }
}

/// Render curves over bands. All inputs must cover the same depths.
pub fn render(curves: &[Series], bands: &[Series]) -> Result<String, PlotError> {
    for c in curves {
        if matches!(c.doc, Document::Band(_)) {
            return Err(PlotError::BandAsCurve(c.name.clone()));
        }
    }
    for b in bands {
        if matches!(b.doc, Document::Curve(_)) {
            return Err(PlotError::CurveAsBand(b.name.clone()));
        }
    }
    let all: Vec<&Series> = curves.iter().chain(bands).collect();
    let first = all.first().ok_or(PlotError::Empty)?;
    let depth = first.doc.max_depth();
    for s in &all[1..] {
        if s.doc.max_depth() != depth {
            return Err(PlotError::MismatchedRange {
                first: first.name.clone(),
                expected: depth,
                other: s.name.clone(),
                found: s.doc.max_depth(),
            });
        }
    }

    let mut peak = 0.0f64;
    for s in &all {
        match &s.doc {
            Document::Curve(c) => peak = c.curve.values().iter().fold(peak, |m, &v| m.max(v)),
            Document::Band(b) => peak = b.band.levels().iter().flatten().fold(peak, |m, &v| m.max(v)),
        }
    }
    let y_step = nice_step(if peak > 0.0 { peak } else { 1.0 }, 5);
    let y_max = ((if peak > 0.0 { peak } else { 1.0 }) / y_step).ceil() * y_step;
    let (x_min, x_max) = if depth == 1 { (0.5, 1.5) } else { (1.0, depth as f64) };
    let frame = Frame { depth, x_min, x_max, y_max };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    axes(&mut svg, &frame, y_step);

    for (i, band) in bands.iter().enumerate() {
        let Document::Band(doc) = &band.doc else { unreachable!() };
        let color = BAND_COLORS[i % BAND_COLORS.len()];
        let levels = doc.band.levels();
        for pair in levels.windows(2) {
            let mut d = String::new();
            for (idx, &v) in pair[1].iter().enumerate() {
                let _ = write!(d, "{}{} ", if idx == 0 { "M" } else { "L" }, frame.point(idx + 1, v));
            }
            for (idx, &v) in pair[0].iter().enumerate().rev() {
                let _ = write!(d, "L{} ", frame.point(idx + 1, v));
            }
            d.push('Z');
            let _ = writeln!(svg, r#"<path class="band" d="{d}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#);
        }
        if let Some(r) = doc.band.reliable_depth().filter(|&r| r < depth) {
            let x = frame.x(r as f64);
            let _ = writeln!(
                svg,
                r#"<line class="extrapolation-boundary" x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="2,3"/>"#,
                HEIGHT - BOTTOM
            );
        }
    }

    for (i, curve) in curves.iter().enumerate() {
        let Document::Curve(doc) = &curve.doc else { unreachable!() };
        let color = CURVE_COLORS[i % CURVE_COLORS.len()];
        let values = doc.curve.values();
        let split = doc.metadata.reliable_depth.filter(|&r| r < depth).unwrap_or(depth);
        let points = |range: std::ops::RangeInclusive<usize>| {
            range.map(|d| frame.point(d, values[d - 1])).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(
            svg,
            r#"<polyline class="curve" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points(1..=split)
        );
        if split < depth {
            let _ = writeln!(
                svg,
                r#"<polyline class="curve extrapolated" points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
                points(split..=depth)
            );
        }
    }

    legend(&mut svg, curves, bands);
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn axes(svg: &mut String, frame: &Frame, y_step: f64) {
    let x0 = LEFT;
    let x1 = WIDTH - RIGHT;
    let y0 = HEIGHT - BOTTOM;
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{TOP:.2}" x2="{x0:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="ticks" text-anchor="middle">"#);
    let x_step = nice_step((frame.depth as f64 - 1.0).max(1.0), 8).max(1.0);
    let mut ticks = vec![1.0];
    let mut k = 1.0;
    while k * x_step <= frame.depth as f64 + 1e-9 {
        if k * x_step > 1.0 {
            ticks.push(k * x_step);
        }
        k += 1.0;
    }
    for t in ticks {
        let x = frame.x(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 4.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}">{t:.0}</text>"#, y0 + 16.0);
    }
    let _ = writeln!(svg, "</g>");

    let decimals = decimals_for(y_step);
    let _ = writeln!(svg, r#"<g class="ticks" text-anchor="end">"#);
    let n = (frame.y_max / y_step).round() as usize;
    for k in 0..=n {
        let v = k as f64 * y_step;
        let y = frame.y(v);
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{v:.decimals$}</text>"#, x0 - 7.0, y + 4.0);
    }
    let _ = writeln!(svg, "</g>");
    let _ =
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">depth</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">agreement</text>"#,
        (TOP + y0) / 2.0,
        (TOP + y0) / 2.0
    );
}

fn legend(svg: &mut String, curves: &[Series], bands: &[Series]) {
    let x = WIDTH - RIGHT + 12.0;
    let mut y = TOP + 10.0;
    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, c) in curves.iter().enumerate() {
        let color = CURVE_COLORS[i % CURVE_COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            x + 16.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 20.0, y + 4.0, escape(&c.name));
        y += 16.0;
    }
    for (i, b) in bands.iter().enumerate() {
        let color = BAND_COLORS[i % BAND_COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="16" height="8" fill="{color}" fill-opacity="0.25"/>"#,
            y - 4.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 20.0, y + 4.0, escape(&b.name));
        y += 16.0;
    }
    let _ = writeln!(svg, "</g>");
}
