//! Self-contained SVG documents for the export endpoint. Output depends only
//! on the payload, so identical requests give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dbmx_core::engine::{CorrelationMatrix, Emotion, Measure};

use crate::error::ApiError;
use crate::state::FieldRange;
use crate::views::{DistributionsView, PcaView, SeriesView, SketchView};

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
const NEUTRAL: &str = "#dddddd";
const HIGHLIGHT: &str = "#7b2cbf";

/// Fixed-precision number without a negative zero.
fn n(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Doc {
    body: String,
    width: f64,
    height: f64,
}

impl Doc {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut doc = Self {
            body: String::new(),
            width,
            height,
        };
        let _ = writeln!(doc.body, "<title>{}</title>", escape(title));
        let _ = writeln!(
            doc.body,
            r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
            n(width),
            n(height)
        );
        doc
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="1"/>"#,
            n(x1),
            n(y1),
            n(x2),
            n(y2)
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            n(x),
            n(y),
            n(size),
            escape(content)
        );
    }

    fn raw(&mut self, element: String) {
        self.body.push_str(&element);
        self.body.push('\n');
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = n(self.width),
            h = n(self.height)
        )
    }
}

/// Linear map of `[lo, hi]` onto `[a, b]`; degenerate ranges map to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn rgb(c: [f64; 3]) -> String {
    format!(
        "#{:02x}{:02x}{:02x}",
        c[0].round().clamp(0.0, 255.0) as u8,
        c[1].round().clamp(0.0, 255.0) as u8,
        c[2].round().clamp(0.0, 255.0) as u8
    )
}

/// Blue-white-red scale for `t` in `[-1, 1]`.
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let white = [247.0, 247.0, 247.0];
    let end = if t < 0.0 { [59.0, 76.0, 192.0] } else { [180.0, 4.0, 38.0] };
    let a = t.abs();
    rgb([
        white[0] + a * (end[0] - white[0]),
        white[1] + a * (end[1] - white[1]),
        white[2] + a * (end[2] - white[2]),
    ])
}

fn categorical(values: &[Option<String>]) -> BTreeMap<String, &'static str> {
    let mut levels: Vec<&String> = values.iter().flatten().collect();
    levels.sort();
    levels.dedup();
    levels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), PALETTE[i % PALETTE.len()]))
        .collect()
}

pub fn pca(view: &PcaView) -> String {
    let (w, h, m) = (640.0, 480.0, 50.0);
    let r = &view.result;
    let mut doc = Doc::new(w, h, "PCA");
    let (x0, x1) = extent(r.coords.iter().map(|c| c[0]));
    let (y0, y1) = extent(r.coords.iter().map(|c| c[1]));
    doc.line(m, h - m, w - m, h - m, "#333333");
    doc.line(m, m, m, h - m, "#333333");
    doc.text(
        w / 2.0,
        h - 12.0,
        12.0,
        "middle",
        &format!("PC1 ({:.1}%)", 100.0 * r.explained_variance_ratio[0]),
    );
    doc.text(
        16.0,
        h / 2.0,
        12.0,
        "middle",
        &format!("PC2 ({:.1}%)", 100.0 * r.explained_variance_ratio[1]),
    );
    let colors = view.colors.as_ref().map(|c| (categorical(c), c));
    for (i, (id, c)) in r.video_ids.iter().zip(&r.coords).enumerate() {
        let fill = match &colors {
            Some((levels, values)) => values[i].as_ref().map_or(NEUTRAL, |v| levels[v]),
            None => PALETTE[0],
        };
        doc.raw(format!(
            r#"<circle class="point" data-id="{}" cx="{}" cy="{}" r="4" fill="{fill}"><title>{}</title></circle>"#,
            escape(id),
            n(scale(c[0], x0, x1, m + 10.0, w - m - 10.0)),
            n(scale(c[1], y0, y1, h - m - 10.0, m + 10.0)),
            escape(id)
        ));
    }
    if let Some((levels, _)) = &colors {
        for (i, (level, color)) in levels.iter().enumerate() {
            let y = m + 14.0 * i as f64;
            doc.raw(format!(
                r#"<rect class="legend" x="{}" y="{}" width="10" height="10" fill="{color}"/>"#,
                n(w - 150.0),
                n(y)
            ));
            doc.text(w - 135.0, y + 9.0, 10.0, "start", level);
        }
    }
    doc.finish()
}

pub fn distributions(view: &DistributionsView) -> String {
    let (w, row, m) = (640.0, 140.0, 40.0);
    let h = row * view.distributions.len().max(1) as f64;
    let mut doc = Doc::new(w, h, "Distributions");
    let strip_right = w / 2.0 - 10.0;
    for (k, d) in view.distributions.iter().enumerate() {
        let top = row * k as f64;
        doc.text(m, top + 16.0, 12.0, "start", &d.variable_id);
        let values = d.points.iter().map(|p| p.value);
        let (mut lo, mut hi) = extent(values);
        if let Some(curve) = &d.density {
            lo = lo.min(curve.grid[0]);
            hi = hi.max(*curve.grid.last().unwrap());
        }
        let base = top + row - 20.0;
        doc.line(m, base, strip_right, base, "#333333");
        for (i, p) in d.points.iter().enumerate() {
            // deterministic vertical jitter so coincident values stay visible
            let jitter = ((i * 37) % 17) as f64 / 17.0;
            doc.raw(format!(
                r#"<circle class="point" data-id="{}" cx="{}" cy="{}" r="3" fill="{}"><title>{}: {}</title></circle>"#,
                escape(&p.video_id),
                n(scale(p.value, lo, hi, m, strip_right)),
                n(base - 10.0 - jitter * (row - 60.0)),
                PALETTE[0],
                escape(&p.video_id),
                p.value
            ));
        }
        let left = w / 2.0 + 10.0;
        doc.line(left, base, w - m, base, "#333333");
        if let Some(curve) = &d.density {
            let ymax = curve.density.iter().copied().fold(0.0, f64::max);
            let mut path = String::new();
            for (i, (x, y)) in curve.grid.iter().zip(&curve.density).enumerate() {
                let _ = write!(
                    path,
                    "{}{} {} ",
                    if i == 0 { "M" } else { "L" },
                    n(scale(*x, lo, hi, left, w - m)),
                    n(scale(*y, 0.0, ymax, base, top + 30.0))
                );
            }
            doc.raw(format!(
                r#"<path class="density" d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                path.trim_end(),
                PALETTE[0]
            ));
        } else {
            doc.text((left + w - m) / 2.0, base - 30.0, 11.0, "middle", "density undefined");
        }
    }
    doc.finish()
}

pub fn correlation(matrix: &CorrelationMatrix) -> String {
    let k = matrix.variable_ids.len();
    let cell = 48.0;
    let label = 140.0;
    let size = label + cell * k as f64 + 10.0;
    let mut doc = Doc::new(size, size, "Correlation");
    for (i, id) in matrix.variable_ids.iter().enumerate() {
        let c = label + cell * (i as f64 + 0.5);
        doc.text(label - 6.0, c + 4.0, 10.0, "end", id);
        doc.raw(format!(
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="start" transform="rotate(-60 {x} {y})">{}</text>"#,
            escape(id),
            x = n(c),
            y = n(label - 6.0)
        ));
    }
    for i in 0..k {
        for j in 0..k {
            let (fill, text) = match matrix.r[i][j] {
                Some(r) => (diverging(r), format!("{r:.2}")),
                None => (NEUTRAL.to_string(), "n/a".to_string()),
            };
            let x = label + cell * j as f64;
            let y = label + cell * i as f64;
            doc.raw(format!(
                r##"<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="#ffffff"><title>{} / {}: {text}</title></rect>"##,
                n(x),
                n(y),
                n(cell),
                n(cell),
                escape(&matrix.variable_ids[i]),
                escape(&matrix.variable_ids[j])
            ));
            doc.text(x + cell / 2.0, y + cell / 2.0 + 4.0, 10.0, "middle", &text);
        }
    }
    doc.finish()
}

pub fn series(view: &SeriesView, interval: Option<usize>) -> String {
    let (w, row, m) = (800.0, 110.0, 50.0);
    let h = row * view.series.len().max(1) as f64 + 20.0;
    let mut doc = Doc::new(w, h, &format!("Series {}", view.video_id));
    let x = |t: f64| scale(t, 0.0, view.duration_s, m, w - 20.0);
    if let Some(k) = interval {
        let (t0, t1) = (view.timeline.boundaries_s[k], view.timeline.boundaries_s[k + 1]);
        doc.raw(format!(
            r##"<rect class="interval" x="{}" y="0" width="{}" height="{}" fill="#e15759" fill-opacity="0.15"/>"##,
            n(x(t0)),
            n(x(t1) - x(t0)),
            n(h)
        ));
    }
    for (s_idx, s) in view.series.iter().enumerate() {
        let top = row * s_idx as f64 + 10.0;
        let base = top + row - 20.0;
        doc.text(m, top + 12.0, 11.0, "start", &s.variable_id);
        doc.line(m, base, w - 20.0, base, "#333333");
        if !s.available {
            doc.text(w / 2.0, base - 30.0, 11.0, "middle", "not captured");
            continue;
        }
        let (lo, hi) = extent(s.bars.iter().filter_map(|b| b.mean));
        let lo = lo.min(0.0);
        for b in &s.bars {
            // bars without samples stay empty: a visible gap
            let Some(mean) = b.mean else { continue };
            let y = scale(mean, lo, hi.max(lo), base, top + 18.0);
            let (y0, y1) = if y <= base { (y, base) } else { (base, y) };
            doc.raw(format!(
                r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{:.3}-{:.3}s: {}</title></rect>"#,
                n(x(b.t_start_s)),
                n(y0),
                n((x(b.t_end_s) - x(b.t_start_s)).max(0.5)),
                n(y1 - y0),
                PALETTE[0],
                b.t_start_s,
                b.t_end_s,
                mean
            ));
        }
    }
    doc.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    Asym,
    Pain,
    Expr,
    Aus,
    Mov,
}

impl Mask {
    pub fn parse(raw: Option<&str>) -> Result<Self, ApiError> {
        match raw.unwrap_or("aus") {
            "asym" => Ok(Mask::Asym),
            "pain" => Ok(Mask::Pain),
            "expr" => Ok(Mask::Expr),
            "aus" => Ok(Mask::Aus),
            "mov" => Ok(Mask::Mov),
            other => Err(ApiError::bad_request(
                "UnknownMask",
                format!("unknown mask `{other}`; expected asym, pain, expr, aus or mov"),
            )),
        }
    }
}

/// Approximate AU locations on a 400x480 face.
fn au_position(au: u8) -> (f64, f64) {
    match au {
        1 => (200.0, 120.0),
        2 => (140.0, 115.0),
        4 => (200.0, 145.0),
        5 => (140.0, 170.0),
        6 => (130.0, 230.0),
        7 => (260.0, 175.0),
        9 => (200.0, 215.0),
        10 => (200.0, 265.0),
        12 => (140.0, 300.0),
        14 => (265.0, 300.0),
        15 => (150.0, 340.0),
        17 => (200.0, 385.0),
        20 => (255.0, 345.0),
        23 => (200.0, 320.0),
        25 => (200.0, 345.0),
        26 => (200.0, 410.0),
        28 => (230.0, 365.0),
        45 => (260.0, 150.0),
        _ => (360.0, 40.0 + f64::from(au) * 4.0),
    }
}

fn feature_position(feature: &str, index: usize) -> (f64, f64, f64, f64) {
    match feature {
        "eyebrow" => (200.0, 130.0, 120.0, 18.0),
        "eye" => (200.0, 170.0, 120.0, 20.0),
        "cheek" => (200.0, 250.0, 140.0, 30.0),
        "mouth" => (200.0, 330.0, 70.0, 22.0),
        _ => (200.0, 420.0 - 20.0 * index as f64, 60.0, 10.0),
    }
}

/// Fill for a field normalized to its cohort range; undefined stays neutral.
fn field_fill(m: &Measure, range: Option<&FieldRange>) -> String {
    match (m.0, range.and_then(|r| Some((r.min?, r.max?)))) {
        (Some(v), Some((lo, hi))) => diverging(scale(v, lo, hi, -1.0, 1.0)),
        (Some(_), None) => diverging(0.0),
        (None, _) => NEUTRAL.to_string(),
    }
}

fn value_text(m: &Measure) -> String {
    m.0.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}"))
}

pub fn sketch(view: &SketchView, mask: Mask, emotion: Option<Emotion>) -> String {
    let (w, h) = (400.0, 480.0);
    let title = match view.interval {
        Some(k) => format!("Head sketch {} interval {k}", view.video_id),
        None => format!("Head sketch {}", view.video_id),
    };
    let mut doc = Doc::new(w, h, &title);
    doc.raw(r##"<ellipse class="face" cx="200" cy="250" rx="150" ry="200" fill="#fbf3ea" stroke="#333333" stroke-width="2"/>"##.to_string());
    let s = &view.summary;
    let range = |key: String| view.ranges.get(&key);
    match mask {
        Mask::Asym => {
            for (i, (feature, m)) in s.asymmetry.iter().enumerate() {
                let (cx, cy, rx, ry) = feature_position(feature, i);
                doc.raw(format!(
                    r##"<ellipse class="region" data-field="asymmetry.{f}" cx="{}" cy="{}" rx="{}" ry="{}" fill="{}" stroke="#555555"><title>{f}: {}</title></ellipse>"##,
                    n(cx),
                    n(cy),
                    n(rx / 2.0),
                    n(ry),
                    field_fill(m, range(format!("asymmetry.{feature}"))),
                    value_text(m),
                    f = escape(feature)
                ));
            }
        }
        Mask::Pain => {
            doc.raw(format!(
                r##"<ellipse class="region" data-field="pain" cx="200" cy="250" rx="130" ry="175" fill="{}" fill-opacity="0.8"><title>pain: {}</title></ellipse>"##,
                field_fill(&s.pain, range("pain".into())),
                value_text(&s.pain)
            ));
        }
        Mask::Expr => {
            let parts = [("upper", 80.0, 170.0), ("lower", 250.0, 180.0)];
            for (part, y, height) in parts {
                if let Some(m) = s.expressivity.get(part) {
                    doc.raw(format!(
                        r##"<rect class="region" data-field="expressivity.{part}" x="70" y="{}" width="260" height="{}" fill="{}" fill-opacity="0.8"><title>{part}: {}</title></rect>"##,
                        n(y),
                        n(height),
                        field_fill(m, range(format!("expressivity.{part}"))),
                        value_text(m)
                    ));
                }
            }
            if let Some(m) = s.expressivity.get("overall") {
                doc.raw(format!(
                    r##"<ellipse class="region" data-field="expressivity.overall" cx="200" cy="250" rx="150" ry="200" fill="none" stroke="{}" stroke-width="8"><title>overall: {}</title></ellipse>"##,
                    field_fill(m, range("expressivity.overall".into())),
                    value_text(m)
                ));
            }
        }
        Mask::Aus => {
            let highlighted = emotion.map(|e| view.emotion_au_map.get(e).clone()).unwrap_or_default();
            for (au, m) in &s.au_intensity {
                let (cx, cy) = au_position(*au);
                let mark = highlighted.contains(au);
                doc.raw(format!(
                    r##"<circle class="{}" data-au="{au}" cx="{}" cy="{}" r="14" fill="{}" stroke="{}" stroke-width="{}"><title>AU{au}: {}</title></circle>"##,
                    if mark { "au highlighted" } else { "au" },
                    n(cx),
                    n(cy),
                    field_fill(m, range(format!("au_intensity.{au}"))),
                    if mark { HIGHLIGHT } else { "#555555" },
                    if mark { 4 } else { 1 },
                    value_text(m)
                ));
                doc.text(cx, cy + 4.0, 9.0, "middle", &au.to_string());
            }
        }
        Mask::Mov => {
            for (i, axis) in ["yaw", "roll", "pitch"].into_iter().enumerate() {
                let Some(m) = s.head_pose.get(axis) else { continue };
                let y = 40.0 + 20.0 * i as f64;
                let color = field_fill(m, range(format!("head_pose.{axis}")));
                let len = m.0.map_or(0.0, |v| (v.abs() * 10.0).min(150.0));
                let dir = if m.0.unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
                doc.raw(format!(
                    r#"<line class="arrow" data-field="head_pose.{axis}" x1="200" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="6"><title>{axis}: {}</title></line>"#,
                    n(y),
                    n(200.0 + dir * len),
                    n(y),
                    value_text(m)
                ));
                doc.text(20.0, y + 4.0, 10.0, "start", axis);
            }
        }
    }
    if let Some(bounds) = view.interval_bounds_s {
        doc.text(200.0, 470.0, 11.0, "middle", &format!("{:.2}-{:.2} s", bounds[0], bounds[1]));
    }
    doc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_no_negative_zero() {
        assert_eq!(n(-0.0001), "0.00");
        assert_eq!(n(1.005), "1.00");
        assert_eq!(n(-2.5), "-2.50");
    }

    #[test]
    fn escaping() {
        assert_eq!(escape(r#"a<b>&"c'"#), "a&lt;b&gt;&amp;&quot;c&apos;");
    }

    #[test]
    fn diverging_endpoints() {
        assert_eq!(diverging(0.0), "#f7f7f7");
        assert_eq!(diverging(-1.0), "#3b4cc0");
        assert_eq!(diverging(1.0), "#b40426");
        assert_eq!(diverging(7.0), diverging(1.0));
    }

    #[test]
    fn correlation_cells() {
        let m = CorrelationMatrix::from_pairs(vec!["a".into(), "b".into(), "c".into()], |i, j| {
            dbmx_core::engine::Correlation {
                r: (j != 2 || i == 2).then_some(if i == j { 1.0 } else { 0.5 }),
                n: 3,
                defined: j != 2 || i == 2,
            }
        });
        let svg = correlation(&m);
        assert_eq!(svg.matches(r#"class="cell""#).count(), 9);
        assert!(svg.contains("n/a"));
        assert!(svg.starts_with("<?xml"));
        assert!(!svg.contains("href"));
    }
}
