//! Static SVG: population time series on the left, phase portrait on the right.

use std::fmt::Write as _;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PANEL_GAP: f64 = 60.0;
/// Points kept per polyline.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    /// `(t, x, y)` samples.
    pub points: Vec<(f64, f64, f64)>,
}

pub struct Marker {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

fn downsample<T: Copy>(v: &[T]) -> Vec<T> {
    if v.len() <= MAX_POINTS {
        return v.to_vec();
    }
    let stride = v.len().div_ceil(MAX_POINTS);
    let mut out: Vec<T> = v.iter().step_by(stride).copied().collect();
    if (v.len() - 1) % stride != 0 {
        out.push(v[v.len() - 1]);
    }
    out
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Range {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 * (1.0 + hi.abs()) {
            hi = lo + 1.0;
        }
        Range { lo, hi }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }
}

struct Panel {
    left: f64,
    width: f64,
    h: Range,
    v: Range,
}

impl Panel {
    fn point(&self, a: f64, b: f64) -> (f64, f64) {
        (
            self.h.map(a, self.left, self.left + self.width),
            self.v.map(b, HEIGHT - MARGIN, MARGIN),
        )
    }

    fn frame(&self, out: &mut String, title: &str, h_label: &str, v_label: &str) {
        let (x0, x1) = (self.left, self.left + self.width);
        let (y0, y1) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            (x0 + x1) / 2.0,
            y0 - 15.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{h_label}</text>"#,
            (x0 + x1) / 2.0,
            y1 + 35.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" transform="rotate(-90 {:.1} {:.1})" text-anchor="middle">{v_label}</text>"#,
            x0 - 35.0,
            (y0 + y1) / 2.0,
            x0 - 35.0,
            (y0 + y1) / 2.0
        );
        for (val, x, anchor) in [(self.h.lo, x0, "start"), (self.h.hi, x1, "end")] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                y1 + 14.0,
                tick(val)
            );
        }
        for (val, y) in [(self.v.lo, y1), (self.v.hi, y0 + 10.0)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" font-size="10" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                tick(val)
            );
        }
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, dash: bool) {
        let mut d = String::new();
        for &(a, b) in pts {
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            let (px, py) = self.point(a, b);
            let _ = write!(d, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{}/>"#,
            d.trim_end(),
            if dash { r#" stroke-dasharray="4 2""# } else { "" }
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(title: &str, series: &[Series<'_>], markers: &[Marker]) -> String {
    let samples: Vec<Vec<(f64, f64, f64)>> = series.iter().map(|s| downsample(&s.points)).collect();
    let all = || samples.iter().flatten();
    let t_range = Range::of(all().map(|p| p.0));
    let pop_range = Range::of(all().flat_map(|p| [p.1, p.2]).chain([0.0]));
    let x_range = Range::of(all().map(|p| p.1).chain(markers.iter().map(|m| m.x)).chain([0.0]));
    let y_range = Range::of(all().map(|p| p.2).chain(markers.iter().map(|m| m.y)).chain([0.0]));

    let panel_w = (WIDTH - 2.0 * MARGIN - PANEL_GAP) / 2.0;
    let time = Panel {
        left: MARGIN,
        width: panel_w,
        h: t_range,
        v: pop_range,
    };
    let phase = Panel {
        left: MARGIN + panel_w + PANEL_GAP,
        width: panel_w,
        h: x_range,
        v: y_range,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    time.frame(&mut out, &format!("{title}: populations"), "t", "population");
    phase.frame(&mut out, &format!("{title}: phase portrait"), "prey x", "predator y");

    for (s, pts) in series.iter().zip(&samples) {
        let prey: Vec<_> = pts.iter().map(|p| (p.0, p.1)).collect();
        let pred: Vec<_> = pts.iter().map(|p| (p.0, p.2)).collect();
        let orbit: Vec<_> = pts.iter().map(|p| (p.1, p.2)).collect();
        time.polyline(&mut out, &prey, s.color, false);
        time.polyline(&mut out, &pred, s.color, true);
        phase.polyline(&mut out, &orbit, s.color, false);
    }

    for m in markers {
        let (px, py) = phase.point(m.x, m.y);
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="black"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            px + 6.0,
            py - 6.0,
            escape(&m.label)
        );
    }

    // legend
    let mut ly = MARGIN + 14.0;
    for s in series {
        let lx = MARGIN + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{} (solid x, dashed y)</text>"#,
            lx + 20.0,
            s.color,
            lx + 25.0,
            ly + 4.0,
            escape(s.name)
        );
        ly += 16.0;
    }
    out.push_str("</svg>\n");
    out
}
