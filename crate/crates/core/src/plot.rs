//! Minimal SVG rendering: line plots and masked heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Heatmap cell state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Value(f64),
    /// Drawn blank (above vacuum noise).
    Blank,
    /// Drawn grey (unstable).
    Unstable,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let (px, py) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().filter_map(|p| p.1))
        .filter(|y| y.is_finite());
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let frame = Frame {
        x: padded(xmin, xmax),
        y: padded(ymin, ymax),
    };

    let mut svg = String::new();
    header(&mut svg, title);
    axes(&mut svg, &frame, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            match y.filter(|y| y.is_finite()) {
                Some(y) => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(path, "{cmd}{:.2},{:.2} ", frame.px(x), frame.py(y));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = TOP + 16.0 * k as f64 + 10.0;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn colormap(t: f64) -> String {
    // blue → cyan → yellow → red
    const STOPS: [(f64, f64, f64); 4] = [(48.0, 18.0, 120.0), (32.0, 160.0, 190.0), (250.0, 220.0, 60.0), (200.0, 30.0, 30.0)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let lerp = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

/// Heatmap over the (x, y) grid; `cell(i, j)` gives the value at (xs[i], ys[j]).
pub fn heatmap<F>(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], cell: F) -> String
where
    F: Fn(usize, usize) -> CellValue,
{
    let frame = Frame {
        x: padded(xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0)),
        y: padded(ys.first().copied().unwrap_or(0.0), ys.last().copied().unwrap_or(1.0)),
    };
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            if let CellValue::Value(v) = cell(i, j) {
                if v.is_finite() {
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
            }
        }
    }
    let (vmin, vmax) = padded(vmin, vmax);
    let half = |v: &[f64], k: usize| -> (f64, f64) {
        let lo = if k == 0 { v[0] } else { 0.5 * (v[k - 1] + v[k]) };
        let hi = if k + 1 == v.len() { v[k] } else { 0.5 * (v[k] + v[k + 1]) };
        (lo, hi)
    };

    let mut svg = String::new();
    header(&mut svg, title);
    for i in 0..xs.len() {
        let (xl, xh) = half(xs, i);
        for j in 0..ys.len() {
            let fill = match cell(i, j) {
                CellValue::Blank => continue,
                CellValue::Unstable => "#9a9a9a".to_string(),
                CellValue::Value(v) => colormap((v - vmin) / (vmax - vmin)),
            };
            let (yl, yh) = half(ys, j);
            let (px0, px1) = (frame.px(xl), frame.px(xh));
            let (py0, py1) = (frame.py(yh), frame.py(yl));
            let _ = writeln!(
                svg,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                (px1 - px0).max(0.5),
                (py1 - py0).max(0.5)
            );
        }
    }
    axes(&mut svg, &frame, x_label, y_label);
    // colour bar
    let bx = WIDTH - RIGHT + 30.0;
    let steps = 32;
    let height = HEIGHT - TOP - BOTTOM;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let y = TOP + (1.0 - t) * height - height / steps as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{y:.2}" width="20" height="{:.2}" fill="{}"/>"#,
            height / steps as f64 + 0.5,
            colormap(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">{}</text><text x="{}" y="{}">{}</text>"#,
        bx + 25.0,
        TOP + 10.0,
        tick(vmax),
        bx + 25.0,
        HEIGHT - BOTTOM,
        tick(vmin)
    );
    svg.push_str("</svg>\n");
    svg
}
