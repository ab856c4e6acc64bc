//! Log-log line plots as plain SVG text.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Render `series` on log10 axes. Non-positive points are dropped.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect())
        .collect();
    let all: Vec<(f64, f64)> = logs.iter().flatten().copied().collect();
    let (x0, x1) = padded_range(all.iter().map(|p| p.0));
    let (y0, y1) = padded_range(all.iter().map(|p| p.1));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {top} L{m} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        top = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = px(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{t}" stroke="black"/><text x="{x:.2}" y="{ly}" text-anchor="middle">1e{k}</text>"#,
            b = HEIGHT - MARGIN,
            t = HEIGHT - MARGIN + 5.0,
            ly = HEIGHT - MARGIN + 18.0
        );
    }
    for k in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = py(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{l}" y1="{y:.2}" x2="{m}" y2="{y:.2}" stroke="black"/><text x="{lx}" y="{ty:.2}" text-anchor="end">1e{k}</text>"#,
            l = MARGIN - 5.0,
            m = MARGIN,
            lx = MARGIN - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&format!("{x_label} (log scale)"))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{c}" text-anchor="middle" transform="rotate(-90 16 {c})">{}</text>"#,
        escape(&format!("{y_label} (log scale)")),
        c = HEIGHT / 2.0
    );

    for (i, (ser, pts)) in series.iter().zip(&logs).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
            for (x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y));
            }
        }
        let legend = match ser.slope {
            Some(b) => format!("{} (slope {b:.3})", ser.label),
            None => format!("{} (no fit)", ser.label),
        };
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{t}" y="{ty}">{}</text>"#,
            escape(&legend),
            a = MARGIN + 10.0,
            b = MARGIN + 30.0,
            t = MARGIN + 36.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn padded_range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.08).max(0.05);
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
