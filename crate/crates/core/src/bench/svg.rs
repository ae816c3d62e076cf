//! Self-contained SVG line plots with standard-error bands.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub y: Vec<f64>,
    /// Half-width of the shaded band; empty for none.
    pub band: Vec<f64>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    mag * if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    }
}

/// Plots each curve against its 1-based index.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, curves: &[Curve]) -> String {
    let (w, h) = (720.0, 440.0);
    let (l, r, t, b) = (70.0, 170.0, 40.0, 55.0);
    let n = curves.iter().map(|c| c.y.len()).max().unwrap_or(1).max(2);
    let mut ymax: f64 = 0.0;
    for c in curves {
        for (k, v) in c.y.iter().enumerate() {
            let band = c.band.get(k).copied().unwrap_or(0.0);
            if (v + band).is_finite() {
                ymax = ymax.max(v + band);
            }
        }
    }
    if ymax <= 0.0 {
        ymax = 1.0;
    }
    let ystep = nice_step(ymax);
    let ymax = (ymax / ystep).ceil() * ystep;
    let xstep = nice_step(n as f64).max(1.0);
    let px = |x: f64| l + (x - 1.0) / (n as f64 - 1.0) * (w - l - r);
    let py = |y: f64| h - b - y / ymax * (h - t - b);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (l + w - r) / 2.0, esc(title));
    let mut y = 0.0;
    while y <= ymax + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line x1="{l}" x2="{}" y1="{py:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            w - r,
            l - 6.0,
            py(y) + 4.0,
            fmt_tick(y),
            py = py(y)
        );
        y += ystep;
    }
    let mut x = xstep;
    while x <= n as f64 + 1e-9 {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            h - b + 18.0,
            fmt_tick(x)
        );
        x += xstep;
    }
    let _ = writeln!(
        s,
        r#"<path d="M{l} {t} V{} H{}" fill="none" stroke="black"/>"#,
        h - b,
        w - r
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + w - r) / 2.0, h - 12.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (t + h - b) / 2.0,
        (t + h - b) / 2.0,
        esc(ylabel)
    );
    for (ci, c) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        if c.band.len() == c.y.len() && !c.y.is_empty() {
            let mut d = String::new();
            for (k, (v, e)) in c.y.iter().zip(&c.band).enumerate() {
                let _ = write!(d, "{}{:.2} {:.2} ", if k == 0 { "M" } else { "L" }, px(k as f64 + 1.0), py(v + e));
            }
            for (k, (v, e)) in c.y.iter().zip(&c.band).enumerate().rev() {
                let _ = write!(d, "L{:.2} {:.2} ", px(k as f64 + 1.0), py((v - e).max(0.0)));
            }
            let _ = writeln!(s, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, d);
        }
        let mut d = String::new();
        for (k, v) in c.y.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if k == 0 { "M" } else { "L" }, px(k as f64 + 1.0), py(*v));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = t + 10.0 + 20.0 * ci as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            w - r + 12.0,
            w - r + 36.0,
            w - r + 42.0,
            ly + 4.0,
            esc(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
