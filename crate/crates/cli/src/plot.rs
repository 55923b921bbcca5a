//! Minimal SVG line and bar charts. Non-finite values are skipped.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            let pad = lo.abs().max(1.0) * 0.5;
            return Self {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn with(mut self, v: f64) -> Self {
        if v.is_finite() {
            self.lo = self.lo.min(v);
            self.hi = self.hi.max(v);
        }
        self
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn px(ax: &Axis, v: f64) -> f64 {
    LEFT + ax.frac(v) * (W - LEFT - RIGHT)
}

fn py(ax: &Axis, v: f64) -> f64 {
    H - BOTTOM - ax.frac(v) * (H - TOP - BOTTOM)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str, y: &Axis) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = y.lo + (y.hi - y.lo) * i as f64 / 4.0;
        let yy = py(y, v);
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" y1="{yy:.1}" x2="{x1}" y2="{yy:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            yy + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            COLORS[i % COLORS.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// Polylines with point markers.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let x = Axis::fit(series.iter().flat_map(|s| s.points.iter().filter(finite).map(|p| p.0)));
    let y = Axis::fit(series.iter().flat_map(|s| s.points.iter().filter(finite).map(|p| p.1)));
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, &y);
    for i in 0..=4 {
        let v = x.lo + (x.hi - x.lo) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            px(&x, v),
            H - BOTTOM + 16.0,
            tick_label(v)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(finite)
            .map(|&(a, b)| format!("{:.2},{:.2}", px(&x, a), py(&y, b)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        if pts.len() <= 40 {
            for p in &pts {
                let (a, b) = p.split_once(',').expect("formatted as x,y");
                let _ = writeln!(out, r#"<circle cx="{a}" cy="{b}" r="3" fill="{c}"/>"#);
            }
        }
    }
    let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// One bar per label, with an optional dashed horizontal reference line.
pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)], reference: Option<(f64, &str)>) -> String {
    let mut y = Axis::fit(bars.iter().map(|b| b.1)).with(0.0);
    if let Some((r, _)) = reference {
        y = y.with(r);
    }
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, &y);
    let n = bars.len().max(1) as f64;
    let slot = (W - LEFT - RIGHT) / n;
    let base = py(&y, 0.0);
    for (i, (label, v)) in bars.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        if v.is_finite() {
            let top = py(&y, *v);
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                cx - 0.35 * slot,
                top.min(base),
                0.7 * slot,
                (top - base).abs(),
                COLORS[0]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 16.0,
            escape(label)
        );
    }
    if let Some((r, name)) = reference {
        if r.is_finite() {
            let yy = py(&y, r);
            let _ = writeln!(
                out,
                r#"<line x1="{LEFT}" y1="{yy:.1}" x2="{}" y2="{yy:.1}" stroke="{}" stroke-dasharray="6 4"/>"#,
                W - RIGHT,
                COLORS[1]
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            W - RIGHT + 12.0,
            TOP + 10.0,
            COLORS[1],
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed_and_skip_non_finite() {
        let s = line_chart(
            "t",
            "x",
            "y",
            &[Series {
                name: "a<b".into(),
                points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains("a&lt;b"));
        let b = bar_chart("t", "d", "c", &[("1".into(), -2.0), ("2".into(), f64::INFINITY)], Some((-1.0, "m")));
        assert_eq!(b.matches("<rect x").count(), 1);
    }

    #[test]
    fn tick_labels_are_compact() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(-0.0001), "-1.00e-4");
    }
}
