//! Minimal self-contained SVG 1.1 line plots (log-log), no external assets.

use crate::table::write_atomic;
use std::fmt::Write as _;
use std::path::Path;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 55.0;

/// Writes a log-log line plot. Axis ranges are padded decade boundaries
/// covering all data.
pub fn loglog_plot(
    path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series<'_>],
) -> std::io::Result<()> {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if x > 0.0 && y > 0.0 {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !xmin.is_finite() {
        xmin = 1e-1;
        xmax = 1.0;
        ymin = 1e-1;
        ymax = 1.0;
    }
    let (lx0, lx1) = (xmin.log10().floor(), xmax.log10().ceil().max(xmin.log10().floor() + 1.0));
    let (ly0, ly1) = (ymin.log10().floor(), ymax.log10().ceil().max(ymin.log10().floor() + 1.0));
    let tx = |x: f64| ML + (x.log10() - lx0) / (lx1 - lx0) * (W - ML - MR);
    let ty = |y: f64| H - MB - (y.log10() - ly0) / (ly1 - ly0) * (H - MT - MB);

    let mut s = String::new();
    writeln!(
        s,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"15\">{}</text>",
        W / 2.0,
        xml_escape(title)
    )
    .unwrap();
    // axes box
    writeln!(
        s,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - ML - MR,
        H - MT - MB
    )
    .unwrap();
    // decade ticks and grid
    let mut d = lx0;
    while d <= lx1 + 0.5 {
        let x = tx(10f64.powf(d));
        writeln!(s, "<line x1=\"{x:.2}\" y1=\"{MT}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#dddddd\"/>", H - MB).unwrap();
        writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">1e{}</text>",
            H - MB + 18.0,
            d as i64
        )
        .unwrap();
        d += 1.0;
    }
    let mut d = ly0;
    while d <= ly1 + 0.5 {
        let y = ty(10f64.powf(d));
        writeln!(s, "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>", W - MR).unwrap();
        writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">1e{}</text>",
            ML - 6.0,
            y + 4.0,
            d as i64
        )
        .unwrap();
        d += 1.0;
    }
    writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{}</text>",
        W / 2.0,
        H - 12.0,
        xml_escape(xlabel)
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>",
        H / 2.0,
        H / 2.0,
        xml_escape(ylabel)
    )
    .unwrap();
    // series
    for (si, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", tx(x), ty(y)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"/>",
            pts.join(" "),
            ser.color
        )
        .unwrap();
        for p in &pts {
            let xy: Vec<&str> = p.split(',').collect();
            writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"2.6\" fill=\"{}\"/>", xy[0], xy[1], ser.color)
                .unwrap();
        }
        writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{}\">{}</text>",
            W - MR - 170.0,
            MT + 18.0 + 16.0 * si as f64,
            ser.color,
            xml_escape(ser.label)
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    write_atomic(path, s.as_bytes())
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
