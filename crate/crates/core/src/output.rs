//! CSV and SVG writers for curves and zero-set scans.
//!
//! Data rows carry no timestamps, so deterministic runs produce identical
//! bytes. Floats use 17 significant digits.

use std::fmt::Write;

use crate::fibre::Classification;
use crate::solver::CurvePoint;
use crate::zeroset::ZeroSetRecord;

pub const CURVE_HEADER: &str = "t,D,q,residual_Q,residual_dQdq,window,mu_u,converged";
pub const ZEROSET_HEADER: &str = "u,v,Gamma_n,phi,classification";

/// Float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `#`-prefixed metadata lines.
pub fn metadata(command: &str, seed: u64, config_echo: &str, extra: &[(&str, String)]) -> String {
    let mut out = format!("# skewdim {} {command}\n# seed: {seed}\n# config: {config_echo}\n", env!("CARGO_PKG_VERSION"));
    for (key, value) in extra {
        let _ = writeln!(out, "# {key}: {value}");
    }
    out
}

pub fn curve_csv(meta: &str, points: &[CurvePoint]) -> String {
    let mut out = String::from(meta);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_float(p.t),
            fmt_float(p.d),
            fmt_float(p.q),
            fmt_float(p.residual_q),
            fmt_float(p.residual_dqdq),
            p.window,
            fmt_float(p.mu_u),
            p.converged
        );
    }
    out
}

pub fn zeroset_csv(meta: &str, records: &[ZeroSetRecord]) -> String {
    let mut out = String::from(meta);
    out.push_str(ZEROSET_HEADER);
    out.push('\n');
    for r in records {
        let class = match r.classification {
            Classification::Zero => "zero",
            Classification::Positive => "positive",
            Classification::Undetermined => "undetermined",
        };
        let _ = writeln!(out, "{},{},{},{},{class}", fmt_float(r.u), fmt_float(r.v), fmt_float(r.gamma_n), fmt_float(r.value));
    }
    out
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 55.0;

/// Line plot of the converged part of `D(t)` with a dashed marker at `gamma_c`.
pub fn curve_svg(points: &[CurvePoint], gamma_c: f64) -> String {
    let converged: Vec<&CurvePoint> = points.iter().filter(|p| p.converged).collect();
    let (mut t0, mut t1) = points
        .iter()
        .map(|p| p.t)
        .chain(std::iter::once(gamma_c))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if !(t1 > t0) {
        t0 -= 0.5;
        t1 += 0.5;
    }
    let (d0, d1) = (0.0, 1.05);
    let x = |t: f64| LEFT + (t - t0) / (t1 - t0) * (WIDTH - LEFT - RIGHT);
    let y = |d: f64| HEIGHT - BOTTOM - (d - d0) / (d1 - d0) * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);

    // axes and ticks
    let (xa, xb, ya, yb) = (x(t0), x(t1), y(d0), y(d1));
    let _ = writeln!(s, r#"<path d="M{xa:.2},{yb:.2} V{ya:.2} H{xb:.2}" stroke="black" fill="none"/>"#);
    for i in 0..=5 {
        let t = t0 + (t1 - t0) * i as f64 / 5.0;
        let px = x(t);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{ya:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, ya + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{t:.2}</text>"#, ya + 19.0);
    }
    for i in 0..=5 {
        let d = 0.2 * i as f64;
        let py = y(d);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{xa:.2}" y2="{py:.2}" stroke="black"/>"#, xa - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{d:.1}</text>"#, xa - 8.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">t</text>"#, (xa + xb) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {0:.2})">D(t)</text>"#,
        (ya + yb) / 2.0
    );

    // gamma_c marker
    let gx = x(gamma_c);
    let _ = writeln!(s, r#"<line x1="{gx:.2}" y1="{ya:.2}" x2="{gx:.2}" y2="{yb:.2}" stroke="gray" stroke-dasharray="6 4"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="gray">γ_c = {gamma_c:.6}</text>"#, gx + 4.0, yb + 12.0);

    // one polyline per run of consecutive converged points
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, s: &mut String| {
        if run.len() > 1 {
            let _ = writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, run.join(" "));
        }
        run.clear();
    };
    for p in points {
        if p.converged {
            run.push(format!("{:.2},{:.2}", x(p.t), y(p.d)));
        } else {
            flush(&mut run, &mut s);
        }
    }
    flush(&mut run, &mut s);
    for p in &converged {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#, x(p.t), y(p.d));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(t: f64, d: f64, converged: bool) -> CurvePoint {
        CurvePoint {
            t,
            d,
            q: 0.0,
            residual_q: 0.0,
            residual_dqdq: 0.0,
            window: 16,
            converged,
            mu_u: 0.69,
            slope: 0.0,
            iterations: 3,
            failure: None,
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -0.648_429_546_952_952_3, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn curve_csv_layout() {
        let meta = metadata("curve", 3, "{}", &[]);
        let csv = curve_csv(&meta, &[point(-1.0, 0.5, true), point(0.0, f64::NAN, false)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# skewdim "));
        assert_eq!(lines[1], "# seed: 3");
        assert_eq!(lines[3], CURVE_HEADER);
        assert_eq!(lines[4].split(',').count(), 8);
        assert!(lines[5].ends_with(",false"));
        assert_eq!(csv, curve_csv(&meta, &[point(-1.0, 0.5, true), point(0.0, f64::NAN, false)]));
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = curve_svg(&[point(-1.0, 0.5, true), point(-0.6, 1.0, true), point(0.0, 0.2, false)], -0.65);
        assert!(svg.contains(">t</text>") && svg.contains(">D(t)</text>"));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("http").count(), 1, "only the namespace URI");
        assert!(!svg.contains("href"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
