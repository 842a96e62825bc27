//! Self-contained SVG log-log plot of remainders against amplitude.

use std::fmt::Write;

use hadamard_core::harness::{ExperimentReport, OrderFit};
use hadamard_core::perturbation::Form;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned range covering the values' base-10 logarithms.
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Axis { lo: -3.0, hi: 0.0 };
        }
        let (lo, hi) = (lo.floor(), hi.ceil());
        Axis { lo, hi: if hi > lo { hi } else { lo + 1.0 } }
    }

    fn map(&self, value: f64, from: f64, to: f64) -> f64 {
        from + (value.log10() - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

/// Plots `max_k|R_k|` per amplitude (hollow markers for masked rows) with the
/// fitted slope when available.
pub fn render_svg(report: &ExperimentReport, form: Form, fit: Option<&OrderFit>) -> String {
    let points: Vec<(f64, f64, bool)> = report
        .rows
        .iter()
        .filter_map(|row| {
            let all = row
                .entries
                .iter()
                .filter_map(|e| e.estimate(form))
                .map(|e| e.remainder.abs())
                .fold(0.0, f64::max);
            let masked = row.pooled_remainder(form).is_none();
            (all > 0.0).then_some((row.epsilon, all, masked))
        })
        .collect();
    let xa = Axis::covering(points.iter().map(|p| p.0));
    let ya = Axis::covering(points.iter().map(|p| p.1));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN / 2.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for d in xa.lo as i32..=xa.hi as i32 {
        let x = xa.map(10f64.powi(d), x0, x1);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, y0 + 20.0);
    }
    for d in ya.lo as i32..=ya.hi as i32 {
        let y = ya.map(10f64.powi(d), y0, y1);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">amplitude ε</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">max |remainder|</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(s, r#"<text x="{x0}" y="20">{}</text>"#, escape(&report.label));
    if let Some(fit) = fit {
        // anchor the fitted line at the geometric mean of the unmasked points
        let n = fit.ratios.len() as f64;
        let lx = fit.ratios.iter().map(|r| r.0.ln()).sum::<f64>() / n;
        let ly = fit.ratios.iter().map(|r| (r.0 * r.1).ln()).sum::<f64>() / n;
        let at = |e: f64| (ly + fit.slope * (e.ln() - lx)).exp();
        let (ea, eb) = (10f64.powf(xa.lo), 10f64.powf(xa.hi));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-dasharray="6 4"/>"#,
            x0,
            ya.map(at(ea), y0, y1),
            x1,
            ya.map(at(eb), y0, y1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="steelblue">slope {:.3} ± {:.3}</text>"#,
            x0 + 10.0,
            y1 + 15.0,
            fit.slope,
            fit.half_width
        );
    }
    for (e, r, masked) in &points {
        let fill = if *masked { "none" } else { "black" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"/>"#,
            xa.map(*e, x0, x1),
            ya.map(*r, y0, y1)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
