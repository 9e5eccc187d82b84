//! Self-contained SVG rendering of a simulation result.

use std::fmt::Write as _;
use std::path::Path;

use super::sim::{JointResult, SimResult};
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const ANGLE_H: f64 = 220.0;
const INPUT_H: f64 = 110.0;
const GAP: f64 = 30.0;
const PANEL_H: f64 = 40.0 + ANGLE_H + GAP + INPUT_H + 40.0;

/// One panel per joint: reference and measured angle overlaid, with the
/// command underneath.
pub fn render_svg(r: &SimResult) -> Result<String> {
    if r.joints.is_empty() || r.joints.iter().any(|j| j.series.is_empty()) {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let height = PANEL_H * r.joints.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(&r.scenario.name));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, j) in r.joints.iter().enumerate() {
        panel(&mut out, j, i as f64 * PANEL_H);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn export_plot(r: &SimResult, path: &Path) -> Result<()> {
    let svg = render_svg(r)?;
    super::export::write_atomic(path, |w| w.write_all(svg.as_bytes()))
}

fn panel(out: &mut String, j: &JointResult, y0: f64) {
    let s = &j.series;
    let _ = writeln!(
        out,
        r#"<g class="panel" id="joint-{}" transform="translate(0,{y0})">"#,
        j.joint
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="20" font-size="13">joint {} (rmse {:.4} rad, max |e| {:.4} rad)</text>"#,
        j.joint, j.metrics.rmse, j.metrics.max_abs_error
    );
    let (t0, t1) = range(&s.t);

    let (a0, a1) = range(s.theta_d.iter().chain(&s.theta_meas));
    let angle = Axes {
        x: LEFT,
        y: 40.0,
        w: WIDTH - LEFT - RIGHT,
        h: ANGLE_H,
        t0,
        t1,
        v0: a0,
        v1: a1,
    };
    angle.frame(out, "angle [rad]");
    angle.line(out, &s.t, &s.theta_d, "#1f77b4", Some("6,4"), "theta_d");
    angle.line(out, &s.t, &s.theta_meas, "#d62728", None, "theta_meas");

    let (u0, u1) = range(&s.u);
    let input = Axes {
        x: LEFT,
        y: 40.0 + ANGLE_H + GAP,
        w: WIDTH - LEFT - RIGHT,
        h: INPUT_H,
        t0,
        t1,
        v0: u0,
        v1: u1,
    };
    input.frame(out, "u [PWM %]");
    input.line(out, &s.t, &s.u, "#2ca02c", None, "u");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">t [s]</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        input.y + INPUT_H + 30.0
    );
    out.push_str("</g>\n");
}

struct Axes {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    t0: f64,
    t1: f64,
    v0: f64,
    v1: f64,
}

impl Axes {
    fn px(&self, t: f64, v: f64) -> (f64, f64) {
        (
            self.x + (t - self.t0) / (self.t1 - self.t0) * self.w,
            self.y + self.h - (v - self.v0) / (self.v1 - self.v0) * self.h,
        )
    }

    fn frame(&self, out: &mut String, label: &str) {
        let _ = writeln!(
            out,
            r##"<rect class="axes" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            self.x, self.y, self.w, self.h
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            self.x - 5.0,
            self.y + 10.0,
            fmt(self.v1)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            self.x - 5.0,
            self.y + self.h,
            fmt(self.v0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            self.x,
            self.y + self.h + 14.0,
            fmt(self.t0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            self.x + self.w,
            self.y + self.h + 14.0,
            fmt(self.t1)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            self.x - 45.0,
            self.y + self.h / 2.0,
            self.x - 45.0,
            self.y + self.h / 2.0,
            escape(label)
        );
    }

    fn line(&self, out: &mut String, t: &[f64], v: &[f64], color: &str, dash: Option<&str>, name: &str) {
        let mut pts = String::with_capacity(t.len() * 16);
        for (&ti, &vi) in t.iter().zip(v) {
            let (x, y) = self.px(ti, vi);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            out,
            r#"<polyline class="{name}" fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.trim_end()
        );
    }
}

// Data range, widened when degenerate so constant signals sit mid-axis.
fn range<'a>(v: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = v
        .into_iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
