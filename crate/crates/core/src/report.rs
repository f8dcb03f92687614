//! SVG plot of one class's election.
//!
//! Per-view curves are drawn with opacity proportional to their weight, the
//! aggregated curve in red, the threshold as a dashed line, filtered runs
//! as shaded bands and ground truth as dash-dot verticals. A star marks the
//! midpoint of the selected segment when selection had a candidate to pick.

use std::fmt::Write as _;
use std::path::Path;

use crate::election::run_election;
use crate::error::{Error, Result};
use crate::formats::{write_atomic, ElectionConfig};
use crate::model::{ActionSegment, ProbabilityTensor};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 48.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 36.0;
const VIEW_COLORS: [&str; 5] = ["#1f77b4", "#e6b800", "#2ca02c", "#9467bd", "#8c564b"];

struct Frame {
    frames: usize,
}

impl Frame {
    fn x(&self, frame: f64) -> f64 {
        let span = (self.frames.max(2) - 1) as f64;
        LEFT + (WIDTH - LEFT - RIGHT) * frame / span
    }

    fn y(&self, score: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - score.clamp(0.0, 1.0))
    }

    fn polyline(&self, series: &[f64]) -> String {
        let mut pts = String::with_capacity(series.len() * 14);
        for (t, v) in series.iter().enumerate() {
            if t > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", self.x(t as f64), self.y(*v));
        }
        pts
    }
}

pub fn render_election_svg(
    p: &ProbabilityTensor,
    cfg: &ElectionConfig,
    class_id: usize,
    gt: Option<&ActionSegment>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let svg = election_svg(p, cfg, class_id, gt)?;
    write_atomic(path.as_ref(), |w| Ok(w.write_all(svg.as_bytes())?))
}

/// The document written by [`render_election_svg`].
pub fn election_svg(
    p: &ProbabilityTensor,
    cfg: &ElectionConfig,
    class_id: usize,
    gt: Option<&ActionSegment>,
) -> Result<String> {
    if class_id >= p.num_classes() {
        return Err(Error::Range(format!(
            "class {class_id} out of range for K={}",
            p.num_classes()
        )));
    }
    let trace = run_election(p, cfg)?;
    let fps = cfg.time_base.fps();
    let plot = Frame { frames: p.num_frames() };
    let threshold = cfg.thresholds[class_id];
    let weights = cfg.weights.row(class_id);
    let max_w = weights.iter().copied().fold(0.0, f64::max);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="18" font-family="sans-serif" font-size="13">class {class_id}, threshold {threshold}</text>"#
    );

    for cand in &trace.filtered[class_id] {
        let x0 = plot.x(cand.start_frame as f64);
        let x1 = plot.x(cand.end_frame as f64);
        let _ = writeln!(
            s,
            r##"<rect class="candidate" x="{x0:.2}" y="{TOP}" width="{:.2}" height="{:.2}" fill="#d62728" fill-opacity="0.12"/>"##,
            (x1 - x0).max(1.0),
            HEIGHT - TOP - BOTTOM
        );
    }

    let bottom = HEIGHT - BOTTOM;
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{LEFT}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    let _ = writeln!(s, r#"<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>"#);
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{tick}</text>"#,
            LEFT - 4.0,
            plot.y(tick) + 3.0
        );
    }
    let duration = p.num_frames() as f64 / fps;
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{duration} s</text>"#,
        WIDTH - RIGHT,
        HEIGHT - 14.0
    );

    for (m, &w) in weights.iter().enumerate() {
        let opacity = if max_w > 0.0 { w / max_w } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<polyline class="view" data-view="{m}" fill="none" stroke="{}" stroke-width="1" stroke-opacity="{opacity:.3}" points="{}"/>"#,
            VIEW_COLORS[m % VIEW_COLORS.len()],
            plot.polyline(&p.view_series(class_id, m))
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline class="aggregated" fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##,
        plot.polyline(trace.signal.class_series(class_id))
    );
    let ty = plot.y(threshold);
    let _ = writeln!(
        s,
        r#"<line class="threshold" x1="{LEFT}" y1="{ty:.2}" x2="{}" y2="{ty:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
        WIDTH - RIGHT
    );

    if let Some(g) = gt {
        for edge in [g.start_s, g.end_s] {
            let x = plot.x(edge * fps);
            let _ = writeln!(
                s,
                r#"<line class="ground-truth" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{bottom}" stroke="black" stroke-dasharray="8 3 2 3"/>"#
            );
        }
    }

    if let Some(sel) = trace.selections[class_id].filter(|sel| !sel.used_fallback()) {
        let winner = sel.winner.expect("checked above");
        let cx = plot.x(sel.segment.midpoint() * fps);
        let cy = plot.y(winner.mean_score);
        let _ = writeln!(
            s,
            r##"<polygon class="selection" data-midpoint-s="{}" fill="#ffd700" stroke="#806600" points="{}"/>"##,
            sel.segment.midpoint(),
            star_points(cx, cy, 9.0, 4.0)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn star_points(cx: f64, cy: f64, outer: f64, inner: f64) -> String {
    (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            let a = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.2},{:.2}", cx + r * a.cos(), cy + r * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
