//! Semi-log convergence plot written as plain SVG 1.1.
//!
//! Elements carry classes (`distance-curve`, `kstar-marker`, `rate-line`,
//! `annotation`, `axis-label`) so the output can be inspected structurally.

use std::fmt::Write as _;

use crate::report::RateSummary;
use crate::trace_csv::TraceRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 60.0;
/// Values below this are drawn at the bottom of the axis.
const FLOOR: f64 = 1e-17;

struct Frame {
    x_max: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, epoch: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * epoch / self.x_max
    }

    fn py(&self, log_value: f64) -> f64 {
        let t = (log_value.clamp(self.y_lo, self.y_hi) - self.y_lo) / (self.y_hi - self.y_lo);
        HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * t
    }
}

fn log10_clamped(v: f64) -> f64 {
    v.max(FLOOR).log10()
}

/// Roughly `target` round-numbered ticks covering `[0, max]`.
fn epoch_step(max: f64, target: f64) -> f64 {
    let raw = (max / target).max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the distance curve from `rows`, the identification marker and the
/// predicted rate line `h(k) = anchor * rho^(k - k*)` from `summary`.
pub fn render_svg(rows: &[TraceRow], summary: &RateSummary) -> String {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.dist_to_ref.map(|d| (r.epoch as f64, d)))
        .collect();
    let x_max = points.iter().map(|p| p.0).fold(1.0, f64::max);
    let positive: Vec<f64> = points.iter().map(|p| p.1).filter(|&d| d > 0.0).collect();
    let (y_lo, y_hi) = if positive.is_empty() {
        (-16.0, 0.0)
    } else {
        let lo = positive.iter().copied().fold(f64::INFINITY, f64::min).log10().floor();
        let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
        let lo = lo.max(FLOOR.log10());
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let frame = Frame { x_max, y_lo, y_hi };
    let mut notes: Vec<String> = Vec::new();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{} / {}</text>"#,
        WIDTH / 2.0,
        escape(&summary.dataset),
        escape(&summary.estimator)
    );

    // axes and ticks
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M {x0:.2} {y0:.2} L {x0:.2} {y1:.2} L {x1:.2} {y1:.2}" fill="none" stroke="black"/>"#
    );
    let decades = (y_hi - y_lo) as i64;
    let decade_step = (decades / 10 + 1).max(1);
    let mut e = y_lo as i64;
    while e <= y_hi as i64 {
        let y = frame.py(e as f64);
        let _ = writeln!(
            svg,
            r##"<line class="ytick" x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
        e += decade_step;
    }
    let step = epoch_step(x_max, 8.0);
    let mut k = 0.0;
    while k <= x_max + 1e-9 {
        let x = frame.px(k);
        let _ = writeln!(
            svg,
            r#"<line class="xtick" x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            y1 + 5.0,
            y1 + 18.0
        );
        k += step;
    }
    let _ = writeln!(
        svg,
        r#"<text class="axis-label" x="{:.2}" y="{:.2}" text-anchor="middle">epochs (full passes)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text class="axis-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">distance to optimum ||x(k) - x*||</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // distance curve
    if points.is_empty() {
        notes.push("trace has no distances to the reference solution".into());
    } else {
        let mut d = String::new();
        for (i, (k, v)) in points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2} {:.2}",
                if i == 0 { "M " } else { " L " },
                frame.px(*k),
                frame.py(log10_clamped(*v))
            );
        }
        let _ = writeln!(
            svg,
            r##"<path class="distance-curve" d="{d}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##
        );
    }

    // identification marker and predicted rate
    match summary.k_star {
        None => notes.push("identification epoch k* not observed: marker and rate line omitted".into()),
        Some(ks) => {
            let x = frame.px(ks as f64);
            let _ = writeln!(
                svg,
                r#"<line class="kstar-marker" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="red" stroke-width="1.5" stroke-dasharray="6,4"/>"#
            );
            match (summary.rho, summary.anchor_distance) {
                (Some(rho), _) if summary.degenerate && rho >= 1.0 - cdident_core::analysis::DEGENERATE_RHO_GAP => {
                    notes.push(format!("rho = {rho:.6} >= 1: rate line omitted"));
                }
                (None, _) => notes.push("spectral radius unavailable: rate line omitted".into()),
                (_, None) | (_, Some(0.0)) => {
                    notes.push("distance at k* is zero: rate line omitted".into())
                }
                (Some(rho), Some(anchor)) => {
                    let start = anchor.log10();
                    // h(k) = anchor * rho^(k - k*) reaches the axis floor at k_end
                    let k_end = if rho <= 0.0 {
                        ks as f64
                    } else {
                        let slope = rho.log10();
                        if slope < 0.0 {
                            (ks as f64 + (y_lo - start) / slope).min(x_max)
                        } else {
                            x_max
                        }
                    };
                    let end = if rho <= 0.0 {
                        y_lo
                    } else {
                        start + (k_end - ks as f64) * rho.log10()
                    };
                    let _ = writeln!(
                        svg,
                        r##"<path class="rate-line" d="M {:.2} {:.2} L {:.2} {:.2}" fill="none" stroke="#e6c000" stroke-width="2" stroke-dasharray="8,5"/>"##,
                        x,
                        frame.py(start),
                        frame.px(k_end),
                        frame.py(end)
                    );
                }
            }
        }
    }

    for (i, note) in notes.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="annotation" x="{:.2}" y="{:.2}" fill="darkred">{}</text>"#,
            x0 + 10.0,
            y0 + 16.0 + 16.0 * i as f64,
            escape(note)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
