//! Standalone SVG renderings of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::pipeline::CostReport;

use super::point::{BlerPoint, PointStatus};

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
/// BLER values below this are drawn on the bottom edge of the log axis.
pub const BLER_FLOOR: f64 = 1e-4;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(body, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            escape(title)
        );
        Self { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dash: bool) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="{stroke}"{}/>"#,
            if dash { r#" stroke-dasharray="3,3""# } else { "" }
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn vtext(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="middle" transform="rotate(-90 {x:.1} {y:.1})">{}</text>"#,
            escape(s)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, dash: bool) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{}/>"#,
            coords.join(" "),
            if dash { r#" stroke-dasharray="5,3""# } else { "" }
        );
        for (x, y) in pts {
            let _ = writeln!(self.body, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{stroke}"/>"#);
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{w:.1}" height="{h:.1}" fill="{fill}"/>"#
        );
    }

    fn legend(&mut self, i: usize, label: &str, color: &str) {
        let x = W - RIGHT + 15.0;
        let y = TOP + 10.0 + 16.0 * i as f64;
        self.rect(x, y - 8.0, 12.0, 8.0, color);
        self.text(x + 18.0, y, "start", label);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn plot_w() -> f64 {
    W - LEFT - RIGHT
}

fn plot_h() -> f64 {
    H - TOP - BOTTOM
}

/// Maps MCS onto the x axis of the plot area.
fn mcs_x(mcs: f64, lo: f64, hi: f64) -> f64 {
    let span = (hi - lo).max(1.0);
    LEFT + (mcs - lo + 0.5) / (span + 1.0) * plot_w()
}

fn mcs_axis(svg: &mut Svg, lo: u8, hi: u8) {
    let y = TOP + plot_h();
    svg.line(LEFT, y, LEFT + plot_w(), y, "black", false);
    svg.line(LEFT, TOP, LEFT, y, "black", false);
    let step = if hi - lo > 14 { 2 } else { 1 };
    for m in (lo..=hi).step_by(step) {
        let x = mcs_x(f64::from(m), f64::from(lo), f64::from(hi));
        svg.line(x, y, x, y + 4.0, "black", false);
        svg.text(x, y + 16.0, "middle", &m.to_string());
    }
    svg.text(LEFT + plot_w() / 2.0, H - 12.0, "middle", "MCS");
}

fn done(points: &[BlerPoint]) -> Vec<&BlerPoint> {
    points.iter().filter(|p| p.status == PointStatus::Done).collect()
}

fn mcs_range(points: &[&BlerPoint]) -> (u8, u8) {
    let lo = points.iter().map(|p| p.mcs).min().unwrap_or(0);
    let hi = points.iter().map(|p| p.mcs).max().unwrap_or(0);
    (lo, hi)
}

/// BLER (log scale) versus MCS, one series per (SNR, iterations).
pub fn fig3_svg(points: &[BlerPoint]) -> String {
    let pts = done(points);
    let mut svg = Svg::new("BLER versus MCS");
    let (lo, hi) = mcs_range(&pts);
    mcs_axis(&mut svg, lo, hi);
    let decades = -BLER_FLOOR.log10();
    let y_of = |bler: f64| TOP + (-bler.max(BLER_FLOOR).log10()) / decades * plot_h();
    for d in 0..=decades as i32 {
        let v = 10f64.powi(-d);
        let y = y_of(v);
        svg.line(LEFT, y, LEFT + plot_w(), y, "#dddddd", false);
        svg.text(LEFT - 6.0, y + 4.0, "end", &format!("1e-{d}"));
    }
    let target = y_of(0.1);
    svg.line(LEFT, target, LEFT + plot_w(), target, "#888888", true);
    svg.vtext(18.0, TOP + plot_h() / 2.0, "BLER");

    let mut series: BTreeMap<(usize, String), Vec<(f64, f64)>> = BTreeMap::new();
    let mut order: Vec<(usize, String)> = Vec::new();
    for p in &pts {
        let key = (p.iterations, p.snr.to_string());
        if !series.contains_key(&key) {
            order.push(key.clone());
        }
        series
            .entry(key)
            .or_default()
            .push((mcs_x(f64::from(p.mcs), f64::from(lo), f64::from(hi)), y_of(p.bler)));
    }
    for (i, key) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut line = series[key].clone();
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        svg.polyline(&line, color, key.0 == 1);
        svg.legend(i, &format!("{} dB, {} it", key.1, key.0), color);
    }
    svg.finish()
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * mag >= v {
            return m * mag;
        }
    }
    10.0 * mag
}

/// Throughput and mean receiver time per subframe versus MCS. Uses, for
/// each MCS, the point with the most decoder iterations at the highest SNR.
pub fn fig4a_svg(points: &[BlerPoint]) -> String {
    let pts = done(points);
    let mut svg = Svg::new("Throughput and receiver cost versus MCS");
    let (lo, hi) = mcs_range(&pts);
    mcs_axis(&mut svg, lo, hi);
    let mut per_mcs: BTreeMap<u8, &BlerPoint> = BTreeMap::new();
    for p in &pts {
        let better = match per_mcs.get(&p.mcs) {
            None => true,
            Some(q) => {
                (p.iterations, p.snr.db().unwrap_or(f64::INFINITY))
                    > (q.iterations, q.snr.db().unwrap_or(f64::INFINITY))
            }
        };
        if better {
            per_mcs.insert(p.mcs, p);
        }
    }
    let tput_max = nice_max(per_mcs.values().map(|p| p.throughput_bps / 1e6).fold(0.0, f64::max));
    let cost_max = nice_max(
        per_mcs
            .values()
            .filter_map(|p| p.rx_mean_ns())
            .map(|t| t / 1e3)
            .fold(0.0, f64::max),
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let y = TOP + plot_h() * (1.0 - f);
        svg.line(LEFT, y, LEFT + plot_w(), y, "#dddddd", false);
        svg.text(LEFT - 6.0, y + 4.0, "end", &format!("{:.3}", tput_max * f));
        svg.text(LEFT + plot_w() + 6.0, y + 4.0, "start", &format!("{:.0}", cost_max * f));
    }
    svg.line(LEFT + plot_w(), TOP, LEFT + plot_w(), TOP + plot_h(), "black", false);
    svg.vtext(18.0, TOP + plot_h() / 2.0, "throughput (Mbit/s)");
    let x = |m: u8| mcs_x(f64::from(m), f64::from(lo), f64::from(hi));
    let tput: Vec<(f64, f64)> = per_mcs
        .values()
        .map(|p| (x(p.mcs), TOP + plot_h() * (1.0 - p.throughput_bps / 1e6 / tput_max)))
        .collect();
    svg.polyline(&tput, PALETTE[0], false);
    svg.legend(0, "throughput", PALETTE[0]);
    let cost: Vec<(f64, f64)> = per_mcs
        .values()
        .filter_map(|p| Some((x(p.mcs), TOP + plot_h() * (1.0 - p.rx_mean_ns()? / 1e3 / cost_max))))
        .collect();
    if !cost.is_empty() {
        svg.polyline(&cost, PALETTE[1], true);
        svg.legend(1, "rx time/subframe (us)", PALETTE[1]);
    }
    svg.finish()
}

/// Stacked per-block cost shares per MCS.
pub fn fig4b_svg(reports: &[(u8, CostReport)]) -> String {
    let mut svg = Svg::new("Per-module share of computing cost");
    let (lo, hi) = (
        reports.iter().map(|r| r.0).min().unwrap_or(0),
        reports.iter().map(|r| r.0).max().unwrap_or(0),
    );
    mcs_axis(&mut svg, lo, hi);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let y = TOP + plot_h() * (1.0 - f);
        svg.text(LEFT - 6.0, y + 4.0, "end", &format!("{f:.2}"));
    }
    svg.vtext(18.0, TOP + plot_h() / 2.0, "share of PHY time");
    let mut blocks: Vec<String> = Vec::new();
    for (_, r) in reports {
        for b in &r.blocks {
            if !blocks.contains(&b.block) {
                blocks.push(b.block.clone());
            }
        }
    }
    let bar = plot_w() / ((hi - lo) as f64 + 1.0) * 0.7;
    for (mcs, r) in reports {
        let cx = mcs_x(f64::from(*mcs), f64::from(lo), f64::from(hi));
        let mut acc = 0.0;
        for (i, name) in blocks.iter().enumerate() {
            let share = r.block(name).map(|b| b.share).unwrap_or(0.0);
            let y = TOP + plot_h() * (1.0 - acc - share);
            svg.rect(cx - bar / 2.0, y, bar, plot_h() * share, PALETTE[i % PALETTE.len()]);
            acc += share;
        }
    }
    for (i, name) in blocks.iter().enumerate() {
        svg.legend(i, name, PALETTE[i % PALETTE.len()]);
    }
    svg.finish()
}

/// Cost reports to show in the share plot: per MCS, the point with the
/// most iterations and highest SNR among those that carry a report.
pub fn cost_by_mcs(points: &[BlerPoint]) -> Vec<(u8, CostReport)> {
    let mut best: BTreeMap<u8, &BlerPoint> = BTreeMap::new();
    for p in points.iter().filter(|p| p.cost.is_some()) {
        let key = |q: &BlerPoint| (q.iterations, q.snr.db().unwrap_or(f64::INFINITY));
        if best.get(&p.mcs).is_none_or(|q| key(p) > key(q)) {
            best.insert(p.mcs, p);
        }
    }
    best.into_iter()
        .map(|(m, p)| (m, p.cost.clone().expect("filtered")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Snr;
    use crate::harness::chain::LinkConfig;
    use crate::pipeline::{cost_report, CostSample};

    fn pt(mcs: u8, bler: f64) -> BlerPoint {
        let mut p = BlerPoint::placeholder(
            &LinkConfig {
                mcs,
                snr: Snr::Db(5.0),
                iterations: 5,
            },
            1,
        );
        p.blocks = 100;
        p.bler = bler;
        p.throughput_bps = 1e6 * f64::from(mcs);
        p.rx_total_ns = Some(1000 * u64::from(mcs));
        p
    }

    #[test]
    fn figures_are_svg_documents() {
        let pts: Vec<BlerPoint> = (0..5).map(|m| pt(m, 0.5 / f64::from(m + 1))).collect();
        for doc in [fig3_svg(&pts), fig4a_svg(&pts)] {
            assert!(doc.starts_with("<svg"));
            assert!(doc.trim_end().ends_with("</svg>"));
            assert!(doc.contains("<polyline"));
        }
        let sample = |b: &str, ns| CostSample {
            block: b.into(),
            invocation: 0,
            elapsed_ns: ns,
            consumed: 0,
            produced: 0,
        };
        let rep = cost_report(&[sample("dec", 30), sample("fft", 10)], std::time::Duration::from_nanos(40)).unwrap();
        let doc = fig4b_svg(&[(0, rep.clone()), (1, rep)]);
        // background, two bars of two segments, two legend swatches
        assert_eq!(doc.matches("<rect").count(), 1 + 2 * 2 + 2);
    }
}
