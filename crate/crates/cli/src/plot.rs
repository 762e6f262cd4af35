//! Static SVG figures: decoding curve, TG contours per word position, and the
//! effect scatter. Output depends only on the input rows, so figures are as
//! reproducible as the CSVs they are drawn from.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use phonoprobe::numerics::pearson;

use crate::records::{ContourRow, EffectPairRow, WindowRow};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
pub const PLOT_LEFT: f64 = 70.0;
pub const PLOT_TOP: f64 = 30.0;
pub const PLOT_WIDTH: f64 = 520.0;
pub const PLOT_HEIGHT: f64 = 380.0;

const POSITION_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Data-to-pixel mapping of the plot area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axes {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Axes {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Axes {
            x: widen(x),
            y: widen(y),
        }
    }

    pub fn px(&self, x: f64) -> f64 {
        PLOT_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * PLOT_WIDTH
    }

    pub fn py(&self, y: f64) -> f64 {
        PLOT_TOP + (1.0 - (y - self.y.0) / (self.y.1 - self.y.0)) * PLOT_HEIGHT
    }
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Tick step of 1, 2 or 5 times a power of ten giving about five intervals.
fn tick_step(lo: f64, hi: f64) -> f64 {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = tick_step(lo, hi);
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), decimals)
}

// ---------------------------------------------------------------------------
// Document builder
// ---------------------------------------------------------------------------

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, "<title>{}</title>", escape(title));
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        Svg { body }
    }

    fn raw(&mut self, element: &str) {
        self.body.push_str(element);
        self.body.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, class: &str, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text class="{class}" x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        );
    }

    fn polyline(&mut self, attrs: &str, points: &[(f64, f64)]) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline {attrs} fill="none" points="{}"/>"#,
            pts.join(" ")
        );
    }

    fn axes(&mut self, axes: &Axes, x_label: &str, y_label: &str) {
        let (bottom, right) = (PLOT_TOP + PLOT_HEIGHT, PLOT_LEFT + PLOT_WIDTH);
        self.raw(&format!(
            r#"<rect class="frame" x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" fill="none" stroke="black"/>"#
        ));
        let (xt, xd) = ticks(axes.x.0, axes.x.1);
        for v in xt {
            let x = axes.px(v);
            self.raw(&format!(
                r#"<line class="tick" x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                bottom + 5.0
            ));
            self.text(x, bottom + 18.0, "middle", "tick-label", &format!("{v:.xd$}"));
        }
        let (yt, yd) = ticks(axes.y.0, axes.y.1);
        for v in yt {
            let y = axes.py(v);
            self.raw(&format!(
                r#"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{PLOT_LEFT:.2}" y2="{y:.2}" stroke="black"/>"#,
                PLOT_LEFT - 5.0
            ));
            self.text(PLOT_LEFT - 8.0, y + 4.0, "end", "tick-label", &format!("{v:.yd$}"));
        }
        self.text((PLOT_LEFT + right) / 2.0, HEIGHT - 20.0, "middle", "axis-label", x_label);
        let cy = PLOT_TOP + PLOT_HEIGHT / 2.0;
        let _ = writeln!(
            self.body,
            r#"<text class="axis-label" x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
            escape(y_label)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn clip_path(svg: &mut Svg) {
    svg.raw(&format!(
        r#"<defs><clipPath id="plot-area"><rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}"/></clipPath></defs>"#
    ));
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

/// Accuracy and baseline against offset, with the mean phone duration shaded
/// from onset.
pub fn window_svg(rows: &[WindowRow], mean_duration_ms: Option<f64>) -> String {
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.offset_ms), b.max(r.offset_ms)));
    let axes = Axes::new((lo, hi), (0.0, 1.0));
    let mut svg = Svg::new("Decoding accuracy by offset from phone onset");
    clip_path(&mut svg);
    if let Some(d) = mean_duration_ms.filter(|d| d.is_finite() && *d > 0.0) {
        let x0 = axes.px(0.0f64.clamp(axes.x.0, axes.x.1));
        let x1 = axes.px(d.clamp(axes.x.0, axes.x.1));
        svg.raw(&format!(
            r##"<rect class="duration-band" data-duration-ms="{d}" x="{x0:.2}" y="{PLOT_TOP}" width="{:.2}" height="{PLOT_HEIGHT}" fill="#888888" fill-opacity="0.25"/>"##,
            x1 - x0
        ));
    }
    svg.axes(&axes, "offset from phone onset (ms)", "accuracy");
    let acc: Vec<(f64, f64)> = rows.iter().map(|r| (axes.px(r.offset_ms), axes.py(r.accuracy))).collect();
    let base: Vec<(f64, f64)> = rows.iter().map(|r| (axes.px(r.offset_ms), axes.py(r.baseline))).collect();
    svg.polyline(
        r##"class="baseline" stroke="#555555" stroke-width="1.5" stroke-dasharray="6,4" clip-path="url(#plot-area)""##,
        &base,
    );
    svg.polyline(
        r##"class="accuracy" stroke="#1f77b4" stroke-width="2" clip-path="url(#plot-area)""##,
        &acc,
    );
    let lx = PLOT_LEFT + PLOT_WIDTH - 150.0;
    svg.raw(&format!(
        r##"<line x1="{lx:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#1f77b4" stroke-width="2"/>"##,
        PLOT_TOP + 15.0,
        lx + 25.0
    ));
    svg.text(lx + 30.0, PLOT_TOP + 19.0, "start", "legend", "accuracy");
    svg.raw(&format!(
        r##"<line x1="{lx:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#555555" stroke-dasharray="6,4"/>"##,
        PLOT_TOP + 32.0,
        lx + 25.0
    ));
    svg.text(lx + 30.0, PLOT_TOP + 36.0, "start", "legend", "majority baseline");
    svg.finish()
}

/// Superimposed TG contours, one color per word position; thresholds below
/// 0.3 dotted, others solid. Each position is shifted along both axes by its
/// `shift_ms`.
pub fn tg_svg(contours: &[ContourRow], offsets_ms: (f64, f64)) -> String {
    let max_shift = contours.iter().map(|r| r.shift_ms).fold(0.0, f64::max);
    let range = (offsets_ms.0, offsets_ms.1 + max_shift);
    let axes = Axes::new(range, range);
    let mut svg = Svg::new("Temporal generalization contours by word position");
    clip_path(&mut svg);
    svg.axes(&axes, "training offset (ms)", "test offset (ms)");
    svg.raw(&format!(
        r##"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="3,3"/>"##,
        axes.px(range.0),
        axes.py(range.0),
        axes.px(range.1),
        axes.py(range.1)
    ));

    let mut lines: BTreeMap<(u32, u64, usize), Vec<&ContourRow>> = BTreeMap::new();
    for r in contours {
        lines.entry((r.position, r.threshold.to_bits(), r.contour)).or_default().push(r);
    }
    let mut positions: Vec<u32> = contours.iter().map(|r| r.position).collect();
    positions.sort_unstable();
    positions.dedup();
    let color = |p: u32| {
        let i = positions.iter().position(|&q| q == p).unwrap_or(0);
        POSITION_COLORS[i % POSITION_COLORS.len()]
    };
    for ((position, _, _), mut vertices) in lines {
        vertices.sort_by_key(|r| r.vertex);
        let first = vertices[0];
        let pts: Vec<(f64, f64)> = vertices
            .iter()
            .map(|r| (axes.px(r.train_ms + r.shift_ms), axes.py(r.test_ms + r.shift_ms)))
            .collect();
        let dash = if first.threshold < 0.3 { r#" stroke-dasharray="1.5,3""# } else { "" };
        svg.polyline(
            &format!(
                r#"class="contour" data-position="{position}" data-threshold="{}" data-closed="{}" stroke="{}" stroke-width="1.5"{dash} clip-path="url(#plot-area)""#,
                first.threshold,
                first.closed,
                color(position)
            ),
            &pts,
        );
    }
    for (i, &p) in positions.iter().enumerate() {
        let y = PLOT_TOP + 15.0 + 16.0 * i as f64;
        let lx = PLOT_LEFT + 12.0;
        svg.raw(&format!(
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#,
            lx + 20.0,
            color(p)
        ));
        svg.text(lx + 25.0, y + 4.0, "start", "legend", &format!("p{p}"));
    }
    svg.finish()
}

/// Paired effects with least-squares line and Pearson r.
pub fn effects_svg(rows: &[EffectPairRow]) -> String {
    let xs: Vec<f64> = rows.iter().map(|r| r.effect_primary).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.effect_acoustic).collect();
    let (lo, hi) = xs
        .iter()
        .chain(&ys)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.05 };
    let range = (lo - pad, hi + pad);
    let axes = Axes::new(range, range);
    let mut svg = Svg::new("Cross-context generalization effects");
    clip_path(&mut svg);
    svg.axes(&axes, "primary representation effect", "acoustic baseline effect");
    let (a0, a1) = axes.x;
    svg.raw(&format!(
        r##"<line class="identity" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="3,3"/>"##,
        axes.px(a0),
        axes.py(a0),
        axes.px(a1),
        axes.py(a1)
    ));

    let n = xs.len() as f64;
    if xs.len() >= 2 {
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx > 0.0 {
            let slope = sxy / sxx;
            let at = |x: f64| my + slope * (x - mx);
            svg.raw(&format!(
                r##"<line class="fit" data-slope="{slope}" data-intercept="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="1.5" clip-path="url(#plot-area)"/>"##,
                at(0.0),
                axes.px(a0),
                axes.py(at(a0)),
                axes.px(a1),
                axes.py(at(a1))
            ));
        }
    }
    for r in rows {
        svg.raw(&format!(
            r##"<circle class="point" data-train="{}" data-test="{}" data-x="{}" data-y="{}" cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"/>"##,
            escape(&r.train_context),
            escape(&r.test_context),
            r.effect_primary,
            r.effect_acoustic,
            axes.px(r.effect_primary),
            axes.py(r.effect_acoustic)
        ));
    }
    let label = match pearson(&xs, &ys) {
        Ok((r, p)) => format!("r = {r:.2} (p = {p:.3}, n = {})", xs.len()),
        Err(_) => format!("r = n/a (n = {})", xs.len()),
    };
    svg.text(PLOT_LEFT + 12.0, PLOT_TOP + 20.0, "start", "r-label", &label);
    svg.finish()
}
