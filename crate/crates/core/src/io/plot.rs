use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::report::format_sig;
use crate::error::{Error, Result};
use crate::survival::{km_survival_at, KaplanMeierCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Svg,
    Csv,
}

impl PlotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            PlotFormat::Svg => "svg",
            PlotFormat::Csv => "csv",
        }
    }
}

impl FromStr for PlotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(PlotFormat::Svg),
            "csv" => Ok(PlotFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown plot format `{other}`"))),
        }
    }
}

/// Step coordinates: a `t = 0` row followed by one row per event time.
pub fn render_km_csv(curve: &KaplanMeierCurve<f64>) -> String {
    let mut out = String::from("time,survival,n_at_risk,n_events\n");
    let _ = writeln!(out, "0,1,{},0", curve.n_total);
    for s in &curve.steps {
        let _ = writeln!(out, "{},{},{},{}", s.time, s.survival, s.n_at_risk, s.n_events);
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

/// Right-continuous step plot with censoring ticks. Output depends only on
/// the curve.
pub fn render_km_svg(curve: &KaplanMeierCurve<f64>) -> String {
    let last_step = curve.steps.last().map_or(0.0, |s| s.time);
    let last_censor = curve.censored_times.iter().copied().fold(0.0, f64::max);
    let mut x_max = last_step.max(last_censor);
    if !(x_max > 0.0) {
        x_max = 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + t / x_max * plot_w;
    let py = |s: f64| TOP + (1.0 - s) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let (x0, y0, x1, y1) = (px(0.0), py(0.0), px(x_max), py(1.0));
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for i in 0..=5 {
        let t = x_max * i as f64 / 5.0;
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            format_sig(t, 3)
        );
    }
    for i in 0..=4 {
        let s = i as f64 / 4.0;
        let y = py(s);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{s:.2}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Time</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Survival probability</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // step path
    let mut path = format!("M {:.2} {:.2}", px(0.0), py(1.0));
    for s in &curve.steps {
        let _ = write!(path, " H {:.2} V {:.2}", px(s.time), py(s.survival));
    }
    let _ = write!(path, " H {:.2}", px(x_max));
    let _ = writeln!(
        svg,
        r#"<path d="{path}" fill="none" stroke="steelblue" stroke-width="2"/>"#
    );

    // censoring ticks
    if !curve.censored_times.is_empty() {
        let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
        for &t in &curve.censored_times {
            let (x, y) = (px(t), py(km_survival_at(curve, t)));
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                y - 4.0,
                y + 4.0
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_km_plot(
    curve: &KaplanMeierCurve<f64>,
    path: impl AsRef<Path>,
    format: PlotFormat,
) -> Result<()> {
    let body = match format {
        PlotFormat::Svg => render_km_svg(curve),
        PlotFormat::Csv => render_km_csv(curve),
    };
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{kaplan_meier, validate_sample};

    fn curve(raw: Vec<(f64, bool)>) -> KaplanMeierCurve<f64> {
        kaplan_meier(&validate_sample(raw, "").unwrap())
    }

    #[test]
    fn csv_has_origin_row_plus_steps() {
        let c = curve(vec![(1.0, true), (2.0, true), (3.0, true)]);
        let csv = render_km_csv(&c);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,1,3,0");
        assert_eq!(lines[4], "3,0,1,1");
    }

    #[test]
    fn flat_curve_is_single_horizontal_line() {
        let c = curve(vec![(1.0, false), (2.0, false)]);
        let svg = render_km_svg(&c);
        let path = svg.lines().find(|l| l.starts_with("<path")).unwrap();
        assert!(path.contains(r#"d="M 64.00 24.00 H 616.00""#), "{path}");
        assert_eq!(svg.matches("<line x1=").count() - 2 - 6 - 5, 2);
    }

    #[test]
    fn svg_is_deterministic() {
        let c = curve(vec![(1.0, true), (1.5, false), (3.0, true), (4.0, false)]);
        assert_eq!(render_km_svg(&c), render_km_svg(&c));
        assert!(render_km_svg(&c).starts_with("<svg"));
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = curve(vec![(1.0, true), (2.0, false)]);
        let p = dir.path().join("km.svg");
        emit_km_plot(&c, &p, PlotFormat::Svg).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), render_km_svg(&c));
        assert!(emit_km_plot(&c, dir.path().join("missing/km.csv"), PlotFormat::Csv).is_err());
    }
}
