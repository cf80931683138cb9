//! Minimal deterministic SVG line charts for trace series.

use adapt_core::numfmt::sig9;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 40.0;

/// Renders one series as an SVG line chart with labeled axes.
/// The x axis is the time step; the y axis is labeled with the unit.
pub fn line_chart(title: &str, unit: &str, values: &[f64]) -> String {
    let n = values.len();
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |i: usize| -> f64 {
        if n <= 1 {
            MARGIN_LEFT
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut points = String::new();
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        points.push_str(&format!("{:.2},{:.2}", x_of(i), y_of(v)));
    }

    let y_label = if unit.is_empty() {
        String::new()
    } else {
        format!(" [{unit}]")
    };
    let axis_bottom = MARGIN_TOP + plot_h;
    let axis_right = MARGIN_LEFT + plot_w;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}{}</text>\n",
        WIDTH / 2.0,
        title,
        y_label
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{axis_bottom}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{axis_bottom}\" x2=\"{axis_right}\" y2=\"{axis_bottom}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 4.0,
        sig9(hi)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN_LEFT - 6.0,
        axis_bottom + 4.0,
        sig9(lo)
    ));
    svg.push_str(&format!(
        "<text x=\"{MARGIN_LEFT}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">0</text>\n",
        axis_bottom + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{axis_right}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        axis_bottom + 16.0,
        n.saturating_sub(1)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">time step</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        axis_bottom + 32.0
    ));
    if !points.is_empty() {
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{points}\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_deterministic_and_well_formed() {
        let values: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1) % 3.0).collect();
        let a = line_chart("series", "Kbps", &values);
        let b = line_chart("series", "Kbps", &values);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("polyline"));
        assert!(a.contains("[Kbps]"));
    }

    #[test]
    fn empty_and_constant_series_render() {
        let empty = line_chart("empty", "", &[]);
        assert!(empty.contains("</svg>"));
        let constant = line_chart("flat", "", &[2.0; 10]);
        assert!(constant.contains("polyline"));
    }
}
