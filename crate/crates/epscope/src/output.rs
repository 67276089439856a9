//! Deterministic dataset emitters: wide CSV (one row per grid point) and a
//! minimal SVG line plot for eyeballing trajectories.

use std::fmt::Write as _;

use crate::sweep::SweepResult;

/// Fixed numeric formatting: 12 significant digits, scientific notation,
/// `nan` for undefined entries. Identical inputs must yield identical bytes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.11e}", x)
    }
}

/// Wide CSV: `a`, then per state i: `E_i`, `gamma_half_i`, `re_b_i_j` and
/// `im_b_i_j` for j = 1..N, `delta_i`, `A_i`, then `B_i_j` per pair i < j.
pub fn sweep_csv(result: &SweepResult) -> String {
    let n = result.trajectories.len();
    let mut out = String::new();
    out.push('a');
    for i in 1..=n {
        write!(out, ",E_{i},gamma_half_{i}").unwrap();
        for j in 1..=n {
            write!(out, ",re_b_{i}_{j},im_b_{i}_{j}").unwrap();
        }
        write!(out, ",delta_{i},A_{i}").unwrap();
    }
    for &(i, j) in &result.pair_index {
        write!(out, ",B_{}_{}", i + 1, j + 1).unwrap();
    }
    out.push('\n');

    for (k, &a) in result.a.iter().enumerate() {
        out.push_str(&fmt_num(a));
        for traj in &result.trajectories {
            let p = &traj.points[k];
            out.push(',');
            out.push_str(&fmt_num(p.value.re));
            out.push(',');
            out.push_str(&fmt_num(-p.value.im));
            for c in &p.mixing.coefficients {
                out.push(',');
                out.push_str(&fmt_num(c.re));
                out.push(',');
                out.push_str(&fmt_num(c.im));
            }
            out.push(',');
            out.push_str(&fmt_num(p.mixing.delta));
            out.push(',');
            out.push_str(&fmt_num(p.a_measure));
        }
        for b in &result.b_cross[k] {
            out.push(',');
            out.push_str(&fmt_num(*b));
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// One framed panel with axes, min/max tick labels, and one polyline per
/// series. Non-finite points split the polyline.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &(x, y) in finite {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_max - x_min < 1e-300 {
        x_max = x_min + 1.0;
    }
    if y_max - y_min < 1e-300 {
        y_max = y_min + 1.0;
    }
    let pad = 0.04 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    )
    .unwrap();
    write!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (v, anchor, x, y) in [
        (x_min, "middle", px(x_min), HEIGHT - MARGIN_B + 18.0),
        (x_max, "middle", px(x_max), HEIGHT - MARGIN_B + 18.0),
        (y_min, "end", MARGIN_L - 6.0, py(y_min) + 4.0),
        (y_max, "end", MARGIN_L - 6.0, py(y_max) + 4.0),
    ] {
        write!(
            svg,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{:.4}</text>\n",
            v
        )
        .unwrap();
    }

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, svg: &mut String| {
            if seg.len() >= 2 {
                write!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                    seg.join(" ")
                )
                .unwrap();
            }
            seg.clear();
        };
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                segment.push(format!("{:.2},{:.2}", px(x), py(y)));
            } else {
                flush(&mut segment, &mut svg);
            }
        }
        flush(&mut segment, &mut svg);
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN_R - 130.0,
            MARGIN_T + 18.0 + 16.0 * si as f64,
            escape(&s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Energy trajectories of a sweep as one SVG panel.
pub fn sweep_svg(result: &SweepResult, title: &str) -> String {
    let series: Vec<Series> = result
        .trajectories
        .iter()
        .map(|t| Series {
            label: format!("E_{}", t.label + 1),
            points: t
                .points
                .iter()
                .map(|p| (p.a, p.value.re))
                .collect(),
        })
        .collect();
    line_plot(title, "a", "E", &series)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EnergyLaw, LevelSpec, ModelSpec};
    use crate::sweep::{run_sweep, SweepGrid};

    fn demo() -> SweepResult {
        let m = ModelSpec::two_level(
            LevelSpec::new(EnergyLaw::new(1.0, -0.5), 2.0),
            LevelSpec::new(EnergyLaw::new(0.0, 1.0), 2.2),
            0.05,
        );
        let grid = SweepGrid::new(0.2, 0.5, 7).unwrap();
        run_sweep(&m, &grid).unwrap()
    }

    #[test]
    fn fmt_num_is_fixed_width_scientific() {
        assert_eq!(fmt_num(2.0 / 3.0), "6.66666666667e-1");
        assert_eq!(fmt_num(-0.05), "-5.00000000000e-2");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.0), "0.00000000000e0");
    }

    #[test]
    fn csv_header_and_shape() {
        let r = demo();
        let csv = sweep_csv(&r);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "a,E_1,gamma_half_1,re_b_1_1,im_b_1_1,re_b_1_2,im_b_1_2,delta_1,A_1,\
             E_2,gamma_half_2,re_b_2_1,im_b_2_1,re_b_2_2,im_b_2_2,delta_2,A_2,B_1_2"
        );
        let cols = header.split(',').count();
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), r.a.len());
        for row in body {
            assert_eq!(row.split(',').count(), cols);
        }
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn csv_is_deterministic() {
        let a = sweep_csv(&demo());
        let b = sweep_csv(&demo());
        assert_eq!(a, b);
    }

    #[test]
    fn svg_has_one_polyline_per_trajectory() {
        let r = demo();
        let svg = sweep_svg(&r, "demo");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn svg_skips_non_finite_points() {
        let series = [Series {
            label: "s".into(),
            points: vec![(0.0, 0.0), (0.5, f64::NAN), (1.0, 1.0), (1.5, 1.2)],
        }];
        let svg = line_plot("t", "x", "y", &series);
        // the NaN splits the line; only the trailing pair survives as a segment
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
