//! Minimal SVG overlay of demonstrations and a reproduction.

use mc_elmap::Trajectory;
use nalgebra::DMatrix;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 20.0;

/// Plots the first two coordinates; one-dimensional data is plotted
/// against the point index.
pub fn overlay(demos: &[Trajectory], repro: &DMatrix<f64>) -> String {
    let xy = |p: &DMatrix<f64>| -> Vec<(f64, f64)> {
        (0..p.nrows())
            .map(|i| if p.ncols() >= 2 { (p[(i, 0)], p[(i, 1)]) } else { (i as f64, p[(i, 0)]) })
            .collect()
    };
    let curves: Vec<Vec<(f64, f64)>> = demos.iter().map(|d| xy(d.points())).collect();
    let repro = xy(repro);
    let all = curves.iter().flatten().chain(repro.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let path = |pts: &[(f64, f64)]| -> String {
        pts.iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", MARGIN + (x - x0) * scale, SIZE - MARGIN - (y - y0) * scale))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for c in &curves {
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"#9aa0a6\" stroke-width=\"1\" points=\"{}\"/>\n",
            path(c)
        ));
    }
    out.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#d93025\" stroke-width=\"2\" points=\"{}\"/>\n",
        path(&repro)
    ));
    out.push_str("</svg>\n");
    out
}
