//! Planar paving plots: component hulls as translucent polygons, ν-atoms
//! as dots with area proportional to weight, μ-atoms as crosses, and
//! boundary attachments as rings in the color of their component.

use std::fmt::Write;

use motpaver::paving::ComponentPaving;
use motpaver::{DiscreteMeasure, Scalar, Tolerance};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];
const SIZE: f64 = 480.0;
const MARGIN: f64 = 30.0;

/// Orders polygon vertices counterclockwise around their centroid.
fn ccw(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let n = points.len().max(1) as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    points.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.total_cmp(&tb)
    });
    points
}

pub fn render<S: Scalar>(
    paving: &ComponentPaving<S>,
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    tol: Tolerance,
) -> Result<String, motpaver::Error<S>> {
    let xy = |p: &[S]| (p[0].to_f64(), p[1].to_f64());
    let all: Vec<(f64, f64)> = mu.atoms().iter().chain(nu.atoms()).map(|p| xy(p)).collect();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &all {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let to_screen = |(x, y): (f64, f64)| (MARGIN + (x - lo_x) * scale, SIZE - MARGIN - (y - lo_y) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for (k, c) in paving.components.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let vertices: Vec<(f64, f64)> = c.polytope.vertices(tol)?.iter().map(|p| to_screen(xy(p))).collect();
        let path: Vec<String> = ccw(vertices).iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
    }
    let heaviest = nu.weights().iter().map(Scalar::to_f64).fold(0.0, f64::max);
    for (y, w) in nu.atoms().iter().zip(nu.weights()) {
        let (sx, sy) = to_screen(xy(y));
        let r = 2.0 + 6.0 * (w.to_f64() / heaviest).sqrt();
        let _ = writeln!(out, r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="{r:.2}" fill="#333333"/>"##);
    }
    for (k, c) in paving.components.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for a in c.attachments.iter().filter(|a| !a.in_ri) {
            let (sx, sy) = to_screen(xy(nu.atom(a.atom)));
            let r = 10.0 + 3.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="{r:.2}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
    }
    for (i, x) in mu.atoms().iter().enumerate() {
        let color = PALETTE[paving.atom_component[i] % PALETTE.len()];
        let (sx, sy) = to_screen(xy(x));
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}" stroke-width="2.5"/>"#,
            sx - 6.0,
            sy - 6.0,
            sx + 6.0,
            sy + 6.0,
            sx - 6.0,
            sy + 6.0,
            sx + 6.0,
            sy - 6.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
