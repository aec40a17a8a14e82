//! Static SVG plots: a planar scatter with the predicted set overlaid, and
//! coordinate paths of functional snapshots.

use std::fmt::Write;

use crate::criteria::ADescriptor;
use crate::grid::GridFn;

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

struct Frame {
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        PAD + (v - self.lo) / (self.hi - self.lo) * (SIZE - 2.0 * PAD)
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - self.x(v)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
}

fn polyline(out: &mut String, pts: &[(f64, f64)], stroke: &str) {
    let _ = write!(out, "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\" points=\"");
    for (x, y) in pts {
        let _ = write!(out, "{x:.2},{y:.2} ");
    }
    out.push_str("\"/>\n");
}

/// Scatter of planar points (first two coordinates) over the set `a`.
pub fn scatter(points: &[Vec<f64>], net: &[Vec<f64>], a: &ADescriptor) -> String {
    let extent = points
        .iter()
        .chain(net)
        .flat_map(|p| p.iter().take(2))
        .fold(1.0f64, |m, v| m.max(v.abs()))
        * 1.1;
    let f = Frame {
        lo: -extent,
        hi: extent,
    };
    let mut out = String::new();
    header(&mut out, "S_n / c_n with the predicted set");
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#ccc\"/>",
        f.x(-extent),
        f.y(0.0),
        f.x(extent),
        f.y(0.0)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#ccc\"/>",
        f.x(0.0),
        f.y(-extent),
        f.x(0.0),
        f.y(extent)
    );
    match a {
        ADescriptor::Ellipsoid { shape } if shape.dim() >= 2 => {
            let pts: Vec<(f64, f64)> = (0..=128)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
                    let mut y = vec![0.0; shape.dim()];
                    y[0] = th.cos();
                    y[1] = th.sin();
                    let p = shape.mul_vec(&y);
                    (f.x(p[0]), f.y(p[1]))
                })
                .collect();
            polyline(&mut out, &pts, "#2a6");
        }
        ADescriptor::Star { star } => {
            for s in star.segments() {
                let (x, y) = (s.sigma * s.z[0], s.z.get(1).map_or(0.0, |v| s.sigma * v));
                polyline(&mut out, &[(f.x(-x), f.y(-y)), (f.x(x), f.y(y))], "#2a6");
            }
        }
        ADescriptor::Points { points } => {
            for p in points {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"#2a6\"/>",
                    f.x(p[0]),
                    f.y(p.get(1).copied().unwrap_or(0.0))
                );
            }
        }
        _ => {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#2a6\"/>", f.x(0.0), f.y(0.0));
        }
    }
    for p in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#36c\" fill-opacity=\"0.5\"/>",
            f.x(p[0]),
            f.y(p.get(1).copied().unwrap_or(0.0))
        );
    }
    for p in net {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"#c33\"/>",
            f.x(p[0]),
            f.y(p.get(1).copied().unwrap_or(0.0))
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Every coordinate of every snapshot against `t ∈ [0, 1]`.
pub fn paths(snapshots: &[GridFn]) -> String {
    let extent = snapshots.iter().map(|s| s.sup_norm()).fold(1.0f64, f64::max) * 1.1;
    let fy = Frame {
        lo: -extent,
        hi: extent,
    };
    let fx = Frame { lo: 0.0, hi: 1.0 };
    const COLORS: [&str; 4] = ["#36c", "#c33", "#2a6", "#a5c"];
    let mut out = String::new();
    header(&mut out, "partial-sum process snapshots");
    for s in snapshots {
        for k in 0..s.dim() {
            let pts: Vec<(f64, f64)> = (0..=s.n_grid()).map(|i| (fx.x(s.node(i)), fy.y(s.point(i)[k]))).collect();
            polyline(&mut out, &pts, COLORS[k % COLORS.len()]);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    #[test]
    fn scatter_is_well_formed() {
        let s = scatter(
            &[vec![0.5, 0.1], vec![-0.2, 0.3]],
            &[vec![0.5, 0.1]],
            &ADescriptor::Ellipsoid {
                shape: Mat::identity(2),
            },
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<circle").count(), 3);
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn paths_draw_each_coordinate() {
        let f = GridFn::from_fn(2, 8, |t| vec![t, -t]).unwrap();
        assert_eq!(paths(&[f.clone(), f]).matches("<polyline").count(), 4);
    }
}
