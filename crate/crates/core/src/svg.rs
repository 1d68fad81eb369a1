//! SVG rendering of a mesh with vertex classes and an optional pressure
//! mode overlay. Presentation only.
//!
//! Palette:
//!
//! | item | mark |
//! |---|---|
//! | edges | `#555555` lines |
//! | SingularLI | black filled square |
//! | OddLI | `#1f77b4` filled circle |
//! | EvenLI | `#2ca02c` filled diamond |
//! | NotLI | `#d62728` hollow circle with a cross |
//! | BoundaryNonSingular | `#7f7f7f` small hollow circle |
//! | mode value > 0 | `#e66101` dot inside the corner |
//! | mode value < 0 | `#5e3c99` dot inside the corner |
//!
//! Mode dots sit between each corner and the centroid of its triangle; their
//! opacity scales with the magnitude.

use crate::classify::{LhStatus, VertexReport};
use crate::mesh::{MeshTopology, Point};
use std::fmt::Write;

pub const EDGE: &str = "#555555";
pub const SINGULAR: &str = "#000000";
pub const ODD: &str = "#1f77b4";
pub const EVEN: &str = "#2ca02c";
pub const NOT_LI: &str = "#d62728";
pub const BOUNDARY: &str = "#7f7f7f";
pub const POSITIVE: &str = "#e66101";
pub const NEGATIVE: &str = "#5e3c99";

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

struct Frame {
    min: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(topo: &MeshTopology) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &topo.mesh.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame { min: lo, scale, height: (hi.y - lo.y) * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: &Point) -> (f64, f64) {
        (MARGIN + (p.x - self.min.x) * self.scale, self.height - MARGIN - (p.y - self.min.y) * self.scale)
    }
}

fn marker(s: &mut String, status: LhStatus, x: f64, y: f64) {
    let r = 5.0;
    let _ = match status {
        LhStatus::SingularLI => {
            writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{SINGULAR}"/>"#, x - r, y - r, 2.0 * r, 2.0 * r)
        }
        LhStatus::OddLI => writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{ODD}"/>"#),
        LhStatus::EvenLI { .. } => writeln!(
            s,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{EVEN}"/>"#,
            x,
            y - 1.3 * r,
            x + 1.3 * r,
            y,
            x,
            y + 1.3 * r,
            x - 1.3 * r,
            y
        ),
        LhStatus::NotLI => writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="white" stroke="{NOT_LI}" stroke-width="2"/><path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{NOT_LI}" stroke-width="1.5"/>"#,
            x - 0.7 * r,
            y - 0.7 * r,
            x + 0.7 * r,
            y + 0.7 * r,
            x - 0.7 * r,
            y + 0.7 * r,
            x + 0.7 * r,
            y - 0.7 * r
        ),
        LhStatus::BoundaryNonSingular => {
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="white" stroke="{BOUNDARY}" stroke-width="1.5"/>"#)
        }
    };
}

/// The mesh, its vertex classes, and the corner values of `mode` (one
/// triple per triangle) when given.
pub fn render_svg(topo: &MeshTopology, vertices: &[VertexReport], mode: Option<&[[f64; 3]]>) -> String {
    let f = Frame::new(topo);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{:.0}" viewBox="0 0 {SIZE} {:.2}">"#,
        f.height.ceil(),
        f.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g stroke="{EDGE}" stroke-width="1">"#);
    for e in &topo.edges {
        let (a, b) = (f.map(&topo.mesh.vertices[e.vertices[0]]), f.map(&topo.mesh.vertices[e.vertices[1]]));
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, a.0, a.1, b.0, b.1);
    }
    let _ = writeln!(s, "</g>");
    if let Some(mode) = mode {
        let m = mode.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            let _ = writeln!(s, "<g>");
            for (t, tri) in topo.mesh.triangles.iter().enumerate() {
                let c = topo.geoms[t].centroid();
                for (k, &v) in tri.iter().enumerate() {
                    let val = mode[t][k];
                    if val.abs() <= 1e-8 * m {
                        continue;
                    }
                    let p = topo.mesh.vertices[v] * 0.7 + c * 0.3;
                    let (x, y) = f.map(&p);
                    let color = if val > 0.0 { POSITIVE } else { NEGATIVE };
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}" fill-opacity="{:.3}"/>"#,
                        0.25 + 0.75 * val.abs() / m
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }
    }
    for r in vertices {
        let (x, y) = f.map(&topo.mesh.vertices[r.vertex]);
        marker(&mut s, r.status, x, y);
    }
    s.push_str("</svg>\n");
    s
}
