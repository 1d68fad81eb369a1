//! Per-triangle geometric primitives.
//!
//! Slot `k` of a [`TriangleGeom`] always refers to the `k`-th input point;
//! edge-valued quantities at slot `k` describe the edge *opposite* that point.

use crate::error::{Error, Result};
use crate::mesh::{MeshTopology, Point};

/// Relative area threshold below which a triangle counts as degenerate.
pub const DEGENERACY: f64 = 1e-14;

/// Signed area of the triangle `(a, b, c)`; positive when counter-clockwise.
pub fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Counter-clockwise rotation by 90 degrees.
#[inline]
pub fn perp(v: &Point) -> Point {
    Point::new(-v.y, v.x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleGeom {
    pub points: [Point; 3],
    pub area: f64,
    pub angles: [f64; 3],
    pub cot: [f64; 3],
    /// Length of the edge opposite each vertex.
    pub edge_len: [f64; 3],
    /// Outward unit normal of the edge opposite each vertex.
    pub normals: [Point; 3],
    /// Distance from each vertex to the line of its opposite edge.
    pub heights: [f64; 3],
}

impl TriangleGeom {
    pub fn new(p0: Point, p1: Point, p2: Point) -> Result<Self> {
        let points = [p0, p1, p2];
        let signed = signed_area(&p0, &p1, &p2);
        let edge_len: [f64; 3] =
            std::array::from_fn(|k| (points[(k + 2) % 3] - points[(k + 1) % 3]).norm());
        let diam = edge_len.iter().cloned().fold(0.0, f64::max);
        if !(signed.abs() > DEGENERACY * diam * diam) {
            return Err(Error::Degenerate(format!(
                "({}, {}), ({}, {}), ({}, {})",
                p0.x, p0.y, p1.x, p1.y, p2.x, p2.y
            )));
        }
        let area = signed.abs();
        let orient = signed.signum();

        let mut angles = [0.0; 3];
        let mut cot = [0.0; 3];
        let mut normals = [Point::zeros(); 3];
        let mut heights = [0.0; 3];
        for k in 0..3 {
            let a = points[(k + 1) % 3] - points[k];
            let b = points[(k + 2) % 3] - points[k];
            let cross = (a.x * b.y - a.y * b.x).abs();
            let dot = a.dot(&b);
            angles[k] = cross.atan2(dot);
            cot[k] = dot / cross;
            // opposite edge runs from k+1 to k+2; for a CCW triangle the
            // outward side is its clockwise rotation
            let g = points[(k + 2) % 3] - points[(k + 1) % 3];
            normals[k] = Point::new(g.y, -g.x) * (orient / edge_len[k]);
            heights[k] = 2.0 * area / edge_len[k];
        }
        Ok(Self { points, area, angles, cot, edge_len, normals, heights })
    }

    /// Gradient of the barycentric coordinate (hat function) of vertex `slot`.
    #[inline]
    pub fn hat_gradient(&self, slot: usize) -> Point {
        -self.normals[slot] / self.heights[slot]
    }

    pub fn hat_gradients(&self) -> [Point; 3] {
        std::array::from_fn(|k| self.hat_gradient(k))
    }

    pub fn diameter(&self) -> f64 {
        self.edge_len.iter().cloned().fold(0.0, f64::max)
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: &Point) -> [f64; 3] {
        let [p0, p1, p2] = &self.points;
        let total = signed_area(p0, p1, p2);
        [
            signed_area(x, p1, p2) / total,
            signed_area(p0, x, p2) / total,
            signed_area(p0, p1, x) / total,
        ]
    }

    pub fn centroid(&self) -> Point {
        (self.points[0] + self.points[1] + self.points[2]) / 3.0
    }
}

/// Convenience wrapper matching the operation name used in reports.
pub fn triangle_geometry(p0: Point, p1: Point, p2: Point) -> Result<TriangleGeom> {
    TriangleGeom::new(p0, p1, p2)
}

pub fn hat_gradient(geom: &TriangleGeom, vertex_slot: usize) -> Point {
    geom.hat_gradient(vertex_slot)
}

/// Angles around an interior edge `e = {z, y}` as seen from `z`.
///
/// `triangles[0]` is the triangle that precedes `e` when sweeping
/// counter-clockwise around `z`, `triangles[1]` the one that follows it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePairAngles {
    pub triangles: [usize; 2],
    /// Angles at `z`.
    pub phi: [f64; 2],
    /// Angles at the other endpoint `y`.
    pub theta: [f64; 2],
}

pub fn edge_pair_geometry(topo: &MeshTopology, z: usize, y: usize) -> Result<EdgePairAngles> {
    let e = topo.edge_between(z, y).ok_or(Error::NoSuchEdge(z, y))?;
    let edge = &topo.edges[e];
    if edge.triangles.len() != 2 {
        return Err(Error::BoundaryEdge(z, y));
    }
    // the triangle in which the CCW order is (z, ?, y) has e as its end spoke
    let mut tris = [edge.triangles[0], edge.triangles[1]];
    let t0 = topo.mesh.triangles[tris[0]];
    let zs = slot_of(&t0, z);
    if t0[(zs + 2) % 3] != y {
        tris.swap(0, 1);
    }
    let phi = tris.map(|t| topo.geoms[t].angles[slot_of(&topo.mesh.triangles[t], z)]);
    let theta = tris.map(|t| topo.geoms[t].angles[slot_of(&topo.mesh.triangles[t], y)]);
    Ok(EdgePairAngles { triangles: tris, phi, theta })
}

/// Local slot of vertex `v` in triangle `tri`. Panics if absent.
#[inline]
pub fn slot_of(tri: &[usize; 3], v: usize) -> usize {
    tri.iter().position(|&w| w == v).expect("vertex not in triangle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn right_isoceles() {
        let g = TriangleGeom::new(p(0., 0.), p(1., 0.), p(0., 1.)).unwrap();
        assert!((g.area - 0.5).abs() < 1e-15);
        assert!((g.angles[0] - PI / 2.0).abs() < 1e-15);
        assert!((g.angles[1] - PI / 4.0).abs() < 1e-15);
        assert!((g.angles[2] - PI / 4.0).abs() < 1e-15);
        // psi = x for vertex (1,0), 1-x-y for the origin
        assert!((g.hat_gradient(1) - p(1., 0.)).norm() < 1e-15);
        assert!((g.hat_gradient(0) - p(-1., -1.)).norm() < 1e-15);
    }

    #[test]
    fn equilateral() {
        let g = TriangleGeom::new(p(0., 0.), p(1., 0.), p(0.5, 3f64.sqrt() / 2.0)).unwrap();
        assert!((g.area - 3f64.sqrt() / 4.0).abs() < 1e-15);
        for c in g.cot {
            assert!((c - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn collinear_rejected() {
        assert!(matches!(
            TriangleGeom::new(p(0., 0.), p(1., 1.), p(2., 2.)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn clockwise_input_keeps_outward_normals() {
        let g = TriangleGeom::new(p(0., 0.), p(0., 1.), p(1., 0.)).unwrap();
        // edge opposite the origin runs from (0,1) to (1,0); outward is (1,1)/sqrt2
        let s = 0.5f64.sqrt();
        assert!((g.normals[0] - p(s, s)).norm() < 1e-15);
        assert!((g.hat_gradient(2) - p(1., 0.)).norm() < 1e-15);
    }

    fn random_triangle(rng: &mut ChaCha8Rng) -> Option<TriangleGeom> {
        let pts: [Point; 3] =
            std::array::from_fn(|_| p(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)));
        let g = TriangleGeom::new(pts[0], pts[1], pts[2]).ok()?;
        // keep the sample reasonably shaped so relative tolerances are meaningful
        (g.angles.iter().cloned().fold(PI, f64::min) > 1e-3).then_some(g)
    }

    #[test]
    fn identities_on_random_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 10_000 {
            let Some(g) = random_triangle(&mut rng) else { continue };
            checked += 1;
            let s: f64 = g.angles.iter().sum();
            assert!((s - PI).abs() < 1e-12);
            for k in 0..3 {
                let a = 0.5 * g.heights[k] * g.edge_len[k];
                assert!((a - g.area).abs() <= 1e-10 * g.area);
                // h_T^y = |e| sin(theta) for both edges adjacent to vertex k,
                // where theta is the angle at the other endpoint of e
                for other in [(k + 1) % 3, (k + 2) % 3] {
                    let e = (g.points[k] - g.points[other]).norm();
                    let h = e * g.angles[other].sin();
                    assert!((h - g.heights[k]).abs() <= 1e-10 * g.heights[k]);
                    // t_e^z . grad psi_y = 1/|e| with z = other, y = k
                    let t = (g.points[k] - g.points[other]) / e;
                    let d = t.dot(&g.hat_gradient(k));
                    assert!((d - 1.0 / e).abs() <= 1e-10 / e);
                }
            }
        }
    }

    #[test]
    fn hat_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 200 {
            let Some(g) = random_triangle(&mut rng) else { continue };
            checked += 1;
            let x0 = g.centroid();
            let step = 1e-6 * g.diameter();
            for k in 0..3 {
                let f = |x: Point| g.barycentric(&x)[k];
                let fd = p(
                    (f(x0 + p(step, 0.)) - f(x0 - p(step, 0.))) / (2.0 * step),
                    (f(x0 + p(0., step)) - f(x0 - p(0., step))) / (2.0 * step),
                );
                let exact = g.hat_gradient(k);
                assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
            }
        }
    }
}
