//! Triangulations, their derived topology and vertex patches.

mod generate;
mod io;
mod patch;
mod topology;

pub use generate::{
    boundary_fan, crossed, generate, ngon_patch, perturbed_grid, random_boundary_fan, random_ngon, three_lines, type1_diagonal, Preset,
};
pub use io::{load_mesh, read_mesh, write_mesh};
pub use patch::VertexPatch;
pub use topology::{build_topology, Counts, Edge, MeshTopology};

use crate::error::{Error, Result};
use crate::geometry::{signed_area, DEGENERACY};
use std::collections::HashSet;

pub type Point = nalgebra::Vector2<f64>;

/// A 2D triangulation with counter-clockwise triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Validates the raw data and reorients clockwise triangles.
    ///
    /// Edge-sharing, conformity and connectivity are checked when the
    /// topology is built; see [`MeshTopology::new`].
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let nv = vertices.len();
        if let Some((i, v)) = vertices.iter().enumerate().find(|(_, v)| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite: {v:?}")));
        }
        let mut seen = HashSet::with_capacity(triangles.len());
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad}, mesh has {nv}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex: {tri:?}")));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let area = signed_area(&a, &b, &c);
            let diam = (b - a).norm().max((c - b).norm()).max((a - c).norm());
            if area.abs() <= DEGENERACY * diam * diam {
                return Err(Error::Degenerate(format!("triangle {t} {tri:?}")));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
            let mut key = *tri;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::InvalidMesh(format!("duplicate triangle {t} {tri:?}")));
            }
        }
        Ok(Self { vertices, triangles })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Applies `f` to every vertex. Orientation is re-normalized, so
    /// reflections are allowed.
    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Result<Self> {
        Self::new(self.vertices.iter().map(f).collect(), self.triangles.clone())
    }

    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY));
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }
}
