use super::{Triangulation, VertexPatch};
use crate::error::{Error, Result};
use crate::geometry::TriangleGeom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub vertices: [usize; 2],
    /// One triangle for boundary edges, two for interior edges.
    pub triangles: Vec<usize>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.triangles.len() == 2
    }

    pub fn other(&self, v: usize) -> usize {
        if self.vertices[0] == v { self.vertices[1] } else { self.vertices[0] }
    }
}

/// Entity counts of a triangulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub t: usize,
    pub e: usize,
    pub e0: usize,
    pub v: usize,
    pub v0: usize,
}

impl Counts {
    pub fn euler(&self) -> i64 {
        self.t as i64 - self.e as i64 + self.v as i64
    }

    /// Euler characteristic of a disk plus a single boundary cycle.
    pub fn simply_connected(&self) -> bool {
        self.euler() == 1 && self.e - self.e0 == self.v - self.v0
    }
}

/// Connectivity derived from a [`Triangulation`]. Immutable once built.
#[derive(Clone, Debug)]
pub struct MeshTopology {
    pub mesh: Triangulation,
    pub geoms: Vec<TriangleGeom>,
    /// Sorted lexicographically by endpoints.
    pub edges: Vec<Edge>,
    /// `tri_edges[t][k]` is the edge opposite local vertex `k` of triangle `t`.
    pub tri_edges: Vec<[usize; 3]>,
    pub vertex_triangles: Vec<Vec<usize>>,
    /// All edges incident to each vertex (interior and boundary).
    pub vertex_edges: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
    pub counts: Counts,
    lookup: HashMap<(usize, usize), usize>,
}

impl MeshTopology {
    pub fn new(mesh: Triangulation) -> Result<Self> {
        let geoms = mesh
            .triangles
            .iter()
            .map(|t| TriangleGeom::new(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]))
            .collect::<Result<Vec<_>>>()?;

        let mut by_key: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                by_key.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut edges = Vec::with_capacity(by_key.len());
        let mut lookup = HashMap::with_capacity(by_key.len());
        for ((a, b), tris) in by_key {
            if tris.len() > 2 {
                return Err(Error::InvalidMesh(format!(
                    "edge {{{a}, {b}}} is shared by {} triangles",
                    tris.len()
                )));
            }
            lookup.insert((a, b), edges.len());
            edges.push(Edge { vertices: [a, b], triangles: tris });
        }

        let nv = mesh.num_vertices();
        let mut tri_edges = Vec::with_capacity(mesh.num_triangles());
        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            tri_edges.push(std::array::from_fn(|k| {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                lookup[&(a.min(b), a.max(b))]
            }));
            for &v in tri {
                vertex_triangles[v].push(t);
            }
        }
        if let Some(v) = vertex_triangles.iter().position(|ts| ts.is_empty()) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no triangle")));
        }
        let mut vertex_edges = vec![Vec::new(); nv];
        let mut boundary_vertex = vec![false; nv];
        for (i, e) in edges.iter().enumerate() {
            for &v in &e.vertices {
                vertex_edges[v].push(i);
                if !e.is_interior() {
                    boundary_vertex[v] = true;
                }
            }
        }

        let e0 = edges.iter().filter(|e| e.is_interior()).count();
        let counts = Counts {
            t: mesh.num_triangles(),
            e: edges.len(),
            e0,
            v: nv,
            v0: boundary_vertex.iter().filter(|b| !**b).count(),
        };

        let topo = Self {
            mesh,
            geoms,
            edges,
            tri_edges,
            vertex_triangles,
            vertex_edges,
            boundary_vertex,
            counts,
            lookup,
        };
        topo.check_hanging_vertices()?;
        topo.check_connected()?;
        Ok(topo)
    }

    fn check_hanging_vertices(&self) -> Result<()> {
        let pts = &self.mesh.vertices;
        for e in self.edges.iter().filter(|e| !e.is_interior()) {
            let (a, b) = (pts[e.vertices[0]], pts[e.vertices[1]]);
            let d = b - a;
            let len2 = d.norm_squared();
            for (i, p) in pts.iter().enumerate() {
                if e.vertices.contains(&i) {
                    continue;
                }
                let s = (p - a).dot(&d) / len2;
                if s <= 0.0 || s >= 1.0 {
                    continue;
                }
                let dist = (p - (a + d * s)).norm();
                if dist <= 1e-10 * len2.sqrt() {
                    return Err(Error::InvalidMesh(format!(
                        "vertex {i} hangs on edge {{{}, {}}}",
                        e.vertices[0], e.vertices[1]
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let nt = self.counts.t;
        let mut seen = vec![false; nt];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for &e in &self.tri_edges[t] {
                for &u in &self.edges[e].triangles {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(t) => Err(Error::InvalidMesh(format!("domain is disconnected (triangle {t} unreachable)"))),
            None => Ok(()),
        }
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Interior edges incident to `v` (the set `E_h(v)`).
    pub fn interior_edges_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertex_edges[v].iter().copied().filter(|&e| self.edges[e].is_interior())
    }

    pub fn num_vertices(&self) -> usize {
        self.counts.v
    }

    pub fn patch(&self, z: usize) -> Result<VertexPatch> {
        VertexPatch::new(self, z)
    }

    /// Ratio of the largest to the smallest triangle diameter.
    pub fn quasi_uniformity(&self) -> f64 {
        let (lo, hi) = self.geoms.iter().map(|g| g.diameter()).fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
        hi / lo
    }
}

/// Builds the topology; equivalent to [`MeshTopology::new`].
pub fn build_topology(mesh: Triangulation) -> Result<MeshTopology> {
    MeshTopology::new(mesh)
}
