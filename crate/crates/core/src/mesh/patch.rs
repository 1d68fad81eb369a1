use super::{MeshTopology, Point};
use crate::error::{Error, Result};
use crate::geometry::{perp, slot_of};

/// The ordered star of triangles around a vertex `z`.
///
/// Triangles are indexed `0..n` and run counter-clockwise. Spoke `k`
/// (`0..=n`) is the edge `{z, y[k]}`; triangle `k` lies between spokes `k`
/// and `k + 1`. For an interior vertex spoke `n` is spoke `0` again; for a
/// boundary vertex spokes `0` and `n` are the two boundary edges.
///
/// In the 1-based notation of the analysis, `T_j` is triangle `j - 1` and
/// the edge `e_j` shared by `T_j` and `T_{j+1}` is spoke `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexPatch {
    pub center: usize,
    pub z: Point,
    pub interior: bool,
    pub triangles: Vec<usize>,
    /// Opposite vertex of each spoke; `spokes.len() == n + 1`.
    pub spokes: Vec<usize>,
    /// Global edge index of each spoke.
    pub edges: Vec<usize>,
    /// Spoke endpoint coordinates.
    pub y: Vec<Point>,
    pub spoke_len: Vec<f64>,
    /// Unit tangent of each spoke, pointing away from `z`.
    pub tangents: Vec<Point>,
    /// Unit normal of each spoke, pointing out of triangle `k - 1` (the
    /// counter-clockwise rotation of the tangent).
    pub normals: Vec<Point>,
    /// Angle at `z` in each triangle.
    pub theta: Vec<f64>,
    pub areas: Vec<f64>,
    /// Outward unit normal of the edge opposite `z` in each triangle.
    pub opp_normals: Vec<Point>,
    pub opp_len: Vec<f64>,
    /// Distance from `z` to the opposite edge in each triangle.
    pub heights: Vec<f64>,
    /// Local slots of `(z, y[k], y[k+1])` inside triangle `k`.
    pub slots: Vec<[usize; 3]>,
    /// Diameter of the patch.
    pub h_z: f64,
}

impl VertexPatch {
    pub fn new(topo: &MeshTopology, z: usize) -> Result<Self> {
        if z >= topo.num_vertices() {
            return Err(Error::InvalidParams(format!("vertex {z} out of range")));
        }
        let incident = &topo.vertex_triangles[z];
        // each incident triangle spans the wedge from spoke `a` to spoke `b`
        let wedges: Vec<(usize, usize, usize)> = incident
            .iter()
            .map(|&t| {
                let tri = &topo.mesh.triangles[t];
                let s = slot_of(tri, z);
                (t, tri[(s + 1) % 3], tri[(s + 2) % 3])
            })
            .collect();
        let find_start = |a: usize| wedges.iter().filter(|w| w.1 == a).collect::<Vec<_>>();
        for w in &wedges {
            if find_start(w.1).len() > 1 {
                return Err(Error::NonManifold { vertex: z });
            }
        }
        let interior = !topo.is_boundary(z);
        let first = if interior {
            *wedges.iter().min_by_key(|w| w.0).unwrap()
        } else {
            let starts: Vec<_> = wedges.iter().filter(|w| !wedges.iter().any(|v| v.2 == w.1)).collect();
            if starts.len() != 1 {
                return Err(Error::NonManifold { vertex: z });
            }
            *starts[0]
        };

        let mut order = vec![first];
        loop {
            let last = order.last().unwrap().2;
            if interior && last == first.1 {
                break;
            }
            match find_start(last).first() {
                Some(&&w) if !order.iter().any(|o| o.0 == w.0) => order.push(w),
                _ => break,
            }
        }
        if order.len() != wedges.len() {
            return Err(Error::NonManifold { vertex: z });
        }

        let n = order.len();
        let triangles: Vec<usize> = order.iter().map(|w| w.0).collect();
        let mut spokes: Vec<usize> = order.iter().map(|w| w.1).collect();
        spokes.push(order[n - 1].2);
        let pz = topo.mesh.vertices[z];
        let y: Vec<Point> = spokes.iter().map(|&v| topo.mesh.vertices[v]).collect();
        let edges = spokes
            .iter()
            .map(|&v| topo.edge_between(z, v).ok_or(Error::NoSuchEdge(z, v)))
            .collect::<Result<Vec<_>>>()?;
        let spoke_len: Vec<f64> = y.iter().map(|p| (p - pz).norm()).collect();
        let tangents: Vec<Point> = y.iter().zip(&spoke_len).map(|(p, l)| (p - pz) / *l).collect();
        let normals: Vec<Point> = tangents.iter().map(perp).collect();

        let mut theta = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut opp_normals = Vec::with_capacity(n);
        let mut opp_len = Vec::with_capacity(n);
        let mut heights = Vec::with_capacity(n);
        let mut slots = Vec::with_capacity(n);
        for (k, &t) in triangles.iter().enumerate() {
            let tri = &topo.mesh.triangles[t];
            let g = &topo.geoms[t];
            let sz = slot_of(tri, z);
            theta.push(g.angles[sz]);
            areas.push(g.area);
            opp_normals.push(g.normals[sz]);
            opp_len.push(g.edge_len[sz]);
            heights.push(g.heights[sz]);
            slots.push([sz, slot_of(tri, spokes[k]), slot_of(tri, spokes[k + 1])]);
        }

        let mut h_z: f64 = 0.0;
        let ring: Vec<Point> = std::iter::once(pz).chain(y.iter().cloned()).collect();
        for (i, p) in ring.iter().enumerate() {
            for q in &ring[i + 1..] {
                h_z = h_z.max((p - q).norm());
            }
        }

        Ok(Self {
            center: z,
            z: pz,
            interior,
            triangles,
            spokes,
            edges,
            y,
            spoke_len,
            tangents,
            normals,
            theta,
            areas,
            opp_normals,
            opp_len,
            heights,
            slots,
            h_z,
        })
    }

    /// Number of triangles `N`.
    pub fn valence(&self) -> usize {
        self.triangles.len()
    }

    /// Whether spoke `k` is an interior edge of the mesh.
    pub fn spoke_is_interior(&self, k: usize) -> bool {
        self.interior || (k > 0 && k < self.valence())
    }

    /// Spoke indices of the interior edges in order: `1..=n` for interior
    /// vertices, `1..n` on the boundary.
    pub fn interior_spokes(&self) -> std::ops::Range<usize> {
        if self.interior { 1..self.valence() + 1 } else { 1..self.valence() }
    }

    /// Position of global triangle `t` in the patch ordering.
    pub fn position(&self, t: usize) -> Option<usize> {
        self.triangles.iter().position(|&u| u == t)
    }

    /// Spoke index of the edge towards vertex `v`.
    pub fn spoke_to(&self, v: usize) -> Option<usize> {
        let n = self.valence();
        let upper = if self.interior { n } else { n + 1 };
        self.spokes[..upper].iter().position(|&w| w == v)
    }

    /// The two patch triangles on either side of spoke `k`:
    /// `(k - 1, k)` cyclically for interior vertices.
    pub fn spoke_triangles(&self, k: usize) -> (usize, usize) {
        let n = self.valence();
        let k = if self.interior { k % n } else { k };
        let before = if k == 0 { n - 1 } else { k - 1 };
        (before, k % n)
    }
}
