//! Global linear algebra: degrees of freedom for the cubic velocity space and
//! the discontinuous quadratic pressure space, assembly of the divergence
//! pairing and norms, rank, inf-sup constant, spurious pressure modes and the
//! spline dimension arithmetic.

mod analysis;
mod spline;

pub use analysis::*;
pub use spline::*;

use crate::fields::poly::{self, Cubic, Quad};
use crate::fields::PatchField;
use crate::mesh::MeshTopology;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// A velocity Lagrange node that is not on the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Vertex(usize),
    /// Slot 0 sits at one third of the edge from its lower-index endpoint.
    Edge { edge: usize, slot: usize },
    Cell(usize),
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub nodes: Vec<Node>,
    /// Global node of each local cubic node per triangle; `None` on the boundary.
    pub local: Vec<[Option<usize>; 10]>,
    pub num_triangles: usize,
}

impl DofMap {
    /// Velocity unknowns, two per node (`2 * node + component`).
    pub fn velocity_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn pressure_dofs(&self) -> usize {
        6 * self.num_triangles
    }
}

/// Interior vertices, then two nodes per interior edge, then one per triangle.
pub fn number_dofs(topo: &MeshTopology) -> DofMap {
    let mut nodes = Vec::new();
    let mut vertex_node = vec![None; topo.num_vertices()];
    for v in 0..topo.num_vertices() {
        if !topo.is_boundary(v) {
            vertex_node[v] = Some(nodes.len());
            nodes.push(Node::Vertex(v));
        }
    }
    let mut edge_node = vec![None; topo.edges.len()];
    for (e, edge) in topo.edges.iter().enumerate() {
        if edge.is_interior() {
            edge_node[e] = Some(nodes.len());
            nodes.push(Node::Edge { edge: e, slot: 0 });
            nodes.push(Node::Edge { edge: e, slot: 1 });
        }
    }
    let mut local = Vec::with_capacity(topo.counts.t);
    for (t, tri) in topo.mesh.triangles.iter().enumerate() {
        let mut l = [None; 10];
        for s in 0..3 {
            l[s] = vertex_node[tri[s]];
        }
        for k in 0..3 {
            let e = topo.tri_edges[t][k];
            if let Some(first) = edge_node[e] {
                let low = topo.edges[e].vertices[0];
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                l[3 + 2 * k] = Some(first + usize::from(a != low));
                l[4 + 2 * k] = Some(first + usize::from(b != low));
            }
        }
        l[9] = Some(nodes.len());
        nodes.push(Node::Cell(t));
        local.push(l);
    }
    DofMap { nodes, local, num_triangles: topo.counts.t }
}

/// The velocity field with nodal coefficients `x`.
pub fn velocity_field(topo: &MeshTopology, dofs: &DofMap, x: &[f64]) -> PatchField {
    let basis = poly::lagrange_basis();
    let mut f = PatchField::zero();
    for t in 0..topo.counts.t {
        let mut c = [[0.0; 10]; 2];
        let mut any = false;
        for (n, node) in dofs.local[t].iter().enumerate() {
            let Some(node) = node else { continue };
            for d in 0..2 {
                let a = x[2 * node + d];
                if a != 0.0 {
                    any = true;
                    for i in 0..10 {
                        c[d][i] += a * basis[n][i];
                    }
                }
            }
        }
        if any {
            f.coeffs.insert(t, c);
        }
    }
    f
}

/// Nodal coefficients of a continuous piecewise cubic field vanishing on the
/// boundary (the inverse of [`velocity_field`]).
pub fn velocity_coefficients(dofs: &DofMap, f: &PatchField) -> Vec<f64> {
    let mut x = vec![0.0; dofs.velocity_dofs()];
    for &t in f.coeffs.keys() {
        for (n, node) in dofs.local[t].iter().enumerate() {
            if let Some(node) = node {
                let v = f.value(t, &poly::lagrange_node(n));
                x[2 * node] = v.x;
                x[2 * node + 1] = v.y;
            }
        }
    }
    x
}

/// Local quadratic pressure basis: `l_i(2 l_i - 1)` for vertex slot `i`, then
/// `4 l_{k+1} l_{k+2}` for the midpoint opposite slot `k`.
pub fn pressure_basis() -> [Quad; 6] {
    let mut b = [[0.0; 6]; 6];
    for i in 0..3 {
        let mut e = [0u8; 3];
        e[i] = 2;
        b[i][poly::quad_index(e)] = 2.0;
        // -l_i, homogenized by (l_0 + l_1 + l_2)
        for j in 0..3 {
            let mut e = [0u8; 3];
            e[i] += 1;
            e[j] += 1;
            b[i][poly::quad_index(e)] -= 1.0;
        }
    }
    for k in 0..3 {
        let mut e = [0u8; 3];
        e[(k + 1) % 3] = 1;
        e[(k + 2) % 3] = 1;
        b[3 + k][poly::quad_index(e)] = 4.0;
    }
    b
}

/// Pressure unknown for local basis `local` of triangle `t`.
pub fn pressure_dof(t: usize, local: usize) -> usize {
    6 * t + local
}

fn cubic_gradient(topo: &MeshTopology, t: usize, c: &Cubic, l: &[f64; 3]) -> [f64; 2] {
    let g = topo.geoms[t].hat_gradients();
    let mut out = [0.0; 2];
    for k in 0..3 {
        let d = poly::eval_quad(&poly::derivative(c, k), l);
        out[0] += d * g[k].x;
        out[1] += d * g[k].y;
    }
    out
}

/// `B[q, v] = int q div v`, pressure unknowns by velocity unknowns.
pub fn assemble_divergence(topo: &MeshTopology, dofs: &DofMap) -> DMatrix<f64> {
    let basis = poly::lagrange_basis();
    let pbasis = pressure_basis();
    let rule = poly::triangle_rule();
    let mut b = DMatrix::zeros(dofs.pressure_dofs(), dofs.velocity_dofs());
    for t in 0..topo.counts.t {
        let area = topo.geoms[t].area;
        for (w_pt, w) in rule {
            let q: Vec<f64> = pbasis.iter().map(|p| poly::eval_quad(p, w_pt)).collect();
            for (n, node) in dofs.local[t].iter().enumerate() {
                let Some(node) = node else { continue };
                let g = cubic_gradient(topo, t, &basis[n], w_pt);
                for d in 0..2 {
                    for (a, qa) in q.iter().enumerate() {
                        b[(pressure_dof(t, a), 2 * node + d)] += area * w * qa * g[d];
                    }
                }
            }
        }
    }
    b
}

/// Which velocity norm enters the inf-sup quotient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocityNorm {
    /// Stiffness plus mass.
    #[default]
    H1Full,
    H1Seminorm,
}

/// Velocity Gram matrix in the chosen norm.
pub fn assemble_velocity_norm(topo: &MeshTopology, dofs: &DofMap, norm: VelocityNorm) -> DMatrix<f64> {
    let basis = poly::lagrange_basis();
    let rule = poly::triangle_rule();
    let mut a = DMatrix::zeros(dofs.velocity_dofs(), dofs.velocity_dofs());
    for t in 0..topo.counts.t {
        let area = topo.geoms[t].area;
        let mut local = [[0.0; 10]; 10];
        for (l, w) in rule {
            let vals: Vec<f64> = basis.iter().map(|c| poly::eval_cubic(c, l)).collect();
            let grads: Vec<[f64; 2]> = basis.iter().map(|c| cubic_gradient(topo, t, c, l)).collect();
            for m in 0..10 {
                for n in 0..10 {
                    let mut v = grads[m][0] * grads[n][0] + grads[m][1] * grads[n][1];
                    if norm == VelocityNorm::H1Full {
                        v += vals[m] * vals[n];
                    }
                    local[m][n] += area * w * v;
                }
            }
        }
        for (m, gm) in dofs.local[t].iter().enumerate() {
            let Some(gm) = gm else { continue };
            for (n, gn) in dofs.local[t].iter().enumerate() {
                let Some(gn) = gn else { continue };
                for d in 0..2 {
                    a[(2 * gm + d, 2 * gn + d)] += local[m][n];
                }
            }
        }
    }
    a
}

/// Pressure L2 mass matrix (block diagonal, 6x6 per triangle).
pub fn assemble_pressure_mass(topo: &MeshTopology) -> DMatrix<f64> {
    let pbasis = pressure_basis();
    let n = 6 * topo.counts.t;
    let mut m = DMatrix::zeros(n, n);
    for t in 0..topo.counts.t {
        let area = topo.geoms[t].area;
        for a in 0..6 {
            for b in 0..6 {
                m[(pressure_dof(t, a), pressure_dof(t, b))] =
                    poly::integrate(area, |l| poly::eval_quad(&pbasis[a], l) * poly::eval_quad(&pbasis[b], l));
            }
        }
    }
    m
}

/// `(A, M)`: velocity Gram matrix in the full H1 norm and pressure mass.
pub fn assemble_norms(topo: &MeshTopology, dofs: &DofMap) -> (DMatrix<f64>, DMatrix<f64>) {
    (assemble_velocity_norm(topo, dofs, VelocityNorm::H1Full), assemble_pressure_mass(topo))
}

/// Coordinate-format text of the nonzero entries, 1-based.
pub fn to_matrix_market(m: &DMatrix<f64>) -> String {
    let entries: Vec<(usize, usize, f64)> = (0..m.ncols())
        .flat_map(|j| (0..m.nrows()).map(move |i| (i, j)))
        .filter_map(|(i, j)| (m[(i, j)] != 0.0).then(|| (i, j, m[(i, j)])))
        .collect();
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    writeln!(s, "{} {} {}", m.nrows(), m.ncols(), entries.len()).unwrap();
    for (i, j, v) in entries {
        writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v).unwrap();
    }
    s
}
